use std::ops::Add;

const LEAF: usize = 32;

/// Fixed-shape pairwise summation of `f(0) + … + f(n-1)`.
///
/// The reduction tree depends only on `n`, so results are bit-identical no
/// matter how the caller schedules the surrounding work.
pub(crate) fn pairwise_sum<T, F>(n: usize, f: &F) -> T
where
    T: Copy + Default + Add<Output = T>,
    F: Fn(usize) -> T,
{
    fn go<T, F>(lo: usize, hi: usize, f: &F) -> T
    where
        T: Copy + Default + Add<Output = T>,
        F: Fn(usize) -> T,
    {
        if hi - lo <= LEAF {
            (lo..hi).fold(T::default(), |acc, i| acc + f(i))
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, n, f)
}

pub(crate) fn sum(xs: &[f64]) -> f64 {
    pairwise_sum(xs.len(), &|i| xs[i])
}

/// `n` evenly spaced points on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { stop } else { start + step * i as f64 }).collect()
        }
    }
}
