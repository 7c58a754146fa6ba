//! Quadrature rules for Gaussian-weighted integrals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 8;
pub const MAX_NODES: usize = 4096;

/// Gauss–Hermite rule for the standard normal measure folded onto `x ≥ 0`.
///
/// For a symmetric rule `Σ w_i f(x_i) = Σ w⁺_j [f(x_j) + f(−x_j)]/2 · 2`, so
/// storing only the non-negative nodes with doubled weights lets callers
/// integrate the even part of an integrand and have the odd part cancel
/// exactly. A node at zero (odd `n`) keeps its single weight.
#[derive(Debug, Clone)]
pub struct HalfRule {
    /// Non-negative nodes of `e^{−x²}` in increasing order.
    pub nodes: Vec<f64>,
    /// Folded weights, normalized so that they sum to 1.
    pub weights: Vec<f64>,
    pub order: usize,
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<HalfRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HalfRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached `n`-point rule.
pub fn gauss_hermite(n: usize) -> Result<Arc<HalfRule>> {
    if n < MIN_NODES {
        return Err(Error::invalid(format!("quadrature needs at least {MIN_NODES} nodes, got {n}")));
    }
    if n > MAX_NODES {
        return Err(Error::ResourceLimit { what: "quadrature nodes", requested: n, cap: MAX_NODES });
    }
    if let Some(rule) = cache().lock().unwrap().get(&n) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_half_rule(n));
    cache().lock().unwrap().insert(n, rule.clone());
    Ok(rule)
}

/// Number of eigenvalues of the Hermite Jacobi matrix below `x`.
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for k in 1..n {
        let b2 = 0.5 * k as f64;
        let denom = if q == 0.0 { f64::EPSILON * (1.0 + x.abs()) } else { q };
        q = -x - b2 / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `1 / Σ_{k<n} p̃_k(x)²` with the orthonormal recurrence
/// `x p̃_k = β_{k+1} p̃_{k+1} + β_k p̃_{k−1}`, `β_k = √(k/2)`, rescaled on the
/// fly so that large nodes do not overflow.
fn christoffel_weight(n: usize, x: f64) -> f64 {
    const BIG: f64 = 1e150;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n - 1 {
        let b_next = (0.5 * (k + 1) as f64).sqrt();
        let b_k = (0.5 * k as f64).sqrt();
        let next = (x * cur - b_k * prev) / b_next;
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            sum /= BIG * BIG;
            log_scale += BIG.ln();
        }
    }
    (-2.0 * log_scale).exp() / sum
}

fn build_half_rule(n: usize) -> HalfRule {
    let half = n / 2;
    let odd = n % 2 == 1;
    let upper = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    // the j-th non-negative node is eigenvalue number (n - half + j) in increasing order
    let mut nodes = Vec::with_capacity(half + odd as usize);
    if odd {
        nodes.push(0.0);
    }
    for j in 0..half {
        let index = n - half + j;
        let (mut lo, mut hi) = (0.0f64, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(n, mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        nodes.push(0.5 * (lo + hi));
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| if x == 0.0 { christoffel_weight(n, x) } else { 2.0 * christoffel_weight(n, x) })
        .collect();
    let total: f64 = weights.iter().rev().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    HalfRule { nodes, weights, order: n }
}

/// `n`-point Gauss–Legendre rule on `[−1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}
