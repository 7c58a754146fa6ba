//! Exhaustive enumeration of the `2^N` environment random walks.
//!
//! Walk `n` takes step `+g_k` when bit `k` of `n` is clear (probability
//! `|α_k|²`) and `-g_k` when it is set (probability `|β_k|²`). The index
//! space is split into blocks by the high bits; each block starts from an
//! exactly summed energy and then walks its low bits in Gray-code order, so
//! every successive energy is a single `±2 g_k` update of the previous one.
//! Blocks are independent and are filled in parallel into disjoint output
//! slices.

use rayon::prelude::*;

/// Low bits walked per block. Bounds the length of every running-sum chain
/// to `2^LOW_BITS` updates.
pub(crate) const LOW_BITS: usize = 12;

pub(crate) struct Walks {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
}

#[cfg(test)]
/// Walk index of output slot `slot` (block-major, Gray order within a block).
pub(crate) fn walk_index(n_spins: usize, slot: usize) -> usize {
    let low = n_spins.min(LOW_BITS);
    let mask = (1usize << low) - 1;
    let i = slot & mask;
    (slot & !mask) | (i ^ (i >> 1))
}

pub(crate) fn enumerate_walks(steps: &[f64], up: &[f64]) -> Walks {
    debug_assert_eq!(steps.len(), up.len());
    let n = steps.len();
    let low = n.min(LOW_BITS);
    let high = n - low;
    let block_len = 1usize << low;

    // Subset products over the low spins, indexed by the flipped-spin mask.
    let mut table = vec![1.0f64; block_len];
    for (k, &u) in up[..low].iter().enumerate() {
        let size = 1usize << k;
        let d = 1.0 - u;
        for i in 0..size {
            let w = table[i];
            table[i] = w * u;
            table[i + size] = w * d;
        }
    }
    let low_top: f64 = steps[..low].iter().sum();

    let total = 1usize << n;
    let mut energies = vec![0.0f64; total];
    let mut weights = vec![0.0f64; total];
    energies.par_chunks_mut(block_len).zip(weights.par_chunks_mut(block_len)).enumerate().for_each(
        |(block, (e, w))| {
            let mut base_e = low_top;
            let mut base_w = 1.0;
            for j in 0..high {
                let k = low + j;
                if block >> j & 1 == 0 {
                    base_e += steps[k];
                    base_w *= up[k];
                } else {
                    base_e -= steps[k];
                    base_w *= 1.0 - up[k];
                }
            }
            let mut energy = base_e;
            let mut gray = 0usize;
            e[0] = energy;
            w[0] = table[0] * base_w;
            for i in 1..block_len {
                let bit = i.trailing_zeros() as usize;
                gray ^= 1 << bit;
                if gray >> bit & 1 == 1 {
                    energy -= 2.0 * steps[bit];
                } else {
                    energy += 2.0 * steps[bit];
                }
                e[i] = energy;
                w[i] = table[gray] * base_w;
            }
        },
    );
    Walks { energies, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(steps: &[f64], up: &[f64], n: usize) -> (f64, f64) {
        let mut e = 0.0;
        let mut w = 1.0;
        for k in 0..steps.len() {
            if n >> k & 1 == 0 {
                e += steps[k];
                w *= up[k];
            } else {
                e -= steps[k];
                w *= 1.0 - up[k];
            }
        }
        (e, w)
    }

    #[test]
    fn every_slot_matches_direct_evaluation() {
        for n in [1usize, 3, 12, 13, 15] {
            let steps: Vec<f64> = (0..n).map(|k| 0.3 + 0.17 * k as f64).collect();
            let up: Vec<f64> = (0..n).map(|k| 0.1 + 0.05 * k as f64).collect();
            let walks = enumerate_walks(&steps, &up);
            let mut seen = vec![false; 1 << n];
            for slot in 0..(1 << n) {
                let idx = walk_index(n, slot);
                assert!(!seen[idx]);
                seen[idx] = true;
                let (e, w) = direct(&steps, &up, idx);
                assert!((walks.energies[slot] - e).abs() < 1e-12, "n={n} slot={slot}");
                assert!((walks.weights[slot] - w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gray_walk_changes_one_step_at_a_time() {
        let steps = [1.0, 10.0, 100.0, 1000.0];
        let walks = enumerate_walks(&steps, &[0.5; 4]);
        for pair in walks.energies.windows(2) {
            let d = (pair[1] - pair[0]).abs();
            assert!(steps.iter().any(|g| (d - 2.0 * g).abs() < 1e-12), "jump {d}");
        }
    }
}
