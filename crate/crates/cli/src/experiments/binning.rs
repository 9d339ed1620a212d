//! Binned `|α_n|²` profiles compared with an ensemble curve.

use cmv_krylov::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    /// Relative position `n/D` of the bin centre.
    pub position: f64,
    pub mean_alpha_sq: f64,
    pub mean_curve: f64,
    /// `mean_alpha_sq / mean_curve`.
    pub ratio: f64,
    pub samples: usize,
}

/// Splits `lo·D < n < hi·D` of each chain into `bins` equal slices by
/// relative position and averages `|α_n|²` and `curve(D − n)` over all
/// chains. The closing coefficient is never included.
pub fn bin_against_curve<F: Fn(f64) -> f64>(
    chains: &[Vec<C64>],
    bins: usize,
    lo: f64,
    hi: f64,
    curve: F,
) -> Vec<BinRow> {
    let mut sum_a = vec![0.0; bins];
    let mut sum_c = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for alphas in chains {
        let d = alphas.len();
        for (n, a) in alphas.iter().enumerate().take(d.saturating_sub(1)) {
            let x = n as f64 / d as f64;
            if x <= lo || x >= hi {
                continue;
            }
            let b = (((x - lo) / (hi - lo)) * bins as f64) as usize;
            let b = b.min(bins - 1);
            sum_a[b] += a.norm_sqr();
            sum_c[b] += curve((d - n) as f64);
            count[b] += 1;
        }
    }
    (0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| {
            let c = count[b] as f64;
            BinRow {
                position: lo + (b as f64 + 0.5) * (hi - lo) / bins as f64,
                mean_alpha_sq: sum_a[b] / c,
                mean_curve: sum_c[b] / c,
                ratio: sum_a[b] / sum_c[b],
                samples: count[b],
            }
        })
        .collect()
}

/// Whether every bin ratio lies within `[1/factor, factor]`.
pub fn within_factor(bins: &[BinRow], factor: f64) -> bool {
    !bins.is_empty()
        && bins
            .iter()
            .all(|b| b.ratio <= factor && b.ratio >= 1.0 / factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_curve_gives_unit_ratio() {
        let d = 50;
        let chain: Vec<C64> = (0..d)
            .map(|n| C64::new((1.0 / ((d - n) as f64 + 1.0)).sqrt(), 0.0))
            .collect();
        let bins = bin_against_curve(&[chain], 5, 0.1, 0.9, |m| 1.0 / (m + 1.0));
        assert_eq!(bins.len(), 5);
        assert!(bins.iter().all(|b| (b.ratio - 1.0).abs() < 1e-12));
        assert!(within_factor(&bins, 1.01));
    }
}
