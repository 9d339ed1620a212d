//! Kicked-top ensembles over a `κx` window.

use cmv_krylov::ensembles::{chain_localization, loglog_fit, mean_stderr, ScanOptions};
use cmv_krylov::models::{Axis, KickedTopFamily, KickedTopParams};
use cmv_krylov::{cmv_build, cmv_factorization, DenseOperator, KrylovOptions, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::{bin_against_curve, BinRow};
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopRegime {
    Integrable,
    Chaotic,
}

impl TopRegime {
    pub fn name(self) -> &'static str {
        match self {
            TopRegime::Integrable => "integrable",
            TopRegime::Chaotic => "chaotic",
        }
    }

    pub fn params(self, two_j: usize, kappa_x: f64) -> KickedTopParams {
        match self {
            TopRegime::Integrable => KickedTopParams::integrable(two_j, kappa_x),
            TopRegime::Chaotic => KickedTopParams::chaotic(two_j, kappa_x),
        }
    }

    /// π-rotation axis commuting with the top: `Jx` for `b ∥ x`, `κz = 0`,
    /// and `Jy` for the chaotic parameters.
    pub fn parity_axis(self) -> Axis {
        match self {
            TopRegime::Integrable => Axis::X,
            TopRegime::Chaotic => Axis::Y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopConfig {
    pub spins: Vec<usize>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_step: f64,
    /// Coherent seed direction `(θ, φ)`.
    pub seed_direction: (f64, f64),
    pub steps_per_site: usize,
    pub stride: usize,
    /// Initial sites for the Krylov-basis average; zero skips it.
    pub basis_starts: usize,
}

impl Default for TopConfig {
    fn default() -> Self {
        Self {
            spins: vec![50, 100, 200, 400],
            kappa_min: 10.0,
            kappa_max: 12.0,
            kappa_step: 0.05,
            seed_direction: (0.8, 0.4),
            steps_per_site: 10,
            stride: 5,
            basis_starts: 16,
        }
    }
}

impl TopConfig {
    pub fn kappas(&self) -> Vec<f64> {
        let n = ((self.kappa_max - self.kappa_min) / self.kappa_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.kappa_min + i as f64 * self.kappa_step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopRun {
    pub regime: TopRegime,
    pub spin: usize,
    pub kappa_x: f64,
    pub sector_dim: usize,
    pub krylov_dim: usize,
    pub alphas: Vec<C64>,
    pub seed_k: f64,
    pub seed_exp_s: f64,
    pub basis_exp_s: Option<f64>,
}

/// One top: sector unitary, Krylov chain of the coherent seed, and
/// time-averaged localization.
pub fn top_run(
    family: &KickedTopFamily,
    regime: TopRegime,
    spin: usize,
    kappa_x: f64,
    cfg: &TopConfig,
) -> CliResult<TopRun> {
    let u = family.sector_unitary(kappa_x);
    let seed = family.coherent_seed(cfg.seed_direction.0, cfg.seed_direction.1)?;
    let (seq, _) = cmv_build(
        &DenseOperator::new(u),
        &seed,
        &KrylovOptions::default().without_basis(),
    )?;
    let seq = if seq.is_closed() {
        seq
    } else {
        seq.closed_at(seq.len())
    };
    let form = cmv_factorization(&seq)?;
    let scan = ScanOptions {
        starts: 1,
        steps_per_site: cfg.steps_per_site,
        stride: cfg.stride,
    };
    let (seed_k, seed_exp_s) = chain_localization(&form, &scan);
    let basis_exp_s = (cfg.basis_starts > 0).then(|| {
        chain_localization(
            &form,
            &ScanOptions {
                starts: cfg.basis_starts,
                ..scan
            },
        )
        .1
    });
    Ok(TopRun {
        regime,
        spin,
        kappa_x,
        sector_dim: family.sector.dim(),
        krylov_dim: seq.len(),
        alphas: seq.alphas().to_vec(),
        seed_k,
        seed_exp_s,
        basis_exp_s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopSizeRow {
    pub regime: TopRegime,
    pub spin: usize,
    pub sector_dim: usize,
    pub mean_krylov_dim: f64,
    pub mean_exp_s: f64,
    pub stderr_exp_s: f64,
    pub mean_basis_exp_s: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopReport {
    pub regime: TopRegime,
    pub sizes: Vec<TopSizeRow>,
    /// Fitted exponent of the seed `e^S` against the sector dimension.
    pub slope: f64,
    /// `|α_n|²` binned against the `β = 2` curve `1/(d − n + 1)` at the
    /// largest size.
    pub bins: Vec<BinRow>,
    pub runs: Vec<TopRun>,
}

pub fn kicked_top_scan(regime: TopRegime, cfg: &TopConfig) -> CliResult<TopReport> {
    let kappas = cfg.kappas();
    let mut sizes = Vec::new();
    let mut runs = Vec::new();
    for &spin in &cfg.spins {
        let family = KickedTopFamily::new(
            regime.params(2 * spin, kappas[0]),
            regime.parity_axis(),
            true,
        )?;
        let batch = kappas
            .par_iter()
            .map(|&k| top_run(&family, regime, spin, k, cfg))
            .collect::<CliResult<Vec<_>>>()?;
        let es: Vec<f64> = batch.iter().map(|r| r.seed_exp_s).collect();
        let (mean_exp_s, stderr_exp_s) = mean_stderr(&es);
        let basis: Vec<f64> = batch.iter().filter_map(|r| r.basis_exp_s).collect();
        sizes.push(TopSizeRow {
            regime,
            spin,
            sector_dim: family.sector.dim(),
            mean_krylov_dim: batch.iter().map(|r| r.krylov_dim as f64).sum::<f64>()
                / batch.len() as f64,
            mean_exp_s,
            stderr_exp_s,
            mean_basis_exp_s: mean_stderr(&basis).0,
            realizations: batch.len(),
        });
        runs.extend(batch);
    }
    let xs: Vec<f64> = sizes.iter().map(|s| s.sector_dim as f64).collect();
    let ys: Vec<f64> = sizes.iter().map(|s| s.mean_exp_s).collect();
    let slope = if sizes.len() >= 2 {
        loglog_fit(&xs, &ys).0
    } else {
        f64::NAN
    };
    let largest = cfg.spins.iter().copied().max().unwrap_or(0);
    let chains: Vec<Vec<C64>> = runs
        .iter()
        .filter(|r| r.spin == largest)
        .map(|r| r.alphas.clone())
        .collect();
    let bins = bin_against_curve(&chains, 10, 0.1, 0.9, |m| 1.0 / (m + 1.0));
    Ok(TopReport {
        regime,
        sizes,
        slope,
        bins,
        runs,
    })
}
