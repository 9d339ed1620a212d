//! Operator spreading at the self-dual kicked Ising point, against a generic
//! chaotic chain.

use cmv_krylov::models::superop::operator_spreading;
use cmv_krylov::models::{Axis, KickedIsingParams};
use cmv_krylov::KrylovOptions;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Single-site seed operator on site 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedOperator {
    Identity,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualConfig {
    pub sites: Vec<usize>,
    pub seed_operator: SeedOperator,
    /// Longitudinal kick at the self-dual point.
    pub h: f64,
    /// Field magnitudes of the generic chaotic runs.
    pub fields: Vec<f64>,
    /// `|α_n|` above this counts as nonzero.
    pub threshold: f64,
    /// Plateau window `[plateau_start · L, min(plateau_end, D/2))`, away
    /// from the closing end of the chain.
    pub plateau_start: usize,
    pub plateau_end: usize,
    /// Cap on the operator Krylov dimension.
    pub max_dim: usize,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            sites: vec![4, 5, 6],
            seed_operator: SeedOperator::Z,
            h: 0.6,
            fields: vec![1.13, 1.27, 1.41],
            threshold: 1e-8,
            plateau_start: 2,
            plateau_end: 400,
            max_dim: 420,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRow {
    pub sites: usize,
    /// First `n` with `|α_n|` above the threshold at the self-dual point.
    pub first_nonzero: Option<usize>,
    /// `max_{n < first_nonzero} |α_n|`.
    pub early_max: f64,
    pub dual_alphas: Vec<f64>,
    /// Mean `|α_n|²` over the window for each generic field.
    pub plateaus: Vec<f64>,
    /// Mean plateau times `4^L`.
    pub plateau_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub config: DualConfig,
    pub rows: Vec<DualRow>,
}

fn dual_row(l: usize, axis: Axis, cfg: &DualConfig) -> CliResult<DualRow> {
    let opts = KrylovOptions::default().with_max_dim(cfg.max_dim);
    let dual = operator_spreading(
        KickedIsingParams::dual_unitary(l, cfg.h),
        0,
        axis,
        &opts,
        cfg.threshold,
    )?;
    let alphas: Vec<f64> = dual.sequence.alphas().iter().map(|a| a.re).collect();
    let stop = dual.first_nonzero.unwrap_or(alphas.len());
    let early_max = alphas[..stop].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let from = cfg.plateau_start * l;
    let plateaus = cfg
        .fields
        .iter()
        .map(|&b| {
            let run = operator_spreading(
                KickedIsingParams::chaotic(l, b),
                0,
                axis,
                &opts,
                cfg.threshold,
            )?;
            Ok(run.plateau(from, cfg.plateau_end.min(run.sequence.len() / 2)))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let mean = plateaus.iter().sum::<f64>() / plateaus.len().max(1) as f64;
    Ok(DualRow {
        sites: l,
        first_nonzero: dual.first_nonzero,
        early_max,
        dual_alphas: alphas,
        plateaus,
        plateau_ratio: mean * 4f64.powi(l as i32),
    })
}

pub fn dual_unitary_scan(cfg: &DualConfig) -> CliResult<DualReport> {
    let axis = match cfg.seed_operator {
        SeedOperator::Identity => {
            return Err(CliError::Config(
                "the identity commutes with every Floquet operator and has no dynamics; seed with x, y or z".into(),
            ))
        }
        SeedOperator::X => Axis::X,
        SeedOperator::Y => Axis::Y,
        SeedOperator::Z => Axis::Z,
    };
    if let Some(&l) = cfg.sites.iter().find(|&&l| !(2..=7).contains(&l)) {
        return Err(CliError::Config(format!(
            "operator evolution supports 2..=7 sites, got {l}"
        )));
    }
    let rows = cfg
        .sites
        .par_iter()
        .map(|&l| dual_row(l, axis, cfg))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(DualReport {
        config: cfg.clone(),
        rows,
    })
}
