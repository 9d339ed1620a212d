//! Kicked Ising ensembles over a field-magnitude window.

use cmv_krylov::ensembles::{chain_localization, mean_stderr, realization_rng, ScanOptions};
use cmv_krylov::models::{
    kicked_ising, momentum_sector, random_low_entanglement_seed, KickedIsingParams,
    ProjectedUnitary,
};
use cmv_krylov::{cmv_build, cmv_factorization, KrylovOptions, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::{bin_against_curve, BinRow};
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldDirection {
    /// `b ∥ x`.
    Integrable,
    /// `b ∥ (1, 0, 1)/√2`.
    Chaotic,
}

impl FieldDirection {
    pub fn name(self) -> &'static str {
        match self {
            FieldDirection::Integrable => "integrable",
            FieldDirection::Chaotic => "chaotic",
        }
    }

    pub fn params(self, sites: usize, field: f64) -> KickedIsingParams {
        match self {
            FieldDirection::Integrable => KickedIsingParams::integrable(sites, field),
            FieldDirection::Chaotic => KickedIsingParams::chaotic(sites, field),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsingConfig {
    pub sites: Vec<usize>,
    pub field_min: f64,
    pub field_max: f64,
    pub field_step: f64,
    /// Momentum sectors; empty means `1 ≤ k < L/2` (no residual reflection).
    pub momenta: Vec<usize>,
    /// Computational basis states in each random seed.
    pub seed_states: usize,
    pub steps_per_site: usize,
    pub stride: usize,
}

impl Default for IsingConfig {
    fn default() -> Self {
        Self {
            sites: vec![8, 9, 10],
            field_min: 1.13,
            field_max: 1.41,
            field_step: 0.007,
            momenta: Vec::new(),
            seed_states: 3,
            steps_per_site: 10,
            stride: 5,
        }
    }
}

impl IsingConfig {
    pub fn fields(&self) -> Vec<f64> {
        let n = ((self.field_max - self.field_min) / self.field_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.field_min + i as f64 * self.field_step)
            .collect()
    }

    pub fn momenta_for(&self, sites: usize) -> Vec<usize> {
        if !self.momenta.is_empty() {
            return self.momenta.clone();
        }
        (1..sites.div_ceil(2)).filter(|&k| 2 * k != sites).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingRun {
    pub direction: FieldDirection,
    pub sites: usize,
    pub momentum: usize,
    pub field: f64,
    pub sector_dim: usize,
    pub krylov_dim: usize,
    pub alphas: Vec<C64>,
    pub seed_k: f64,
    pub seed_exp_s: f64,
}

pub fn ising_run(
    direction: FieldDirection,
    sites: usize,
    momentum: usize,
    field: f64,
    master_seed: u64,
    index: u64,
    cfg: &IsingConfig,
) -> CliResult<IsingRun> {
    let sector = momentum_sector(sites, momentum)?;
    let u = kicked_ising(direction.params(sites, field))?;
    let pu = ProjectedUnitary::new(u, &sector);
    let mut rng = realization_rng(master_seed, index);
    let seed = random_low_entanglement_seed(&sector, cfg.seed_states, &mut rng)?;
    let (seq, _) = cmv_build(&pu, &seed, &KrylovOptions::default().without_basis())?;
    let seq = if seq.is_closed() {
        seq
    } else {
        seq.closed_at(seq.len())
    };
    let form = cmv_factorization(&seq)?;
    let (seed_k, seed_exp_s) = chain_localization(
        &form,
        &ScanOptions {
            starts: 1,
            steps_per_site: cfg.steps_per_site,
            stride: cfg.stride,
        },
    );
    Ok(IsingRun {
        direction,
        sites,
        momentum,
        field,
        sector_dim: sector.dim(),
        krylov_dim: seq.len(),
        alphas: seq.alphas().to_vec(),
        seed_k,
        seed_exp_s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSizeRow {
    pub direction: FieldDirection,
    pub sites: usize,
    pub mean_sector_dim: f64,
    pub mean_krylov_dim: f64,
    pub mean_exp_s: f64,
    pub stderr_exp_s: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingReport {
    pub direction: FieldDirection,
    pub sizes: Vec<IsingSizeRow>,
    /// `|α_n|²` at the largest chain binned against `1/(D − n + 1)`.
    pub bins: Vec<BinRow>,
    pub runs: Vec<IsingRun>,
}

pub fn kicked_ising_scan(
    direction: FieldDirection,
    cfg: &IsingConfig,
    seed: u64,
) -> CliResult<IsingReport> {
    let fields = cfg.fields();
    let mut sizes = Vec::new();
    let mut runs = Vec::new();
    for &l in &cfg.sites {
        let jobs: Vec<(usize, f64)> = cfg
            .momenta_for(l)
            .into_iter()
            .flat_map(|k| fields.iter().map(move |&f| (k, f)))
            .collect();
        let master = seed ^ ((l as u64) << 32) ^ direction as u64;
        let batch = jobs
            .par_iter()
            .enumerate()
            .map(|(i, &(k, f))| ising_run(direction, l, k, f, master, i as u64, cfg))
            .collect::<CliResult<Vec<_>>>()?;
        let es: Vec<f64> = batch.iter().map(|r| r.seed_exp_s).collect();
        let (mean_exp_s, stderr_exp_s) = mean_stderr(&es);
        let n = batch.len() as f64;
        sizes.push(IsingSizeRow {
            direction,
            sites: l,
            mean_sector_dim: batch.iter().map(|r| r.sector_dim as f64).sum::<f64>() / n,
            mean_krylov_dim: batch.iter().map(|r| r.krylov_dim as f64).sum::<f64>() / n,
            mean_exp_s,
            stderr_exp_s,
            realizations: batch.len(),
        });
        runs.extend(batch);
    }
    let largest = cfg.sites.iter().copied().max().unwrap_or(0);
    let chains: Vec<Vec<C64>> = runs
        .iter()
        .filter(|r| r.sites == largest)
        .map(|r| r.alphas.clone())
        .collect();
    let bins = bin_against_curve(&chains, 10, 0.1, 0.9, |m| 1.0 / (m + 1.0));
    Ok(IsingReport {
        direction,
        sizes,
        bins,
        runs,
    })
}
