//! Random Verblunsky ensembles: spacing ratios and Krylov localization
//! against chain length.

use cmv_krylov::dynamics::cmv_observables;
use cmv_krylov::ensembles::{
    haar_spacing_ratio, loglog_fit, measure_realization, realization_rng, sample_sequence,
    scan_slope, size_seed, summarize, EnsembleKind, ScanOptions, ScanRow,
};
use cmv_krylov::{cmv_factorization, linalg};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Serializable form of [`EnsembleKind`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KindConfig {
    Degenerate { epsilon: f64 },
    Chaotic { beta: f64 },
    Integrable { epsilon: f64 },
}

impl From<KindConfig> for EnsembleKind {
    fn from(k: KindConfig) -> Self {
        match k {
            KindConfig::Degenerate { epsilon } => EnsembleKind::Degenerate { epsilon },
            KindConfig::Chaotic { beta } => EnsembleKind::Chaotic { beta },
            KindConfig::Integrable { epsilon } => EnsembleKind::Integrable { epsilon },
        }
    }
}

impl KindConfig {
    pub fn label(&self) -> String {
        match *self {
            KindConfig::Degenerate { epsilon } => format!("degenerate-eps{epsilon}"),
            KindConfig::Chaotic { beta } => format!("chaotic-beta{beta}"),
            KindConfig::Integrable { epsilon } => format!("integrable-eps{epsilon}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub kinds: Vec<KindConfig>,
    pub sizes: Vec<usize>,
    pub realizations: usize,
    /// Skip the time evolution and report spacing ratios only.
    pub spectral_only: bool,
    pub starts: usize,
    pub steps_per_site: usize,
    pub stride: usize,
    /// Dense Haar unitaries per size for the `⟨r⟩` reference; 0 disables.
    pub haar_realizations: usize,
    /// Chain length of the single-realization wave-packet series; 0
    /// disables.
    pub series_dim: usize,
    /// Steps of that series.
    pub series_steps: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            kinds: vec![
                KindConfig::Degenerate { epsilon: 0.5 },
                KindConfig::Chaotic { beta: 2.0 },
                KindConfig::Integrable { epsilon: 0.5 },
            ],
            sizes: vec![250, 500, 1000, 2000],
            realizations: 20,
            spectral_only: false,
            starts: 4,
            steps_per_site: 4,
            stride: 5,
            haar_realizations: 0,
            series_dim: 2000,
            series_steps: 2000,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.sizes.iter().any(|&d| d < 3) {
            return Err(CliError::Config("ensemble sizes must be at least 3".into()));
        }
        if self.realizations == 0 {
            return Err(CliError::Config("need at least one realization".into()));
        }
        for k in &self.kinds {
            EnsembleKind::from(*k).validate()?;
        }
        Ok(())
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            starts: self.starts,
            steps_per_site: self.steps_per_site,
            stride: self.stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub dim: usize,
    pub mean_r: f64,
    pub mean_k: f64,
    pub mean_exp_s: f64,
    pub stderr_exp_s: f64,
    pub realizations: usize,
}

impl From<ScanRow> for SizeRow {
    fn from(r: ScanRow) -> Self {
        Self {
            dim: r.dim,
            mean_r: r.mean_r,
            mean_k: r.mean_k,
            mean_exp_s: r.mean_exp_s,
            stderr_exp_s: r.stderr_exp_s,
            realizations: r.realizations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub kind: KindConfig,
    pub rows: Vec<SizeRow>,
    /// Log-log slope of `e^S` against `d`; `None` for spectral-only runs.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarRow {
    pub dim: usize,
    pub mean_r: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub kinds: Vec<KindReport>,
    pub haar: Vec<HaarRow>,
}

pub fn ensemble_scan(cfg: &EnsembleConfig, seed: u64) -> CliResult<EnsembleReport> {
    cfg.validate()?;
    let opts = cfg.scan_options();
    let scan = if cfg.spectral_only { None } else { Some(&opts) };
    let mut kinds = Vec::new();
    for (ki, k) in cfg.kinds.iter().enumerate() {
        let kind = EnsembleKind::from(*k);
        let mut rows = Vec::new();
        for &d in &cfg.sizes {
            let master = size_seed(seed ^ ((ki as u64) << 48), d);
            let summaries = (0..cfg.realizations as u64)
                .into_par_iter()
                .map(|i| measure_realization(&kind, d, master, i, scan))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(summarize(d, &summaries));
        }
        let slope = (!cfg.spectral_only && rows.len() >= 2).then(|| scan_slope(&rows));
        kinds.push(KindReport {
            kind: *k,
            rows: rows.into_iter().map(SizeRow::from).collect(),
            slope,
        });
    }
    let haar = if cfg.haar_realizations == 0 {
        Vec::new()
    } else {
        cfg.sizes
            .iter()
            .map(|&d| {
                let master = size_seed(!seed, d);
                let rs: Vec<f64> = (0..cfg.haar_realizations as u64)
                    .into_par_iter()
                    .map(|i| haar_spacing_ratio(d, &mut realization_rng(master, i)))
                    .collect();
                HaarRow {
                    dim: d,
                    mean_r: rs.iter().sum::<f64>() / rs.len() as f64,
                    realizations: rs.len(),
                }
            })
            .collect()
    };
    Ok(EnsembleReport { kinds, haar })
}

/// Spreading from the first site over `steps` steps (`d/4` by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingProfile {
    pub dim: usize,
    pub times: Vec<usize>,
    pub k: Vec<f64>,
    pub exp_s: Vec<f64>,
    /// `max e^S` over the window.
    pub max_exp_s: f64,
    /// Least-squares velocity `dK/dt` and the `R²` of the linear fit.
    pub velocity: f64,
    pub linear_r2: f64,
    /// Log-log slope of `K` against `t`.
    pub growth_exponent: f64,
}

pub fn spreading_profile(
    kind: KindConfig,
    d: usize,
    steps: Option<usize>,
    seed: u64,
) -> CliResult<SpreadingProfile> {
    let mut rng = realization_rng(seed, 0);
    let seq = sample_sequence(&kind.into(), d, &mut rng)?;
    let form = cmv_factorization(&seq)?;
    let phi0 = linalg::basis_vector(d, 0);
    let steps = steps.unwrap_or((d / 4).saturating_sub(1)).max(2);
    let series = cmv_observables(&form, &phi0, steps, 1)?;
    let (ts, ks): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(&series.k)
        .filter(|(t, _)| **t > 0)
        .map(|(t, k)| (*t as f64, *k))
        .unzip();
    let n = ts.len() as f64;
    let (mt, mk) = (ts.iter().sum::<f64>() / n, ks.iter().sum::<f64>() / n);
    let stt: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    let stk: f64 = ts.iter().zip(&ks).map(|(t, k)| (t - mt) * (k - mk)).sum();
    let skk: f64 = ks.iter().map(|k| (k - mk) * (k - mk)).sum();
    let velocity = stk / stt;
    let linear_r2 = if skk > 0.0 {
        stk * stk / (stt * skk)
    } else {
        0.0
    };
    let positive: Vec<(f64, f64)> = ts
        .iter()
        .zip(&ks)
        .filter(|(_, k)| **k > 0.0)
        .map(|(t, k)| (*t, *k))
        .collect();
    let (pt, pk): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
    let growth_exponent = loglog_fit(&pt, &pk).0;
    let max_exp_s = series.exp_s.iter().copied().fold(0.0, f64::max);
    Ok(SpreadingProfile {
        dim: d,
        times: series.times,
        k: series.k,
        exp_s: series.exp_s,
        max_exp_s,
        velocity,
        linear_r2,
        growth_exponent,
    })
}
