//! CSV layouts of the experiment tables.

use crate::experiments::binning::BinRow;
use crate::experiments::dual::DualRow;
use crate::experiments::ensemble::{KindConfig, SizeRow};
use crate::experiments::ising::IsingSizeRow;
use crate::experiments::top::TopSizeRow;
use crate::formats::{fmt_f64, CsvRow};

/// One row of the per-size ensemble table.
pub struct EnsembleRow {
    pub kind: KindConfig,
    pub row: SizeRow,
}

impl CsvRow for EnsembleRow {
    fn header() -> Vec<&'static str> {
        vec![
            "d",
            "ensemble",
            "param",
            "mean_r",
            "mean_K",
            "mean_expS",
            "stderr",
            "realizations",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let (name, param) = match self.kind {
            KindConfig::Degenerate { epsilon } => ("degenerate", epsilon),
            KindConfig::Chaotic { beta } => ("chaotic", beta),
            KindConfig::Integrable { epsilon } => ("integrable", epsilon),
        };
        vec![
            self.row.dim.to_string(),
            name.to_string(),
            param.to_string(),
            fmt_f64(self.row.mean_r),
            fmt_f64(self.row.mean_k),
            fmt_f64(self.row.mean_exp_s),
            fmt_f64(self.row.stderr_exp_s),
            self.row.realizations.to_string(),
        ]
    }
}

/// `K(t)` and `e^{S(t)}` of one wave packet.
pub struct SeriesRow {
    pub t: usize,
    pub k: f64,
    pub exp_s: f64,
}

impl CsvRow for SeriesRow {
    fn header() -> Vec<&'static str> {
        vec!["t", "K", "expS"]
    }

    fn fields(&self) -> Vec<String> {
        vec![self.t.to_string(), fmt_f64(self.k), fmt_f64(self.exp_s)]
    }
}

impl CsvRow for BinRow {
    fn header() -> Vec<&'static str> {
        vec![
            "position",
            "mean_alpha_sq",
            "mean_curve",
            "ratio",
            "samples",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.position),
            fmt_f64(self.mean_alpha_sq),
            fmt_f64(self.mean_curve),
            fmt_f64(self.ratio),
            self.samples.to_string(),
        ]
    }
}

impl CsvRow for TopSizeRow {
    fn header() -> Vec<&'static str> {
        vec![
            "regime",
            "spin",
            "d",
            "mean_D",
            "mean_expS",
            "stderr",
            "mean_basis_expS",
            "realizations",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.regime.name().to_string(),
            self.spin.to_string(),
            self.sector_dim.to_string(),
            fmt_f64(self.mean_krylov_dim),
            fmt_f64(self.mean_exp_s),
            fmt_f64(self.stderr_exp_s),
            fmt_f64(self.mean_basis_exp_s),
            self.realizations.to_string(),
        ]
    }
}

impl CsvRow for IsingSizeRow {
    fn header() -> Vec<&'static str> {
        vec![
            "direction",
            "L",
            "mean_d",
            "mean_D",
            "mean_expS",
            "stderr",
            "realizations",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.direction.name().to_string(),
            self.sites.to_string(),
            fmt_f64(self.mean_sector_dim),
            fmt_f64(self.mean_krylov_dim),
            fmt_f64(self.mean_exp_s),
            fmt_f64(self.stderr_exp_s),
            self.realizations.to_string(),
        ]
    }
}

impl CsvRow for DualRow {
    fn header() -> Vec<&'static str> {
        vec![
            "L",
            "first_nonzero",
            "early_max",
            "plateau_mean",
            "plateau_times_4L",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let mean = self.plateaus.iter().sum::<f64>() / self.plateaus.len().max(1) as f64;
        vec![
            self.sites.to_string(),
            self.first_nonzero
                .map(|n| n.to_string())
                .unwrap_or_default(),
            fmt_f64(self.early_max),
            fmt_f64(mean),
            fmt_f64(self.plateau_ratio),
        ]
    }
}

/// `n, re α_n, im α_n, |α_n|²` of one chain.
pub struct AlphaRow {
    pub n: usize,
    pub alpha: cmv_krylov::C64,
}

impl CsvRow for AlphaRow {
    fn header() -> Vec<&'static str> {
        vec!["n", "re_alpha", "im_alpha", "abs_alpha_sq"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.alpha.re),
            fmt_f64(self.alpha.im),
            fmt_f64(self.alpha.norm_sqr()),
        ]
    }
}
