//! TOML run configuration. Command-line flags override the top-level keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::experiments::dual::DualConfig;
use crate::experiments::ensemble::EnsembleConfig;
use crate::experiments::ising::IsingConfig;
use crate::experiments::top::TopConfig;
use crate::verify::VerifyConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    /// JSON file holding a Verblunsky sequence.
    pub alphas: Option<PathBuf>,
    /// Register size; the smallest that fits the sequence if absent.
    pub qubits: Option<usize>,
    /// Also write the CNOT/rotation decomposition.
    pub demultiplex: bool,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            alphas: None,
            qubits: None,
            demultiplex: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub ensemble: EnsembleConfig,
    pub kicked_top: TopConfig,
    pub kicked_ising: IsingConfig,
    pub dual_unitary: DualConfig,
    pub circuit: CircuitConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_fill_defaults() {
        let cfg = RunConfig::parse(
            r#"
            seed = 9
            [ensemble]
            sizes = [100]
            realizations = 3
            [[ensemble.kinds]]
            kind = "chaotic"
            beta = 2.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.ensemble.sizes, vec![100]);
        assert_eq!(cfg.ensemble.kinds.len(), 1);
        assert_eq!(cfg.kicked_top, TopConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::parse("sead = 1"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("[ensemble]\nsize = [1]"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("tol = -1.0"),
            Err(CliError::Config(_))
        ));
    }
}
