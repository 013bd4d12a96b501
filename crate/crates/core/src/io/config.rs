//! TOML run configuration.

use crate::bdmcmc::ChainConfig;
use crate::error::{Error, Result};
use crate::marginals::FitSettings;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub counts: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    /// One group label per line, matched to rows by position.
    pub groups: Option<PathBuf>,
    pub min_prevalence: f64,
    pub min_distinct: usize,
    /// Add the log library-size factor as a covariate.
    pub library_size_covariate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Edges with posterior probability strictly above this are reported.
    pub cutoff: f64,
    pub checkpoint: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("dwgm-out"), cutoff: 0.5, checkpoint: false }
    }
}

/// Settings for the `simulate` verb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub p: usize,
    pub n: usize,
    pub sparsity: f64,
    /// Marginal preset 1, 2 (DW) or 3 (NB).
    pub setting: u8,
    pub theta1: f64,
    pub covariate_prob: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { p: 20, n: 100, sparsity: 0.2, setting: 2, theta1: 2.0, covariate_prob: 0.5 }
    }
}

/// Settings for the `evaluate` verb.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub probabilities: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    /// `key = value` benchmark description; when set, a full study is run.
    pub benchmark: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub chains: usize,
    pub input: InputConfig,
    pub marginals: FitSettings,
    pub chain: ChainConfig,
    pub output: OutputConfig,
    pub simulate: SimulationConfig,
    pub evaluate: EvaluateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            chains: 2,
            input: InputConfig::default(),
            marginals: FitSettings::default(),
            chain: ChainConfig::default(),
            output: OutputConfig::default(),
            simulate: SimulationConfig::default(),
            evaluate: EvaluateConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        if self.chains == 0 {
            return Err(Error::Config("chains must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.output.cutoff) {
            return Err(Error::Config(format!("cutoff must lie in [0,1], got {}", self.output.cutoff)));
        }
        if !(0.0..=1.0).contains(&self.input.min_prevalence) {
            return Err(Error::Config("min_prevalence must lie in [0,1]".into()));
        }
        if !(self.marginals.hpd_level > 0.0 && self.marginals.hpd_level < 1.0) {
            return Err(Error::Config("hpd_level must lie in (0,1)".into()));
        }
        self.marginals.mh.validate().map_err(cfg_err)?;
        self.chain.validate().map_err(cfg_err)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = RunConfig::from_toml("seed = 7\n[chain]\niterations = 50\n[marginals]\nchoice = \"auto_bic\"\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.chain.iterations, 50);
        assert_eq!(cfg.chain.b, 3.0);
        assert_eq!(cfg.output.cutoff, 0.5);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in ["chains = 0", "[chain]\nburn_in_fraction = 1.0", "[chain]\niterations = 0", "bogus = 1"] {
            let e = RunConfig::from_toml(text).unwrap_err();
            assert_eq!(e.exit_code(), 4, "{text}");
        }
    }
}
