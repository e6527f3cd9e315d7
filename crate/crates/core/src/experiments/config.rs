//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BasisKind, Grid1D, GridSpec};
use crate::indexset::IndexSetSpec;
use crate::sampler::SamplerMethod;

/// Default `c` in `K = c·N`.
pub const DEFAULT_SAMPLE_MULTIPLIER: f64 = 4.0;

fn default_a() -> f64 {
    super::models::ISHIGAMI_A
}

fn default_b() -> f64 {
    super::models::ISHIGAMI_B
}

fn default_t_final() -> f64 {
    4.0
}

fn default_step() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Ishigami {
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "default_b")]
        b: f64,
    },
    Duffing {
        #[serde(default = "default_t_final")]
        t_final: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
    /// `{"values": [...]}` on the full grid, lexicographic row order.
    Tabulated { file: PathBuf },
}

impl ModelSpec {
    fn required_dimension(&self) -> Option<usize> {
        match self {
            ModelSpec::Ishigami { .. } | ModelSpec::Duffing { .. } => Some(3),
            ModelSpec::Tabulated { .. } => None,
        }
    }
}

/// One grid for every dimension, or one per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridChoice {
    Shared(GridSpec),
    PerDimension(Vec<GridSpec>),
}

fn default_methods() -> Vec<SamplerMethod> {
    vec![SamplerMethod::Uniform, SamplerMethod::TensorProduct, SamplerMethod::LeverageLower]
}

fn default_trials() -> usize {
    100
}

/// Everything needed to reproduce a relative-error study.
///
/// `methods` defaults to uniform, tensor-product and leverage-lower,
/// `trials` to 100, `seed` to 0, and the sample size to `K = 4N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub dimension: usize,
    pub grid: GridChoice,
    #[serde(default)]
    pub basis: BasisKind,
    pub index_set: IndexSetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<SamplerMethod>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Parses and validates a config; relative paths inside it resolve
    /// against the directory of `path`.
    pub fn from_file(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, base))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dimension == 0 {
            return bad("dimension must be >= 1".into());
        }
        if let Some(d) = self.model.required_dimension() {
            if d != self.dimension {
                return bad(format!("model needs dimension {d}, config has {}", self.dimension));
            }
        }
        if let GridChoice::PerDimension(g) = &self.grid {
            if g.len() != self.dimension {
                return bad(format!("{} grids for dimension {}", g.len(), self.dimension));
            }
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad("methods must be distinct".into());
        }
        match (self.sample_multiplier, self.samples) {
            (Some(_), Some(_)) => return bad("give sample_multiplier or samples, not both".into()),
            (Some(c), None) if !(c.is_finite() && c > 0.0) => {
                return bad(format!("sample_multiplier must be positive, got {c}"))
            }
            (None, Some(0)) => return bad("samples must be >= 1".into()),
            _ => {}
        }
        if let ModelSpec::Duffing { t_final, step } = self.model {
            if !(step > 0.0 && t_final >= 0.0 && step.is_finite() && t_final.is_finite()) {
                return bad("duffing needs step > 0 and t_final >= 0".into());
            }
        }
        Ok(())
    }

    /// `K` for a design with `n` columns.
    pub fn sample_size(&self, n: usize) -> usize {
        match self.samples {
            Some(k) => k,
            None => {
                let c = self.sample_multiplier.unwrap_or(DEFAULT_SAMPLE_MULTIPLIER);
                ((c * n as f64).ceil() as usize).max(1)
            }
        }
    }

    pub fn grids(&self, base_dir: &Path) -> Result<Vec<Grid1D>> {
        match &self.grid {
            GridChoice::Shared(g) => {
                let grid = g.build(Some(base_dir))?;
                Ok(vec![grid; self.dimension])
            }
            GridChoice::PerDimension(gs) => gs.iter().map(|g| g.build(Some(base_dir))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": {"kind": "ishigami"},
        "dimension": 3,
        "grid": {"grid": "gauss-legendre", "M": 20},
        "index_set": {"family": "wlp-ball", "dimension": 3, "p": 1, "order": 7},
        "methods": ["uniform", "leverage-lower"],
        "trials": 10,
        "seed": 3
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.model, ModelSpec::Ishigami { a: 7.0, b: 0.1 });
        assert_eq!(c.basis, BasisKind::LegendreOrthonormal);
        assert_eq!(c.sample_size(120), 480);
        assert_eq!(c.grids(Path::new(".")).unwrap().len(), 3);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASE.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config(_))));
        let text = BASE.replace("\"kind\": \"ishigami\"", "\"kind\": \"ishigami\", \"c\": 2");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad_dim = BASE.replace("\"dimension\": 3,\n        \"grid\"", "\"dimension\": 2,\n        \"grid\"");
        assert!(ExperimentConfig::from_json(&bad_dim).is_err());
        let zero_trials = BASE.replace("\"trials\": 10", "\"trials\": 0");
        assert!(ExperimentConfig::from_json(&zero_trials).is_err());
        let both = BASE.replace("\"seed\": 3", "\"seed\": 3, \"samples\": 10, \"sample_multiplier\": 2");
        assert!(ExperimentConfig::from_json(&both).is_err());
        let dup = BASE.replace("\"uniform\", \"leverage-lower\"", "\"uniform\", \"uniform\"");
        assert!(ExperimentConfig::from_json(&dup).is_err());
    }
}
