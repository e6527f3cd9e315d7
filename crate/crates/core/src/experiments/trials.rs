//! Repeated sketch-and-solve trials.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelSpec};
use super::models::{duffing_qoi, ishigami};
use crate::error::{Error, Result};
use crate::factor::KroneckerFactors;
use crate::grid::Grid1D;
use crate::indexset::{lexicographic_unrank, MultiIndexSet};
use crate::oracle;
use crate::rng::RngState;
use crate::sampler::{Sampler, SamplerMethod};
use crate::sketch::{
    assemble, draw_sketch, full_relative_error, optimal_relative_error, solve, Tabulated,
};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    values: Vec<f64>,
}

/// Factors, index set and tabulated target for one config.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub set: Arc<MultiIndexSet>,
    pub factors: Arc<KroneckerFactors>,
    pub target: Tabulated,
    pub samples: usize,
}

impl Experiment {
    /// Index set and grids only; errors here are configuration errors.
    pub fn design(config: &ExperimentConfig, base_dir: &Path) -> Result<(MultiIndexSet, Vec<Grid1D>)> {
        let set = config.index_set.build().map_err(|e| Error::Config(e.to_string()))?;
        if set.dimension() != config.dimension {
            return Err(Error::Config(format!(
                "index set has dimension {}, config has {}",
                set.dimension(),
                config.dimension
            )));
        }
        let grids = config.grids(base_dir).map_err(|e| Error::Config(e.to_string()))?;
        Ok((set, grids))
    }

    pub fn prepare(config: &ExperimentConfig, base_dir: &Path) -> Result<Self> {
        let (set, grids) = Self::design(config, base_dir)?;
        let factors = KroneckerFactors::new(&grids, config.basis, set.bounding_box())?;
        let target = tabulate(&config.model, &factors, base_dir)?;
        let samples = config.sample_size(set.len());
        Ok(Self {
            config: config.clone(),
            set: Arc::new(set),
            factors: Arc::new(factors),
            target,
            samples,
        })
    }

    pub fn sampler(&self, method: SamplerMethod) -> Result<Sampler> {
        Sampler::new(method, self.factors.clone(), self.set.clone())
    }

    /// `min_x ‖Ax − b‖/‖b‖`: streamed for lower sets, dense otherwise.
    pub fn optimal_relative_error(&self) -> Result<f64> {
        if self.set.is_monotone_lower() {
            optimal_relative_error(&self.set, &self.factors, &self.target)
        } else {
            let sys = oracle::build_full(&self.set, &self.factors, &self.target)?;
            Ok(oracle::solve_full(&sys)?.relative_error)
        }
    }

    /// One sketch of size `k` from `method`, solved and scored on the full grid.
    pub fn run_one(&self, sampler: &Sampler, k: usize, state: RngState) -> Result<TrialRecord> {
        let sketch = draw_sketch(sampler, k, state)?;
        let sys = assemble(&self.set, &self.factors, &sketch, &self.target)?;
        let sol = solve(&sys)?;
        let relative_error = full_relative_error(&self.set, &self.factors, &sol.x, &self.target)?;
        Ok(TrialRecord {
            method: sampler.method(),
            trial: state.stream as u32,
            relative_error,
            rank_deficient: sol.rank_deficient,
        })
    }
}

fn tabulate(model: &ModelSpec, factors: &KroneckerFactors, base_dir: &Path) -> Result<Tabulated> {
    match model {
        ModelSpec::Ishigami { a, b } => {
            let (a, b) = (*a, *b);
            Tabulated::from_target(factors, &move |y: &[f64]| ishigami(y, a, b))
        }
        ModelSpec::Duffing { t_final, step } => {
            let shape = factors.shape();
            let values = (0..factors.grid_size())
                .into_par_iter()
                .map(|p| {
                    let idx = lexicographic_unrank(&shape, p);
                    let y: Vec<f64> = idx
                        .iter()
                        .zip(factors.factors())
                        .map(|(&m, f)| f.grid().nodes()[m])
                        .collect();
                    duffing_qoi(&y, *t_final, *step)
                })
                .collect::<Result<Vec<_>>>()?;
            Tabulated::new(shape, values)
        }
        ModelSpec::Tabulated { file } => {
            let path: PathBuf =
                if file.is_relative() { base_dir.join(file) } else { file.clone() };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let table: TableFile = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("invalid table {}: {e}", path.display())))?;
            Tabulated::new(factors.shape(), table.values)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: SamplerMethod,
    pub trial: u32,
    pub relative_error: f64,
    pub rank_deficient: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: ExperimentConfig,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub optimal_relative_error: f64,
    /// Ordered by method (config order), then trial.
    pub records: Vec<TrialRecord>,
}

impl TrialReport {
    pub fn errors(&self, method: SamplerMethod) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.relative_error)
            .collect()
    }
}

/// Runs every `(method, trial)` pair of the config. Trial `t` of a method
/// uses stream `RngState::for_trial(seed, method.id(), t)`, so the report
/// does not depend on scheduling or on which other methods are listed.
pub fn run_trials(config: &ExperimentConfig, base_dir: &Path) -> Result<TrialReport> {
    let exp = Experiment::prepare(config, base_dir)?;
    run_prepared(&exp)
}

pub fn run_prepared(exp: &Experiment) -> Result<TrialReport> {
    let config = &exp.config;
    let optimal = exp.optimal_relative_error()?;
    let samplers = config
        .methods
        .iter()
        .map(|&m| exp.sampler(m))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u32)> = (0..samplers.len())
        .flat_map(|s| (0..config.trials as u32).map(move |t| (s, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(s, t)| {
            let sampler = &samplers[s];
            let state = RngState::for_trial(config.seed, sampler.method().id(), t);
            let mut rec = exp.run_one(sampler, exp.samples, state)?;
            rec.trial = t;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialReport {
        config: config.clone(),
        n: exp.set.len(),
        k: exp.samples,
        optimal_relative_error: optimal,
        records,
    })
}

/// Runs [`run_trials`] on a dedicated pool of `threads` workers.
pub fn run_trials_with_threads(
    config: &ExperimentConfig,
    base_dir: &Path,
    threads: usize,
) -> Result<TrialReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| run_trials(config, base_dir))
}
