//! Row samplers over the tensor grid and their point masses.
//!
//! A grid point is addressed by 0-based node indices `(m_1, …, m_D)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::KroneckerFactors;
use crate::indexset::MultiIndexSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMethod {
    /// Every grid point with probability `1/∏M_d`.
    Uniform,
    /// Leverage scores of the full Kronecker product over the bounding box.
    TensorProduct,
    /// Exact leverage scores for lower sets, from normalized factor columns.
    OrthogonalColumns,
    /// Exact leverage scores for lower sets, from factor QR.
    LeverageLower,
}

impl SamplerMethod {
    pub const ALL: [SamplerMethod; 4] = [
        SamplerMethod::Uniform,
        SamplerMethod::TensorProduct,
        SamplerMethod::OrthogonalColumns,
        SamplerMethod::LeverageLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerMethod::Uniform => "uniform",
            SamplerMethod::TensorProduct => "tensor-product",
            SamplerMethod::OrthogonalColumns => "orthogonal-columns",
            SamplerMethod::LeverageLower => "leverage-lower",
        }
    }

    /// Stable id used to derive random streams.
    pub fn id(self) -> u32 {
        match self {
            SamplerMethod::Uniform => 0,
            SamplerMethod::TensorProduct => 1,
            SamplerMethod::OrthogonalColumns => 2,
            SamplerMethod::LeverageLower => 3,
        }
    }
}

impl fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sampler method {s:?}")))
    }
}

/// A node of the tensor grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// 0-based node index per dimension.
    pub indices: Vec<usize>,
    pub coords: Vec<f64>,
}

fn check_point(factors: &KroneckerFactors, indices: &[usize]) -> Result<()> {
    let shape = factors.shape();
    if indices.len() != shape.len() || indices.iter().zip(&shape).any(|(i, s)| i >= s) {
        return Err(Error::OutOfBounds { index: indices.to_vec(), bounds: shape });
    }
    Ok(())
}

/// Resolves node indices to coordinates.
pub fn grid_point(factors: &KroneckerFactors, indices: &[usize]) -> Result<GridPoint> {
    check_point(factors, indices)?;
    let coords = indices
        .iter()
        .zip(factors.factors())
        .map(|(&m, f)| f.grid().nodes()[m])
        .collect();
    Ok(GridPoint { indices: indices.to_vec(), coords })
}

/// `μ(m) = ∏_d w^(d)_{m_d}`.
pub fn mu_mass(factors: &KroneckerFactors, indices: &[usize]) -> Result<f64> {
    check_point(factors, indices)?;
    Ok(indices
        .iter()
        .zip(factors.factors())
        .map(|(&m, f)| f.grid().weights()[m])
        .product())
}

/// A row-sampling distribution bound to its factors and index set.
#[derive(Clone, Debug)]
pub struct Sampler {
    method: SamplerMethod,
    factors: Arc<KroneckerFactors>,
    set: Arc<MultiIndexSet>,
}

impl Sampler {
    /// Checks the method's preconditions: matching dimensions and bounding
    /// box, a lower set for the exact methods, and orthogonal factor columns
    /// for `OrthogonalColumns`.
    pub fn new(
        method: SamplerMethod,
        factors: Arc<KroneckerFactors>,
        set: Arc<MultiIndexSet>,
    ) -> Result<Self> {
        if set.dimension() != factors.dimension() {
            return Err(Error::Precondition(format!(
                "index set has dimension {} but there are {} factors",
                set.dimension(),
                factors.dimension()
            )));
        }
        if set.bounding_box() != factors.bounds().as_slice() {
            return Err(Error::Precondition(format!(
                "bounding box {:?} does not match factor sizes {:?}",
                set.bounding_box(),
                factors.bounds()
            )));
        }
        match method {
            SamplerMethod::LeverageLower | SamplerMethod::OrthogonalColumns
                if !set.is_monotone_lower() =>
            {
                return Err(Error::Precondition(format!("{method} requires a monotone lower set")));
            }
            SamplerMethod::OrthogonalColumns => {
                if let Some(d) = (0..factors.dimension())
                    .find(|&d| !factors.factor(d).has_orthogonal_columns())
                {
                    return Err(Error::Precondition(format!(
                        "factor {d} does not have orthogonal columns"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { method, factors, set })
    }

    pub fn method(&self) -> SamplerMethod {
        self.method
    }

    pub fn factors(&self) -> &Arc<KroneckerFactors> {
        &self.factors
    }

    pub fn index_set(&self) -> &Arc<MultiIndexSet> {
        &self.set
    }

    /// Draws node indices into `out`.
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [usize]) {
        let factors = self.factors.factors();
        match self.method {
            SamplerMethod::Uniform => {
                for (o, f) in out.iter_mut().zip(factors) {
                    *o = rng.random_range(0..f.num_nodes());
                }
            }
            SamplerMethod::TensorProduct => {
                for (o, f) in out.iter_mut().zip(factors) {
                    let k = rng.random_range(0..f.num_functions());
                    *o = f.sample_nu_kd(k, rng).expect("k drawn within range");
                }
            }
            SamplerMethod::LeverageLower | SamplerMethod::OrthogonalColumns => {
                let alpha = &self.set.indices()[rng.random_range(0..self.set.len())];
                for ((o, f), &a) in out.iter_mut().zip(factors).zip(alpha.entries()) {
                    let k = a as usize - 1;
                    *o = if self.method == SamplerMethod::LeverageLower {
                        f.sample_nu_kd(k, rng)
                    } else {
                        f.sample_column(k, rng)
                    }
                    .expect("preconditions checked at construction");
                }
            }
        }
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> GridPoint {
        let mut idx = vec![0; self.factors.dimension()];
        self.sample_indices(rng, &mut idx);
        grid_point(&self.factors, &idx).expect("sampled index lies on the grid")
    }

    /// Probability of drawing the point with node indices `indices`.
    pub fn point_mass(&self, indices: &[usize]) -> Result<f64> {
        check_point(&self.factors, indices)?;
        let factors = self.factors.factors();
        Ok(match self.method {
            SamplerMethod::Uniform => 1.0 / self.factors.grid_size() as f64,
            SamplerMethod::TensorProduct => {
                indices.iter().zip(factors).map(|(&m, f)| f.marginal()[m]).product()
            }
            SamplerMethod::LeverageLower | SamplerMethod::OrthogonalColumns => {
                let tables: Vec<_> = factors
                    .iter()
                    .map(|f| {
                        if self.method == SamplerMethod::LeverageLower {
                            f.leverage()
                        } else {
                            f.column_leverage().expect("checked at construction")
                        }
                    })
                    .collect();
                let total: f64 = self
                    .set
                    .iter()
                    .map(|alpha| {
                        alpha
                            .entries()
                            .iter()
                            .zip(&tables)
                            .zip(indices)
                            .map(|((&a, t), &m)| t.get(a as usize - 1, m))
                            .product::<f64>()
                    })
                    .sum();
                total / self.set.len() as f64
            }
        })
    }
}
