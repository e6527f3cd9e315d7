//! Sketched least squares: draw weighted grid points, assemble and solve
//! the small system, and measure the error on the full grid.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::KroneckerFactors;
use crate::indexset::{lexicographic_position, lexicographic_unrank, MultiIndexSet};
use crate::linalg::lstsq;
use crate::rng::RngState;
use crate::sampler::{mu_mass, GridPoint, Sampler, SamplerMethod};

/// Rows per chunk when streaming over the full grid.
pub const CHUNK_ROWS: usize = 65_536;

/// Streaming passes refuse grids larger than this.
pub const MAX_STREAM_ROWS: usize = 100_000_000;

/// The function `b` being approximated, evaluated at grid points.
pub trait TargetFunction: Sync {
    fn value(&self, indices: &[usize], coords: &[f64]) -> f64;

    fn at(&self, point: &GridPoint) -> f64 {
        self.value(&point.indices, &point.coords)
    }
}

/// Any `Fn(&[f64]) -> f64` is a target of the coordinates alone.
impl<F> TargetFunction for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, _indices: &[usize], coords: &[f64]) -> f64 {
        self(coords)
    }
}

/// Values of `b` on every grid point, in lexicographic row order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl Tabulated {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let total: usize = shape.iter().product();
        if total != values.len() {
            return Err(Error::Config(format!(
                "tabulated target has {} values but the grid has {total} points",
                values.len()
            )));
        }
        Ok(Self { shape, values })
    }

    /// Evaluates `target` on every grid point, in parallel.
    pub fn from_target(factors: &KroneckerFactors, target: &dyn TargetFunction) -> Result<Self> {
        let shape = factors.shape();
        let total = checked_grid_size(factors)?;
        let values = (0..total)
            .into_par_iter()
            .map(|p| {
                let idx = lexicographic_unrank(&shape, p);
                let coords = coords_of(factors, &idx);
                target.value(&idx, &coords)
            })
            .collect();
        Ok(Self { shape, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TargetFunction for Tabulated {
    fn value(&self, indices: &[usize], _coords: &[f64]) -> f64 {
        let p = lexicographic_position(&self.shape, indices).expect("index inside the tabulated grid");
        self.values[p]
    }
}

fn coords_of(factors: &KroneckerFactors, idx: &[usize]) -> Vec<f64> {
    idx.iter().zip(factors.factors()).map(|(&m, f)| f.grid().nodes()[m]).collect()
}

fn checked_grid_size(factors: &KroneckerFactors) -> Result<usize> {
    let rows = factors.grid_size();
    if rows > MAX_STREAM_ROWS {
        return Err(Error::SizeBudget { rows, budget: MAX_STREAM_ROWS });
    }
    Ok(rows)
}

/// `K` grid points with weights `v_k = μ(Y_k) / (K ν(Y_k))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub method: SamplerMethod,
    pub rng: RngState,
    pub points: Vec<GridPoint>,
    pub weights: Vec<f64>,
}

impl Sketch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws `k` i.i.d. points from `sampler`.
pub fn draw_sketch(sampler: &Sampler, k: usize, state: RngState) -> Result<Sketch> {
    if k == 0 {
        return Err(Error::ParameterRange("sketch size K must be >= 1".into()));
    }
    let factors = sampler.factors();
    let mut rng = state.rng();
    let mut points = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for _ in 0..k {
        let p = sampler.sample_point(&mut rng);
        let nu = sampler.point_mass(&p.indices)?;
        if nu <= 0.0 {
            return Err(Error::Internal(format!("sampled point {:?} has zero mass", p.indices)));
        }
        let v = mu_mass(factors, &p.indices)? / (k as f64 * nu);
        if !v.is_finite() {
            return Err(Error::Internal(format!("non-finite weight at {:?}", p.indices)));
        }
        points.push(p);
        weights.push(v);
    }
    Ok(Sketch { method: sampler.method(), rng: state, points, weights })
}

/// Values `a_α(y) = ∏_d a^(d)_{α_d}(y_d)` for every `α ∈ J`, written to `out`.
fn product_basis_row(
    set: &MultiIndexSet,
    factors: &KroneckerFactors,
    indices: &[usize],
    out: &mut [f64],
) {
    let tables: Vec<_> = factors.factors().iter().map(|f| f.factor_matrix().basis_values()).collect();
    for (o, alpha) in out.iter_mut().zip(set.iter()) {
        *o = alpha
            .entries()
            .iter()
            .zip(&tables)
            .zip(indices)
            .map(|((&a, t), &m)| t[(m, a as usize - 1)])
            .product();
    }
}

/// `Ã_{k,n} = √v_k a_{α_n}(Y_k)` and `b̃_k = √v_k b(Y_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchedSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

pub fn assemble(
    set: &MultiIndexSet,
    factors: &KroneckerFactors,
    sketch: &Sketch,
    target: &dyn TargetFunction,
) -> Result<SketchedSystem> {
    let (k, n) = (sketch.len(), set.len());
    let mut a = DMatrix::zeros(k, n);
    let mut b = DVector::zeros(k);
    let mut row = vec![0.0; n];
    for (i, (p, &v)) in sketch.points.iter().zip(&sketch.weights).enumerate() {
        product_basis_row(set, factors, &p.indices, &mut row);
        let s = v.sqrt();
        for (j, r) in row.iter().enumerate() {
            a[(i, j)] = s * r;
        }
        b[i] = s * target.at(p);
    }
    Ok(SketchedSystem { a, b })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: DVector<f64>,
    /// `‖Ã x − b̃‖₂`.
    pub residual_norm: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

pub fn solve(sys: &SketchedSystem) -> Result<Solution> {
    let s = lstsq(&sys.a, &sys.b)?;
    Ok(Solution { x: s.x, residual_norm: s.residual_norm, rank: s.rank, rank_deficient: s.rank_deficient })
}

/// Pairwise sum in a fixed tree order.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Sums `f(row)` over all grid rows in fixed-size chunks; the result does
/// not depend on the number of threads.
fn stream_rows<const K: usize, F>(factors: &KroneckerFactors, f: F) -> Result<[f64; K]>
where
    F: Fn(&[usize], &[f64]) -> [f64; K] + Sync,
{
    let total = checked_grid_size(factors)?;
    let shape = factors.shape();
    let chunks: Vec<[f64; K]> = (0..total.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; K];
            for p in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(total) {
                let idx = lexicographic_unrank(&shape, p);
                let coords = coords_of(factors, &idx);
                let r = f(&idx, &coords);
                for (a, x) in acc.iter_mut().zip(r) {
                    *a += x;
                }
            }
            acc
        })
        .collect();
    let mut out = [0.0; K];
    for (i, o) in out.iter_mut().enumerate() {
        let col: Vec<f64> = chunks.iter().map(|c| c[i]).collect();
        *o = pairwise_sum(&col);
    }
    Ok(out)
}

/// `‖A x − b‖₂ / ‖b‖₂` over the whole weighted grid, streamed without
/// materializing `A`.
pub fn full_relative_error(
    set: &MultiIndexSet,
    factors: &KroneckerFactors,
    x: &DVector<f64>,
    target: &dyn TargetFunction,
) -> Result<f64> {
    if x.len() != set.len() {
        return Err(Error::Internal(format!("{} coefficients for {} columns", x.len(), set.len())));
    }
    let [res, norm] = stream_rows(factors, |idx, coords| {
        let w = mu_mass(factors, idx).expect("row on grid");
        let mut row = vec![0.0; set.len()];
        product_basis_row(set, factors, idx, &mut row);
        let fit: f64 = row.iter().zip(x.iter()).map(|(a, c)| a * c).sum();
        let b = target.value(idx, coords);
        [w * (fit - b) * (fit - b), w * b * b]
    })?;
    Ok((res / norm).sqrt())
}

/// Row `m` of the Kronecker-built orthonormal basis `U_{m,α} = ∏_d Q^(d)_{m_d, α_d}`.
fn kronecker_q_row(set: &MultiIndexSet, factors: &KroneckerFactors, idx: &[usize], out: &mut [f64]) {
    let qs: Vec<_> = factors.factors().iter().map(|f| &f.decomposition().q).collect();
    for (o, alpha) in out.iter_mut().zip(set.iter()) {
        *o = alpha
            .entries()
            .iter()
            .zip(&qs)
            .zip(idx)
            .map(|((&a, q), &m)| q[(m, a as usize - 1)])
            .product();
    }
}

/// Optimal relative error `min_x ‖Ax − b‖ / ‖b‖` for a lower `J`.
///
/// For lower sets the Kronecker products of factor `Q` columns form an
/// orthonormal basis of `range(A)`, so the projection is two streaming
/// passes: coefficients `c = Uᵀ b̃`, then the residual `b̃ − U c`.
pub fn optimal_relative_error(
    set: &MultiIndexSet,
    factors: &KroneckerFactors,
    target: &dyn TargetFunction,
) -> Result<f64> {
    if !set.is_monotone_lower() {
        return Err(Error::Precondition("streaming optimal error needs a monotone lower set".into()));
    }
    let n = set.len();
    let shape = factors.shape();
    let total = checked_grid_size(factors)?;
    let nchunks = total.div_ceil(CHUNK_ROWS);
    let partial: Vec<Vec<f64>> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; n];
            let mut row = vec![0.0; n];
            for p in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(total) {
                let idx = lexicographic_unrank(&shape, p);
                let coords = coords_of(factors, &idx);
                let bw = mu_mass(factors, &idx).expect("row on grid").sqrt() * target.value(&idx, &coords);
                kronecker_q_row(set, factors, &idx, &mut row);
                for (a, u) in acc.iter_mut().zip(&row) {
                    *a += u * bw;
                }
            }
            acc
        })
        .collect();
    let coeffs: Vec<f64> = (0..n)
        .map(|j| pairwise_sum(&partial.iter().map(|c| c[j]).collect::<Vec<_>>()))
        .collect();
    let [res, norm] = stream_rows(factors, |idx, coords| {
        let bw = mu_mass(factors, idx).expect("row on grid").sqrt() * target.value(idx, coords);
        let mut row = vec![0.0; n];
        kronecker_q_row(set, factors, idx, &mut row);
        let fit: f64 = row.iter().zip(&coeffs).map(|(u, c)| u * c).sum();
        [(bw - fit) * (bw - fit), bw * bw]
    })?;
    Ok((res / norm).sqrt())
}

/// Sample-size bounds from the sketching guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSizeBound {
    /// Residual bound when sampling from the subspace augmented by `b`.
    InstanceVb,
    /// Residual bound when sampling from the induced measure of `V` alone.
    InstanceV,
    /// Conditional bound on the expected residual.
    Expectation,
    /// Same `K` as `Expectation`, for the truncated estimator.
    Truncation,
    /// `ε`-embedding of `V` with probability `1 − δ/2`.
    Embedding,
}

impl std::str::FromStr for SampleSizeBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown bound {s:?}")))
    }
}

/// Smallest `K` satisfying the chosen bound for an `n`-dimensional space.
pub fn sample_size(bound: SampleSizeBound, n: usize, epsilon: f64, delta: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::ParameterRange("N must be >= 1".into()));
    }
    let open = |x: f64, hi: f64| x > 0.0 && x < hi;
    let eps_hi = match bound {
        SampleSizeBound::InstanceVb => 0.5,
        SampleSizeBound::InstanceV | SampleSizeBound::Embedding => 1.0,
        SampleSizeBound::Expectation | SampleSizeBound::Truncation => f64::INFINITY,
    };
    if !open(epsilon, eps_hi) {
        return Err(Error::ParameterRange(format!("epsilon = {epsilon} outside (0, {eps_hi})")));
    }
    if !open(delta, 1.0) {
        return Err(Error::ParameterRange(format!("delta = {delta} outside (0, 1)")));
    }
    let nf = n as f64;
    let k = match bound {
        SampleSizeBound::InstanceVb => {
            3.0 * (4.0 * (nf + 1.0) / delta).ln() / (epsilon * epsilon) * (nf + 1.0)
        }
        SampleSizeBound::InstanceV => {
            let a = 2.0 / (delta * (1.0 - epsilon).powi(2));
            let b = 3.0 * (4.0 * nf / delta).ln() / epsilon;
            nf / epsilon * a.max(b)
        }
        SampleSizeBound::Expectation | SampleSizeBound::Truncation => {
            2.0 * nf * (1.0 / epsilon + 3.0 * (2.0 * nf / delta).ln())
        }
        SampleSizeBound::Embedding => 3.0 * (4.0 * nf / delta).ln() / (epsilon * epsilon) * nf,
    };
    Ok(k.ceil() as usize)
}

/// Clamps `value` to `[-t, t]`.
pub fn truncate(value: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    value.clamp(-t, t)
}
