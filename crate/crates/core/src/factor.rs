//! Per-dimension factor matrices, their QR factors, leverage tables and
//! alias samplers.
//!
//! Node indices `m` and basis indices `k` are 0-based here; basis index `k`
//! corresponds to multi-index entry `α_d = k + 1`.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::grid::{eval_all, BasisKind, BasisSpec, Grid1D};
use crate::linalg::thin_qr;

/// Largest off-diagonal entry allowed in the Gram matrix of normalized
/// columns before the orthogonal-columns sampler is refused.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// `A^(d)` with entries `√w_m · a_n(y_m)`, plus the unweighted values.
#[derive(Clone, Debug)]
pub struct FactorMatrix {
    grid: Grid1D,
    basis: BasisSpec,
    weighted: DMatrix<f64>,
    values: DMatrix<f64>,
}

impl FactorMatrix {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    /// `A^(d)`, `M_d × N_d`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.weighted
    }

    /// `a_n(y_m)` without the `√w_m` factor.
    pub fn basis_values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

pub fn build_factor(grid: &Grid1D, basis: BasisSpec) -> Result<FactorMatrix> {
    let (m, n) = (grid.len(), basis.count);
    if m < n {
        return Err(Error::TooFewNodes { rows: m, cols: n });
    }
    let mut values = DMatrix::zeros(m, n);
    let mut row = vec![0.0; n];
    for (i, &y) in grid.nodes().iter().enumerate() {
        eval_all(basis.kind, y, &mut row);
        for (j, v) in row.iter().enumerate() {
            values[(i, j)] = *v;
        }
    }
    let mut weighted = values.clone();
    for (i, w) in grid.weights().iter().enumerate() {
        weighted.row_mut(i).scale_mut(w.sqrt());
    }
    Ok(FactorMatrix { grid: grid.clone(), basis, weighted, values })
}

/// `A^(d) = Q R` with orthonormal `Q` and positive `diag(R)`.
#[derive(Clone, Debug)]
pub struct FactorDecomposition {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

pub fn factor_qr(a: &FactorMatrix) -> Result<FactorDecomposition> {
    let (q, r) = thin_qr(a.matrix())?;
    Ok(FactorDecomposition { q, r })
}

/// `ℓ_{k,m} = (Q_{m,k})²`: row `k` is the distribution `ν_k` over nodes.
///
/// `Q` already carries the `√w_m` row scaling, so each row sums to one.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageTable1D {
    rows: Vec<Vec<f64>>,
}

impl LeverageTable1D {
    /// Squares the entries of a matrix with orthonormal columns.
    pub fn from_orthonormal(q: &DMatrix<f64>) -> Self {
        let rows = (0..q.ncols())
            .map(|k| q.column(k).iter().map(|x| x * x).collect())
            .collect();
        Self { rows }
    }

    pub fn num_functions(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.rows[k][m]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    /// `(1/N_d) Σ_k ℓ_{k,m}`, the leverage scores of `A^(d)`.
    pub fn marginal(&self) -> Vec<f64> {
        let n = self.rows.len() as f64;
        let mut out = vec![0.0; self.num_nodes()];
        for row in &self.rows {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

pub fn leverage_table(dec: &FactorDecomposition) -> LeverageTable1D {
    LeverageTable1D::from_orthonormal(&dec.q)
}

/// Column-normalized `A^(d)`, when its columns are mutually orthogonal.
fn normalized_columns(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut q = a.clone();
    for mut c in q.column_iter_mut() {
        let norm = c.norm();
        if norm == 0.0 {
            return None;
        }
        c /= norm;
    }
    let gram = q.transpose() * &q;
    let n = gram.nrows();
    let off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| gram[(i, j)].abs())
        .fold(0.0, f64::max);
    (off <= ORTHOGONALITY_TOL).then_some(q)
}

/// Everything needed to sample and weight along one dimension.
#[derive(Clone, Debug)]
pub struct DimensionFactor {
    matrix: FactorMatrix,
    decomposition: FactorDecomposition,
    leverage: LeverageTable1D,
    samplers: Vec<AliasTable>,
    marginal: Vec<f64>,
    /// Tables from normalized columns; `None` if the columns are not orthogonal.
    orthogonal: Option<(LeverageTable1D, Vec<AliasTable>)>,
}

impl DimensionFactor {
    pub fn new(grid: &Grid1D, basis: BasisSpec) -> Result<Self> {
        let matrix = build_factor(grid, basis)?;
        let decomposition = factor_qr(&matrix)?;
        let leverage = leverage_table(&decomposition);
        let samplers = (0..leverage.num_functions())
            .map(|k| AliasTable::new(leverage.row(k)))
            .collect::<Result<Vec<_>>>()?;
        let marginal = leverage.marginal();
        let orthogonal = match normalized_columns(matrix.matrix()) {
            Some(q) => {
                let table = LeverageTable1D::from_orthonormal(&q);
                let s = (0..table.num_functions())
                    .map(|k| AliasTable::new(table.row(k)))
                    .collect::<Result<Vec<_>>>()?;
                Some((table, s))
            }
            None => None,
        };
        Ok(Self { matrix, decomposition, leverage, samplers, marginal, orthogonal })
    }

    pub fn grid(&self) -> &Grid1D {
        self.matrix.grid()
    }

    pub fn num_nodes(&self) -> usize {
        self.matrix.grid().len()
    }

    pub fn num_functions(&self) -> usize {
        self.matrix.basis().count
    }

    pub fn factor_matrix(&self) -> &FactorMatrix {
        &self.matrix
    }

    pub fn decomposition(&self) -> &FactorDecomposition {
        &self.decomposition
    }

    pub fn leverage(&self) -> &LeverageTable1D {
        &self.leverage
    }

    /// `ν^(d)(m) = (1/N_d) Σ_k ℓ_{k,m}`.
    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    pub fn has_orthogonal_columns(&self) -> bool {
        self.orthogonal.is_some()
    }

    /// Leverage table built from normalized columns instead of QR.
    pub fn column_leverage(&self) -> Option<&LeverageTable1D> {
        self.orthogonal.as_ref().map(|(t, _)| t)
    }

    /// Draws a node index from `ν_k`.
    pub fn sample_nu_kd<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<usize> {
        let table = self
            .samplers
            .get(k)
            .ok_or(Error::IndexOutOfRange { index: k, len: self.samplers.len() })?;
        Ok(table.draw(rng))
    }

    /// Draws a node index from the normalized-column distribution of column `k`.
    pub fn sample_column<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<usize> {
        let (_, samplers) = self.orthogonal.as_ref().ok_or_else(|| {
            Error::Precondition("factor columns are not orthogonal".into())
        })?;
        let table = samplers
            .get(k)
            .ok_or(Error::IndexOutOfRange { index: k, len: samplers.len() })?;
        Ok(table.draw(rng))
    }

    /// Writes `table,row,col,value` lines for `Q`, `R` and `ℓ`.
    pub fn write_tables_csv<W: Write>(&self, dimension: usize, out: &mut csv::Writer<W>) -> Result<()> {
        let dump = |out: &mut csv::Writer<W>, name: &str, m: &DMatrix<f64>| -> Result<()> {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.serialize((dimension, name, i, j, m[(i, j)]))?;
                }
            }
            Ok(())
        };
        dump(out, "Q", &self.decomposition.q)?;
        dump(out, "R", &self.decomposition.r)?;
        for k in 0..self.leverage.num_functions() {
            for (m, v) in self.leverage.row(k).iter().enumerate() {
                out.serialize((dimension, "leverage", k, m, v))?;
            }
        }
        Ok(())
    }
}

/// The `D` factors of a Kronecker product design.
#[derive(Clone, Debug)]
pub struct KroneckerFactors {
    dims: Vec<DimensionFactor>,
    kind: BasisKind,
}

impl KroneckerFactors {
    /// One factor per grid, with `bounds[d]` basis functions in dimension `d`.
    pub fn new(grids: &[Grid1D], kind: BasisKind, bounds: &[u32]) -> Result<Self> {
        if grids.len() != bounds.len() {
            return Err(Error::InvalidSpec(format!(
                "{} grids for {} dimensions",
                grids.len(),
                bounds.len()
            )));
        }
        let dims = grids
            .iter()
            .zip(bounds)
            .map(|(g, &n)| DimensionFactor::new(g, BasisSpec::new(kind, n as usize)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dims, kind })
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn basis_kind(&self) -> BasisKind {
        self.kind
    }

    pub fn factor(&self, d: usize) -> &DimensionFactor {
        &self.dims[d]
    }

    pub fn factors(&self) -> &[DimensionFactor] {
        &self.dims
    }

    /// `(M_1, …, M_D)`.
    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(DimensionFactor::num_nodes).collect()
    }

    /// `(N_1, …, N_D)`.
    pub fn bounds(&self) -> Vec<u32> {
        self.dims.iter().map(|f| f.num_functions() as u32).collect()
    }

    /// `∏ M_d`, saturating.
    pub fn grid_size(&self) -> usize {
        self.dims.iter().fold(1usize, |acc, f| acc.saturating_mul(f.num_nodes()))
    }
}
