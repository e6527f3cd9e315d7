//! Dense brute-force reference computations for small instances.
//!
//! Everything here materializes the full `M × N` design matrix and relies on
//! nalgebra's decompositions, independent of the crate's own QR and of the
//! Kronecker shortcuts used by the samplers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::factor::KroneckerFactors;
use crate::indexset::{lexicographic_position, lexicographic_unrank, MultiIndexSet};
use crate::sketch::{Sketch, TargetFunction};

/// Largest grid the oracle will materialize.
pub const MAX_ORACLE_ROWS: usize = 1_000_000;

/// Relative rank tolerance on `|R_ii|` for oracle decompositions.
pub const ORACLE_RANK_TOL: f64 = 1e-10;

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

/// The weighted system `A x ≈ b` on the full grid, rows in lexicographic
/// order (dimension 1 slowest).
#[derive(Clone, Debug)]
pub struct FullSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Grid shape `(M_1, …, M_D)`.
    pub shape: Vec<usize>,
    /// `μ` mass of each row.
    pub row_weights: Vec<f64>,
}

/// Row weights `∏_d w^(d)_{m_d}` by Kronecker products of the factor weights.
fn kron_weights(factors: &KroneckerFactors) -> DVector<f64> {
    factors.factors().iter().fold(DVector::from_element(1, 1.0), |acc, f| {
        kron_vec(&acc, &DVector::from_column_slice(f.grid().weights()))
    })
}

/// Builds `A` column by column, each column being `⊗_d A^(d)_{:, α_d}`.
pub fn build_full(
    set: &MultiIndexSet,
    factors: &KroneckerFactors,
    target: &dyn TargetFunction,
) -> Result<FullSystem> {
    let shape = factors.shape();
    let rows = factors.grid_size();
    if rows > MAX_ORACLE_ROWS {
        return Err(Error::SizeBudget { rows, budget: MAX_ORACLE_ROWS });
    }
    let mut a = DMatrix::zeros(rows, set.len());
    for (j, alpha) in set.iter().enumerate() {
        let col = alpha.entries().iter().zip(factors.factors()).fold(
            DVector::from_element(1, 1.0),
            |acc, (&k, f)| kron_vec(&acc, &f.factor_matrix().matrix().column(k as usize - 1).into_owned()),
        );
        a.set_column(j, &col);
    }
    let row_weights: Vec<f64> = kron_weights(factors).iter().copied().collect();
    let b = DVector::from_fn(rows, |p, _| {
        let idx = lexicographic_unrank(&shape, p);
        let coords: Vec<f64> =
            idx.iter().zip(factors.factors()).map(|(&m, f)| f.grid().nodes()[m]).collect();
        row_weights[p].sqrt() * target.value(&idx, &coords)
    });
    Ok(FullSystem { a, b, shape, row_weights })
}

/// Orthonormal basis of `range(m)` from column-pivoted QR, with its rank.
fn range_basis(m: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let n = r.nrows().min(r.ncols());
    let lead = if n > 0 { r[(0, 0)].abs() } else { 0.0 };
    let rank = (0..n).take_while(|&i| lead > 0.0 && r[(i, i)].abs() > ORACLE_RANK_TOL * lead).count();
    let q = qr.q();
    (q.columns(0, rank).into_owned(), rank)
}

/// Orthonormal basis `U` of `range(A)`; errors if `A` is rank deficient.
pub fn orthonormal_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (u, rank) = range_basis(a);
    if rank < a.ncols() {
        return Err(Error::RankDeficient { column: rank });
    }
    Ok(u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeverageMode {
    Plain,
    /// Leverage scores of `[A | b]`.
    AugmentedWithTarget,
}

/// `ℓ_m = (1/r) Σ_j U_{m,j}²`.
pub fn exact_leverage(sys: &FullSystem, mode: LeverageMode) -> Result<Vec<f64>> {
    let u = match mode {
        LeverageMode::Plain => orthonormal_basis(&sys.a)?,
        LeverageMode::AugmentedWithTarget => {
            let mut ab = sys.a.clone().insert_column(sys.a.ncols(), 0.0);
            ab.set_column(sys.a.ncols(), &sys.b);
            range_basis(&ab).0
        }
    };
    let r = u.ncols() as f64;
    Ok(u.row_iter().map(|row| row.norm_squared() / r).collect())
}

#[derive(Clone, Debug)]
pub struct FullSolution {
    pub x: DVector<f64>,
    pub relative_error: f64,
    pub rank_deficient: bool,
}

/// Least squares on the full system; falls back to the SVD pseudo-inverse
/// when `A` is rank deficient.
pub fn solve_full(sys: &FullSystem) -> Result<FullSolution> {
    let (_, rank) = range_basis(&sys.a);
    let rank_deficient = rank < sys.a.ncols();
    let x = if rank_deficient {
        sys.a
            .clone()
            .svd(true, true)
            .solve(&sys.b, ORACLE_RANK_TOL)
            .map_err(|e| Error::Internal(e.into()))?
    } else {
        let qr = sys.a.clone().qr();
        let qtb = qr.q().transpose() * &sys.b;
        qr.r()
            .solve_upper_triangular(&qtb)
            .ok_or_else(|| Error::Internal("singular R in full solve".into()))?
    };
    let relative_error = (&sys.a * &x - &sys.b).norm() / sys.b.norm();
    Ok(FullSolution { x, relative_error, rank_deficient })
}

fn sketch_rows(sketch: &Sketch, shape: &[usize]) -> Result<Vec<usize>> {
    sketch.points.iter().map(|p| lexicographic_position(shape, &p.indices)).collect()
}

/// `G_τ = Σ_k v_k u(Y_k) u(Y_k)ᵀ` with `u_n(y_m) = U_{m,n} / √w_m`.
pub fn gram_matrix(u: &DMatrix<f64>, sys: &FullSystem, sketch: &Sketch) -> Result<DMatrix<f64>> {
    let n = u.ncols();
    let mut g = DMatrix::zeros(n, n);
    for (row, &v) in sketch_rows(sketch, &sys.shape)?.into_iter().zip(&sketch.weights) {
        let uk = u.row(row).transpose() / sys.row_weights[row].sqrt();
        g.ger(v, &uk, &uk, 1.0);
    }
    Ok(g)
}

/// `‖G_τ − I‖₂`, from the eigenvalues of the symmetric difference.
pub fn gram_statistic(u: &DMatrix<f64>, sys: &FullSystem, sketch: &Sketch) -> Result<f64> {
    let n = u.ncols();
    let diff = gram_matrix(u, sys, sketch)? - DMatrix::identity(n, n);
    Ok(SymmetricEigen::new(diff).eigenvalues.amax())
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm_power(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let mtm = m.transpose() * m;
    let mut v = DVector::from_fn(mtm.ncols(), |i, _| 1.0 + 0.01 * i as f64);
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = &mtm * &v;
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - lambda).abs() <= tol * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// `Σ_n ⟨b_⊥, u_n⟩_τ²` where `b_⊥` is the weighted full residual `b − A x*`.
pub fn aliasing_statistic(
    u: &DMatrix<f64>,
    sys: &FullSystem,
    residual: &DVector<f64>,
    sketch: &Sketch,
) -> Result<f64> {
    let mut inner = DVector::zeros(u.ncols());
    for (row, &v) in sketch_rows(sketch, &sys.shape)?.into_iter().zip(&sketch.weights) {
        let w = sys.row_weights[row];
        // both factors carry 1/√w: residual and basis are weighted vectors
        inner.axpy(v * residual[row] / w, &u.row(row).transpose(), 1.0);
    }
    Ok(inner.norm_squared())
}

/// The `K × M` operator with `S_{k, row(Y_k)} = √(v_k / μ(Y_k))`, so that
/// `S A` and `S b` are the sketched system.
pub fn selection_operator(sys: &FullSystem, sketch: &Sketch) -> Result<DMatrix<f64>> {
    let mut s = DMatrix::zeros(sketch.len(), sys.a.nrows());
    for (k, (row, &v)) in sketch_rows(sketch, &sys.shape)?.into_iter().zip(&sketch.weights).enumerate() {
        s[(k, row)] = (v / sys.row_weights[row]).sqrt();
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gauss_legendre, BasisKind};
    use crate::indexset::IndexSetSpec;

    fn factors(m: usize, set: &MultiIndexSet, kind: BasisKind) -> KroneckerFactors {
        let grids = vec![gauss_legendre(m).unwrap(); set.dimension()];
        KroneckerFactors::new(&grids, kind, set.bounding_box()).unwrap()
    }

    #[test]
    fn full_box_is_kronecker_product() {
        let set = MultiIndexSet::full_box(&[2, 3]).unwrap();
        let f = factors(4, &set, BasisKind::Monomial);
        let sys = build_full(&set, &f, &|_: &[f64]| 0.0).unwrap();
        let a1 = f.factor(0).factor_matrix().matrix();
        let a2 = f.factor(1).factor_matrix().matrix();
        let kr = a1.kronecker(a2);
        for (j, alpha) in set.iter().enumerate() {
            let c = crate::indexset::lexicographic_column_index(set.bounding_box(), alpha).unwrap();
            assert!((sys.a.column(j) - kr.column(c)).amax() < 1e-14);
        }
    }

    #[test]
    fn square_matrix_has_uniform_leverage() {
        let set = MultiIndexSet::full_box(&[5]).unwrap();
        let f = factors(5, &set, BasisKind::Monomial);
        let sys = build_full(&set, &f, &|_: &[f64]| 1.0).unwrap();
        for l in exact_leverage(&sys, LeverageMode::Plain).unwrap() {
            assert!((l - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn augmented_equals_plain_in_range() {
        let set = IndexSetSpec::total_degree(2, 2).build().unwrap();
        let f = factors(5, &set, BasisKind::Monomial);
        let sys = build_full(&set, &f, &|y: &[f64]| 1.0 + y[0] * y[1]).unwrap();
        let plain = exact_leverage(&sys, LeverageMode::Plain).unwrap();
        let aug = exact_leverage(&sys, LeverageMode::AugmentedWithTarget).unwrap();
        for (a, b) in plain.iter().zip(&aug) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((plain.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let outside = build_full(&set, &f, &|y: &[f64]| y[0].exp()).unwrap();
        let aug = exact_leverage(&outside, LeverageMode::AugmentedWithTarget).unwrap();
        assert!((aug.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn solve_in_range_is_exact() {
        let set = IndexSetSpec::total_degree(2, 2).build().unwrap();
        let f = factors(5, &set, BasisKind::LegendreOrthonormal);
        let sys = build_full(&set, &f, &|y: &[f64]| 2.0 - y[1] * y[1]).unwrap();
        let s = solve_full(&sys).unwrap();
        assert!(s.relative_error < 1e-12);
        assert!(!s.rank_deficient);
    }

    #[test]
    fn eigen_and_power_norms_agree() {
        let m = DMatrix::from_fn(6, 6, |i, j| ((i + 2 * j) as f64).sin() + if i == j { 0.5 } else { 0.0 });
        let sym = &m + m.transpose();
        let eig = SymmetricEigen::new(sym.clone()).eigenvalues.amax();
        let pow = spectral_norm_power(&sym, 1e-13, 10_000);
        assert!((eig - pow).abs() < 1e-8 * eig);
    }

    #[test]
    fn rank_deficient_plain_leverage_errors() {
        let set = IndexSetSpec::total_degree(1, 3).build().unwrap();
        let grids = vec![crate::grid::Grid1D::new(vec![-1.0, 0.0, 0.5, 1.0], vec![0.25; 4]).unwrap()];
        let f = KroneckerFactors::new(&grids, BasisKind::Monomial, set.bounding_box()).unwrap();
        let mut sys = build_full(&set, &f, &|_: &[f64]| 1.0).unwrap();
        let c = sys.a.column(0).into_owned();
        sys.a.set_column(1, &c);
        assert!(exact_leverage(&sys, LeverageMode::Plain).is_err());
        assert!(solve_full(&sys).unwrap().rank_deficient);
    }
}
