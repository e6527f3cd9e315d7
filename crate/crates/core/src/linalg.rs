//! Householder QR and least squares on dense column-major matrices.
//!
//! This is the factorization used by the sampling path. The brute-force
//! oracle deliberately uses nalgebra's own decompositions instead, so the two
//! can be checked against each other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance on `|R_kk|` used for rank decisions.
pub const RANK_TOL: f64 = 1e-12;

/// Compact Householder factorization `A P = Q R`.
struct Householder {
    /// R on and above the diagonal, reflector tails below it.
    qr: DMatrix<f64>,
    tau: Vec<f64>,
    /// `perm[k]` is the original column in position `k`.
    perm: Vec<usize>,
}

impl Householder {
    fn new(mut a: DMatrix<f64>, pivot: bool) -> Self {
        let (m, n) = a.shape();
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..steps {
            if pivot {
                let norm2 = |a: &DMatrix<f64>, j: usize| -> f64 {
                    a.column(j).rows(k, m - k).iter().map(|x| x * x).sum()
                };
                let mut best = k;
                let mut best_norm = norm2(&a, k);
                for j in k + 1..n {
                    let nj = norm2(&a, j);
                    if nj > best_norm {
                        best = j;
                        best_norm = nj;
                    }
                }
                if best != k {
                    a.swap_columns(k, best);
                    perm.swap(k, best);
                }
            }
            let data = a.as_mut_slice();
            let (t, beta) = make_reflector(&mut data[k * m + k..(k + 1) * m]);
            tau[k] = t;
            if t != 0.0 {
                let mut v = data[k * m + k..(k + 1) * m].to_vec();
                v[0] = 1.0;
                for j in k + 1..n {
                    apply_reflector(&v, t, &mut data[j * m + k..(j + 1) * m]);
                }
            }
            a[(k, k)] = beta;
        }
        Self { qr: a, tau, perm }
    }

    fn reflector(&self, k: usize) -> Vec<f64> {
        let m = self.qr.nrows();
        let mut v: Vec<f64> = self.qr.column(k).rows(k, m - k).iter().copied().collect();
        v[0] = 1.0;
        v
    }

    /// Overwrites `b` with `Q^T b`.
    fn apply_qt(&self, b: &mut [f64]) {
        for k in 0..self.tau.len() {
            if self.tau[k] != 0.0 {
                apply_reflector(&self.reflector(k), self.tau[k], &mut b[k..]);
            }
        }
    }

    /// Explicit first `n` columns of `Q`.
    fn thin_q(&self) -> DMatrix<f64> {
        let m = self.qr.nrows();
        let n = self.tau.len();
        let mut q = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            q[(j, j)] = 1.0;
        }
        for k in (0..n).rev() {
            if self.tau[k] == 0.0 {
                continue;
            }
            let v = self.reflector(k);
            let data = q.as_mut_slice();
            for j in k..n {
                apply_reflector(&v, self.tau[k], &mut data[j * m + k..(j + 1) * m]);
            }
        }
        q
    }

    fn r_diag(&self, k: usize) -> f64 {
        self.qr[(k, k)]
    }

    /// Number of diagonal entries above `RANK_TOL` times the running maximum.
    fn numerical_rank(&self) -> Option<usize> {
        let mut max = 0.0f64;
        for k in 0..self.tau.len() {
            let d = self.r_diag(k).abs();
            max = max.max(d);
            if d.is_nan() || d <= RANK_TOL * max || d == 0.0 {
                return Some(k);
            }
        }
        None
    }
}

/// Builds `H = I − τ v vᵀ` with `H x = β e_1` and `v_1 = 1`; stores the tail
/// of `v` in `x[1..]` and returns `(τ, β)`.
fn make_reflector(x: &mut [f64]) -> (f64, f64) {
    let x0 = x[0];
    let tail: f64 = x[1..].iter().map(|v| v * v).sum();
    if tail == 0.0 {
        return (0.0, x0);
    }
    let norm = (x0 * x0 + tail).sqrt();
    let beta = if x0 >= 0.0 { -norm } else { norm };
    let tau = (beta - x0) / beta;
    let scale = 1.0 / (x0 - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    (tau, beta)
}

fn apply_reflector(v: &[f64], tau: f64, y: &mut [f64]) {
    let s: f64 = v.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    let s = s * tau;
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= s * vi;
    }
}

/// Thin QR `A = Q R` with `R_kk > 0`, `A` of size `M × N`, `M ≥ N`.
///
/// Fails with the first column `k` (0-based) where
/// `|R_kk| ≤ RANK_TOL · max_{i≤k} |R_ii|`.
pub fn thin_qr(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::TooFewNodes { rows: m, cols: n });
    }
    let h = Householder::new(a.clone(), false);
    if let Some(column) = h.numerical_rank() {
        return Err(Error::RankDeficient { column });
    }
    let mut q = h.thin_q();
    let mut r = h.qr.rows(0, n).upper_triangle();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            r.row_mut(k).neg_mut();
            q.column_mut(k).neg_mut();
        }
    }
    Ok((q, r))
}

/// Least-squares solution of `A x ≈ b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstsqSolution {
    pub x: DVector<f64>,
    pub rank: usize,
    /// `true` when `rank < ncols`; `x` is then the minimum-norm minimizer.
    pub rank_deficient: bool,
    /// `‖A x − b‖₂`.
    pub residual_norm: f64,
}

/// Column-pivoted QR least squares with a minimum-norm fallback through a
/// complete orthogonal decomposition.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LstsqSolution> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Internal(format!("lstsq: {m} rows but rhs of length {}", b.len())));
    }
    let h = Householder::new(a.clone(), true);
    let steps = m.min(n);
    let lead = if steps > 0 { h.r_diag(0).abs() } else { 0.0 };
    let rank = if lead == 0.0 {
        0
    } else {
        (0..steps).take_while(|&k| h.r_diag(k).abs() > RANK_TOL * lead).count()
    };
    let mut qtb = b.as_slice().to_vec();
    h.apply_qt(&mut qtb);

    let mut z = DVector::<f64>::zeros(n);
    if rank == n {
        back_substitute(&h.qr, &qtb[..n], z.as_mut_slice());
    } else if rank > 0 {
        // [R11 R12]ᵀ = W T, so [R11 R12] = Tᵀ Wᵀ and the minimum-norm
        // solution of Tᵀ Wᵀ z = c is z = W T⁻ᵀ c.
        let r_top = h.qr.rows(0, rank).upper_triangle();
        let cod = Householder::new(r_top.transpose(), false);
        let mut y = vec![0.0; rank];
        for i in 0..rank {
            let mut s = qtb[i];
            for (j, yj) in y[..i].iter().enumerate() {
                s -= cod.qr[(j, i)] * yj;
            }
            y[i] = s / cod.qr[(i, i)];
        }
        let mut full = vec![0.0; n];
        full[..rank].copy_from_slice(&y);
        for k in (0..cod.tau.len()).rev() {
            if cod.tau[k] != 0.0 {
                apply_reflector(&cod.reflector(k), cod.tau[k], &mut full[k..]);
            }
        }
        z.as_mut_slice().copy_from_slice(&full);
    }
    let mut x = DVector::<f64>::zeros(n);
    for (k, &orig) in h.perm.iter().enumerate() {
        x[orig] = z[k];
    }
    let residual_norm = (a * &x - b).norm();
    Ok(LstsqSolution { x, rank, rank_deficient: rank < n, residual_norm })
}

/// Solves `R x = c` for the leading `len(c)` block of an upper-triangular `R`.
fn back_substitute(r: &DMatrix<f64>, c: &[f64], x: &mut [f64]) {
    let n = c.len();
    for i in (0..n).rev() {
        let mut s = c[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix() -> DMatrix<f64> {
        DMatrix::from_fn(7, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 - 2.5 + 0.1 * (i * j) as f64)
    }

    #[test]
    fn qr_reconstructs() {
        let a = test_matrix();
        let (q, r) = thin_qr(&a).unwrap();
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::identity(4, 4)).amax() < 1e-14);
        assert!((&q * &r - &a).amax() < 1e-13 * a.amax());
        for k in 0..4 {
            assert!(r[(k, k)] > 0.0);
            for i in k + 1..4 {
                assert_eq!(r[(i, k)], 0.0);
            }
        }
    }

    #[test]
    fn qr_of_orthonormal_is_identity_r() {
        let (q0, _) = thin_qr(&test_matrix()).unwrap();
        let (q, r) = thin_qr(&q0).unwrap();
        assert!((&q - &q0).amax() < 1e-14);
        assert!((r - DMatrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn qr_reports_duplicate_column() {
        let mut a = test_matrix();
        let c = a.column(1).clone_owned();
        a.set_column(2, &c);
        assert!(matches!(thin_qr(&a), Err(Error::RankDeficient { column: 2 })));
    }

    #[test]
    fn qr_rejects_wide() {
        assert!(matches!(
            thin_qr(&DMatrix::zeros(2, 3)),
            Err(Error::TooFewNodes { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn lstsq_identity() {
        let a = DMatrix::identity(3, 3);
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let s = lstsq(&a, &b).unwrap();
        assert!((s.x - b).amax() < 1e-15);
        assert!(!s.rank_deficient);
    }

    #[test]
    fn lstsq_recovers_planted_solution() {
        let a = test_matrix();
        let x0 = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.25]);
        let b = &a * &x0;
        let s = lstsq(&a, &b).unwrap();
        assert!((s.x - x0).amax() < 1e-12);
        assert!(s.residual_norm < 1e-12);
    }

    #[test]
    fn lstsq_matches_normal_equations() {
        let a = test_matrix();
        let b = DVector::from_fn(7, |i, _| (i as f64).sin());
        let s = lstsq(&a, &b).unwrap();
        let grad = a.transpose() * (&a * &s.x - &b);
        assert!(grad.norm() < 1e-12 * (a.transpose() * &b).norm());
    }

    #[test]
    fn lstsq_zero_column_is_min_norm() {
        let mut a = test_matrix();
        a.column_mut(1).fill(0.0);
        let b = DVector::from_fn(7, |i, _| (i as f64).cos());
        let s = lstsq(&a, &b).unwrap();
        assert!(s.rank_deficient);
        assert_eq!(s.rank, 3);
        assert!(s.x[1].abs() < 1e-14);
        let grad = a.transpose() * (&a * &s.x - &b);
        assert!(grad.norm() < 1e-12);
    }

    #[test]
    fn lstsq_min_norm_on_duplicate_columns() {
        // x1 + x2 = 2 has minimum-norm solution (1, 1)
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let s = lstsq(&a, &b).unwrap();
        assert!(s.rank_deficient);
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lstsq_all_zero() {
        let s = lstsq(&DMatrix::zeros(3, 2), &DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(s.rank, 0);
        assert_eq!(s.x, DVector::zeros(2));
    }
}
