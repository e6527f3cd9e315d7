//! One-dimensional grids and univariate bases.
//!
//! A [`Grid1D`] is a finitely supported probability measure on the real line:
//! strictly increasing nodes carrying nonnegative weights that sum to one.
//! Basis functions are indexed from 1, matching multi-index entries, so
//! basis function `j` has polynomial degree `j - 1`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Custom grids are rejected when their weights miss 1 by more than this.
pub const WEIGHT_SUM_TOL: f64 = 1e-8;

const NEWTON_MAX_ITER: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<GridRepr> for Grid1D {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        Grid1D::new(r.nodes, r.weights)
    }
}

impl From<Grid1D> for GridRepr {
    fn from(g: Grid1D) -> Self {
        GridRepr { nodes: g.nodes, weights: g.weights }
    }
}

impl Grid1D {
    /// Validates and wraps a grid. Weights are not renormalized.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("grid has no nodes".into()));
        }
        if nodes.len() != weights.len() {
            return Err(Error::InvalidGrid(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("nodes must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidGrid("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidGrid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { nodes, weights })
    }

    /// Reads `{"nodes": [...], "weights": [...]}`.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same nodes, every weight `1/M`.
    pub fn with_uniform_weights(&self) -> Self {
        let m = self.nodes.len();
        Self { nodes: self.nodes.clone(), weights: vec![1.0 / m as f64; m] }
    }

    /// `Σ_m w_m f(y_m)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes on `[-1, 1]` with weights normalized to sum to 1.
///
/// Roots are found by Newton's method from `cos(π(i − 1/4)/(M + 1/2))`. Only
/// the nonnegative half is computed; the rest follows by symmetry.
pub fn gauss_legendre(m: usize) -> Result<Grid1D> {
    if m == 0 {
        return Err(Error::InvalidGrid("Gauss-Legendre rule needs M >= 1".into()));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(m));
        }
        if m % 2 == 1 && i == half - 1 {
            x = 0.0;
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Grid1D::new(nodes, weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Monomial,
    #[default]
    LegendreOrthonormal,
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(BasisKind::Monomial),
            "legendre-orthonormal" => Ok(BasisKind::LegendreOrthonormal),
            _ => Err(Error::Config(format!("unknown basis kind {s:?}"))),
        }
    }
}

/// The first `count` functions of a univariate family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub count: usize,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSpec("basis needs at least one function".into()));
        }
        Ok(Self { kind, count })
    }

    /// Evaluates function `j` (1-based) at `y`.
    pub fn eval(&self, j: usize, y: f64) -> Result<f64> {
        if j == 0 || j > self.count {
            return Err(Error::IndexOutOfRange { index: j, len: self.count });
        }
        let mut out = vec![0.0; j];
        eval_all(self.kind, y, &mut out);
        Ok(out[j - 1])
    }
}

pub fn eval_basis(spec: &BasisSpec, j: usize, y: f64) -> Result<f64> {
    spec.eval(j, y)
}

/// Fills `out[j]` with basis function `j + 1` at `y`, for every slot of `out`.
pub fn eval_all(kind: BasisKind, y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    match kind {
        BasisKind::Monomial => {
            let mut p = 1.0;
            for o in out.iter_mut() {
                *o = p;
                p *= y;
            }
        }
        BasisKind::LegendreOrthonormal => {
            let (mut p0, mut p1) = (1.0, y);
            out[0] = 1.0;
            for (k, o) in out.iter_mut().enumerate().skip(1) {
                if k > 1 {
                    let kf = (k - 1) as f64;
                    let p2 = ((2.0 * kf + 1.0) * y * p1 - kf * p0) / (kf + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                *o = (2.0 * k as f64 + 1.0).sqrt() * p1;
            }
        }
    }
}

/// Weight convention for a generated grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GridWeights {
    /// Normalized quadrature weights.
    #[default]
    Quadrature,
    /// `1/M` on every node.
    Uniform,
}

/// Grid description as read from a config file.
///
/// ```json
/// {"grid": "gauss-legendre", "M": 20}
/// {"grid": "gauss-legendre", "M": 20, "weights": "uniform"}
/// {"grid": "file", "path": "nodes.json"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    GaussLegendre {
        #[serde(rename = "M")]
        m: usize,
        #[serde(default)]
        weights: GridWeights,
    },
    File { path: PathBuf },
}

impl GridSpec {
    /// Builds the grid; relative file paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<Grid1D> {
        match self {
            GridSpec::GaussLegendre { m, weights } => {
                let g = gauss_legendre(*m)?;
                Ok(match weights {
                    GridWeights::Quadrature => g,
                    GridWeights::Uniform => g.with_uniform_weights(),
                })
            }
            GridSpec::File { path } => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Grid1D::from_json_file(&full)
            }
        }
    }
}
