//! Multi-index sets selecting columns of a Kronecker product matrix.
//!
//! Multi-indices are 1-based: the all-ones index `(1, …, 1)` names the
//! product of the constant (first) univariate basis functions. Positions
//! returned by [`MultiIndexSet::position`] and [`lexicographic_column_index`]
//! are 0-based, as usual for Rust slices.
//!
//! Sets are kept in graded-lexicographic order: by total degree
//! `Σ_d (α_d − 1)`, ties broken lexicographically. This order fixes the
//! column order of every design matrix built from the set.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration stops with an error past this many indices.
pub const MAX_SET_SIZE: usize = 5_000_000;

/// A multi-index `α ∈ ℕ^D` with all entries `≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpec("multi-index must have at least one entry".into()));
        }
        if entries.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "multi-index entries are 1-based, got {entries:?}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn ones(dimension: usize) -> Self {
        Self(vec![1; dimension])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Total degree `Σ_d (α_d − 1)`.
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e - 1)).sum()
    }

    /// `true` if `self ≤ other` componentwise.
    pub fn is_dominated_by(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Exponent `p` of the weighted ℓ^p function: `0`, a positive real, or `∞`.
///
/// In JSON it is a number, or one of the strings `"inf"` / `"infinity"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Zero,
    Finite(f64),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Name(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = String;

    fn try_from(r: ExponentRepr) -> std::result::Result<Self, String> {
        match r {
            ExponentRepr::Number(0.0) => Ok(Exponent::Zero),
            ExponentRepr::Number(p) if p.is_infinite() && p > 0.0 => Ok(Exponent::Infinity),
            ExponentRepr::Number(p) if p.is_finite() && p > 0.0 => Ok(Exponent::Finite(p)),
            ExponentRepr::Number(p) => Err(format!("exponent p must be >= 0, got {p}")),
            ExponentRepr::Name(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => Ok(Exponent::Infinity),
                _ => Err(format!("unknown exponent {s:?}")),
            },
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Zero => ExponentRepr::Number(0.0),
            Exponent::Finite(p) => ExponentRepr::Number(p),
            Exponent::Infinity => ExponentRepr::Name("inf".into()),
        }
    }
}

/// Description of an index set, as read from JSON.
///
/// ```json
/// {"dimension":3,"family":"wlp-ball","p":1.0,"order":7,"weights":[1,1,1]}
/// {"dimension":3,"family":"hyperbolic-cross","order":15}
/// {"family":"explicit-list","indices":[[1,1],[2,1],[1,2]]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IndexSetSpec {
    /// The 1-centered ball `{α : ‖α − 1‖_{w,p} ≤ G}`.
    WlpBall {
        dimension: usize,
        p: Exponent,
        order: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// The hyperbolic cross `{α : Σ_d log(α_d) / w_d ≤ log(G + 1)}`.
    HyperbolicCross {
        dimension: usize,
        order: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    ExplicitList { indices: Vec<Vec<u32>> },
}

impl IndexSetSpec {
    pub fn total_degree(dimension: usize, order: u32) -> Self {
        IndexSetSpec::WlpBall {
            dimension,
            p: Exponent::Finite(1.0),
            order: f64::from(order),
            weights: None,
        }
    }

    pub fn hyperbolic_cross(dimension: usize, order: u32) -> Self {
        IndexSetSpec::HyperbolicCross { dimension, order: f64::from(order), weights: None }
    }

    pub fn explicit(indices: Vec<Vec<u32>>) -> Self {
        IndexSetSpec::ExplicitList { indices }
    }

    pub fn build(&self) -> Result<MultiIndexSet> {
        build_index_set(self)
    }
}

/// Membership rule for a downward-closed family. `admits` is monotone:
/// raising any entry never turns `false` into `true`.
enum Rule {
    /// Unweighted ℓ^1: `Σ (α_d − 1) ≤ G`, in integers.
    L1Unit { order: f64 },
    /// Unweighted ℓ^2: `Σ (α_d − 1)² ≤ G²`, in integers.
    L2Unit { order: f64 },
    /// Unweighted ℓ^∞: `max (α_d − 1) ≤ G`.
    LinfUnit { order: f64 },
    /// Weighted finite p: `Σ ((α_d − 1)/w_d)^p ≤ G^p`.
    Lp { p: f64, order: f64, weights: Vec<f64> },
    /// Weighted ℓ^∞: `max (α_d − 1)/w_d ≤ G`.
    Linf { order: f64, weights: Vec<f64> },
    /// ℓ^0 with G < 1 admits only the all-ones index.
    L0,
    /// Unweighted hyperbolic cross: `Π α_d ≤ G + 1`, in integers.
    HcUnit { order: f64 },
    /// Weighted hyperbolic cross: `Σ ln(α_d)/w_d ≤ ln(G + 1)`.
    Hc { order: f64, weights: Vec<f64> },
}

impl Rule {
    fn admits(&self, alpha: &[u32]) -> bool {
        let shifted = || alpha.iter().map(|&a| f64::from(a - 1));
        match self {
            Rule::L1Unit { order } => shifted().sum::<f64>() <= *order,
            Rule::L2Unit { order } => shifted().map(|s| s * s).sum::<f64>() <= order * order,
            Rule::LinfUnit { order } => shifted().fold(0.0, f64::max) <= *order,
            Rule::Lp { p, order, weights } => {
                let lhs: f64 = shifted().zip(weights).map(|(s, w)| (s / w).powf(*p)).sum();
                lhs <= order.powf(*p)
            }
            Rule::Linf { order, weights } => {
                shifted().zip(weights).map(|(s, w)| s / w).fold(0.0, f64::max) <= *order
            }
            Rule::L0 => alpha.iter().all(|&a| a == 1),
            Rule::HcUnit { order } => {
                let mut prod: u64 = 1;
                for &a in alpha {
                    prod = prod.saturating_mul(u64::from(a));
                }
                (prod as f64) <= order + 1.0
            }
            Rule::Hc { order, weights } => {
                let lhs: f64 = alpha.iter().zip(weights).map(|(&a, w)| f64::from(a).ln() / w).sum();
                lhs <= (order + 1.0).ln()
            }
        }
    }
}

fn check_weights(dimension: usize, weights: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    let w = weights.clone().unwrap_or_else(|| vec![1.0; dimension]);
    if w.len() != dimension {
        return Err(Error::InvalidSpec(format!(
            "expected {dimension} weights, got {}",
            w.len()
        )));
    }
    if w.iter().any(|&x| !(x.is_finite() && x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidSpec(format!("weights must lie in (0, 1], got {w:?}")));
    }
    if !w.contains(&1.0) {
        return Err(Error::InvalidSpec(format!("the largest weight must equal 1, got {w:?}")));
    }
    Ok(w)
}

fn check_order(order: f64) -> Result<()> {
    if !(order.is_finite() && order >= 0.0) {
        return Err(Error::InvalidSpec(format!("order must be finite and >= 0, got {order}")));
    }
    Ok(())
}

/// Depth-first enumeration of `{α : rule.admits(α)}`; relies on monotonicity
/// of the rule to stop each coordinate at its first rejected value.
fn enumerate(dimension: usize, rule: &Rule) -> Result<Vec<MultiIndex>> {
    fn visit(d: usize, alpha: &mut Vec<u32>, rule: &Rule, out: &mut Vec<MultiIndex>) -> Result<()> {
        if d == alpha.len() {
            if out.len() >= MAX_SET_SIZE {
                return Err(Error::InvalidSpec(format!(
                    "index set exceeds {MAX_SET_SIZE} members"
                )));
            }
            out.push(MultiIndex(alpha.clone()));
            return Ok(());
        }
        let mut v = 1;
        loop {
            alpha[d] = v;
            if !rule.admits(alpha) {
                break;
            }
            visit(d + 1, alpha, rule, out)?;
            v += 1;
        }
        alpha[d] = 1;
        Ok(())
    }

    let mut alpha = vec![1u32; dimension];
    let mut out = Vec::new();
    visit(0, &mut alpha, rule, &mut out)?;
    Ok(out)
}

/// Builds the index set described by `spec`.
pub fn build_index_set(spec: &IndexSetSpec) -> Result<MultiIndexSet> {
    match spec {
        IndexSetSpec::ExplicitList { indices } => {
            let members = indices
                .iter()
                .cloned()
                .map(MultiIndex::new)
                .collect::<Result<Vec<_>>>()?;
            let dimension = members
                .first()
                .map(MultiIndex::dimension)
                .ok_or_else(|| Error::InvalidSpec("explicit list is empty".into()))?;
            MultiIndexSet::new(dimension, members)
        }
        IndexSetSpec::WlpBall { dimension, p, order, weights } => {
            let dimension = *dimension;
            if dimension == 0 {
                return Err(Error::InvalidSpec("dimension must be >= 1".into()));
            }
            check_order(*order)?;
            let w = check_weights(dimension, weights)?;
            let unit = w.iter().all(|&x| x == 1.0);
            let rule = match *p {
                Exponent::Zero if *order >= 1.0 => {
                    return Err(Error::InvalidSpec(
                        "the l0 ball of order >= 1 is an infinite set".into(),
                    ))
                }
                Exponent::Zero => Rule::L0,
                Exponent::Infinity if unit => Rule::LinfUnit { order: *order },
                Exponent::Infinity => Rule::Linf { order: *order, weights: w },
                Exponent::Finite(p) if unit && p == 1.0 => Rule::L1Unit { order: *order },
                Exponent::Finite(p) if unit && p == 2.0 => Rule::L2Unit { order: *order },
                Exponent::Finite(p) if p.is_finite() && p > 0.0 => {
                    Rule::Lp { p, order: *order, weights: w }
                }
                Exponent::Finite(p) => {
                    return Err(Error::InvalidSpec(format!("invalid exponent {p}")))
                }
            };
            MultiIndexSet::new(dimension, enumerate(dimension, &rule)?)
        }
        IndexSetSpec::HyperbolicCross { dimension, order, weights } => {
            let dimension = *dimension;
            if dimension == 0 {
                return Err(Error::InvalidSpec("dimension must be >= 1".into()));
            }
            check_order(*order)?;
            let w = check_weights(dimension, weights)?;
            let rule = if w.iter().all(|&x| x == 1.0) {
                Rule::HcUnit { order: *order }
            } else {
                Rule::Hc { order: *order, weights: w }
            };
            MultiIndexSet::new(dimension, enumerate(dimension, &rule)?)
        }
    }
}

/// An ordered, finite set of distinct multi-indices of a common dimension.
#[derive(Clone, Debug)]
pub struct MultiIndexSet {
    dimension: usize,
    indices: Vec<MultiIndex>,
    bounding_box: Vec<u32>,
    positions: HashMap<MultiIndex, usize>,
}

impl PartialEq for MultiIndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.indices == other.indices
    }
}

impl MultiIndexSet {
    /// Validates, sorts into graded-lexicographic order and indexes `members`.
    pub fn new(dimension: usize, mut members: Vec<MultiIndex>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be >= 1".into()));
        }
        if members.is_empty() {
            return Err(Error::InvalidSpec("index set is empty".into()));
        }
        if let Some(bad) = members.iter().find(|m| m.dimension() != dimension) {
            return Err(Error::InvalidSpec(format!(
                "multi-index {bad} does not have dimension {dimension}"
            )));
        }
        members.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec(format!("duplicate multi-index {}", w[0])));
        }
        let mut bounding_box = vec![1u32; dimension];
        for m in &members {
            for (b, &e) in bounding_box.iter_mut().zip(m.entries()) {
                *b = (*b).max(e);
            }
        }
        let positions = members.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Ok(Self { dimension, indices: members, bounding_box, positions })
    }

    pub fn from_entries(entries: &[&[u32]]) -> Result<Self> {
        let members = entries
            .iter()
            .map(|e| MultiIndex::new(e.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let dimension = members.first().map_or(0, MultiIndex::dimension);
        Self::new(dimension, members)
    }

    /// The full box `[N_1] × ⋯ × [N_D]`.
    pub fn full_box(bounds: &[u32]) -> Result<Self> {
        if bounds.contains(&0) {
            return Err(Error::InvalidSpec(format!("box bounds must be >= 1, got {bounds:?}")));
        }
        let shape: Vec<usize> = bounds.iter().map(|&b| b as usize).collect();
        let total: usize = shape.iter().product();
        let members = (0..total)
            .map(|pos| {
                let idx = lexicographic_unrank(&shape, pos);
                MultiIndex(idx.into_iter().map(|i| i as u32 + 1).collect())
            })
            .collect();
        Self::new(bounds.len(), members)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn get(&self, position: usize) -> Option<&MultiIndex> {
        self.indices.get(position)
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.positions.contains_key(alpha)
    }

    /// Componentwise maximum `N_d = max_{α∈J} α_d`.
    pub fn bounding_box(&self) -> &[u32] {
        &self.bounding_box
    }

    /// 0-based position of `alpha` in the set's order.
    pub fn position(&self, alpha: &MultiIndex) -> Result<usize> {
        self.positions
            .get(alpha)
            .copied()
            .ok_or_else(|| Error::NotMember(alpha.entries().to_vec()))
    }

    /// Downward closure, checked through immediate predecessors: for every
    /// member and every `d` with `α_d > 1`, `α − e_d` must be a member.
    pub fn is_monotone_lower(&self) -> bool {
        let mut probe = MultiIndex(vec![0; self.dimension]);
        self.indices.iter().all(|alpha| {
            (0..self.dimension).all(|d| {
                if alpha.0[d] == 1 {
                    return true;
                }
                probe.0.copy_from_slice(&alpha.0);
                probe.0[d] -= 1;
                self.positions.contains_key(&probe)
            })
        })
    }

    /// Searches for dimensionwise relabelings that make the set monotone
    /// lower.
    ///
    /// In each dimension the values taken by `α_d` are relabeled in
    /// decreasing order of how often they occur (ties by original value),
    /// then the result is verified. `None` means the heuristic found no
    /// certifying permutation; it does not prove that none exists.
    pub fn canonicalize_to_lower(&self) -> Option<(DimensionwisePermutation, MultiIndexSet)> {
        if self.is_monotone_lower() {
            return Some((DimensionwisePermutation::identity(&self.bounding_box), self.clone()));
        }
        let maps = (0..self.dimension)
            .map(|d| {
                let n = self.bounding_box[d] as usize;
                let mut counts = vec![0usize; n];
                for alpha in &self.indices {
                    counts[alpha.0[d] as usize - 1] += 1;
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
                let mut map = vec![0u32; n];
                for (new_label, &old) in order.iter().enumerate() {
                    map[old] = new_label as u32 + 1;
                }
                map
            })
            .collect();
        let perm = DimensionwisePermutation { maps };
        let image = perm.apply_set(self).ok()?;
        image.is_monotone_lower().then_some((perm, image))
    }
}

impl<'a> IntoIterator for &'a MultiIndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// One bijection `π_d` of `{1, …, N_d}` per dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionwisePermutation {
    /// `maps[d][v - 1] = π_d(v)`.
    maps: Vec<Vec<u32>>,
}

impl DimensionwisePermutation {
    pub fn new(maps: Vec<Vec<u32>>) -> Result<Self> {
        for (d, map) in maps.iter().enumerate() {
            let mut seen = vec![false; map.len()];
            for &v in map {
                let ok = v >= 1 && (v as usize) <= map.len() && !seen[v as usize - 1];
                if !ok {
                    return Err(Error::InvalidSpec(format!(
                        "map for dimension {d} is not a permutation: {map:?}"
                    )));
                }
                seen[v as usize - 1] = true;
            }
        }
        Ok(Self { maps })
    }

    pub fn identity(bounds: &[u32]) -> Self {
        Self { maps: bounds.iter().map(|&n| (1..=n).collect()).collect() }
    }

    pub fn maps(&self) -> &[Vec<u32>] {
        &self.maps
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.iter().enumerate().all(|(i, &v)| v as usize == i + 1))
    }

    pub fn inverse(&self) -> Self {
        let maps = self
            .maps
            .iter()
            .map(|m| {
                let mut inv = vec![0u32; m.len()];
                for (i, &v) in m.iter().enumerate() {
                    inv[v as usize - 1] = i as u32 + 1;
                }
                inv
            })
            .collect();
        Self { maps }
    }

    pub fn apply(&self, alpha: &MultiIndex) -> Result<MultiIndex> {
        if alpha.dimension() != self.maps.len() {
            return Err(Error::InvalidSpec(format!(
                "multi-index {alpha} does not match permutation dimension {}",
                self.maps.len()
            )));
        }
        alpha
            .entries()
            .iter()
            .zip(&self.maps)
            .map(|(&a, m)| {
                m.get(a as usize - 1)
                    .copied()
                    .ok_or_else(|| Error::NotMember(alpha.entries().to_vec()))
            })
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn apply_set(&self, set: &MultiIndexSet) -> Result<MultiIndexSet> {
        let members = set.iter().map(|a| self.apply(a)).collect::<Result<Vec<_>>>()?;
        MultiIndexSet::new(set.dimension(), members)
    }
}

/// 0-based column of `alpha` in `A^(1) ⊗ ⋯ ⊗ A^(D)` with `N_d = bounds[d]`
/// columns per factor; the last dimension varies fastest.
pub fn lexicographic_column_index(bounds: &[u32], alpha: &MultiIndex) -> Result<usize> {
    if alpha.dimension() != bounds.len()
        || alpha.entries().iter().zip(bounds).any(|(a, b)| a > b)
    {
        return Err(Error::NotMember(alpha.entries().to_vec()));
    }
    Ok(alpha
        .entries()
        .iter()
        .zip(bounds)
        .fold(0usize, |acc, (&a, &b)| acc * b as usize + (a as usize - 1)))
}

/// Row-major position of a 0-based grid index in a box of the given shape.
pub fn lexicographic_position(shape: &[usize], index: &[usize]) -> Result<usize> {
    if index.len() != shape.len() || index.iter().zip(shape).any(|(i, s)| i >= s) {
        return Err(Error::OutOfBounds { index: index.to_vec(), bounds: shape.to_vec() });
    }
    Ok(index.iter().zip(shape).fold(0usize, |acc, (&i, &s)| acc * s + i))
}

/// Inverse of [`lexicographic_position`].
pub fn lexicographic_unrank(shape: &[usize], mut position: usize) -> Vec<usize> {
    let mut index = vec![0; shape.len()];
    for (slot, &s) in index.iter_mut().zip(shape).rev() {
        *slot = position % s;
        position /= s;
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(entries: &[&[u32]]) -> MultiIndexSet {
        MultiIndexSet::from_entries(entries).unwrap()
    }

    #[test]
    fn total_degree_sizes() {
        assert_eq!(IndexSetSpec::total_degree(3, 7).build().unwrap().len(), 120);
        assert_eq!(IndexSetSpec::total_degree(3, 9).build().unwrap().len(), 220);
    }

    #[test]
    fn hyperbolic_cross_sizes() {
        assert_eq!(IndexSetSpec::hyperbolic_cross(3, 15).build().unwrap().len(), 110);
        assert_eq!(IndexSetSpec::hyperbolic_cross(3, 18).build().unwrap().len(), 134);
    }

    #[test]
    fn order_zero_is_single_index() {
        let j = IndexSetSpec::total_degree(2, 0).build().unwrap();
        assert_eq!(j.indices(), &[MultiIndex::ones(2)]);
    }

    #[test]
    fn graded_lex_order() {
        let j = IndexSetSpec::total_degree(2, 2).build().unwrap();
        let got: Vec<Vec<u32>> = j.iter().map(|m| m.entries().to_vec()).collect();
        assert_eq!(
            got,
            vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![1, 3], vec![2, 2], vec![3, 1]]
        );
    }

    #[test]
    fn lower_set_checks() {
        assert!(set(&[&[1, 1], &[2, 1], &[1, 2]]).is_monotone_lower());
        assert!(!set(&[&[1, 1], &[2, 2]]).is_monotone_lower());
    }

    #[test]
    fn bounding_boxes() {
        assert_eq!(set(&[&[1, 1], &[2, 1], &[1, 2]]).bounding_box(), &[2, 2]);
        assert_eq!(set(&[&[1, 1]]).bounding_box(), &[1, 1]);
        let j = IndexSetSpec::total_degree(3, 7).build().unwrap();
        assert_eq!(j.bounding_box(), &[8, 8, 8]);
    }

    #[test]
    fn lexicographic_columns() {
        let b = [2, 2];
        let idx = |e: &[u32]| lexicographic_column_index(&b, &MultiIndex::new(e.to_vec()).unwrap());
        assert_eq!(idx(&[1, 1]).unwrap(), 0);
        assert_eq!(idx(&[1, 2]).unwrap(), 1);
        assert_eq!(idx(&[2, 1]).unwrap(), 2);
        let a = MultiIndex::new(vec![2, 2]).unwrap();
        assert_eq!(lexicographic_column_index(&[2, 3], &a).unwrap(), 4);
        assert!(lexicographic_column_index(&[1, 3], &a).is_err());
    }

    #[test]
    fn position_of_non_member_is_error() {
        let j = set(&[&[1, 1], &[2, 1]]);
        assert_eq!(j.position(&MultiIndex::new(vec![2, 1]).unwrap()).unwrap(), 1);
        assert!(matches!(
            j.position(&MultiIndex::new(vec![1, 2]).unwrap()),
            Err(Error::NotMember(_))
        ));
    }

    #[test]
    fn canonicalize_identity_for_lower_sets() {
        let j = IndexSetSpec::total_degree(3, 3).build().unwrap();
        let (perm, image) = j.canonicalize_to_lower().unwrap();
        assert!(perm.is_identity());
        assert_eq!(image, j);
    }

    #[test]
    fn canonicalize_staircase_example() {
        let j = set(&[
            &[1, 1], &[1, 2], &[1, 3], &[1, 4],
            &[2, 1], &[2, 4],
            &[3, 1], &[3, 2], &[3, 3], &[3, 4],
        ]);
        assert!(!j.is_monotone_lower());
        let (perm, image) = j.canonicalize_to_lower().unwrap();
        assert!(image.is_monotone_lower());
        assert_eq!(perm.inverse().apply_set(&image).unwrap(), j);
        // the permutation quoted alongside this example also certifies it
        let quoted = DimensionwisePermutation::new(vec![vec![1, 3, 2], vec![1, 4, 3, 2]]).unwrap();
        assert!(quoted.apply_set(&j).unwrap().is_monotone_lower());
    }

    #[test]
    fn canonicalize_fails_on_diagonal_pair() {
        assert!(set(&[&[1, 1], &[2, 2]]).canonicalize_to_lower().is_none());
    }

    #[test]
    fn spec_validation() {
        let bad_weights = IndexSetSpec::WlpBall {
            dimension: 2,
            p: Exponent::Finite(1.0),
            order: 3.0,
            weights: Some(vec![0.5, 0.5]),
        };
        assert!(bad_weights.build().is_err());
        let nan_order = IndexSetSpec::HyperbolicCross { dimension: 2, order: f64::NAN, weights: None };
        assert!(nan_order.build().is_err());
        let l0 = IndexSetSpec::WlpBall { dimension: 2, p: Exponent::Zero, order: 1.0, weights: None };
        assert!(l0.build().is_err());
        assert!(MultiIndexSet::from_entries(&[&[1, 1], &[1, 1]]).is_err());
        assert!(MultiIndex::new(vec![0, 1]).is_err());
    }

    #[test]
    fn weighted_ball_is_anisotropic() {
        let spec = IndexSetSpec::WlpBall {
            dimension: 2,
            p: Exponent::Finite(1.0),
            order: 3.0,
            weights: Some(vec![2.0 / 3.0, 1.0]),
        };
        let j = spec.build().unwrap();
        assert!(j.is_monotone_lower());
        // (α_1 − 1)/(2/3) ≤ 3 ⇒ α_1 ≤ 3; α_2 ≤ 4
        assert_eq!(j.bounding_box(), &[3, 4]);
    }

    #[test]
    fn linf_ball_is_a_box() {
        let spec = IndexSetSpec::WlpBall {
            dimension: 2,
            p: Exponent::Infinity,
            order: 2.0,
            weights: None,
        };
        let j = spec.build().unwrap();
        assert_eq!(j, MultiIndexSet::full_box(&[3, 3]).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let spec: IndexSetSpec = serde_json::from_str(
            r#"{"dimension":3,"family":"wlp-ball","p":1.0,"order":7,"weights":[1,1,1]}"#,
        )
        .unwrap();
        assert_eq!(spec.build().unwrap().len(), 120);
        let list: IndexSetSpec =
            serde_json::from_str(r#"{"family":"explicit-list","indices":[[1,1],[2,1]]}"#).unwrap();
        assert_eq!(list.build().unwrap().len(), 2);
        let inf: IndexSetSpec =
            serde_json::from_str(r#"{"dimension":2,"family":"wlp-ball","p":"inf","order":1}"#)
                .unwrap();
        assert_eq!(inf.build().unwrap().len(), 4);
        let unknown = serde_json::from_str::<IndexSetSpec>(
            r#"{"dimension":2,"family":"wlp-ball","p":1,"order":1,"extra":0}"#,
        );
        assert!(unknown.is_err());
    }

    #[test]
    fn unrank_inverts_rank() {
        let shape = [3, 4, 2];
        for pos in 0..24 {
            let idx = lexicographic_unrank(&shape, pos);
            assert_eq!(lexicographic_position(&shape, &idx).unwrap(), pos);
        }
    }
}
