#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use kronlev::{
    gauss_legendre, BasisKind, IndexSetSpec, KroneckerFactors, MultiIndexSet,
};

pub fn packaged(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

/// Factors on `m`-point Gauss–Legendre grids sized to the bounding box of `set`.
pub fn factors(set: &MultiIndexSet, m: usize, kind: BasisKind) -> Arc<KroneckerFactors> {
    let grids = vec![gauss_legendre(m).unwrap(); set.dimension()];
    Arc::new(KroneckerFactors::new(&grids, kind, set.bounding_box()).unwrap())
}

/// D = 2, five Gauss–Legendre nodes per axis, monomials, total degree 2.
pub fn small_instance() -> (Arc<MultiIndexSet>, Arc<KroneckerFactors>) {
    let set = IndexSetSpec::total_degree(2, 2).build().unwrap();
    let f = factors(&set, 5, BasisKind::Monomial);
    (Arc::new(set), f)
}

/// A smooth target outside every polynomial space.
pub fn smooth_target(y: &[f64]) -> f64 {
    (0.7 * y[0]).exp() * (2.0 * y[1] + 0.3).sin() + 1.0 / (2.0 + y[0] * y[1])
}
