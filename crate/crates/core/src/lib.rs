//! Exact leverage-score row sampling for least-squares problems whose design
//! matrix is a lower-set column subset of a Kronecker product.
//!
//! The pipeline: build a [`MultiIndexSet`], a grid per dimension and the
//! [`KroneckerFactors`]; pick a [`Sampler`]; draw a [`Sketch`]; assemble and
//! solve the small system; score it with [`full_relative_error`].
//!
//! ```
//! use std::sync::Arc;
//! use kronlev::{gauss_legendre, BasisKind, IndexSetSpec, KroneckerFactors, RngState,
//!               Sampler, SamplerMethod, draw_sketch, assemble, solve, full_relative_error};
//!
//! let set = IndexSetSpec::total_degree(2, 3).build()?;
//! let grids = vec![gauss_legendre(10)?; 2];
//! let factors = KroneckerFactors::new(&grids, BasisKind::LegendreOrthonormal, set.bounding_box())?;
//! let (set, factors) = (Arc::new(set), Arc::new(factors));
//!
//! let sampler = Sampler::new(SamplerMethod::LeverageLower, factors.clone(), set.clone())?;
//! let sketch = draw_sketch(&sampler, 40, RngState::new(1, 0))?;
//! let target = |y: &[f64]| (y[0] - 0.5 * y[1]).exp();
//! let sol = solve(&assemble(&set, &factors, &sketch, &target)?)?;
//! let err = full_relative_error(&set, &factors, &sol.x, &target)?;
//! assert!(err < 1e-2);
//! # Ok::<(), kronlev::Error>(())
//! ```

pub mod alias;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod factor;
pub mod grid;
pub mod indexset;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod sketch;

pub use alias::AliasTable;
pub use error::{Error, Result};
pub use factor::{build_factor, factor_qr, leverage_table, DimensionFactor, KroneckerFactors};
pub use grid::{eval_basis, gauss_legendre, BasisKind, BasisSpec, Grid1D, GridSpec};
pub use indexset::{
    build_index_set, lexicographic_column_index, DimensionwisePermutation, Exponent,
    IndexSetSpec, MultiIndex, MultiIndexSet,
};
pub use rng::RngState;
pub use sampler::{grid_point, mu_mass, GridPoint, Sampler, SamplerMethod};
pub use sketch::{
    assemble, draw_sketch, full_relative_error, optimal_relative_error, sample_size, solve,
    truncate, SampleSizeBound, Sketch, SketchedSystem, Solution, Tabulated, TargetFunction,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/index-sets.md")]
    mod index_sets {}
    #[doc = include_str!("../../../book/src/grids-and-factors.md")]
    mod grids_and_factors {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/sketch-and-solve.md")]
    mod sketch_and_solve {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
