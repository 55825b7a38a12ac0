//! Lower bounds for the conformal Laplacian spectrum and the Yamabe invariant
//! of a closed manifold from curvature, diameter and volume data.
//!
//! The pipeline: a summary of `(M, g)` ([`ManifoldSummary`]) picks a
//! comparison constant ([`bbg`]), which scales a step potential on the model
//! sphere ([`potential`]). The linear and nonlinear least eigenvalues of that
//! potential ([`spectral`], [`yamabe`]) then give the bounds ([`bounds`]).
//! [`rearrange`] and [`suites`] check the inequalities the comparison rests
//! on.

// `!(x > 0.0)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bbg;
pub mod bounds;
pub mod error;
pub mod potential;
pub mod quadrature;
pub mod rearrange;
pub mod spectral;
pub mod spheregeom;
pub mod suites;
pub mod yamabe;

pub use bbg::{bbg_constant, best_hypothesis, BbgConstant, Hypothesis};
pub use bounds::{
    bounds_report, catalog, catalog_entry, corollary_bounds, lambda_lower_bound, lambda_sphere, mu1_lower_bound,
    rigidity_test, BoundsOptions, BoundsReport, CatalogEntry, CorollaryBounds, Rigidity,
};
pub use error::{Error, Result};
pub use potential::{
    build_potential, ManifoldSummary, PotentialRecord, ScalarCurvatureStats, StepPotential, SummaryRecord,
};
pub use rearrange::{MeasuredFunction, StepProfile};
pub use spectral::{least_eigenvalue, radial_spectrum, RadialGrid, SpectralResult};
pub use spheregeom::{Dim, Radius};
pub use suites::{run_suite, Suite, SuiteReport};
pub use yamabe::{minimize_quotient, StartKind, YamabeOptions, YamabeResult};
