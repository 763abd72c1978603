//! Friedrichs-model resonance solver.
//!
//! This crate computes resonances of finite-dimensional Friedrichs models:
//! block operators with a discrete Hermitian part `A` coupled to a
//! multiplication band `(alpha, beta)` through polynomial couplings `b` and
//! `c`. The Schur complement of the band is continued across it along a
//! deformed contour, and the continued complement is factored through an
//! operator root `Z` obtained from a certified contraction iteration. The
//! eigenvalues of `Z` inside the region enclosed by the contour and the
//! band are the resonances; everything else the crate produces exists to
//! verify that claim numerically:
//!
//! - admissibility of a contour for a model, with explicit contraction
//!   data ([`contour::admissibility`]),
//! - the fixed-point solve with an a-posteriori certificate
//!   ([`solver::solve_operator_root`]),
//! - sampled Riccati solutions and their energy-norm bounds,
//! - the factorization `M(z) = W(z)(Z - z)` and its mirrored form
//!   ([`schur::verify_factorization`]),
//! - the continuation jump across the band ([`schur::continuation_jump`]),
//! - an argument-principle determinant oracle ([`schur::det_zero_oracle`]),
//! - block diagonalization of the discretized operator
//!   ([`blockdiag::verify_diagonalization`]),
//! - contour independence of roots and resonances
//!   ([`blockdiag::contour_independence`]).
//!
//! The [`pipeline`] module ties these together behind a JSON
//! configuration; the `friedrichs` binary is a thin CLI over it.

pub mod blockdiag;
pub mod config;
pub mod contour;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod schur;
pub mod solver;

pub use config::{parse_config, RunConfig, Task};
pub use contour::{
    admissibility, build_contour, sample_adaptive, sample_contour, AdmissibilityReport, Contour,
    ContourSpec, QuadratureSpec, SampledContour,
};
pub use error::{Error, Result};
pub use model::{FriedrichsModel, Interval, MatrixPolynomial};
pub use pipeline::{run_pipeline, PipelineOutcome};
pub use report::RunReport;
pub use schur::{det_zero_oracle, resonances, schur_complement, SearchBox};
pub use solver::{solve_operator_root, OperatorRoot, Side, SolverOptions};
