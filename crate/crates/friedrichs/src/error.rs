//! Error taxonomy shared by every module of the crate.
//!
//! Variants mirror the ways a computation can fail mathematically
//! (inadmissible data, broken hypotheses, divergent iterations) rather than
//! how it fails mechanically, so callers can react to the *reason*: a
//! `NotContractive` model needs a deeper contour, a `TooCloseToContour`
//! evaluation point needs a finer quadrature, and so on.

use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while validating, solving or verifying.
#[derive(Debug, Error)]
pub enum Error {
    /// `A` must be Hermitian for the band spectrum to be real.
    #[error("matrix A is not Hermitian: max |A - A*| entry {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// Every eigenvalue of `A` must lie strictly inside the open band.
    #[error("eigenvalue {value} of A lies outside the open interval ({alpha}, {beta})")]
    SpectrumNotEmbedded { value: f64, alpha: f64, beta: f64 },

    /// Contour endpoints, orientation, half-plane or regularity are wrong.
    #[error("invalid contour: {0}")]
    InvalidContour(String),

    /// The contraction hypothesis `V_K < d^2/4` failed for this contour.
    #[error("contraction hypothesis failed: V_K = {v_k:.6e} >= d^2/4 = {quarter_d2:.6e}")]
    NotContractive { v_k: f64, quarter_d2: f64 },

    /// The fixed-point iteration ran out of iterations.
    #[error("fixed-point iteration did not converge within {max_iter} iterations (last update {last_update:.3e})")]
    NoConvergence { max_iter: usize, last_update: f64 },

    /// A resolvent `(Z - mu)^{-1}` was numerically singular at a node.
    #[error("resolvent numerically singular at quadrature node {node}")]
    SingularResolvent { node: usize },

    /// A closed form was requested outside its special case.
    #[error("wrong special case: {0}")]
    WrongSpecialCase(String),

    /// No member of a contour family satisfied the admissibility hypotheses.
    #[error("no admissible contour in the supplied family")]
    NoAdmissibleContour,

    /// Evaluation point violates the quadrature distance rule.
    #[error("point {z} too close to the contour: distance {dist:.3e} < required {min_dist:.3e}")]
    TooCloseToContour { z: Complex64, dist: f64, min_dist: f64 },

    /// Continuation formulas only hold strictly between interval and contour.
    #[error("point {z} is not strictly inside the region enclosed by interval and contour")]
    NotInOmega { z: Complex64 },

    /// Argument-principle count and refined zero list disagree.
    #[error("argument-principle count {counted} does not match {refined} refined zeros")]
    CountMismatch { counted: usize, refined: usize },

    /// A zero of the determinant sits on (or hugs) a counting-box edge.
    #[error("determinant vanishes on the search-box boundary near {z}; shrink or shift the box")]
    BoundaryZero { z: Complex64 },

    /// Sampled inputs came from different contours or samplings.
    #[error("inputs were sampled from different contours")]
    ContourMismatch,

    /// `I - Q` cannot be certified invertible by the Neumann bound.
    #[error("I - Q is not certified invertible: enorm(x) * enorm(y) = {product:.6e} >= 1")]
    NotContraction { product: f64 },

    /// Matrix dimensions of model pieces do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A run configuration failed structural validation.
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    /// Filesystem trouble while reading configs or writing reports.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the command-line tool maps this error to.
    ///
    /// * `2` — the input itself is unusable (config, model, contour, I/O),
    /// * `3` — input is well-formed but a certified hypothesis or check fails,
    /// * `4` — the iteration gave up before reaching the tolerance.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid(_)
            | Error::ShapeMismatch(_)
            | Error::Io(_)
            | Error::NotHermitian { .. }
            | Error::SpectrumNotEmbedded { .. }
            | Error::InvalidContour(_) => 2,
            Error::NoConvergence { .. } => 4,
            _ => 3,
        }
    }
}
