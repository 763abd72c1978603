//! The matrix Friedrichs model: a Hermitian block `A` coupled to a
//! multiplication branch on a band `(alpha, beta)`.
//!
//! The model is the 2x2 block operator
//!
//! ```text
//!     L = [ A            <. , b(.)> ]      on  C^n (+) L^2((alpha,beta), C^m),
//!         [ c(.)         mu .       ]
//! ```
//!
//! where the couplings `b(lambda)` (n x m) and `c(lambda)` (m x n) are matrix
//! polynomials in the band variable. Analytic continuation through the band
//! is driven entirely by the kernel `K'(lambda) = b(lambda) c(lambda)` and its
//! primitive `K(mu) = \int_alpha^mu K'(lambda) dlambda`, both of which extend
//! to entire functions because the couplings are polynomial.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh_ascending, max_abs_entry, spectral_norm};
use crate::quadrature::gauss_legendre;

/// Open spectral band `(alpha, beta)` of the multiplication branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub alpha: f64,
    pub beta: f64,
}

impl Interval {
    /// A validated open interval with `alpha < beta`, both finite.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha >= beta {
            return Err(Error::ConfigInvalid(format!(
                "interval endpoints must be finite with alpha < beta, got ({alpha}, {beta})"
            )));
        }
        Ok(Interval { alpha, beta })
    }

    pub fn width(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.alpha + self.beta)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.alpha < x && x < self.beta
    }
}

/// Matrix polynomial `P(lambda) = sum_k coeff[k] lambda^k` with fixed shape.
#[derive(Debug, Clone)]
pub struct MatrixPolynomial {
    coefficients: Vec<Array2<Complex64>>,
}

impl MatrixPolynomial {
    /// Build from coefficient matrices ordered by ascending degree.
    pub fn new(coefficients: Vec<Array2<Complex64>>) -> Result<Self> {
        let first = coefficients
            .first()
            .ok_or_else(|| Error::ShapeMismatch("polynomial needs at least one coefficient".into()))?;
        let shape = first.dim();
        for (k, coeff) in coefficients.iter().enumerate() {
            if coeff.dim() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient {k} has shape {:?}, expected {:?}",
                    coeff.dim(),
                    shape
                )));
            }
            if !coeff.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient {k} contains a non-finite entry"
                )));
            }
        }
        Ok(MatrixPolynomial { coefficients })
    }

    /// The zero polynomial of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        MatrixPolynomial {
            coefficients: vec![Array2::zeros((rows, cols))],
        }
    }

    pub fn rows(&self) -> usize {
        self.coefficients[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.coefficients[0].ncols()
    }

    /// Degree of the stored representation (trailing zeros not trimmed).
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Array2<Complex64>] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients
            .iter()
            .all(|c| c.iter().all(|v| v.re == 0.0 && v.im == 0.0))
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, lambda: Complex64) -> Array2<Complex64> {
        let mut acc = self.coefficients[self.coefficients.len() - 1].clone();
        for k in (0..self.coefficients.len() - 1).rev() {
            acc = acc.mapv(|v| v * lambda) + &self.coefficients[k];
        }
        acc
    }

    /// Same polynomial with every coefficient multiplied by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        MatrixPolynomial {
            coefficients: self
                .coefficients
                .iter()
                .map(|c| c.mapv(|v| v * factor))
                .collect(),
        }
    }
}

/// Integration path from `alpha` to the evaluation point of `K`.
#[derive(Debug, Clone, Default)]
pub enum KPath {
    /// Straight segment from `alpha` to the target.
    #[default]
    Straight,
    /// Piecewise-linear path through the listed intermediate points.
    Waypoints(Vec<Complex64>),
}

/// Validation summary for a model.
#[derive(Debug, Clone)]
pub struct ModelValidation {
    /// Eigenvalues of `A` in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Largest entry of `|A - A*|`.
    pub hermiticity_defect: f64,
}

/// A finite-dimensional Friedrichs model: band, Hermitian block and couplings.
#[derive(Debug, Clone)]
pub struct FriedrichsModel {
    interval: Interval,
    a_matrix: Array2<Complex64>,
    b_poly: MatrixPolynomial,
    c_poly: MatrixPolynomial,
}

impl FriedrichsModel {
    /// Assemble a model, checking that all shapes are mutually consistent:
    /// `A` is `n x n`, `b` is `n x m` and `c` is `m x n`.
    pub fn new(
        interval: Interval,
        a_matrix: Array2<Complex64>,
        b_poly: MatrixPolynomial,
        c_poly: MatrixPolynomial,
    ) -> Result<Self> {
        let n = a_matrix.nrows();
        if a_matrix.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "A must be square, got {} x {}",
                a_matrix.nrows(),
                a_matrix.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::ShapeMismatch("A must have positive dimension".into()));
        }
        if b_poly.rows() != n || c_poly.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "couplings must map C^{n}: b is {} x {}, c is {} x {}",
                b_poly.rows(),
                b_poly.cols(),
                c_poly.rows(),
                c_poly.cols()
            )));
        }
        if b_poly.cols() != c_poly.rows() {
            return Err(Error::ShapeMismatch(format!(
                "multiplicities disagree: b has {} columns, c has {} rows",
                b_poly.cols(),
                c_poly.rows()
            )));
        }
        if !a_matrix.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::ShapeMismatch("A contains a non-finite entry".into()));
        }
        Ok(FriedrichsModel {
            interval,
            a_matrix,
            b_poly,
            c_poly,
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn a_matrix(&self) -> &Array2<Complex64> {
        &self.a_matrix
    }

    pub fn b_poly(&self) -> &MatrixPolynomial {
        &self.b_poly
    }

    pub fn c_poly(&self) -> &MatrixPolynomial {
        &self.c_poly
    }

    /// Dimension of the reduced block.
    pub fn n(&self) -> usize {
        self.a_matrix.nrows()
    }

    /// Multiplicity of the band.
    pub fn m(&self) -> usize {
        self.b_poly.cols()
    }

    /// Model with both couplings scaled by `g`; `A` and the band are shared.
    pub fn with_coupling_scale(&self, g: f64) -> FriedrichsModel {
        FriedrichsModel {
            interval: self.interval,
            a_matrix: self.a_matrix.clone(),
            b_poly: self.b_poly.scaled(g),
            c_poly: self.c_poly.scaled(g),
        }
    }

    /// Check Hermiticity of `A` and strict embedding of its spectrum in the
    /// open band. Both properties are what later stages lean on: real
    /// eigenvalues give a meaningful distance to the contour, and embedding
    /// guarantees the deformed region actually surrounds the spectrum.
    pub fn validate(&self) -> Result<ModelValidation> {
        let adjoint = self.a_matrix.t().mapv(|v| v.conj());
        let defect = max_abs_entry(&(&self.a_matrix - &adjoint));
        let tol = 1e-13 * (1.0 + spectral_norm(&self.a_matrix));
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        // Symmetrize before the Hermitian eigensolve so the defect, however
        // tiny, cannot leak into the reported eigenvalues.
        let sym = (&self.a_matrix + &adjoint).mapv(|v| 0.5 * v);
        let eigenvalues = eigh_ascending(&sym)?;
        for &value in &eigenvalues {
            if !self.interval.contains(value) {
                return Err(Error::SpectrumNotEmbedded {
                    value,
                    alpha: self.interval.alpha,
                    beta: self.interval.beta,
                });
            }
        }
        Ok(ModelValidation {
            eigenvalues,
            hermiticity_defect: defect,
        })
    }

    /// Couplings `(b(lambda), c(lambda))` at a complex point.
    pub fn eval_couplings(&self, lambda: Complex64) -> (Array2<Complex64>, Array2<Complex64>) {
        (self.b_poly.eval(lambda), self.c_poly.eval(lambda))
    }

    /// Kernel derivative `K'(lambda) = b(lambda) c(lambda)`, an `n x n`
    /// polynomial matrix of rank at most `m`.
    pub fn eval_k_prime(&self, lambda: Complex64) -> Array2<Complex64> {
        self.b_poly.eval(lambda).dot(&self.c_poly.eval(lambda))
    }

    /// Primitive `K(mu) = \int_alpha^mu K'(lambda) dlambda` along `path`.
    ///
    /// `K'` is entire, so the value is path independent; offering explicit
    /// waypoints lets callers demonstrate exactly that.
    pub fn eval_k(&self, mu: Complex64, path: &KPath) -> Array2<Complex64> {
        let alpha = Complex64::new(self.interval.alpha, 0.0);
        let mut legs: Vec<(Complex64, Complex64)> = Vec::new();
        match path {
            KPath::Straight => legs.push((alpha, mu)),
            KPath::Waypoints(points) => {
                let mut prev = alpha;
                for &p in points {
                    legs.push((prev, p));
                    prev = p;
                }
                legs.push((prev, mu));
            }
        }
        // Order 32 integrates polynomial kernels up to degree 63 exactly.
        let (nodes, weights) = gauss_legendre(32);
        let n = self.n();
        let mut total: Array2<Complex64> = Array2::zeros((n, n));
        for (z0, z1) in legs {
            let center = 0.5 * (z0 + z1);
            let half = 0.5 * (z1 - z0);
            for (&t, &w) in nodes.iter().zip(&weights) {
                let lambda = center + half * t;
                let kp = self.eval_k_prime(lambda);
                total = total + kp.mapv(|v| v * (half * w));
            }
        }
        total
    }
}
