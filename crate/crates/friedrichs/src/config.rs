//! JSON run configurations.
//!
//! Complex numbers are written as `[re, im]` pairs, matrices as row-major
//! nested arrays of such pairs, and matrix polynomials as arrays of
//! coefficient matrices ordered by ascending degree. A minimal
//! configuration for a rank-one model on `(0, 2)` reads:
//!
//! ```json
//! {
//!   "model": {
//!     "interval": [0.0, 2.0],
//!     "a": [[[1.0, 0.0]]],
//!     "b": [[[[0.1, 0.0]]]],
//!     "c": [[[[0.1, 0.0]]]]
//!   },
//!   "contour": { "kind": "semi_ellipse", "depth": 1.0, "sign": -1 }
//! }
//! ```

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{ContourSpec, QuadratureSpec};
use crate::error::{Error, Result};
use crate::model::{FriedrichsModel, Interval, MatrixPolynomial};
use crate::solver::SolverOptions;

type ComplexSpec = [f64; 2];
type MatrixSpec = Vec<Vec<ComplexSpec>>;
type PolySpec = Vec<MatrixSpec>;

/// Pipeline stages selectable in a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Validate the model and report contour admissibility.
    Check,
    /// Solve the right and left operator roots.
    Solve,
    /// Extract and classify resonances.
    Resonances,
    /// Run the full verification battery.
    Verify,
    /// Scan a grid of coupling scales.
    Sweep,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Check => "check",
            Task::Solve => "solve",
            Task::Resonances => "resonances",
            Task::Verify => "verify",
            Task::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Band endpoints `[alpha, beta]`.
    pub interval: [f64; 2],
    /// Hermitian block, row-major complex entries.
    pub a: MatrixSpec,
    /// Coupling `b`, ascending coefficient matrices (`n x m` each).
    pub b: PolySpec,
    /// Coupling `c`, ascending coefficient matrices (`m x n` each).
    pub c: PolySpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourConfig {
    Interval,
    SemiEllipse { depth: f64, sign: i8 },
    Polyline { vertices: Vec<ComplexSpec>, sign: i8 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_panels")]
    pub panels_per_segment: usize,
    #[serde(default = "default_adaptive_tol")]
    pub adaptive_tol: f64,
    #[serde(default = "default_max_nodes")]
    pub max_nodes_per_segment: usize,
}

fn default_order() -> usize {
    64
}
fn default_panels() -> usize {
    4
}
fn default_adaptive_tol() -> f64 {
    1e-10
}
fn default_max_nodes() -> usize {
    1024
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            order: default_order(),
            panels_per_segment: default_panels(),
            adaptive_tol: default_adaptive_tol(),
            max_nodes_per_segment: default_max_nodes(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub force: bool,
}

fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    500
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: default_tol(),
            max_iter: default_max_iter(),
            force: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Multiplicative coupling scales to visit, in order.
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Also emit a membership raster of the enclosed region.
    #[serde(default)]
    pub emit_omega_grid: bool,
    /// Raster resolution per axis.
    #[serde(default = "default_omega_resolution")]
    pub omega_grid_resolution: usize,
}

fn default_omega_resolution() -> usize {
    64
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            emit_omega_grid: false,
            omega_grid_resolution: default_omega_resolution(),
        }
    }
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Check, Task::Solve, Task::Resonances, Task::Verify]
}

/// A complete run description, loadable from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub contour: ContourConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Parse a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn matrix_from_spec(spec: &MatrixSpec, what: &str) -> Result<Array2<Complex64>> {
    let rows = spec.len();
    if rows == 0 {
        return Err(Error::ConfigInvalid(format!("{what} has no rows")));
    }
    let cols = spec[0].len();
    if cols == 0 {
        return Err(Error::ConfigInvalid(format!("{what} has empty rows")));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in spec.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::ConfigInvalid(format!(
                "{what} row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::ConfigInvalid(format!(
                    "{what} contains a non-finite entry"
                )));
            }
            data.push(Complex64::new(re, im));
        }
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::ConfigInvalid(format!("{what}: {e}")))
}

fn poly_from_spec(spec: &PolySpec, what: &str) -> Result<MatrixPolynomial> {
    if spec.is_empty() {
        return Err(Error::ConfigInvalid(format!(
            "{what} needs at least one coefficient matrix"
        )));
    }
    let coefficients = spec
        .iter()
        .enumerate()
        .map(|(k, m)| matrix_from_spec(m, &format!("{what} coefficient {k}")))
        .collect::<Result<Vec<_>>>()?;
    MatrixPolynomial::new(coefficients)
}

impl RunConfig {
    /// Structural validation beyond what serde enforces.
    pub fn validate(&self) -> Result<()> {
        if !(self.quadrature.order >= 2) {
            return Err(Error::ConfigInvalid("quadrature.order must be at least 2".into()));
        }
        if self.quadrature.panels_per_segment == 0 {
            return Err(Error::ConfigInvalid(
                "quadrature.panels_per_segment must be positive".into(),
            ));
        }
        if !(self.quadrature.adaptive_tol > 0.0) || !self.quadrature.adaptive_tol.is_finite() {
            return Err(Error::ConfigInvalid(
                "quadrature.adaptive_tol must be a positive number".into(),
            ));
        }
        if self.quadrature.max_nodes_per_segment
            < self.quadrature.order * self.quadrature.panels_per_segment
        {
            return Err(Error::ConfigInvalid(
                "quadrature.max_nodes_per_segment is below the initial sampling".into(),
            ));
        }
        if !(self.solver.tol > 0.0) || !self.solver.tol.is_finite() {
            return Err(Error::ConfigInvalid("solver.tol must be a positive number".into()));
        }
        if self.solver.max_iter == 0 {
            return Err(Error::ConfigInvalid("solver.max_iter must be positive".into()));
        }
        if self.tasks.is_empty() {
            return Err(Error::ConfigInvalid("tasks must not be empty".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.grid.is_empty() {
                return Err(Error::ConfigInvalid("sweep.grid must not be empty".into()));
            }
            if sweep.grid.iter().any(|g| !g.is_finite()) {
                return Err(Error::ConfigInvalid("sweep.grid entries must be finite".into()));
            }
        }
        if self.tasks.contains(&Task::Sweep) && self.sweep.is_none() {
            return Err(Error::ConfigInvalid(
                "the sweep task needs a sweep.grid".into(),
            ));
        }
        if self.output.emit_omega_grid && self.output.omega_grid_resolution < 2 {
            return Err(Error::ConfigInvalid(
                "output.omega_grid_resolution must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Assemble the domain model.
    pub fn build_model(&self) -> Result<FriedrichsModel> {
        let interval = Interval::new(self.model.interval[0], self.model.interval[1])?;
        let a = matrix_from_spec(&self.model.a, "model.a")?;
        let b = poly_from_spec(&self.model.b, "model.b")?;
        let c = poly_from_spec(&self.model.c, "model.c")?;
        FriedrichsModel::new(interval, a, b, c)
    }

    /// The declarative contour description.
    pub fn contour_spec(&self) -> ContourSpec {
        match &self.contour {
            ContourConfig::Interval => ContourSpec::Interval,
            ContourConfig::SemiEllipse { depth, sign } => ContourSpec::SemiEllipse {
                depth: *depth,
                sign: *sign,
            },
            ContourConfig::Polyline { vertices, sign } => ContourSpec::Polyline {
                vertices: vertices
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect(),
                sign: *sign,
            },
        }
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            order: self.quadrature.order,
            panels_per_segment: self.quadrature.panels_per_segment,
            adaptive_tol: self.quadrature.adaptive_tol,
            max_nodes_per_segment: self.quadrature.max_nodes_per_segment,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            force: self.solver.force,
        }
    }

    /// Requested tasks closed under their prerequisites, in pipeline order.
    pub fn effective_tasks(&self) -> Vec<Task> {
        let mut wanted = [false; 5];
        for task in &self.tasks {
            wanted[*task as usize] = true;
        }
        if wanted[Task::Verify as usize] {
            wanted[Task::Resonances as usize] = true;
        }
        if wanted[Task::Resonances as usize] {
            wanted[Task::Solve as usize] = true;
        }
        // Everything rests on the admissibility check.
        wanted[Task::Check as usize] = true;
        [Task::Check, Task::Solve, Task::Resonances, Task::Verify, Task::Sweep]
            .into_iter()
            .filter(|t| wanted[*t as usize])
            .collect()
    }
}
