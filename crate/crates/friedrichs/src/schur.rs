//! The analytically continued Schur complement and everything verified
//! through it: the sheet jump, the Wiener–Hopf-style factorization through
//! the operator roots, resonance extraction and an independent
//! argument-principle zero counter.
//!
//! On a deformed contour the continued complement is
//!
//! ```text
//!     M(z, Gamma) = A - z - \int_Gamma K'(mu) (mu - z)^{-1} dmu,
//! ```
//!
//! an analytic family on the complement of `Gamma`. Its values on the far
//! side of the band differ from the physical complement by the residue term
//! `2 pi i sign K'(z)`, and inside the admissible ball it factors as
//! `M(z) = W(z) (Z - z)` (right) and `M(z) = (Ztilde - z) Wtilde(z)` (left),
//! which moves all its zeros into the spectrum of the operator roots.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contour::{region_membership, Contour, Membership, SampledContour};
use crate::error::{Error, Result};
use crate::linalg::{det, eig_sorted, eye, inv_checked, spectral_norm};
use crate::model::FriedrichsModel;
use crate::solver::{node_data, NodeData, OperatorRoot, Side};

/// Seed of the deterministic interior sample generator.
const GRID_SEED: u64 = 0x5eed_0001_f00d_cafe;

/// Continued Schur complement `M(z, Gamma)` at a point off the contour.
pub fn schur_complement(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    z: Complex64,
) -> Result<Array2<Complex64>> {
    sampled.check_eval_distance(z)?;
    let data = node_data(model, sampled);
    Ok(schur_from_data(model, sampled, &data, z))
}

fn schur_from_data(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    data: &NodeData,
    z: Complex64,
) -> Array2<Complex64> {
    let n = model.n();
    let mut m = model.a_matrix().clone();
    for i in 0..n {
        m[(i, i)] -= z;
    }
    for (j, (&mu, &w)) in sampled.nodes.iter().zip(&sampled.weights).enumerate() {
        let factor = w / (mu - z);
        m = m - data.k_prime[j].mapv(|v| v * factor);
    }
    m
}

fn schur_derivative_from_data(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    data: &NodeData,
    z: Complex64,
) -> Array2<Complex64> {
    let n = model.n();
    let mut m = eye(n).mapv(|v| -v);
    for (j, (&mu, &w)) in sampled.nodes.iter().zip(&sampled.weights).enumerate() {
        let denom = mu - z;
        let factor = w / (denom * denom);
        m = m - data.k_prime[j].mapv(|v| v * factor);
    }
    m
}

/// Outcome of a sheet-jump check at one interior point.
#[derive(Debug, Clone)]
pub struct JumpCheck {
    pub z: Complex64,
    /// `M(z, Gamma) - M(z, interval)`.
    pub observed: Array2<Complex64>,
    /// `2 pi i sign K'(z)`.
    pub expected: Array2<Complex64>,
    pub residual: f64,
    pub pass: bool,
}

/// Compare the continuation jump across the band at a point strictly inside
/// the enclosed region against the residue formula.
pub fn continuation_jump(
    model: &FriedrichsModel,
    sampled_interval: &SampledContour,
    sampled_gamma: &SampledContour,
    z: Complex64,
) -> Result<JumpCheck> {
    if sampled_interval.sign() != 0
        || !sampled_gamma.contour.is_deformed()
        || sampled_interval.interval() != sampled_gamma.interval()
    {
        return Err(Error::ContourMismatch);
    }
    if region_membership(&sampled_gamma.contour, z) != Membership::Inside {
        return Err(Error::NotInOmega { z });
    }
    let continued = schur_complement(model, sampled_gamma, z)?;
    let physical = schur_complement(model, sampled_interval, z)?;
    let observed = continued - physical;
    let sign = sampled_gamma.sign() as f64;
    let factor = Complex64::new(0.0, 2.0 * std::f64::consts::PI * sign);
    let expected = model.eval_k_prime(z).mapv(|v| v * factor);
    let residual = spectral_norm(&(&observed - &expected));
    Ok(JumpCheck {
        z,
        observed,
        expected,
        residual,
        pass: residual <= 1e-8,
    })
}

/// Evaluate the regular factor of the factorization through a root.
///
/// For a right root, `W(z) = I - \int_Gamma K'(mu) (mu-z)^{-1} (Z-mu)^{-1} dmu`
/// and `M(z) = W(z) (Z - z)`; for a left root the mirrored factor satisfies
/// `M(z) = (Z - z) Wtilde(z)` with the resolvent on the left under the
/// integral. The root may come from a different sampling of the *same*
/// contour, which is what makes quadrature refinement studies possible.
pub fn factor_w(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    root: &OperatorRoot,
    z: Complex64,
    side: Side,
) -> Result<Array2<Complex64>> {
    if root.side != side {
        return Err(Error::WrongSpecialCase(format!(
            "factor side {side:?} needs a root of the same side"
        )));
    }
    if root.geometry_hash != sampled.contour.geometry_hash() {
        return Err(Error::ContourMismatch);
    }
    sampled.check_eval_distance(z)?;
    let data = node_data(model, sampled);
    let n = model.n();
    let mut w_matrix = eye(n);
    for (j, (&mu, &w)) in sampled.nodes.iter().zip(&sampled.weights).enumerate() {
        let mut shifted = root.z_matrix.clone();
        for i in 0..n {
            shifted[(i, i)] -= mu;
        }
        let resolvent = inv_checked(&shifted, j)?;
        let factor = w / (mu - z);
        let term = match side {
            Side::Right => data.k_prime[j].dot(&resolvent),
            Side::Left => resolvent.dot(&data.k_prime[j]),
        };
        w_matrix = w_matrix - term.mapv(|v| v * factor);
    }
    Ok(w_matrix)
}

/// Factorization quality over a grid of evaluation points.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    /// `max_z || M(z) - W(z)(Z - z) ||` over the grid.
    pub max_residual_right: f64,
    /// `max_z || M(z) - (Z - z) Wtilde(z) ||` over the grid.
    pub max_residual_left: f64,
    /// Largest `||W^{-1}||` over grid points within `d/2` of `sigma(A)`.
    pub w_inv_max: f64,
    /// Neumann bound `1 / (1 - V_K / (d^2/4))` valid on those points.
    pub w_inv_bound: f64,
    /// Number of grid points evaluated.
    pub points_checked: usize,
    /// How many of them were close enough to `sigma(A)` for the `W^{-1}`
    /// bound to apply.
    pub w_inv_points: usize,
}

/// Check both factorizations of the continued complement over a grid.
pub fn verify_factorization(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    right: &OperatorRoot,
    left: &OperatorRoot,
    z_grid: &[Complex64],
) -> Result<FactorizationReport> {
    if right.side != Side::Right || left.side != Side::Left {
        return Err(Error::WrongSpecialCase(
            "verify_factorization expects a (right, left) root pair".into(),
        ));
    }
    let validation = model.validate()?;
    let adm = crate::contour::admissibility(model, sampled)?;
    let data = node_data(model, sampled);
    let n = model.n();
    let mut max_right = 0.0f64;
    let mut max_left = 0.0f64;
    let mut w_inv_max = 0.0f64;
    let mut w_inv_points = 0usize;
    for &z in z_grid {
        let m = schur_from_data(model, sampled, &data, z);
        let w = factor_w(model, sampled, right, z, Side::Right)?;
        let mut z_minus = right.z_matrix.clone();
        for i in 0..n {
            z_minus[(i, i)] -= z;
        }
        max_right = max_right.max(spectral_norm(&(&m - &w.dot(&z_minus))));
        let wt = factor_w(model, sampled, left, z, Side::Left)?;
        let mut zt_minus = left.z_matrix.clone();
        for i in 0..n {
            zt_minus[(i, i)] -= z;
        }
        max_left = max_left.max(spectral_norm(&(&m - &zt_minus.dot(&wt))));
        let dist_to_spectrum = validation
            .eigenvalues
            .iter()
            .map(|&e| (z - Complex64::new(e, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        if adm.pass_vk && dist_to_spectrum <= 0.5 * adm.d + 1e-12 {
            w_inv_points += 1;
            w_inv_max = w_inv_max.max(spectral_norm(&inv_checked(&w, 0)?));
        }
    }
    let w_inv_bound = if adm.pass_vk {
        1.0 / (1.0 - adm.v_k / (0.25 * adm.d * adm.d))
    } else {
        f64::INFINITY
    };
    Ok(FactorizationReport {
        max_residual_right: max_right,
        max_residual_left: max_left,
        w_inv_max,
        w_inv_bound,
        points_checked: z_grid.len(),
        w_inv_points,
    })
}

/// Deterministic evaluation grid: 32 points on a circle of radius `d/2`
/// around each eigenvalue of `A`, plus 16 seeded pseudo-random points
/// strictly inside the enclosed region, all filtered by the quadrature
/// distance rule.
pub fn default_z_grid(
    model: &FriedrichsModel,
    sampled: &SampledContour,
) -> Result<Vec<Complex64>> {
    if !sampled.contour.is_deformed() {
        return Err(Error::InvalidContour(
            "the default grid needs a deformed contour".into(),
        ));
    }
    let validation = model.validate()?;
    let adm = crate::contour::admissibility(model, sampled)?;
    let mut grid = Vec::new();
    for &e in &validation.eigenvalues {
        let center = Complex64::new(e, 0.0);
        for k in 0..32 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
            let z = center + Complex64::new(0.5 * adm.d * theta.cos(), 0.5 * adm.d * theta.sin());
            if sampled.check_eval_distance(z).is_ok() {
                grid.push(z);
            }
        }
    }
    let interval = sampled.interval();
    let depth = sampled
        .nodes
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let sign = sampled.sign() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < 16 && attempts < 100_000 {
        attempts += 1;
        let re = interval.alpha + rng.gen::<f64>() * interval.width();
        let im = sign * rng.gen::<f64>() * depth;
        let z = Complex64::new(re, im);
        if sampled.check_eval_distance(z).is_err() {
            continue;
        }
        if region_membership(&sampled.contour, z) != Membership::Inside {
            continue;
        }
        grid.push(z);
        accepted += 1;
    }
    Ok(grid)
}

/// Deterministic 4x4 grid of interior points for jump checks, spread over
/// the middle of the band and scaled to the contour depth, filtered by the
/// distance rules of both samplings.
pub fn default_jump_grid(
    sampled_interval: &SampledContour,
    sampled_gamma: &SampledContour,
) -> Vec<Complex64> {
    let interval = sampled_gamma.interval();
    let depth = sampled_gamma
        .nodes
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let sign = sampled_gamma.sign() as f64;
    let mut grid = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let re = interval.alpha + interval.width() * (0.3 + 0.4 * i as f64 / 3.0);
            let im = sign * depth * (0.15 + 0.45 * j as f64 / 3.0);
            let z = Complex64::new(re, im);
            if sampled_gamma.check_eval_distance(z).is_err()
                || sampled_interval.check_eval_distance(z).is_err()
            {
                continue;
            }
            if region_membership(&sampled_gamma.contour, z) != Membership::Inside {
                continue;
            }
            grid.push(z);
        }
    }
    grid
}

/// How an eigenvalue of a root relates to the enclosed region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Strictly inside: a genuine second-sheet resonance.
    Resonance,
    /// Within the boundary band of contour or interval.
    Boundary,
    /// Outside; an artifact of the particular contour, not a resonance.
    Exterior,
}

/// One eigenvalue of a root together with its classification.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceEntry {
    pub value: Complex64,
    pub classification: Classification,
}

/// All eigenvalues of a root, classified against its contour.
#[derive(Debug, Clone)]
pub struct ResonanceSet {
    pub entries: Vec<ResonanceEntry>,
    pub sign: i8,
}

impl ResonanceSet {
    /// Values classified as genuine resonances.
    pub fn resonances(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .filter(|e| e.classification == Classification::Resonance)
            .map(|e| e.value)
            .collect()
    }
}

/// Extract and classify the eigenvalues of an operator root.
pub fn resonances(root: &OperatorRoot, contour: &Contour) -> Result<ResonanceSet> {
    if root.geometry_hash != contour.geometry_hash() {
        return Err(Error::ContourMismatch);
    }
    let values = eig_sorted(&root.z_matrix)?;
    let entries = values
        .into_iter()
        .map(|value| {
            let classification = match region_membership(contour, value) {
                Membership::Inside => Classification::Resonance,
                Membership::Boundary => Classification::Boundary,
                Membership::Outside => Classification::Exterior,
            };
            ResonanceEntry {
                value,
                classification,
            }
        })
        .collect();
    Ok(ResonanceSet {
        entries,
        sign: root.sign,
    })
}

/// Axis-aligned rectangle for argument-principle zero counting.
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min.is_finite() && re_max.is_finite() && im_min.is_finite() && im_max.is_finite())
            || re_min >= re_max
            || im_min >= im_max
        {
            return Err(Error::ConfigInvalid(format!(
                "search box must be a nonempty finite rectangle, got [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(SearchBox {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn split(&self, frac: f64) -> (SearchBox, SearchBox) {
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let cut = self.re_min + frac * (self.re_max - self.re_min);
            (
                SearchBox { re_max: cut, ..*self },
                SearchBox { re_min: cut, ..*self },
            )
        } else {
            let cut = self.im_min + frac * (self.im_max - self.im_min);
            (
                SearchBox { im_max: cut, ..*self },
                SearchBox { im_min: cut, ..*self },
            )
        }
    }

    fn contains_with_margin(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin
            && z.re <= self.re_max + margin
            && z.im >= self.im_min - margin
            && z.im <= self.im_max + margin
    }
}

struct DetOracle<'a> {
    model: &'a FriedrichsModel,
    sampled: &'a SampledContour,
    data: NodeData,
    /// Reference determinant magnitude used for the boundary-zero guard.
    typical: f64,
}

impl<'a> DetOracle<'a> {
    fn det_at(&self, z: Complex64) -> Result<Complex64> {
        self.sampled.check_eval_distance(z)?;
        det(&schur_from_data(self.model, self.sampled, &self.data, z))
    }

    fn edge_phase(
        &self,
        z0: Complex64,
        z1: Complex64,
        f0: Complex64,
        f1: Complex64,
        depth: usize,
    ) -> Result<f64> {
        let guard = 1e-13 * self.typical;
        if f0.norm() < guard || f1.norm() < guard {
            return Err(Error::BoundaryZero { z: 0.5 * (z0 + z1) });
        }
        let dphi = (f1 / f0).arg();
        if dphi.abs() <= std::f64::consts::FRAC_PI_2 {
            return Ok(dphi);
        }
        if depth == 0 {
            return Err(Error::BoundaryZero { z: 0.5 * (z0 + z1) });
        }
        let zm = 0.5 * (z0 + z1);
        let fm = self.det_at(zm)?;
        Ok(self.edge_phase(z0, zm, f0, fm, depth - 1)?
            + self.edge_phase(zm, z1, fm, f1, depth - 1)?)
    }

    /// Winding number of the determinant around the box boundary.
    fn box_count(&self, bx: &SearchBox) -> Result<usize> {
        let corners = bx.corners();
        let mut total = 0.0f64;
        for e in 0..4 {
            let z0 = corners[e];
            let z1 = corners[(e + 1) % 4];
            // Sixteen initial panels per edge; each refines on demand.
            let mut prev_z = z0;
            let mut prev_f = self.det_at(prev_z)?;
            for k in 1..=16 {
                let zk = z0 + (z1 - z0) * (k as f64 / 16.0);
                let fk = self.det_at(zk)?;
                total += self.edge_phase(prev_z, zk, prev_f, fk, 40)?;
                prev_z = zk;
                prev_f = fk;
            }
        }
        let winding = total / (2.0 * std::f64::consts::PI);
        let rounded = winding.round();
        if (winding - rounded).abs() > 0.25 || rounded < -0.25 {
            return Err(Error::BoundaryZero { z: bx.center() });
        }
        Ok(rounded as usize)
    }

    fn newton(&self, start: Complex64) -> Result<Complex64> {
        let mut z = start;
        let mut last_abs = f64::INFINITY;
        for _ in 0..100 {
            let m = schur_from_data(self.model, self.sampled, &self.data, z);
            let d = det(&m)?;
            last_abs = d.norm();
            if last_abs <= 1e-12 {
                return Ok(z);
            }
            let m_inv = inv_checked(&m, 0)?;
            let mp = schur_derivative_from_data(self.model, self.sampled, &self.data, z);
            let trace: Complex64 = m_inv.dot(&mp).diag().sum();
            if trace.norm() == 0.0 || !trace.re.is_finite() || !trace.im.is_finite() {
                break;
            }
            let step = -Complex64::new(1.0, 0.0) / trace;
            z += step;
            self.sampled.check_eval_distance(z)?;
        }
        Err(Error::NoConvergence {
            max_iter: 100,
            last_update: last_abs,
        })
    }

    fn subdivide(
        &self,
        bx: &SearchBox,
        count: usize,
        zeros: &mut Vec<Complex64>,
        depth: usize,
    ) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let tiny = bx.re_max - bx.re_min < 1e-9 && bx.im_max - bx.im_min < 1e-9;
        if count == 1 || tiny {
            let margin = 0.5 * ((bx.re_max - bx.re_min) + (bx.im_max - bx.im_min));
            let mut starts = vec![bx.center()];
            starts.extend(bx.corners().iter().map(|&c| 0.5 * (c + bx.center())));
            let mut found = None;
            for start in starts {
                if let Ok(z) = self.newton(start) {
                    if bx.contains_with_margin(z, margin.max(1e-8)) {
                        found = Some(z);
                        break;
                    }
                }
            }
            let z = found.ok_or(Error::NoConvergence {
                max_iter: 100,
                last_update: f64::NAN,
            })?;
            for _ in 0..count {
                zeros.push(z);
            }
            return Ok(());
        }
        if depth == 0 {
            return Err(Error::CountMismatch {
                counted: count,
                refined: zeros.len(),
            });
        }
        // Nudge the cut if a zero happens to sit on it.
        for frac in [0.5, 0.53, 0.47, 0.56, 0.44] {
            let (b1, b2) = bx.split(frac);
            let counts = self.box_count(&b1).and_then(|c1| {
                self.box_count(&b2).map(|c2| (c1, c2))
            });
            match counts {
                Ok((c1, c2)) => {
                    if c1 + c2 != count {
                        return Err(Error::CountMismatch {
                            counted: count,
                            refined: c1 + c2,
                        });
                    }
                    self.subdivide(&b1, c1, zeros, depth - 1)?;
                    self.subdivide(&b2, c2, zeros, depth - 1)?;
                    return Ok(());
                }
                Err(Error::BoundaryZero { .. }) => continue,
                Err(other) => return Err(other),
            }
        }
        Err(Error::BoundaryZero { z: bx.center() })
    }
}

/// Locate all zeros of `det M(., Gamma)` in a rectangle, independently of
/// the fixed-point machinery: count by the argument principle, isolate by
/// recursive bisection, refine by Newton steps on `-1 / tr(M^{-1} M')`,
/// and fail loudly if count and refined zeros ever disagree.
///
/// Zeros are returned sorted by real then imaginary part, repeated with
/// multiplicity.
pub fn det_zero_oracle(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    search_box: &SearchBox,
) -> Result<Vec<Complex64>> {
    SearchBox::new(
        search_box.re_min,
        search_box.re_max,
        search_box.im_min,
        search_box.im_max,
    )?;
    let data = node_data(model, sampled);
    let mut oracle = DetOracle {
        model,
        sampled,
        data,
        typical: 1.0,
    };
    let mut typical = 0.0f64;
    for &corner in &search_box.corners() {
        typical = typical.max(oracle.det_at(corner)?.norm());
    }
    if typical == 0.0 {
        return Err(Error::BoundaryZero {
            z: search_box.center(),
        });
    }
    oracle.typical = typical;
    let count = oracle.box_count(search_box)?;
    let mut zeros = Vec::new();
    oracle.subdivide(search_box, count, &mut zeros, 48)?;
    if zeros.len() != count {
        return Err(Error::CountMismatch {
            counted: count,
            refined: zeros.len(),
        });
    }
    zeros.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    Ok(zeros)
}
