//! Deformed integration contours and their admissibility data.
//!
//! A contour replaces the spectral band `[alpha, beta]` by a curve with the
//! same endpoints pushed into one half-plane (`sign = -1` below the axis,
//! `sign = +1` above). Together with the band it bounds an open lens-shaped
//! region `Omega`; analytic continuation of the Schur complement, operator
//! roots and resonances all live inside that region.
//!
//! Admissibility of a contour for a concrete model is quantified by
//!
//! * `d` — distance from `sigma(A)` to the contour,
//! * `V_K = \int_Gamma ||K'(mu)|| |dmu|` — total kernel variation,
//! * `enorm(b), enorm(c)` — `L^2(Gamma)`-norms of the couplings,
//!
//! and the two hypotheses `V_K < d^2/4` (solvability, yielding the root ball
//! radius `r = d/2 - sqrt(d^2/4 - V_K)`) and `enorm(b) enorm(c) < d^2/4`
//! (quantitative bounds on the Riccati solutions).

use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{FriedrichsModel, Interval};
use crate::linalg::spectral_norm;
use crate::quadrature::gauss_legendre;

/// Width of the band around the closed boundary classified as `Boundary`.
const BOUNDARY_BAND: f64 = 1e-9;

/// One smooth piece of a contour, parametrized over `t in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Straight segment from `z0` to `z1`.
    Line { z0: Complex64, z1: Complex64 },
    /// Circular arc `center + radius * exp(i theta)`, `theta` linear in `t`.
    CircularArc {
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Axis-aligned elliptic arc `center + a cos(theta) + i b sin(theta)`.
    EllipticArc {
        center: Complex64,
        semi_re: f64,
        semi_im: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Segment {
    /// Point on the segment at parameter `t`.
    pub fn z(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { z0, z1 } => z0 + (z1 - z0) * t,
            Segment::CircularArc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let theta = theta0 + (theta1 - theta0) * t;
                center + Complex64::new(radius * theta.cos(), radius * theta.sin())
            }
            Segment::EllipticArc {
                center,
                semi_re,
                semi_im,
                theta0,
                theta1,
            } => {
                let theta = theta0 + (theta1 - theta0) * t;
                center + Complex64::new(semi_re * theta.cos(), semi_im * theta.sin())
            }
        }
    }

    /// Derivative `dz/dt` at parameter `t`.
    pub fn dz(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { z0, z1 } => z1 - z0,
            Segment::CircularArc {
                center: _,
                radius,
                theta0,
                theta1,
            } => {
                let span = theta1 - theta0;
                let theta = theta0 + span * t;
                Complex64::new(-radius * theta.sin(), radius * theta.cos()) * span
            }
            Segment::EllipticArc {
                center: _,
                semi_re,
                semi_im,
                theta0,
                theta1,
            } => {
                let span = theta1 - theta0;
                let theta = theta0 + span * t;
                Complex64::new(-semi_re * theta.sin(), semi_im * theta.cos()) * span
            }
        }
    }
}

/// Declarative description of a contour over a given band.
#[derive(Debug, Clone, PartialEq)]
pub enum ContourSpec {
    /// The undeformed band itself (`sign = 0`); only the physical-sheet
    /// Schur complement is available on it.
    Interval,
    /// Semi-ellipse with horizontal semi-axis `(beta - alpha)/2` and
    /// vertical semi-axis `depth`; a semicircle when `depth` equals the
    /// half-width.
    SemiEllipse { depth: f64, sign: i8 },
    /// Piecewise-linear path `alpha -> v_1 -> ... -> v_k -> beta` with all
    /// vertices strictly inside the `sign` half-plane.
    Polyline { vertices: Vec<Complex64>, sign: i8 },
}

/// A validated contour: ordered segments from `alpha` to `beta`.
#[derive(Debug, Clone)]
pub struct Contour {
    interval: Interval,
    sign: i8,
    segments: Vec<Segment>,
}

fn check_sign(sign: i8) -> Result<()> {
    if sign != -1 && sign != 1 {
        return Err(Error::InvalidContour(format!(
            "deformation sign must be -1 or +1, got {sign}"
        )));
    }
    Ok(())
}

/// Build and validate a contour for the given band.
pub fn build_contour(interval: Interval, spec: &ContourSpec) -> Result<Contour> {
    let alpha = Complex64::new(interval.alpha, 0.0);
    let beta = Complex64::new(interval.beta, 0.0);
    let (sign, segments) = match spec {
        ContourSpec::Interval => (0i8, vec![Segment::Line { z0: alpha, z1: beta }]),
        ContourSpec::SemiEllipse { depth, sign } => {
            check_sign(*sign)?;
            if !depth.is_finite() || *depth <= 0.0 {
                return Err(Error::InvalidContour(format!(
                    "semi-ellipse depth must be positive, got {depth}"
                )));
            }
            let half_width = 0.5 * interval.width();
            let center = Complex64::new(interval.midpoint(), 0.0);
            let theta0 = std::f64::consts::PI;
            let theta1 = if *sign < 0 {
                2.0 * std::f64::consts::PI
            } else {
                0.0
            };
            let segment = if (*depth - half_width).abs() <= 1e-12 * half_width {
                Segment::CircularArc {
                    center,
                    radius: half_width,
                    theta0,
                    theta1,
                }
            } else {
                Segment::EllipticArc {
                    center,
                    semi_re: half_width,
                    semi_im: *depth,
                    theta0,
                    theta1,
                }
            };
            (*sign, vec![segment])
        }
        ContourSpec::Polyline { vertices, sign } => {
            check_sign(*sign)?;
            if vertices.is_empty() {
                return Err(Error::InvalidContour(
                    "polyline needs at least one vertex off the axis".into(),
                ));
            }
            for v in vertices {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::InvalidContour("polyline vertex is not finite".into()));
                }
                if (*sign as f64) * v.im <= 0.0 {
                    return Err(Error::InvalidContour(format!(
                        "vertex {v} does not lie strictly in the sign={sign} half-plane"
                    )));
                }
            }
            let mut points = Vec::with_capacity(vertices.len() + 2);
            points.push(alpha);
            points.extend_from_slice(vertices);
            points.push(beta);
            let segments = points
                .windows(2)
                .map(|w| Segment::Line { z0: w[0], z1: w[1] })
                .collect();
            (*sign, segments)
        }
    };
    let contour = Contour {
        interval,
        sign,
        segments,
    };
    contour.check_invariants()?;
    Ok(contour)
}

impl Contour {
    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Deformation half-plane: `-1`, `+1`, or `0` for the bare band.
    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_deformed(&self) -> bool {
        self.sign != 0
    }

    /// Fingerprint of the geometry alone (sign, band and exact segment
    /// parameters), independent of any sampling. Two samplings of the same
    /// contour share it even at different quadrature orders.
    pub fn geometry_hash(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        hasher.write_i8(self.sign);
        hasher.write_u64(self.interval.alpha.to_bits());
        hasher.write_u64(self.interval.beta.to_bits());
        for seg in &self.segments {
            match *seg {
                Segment::Line { z0, z1 } => {
                    hasher.write_u8(0);
                    hash_complex(&mut hasher, z0);
                    hash_complex(&mut hasher, z1);
                }
                Segment::CircularArc {
                    center,
                    radius,
                    theta0,
                    theta1,
                } => {
                    hasher.write_u8(1);
                    hash_complex(&mut hasher, center);
                    hasher.write_u64(radius.to_bits());
                    hasher.write_u64(theta0.to_bits());
                    hasher.write_u64(theta1.to_bits());
                }
                Segment::EllipticArc {
                    center,
                    semi_re,
                    semi_im,
                    theta0,
                    theta1,
                } => {
                    hasher.write_u8(2);
                    hash_complex(&mut hasher, center);
                    hasher.write_u64(semi_re.to_bits());
                    hasher.write_u64(semi_im.to_bits());
                    hasher.write_u64(theta0.to_bits());
                    hasher.write_u64(theta1.to_bits());
                }
            }
        }
        hasher.finish()
    }

    /// Point at a global parameter `u in [0, 1]` running through all
    /// segments at equal parameter speed.
    pub fn point_at(&self, u: f64) -> Complex64 {
        let s = self.segments.len() as f64;
        let idx = ((u * s).floor() as usize).min(self.segments.len() - 1);
        let local = u * s - idx as f64;
        self.segments[idx].z(local)
    }

    /// Chain of sample points, `per_segment` per segment plus the final
    /// endpoint, used for plotting, winding numbers and intersection tests.
    fn sample_chain(&self, per_segment: usize) -> Vec<Complex64> {
        let mut chain = Vec::with_capacity(per_segment * self.segments.len() + 1);
        for seg in &self.segments {
            for k in 0..per_segment {
                chain.push(seg.z(k as f64 / per_segment as f64));
            }
        }
        chain.push(self.segments[self.segments.len() - 1].z(1.0));
        chain
    }

    fn scale(&self) -> f64 {
        let depth = self
            .sample_chain(32)
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        self.interval.width() + depth
    }

    /// Structural invariants: endpoints on the band edges, continuity,
    /// confinement to the closed `sign` half-plane, a nowhere-degenerate
    /// parametrization, and no self-intersections.
    fn check_invariants(&self) -> Result<()> {
        let scale = self.scale();
        let tol = 1e-9 * scale;
        let alpha = Complex64::new(self.interval.alpha, 0.0);
        let beta = Complex64::new(self.interval.beta, 0.0);
        let first = self.segments.first().unwrap();
        let last = self.segments.last().unwrap();
        if (first.z(0.0) - alpha).norm() > tol || (last.z(1.0) - beta).norm() > tol {
            return Err(Error::InvalidContour(
                "contour endpoints must coincide with the band endpoints".into(),
            ));
        }
        for w in self.segments.windows(2) {
            if (w[0].z(1.0) - w[1].z(0.0)).norm() > tol {
                return Err(Error::InvalidContour(
                    "consecutive segments are not joined".into(),
                ));
            }
        }
        let per_segment = (1024usize).div_ceil(self.segments.len()).max(8);
        for seg in &self.segments {
            for k in 0..per_segment {
                let t = (k as f64 + 0.5) / per_segment as f64;
                let z = seg.z(t);
                if self.sign != 0 && (self.sign as f64) * z.im <= 0.0 {
                    return Err(Error::InvalidContour(format!(
                        "interior point {z} leaves the sign={} half-plane",
                        self.sign
                    )));
                }
                if seg.dz(t).norm() <= 1e-14 * scale {
                    return Err(Error::InvalidContour(
                        "segment parametrization is degenerate".into(),
                    ));
                }
            }
        }
        self.check_self_intersection(per_segment)?;
        Ok(())
    }

    fn check_self_intersection(&self, per_segment: usize) -> Result<()> {
        let chain = self.sample_chain(per_segment);
        // Chain points along a straight leg are collinear, so their
        // orientations are pure roundoff; only signs outside a noise band
        // scaled by the squared reach count as a genuine straddle.
        let reach = chain.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eps = 1e-13 * reach * reach;
        let side = |v: f64| -> i32 {
            if v > eps {
                1
            } else if v < -eps {
                -1
            } else {
                0
            }
        };
        let orient = |a: Complex64, b: Complex64, p: Complex64| -> f64 {
            (b.re - a.re) * (p.im - a.im) - (b.im - a.im) * (p.re - a.re)
        };
        // A crossing can land exactly on a chain point, leaving no strictly
        // straddling pair; those show up as a collinear point inside the
        // other edge's span.
        let slack = 1e-12 * reach;
        let on_span = |a: Complex64, b: Complex64, p: Complex64| -> bool {
            p.re >= a.re.min(b.re) - slack
                && p.re <= a.re.max(b.re) + slack
                && p.im >= a.im.min(b.im) - slack
                && p.im <= a.im.max(b.im) + slack
        };
        let edges = chain.len() - 1;
        for i in 0..edges {
            let (a, b) = (chain[i], chain[i + 1]);
            for j in (i + 2)..edges {
                let (c, d) = (chain[j], chain[j + 1]);
                let o1 = side(orient(a, b, c));
                let o2 = side(orient(a, b, d));
                let o3 = side(orient(c, d, a));
                let o4 = side(orient(c, d, b));
                let near = if o1 * o2 < 0 && o3 * o4 < 0 {
                    Some(0.5 * (b + c))
                } else if o1 == 0 && on_span(a, b, c) {
                    Some(c)
                } else if o2 == 0 && on_span(a, b, d) {
                    Some(d)
                } else if o3 == 0 && on_span(c, d, a) {
                    Some(a)
                } else if o4 == 0 && on_span(c, d, b) {
                    Some(b)
                } else {
                    None
                };
                if let Some(z) = near {
                    return Err(Error::InvalidContour(format!(
                        "contour intersects itself near {z}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A contour plus its composite Gauss–Legendre sampling.
///
/// `weights` are the complex quadrature weights (they carry the `dmu` line
/// element), `arc_weights` their moduli, so that `sum_j arc_weights[j] f(mu_j)`
/// approximates `\int_Gamma f |dmu|`. `contour_hash` fingerprints geometry and
/// sampling together; any two sampled objects that are combined downstream
/// must agree on it.
#[derive(Debug, Clone)]
pub struct SampledContour {
    pub contour: Contour,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub arc_weights: Vec<f64>,
    pub order: usize,
    pub panels_per_segment: usize,
    pub max_panel_arc: f64,
    pub contour_hash: u64,
}

impl SampledContour {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sign(&self) -> i8 {
        self.contour.sign()
    }

    pub fn interval(&self) -> Interval {
        self.contour.interval()
    }

    /// Minimum allowed distance from an evaluation point to the contour:
    /// ten typical node spacings. Closer points see the discrete sum of
    /// near-singular terms diverge from the true integral.
    pub fn min_eval_distance(&self) -> f64 {
        10.0 * self.max_panel_arc / self.order as f64
    }

    /// Enforce the distance rule for an evaluation point.
    pub fn check_eval_distance(&self, z: Complex64) -> Result<()> {
        let dist = distance_to_contour(&self.contour, z);
        let min_dist = self.min_eval_distance();
        if dist < min_dist {
            return Err(Error::TooCloseToContour { z, dist, min_dist });
        }
        Ok(())
    }
}

fn hash_complex(h: &mut DefaultHasher, z: Complex64) {
    h.write_u64(z.re.to_bits());
    h.write_u64(z.im.to_bits());
}

/// Composite Gauss–Legendre sampling of a contour.
pub fn sample_contour(contour: &Contour, order: usize, panels_per_segment: usize) -> Result<SampledContour> {
    if order < 2 || panels_per_segment < 1 {
        return Err(Error::InvalidContour(format!(
            "sampling needs order >= 2 and at least one panel, got order {order}, panels {panels_per_segment}"
        )));
    }
    let (gl_nodes, gl_weights) = gauss_legendre(order);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut arc_weights = Vec::new();
    let mut max_panel_arc: f64 = 0.0;
    for seg in contour.segments() {
        for panel in 0..panels_per_segment {
            let t0 = panel as f64 / panels_per_segment as f64;
            let t1 = (panel + 1) as f64 / panels_per_segment as f64;
            let center = 0.5 * (t0 + t1);
            let half = 0.5 * (t1 - t0);
            let mut panel_arc = 0.0;
            for (&x, &w) in gl_nodes.iter().zip(&gl_weights) {
                let t = center + half * x;
                let weight = seg.dz(t) * (half * w);
                nodes.push(seg.z(t));
                weights.push(weight);
                let a = weight.norm();
                arc_weights.push(a);
                panel_arc += a;
            }
            max_panel_arc = max_panel_arc.max(panel_arc);
        }
    }
    let mut hasher = DefaultHasher::new();
    hasher.write_i8(contour.sign());
    hasher.write_u64(contour.interval().alpha.to_bits());
    hasher.write_u64(contour.interval().beta.to_bits());
    hasher.write_usize(nodes.len());
    for (z, w) in nodes.iter().zip(&weights) {
        hash_complex(&mut hasher, *z);
        hash_complex(&mut hasher, *w);
    }
    Ok(SampledContour {
        contour: contour.clone(),
        nodes,
        weights,
        arc_weights,
        order,
        panels_per_segment,
        max_panel_arc,
        contour_hash: hasher.finish(),
    })
}

/// Distance from a point to one segment, to roughly machine precision.
fn segment_distance(seg: &Segment, p: Complex64) -> f64 {
    if let Segment::Line { z0, z1 } = *seg {
        let d = z1 - z0;
        let len2 = d.norm_sqr();
        if len2 == 0.0 {
            return (p - z0).norm();
        }
        let t = (((p - z0).re * d.re + (p - z0).im * d.im) / len2).clamp(0.0, 1.0);
        return (p - (z0 + d * t)).norm();
    }
    // Coarse scan to bracket the minimum, then golden-section refinement.
    let f = |t: f64| (seg.z(t) - p).norm();
    let scan = 256usize;
    let mut best_k = 0usize;
    let mut best = f64::INFINITY;
    for k in 0..=scan {
        let v = f(k as f64 / scan as f64);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let mut lo = ((best_k as f64 - 1.0) / scan as f64).max(0.0);
    let mut hi = ((best_k as f64 + 1.0) / scan as f64).min(1.0);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-13 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    best.min(f1).min(f2)
}

/// Distance from a complex point to the contour.
pub fn distance_to_contour(contour: &Contour, z: Complex64) -> f64 {
    contour
        .segments()
        .iter()
        .map(|seg| segment_distance(seg, z))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from a set of real points (typically `sigma(A)`) to the contour.
pub fn contour_distance(contour: &Contour, points: &[f64]) -> f64 {
    points
        .iter()
        .map(|&x| distance_to_contour(contour, Complex64::new(x, 0.0)))
        .fold(f64::INFINITY, f64::min)
}

/// Distance to the closed boundary of `Omega`: contour plus band segment.
pub fn distance_to_closed_boundary(contour: &Contour, z: Complex64) -> f64 {
    let band = Segment::Line {
        z0: Complex64::new(contour.interval().alpha, 0.0),
        z1: Complex64::new(contour.interval().beta, 0.0),
    };
    distance_to_contour(contour, z).min(segment_distance(&band, z))
}

/// Classification of a point relative to the closed region `Omega(Gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

/// Locate `z` relative to the region enclosed by band and contour.
///
/// Points within `1e-9` of the closed boundary are classified `Boundary`;
/// beyond a few multiples of that band the winding-number computation (8192
/// chords on each of band and contour) is reliable.
///
/// # Panics
///
/// Panics if called with an undeformed contour, which encloses no region.
pub fn region_membership(contour: &Contour, z: Complex64) -> Membership {
    assert!(
        contour.is_deformed(),
        "region membership requires a deformed contour"
    );
    if distance_to_closed_boundary(contour, z) < BOUNDARY_BAND {
        return Membership::Boundary;
    }
    let half = 8192usize;
    let alpha = contour.interval().alpha;
    let width = contour.interval().width();
    let mut loop_points: Vec<Complex64> = Vec::with_capacity(2 * half + 1);
    for k in 0..half {
        loop_points.push(Complex64::new(alpha + width * k as f64 / half as f64, 0.0));
    }
    let per_segment = half.div_ceil(contour.segments().len());
    let mut gamma = contour.sample_chain(per_segment);
    gamma.reverse();
    loop_points.extend(gamma.into_iter());
    let mut total = 0.0f64;
    let m = loop_points.len();
    for k in 0..m {
        let a = loop_points[k] - z;
        let b = loop_points[(k + 1) % m] - z;
        let cross = a.re * b.im - a.im * b.re;
        let dot = a.re * b.re + a.im * b.im;
        total += cross.atan2(dot);
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.25 {
        return Membership::Boundary;
    }
    if rounded.abs() >= 0.5 {
        Membership::Inside
    } else {
        Membership::Outside
    }
}

/// Contour-quality data for a concrete model.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    /// Distance from `sigma(A)` to the contour.
    pub d: f64,
    /// Total kernel variation `\int_Gamma ||K'|| |dmu|`.
    pub v_k: f64,
    /// `L^2(Gamma)` norm of the coupling `b`.
    pub enorm_b: f64,
    /// `L^2(Gamma)` norm of the coupling `c`.
    pub enorm_c: f64,
    /// Discriminant `d^2 - 4 V_K` of the root-ball equation.
    pub omega: f64,
    /// Solvability hypothesis `V_K < d^2/4`.
    pub pass_vk: bool,
    /// Quantitative hypothesis `enorm(b) enorm(c) < d^2/4`.
    pub pass_hyp2: bool,
    /// Ball radius `d/2 - sqrt(d^2/4 - V_K)` when solvable.
    pub r_bound: Option<f64>,
}

impl AdmissibilityReport {
    /// Contraction factor `V_K / (d - r)^2` of the fixed-point map on the
    /// root ball.
    pub fn contraction_factor(&self) -> Option<f64> {
        self.r_bound.map(|r| self.v_k / ((self.d - r) * (self.d - r)))
    }

    fn hyp2_sqrt(&self) -> Option<f64> {
        if !self.pass_hyp2 {
            return None;
        }
        Some((0.25 * self.d * self.d - self.enorm_b * self.enorm_c).sqrt())
    }

    /// Bound on `enorm(x)` for the right Riccati solution.
    pub fn x_enorm_bound(&self) -> Option<f64> {
        self.hyp2_sqrt().map(|s| self.enorm_c / (0.5 * self.d + s))
    }

    /// Bound on `enorm(y)` for the left Riccati solution.
    pub fn y_enorm_bound(&self) -> Option<f64> {
        self.hyp2_sqrt().map(|s| self.enorm_b / (0.5 * self.d + s))
    }
}

/// Evaluate both admissibility hypotheses of a model/sampling pair.
pub fn admissibility(model: &FriedrichsModel, sampled: &SampledContour) -> Result<AdmissibilityReport> {
    let validation = model.validate()?;
    let d = contour_distance(&sampled.contour, &validation.eigenvalues);
    let mut v_k = 0.0;
    let mut b2 = 0.0;
    let mut c2 = 0.0;
    for (&mu, &a) in sampled.nodes.iter().zip(&sampled.arc_weights) {
        let (b, c) = model.eval_couplings(mu);
        let nb = spectral_norm(&b);
        let nc = spectral_norm(&c);
        v_k += a * spectral_norm(&b.dot(&c));
        b2 += a * nb * nb;
        c2 += a * nc * nc;
    }
    let enorm_b = b2.sqrt();
    let enorm_c = c2.sqrt();
    let quarter = 0.25 * d * d;
    let pass_vk = v_k < quarter;
    let pass_hyp2 = enorm_b * enorm_c < quarter;
    let omega = d * d - 4.0 * v_k;
    let r_bound = pass_vk.then(|| 0.5 * d - (quarter - v_k).sqrt());
    Ok(AdmissibilityReport {
        d,
        v_k,
        enorm_b,
        enorm_c,
        omega,
        pass_vk,
        pass_hyp2,
        r_bound,
    })
}

/// Sampling refinement policy.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Panels per contour segment.
    pub panels_per_segment: usize,
    /// Stop refining once `V_K` moves less than this under order doubling.
    pub adaptive_tol: f64,
    /// Hard cap on `order * panels` per segment.
    pub max_nodes_per_segment: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 64,
            panels_per_segment: 4,
            adaptive_tol: 1e-10,
            max_nodes_per_segment: 1024,
        }
    }
}

/// Sample a contour, doubling the order until the admissibility data are
/// quadrature-converged (or the node cap is reached). Returns the coarsest
/// sampling whose `V_K` is stable under one further doubling.
pub fn sample_adaptive(
    model: &FriedrichsModel,
    contour: &Contour,
    spec: &QuadratureSpec,
) -> Result<(SampledContour, AdmissibilityReport)> {
    let mut order = spec.order;
    let mut sampled = sample_contour(contour, order, spec.panels_per_segment)?;
    let mut report = admissibility(model, &sampled)?;
    loop {
        if 2 * order * spec.panels_per_segment > spec.max_nodes_per_segment {
            return Ok((sampled, report));
        }
        let finer = sample_contour(contour, 2 * order, spec.panels_per_segment)?;
        let finer_report = admissibility(model, &finer)?;
        if (finer_report.v_k - report.v_k).abs() < spec.adaptive_tol {
            return Ok((sampled, report));
        }
        order *= 2;
        sampled = finer;
        report = finer_report;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MatrixPolynomial;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn band() -> Interval {
        Interval::new(0.0, 2.0).unwrap()
    }

    fn rank_one_model(g: f64) -> FriedrichsModel {
        let a = array![[c(1.0, 0.0)]];
        let b = MatrixPolynomial::new(vec![array![[c(g, 0.0)]]]).unwrap();
        let cc = MatrixPolynomial::new(vec![array![[c(g, 0.0)]]]).unwrap();
        FriedrichsModel::new(band(), a, b, cc).unwrap()
    }

    fn semicircle() -> Contour {
        build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: -1 }).unwrap()
    }

    #[test]
    fn semicircle_hits_band_endpoints() {
        let contour = semicircle();
        assert_abs_diff_eq!((contour.point_at(0.0) - c(0.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((contour.point_at(1.0) - c(2.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((contour.point_at(0.5) - c(1.0, -1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sampled_weights_sum_to_band_width() {
        let sampled = sample_contour(&semicircle(), 64, 4).unwrap();
        let total: Complex64 = sampled.weights.iter().sum();
        assert_abs_diff_eq!((total - c(2.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        let arc: f64 = sampled.arc_weights.iter().sum();
        assert_abs_diff_eq!(arc, std::f64::consts::PI, epsilon = 1e-9);
    }

    #[test]
    fn elliptic_arc_length_matches_reference() {
        let contour =
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 0.5, sign: -1 }).unwrap();
        let sampled = sample_contour(&contour, 64, 4).unwrap();
        let arc: f64 = sampled.arc_weights.iter().sum();
        assert_abs_diff_eq!(arc, 2.422_112_055_136_919_3, epsilon = 1e-9);
    }

    #[test]
    fn polyline_weights_and_length() {
        let contour = build_contour(
            band(),
            &ContourSpec::Polyline {
                vertices: vec![c(1.0, -0.7)],
                sign: -1,
            },
        )
        .unwrap();
        let sampled = sample_contour(&contour, 64, 4).unwrap();
        let total: Complex64 = sampled.weights.iter().sum();
        assert_abs_diff_eq!((total - c(2.0, 0.0)).norm(), 0.0, epsilon = 1e-13);
        let arc: f64 = sampled.arc_weights.iter().sum();
        assert_abs_diff_eq!(arc, 2.0 * 1.49f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn distance_from_center_of_semicircle_is_radius() {
        assert_abs_diff_eq!(
            contour_distance(&semicircle(), &[1.0]),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn distance_to_polyline_matches_closed_form() {
        let contour = build_contour(
            band(),
            &ContourSpec::Polyline {
                vertices: vec![c(1.0, -0.7)],
                sign: -1,
            },
        )
        .unwrap();
        // Distance from 1.0 to the line through 0 and 1 - 0.7i.
        let expected = 0.7 / 1.49f64.sqrt();
        assert_abs_diff_eq!(contour_distance(&contour, &[1.0]), expected, epsilon = 1e-10);
    }

    #[test]
    fn interval_contour_touches_embedded_points() {
        let contour = build_contour(band(), &ContourSpec::Interval).unwrap();
        assert_abs_diff_eq!(contour_distance(&contour, &[1.0]), 0.0, epsilon = 1e-14);
        assert!(!contour.is_deformed());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            build_contour(band(), &ContourSpec::SemiEllipse { depth: -0.2, sign: -1 }),
            Err(Error::InvalidContour(_))
        ));
        assert!(matches!(
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: 0 }),
            Err(Error::InvalidContour(_))
        ));
        // Vertex on the wrong side of the axis.
        assert!(matches!(
            build_contour(
                band(),
                &ContourSpec::Polyline {
                    vertices: vec![c(1.0, 0.5)],
                    sign: -1
                }
            ),
            Err(Error::InvalidContour(_))
        ));
    }

    #[test]
    fn self_intersecting_polyline_is_rejected() {
        let result = build_contour(
            band(),
            &ContourSpec::Polyline {
                vertices: vec![c(1.5, -0.5), c(0.5, -0.5)],
                sign: -1,
            },
        );
        assert!(matches!(result, Err(Error::InvalidContour(_))));
    }

    #[test]
    fn collinear_roundoff_is_not_a_self_intersection() {
        // Irrational leg directions make the orientation of collinear chain
        // points pure roundoff noise; a plain V must still validate.
        let width = 3.638170483621725;
        let interval = Interval::new(0.0, width).unwrap();
        let result = build_contour(
            interval,
            &ContourSpec::Polyline {
                vertices: vec![c(0.4233383015242783 * width, -0.7883937592056253)],
                sign: -1,
            },
        );
        assert!(result.is_ok());
    }

    #[test]
    fn membership_classifies_reference_points() {
        let contour = semicircle();
        assert_eq!(region_membership(&contour, c(1.0, -0.5)), Membership::Inside);
        assert_eq!(region_membership(&contour, c(1.0, 0.5)), Membership::Outside);
        assert_eq!(region_membership(&contour, c(3.0, 0.0)), Membership::Outside);
        assert_eq!(region_membership(&contour, c(1.0, -1.0)), Membership::Boundary);
        assert_eq!(region_membership(&contour, c(1.0, 0.0)), Membership::Boundary);
    }

    #[test]
    fn mirrored_contour_flips_membership() {
        let contour =
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: 1 }).unwrap();
        assert_eq!(region_membership(&contour, c(1.0, 0.5)), Membership::Inside);
        assert_eq!(region_membership(&contour, c(1.0, -0.5)), Membership::Outside);
    }

    #[test]
    fn admissibility_of_weak_coupling_semicircle() {
        let model = rank_one_model(0.1);
        let sampled = sample_contour(&semicircle(), 64, 4).unwrap();
        let report = admissibility(&model, &sampled).unwrap();
        assert_abs_diff_eq!(report.d, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.v_k, 0.01 * std::f64::consts::PI, epsilon = 1e-10);
        let enorm = 0.1 * std::f64::consts::PI.sqrt();
        assert_abs_diff_eq!(report.enorm_b, enorm, epsilon = 1e-10);
        assert_abs_diff_eq!(report.enorm_c, enorm, epsilon = 1e-10);
        assert!(report.pass_vk);
        assert!(report.pass_hyp2);
        assert_abs_diff_eq!(
            report.r_bound.unwrap(),
            0.032_470_243_231_404_516,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            report.x_enorm_bound().unwrap(),
            0.183_193_730_064_204_67,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            report.omega,
            1.0 - 0.04 * std::f64::consts::PI,
            epsilon = 1e-10
        );
    }

    #[test]
    fn strong_coupling_fails_the_contraction_hypothesis() {
        let model = rank_one_model(0.3);
        let sampled = sample_contour(&semicircle(), 64, 4).unwrap();
        let report = admissibility(&model, &sampled).unwrap();
        assert!(!report.pass_vk);
        assert!(report.r_bound.is_none());
    }

    #[test]
    fn adaptive_sampling_accepts_the_default_order_when_converged() {
        let model = rank_one_model(0.1);
        let (sampled, report) =
            sample_adaptive(&model, &semicircle(), &QuadratureSpec::default()).unwrap();
        assert_eq!(sampled.order, 64);
        assert!(report.pass_vk);
    }

    #[test]
    fn distance_rule_scales_with_sampling_density() {
        let sampled = sample_contour(&semicircle(), 64, 4).unwrap();
        // Panel arc ~ pi/4, so the rule sits near 0.123.
        assert_abs_diff_eq!(
            sampled.min_eval_distance(),
            10.0 * (std::f64::consts::PI / 4.0) / 64.0,
            epsilon = 1e-4
        );
        assert!(sampled.check_eval_distance(c(1.0, 0.0)).is_ok());
        assert!(matches!(
            sampled.check_eval_distance(c(1.0, -0.95)),
            Err(Error::TooCloseToContour { .. })
        ));
    }
}
