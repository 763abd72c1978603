//! Serializable run reports.
//!
//! Every floating-point value is rendered as a decimal string with 17
//! significant digits before serialization, so a report is bitwise
//! reproducible across runs and platforms and JSON writers cannot
//! introduce their own shortest-roundtrip formatting. Complex values are
//! `[re, im]` string pairs.

use num_complex::Complex64;
use serde::Serialize;

use crate::blockdiag::{DiagonalizationReport, IndependenceReport};
use crate::config::Task;
use crate::contour::{distance_to_contour, AdmissibilityReport, Contour, SampledContour};
use crate::model::{FriedrichsModel, ModelValidation};
use crate::schur::{Classification, FactorizationReport, JumpCheck, ResonanceSet};
use crate::solver::OperatorRoot;

/// Render with full `f64` precision; `-0.0` collapses to `0.0` so the
/// same value cannot print two ways.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn fmt_c64(z: Complex64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEcho {
    pub n: usize,
    pub m: usize,
    pub interval: [String; 2],
    pub eigenvalues: Vec<String>,
    pub hermiticity_defect: String,
}

impl ModelEcho {
    pub fn new(model: &FriedrichsModel, validation: &ModelValidation) -> Self {
        ModelEcho {
            n: model.n(),
            m: model.m(),
            interval: [
                fmt_f64(model.interval().alpha),
                fmt_f64(model.interval().beta),
            ],
            eigenvalues: validation.eigenvalues.iter().map(|&x| fmt_f64(x)).collect(),
            hermiticity_defect: fmt_f64(validation.hermiticity_defect),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourEcho {
    pub kind: &'static str,
    pub sign: i8,
    pub segments: usize,
    pub order: usize,
    pub panels_per_segment: usize,
    pub nodes: usize,
    pub geometry_hash: String,
    pub sampling_hash: String,
}

impl ContourEcho {
    pub fn new(sampled: &SampledContour, kind: &'static str) -> Self {
        ContourEcho {
            kind,
            sign: sampled.contour.sign(),
            segments: sampled.contour.segments().len(),
            order: sampled.order,
            panels_per_segment: sampled.panels_per_segment,
            nodes: sampled.nodes.len(),
            geometry_hash: format!("{:016x}", sampled.contour.geometry_hash()),
            sampling_hash: format!("{:016x}", sampled.contour_hash),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityOut {
    pub d: String,
    pub v_k: String,
    pub enorm_b: String,
    pub enorm_c: String,
    pub omega: String,
    pub pass_vk: bool,
    pub pass_hyp2: bool,
    pub r_bound: Option<String>,
    pub contraction_factor: Option<String>,
}

impl AdmissibilityOut {
    pub fn new(report: &AdmissibilityReport) -> Self {
        AdmissibilityOut {
            d: fmt_f64(report.d),
            v_k: fmt_f64(report.v_k),
            enorm_b: fmt_f64(report.enorm_b),
            enorm_c: fmt_f64(report.enorm_c),
            omega: fmt_f64(report.omega),
            pass_vk: report.pass_vk,
            pass_hyp2: report.pass_hyp2,
            r_bound: report.r_bound.map(fmt_f64),
            contraction_factor: report.contraction_factor().map(fmt_f64),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootOut {
    pub side: &'static str,
    pub certified: bool,
    pub iterations: usize,
    pub final_update_norm: String,
    pub fixed_point_residual: String,
    pub observed_contraction: String,
    pub r_bound: Option<String>,
    pub deviation_from_a: String,
    pub eigenvalues: Vec<[String; 2]>,
}

impl RootOut {
    pub fn new(root: &OperatorRoot, deviation: f64, eigenvalues: &[Complex64]) -> Self {
        RootOut {
            side: match root.side {
                crate::solver::Side::Right => "right",
                crate::solver::Side::Left => "left",
            },
            certified: root.certificate.certified,
            iterations: root.certificate.iterations,
            final_update_norm: fmt_f64(root.certificate.final_update_norm),
            fixed_point_residual: fmt_f64(root.certificate.fixed_point_residual),
            observed_contraction: fmt_f64(root.certificate.observed_contraction),
            r_bound: root.certificate.r_bound.map(fmt_f64),
            deviation_from_a: fmt_f64(deviation),
            eigenvalues: eigenvalues.iter().map(|&z| fmt_c64(z)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootsOut {
    pub right: RootOut,
    pub left: RootOut,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceOut {
    pub value: [String; 2],
    pub classification: &'static str,
    pub distance_to_contour: String,
}

pub fn classification_name(class: Classification) -> &'static str {
    match class {
        Classification::Resonance => "resonance",
        Classification::Boundary => "boundary",
        Classification::Exterior => "exterior",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonancesOut {
    pub total: usize,
    pub entries: Vec<ResonanceOut>,
}

impl ResonancesOut {
    pub fn new(set: &ResonanceSet, contour: &Contour) -> Self {
        ResonancesOut {
            total: set.entries.len(),
            entries: set
                .entries
                .iter()
                .map(|e| ResonanceOut {
                    value: fmt_c64(e.value),
                    classification: classification_name(e.classification),
                    distance_to_contour: fmt_f64(distance_to_contour(contour, e.value)),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiccatiOut {
    pub residual_x: String,
    pub residual_y: String,
    pub enorm_x: String,
    pub enorm_x_bound: String,
    pub enorm_y: String,
    pub enorm_y_bound: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationOut {
    pub max_residual_right: String,
    pub max_residual_left: String,
    pub w_inv_max: String,
    pub w_inv_bound: String,
    pub points_checked: usize,
    pub w_inv_points: usize,
    pub pass: bool,
}

impl FactorizationOut {
    pub fn new(report: &FactorizationReport, pass: bool) -> Self {
        FactorizationOut {
            max_residual_right: fmt_f64(report.max_residual_right),
            max_residual_left: fmt_f64(report.max_residual_left),
            w_inv_max: fmt_f64(report.w_inv_max),
            w_inv_bound: fmt_f64(report.w_inv_bound),
            points_checked: report.points_checked,
            w_inv_points: report.w_inv_points,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpOut {
    pub points: usize,
    pub max_residual: String,
    pub pass: bool,
}

impl JumpOut {
    pub fn new(checks: &[JumpCheck], pass: bool) -> Self {
        JumpOut {
            points: checks.len(),
            max_residual: fmt_f64(
                checks
                    .iter()
                    .map(|c| c.residual)
                    .fold(0.0f64, f64::max),
            ),
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalizationOut {
    pub q_norm_product: String,
    pub diag_residual_plus: String,
    pub diag_residual_minus: String,
    pub similarity_residual: String,
    pub graph_residual: String,
    pub md_factorization_residual: String,
    pub spectral_split_delta: String,
    pub cluster_gap: String,
    pub cluster_gap_bound: String,
    pub pass: bool,
}

impl DiagonalizationOut {
    pub fn new(report: &DiagonalizationReport, pass: bool) -> Self {
        DiagonalizationOut {
            q_norm_product: fmt_f64(report.q_norm_product),
            diag_residual_plus: fmt_f64(report.diag_residual_plus),
            diag_residual_minus: fmt_f64(report.diag_residual_minus),
            similarity_residual: fmt_f64(report.similarity_residual),
            graph_residual: fmt_f64(report.graph_residual),
            md_factorization_residual: fmt_f64(report.md_factorization_residual),
            spectral_split_delta: fmt_f64(report.spectral_split_delta),
            cluster_gap: fmt_f64(report.cluster_gap),
            cluster_gap_bound: fmt_f64(report.cluster_gap_bound),
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndependenceOut {
    pub skipped_reason: Option<String>,
    pub root_delta: Option<String>,
    pub resonance_delta: Option<String>,
    pub common_resonances: Option<usize>,
    pub pass: bool,
}

impl IndependenceOut {
    pub fn checked(report: &IndependenceReport, pass: bool) -> Self {
        IndependenceOut {
            skipped_reason: None,
            root_delta: Some(fmt_f64(report.root_delta)),
            resonance_delta: Some(fmt_f64(report.resonance_delta)),
            common_resonances: Some(report.common_a.min(report.common_b)),
            pass,
        }
    }

    pub fn skipped(reason: String) -> Self {
        IndependenceOut {
            skipped_reason: Some(reason),
            root_delta: None,
            resonance_delta: None,
            common_resonances: None,
            pass: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationOut {
    pub riccati: RiccatiOut,
    pub factorization: FactorizationOut,
    pub jump: JumpOut,
    pub diagonalization: DiagonalizationOut,
    pub independence: IndependenceOut,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub g: String,
    pub skipped: bool,
    pub certified: Option<bool>,
    pub resonances: Vec<[String; 2]>,
}

/// Top-level report. Field order is the serialization order.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub tasks: Vec<Task>,
    pub model: ModelEcho,
    pub contour: ContourEcho,
    pub admissibility: AdmissibilityOut,
    pub roots: Option<RootsOut>,
    pub resonances: Option<ResonancesOut>,
    pub verification: Option<VerificationOut>,
    pub sweep: Option<Vec<SweepRow>>,
    pub pass: bool,
    pub failures: Vec<String>,
}

pub const REPORT_SCHEMA: &str = "friedrichs.report.v1";

impl RunReport {
    pub fn to_json(&self) -> String {
        // Serialization of this tree cannot fail: no maps with non-string
        // keys, no non-finite floats (all floats are pre-rendered).
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
