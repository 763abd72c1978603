//! End-to-end run orchestration.
//!
//! A pipeline run executes the configured tasks in dependency order and
//! folds everything into a single [`RunReport`]. Infrastructure problems
//! (unreadable config, ill-formed model, broken contour) surface as `Err`;
//! once the sampling exists, later failures are recorded in the report's
//! `failures` list instead so a partial run still produces evidence.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;

use crate::blockdiag::{contour_independence, verify_diagonalization};
use crate::config::{ContourConfig, RunConfig, Task};
use crate::contour::{
    admissibility, build_contour, region_membership, sample_adaptive, sample_contour, Contour,
    ContourSpec, Membership, QuadratureSpec, SampledContour,
};
use crate::error::{Error, Result};
use crate::linalg::{eig_sorted, spectral_norm};
use crate::model::FriedrichsModel;
use crate::report::{
    classification_name, fmt_f64, AdmissibilityOut, ContourEcho, DiagonalizationOut,
    FactorizationOut, IndependenceOut, JumpOut, ModelEcho, ResonancesOut, RiccatiOut, RootOut,
    RootsOut, RunReport, SweepRow, VerificationOut, REPORT_SCHEMA,
};
use crate::schur::{
    continuation_jump, default_jump_grid, default_z_grid, resonances as classify_resonances,
    verify_factorization,
};
use crate::solver::{
    riccati_residual, riccati_solution_x, riccati_solution_y, solve_operator_root, OperatorRoot,
    Side,
};

/// Residual ceiling for the Riccati, factorization and jump checks.
const TOL_RESIDUAL: f64 = 1e-8;
/// Residual ceiling for the discretized block identities.
const TOL_BLOCK: f64 = 1e-7;
/// Ceiling for the spectral-split Hausdorff distance.
const TOL_SPLIT: f64 = 1e-6;
/// Ceiling for root drift between two admissible contours.
const TOL_ROOT_DRIFT: f64 = 1e-9;
/// Ceiling for resonance drift between two admissible contours.
const TOL_RESONANCE_DRIFT: f64 = 1e-8;
/// Relative slack when comparing a measured quantity against its proven
/// strict bound.
const BOUND_SLACK: f64 = 1e-9;

/// One row of the sweep trajectory.
#[derive(Debug, Clone)]
pub enum TrajectoryRow {
    /// Contour not admissible at this coupling scale.
    Skipped { g: f64 },
    /// One root eigenvalue, indexed by its sorted position.
    Point {
        g: f64,
        index: usize,
        value: Complex64,
        certified: bool,
    },
}

/// Raw data behind the plot CSVs.
#[derive(Debug, Clone, Default)]
pub struct PlotData {
    /// Dense polyline along the contour.
    pub contour: Vec<Complex64>,
    /// Eigenvalues of `A`.
    pub spectrum: Vec<f64>,
    /// Root eigenvalues with their classification.
    pub resonances: Vec<(Complex64, &'static str)>,
    /// Membership raster of the enclosed region, when requested.
    pub omega_grid: Vec<(Complex64, &'static str)>,
    /// Sweep trajectory rows.
    pub trajectory: Vec<TrajectoryRow>,
}

/// Result of a pipeline run that got far enough to produce a report.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: RunReport,
    /// 0 on full success, 4 if a solve failed to converge, 3 for any other
    /// recorded failure.
    pub exit_code: i32,
    pub plot: PlotData,
    /// Wall-clock seconds per stage, for diagnostics only; never part of
    /// the report.
    pub timings: Vec<(&'static str, f64)>,
}

fn contour_kind(config: &RunConfig) -> &'static str {
    match &config.contour {
        ContourConfig::Interval => "interval",
        ContourConfig::SemiEllipse { .. } => "semi_ellipse",
        ContourConfig::Polyline { .. } => "polyline",
    }
}

/// Record a stage result, converting errors into report failures.
fn record<T>(
    result: Result<T>,
    what: &str,
    failures: &mut Vec<String>,
    has_noconv: &mut bool,
) -> Option<T> {
    match result {
        Ok(v) => Some(v),
        Err(e) => {
            if matches!(e, Error::NoConvergence { .. }) {
                *has_noconv = true;
            }
            failures.push(format!("{what}: {e}"));
            None
        }
    }
}

fn root_out(root: &OperatorRoot, a: &ndarray::Array2<Complex64>) -> Result<RootOut> {
    let deviation = spectral_norm(&(&root.z_matrix - a));
    let eigenvalues = eig_sorted(&root.z_matrix)?;
    Ok(RootOut::new(root, deviation, &eigenvalues))
}

/// Pick a geometrically different contour over the same band for the
/// independence cross-check. Returns `None` (with a reason) when no
/// admissible alternative is found.
fn comparison_contour(
    model: &FriedrichsModel,
    config: &RunConfig,
    primary: &Contour,
    quad: &QuadratureSpec,
) -> Result<std::result::Result<Contour, String>> {
    let interval = primary.interval();
    let mid = interval.midpoint();
    let candidates: Vec<ContourSpec> = match &config.contour {
        ContourConfig::Interval => {
            return Ok(Err("primary contour is not deformed".to_string()));
        }
        ContourConfig::SemiEllipse { depth, sign } => vec![ContourSpec::Polyline {
            vertices: vec![Complex64::new(mid, *sign as f64 * 0.7 * depth)],
            sign: *sign,
        }],
        ContourConfig::Polyline { vertices, sign } => {
            let depth = vertices
                .iter()
                .map(|v| v[1].abs())
                .fold(0.0f64, f64::max);
            [0.7, 1.0, 0.5]
                .iter()
                .map(|f| ContourSpec::SemiEllipse {
                    depth: f * depth,
                    sign: *sign,
                })
                .collect()
        }
    };
    for spec in &candidates {
        let contour = match build_contour(interval, spec) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let sampled = sample_contour(&contour, quad.order, quad.panels_per_segment)?;
        if admissibility(model, &sampled)?.pass_vk {
            return Ok(Ok(contour));
        }
    }
    Ok(Err(
        "no admissible comparison contour in the candidate family".to_string(),
    ))
}

struct VerifyInputs<'a> {
    model: &'a FriedrichsModel,
    config: &'a RunConfig,
    contour: &'a Contour,
    sampled: &'a SampledContour,
    right: &'a OperatorRoot,
    left: &'a OperatorRoot,
}

fn run_verification(
    inputs: &VerifyInputs,
    failures: &mut Vec<String>,
    has_noconv: &mut bool,
) -> Option<VerificationOut> {
    let VerifyInputs {
        model,
        config,
        contour,
        sampled,
        right,
        left,
    } = *inputs;

    let x = record(
        riccati_solution_x(model, sampled, right),
        "verify.riccati",
        failures,
        has_noconv,
    )?;
    let y = record(
        riccati_solution_y(model, sampled, left),
        "verify.riccati",
        failures,
        has_noconv,
    )?;
    let (res_x, res_y) = record(
        riccati_residual(model, sampled, &x, &y),
        "verify.riccati",
        failures,
        has_noconv,
    )?;
    let within = |value: f64, bound: Option<f64>| match bound {
        Some(b) => value <= b * (1.0 + BOUND_SLACK),
        None => true,
    };
    let riccati_pass = res_x <= TOL_RESIDUAL
        && res_y <= TOL_RESIDUAL
        && within(x.enorm, x.enorm_bound)
        && within(y.enorm, y.enorm_bound);
    if !riccati_pass {
        failures.push(format!(
            "verify.riccati: residuals ({}, {}) or energy norms out of bounds",
            fmt_f64(res_x),
            fmt_f64(res_y)
        ));
    }
    let riccati = RiccatiOut {
        residual_x: fmt_f64(res_x),
        residual_y: fmt_f64(res_y),
        enorm_x: fmt_f64(x.enorm),
        enorm_x_bound: x.enorm_bound.map(fmt_f64).unwrap_or_else(|| "inf".into()),
        enorm_y: fmt_f64(y.enorm),
        enorm_y_bound: y.enorm_bound.map(fmt_f64).unwrap_or_else(|| "inf".into()),
        pass: riccati_pass,
    };

    let grid = record(
        default_z_grid(model, sampled),
        "verify.factorization",
        failures,
        has_noconv,
    )?;
    let fact = record(
        verify_factorization(model, sampled, right, left, &grid),
        "verify.factorization",
        failures,
        has_noconv,
    )?;
    let fact_pass = fact.max_residual_right <= TOL_RESIDUAL
        && fact.max_residual_left <= TOL_RESIDUAL
        && fact.w_inv_max <= fact.w_inv_bound * (1.0 + BOUND_SLACK);
    if !fact_pass {
        failures.push(format!(
            "verify.factorization: residuals ({}, {}) or ||W^-1|| {} over bound {}",
            fmt_f64(fact.max_residual_right),
            fmt_f64(fact.max_residual_left),
            fmt_f64(fact.w_inv_max),
            fmt_f64(fact.w_inv_bound)
        ));
    }
    let factorization = FactorizationOut::new(&fact, fact_pass);

    let interval_contour = record(
        build_contour(model.interval(), &ContourSpec::Interval),
        "verify.jump",
        failures,
        has_noconv,
    )?;
    let sampled_interval = record(
        sample_contour(&interval_contour, sampled.order, sampled.panels_per_segment),
        "verify.jump",
        failures,
        has_noconv,
    )?;
    let jump_points = default_jump_grid(&sampled_interval, sampled);
    let mut jump_checks = Vec::with_capacity(jump_points.len());
    for &z in &jump_points {
        let check = record(
            continuation_jump(model, &sampled_interval, sampled, z),
            "verify.jump",
            failures,
            has_noconv,
        )?;
        jump_checks.push(check);
    }
    let jump_pass = jump_checks.iter().all(|c| c.pass);
    if !jump_pass {
        failures.push(format!(
            "verify.jump: max residual {} over {} points",
            fmt_f64(
                jump_checks
                    .iter()
                    .map(|c| c.residual)
                    .fold(0.0f64, f64::max)
            ),
            jump_checks.len()
        ));
    }
    let jump = JumpOut::new(&jump_checks, jump_pass);

    let diag = record(
        verify_diagonalization(model, sampled, right, left, &x, &y),
        "verify.diagonalization",
        failures,
        has_noconv,
    )?;
    let graph_ceiling = 10.0 * res_x.max(res_y) + 1e-13;
    let diag_pass = diag.diag_residual_plus <= TOL_BLOCK
        && diag.diag_residual_minus <= TOL_BLOCK
        && diag.similarity_residual <= TOL_BLOCK
        && diag.md_factorization_residual <= TOL_BLOCK
        && diag.graph_residual <= graph_ceiling
        && diag.spectral_split_delta <= TOL_SPLIT
        && diag.cluster_gap >= diag.cluster_gap_bound - 1e-12;
    if !diag_pass {
        failures.push(format!(
            "verify.diagonalization: residuals (plus {}, minus {}, similarity {}, graph {}, md {}, split {}) exceed ceilings or gap {} below bound {}",
            fmt_f64(diag.diag_residual_plus),
            fmt_f64(diag.diag_residual_minus),
            fmt_f64(diag.similarity_residual),
            fmt_f64(diag.graph_residual),
            fmt_f64(diag.md_factorization_residual),
            fmt_f64(diag.spectral_split_delta),
            fmt_f64(diag.cluster_gap),
            fmt_f64(diag.cluster_gap_bound)
        ));
    }
    let diagonalization = DiagonalizationOut::new(&diag, diag_pass);

    let quad = QuadratureSpec {
        order: sampled.order,
        panels_per_segment: sampled.panels_per_segment,
        ..config.quadrature_spec()
    };
    let independence = match record(
        comparison_contour(model, config, contour, &quad),
        "verify.independence",
        failures,
        has_noconv,
    )? {
        Err(reason) => IndependenceOut::skipped(reason),
        Ok(other) => {
            let indep = record(
                contour_independence(model, contour, &other, &quad, &config.solver_options()),
                "verify.independence",
                failures,
                has_noconv,
            )?;
            let indep_pass = indep.root_delta <= TOL_ROOT_DRIFT
                && indep.resonance_delta <= TOL_RESONANCE_DRIFT;
            if !indep_pass {
                failures.push(format!(
                    "verify.independence: root drift {}, resonance drift {}",
                    fmt_f64(indep.root_delta),
                    fmt_f64(indep.resonance_delta)
                ));
            }
            IndependenceOut::checked(&indep, indep_pass)
        }
    };

    Some(VerificationOut {
        riccati,
        factorization,
        jump,
        diagonalization,
        independence,
    })
}

/// Execute all configured tasks. `Err` means the configuration never
/// produced a usable model/contour pair; any later problem is a recorded
/// failure inside the returned report.
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutcome> {
    let mut timings: Vec<(&'static str, f64)> = Vec::new();
    let t0 = Instant::now();

    config.validate()?;
    let model = config.build_model()?;
    let validation = model.validate()?;
    let contour = build_contour(model.interval(), &config.contour_spec())?;
    let (sampled, adm) = sample_adaptive(&model, &contour, &config.quadrature_spec())?;
    timings.push(("setup", t0.elapsed().as_secs_f64()));

    let tasks = config.effective_tasks();
    let opts = config.solver_options();
    let mut failures: Vec<String> = Vec::new();
    let mut has_noconv = false;

    let mut plot = PlotData {
        contour: (0..1024)
            .map(|k| contour.point_at(k as f64 / 1023.0))
            .collect(),
        spectrum: validation.eigenvalues.clone(),
        ..PlotData::default()
    };

    // check
    if !adm.pass_vk {
        if opts.force {
            eprintln!(
                "warning: contraction hypothesis failed (V_K = {}, d^2/4 = {}); continuing uncertified",
                fmt_f64(adm.v_k),
                fmt_f64(0.25 * adm.d * adm.d)
            );
        } else {
            failures.push(format!(
                "check: contraction hypothesis V_K < d^2/4 failed (V_K = {}, d^2/4 = {})",
                fmt_f64(adm.v_k),
                fmt_f64(0.25 * adm.d * adm.d)
            ));
        }
    }
    let check_ok = adm.pass_vk || opts.force;

    // solve
    let mut roots: Option<(OperatorRoot, OperatorRoot)> = None;
    let mut roots_out: Option<RootsOut> = None;
    if tasks.contains(&Task::Solve) && check_ok {
        let t = Instant::now();
        let right = record(
            solve_operator_root(&model, &sampled, Side::Right, &opts),
            "solve.right",
            &mut failures,
            &mut has_noconv,
        );
        let left = record(
            solve_operator_root(&model, &sampled, Side::Left, &opts),
            "solve.left",
            &mut failures,
            &mut has_noconv,
        );
        timings.push(("solve", t.elapsed().as_secs_f64()));
        if let (Some(right), Some(left)) = (right, left) {
            let right_out = record(
                root_out(&right, model.a_matrix()),
                "solve.right",
                &mut failures,
                &mut has_noconv,
            );
            let left_out = record(
                root_out(&left, model.a_matrix()),
                "solve.left",
                &mut failures,
                &mut has_noconv,
            );
            if let (Some(r), Some(l)) = (right_out, left_out) {
                roots_out = Some(RootsOut { right: r, left: l });
            }
            roots = Some((right, left));
        }
    }

    // resonances
    let mut resonances_out: Option<ResonancesOut> = None;
    if tasks.contains(&Task::Resonances) {
        if let Some((right, _)) = &roots {
            if contour.is_deformed() {
                if let Some(set) = record(
                    classify_resonances(right, &contour),
                    "resonances",
                    &mut failures,
                    &mut has_noconv,
                ) {
                    for entry in &set.entries {
                        plot.resonances
                            .push((entry.value, classification_name(entry.classification)));
                    }
                    resonances_out = Some(ResonancesOut::new(&set, &contour));
                }
            } else {
                failures.push("resonances: the interval contour encloses no region".to_string());
            }
        }
    }

    // verify
    let mut verification_out: Option<VerificationOut> = None;
    if tasks.contains(&Task::Verify) {
        if let Some((right, left)) = &roots {
            let t = Instant::now();
            verification_out = run_verification(
                &VerifyInputs {
                    model: &model,
                    config,
                    contour: &contour,
                    sampled: &sampled,
                    right,
                    left,
                },
                &mut failures,
                &mut has_noconv,
            );
            timings.push(("verify", t.elapsed().as_secs_f64()));
        }
    }

    // sweep
    let mut sweep_out: Option<Vec<SweepRow>> = None;
    if tasks.contains(&Task::Sweep) && check_ok {
        if let Some(sweep) = &config.sweep {
            let t = Instant::now();
            let mut rows = Vec::with_capacity(sweep.grid.len());
            for &g in &sweep.grid {
                let scaled = model.with_coupling_scale(g);
                let adm_g = match record(
                    admissibility(&scaled, &sampled),
                    "sweep",
                    &mut failures,
                    &mut has_noconv,
                ) {
                    Some(a) => a,
                    None => break,
                };
                if !adm_g.pass_vk {
                    plot.trajectory.push(TrajectoryRow::Skipped { g });
                    rows.push(SweepRow {
                        g: fmt_f64(g),
                        skipped: true,
                        certified: None,
                        resonances: Vec::new(),
                    });
                    continue;
                }
                let solved = record(
                    solve_operator_root(&scaled, &sampled, Side::Right, &opts),
                    "sweep.solve",
                    &mut failures,
                    &mut has_noconv,
                )
                .and_then(|root| {
                    let eigenvalues = record(
                        eig_sorted(&root.z_matrix),
                        "sweep.solve",
                        &mut failures,
                        &mut has_noconv,
                    )?;
                    let set = if contour.is_deformed() {
                        record(
                            classify_resonances(&root, &contour),
                            "sweep.resonances",
                            &mut failures,
                            &mut has_noconv,
                        )?
                    } else {
                        return None;
                    };
                    Some((root, eigenvalues, set))
                });
                match solved {
                    Some((root, eigenvalues, set)) => {
                        let certified = root.certificate.certified;
                        for (index, &value) in eigenvalues.iter().enumerate() {
                            plot.trajectory.push(TrajectoryRow::Point {
                                g,
                                index,
                                value,
                                certified,
                            });
                        }
                        rows.push(SweepRow {
                            g: fmt_f64(g),
                            skipped: false,
                            certified: Some(certified),
                            resonances: set
                                .resonances()
                                .iter()
                                .map(|&z| crate::report::fmt_c64(z))
                                .collect(),
                        });
                    }
                    None => {
                        plot.trajectory.push(TrajectoryRow::Skipped { g });
                        rows.push(SweepRow {
                            g: fmt_f64(g),
                            skipped: true,
                            certified: None,
                            resonances: Vec::new(),
                        });
                    }
                }
            }
            sweep_out = Some(rows);
            timings.push(("sweep", t.elapsed().as_secs_f64()));
        }
    }

    // optional membership raster for plotting
    if config.output.emit_omega_grid && contour.is_deformed() {
        let resolution = config.output.omega_grid_resolution;
        let interval = contour.interval();
        let depth = plot
            .contour
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0f64, f64::max);
        let sign = contour.sign() as f64;
        for i in 0..resolution {
            for j in 0..resolution {
                let re = interval.alpha
                    + interval.width() * (i as f64 + 0.5) / resolution as f64;
                let im = sign * depth * (j as f64 + 0.5) / resolution as f64;
                let z = Complex64::new(re, im);
                let label = match region_membership(&contour, z) {
                    Membership::Inside => "inside",
                    Membership::Outside => "outside",
                    Membership::Boundary => "boundary",
                };
                plot.omega_grid.push((z, label));
            }
        }
    }

    let pass = failures.is_empty();
    let exit_code = if has_noconv {
        4
    } else if !pass {
        3
    } else {
        0
    };
    let report = RunReport {
        schema: REPORT_SCHEMA,
        tasks,
        model: ModelEcho::new(&model, &validation),
        contour: ContourEcho::new(&sampled, contour_kind(config)),
        admissibility: AdmissibilityOut::new(&adm),
        roots: roots_out,
        resonances: resonances_out,
        verification: verification_out,
        sweep: sweep_out,
        pass,
        failures,
    };
    Ok(PipelineOutcome {
        report,
        exit_code,
        plot,
        timings,
    })
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{header}")?;
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}

impl PlotData {
    /// Write the plot CSVs into `dir` and return the created paths.
    /// `trajectory.csv` appears only when a sweep ran, `omega_grid.csv`
    /// only when the raster was requested.
    pub fn write_csvs(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();

        let path = dir.join("contour.csv");
        let rows: Vec<String> = self
            .contour
            .iter()
            .map(|z| format!("{},{}", fmt_f64(z.re), fmt_f64(z.im)))
            .collect();
        write_csv(&path, "re,im", &rows)?;
        written.push(path);

        let path = dir.join("spectrum.csv");
        let rows: Vec<String> = self
            .spectrum
            .iter()
            .map(|&e| format!("{},{}", fmt_f64(e), fmt_f64(0.0)))
            .collect();
        write_csv(&path, "re,im", &rows)?;
        written.push(path);

        let path = dir.join("resonances.csv");
        let rows: Vec<String> = self
            .resonances
            .iter()
            .map(|(z, class)| format!("{},{},{class}", fmt_f64(z.re), fmt_f64(z.im)))
            .collect();
        write_csv(&path, "re,im,class", &rows)?;
        written.push(path);

        if !self.omega_grid.is_empty() {
            let path = dir.join("omega_grid.csv");
            let rows: Vec<String> = self
                .omega_grid
                .iter()
                .map(|(z, class)| format!("{},{},{class}", fmt_f64(z.re), fmt_f64(z.im)))
                .collect();
            write_csv(&path, "re,im,class", &rows)?;
            written.push(path);
        }

        if let Some(path) = self.write_trajectory(dir)? {
            written.push(path);
        }

        Ok(written)
    }

    /// Write `trajectory.csv` into `dir` when a sweep ran.
    pub fn write_trajectory(&self, dir: &Path) -> std::io::Result<Option<PathBuf>> {
        if self.trajectory.is_empty() {
            return Ok(None);
        }
        let path = dir.join("trajectory.csv");
        let rows: Vec<String> = self
            .trajectory
            .iter()
            .map(|row| match row {
                TrajectoryRow::Skipped { g } => format!("{},-1,,,skipped", fmt_f64(*g)),
                TrajectoryRow::Point {
                    g,
                    index,
                    value,
                    certified,
                } => format!(
                    "{},{},{},{},{}",
                    fmt_f64(*g),
                    index,
                    fmt_f64(value.re),
                    fmt_f64(value.im),
                    certified
                ),
            })
            .collect();
        write_csv(&path, "g,index,re,im,certified", &rows)?;
        Ok(Some(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const FIX1: &str = r#"{
        "model": {
            "interval": [0.0, 2.0],
            "a": [[[1.0, 0.0]]],
            "b": [[[[0.1, 0.0]]]],
            "c": [[[[0.1, 0.0]]]]
        },
        "contour": { "kind": "semi_ellipse", "depth": 1.0, "sign": -1 }
    }"#;

    #[test]
    fn default_run_passes_and_reports_everything() {
        let config = parse_config(FIX1).unwrap();
        let outcome = run_pipeline(&config).unwrap();
        assert_eq!(outcome.exit_code, 0, "failures: {:?}", outcome.report.failures);
        assert!(outcome.report.pass);
        let roots = outcome.report.roots.as_ref().unwrap();
        assert!(roots.right.certified);
        assert_eq!(roots.right.eigenvalues.len(), 1);
        let verification = outcome.report.verification.as_ref().unwrap();
        assert!(verification.riccati.pass);
        assert!(verification.factorization.pass);
        assert!(verification.jump.pass);
        assert!(verification.diagonalization.pass);
        assert!(verification.independence.pass);
        let resonances = outcome.report.resonances.as_ref().unwrap();
        assert_eq!(resonances.total, 1);
        assert_eq!(resonances.entries[0].classification, "resonance");
    }

    #[test]
    fn reports_are_bytewise_reproducible() {
        let config = parse_config(FIX1).unwrap();
        let a = run_pipeline(&config).unwrap().report.to_json();
        let b = run_pipeline(&config).unwrap().report.to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn strong_coupling_fails_check_without_force() {
        let strong = FIX1.replace("0.1", "0.3");
        let config = parse_config(&strong).unwrap();
        let outcome = run_pipeline(&config).unwrap();
        assert_eq!(outcome.exit_code, 3);
        assert!(!outcome.report.pass);
        assert!(outcome.report.roots.is_none());
        assert!(outcome.report.failures[0].starts_with("check:"));
    }

    #[test]
    fn force_produces_uncertified_roots() {
        let strong = FIX1.replace(
            "\"contour\"",
            "\"solver\": {\"force\": true}, \"tasks\": [\"solve\"], \"contour\"",
        );
        let strong = strong.replace("0.1", "0.3");
        let config = parse_config(&strong).unwrap();
        let outcome = run_pipeline(&config).unwrap();
        assert_eq!(outcome.exit_code, 0, "failures: {:?}", outcome.report.failures);
        let roots = outcome.report.roots.as_ref().unwrap();
        assert!(!roots.right.certified);
    }

    #[test]
    fn sweep_skips_inadmissible_scales() {
        let sweep = FIX1.replace(
            "\"contour\"",
            "\"tasks\": [\"sweep\"], \"sweep\": {\"grid\": [0.5, 1.0, 3.0]}, \"contour\"",
        );
        let config = parse_config(&sweep).unwrap();
        let outcome = run_pipeline(&config).unwrap();
        assert_eq!(outcome.exit_code, 0, "failures: {:?}", outcome.report.failures);
        let rows = outcome.report.sweep.as_ref().unwrap();
        assert_eq!(rows.len(), 3);
        assert!(!rows[0].skipped);
        assert!(!rows[1].skipped);
        assert!(rows[2].skipped);
        assert_eq!(rows[0].certified, Some(true));
        // A skipped scale contributes exactly one sentinel trajectory row.
        let sentinel = outcome
            .plot
            .trajectory
            .iter()
            .filter(|r| matches!(r, TrajectoryRow::Skipped { .. }))
            .count();
        assert_eq!(sentinel, 1);
    }

    #[test]
    fn plot_csvs_cover_the_run(){
        let config = parse_config(FIX1).unwrap();
        let outcome = run_pipeline(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = outcome.plot.write_csvs(dir.path()).unwrap();
        assert_eq!(written.len(), 3);
        let contour = std::fs::read_to_string(dir.path().join("contour.csv")).unwrap();
        assert_eq!(contour.lines().count(), 1025);
        assert!(contour.starts_with("re,im\n"));
        let resonances = std::fs::read_to_string(dir.path().join("resonances.csv")).unwrap();
        assert_eq!(resonances.lines().count(), 2);
        assert!(resonances.lines().nth(1).unwrap().ends_with(",resonance"));
    }
}
