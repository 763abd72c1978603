//! Finite-section discretization of the block operator and machine checks
//! of its similarity block diagonalization.
//!
//! The quadrature turns the band branch into `N` coupled levels: with
//! `s_j = sqrt(w_j)` (principal branch) the discretized operator is
//!
//! ```text
//!     L = [ A                 b(mu_j) s_j      ]     of size n + m N,
//!         [ s_j c(mu_j)       diag(mu_j I_m)   ]
//! ```
//!
//! whose Schur complement reproduces `M(z, Gamma)` with the *same* quadrature
//! exactly. The sampled Riccati solutions give the graph transform
//! `T = I + Q`, `Q = [[0, Y], [X, 0]]` with `X` rows `s_j x_j` and `Y`
//! columns `y_j s_j`; node-wise Riccati identities make
//!
//! ```text
//!     L (I + Q) = (I + Q) diag(A + BX, D + CY),
//!     (I - Q) L = diag(A - YC, D - XB) (I - Q)
//! ```
//!
//! hold to rounding, and `enorm(x) enorm(y) < 1` certifies that `I + Q` is
//! invertible, so the two diagonal forms split the spectrum of `L` into the
//! root spectrum and a cluster hugging the contour.

use ndarray::{s, Array2};
use ndarray_linalg::Determinant;
use num_complex::Complex64;

use crate::contour::{
    admissibility, distance_to_contour, sample_contour, Contour, QuadratureSpec, SampledContour,
};
use crate::error::{Error, Result};
use crate::linalg::{eig_sorted, eye, hausdorff_distance, spectral_norm};
use crate::model::FriedrichsModel;
use crate::schur::{resonances, Classification};
use crate::solver::{
    node_data, solve_operator_root, OperatorRoot, RiccatiSolutionSampled, Side, SolutionSide,
    SolverOptions,
};

/// The discretized block operator with its bookkeeping.
#[derive(Debug, Clone)]
pub struct DiscretizedBlockOperator {
    /// Dense `(n + m N) x (n + m N)` matrix.
    pub matrix: Array2<Complex64>,
    pub n: usize,
    pub m: usize,
    /// Number of quadrature nodes `N`.
    pub n_nodes: usize,
    /// Principal square roots of the complex weights.
    pub sqrt_weights: Vec<Complex64>,
    pub contour_hash: u64,
}

impl DiscretizedBlockOperator {
    pub fn dim(&self) -> usize {
        self.n + self.m * self.n_nodes
    }
}

/// Assemble the finite-section block operator for a sampled contour.
pub fn discretize_block_operator(
    model: &FriedrichsModel,
    sampled: &SampledContour,
) -> Result<DiscretizedBlockOperator> {
    let n = model.n();
    let m = model.m();
    let nn = sampled.len();
    let dim = n + m * nn;
    let data = node_data(model, sampled);
    let sqrt_weights: Vec<Complex64> = sampled.weights.iter().map(|w| w.sqrt()).collect();
    let mut matrix: Array2<Complex64> = Array2::zeros((dim, dim));
    matrix.slice_mut(s![..n, ..n]).assign(model.a_matrix());
    for (j, &mu) in sampled.nodes.iter().enumerate() {
        let sj = sqrt_weights[j];
        let col = n + j * m;
        matrix
            .slice_mut(s![..n, col..col + m])
            .assign(&data.b[j].mapv(|v| v * sj));
        matrix
            .slice_mut(s![col..col + m, ..n])
            .assign(&data.c[j].mapv(|v| v * sj));
        for i in 0..m {
            matrix[(col + i, col + i)] = mu;
        }
    }
    Ok(DiscretizedBlockOperator {
        matrix,
        n,
        m,
        n_nodes: nn,
        sqrt_weights,
        contour_hash: sampled.contour_hash,
    })
}

fn stacked_x(
    x: &RiccatiSolutionSampled,
    disc: &DiscretizedBlockOperator,
) -> Array2<Complex64> {
    let mut xd: Array2<Complex64> = Array2::zeros((disc.m * disc.n_nodes, disc.n));
    for (j, value) in x.node_values.iter().enumerate() {
        let sj = disc.sqrt_weights[j];
        xd.slice_mut(s![j * disc.m..(j + 1) * disc.m, ..])
            .assign(&value.mapv(|v| v * sj));
    }
    xd
}

fn stacked_y(
    y: &RiccatiSolutionSampled,
    disc: &DiscretizedBlockOperator,
) -> Array2<Complex64> {
    let mut yd: Array2<Complex64> = Array2::zeros((disc.n, disc.m * disc.n_nodes));
    for (j, value) in y.node_values.iter().enumerate() {
        let sj = disc.sqrt_weights[j];
        yd.slice_mut(s![.., j * disc.m..(j + 1) * disc.m])
            .assign(&value.mapv(|v| v * sj));
    }
    yd
}

/// Build the graph perturbation `Q` and the band-side diagonal block
/// `Z_D = D + C Y` from a sampled Riccati pair.
pub fn assemble_q(
    x: &RiccatiSolutionSampled,
    y: &RiccatiSolutionSampled,
    model: &FriedrichsModel,
    sampled: &SampledContour,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    if x.contour_hash != sampled.contour_hash || y.contour_hash != sampled.contour_hash {
        return Err(Error::ContourMismatch);
    }
    if x.side != SolutionSide::X || y.side != SolutionSide::Y {
        return Err(Error::WrongSpecialCase("assemble_q expects an (x, y) pair".into()));
    }
    let disc = discretize_block_operator(model, sampled)?;
    let dim = disc.dim();
    let n = disc.n;
    let xd = stacked_x(x, &disc);
    let yd = stacked_y(y, &disc);
    let mut q: Array2<Complex64> = Array2::zeros((dim, dim));
    q.slice_mut(s![..n, n..]).assign(&yd);
    q.slice_mut(s![n.., ..n]).assign(&xd);
    let c_block = disc.matrix.slice(s![n.., ..n]).to_owned();
    let mut z_d = disc.matrix.slice(s![n.., n..]).to_owned();
    z_d = z_d + c_block.dot(&yd);
    Ok((q, z_d))
}

/// All residuals of the block-diagonalization verification.
#[derive(Debug, Clone)]
pub struct DiagonalizationReport {
    /// `enorm(x) * enorm(y)`, the Neumann certificate for `I + Q`.
    pub q_norm_product: f64,
    /// `||Q||`.
    pub q_norm: f64,
    /// `|| L (I+Q) - (I+Q) diag(A + BX, D + CY) ||`.
    pub diag_residual_plus: f64,
    /// `|| (I-Q) L - diag(A - YC, D - XB) (I-Q) ||`.
    pub diag_residual_minus: f64,
    /// `|| Ztilde (I - YX) - (I - YX) Z ||` linking the two roots.
    pub similarity_residual: f64,
    /// `|| L [I; X] - [I; X] Z ||` for the computed right root `Z`.
    pub graph_residual: f64,
    /// Relative defect of `det(L - z) = det(D - z) det(M(z))` on a circle
    /// enclosing everything.
    pub md_factorization_residual: f64,
    /// Hausdorff distance between `spec(L)` and `spec(Z) U spec(Z_D)` after
    /// discarding eigenvalues hugging the contour.
    pub spectral_split_delta: f64,
    /// Number of eigenvalues discarded by the contour-proximity filter.
    pub excluded_near_contour: usize,
    /// `min |spec(Z) - spec(Z_D)|`.
    pub cluster_gap: f64,
    /// Lower bound `d - ||Z - A|| - ||C Y||` for that gap.
    pub cluster_gap_bound: f64,
}

/// Exclusion band around the contour for the spectral-split comparison;
/// the banded cluster of `L` converges to the contour only at the
/// quadrature rate, so eigenvalues this close to it cannot be paired
/// meaningfully.
const SPLIT_EXCLUSION: f64 = 1e-6;

/// Verify the block diagonalization induced by a root pair and its sampled
/// Riccati solutions.
pub fn verify_diagonalization(
    model: &FriedrichsModel,
    sampled: &SampledContour,
    right: &OperatorRoot,
    left: &OperatorRoot,
    x: &RiccatiSolutionSampled,
    y: &RiccatiSolutionSampled,
) -> Result<DiagonalizationReport> {
    if right.certificate.contour_hash != sampled.contour_hash
        || left.certificate.contour_hash != sampled.contour_hash
        || x.contour_hash != sampled.contour_hash
        || y.contour_hash != sampled.contour_hash
    {
        return Err(Error::ContourMismatch);
    }
    if right.side != Side::Right || left.side != Side::Left {
        return Err(Error::WrongSpecialCase(
            "verify_diagonalization expects a (right, left) root pair".into(),
        ));
    }
    let q_norm_product = x.enorm * y.enorm;
    if q_norm_product >= 1.0 {
        return Err(Error::NotContraction {
            product: q_norm_product,
        });
    }
    let disc = discretize_block_operator(model, sampled)?;
    let dim = disc.dim();
    let n = disc.n;
    let xd = stacked_x(x, &disc);
    let yd = stacked_y(y, &disc);
    let b_block = disc.matrix.slice(s![..n, n..]).to_owned();
    let c_block = disc.matrix.slice(s![n.., ..n]).to_owned();
    let d_block = disc.matrix.slice(s![n.., n..]).to_owned();
    let a = model.a_matrix();

    let (q, z_d) = assemble_q(x, y, model, sampled)?;
    let q_norm = spectral_norm(&q);
    let t_plus = eye(dim) + &q;
    let t_minus = eye(dim) - &q;

    let z_a = a + &b_block.dot(&xd);
    let zt_a = a - &yd.dot(&c_block);
    let zt_d = &d_block - &xd.dot(&b_block);

    let mut diag_plus: Array2<Complex64> = Array2::zeros((dim, dim));
    diag_plus.slice_mut(s![..n, ..n]).assign(&z_a);
    diag_plus.slice_mut(s![n.., n..]).assign(&z_d);
    let mut diag_minus: Array2<Complex64> = Array2::zeros((dim, dim));
    diag_minus.slice_mut(s![..n, ..n]).assign(&zt_a);
    diag_minus.slice_mut(s![n.., n..]).assign(&zt_d);

    let diag_residual_plus =
        spectral_norm(&(disc.matrix.dot(&t_plus) - t_plus.dot(&diag_plus)));
    let diag_residual_minus =
        spectral_norm(&(t_minus.dot(&disc.matrix) - diag_minus.dot(&t_minus)));

    // Root-to-root similarity through I - YX, with the integrals evaluated
    // by the shared quadrature.
    let yx = yd.dot(&xd);
    let i_minus_yx = eye(n) - &yx;
    let similarity_residual = spectral_norm(
        &(left.z_matrix.dot(&i_minus_yx) - i_minus_yx.dot(&right.z_matrix)),
    );

    // Graph residual against the computed root rather than the discrete
    // diagonal block, so it measures solver plus quadrature error together.
    let mut graph: Array2<Complex64> = Array2::zeros((dim, n));
    graph.slice_mut(s![..n, ..]).assign(&eye(n));
    graph.slice_mut(s![n.., ..]).assign(&xd);
    let graph_residual = spectral_norm(&(disc.matrix.dot(&graph) - graph.dot(&right.z_matrix)));

    // Determinant factorization on a circle comfortably enclosing band,
    // contour and spectrum, in log form to dodge overflow for large N.
    let depth = sampled
        .nodes
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let interval = sampled.interval();
    let center = Complex64::new(interval.midpoint(), 0.0);
    let radius = interval.width() + depth + 1.0;
    let data = node_data(model, sampled);
    let mut md_residual = 0.0f64;
    for k in 0..8 {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
        let z = center + Complex64::new(radius * theta.cos(), radius * theta.sin());
        let l_shift = &disc.matrix - &eye(dim).mapv(|v| v * z);
        let (sign_l, ln_l) = l_shift
            .sln_det()
            .map_err(|_| Error::SingularResolvent { node: 0 })?;
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] -= z;
        }
        for (j, (&mu, &w)) in sampled.nodes.iter().zip(&sampled.weights).enumerate() {
            let factor = w / (mu - z);
            m = m - data.k_prime[j].mapv(|v| v * factor);
        }
        let (sign_m, ln_m) = m
            .sln_det()
            .map_err(|_| Error::SingularResolvent { node: 0 })?;
        let mut ln_d = 0.0f64;
        let mut sign_d = Complex64::new(1.0, 0.0);
        for &mu in &sampled.nodes {
            let term = mu - z;
            ln_d += (model.m() as f64) * term.norm().ln();
            let unit = term / term.norm();
            for _ in 0..model.m() {
                sign_d *= unit;
            }
        }
        let ratio = sign_l / (sign_d * sign_m) * (ln_l - ln_d - ln_m).exp();
        md_residual = md_residual.max((ratio - Complex64::new(1.0, 0.0)).norm());
    }

    // Spectral split: spec(L) against spec(Z) U spec(Z_D), both filtered
    // away from the contour where the banded cluster cannot be paired.
    let eig_l = eig_sorted(&disc.matrix)?;
    let mut eig_model = eig_sorted(&right.z_matrix)?;
    eig_model.extend(eig_sorted(&z_d)?);
    let far = |v: &Complex64| distance_to_contour(&sampled.contour, *v) > SPLIT_EXCLUSION;
    let kept_l: Vec<Complex64> = eig_l.iter().cloned().filter(|v| far(v)).collect();
    let kept_model: Vec<Complex64> = eig_model.iter().cloned().filter(|v| far(v)).collect();
    let excluded_near_contour = (eig_l.len() - kept_l.len()) + (eig_model.len() - kept_model.len());
    let spectral_split_delta = hausdorff_distance(&kept_l, &kept_model);

    let eig_z = eig_sorted(&right.z_matrix)?;
    let eig_zd = eig_sorted(&z_d)?;
    let mut cluster_gap = f64::INFINITY;
    for p in &eig_z {
        for q_val in &eig_zd {
            cluster_gap = cluster_gap.min((p - q_val).norm());
        }
    }
    let adm = admissibility(model, sampled)?;
    let cy = c_block.dot(&yd);
    let cluster_gap_bound =
        adm.d - spectral_norm(&(&right.z_matrix - a)) - spectral_norm(&cy);

    Ok(DiagonalizationReport {
        q_norm_product,
        q_norm,
        diag_residual_plus,
        diag_residual_minus,
        similarity_residual,
        graph_residual,
        md_factorization_residual: md_residual,
        spectral_split_delta,
        excluded_near_contour,
        cluster_gap,
        cluster_gap_bound,
    })
}

/// Agreement of roots and resonances computed on two different contours.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    /// `|| Z(Gamma_1) - Z(Gamma_2) ||`.
    pub root_delta: f64,
    /// Hausdorff distance between the resonance sets restricted to the
    /// intersection of the two enclosed regions.
    pub resonance_delta: f64,
    /// Resonances of each root inside both regions.
    pub common_a: usize,
    pub common_b: usize,
}

/// Solve on two contours of the same orientation and band, and measure how
/// far roots and common-region resonances drift.
pub fn contour_independence(
    model: &FriedrichsModel,
    contour_a: &Contour,
    contour_b: &Contour,
    quad: &QuadratureSpec,
    opts: &SolverOptions,
) -> Result<IndependenceReport> {
    if contour_a.sign() != contour_b.sign() || contour_a.interval() != contour_b.interval() {
        return Err(Error::ContourMismatch);
    }
    let sampled_a = sample_contour(contour_a, quad.order, quad.panels_per_segment)?;
    let sampled_b = sample_contour(contour_b, quad.order, quad.panels_per_segment)?;
    let root_a = solve_operator_root(model, &sampled_a, Side::Right, opts)?;
    let root_b = solve_operator_root(model, &sampled_b, Side::Right, opts)?;
    let root_delta = spectral_norm(&(&root_a.z_matrix - &root_b.z_matrix));
    let in_both = |v: Complex64| {
        crate::contour::region_membership(contour_a, v) == crate::contour::Membership::Inside
            && crate::contour::region_membership(contour_b, v) == crate::contour::Membership::Inside
    };
    let common = |root: &OperatorRoot, contour: &Contour| -> Result<Vec<Complex64>> {
        Ok(resonances(root, contour)?
            .entries
            .iter()
            .filter(|e| e.classification == Classification::Resonance && in_both(e.value))
            .map(|e| e.value)
            .collect())
    };
    let common_set_a = common(&root_a, contour_a)?;
    let common_set_b = common(&root_b, contour_b)?;
    let resonance_delta = hausdorff_distance(&common_set_a, &common_set_b);
    Ok(IndependenceReport {
        root_delta,
        resonance_delta,
        common_a: common_set_a.len(),
        common_b: common_set_b.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_contour, ContourSpec};
    use crate::model::{Interval, MatrixPolynomial};
    use crate::solver::{riccati_solution_x, riccati_solution_y};
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

    fn two_level_model() -> FriedrichsModel {
        let a = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.3, 0.0)]];
        let b = MatrixPolynomial::new(vec![array![[c(0.1, 0.0)], [c(0.1, 0.0)]]]).unwrap();
        let cc = MatrixPolynomial::new(vec![array![[c(0.1, 0.0), c(0.1, 0.0)]]]).unwrap();
        FriedrichsModel::new(band(), a, b, cc).unwrap()
    }

    fn semicircle_sampled(order: usize) -> SampledContour {
        let contour =
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: -1 }).unwrap();
        sample_contour(&contour, order, 4).unwrap()
    }

    fn full_verification(model: &FriedrichsModel, sampled: &SampledContour) -> DiagonalizationReport {
        let opts = SolverOptions::default();
        let right = solve_operator_root(model, sampled, Side::Right, &opts).unwrap();
        let left = solve_operator_root(model, sampled, Side::Left, &opts).unwrap();
        let x = riccati_solution_x(model, sampled, &right).unwrap();
        let y = riccati_solution_y(model, sampled, &left).unwrap();
        verify_diagonalization(model, sampled, &right, &left, &x, &y).unwrap()
    }

    #[test]
    fn zero_coupling_block_operator_is_block_diagonal() {
        let model = rank_one_model(0.0);
        let sampled = semicircle_sampled(64);
        let disc = discretize_block_operator(&model, &sampled).unwrap();
        assert_eq!(disc.dim(), 1 + 256);
        let eigs = eig_sorted(&disc.matrix).unwrap();
        // Eigenvalues are exactly A's eigenvalue plus the nodes.
        let mut expected: Vec<Complex64> = sampled.nodes.clone();
        expected.push(c(1.0, 0.0));
        expected.sort_by(|p, q| {
            p.re.partial_cmp(&q.re)
                .unwrap()
                .then(p.im.partial_cmp(&q.im).unwrap())
        });
        assert!(hausdorff_distance(&eigs, &expected) <= 1e-10);
    }

    #[test]
    fn rank_one_diagonalization_residuals_are_tiny() {
        let model = rank_one_model(0.1);
        let sampled = semicircle_sampled(64);
        let report = full_verification(&model, &sampled);
        assert!(report.q_norm_product < 0.04);
        assert!(report.q_norm <= 0.2);
        assert!(report.diag_residual_plus <= 1e-12, "{}", report.diag_residual_plus);
        assert!(report.diag_residual_minus <= 1e-12, "{}", report.diag_residual_minus);
        assert!(report.similarity_residual <= 1e-12);
        assert!(report.graph_residual <= 1e-10);
        assert!(report.md_factorization_residual <= 1e-11);
        assert!(report.spectral_split_delta <= 1e-9);
        assert!(report.cluster_gap >= report.cluster_gap_bound - 1e-12);
        assert!(report.cluster_gap_bound > 0.0);
    }

    #[test]
    fn two_level_cluster_gap_beats_its_bound() {
        let model = two_level_model();
        let sampled = semicircle_sampled(64);
        let report = full_verification(&model, &sampled);
        assert_abs_diff_eq!(report.cluster_gap, 0.694, epsilon = 1e-2);
        assert!(report.cluster_gap >= report.cluster_gap_bound);
        assert!(report.cluster_gap_bound >= 0.5);
        assert!(report.spectral_split_delta <= 1e-9);
    }

    #[test]
    fn mismatched_samplings_are_refused() {
        let model = rank_one_model(0.1);
        let fine = semicircle_sampled(128);
        let coarse = semicircle_sampled(64);
        let opts = SolverOptions::default();
        let right = solve_operator_root(&model, &fine, Side::Right, &opts).unwrap();
        let left = solve_operator_root(&model, &coarse, Side::Left, &opts).unwrap();
        let x = riccati_solution_x(&model, &fine, &right).unwrap();
        let y = riccati_solution_y(&model, &coarse, &left).unwrap();
        assert!(matches!(
            verify_diagonalization(&model, &coarse, &right, &left, &x, &y),
            Err(Error::ContourMismatch)
        ));
    }

    #[test]
    fn semicircle_and_polyline_agree_on_the_resonance() {
        let model = rank_one_model(0.1);
        let semicircle =
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: -1 }).unwrap();
        let polyline = build_contour(
            band(),
            &ContourSpec::Polyline {
                vertices: vec![c(1.0, -0.7)],
                sign: -1,
            },
        )
        .unwrap();
        let report = contour_independence(
            &model,
            &semicircle,
            &polyline,
            &QuadratureSpec::default(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(report.root_delta <= 1e-9, "{}", report.root_delta);
        assert!(report.resonance_delta <= 1e-9);
        assert_eq!(report.common_a, 1);
        assert_eq!(report.common_b, 1);
    }

    #[test]
    fn mirrored_contours_cannot_be_compared() {
        let model = rank_one_model(0.1);
        let lower =
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: -1 }).unwrap();
        let upper =
            build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: 1 }).unwrap();
        assert!(matches!(
            contour_independence(
                &model,
                &lower,
                &upper,
                &QuadratureSpec::default(),
                &SolverOptions::default()
            ),
            Err(Error::ContourMismatch)
        ));
    }
}
