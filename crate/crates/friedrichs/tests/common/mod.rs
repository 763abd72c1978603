//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use ndarray::{array, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use friedrichs::contour::{
    admissibility, build_contour, sample_contour, AdmissibilityReport, Contour, ContourSpec,
    SampledContour,
};
use friedrichs::linalg::eigh_ascending;
use friedrichs::model::{FriedrichsModel, Interval, MatrixPolynomial};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn band() -> Interval {
    Interval::new(0.0, 2.0).unwrap()
}

/// Rank-one model: one level at 1.0, constant couplings `g`.
pub fn fix1_model(g: f64) -> FriedrichsModel {
    let a = array![[c(1.0, 0.0)]];
    let b = MatrixPolynomial::new(vec![array![[c(g, 0.0)]]]).unwrap();
    let cc = MatrixPolynomial::new(vec![array![[c(g, 0.0)]]]).unwrap();
    FriedrichsModel::new(band(), a, b, cc).unwrap()
}

/// Two levels at 0.9 and 1.3, both coupled with strength 0.1.
pub fn fix2_model() -> FriedrichsModel {
    let a = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.3, 0.0)]];
    let b = MatrixPolynomial::new(vec![array![[c(0.1, 0.0)], [c(0.1, 0.0)]]]).unwrap();
    let cc = MatrixPolynomial::new(vec![array![[c(0.1, 0.0), c(0.1, 0.0)]]]).unwrap();
    FriedrichsModel::new(band(), a, b, cc).unwrap()
}

pub fn semicircle() -> Contour {
    build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: -1 }).unwrap()
}

pub fn polyline() -> Contour {
    build_contour(
        band(),
        &ContourSpec::Polyline {
            vertices: vec![c(1.0, -0.7)],
            sign: -1,
        },
    )
    .unwrap()
}

/// The default sampling used throughout: order 64, 4 panels per segment.
pub fn default_sampled(contour: &Contour) -> SampledContour {
    sample_contour(contour, 64, 4).unwrap()
}

pub const FIX1_CONFIG: &str = r#"{
    "model": {
        "interval": [0.0, 2.0],
        "a": [[[1.0, 0.0]]],
        "b": [[[[0.1, 0.0]]]],
        "c": [[[[0.1, 0.0]]]]
    },
    "contour": { "kind": "semi_ellipse", "depth": 1.0, "sign": -1 }
}"#;

pub const FIX2_CONFIG: &str = r#"{
    "model": {
        "interval": [0.0, 2.0],
        "a": [[[0.9, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.3, 0.0]]],
        "b": [[[[0.1, 0.0]], [[0.1, 0.0]]]],
        "c": [[[[0.1, 0.0], [0.1, 0.0]]]]
    },
    "contour": { "kind": "semi_ellipse", "depth": 1.0, "sign": -1 }
}"#;

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |_| random_complex(rng))
}

/// Random Hermitian block with spectrum mapped affinely into
/// `(0.45, 1.55)`, comfortably inside the band and away from the
/// default contour.
fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<Complex64> {
    let g = random_matrix(rng, n, n);
    let h: Array2<Complex64> = (&g + &g.t().mapv(|v| v.conj())).mapv(|v| 0.5 * v);
    let eigs = eigh_ascending(&h).unwrap();
    let (lo, hi) = (eigs[0], eigs[n - 1]);
    let (target_lo, target_hi) = (0.45, 1.55);
    if hi - lo < 1e-9 {
        let shift = 0.45 + 1.1 * rng.gen::<f64>();
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[(i, i)] = c(shift, 0.0);
        }
        return a;
    }
    let scale = (target_hi - target_lo) / (hi - lo);
    let offset = target_lo - scale * lo;
    let mut a = h.mapv(|v| v * scale);
    for i in 0..n {
        a[(i, i)] += offset;
    }
    a
}

fn random_poly(rng: &mut ChaCha8Rng, rows: usize, cols: usize, degree: usize) -> MatrixPolynomial {
    let coefficients = (0..=degree)
        .map(|_| random_matrix(rng, rows, cols).mapv(|v| 0.3 * v))
        .collect();
    MatrixPolynomial::new(coefficients).unwrap()
}

/// Like [`random_admissible_pair`] but with a purely real model, so that
/// mirroring the contour conjugates everything in sight.
pub fn random_real_admissible_model(rng: &mut ChaCha8Rng) -> FriedrichsModel {
    loop {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=2);
        let degree = rng.gen_range(0..=2);
        let g = Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, 0.0));
        let h: Array2<Complex64> = (&g + &g.t().mapv(|v| v.conj())).mapv(|v| 0.5 * v);
        let eigs = eigh_ascending(&h).unwrap();
        let (lo, hi) = (eigs[0], eigs[n - 1]);
        let a = if hi - lo < 1e-9 {
            let mut a: Array2<Complex64> = Array2::zeros((n, n));
            let shift = 0.45 + 1.1 * rng.gen::<f64>();
            for i in 0..n {
                a[(i, i)] = c(shift, 0.0);
            }
            a
        } else {
            let scale = 1.1 / (hi - lo);
            let offset = 0.45 - scale * lo;
            let mut a = h.mapv(|v| v * scale);
            for i in 0..n {
                a[(i, i)] += offset;
            }
            a
        };
        let real_poly = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
            MatrixPolynomial::new(
                (0..=degree)
                    .map(|_| {
                        Array2::from_shape_fn((rows, cols), |_| {
                            c(0.3 * (rng.gen::<f64>() - 0.5), 0.0)
                        })
                    })
                    .collect(),
            )
            .unwrap()
        };
        let b = real_poly(rng, n, m);
        let cc = real_poly(rng, m, n);
        let model = match FriedrichsModel::new(band(), a, b, cc) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let sampled = sample_contour(&semicircle(), 32, 2).unwrap();
        let raw = admissibility(&model, &sampled).unwrap();
        let product = raw.enorm_b * raw.enorm_c;
        if product < 1e-12 {
            continue;
        }
        let scale = (0.8 * 0.25 * raw.d * raw.d / product).sqrt();
        return model.with_coupling_scale(scale);
    }
}

/// A random model over the default band, coupled just strongly enough to
/// stay admissible on the default semicircle: the couplings are rescaled
/// so their energy-norm product lands at 80% of `d^2/4`.
pub fn random_admissible_pair(
    rng: &mut ChaCha8Rng,
) -> (FriedrichsModel, SampledContour, AdmissibilityReport) {
    loop {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=2);
        let degree = rng.gen_range(0..=2);
        let a = random_hermitian(rng, n);
        let b = random_poly(rng, n, m, degree);
        let cc = random_poly(rng, m, n, degree);
        let model = match FriedrichsModel::new(band(), a, b, cc) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let sampled = sample_contour(&semicircle(), 32, 2).unwrap();
        let raw = admissibility(&model, &sampled).unwrap();
        let product = raw.enorm_b * raw.enorm_c;
        if product < 1e-12 {
            continue;
        }
        let scale = (0.8 * 0.25 * raw.d * raw.d / product).sqrt();
        let scaled = model.with_coupling_scale(scale);
        let report = admissibility(&scaled, &sampled).unwrap();
        assert!(report.pass_vk, "rescaled pair must be admissible");
        return (scaled, sampled, report);
    }
}
