//! Gauss–Legendre quadrature on the reference interval `[-1, 1]`.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
//! iteration from the classical Chebyshev-like initial guesses; weights are
//! `w_i = 2 / ((1 - x_i^2) P_n'(x_i)^2)`. The rule integrates polynomials of
//! degree `2n - 1` exactly and converges spectrally for analytic integrands,
//! which is what makes composite panels of moderate order accurate to machine
//! precision on the smooth contour parametrizations used elsewhere.

use std::f64::consts::PI;

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    debug_assert!(n >= 1);
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), safe away from the endpoints.
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes (ascending) and weights of the `order`-point Gauss–Legendre rule.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    if order == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Root i counted from +1 downwards.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // One polishing step after convergence.
        let (p, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            x -= p / d;
            dp = legendre_with_derivative(n, x).1;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        // The middle node of an odd rule is exactly zero.
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two() {
        for order in [1, 2, 3, 5, 8, 16, 64, 128, 257] {
            let (_, w) = gauss_legendre(order);
            let sum: f64 = w.iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn order_five_matches_reference_nodes() {
        let (x, w) = gauss_legendre(5);
        let x_ref = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let w_ref = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(x[i], x_ref[i], epsilon = 1e-14);
            assert_abs_diff_eq!(w[i], w_ref[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn integrates_monomials_exactly_up_to_degree_2n_minus_1() {
        for order in [2usize, 4, 7, 12] {
            let (x, w) = gauss_legendre(order);
            for k in 0..2 * order {
                let approx_val: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * xi.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 0 {
                    2.0 / (k as f64 + 1.0)
                } else {
                    0.0
                };
                assert_abs_diff_eq!(approx_val, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn nodes_are_ascending_and_symmetric() {
        let (x, w) = gauss_legendre(64);
        for i in 1..x.len() {
            assert!(x[i] > x[i - 1]);
        }
        for i in 0..x.len() {
            assert_abs_diff_eq!(x[i], -x[x.len() - 1 - i], epsilon = 1e-15);
            assert_abs_diff_eq!(w[i], w[w.len() - 1 - i], epsilon = 1e-15);
        }
    }
}
