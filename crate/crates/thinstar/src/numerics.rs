//! Small numerical helpers shared across modules: Gauss–Legendre rules,
//! composite quadrature and least-squares polynomial fits.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const PANEL_ORDER: usize = 24;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Composite 24-point Gauss–Legendre quadrature of `f` over [a, b] with
/// `panels` equal panels. Exact for polynomials of degree < 48 per panel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = panel_rule();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + 0.5 * width * x);
        }
        total += 0.5 * width * acc;
    }
    total
}

/// Least-squares fit of `y ≈ c_0 + c_1 x + … + c_d x^d`; returns coefficients
/// in increasing degree and the root-mean-square residual.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> (Vec<f64>, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() > degree, "need more samples than the fit degree");
    let rows = x.len();
    let a = DMatrix::from_fn(rows, degree + 1, |r, c| x[r].powi(c as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-14).expect("SVD computed with both factors");
    let resid = &a * &coef - &b;
    let rms = (resid.norm_squared() / rows as f64).sqrt();
    (coef.iter().copied().collect(), rms)
}

/// Straight-line fit `y ≈ intercept + slope x`; returns (slope, intercept, rms).
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (c, rms) = polyfit(x, y, 1);
    (c[1], c[0], rms)
}

/// Solves a symmetric tridiagonal system (diagonal `d`, off-diagonal `e`)
/// by the Thomas algorithm. `e[j]` couples unknowns `j` and `j+1`.
pub fn solve_tridiagonal(d: &[f64], e: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert_eq!(rhs.len(), n);
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut piv = d[0];
    y[0] = rhs[0] / piv;
    for j in 1..n {
        c[j - 1] = e[j - 1] / piv;
        piv = d[j] - e[j - 1] * c[j - 1];
        y[j] = (rhs[j] - e[j - 1] * y[j - 1]) / piv;
    }
    for j in (0..n - 1).rev() {
        y[j] -= c[j] * y[j + 1];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_relative_eq!(m12, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_quadrature_of_oscillatory_integrand() {
        let v = integrate(|x| (7.0 * x).sin().powi(2), 0.0, 3.0, 8);
        let exact = 1.5 - (42.0_f64).sin() / 28.0;
        assert_relative_eq!(v, exact, epsilon = 1e-13);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (s, c, r) = line_fit(&x, &y);
        assert_relative_eq!(s, -0.5, epsilon = 1e-12);
        assert_relative_eq!(c, 2.0, epsilon = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn thomas_matches_dense_solve() {
        let d = [4.0, 5.0, 6.0, 7.0];
        let e = [1.0, -2.0, 0.5];
        let b = [1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(&d, &e, &b);
        let m = DMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                d[i]
            } else if j == i + 1 {
                e[i]
            } else if i == j + 1 {
                e[j]
            } else {
                0.0
            }
        });
        let r = m * DVector::from_column_slice(&x) - DVector::from_column_slice(&b);
        assert!(r.norm() < 1e-13);
    }
}
