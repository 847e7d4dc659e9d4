//! Functions living on one edge `[0, ℓ]` of the star, vanishing at the far
//! end `x = ℓ`.
//!
//! Two representations are used. [`TrigPoly`] is closed-form and closed under
//! the resonant solve needed by the recursion; [`GridFunction`] carries
//! uniform samples produced by the finite-element path.

use crate::numerics::integrate;
use crate::{Error, Result};

/// `f(s) = R(s) + P(s)·sin(ωs) + Q(s)·cos(ωs)` in the far-end coordinate
/// `s = ℓ − x`. Polynomials are stored by increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub length: f64,
    pub omega: f64,
    pub poly: Vec<f64>,
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

fn poly_eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn poly_axpy(y: &mut Vec<f64>, a: f64, x: &[f64]) {
    if y.len() < x.len() {
        y.resize(x.len(), 0.0);
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn trim(c: &mut Vec<f64>) {
    while c.last() == Some(&0.0) {
        c.pop();
    }
}

impl TrigPoly {
    pub fn zero(omega: f64, length: f64) -> Self {
        TrigPoly { length, omega, poly: Vec::new(), sin: Vec::new(), cos: Vec::new() }
    }

    /// `A·sin(ω(ℓ − x))`, the limit eigenfunction profile on one edge.
    pub fn sine(amplitude: f64, omega: f64, length: f64) -> Self {
        let mut f = TrigPoly::zero(omega, length);
        if amplitude != 0.0 {
            f.sin = vec![amplitude];
        }
        f
    }

    /// Polynomial in the far-end coordinate, `Σ c_k s^k` (no trigonometric part).
    pub fn polynomial(coeffs: Vec<f64>, omega: f64, length: f64) -> Self {
        let mut f = TrigPoly::zero(omega, length);
        f.poly = coeffs;
        trim(&mut f.poly);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().chain(&self.sin).chain(&self.cos).all(|&c| c == 0.0)
    }

    pub fn value_s(&self, s: f64) -> f64 {
        let (sn, cs) = (self.omega * s).sin_cos();
        poly_eval(&self.poly, s) + poly_eval(&self.sin, s) * sn + poly_eval(&self.cos, s) * cs
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_s(self.length - x)
    }

    /// Derivative with respect to `s`.
    pub fn d_ds(&self) -> TrigPoly {
        let mut out = TrigPoly::zero(self.omega, self.length);
        out.poly = poly_deriv(&self.poly);
        // (P sin)' = P' sin + ωP cos ; (Q cos)' = Q' cos − ωQ sin
        out.sin = poly_deriv(&self.sin);
        poly_axpy(&mut out.sin, -self.omega, &self.cos);
        out.cos = poly_deriv(&self.cos);
        poly_axpy(&mut out.cos, self.omega, &self.sin);
        trim(&mut out.poly);
        trim(&mut out.sin);
        trim(&mut out.cos);
        out
    }

    /// `order`-th derivative with respect to the edge coordinate `x`.
    pub fn deriv_x(&self, order: usize) -> TrigPoly {
        let mut f = self.clone();
        for _ in 0..order {
            f = f.d_ds();
        }
        if order % 2 == 1 {
            f.scale(-1.0);
        }
        f
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.poly.iter_mut().chain(self.sin.iter_mut()).chain(self.cos.iter_mut()) {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> TrigPoly {
        let mut f = self.clone();
        f.scale(a);
        f
    }

    /// `self += a·other`; both must share the same edge and frequency.
    pub fn axpy(&mut self, a: f64, other: &TrigPoly) {
        assert!(
            self.omega == other.omega && self.length == other.length,
            "mixing trig polynomials with different frequency or edge"
        );
        poly_axpy(&mut self.poly, a, &other.poly);
        poly_axpy(&mut self.sin, a, &other.sin);
        poly_axpy(&mut self.cos, a, &other.cos);
    }

    /// Particular solution `w` of `−w'' − ω² w = self` with `w(s = 0) = 0`.
    ///
    /// Trigonometric parts resonate and raise the polynomial degree by one;
    /// the polynomial part has a polynomial particular solution whose value at
    /// the far end is cancelled with a cosine.
    pub fn solve_resonant(&self) -> TrigPoly {
        let w = self.omega;
        let mut out = TrigPoly::zero(w, self.length);

        // −U'' + 2ωV' = P,  −V'' − 2ωU' = Q, matched degree by degree from the top.
        let d = self.sin.len().max(self.cos.len());
        if d > 0 {
            let mut u = vec![0.0; d + 2];
            let mut v = vec![0.0; d + 2];
            for k in (0..d).rev() {
                let p = self.sin.get(k).copied().unwrap_or(0.0);
                let q = self.cos.get(k).copied().unwrap_or(0.0);
                let kk = (k + 2) as f64 * (k + 1) as f64;
                v[k + 1] = (p + kk * u[k + 2]) / (2.0 * w * (k + 1) as f64);
                u[k + 1] = -(q + kk * v[k + 2]) / (2.0 * w * (k + 1) as f64);
            }
            out.sin = u;
            out.cos = v;
        }

        // w = −(1/ω²) Σ_j (−1/ω²)^j R^{(2j)}
        if !self.poly.is_empty() {
            let mut term = self.poly.clone();
            let mut coef = -1.0 / (w * w);
            let mut acc: Vec<f64> = Vec::new();
            while !term.is_empty() {
                poly_axpy(&mut acc, coef, &term);
                term = poly_deriv(&poly_deriv(&term));
                coef *= -1.0 / (w * w);
            }
            let at_end = acc.first().copied().unwrap_or(0.0);
            out.poly = acc;
            poly_axpy(&mut out.cos, -at_end, &[1.0]);
        }
        trim(&mut out.poly);
        trim(&mut out.sin);
        trim(&mut out.cos);
        out
    }

    fn panels(&self) -> usize {
        let deg = self.poly.len().max(self.sin.len()).max(self.cos.len());
        ((self.omega * self.length / std::f64::consts::PI).ceil() as usize + deg / 4 + 2).max(2)
    }
}

/// Uniform samples on `[0, ℓ]`; `values[0]` sits at the vertex and the last
/// sample at the Dirichlet end.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub length: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(length: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 5 {
            return Err(Error::config("grid edge function needs at least 5 samples"));
        }
        Ok(GridFunction { length, values })
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    /// Piecewise-linear interpolation.
    pub fn value(&self, x: f64) -> f64 {
        let h = self.spacing();
        let n = self.values.len() - 1;
        let t = (x / h).clamp(0.0, n as f64);
        let j = (t.floor() as usize).min(n - 1);
        let r = t - j as f64;
        self.values[j] * (1.0 - r) + self.values[j + 1] * r
    }

    /// One-sided fourth-order difference at the vertex.
    pub fn derivative_at_zero(&self) -> f64 {
        let f = &self.values;
        (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * self.spacing())
    }

    pub fn derivative_at_end(&self) -> f64 {
        let f = &self.values;
        let n = f.len() - 1;
        (25.0 * f[n] - 48.0 * f[n - 1] + 36.0 * f[n - 2] - 16.0 * f[n - 3] + 3.0 * f[n - 4]) / (12.0 * self.spacing())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeFunction {
    Analytic(TrigPoly),
    Grid(GridFunction),
}

/// One function per edge, indexed 0..3 for edges 1..3.
pub type EdgeTriple = [EdgeFunction; 3];

impl EdgeFunction {
    pub fn length(&self) -> f64 {
        match self {
            EdgeFunction::Analytic(t) => t.length,
            EdgeFunction::Grid(g) => g.length,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            EdgeFunction::Analytic(t) => t.value(x),
            EdgeFunction::Grid(g) => g.value(x),
        }
    }

    /// `(f(0), f'(0))`.
    pub fn vertex_trace(&self) -> (f64, f64) {
        match self {
            EdgeFunction::Analytic(t) => (t.value_s(t.length), t.deriv_x(1).value_s(t.length)),
            EdgeFunction::Grid(g) => (g.values[0], g.derivative_at_zero()),
        }
    }

    pub fn derivative_at_end(&self) -> f64 {
        match self {
            EdgeFunction::Analytic(t) => t.deriv_x(1).value_s(0.0),
            EdgeFunction::Grid(g) => g.derivative_at_end(),
        }
    }

    pub fn as_analytic(&self) -> Option<&TrigPoly> {
        match self {
            EdgeFunction::Analytic(t) => Some(t),
            EdgeFunction::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridFunction> {
        match self {
            EdgeFunction::Grid(g) => Some(g),
            EdgeFunction::Analytic(_) => None,
        }
    }
}

/// `∫_0^ℓ w(x)·f(x)·g(x) dx` for closed-form edge functions, where `w` is a
/// constant weight (h² for constant radii).
pub fn analytic_l2(f: &TrigPoly, g: &TrigPoly, weight: f64) -> f64 {
    let panels = f.panels().max(g.panels());
    weight * integrate(|s| f.value_s(s) * g.value_s(s), 0.0, f.length, panels)
}

/// `∫_0^ℓ w·f'(x)·g'(x) dx`.
pub fn analytic_energy(f: &TrigPoly, g: &TrigPoly, weight: f64) -> f64 {
    let (df, dg) = (f.d_ds(), g.d_ds());
    analytic_l2(&df, &dg, weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn vertex_trace_of_quarter_wave() {
        let f = EdgeFunction::Analytic(TrigPoly::sine(1.0, PI / 2.0, 1.0));
        let (v, d) = f.vertex_trace();
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn vertex_trace_of_zero_function() {
        let f = EdgeFunction::Analytic(TrigPoly::sine(0.0, 3.7, 1.2));
        assert_eq!(f.vertex_trace(), (0.0, 0.0));
    }

    #[test]
    fn grid_trace_matches_exact_derivative() {
        let n = 2001;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let x = j as f64 / (n - 1) as f64;
                (PI * (1.0 - x) / 2.0).sin()
            })
            .collect();
        let g = EdgeFunction::Grid(GridFunction::new(1.0, vals).unwrap());
        let (v, d) = g.vertex_trace();
        assert!((v - 1.0).abs() < 1e-8);
        assert!(d.abs() < 1e-8);
        assert!((g.derivative_at_end() + PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn grid_needs_five_samples() {
        assert!(GridFunction::new(1.0, vec![1.0, 0.5, 0.0]).is_err());
    }

    fn residual(w: &TrigPoly, f: &TrigPoly, s: f64) -> f64 {
        let wpp = w.d_ds().d_ds();
        -wpp.value_s(s) - w.omega * w.omega * w.value_s(s) - f.value_s(s)
    }

    #[test]
    fn resonant_solve_satisfies_ode_and_far_end_condition() {
        let om = 1.9;
        let mut f = TrigPoly::zero(om, 1.4);
        f.poly = vec![0.3, -1.0, 0.25];
        f.sin = vec![1.0, 0.5, -0.2];
        f.cos = vec![-0.7, 0.0, 0.1, 0.05];
        let w = f.solve_resonant();
        assert!(w.value_s(0.0).abs() < 1e-14);
        for &s in &[0.0, 0.3, 0.77, 1.4] {
            assert!(residual(&w, &f, s).abs() < 1e-12, "residual at {s}");
        }
    }

    #[test]
    fn x_derivative_flips_sign() {
        let f = TrigPoly::sine(2.0, 1.3, 1.0);
        let d = f.deriv_x(1);
        let x = 0.4;
        let fd = (f.value(x + 1e-6) - f.value(x - 1e-6)) / 2e-6;
        assert_relative_eq!(d.value(x), fd, epsilon = 1e-8);
    }

    #[test]
    fn energy_of_sine_profile() {
        let f = TrigPoly::sine(1.0, PI / 2.0, 1.0);
        assert_relative_eq!(analytic_energy(&f, &f, 1.0), PI * PI / 8.0, epsilon = 1e-14);
    }
}
