//! Secular equation of the constant-radius star.
//!
//! With `W_i = A_i sin(ω(ℓ_i − x))` and `μ = ω²`, continuity and the
//! Kirchhoff condition `Σ h_i² W_i'(0) = −βμ W(0)` reduce to
//! `G(μ) = Σ h_i² cot(ωℓ_i) − βω = 0`. Between consecutive distinct poles
//! `kπ/ℓ_i` the function is strictly decreasing from `+∞` to `−∞`, so every
//! such interval holds exactly one root. Eigenvalues with a vanishing vertex
//! value sit on poles shared by at least two edges.

use std::f64::consts::PI;

use crate::model::{AlphaRegime, EdgeFunction, EigenPair, StarGraph, TrigPoly};
use crate::{Error, Result};

/// Relative gap below which an eigenvalue is flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// `|sin(ωℓ_i)|` below which `G` is reported as evaluated on a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Relative distance under which poles of different edges are merged.
const POLE_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SecularEquation {
    /// `h_i²`
    pub weights: [f64; 3],
    pub lengths: [f64; 3],
    /// Vertex mass coefficient, `m/π` in regime One and 0 otherwise.
    pub beta: f64,
}

/// One eigenvalue of the secular problem and its unnormalized amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularRoot {
    pub omega: f64,
    pub amplitudes: [f64; 3],
    pub pole_type: bool,
}

impl SecularRoot {
    pub fn lambda(&self) -> f64 {
        self.omega * self.omega
    }
}

impl SecularEquation {
    pub fn new(weights: [f64; 3], lengths: [f64; 3], beta: f64) -> Result<Self> {
        if weights.iter().chain(&lengths).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::config("secular equation needs positive weights and lengths"));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::config("vertex mass coefficient must be nonnegative"));
        }
        Ok(SecularEquation { weights, lengths, beta })
    }

    pub fn for_graph(graph: &StarGraph, regime: &AlphaRegime) -> Result<Self> {
        if !graph.all_constant() {
            return Err(Error::config("the secular equation requires constant radii"));
        }
        SecularEquation::new(
            graph.vertex_weights(),
            graph.lengths(),
            regime.vertex_mass_coefficient(graph.node.mass_integral),
        )
    }

    /// `G` as a function of `ω`; `None` on a pole.
    fn g_omega(&self, w: f64) -> Option<f64> {
        let mut total = -self.beta * w;
        for i in 0..3 {
            let (s, c) = (w * self.lengths[i]).sin_cos();
            if s.abs() < POLE_TOL {
                return None;
            }
            total += self.weights[i] * c / s;
        }
        Some(total)
    }

    /// `dG/dω`.
    fn dg_omega(&self, w: f64) -> f64 {
        let mut total = -self.beta;
        for i in 0..3 {
            let s = (w * self.lengths[i]).sin();
            total -= self.weights[i] * self.lengths[i] / (s * s);
        }
        total
    }

    /// `G(μ)`; errors on a pole so the caller can bracket around it.
    pub fn eval(&self, mu: f64) -> Result<f64> {
        if !(mu > 0.0) {
            return Err(Error::config(format!("secular function needs mu > 0, got {mu}")));
        }
        let w = mu.sqrt();
        self.g_omega(w).ok_or_else(|| Error::solver(format!("mu = {mu} lies on a pole of the secular function")))
    }

    /// `dG/dμ`.
    pub fn derivative(&self, mu: f64) -> f64 {
        let w = mu.sqrt();
        self.dg_omega(w) / (2.0 * w)
    }

    /// Distinct poles `kπ/ℓ_i` up to `limit`, each with the set of edges
    /// whose sine vanishes there.
    fn poles(&self, limit: f64) -> Vec<(f64, Vec<usize>)> {
        let mut raw: Vec<(f64, usize)> = Vec::new();
        for i in 0..3 {
            let mut k = 1;
            loop {
                let p = k as f64 * PI / self.lengths[i];
                if p > limit {
                    break;
                }
                raw.push((p, i));
                k += 1;
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (p, i) in raw {
            match out.last_mut() {
                Some((q, set)) if (p - *q).abs() <= POLE_MERGE_TOL * p => {
                    if !set.contains(&i) {
                        set.push(i);
                    }
                }
                _ => out.push((p, vec![i])),
            }
        }
        out
    }

    /// The unique root in the open pole interval `(a, b)`.
    fn root_between(&self, a: f64, b: f64) -> f64 {
        let (mut lo, mut hi) = (a, b);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.g_omega(mid) {
                Some(g) if g > 0.0 => lo = mid,
                Some(g) if g < 0.0 => hi = mid,
                Some(_) => return mid,
                // numerically on a pole: step away from the nearer end
                None => {
                    if mid - a < b - mid {
                        lo = mid
                    } else {
                        hi = mid
                    }
                }
            }
        }
        let w = 0.5 * (lo + hi);
        // one Newton polish in μ, kept only if it reduces |G|
        let mu = w * w;
        if let Ok(g) = self.eval(mu) {
            let cand = mu - g / self.derivative(mu);
            if cand > a * a && cand < b * b {
                if let Ok(gc) = self.eval(cand) {
                    if gc.abs() < g.abs() {
                        return cand.sqrt();
                    }
                }
            }
        }
        w
    }

    fn root_amplitudes(&self, w: f64) -> [f64; 3] {
        let a = |i: usize| 1.0 / (w * self.lengths[i]).sin();
        [a(0), a(1), a(2)]
    }

    /// Energy `Σ h_i² ∫ ((A_i sin(ω(ℓ_i − x)))')²`.
    pub fn energy(&self, w: f64, amplitudes: &[f64; 3]) -> f64 {
        (0..3)
            .map(|i| {
                let l = self.lengths[i];
                self.weights[i] * amplitudes[i].powi(2) * w * w * (l / 2.0 + (2.0 * w * l).sin() / (4.0 * w))
            })
            .sum()
    }

    /// Vertex-zero modes at a pole shared by the edges in `set`.
    fn pole_modes(&self, w: f64, set: &[usize]) -> Vec<[f64; 3]> {
        let c = |i: usize| self.weights[i] * (w * self.lengths[i]).cos();
        match set.len() {
            0 | 1 => Vec::new(),
            2 => {
                let (a, b) = (set[0], set[1]);
                let mut amp = [0.0; 3];
                amp[a] = c(b);
                amp[b] = -c(a);
                vec![amp]
            }
            _ => {
                // null space of (c_1, c_2, c_3), orthogonalized in energy
                let weight: Vec<f64> = (0..3).map(|i| self.weights[i] * self.lengths[i] / 2.0).collect();
                let ip = |x: &[f64; 3], y: &[f64; 3]| (0..3).map(|i| weight[i] * x[i] * y[i]).sum::<f64>();
                let v1 = [c(1), -c(0), 0.0];
                let mut v2 = [c(2), 0.0, -c(0)];
                let t = ip(&v2, &v1) / ip(&v1, &v1);
                for i in 0..3 {
                    v2[i] -= t * v1[i];
                }
                vec![v1, v2]
            }
        }
    }

    /// The first `count` eigenvalues (with multiplicity), ascending, with
    /// unnormalized amplitudes.
    pub fn roots(&self, count: usize) -> Vec<SecularRoot> {
        let lmax = self.lengths.iter().cloned().fold(0.0, f64::max);
        let limit = (count + 1) as f64 * PI / lmax * (1.0 + 1e-9);
        let poles = self.poles(limit);
        let mut out = Vec::new();
        let mut left = 0.0;
        for (p, set) in &poles {
            let w = self.root_between(left, *p);
            out.push(SecularRoot { omega: w, amplitudes: self.root_amplitudes(w), pole_type: false });
            for amp in self.pole_modes(*p, set) {
                out.push(SecularRoot { omega: *p, amplitudes: amp, pole_type: true });
            }
            left = *p;
        }
        out.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        out.truncate(count);
        out
    }
}

/// Scales amplitudes to unit energy and fixes the sign so that the slope at
/// the far end of the first non-vanishing edge is positive.
pub(crate) fn normalize_amplitudes(eq: &SecularEquation, w: f64, amp: &mut [f64; 3]) {
    let e = eq.energy(w, amp).sqrt();
    let scale = amp.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let lead = amp.iter().find(|a| a.abs() > 1e-12 * scale).copied().unwrap_or(1.0);
    let s = if lead < 0.0 { 1.0 } else { -1.0 };
    for a in amp.iter_mut() {
        *a *= s / e;
    }
}

/// Relative gaps `min_m |Λ_n − Λ_m| / Λ_n` over an ascending list.
pub fn relative_gaps(values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|n| {
            let mut g = f64::INFINITY;
            if n > 0 {
                g = g.min(values[n] - values[n - 1]);
            }
            if n + 1 < values.len() {
                g = g.min(values[n + 1] - values[n]);
            }
            g.abs() / values[n]
        })
        .collect()
}

/// Normalized eigenpairs of the secular problem.
pub fn secular_eigenpairs(eq: &SecularEquation, regime: AlphaRegime, count: usize) -> Vec<EigenPair> {
    // one extra root so the last requested pair has an upper neighbour
    let roots = eq.roots(count + 1);
    let lambdas: Vec<f64> = roots.iter().map(SecularRoot::lambda).collect();
    let gaps = relative_gaps(&lambdas);
    roots
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(n, r)| {
            let mut amp = r.amplitudes;
            normalize_amplitudes(eq, r.omega, &mut amp);
            let f = |i: usize| EdgeFunction::Analytic(TrigPoly::sine(amp[i], r.omega, eq.lengths[i]));
            EigenPair {
                lambda: r.lambda(),
                index: n + 1,
                triple: [f(0), f(1), f(2)],
                regime,
                beta: eq.beta,
                relative_gap: gaps[n],
                degenerate: gaps[n] < DEGENERACY_TOL,
                pole_type: r.pole_type,
            }
        })
        .collect()
}
