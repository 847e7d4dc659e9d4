//! Asymptotic series `λ_n(ε) ~ Σ ε^e μ_e` over the exponent lattice.
//!
//! One driver serves all regimes. At every positive exponent `e` (ascending)
//! it assembles the forcing `Σ_{a+b=e, 0<a<e} μ_a w_b`, the vertex jumps and
//! the flux datum
//!
//! ```text
//! d*_e = Σ_i h_i² Σ_{j≥1} ℓ₀^j/j! Σ_{a+b=e−j} μ_a w_b^{(i)(j−1)}(0)
//!      − (1/π) Σ_{a+b=e−1}   μ_a Σ_i T_b^{(i)}
//!      − (1/π) Σ_{a+b=e−1+α} μ_a (m w_b^{(1)}(0) + K_b)
//! ```
//!
//! with `T` the outlet tail integrals and `K` the node integrals, then hands
//! the problem to the corrector. In regime One the terms `μ₀ m w_e(0)` and
//! `μ_e m W(0)` of the last sum are carried by the corrector's vertex mass.
//! Coefficients at exponents outside the lattice (in particular negative
//! ones) are zero. Jumps and node integrals vanish below exponent 1.

pub mod constants;
pub mod lattice;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

pub use constants::{provider_for, ConstantsProvider, InnerData, TableProvider};
pub use lattice::{build_lattice, ExponentLattice, Key, KeyArithmetic, LatticeEntry};

use crate::corrector::{solve_corrector, CorrectorProblem, Diagnostics};
use crate::limit_spectrum::simple_eigenpair;
use crate::model::{AlphaRegime, EdgeFunction, EdgeTriple, EigenPair, GridFunction, StarGraph, TrigPoly};
use crate::{Error, Result};

/// Exponents closer than this are treated as equal.
const EXPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeriesFlags {
    /// Some outlet tail integral was unavailable and replaced by zero.
    pub tails_neglected: bool,
    /// First lattice exponent that could not be computed.
    pub truncated_at: Option<String>,
    /// What was missing there.
    pub missing: Option<String>,
    /// The base eigenfunction vanishes at the vertex.
    pub pole_type: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSeries {
    pub lattice: ExponentLattice,
    pub base: EigenPair,
    /// `μ_e` for the first `computed` lattice entries.
    pub mu: Vec<f64>,
    /// `w_e`, with `w_0 = W`.
    pub correctors: Vec<EdgeTriple>,
    /// `w_e^{(1)}(0)`.
    pub node_values: Vec<f64>,
    pub jumps: Vec<[f64; 2]>,
    pub node_integrals: Vec<Option<f64>>,
    pub flux_data: Vec<f64>,
    pub diagnostics: Vec<Option<Diagnostics>>,
    pub flags: SeriesFlags,
}

impl AsymptoticSeries {
    pub fn computed(&self) -> usize {
        self.mu.len()
    }

    /// `μ` at the lattice point with this exponent, if computed.
    pub fn mu_at(&self, exponent: f64) -> Option<f64> {
        self.lattice
            .entries
            .iter()
            .zip(&self.mu)
            .find(|(e, _)| (e.exponent - exponent).abs() < EXPONENT_TOL)
            .map(|(_, m)| *m)
    }

    /// `(exponent, μ)` pairs in ascending order.
    pub fn table(&self) -> Vec<(LatticeEntry, f64)> {
        self.lattice.entries.iter().copied().zip(self.mu.iter().copied()).collect()
    }

    /// Error naming the first unavailable order, if the series was truncated.
    pub fn require_complete(&self) -> Result<()> {
        match (&self.flags.truncated_at, &self.flags.missing) {
            (Some(e), what) => {
                Err(Error::MissingConstants { exponent: e.clone(), what: what.clone().unwrap_or_default() })
            }
            _ => Ok(()),
        }
    }

    /// Largest diagnostic over every corrector solve of the series.
    pub fn worst_diagnostics(&self) -> Diagnostics {
        let mut d = Diagnostics::default();
        for x in self.diagnostics.iter().flatten() {
            d.solvability = d.solvability.max(x.solvability);
            d.orthogonality = d.orthogonality.max(x.orthogonality);
            d.continuity = d.continuity.max(x.continuity);
            d.flux = d.flux.max(x.flux);
            d.condition = d.condition.max(x.condition);
        }
        d
    }
}

/// Partial sum `Σ_{e ≤ up_to} ε^e μ_e`, accumulated in ascending order.
pub fn evaluate_series(s: &AsymptoticSeries, eps: f64, up_to: f64) -> f64 {
    s.table()
        .iter()
        .filter(|(e, _)| e.exponent <= up_to + EXPONENT_TOL)
        .map(|(e, m)| if e.exponent == 0.0 { *m } else { eps.powf(e.exponent) * m })
        .sum()
}

/// Expansion of eigenpair `n` in the graph's own constants source.
pub fn expand(graph: &StarGraph, regime: &AlphaRegime, n: usize, order: usize) -> Result<AsymptoticSeries> {
    let mut provider = provider_for(graph, regime.alpha())?;
    expand_with(graph, regime, n, order, provider.as_mut())
}

/// Regime-Zero expansion.
pub fn expand_alpha0(graph: &StarGraph, n: usize, order: usize) -> Result<AsymptoticSeries> {
    expand(graph, &AlphaRegime::Zero, n, order)
}

/// Expansion for irrational or rational `α ∈ (0, 1)`.
pub fn expand_fractional(graph: &StarGraph, regime: &AlphaRegime, n: usize, order: usize) -> Result<AsymptoticSeries> {
    if !regime.is_fractional() {
        return Err(Error::config(format!("regime {regime} is not fractional")));
    }
    expand(graph, regime, n, order)
}

/// Regime-One expansion around the mass-modified limit problem.
pub fn expand_alpha1(graph: &StarGraph, n: usize, order: usize) -> Result<AsymptoticSeries> {
    expand(graph, &AlphaRegime::One, n, order)
}

fn zero_like(f: &EdgeFunction) -> EdgeFunction {
    match f {
        EdgeFunction::Analytic(t) => EdgeFunction::Analytic(TrigPoly::zero(t.omega, t.length)),
        EdgeFunction::Grid(g) => {
            EdgeFunction::Grid(GridFunction { length: g.length, values: vec![0.0; g.values.len()] })
        }
    }
}

fn axpy(y: &mut EdgeFunction, a: f64, x: &EdgeFunction) {
    match (y, x) {
        (EdgeFunction::Analytic(ty), EdgeFunction::Analytic(tx)) => ty.axpy(a, tx),
        (EdgeFunction::Grid(gy), EdgeFunction::Grid(gx)) => {
            for (u, v) in gy.values.iter_mut().zip(&gx.values) {
                *u += a * v;
            }
        }
        _ => unreachable!("series terms share the eigenfunction's representation"),
    }
}

/// `d^j f/dx^j (0)` of an edge function.
fn vertex_derivative(f: &EdgeFunction, order: usize) -> Result<f64> {
    match (f, order) {
        (EdgeFunction::Analytic(t), _) => Ok(t.deriv_x(order).value_s(t.length)),
        (EdgeFunction::Grid(g), 0) => Ok(g.values[0]),
        (EdgeFunction::Grid(g), 1) => Ok(g.derivative_at_zero()),
        (EdgeFunction::Grid(_), _) => {
            Err(Error::config("higher vertex derivatives need closed-form (constant-radius) correctors"))
        }
    }
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|x| x as f64).product()
}

/// Expansion with an explicit constants provider.
pub fn expand_with(
    graph: &StarGraph,
    regime: &AlphaRegime,
    n: usize,
    order: usize,
    provider: &mut dyn ConstantsProvider,
) -> Result<AsymptoticSeries> {
    if !graph.all_constant() && order > 1 {
        return Err(Error::config("orders above 1 require constant radii on every edge"));
    }
    let lattice = build_lattice(*regime, order)?;
    let base = simple_eigenpair(graph, regime, n)?;
    let arith = lattice.arithmetic();
    let h2 = graph.vertex_weights();
    let ell0 = graph.node.ell0;
    let m = graph.node.mass_integral;
    let mu0 = base.lambda;

    let mut s = AsymptoticSeries {
        base: base.clone(),
        mu: vec![mu0],
        correctors: vec![base.triple.clone()],
        node_values: vec![base.vertex_value()],
        jumps: vec![[0.0; 2]],
        node_integrals: vec![Some(0.0)],
        flux_data: vec![0.0],
        diagnostics: vec![None],
        flags: SeriesFlags { pole_type: base.pole_type, ..Default::default() },
        lattice: lattice.clone(),
    };

    for (idx, entry) in lattice.entries.iter().enumerate().skip(1) {
        let e = entry.key;
        let done = s.mu.len();
        let known = |pos: usize| pos < done;

        // forcing
        let mut rhs = [zero_like(&base.triple[0]), zero_like(&base.triple[1]), zero_like(&base.triple[2])];
        for (a, b) in lattice.splittings(e) {
            if a == 0 || b == 0 || !known(a) || !known(b) {
                continue;
            }
            for i in 0..3 {
                axpy(&mut rhs[i], s.mu[a], &s.correctors[b][i]);
            }
        }

        // inner data at e: slopes of w_{e−1} and the node source coefficient
        let prev = lattice.position(e - arith.unit(1)).filter(|&p| known(p));
        let slopes = match prev {
            Some(p) => {
                let d = |i: usize| vertex_derivative(&s.correctors[p][i], 1);
                [d(0)?, d(1)?, d(2)?]
            }
            None => [0.0; 3],
        };
        let source_key = e - arith.unit(2) + arith.alpha_key();
        let node_coefficient: f64 = lattice
            .splittings(source_key)
            .into_iter()
            .filter(|&(a, b)| known(a) && known(b))
            .map(|(a, b)| s.mu[a] * s.node_values[b])
            .sum();
        let data = InnerData { exponent: entry.exponent, label: entry.label, slopes, node_coefficient };

        let (jumps, k_e) = if entry.exponent < 1.0 - EXPONENT_TOL {
            ([0.0; 2], Some(0.0))
        } else {
            match provider.jumps(&data)? {
                Some(j) => (j, provider.node_integral(&data)?),
                None => {
                    s.flags.truncated_at = Some(entry.label.to_string());
                    s.flags.missing = Some("vertex jumps".into());
                    break;
                }
            }
        };

        // flux datum
        let mut flux = 0.0;
        for j in 1..=order {
            let t = e - arith.unit(j as i64);
            if !arith.is_admissible(t) {
                break;
            }
            let c = ell0.powi(j as i32) / factorial(j);
            for (a, b) in lattice.splittings(t) {
                if !known(a) || !known(b) {
                    continue;
                }
                for i in 0..3 {
                    flux += c * h2[i] * s.mu[a] * vertex_derivative(&s.correctors[b][i], j - 1)?;
                }
            }
        }
        for (a, b) in lattice.splittings(e - arith.unit(1)) {
            if !known(a) || !known(b) {
                continue;
            }
            let bexp = lattice.entries[b].exponent;
            if bexp < 1.0 - EXPONENT_TOL {
                continue;
            }
            for i in 1..=3 {
                let t = provider.tail(bexp, i).unwrap_or_else(|| {
                    if provider.tails_are_approximate() {
                        s.flags.tails_neglected = true;
                    }
                    0.0
                });
                flux -= s.mu[a] * t / PI;
            }
        }
        let mut missing_k = None;
        for (a, b) in lattice.splittings(e - arith.unit(1) + arith.alpha_key()) {
            if a == idx {
                // μ_e m W(0): carried by the corrector's vertex mass
                continue;
            }
            if b == idx {
                // μ₀ m w_e(0) is carried by the corrector; K_e stays
                match k_e {
                    Some(k) => flux -= s.mu[a] * k / PI,
                    None => missing_k = Some(entry.label),
                }
                continue;
            }
            if !known(a) || !known(b) {
                continue;
            }
            match s.node_integrals[b] {
                Some(k) => flux -= s.mu[a] * (m * s.node_values[b] + k) / PI,
                None => missing_k = Some(lattice.entries[b].label),
            }
        }
        if let Some(l) = missing_k {
            s.flags.truncated_at = Some(entry.label.to_string());
            s.flags.missing = Some(format!("node integral at exponent {l}"));
            break;
        }

        let problem = CorrectorProblem { base: base.clone(), rhs, jumps, flux };
        let sol = solve_corrector(graph, &problem)?;
        s.node_values.push(sol.triple[0].vertex_trace().0);
        s.mu.push(sol.mu);
        s.correctors.push(sol.triple);
        s.jumps.push(jumps);
        s.node_integrals.push(k_e);
        s.flux_data.push(flux);
        s.diagnostics.push(Some(sol.diagnostics));
    }
    Ok(s)
}

/// Closed-form first correction in regime Zero with jumps `δ₁`:
/// `μ₁ = Λ (W(0) d₁* − Σ_{i=2,3} δ₁^{(i)} h_i² W_i'(0))`, where
/// `d₁* = Λ W(0) (ℓ₀ Σ h_i² − m/π)`.
pub fn mu1_alpha0(graph: &StarGraph, pair: &EigenPair, delta1: [f64; 2]) -> f64 {
    let h2 = graph.vertex_weights();
    let w0 = pair.vertex_value();
    let dw = pair.vertex_derivatives();
    let lam = pair.lambda;
    let d1 = lam * w0 * (graph.node.ell0 * h2.iter().sum::<f64>() - graph.node.mass_integral / PI);
    lam * (w0 * d1 - delta1[0] * h2[1] * dw[1] - delta1[1] * h2[2] * dw[2])
}

/// Leading fractional correction `μ_{1−α} = −(Λ W(0))² m/π`.
pub fn mu_one_minus_alpha(pair: &EigenPair, mass_integral: f64) -> f64 {
    -(pair.lambda * pair.vertex_value()).powi(2) * mass_integral / PI
}

/// `μ_{2−2α} = −(Λ W(0) m/π)(Λ w_{1−α}(0) + μ_{1−α} W(0))` for `α ∈ (1/2, 1)`,
/// valid because the energy-orthogonal `w_{1−α}` is also orthogonal to `W`
/// in the weighted `L²` product.
pub fn mu_two_minus_two_alpha(pair: &EigenPair, mass_integral: f64, w_one_minus_alpha_at_vertex: f64) -> f64 {
    let lam = pair.lambda;
    let w0 = pair.vertex_value();
    let mu = mu_one_minus_alpha(pair, mass_integral);
    -(lam * w0 * mass_integral / PI) * (lam * w_one_minus_alpha_at_vertex + mu * w0)
}

/// Closed-form first correction in regime One, with jumps `δ₁` and node
/// integral `K₁ = ∫ρ₀ N̂₁`:
/// `μ₁ = Λ (W(0)(Λ W(0) ℓ₀ Σ h_i² − Λ K₁/π) − Σ_{i=2,3} δ₁^{(i)} h_i² W_i'(0))`.
pub fn mu1_alpha1(graph: &StarGraph, pair: &EigenPair, delta1: [f64; 2], k1: f64) -> f64 {
    let h2 = graph.vertex_weights();
    let w0 = pair.vertex_value();
    let dw = pair.vertex_derivatives();
    let lam = pair.lambda;
    let d1 = lam * w0 * graph.node.ell0 * h2.iter().sum::<f64>() - lam * k1 / PI;
    lam * (w0 * d1 - delta1[0] * h2[1] * dw[1] - delta1[1] * h2[2] * dw[2])
}

#[derive(Serialize)]
struct SeriesJson<'a> {
    regime: String,
    index: usize,
    lambda: f64,
    order: usize,
    lattice: &'a [LatticeEntry],
    mu: BTreeMap<String, f64>,
    terms: Vec<TermJson>,
    flags: &'a SeriesFlags,
}

#[derive(Serialize)]
struct TermJson {
    label: String,
    e: f64,
    mu: f64,
    node_value: f64,
    jumps: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<Diagnostics>,
}

/// JSON form: lattice, `μ` keyed by exponent label, per-term data and flags.
pub fn series_to_json(s: &AsymptoticSeries) -> serde_json::Value {
    let terms: Vec<TermJson> = (0..s.computed())
        .map(|i| TermJson {
            label: s.lattice.entries[i].label.to_string(),
            e: s.lattice.entries[i].exponent,
            mu: s.mu[i],
            node_value: s.node_values[i],
            jumps: s.jumps[i],
            diagnostics: s.diagnostics[i],
        })
        .collect();
    let json = SeriesJson {
        regime: s.lattice.regime.to_string(),
        index: s.base.index,
        lambda: s.base.lambda,
        order: s.lattice.order,
        lattice: &s.lattice.entries,
        mu: terms.iter().map(|t| (t.label.clone(), t.mu)).collect(),
        terms,
        flags: &s.flags,
    };
    serde_json::to_value(json).expect("series types always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> StarGraph {
        StarGraph::constant([1.0; 3], [1.0; 3], 0.2, PI).unwrap()
    }

    #[test]
    fn order_zero_returns_the_eigenvalue() {
        let s = expand_alpha0(&sym(), 1, 0).unwrap();
        assert_eq!(s.mu, vec![PI * PI / 4.0]);
        assert_eq!(evaluate_series(&s, 0.3, 0.0), PI * PI / 4.0);
    }

    #[test]
    fn missing_jumps_truncate() {
        let s = expand_alpha0(&sym(), 1, 1).unwrap();
        assert_eq!(s.computed(), 1);
        assert_eq!(s.flags.truncated_at.as_deref(), Some("1"));
        assert!(matches!(s.require_complete(), Err(Error::MissingConstants { .. })));
    }

    #[test]
    fn fractional_leading_term_matches_closed_form() {
        let g = StarGraph::constant([1.0, 1.3, 1.7], [1.0; 3], 0.2, 2.0).unwrap();
        let r = AlphaRegime::irrational(0.3 + 1e-4 * std::f64::consts::SQRT_2).unwrap();
        let s = expand_fractional(&g, &r, 1, 0).unwrap();
        assert_eq!(s.computed(), 1);
        let l = build_lattice(r, 1).unwrap();
        assert_eq!(l.len(), 5);
        let s = expand_fractional(&g, &r, 1, 1).unwrap();
        let expect = mu_one_minus_alpha(&s.base, 2.0);
        let got = s.mu_at(1.0 - r.alpha()).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect.abs(), "{got} vs {expect}");
    }

    #[test]
    fn evaluate_example() {
        let mut s = expand_alpha0(&sym(), 1, 0).unwrap();
        s.lattice = build_lattice(AlphaRegime::rational(1, 2).unwrap(), 1).unwrap();
        s.mu = vec![2.0, -1.0];
        assert!((evaluate_series(&s, 0.04, 0.5) - 1.8).abs() < 1e-15);
    }
}
