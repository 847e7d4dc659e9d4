//! Domain types, configuration ingestion and the normalization conventions
//! shared by the solvers.
//!
//! Conventions:
//! - edges are indexed 0..3 in code (1..3 in configs and tables), all meeting
//!   at `x = 0` with a Dirichlet end at `x = ℓ_i`;
//! - eigenfunctions are normalized in energy, `Σ ∫ h_i² (W')² = 1`;
//! - the sign is fixed by `W^{(1)}'(ℓ₁) > 0`, falling back to the first edge
//!   on which the eigenfunction does not vanish.

pub mod config;
pub mod constants;
pub mod edge;
pub mod graph;
pub mod regime;

pub use config::{load_config, parse_config, serialize_config};
pub use constants::{ConstantEntry, ConstantTables, ExponentLabel, NodeConstants, Provenance};
pub use edge::{EdgeFunction, EdgeTriple, GridFunction, TrigPoly};
pub use graph::{ConstantsSource, EdgeSpec, JunctionParams, NodeSpec, Radius, Rho0Expr, StarGraph};
pub use regime::AlphaRegime;

use crate::numerics::gauss_legendre;
use edge::{analytic_energy, analytic_l2};

/// A limit eigenvalue with its energy-normalized eigenfunction triple.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// 1-based position in the ascending spectrum.
    pub index: usize,
    pub triple: EdgeTriple,
    pub regime: AlphaRegime,
    /// Vertex mass coefficient the pair was computed with.
    pub beta: f64,
    /// Relative gap `min |Λ_n − Λ_m| / Λ_n` to the neighbouring eigenvalues.
    pub relative_gap: f64,
    pub degenerate: bool,
    /// True when the eigenfunction vanishes at the vertex.
    pub pole_type: bool,
}

impl EigenPair {
    /// `W(0)`, read from edge 1.
    pub fn vertex_value(&self) -> f64 {
        self.triple[0].vertex_trace().0
    }

    /// `W_i'(0)` on each edge.
    pub fn vertex_derivatives(&self) -> [f64; 3] {
        [self.triple[0].vertex_trace().1, self.triple[1].vertex_trace().1, self.triple[2].vertex_trace().1]
    }

    pub fn is_analytic(&self) -> bool {
        self.triple.iter().all(|f| matches!(f, EdgeFunction::Analytic(_)))
    }

    /// Largest deviation among the three eigenpair invariants: energy
    /// normalization, sign convention and vertex continuity.
    pub fn invariant_defect(&self, graph: &StarGraph) -> f64 {
        let norm = (energy_inner(graph, &self.triple, &self.triple) - 1.0).abs();
        let v: Vec<f64> = self.triple.iter().map(|f| f.vertex_trace().0).collect();
        let cont = (v[0] - v[1]).abs().max((v[0] - v[2]).abs());
        let sign_ok = self
            .triple
            .iter()
            .map(|f| f.derivative_at_end())
            .find(|d| d.abs() > 1e-8)
            .map(|d| d > 0.0)
            .unwrap_or(false);
        let sign = if sign_ok { 0.0 } else { 1.0 };
        norm.max(cont).max(sign)
    }
}

fn grid_pair_inner(edge: &EdgeSpec, a: &GridFunction, b: &GridFunction, derivative: bool) -> f64 {
    assert_eq!(a.values.len(), b.values.len(), "grid functions on different meshes");
    let (gx, gw) = gauss_legendre(3);
    let dx = a.spacing();
    let mut total = 0.0;
    for j in 0..a.values.len() - 1 {
        let x0 = j as f64 * dx;
        for (t, w) in gx.iter().zip(&gw) {
            let r = 0.5 * (1.0 + t);
            let x = x0 + r * dx;
            let h = edge.h(x);
            let (fa, fb) = if derivative {
                ((a.values[j + 1] - a.values[j]) / dx, (b.values[j + 1] - b.values[j]) / dx)
            } else {
                (a.values[j] * (1.0 - r) + a.values[j + 1] * r, b.values[j] * (1.0 - r) + b.values[j + 1] * r)
            };
            total += 0.5 * dx * w * h * h * fa * fb;
        }
    }
    total
}

fn sample_on(f: &EdgeFunction, like: &GridFunction) -> GridFunction {
    let n = like.values.len();
    let dx = like.spacing();
    GridFunction { length: like.length, values: (0..n).map(|j| f.value(j as f64 * dx)).collect() }
}

fn edge_inner(edge: &EdgeSpec, a: &EdgeFunction, b: &EdgeFunction, derivative: bool) -> f64 {
    match (a, b) {
        (EdgeFunction::Analytic(fa), EdgeFunction::Analytic(fb)) => {
            assert!(edge.is_constant(), "closed-form edge functions require a constant radius");
            let w = edge.h_at_vertex().powi(2);
            if derivative {
                analytic_energy(fa, fb, w)
            } else {
                analytic_l2(fa, fb, w)
            }
        }
        (EdgeFunction::Grid(ga), EdgeFunction::Grid(gb)) => grid_pair_inner(edge, ga, gb, derivative),
        (EdgeFunction::Grid(ga), other) => grid_pair_inner(edge, ga, &sample_on(other, ga), derivative),
        (other, EdgeFunction::Grid(gb)) => grid_pair_inner(edge, &sample_on(other, gb), gb, derivative),
    }
}

/// Energy inner product `⟨u, v⟩₀ = Σ ∫ h_i² u' v'`.
pub fn energy_inner(graph: &StarGraph, a: &EdgeTriple, b: &EdgeTriple) -> f64 {
    (0..3).map(|i| edge_inner(&graph.edges[i], &a[i], &b[i], true)).sum()
}

/// Weighted L² inner product `Σ ∫ h_i² u v` (without any vertex mass).
pub fn mass_inner(graph: &StarGraph, a: &EdgeTriple, b: &EdgeTriple) -> f64 {
    (0..3).map(|i| edge_inner(&graph.edges[i], &a[i], &b[i], false)).sum()
}

/// `∫ h_i² f g` on a single edge.
pub fn edge_mass_inner(graph: &StarGraph, edge: usize, a: &EdgeFunction, b: &EdgeFunction) -> f64 {
    edge_inner(&graph.edges[edge], a, b, false)
}

/// `∫ h_i² f' g'` on a single edge.
pub fn edge_energy_inner(graph: &StarGraph, edge: usize, a: &EdgeFunction, b: &EdgeFunction) -> f64 {
    edge_inner(&graph.edges[edge], a, b, true)
}
