//! Piecewise-linear finite elements for the weak form of the limit problem.
//!
//! The vertex is one shared unknown (continuity), Dirichlet ends are
//! eliminated, and a vertex mass `β` is added to the vertex entry of the mass
//! matrix. Eigenvalues are isolated by bisection on Sylvester inertia of
//! `K − σM`; eigenvectors follow by inverse iteration.

use crate::limit_spectrum::star_matrix::{StarLayout, StarMatrix};
use crate::model::{EdgeFunction, EdgeTriple, GridFunction, StarGraph};
use crate::numerics::gauss_legendre;
use crate::{Error, Result};

/// Number of elements on each edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub intervals: [usize; 3],
}

impl Mesh {
    pub fn per_edge(n: usize) -> Self {
        Mesh { intervals: [n; 3] }
    }

    /// Same spacing on every edge, `n` elements per unit length.
    pub fn per_unit_length(graph: &StarGraph, n: usize) -> Self {
        let l = graph.lengths();
        let k = |i: usize| ((n as f64 * l[i]).round() as usize).max(1);
        Mesh { intervals: [k(0), k(1), k(2)] }
    }
}

/// Assembled stiffness and mass on the star, both weighted by `h_i²`.
#[derive(Debug, Clone)]
pub struct DiscreteGraphSystem {
    /// Edge lengths actually meshed (shortened in node-offset mode).
    pub lengths: [f64; 3],
    /// Position of the vertex along each original edge.
    pub origin: f64,
    pub mesh: Mesh,
    pub stiffness: StarMatrix,
    pub mass: StarMatrix,
    pub beta: f64,
    /// Per-element integrals, kept for assembling loads and lifts.
    pub elements: [Vec<ElementIntegrals>; 3],
}

/// Integrals of one element: `∫h²/Δx²` and the weighted mass entries
/// `∫h²φ₀²`, `∫h²φ₀φ₁`, `∫h²φ₁²` of the two hat functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementIntegrals {
    pub stiffness: f64,
    pub mass: [f64; 3],
}

fn element_integrals(graph: &StarGraph, edge: usize, origin: f64, n: usize) -> Vec<ElementIntegrals> {
    let (gx, gw) = gauss_legendre(3);
    let spec = &graph.edges[edge];
    let dx = (spec.length - origin) / n as f64;
    (0..n)
        .map(|e| {
            let (mut a, mut b00, mut b01, mut b11) = (0.0, 0.0, 0.0, 0.0);
            for (t, w) in gx.iter().zip(&gw) {
                let r = 0.5 * (1.0 + t);
                let h2 = spec.h(origin + (e as f64 + r) * dx).powi(2);
                let wq = 0.5 * dx * w * h2;
                a += wq;
                b00 += wq * (1.0 - r) * (1.0 - r);
                b01 += wq * (1.0 - r) * r;
                b11 += wq * r * r;
            }
            ElementIntegrals { stiffness: a / (dx * dx), mass: [b00, b01, b11] }
        })
        .collect()
}

/// Minimum elements per edge accepted by [`assemble_discrete`].
pub const MIN_INTERVALS: usize = 16;

/// Assembles the discrete limit problem with vertex mass coefficient `beta`.
pub fn assemble_discrete(graph: &StarGraph, beta: f64, mesh: Mesh) -> Result<DiscreteGraphSystem> {
    assemble_with_origin(graph, beta, mesh, 0.0)
}

/// As [`assemble_discrete`] but with the vertex moved to `x = origin` on
/// every edge, so edge `i` is meshed on `(origin, ℓ_i)`.
pub fn assemble_with_origin(graph: &StarGraph, beta: f64, mesh: Mesh, origin: f64) -> Result<DiscreteGraphSystem> {
    if mesh.intervals.iter().any(|&n| n < MIN_INTERVALS) {
        return Err(Error::config(format!("need at least {MIN_INTERVALS} elements per edge")));
    }
    if !(beta >= 0.0) {
        return Err(Error::config("vertex mass coefficient must be nonnegative"));
    }
    let layout = StarLayout { chain_len: [mesh.intervals[0] - 1, mesh.intervals[1] - 1, mesh.intervals[2] - 1] };
    let mut k = StarMatrix::zeros(&layout);
    let mut m = StarMatrix::zeros(&layout);
    let mut lengths = [0.0; 3];
    let mut elements: [Vec<ElementIntegrals>; 3] = Default::default();
    for i in 0..3 {
        let len = graph.edges[i].length - origin;
        if len <= 0.0 {
            return Err(Error::config("node offset exceeds edge length"));
        }
        lengths[i] = len;
        let n = mesh.intervals[i];
        elements[i] = element_integrals(graph, i, origin, n);
        let (kc, mc) = (&mut k.chains[i], &mut m.chains[i]);
        for (e, el) in elements[i].iter().enumerate() {
            let ke = el.stiffness;
            // local node 0 = global node e, local node 1 = global node e + 1;
            // global node 0 is the vertex, node n is the Dirichlet end and
            // node j in 1..n is chain unknown j − 1
            if e == 0 {
                k.center += ke;
                m.center += el.mass[0];
                if n > 1 {
                    kc.link += -ke;
                    mc.link += el.mass[1];
                }
            } else {
                kc.diag[e - 1] += ke;
                mc.diag[e - 1] += el.mass[0];
                if e + 1 < n {
                    kc.off[e - 1] += -ke;
                    mc.off[e - 1] += el.mass[1];
                }
            }
            if e + 1 < n {
                kc.diag[e] += ke;
                mc.diag[e] += el.mass[2];
            }
        }
    }
    m.center += beta;
    Ok(DiscreteGraphSystem { lengths, origin, mesh, stiffness: k, mass: m, beta, elements })
}

impl DiscreteGraphSystem {
    pub fn layout(&self) -> StarLayout {
        self.stiffness.layout()
    }

    /// `K − σM`.
    pub fn shifted(&self, sigma: f64) -> StarMatrix {
        self.stiffness.combine(1.0, &self.mass, -sigma)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        self.shifted(sigma).negative_count()
    }

    /// `n`-th smallest eigenvalue (1-based) by bisection on inertia.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        assert!(n >= 1);
        let mut hi = 1.0;
        while self.count_below(hi) < n {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
                return 0.5 * (lo + hi);
            }
            if self.count_below(mid) >= n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|n| self.eigenvalue(n)).collect()
    }

    /// Eigenvectors for the given eigenvalues, energy normalized (`uᵀKu = 1`),
    /// mutually M-orthogonal within clusters of equal eigenvalues.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let size = self.layout().size();
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for (idx, &lam) in values.iter().enumerate() {
            let sigma = lam * (1.0 + 1e-11);
            let fac = self.shifted(sigma).factor();
            let cluster: Vec<usize> = (0..idx).filter(|&j| (values[j] - lam).abs() <= 1e-8 * lam.abs()).collect();
            let mut u: Vec<f64> = (0..size).map(|j| 1.0 + 0.37 * ((j * (idx + 1)) as f64).sin()).collect();
            for _ in 0..4 {
                let mu = self.mass.matvec(&u);
                u = fac.solve(&mu);
                for &j in &cluster {
                    let mv = self.mass.matvec(&out[j]);
                    let c = dot(&u, &mv) / dot(&out[j], &mv);
                    for (a, b) in u.iter_mut().zip(&out[j]) {
                        *a -= c * b;
                    }
                }
                let nrm = dot(&u, &self.stiffness.matvec(&u)).sqrt();
                for a in u.iter_mut() {
                    *a /= nrm;
                }
            }
            self.fix_sign(&mut u);
            out.push(u);
        }
        out
    }

    /// Makes the slope at the far end of the first non-vanishing edge positive.
    fn fix_sign(&self, u: &mut [f64]) {
        let layout = self.layout();
        let scale = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for i in 0..3 {
            let last = layout.offset(i) + layout.chain_len[i] - 1;
            if u[last].abs() > 1e-8 * scale {
                if u[last] > 0.0 {
                    u.iter_mut().for_each(|a| *a = -*a);
                }
                return;
            }
        }
    }

    /// Splits a flat vector into per-edge grid functions (vertex value
    /// first, zero at the Dirichlet end).
    pub fn to_triple(&self, u: &[f64]) -> EdgeTriple {
        let layout = self.layout();
        let edge = |i: usize| {
            let o = layout.offset(i);
            let mut v = Vec::with_capacity(layout.chain_len[i] + 2);
            v.push(u[0]);
            v.extend_from_slice(&u[o..o + layout.chain_len[i]]);
            v.push(0.0);
            EdgeFunction::Grid(GridFunction { length: self.lengths[i], values: v })
        };
        [edge(0), edge(1), edge(2)]
    }

    /// Inverse of [`to_triple`](Self::to_triple) for grid functions on this mesh.
    pub fn from_triple(&self, t: &EdgeTriple) -> Vec<f64> {
        let layout = self.layout();
        let mut u = vec![0.0; layout.size()];
        for i in 0..3 {
            let o = layout.offset(i);
            let n = self.mesh.intervals[i];
            let dx = self.lengths[i] / n as f64;
            if i == 0 {
                u[0] = t[0].value(0.0);
            }
            for j in 0..layout.chain_len[i] {
                u[o + j] = t[i].value((j + 1) as f64 * dx);
            }
        }
        u
    }

    /// Node spacing on edge `i`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.lengths[i] / self.mesh.intervals[i] as f64
    }

    /// Maps edge-local node `j` (0 = vertex, n = Dirichlet end) to an unknown.
    fn dof(&self, layout: &StarLayout, edge: usize, j: usize) -> Option<usize> {
        if j == 0 {
            Some(0)
        } else if j < self.mesh.intervals[edge] {
            Some(layout.offset(edge) + j - 1)
        } else {
            None
        }
    }

    /// Load vector `Σ_i ∫ h_i² f_i ψ_j` for every hat function `ψ_j`, with
    /// `f(i, x)` evaluated at three Gauss points per element.
    pub fn load(&self, graph: &StarGraph, f: impl Fn(usize, f64) -> f64) -> Vec<f64> {
        let layout = self.layout();
        let mut b = vec![0.0; layout.size()];
        let (gx, gw) = gauss_legendre(3);
        for i in 0..3 {
            let dx = self.spacing(i);
            let spec = &graph.edges[i];
            for e in 0..self.mesh.intervals[i] {
                let (mut l0, mut l1) = (0.0, 0.0);
                for (t, w) in gx.iter().zip(&gw) {
                    let r = 0.5 * (1.0 + t);
                    let x = (e as f64 + r) * dx;
                    let v = 0.5 * dx * w * spec.h(self.origin + x).powi(2) * f(i, x);
                    l0 += v * (1.0 - r);
                    l1 += v * r;
                }
                if let Some(d) = self.dof(&layout, i, e) {
                    b[d] += l0;
                }
                if let Some(d) = self.dof(&layout, i, e + 1) {
                    b[d] += l1;
                }
            }
        }
        b
    }

    /// `(K_i − σM_i) v` for nodal values `v` on edge `i` alone (including a
    /// vertex value that need not match the other edges), tested against
    /// every hat function of the star.
    pub fn apply_edge(&self, edge: usize, nodal: &[f64], sigma: f64) -> Vec<f64> {
        let layout = self.layout();
        let n = self.mesh.intervals[edge];
        assert_eq!(nodal.len(), n + 1, "nodal values must cover the edge");
        let mut y = vec![0.0; layout.size()];
        for (e, el) in self.elements[edge].iter().enumerate() {
            let (v0, v1) = (nodal[e], nodal[e + 1]);
            let k = el.stiffness;
            let [m00, m01, m11] = el.mass;
            let r0 = k * (v0 - v1) - sigma * (m00 * v0 + m01 * v1);
            let r1 = k * (v1 - v0) - sigma * (m01 * v0 + m11 * v1);
            if let Some(d) = self.dof(&layout, edge, e) {
                y[d] += r0;
            }
            if let Some(d) = self.dof(&layout, edge, e + 1) {
                y[d] += r1;
            }
        }
        y
    }

    /// Rough estimate of the discretization error of eigenvalue `lambda`.
    pub fn mesh_error(&self, lambda: f64) -> f64 {
        let dx = (0..3).map(|i| self.lengths[i] / self.mesh.intervals[i] as f64).fold(0.0, f64::max);
        lambda * lambda * dx * dx / 12.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
