//! The resonant edge problem solved at every order of the recursion.
//!
//! Given a simple eigenpair `(μ₀, W)`, forcings `f_i`, vertex jumps
//! `δ^{(2)}, δ^{(3)}` and a flux datum `d*`, find `μ` and `w` with
//!
//! ```text
//! −(h_i² w_i')' − μ₀ h_i² w_i = h_i² (f_i + μ W_i)   on each edge,
//! w_i(ℓ_i) = 0,
//! w_1(0) = w_2(0) − δ^{(2)} = w_3(0) − δ^{(3)},
//! Σ h_i² w_i'(0) + β μ₀ w_1(0) + β μ W(0) = d*.
//! ```
//!
//! The forcing is given per unit `h²`. The equation is solvable only for one
//! value of `μ` (the Fredholm condition), which is
//! `μ = Λ (W(0) d* − Σ_{i=2,3} δ^{(i)} h_i² W_i'(0) − Σ ∫ h_i² f_i W_i)`.
//! The corrector is made unique by asking its continuous part
//! `φ = w − lift` to be energy-orthogonal to `W`, where the lift is
//! `δ^{(i)}(ℓ_i − x)/ℓ_i` on edges 2 and 3.

use nalgebra::{Matrix4, Vector4};

use crate::limit_spectrum::{assemble_discrete, DiscreteGraphSystem, Mesh};
use crate::model::edge::{analytic_energy, analytic_l2};
use crate::model::{energy_inner, EdgeFunction, EdgeTriple, EigenPair, GridFunction, StarGraph, TrigPoly};
use crate::{Error, Result};

/// Largest accepted condition estimate of the closed-form linear system.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorProblem {
    pub base: EigenPair,
    /// Forcing `f_i`, per unit `h_i²`.
    pub rhs: EdgeTriple,
    /// `(δ^{(2)}, δ^{(3)})`
    pub jumps: [f64; 2],
    /// Flux datum `d*`, excluding the vertex-mass terms carried by the solver.
    pub flux: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Diagnostics {
    /// Residual of the solvability condition.
    pub solvability: f64,
    /// `⟨φ, W⟩₀`.
    pub orthogonality: f64,
    /// Largest violation of the jump conditions.
    pub continuity: f64,
    /// Violation of the flux condition.
    pub flux: f64,
    /// Condition estimate of the closed-form system (0 on the grid path).
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSolution {
    pub mu: f64,
    /// The corrector `w`, with the prescribed jumps.
    pub triple: EdgeTriple,
    /// Its continuous part `φ`, energy-orthogonal to the eigenfunction.
    pub phi: EdgeTriple,
    pub diagnostics: Diagnostics,
}

impl CorrectorProblem {
    /// Problem with zero forcing, jumps and flux on the given eigenpair.
    pub fn homogeneous(base: &EigenPair) -> Self {
        let zero = |f: &EdgeFunction| match f {
            EdgeFunction::Analytic(t) => EdgeFunction::Analytic(TrigPoly::zero(t.omega, t.length)),
            EdgeFunction::Grid(g) => {
                EdgeFunction::Grid(GridFunction { length: g.length, values: vec![0.0; g.values.len()] })
            }
        };
        CorrectorProblem {
            rhs: [zero(&base.triple[0]), zero(&base.triple[1]), zero(&base.triple[2])],
            base: base.clone(),
            jumps: [0.0; 2],
            flux: 0.0,
        }
    }

    fn mu0(&self) -> f64 {
        self.base.lambda
    }
}

/// Flux datum after removing the jumps: `D = d* + Σ_{i=2,3} δ^{(i)} h_i²(0)/ℓ_i`.
pub fn homogenized_flux(graph: &StarGraph, flux: f64, jumps: [f64; 2]) -> f64 {
    let w = graph.vertex_weights();
    let l = graph.lengths();
    flux + jumps[0] * w[1] / l[1] + jumps[1] * w[2] / l[2]
}

/// Rewrites the problem for `φ = w − lift`, whose vertex values agree.
///
/// The forcing on edges 2 and 3 gains `μ₀ δ (ℓ − x)/ℓ − 2 h' δ/(h ℓ)` and the
/// flux datum becomes [`homogenized_flux`].
pub fn homogenize(graph: &StarGraph, p: &CorrectorProblem) -> CorrectorProblem {
    let mut out = p.clone();
    out.flux = homogenized_flux(graph, p.flux, p.jumps);
    out.jumps = [0.0; 2];
    let mu0 = p.mu0();
    for i in 1..3 {
        let d = p.jumps[i - 1];
        if d == 0.0 {
            continue;
        }
        let len = graph.edges[i].length;
        out.rhs[i] = match &p.rhs[i] {
            EdgeFunction::Analytic(t) if graph.edges[i].is_constant() => {
                let mut t = t.clone();
                t.axpy(1.0, &TrigPoly::polynomial(vec![0.0, mu0 * d / len], t.omega, t.length));
                EdgeFunction::Analytic(t)
            }
            other => {
                let n = match (other, &p.base.triple[i]) {
                    (EdgeFunction::Grid(g), _) | (_, EdgeFunction::Grid(g)) => g.values.len(),
                    _ => 4001,
                };
                let spec = &graph.edges[i];
                let dx = len / (n - 1) as f64;
                let values = (0..n)
                    .map(|j| {
                        let x = j as f64 * dx;
                        other.value(x) + mu0 * d * (len - x) / len - 2.0 * spec.h_prime(x) * d / (spec.h(x) * len)
                    })
                    .collect();
                EdgeFunction::Grid(GridFunction { length: len, values })
            }
        };
    }
    out
}

/// Solves the corrector problem. Closed-form when the eigenfunction and the
/// forcing are closed-form, finite elements on the eigenfunction's mesh
/// otherwise.
pub fn solve_corrector(graph: &StarGraph, p: &CorrectorProblem) -> Result<CorrectorSolution> {
    if p.base.degenerate {
        return Err(Error::Degenerate { index: p.base.index, gap: p.base.relative_gap });
    }
    let analytic = p.base.is_analytic() && p.rhs.iter().all(|f| matches!(f, EdgeFunction::Analytic(_)));
    if analytic {
        if !graph.all_constant() {
            return Err(Error::config("closed-form correctors require constant radii"));
        }
        solve_analytic(graph, p)
    } else {
        if p.base.is_analytic() {
            return Err(Error::config("sampled forcing needs a finite-element eigenpair"));
        }
        solve_discrete(graph, p)
    }
}

fn base_poly(p: &CorrectorProblem, i: usize) -> &TrigPoly {
    p.base.triple[i].as_analytic().expect("checked analytic")
}

fn solve_analytic(graph: &StarGraph, p: &CorrectorProblem) -> Result<CorrectorSolution> {
    let h2 = graph.vertex_weights();
    let len = graph.lengths();
    let beta = p.base.beta;
    let mu0 = p.mu0();
    let w = base_poly(p, 0).omega;
    let lift = |i: usize| -> TrigPoly {
        if i == 0 || p.jumps[i - 1] == 0.0 {
            TrigPoly::zero(w, len[i])
        } else {
            TrigPoly::polynomial(vec![0.0, p.jumps[i - 1] / len[i]], w, len[i])
        }
    };

    let mut part = Vec::with_capacity(3);
    let mut resp = Vec::with_capacity(3);
    for i in 0..3 {
        let f = p.rhs[i].as_analytic().expect("checked analytic");
        if f.omega != w || f.length != len[i] {
            return Err(Error::config(format!("forcing on edge {} does not match the eigenfunction", i + 1)));
        }
        let mut ft = f.clone();
        ft.axpy(mu0, &lift(i));
        part.push(ft.solve_resonant());
        resp.push(base_poly(p, i).solve_resonant());
    }
    let sines: Vec<TrigPoly> = (0..3).map(|i| TrigPoly::sine(1.0, w, len[i])).collect();
    let at0 = |t: &TrigPoly| t.value_s(t.length);
    let d0 = |t: &TrigPoly| t.deriv_x(1).value_s(t.length);
    let energy = |i: usize, t: &TrigPoly| analytic_energy(t, base_poly(p, i), h2[i]);

    let big_d = homogenized_flux(graph, p.flux, p.jumps);
    let w0 = at0(base_poly(p, 0));
    let mut a = Matrix4::<f64>::zeros();
    let mut b = Vector4::<f64>::zeros();
    // continuity of φ between edge 1 and edges 2, 3
    for (row, j) in [(0usize, 1usize), (1, 2)] {
        a[(row, 0)] = at0(&sines[0]);
        a[(row, j)] = -at0(&sines[j]);
        a[(row, 3)] = at0(&resp[0]) - at0(&resp[j]);
        b[row] = at0(&part[j]) - at0(&part[0]);
    }
    // flux
    for i in 0..3 {
        a[(2, i)] = h2[i] * d0(&sines[i]);
        a[(2, 3)] += h2[i] * d0(&resp[i]);
        b[2] -= h2[i] * d0(&part[i]);
    }
    a[(2, 0)] += beta * mu0 * at0(&sines[0]);
    a[(2, 3)] += beta * mu0 * at0(&resp[0]) + beta * w0;
    b[2] += big_d - beta * mu0 * at0(&part[0]);
    // orthogonality
    for i in 0..3 {
        a[(3, i)] = energy(i, &sines[i]);
        a[(3, 3)] += energy(i, &resp[i]);
        b[3] -= energy(i, &part[i]);
    }

    let sv = a.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::solver(format!("corrector system is ill-conditioned (condition {cond:.3e})")));
    }
    let x = a.lu().solve(&b).ok_or_else(|| Error::solver("singular corrector system"))?;
    let mu = x[3];

    let mut phi = Vec::with_capacity(3);
    let mut wt = Vec::with_capacity(3);
    for i in 0..3 {
        let mut t = part[i].clone();
        t.axpy(mu, &resp[i]);
        t.axpy(x[i], &sines[i]);
        let mut full = t.clone();
        full.axpy(1.0, &lift(i));
        phi.push(EdgeFunction::Analytic(t));
        wt.push(EdgeFunction::Analytic(full));
    }
    let phi: EdgeTriple = [phi[0].clone(), phi[1].clone(), phi[2].clone()];
    let triple: EdgeTriple = [wt[0].clone(), wt[1].clone(), wt[2].clone()];
    let mut diagnostics = check(graph, p, mu, &triple, &phi);
    diagnostics.condition = cond;
    Ok(CorrectorSolution { mu, triple, phi, diagnostics })
}

/// `Σ ∫ h_i² f_i g_i` over edges.
fn weighted_l2(graph: &StarGraph, f: &EdgeTriple, g: &EdgeTriple) -> f64 {
    (0..3).map(|i| crate::model::edge_mass_inner(graph, i, &f[i], &g[i])).sum()
}

/// Residuals of the solvability, orthogonality and transmission conditions.
fn check(graph: &StarGraph, p: &CorrectorProblem, mu: f64, w: &EdgeTriple, phi: &EdgeTriple) -> Diagnostics {
    let h2 = graph.vertex_weights();
    let beta = p.base.beta;
    let base = &p.base.triple;
    let w0 = p.base.vertex_value();
    let dw = p.base.vertex_derivatives();
    let inv_lambda = weighted_l2(graph, base, base) + beta * w0 * w0;
    let solv = weighted_l2(graph, &p.rhs, base) + mu * inv_lambda
        - (w0 * p.flux - p.jumps[0] * h2[1] * dw[1] - p.jumps[1] * h2[2] * dw[2]);
    let tr: Vec<(f64, f64)> = w.iter().map(EdgeFunction::vertex_trace).collect();
    let cont = (tr[0].0 - (tr[1].0 - p.jumps[0])).abs().max((tr[0].0 - (tr[2].0 - p.jumps[1])).abs());
    let flux = (h2[0] * tr[0].1 + h2[1] * tr[1].1 + h2[2] * tr[2].1 + beta * p.mu0() * tr[0].0 + beta * mu * w0
        - p.flux)
        .abs();
    Diagnostics {
        solvability: solv.abs(),
        orthogonality: energy_inner(graph, phi, base).abs(),
        continuity: cont,
        flux,
        condition: 0.0,
    }
}

fn mesh_of(p: &CorrectorProblem) -> Result<Mesh> {
    let n = |i: usize| {
        p.base.triple[i]
            .as_grid()
            .map(|g| g.values.len() - 1)
            .ok_or_else(|| Error::config("finite-element corrector needs a grid eigenpair"))
    };
    Ok(Mesh { intervals: [n(0)?, n(1)?, n(2)?] })
}

fn solve_discrete(graph: &StarGraph, p: &CorrectorProblem) -> Result<CorrectorSolution> {
    let sys = assemble_discrete(graph, p.base.beta, mesh_of(p)?)?;
    let lam = p.mu0();
    let u = sys.from_triple(&p.base.triple);

    // load: forcing, flux datum and the lift carrying the jumps
    let mut b = sys.load(graph, |i, x| p.rhs[i].value(x));
    b[0] -= p.flux;
    let mut lifts: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for i in 1..3 {
        let n = sys.mesh.intervals[i];
        let d = p.jumps[i - 1];
        lifts[i] = (0..=n).map(|j| d * (1.0 - j as f64 / n as f64)).collect();
        if d != 0.0 {
            let al = sys.apply_edge(i, &lifts[i], lam);
            for (bj, aj) in b.iter_mut().zip(&al) {
                *bj -= aj;
            }
        }
    }
    let c = sys.mass.matvec(&u);
    let ub = dot(&u, &b);
    let uc = dot(&u, &c);
    let mu = -ub / uc;
    let r: Vec<f64> = b.iter().zip(&c).map(|(bj, cj)| bj + mu * cj).collect();

    let phi = singular_solve(&sys, lam, p.base.relative_gap * lam, &u, &r)?;
    let phi_t = sys.to_triple(&phi);
    let mut w_t = phi_t.clone();
    for i in 1..3 {
        if let EdgeFunction::Grid(g) = &mut w_t[i] {
            for (v, l) in g.values.iter_mut().zip(&lifts[i]) {
                *v += l;
            }
        }
    }

    // discrete residuals: the vertex row carries the flux condition
    let a_phi = sys.shifted(lam).matvec(&phi);
    let row_res = (a_phi[0] - r[0]).abs();
    let ortho = dot(&u, &sys.stiffness.matvec(&phi));
    let solv = ub + mu * uc;
    let tr: Vec<f64> = w_t.iter().map(|f| f.vertex_trace().0).collect();
    let cont = (tr[0] - (tr[1] - p.jumps[0])).abs().max((tr[0] - (tr[2] - p.jumps[1])).abs());
    Ok(CorrectorSolution {
        mu,
        triple: w_t,
        phi: phi_t,
        diagnostics: Diagnostics {
            solvability: solv.abs(),
            orthogonality: ortho.abs(),
            continuity: cont,
            flux: row_res,
            condition: 0.0,
        },
    })
}

/// Solves `(K − λM) φ = r` for `r ⟂ u`, with `uᵀKφ = 0`, by Richardson
/// iteration preconditioned with a slightly shifted factorization.
fn singular_solve(sys: &DiscreteGraphSystem, lam: f64, gap: f64, u: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    let eta = 1e-3 * gap.max(1e-8 * lam);
    let fac = sys.shifted(lam + eta).factor();
    let a = sys.shifted(lam);
    let ku = sys.stiffness.matvec(u);
    let uku = dot(u, &ku);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut phi = vec![0.0; r.len()];
    for _ in 0..60 {
        let ap = a.matvec(&phi);
        let res: Vec<f64> = r.iter().zip(&ap).map(|(x, y)| x - y).collect();
        let rnorm = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= 1e-13 * rn {
            return Ok(phi);
        }
        let step = fac.solve(&res);
        for (p, s) in phi.iter_mut().zip(&step) {
            *p += s;
        }
        let t = dot(&phi, &ku) / uku;
        for (p, v) in phi.iter_mut().zip(u) {
            *p -= t * v;
        }
    }
    let ap = a.matvec(&phi);
    let rnorm = r.iter().zip(&ap).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    if rnorm <= 1e-9 * rn {
        Ok(phi)
    } else {
        Err(Error::solver(format!("corrector iteration stalled at relative residual {:.3e}", rnorm / rn)))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ ∫ h_i² f_i W_i` for closed-form triples, used by the expansion drivers.
pub fn forcing_projection(graph: &StarGraph, f: &EdgeTriple, base: &EigenPair) -> f64 {
    let h2 = graph.vertex_weights();
    (0..3)
        .map(|i| match (&f[i], &base.triple[i]) {
            (EdgeFunction::Analytic(a), EdgeFunction::Analytic(b)) => analytic_l2(a, b, h2[i]),
            _ => crate::model::edge_mass_inner(graph, i, &f[i], &base.triple[i]),
        })
        .sum()
}
