//! Inner problems on the model junction.
//!
//! Fields are harmonic (or Poisson with a node source) on a [`JunctionMesh`]
//! with Neumann walls and prescribed axial slopes on the outlet caps. Each
//! field is gauged so that its asymptotic offset along outlet 1 vanishes;
//! the offsets along outlets 2 and 3 are then the jumps consumed by the
//! corrector.
//!
//! The provider used by the recursion solves three basis fields once:
//! `N₂`, `N₃` (unit flux leaving through outlet 2 or 3 and entering through
//! outlet 1) and `P` (node source `ρ₀` with all flux leaving through
//! outlet 1). Every inner problem at exponents in `[1, 2)` is a linear
//! combination of them.

pub mod mesh;
pub mod solver;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

pub use mesh::JunctionMesh;
pub use solver::SolveStats;

use crate::expansion::{ConstantsProvider, InnerData};
use crate::model::{ConstantEntry, ExponentLabel, JunctionParams, NodeConstants, Provenance, Rho0Expr, StarGraph};
use crate::{Error, Result};

/// Tolerance of the compatibility check `∫F + Σ a_i s_i = 0`.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Length of the fitting window at the end of each outlet.
pub const FIT_WINDOW: f64 = 2.0;

/// Smooth step `χ` rising from 0 at `ξ = 1 + ℓ₀` to 1 at `ξ = 2 + ℓ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffProfile {
    /// `10t³ − 15t⁴ + 6t⁵`: two vanishing derivatives at each end.
    Quintic,
    /// `35t⁴ − 84t⁵ + 70t⁶ − 20t⁷`: three vanishing derivatives at each end.
    Septic,
}

impl CutoffProfile {
    /// `χ` at `t = ξ − (1 + ℓ₀)`.
    pub fn value(self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            CutoffProfile::Quintic => t * t * t * (10.0 - 15.0 * t + 6.0 * t * t),
            CutoffProfile::Septic => t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3)),
        }
    }
}

/// Right-hand sides of the inner problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forcing {
    Zero,
    /// `Σ_j s_j (ξ_j χ_j'' + 2χ_j')`: the Laplacian of `Σ_j s_j ξ_j χ_j`,
    /// discretized as the grid Laplacian of the sampled product.
    Cutoff {
        slopes: [f64; 3],
        profile: CutoffProfile,
    },
    /// `c·ρ₀` on the node.
    NodeMass {
        coefficient: f64,
    },
}

/// Node density sampled at node cell centres and scaled to the configured
/// mass.
#[derive(Debug, Clone)]
pub struct NodeDensity {
    pub values: Vec<f64>,
    pub mass: f64,
    /// Ratio of the configured mass to the raw quadrature of the profile.
    pub scale: f64,
}

impl NodeDensity {
    /// Samples `rho0` (a constant when absent) and rescales it so that the
    /// cell quadrature reproduces `mass`.
    pub fn sample(mesh: &JunctionMesh, rho0: Option<&Rho0Expr>, mass: f64) -> Result<Self> {
        let vol = mesh.spacing.powi(3);
        let default = Rho0Expr::Constant(1.0);
        let rho = rho0.unwrap_or(&default);
        let raw: Vec<f64> = mesh.node_range().map(|c| rho.eval(mesh.node_cell_center(c))).collect();
        let total: f64 = raw.iter().sum::<f64>() * vol;
        if !(total > 0.0) {
            return Err(Error::config("node density must have positive integral over the node"));
        }
        let scale = mass / total;
        Ok(NodeDensity { values: raw.iter().map(|v| v * scale).collect(), mass, scale })
    }
}

/// A solved field with its outlet asymptotics `C^{(i)} + s_i ξ_i`.
#[derive(Debug, Clone)]
pub struct NField {
    pub values: Vec<f64>,
    pub slopes: [f64; 3],
    pub offsets: [f64; 3],
    /// RMS deviation of the layer averages from the fitted line.
    pub fit_residual: [f64; 3],
    /// `|Σ a_i s_i + ∫F| / (Σ|a_i s_i| + |∫F|)` with fitted slopes.
    pub flux_residual: f64,
    pub stats: SolveStats,
}

impl NField {
    fn layer_average(&self, mesh: &JunctionMesh, i: usize, t: usize) -> f64 {
        let r = mesh.layer_range(i, t);
        let n = r.len() as f64;
        self.values[r].iter().sum::<f64>() / n
    }

    /// Cell quadrature `∫ g·N` for a cell density `g`.
    pub fn pair(&self, mesh: &JunctionMesh, density: &[f64]) -> f64 {
        self.values.iter().zip(density).map(|(a, b)| a * b).sum::<f64>() * mesh.spacing.powi(3)
    }

    /// `∫ρ₀ N` over the node.
    pub fn node_integral(&self, mesh: &JunctionMesh, rho: &NodeDensity) -> f64 {
        self.values[mesh.node_range()].iter().zip(&rho.values).map(|(a, b)| a * b).sum::<f64>() * mesh.spacing.powi(3)
    }

    /// `∫(N − C^{(i)} − s_i ξ_i)` over the meshed part of outlet `i`
    /// (0-based), plus a geometric extrapolation of the remaining tail when
    /// the deviation is still resolved at the end of the window.
    pub fn tail_integral(&self, mesh: &JunctionMesh, i: usize) -> f64 {
        let dx = mesh.spacing;
        let dev = |t: usize| self.layer_average(mesh, i, t) - self.offsets[i] - self.slopes[i] * mesh.layer_center(t);
        let n = mesh.outlet_layers[i];
        let mut sum: f64 = (0..n).map(&dev).sum::<f64>() * dx * mesh.areas[i];
        let (a, b) = (dev(n - 1 - (1.0 / dx).round() as usize), dev(n - 1));
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if a.abs() > 1e-9 * scale && b.abs() < a.abs() && a * b > 0.0 {
            let rate = (a / b).ln();
            sum += b / rate * mesh.areas[i];
        }
        sum
    }
}

/// Cell density of a forcing (per unit volume).
pub fn forcing_density(mesh: &JunctionMesh, forcing: Forcing, rho: &NodeDensity) -> Result<Vec<f64>> {
    let mut f = vec![0.0; mesh.n_cells()];
    match forcing {
        Forcing::Zero => {}
        Forcing::NodeMass { coefficient } => {
            for (c, r) in mesh.node_range().zip(&rho.values) {
                f[c] = coefficient * r;
            }
        }
        Forcing::Cutoff { slopes, profile } => {
            let start = 1.0 + mesh.ell0;
            if start + 1.0 > mesh.truncation - FIT_WINDOW {
                return Err(Error::config("cut-off support overlaps the fitting window"));
            }
            let dx2 = mesh.spacing * mesh.spacing;
            for i in 0..3 {
                let q = |t: usize| {
                    let xi = mesh.layer_center(t);
                    slopes[i] * xi * profile.value(xi - start)
                };
                // Grid Laplacian of the sampled field; the cap layer is
                // left out because the cap flux there is imposed directly.
                for t in 1..mesh.outlet_layers[i] - 1 {
                    let v = (q(t + 1) - 2.0 * q(t) + q(t - 1)) / dx2;
                    if v != 0.0 {
                        for c in mesh.layer_range(i, t) {
                            f[c] = v;
                        }
                    }
                }
            }
        }
    }
    Ok(f)
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let offset = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - offset - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    (offset, slope, rms)
}

/// Solves `−ΔN = F` with Neumann walls and cap slopes `∂N/∂ξ_i = s_i`,
/// then fits the outlet asymptotics and shifts `N` so that the outlet-1
/// offset vanishes.
pub fn solve_field(mesh: &JunctionMesh, density: &[f64], cap_slopes: [f64; 3]) -> Result<NField> {
    let dx = mesh.spacing;
    let total_source: f64 = density.iter().sum::<f64>() * dx.powi(3);
    let cap_flux: f64 = (0..3).map(|i| mesh.areas[i] * cap_slopes[i]).sum();
    let scale = total_source.abs() + (0..3).map(|i| (mesh.areas[i] * cap_slopes[i]).abs()).sum::<f64>();
    if scale > 0.0 && (total_source + cap_flux).abs() > COMPATIBILITY_TOL * scale {
        return Err(Error::config(format!(
            "inner problem is incompatible: source integral {total_source:.6e} plus cap flux {cap_flux:.6e} does not vanish"
        )));
    }
    let mut b: Vec<f64> = density.iter().map(|f| f * dx * dx).collect();
    for i in 0..3 {
        if cap_slopes[i] != 0.0 {
            for c in mesh.layer_range(i, mesh.outlet_layers[i] - 1) {
                b[c] += dx * cap_slopes[i];
            }
        }
    }
    let (values, stats) = solver::solve(mesh, &b)?;
    let mut field =
        NField { values, slopes: [0.0; 3], offsets: [0.0; 3], fit_residual: [0.0; 3], flux_residual: 0.0, stats };
    for i in 0..3 {
        let n = mesh.outlet_layers[i];
        let first = (0..n).find(|&t| mesh.layer_center(t) >= mesh.truncation - FIT_WINDOW).unwrap_or(0);
        let xs: Vec<f64> = (first..n).map(|t| mesh.layer_center(t)).collect();
        let ys: Vec<f64> = (first..n).map(|t| field.layer_average(mesh, i, t)).collect();
        let (c, s, r) = fit_line(&xs, &ys);
        field.offsets[i] = c;
        field.slopes[i] = s;
        field.fit_residual[i] = r;
    }
    let gauge = field.offsets[0];
    field.values.iter_mut().for_each(|v| *v -= gauge);
    field.offsets.iter_mut().for_each(|v| *v -= gauge);
    let fitted: f64 = (0..3).map(|i| mesh.areas[i] * field.slopes[i]).sum();
    let denom = (0..3).map(|i| (mesh.areas[i] * field.slopes[i]).abs()).sum::<f64>() + total_source.abs();
    field.flux_residual = if denom > 0.0 { (fitted + total_source).abs() / denom } else { 0.0 };
    Ok(field)
}

/// Homogeneous solution with unit flux entering through outlet 1 and leaving
/// through outlet `which` (2 or 3): slopes `−1/a₁` and `+1/a_which`.
pub fn solve_homogeneous(mesh: &JunctionMesh, which: usize) -> Result<NField> {
    if !(which == 2 || which == 3) {
        return Err(Error::config(format!("homogeneous solutions are indexed by outlet 2 or 3, got {which}")));
    }
    let mut slopes = [0.0; 3];
    slopes[0] = -1.0 / mesh.areas[0];
    slopes[which - 1] = 1.0 / mesh.areas[which - 1];
    solve_field(mesh, &vec![0.0; mesh.n_cells()], slopes)
}

/// Green pairing `δ^{(i)} = ∫ N_i F` for `i = 2, 3`.
pub fn delta_constant(
    mesh: &JunctionMesh,
    n2: &NField,
    n3: &NField,
    forcing: Forcing,
    rho: &NodeDensity,
) -> Result<[f64; 2]> {
    if forcing == Forcing::Zero {
        return Ok([0.0; 2]);
    }
    let f = forcing_density(mesh, forcing, rho)?;
    Ok([n2.pair(mesh, &f), n3.pair(mesh, &f)])
}

/// Inner field with node source `c·ρ₀` and cap slopes, with its node
/// integral (outlet-1 gauge) and outlet tail integrals.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub field: NField,
    pub node_integral: f64,
    pub tails: [f64; 3],
}

pub fn solve_inner_inhomogeneous(
    mesh: &JunctionMesh,
    rho: &NodeDensity,
    coefficient: f64,
    cap_slopes: [f64; 3],
) -> Result<InnerSolution> {
    let f = forcing_density(mesh, Forcing::NodeMass { coefficient }, rho)?;
    let field = solve_field(mesh, &f, cap_slopes)?;
    let node_integral = field.node_integral(mesh, rho);
    let tails = [0, 1, 2].map(|i| field.tail_integral(mesh, i));
    Ok(InnerSolution { field, node_integral, tails })
}

/// Order of the leading discretization error of offsets and node
/// integrals, set by the `r^{2/3}` singularity along the re-entrant edges
/// where the outlets meet the node.
pub const ERROR_ORDER: f64 = 4.0 / 3.0;

/// Richardson combination of values on spacings `Δ` (`fine`) and `2Δ`.
pub fn richardson(fine: f64, coarse: f64) -> f64 {
    fine + (fine - coarse) / (2f64.powf(ERROR_ORDER) - 1.0)
}

/// The three basis fields on one mesh.
#[derive(Debug, Clone)]
pub struct BasisLevel {
    pub mesh: JunctionMesh,
    pub rho: NodeDensity,
    pub n2: NField,
    pub n3: NField,
    pub p: NField,
}

impl BasisLevel {
    /// Solves `N₂`, `N₃` and `P` concurrently.
    pub fn compute(mesh: JunctionMesh, rho: NodeDensity) -> Result<Self> {
        let (n2, n3, p) = std::thread::scope(|s| {
            let h2 = s.spawn(|| solve_homogeneous(&mesh, 2));
            let h3 = s.spawn(|| solve_homogeneous(&mesh, 3));
            let hp = s.spawn(|| {
                let slopes = [-rho.mass / mesh.areas[0], 0.0, 0.0];
                solve_inner_inhomogeneous(&mesh, &rho, 1.0, slopes).map(|s| s.field)
            });
            (h2.join(), h3.join(), hp.join())
        });
        let join = |r: std::thread::Result<Result<NField>>| r.map_err(|_| Error::solver("junction solve panicked"))?;
        Ok(BasisLevel { n2: join(n2)?, n3: join(n3)?, p: join(p)?, mesh, rho })
    }

    fn respond(&self, fluxes: [f64; 3], c: f64) -> ([f64; 2], f64) {
        let (a, b) = (fluxes[1], fluxes[2]);
        let delta = [1, 2].map(|i| a * self.n2.offsets[i] + b * self.n3.offsets[i] + c * self.p.offsets[i]);
        let k = a * self.n2.node_integral(&self.mesh, &self.rho)
            + b * self.n3.node_integral(&self.mesh, &self.rho)
            + c * self.p.node_integral(&self.mesh, &self.rho);
        (delta, k)
    }

    fn delta(&self, forcing: Forcing) -> Result<[f64; 2]> {
        delta_constant(&self.mesh, &self.n2, &self.n3, forcing, &self.rho)
    }

    fn worst_flux_residual(&self) -> f64 {
        self.n2.flux_residual.max(self.n3.flux_residual).max(self.p.flux_residual)
    }
}

/// Basis fields on the requested mesh and, when the outlets survive
/// coarsening unchanged, on the mesh with twice the spacing. Reported
/// constants are Richardson-extrapolated from the two.
#[derive(Debug, Clone)]
pub struct JunctionBasis {
    pub fine: BasisLevel,
    pub coarse: Option<BasisLevel>,
}

impl JunctionBasis {
    pub fn build(
        ell0: f64,
        radii: [f64; 3],
        rho0: Option<&Rho0Expr>,
        mass: f64,
        params: JunctionParams,
    ) -> Result<Self> {
        let mesh = JunctionMesh::new(ell0, radii, params.spacing, params.truncation)?;
        let coarse_mesh = JunctionMesh::new(ell0, radii, 2.0 * params.spacing, params.truncation)
            .ok()
            .filter(|c| c.areas == mesh.areas);
        let rho = NodeDensity::sample(&mesh, rho0, mass)?;
        let coarse_rho = match &coarse_mesh {
            Some(c) => Some(NodeDensity::sample(c, rho0, mass)?),
            None => None,
        };
        let (fine, coarse) = std::thread::scope(|s| {
            let hc = s.spawn(|| match (coarse_mesh, coarse_rho) {
                (Some(m), Some(r)) => BasisLevel::compute(m, r).map(Some),
                _ => Ok(None),
            });
            let fine = BasisLevel::compute(mesh, rho);
            (fine, hc.join())
        });
        let coarse = coarse.map_err(|_| Error::solver("junction solve panicked"))??;
        Ok(JunctionBasis { fine: fine?, coarse })
    }

    pub fn for_graph(graph: &StarGraph, params: JunctionParams) -> Result<Self> {
        let radii = [0, 1, 2].map(|i| graph.edges[i].h_at_vertex());
        Self::build(graph.node.ell0, radii, graph.node.rho0.as_ref(), graph.node.mass_integral, params)
    }

    pub fn is_extrapolated(&self) -> bool {
        self.coarse.is_some()
    }

    /// Jumps and node integral of the inner problem with outlet fluxes
    /// `fluxes[i] = πh_i² s_i` and node source `c·ρ₀`, by linear response.
    /// The outlet-1 flux is implied by compatibility.
    pub fn respond(&self, fluxes: [f64; 3], c: f64) -> Result<([f64; 2], f64)> {
        let mass = self.fine.rho.mass;
        let scale = fluxes.iter().map(|f| f.abs()).sum::<f64>() + (c * mass).abs();
        let imbalance = fluxes.iter().sum::<f64>() + c * mass;
        if scale > 0.0 && imbalance.abs() > 1e-3 * scale {
            return Err(Error::solver(format!(
                "inner data violate compatibility: relative imbalance {:.3e}",
                imbalance.abs() / scale
            )));
        }
        let (d, k) = self.fine.respond(fluxes, c);
        Ok(match &self.coarse {
            Some(level) => {
                let (dc, kc) = level.respond(fluxes, c);
                ([richardson(d[0], dc[0]), richardson(d[1], dc[1])], richardson(k, kc))
            }
            None => (d, k),
        })
    }

    /// Green pairing of the basis fields with a forcing.
    pub fn delta(&self, forcing: Forcing) -> Result<[f64; 2]> {
        let d = self.fine.delta(forcing)?;
        Ok(match &self.coarse {
            Some(level) => {
                let dc = level.delta(forcing)?;
                [richardson(d[0], dc[0]), richardson(d[1], dc[1])]
            }
            None => d,
        })
    }

    pub fn worst_flux_residual(&self) -> f64 {
        let c = self.coarse.as_ref().map_or(0.0, BasisLevel::worst_flux_residual);
        self.fine.worst_flux_residual().max(c)
    }
}

/// Serializable summary of a basis solve.
#[derive(Debug, Clone, Serialize)]
pub struct BasisReport {
    pub spacing: f64,
    pub truncation: f64,
    pub cells: usize,
    pub areas: [f64; 3],
    pub target_areas: [f64; 3],
    pub density_scale: f64,
    pub extrapolated: bool,
    pub fields: BTreeMap<String, FieldReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldReport {
    pub slopes: [f64; 3],
    pub offsets: [f64; 3],
    pub fit_residual: [f64; 3],
    pub flux_residual: f64,
    pub node_integral: f64,
    pub iterations: usize,
}

impl JunctionBasis {
    /// Fine-level field data; offsets and node integrals extrapolated when
    /// a coarse level exists.
    pub fn report(&self) -> BasisReport {
        let l = &self.fine;
        let c = self.coarse.as_ref();
        let ex = |f: f64, g: Option<f64>| g.map_or(f, |g| richardson(f, g));
        let f = |n: &NField, nc: Option<&NField>| FieldReport {
            slopes: n.slopes,
            offsets: [0, 1, 2].map(|i| ex(n.offsets[i], nc.map(|m| m.offsets[i]))),
            fit_residual: n.fit_residual,
            flux_residual: n.flux_residual,
            node_integral: ex(
                n.node_integral(&l.mesh, &l.rho),
                nc.zip(c).map(|(m, lc)| m.node_integral(&lc.mesh, &lc.rho)),
            ),
            iterations: n.stats.iterations,
        };
        let fields = [("N2", &l.n2, c.map(|x| &x.n2)), ("N3", &l.n3, c.map(|x| &x.n3)), ("P", &l.p, c.map(|x| &x.p))]
            .into_iter()
            .map(|(k, n, nc)| (k.to_string(), f(n, nc)))
            .collect();
        BasisReport {
            spacing: l.mesh.spacing,
            truncation: l.mesh.truncation,
            cells: l.mesh.n_cells(),
            areas: l.mesh.areas,
            target_areas: l.mesh.target_areas,
            density_scale: l.rho.scale,
            extrapolated: self.is_extrapolated(),
            fields,
        }
    }
}

/// Computes node constants on demand from junction solves and records every
/// value it hands out.
pub struct JunctionProvider {
    params: JunctionParams,
    graph: StarGraph,
    basis: Option<JunctionBasis>,
    recorded: NodeConstants,
}

impl JunctionProvider {
    pub fn new(graph: &StarGraph, params: JunctionParams) -> Result<Self> {
        let radii = [0, 1, 2].map(|i| graph.edges[i].h_at_vertex());
        // Validate the geometry eagerly; the solves themselves are deferred.
        JunctionMesh::new(graph.node.ell0, radii, params.spacing, params.truncation)?;
        Ok(JunctionProvider { params, graph: graph.clone(), basis: None, recorded: NodeConstants::default() })
    }

    pub fn basis(&mut self) -> Result<&JunctionBasis> {
        if self.basis.is_none() {
            self.basis = Some(JunctionBasis::for_graph(&self.graph, self.params)?);
        }
        Ok(self.basis.as_ref().expect("basis just computed"))
    }

    /// All constants handed out so far, as a table.
    pub fn recorded(&self) -> &NodeConstants {
        &self.recorded
    }

    fn provenance(&self) -> Provenance {
        Provenance::Computed { spacing: self.params.spacing, truncation: self.params.truncation }
    }

    fn evaluate(&mut self, d: &InnerData) -> Result<Option<([f64; 2], f64)>> {
        if !(1.0..2.0).contains(&d.exponent) {
            return Ok(None);
        }
        let weights = self.graph.vertex_weights();
        let fluxes = [0, 1, 2].map(|i| PI * weights[i] * d.slopes[i]);
        let (delta, k) = self.basis()?.respond(fluxes, d.node_coefficient)?;
        let prov = self.provenance();
        let label: ExponentLabel = d.label;
        for (j, v) in delta.iter().enumerate() {
            self.recorded.delta.insert((label, j + 2), ConstantEntry { value: *v, provenance: prov });
        }
        self.recorded.node_integrals.insert(label, ConstantEntry { value: k, provenance: prov });
        for edge in 1..=3 {
            self.recorded.tails.insert((label, edge), ConstantEntry { value: 0.0, provenance: prov });
        }
        Ok(Some((delta, k)))
    }
}

impl ConstantsProvider for JunctionProvider {
    fn jumps(&mut self, d: &InnerData) -> Result<Option<[f64; 2]>> {
        Ok(self.evaluate(d)?.map(|(delta, _)| delta))
    }

    fn node_integral(&mut self, d: &InnerData) -> Result<Option<f64>> {
        Ok(self.evaluate(d)?.map(|(_, k)| k))
    }

    /// Outlets are straight, so layer averages of every basis field are
    /// exactly linear away from sources and the tails vanish.
    fn tail(&mut self, exponent: f64, _edge: usize) -> Option<f64> {
        (exponent < 2.0).then_some(0.0)
    }

    fn tails_are_approximate(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> JunctionMesh {
        let h = 0.375 / PI.sqrt();
        JunctionMesh::new(0.25, [h; 3], 1.0 / 32.0, 6.0).unwrap()
    }

    #[test]
    fn zero_flux_field_is_constant() {
        let m = mesh();
        let f = solve_field(&m, &vec![0.0; m.n_cells()], [0.0; 3]).unwrap();
        assert!(f.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn homogeneous_slopes_and_symmetry() {
        let m = mesh();
        let n2 = solve_homogeneous(&m, 2).unwrap();
        let n3 = solve_homogeneous(&m, 3).unwrap();
        let a = m.areas;
        assert!((n2.slopes[0] * a[0] + 1.0).abs() < 0.02);
        assert!((n2.slopes[1] * a[1] - 1.0).abs() < 0.02);
        assert!(n2.slopes[2].abs() < 0.02 / a[1]);
        assert!(n2.flux_residual < 1e-3);
        assert!((n2.offsets[1] - n3.offsets[2]).abs() < 1e-6);
        assert!((n2.offsets[2] - n3.offsets[1]).abs() < 1e-6);
        let n = m.node_cells;
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let u = n2.values[m.node_index([x, y, z])];
                    let v = n3.values[m.node_index([x, z, y])];
                    assert!((u - v).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn incompatible_data_rejected() {
        let m = mesh();
        let rho = NodeDensity::sample(&m, None, 1.0).unwrap();
        assert!(solve_inner_inhomogeneous(&m, &rho, 1.0, [0.0; 3]).is_err());
    }

    #[test]
    fn constant_density_flux_balance() {
        let m = mesh();
        let vol = 0.125;
        let rho = NodeDensity::sample(&m, Some(&Rho0Expr::Constant(1.0)), vol).unwrap();
        let s = -vol / (3.0 * m.areas[0]);
        let sol = solve_inner_inhomogeneous(&m, &rho, 1.0, [s; 3]).unwrap();
        assert!(sol.field.flux_residual < 1e-3);
        for t in sol.tails {
            assert!(t.abs() < 1e-6);
        }
    }

    #[test]
    fn green_pairing_matches_direct_offsets() {
        let m = mesh();
        let rho = NodeDensity::sample(&m, None, 0.1).unwrap();
        let n2 = solve_homogeneous(&m, 2).unwrap();
        let n3 = solve_homogeneous(&m, 3).unwrap();
        assert_eq!(delta_constant(&m, &n2, &n3, Forcing::Zero, &rho).unwrap(), [0.0; 2]);
        let slopes = [-2.0, 1.0, 1.0];
        let green =
            delta_constant(&m, &n2, &n3, Forcing::Cutoff { slopes, profile: CutoffProfile::Quintic }, &rho).unwrap();
        let direct = solve_field(&m, &vec![0.0; m.n_cells()], slopes).unwrap();
        for j in 0..2 {
            assert!(
                (green[j] - direct.offsets[j + 1]).abs() < 1e-3 * (1.0 + green[j].abs()),
                "{green:?} {:?}",
                direct.offsets
            );
        }
        assert!((green[0] - green[1]).abs() < 0.01 * green[0].abs().max(1e-12));
    }
}
