//! Direct reference solves for the ε-dependent lumped-mass surrogate.
//!
//! The surrogate is the star graph itself with the node replaced by a point
//! mass `ε^{1−α} m/π` at the vertex. In node-offset mode the vertex sits at
//! `x = εℓ₀` on every edge, which shortens the edges by the node radius.
//! The surrogate carries the mass-driven terms of the expansion exactly and
//! none of the geometric jump terms.

use serde::Serialize;

use crate::expansion::mu_one_minus_alpha;
use crate::limit_spectrum::{assemble_with_origin, solve_limit_spectrum, DiscreteGraphSystem, Mesh};
use crate::model::{AlphaRegime, StarGraph};
use crate::numerics::{line_fit, polyfit};
use crate::{Error, Result};

/// Smallest number of sweep points accepted by [`RateFit`].
pub const MIN_SAMPLES: usize = 4;
/// Smallest span of a sweep, in decades.
pub const MIN_DECADES: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateOptions {
    pub mesh: Mesh,
    pub node_offset: bool,
}

/// Stiffness and mass of the surrogate at one ε.
#[derive(Debug, Clone)]
pub struct SurrogateSystem {
    pub eps: f64,
    pub alpha: f64,
    pub system: DiscreteGraphSystem,
}

/// Vertex lump `ε^{1−α} m/π`.
pub fn lumped_mass(eps: f64, alpha: f64, mass_integral: f64) -> f64 {
    eps.powf(1.0 - alpha) * mass_integral / std::f64::consts::PI
}

pub fn surrogate_system(graph: &StarGraph, alpha: f64, eps: f64, opts: SurrogateOptions) -> Result<SurrogateSystem> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::config(format!("eps must lie in (0, 0.5), got {eps}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::config(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let beta = lumped_mass(eps, alpha, graph.node.mass_integral);
    let origin = if opts.node_offset { eps * graph.node.ell0 } else { 0.0 };
    let system = assemble_with_origin(graph, beta, opts.mesh, origin)?;
    Ok(SurrogateSystem { eps, alpha, system })
}

/// `λ_1(ε) ≤ … ≤ λ_{n_max}(ε)`.
pub fn solve_surrogate(
    graph: &StarGraph,
    alpha: f64,
    eps: f64,
    n_max: usize,
    opts: SurrogateOptions,
) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::config("need at least one eigenvalue"));
    }
    Ok(surrogate_system(graph, alpha, eps, opts)?.system.eigenvalues(n_max))
}

/// Surrogate eigenvalues at several ε, solved concurrently. Row `j` holds
/// `λ_1..λ_{n_max}` at `eps[j]`.
pub fn sweep(
    graph: &StarGraph,
    alpha: f64,
    eps: &[f64],
    n_max: usize,
    opts: SurrogateOptions,
) -> Result<Vec<Vec<f64>>> {
    std::thread::scope(|s| {
        let handles: Vec<_> =
            eps.iter().map(|&e| s.spawn(move || solve_surrogate(graph, alpha, e, n_max, opts))).collect();
        handles.into_iter().map(|h| h.join().map_err(|_| Error::solver("surrogate solve panicked"))?).collect()
    })
}

/// Log-log fit of `|λ_n(ε) − Λ_n|` against ε, plus a prefactor estimate.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Constant term of a quadratic fit of `value / ε^{1−α}` in `ε^{1−α}`.
    pub prefactor: f64,
}

impl RateFit {
    pub fn new(eps: &[f64], values: &[f64], alpha: f64) -> Result<Self> {
        validate_eps(eps)?;
        if values.len() != eps.len() {
            return Err(Error::config("rate fit needs one value per eps"));
        }
        let floor = f64::MIN_POSITIVE;
        let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ly: Vec<f64> = values.iter().map(|v| v.abs().max(floor).ln()).collect();
        let (slope, intercept, residual) = line_fit(&lx, &ly);
        let t: Vec<f64> = eps.iter().map(|e| e.powf(1.0 - alpha)).collect();
        let scaled: Vec<f64> = values.iter().zip(&t).map(|(v, t)| v / t).collect();
        let prefactor = if alpha < 1.0 { polyfit(&t, &scaled, 2).0[0] } else { f64::NAN };
        Ok(RateFit { eps: eps.to_vec(), values: values.to_vec(), slope, intercept, residual, prefactor })
    }
}

/// Sweep lists must be strictly decreasing, have at least [`MIN_SAMPLES`]
/// entries and span [`MIN_DECADES`].
pub fn validate_eps(eps: &[f64]) -> Result<()> {
    if eps.len() < MIN_SAMPLES {
        return Err(Error::config(format!("need at least {MIN_SAMPLES} eps values, got {}", eps.len())));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::config("eps values must be strictly decreasing"));
    }
    if (eps[0] / eps[eps.len() - 1]).log10() < MIN_DECADES - 1e-9 {
        return Err(Error::config(format!("eps values must span at least {MIN_DECADES} decades")));
    }
    Ok(())
}

/// Outcome of [`rate_study`].
#[derive(Debug, Clone, Serialize)]
pub struct RateStudy {
    pub n: usize,
    pub alpha: f64,
    pub limit: f64,
    /// `λ_n(ε)` per sweep point.
    pub lambdas: Vec<f64>,
    pub fit: RateFit,
    /// `−(Λ_n W_n(0))² m/π`.
    pub predicted_prefactor: f64,
    pub prefactor_relative_error: f64,
    /// `|λ_n − λ_n(doubled mesh)| / |λ_n − Λ_n|` at the smallest ε.
    pub mesh_sensitivity: f64,
}

/// Largest tolerated mesh sensitivity before the study is rejected.
pub const MAX_MESH_SENSITIVITY: f64 = 0.1;

pub fn rate_study(graph: &StarGraph, alpha: f64, n: usize, eps: &[f64], opts: SurrogateOptions) -> Result<RateStudy> {
    validate_eps(eps)?;
    if n == 0 {
        return Err(Error::config("eigenvalue index is 1-based"));
    }
    let base = solve_limit_spectrum(graph, &AlphaRegime::Zero, n)?.into_iter().nth(n - 1).expect("n pairs");
    let limit = base.lambda;
    let rows = sweep(graph, alpha, eps, n, opts)?;
    let lambdas: Vec<f64> = rows.iter().map(|r| r[n - 1]).collect();
    let values: Vec<f64> = lambdas.iter().map(|l| l - limit).collect();

    let last = *eps.last().expect("validated non-empty");
    let fine = SurrogateOptions { mesh: Mesh { intervals: opts.mesh.intervals.map(|k| 2 * k) }, ..opts };
    let refined = solve_surrogate(graph, alpha, last, n, fine)?[n - 1];
    let signal = values.last().expect("validated non-empty").abs();
    let shift = (refined - lambdas[lambdas.len() - 1]).abs();
    let mesh_sensitivity = if signal > 0.0 {
        shift / signal
    } else if shift > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    if mesh_sensitivity > MAX_MESH_SENSITIVITY && !base.pole_type {
        return Err(Error::solver(format!(
            "discretization error dominates at eps = {last:e}: doubling the mesh moves lambda by {:.1}% of the signal; use a finer mesh",
            100.0 * mesh_sensitivity
        )));
    }
    let fit = RateFit::new(eps, &values, alpha)?;
    let predicted_prefactor = mu_one_minus_alpha(&base, graph.node.mass_integral);
    let prefactor_relative_error = (fit.prefactor - predicted_prefactor).abs() / predicted_prefactor.abs();
    Ok(RateStudy { n, alpha, limit, lambdas, fit, predicted_prefactor, prefactor_relative_error, mesh_sensitivity })
}

/// Uniform bounds over a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub alpha: f64,
    pub eps: Vec<f64>,
    /// Minimum of `λ_1(ε)` over the sweep.
    pub lambda1_min: f64,
    /// Positive lower constant: a tenth of the first eigenvalue with the
    /// full lump `m/π` at the vertex.
    pub lower_bound: f64,
    /// Per `n`, the maximum of `λ_n(ε)` over the sweep.
    pub lambda_max: Vec<f64>,
    /// Per `n`, the eigenvalue without vertex mass on edges shortened by
    /// the largest node offset in the sweep.
    pub upper_bounds: Vec<f64>,
    /// Per `n`, `max_ε |λ_n(ε) − Λ_n| / ε^{1−α}`.
    pub max_scaled_deviation: Vec<f64>,
    pub ordered: bool,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn bounds_check(
    graph: &StarGraph,
    alpha: f64,
    eps: &[f64],
    n_max: usize,
    opts: SurrogateOptions,
) -> Result<BoundsReport> {
    if eps.is_empty() {
        return Err(Error::config("eps list is empty"));
    }
    let rows = sweep(graph, alpha, eps, n_max, opts)?;
    let heavy = assemble_with_origin(graph, graph.node.mass_integral / std::f64::consts::PI, opts.mesh, 0.0)?;
    let lower_bound = 0.1 * heavy.eigenvalue(1);
    let max_eps = eps.iter().copied().fold(0.0, f64::max);
    let origin = if opts.node_offset { max_eps * graph.node.ell0 } else { 0.0 };
    let light = assemble_with_origin(graph, 0.0, opts.mesh, origin)?;
    let upper_bounds: Vec<f64> = light.eigenvalues(n_max).iter().map(|v| v * (1.0 + 1e-9)).collect();
    let limits = assemble_with_origin(graph, 0.0, opts.mesh, 0.0)?.eigenvalues(n_max);
    let lambda1_min = rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    let lambda_max: Vec<f64> =
        (0..n_max).map(|k| rows.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let max_scaled_deviation: Vec<f64> = (0..n_max)
        .map(|k| rows.iter().zip(eps).map(|(r, e)| (r[k] - limits[k]).abs() / e.powf(1.0 - alpha)).fold(0.0, f64::max))
        .collect();
    let ordered = rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
    let upper_ok = lambda_max.iter().zip(&upper_bounds).all(|(l, u)| l <= u);
    Ok(BoundsReport {
        alpha,
        eps: eps.to_vec(),
        lambda1_min,
        lower_bound,
        lambda_max,
        upper_bounds,
        max_scaled_deviation,
        ordered,
        lower_ok: lambda1_min > lower_bound,
        upper_ok,
    })
}

/// One CSV row per `(ε, n)`: `eps, n, lambda, lambda - Lambda, predicted,
/// residual`, where the prediction is `Λ_n + ε^{1−α} μ_{1−α,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub eps: f64,
    pub n: usize,
    pub lambda: f64,
    pub deviation: f64,
    pub predicted: f64,
    pub residual: f64,
}

pub fn oracle_table(
    graph: &StarGraph,
    alpha: f64,
    eps: &[f64],
    n_max: usize,
    opts: SurrogateOptions,
) -> Result<Vec<OracleRow>> {
    if eps.is_empty() {
        return Err(Error::config("eps list is empty"));
    }
    let pairs = solve_limit_spectrum(graph, &AlphaRegime::Zero, n_max)?;
    let rows = sweep(graph, alpha, eps, n_max, opts)?;
    let mut out = Vec::with_capacity(eps.len() * n_max);
    for (row, &e) in rows.iter().zip(eps) {
        for (k, pair) in pairs.iter().enumerate() {
            let mu = mu_one_minus_alpha(pair, graph.node.mass_integral);
            let predicted = pair.lambda + e.powf(1.0 - alpha) * mu;
            out.push(OracleRow {
                eps: e,
                n: k + 1,
                lambda: row[k],
                deviation: row[k] - pair.lambda,
                predicted,
                residual: row[k] - predicted,
            });
        }
    }
    Ok(out)
}
