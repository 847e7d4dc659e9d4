//! Eigenpairs of the limit problem on the star graph.
//!
//! Constant radii go through the secular equation and yield closed-form
//! eigenfunctions; sampled radii go through piecewise-linear finite elements.
//! In regime One the vertex carries the mass `m/π`, which enters both the
//! Kirchhoff condition and the mass matrix.

pub mod discrete;
pub mod secular;
pub mod star_matrix;

pub use discrete::{assemble_discrete, assemble_with_origin, DiscreteGraphSystem, Mesh};
pub use secular::{relative_gaps, secular_eigenpairs, SecularEquation, DEGENERACY_TOL};
pub use star_matrix::{StarFactor, StarLayout, StarMatrix};

use crate::model::{AlphaRegime, EigenPair, StarGraph};
use crate::{Error, Result};

/// Elements per unit length used when a graph has sampled radii.
pub const DEFAULT_POINTS_PER_UNIT: usize = 4000;

/// First `count` eigenpairs, ascending. Degenerate pairs are flagged, not
/// rejected; consumers that need simple eigenvalues check the flag.
pub fn solve_limit_spectrum(graph: &StarGraph, regime: &AlphaRegime, count: usize) -> Result<Vec<EigenPair>> {
    if count == 0 {
        return Err(Error::config("eigenpair count must be at least 1"));
    }
    regime.validate()?;
    if graph.all_constant() {
        let eq = SecularEquation::for_graph(graph, regime)?;
        Ok(secular_eigenpairs(&eq, *regime, count))
    } else {
        solve_limit_spectrum_discrete(graph, regime, count, Mesh::per_unit_length(graph, DEFAULT_POINTS_PER_UNIT))
    }
}

/// Finite-element eigenpairs on the given mesh, whatever the radius type.
pub fn solve_limit_spectrum_discrete(
    graph: &StarGraph,
    regime: &AlphaRegime,
    count: usize,
    mesh: Mesh,
) -> Result<Vec<EigenPair>> {
    if count == 0 {
        return Err(Error::config("eigenpair count must be at least 1"));
    }
    let beta = regime.vertex_mass_coefficient(graph.node.mass_integral);
    let sys = assemble_discrete(graph, beta, mesh)?;
    let values = sys.eigenvalues(count + 1);
    let gaps = relative_gaps(&values);
    let vecs = sys.eigenvectors(&values[..count]);
    let pairs = vecs
        .iter()
        .enumerate()
        .map(|(n, u)| {
            let scale = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            EigenPair {
                lambda: values[n],
                index: n + 1,
                triple: sys.to_triple(u),
                regime: *regime,
                beta,
                relative_gap: gaps[n],
                degenerate: gaps[n] < DEGENERACY_TOL,
                pole_type: u[0].abs() < 1e-6 * scale,
            }
        })
        .collect();
    Ok(pairs)
}

/// The `n`-th eigenpair (1-based), refusing degenerate ones.
pub fn simple_eigenpair(graph: &StarGraph, regime: &AlphaRegime, n: usize) -> Result<EigenPair> {
    if n == 0 {
        return Err(Error::config("eigenpair index is 1-based"));
    }
    let pairs = solve_limit_spectrum(graph, regime, n)?;
    let p = pairs.into_iter().nth(n - 1).expect("solver returns the requested count");
    if p.degenerate {
        return Err(Error::Degenerate { index: n, gap: p.relative_gap });
    }
    Ok(p)
}
