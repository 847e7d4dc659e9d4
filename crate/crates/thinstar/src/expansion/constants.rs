//! Node constants as consumed by the recursion.

use crate::model::{ConstantsSource, NodeConstants, StarGraph};
use crate::Result;

/// Data of the inner problem at exponent `e ∈ [1, 2)`: the outlet slopes
/// `w'_{e−1}^{(i)}(0)` and the coefficient of the node source `ρ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerData {
    pub exponent: f64,
    pub label: crate::model::ExponentLabel,
    pub slopes: [f64; 3],
    pub node_coefficient: f64,
}

/// Source of jumps, node integrals and tail integrals.
///
/// `None` means the constant is unavailable; the driver then truncates the
/// series (jumps, node integrals) or substitutes zero and raises a flag
/// (tails).
pub trait ConstantsProvider {
    /// `(δ^{(2)}, δ^{(3)})` at the given exponent (only asked for `e ≥ 1`).
    fn jumps(&mut self, data: &InnerData) -> Result<Option<[f64; 2]>>;
    /// `∫ρ₀ N̂_e` with the outlet-1 vertex value removed (only asked for `e ≥ 1`).
    fn node_integral(&mut self, data: &InnerData) -> Result<Option<f64>>;
    /// `∫(N_e − G_e^{(i)})` along outlet `i` (1-based).
    fn tail(&mut self, exponent: f64, edge: usize) -> Option<f64>;
    /// Whether a missing tail integral is an approximation (true) or exactly
    /// zero for this provider (false).
    fn tails_are_approximate(&self) -> bool;
}

/// Constants read from a table.
#[derive(Debug, Clone)]
pub struct TableProvider {
    pub constants: NodeConstants,
    pub alpha: f64,
}

impl ConstantsProvider for TableProvider {
    fn jumps(&mut self, d: &InnerData) -> Result<Option<[f64; 2]>> {
        let a = self.constants.delta_at(d.exponent, self.alpha, 2);
        let b = self.constants.delta_at(d.exponent, self.alpha, 3);
        Ok(match (a, b) {
            (Some(a), Some(b)) => Some([a, b]),
            _ => None,
        })
    }

    fn node_integral(&mut self, d: &InnerData) -> Result<Option<f64>> {
        Ok(self.constants.node_integral_at(d.exponent, self.alpha))
    }

    fn tail(&mut self, exponent: f64, edge: usize) -> Option<f64> {
        self.constants.tail_at(exponent, self.alpha, edge)
    }

    fn tails_are_approximate(&self) -> bool {
        true
    }
}

/// Provider matching the graph's configured constants source.
pub fn provider_for(graph: &StarGraph, alpha: f64) -> Result<Box<dyn ConstantsProvider>> {
    Ok(match &graph.node.constants {
        ConstantsSource::Config(c) => Box::new(TableProvider { constants: c.clone(), alpha }),
        ConstantsSource::Computed(params) => Box::new(crate::junction::JunctionProvider::new(graph, *params)?),
    })
}
