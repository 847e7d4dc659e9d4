use crate::model::constants::NodeConstants;
use crate::{Error, Result};

/// Fraction of each edge that must be flat at both ends of a sampled radius.
pub const FLAT_MARGIN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum Radius {
    Constant(f64),
    /// Uniform samples of `h(x)` on `[0, ℓ]`, first sample at the vertex.
    Sampled(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub length: f64,
    pub radius: Radius,
}

impl EdgeSpec {
    pub fn constant(length: f64, radius: f64) -> Self {
        EdgeSpec { length, radius: Radius::Constant(radius) }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.radius, Radius::Constant(_))
    }

    /// Radius at `x`, linearly interpolated between samples.
    pub fn h(&self, x: f64) -> f64 {
        match &self.radius {
            Radius::Constant(h) => *h,
            Radius::Sampled(s) => {
                let n = s.len() - 1;
                let t = (x / self.length * n as f64).clamp(0.0, n as f64);
                let j = (t.floor() as usize).min(n - 1);
                let r = t - j as f64;
                s[j] * (1.0 - r) + s[j + 1] * r
            }
        }
    }

    /// Derivative of the interpolated radius (piecewise constant).
    pub fn h_prime(&self, x: f64) -> f64 {
        match &self.radius {
            Radius::Constant(_) => 0.0,
            Radius::Sampled(s) => {
                let n = s.len() - 1;
                let dx = self.length / n as f64;
                let t = (x / dx).clamp(0.0, n as f64);
                let j = (t.floor() as usize).min(n - 1);
                (s[j + 1] - s[j]) / dx
            }
        }
    }

    pub fn h_at_vertex(&self) -> f64 {
        self.h(0.0)
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let e = |m: String| Error::config(format!("edge {}: {m}", idx + 1));
        if !(self.length >= 1.0) || !self.length.is_finite() {
            return Err(e(format!("length {} must be finite and at least 1", self.length)));
        }
        match &self.radius {
            Radius::Constant(h) => {
                if !(*h > 0.0) || !h.is_finite() {
                    return Err(e(format!("radius {h} must be positive")));
                }
            }
            Radius::Sampled(s) => {
                if s.len() < 21 {
                    return Err(e("sampled radius needs at least 21 samples".into()));
                }
                if s.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
                    return Err(e("sampled radius must be strictly positive".into()));
                }
                let n = s.len() - 1;
                let margin = (FLAT_MARGIN_FRACTION * n as f64).ceil() as usize;
                let flat = |range: &[f64], v: f64| range.iter().all(|h| (h - v).abs() <= 1e-12 * v);
                if !flat(&s[..=margin], s[0]) || !flat(&s[n - margin..], s[n]) {
                    return Err(e(format!(
                        "sampled radius must be flat on at least {}% of the edge at both ends",
                        FLAT_MARGIN_FRACTION * 100.0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Node density profile, used only when the junction module computes the
/// node constants itself.
#[derive(Debug, Clone, PartialEq)]
pub enum Rho0Expr {
    Constant(f64),
    Gaussian { center: [f64; 3], width: f64, amplitude: f64 },
}

impl Rho0Expr {
    pub fn eval(&self, xi: [f64; 3]) -> f64 {
        match self {
            Rho0Expr::Constant(c) => *c,
            Rho0Expr::Gaussian { center, width, amplitude } => {
                let r2: f64 = xi.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * (-r2 / (width * width)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    /// Grid spacing Δ in stretched node coordinates.
    pub spacing: f64,
    /// Outlet truncation length R.
    pub truncation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstantsSource {
    Config(NodeConstants),
    Computed(JunctionParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub ell0: f64,
    /// `m = ∫ρ₀` over the node.
    pub mass_integral: f64,
    pub node_volume: f64,
    pub density_bounds: Option<(f64, f64)>,
    pub rho0: Option<Rho0Expr>,
    pub constants: ConstantsSource,
}

impl NodeSpec {
    /// Cube node of half-size `ell0` with the given mass and constants taken
    /// from an (initially empty) table.
    pub fn cube(ell0: f64, mass_integral: f64) -> Self {
        NodeSpec {
            ell0,
            mass_integral,
            node_volume: (2.0 * ell0).powi(3),
            density_bounds: None,
            rho0: None,
            constants: ConstantsSource::Config(NodeConstants::default()),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.ell0 > 0.0 && self.ell0 < 1.0 / 3.0) {
            return Err(Error::config(format!("ell0 out of range: {} not in (0, 1/3)", self.ell0)));
        }
        if !(self.mass_integral >= 0.0) || !self.mass_integral.is_finite() {
            return Err(Error::config(format!("mass_integral {} must be nonnegative", self.mass_integral)));
        }
        if !(self.node_volume > 0.0) {
            return Err(Error::config(format!("node_volume {} must be positive", self.node_volume)));
        }
        if let Some((c0, c1)) = self.density_bounds {
            let mean = self.mass_integral / self.node_volume;
            if !(c0 > 0.0 && c0 <= c1) {
                return Err(Error::config(format!("density bounds ({c0}, {c1}) must satisfy 0 < c0 <= c1")));
            }
            if mean < c0 || mean > c1 {
                return Err(Error::config(format!("mean density {mean} outside bounds ({c0}, {c1})")));
            }
        }
        if let ConstantsSource::Computed(p) = &self.constants {
            if !(p.spacing > 0.0 && p.truncation > 0.0) {
                return Err(Error::config("junction spacing and truncation must be positive"));
            }
            if self.rho0.is_none() {
                return Err(Error::config("computing junction constants requires a rho0 expression"));
            }
        }
        Ok(())
    }
}

/// Three edges joined at one vertex, plus the node descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGraph {
    pub edges: [EdgeSpec; 3],
    pub node: NodeSpec,
}

impl StarGraph {
    pub fn new(edges: [EdgeSpec; 3], node: NodeSpec) -> Result<Self> {
        let g = StarGraph { edges, node };
        g.validate()?;
        Ok(g)
    }

    /// Constant-radius star with a cube node and an empty constants table.
    pub fn constant(lengths: [f64; 3], radii: [f64; 3], ell0: f64, mass_integral: f64) -> Result<Self> {
        StarGraph::new(
            [
                EdgeSpec::constant(lengths[0], radii[0]),
                EdgeSpec::constant(lengths[1], radii[1]),
                EdgeSpec::constant(lengths[2], radii[2]),
            ],
            NodeSpec::cube(ell0, mass_integral),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            e.validate(i)?;
        }
        self.node.validate()
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.edges[0].length, self.edges[1].length, self.edges[2].length]
    }

    /// `h_i(0)²`, the Kirchhoff weights at the vertex.
    pub fn vertex_weights(&self) -> [f64; 3] {
        let h = |i: usize| self.edges[i].h_at_vertex();
        [h(0) * h(0), h(1) * h(1), h(2) * h(2)]
    }

    pub fn all_constant(&self) -> bool {
        self.edges.iter().all(EdgeSpec::is_constant)
    }

    /// Copy with a different vertex mass integral.
    pub fn with_mass(&self, mass_integral: f64) -> Self {
        let mut g = self.clone();
        g.node.mass_integral = mass_integral;
        g
    }

    pub fn with_constants(&self, constants: ConstantsSource) -> Self {
        let mut g = self.clone();
        g.node.constants = constants;
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn symmetric_star_is_valid() {
        assert!(StarGraph::constant([1.0; 3], [1.0; 3], 0.2, PI).is_ok());
    }

    #[test]
    fn ell0_range_is_enforced() {
        let err = StarGraph::constant([1.0; 3], [1.0; 3], 0.5, PI).unwrap_err();
        assert!(err.to_string().contains("ell0 out of range"));
    }

    #[test]
    fn short_edge_rejected() {
        assert!(StarGraph::constant([0.9, 1.0, 1.0], [1.0; 3], 0.2, PI).is_err());
    }

    #[test]
    fn sampled_radius_needs_flat_margins() {
        let mut s: Vec<f64> = (0..=100).map(|j| 1.0 + 0.001 * j as f64).collect();
        let e = EdgeSpec { length: 1.0, radius: Radius::Sampled(s.clone()) };
        assert!(e.validate(0).is_err());
        for v in s.iter_mut().take(6) {
            *v = 1.0;
        }
        let last = s[100];
        for v in s.iter_mut().skip(94) {
            *v = last;
        }
        let e = EdgeSpec { length: 1.0, radius: Radius::Sampled(s) };
        assert!(e.validate(0).is_ok());
    }

    #[test]
    fn density_bounds_checked_against_mean() {
        let mut g = StarGraph::constant([1.0; 3], [1.0; 3], 0.25, 0.125).unwrap();
        g.node.density_bounds = Some((0.5, 2.0));
        assert!(g.validate().is_ok());
        g.node.density_bounds = Some((2.0, 3.0));
        assert!(g.validate().is_err());
    }
}
