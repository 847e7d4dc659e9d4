//! JSON configuration schema.
//!
//! ```json
//! {
//!   "edges": [{"length": 1.0, "radius": {"const": 1.0}}, ...],
//!   "node": {"ell0": 0.2, "mass_integral": 3.14159, "node_volume": 0.064,
//!            "density_bounds": [c0, c1], "rho0": {"const": 1.0},
//!            "delta_table": {"(1,2)": 0.1}, "node_integrals": {"1": 0.0},
//!            "tail_table": {"(1,1)": 0.0},
//!            "junction": {"spacing": 0.03125, "truncation": 6.0}},
//!   "alpha": {"regime": "irrational", "value": 0.7071}
//! }
//! ```
//!
//! `density_bounds`, `rho0`, the three tables and `junction` are optional.
//! A `junction` block switches the node constants to being computed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::constants::{ConstantTables, NodeConstants};
use crate::model::graph::{ConstantsSource, EdgeSpec, JunctionParams, NodeSpec, Radius, Rho0Expr, StarGraph};
use crate::model::regime::AlphaRegime;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub edges: Vec<RawEdge>,
    pub node: RawNode,
    pub alpha: RawAlpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEdge {
    pub length: f64,
    pub radius: RawRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawRadius {
    Const(f64),
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawRho0 {
    Const(f64),
    Gaussian { center: [f64; 3], width: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawJunction {
    pub spacing: f64,
    pub truncation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNode {
    pub ell0: f64,
    pub mass_integral: f64,
    pub node_volume: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<RawRho0>,
    #[serde(flatten)]
    pub tables: ConstantTables,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junction: Option<RawJunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAlpha {
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u32>,
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<(StarGraph, AlphaRegime)> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<(StarGraph, AlphaRegime)> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config(format!("schema violation: {e}")))?;
    from_raw(&raw)
}

pub fn from_raw(raw: &RawConfig) -> Result<(StarGraph, AlphaRegime)> {
    if raw.edges.len() != 3 {
        return Err(Error::config(format!("expected exactly 3 edges, found {}", raw.edges.len())));
    }
    let edge = |e: &RawEdge| EdgeSpec {
        length: e.length,
        radius: match &e.radius {
            RawRadius::Const(h) => Radius::Constant(*h),
            RawRadius::Samples(s) => Radius::Sampled(s.clone()),
        },
    };
    let n = &raw.node;
    let constants = match &n.junction {
        Some(j) => {
            if !n.tables.is_empty() {
                return Err(Error::config("give either constant tables or a junction block, not both"));
            }
            ConstantsSource::Computed(JunctionParams { spacing: j.spacing, truncation: j.truncation })
        }
        None => ConstantsSource::Config(NodeConstants::from_tables(&n.tables)?),
    };
    let node = NodeSpec {
        ell0: n.ell0,
        mass_integral: n.mass_integral,
        node_volume: n.node_volume,
        density_bounds: n.density_bounds.map(|[a, b]| (a, b)),
        rho0: n.rho0.as_ref().map(|r| match r {
            RawRho0::Const(c) => Rho0Expr::Constant(*c),
            RawRho0::Gaussian { center, width, amplitude } => {
                Rho0Expr::Gaussian { center: *center, width: *width, amplitude: *amplitude }
            }
        }),
        constants,
    };
    let graph = StarGraph::new([edge(&raw.edges[0]), edge(&raw.edges[1]), edge(&raw.edges[2])], node)?;
    let a = &raw.alpha;
    let need_value = || a.value.ok_or_else(|| Error::config("alpha.value is required for this regime"));
    let regime = match a.regime.as_str() {
        "zero" => AlphaRegime::Zero,
        "one" => AlphaRegime::One,
        "irrational" => AlphaRegime::irrational(need_value()?)?,
        "rational" => {
            let (m0, n0) = match (a.m0, a.n0) {
                (Some(m0), Some(n0)) => (m0, n0),
                _ => return Err(Error::config("rational regime needs m0 and n0")),
            };
            AlphaRegime::rational(m0, n0)?
        }
        other => return Err(Error::config(format!("unknown regime '{other}'"))),
    };
    Ok((graph, regime))
}

/// Inverse of [`from_raw`].
pub fn to_raw(graph: &StarGraph, regime: &AlphaRegime) -> RawConfig {
    let edges = graph
        .edges
        .iter()
        .map(|e| RawEdge {
            length: e.length,
            radius: match &e.radius {
                Radius::Constant(h) => RawRadius::Const(*h),
                Radius::Sampled(s) => RawRadius::Samples(s.clone()),
            },
        })
        .collect();
    let n = &graph.node;
    let (tables, junction) = match &n.constants {
        ConstantsSource::Config(c) => (c.to_tables(), None),
        ConstantsSource::Computed(p) => {
            (ConstantTables::default(), Some(RawJunction { spacing: p.spacing, truncation: p.truncation }))
        }
    };
    let node = RawNode {
        ell0: n.ell0,
        mass_integral: n.mass_integral,
        node_volume: n.node_volume,
        density_bounds: n.density_bounds.map(|(a, b)| [a, b]),
        rho0: n.rho0.as_ref().map(|r| match r {
            Rho0Expr::Constant(c) => RawRho0::Const(*c),
            Rho0Expr::Gaussian { center, width, amplitude } => {
                RawRho0::Gaussian { center: *center, width: *width, amplitude: *amplitude }
            }
        }),
        tables,
        junction,
    };
    let alpha = match *regime {
        AlphaRegime::Zero => RawAlpha { regime: "zero".into(), value: None, m0: None, n0: None },
        AlphaRegime::One => RawAlpha { regime: "one".into(), value: None, m0: None, n0: None },
        AlphaRegime::Irrational { alpha } => {
            RawAlpha { regime: "irrational".into(), value: Some(alpha), m0: None, n0: None }
        }
        AlphaRegime::Rational { m0, n0 } => {
            RawAlpha { regime: "rational".into(), value: None, m0: Some(m0), n0: Some(n0) }
        }
    };
    RawConfig { edges, node, alpha }
}

pub fn serialize_config(graph: &StarGraph, regime: &AlphaRegime) -> String {
    serde_json::to_string_pretty(&to_raw(graph, regime)).expect("config types always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYMMETRIC: &str = r#"{
        "edges": [{"length": 1, "radius": {"const": 1}},
                  {"length": 1, "radius": {"const": 1}},
                  {"length": 1, "radius": {"const": 1}}],
        "node": {"ell0": 0.2, "mass_integral": 3.141592653589793, "node_volume": 0.064},
        "alpha": {"regime": "zero"}
    }"#;

    #[test]
    fn symmetric_config_loads() {
        let (g, r) = parse_config(SYMMETRIC).unwrap();
        assert_eq!(r, AlphaRegime::Zero);
        assert_eq!(g.lengths(), [1.0; 3]);
        assert_eq!(g.node.ell0, 0.2);
    }

    #[test]
    fn out_of_range_ell0_is_reported() {
        let bad = SYMMETRIC.replace("\"ell0\": 0.2", "\"ell0\": 0.5");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("ell0 out of range"), "{err}");
    }

    #[test]
    fn non_coprime_rational_is_reported() {
        let bad = SYMMETRIC.replace(r#"{"regime": "zero"}"#, r#"{"regime": "rational", "m0": 2, "n0": 4}"#);
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("not coprime"), "{err}");
    }

    #[test]
    fn unknown_fields_and_edge_counts_rejected() {
        let bad = SYMMETRIC.replace("\"node_volume\"", "\"volume\"");
        assert!(parse_config(&bad).is_err());
        let two = SYMMETRIC.replacen(r#"{"length": 1, "radius": {"const": 1}},"#, "", 1);
        assert!(parse_config(&two).unwrap_err().to_string().contains("exactly 3 edges"));
    }

    #[test]
    fn tables_and_junction_parse() {
        let with = SYMMETRIC.replace(
            "\"node_volume\": 0.064",
            "\"node_volume\": 0.064, \"delta_table\": {\"(1,2)\": 0.5}, \"node_integrals\": {\"1\": 2.0}",
        );
        let (g, _) = parse_config(&with).unwrap();
        match &g.node.constants {
            ConstantsSource::Config(c) => assert_eq!(c.delta_at(1.0, 0.0, 2), Some(0.5)),
            _ => panic!("expected table constants"),
        }
        let comp = SYMMETRIC.replace(
            "\"node_volume\": 0.064",
            "\"node_volume\": 0.064, \"rho0\": {\"const\": 1.0}, \"junction\": {\"spacing\": 0.025, \"truncation\": 6}",
        );
        let (g, _) = parse_config(&comp).unwrap();
        assert!(matches!(g.node.constants, ConstantsSource::Computed(_)));
    }
}
