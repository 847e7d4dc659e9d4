//! Tables of node constants keyed by series exponent.
//!
//! Exponents are written `k` or `k-pa` (meaning `k − p·α`) or, for the
//! rational regime, `q/n`. Table keys are `"(label,i)"` with `i` the edge.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExponentLabel {
    /// `k − p·α`
    Pair { k: i64, p: i64 },
    /// `q / n`
    Fraction { q: i64, n: i64 },
}

impl ExponentLabel {
    pub fn value(&self, alpha: f64) -> f64 {
        match *self {
            ExponentLabel::Pair { k, p } => k as f64 - p as f64 * alpha,
            ExponentLabel::Fraction { q, n } => q as f64 / n as f64,
        }
    }
}

impl fmt::Display for ExponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ExponentLabel::Pair { k, p: 0 } => write!(f, "{k}"),
            ExponentLabel::Pair { k, p } => write!(f, "{k}-{p}a"),
            ExponentLabel::Fraction { q, n } => write!(f, "{q}/{n}"),
        }
    }
}

impl FromStr for ExponentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse exponent label '{s}'"));
        if let Some((q, n)) = s.split_once('/') {
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            if n <= 0 {
                return Err(bad());
            }
            return Ok(ExponentLabel::Fraction { q, n });
        }
        if let Some(rest) = s.strip_suffix('a') {
            let (k, p) = rest.split_once('-').ok_or_else(bad)?;
            let k: i64 = k.trim().parse().map_err(|_| bad())?;
            let p = p.trim();
            let p: i64 = if p.is_empty() { 1 } else { p.parse().map_err(|_| bad())? };
            return Ok(ExponentLabel::Pair { k, p });
        }
        let k: i64 = s.parse().map_err(|_| bad())?;
        Ok(ExponentLabel::Pair { k, p: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum Provenance {
    Config,
    Computed { spacing: f64, truncation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEntry {
    pub value: f64,
    pub provenance: Provenance,
}

/// Jumps `δ_e^{(i)}` (i = 2, 3), node integrals `∫ρ₀ N̂_e` and outlet tail
/// integrals `∫(N_e − G_e^{(i)})` (i = 1, 2, 3).
///
/// The node integral is taken of the field normalized to vanish
/// asymptotically along outlet 1, i.e. with the vertex value of edge 1
/// removed; the driver adds `m·w_e^{(1)}(0)` itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeConstants {
    pub delta: BTreeMap<(ExponentLabel, usize), ConstantEntry>,
    pub node_integrals: BTreeMap<ExponentLabel, ConstantEntry>,
    pub tails: BTreeMap<(ExponentLabel, usize), ConstantEntry>,
}

/// Matching tolerance between a table label and a lattice exponent.
const LABEL_MATCH_TOL: f64 = 1e-12;

impl NodeConstants {
    pub fn is_empty(&self) -> bool {
        self.delta.is_empty() && self.node_integrals.is_empty() && self.tails.is_empty()
    }

    pub fn delta_at(&self, exponent: f64, alpha: f64, edge: usize) -> Option<f64> {
        self.delta
            .iter()
            .find(|((l, i), _)| *i == edge && (l.value(alpha) - exponent).abs() < LABEL_MATCH_TOL)
            .map(|(_, e)| e.value)
    }

    pub fn node_integral_at(&self, exponent: f64, alpha: f64) -> Option<f64> {
        self.node_integrals
            .iter()
            .find(|(l, _)| (l.value(alpha) - exponent).abs() < LABEL_MATCH_TOL)
            .map(|(_, e)| e.value)
    }

    pub fn tail_at(&self, exponent: f64, alpha: f64, edge: usize) -> Option<f64> {
        self.tails
            .iter()
            .find(|((l, i), _)| *i == edge && (l.value(alpha) - exponent).abs() < LABEL_MATCH_TOL)
            .map(|(_, e)| e.value)
    }

    pub fn from_tables(tables: &ConstantTables) -> Result<Self> {
        let mut out = NodeConstants::default();
        let entry = |v: f64| ConstantEntry { value: v, provenance: Provenance::Config };
        for (key, &v) in &tables.delta_table {
            let (label, i) = parse_pair_key(key)?;
            if i != 2 && i != 3 {
                return Err(Error::config(format!("delta_table key {key}: edge must be 2 or 3")));
            }
            out.delta.insert((label, i), entry(v));
        }
        for (key, &v) in &tables.node_integrals {
            out.node_integrals.insert(key.parse()?, entry(v));
        }
        for (key, &v) in &tables.tail_table {
            let (label, i) = parse_pair_key(key)?;
            if !(1..=3).contains(&i) {
                return Err(Error::config(format!("tail_table key {key}: edge must be 1..3")));
            }
            out.tails.insert((label, i), entry(v));
        }
        Ok(out)
    }

    pub fn to_tables(&self) -> ConstantTables {
        ConstantTables {
            delta_table: self.delta.iter().map(|((l, i), e)| (format!("({l},{i})"), e.value)).collect(),
            node_integrals: self.node_integrals.iter().map(|(l, e)| (l.to_string(), e.value)).collect(),
            tail_table: self.tails.iter().map(|((l, i), e)| (format!("({l},{i})"), e.value)).collect(),
        }
    }
}

/// Serialized form of [`NodeConstants`], as it appears in configs and in the
/// junction command's output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantTables {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub delta_table: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub node_integrals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tail_table: BTreeMap<String, f64>,
}

impl ConstantTables {
    pub fn is_empty(&self) -> bool {
        self.delta_table.is_empty() && self.node_integrals.is_empty() && self.tail_table.is_empty()
    }
}

fn parse_pair_key(key: &str) -> Result<(ExponentLabel, usize)> {
    let bad = || Error::config(format!("table key '{key}' is not of the form (k,i)"));
    let inner = key.trim().strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
    let (label, edge) = inner.rsplit_once(',').ok_or_else(bad)?;
    let edge: usize = edge.trim().parse().map_err(|_| bad())?;
    Ok((label.parse()?, edge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for s in ["0", "3", "2-1a", "3-4a", "1/2", "5/4"] {
            let l: ExponentLabel = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        assert_eq!("1-a".parse::<ExponentLabel>().unwrap(), ExponentLabel::Pair { k: 1, p: 1 });
        assert!("x".parse::<ExponentLabel>().is_err());
    }

    #[test]
    fn lookup_matches_by_value() {
        let mut t = ConstantTables::default();
        t.delta_table.insert("(1,2)".into(), 0.25);
        t.delta_table.insert("(2-1a,3)".into(), -1.0);
        t.node_integrals.insert("1/2".into(), 4.0);
        let c = NodeConstants::from_tables(&t).unwrap();
        assert_eq!(c.delta_at(1.0, 0.3, 2), Some(0.25));
        assert_eq!(c.delta_at(1.0, 0.3, 3), None);
        assert_eq!(c.delta_at(1.7, 0.3, 3), Some(-1.0));
        assert_eq!(c.node_integral_at(0.5, 0.5), Some(4.0));
        assert_eq!(NodeConstants::from_tables(&c.to_tables()).unwrap(), c);
    }

    #[test]
    fn jump_keys_must_name_outlets_two_or_three() {
        let mut t = ConstantTables::default();
        t.delta_table.insert("(1,1)".into(), 0.0);
        assert!(NodeConstants::from_tables(&t).is_err());
    }
}
