//! The exponent lattice `k − pα`.
//!
//! Exponents are handled through integer keys so that sums of exponents are
//! exact: `(k, p)` for irrational α, and a single integer numerator over a
//! fixed denominator otherwise (`1` for the integer regimes, `n₀` for
//! rational α).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{AlphaRegime, ExponentLabel};
use crate::{Error, Result};

/// Exact representation of an exponent; see [`KeyArithmetic::value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key(pub i64, pub i64);

impl std::ops::Add for Key {
    type Output = Key;
    fn add(self, o: Key) -> Key {
        Key(self.0 + o.0, self.1 + o.1)
    }
}

impl std::ops::Sub for Key {
    type Output = Key;
    fn sub(self, o: Key) -> Key {
        Key(self.0 - o.0, self.1 - o.1)
    }
}

/// Regime-dependent interpretation of keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyArithmetic {
    regime: AlphaRegime,
    denom: i64,
    alpha: f64,
}

impl KeyArithmetic {
    pub fn new(regime: AlphaRegime) -> Self {
        let denom = match regime {
            AlphaRegime::Rational { n0, .. } => n0 as i64,
            _ => 1,
        };
        KeyArithmetic { regime, denom, alpha: regime.alpha() }
    }

    pub fn value(&self, k: Key) -> f64 {
        (k.0 as f64 - k.1 as f64 * self.alpha) / self.denom as f64
    }

    /// Key of the integer exponent `j`.
    pub fn unit(&self, j: i64) -> Key {
        Key(j * self.denom, 0)
    }

    /// Key of `α` itself (not necessarily a lattice point).
    pub fn alpha_key(&self) -> Key {
        match self.regime {
            AlphaRegime::Zero => Key(0, 0),
            AlphaRegime::One => Key(1, 0),
            AlphaRegime::Rational { m0, .. } => Key(m0 as i64, 0),
            AlphaRegime::Irrational { .. } => Key(0, -1),
        }
    }

    /// Whether `k` names a nonnegative exponent `k − pα` with `k, p ≥ 0`.
    pub fn is_admissible(&self, k: Key) -> bool {
        match self.regime {
            AlphaRegime::Irrational { .. } => k.0 >= 0 && k.1 >= 0 && self.value(k) >= 0.0,
            _ => k.0 >= 0 && k.1 == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeEntry {
    #[serde(rename = "e")]
    pub exponent: f64,
    /// Smallest `(k, p)` with `k − pα` equal to the exponent.
    pub k: i64,
    pub p: i64,
    #[serde(skip)]
    pub key: Key,
    #[serde(skip)]
    pub label: ExponentLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentLattice {
    pub regime: AlphaRegime,
    pub order: usize,
    pub entries: Vec<LatticeEntry>,
    index: BTreeMap<Key, usize>,
}

fn reduced_label(q: i64, n: i64) -> ExponentLabel {
    let g = crate::model::regime::gcd(q.unsigned_abs() as u32, n as u32).max(1) as i64;
    let (q, n) = (q / g, n / g);
    if n == 1 {
        ExponentLabel::Pair { k: q, p: 0 }
    } else {
        ExponentLabel::Fraction { q, n }
    }
}

/// All exponents `k − pα ≥ 0` with integers `0 ≤ k ≤ M` and `p ≥ 0`,
/// ascending. For rational α this is `{q/n₀ : 0 ≤ q ≤ M n₀}`.
pub fn build_lattice(regime: AlphaRegime, order: usize) -> Result<ExponentLattice> {
    regime.validate()?;
    let arith = KeyArithmetic::new(regime);
    let m = order as i64;
    let mut entries = Vec::new();
    match regime {
        AlphaRegime::Zero | AlphaRegime::One => {
            for k in 0..=m {
                entries.push(LatticeEntry {
                    exponent: k as f64,
                    k,
                    p: 0,
                    key: Key(k, 0),
                    label: ExponentLabel::Pair { k, p: 0 },
                });
            }
        }
        AlphaRegime::Rational { m0, n0 } => {
            let (m0, n0) = (m0 as i64, n0 as i64);
            for q in 0..=m * n0 {
                let k = (0..=m + m0)
                    .find(|k| (k * n0 - q) >= 0 && (k * n0 - q) % m0 == 0)
                    .ok_or_else(|| Error::solver(format!("no (k, p) generates exponent {q}/{n0}")))?;
                entries.push(LatticeEntry {
                    exponent: q as f64 / n0 as f64,
                    k,
                    p: (k * n0 - q) / m0,
                    key: Key(q, 0),
                    label: reduced_label(q, n0),
                });
            }
        }
        AlphaRegime::Irrational { alpha } => {
            for k in 0..=m {
                let mut p = 0;
                while k as f64 - p as f64 * alpha >= 0.0 {
                    entries.push(LatticeEntry {
                        exponent: arith.value(Key(k, p)),
                        k,
                        p,
                        key: Key(k, p),
                        label: ExponentLabel::Pair { k, p },
                    });
                    p += 1;
                }
            }
            entries.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        }
    }
    let index = entries.iter().enumerate().map(|(i, e)| (e.key, i)).collect();
    Ok(ExponentLattice { regime, order, entries, index })
}

impl ExponentLattice {
    pub fn arithmetic(&self) -> KeyArithmetic {
        KeyArithmetic::new(self.regime)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position of `key`, if it is a lattice point.
    pub fn position(&self, key: Key) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.exponent).collect()
    }

    /// All ordered pairs of lattice positions `(a, b)` whose keys sum to
    /// `target`.
    pub fn splittings(&self, target: Key) -> Vec<(usize, usize)> {
        let arith = self.arithmetic();
        if !arith.is_admissible(target) {
            return Vec::new();
        }
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(a, e)| {
                let rest = target - e.key;
                if arith.is_admissible(rest) {
                    self.position(rest).map(|b| (a, b))
                } else {
                    None
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_half_lattice() {
        let l = build_lattice(AlphaRegime::rational(1, 2).unwrap(), 1).unwrap();
        assert_eq!(l.exponents(), vec![0.0, 0.5, 1.0]);
        assert_eq!((l.entries[1].k, l.entries[1].p), (1, 1));
        assert_eq!(l.entries[1].label.to_string(), "1/2");
        assert_eq!(l.entries[2].label.to_string(), "1");
    }

    #[test]
    fn integer_regimes() {
        for r in [AlphaRegime::Zero, AlphaRegime::One] {
            assert_eq!(build_lattice(r, 3).unwrap().exponents(), vec![0.0, 1.0, 2.0, 3.0]);
        }
    }

    #[test]
    fn irrational_order_two() {
        let a = 0.8 + 1e-3 * std::f64::consts::SQRT_2;
        let l = build_lattice(AlphaRegime::irrational(a).unwrap(), 2).unwrap();
        let labels: Vec<String> = l.entries.iter().map(|e| e.label.to_string()).collect();
        assert_eq!(labels, ["0", "1-1a", "2-2a", "1", "2-1a", "2"]);
    }

    #[test]
    fn splittings_add_exactly() {
        let l = build_lattice(AlphaRegime::irrational(std::f64::consts::FRAC_1_SQRT_2).unwrap(), 3).unwrap();
        let t = Key(3, 2);
        for (a, b) in l.splittings(t) {
            assert_eq!(l.entries[a].key + l.entries[b].key, t);
        }
        assert!(l.splittings(Key(1, -1)).is_empty());
    }
}
