use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest denominator checked by the near-rational guard.
pub const GUARD_MAX_DENOMINATOR: u32 = 64;
/// Distance to a small-denominator rational below which an "irrational"
/// exponent is rejected.
pub const GUARD_TOLERANCE: f64 = 1e-9;

/// Which scaling regime of the node density governs the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum AlphaRegime {
    Zero,
    Irrational { alpha: f64 },
    Rational { m0: u32, n0: u32 },
    One,
}

impl AlphaRegime {
    /// Irrational exponent in (0, 1), rejected when it sits within
    /// [`GUARD_TOLERANCE`] of a fraction with denominator ≤ 64.
    pub fn irrational(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::config(format!("alpha {alpha} must lie strictly inside (0,1)")));
        }
        if let Some((p, q)) = nearby_fraction(alpha) {
            return Err(Error::config(format!(
                "alpha {alpha} is within {GUARD_TOLERANCE:e} of {p}/{q}; use the rational regime"
            )));
        }
        Ok(AlphaRegime::Irrational { alpha })
    }

    pub fn rational(m0: u32, n0: u32) -> Result<Self> {
        if m0 == 0 || n0 == 0 || m0 >= n0 {
            return Err(Error::config(format!("rational alpha needs 0 < m0 < n0, got {m0}/{n0}")));
        }
        if gcd(m0, n0) != 1 {
            return Err(Error::config(format!("m0={m0} and n0={n0} are not coprime")));
        }
        Ok(AlphaRegime::Rational { m0, n0 })
    }

    /// Classifies a fractional exponent: values near a small-denominator
    /// fraction become `Rational`, everything else `Irrational`.
    pub fn fractional(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::config(format!("alpha {alpha} must lie strictly inside (0,1)")));
        }
        match nearby_fraction(alpha) {
            Some((p, q)) => AlphaRegime::rational(p, q),
            None => Ok(AlphaRegime::Irrational { alpha }),
        }
    }

    /// Regime for an arbitrary exponent in [0, 1].
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha == 0.0 {
            Ok(AlphaRegime::Zero)
        } else if alpha == 1.0 {
            Ok(AlphaRegime::One)
        } else {
            AlphaRegime::fractional(alpha)
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            AlphaRegime::Zero => 0.0,
            AlphaRegime::Irrational { alpha } => alpha,
            AlphaRegime::Rational { m0, n0 } => m0 as f64 / n0 as f64,
            AlphaRegime::One => 1.0,
        }
    }

    pub fn is_fractional(&self) -> bool {
        matches!(self, AlphaRegime::Irrational { .. } | AlphaRegime::Rational { .. })
    }

    /// Coefficient of the vertex mass term in the limit problem: `m/π` in
    /// regime One, zero otherwise.
    pub fn vertex_mass_coefficient(&self, mass_integral: f64) -> f64 {
        match self {
            AlphaRegime::One => mass_integral / std::f64::consts::PI,
            _ => 0.0,
        }
    }

    /// Re-checks invariants of a value that may have been built directly.
    pub fn validate(&self) -> Result<()> {
        match *self {
            AlphaRegime::Irrational { alpha } => AlphaRegime::irrational(alpha).map(|_| ()),
            AlphaRegime::Rational { m0, n0 } => AlphaRegime::rational(m0, n0).map(|_| ()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AlphaRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaRegime::Zero => write!(f, "zero"),
            AlphaRegime::Irrational { alpha } => write!(f, "irrational({alpha})"),
            AlphaRegime::Rational { m0, n0 } => write!(f, "rational({m0}/{n0})"),
            AlphaRegime::One => write!(f, "one"),
        }
    }
}

fn nearby_fraction(alpha: f64) -> Option<(u32, u32)> {
    for q in 1..=GUARD_MAX_DENOMINATOR {
        let p = (alpha * q as f64).round();
        if (alpha - p / q as f64).abs() < GUARD_TOLERANCE {
            let p = p as u32;
            let g = gcd(p.max(1), q);
            return Some((p / g, q / g));
        }
    }
    None
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
