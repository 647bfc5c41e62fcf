//! Parameters `(s, p, q, d)` of a weighted sequence space `b^s_{p,q}` and the
//! embedding classification between two such spaces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integrability or fine index in `(0, ∞]`.
///
/// Infinity is a separate variant: the sup-branches of the norm are a
/// different formula, never the limit of a large float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Exponent::Finite(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "exponent must lie in (0, inf], got {value}"
            )))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// Order on `(0, ∞]`.
    pub fn le(self, other: Exponent) -> bool {
        self.value() <= other.value()
    }

    pub fn lt(self, other: Exponent) -> bool {
        self.value() < other.value()
    }

    pub fn min_with(self, other: f64) -> f64 {
        self.value().min(other)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            _ => {
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent '{t}'")))?;
                Exponent::finite(v)
            }
        }
    }
}

/// `(s, p, q, d)` indexing `b^s_{p,q}(∇)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub d: u32,
}

impl SpaceParams {
    pub fn new(s: f64, p: Exponent, q: Exponent, d: u32) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("smoothness must be finite, got {s}")));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        for e in [p, q] {
            if let Exponent::Finite(v) = e {
                Exponent::finite(v)?;
            }
        }
        Ok(Self { s, p, q, d })
    }

    /// Finite `p` and `q`; panics on invalid input, intended for literals.
    pub fn finite(s: f64, p: f64, q: f64, d: u32) -> Self {
        Self::new(s, Exponent::Finite(p), Exponent::Finite(q), d).expect("valid space parameters")
    }

    /// `b^s_{2,2}`, the Hilbert-weighted space.
    pub fn hilbert(s: f64, d: u32) -> Self {
        Self::finite(s, 2.0, 2.0, d)
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == Exponent::Finite(2.0) && self.q == Exponent::Finite(2.0)
    }

    /// Exponent of the level weight `2^{j(s + d(1/2 - 1/p))}`.
    pub fn level_exponent(&self) -> f64 {
        self.s + self.d as f64 * (0.5 - self.p.recip())
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }

    pub fn check_dim(&self, d: u32) -> Result<()> {
        if self.d == d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.d, found: d })
        }
    }
}

impl fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.s, self.p, self.q, self.d)
    }
}

impl FromStr for SpaceParams {
    type Err = Error;

    /// Parses `s,p,q,d`.
    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidParameter(format!(
                "expected 's,p,q,d', got '{text}'"
            )));
        }
        let s: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad smoothness '{}'", parts[0])))?;
        let p: Exponent = parts[1].parse()?;
        let q: Exponent = parts[2].parse()?;
        let d: u32 = parts[3]
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad dimension '{}'", parts[3])))?;
        SpaceParams::new(s, p, q, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Embedding {
    Compact,
    ContinuousNotCompact,
    NotEmbedded,
}

/// Relative tolerance for deciding the equality branch `t = d(1/p0 - 1/p1)_+`.
const THRESHOLD_EQ_TOL: f64 = 1e-12;

/// `d·(1/p0 − 1/p1)_+`, the smoothness gap required for an embedding.
pub fn embedding_threshold(source: &SpaceParams, target: &SpaceParams) -> f64 {
    source.d as f64 * (source.p.recip() - target.p.recip()).max(0.0)
}

/// Classifies `b^{s0}_{p0,q0} ↪ b^{s1}_{p1,q1}` with `t = s0 − s1`.
pub fn embedding_relation(source: &SpaceParams, target: &SpaceParams) -> Result<Embedding> {
    target.check_dim(source.d)?;
    let t = source.s - target.s;
    let threshold = embedding_threshold(source, target);
    let scale = 1.0f64.max(t.abs()).max(threshold);
    if (t - threshold).abs() <= THRESHOLD_EQ_TOL * scale {
        if source.q.le(target.q) {
            Ok(Embedding::ContinuousNotCompact)
        } else {
            Ok(Embedding::NotEmbedded)
        }
    } else if t > threshold {
        Ok(Embedding::Compact)
    } else {
        Ok(Embedding::NotEmbedded)
    }
}
