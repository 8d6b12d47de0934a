//! Tolerance classes and the residual metric shared by every check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::TensorValue;
use crate::CtlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TolClass {
    A,
    B,
    C,
}

impl TolClass {
    /// Class for an identity whose deepest ingredient uses `k` metric derivatives.
    pub fn for_metric_order(k: usize) -> TolClass {
        match k {
            0..=2 => TolClass::A,
            3..=4 => TolClass::B,
            _ => TolClass::C,
        }
    }
}

impl fmt::Display for TolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TolClass::A => "A",
            TolClass::B => "B",
            TolClass::C => "C",
        })
    }
}

/// Numeric thresholds per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { a: 1e-9, b: 1e-7, c: 1e-5 }
    }
}

impl Tolerances {
    pub fn get(&self, class: TolClass) -> f64 {
        match class {
            TolClass::A => self.a,
            TolClass::B => self.b,
            TolClass::C => self.c,
        }
    }
}

/// Parses overrides of the form `A=1e-10,C=1e-4`.
impl FromStr for Tolerances {
    type Err = CtlError;
    fn from_str(s: &str) -> Result<Self, CtlError> {
        let mut t = Tolerances::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| CtlError::Config(format!("bad tolerance override `{part}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CtlError::Config(format!("bad tolerance value in `{part}`")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(CtlError::Config(format!("tolerance must be positive in `{part}`")));
            }
            match k.trim() {
                "A" | "a" => t.a = v,
                "B" | "b" => t.b = v,
                "C" | "c" => t.c = v,
                other => return Err(CtlError::Config(format!("unknown tolerance class `{other}`"))),
            }
        }
        Ok(t)
    }
}

/// `max|L − R| / (1 + max(‖L‖∞, ‖R‖∞))`
pub fn residual(l: &TensorValue, r: &TensorValue) -> f64 {
    assert_eq!(l.data.len(), r.data.len(), "residual of tensors with different shapes");
    residual_slices(&l.data, &r.data)
}

pub fn residual_slices(l: &[f64], r: &[f64]) -> f64 {
    let mut diff: f64 = 0.0;
    let mut nl: f64 = 0.0;
    let mut nr: f64 = 0.0;
    for (a, b) in l.iter().zip(r) {
        if !(a.is_finite() && b.is_finite()) {
            return f64::INFINITY;
        }
        diff = diff.max((a - b).abs());
        nl = nl.max(a.abs());
        nr = nr.max(b.abs());
    }
    diff / (1.0 + nl.max(nr))
}
