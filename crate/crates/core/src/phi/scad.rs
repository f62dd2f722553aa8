use std::collections::BTreeMap;
use std::sync::Arc;

use super::{read_param, Generator, PhiKind, DEFAULT_SCAD_A};
use crate::error::{Error, Result};

/// Normalized quadratic `φ(t) = ((a−1)/2·t² + t) / ((a+1)/2)`.
///
/// With singleton groups its scalar penalty `s − ψ*(s)` is the SCAD penalty.
#[derive(Clone, Copy, Debug)]
pub struct Scad {
    a: f64,
    scale: f64,
}

impl Scad {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "must exceed 1",
            });
        }
        Ok(Self {
            a,
            scale: 0.5 * (a + 1.0),
        })
    }

    pub fn from_params(params: &BTreeMap<String, f64>) -> Result<Arc<dyn Generator>> {
        let a = read_param(params, &["a"], "a", DEFAULT_SCAD_A)?;
        Ok(Arc::new(Self::new(a)?))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Unnormalized conjugate on the scaled axis `u = φ̃(1)·s`.
    fn h(&self, u: f64) -> f64 {
        let a = self.a;
        if u <= 1.0 {
            0.0
        } else if u <= a {
            (u - 1.0).powi(2) / (2.0 * (a - 1.0))
        } else {
            u - 0.5 * (a + 1.0)
        }
    }
}

impl Generator for Scad {
    fn kind(&self) -> PhiKind {
        PhiKind::Scad
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("a".to_string(), self.a)])
    }

    fn in_domain(&self, t: f64) -> bool {
        t.is_finite()
    }

    fn value(&self, t: f64) -> f64 {
        (0.5 * (self.a - 1.0) * t * t + t) / self.scale
    }

    fn derivative_left(&self, t: f64) -> f64 {
        ((self.a - 1.0) * t + 1.0) / self.scale
    }

    fn derivative_right(&self, t: f64) -> f64 {
        self.derivative_left(t)
    }

    fn minimizer(&self) -> f64 {
        0.0
    }

    fn conjugate(&self, s: f64) -> f64 {
        self.h(self.scale * s) / self.scale
    }

    fn conjugate_subgradient(&self, s: f64) -> f64 {
        // equals min[1, max(((a+1)s − 2) / (2(a−1)), 0)]
        let u = self.scale * s;
        if u <= 1.0 {
            0.0
        } else if u <= self.a {
            (u - 1.0) / (self.a - 1.0)
        } else {
            1.0
        }
    }

    fn slope_point(&self, slope: f64) -> Option<f64> {
        let t = (slope * self.scale - 1.0) / (self.a - 1.0);
        (0.0..1.0).contains(&t).then_some(t)
    }
}
