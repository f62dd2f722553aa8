use std::collections::BTreeMap;
use std::sync::Arc;

use super::{read_param, require_open_unit, Generator, PhiKind, DEFAULT_EPSILON};
use crate::error::Result;

/// `φ(t) = φ̃(t)/φ̃(1)` with
/// `φ̃(t) = (1+ε)·atan(√(t/(1−t+ε))) − √(t(1−t+ε))` on `[0, 1]`.
///
/// `φ̃′(t) = √(t/(1−t+ε))`, so `t* = 0`.
#[derive(Clone, Copy, Debug)]
pub struct Arctan {
    epsilon: f64,
    scale: f64,
}

impl Arctan {
    pub fn new(epsilon: f64) -> Result<Self> {
        require_open_unit("epsilon", epsilon)?;
        let mut g = Self {
            epsilon,
            scale: 1.0,
        };
        g.scale = g.raw(1.0);
        Ok(g)
    }

    pub fn from_params(params: &BTreeMap<String, f64>) -> Result<Arc<dyn Generator>> {
        let eps = read_param(params, &["epsilon"], "epsilon", DEFAULT_EPSILON)?;
        Ok(Arc::new(Self::new(eps)?))
    }

    fn raw(&self, t: f64) -> f64 {
        let gap = 1.0 - t + self.epsilon;
        (1.0 + self.epsilon) * (t / gap).sqrt().atan() - (t * gap).sqrt()
    }

    fn raw_derivative(&self, t: f64) -> f64 {
        (t.max(0.0) / (1.0 - t + self.epsilon)).sqrt()
    }

    fn upper_break(&self) -> f64 {
        (1.0 / self.epsilon).sqrt()
    }
}

impl Generator for Arctan {
    fn kind(&self) -> PhiKind {
        PhiKind::Arctan
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("epsilon".to_string(), self.epsilon)])
    }

    fn in_domain(&self, t: f64) -> bool {
        (0.0..=1.0).contains(&t)
    }

    fn value(&self, t: f64) -> f64 {
        self.raw(t) / self.scale
    }

    fn derivative_left(&self, t: f64) -> f64 {
        self.raw_derivative(t) / self.scale
    }

    fn derivative_right(&self, t: f64) -> f64 {
        self.derivative_left(t)
    }

    fn minimizer(&self) -> f64 {
        0.0
    }

    fn conjugate(&self, s: f64) -> f64 {
        let eps = self.epsilon;
        let u = self.scale * s;
        let h = if u >= self.upper_break() {
            u - (1.0 + eps) * self.upper_break().atan() + eps.sqrt()
        } else if u > 0.0 {
            (1.0 + eps) * (u - u.atan())
        } else {
            0.0
        };
        h / self.scale
    }

    fn conjugate_subgradient(&self, s: f64) -> f64 {
        let u = self.scale * s;
        if u >= self.upper_break() {
            1.0
        } else if u > 0.0 {
            (u * u * (1.0 + self.epsilon) / (1.0 + u * u)).min(1.0)
        } else {
            0.0
        }
    }

    fn slope_point(&self, slope: f64) -> Option<f64> {
        let x = slope * self.scale;
        if x < 0.0 {
            return None;
        }
        let t = x * x * (1.0 + self.epsilon) / (1.0 + x * x);
        (0.0..1.0).contains(&t).then_some(t)
    }
}
