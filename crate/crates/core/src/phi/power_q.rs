use std::collections::BTreeMap;
use std::sync::Arc;

use super::{read_param, require_open_unit, Generator, PhiKind, DEFAULT_EPSILON, DEFAULT_Q};
use crate::error::Result;

/// `φ(t) = φ̃(t)/φ̃(1)` with
/// `φ̃(t) = −t − ((q−1)/q)(1 − t + ε)^{q/(q−1)} + ε + (q−1)/q`, `0 < q < 1`.
///
/// The minimizer is `t* = ε`; `φ̃` blows up at `t = 1 + ε`.
#[derive(Clone, Copy, Debug)]
pub struct PowerQ {
    epsilon: f64,
    q: f64,
    scale: f64,
}

impl PowerQ {
    pub fn new(epsilon: f64, q: f64) -> Result<Self> {
        require_open_unit("epsilon", epsilon)?;
        require_open_unit("q", q)?;
        let mut g = Self {
            epsilon,
            q,
            scale: 1.0,
        };
        g.scale = g.raw(1.0);
        Ok(g)
    }

    pub fn from_params(params: &BTreeMap<String, f64>) -> Result<Arc<dyn Generator>> {
        let allowed = ["epsilon", "q"];
        let eps = read_param(params, &allowed, "epsilon", DEFAULT_EPSILON)?;
        let q = read_param(params, &allowed, "q", DEFAULT_Q)?;
        Ok(Arc::new(Self::new(eps, q)?))
    }

    /// `(q − 1)/q`, negative.
    fn k(&self) -> f64 {
        (self.q - 1.0) / self.q
    }

    /// `q/(q − 1)`, negative.
    fn power(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    fn raw(&self, t: f64) -> f64 {
        let eps = self.epsilon;
        -t - self.k() * (1.0 - t + eps).powf(self.power()) + eps + self.k()
    }

    fn raw_derivative(&self, t: f64) -> f64 {
        -1.0 + (1.0 - t + self.epsilon).powf(1.0 / (self.q - 1.0))
    }

    fn upper_break(&self) -> f64 {
        self.epsilon.powf(1.0 / (self.q - 1.0)) - 1.0
    }

    fn lower_break(&self) -> f64 {
        (1.0 + self.epsilon).powf(1.0 / (self.q - 1.0)) - 1.0
    }
}

impl Generator for PowerQ {
    fn kind(&self) -> PhiKind {
        PhiKind::PowerQ
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("epsilon".to_string(), self.epsilon),
            ("q".to_string(), self.q),
        ])
    }

    fn in_domain(&self, t: f64) -> bool {
        t.is_finite() && t < 1.0 + self.epsilon
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
        self.epsilon
    }

    fn conjugate(&self, s: f64) -> f64 {
        let (eps, q, k) = (self.epsilon, self.q, self.k());
        let u = self.scale * s;
        let h = if u >= self.upper_break() {
            // value at t = 1: u − φ̃(1)
            u + 1.0 + k * eps.powf(self.power()) - eps - k
        } else if u > self.lower_break() {
            (1.0 + eps) * u - (u + 1.0).powf(q) / q + 1.0 / q
        } else {
            k * (1.0 + eps).powf(self.power()) - eps - k
        };
        h / self.scale
    }

    fn conjugate_subgradient(&self, s: f64) -> f64 {
        let u = self.scale * s;
        if u >= self.upper_break() {
            1.0
        } else if u > self.lower_break() {
            (1.0 + self.epsilon - (u + 1.0).powf(self.q - 1.0)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    fn slope_point(&self, slope: f64) -> Option<f64> {
        let x = slope * self.scale;
        if x <= -1.0 {
            return None;
        }
        let t = 1.0 + self.epsilon - (1.0 + x).powf(self.q - 1.0);
        (0.0..1.0).contains(&t).then_some(t)
    }
}
