use std::collections::BTreeMap;
use std::sync::Arc;

use super::{read_param, Generator, PhiKind};
use crate::error::Result;

/// `φ(t) = t`, the generator behind the capped-ℓ₁ surrogate `min(s, 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linear;

impl Linear {
    pub fn from_params(params: &BTreeMap<String, f64>) -> Result<Arc<dyn Generator>> {
        read_param(params, &[], "", 0.0)?;
        Ok(Arc::new(Linear))
    }
}

impl Generator for Linear {
    fn kind(&self) -> PhiKind {
        PhiKind::Linear
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    fn in_domain(&self, t: f64) -> bool {
        t.is_finite()
    }

    fn value(&self, t: f64) -> f64 {
        t
    }

    fn derivative_left(&self, _t: f64) -> f64 {
        1.0
    }

    fn derivative_right(&self, _t: f64) -> f64 {
        1.0
    }

    fn minimizer(&self) -> f64 {
        0.0
    }

    fn conjugate(&self, s: f64) -> f64 {
        if s > 1.0 {
            s - 1.0
        } else {
            0.0
        }
    }

    fn conjugate_subgradient(&self, s: f64) -> f64 {
        // ∂ψ*(1) = [0, 1]; the smallest element is taken.
        if s > 1.0 {
            1.0
        } else {
            0.0
        }
    }

    fn slope_point(&self, slope: f64) -> Option<f64> {
        // every t has slope 1
        (slope == 1.0).then_some(0.0)
    }
}
