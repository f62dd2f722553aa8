use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outer-loop parameter sequences and stopping rule.
///
/// `λ₁`, `μ₁` drive the first stage; afterwards `λ_k = λ_mult·λ₁` and
/// `μ_k = τ_k λ_k/√n`, where `tau[0]` is `τ₂` and the last entry of `tau`
/// repeats. `ϱ₁ = rho_scale/‖X¹‖` and stays fixed; `ϱ̃₁ = rho_tilde_scale/‖Y¹‖_∞`
/// and grows by `rho_tilde_growth` each stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub n: usize,
    pub lambda1: f64,
    pub mu1: f64,
    pub lambda_multiplier: f64,
    pub tau: Vec<f64>,
    pub rho_scale: f64,
    pub rho_tilde_scale: f64,
    pub rho_tilde_growth: f64,
    /// Stop once `|‖Rᵏ‖_F² − ‖Rᵏ⁻¹‖_F²| ≤ stop_tol·‖M‖_F` and the rank has settled.
    pub stop_tol: f64,
    /// Number of consecutive equal-rank comparisons required.
    pub rank_stable_window: usize,
    /// `σᵢ ≥ rank_rel_tol·σ₁` counts towards the rank.
    pub rank_rel_tol: f64,
    pub max_outer: usize,
}

/// `min(max(20, 0.45n/8), 100)`.
pub fn lambda_multiplier(n: usize) -> f64 {
    (0.45 * n as f64 / 8.0).max(20.0).min(100.0)
}

pub fn default_schedule(n: usize) -> Schedule {
    let n = n.max(1);
    let root = (n as f64).sqrt();
    Schedule {
        n,
        lambda1: 1.0,
        mu1: 0.5 / root,
        lambda_multiplier: lambda_multiplier(n),
        tau: vec![0.8, 0.35],
        rho_scale: 10.0,
        rho_tilde_scale: 10.0 / 9.0,
        rho_tilde_growth: 10.0 / 9.0,
        stop_tol: 0.02,
        rank_stable_window: 3,
        rank_rel_tol: 1e-6,
        max_outer: 50,
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("lambda1", self.lambda1),
            ("mu1", self.mu1),
            ("lambda_multiplier", self.lambda_multiplier),
            ("rho_scale", self.rho_scale),
            ("rho_tilde_scale", self.rho_tilde_scale),
            ("rho_tilde_growth", self.rho_tilde_growth),
            ("stop_tol", self.stop_tol),
            ("rank_rel_tol", self.rank_rel_tol),
        ];
        for (name, value) in reals {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if let Some(&t) = self.tau.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: t,
                reason: "must be positive and finite",
            });
        }
        for (name, value) in [
            ("n", self.n),
            ("rank_stable_window", self.rank_stable_window),
            ("max_outer", self.max_outer),
        ] {
            if value == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "must be at least 1",
                });
            }
        }
        if self.tau.is_empty() {
            return Err(Error::Parse("tau needs at least one entry".into()));
        }
        Ok(())
    }

    /// `λ_k` for stage `k ≥ 1`.
    pub fn lambda_k(&self, k: usize) -> f64 {
        if k <= 1 {
            self.lambda1
        } else {
            self.lambda_multiplier * self.lambda1
        }
    }

    /// `τ_k` for `k ≥ 2`.
    pub fn tau_k(&self, k: usize) -> f64 {
        let idx = k.saturating_sub(2).min(self.tau.len() - 1);
        self.tau[idx]
    }

    /// `μ_k` for stage `k ≥ 1`.
    pub fn mu_k(&self, k: usize) -> f64 {
        if k <= 1 {
            self.mu1
        } else {
            self.tau_k(k) * self.lambda_k(k) / (self.n as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_examples() {
        assert_eq!(lambda_multiplier(400), 22.5);
        assert_eq!(lambda_multiplier(100), 20.0);
        assert_eq!(lambda_multiplier(10_000), 100.0);
    }

    #[test]
    fn sequences() {
        let s = default_schedule(100);
        assert_eq!(s.lambda_k(1), 1.0);
        assert_eq!(s.mu_k(1), 0.05);
        assert_eq!(s.lambda_k(2), 20.0);
        assert!((s.mu_k(2) - 0.8 * 20.0 / 10.0).abs() < 1e-15);
        assert!((s.mu_k(3) - 0.35 * 20.0 / 10.0).abs() < 1e-15);
        assert_eq!(s.mu_k(17), s.mu_k(3));
        s.validate().unwrap();
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = default_schedule(50);
        let text = serde_json::to_string(&s).unwrap();
        let back: Schedule = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let mut bad = s.clone();
        bad.stop_tol = 0.0;
        assert!(bad.validate().is_err());
        bad = s;
        bad.tau.clear();
        assert!(bad.validate().is_err());
    }
}
