//! Multi-stage convex relaxation for low-rank plus sparse decomposition.
//!
//! Each stage solves a weighted nuclear-norm plus weighted `ℓ₁` subproblem
//! (see [`apg`]); the weights come from subgradients of the conjugate sums
//! `Σψ*(ϱσᵢ(X))` and `Σψ*(ϱ̃|Yᵢⱼ|)` at the previous stage's solution.

pub mod apg;
pub mod schedule;

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::subgrad::subgrad_spectral_from_svd;
use crate::matrix::{
    count_nonzero, frobenius_norm, max_abs, rank_from_sigma, singular_values, MatrixVar,
};
use crate::phi::PhiSpec;

pub use apg::{apg_subproblem, ApgOptions, ApgOutput, Subproblem};
pub use schedule::{default_schedule, lambda_multiplier, Schedule};

/// Floor applied to `‖X¹‖` and `‖Y¹‖_∞` before they are inverted.
pub const NORM_FLOOR: f64 = 1e-8;
/// Slack allowed on the feasibility checks.
pub const FEASIBILITY_SLACK: f64 = 1e-8;

/// `min ν/2‖X + Y − M‖_F² + rank(X) + λ‖Y‖₀` over `‖X‖ ≤ γ₁`, `‖Y‖_∞ ≤ γ₂`.
#[derive(Clone, Debug)]
pub struct DecompositionInstance {
    m: MatrixVar,
    gamma1: f64,
    gamma2: f64,
    lambda: f64,
    nu: f64,
}

impl DecompositionInstance {
    pub fn new(m: Array2<f64>, gamma1: f64, gamma2: f64, lambda: f64, nu: f64) -> Result<Self> {
        for (name, value) in [
            ("gamma1", gamma1),
            ("gamma2", gamma2),
            ("lambda", lambda),
            ("nu", nu),
        ] {
            crate::group::positive(name, value)?;
        }
        Ok(Self {
            m: MatrixVar::new(m)?,
            gamma1,
            gamma2,
            lambda,
            nu,
        })
    }

    /// `λ = ν = 1`.
    pub fn with_radii(m: Array2<f64>, gamma1: f64, gamma2: f64) -> Result<Self> {
        Self::new(m, gamma1, gamma2, 1.0, 1.0)
    }

    pub fn m(&self) -> &MatrixVar {
        &self.m
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `max(n₁, n₂)`, the size used by the default schedule.
    pub fn n(&self) -> usize {
        let (a, b) = self.m.dim();
        a.max(b)
    }

    /// `ν/2‖X + Y − M‖_F² + rank(X) + λ‖Y‖₀` with the given rank tolerance.
    pub fn objective(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        rank_tol: f64,
    ) -> Result<f64> {
        let r = &x + &y - self.m.data();
        let rank = numerical_rank(x, rank_tol)?;
        Ok(0.5 * self.nu * frobenius_norm(r.view()).powi(2)
            + rank as f64
            + self.lambda * count_nonzero(y, 0.0) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub inner: ApgOptions,
    /// Start each stage from the previous stage's solution instead of zero.
    pub warm_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::standard()
    }
}

impl SolverOptions {
    pub fn standard() -> Self {
        Self {
            inner: ApgOptions::default(),
            warm_start: true,
        }
    }
}

/// Iterates after a completed stage.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub k: usize,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub w: Array2<f64>,
    pub s: Array2<f64>,
    pub lambda_k: f64,
    pub mu_k: f64,
    pub rho_k: f64,
    pub rho_tilde_k: f64,
    /// `‖Xʲ + Yʲ − M‖_F²` for `j = 0, …, k`.
    pub residual_history: Vec<f64>,
    /// `rank(Xʲ)` for `j = 0, …, k`.
    pub rank_history: Vec<usize>,
}

/// Measured norms of one stage's iterates against their bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub x_norm: f64,
    pub y_max: f64,
    pub w_norm: f64,
    pub s_max: f64,
    pub inner_residual: f64,
    pub inner_bound: f64,
}

impl StageCheck {
    pub fn feasible(&self, gamma1: f64, gamma2: f64) -> bool {
        self.x_norm <= gamma1 + FEASIBILITY_SLACK
            && self.y_max <= gamma2 + FEASIBILITY_SLACK
            && self.w_norm <= 1.0 + FEASIBILITY_SLACK
            && self.s_max <= 1.0 + FEASIBILITY_SLACK
    }

    pub fn certified(&self) -> bool {
        self.inner_residual <= self.inner_bound
    }
}

impl SolverState {
    /// Recomputes every norm from the stored matrices.
    pub fn check(&self, inner: &ApgOutput) -> Result<StageCheck> {
        Ok(StageCheck {
            x_norm: crate::matrix::spectral_norm(self.x.view())?,
            y_max: max_abs(self.y.view()),
            w_norm: crate::matrix::spectral_norm(self.w.view())?,
            s_max: max_abs(self.s.view()),
            inner_residual: inner.residual,
            inner_bound: inner.residual_bound,
        })
    }
}

/// Per-stage trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub k: usize,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub rho_tilde: f64,
    pub residual_sq: f64,
    pub rank: usize,
    pub sparsity: usize,
    pub inner_iters: usize,
    pub inner_converged: bool,
    pub check: StageCheck,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStatus {
    /// The residual and rank stopping rule fired.
    pub converged: bool,
    pub max_outer_reached: bool,
    /// Number of stages whose inner solver hit its iteration cap.
    pub inner_max_iter_hits: usize,
    /// `‖X¹‖` fell below [`NORM_FLOOR`].
    pub rho_floor_used: bool,
    /// `‖Y¹‖_∞` fell below [`NORM_FLOOR`].
    pub rho_tilde_floor_used: bool,
    /// `M = 0`; the first stage is returned.
    pub zero_data: bool,
}

impl SolverStatus {
    pub fn label(&self) -> &'static str {
        if self.zero_data {
            "zero_data"
        } else if self.max_outer_reached {
            "max_outer"
        } else if self.inner_max_iter_hits > 0 {
            "inner_cap"
        } else if self.rho_floor_used || self.rho_tilde_floor_used {
            "rho_floor"
        } else {
            "ok"
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    /// `X̂` in the orientation of the input `M`.
    #[serde(skip)]
    pub x_hat: Array2<f64>,
    #[serde(skip)]
    pub y_hat: Array2<f64>,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub final_rank: usize,
    pub final_sparsity: usize,
    pub final_objective: f64,
    pub residual_history: Vec<f64>,
    pub rank_history: Vec<usize>,
    pub stages: Vec<StageRecord>,
    pub status: SolverStatus,
    pub wall_time_seconds: f64,
}

impl SolverReport {
    /// Every stage met the feasibility bounds and the inner certificate.
    pub fn certificates_hold(&self, gamma1: f64, gamma2: f64) -> bool {
        self.stages
            .iter()
            .all(|s| s.check.feasible(gamma1, gamma2) && s.check.certified())
    }
}

/// `#{i : σᵢ(X) ≥ rel_tol·‖X‖}`.
pub fn numerical_rank(x: ArrayView2<'_, f64>, rel_tol: f64) -> Result<usize> {
    crate::group::positive("rel_tol", rel_tol)?;
    Ok(rank_from_sigma(&singular_values(x)?, rel_tol))
}

fn residual_sq(m: &Array2<f64>, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    ndarray::Zip::from(m)
        .and(x)
        .and(y)
        .fold(0.0, |acc, a, b, c| acc + (b + c - a).powi(2))
}

fn settled(history: &[usize], window: usize) -> bool {
    history.len() > window && history.windows(2).rev().take(window).all(|w| w[0] == w[1])
}

/// Runs the multi-stage scheme from `(X⁰, Y⁰) = (0, 0)`.
pub fn gep_mscra(
    instance: &DecompositionInstance,
    phi: &PhiSpec,
    schedule: &Schedule,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    schedule.validate()?;
    let started = Instant::now();
    let m = instance.m.data();
    let (n1, n2) = m.dim();
    let m_norm = frobenius_norm(m.view());

    let mut state = SolverState {
        k: 0,
        x: Array2::zeros((n1, n2)),
        y: Array2::zeros((n1, n2)),
        w: Array2::zeros((n1, n2)),
        s: Array2::zeros((n1, n2)),
        lambda_k: schedule.lambda_k(1),
        mu_k: schedule.mu_k(1),
        rho_k: 0.0,
        rho_tilde_k: 0.0,
        residual_history: vec![m_norm * m_norm],
        rank_history: vec![0],
    };
    let mut status = SolverStatus::default();
    let mut stages = Vec::new();
    let mut inner_total = 0;
    let zeros = Array2::<f64>::zeros((n1, n2));

    loop {
        let k = state.k + 1;
        let problem = Subproblem {
            m: m.view(),
            w: state.w.view(),
            s: state.s.view(),
            lambda: state.lambda_k,
            mu: state.mu_k,
            gamma1: instance.gamma1,
            gamma2: instance.gamma2,
        };
        let (x0, y0) = if opts.warm_start {
            (state.x.view(), state.y.view())
        } else {
            (zeros.view(), zeros.view())
        };
        let inner = apg_subproblem(&problem, x0, y0, &opts.inner)?;
        inner_total += inner.iterations;
        if !inner.converged {
            status.inner_max_iter_hits += 1;
        }

        // Step 2: penalty parameters.
        if k == 1 {
            let x_norm = inner.x_svd.sigma.first().copied().unwrap_or(0.0);
            let y_max = max_abs(inner.y.view());
            status.rho_floor_used = x_norm < NORM_FLOOR;
            status.rho_tilde_floor_used = y_max < NORM_FLOOR;
            state.rho_k = schedule.rho_scale / x_norm.max(NORM_FLOOR);
            state.rho_tilde_k = schedule.rho_tilde_scale / y_max.max(NORM_FLOOR);
        } else {
            state.rho_tilde_k *= schedule.rho_tilde_growth;
        }

        // Step 3: subgradients at the new iterate.
        let w = subgrad_spectral_from_svd(&inner.x_svd, phi, state.rho_k);
        let s = inner
            .y
            .mapv(|v| phi.psi_star_subgrad(state.rho_tilde_k * v.abs()));
        let rank = rank_from_sigma(
            inner.x_svd.sigma.as_slice().expect("contiguous"),
            schedule.rank_rel_tol,
        );

        state.k = k;
        state
            .residual_history
            .push(residual_sq(m, &inner.x, &inner.y));
        state.rank_history.push(rank);
        state.x = inner.x.clone();
        state.y = inner.y.clone();
        state.w = w;
        state.s = s;
        let check = state.check(&inner)?;
        stages.push(StageRecord {
            k,
            lambda: state.lambda_k,
            mu: state.mu_k,
            rho: state.rho_k,
            rho_tilde: state.rho_tilde_k,
            residual_sq: state.residual_history[k],
            rank,
            sparsity: count_nonzero(state.y.view(), 0.0),
            inner_iters: inner.iterations,
            inner_converged: inner.converged,
            check,
        });

        // Step 4: next stage weights.
        state.lambda_k = schedule.lambda_k(k + 1);
        state.mu_k = schedule.mu_k(k + 1);

        if m_norm == 0.0 {
            status.zero_data = true;
            break;
        }
        let change = (state.residual_history[k] - state.residual_history[k - 1]).abs();
        if change <= schedule.stop_tol * m_norm
            && settled(&state.rank_history, schedule.rank_stable_window)
        {
            status.converged = true;
            break;
        }
        if k >= schedule.max_outer {
            status.max_outer_reached = true;
            break;
        }
    }

    let final_objective =
        instance.objective(state.x.view(), state.y.view(), schedule.rank_rel_tol)?;
    let x_hat = instance.m.like(state.x)?.to_original();
    let y_hat = instance.m.like(state.y)?.to_original();
    let final_rank = numerical_rank(x_hat.view(), schedule.rank_rel_tol)?;
    let final_sparsity = count_nonzero(y_hat.view(), 0.0);
    Ok(SolverReport {
        x_hat,
        y_hat,
        outer_iters: state.k,
        inner_iters_total: inner_total,
        final_rank,
        final_sparsity,
        final_objective,
        residual_history: state.residual_history[1..].to_vec(),
        rank_history: state.rank_history[1..].to_vec(),
        stages,
        status,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}
