//! Accelerated proximal gradient for the convex stage subproblem
//!
//! ```text
//! min ½‖X + Y − M‖_F² + λ(‖X‖_* − ⟨W, X⟩) + μ⟨E − S, |Y|⟩
//! s.t. ‖X‖ ≤ γ₁, ‖Y‖_∞ ≤ γ₂.
//! ```
//!
//! The smooth part carries the linear term, so its gradient is
//! `(X + Y − M − λW, X + Y − M)` with Lipschitz constant 2. Momentum is reset
//! whenever the step and the momentum direction disagree. Once the relative
//! iterate change drops below tolerance the fixed-point residual of one plain
//! proximal-gradient step is measured; if it is too large iteration resumes
//! from that step.

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matrix::prox::{nuclear_spectral_box_factored, weighted_l1_box};
use crate::matrix::{frobenius_norm, same_shape, SvdTriple};

const STEP: f64 = 0.5;

/// Inner-solver controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApgOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: bool,
}

impl Default for ApgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            restart: true,
        }
    }
}

/// Data of one stage subproblem.
#[derive(Clone, Copy, Debug)]
pub struct Subproblem<'a> {
    pub m: ArrayView2<'a, f64>,
    pub w: ArrayView2<'a, f64>,
    pub s: ArrayView2<'a, f64>,
    pub lambda: f64,
    pub mu: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Clone, Debug)]
pub struct ApgOutput {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    /// Thin SVD of `x`.
    pub x_svd: SvdTriple,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Z − prox(Z − ½∇f(Z))‖_F` at the returned point.
    pub residual: f64,
    /// `tol·(1 + ‖Z‖_F)`.
    pub residual_bound: f64,
}

impl ApgOutput {
    pub fn certified(&self) -> bool {
        self.residual <= self.residual_bound
    }
}

struct Point {
    x: Array2<f64>,
    y: Array2<f64>,
    x_svd: SvdTriple,
}

impl<'a> Subproblem<'a> {
    fn check(&self) -> Result<()> {
        same_shape(self.m, self.w)?;
        same_shape(self.m, self.s)?;
        if !(self.lambda >= 0.0) || !(self.mu >= 0.0) {
            return Err(domain(format!(
                "stage weights must be nonnegative, got lambda = {} and mu = {}",
                self.lambda, self.mu
            )));
        }
        if let Some(v) = self.s.iter().find(|v| !(**v <= 1.0)) {
            return Err(domain(format!("entrywise weights need S <= 1, found {v}")));
        }
        Ok(())
    }

    /// `½‖X + Y − M‖_F² + λ(‖X‖_* − ⟨W, X⟩) + μ⟨E − S, |Y|⟩`, ignoring the box constraints.
    pub fn objective(&self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
        let fit = Zip::from(&x)
            .and(&y)
            .and(self.m)
            .fold(0.0, |acc, a, b, c| acc + (a + b - c).powi(2));
        let nuclear = crate::matrix::nuclear_norm(x)?;
        let linear = Zip::from(&x).and(self.w).fold(0.0, |acc, a, b| acc + a * b);
        let weighted = Zip::from(&y)
            .and(self.s)
            .fold(0.0, |acc, a, b| acc + (1.0 - b) * a.abs());
        Ok(0.5 * fit + self.lambda * (nuclear - linear) + self.mu * weighted)
    }

    /// One proximal-gradient step with step size ½ from `(x, y)`.
    fn step(&self, x: &Array2<f64>, y: &Array2<f64>, y_weights: &Array2<f64>) -> Result<Point> {
        let lambda = self.lambda;
        let mut ax = Array2::zeros(x.raw_dim());
        let mut ay = Array2::zeros(y.raw_dim());
        Zip::from(&mut ax)
            .and(&mut ay)
            .and(x)
            .and(y)
            .and(self.m)
            .and(self.w)
            .for_each(|ax, ay, &xv, &yv, &mv, &wv| {
                let g = xv + yv - mv;
                *ax = xv - STEP * (g - lambda * wv);
                *ay = yv - STEP * g;
            });
        let (x_new, x_svd) = nuclear_spectral_box_factored(ax.view(), STEP * lambda, self.gamma1)?;
        let y_new = weighted_l1_box(ay.view(), y_weights.view(), self.gamma2)?;
        Ok(Point {
            x: x_new,
            y: y_new,
            x_svd,
        })
    }
}

fn distance(a: &Point, bx: &Array2<f64>, by: &Array2<f64>) -> f64 {
    let dx = Zip::from(&a.x)
        .and(bx)
        .fold(0.0, |acc, p, q| acc + (p - q).powi(2));
    let dy = Zip::from(&a.y)
        .and(by)
        .fold(0.0, |acc, p, q| acc + (p - q).powi(2));
    (dx + dy).sqrt()
}

fn joint_norm(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    frobenius_norm(x.view()).hypot(frobenius_norm(y.view()))
}

/// Solves the stage subproblem from the warm start `(x0, y0)`.
pub fn apg_subproblem(
    problem: &Subproblem<'_>,
    x0: ArrayView2<'_, f64>,
    y0: ArrayView2<'_, f64>,
    opts: &ApgOptions,
) -> Result<ApgOutput> {
    problem.check()?;
    same_shape(problem.m, x0)?;
    same_shape(problem.m, y0)?;
    let y_weights = problem.s.mapv(|s| STEP * problem.mu * (1.0 - s));

    let mut x = x0.to_owned();
    let mut y = y0.to_owned();
    let (mut xt, mut yt) = (x.clone(), y.clone());
    let mut t = 1.0_f64;
    let mut iterations = 0;
    let max_iter = opts.max_iter.max(1);

    loop {
        let next = problem.step(&xt, &yt, &y_weights)?;
        iterations += 1;
        let change = distance(&next, &x, &y);
        let scale = 1.0 + joint_norm(&next.x, &next.y);

        if change <= opts.tol * scale || iterations >= max_iter {
            // Certificate: one plain step from the candidate.
            let probe = problem.step(&next.x, &next.y, &y_weights)?;
            let residual = distance(&probe, &next.x, &next.y);
            let bound = opts.tol * scale;
            if residual <= bound || iterations >= max_iter {
                return Ok(ApgOutput {
                    x: next.x,
                    y: next.y,
                    x_svd: next.x_svd,
                    iterations,
                    converged: residual <= bound,
                    residual,
                    residual_bound: bound,
                });
            }
            iterations += 1;
            x = probe.x;
            y = probe.y;
            xt.assign(&x);
            yt.assign(&y);
            t = 1.0;
            continue;
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut beta = (t - 1.0) / t_next;
        if opts.restart {
            // ⟨Z̃ − Z⁺, Z⁺ − Z⟩ > 0 means the momentum points uphill.
            let uphill = Zip::from(&xt)
                .and(&next.x)
                .and(&x)
                .fold(0.0, |acc, a, b, c| acc + (a - b) * (b - c))
                + Zip::from(&yt)
                    .and(&next.y)
                    .and(&y)
                    .fold(0.0, |acc, a, b, c| acc + (a - b) * (b - c));
            if uphill > 0.0 {
                beta = 0.0;
                t = 1.0;
            } else {
                t = t_next;
            }
        } else {
            t = t_next;
        }
        Zip::from(&mut xt)
            .and(&next.x)
            .and(&x)
            .for_each(|e, &n, &o| *e = n + beta * (n - o));
        Zip::from(&mut yt)
            .and(&next.y)
            .and(&y)
            .for_each(|e, &n, &o| *e = n + beta * (n - o));
        x = next.x;
        y = next.y;
    }
}
