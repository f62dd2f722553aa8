//! Oracle and invariant checks across the crate.
//!
//! Every check returns a [`CheckResult`] instead of panicking, so the suite can
//! run to completion and report all deviations. The parameterized `check_*`
//! functions are public so callers can run them at other sizes or against
//! other generators.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{array, Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{generate_instance, ExperimentConfig, TrialRng};
use crate::group::{
    regularized_surrogate_objective, surrogate_penalty_term, threshold_regularized_variant,
    GroupNorm, GroupPartition, GroupSurrogateParams,
};
use crate::matrix::prox::{nuclear_spectral_box, weighted_l1_box};
use crate::matrix::subgrad::{
    entrywise_attainment_gap, spectral_attainment_gap, subgrad_entrywise, subgrad_spectral,
};
use crate::matrix::{
    frobenius_norm, max_abs, rank_surrogate, singular_values, spectral_norm, theta_rho,
    truncate_matrix,
};
use crate::oracles::{
    brute_force_regularized_min, brute_force_surrogate_min, conjugate_by_search, prox_by_grid,
    scalar_min_by_grid, GridSpec, LeastSquaresLoss,
};
use crate::phi::{PhiKind, PhiSpec};
use crate::solver::{default_schedule, gep_mscra, DecompositionInstance, SolverOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    #[default]
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::Parse(format!("unknown level `{other}`"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest observed deviation, or the number of failing cases for counting checks.
    pub observed: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<32} observed {:.3e} (tol {:.1e}) {:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.tolerance,
            self.seconds
        )?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Tracks the worst deviation seen while a check runs.
struct Tally {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    failures: usize,
    first_failure: Option<String>,
    started: Instant,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: 0.0,
            failures: 0,
            first_failure: None,
            started: Instant::now(),
        }
    }

    /// Records `deviation` against the check's tolerance.
    fn deviation(&mut self, deviation: f64, context: impl FnOnce() -> String) {
        let bad = !(deviation <= self.tolerance);
        if bad || deviation > self.worst {
            self.worst = if deviation.is_nan() {
                f64::INFINITY
            } else {
                deviation.max(self.worst)
            };
        }
        if bad {
            self.fail(context);
        }
    }

    /// Records a boolean condition that does not carry a magnitude.
    fn require(&mut self, ok: bool, context: impl FnOnce() -> String) {
        if !ok {
            self.fail(context);
        }
    }

    fn fail(&mut self, context: impl FnOnce() -> String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(context());
        }
    }

    fn finish(self, summary: String) -> CheckResult {
        let passed = self.failures == 0;
        let detail = match self.first_failure {
            Some(first) => format!("{} failing; first: {first}", self.failures),
            None => summary,
        };
        CheckResult {
            name: self.name.to_string(),
            passed,
            observed: self.worst,
            tolerance: self.tolerance,
            detail,
            seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

fn error_result(name: &'static str, started: Instant, e: Error) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        observed: f64::INFINITY,
        tolerance: 0.0,
        detail: format!("error: {e}"),
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// The five families at their default parameters.
pub fn default_families() -> Vec<PhiSpec> {
    PhiKind::ALL
        .iter()
        .map(|&k| PhiSpec::new(k, &[]).expect("default parameters are valid"))
        .collect()
}

/// Closed-form `ψ*` against ternary search on `s ∈ [−3, 3φ′₋(1)]`.
pub fn check_conjugacy(phis: &[PhiSpec], samples: usize, tol: f64) -> CheckResult {
    let mut tally = Tally::new("phi.conjugacy", tol);
    for phi in phis {
        let hi = 3.0 * phi.d_minus_1();
        for i in 0..samples {
            let s = -3.0 + (hi + 3.0) * i as f64 / (samples.max(2) - 1) as f64;
            let closed = phi.psi_star(s);
            let oracle = conjugate_by_search(phi, s, 1e-12);
            tally.deviation((closed - oracle).abs(), || {
                format!("{} at s = {s}: {closed} vs {oracle}", phi.kind())
            });
        }
    }
    tally.finish(format!("{} families x {samples} points", phis.len()))
}

/// Grid minimum of `φ(t) + s(1 − t)` against `s − ψ*(s)`, plus the three-case
/// lower bounds and exact saturation above `φ′₋(1)`.
pub fn check_penalty_calculus(
    phis: &[PhiSpec],
    samples: usize,
    grid_points: usize,
    tol: f64,
) -> CheckResult {
    let mut tally = Tally::new("phi.penalty_calculus", tol);
    let grid = match GridSpec::unit(grid_points) {
        Ok(g) => g,
        Err(e) => return error_result("phi.penalty_calculus", Instant::now(), e),
    };
    for phi in phis {
        let (d, ts, t0) = (phi.d_minus_1(), phi.t_star(), phi.t_zero());
        let knee = 1.0 / (1.0 - ts);
        for i in 0..samples {
            let s = 3.0 * d * i as f64 / (samples.max(2) - 1) as f64;
            let closed = match phi.penalty_value(s) {
                Ok(v) => v,
                Err(e) => {
                    tally.fail(|| format!("{}: {e}", phi.kind()));
                    continue;
                }
            };
            let grid_min = scalar_min_by_grid(phi, s, &grid);
            tally.deviation((grid_min - closed).abs(), || {
                format!("{} at s = {s}: grid {grid_min} vs {closed}", phi.kind())
            });
            let identity = (closed - (s - phi.psi_star(s))).abs();
            tally.require(s > d || identity <= 1e-12, || {
                format!("{} identity at s = {s}", phi.kind())
            });
            let bound_ok = if s > d {
                closed == 1.0
            } else if s >= knee {
                closed >= s * (1.0 - t0) / (d * (1.0 - ts)) - 1e-12
            } else {
                closed >= s * (1.0 - t0) - 1e-12
            };
            tally.require(bound_ok, || {
                format!("{} case bound at s = {s}: {closed}", phi.kind())
            });
        }
    }
    tally.finish(format!(
        "{} families x {samples} points, {grid_points}-point grid",
        phis.len()
    ))
}

/// The SCAD penalty of Fan and Li, `p_λ(θ)` for `θ ≥ 0`.
pub fn scad_penalty(theta: f64, lambda: f64, a: f64) -> f64 {
    if theta <= lambda {
        lambda * theta
    } else if theta <= a * lambda {
        (2.0 * a * lambda * theta - theta * theta - lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        lambda * lambda * (a + 1.0) / 2.0
    }
}

/// With singleton groups and the SCAD generator, the surrogate term equals
/// `2/((a+1)λ²)·Σ p_λ(|xᵢ|)` for `λ = 2/((a+1)ϱ)`.
pub fn check_scad_identity(a: f64, samples: usize, tol: f64) -> CheckResult {
    let started = Instant::now();
    let mut tally = Tally::new("vector.scad_identity", tol);
    let phi = match PhiSpec::scad(a) {
        Ok(p) => p,
        Err(e) => return error_result("vector.scad_identity", started, e),
    };
    let dim = 4;
    let partition = GroupPartition::singletons(dim, GroupNorm::L2);
    let mut rng = TrialRng::new(0x5CAD, 0);
    for i in 0..samples {
        let rho = 0.2 + 5.0 * rng.uniform();
        let lambda = 2.0 / ((a + 1.0) * rho);
        // spread magnitudes over all three branches of p_λ
        let x: Vec<f64> = (0..dim)
            .map(|_| rng.uniform_in(-1.5, 1.5) * a * lambda)
            .collect();
        let direct: f64 = 2.0 / ((a + 1.0) * lambda * lambda)
            * x.iter()
                .map(|v| scad_penalty(v.abs(), lambda, a))
                .sum::<f64>();
        match surrogate_penalty_term(&x, &partition, &phi, rho) {
            Ok(v) => tally.deviation((v - direct).abs(), || {
                format!("sample {i}: {v} vs {direct}")
            }),
            Err(e) => tally.fail(|| e.to_string()),
        }
    }
    tally.finish(format!("a = {a}, {samples} points in R^{dim}"))
}

/// Both proximal kernels against grid search, one scalar component at a time.
pub fn check_prox_oracles(cases: usize, grid_points: usize, tol: f64) -> CheckResult {
    let mut tally = Tally::new("matrix.prox_oracles", tol);
    let mut rng = TrialRng::new(0x9A0C, 0);
    for case in 0..cases {
        // entrywise kernel on a single entry
        let y = rng.uniform_in(-5.0, 5.0);
        let w = 3.0 * rng.uniform();
        let bound = rng.uniform_in(0.5, 5.0);
        let grid = GridSpec::new(-bound, bound, grid_points).expect("valid grid");
        match weighted_l1_box(array![[y]].view(), array![[w]].view(), bound) {
            Ok(z) => {
                let oracle = prox_by_grid(w, y, bound, &grid);
                tally.deviation((z[[0, 0]] - oracle).abs(), || {
                    format!("entrywise case {case}: y = {y}, w = {w}, box = {bound}")
                });
            }
            Err(e) => tally.fail(|| e.to_string()),
        }

        // spectral kernel: singular values of the output against the scalar prox of each input σ
        let (m, n) = (1 + case % 4, 2 + case % 5);
        let x = Array2::from_shape_simple_fn((m, n), || rng.uniform_in(-3.0, 3.0));
        let tau = 2.0 * rng.uniform();
        let gamma1 = rng.uniform_in(0.5, 5.0);
        let grid = GridSpec::new(-gamma1, gamma1, grid_points).expect("valid grid");
        let result = nuclear_spectral_box(x.view(), tau, gamma1)
            .and_then(|z| Ok((singular_values(x.view())?, singular_values(z.view())?)));
        match result {
            Ok((before, after)) => {
                for (s, got) in before.iter().zip(after) {
                    let oracle = prox_by_grid(tau, *s, gamma1, &grid);
                    tally.deviation((got - oracle).abs(), || {
                        format!("spectral case {case}: σ = {s}, τ = {tau}, γ₁ = {gamma1}")
                    });
                }
            }
            Err(e) => tally.fail(|| e.to_string()),
        }
    }
    tally.finish(format!(
        "{cases} cases per kernel, {grid_points}-point grids"
    ))
}

/// Subgradient selections attain `min Σφ(σ(W)) − ϱ⟨X, W⟩` and its entrywise
/// counterpart, with `‖W‖ ≤ 1` and `S ∈ [0, 1]`.
pub fn check_subgradient_attainment(phis: &[PhiSpec], matrices: usize, tol: f64) -> CheckResult {
    let mut tally = Tally::new("matrix.subgradient_attainment", tol);
    let mut rng = TrialRng::new(0xA77A, 0);
    for i in 0..matrices {
        let phi = &phis[i % phis.len()];
        let m = 1 + (rng.uniform() * 20.0) as usize;
        let n = 1 + (rng.uniform() * 30.0) as usize;
        let scale = 10f64.powf(rng.uniform_in(-1.0, 1.0));
        let mut x = Array2::from_shape_simple_fn((m, n), || scale * rng.standard_normal());
        if i % 3 == 0 {
            // rank-deficient case
            x.row_mut(0).fill(0.0);
        }
        let rho = rng.uniform_in(0.2, 5.0);
        let outcome = (|| -> Result<(f64, f64, f64, f64)> {
            let w = subgrad_spectral(x.view(), phi, rho)?;
            let s = subgrad_entrywise(x.view(), phi, rho)?;
            Ok((
                spectral_attainment_gap(x.view(), w.view(), phi, rho)?,
                entrywise_attainment_gap(x.view(), s.view(), phi, rho)?,
                spectral_norm(w.view())?,
                s.iter().fold(0.0f64, |a, v| a.max((v - 0.5).abs())),
            ))
        })();
        match outcome {
            Ok((gap_w, gap_s, w_norm, s_spread)) => {
                tally.deviation(gap_w.abs(), || {
                    format!("{} spectral gap on {m}x{n}", phi.kind())
                });
                tally.deviation(gap_s.abs(), || {
                    format!("{} entrywise gap on {m}x{n}", phi.kind())
                });
                tally.require(w_norm <= 1.0 + 1e-12, || format!("‖W‖ = {w_norm}"));
                tally.require(s_spread <= 0.5, || "S outside [0, 1]".into());
            }
            Err(e) => tally.fail(|| e.to_string()),
        }
    }
    tally.finish(format!("{matrices} matrices up to 20x30"))
}

/// Exactness, idempotence, convexity and nonexpansiveness on random matrices.
pub fn check_matrix_invariants(samples: usize) -> CheckResult {
    let mut tally = Tally::new("matrix.invariants", 1e-8);
    let mut rng = TrialRng::new(0x1A7B, 0);
    let phis = default_families();
    for i in 0..samples {
        let phi = &phis[i % phis.len()];
        let (m, n) = (2 + i % 4, 3 + i % 3);
        let a = Array2::from_shape_simple_fn((m, n), || rng.standard_normal());
        let b = Array2::from_shape_simple_fn((m, n), || rng.standard_normal());
        let rho = rng.uniform_in(0.5, 3.0);
        let outcome = (|| -> Result<()> {
            // separated singular values make the surrogate exact
            let r = 1 + i % m.min(n);
            let big = low_rank_separated(&mut rng, m, n, r, phi.d_minus_1() / rho);
            let exact = rank_surrogate(big.view(), phi, rho)?;
            tally.deviation((exact - r as f64).abs(), || {
                format!("rank surrogate {exact} vs {r}")
            });

            let once = truncate_matrix(a.view(), phi, rho)?;
            let twice = truncate_matrix(once.view(), phi, rho)?;
            tally.deviation(frobenius_norm((&once - &twice).view()), || {
                "truncation idempotence".into()
            });

            let mid = (&a + &b) * 0.5;
            let lhs = theta_rho(mid.view(), phi, rho)?;
            let rhs = 0.5 * (theta_rho(a.view(), phi, rho)? + theta_rho(b.view(), phi, rho)?);
            tally.deviation((lhs - rhs).max(0.0), || "theta convexity".into());

            let tau = rng.uniform();
            let pa = nuclear_spectral_box(a.view(), tau, 1.5)?;
            let pb = nuclear_spectral_box(b.view(), tau, 1.5)?;
            let expand = frobenius_norm((&pa - &pb).view()) - frobenius_norm((&a - &b).view());
            tally.deviation(expand.max(0.0), || "nuclear prox expands".into());
            let weights = Array2::from_shape_simple_fn((m, n), || rng.uniform());
            let qa = weighted_l1_box(a.view(), weights.view(), 1.0)?;
            let qb = weighted_l1_box(b.view(), weights.view(), 1.0)?;
            let expand = frobenius_norm((&qa - &qb).view()) - frobenius_norm((&a - &b).view());
            tally.deviation(expand.max(0.0), || "entrywise prox expands".into());
            Ok(())
        })();
        if let Err(e) = outcome {
            tally.fail(|| e.to_string());
        }
    }
    tally.finish(format!("{samples} random cases"))
}

/// A rank-`r` matrix whose nonzero singular values all exceed `floor·(1 + 1e-3)`.
fn low_rank_separated(rng: &mut TrialRng, m: usize, n: usize, r: usize, floor: f64) -> Array2<f64> {
    let u = orthonormal_columns(rng, m, r);
    let v = orthonormal_columns(rng, n, r);
    let mut out = Array2::zeros((m, n));
    for k in 0..r {
        let s = floor * (1.001 + rng.uniform());
        for i in 0..m {
            for j in 0..n {
                out[[i, j]] += s * u[[i, k]] * v[[j, k]];
            }
        }
    }
    out
}

/// Gram-Schmidt on Gaussian columns.
fn orthonormal_columns(rng: &mut TrialRng, rows: usize, cols: usize) -> Array2<f64> {
    let mut q = Array2::<f64>::zeros((rows, cols));
    for k in 0..cols {
        loop {
            let mut v: Array1<f64> = (0..rows).map(|_| rng.standard_normal()).collect();
            for j in 0..k {
                let proj = q.column(j).dot(&v);
                v.scaled_add(-proj, &q.column(j));
            }
            let norm = v.dot(&v).sqrt();
            if norm > 1e-6 {
                q.column_mut(k).assign(&(v / norm));
                break;
            }
        }
    }
    q
}

/// Outcome of one two-variable exact-penalty comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCase {
    pub kind: PhiKind,
    pub rho: f64,
    pub oracle_support: Vec<usize>,
    pub grid_support: Vec<usize>,
}

impl EquivalenceCase {
    pub fn agrees(&self) -> bool {
        self.oracle_support == self.grid_support
    }
}

fn ls_on_support(a: &Array2<f64>, b: &Array1<f64>, support: &[usize]) -> Array1<f64> {
    let mut x = Array1::zeros(2);
    match support {
        [] => {}
        [j] => {
            let col = a.column(*j);
            x[*j] = col.dot(b) / col.dot(&col);
        }
        _ => {
            let g = a.t().dot(a);
            let r = a.t().dot(b);
            let det = g[[0, 0]] * g[[1, 1]] - g[[0, 1]] * g[[1, 0]];
            x[0] = (g[[1, 1]] * r[0] - g[[0, 1]] * r[1]) / det;
            x[1] = (g[[0, 0]] * r[1] - g[[1, 0]] * r[0]) / det;
        }
    }
    x
}

/// Runs `instances` random problems `min ν·½‖Ax − b‖² + ‖x‖₀` over a box
/// containing every support's least-squares point, comparing the support of
/// the enumeration minimizer with that of the grid minimizer of the surrogate
/// at twice the regularized threshold. Generators cycle through `phis`.
pub fn equivalence_cases(
    phis: &[PhiSpec],
    instances: usize,
    grid_points: usize,
    nu: f64,
    seed: u64,
) -> Result<Vec<EquivalenceCase>> {
    let partition = GroupPartition::singletons(2, GroupNorm::L2);
    let mut rng = TrialRng::new(seed, 0);
    let mut cases = Vec::with_capacity(instances);
    for i in 0..instances {
        let phi = &phis[i % phis.len()];
        let a = Array2::from_shape_simple_fn((3, 2), || rng.standard_normal());
        let scale = rng.uniform_in(1.0, 8.0);
        let b: Array1<f64> = (0..3).map(|_| scale * rng.standard_normal()).collect();

        let (best, _) = brute_force_regularized_min(
            a.view(),
            b.view(),
            nu,
            &partition,
            LeastSquaresLoss::HalfSquared,
        )?;
        let radius = 1.25
            * [vec![0], vec![1], vec![0, 1]]
                .iter()
                .map(|s| {
                    max_abs(
                        ls_on_support(&a, &b, s)
                            .insert_axis(ndarray::Axis(0))
                            .view(),
                    )
                })
                .fold(1.0, f64::max);
        let l_f = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
            .iter()
            .map(|corner| {
                let v = array![corner[0] * radius, corner[1] * radius];
                let grad = a.t().dot(&(a.dot(&v) - &b));
                grad.dot(&grad).sqrt()
            })
            .fold(0.0, f64::max);
        let rho = 2.0 * threshold_regularized_variant(phi, nu, l_f, &partition)?;
        let params = GroupSurrogateParams::new(phi.clone(), rho, nu)?;
        let objective = |x: &[f64]| {
            let r = a.dot(&array![x[0], x[1]]) - &b;
            let f = 0.5 * r.dot(&r);
            regularized_surrogate_objective(x, f, &params, &partition).unwrap_or(f64::INFINITY)
        };
        let grid = GridSpec::new(-radius, radius, grid_points)?;
        let (x, _) = brute_force_surrogate_min(objective, &[grid, grid])?;
        cases.push(EquivalenceCase {
            kind: phi.kind(),
            rho,
            oracle_support: best.groups,
            grid_support: (0..2).filter(|&j| x[j].abs() > 1e-8).collect(),
        });
    }
    Ok(cases)
}

pub fn check_exact_penalty_equivalence(instances: usize, grid_points: usize) -> CheckResult {
    let started = Instant::now();
    let mut tally = Tally::new("vector.exact_penalty_equivalence", 0.0);
    match equivalence_cases(&default_families(), instances, grid_points, 0.1, 0xE9) {
        Ok(cases) => {
            let mut sizes = [0usize; 3];
            for (i, c) in cases.iter().enumerate() {
                sizes[c.oracle_support.len()] += 1;
                if !c.agrees() {
                    tally.worst += 1.0;
                }
                tally.require(c.agrees(), || {
                    format!(
                        "case {i} ({}): oracle {:?} vs grid {:?}",
                        c.kind, c.oracle_support, c.grid_support
                    )
                });
            }
            tally.finish(format!(
                "{instances} instances, {grid_points}^2 grid, oracle support sizes 0/1/2: {}/{}/{}",
                sizes[0], sizes[1], sizes[2]
            ))
        }
        Err(e) => error_result("vector.exact_penalty_equivalence", started, e),
    }
}

/// Sparsity of `M_S` against its binomial law and the factor variance against `10σ/√n`.
pub fn check_generation_statistics(trials: usize) -> CheckResult {
    let mut tally = Tally::new("experiment.generation_statistics", 0.1);
    let (n, rho_s, sigma) = (100, 0.1, 0.1);
    let config = ExperimentConfig::new(n, 10, rho_s, sigma, trials, 0x6E);
    let cells = (n * n) as f64;
    let mut total = 0usize;
    for t in 0..trials {
        let inst = generate_instance(&config, t as u64);
        total += inst.m_s.iter().filter(|v| **v != 0.0).count();
        let factors: Vec<f64> = inst
            .r_factor
            .iter()
            .chain(inst.l_factor.iter())
            .copied()
            .collect();
        let mean = factors.iter().sum::<f64>() / factors.len() as f64;
        let var =
            factors.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (factors.len() - 1) as f64;
        let target = 10.0 * sigma / (n as f64).sqrt();
        tally.deviation((var / target - 1.0).abs(), || {
            format!("trial {t}: factor variance {var} vs {target}")
        });
    }
    let mean = total as f64 / trials as f64;
    let sd = (cells * rho_s * (1.0 - rho_s) / trials as f64).sqrt();
    tally.require((mean - cells * rho_s).abs() <= 3.0 * sd, || {
        format!("mean sparsity {mean} vs {} ± {}", cells * rho_s, 3.0 * sd)
    });
    tally.finish(format!("{trials} trials at n = {n}, mean sparsity {mean}"))
}

/// Runs the solver twice on a seeded instance: feasibility, inner certificates,
/// the report invariants, and bitwise determinism.
pub fn check_solver_certificates(n: usize, r: usize) -> CheckResult {
    let started = Instant::now();
    let mut tally = Tally::new("solver.certificates", 1e-8);
    let config = ExperimentConfig::new(n, r, 0.05, 0.1, 1, 0x50);
    let inst = generate_instance(&config, 0);
    let outcome = (|| -> Result<()> {
        let radii = crate::experiment::box_radii(inst.m_r.view(), inst.m_s.view())?;
        let problem =
            DecompositionInstance::with_radii(inst.m.clone(), radii.gamma1, radii.gamma2)?;
        let schedule = default_schedule(problem.n());
        let phi = PhiSpec::default_scad();
        let opts = SolverOptions::standard();
        let first = gep_mscra(&problem, &phi, &schedule, &opts)?;
        let second = gep_mscra(&problem, &phi, &schedule, &opts)?;
        tally.require(
            first.x_hat == second.x_hat && first.y_hat == second.y_hat,
            || "repeated runs differ".into(),
        );
        tally.require(first.stages == second.stages, || {
            "stage traces differ".into()
        });
        for stage in &first.stages {
            let c = &stage.check;
            tally.deviation((c.x_norm - radii.gamma1).max(0.0), || {
                format!("stage {}: ‖X‖ = {}", stage.k, c.x_norm)
            });
            tally.deviation((c.y_max - radii.gamma2).max(0.0), || {
                format!("stage {}: ‖Y‖∞ = {}", stage.k, c.y_max)
            });
            tally.deviation((c.w_norm - 1.0).max(0.0), || {
                format!("stage {}: ‖W‖ = {}", stage.k, c.w_norm)
            });
            tally.deviation((c.s_max - 1.0).max(0.0), || {
                format!("stage {}: ‖S‖∞ = {}", stage.k, c.s_max)
            });
            tally.require(c.certified(), || {
                format!(
                    "stage {}: inner residual {} > {}",
                    stage.k, c.inner_residual, c.inner_bound
                )
            });
        }
        let rank = crate::solver::numerical_rank(first.x_hat.view(), schedule.rank_rel_tol)?;
        tally.require(rank == first.final_rank, || "final rank mismatch".into());
        tally.require(first.residual_history.len() == first.outer_iters, || {
            "history length".into()
        });
        Ok(())
    })();
    match outcome {
        Ok(()) => tally.finish(format!("n = {n}, r = {r}")),
        Err(e) => error_result("solver.certificates", started, e),
    }
}

pub fn verify_suite(level: Level) -> VerifyReport {
    let families = default_families();
    let full = level == Level::Full;
    let mut checks = vec![
        check_conjugacy(&families, 500, 1e-8),
        check_penalty_calculus(
            &families,
            200,
            if full { 100_001 } else { 10_001 },
            if full { 1e-7 } else { 1e-6 },
        ),
        check_scad_identity(crate::phi::DEFAULT_SCAD_A, 1000, 1e-10),
        check_prox_oracles(
            200,
            if full { 100_001 } else { 10_001 },
            if full { 2e-4 } else { 2e-3 },
        ),
        check_subgradient_attainment(&families, 50, 1e-8),
        check_matrix_invariants(200),
        check_generation_statistics(10),
        check_solver_certificates(30, 3),
    ];
    if full {
        checks.push(check_exact_penalty_equivalence(20, 2001));
        checks.push(check_solver_certificates(100, 10));
    }
    VerifyReport { level, checks }
}
