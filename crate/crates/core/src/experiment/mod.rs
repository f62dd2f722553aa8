//! Synthetic low-rank plus sparse study.
//!
//! `M = M_R + M_S + M₀` with `M_R = RLᵀ` for `n×r` Gaussian factors of
//! variance `σ_n² = 10σ/√n`, `M_S` zero except with probability `ρ_s` where
//! it is uniform on `[−5, 5]`, and `M₀` Gaussian noise of variance `σ²`.

pub mod rng;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dims, Error, Result};
use crate::matrix::{count_nonzero, frobenius_norm, max_abs, spectral_norm};
use crate::phi::PhiSpec;
use crate::solver::{
    default_schedule, gep_mscra, numerical_rank, DecompositionInstance, Schedule, SolverOptions,
};

pub use rng::TrialRng;

/// Radius used when `M_R` or `M_S` vanishes.
pub const FALLBACK_RADIUS: f64 = 10.0;

pub const CSV_HEADER: &str = "trial,n,r,rho_s,sigma,rms_x,rms_y,rank_hat,sparsity_hat,true_rank,true_sparsity,outer_iters,wall_time_s,status";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub r: usize,
    pub rho_s: f64,
    pub sigma: f64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub phi: PhiSpec,
    #[serde(default)]
    pub output_path: Option<String>,
    /// Standard deviation of the factor entries, replacing `√(10σ/√n)`.
    #[serde(default)]
    pub sigma_n_override: Option<f64>,
    /// Replaces the default schedule for `n`.
    #[serde(default)]
    pub schedule: Option<Schedule>,
    #[serde(default = "SolverOptions::standard")]
    pub solver: SolverOptions,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(n: usize, r: usize, rho_s: f64, sigma: f64, trials: usize, seed: u64) -> Self {
        Self {
            n,
            r,
            rho_s,
            sigma,
            trials,
            seed,
            phi: PhiSpec::default(),
            output_path: None,
            sigma_n_override: None,
            schedule: None,
            solver: SolverOptions::standard(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.r > self.n {
            return Err(Error::InvalidParameter {
                name: "r",
                value: self.r as f64,
                reason: "must not exceed n",
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(0.0..=1.0).contains(&self.rho_s) {
            return Err(Error::InvalidParameter {
                name: "rho_s",
                value: self.rho_s,
                reason: "must lie in [0, 1]",
            });
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: self.sigma,
                reason: "must be nonnegative",
            });
        }
        if let Some(s) = self.sigma_n_override {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "sigma_n_override",
                    value: s,
                    reason: "must be nonnegative",
                });
            }
        }
        if let Some(schedule) = &self.schedule {
            schedule.validate()?;
        }
        Ok(())
    }

    /// Standard deviation of the entries of `R` and `L`.
    pub fn factor_std(&self) -> f64 {
        self.sigma_n_override
            .unwrap_or_else(|| (10.0 * self.sigma / (self.n as f64).sqrt()).sqrt())
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
            .clone()
            .unwrap_or_else(|| default_schedule(self.n))
    }
}

/// One generated trial.
#[derive(Clone, Debug)]
pub struct Instance {
    pub m: Array2<f64>,
    pub m_r: Array2<f64>,
    pub m_s: Array2<f64>,
    pub r_factor: Array2<f64>,
    pub l_factor: Array2<f64>,
}

/// Draws trial `trial`; the same `(seed, trial)` always gives the same matrices.
///
/// Draw order: `R` row-major, `L` row-major, `M_S` entry by entry (a uniform
/// for the Bernoulli test, a second one for the value when selected), then `M₀`.
pub fn generate_instance(config: &ExperimentConfig, trial: u64) -> Instance {
    let (n, r) = (config.n, config.r);
    let mut rng = TrialRng::new(config.seed, trial);
    let std = config.factor_std();
    let r_factor = Array2::from_shape_simple_fn((n, r), || rng.normal(std));
    let l_factor = Array2::from_shape_simple_fn((n, r), || rng.normal(std));
    let m_r = r_factor.dot(&l_factor.t());
    let m_s = Array2::from_shape_simple_fn((n, n), || {
        if rng.uniform() < config.rho_s {
            rng.uniform_in(-5.0, 5.0)
        } else {
            0.0
        }
    });
    let mut m = &m_r + &m_s;
    if config.sigma > 0.0 {
        m.mapv_inplace(|v| v + rng.normal(config.sigma));
    }
    Instance {
        m,
        m_r,
        m_s,
        r_factor,
        l_factor,
    }
}

/// `(γ₁, γ₂)` together with whether a fallback radius was substituted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxRadii {
    pub gamma1: f64,
    pub gamma2: f64,
    pub fallback: bool,
}

/// `γ₁ = 10‖M_R‖`, `γ₂ = 10‖M_S‖_∞`, each replaced by [`FALLBACK_RADIUS`] when zero.
pub fn box_radii(m_r: ArrayView2<'_, f64>, m_s: ArrayView2<'_, f64>) -> Result<BoxRadii> {
    let g1 = 10.0 * spectral_norm(m_r)?;
    let g2 = 10.0 * max_abs(m_s);
    Ok(BoxRadii {
        gamma1: if g1 > 0.0 { g1 } else { FALLBACK_RADIUS },
        gamma2: if g2 > 0.0 { g2 } else { FALLBACK_RADIUS },
        fallback: !(g1 > 0.0 && g2 > 0.0),
    })
}

/// `(‖X̂ − M_R‖_F/n, ‖Ŷ − M_S‖_F/n)`.
pub fn rms_errors(
    x_hat: ArrayView2<'_, f64>,
    y_hat: ArrayView2<'_, f64>,
    m_r: ArrayView2<'_, f64>,
    m_s: ArrayView2<'_, f64>,
    n: usize,
) -> Result<(f64, f64)> {
    for (a, b) in [(x_hat, m_r), (y_hat, m_s)] {
        if a.dim() != b.dim() {
            return Err(dims(format!("{:?}", b.dim()), format!("{:?}", a.dim())));
        }
    }
    let nf = n as f64;
    Ok((
        frobenius_norm((&x_hat - &m_r).view()) / nf,
        frobenius_norm((&y_hat - &m_s).view()) / nf,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub r: usize,
    pub rho_s: f64,
    pub sigma: f64,
    pub rms_x: f64,
    pub rms_y: f64,
    pub rank_hat: usize,
    pub sparsity_hat: usize,
    pub true_rank: usize,
    pub true_sparsity: usize,
    pub outer_iters: usize,
    pub wall_time_s: f64,
    pub status: String,
    /// Feasibility and inner certificates held at every stage.
    pub certificates_ok: bool,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.status.starts_with("error")
    }
}

/// Averages over the successful trials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMeans {
    pub count: usize,
    pub rms_x: f64,
    pub rms_y: f64,
    pub rank_hat: f64,
    pub sparsity_hat: f64,
    pub true_rank: f64,
    pub true_sparsity: f64,
    pub outer_iters: f64,
    pub wall_time_s: f64,
}

impl TrialMeans {
    pub fn of(records: &[TrialRecord]) -> Self {
        let ok: Vec<&TrialRecord> = records.iter().filter(|r| !r.failed()).collect();
        let count = ok.len();
        if count == 0 {
            return Self::default();
        }
        let mean =
            |f: &dyn Fn(&TrialRecord) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / count as f64;
        Self {
            count,
            rms_x: mean(&|r| r.rms_x),
            rms_y: mean(&|r| r.rms_y),
            rank_hat: mean(&|r| r.rank_hat as f64),
            sparsity_hat: mean(&|r| r.sparsity_hat as f64),
            true_rank: mean(&|r| r.true_rank as f64),
            true_sparsity: mean(&|r| r.true_sparsity as f64),
            outer_iters: mean(&|r| r.outer_iters as f64),
            wall_time_s: mean(&|r| r.wall_time_s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub means: TrialMeans,
}

/// Generates, solves and scores one trial.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> TrialRecord {
    let started = Instant::now();
    let mut record = TrialRecord {
        trial,
        n: config.n,
        r: config.r,
        rho_s: config.rho_s,
        sigma: config.sigma,
        rms_x: f64::NAN,
        rms_y: f64::NAN,
        rank_hat: 0,
        sparsity_hat: 0,
        true_rank: 0,
        true_sparsity: 0,
        outer_iters: 0,
        wall_time_s: 0.0,
        status: String::new(),
        certificates_ok: false,
    };
    match solve_trial(config, trial, &mut record) {
        Ok(()) => {}
        Err(e) => record.status = format!("error: {e}"),
    }
    record.wall_time_s = started.elapsed().as_secs_f64();
    record
}

fn solve_trial(config: &ExperimentConfig, trial: usize, record: &mut TrialRecord) -> Result<()> {
    let inst = generate_instance(config, trial as u64);
    let radii = box_radii(inst.m_r.view(), inst.m_s.view())?;
    let schedule = config.schedule();
    record.true_rank = numerical_rank(inst.m_r.view(), schedule.rank_rel_tol)?;
    record.true_sparsity = count_nonzero(inst.m_s.view(), 0.0);
    let problem = DecompositionInstance::with_radii(inst.m, radii.gamma1, radii.gamma2)?;
    let report = gep_mscra(&problem, &config.phi, &schedule, &config.solver)?;
    let (rms_x, rms_y) = rms_errors(
        report.x_hat.view(),
        report.y_hat.view(),
        inst.m_r.view(),
        inst.m_s.view(),
        config.n,
    )?;
    record.rms_x = rms_x;
    record.rms_y = rms_y;
    record.rank_hat = report.final_rank;
    record.sparsity_hat = report.final_sparsity;
    record.outer_iters = report.outer_iters;
    record.certificates_ok = report.certificates_hold(radii.gamma1, radii.gamma2);
    let label = report.status.label();
    record.status = if radii.fallback && label == "ok" {
        "radius_fallback".to_string()
    } else {
        label.to_string()
    };
    Ok(())
}

/// Runs every trial on the current rayon pool; records come back in trial order.
pub fn run_trials(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect();
    let means = TrialMeans::of(&records);
    if let Some(path) = &config.output_path {
        write_trials_csv_file(path, &records, &means)?;
    }
    Ok(ExperimentResult {
        config: config.clone(),
        records,
        means,
    })
}

pub fn write_trials_csv<W: Write>(
    mut out: W,
    records: &[TrialRecord],
    means: &TrialMeans,
) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{}",
            r.trial,
            r.n,
            r.r,
            r.rho_s,
            r.sigma,
            r.rms_x,
            r.rms_y,
            r.rank_hat,
            r.sparsity_hat,
            r.true_rank,
            r.true_sparsity,
            r.outer_iters,
            r.wall_time_s,
            csv_field(&r.status)
        )?;
    }
    let (n, rk, rho_s, sigma) = records
        .first()
        .map(|r| (r.n, r.r, r.rho_s, r.sigma))
        .unwrap_or_default();
    writeln!(
        out,
        "mean,{},{},{},{},{},{},{},{},{},{},{},{:.6},mean_of_{}",
        n,
        rk,
        rho_s,
        sigma,
        means.rms_x,
        means.rms_y,
        means.rank_hat,
        means.sparsity_hat,
        means.true_rank,
        means.true_sparsity,
        means.outer_iters,
        means.wall_time_s,
        means.count
    )?;
    Ok(())
}

pub fn write_trials_csv_file(
    path: impl AsRef<Path>,
    records: &[TrialRecord],
    means: &TrialMeans,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_trials_csv(&mut out, records, means)?;
    out.flush()?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn generation_edge_cases() {
        let mut c = ExperimentConfig::new(6, 0, 0.0, 0.0, 1, 3);
        let inst = generate_instance(&c, 0);
        assert!(inst.m_r.iter().all(|v| *v == 0.0));
        assert!(inst.m_s.iter().all(|v| *v == 0.0));
        c.r = 2;
        c.sigma = 0.1;
        let a = generate_instance(&c, 4);
        let b = generate_instance(&c, 4);
        assert_eq!(a.m, b.m);
        assert_ne!(generate_instance(&c, 5).m, a.m);
    }

    #[test]
    fn radii_examples() {
        let m_r = array![[2.0, 0.0], [0.0, 0.0]];
        let m_s = array![[0.0, 5.0], [-1.0, 0.0]];
        let r = box_radii(m_r.view(), m_s.view()).unwrap();
        assert!((r.gamma1 - 20.0).abs() < 1e-12 && r.gamma2 == 50.0 && !r.fallback);
        let zero = Array2::<f64>::zeros((2, 2));
        let r = box_radii(zero.view(), m_s.view()).unwrap();
        assert_eq!(r.gamma1, FALLBACK_RADIUS);
        assert!(r.fallback);
    }

    #[test]
    fn rms_examples() {
        let n = 4;
        let m_r = Array2::<f64>::zeros((n, n));
        let ones = Array2::<f64>::ones((n, n));
        let (x, y) = rms_errors(ones.view(), m_r.view(), m_r.view(), m_r.view(), n).unwrap();
        assert!((x - 1.0).abs() < 1e-15);
        assert_eq!(y, 0.0);
        let short = Array2::<f64>::zeros((n, n - 1));
        assert!(rms_errors(short.view(), m_r.view(), m_r.view(), m_r.view(), n).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::new(5, 6, 0.1, 0.1, 1, 0)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(5, 2, 1.1, 0.1, 1, 0)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(5, 2, 0.1, 0.1, 0, 0)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(5, 2, 0.1, 0.1, 1, 0)
            .validate()
            .is_ok());
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"n": 10, "r": 1, "rho_s": 0.1, "sigma": 0.1}"#).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!(c.phi.kind(), crate::phi::PhiKind::Scad);
    }
}
