//! Scalar generators.
//!
//! A generator `φ` is convex on `[0, 1]`, vanishes at its minimizer `t* < 1`
//! and satisfies `φ(1) = 1`. Restricting `φ` to `[0, 1]` gives the closed
//! convex function `ψ`; every surrogate in this crate is assembled from the
//! conjugate `ψ*` and the scalar penalty `s ↦ s − ψ*(s)`, which is the optimal
//! value of `min_{t∈[0,1]} φ(t) + s(1 − t)`.
//!
//! Each family lives behind the [`Generator`] trait and is registered by name
//! in a [`PhiRegistry`]; [`PhiSpec`] wraps a validated generator together with
//! the constants `t*`, `φ′₋(1)` and `t₀` that the thresholds depend on.

mod arctan;
mod linear;
mod log;
mod power_q;
mod registry;
mod scad;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use arctan::Arctan;
pub use linear::Linear;
pub use log::Log;
pub use power_q::PowerQ;
pub use registry::{GeneratorFactory, PhiRegistry};
pub use scad::Scad;

/// Default `ε` for the PowerQ, Log and Arctan families.
pub const DEFAULT_EPSILON: f64 = 0.5;
/// Default exponent `q` for the PowerQ family.
pub const DEFAULT_Q: f64 = 0.5;
/// Default SCAD shape parameter.
pub const DEFAULT_SCAD_A: f64 = 3.7;

const VALUE_TOL: f64 = 1e-12;
const CONVEXITY_TOL: f64 = 1e-10;
const CONVEXITY_SAMPLES: usize = 1000;
const SUBGRADIENT_TOL: f64 = 1e-9;

/// The five built-in generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    Linear,
    PowerQ,
    Log,
    Arctan,
    Scad,
}

impl PhiKind {
    pub const ALL: [PhiKind; 5] = [
        PhiKind::Linear,
        PhiKind::PowerQ,
        PhiKind::Log,
        PhiKind::Arctan,
        PhiKind::Scad,
    ];

    /// Registry name of the family.
    pub fn name(self) -> &'static str {
        match self {
            PhiKind::Linear => "linear",
            PhiKind::PowerQ => "power_q",
            PhiKind::Log => "log",
            PhiKind::Arctan => "arctan",
            PhiKind::Scad => "scad",
        }
    }

    /// Parameter names in positional order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            PhiKind::Linear => &[],
            PhiKind::PowerQ => &["epsilon", "q"],
            PhiKind::Log | PhiKind::Arctan => &["epsilon"],
            PhiKind::Scad => &["a"],
        }
    }
}

impl fmt::Display for PhiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" => Ok(PhiKind::Linear),
            "power_q" | "powerq" => Ok(PhiKind::PowerQ),
            "log" => Ok(PhiKind::Log),
            "arctan" => Ok(PhiKind::Arctan),
            "scad" => Ok(PhiKind::Scad),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

/// A member of the generator family.
///
/// Implementations must be convex on `[0, 1]` with `φ(t*) = 0`, `φ(1) = 1`;
/// [`PhiSpec::from_generator`] checks this numerically. Derivatives are only
/// queried on `[0, 1]`.
pub trait Generator: fmt::Debug + Send + Sync {
    fn kind(&self) -> PhiKind;

    /// Named parameters, used for serialization.
    fn params(&self) -> BTreeMap<String, f64>;

    fn in_domain(&self, t: f64) -> bool;

    /// `φ(t)`; callers guarantee `t` is in the domain.
    fn value(&self, t: f64) -> f64;

    fn derivative_left(&self, t: f64) -> f64;

    fn derivative_right(&self, t: f64) -> f64;

    /// `t* = argmin_{t∈[0,1]} φ(t)`.
    fn minimizer(&self) -> f64;

    /// `ψ*(s) = sup_{t∈[0,1]} { st − φ(t) }`.
    fn conjugate(&self, s: f64) -> f64;

    /// Smallest element of `∂ψ*(s)`, i.e. the smallest maximizer of `st − φ(t)` on `[0, 1]`.
    fn conjugate_subgradient(&self, s: f64) -> f64;

    /// Smallest `t ∈ [0, 1)` with `slope ∈ ∂φ(t)` in closed form, when known.
    fn slope_point(&self, _slope: f64) -> Option<f64> {
        None
    }
}

/// Serialized form of a generator: `{"kind": "scad", "params": {"a": 3.7}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// A validated generator with its cached constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PhiConfig", into = "PhiConfig")]
pub struct PhiSpec {
    generator: Arc<dyn Generator>,
    t_star: f64,
    d_minus_1: f64,
    t_zero: f64,
}

impl PhiSpec {
    /// Builds a generator from positional parameters (see [`PhiKind::param_names`]).
    pub fn new(kind: PhiKind, params: &[f64]) -> Result<Self> {
        let names = kind.param_names();
        if params.len() > names.len() {
            return Err(Error::Parse(format!(
                "{kind} takes at most {} parameters, got {}",
                names.len(),
                params.len()
            )));
        }
        let named = names
            .iter()
            .zip(params)
            .map(|(name, value)| (name.to_string(), *value))
            .collect();
        Self::from_config(&PhiConfig {
            kind: kind.name().to_string(),
            params: named,
        })
    }

    pub fn from_config(config: &PhiConfig) -> Result<Self> {
        let generator = PhiRegistry::builtin().build(&config.kind, &config.params)?;
        Self::from_generator(generator)
    }

    /// SCAD generator with shape parameter `a`.
    pub fn scad(a: f64) -> Result<Self> {
        Self::new(PhiKind::Scad, &[a])
    }

    /// The generator used by the decomposition solver unless configured otherwise.
    pub fn default_scad() -> Self {
        Self::scad(DEFAULT_SCAD_A).expect("default SCAD parameters are valid")
    }

    /// Wraps an arbitrary generator after checking the family invariants.
    pub fn from_generator(generator: Arc<dyn Generator>) -> Result<Self> {
        let t_star = generator.minimizer();
        if !(0.0..1.0).contains(&t_star) {
            return Err(Error::ValidationFailure(format!(
                "t* = {t_star} is not in [0, 1)"
            )));
        }
        let at_min = generator.value(t_star);
        let at_one = generator.value(1.0);
        if at_min.abs() > VALUE_TOL || (at_one - 1.0).abs() > VALUE_TOL {
            return Err(Error::ValidationFailure(format!(
                "expected φ(t*) = 0 and φ(1) = 1, got {at_min} and {at_one}"
            )));
        }
        check_convexity(generator.as_ref())?;

        let slope = 1.0 / (1.0 - t_star);
        let d_minus_1 = generator.derivative_left(1.0);
        if d_minus_1 < slope - VALUE_TOL {
            return Err(Error::ValidationFailure(format!(
                "φ′₋(1) = {d_minus_1} is below 1/(1 − t*) = {slope}"
            )));
        }
        let t_zero = compute_t_zero(generator.as_ref());
        let lo = generator.derivative_left(t_zero);
        let hi = generator.derivative_right(t_zero);
        if !(0.0..1.0).contains(&t_zero)
            || lo > slope + SUBGRADIENT_TOL
            || hi < slope - SUBGRADIENT_TOL
        {
            return Err(Error::ValidationFailure(format!(
                "1/(1 − t*) = {slope} is not a subgradient at t₀ = {t_zero} (one-sided derivatives {lo}, {hi})"
            )));
        }

        Ok(Self {
            generator,
            t_star,
            d_minus_1,
            t_zero,
        })
    }

    pub fn kind(&self) -> PhiKind {
        self.generator.kind()
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        self.generator.params()
    }

    pub fn generator(&self) -> &dyn Generator {
        self.generator.as_ref()
    }

    pub fn config(&self) -> PhiConfig {
        PhiConfig {
            kind: self.kind().name().to_string(),
            params: self.params(),
        }
    }

    /// Minimizer of `φ` on `[0, 1]`.
    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    /// Left derivative `φ′₋(1)`; every truncation and threshold is keyed on it.
    pub fn d_minus_1(&self) -> f64 {
        self.d_minus_1
    }

    /// Smallest `t₀ ∈ [0, 1)` with `1/(1 − t*) ∈ ∂φ(t₀)`.
    pub fn t_zero(&self) -> f64 {
        self.t_zero
    }

    /// `φ(t)`, rejecting points outside the domain.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !self.generator.in_domain(t) {
            return Err(crate::error::domain(format!(
                "t = {t} is outside the domain of the {} generator",
                self.kind()
            )));
        }
        Ok(self.generator.value(t))
    }

    pub fn psi_star(&self, s: f64) -> f64 {
        self.generator.conjugate(s)
    }

    pub fn psi_star_subgrad(&self, s: f64) -> f64 {
        self.generator.conjugate_subgradient(s)
    }

    /// `min_{t∈[0,1]} φ(t) + s(1 − t) = s − ψ*(s)` for `s ≥ 0`.
    pub fn penalty_value(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(crate::error::domain(format!(
                "penalty argument must be nonnegative, got {s}"
            )));
        }
        Ok(self.penalty(s))
    }

    /// Unchecked [`penalty_value`](Self::penalty_value). Beyond `φ′₋(1)` the
    /// minimum sits at `t = 1`, so the value is exactly one.
    pub(crate) fn penalty(&self, s: f64) -> f64 {
        if s > self.d_minus_1 {
            1.0
        } else {
            s - self.generator.conjugate(s)
        }
    }
}

impl TryFrom<PhiConfig> for PhiSpec {
    type Error = Error;

    fn try_from(config: PhiConfig) -> Result<Self> {
        Self::from_config(&config)
    }
}

impl From<PhiSpec> for PhiConfig {
    fn from(spec: PhiSpec) -> Self {
        spec.config()
    }
}

impl Default for PhiSpec {
    fn default() -> Self {
        Self::default_scad()
    }
}

/// `t₀` from the generator's closed form, falling back to bisection.
pub fn compute_t_zero(generator: &dyn Generator) -> f64 {
    let slope = 1.0 / (1.0 - generator.minimizer());
    generator
        .slope_point(slope)
        .unwrap_or_else(|| t_zero_by_bisection(generator))
}

/// Smallest `t ∈ [0, 1]` with `φ′₊(t) ≥ 1/(1 − t*)`, by bisection on the
/// nondecreasing map `t ↦ φ′₊(t)`.
pub fn t_zero_by_bisection(generator: &dyn Generator) -> f64 {
    let slope = 1.0 / (1.0 - generator.minimizer());
    if generator.derivative_right(0.0) >= slope {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if generator.derivative_right(mid) >= slope {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Low-discrepancy points in `[0, 1)`: fractional parts of `k·α` for irrational `α`.
fn weyl(k: usize, alpha: f64) -> f64 {
    (k as f64 * alpha).fract()
}

fn check_convexity(generator: &dyn Generator) -> Result<()> {
    const ALPHAS: [f64; 3] = [
        0.618_033_988_749_894_8,
        0.414_213_562_373_095_1,
        0.732_050_807_568_877_2,
    ];
    for k in 1..=CONVEXITY_SAMPLES {
        let mut t = ALPHAS.map(|alpha| weyl(k, alpha));
        t.sort_by(f64::total_cmp);
        let [t1, t2, t3] = t;
        if t3 - t1 < 1e-9 {
            continue;
        }
        let chord = ((t3 - t2) * generator.value(t1) + (t2 - t1) * generator.value(t3)) / (t3 - t1);
        if generator.value(t2) > chord + CONVEXITY_TOL {
            return Err(Error::ValidationFailure(format!(
                "convexity violated on ({t1}, {t2}, {t3})"
            )));
        }
    }
    Ok(())
}

pub(crate) fn read_param(
    params: &BTreeMap<String, f64>,
    allowed: &[&'static str],
    name: &'static str,
    default: f64,
) -> Result<f64> {
    if let Some(unknown) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!(
            "unknown generator parameter `{unknown}`"
        )));
    }
    Ok(params.get(name).copied().unwrap_or(default))
}

pub(crate) fn require_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in (0, 1)",
        })
    }
}
