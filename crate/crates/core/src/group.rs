//! Group zero-norm surrogates.
//!
//! For a partition `J₁,…,J_m` of the coordinates and a group norm `‖·‖_p`,
//! the group zero-norm counts the groups with `‖x_{J_i}‖_p ≠ 0`. Its exact
//! penalty surrogate replaces each count by `ϱ‖x_{J_i}‖_p − ψ*(ϱ‖x_{J_i}‖_p)`,
//! a number in `[0, 1]` that saturates at one once `ϱ‖x_{J_i}‖_p > φ′₋(1)`.

use serde::{Deserialize, Serialize};

use crate::error::{dims, domain, Error, Result};
use crate::phi::PhiSpec;

/// Exponent of the per-group norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupNorm {
    L1,
    L2,
    Inf,
}

impl GroupNorm {
    pub fn norm(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            GroupNorm::L1 => values.map(f64::abs).sum(),
            GroupNorm::L2 => values.map(|v| v * v).sum::<f64>().sqrt(),
            GroupNorm::Inf => values.map(f64::abs).fold(0.0, f64::max),
        }
    }

    /// Exponent `(p − 2)/(2p)` used in the `β` factor of the regularized threshold.
    fn beta_exponent(self) -> f64 {
        match self {
            GroupNorm::L1 => -0.5,
            GroupNorm::L2 => 0.0,
            GroupNorm::Inf => 0.5,
        }
    }
}

impl Serialize for GroupNorm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupNorm::L1 => serializer.serialize_u8(1),
            GroupNorm::L2 => serializer.serialize_u8(2),
            GroupNorm::Inf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for GroupNorm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(1) => Ok(GroupNorm::L1),
            Raw::Int(2) => Ok(GroupNorm::L2),
            Raw::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(GroupNorm::Inf),
            Raw::Int(v) => Err(serde::de::Error::custom(format!(
                "unsupported group norm {v}"
            ))),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "unsupported group norm {s}"
            ))),
        }
    }
}

/// A partition of `{0, …, n−1}` into nonempty disjoint groups.
///
/// Serialized as `{"n": 3, "groups": [[0, 1], [2]], "p": 2}` with zero-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct GroupPartition {
    n: usize,
    groups: Vec<Vec<usize>>,
    p: GroupNorm,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawPartition {
    n: usize,
    groups: Vec<Vec<usize>>,
    p: GroupNorm,
}

impl TryFrom<RawPartition> for GroupPartition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        GroupPartition::new(raw.n, raw.groups, raw.p)
    }
}

impl From<GroupPartition> for RawPartition {
    fn from(p: GroupPartition) -> Self {
        RawPartition {
            n: p.n,
            groups: p.groups,
            p: p.p,
        }
    }
}

impl GroupPartition {
    pub fn new(n: usize, groups: Vec<Vec<usize>>, p: GroupNorm) -> Result<Self> {
        let mut seen = vec![false; n];
        for group in &groups {
            if group.is_empty() {
                return Err(Error::Parse("empty group in partition".into()));
            }
            for &j in group {
                if j >= n {
                    return Err(Error::Parse(format!("index {j} out of range for n = {n}")));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::Parse(format!("index {j} appears in two groups")));
                }
            }
        }
        if let Some(j) = seen.iter().position(|covered| !covered) {
            return Err(Error::Parse(format!(
                "index {j} is not covered by any group"
            )));
        }
        Ok(Self { n, groups, p })
    }

    /// `J_i = {i}`: the group zero-norm becomes the ordinary zero-norm.
    pub fn singletons(n: usize, p: GroupNorm) -> Self {
        Self {
            n,
            groups: (0..n).map(|i| vec![i]).collect(),
            p,
        }
    }

    /// Consecutive blocks of the given sizes.
    pub fn contiguous(sizes: &[usize], p: GroupNorm) -> Result<Self> {
        let mut start = 0;
        let groups = sizes
            .iter()
            .map(|&len| {
                let group = (start..start + len).collect();
                start += len;
                group
            })
            .collect();
        Self::new(start, groups, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of groups `m`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn p(&self) -> GroupNorm {
        self.p
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.n {
            Ok(())
        } else {
            Err(dims(self.n, x.len()))
        }
    }
}

/// Parameters of the regularized surrogate `νf(x) + Σ[ϱ‖x_{J_i}‖_p − ψ*(ϱ‖x_{J_i}‖_p)]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSurrogateParams {
    pub phi: PhiSpec,
    pub rho: f64,
    pub nu: f64,
}

impl GroupSurrogateParams {
    pub fn new(phi: PhiSpec, rho: f64, nu: f64) -> Result<Self> {
        positive("rho", rho)?;
        positive("nu", nu)?;
        Ok(Self { phi, rho, nu })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    }
}

/// `G(x) = (‖x_{J_1}‖_p, …, ‖x_{J_m}‖_p)`.
pub fn group_norms(x: &[f64], partition: &GroupPartition) -> Result<Vec<f64>> {
    partition.check(x)?;
    Ok(partition
        .groups
        .iter()
        .map(|group| partition.p.norm(group.iter().map(|&j| x[j])))
        .collect())
}

/// Number of groups whose norm exceeds `tol`.
pub fn group_zero_norm(x: &[f64], partition: &GroupPartition, tol: f64) -> Result<usize> {
    Ok(group_norms(x, partition)?
        .into_iter()
        .filter(|&g| g > tol)
        .count())
}

/// `Σ_i [ϱ‖x_{J_i}‖_p − ψ*(ϱ‖x_{J_i}‖_p)]`, a value in `[0, m]`.
pub fn surrogate_penalty_term(
    x: &[f64],
    partition: &GroupPartition,
    phi: &PhiSpec,
    rho: f64,
) -> Result<f64> {
    positive("rho", rho)?;
    Ok(group_norms(x, partition)?
        .into_iter()
        .map(|g| phi.penalty(rho * g))
        .sum())
}

/// Zeroes every group with `ϱ‖x_{J_i}‖_p ≤ φ′₋(1)` and copies the rest.
pub fn truncate_vector(
    x: &[f64],
    partition: &GroupPartition,
    phi: &PhiSpec,
    rho: f64,
) -> Result<Vec<f64>> {
    positive("rho", rho)?;
    let norms = group_norms(x, partition)?;
    let mut out = x.to_vec();
    for (group, g) in partition.groups.iter().zip(norms) {
        if rho * g <= phi.d_minus_1() {
            for &j in group {
                out[j] = 0.0;
            }
        }
    }
    Ok(out)
}

/// Exact-penalty threshold `φ′₋(1)/α` for the constrained problem, where `α`
/// bounds the smallest active group norm over the feasible set from below.
pub fn threshold_min_variant(phi: &PhiSpec, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(phi.d_minus_1() / alpha)
}

/// `β = max(1, max_i |J_i|^{(p−2)/(2p)})`.
pub fn beta_factor(partition: &GroupPartition) -> f64 {
    let exponent = partition.p.beta_exponent();
    partition
        .groups
        .iter()
        .map(|g| (g.len() as f64).powf(exponent))
        .fold(1.0, f64::max)
}

/// Exact-penalty threshold `φ′₋(1)(1−t*)βνL_f/(1−t₀)` for the regularized problem.
///
/// `l_f` is the Lipschitz constant of the loss on the feasible set (Euclidean norm).
pub fn threshold_regularized_variant(
    phi: &PhiSpec,
    nu: f64,
    l_f: f64,
    partition: &GroupPartition,
) -> Result<f64> {
    if !(nu > 0.0) || !(l_f > 0.0) {
        return Err(domain(format!(
            "nu and L_f must be positive, got {nu} and {l_f}"
        )));
    }
    Ok(
        phi.d_minus_1() * (1.0 - phi.t_star()) * beta_factor(partition) * nu * l_f
            / (1.0 - phi.t_zero()),
    )
}

/// `ν·f(x) + Σ_i [ϱ‖x_{J_i}‖_p − ψ*(ϱ‖x_{J_i}‖_p)]` given the caller's loss value.
pub fn regularized_surrogate_objective(
    x: &[f64],
    f_value: f64,
    params: &GroupSurrogateParams,
    partition: &GroupPartition,
) -> Result<f64> {
    let penalty = surrogate_penalty_term(x, partition, &params.phi, params.rho)?;
    Ok(params.nu * f_value + penalty)
}
