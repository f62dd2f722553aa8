//! Brute-force reference computations.
//!
//! Everything here is exhaustive search or plain linear algebra and shares no
//! code path with the closed forms it checks: conjugates are found by ternary
//! search on `st − φ(t)`, scalar minima and proximal points on grids, and
//! zero-norm minimizers by enumerating supports.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{dims, domain, Error, Result};
use crate::group::GroupPartition;
use crate::phi::PhiSpec;

/// Largest number of groups [`brute_force_support_min`] will enumerate.
pub const MAX_ENUMERATED_GROUPS: usize = 12;
/// Largest dimension [`brute_force_surrogate_min`] will grid.
pub const MAX_GRID_DIM: usize = 3;

const RIDGE: f64 = 1e-12;
const FEASIBILITY_SLACK: f64 = 1e-10;

/// Uniform grid of `points` nodes on `[lo, hi]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo < hi) || points < 2 {
            return Err(domain(format!(
                "grid needs lo < hi and at least two points, got [{lo}, {hi}] with {points}"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn unit(points: usize) -> Result<Self> {
        Self::new(0.0, 1.0, points)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    /// `i`-th node. A symmetric grid with an odd count hits zero exactly.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * (i as f64 / (self.points - 1) as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }
}

/// `sup_{t∈[0,1]} st − φ(t)` by ternary search; the objective is concave in `t`.
pub fn conjugate_by_search(phi: &PhiSpec, s: f64, tol: f64) -> f64 {
    let g = phi.generator();
    let objective = |t: f64| s * t - g.value(t);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let tol = tol.max(f64::EPSILON);
    while hi - lo > tol {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    [objective(0.0), objective(1.0), objective(0.5 * (lo + hi))]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Grid minimum of `φ(t) + s(1 − t)` over `t ∈ grid`.
pub fn scalar_min_by_grid(phi: &PhiSpec, rho_omega: f64, grid: &GridSpec) -> f64 {
    let g = phi.generator();
    grid.nodes()
        .map(|t| g.value(t) + rho_omega * (1.0 - t))
        .fold(f64::INFINITY, f64::min)
}

/// Grid argmin over `x ∈ [−box, box]` of `½(x − y)² + weight·|x|`.
pub fn prox_by_grid(weight: f64, y: f64, bound: f64, grid: &GridSpec) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for x in grid.nodes().filter(|x| x.abs() <= bound) {
        let value = 0.5 * (x - y).powi(2) + weight * x.abs();
        if value < best.0 {
            best = (value, x);
        }
    }
    best.1
}

/// Loss used by the support enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeastSquaresLoss {
    /// `½‖Ax − b‖²`
    HalfSquared,
    /// `‖Ax − b‖₂`
    Norm,
}

impl LeastSquaresLoss {
    pub fn eval(self, residual: ArrayView1<'_, f64>) -> f64 {
        let sq = residual.dot(&residual);
        match self {
            LeastSquaresLoss::HalfSquared => 0.5 * sq,
            LeastSquaresLoss::Norm => sq.sqrt(),
        }
    }
}

/// Witness returned by the support enumerations.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportMinimum {
    /// Number of active groups.
    pub count: usize,
    /// Active group indices, ascending.
    pub groups: Vec<usize>,
    /// Least-squares point supported on the active groups.
    pub x: Array1<f64>,
    /// Loss at `x`.
    pub loss: f64,
}

/// Smallest number of active groups for which `f(x) ≤ δ` is attainable.
///
/// Supports are visited in order of size; each is scored by the least-squares
/// point on its columns (normal equations with a `1e-12` ridge).
pub fn brute_force_support_min(
    a: ArrayView2<'_, f64>,
    b: ArrayView1<'_, f64>,
    delta: f64,
    partition: &GroupPartition,
    loss: LeastSquaresLoss,
) -> Result<SupportMinimum> {
    check_system(a, b, partition)?;
    let mut masks: Vec<u32> = (0..1u32 << partition.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let candidate = solve_on_support(a, b, partition, mask, loss)?;
        if candidate.loss <= delta + FEASIBILITY_SLACK {
            return Ok(candidate);
        }
    }
    Err(Error::Infeasible)
}

/// Global minimizer of `ν·f(x) + ‖G(x)‖₀` over supports (no side constraint).
pub fn brute_force_regularized_min(
    a: ArrayView2<'_, f64>,
    b: ArrayView1<'_, f64>,
    nu: f64,
    partition: &GroupPartition,
    loss: LeastSquaresLoss,
) -> Result<(SupportMinimum, f64)> {
    check_system(a, b, partition)?;
    let mut best: Option<(SupportMinimum, f64)> = None;
    for mask in 0..1u32 << partition.len() {
        let candidate = solve_on_support(a, b, partition, mask, loss)?;
        let value = nu * candidate.loss + candidate.count as f64;
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((candidate, value));
        }
    }
    Ok(best.expect("at least the empty support is scored"))
}

fn check_system(
    a: ArrayView2<'_, f64>,
    b: ArrayView1<'_, f64>,
    partition: &GroupPartition,
) -> Result<()> {
    if partition.len() > MAX_ENUMERATED_GROUPS {
        return Err(domain(format!(
            "support enumeration is capped at {MAX_ENUMERATED_GROUPS} groups, got {}",
            partition.len()
        )));
    }
    if a.ncols() != partition.n() {
        return Err(dims(format!("{} columns", partition.n()), a.ncols()));
    }
    if a.nrows() != b.len() {
        return Err(dims(format!("{} rows", a.nrows()), b.len()));
    }
    Ok(())
}

fn solve_on_support(
    a: ArrayView2<'_, f64>,
    b: ArrayView1<'_, f64>,
    partition: &GroupPartition,
    mask: u32,
    loss: LeastSquaresLoss,
) -> Result<SupportMinimum> {
    let groups: Vec<usize> = (0..partition.len())
        .filter(|i| mask >> i & 1 == 1)
        .collect();
    let mut cols: Vec<usize> = groups
        .iter()
        .flat_map(|&i| partition.groups()[i].iter().copied())
        .collect();
    cols.sort_unstable();

    let mut x = Array1::zeros(partition.n());
    if !cols.is_empty() {
        let sub = a.select(ndarray::Axis(1), &cols);
        let mut gram = sub.t().dot(&sub);
        for i in 0..cols.len() {
            gram[[i, i]] += RIDGE;
        }
        let rhs = sub.t().dot(&b);
        let coef = gaussian_solve(gram, rhs)?;
        for (k, &j) in cols.iter().enumerate() {
            x[j] = coef[k];
        }
    }
    let residual = a.dot(&x) - b;
    Ok(SupportMinimum {
        count: groups.len(),
        groups,
        loss: loss.eval(residual.view()),
        x,
    })
}

/// Dense solve with partial pivoting.
fn gaussian_solve(mut m: Array2<f64>, mut rhs: Array1<f64>) -> Result<Array1<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .expect("nonempty range");
        if m[[pivot, col]] == 0.0 {
            return Err(domain("singular normal equations"));
        }
        if pivot != col {
            for k in 0..n {
                m.swap([pivot, k], [col, k]);
            }
            rhs.swap(pivot, col);
        }
        for row in col + 1..n {
            let factor = m[[row, col]] / m[[col, col]];
            for k in col..n {
                m[[row, k]] -= factor * m[[col, k]];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[[row, k]] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[[row, row]];
    }
    Ok(x)
}

/// Exhaustive grid minimum of `objective` over the product of `grids`
/// (at most three coordinates). Ties keep the first node in lexicographic order.
pub fn brute_force_surrogate_min<F>(objective: F, grids: &[GridSpec]) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if grids.is_empty() || grids.len() > MAX_GRID_DIM {
        return Err(domain(format!(
            "grid search supports 1..={MAX_GRID_DIM} coordinates, got {}",
            grids.len()
        )));
    }
    let nodes: Vec<Vec<f64>> = grids.iter().map(|g| g.nodes().collect()).collect();
    let mut index = vec![0usize; grids.len()];
    let mut point: Vec<f64> = nodes.iter().map(|n| n[0]).collect();
    let mut best = (point.clone(), f64::INFINITY);
    'outer: loop {
        let value = objective(&point);
        if value < best.1 {
            best = (point.clone(), value);
        }
        // odometer increment, last coordinate fastest
        for d in (0..grids.len()).rev() {
            index[d] += 1;
            if index[d] < nodes[d].len() {
                point[d] = nodes[d][index[d]];
                continue 'outer;
            }
            index[d] = 0;
            point[d] = nodes[d][0];
        }
        break;
    }
    Ok(best)
}
