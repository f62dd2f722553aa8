use ndarray::{Array2, ArrayView2, Zip};

use super::{same_shape, svd, SvdTriple};
use crate::error::{domain, Result};

/// `argmin_z ½(z − y)² + w|z|` over `|z| ≤ bound`.
pub fn soft_clip(y: f64, weight: f64, bound: f64) -> f64 {
    let shrunk = y.signum() * (y.abs() - weight).max(0.0);
    shrunk.clamp(-bound, bound)
}

/// Proximal point of `τ‖·‖_*` restricted to the spectral ball `‖Z‖ ≤ γ₁`.
///
/// Each singular value goes through `σ ↦ min(max(σ − τ, 0), γ₁)`. The result
/// comes with its own thin SVD, singular values nonincreasing.
pub fn nuclear_spectral_box_factored(
    x: ArrayView2<'_, f64>,
    tau: f64,
    gamma1: f64,
) -> Result<(Array2<f64>, SvdTriple)> {
    if !(tau >= 0.0) || !(gamma1 > 0.0) {
        return Err(domain(format!(
            "need tau >= 0 and gamma1 > 0, got {tau} and {gamma1}"
        )));
    }
    let mut t = svd(x)?;
    t.sigma.mapv_inplace(|s| (s - tau).max(0.0).min(gamma1));
    Ok((t.reconstruct(), t))
}

pub fn nuclear_spectral_box(x: ArrayView2<'_, f64>, tau: f64, gamma1: f64) -> Result<Array2<f64>> {
    Ok(nuclear_spectral_box_factored(x, tau, gamma1)?.0)
}

/// Entrywise `clip(soft(yᵢⱼ, wᵢⱼ), ±γ₂)`: the proximal point of `Σ wᵢⱼ|zᵢⱼ|` on the box `‖Z‖_∞ ≤ γ₂`.
pub fn weighted_l1_box(
    y: ArrayView2<'_, f64>,
    weights: ArrayView2<'_, f64>,
    gamma2: f64,
) -> Result<Array2<f64>> {
    same_shape(y, weights)?;
    if !(gamma2 > 0.0) {
        return Err(domain(format!("gamma2 must be positive, got {gamma2}")));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(domain(format!("weights must be nonnegative, found {w}")));
    }
    Ok(Zip::from(&y)
        .and(&weights)
        .map_collect(|&v, &w| soft_clip(v, w, gamma2)))
}
