//! Subgradient selections for the spectral and entrywise conjugate sums.
//!
//! Each selection is the smallest maximizer of `st − φ(t)` on `[0, 1]`, so the
//! selected `W` (or `S`) attains `min Σφ(·) − ϱ⟨X, ·⟩ = −Σψ*(ϱ·)`.

use ndarray::{Array2, ArrayView2, Zip};

use super::{same_shape, singular_values, svd, SvdTriple};
use crate::error::Result;
use crate::group::positive;
use crate::phi::PhiSpec;

/// `W = U diag(w) Vᵀ` with `wᵢ ∈ ∂ψ*(ϱσᵢ(X))`.
pub fn subgrad_spectral(x: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> Result<Array2<f64>> {
    positive("rho", rho)?;
    Ok(subgrad_spectral_from_svd(&svd(x)?, phi, rho))
}

pub fn subgrad_spectral_from_svd(t: &SvdTriple, phi: &PhiSpec, rho: f64) -> Array2<f64> {
    let w: Vec<f64> = t
        .sigma
        .iter()
        .map(|&s| phi.psi_star_subgrad(rho * s))
        .collect();
    t.compose(&w)
}

/// `Sᵢⱼ ∈ ∂ψ*(ϱ|Yᵢⱼ|)`, entries in `[0, 1]`.
pub fn subgrad_entrywise(y: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> Result<Array2<f64>> {
    positive("rho", rho)?;
    Ok(y.mapv(|v| phi.psi_star_subgrad(rho * v.abs())))
}

fn phi_clamped(phi: &PhiSpec, t: f64) -> f64 {
    phi.generator().value(t.clamp(0.0, 1.0))
}

/// `Σφ(σᵢ(W)) − ϱ⟨X, W⟩ + Θ_ϱ(X)`; zero when `W` attains the spectral minimum.
pub fn spectral_attainment_gap(
    x: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    phi: &PhiSpec,
    rho: f64,
) -> Result<f64> {
    same_shape(x, w)?;
    let phi_sum: f64 = singular_values(w)?
        .into_iter()
        .map(|s| phi_clamped(phi, s))
        .sum();
    let inner: f64 = Zip::from(&x).and(&w).fold(0.0, |acc, a, b| acc + a * b);
    let theta: f64 = singular_values(x)?
        .into_iter()
        .map(|s| phi.psi_star(rho * s))
        .sum();
    Ok(phi_sum - rho * inner + theta)
}

/// `Σφ(|Sᵢⱼ|) − ϱ⟨|Y|, S⟩ + Σψ*(ϱ|Yᵢⱼ|)`; zero when `S` attains the entrywise minimum.
pub fn entrywise_attainment_gap(
    y: ArrayView2<'_, f64>,
    s: ArrayView2<'_, f64>,
    phi: &PhiSpec,
    rho: f64,
) -> Result<f64> {
    same_shape(y, s)?;
    Ok(Zip::from(&y).and(&s).fold(0.0, |acc, &yv, &sv| {
        acc + phi_clamped(phi, sv.abs()) - rho * yv.abs() * sv + phi.psi_star(rho * yv.abs())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PhiKind;
    use ndarray::array;

    #[test]
    fn spectral_examples() {
        let linear = PhiSpec::new(PhiKind::Linear, &[]).unwrap();
        let zero = Array2::<f64>::zeros((2, 3));
        assert_eq!(subgrad_spectral(zero.view(), &linear, 1.0).unwrap(), zero);

        let x = array![[2.0, 0.0], [0.0, 0.0]];
        let w = subgrad_spectral(x.view(), &linear, 1.0).unwrap();
        assert!((w[[0, 0]] - 1.0).abs() < 1e-12 && w[[1, 1]].abs() < 1e-12);

        let scad = PhiSpec::default_scad();
        let x = array![[0.25, 0.0], [0.0, 0.0]];
        let w = subgrad_spectral(x.view(), &scad, 4.0).unwrap();
        assert!((w[[0, 0]] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn entrywise_examples() {
        let scad = PhiSpec::default_scad();
        let y = array![[0.0, 0.5, -100.0]];
        let s = subgrad_entrywise(y.view(), &scad, 2.0).unwrap();
        assert_eq!(s[[0, 0]], 0.0);
        assert!((s[[0, 1]] - 0.5).abs() < 1e-12);
        assert_eq!(s[[0, 2]], 1.0);
        assert!(
            entrywise_attainment_gap(y.view(), s.view(), &scad, 2.0)
                .unwrap()
                .abs()
                < 1e-12
        );
    }
}
