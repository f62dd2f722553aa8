use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{singular_values, svd};
use crate::error::{domain, Result};
use crate::group::positive;
use crate::phi::PhiSpec;

/// `Θ_ϱ(X) = Σᵢ ψ*(ϱσᵢ(X))`, convex in `X`.
pub fn theta_rho(x: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> Result<f64> {
    positive("rho", rho)?;
    Ok(singular_values(x)?
        .into_iter()
        .map(|s| phi.psi_star(rho * s))
        .sum())
}

/// `ϱ‖X‖_* − Θ_ϱ(X)`, a value in `[0, min(n₁, n₂)]`.
pub fn rank_surrogate(x: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> Result<f64> {
    positive("rho", rho)?;
    Ok(singular_values(x)?
        .into_iter()
        .map(|s| phi.penalty(rho * s))
        .sum())
}

/// Drops the singular values with `ϱσᵢ ≤ φ′₋(1)`.
pub fn truncate_matrix(x: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> Result<Array2<f64>> {
    positive("rho", rho)?;
    let t = svd(x)?;
    let kept: Vec<f64> = t
        .sigma
        .iter()
        .map(|&s| if rho * s > phi.d_minus_1() { s } else { 0.0 })
        .collect();
    Ok(t.compose(&kept))
}

/// Entrywise truncation that stores magnitudes: `|Yᵢⱼ|` where `ϱ|Yᵢⱼ| > φ′₋(1)`, else 0.
pub fn truncate_entries(y: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> Result<Array2<f64>> {
    Ok(truncate_entries_signed(y, phi, rho)?.mapv(f64::abs))
}

/// Same support as [`truncate_entries`] but keeps the sign of each surviving entry.
pub fn truncate_entries_signed(
    y: ArrayView2<'_, f64>,
    phi: &PhiSpec,
    rho: f64,
) -> Result<Array2<f64>> {
    positive("rho", rho)?;
    let d = phi.d_minus_1();
    Ok(y.mapv(|v| if rho * v.abs() > d { v } else { 0.0 }))
}

fn checked_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, value) in pairs {
        if !(value > 0.0) {
            return Err(domain(format!("{name} must be positive, got {value}")));
        }
    }
    Ok(())
}

/// `φ′₋(1)/α` for the rank-constrained problem, `α` a lower bound on `σ_{r*}` over the feasible set.
pub fn threshold_rank_min(phi: &PhiSpec, alpha: f64) -> Result<f64> {
    checked_positive(&[("alpha", alpha)])?;
    Ok(phi.d_minus_1() / alpha)
}

/// `φ′₋(1)(1−t*)νL_f/(1−t₀)` for the rank-regularized problem.
pub fn threshold_rank_regularized(phi: &PhiSpec, nu: f64, l_f: f64) -> Result<f64> {
    checked_positive(&[("nu", nu), ("L_f", l_f)])?;
    Ok(phi.d_minus_1() * (1.0 - phi.t_star()) * nu * l_f / (1.0 - phi.t_zero()))
}

/// The rank-regularized threshold divided by `min(1, λ)`, for rank plus `λ`-weighted zero-norm.
pub fn threshold_joint_regularized(phi: &PhiSpec, nu: f64, l_f: f64, lambda: f64) -> Result<f64> {
    checked_positive(&[("lambda", lambda)])?;
    Ok(threshold_rank_regularized(phi, nu, l_f)? / lambda.min(1.0))
}

fn entrywise_penalty(y: ArrayView2<'_, f64>, phi: &PhiSpec, rho: f64) -> f64 {
    y.iter().map(|v| phi.penalty(rho * v.abs())).sum()
}

/// `ϱ‖X‖_* − Θ_ϱ(X) + λ[ϱ‖Y‖₁ − Σψ*(ϱ|Yᵢⱼ|)]`.
pub fn joint_surrogate(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    phi: &PhiSpec,
    rho: f64,
    lambda: f64,
) -> Result<f64> {
    positive("lambda", lambda)?;
    Ok(rank_surrogate(x, phi, rho)? + lambda * entrywise_penalty(y, phi, rho))
}

/// Which weighting of the entrywise block [`simultaneous_surrogate`] uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimultaneousForm {
    /// `ϱ‖X‖₁ − λΣψ*(ϱ|Xᵢⱼ|)`: `λ` on the conjugate sum only.
    #[default]
    AsPrinted,
    /// `λ[ϱ‖X‖₁ − Σψ*(ϱ|Xᵢⱼ|)]`, matching the penalty of the MPEC it came from.
    LambdaSymmetric,
}

/// Rank surrogate of `X` plus an entrywise zero-norm surrogate of the same `X`.
///
/// The two forms agree when `λ = 1`.
pub fn simultaneous_surrogate(
    x: ArrayView2<'_, f64>,
    phi: &PhiSpec,
    rho: f64,
    lambda: f64,
    form: SimultaneousForm,
) -> Result<f64> {
    positive("lambda", lambda)?;
    let rank_part = rank_surrogate(x, phi, rho)?;
    let entry_part = match form {
        SimultaneousForm::AsPrinted => x
            .iter()
            .map(|v| rho * v.abs() - lambda * phi.psi_star(rho * v.abs()))
            .sum::<f64>(),
        SimultaneousForm::LambdaSymmetric => lambda * entrywise_penalty(x, phi, rho),
    };
    Ok(rank_part + entry_part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PhiKind;
    use ndarray::array;

    fn linear() -> PhiSpec {
        PhiSpec::new(PhiKind::Linear, &[]).unwrap()
    }

    #[test]
    fn theta_and_rank_examples() {
        let x = array![[2.0, 0.0], [0.0, 0.0]];
        assert!((theta_rho(x.view(), &linear(), 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((rank_surrogate(x.view(), &linear(), 1.0).unwrap() - 1.0).abs() < 1e-12);
        let z = Array2::<f64>::zeros((2, 3));
        assert_eq!(theta_rho(z.view(), &linear(), 1.0).unwrap(), 0.0);
        assert_eq!(rank_surrogate(z.view(), &linear(), 1.0).unwrap(), 0.0);
        let half = array![[0.5, 0.0], [0.0, 0.0]];
        assert!((rank_surrogate(half.view(), &linear(), 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(theta_rho(x.view(), &linear(), 0.0).is_err());
    }

    #[test]
    fn truncation_examples() {
        let x = array![[2.0, 0.0], [0.0, 0.5]];
        let t = truncate_matrix(x.view(), &linear(), 1.0).unwrap();
        let expected = array![[2.0, 0.0], [0.0, 0.0]];
        assert!((&t - &expected).iter().all(|v| v.abs() < 1e-12));
        let all = truncate_matrix(x.view(), &linear(), 1e9).unwrap();
        assert!((&all - &x).iter().all(|v| v.abs() < 1e-12));

        let y = array![[2.0, -0.5]];
        assert_eq!(
            truncate_entries(y.view(), &linear(), 1.0).unwrap(),
            array![[2.0, 0.0]]
        );
        let y = array![[-2.0, 0.5]];
        assert_eq!(
            truncate_entries(y.view(), &linear(), 1e9).unwrap(),
            array![[2.0, 0.5]]
        );
        assert_eq!(
            truncate_entries_signed(y.view(), &linear(), 1e9).unwrap(),
            array![[-2.0, 0.5]]
        );
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(
            threshold_rank_regularized(&linear(), 1.0, 1.0).unwrap(),
            1.0
        );
        let scad = PhiSpec::default_scad();
        let base = threshold_rank_regularized(&scad, 1.0, 1.0).unwrap();
        assert!((base - 2.0 * 2.0 * 3.7 / 4.7).abs() < 1e-12);
        assert_eq!(
            threshold_rank_regularized(&scad, 2.0, 1.0).unwrap(),
            2.0 * base
        );
        assert_eq!(
            threshold_joint_regularized(&scad, 1.0, 1.0, 1.0).unwrap(),
            base
        );
        assert_eq!(
            threshold_joint_regularized(&scad, 1.0, 1.0, 0.5).unwrap(),
            2.0 * base
        );
        assert_eq!(
            threshold_joint_regularized(&scad, 1.0, 1.0, 10.0).unwrap(),
            base
        );
        assert!(threshold_rank_regularized(&scad, 0.0, 1.0).is_err());
        assert!(threshold_joint_regularized(&scad, 1.0, 1.0, -1.0).is_err());
        assert_eq!(threshold_rank_min(&linear(), 0.5).unwrap(), 2.0);
    }

    #[test]
    fn joint_and_simultaneous_examples() {
        let phi = linear();
        let x = array![[2.0, 0.0], [0.0, 0.0]];
        let zero = Array2::<f64>::zeros((2, 2));
        let y = array![[0.0, 2.0], [0.0, 0.0]];
        assert!(
            (joint_surrogate(x.view(), zero.view(), &phi, 1.0, 3.0).unwrap() - 1.0).abs() < 1e-12
        );
        assert!(
            (joint_surrogate(zero.view(), y.view(), &phi, 1.0, 3.0).unwrap() - 3.0).abs() < 1e-12
        );
        assert_eq!(
            joint_surrogate(zero.view(), zero.view(), &phi, 1.0, 3.0).unwrap(),
            0.0
        );

        for form in [
            SimultaneousForm::AsPrinted,
            SimultaneousForm::LambdaSymmetric,
        ] {
            assert_eq!(
                simultaneous_surrogate(zero.view(), &phi, 1.0, 1.0, form).unwrap(),
                0.0
            );
            let v = simultaneous_surrogate(x.view(), &phi, 1.0, 1.0, form).unwrap();
            assert!((v - 2.0).abs() < 1e-12);
        }
        // λ = 3: printed form gives (2−1) + (2 − 3·1), symmetric gives (2−1) + 3·1
        let printed =
            simultaneous_surrogate(x.view(), &phi, 1.0, 3.0, SimultaneousForm::AsPrinted).unwrap();
        let symmetric =
            simultaneous_surrogate(x.view(), &phi, 1.0, 3.0, SimultaneousForm::LambdaSymmetric)
                .unwrap();
        assert!((printed - 0.0).abs() < 1e-12);
        assert!((symmetric - 4.0).abs() < 1e-12);
    }

    #[test]
    fn simultaneous_is_not_orthogonally_invariant() {
        let phi = linear();
        let x = array![[2.0, 0.0], [0.0, 0.0]];
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let q = array![[c, -c], [c, c]];
        let rotated = q.dot(&x);
        let a =
            simultaneous_surrogate(x.view(), &phi, 1.0, 1.0, SimultaneousForm::AsPrinted).unwrap();
        let b = simultaneous_surrogate(rotated.view(), &phi, 1.0, 1.0, SimultaneousForm::AsPrinted)
            .unwrap();
        assert!((a - b).abs() > 1e-3);
        let ta = theta_rho(x.view(), &phi, 1.0).unwrap();
        let tb = theta_rho(rotated.view(), &phi, 1.0).unwrap();
        assert!((ta - tb).abs() < 1e-12);
    }
}
