//! Rank-side surrogates, truncations, subgradients and proximal kernels.
//!
//! Functions take `ArrayView2<f64>` of any orientation and work with the thin
//! SVD of `min(n₁, n₂)` singular triples. [`MatrixVar`] is the ingest type that
//! normalizes to `n₁ ≤ n₂` for the solver.

pub mod io;
pub mod prox;
pub mod subgrad;
pub mod surrogates;

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use prox::{nuclear_spectral_box, weighted_l1_box};
pub use subgrad::{subgrad_entrywise, subgrad_spectral};
pub use surrogates::{
    joint_surrogate, rank_surrogate, simultaneous_surrogate, theta_rho,
    threshold_joint_regularized, threshold_rank_min, threshold_rank_regularized, truncate_entries,
    truncate_entries_signed, truncate_matrix, SimultaneousForm,
};

/// A finite dense matrix stored with `rows ≤ cols`.
///
/// Taller inputs are transposed on ingest; [`MatrixVar::to_original`] undoes it.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixVar {
    data: Array2<f64>,
    transposed: bool,
}

impl MatrixVar {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::DomainError(format!(
                "matrix entry {bad} is not finite"
            )));
        }
        let (rows, cols) = data.dim();
        if rows > cols {
            Ok(Self {
                data: data.reversed_axes().as_standard_layout().into_owned(),
                transposed: true,
            })
        } else {
            Ok(Self {
                data,
                transposed: false,
            })
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(Array2::zeros((rows, cols))).expect("zeros are finite")
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    /// `(n₁, n₂)` after normalization.
    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn transposed(&self) -> bool {
        self.transposed
    }

    /// Re-wraps a matrix of the normalized shape, keeping this matrix's orientation flag.
    pub fn like(&self, data: Array2<f64>) -> Result<Self> {
        if data.dim() != self.data.dim() {
            return Err(crate::error::dims(
                format!("{:?}", self.data.dim()),
                format!("{:?}", data.dim()),
            ));
        }
        Ok(Self {
            data,
            transposed: self.transposed,
        })
    }

    /// The matrix in the caller's original orientation.
    pub fn to_original(&self) -> Array2<f64> {
        if self.transposed {
            self.data.t().as_standard_layout().into_owned()
        } else {
            self.data.clone()
        }
    }
}

/// Thin SVD `X = U diag(σ) Vᵀ` with `k = min(n₁, n₂)` triples and `σ` nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub u: Array2<f64>,
    pub sigma: Array1<f64>,
    pub v: Array2<f64>,
}

impl SvdTriple {
    /// `U diag(values) Vᵀ`.
    pub fn compose(&self, values: &[f64]) -> Array2<f64> {
        debug_assert_eq!(values.len(), self.sigma.len());
        let mut scaled = self.u.clone();
        for (mut col, &s) in scaled.axis_iter_mut(Axis(1)).zip(values) {
            col *= s;
        }
        scaled.dot(&self.v.t())
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.compose(self.sigma.as_slice().expect("contiguous"))
    }
}

fn to_faer(x: ArrayView2<'_, f64>) -> Result<Mat<f64>> {
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::SvdFailure(format!("non-finite entry {bad}")));
    }
    Ok(Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]]))
}

pub fn svd(x: ArrayView2<'_, f64>) -> Result<SvdTriple> {
    let (m, n) = x.dim();
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdTriple {
            u: Array2::zeros((m, 0)),
            sigma: Array1::zeros(0),
            v: Array2::zeros((n, 0)),
        });
    }
    let decomposition = to_faer(x)?
        .thin_svd()
        .map_err(|e| Error::SvdFailure(format!("{e:?}")))?;
    let (u, s, v) = (
        decomposition.U(),
        decomposition.S().column_vector(),
        decomposition.V(),
    );
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    Ok(SvdTriple {
        u: Array2::from_shape_fn((m, k), |(i, j)| u[(i, order[j])]),
        sigma: order.iter().map(|&j| s[j].max(0.0)).collect(),
        v: Array2::from_shape_fn((n, k), |(i, j)| v[(i, order[j])]),
    })
}

/// Singular values only, nonincreasing and clamped at zero.
pub fn singular_values(x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if x.nrows().min(x.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let mut values = to_faer(x)?
        .singular_values()
        .map_err(|e| Error::SvdFailure(format!("{e:?}")))?;
    for v in &mut values {
        *v = v.max(0.0);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn spectral_norm(x: ArrayView2<'_, f64>) -> Result<f64> {
    Ok(singular_values(x)?.first().copied().unwrap_or(0.0))
}

pub fn nuclear_norm(x: ArrayView2<'_, f64>) -> Result<f64> {
    Ok(singular_values(x)?.iter().sum())
}

pub fn frobenius_norm(x: ArrayView2<'_, f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖X‖_∞ = max |Xᵢⱼ|`.
pub fn max_abs(x: ArrayView2<'_, f64>) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `‖X‖₁ = Σ |Xᵢⱼ|`.
pub fn entrywise_l1(x: ArrayView2<'_, f64>) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Number of entries with `|Xᵢⱼ| > tol`.
pub fn count_nonzero(x: ArrayView2<'_, f64>, tol: f64) -> usize {
    x.iter().filter(|v| v.abs() > tol).count()
}

/// `#{i : σᵢ ≥ rel_tol·σ₁}`, zero for the zero matrix.
pub fn rank_from_sigma(sigma: &[f64], rel_tol: f64) -> usize {
    let top = sigma.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s >= rel_tol * top).count()
}

pub(crate) fn same_shape(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(crate::error::dims(
            format!("{:?}", a.dim()),
            format!("{:?}", b.dim()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_var_normalizes_orientation() {
        let tall = Array2::from_shape_fn((4, 2), |(i, j)| (i * 2 + j) as f64);
        let var = MatrixVar::new(tall.clone()).unwrap();
        assert_eq!(var.dim(), (2, 4));
        assert!(var.transposed());
        assert_eq!(var.to_original(), tall);
        let wide = MatrixVar::new(array![[1.0, 2.0, 3.0]]).unwrap();
        assert!(!wide.transposed());
        assert!(MatrixVar::new(array![[f64::NAN]]).is_err());
    }

    #[test]
    fn svd_invariants() {
        for &(m, n) in &[(3, 5), (6, 4), (1, 1), (7, 7)] {
            let x = Array2::from_shape_fn((m, n), |(i, j)| {
                ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * i as f64
            });
            let t = svd(x.view()).unwrap();
            let k = m.min(n);
            let gram = t.u.t().dot(&t.u);
            let err = (&gram - &Array2::<f64>::eye(k))
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(err <= 1e-8);
            assert!(t.sigma.windows(2).into_iter().all(|w| w[0] >= w[1]));
            let recon = frobenius_norm((&t.reconstruct() - &x).view());
            assert!(recon <= 1e-8 * (1.0 + frobenius_norm(x.view())));
            let sv = singular_values(x.view()).unwrap();
            for (a, b) in sv.iter().zip(t.sigma.iter()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn norms_and_rank() {
        let x = array![[3.0, 0.0], [0.0, -4.0]];
        assert!((spectral_norm(x.view()).unwrap() - 4.0).abs() < 1e-12);
        assert!((nuclear_norm(x.view()).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(max_abs(x.view()), 4.0);
        assert_eq!(entrywise_l1(x.view()), 7.0);
        assert_eq!(count_nonzero(x.view(), 0.0), 2);
        assert_eq!(rank_from_sigma(&[1.0, 1e-7], 1e-6), 1);
        assert_eq!(rank_from_sigma(&[0.0, 0.0], 1e-6), 0);
        assert_eq!(rank_from_sigma(&[1.0; 5], 1e-6), 5);
    }
}
