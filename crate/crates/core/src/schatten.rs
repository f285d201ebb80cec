//! Schatten norms, operator kernels and the mixed cross norm.
//!
//! A [`WeightedKernel`] `k(ξ, γ)` on quadrature grids `(ξ_i, w_i)` and
//! `(γ_j, v_j)` stands for the integral operator
//! `(T f)(ξ) = Σ_j v_j k(ξ, γ_j) f(γ_j)` from `L²(γ-grid)` to `L²(ξ-grid)`.
//! Its singular values are those of the matrix `√w_i · k(ξ_i, γ_j) · √v_j`,
//! see [`WeightedKernel::operator_matrix`].

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, HywError, Result};
use crate::grid::Grid1D;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Exponent `p ∈ [1, ∞]` of a Schatten class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenExponent(f64);

impl SchattenExponent {
    pub const INFINITY: SchattenExponent = SchattenExponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return input_err(format!("Schatten exponent must lie in [1, inf], got {p}"));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Conjugate exponent `p / (p − 1)`, with `1 ↔ ∞`.
    pub fn conjugate(self) -> SchattenExponent {
        if self.0 == 1.0 {
            Self::INFINITY
        } else if self.0.is_infinite() {
            Self(1.0)
        } else {
            Self(self.0 / (self.0 - 1.0))
        }
    }
}

/// Conjugate exponent of a finite `p > 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        input_err("matrix contains non-finite entries")
    }
}

/// Singular values of `a`, in no particular order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (m, n) = a.shape();
    let max_iter = 200 * m.max(n);
    match SVD::try_new(a.clone(), false, false, f64::EPSILON, max_iter) {
        Some(svd) => Ok(svd.singular_values.iter().copied().collect()),
        None => Err(HywError::Numerical(format!(
            "SVD of a {m}x{n} matrix did not converge within {max_iter} iterations \
             (Frobenius norm {:.6e})",
            a.norm()
        ))),
    }
}

/// `ℓ^p` norm of a nonnegative sequence, scaled against overflow.
pub fn lp_of_nonneg(values: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(*v));
    if max == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// `(Σ s_i^p)^{1/p}` over the singular values of `a`; the largest one for `p = ∞`.
pub fn schatten_norm(a: &ComplexMatrix, p: SchattenExponent) -> Result<f64> {
    let s = singular_values(a)?;
    Ok(lp_of_nonneg(&s, p.value()))
}

/// Entrywise Frobenius norm.
pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scalar-valued operator kernel sampled on a pair of quadrature grids.
///
/// Rows are indexed by the output variable `ξ`, columns by the input
/// variable `γ`. Operator-valued entries (block kernels) are not supported.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKernel {
    xi: Grid1D,
    gamma: Grid1D,
    values: ComplexMatrix,
}

impl WeightedKernel {
    pub fn new(xi: Grid1D, gamma: Grid1D, values: ComplexMatrix) -> Result<Self> {
        if values.shape() != (xi.len(), gamma.len()) {
            return input_err(format!(
                "kernel values have shape {:?}, grids need ({}, {})",
                values.shape(),
                xi.len(),
                gamma.len()
            ));
        }
        ensure_finite(&values)?;
        Ok(Self { xi, gamma, values })
    }

    pub fn xi_grid(&self) -> &Grid1D {
        &self.xi
    }

    pub fn gamma_grid(&self) -> &Grid1D {
        &self.gamma
    }

    pub fn values(&self) -> &ComplexMatrix {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.values
    }

    pub fn into_values(self) -> ComplexMatrix {
        self.values
    }

    /// `M[i, j] = √w_i · k(ξ_i, γ_j) · √v_j`.
    pub fn operator_matrix(&self) -> ComplexMatrix {
        let rw: Vec<f64> = self.xi.weights().iter().map(|w| w.sqrt()).collect();
        let cw: Vec<f64> = self.gamma.weights().iter().map(|w| w.sqrt()).collect();
        ComplexMatrix::from_fn(self.values.nrows(), self.values.ncols(), |i, j| {
            self.values[(i, j)] * (rw[i] * cw[j])
        })
    }

    /// Applies the integral operator: `(Tf)(ξ_i) = Σ_j v_j k(ξ_i, γ_j) f(γ_j)`.
    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != self.gamma.len() {
            return input_err("vector length does not match the kernel's input grid");
        }
        let v = self.gamma.weights();
        Ok((0..self.values.nrows())
            .map(|i| {
                (0..self.values.ncols())
                    .map(|j| self.values[(i, j)] * f[j] * v[j])
                    .sum()
            })
            .collect())
    }
}

/// `k*(ξ, γ) = conj(k(γ, ξ))`, with the two grids exchanged.
pub fn adjoint_kernel(k: &WeightedKernel) -> WeightedKernel {
    WeightedKernel {
        xi: k.gamma.clone(),
        gamma: k.xi.clone(),
        values: k.values.adjoint(),
    }
}

fn check_conjugate(q: f64, p: f64) -> Result<()> {
    if !(p > 1.0 && p <= 2.0) {
        return input_err(format!("cross norm needs 1 < p <= 2, got p = {p}"));
    }
    if (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
        return input_err(format!("p = {p} and q = {q} are not conjugate exponents"));
    }
    Ok(())
}

/// Mixed norm `( Σ_j v_j [ Σ_i w_i |F(i, j)|^inner ]^{outer/inner} )^{1/outer}`,
/// inner sum over rows, outer sum over columns.
pub fn mixed_norm(
    magnitudes: &DMatrix<f64>,
    row_weights: &[f64],
    col_weights: &[f64],
    inner: f64,
    outer: f64,
) -> f64 {
    let col_norms: Vec<f64> = (0..magnitudes.ncols())
        .map(|j| {
            let col = magnitudes.column(j);
            let max = col.iter().fold(0.0f64, |m, v| m.max(*v));
            if max == 0.0 {
                return 0.0;
            }
            let s: f64 = col
                .iter()
                .zip(row_weights)
                .map(|(v, w)| w * (v / max).powf(inner))
                .sum();
            max * s.powf(1.0 / inner)
        })
        .collect();
    let max = col_norms.iter().fold(0.0f64, |m, v| m.max(*v));
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = col_norms
        .iter()
        .zip(col_weights)
        .map(|(c, v)| v * (c / max).powf(outer))
        .sum();
    max * s.powf(1.0 / outer)
}

/// Cross norm `‖k‖_{q,p,q} = ( Σ_γ v_γ [ Σ_ξ w_ξ |k(ξ,γ)|^p ]^{q/p} )^{1/q}`.
pub fn cross_norm_qpq(k: &WeightedKernel, q: f64, p: f64) -> Result<f64> {
    check_conjugate(q, p)?;
    let mags = k.values.map(|z| z.norm());
    Ok(mixed_norm(&mags, k.xi.weights(), k.gamma.weights(), p, q))
}

/// Both sides of the cross-norm bound for the operator of `k`:
/// `lhs = ‖T‖_{B_q}`, `rhs = ‖k‖_{q,p,q}^{1/2} · ‖k*‖_{q,p,q}^{1/2}`.
pub fn russo_gap(k: &WeightedKernel, q: f64, p: f64) -> Result<(f64, f64)> {
    check_conjugate(q, p)?;
    let lhs = schatten_norm(&k.operator_matrix(), SchattenExponent::new(q)?)?;
    let rhs = (cross_norm_qpq(k, q, p)? * cross_norm_qpq(&adjoint_kernel(k), q, p)?).sqrt();
    Ok((lhs, rhs))
}
