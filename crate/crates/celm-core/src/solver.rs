//! Least-squares kernels: batch minimal-norm solve and the RLS recursion.
//!
//! `pinv_solve` computes W = H†Y through an SVD with a relative singular
//! value cutoff, giving the minimal-Frobenius-norm least-squares solution
//! even for rank-deficient H. `rls_init` / `rls_step` carry the sequential
//! update: P starts as (H0ᵀH0 + ridge·I)⁻¹ and each sample refines P first,
//! then W, exactly in that order.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::CodedLabel;

/// Default relative singular-value cutoff for the batch solve.
pub const DEFAULT_SV_TOL: f64 = 1e-10;

/// Default ridge added when (re)initializing the RLS covariance.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Sequential solver state: output weights W and covariance P.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    pub weights: DMatrix<f64>,
    pub p_matrix: DMatrix<f64>,
}

fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} contains non-finite entries")))
    }
}

/// Minimal-norm solution of min ‖HW − Y‖_F via SVD.
///
/// Singular values below `sv_tol` times the largest are treated as zero.
/// The solution is checked against the normal equations; if the library
/// SVD returned an inconsistent factorization (observed on matrices with
/// exactly repeated columns), the solve is redone with one-sided Jacobi
/// rotations.
pub fn pinv_solve(h: &DMatrix<f64>, y: &DMatrix<f64>, sv_tol: f64) -> Result<DMatrix<f64>> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::domain("pinv_solve needs a non-empty H"));
    }
    if y.nrows() != h.nrows() {
        return Err(Error::domain(format!(
            "row mismatch: H has {}, Y has {}",
            h.nrows(),
            y.nrows()
        )));
    }
    if !(sv_tol >= 0.0 && sv_tol.is_finite()) {
        return Err(Error::domain("sv_tol must be finite and non-negative"));
    }
    check_finite("H", h)?;
    check_finite("Y", y)?;

    let svd = h.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = sv_tol * sigma_max;

    // W = V Σ† Uᵀ Y, zeroing reciprocal singular values below the cutoff.
    let mut z = u.tr_mul(y);
    for (i, mut row) in z.row_iter_mut().enumerate() {
        let s = sigma[i];
        if s > cutoff && s > 0.0 {
            row /= s;
        } else {
            row.fill(0.0);
        }
    }
    let w = v_t.tr_mul(&z);

    let residual = h.tr_mul(&(h * &w - y)).norm();
    if residual <= 1e-9 * (1.0 + h.tr_mul(y).norm()) {
        Ok(w)
    } else {
        Ok(jacobi_pinv_solve(h, y, sv_tol))
    }
}

/// Fallback solve: orthogonalizes the columns of a working copy of H with
/// one-sided Jacobi rotations accumulated into V, then reads the
/// minimal-norm solution off H = UΣVᵀ directly. Slower than the library
/// SVD but does not share its failure mode.
fn jacobi_pinv_solve(h: &DMatrix<f64>, y: &DMatrix<f64>, sv_tol: f64) -> DMatrix<f64> {
    let (t, k) = h.shape();
    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    for _ in 0..64 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let tan = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cos = 1.0 / (1.0 + tan * tan).sqrt();
                let sin = cos * tan;
                for i in 0..t {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    a[(i, p)] = cos * ap - sin * aq;
                    a[(i, q)] = sin * ap + cos * aq;
                }
                for i in 0..k {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = cos * vp - sin * vq;
                    v[(i, q)] = sin * vp + cos * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // The columns of A = HV are now pairwise orthogonal, so σ_j = ‖a_j‖
    // and W = Σ_j v_j (a_jᵀY) / σ_j² over the directions above the cutoff.
    let sigmas: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    let sigma_max = sigmas.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = sv_tol * sigma_max;
    let mut w = DMatrix::zeros(k, y.ncols());
    for j in 0..k {
        if sigmas[j] > cutoff && sigmas[j] > 0.0 {
            let coeff = a.column(j).transpose() * y / (sigmas[j] * sigmas[j]);
            w += v.column(j) * coeff;
        }
    }
    w
}

/// Initializes the RLS state over a seed block: P = (H0ᵀH0 + ridge·I)⁻¹,
/// W = P·H0ᵀY0.
pub fn rls_init(h0: &DMatrix<f64>, y0: &DMatrix<f64>, ridge: f64) -> Result<RlsState> {
    if h0.nrows() == 0 || h0.ncols() == 0 {
        return Err(Error::domain("rls_init needs a non-empty H0"));
    }
    if y0.nrows() != h0.nrows() {
        return Err(Error::domain(format!(
            "row mismatch: H0 has {}, Y0 has {}",
            h0.nrows(),
            y0.nrows()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::domain("ridge must be finite and non-negative"));
    }
    check_finite("H0", h0)?;
    check_finite("Y0", y0)?;

    let k = h0.ncols();
    let mut gram = h0.tr_mul(h0);
    for i in 0..k {
        gram[(i, i)] += ridge;
    }
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::Singular(format!(
            "H0'H0 + {ridge}*I is not positive definite; raise the ridge"
        ))
    })?;
    // Rounding can push an exactly semi-definite Gram matrix through the
    // factorization with a near-zero pivot, so check the factor's
    // conditioning explicitly.
    let l = chol.l_dirty();
    let (mut min_d, mut max_d) = (f64::INFINITY, 0.0f64);
    for i in 0..k {
        min_d = min_d.min(l[(i, i)]);
        max_d = max_d.max(l[(i, i)]);
    }
    if !(min_d > (f64::EPSILON * k as f64).sqrt() * max_d) {
        return Err(Error::Singular(format!(
            "H0'H0 + {ridge}*I is numerically singular (pivot ratio {:.2e}); raise the ridge",
            min_d / max_d
        )));
    }
    let p = chol.inverse();
    let weights = &p * h0.tr_mul(y0);
    Ok(RlsState { weights, p_matrix: p })
}

/// One sequential update: P first, then W, per
/// P ← P − Ph(hᵀPh + 1)⁻¹hᵀP and W ← W + Ph(yᵀ − hᵀW).
pub fn rls_step(state: &RlsState, h: &DVector<f64>, y: &CodedLabel) -> Result<RlsState> {
    let k = state.p_matrix.nrows();
    if h.len() != k {
        return Err(Error::domain(format!(
            "hidden row length {} does not match state dimension {k}",
            h.len()
        )));
    }
    if y.n_classes() != state.weights.ncols() {
        return Err(Error::domain("coded label width must match weight columns"));
    }
    let ph = &state.p_matrix * h;
    let denom = 1.0 + h.dot(&ph);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Breakdown(format!(
            "1 + h'Ph = {denom}; covariance must be re-initialized"
        )));
    }
    let mut p_next = &state.p_matrix - (&ph * ph.transpose()) / denom;
    // Guard the symmetry invariant against roundoff drift.
    p_next = (&p_next + p_next.transpose()) * 0.5;
    let innovation = y.values().transpose() - h.transpose() * &state.weights;
    let weights = &state.weights + (&p_next * h) * innovation;
    Ok(RlsState {
        weights,
        p_matrix: p_next,
    })
}
