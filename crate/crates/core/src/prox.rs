//! Singular value thresholding and (elementwise reweighted) soft thresholding,
//! with their vector-Jacobian products.

use crate::error::{Error, Result};
use crate::linalg::{ensure_same_shape, svd_thin, Mat, Svd};

/// Denominator guard for `σᵢ² − σⱼ²` in the SVT derivative.
pub const EPS_GAP: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SvtResult {
    pub value: Mat,
    /// SVD of the input; `None` when the threshold was zero and the SVD was skipped.
    pub factors: Option<Svd>,
    pub threshold: f64,
}

impl SvtResult {
    /// Number of singular values strictly above the threshold.
    pub fn active_rank(&self) -> Option<usize> {
        self.factors
            .as_ref()
            .map(|f| f.sigma.iter().filter(|&&s| s > self.threshold).count())
    }
}

/// `U diag(max(σ − α, 0)) Vᵀ`, the prox of `α‖·‖_*`.
pub fn svt(x: &Mat, alpha: f64) -> Result<SvtResult> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!(
            "svt threshold must be >= 0, got {alpha}"
        )));
    }
    if alpha == 0.0 {
        return Ok(SvtResult {
            value: x.clone(),
            factors: None,
            threshold: 0.0,
        });
    }
    let f = svd_thin(x)?;
    let mut us = f.u.clone();
    for (j, s) in f.sigma.iter().enumerate() {
        us.column_mut(j).scale_mut((s - alpha).max(0.0));
    }
    let value = us * f.v.transpose();
    Ok(SvtResult {
        value,
        factors: Some(f),
        threshold: alpha,
    })
}

/// Gradients of `⟨Ψ_α(X), Ḡ⟩` with respect to `X` and `α`.
pub fn svt_vjp(result: &SvtResult, gbar: &Mat) -> Result<(Mat, f64)> {
    ensure_same_shape(&result.value, gbar, "svt_vjp")?;
    let owned;
    let f = match &result.factors {
        Some(f) => f,
        None => {
            owned = svd_thin(&result.value)?;
            &owned
        }
    };
    let alpha = result.threshold;
    if gbar.nrows() >= gbar.ncols() {
        Ok(svt_vjp_tall(&f.u, f.sigma.as_slice(), &f.v, alpha, gbar))
    } else {
        // Ψ(Xᵀ) = Ψ(X)ᵀ
        let (g, ga) = svt_vjp_tall(&f.v, f.sigma.as_slice(), &f.u, alpha, &gbar.transpose());
        Ok((g.transpose(), ga))
    }
}

/// Assumes `v` is square (the input had at least as many rows as columns).
fn svt_vjp_tall(u: &Mat, sigma: &[f64], v: &Mat, alpha: f64, gbar: &Mat) -> (Mat, f64) {
    let r = sigma.len();
    let gv = gbar * v;
    let gt = u.transpose() * &gv;
    let shrunk: Vec<f64> = sigma.iter().map(|s| (s - alpha).max(0.0)).collect();
    let active: Vec<bool> = sigma.iter().map(|&s| s > alpha).collect();

    let mut gamma = Mat::zeros(r, r);
    let mut galpha = 0.0;
    for i in 0..r {
        if active[i] {
            gamma[(i, i)] = gt[(i, i)];
            galpha -= gt[(i, i)];
        }
        for j in 0..r {
            if i == j || (!active[i] && !active[j]) {
                continue;
            }
            let (a, b) = if active[i] && active[j] {
                // closed forms of the quotients below; finite at ties
                let s = sigma[i] + sigma[j];
                if s > 0.0 {
                    (1.0 - alpha / s, alpha / s)
                } else {
                    (0.0, 0.0)
                }
            } else {
                let mut d = sigma[i] * sigma[i] - sigma[j] * sigma[j];
                if d.abs() < EPS_GAP {
                    d = if d < 0.0 { -EPS_GAP } else { EPS_GAP };
                }
                (
                    (shrunk[i] * sigma[i] - shrunk[j] * sigma[j]) / d,
                    (shrunk[i] * sigma[j] - shrunk[j] * sigma[i]) / d,
                )
            };
            gamma[(i, j)] = a * gt[(i, j)] + b * gt[(j, i)];
        }
    }

    // component of Ḡ V outside span(U), rescaled by f(σ)/σ
    let mut comp = gv - u * &gt;
    for j in 0..r {
        let ratio = if sigma[j] > 0.0 {
            shrunk[j] / sigma[j]
        } else {
            0.0
        };
        comp.column_mut(j).scale_mut(ratio);
    }
    let gx = (u * gamma + comp) * v.transpose();
    (gx, galpha)
}

#[inline]
pub fn soft(x: f64, a: f64) -> f64 {
    if x > a {
        x - a
    } else if x < -a {
        x + a
    } else {
        0.0
    }
}

/// Elementwise `sign(x)·max(|x| − a, 0)` with a per-entry threshold.
pub fn soft_threshold(x: &Mat, thresholds: &Mat) -> Result<Mat> {
    ensure_same_shape(x, thresholds, "soft_threshold")?;
    if let Some(bad) = thresholds.iter().find(|&&a| !(a >= 0.0)) {
        return Err(Error::arg(format!("negative soft threshold {bad}")));
    }
    Ok(x.zip_map(thresholds, soft))
}

/// Returns `(∂/∂X, ∂/∂A)` of `⟨Θ_A(X), Ḡ⟩`; the subgradient at `|x| = a` is 0.
pub fn soft_threshold_vjp(x: &Mat, thresholds: &Mat, gbar: &Mat) -> Result<(Mat, Mat)> {
    ensure_same_shape(x, thresholds, "soft_threshold_vjp")?;
    ensure_same_shape(x, gbar, "soft_threshold_vjp")?;
    let mut gx = Mat::zeros(x.nrows(), x.ncols());
    let mut ga = Mat::zeros(x.nrows(), x.ncols());
    for i in 0..x.len() {
        let (xv, av, g) = (x[i], thresholds[i], gbar[i]);
        if xv.abs() > av {
            gx[i] = g;
            ga[i] = -xv.signum() * g;
        }
    }
    Ok((gx, ga))
}
