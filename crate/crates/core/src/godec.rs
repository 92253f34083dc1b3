//! GoDec: alternating rank-constrained / cardinality-constrained approximation
//! using bilateral random projections. Only used to derive the foreground mask
//! that reweights the sparse thresholds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigmoid_gain_mat, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoDecConfig {
    pub rank: usize,
    /// Entries kept in the sparse part; `None` means 10% of the matrix.
    pub card: Option<usize>,
    pub power_iters: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for GoDecConfig {
    fn default() -> Self {
        Self {
            rank: 5,
            card: None,
            power_iters: 2,
            max_iter: 20,
            tol: 1e-7,
            seed: 0,
        }
    }
}

impl GoDecConfig {
    pub fn card_for(&self, p: usize, q: usize) -> usize {
        self.card.unwrap_or((p * q) / 10)
    }

    fn validate(&self, p: usize, q: usize) -> Result<()> {
        if self.rank == 0 || self.rank >= p.min(q) {
            return Err(Error::arg(format!(
                "godec rank {} must be in 1..{}",
                self.rank,
                p.min(q)
            )));
        }
        if self.card_for(p, q) > p * q {
            return Err(Error::arg("godec cardinality exceeds matrix size"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::arg("godec tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GoDecOutput {
    pub low_rank: Mat,
    pub sparse: Mat,
    /// `‖D − L − S‖²_F / ‖D‖²_F` after each iteration.
    pub residual_trace: Vec<f64>,
}

/// Rank-`rank` approximation `Q Qᵀ X` with `Q` spanning `(XXᵀ)^k X R`.
/// `R` is Gaussian on the first call and `Xᵀ Q_prev` afterwards, which
/// continues the subspace iteration across alternations.
fn bilateral_projection(
    x: &Mat,
    rank: usize,
    power_iters: usize,
    warm: Option<&Mat>,
    rng: &mut ChaCha8Rng,
) -> (Mat, Mat) {
    let r = match warm {
        Some(q) => x.tr_mul(q),
        None => Mat::from_fn(x.ncols(), rank, |_, _| StandardNormal.sample(rng)),
    };
    let mut y = x * r;
    for _ in 0..power_iters {
        // re-orthonormalize between refinements to keep the basis well conditioned
        let q = y.qr().q();
        y = x * x.tr_mul(&q);
    }
    let q = y.qr().q();
    let l = &q * q.tr_mul(x);
    (l, q)
}

/// Keeps the `card` largest-magnitude entries of `t`.
fn hard_threshold(t: &Mat, card: usize) -> Mat {
    let mut s = Mat::zeros(t.nrows(), t.ncols());
    if card == 0 {
        return s;
    }
    if card >= t.len() {
        return t.clone();
    }
    let mut mags: Vec<f64> = t.iter().map(|v| v.abs()).collect();
    let (_, &mut kth, _) = mags.select_nth_unstable_by(card - 1, |a, b| b.total_cmp(a));
    // ties at the cut go to the lowest indices
    let mut ties = card - t.iter().filter(|v| v.abs() > kth).count();
    for (i, &v) in t.iter().enumerate() {
        let a = v.abs();
        if a > kth || (a == kth && ties > 0) {
            if a == kth {
                ties -= 1;
            }
            s[i] = v;
        }
    }
    s
}

pub fn godec(d: &Mat, cfg: &GoDecConfig) -> Result<GoDecOutput> {
    let (p, q) = d.shape();
    cfg.validate(p, q)?;
    let card = cfg.card_for(p, q);
    let norm2 = d.norm_squared();
    if norm2 == 0.0 {
        return Ok(GoDecOutput {
            low_rank: Mat::zeros(p, q),
            sparse: Mat::zeros(p, q),
            residual_trace: vec![0.0],
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut l = Mat::zeros(p, q);
    let mut s = Mat::zeros(p, q);
    let mut basis: Option<Mat> = None;
    let mut trace: Vec<f64> = Vec::new();
    for _ in 0..cfg.max_iter {
        let target = d - &s;
        let (cand, qb) =
            bilateral_projection(&target, cfg.rank, cfg.power_iters, basis.as_ref(), &mut rng);
        // a randomized step may land farther than the previous iterate; keep the better one
        let accepted =
            trace.is_empty() || (&target - &cand).norm_squared() <= (&target - &l).norm_squared();
        if accepted {
            l = cand;
            basis = Some(qb);
        } else {
            basis = None;
        }
        s = hard_threshold(&(d - &l), card);
        let res = (d - &l - &s).norm_squared() / norm2;
        let done = res == 0.0
            || (accepted
                && trace
                    .last()
                    .is_some_and(|prev| (prev - res).abs() < cfg.tol));
        trace.push(res);
        if done {
            break;
        }
    }
    Ok(GoDecOutput {
        low_rank: l,
        sparse: s,
        residual_trace: trace,
    })
}

#[derive(Clone, Debug)]
pub struct MaskPrior {
    pub fg_mask: Mat,
    /// Background mask, `1 − fg_mask`.
    pub w_hat: Mat,
    pub eps_mask: f64,
}

pub fn foreground_mask(sparse: &Mat, eps_mask: f64) -> Result<MaskPrior> {
    if !(eps_mask >= 0.0) {
        return Err(Error::arg(format!("eps_mask must be >= 0, got {eps_mask}")));
    }
    let fg_mask = sparse.map(|v| if v.abs() > eps_mask { 1.0 } else { 0.0 });
    let w_hat = fg_mask.map(|v| 1.0 - v);
    Ok(MaskPrior {
        fg_mask,
        w_hat,
        eps_mask,
    })
}

/// `Φ(ρ, Ŵ)` elementwise.
pub fn prior_weights(prior: &MaskPrior, rho: f64) -> Mat {
    sigmoid_gain_mat(rho, &prior.w_hat)
}

/// GoDec followed by the support mask (`eps_mask = 0`).
pub fn mask_prior(d: &Mat, cfg: &GoDecConfig) -> Result<MaskPrior> {
    let out = godec(d, cfg)?;
    foreground_mask(&out.sparse, 0.0)
}
