//! Spatial and temporal graph Laplacians built from the rows and columns of a
//! data matrix, and the trace regularizers they define.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Returned by [`mean_pairwise_distance`] when every point coincides.
pub const KAPPA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub tau_s: f64,
    pub tau_t: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            tau_s: 1.0,
            tau_t: 1.0,
        }
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_s", self.tau_s), ("tau_t", self.tau_t)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LaplacianPair {
    /// `p×p`, from the rows of D.
    pub spatial: Mat,
    /// `q×q`, from the columns of D.
    pub temporal: Mat,
    pub kappa_s: f64,
    pub kappa_t: f64,
}

/// Squared Euclidean distances between the rows of `points`.
fn squared_distances(points: &Mat) -> Mat {
    let n = points.nrows();
    let mut d2 = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = points
                .row(i)
                .iter()
                .zip(points.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2[(i, j)] = s;
            d2[(j, i)] = s;
        }
    }
    d2
}

fn mean_distance_from_squared(d2: &Mat) -> f64 {
    let n = d2.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += d2[(i, j)].sqrt();
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let k = total / pairs;
    if k > KAPPA_FLOOR {
        k
    } else {
        KAPPA_FLOOR
    }
}

/// Mean Euclidean distance over all unordered pairs of rows of `points`.
pub fn mean_pairwise_distance(points: &Mat) -> Result<f64> {
    if points.nrows() < 2 {
        return Err(Error::arg("need at least two vectors"));
    }
    Ok(mean_distance_from_squared(&squared_distances(points)))
}

fn gaussian_kernel(d2: &Mat, tau: f64, kappa: f64) -> Mat {
    let scale = tau * kappa * kappa;
    d2.map(|v| (-v / scale).exp())
}

/// `W(i,j) = exp(−‖xᵢ − xⱼ‖² / (τ κ²))` over the rows of `points`; unit diagonal.
pub fn adjacency(points: &Mat, tau: f64, kappa: f64) -> Result<Mat> {
    if !(tau > 0.0) || !(kappa > 0.0) {
        return Err(Error::arg(format!(
            "adjacency needs tau, kappa > 0 (got {tau}, {kappa})"
        )));
    }
    Ok(gaussian_kernel(&squared_distances(points), tau, kappa))
}

/// `T − W`, with `T` the diagonal of row sums.
pub fn laplacian(w: &Mat) -> Result<Mat> {
    if !w.is_square() {
        return Err(Error::dim(format!("adjacency is {:?}", w.shape())));
    }
    let n = w.nrows();
    let scale = w.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::arg(format!("adjacency not symmetric at ({i},{j})")));
            }
        }
    }
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::arg("adjacency has negative weights"));
    }
    let mut a = -w;
    for i in 0..n {
        // off-diagonal row sum; self-loops cancel in T − W
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        a[(i, i)] = off;
    }
    Ok(a)
}

/// `(Tr(Lᵀ A_s L), Tr(L A_t Lᵀ))`.
pub fn trace_quad(l: &Mat, pair: &LaplacianPair) -> Result<(f64, f64)> {
    if l.nrows() != pair.spatial.nrows() || l.ncols() != pair.temporal.nrows() {
        return Err(Error::dim(format!(
            "L is {:?}, Laplacians are {} and {}",
            l.shape(),
            pair.spatial.nrows(),
            pair.temporal.nrows()
        )));
    }
    let spatial = l.dot(&(&pair.spatial * l));
    let temporal = l.dot(&(l * &pair.temporal));
    Ok((spatial, temporal))
}

fn laplacian_of_points(points: &Mat, tau: f64) -> (Mat, f64) {
    let d2 = squared_distances(points);
    let kappa = mean_distance_from_squared(&d2);
    let w = gaussian_kernel(&d2, tau, kappa);
    let a = laplacian(&w).expect("gaussian kernel is symmetric and non-negative");
    (a, kappa)
}

/// Builds both Laplacians: spatial from the rows of `d`, temporal from its columns.
pub fn build_priors(d: &Mat, cfg: &GraphConfig) -> Result<LaplacianPair> {
    cfg.validate()?;
    if d.nrows() < 2 || d.ncols() < 2 {
        return Err(Error::arg(format!(
            "graph priors need p, q >= 2, got {:?}",
            d.shape()
        )));
    }
    let (spatial, kappa_s) = laplacian_of_points(d, cfg.tau_s);
    let (temporal, kappa_t) = laplacian_of_points(&d.transpose(), cfg.tau_t);
    Ok(LaplacianPair {
        spatial,
        temporal,
        kappa_s,
        kappa_t,
    })
}
