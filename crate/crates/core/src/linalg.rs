//! Dense matrix primitives: thin SVD, SPD solves, per-frame 5×5 convolution
//! with its adjoint, frame/matrix reshaping and the gained sigmoid.
//!
//! A `p×q` data matrix stores one vectorized frame per column. Pixels of a
//! frame are vectorized in row-major order, so with nalgebra's column-major
//! storage the matrix buffer and the frame-major video buffer coincide.

use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

/// Frame size of the video behind a data matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameDims {
    pub m: usize,
    pub n: usize,
}

impl FrameDims {
    pub fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }

    pub fn pixels(&self) -> usize {
        self.m * self.n
    }
}

pub fn all_finite(x: &Mat) -> bool {
    x.iter().all(|v| v.is_finite())
}

pub fn ensure_same_shape(a: &Mat, b: &Mat, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `q` frames of `m×n` pixels, frame-major with row-major pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoSequence {
    dims: FrameDims,
    frames: usize,
    data: Vec<f64>,
}

impl VideoSequence {
    pub fn new(m: usize, n: usize, frames: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 || n == 0 || frames.is_empty() {
            return Err(Error::arg("video needs m, n, q >= 1"));
        }
        let mut data = Vec::with_capacity(m * n * frames.len());
        for (i, f) in frames.iter().enumerate() {
            if f.len() != m * n {
                return Err(Error::dim(format!(
                    "frame {i} has {} pixels, expected {}",
                    f.len(),
                    m * n
                )));
            }
            data.extend_from_slice(f);
        }
        Ok(Self {
            dims: FrameDims::new(m, n),
            frames: frames.len(),
            data,
        })
    }

    pub fn zeros(m: usize, n: usize, q: usize) -> Self {
        Self {
            dims: FrameDims::new(m, n),
            frames: q,
            data: vec![0.0; m * n * q],
        }
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        let p = self.dims.pixels();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn pixel(&self, frame: usize, r: usize, c: usize) -> f64 {
        self.frame(frame)[r * self.dims.n + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn dot(&self, other: &VideoSequence) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

/// Column `i` of the result is frame `i` vectorized row by row.
pub fn reshape_matrix(video: &VideoSequence) -> Mat {
    Mat::from_column_slice(video.dims.pixels(), video.frames, &video.data)
}

pub fn reshape_video(d: &Mat, m: usize, n: usize) -> Result<VideoSequence> {
    if m * n != d.nrows() || m == 0 || n == 0 {
        return Err(Error::dim(format!(
            "{m}x{n} frames do not tile {} rows",
            d.nrows()
        )));
    }
    Ok(VideoSequence {
        dims: FrameDims::new(m, n),
        frames: d.ncols(),
        data: d.as_slice().to_vec(),
    })
}

pub const KERNEL_SIZE: usize = 5;
const HALF: isize = (KERNEL_SIZE / 2) as isize;

/// A 5×5 kernel, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvKernel(pub [f64; KERNEL_SIZE * KERNEL_SIZE]);

impl ConvKernel {
    pub fn zeros() -> Self {
        Self([0.0; KERNEL_SIZE * KERNEL_SIZE])
    }

    /// Centered unit impulse; convolving with it is the identity.
    pub fn delta() -> Self {
        let mut k = Self::zeros();
        k.0[KERNEL_SIZE * KERNEL_SIZE / 2] = 1.0;
        k
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut k = *self;
        k.0.iter_mut().for_each(|w| *w *= s);
        k
    }

    pub fn flipped(&self) -> Self {
        let mut k = Self::zeros();
        let n = KERNEL_SIZE * KERNEL_SIZE;
        for i in 0..n {
            k.0[i] = self.0[n - 1 - i];
        }
        k
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.0[a * KERNEL_SIZE + b]
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0.0)
    }
}

/// Accumulates `dst += k ⋆ src` for one frame (cross-correlation, zero padding).
fn correlate_frame_acc(k: &ConvKernel, src: &[f64], dst: &mut [f64], dims: FrameDims) {
    let (m, n) = (dims.m as isize, dims.n as isize);
    for a in 0..KERNEL_SIZE {
        let dr = a as isize - HALF;
        let r0 = (-dr).max(0);
        let r1 = (m - dr).min(m);
        for b in 0..KERNEL_SIZE {
            let w = k.at(a, b);
            if w == 0.0 {
                continue;
            }
            let dc = b as isize - HALF;
            let c0 = (-dc).max(0);
            let c1 = (n - dc).min(n);
            if c0 >= c1 {
                continue;
            }
            for r in r0..r1 {
                let out = &mut dst[(r * n + c0) as usize..(r * n + c1) as usize];
                let sr = r + dr;
                let inp = &src[(sr * n + c0 + dc) as usize..(sr * n + c1 + dc) as usize];
                for (o, i) in out.iter_mut().zip(inp) {
                    *o += w * i;
                }
            }
        }
    }
}

fn check_tiles(x: &Mat, dims: FrameDims) -> Result<()> {
    if x.nrows() != dims.pixels() {
        return Err(Error::dim(format!(
            "{}x{} frames do not tile {} rows",
            dims.m,
            dims.n,
            x.nrows()
        )));
    }
    Ok(())
}

/// Per-frame same-size convolution of a data matrix (frames are columns).
pub fn conv_mat(k: &ConvKernel, x: &Mat, dims: FrameDims) -> Result<Mat> {
    check_tiles(x, dims)?;
    let mut out = Mat::zeros(x.nrows(), x.ncols());
    conv_mat_acc(k, x, dims, &mut out);
    Ok(out)
}

/// `out += k * x` without allocation; shapes must already agree.
pub(crate) fn conv_mat_acc(k: &ConvKernel, x: &Mat, dims: FrameDims, out: &mut Mat) {
    if k.is_zero() {
        return;
    }
    let p = dims.pixels();
    let src = x.as_slice();
    let dst = out.as_mut_slice();
    for j in 0..x.ncols() {
        correlate_frame_acc(
            k,
            &src[j * p..(j + 1) * p],
            &mut dst[j * p..(j + 1) * p],
            dims,
        );
    }
}

/// Adjoint of [`conv_mat`]: correlation with the flipped kernel.
pub fn conv_adjoint_mat(k: &ConvKernel, y: &Mat, dims: FrameDims) -> Result<Mat> {
    conv_mat(&k.flipped(), y, dims)
}

pub(crate) fn conv_adjoint_mat_acc(k: &ConvKernel, y: &Mat, dims: FrameDims, out: &mut Mat) {
    conv_mat_acc(&k.flipped(), y, dims, out)
}

/// Gradient of `⟨k * x, y⟩` with respect to the kernel weights.
pub fn conv_kernel_grad(x: &Mat, y: &Mat, dims: FrameDims) -> ConvKernel {
    let mut g = ConvKernel::zeros();
    conv_kernel_grad_acc(x, y, dims, &mut g);
    g
}

pub(crate) fn conv_kernel_grad_acc(x: &Mat, y: &Mat, dims: FrameDims, g: &mut ConvKernel) {
    let (m, n) = (dims.m as isize, dims.n as isize);
    let p = dims.pixels();
    let xs = x.as_slice();
    let ys = y.as_slice();
    for j in 0..x.ncols() {
        let xf = &xs[j * p..(j + 1) * p];
        let yf = &ys[j * p..(j + 1) * p];
        for a in 0..KERNEL_SIZE {
            let dr = a as isize - HALF;
            let r0 = (-dr).max(0);
            let r1 = (m - dr).min(m);
            for b in 0..KERNEL_SIZE {
                let dc = b as isize - HALF;
                let c0 = (-dc).max(0);
                let c1 = (n - dc).min(n);
                if c0 >= c1 {
                    continue;
                }
                let mut acc = 0.0;
                for r in r0..r1 {
                    let yr = &yf[(r * n + c0) as usize..(r * n + c1) as usize];
                    let sr = r + dr;
                    let xr = &xf[(sr * n + c0 + dc) as usize..(sr * n + c1 + dc) as usize];
                    acc += yr.iter().zip(xr).map(|(u, v)| u * v).sum::<f64>();
                }
                g.0[a * KERNEL_SIZE + b] += acc;
            }
        }
    }
}

/// Same-size convolution applied to each frame independently.
pub fn conv_same(k: &ConvKernel, x: &VideoSequence) -> VideoSequence {
    let mut out = VideoSequence::zeros(x.dims.m, x.dims.n, x.frames);
    let p = x.dims.pixels();
    for j in 0..x.frames {
        correlate_frame_acc(
            k,
            &x.data[j * p..(j + 1) * p],
            &mut out.data[j * p..(j + 1) * p],
            x.dims,
        );
    }
    out
}

pub fn conv_adjoint(k: &ConvKernel, y: &VideoSequence) -> VideoSequence {
    conv_same(&k.flipped(), y)
}

const SIGMOID_CLAMP: f64 = 40.0;

/// `1 / (1 + exp(-rho * w))` with the exponent clamped to ±40.
pub fn sigmoid_gain(rho: f64, w: f64) -> f64 {
    let t = (-rho * w).clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + t.exp())
}

pub fn sigmoid_gain_mat(rho: f64, w: &Mat) -> Mat {
    w.map(|v| sigmoid_gain(rho, v))
}

/// Thin SVD `X = U diag(sigma) Vᵀ` with `r₀ = min(p, q)` components.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub sigma: DVector<f64>,
    pub v: Mat,
}

impl Svd {
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

fn to_faer(x: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

/// Thin SVD with singular values sorted descending. Each left singular
/// vector is signed so that its largest-magnitude entry is positive.
pub fn svd_thin(x: &Mat) -> Result<Svd> {
    if !all_finite(x) {
        return Err(Error::Numerical("svd input is not finite".into()));
    }
    let (p, q) = x.shape();
    let r0 = p.min(q);
    let svd = to_faer(x)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let mut u = Mat::from_fn(p, r0, |i, j| svd.U()[(i, j)]);
    let mut v = Mat::from_fn(q, r0, |i, j| svd.V()[(i, j)]);
    let sigma = DVector::from_fn(r0, |j, _| svd.S()[j]);
    for j in 0..r0 {
        let col = u.column(j);
        let imax = col.iamax();
        if col[imax] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
    Ok(Svd { u, sigma, v })
}

/// Largest singular value.
pub fn spectral_norm(x: &Mat) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let sv = to_faer(x)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    Ok(sv.into_iter().fold(0.0, f64::max))
}

pub fn nuclear_norm(x: &Mat) -> Result<f64> {
    Ok(svd_thin(x)?.sigma.sum())
}

/// Cholesky factor of a symmetric positive definite matrix, reusable across solves.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    chol: Cholesky<f64, nalgebra::Dyn>,
}

impl SpdFactor {
    pub fn new(a: &Mat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim(format!("spd matrix is {:?}", a.shape())));
        }
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let n = a.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::arg(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        let chol = Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &Mat) -> Result<Mat> {
        if b.nrows() != self.dim() {
            return Err(Error::dim(format!(
                "rhs has {} rows, matrix is {}",
                b.nrows(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(b))
    }

    /// Solves `X A = B` (A symmetric, so this is `(A Bᵀ)ᵀ`-style on the transposed system).
    pub fn solve_right(&self, b: &Mat) -> Result<Mat> {
        if b.ncols() != self.dim() {
            return Err(Error::dim(format!(
                "rhs has {} cols, matrix is {}",
                b.ncols(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(&b.transpose()).transpose())
    }
}

pub fn solve_spd(a: &Mat, b: &Mat) -> Result<Mat> {
    SpdFactor::new(a)?.solve(b)
}
