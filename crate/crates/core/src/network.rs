//! The unfolded network: each layer is one Jacobi sweep of the graph-regularized
//! ADMM iteration with its linear operators replaced by learned 5×5 convolutions.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianPair;
use crate::linalg::{
    all_finite, conv_mat_acc, ensure_same_shape, sigmoid_gain_mat, ConvKernel, FrameDims, Mat,
    SpdFactor,
};
use crate::prox::{soft_threshold, svt, SvtResult};
use crate::solver::{regularized_factor, u1_with, u2_with};

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"DUST1";
pub const KERNELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Dust,
    /// No graph branch (C₄, C₅, Y₂, Y₃ fixed at zero, γ = 0) and unit threshold weights.
    CoronaAblation,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Dust => "dust",
            Variant::CoronaAblation => "corona_ablation",
        }
    }

    fn code(self) -> u64 {
        match self {
            Variant::Dust => 0,
            Variant::CoronaAblation => 1,
        }
    }

    fn from_code(c: u64) -> Option<Self> {
        match c {
            0 => Some(Variant::Dust),
            1 => Some(Variant::CoronaAblation),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub layers: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub variant: Variant,
    pub m: usize,
    pub n: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            layers: 10,
            gamma1: 0.1,
            gamma2: 0.1,
            variant: Variant::Dust,
            m: 16,
            n: 16,
        }
    }
}

impl NetworkConfig {
    pub fn dims(&self) -> FrameDims {
        FrameDims::new(self.m, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::arg("network needs at least one layer"));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::arg("frame dims must be positive"));
        }
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0) {
            return Err(Error::arg("gamma1, gamma2 must be >= 0"));
        }
        Ok(())
    }

    /// Graph weights actually used by the forward pass.
    pub fn effective_gammas(&self) -> (f64, f64) {
        match self.variant {
            Variant::Dust => (self.gamma1, self.gamma2),
            Variant::CoronaAblation => (0.0, 0.0),
        }
    }
}

/// Learnables of one layer. `kernels[i]` is `C_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub kernels: [ConvKernel; KERNELS],
    pub log_mu: f64,
    pub log_lambda: f64,
    pub rho: f64,
    pub y1: Mat,
    pub y2: Mat,
    pub y3: Mat,
}

pub const GROUP_NAMES: [&str; 14] = [
    "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "log_mu", "log_lambda", "rho", "Y1", "Y2",
    "Y3",
];

impl LayerParams {
    pub fn zeros(p: usize, q: usize) -> Self {
        Self {
            kernels: [ConvKernel::zeros(); KERNELS],
            log_mu: 0.0,
            log_lambda: 0.0,
            rho: 0.0,
            y1: Mat::zeros(p, q),
            y2: Mat::zeros(p, q),
            y3: Mat::zeros(p, q),
        }
    }

    pub fn mu(&self) -> f64 {
        self.log_mu.exp()
    }

    pub fn lambda(&self) -> f64 {
        self.log_lambda.exp()
    }

    /// Parameter groups in [`GROUP_NAMES`] order.
    pub fn groups(&self) -> [&[f64]; 14] {
        let k = &self.kernels;
        [
            &k[0].0,
            &k[1].0,
            &k[2].0,
            &k[3].0,
            &k[4].0,
            &k[5].0,
            &k[6].0,
            &k[7].0,
            std::slice::from_ref(&self.log_mu),
            std::slice::from_ref(&self.log_lambda),
            std::slice::from_ref(&self.rho),
            self.y1.as_slice(),
            self.y2.as_slice(),
            self.y3.as_slice(),
        ]
    }

    pub fn groups_mut(&mut self) -> [&mut [f64]; 14] {
        let [k0, k1, k2, k3, k4, k5, k6, k7] = &mut self.kernels;
        [
            &mut k0.0,
            &mut k1.0,
            &mut k2.0,
            &mut k3.0,
            &mut k4.0,
            &mut k5.0,
            &mut k6.0,
            &mut k7.0,
            std::slice::from_mut(&mut self.log_mu),
            std::slice::from_mut(&mut self.log_lambda),
            std::slice::from_mut(&mut self.rho),
            self.y1.as_mut_slice(),
            self.y2.as_mut_slice(),
            self.y3.as_mut_slice(),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.groups().iter().all(|g| g.iter().all(|v| v.is_finite()))
    }
}

/// Groups the ablation holds fixed.
pub fn is_frozen(variant: Variant, group: &str) -> bool {
    variant == Variant::CoronaAblation && matches!(group, "C4" | "C5" | "Y2" | "Y3" | "rho")
}

/// `(L, S, U₁, U₂)` flowing between layers.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerState {
    pub l: Mat,
    pub s: Mat,
    pub u1: Mat,
    pub u2: Mat,
}

impl LayerState {
    pub fn zeros(p: usize, q: usize) -> Self {
        let z = Mat::zeros(p, q);
        Self {
            l: z.clone(),
            s: z.clone(),
            u1: z.clone(),
            u2: z,
        }
    }
}

/// What the backward pass needs from one layer.
#[derive(Clone, Debug)]
pub struct LayerCache {
    pub input: LayerState,
    pub svt: SvtResult,
    pub z_s: Mat,
    pub thresholds: Mat,
    /// `Φ(ρ, Ŵ)`; `None` in the ablation.
    pub phi: Option<Mat>,
    pub f1: Option<SpdFactor>,
    pub f2: Option<SpdFactor>,
    /// Whether U₁, U₂ were produced (skipped after the last layer).
    pub with_u: bool,
}

/// Per-sample inputs of the network.
#[derive(Clone, Copy, Debug)]
pub struct NetworkInput<'a> {
    pub d: &'a Mat,
    pub w_hat: &'a Mat,
    pub pair: Option<&'a LaplacianPair>,
}

fn check_shapes(input: &NetworkInput, params: &LayerParams, cfg: &NetworkConfig) -> Result<()> {
    let d = input.d;
    if d.nrows() != cfg.dims().pixels() {
        return Err(Error::dim(format!(
            "{}x{} frames do not tile {} rows",
            cfg.m,
            cfg.n,
            d.nrows()
        )));
    }
    ensure_same_shape(d, input.w_hat, "W_hat")?;
    ensure_same_shape(d, &params.y1, "Y1")?;
    ensure_same_shape(d, &params.y2, "Y2")?;
    ensure_same_shape(d, &params.y3, "Y3")?;
    let (g1, g2) = cfg.effective_gammas();
    if g1 != 0.0 || g2 != 0.0 {
        let pair = input
            .pair
            .ok_or_else(|| Error::arg("graph weights need a Laplacian pair"))?;
        if pair.spatial.nrows() != d.nrows() || pair.temporal.nrows() != d.ncols() {
            return Err(Error::dim("Laplacian pair does not match D"));
        }
    }
    Ok(())
}

fn layer_step(
    state: &LayerState,
    input: &NetworkInput,
    params: &LayerParams,
    cfg: &NetworkConfig,
    with_u: bool,
) -> Result<(LayerState, LayerCache)> {
    check_shapes(input, params, cfg)?;
    ensure_same_shape(&state.l, input.d, "L")?;
    let dims = cfg.dims();
    let d = input.d;
    let mu = params.mu();
    let lambda = params.lambda();
    let ablated = cfg.variant == Variant::CoronaAblation;
    let (g1, g2) = cfg.effective_gammas();
    let k = &params.kernels;
    let (p, q) = d.shape();

    let (mut u1, mut u2, mut f1, mut f2) = (Mat::zeros(p, q), Mat::zeros(p, q), None, None);
    if with_u && !ablated {
        f1 = match input.pair {
            Some(pair) => regularized_factor(g1, &pair.spatial, mu)?,
            None => None,
        };
        f2 = match input.pair {
            Some(pair) => regularized_factor(g2, &pair.temporal, mu)?,
            None => None,
        };
        u1 = u1_with(f1.as_ref(), &state.l, &params.y2, mu)?;
        u2 = u2_with(f2.as_ref(), &state.l, &params.y3, mu)?;
    }

    let mut z_l = if ablated {
        &params.y1 / mu
    } else {
        (&params.y1 + &params.y2 + &params.y3) / mu
    };
    conv_mat_acc(&k[0], &state.l, dims, &mut z_l);
    conv_mat_acc(&k[1], &state.s, dims, &mut z_l);
    conv_mat_acc(&k[2], d, dims, &mut z_l);
    if !ablated {
        conv_mat_acc(&k[3], &state.u1, dims, &mut z_l);
        conv_mat_acc(&k[4], &state.u2, dims, &mut z_l);
    }
    let svt_out = svt(&z_l, 1.0 / mu)?;

    let mut z_s = &params.y1 / mu;
    conv_mat_acc(&k[5], &state.l, dims, &mut z_s);
    conv_mat_acc(&k[6], &state.s, dims, &mut z_s);
    conv_mat_acc(&k[7], d, dims, &mut z_s);
    let (phi, thresholds) = if ablated {
        (None, Mat::from_element(p, q, lambda / mu))
    } else {
        let phi = sigmoid_gain_mat(params.rho, input.w_hat);
        let t = &phi * (lambda / mu);
        (Some(phi), t)
    };
    let s_next = soft_threshold(&z_s, &thresholds)?;
    let next = LayerState {
        l: svt_out.value.clone(),
        s: s_next,
        u1,
        u2,
    };
    if !all_finite(&next.l) || !all_finite(&next.s) || !all_finite(&next.u1) || !all_finite(&next.u2)
    {
        return Err(Error::Numerical("layer output is not finite".into()));
    }
    let cache = LayerCache {
        input: state.clone(),
        svt: svt_out,
        z_s,
        thresholds,
        phi,
        f1,
        f2,
        with_u,
    };
    Ok((next, cache))
}

/// One layer; every update reads the layer's inputs.
pub fn layer_forward(
    state: &LayerState,
    input: &NetworkInput,
    params: &LayerParams,
    cfg: &NetworkConfig,
) -> Result<LayerState> {
    layer_step(state, input, params, cfg, true).map(|(s, _)| s)
}

/// Runs all layers from a zero state, returning `(L̂, Ŝ)`.
pub fn network_forward(
    input: &NetworkInput,
    params: &[LayerParams],
    cfg: &NetworkConfig,
) -> Result<(Mat, Mat)> {
    let (out, _) = network_forward_cached(input, params, cfg)?;
    Ok((out.l, out.s))
}

/// Like [`network_forward`] but keeps per-layer caches for the backward pass.
pub fn network_forward_cached(
    input: &NetworkInput,
    params: &[LayerParams],
    cfg: &NetworkConfig,
) -> Result<(LayerState, Vec<LayerCache>)> {
    cfg.validate()?;
    if params.len() != cfg.layers {
        return Err(Error::arg(format!(
            "{} layer parameter sets for a {}-layer network",
            params.len(),
            cfg.layers
        )));
    }
    let (p, q) = input.d.shape();
    let mut state = LayerState::zeros(p, q);
    let mut caches = Vec::with_capacity(params.len());
    for (i, lp) in params.iter().enumerate() {
        // U₁, U₂ of the last layer feed nothing
        let (next, cache) = layer_step(&state, input, lp, cfg, i + 1 < params.len())?;
        caches.push(cache);
        state = next;
    }
    Ok((state, caches))
}

/// Kernels that mirror the c = 1 ISTA step, perturbed by `N(0, noise_std²)`.
pub fn init_params_with_noise(
    cfg: &NetworkConfig,
    q: usize,
    seed: u64,
    noise_std: f64,
) -> Result<Vec<LayerParams>> {
    cfg.validate()?;
    let p = cfg.dims().pixels();
    let delta = ConvKernel::delta();
    let base = [
        ConvKernel::zeros(),
        delta.scaled(-1.0),
        delta,
        delta,
        delta,
        delta.scaled(-1.0),
        ConvKernel::zeros(),
        delta,
    ];
    let noise = Normal::new(0.0, noise_std)
        .map_err(|_| Error::arg(format!("bad noise std {noise_std}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(cfg.layers);
    for _ in 0..cfg.layers {
        let mut lp = LayerParams::zeros(p, q);
        lp.kernels = base;
        if noise_std > 0.0 {
            for k in lp.kernels.iter_mut() {
                k.0.iter_mut().for_each(|w| *w += noise.sample(&mut rng));
            }
        }
        lp.log_lambda = 0.1f64.ln();
        lp.rho = 1.0;
        layers.push(lp);
    }
    Ok(apply_variant(layers, cfg))
}

pub fn init_params(cfg: &NetworkConfig, q: usize, seed: u64) -> Result<Vec<LayerParams>> {
    init_params_with_noise(cfg, q, seed, 0.01)
}

/// Zeroes the groups the ablation holds fixed; identity for the full network.
pub fn apply_variant(mut params: Vec<LayerParams>, cfg: &NetworkConfig) -> Vec<LayerParams> {
    if cfg.variant == Variant::CoronaAblation {
        for lp in params.iter_mut() {
            lp.kernels[3] = ConvKernel::zeros();
            lp.kernels[4] = ConvKernel::zeros();
            lp.y2.fill(0.0);
            lp.y3.fill(0.0);
        }
    }
    params
}

/// A trained model: its configuration, frame count and per-layer parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub cfg: NetworkConfig,
    pub q: usize,
    pub params: Vec<LayerParams>,
}

/// Layout: magic, then u64 layer count, m, n, q, variant code; f64 γ₁, γ₂;
/// per layer 8×25 kernel weights, log μ, log λ, ρ, then Y₁, Y₂, Y₃ column-major.
/// All numbers little-endian.
pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    for v in [
        ck.params.len() as u64,
        ck.cfg.m as u64,
        ck.cfg.n as u64,
        ck.q as u64,
        ck.cfg.variant.code(),
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [ck.cfg.gamma1, ck.cfg.gamma2] {
        w.write_all(&v.to_le_bytes())?;
    }
    for lp in &ck.params {
        for g in lp.groups() {
            for v in g {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    parse_checkpoint(&bytes)
}

fn parse_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.get(..5) != Some(CHECKPOINT_MAGIC.as_slice()) {
        return Err(Error::Format {
            offset: 0,
            msg: "not a network checkpoint".into(),
        });
    }
    let mut off = CHECKPOINT_MAGIC.len();
    let mut next_u64 = |what: &str| -> Result<u64> {
        let b = bytes.get(off..off + 8).ok_or_else(|| Error::Format {
            offset: off as u64,
            msg: format!("truncated while reading {what}"),
        })?;
        off += 8;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    };
    let layers = next_u64("layer count")? as usize;
    let m = next_u64("m")? as usize;
    let n = next_u64("n")? as usize;
    let q = next_u64("q")? as usize;
    let variant = Variant::from_code(next_u64("variant")?).ok_or(Error::Format {
        offset: 37,
        msg: "unknown variant code".into(),
    })?;
    let gamma1 = f64::from_bits(next_u64("gamma1")?);
    let gamma2 = f64::from_bits(next_u64("gamma2")?);
    let cfg = NetworkConfig {
        layers,
        gamma1,
        gamma2,
        variant,
        m,
        n,
    };
    cfg.validate().map_err(|e| Error::Format {
        offset: 5,
        msg: e.to_string(),
    })?;
    let p = m * n;
    let mut params = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut lp = LayerParams::zeros(p, q);
        for (name, g) in GROUP_NAMES.iter().zip(lp.groups_mut()) {
            for v in g.iter_mut() {
                *v = f64::from_bits(next_u64(name)?);
            }
        }
        params.push(lp);
    }
    if off != bytes.len() {
        return Err(Error::Format {
            offset: off as u64,
            msg: "trailing bytes".into(),
        });
    }
    Ok(Checkpoint { cfg, q, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_priors, GraphConfig};
    use crate::solver::{update_l_ista, update_s_ista, LStep, SolverConfig, SolverState};
    use rand::{Rng, SeedableRng};

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
        Mat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn cfg(variant: Variant) -> NetworkConfig {
        NetworkConfig {
            layers: 3,
            variant,
            m: 4,
            n: 3,
            ..Default::default()
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let c = cfg(Variant::Dust);
        let d = Mat::zeros(12, 5);
        let pair = build_priors(&Mat::from_fn(12, 5, |i, j| (i * j) as f64), &GraphConfig::default())
            .unwrap();
        let input = NetworkInput {
            d: &d,
            w_hat: &Mat::from_element(12, 5, 1.0),
            pair: Some(&pair),
        };
        let params = init_params(&c, 5, 1).unwrap();
        let out = layer_forward(&LayerState::zeros(12, 5), &input, &params[0], &c).unwrap();
        assert_eq!(out, LayerState::zeros(12, 5));
        let (l, s) = network_forward(&input, &params, &c).unwrap();
        assert_eq!(l.amax() + s.amax(), 0.0);
    }

    #[test]
    fn noise_free_layer_is_one_ista_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = NetworkConfig {
            gamma1: 0.0,
            gamma2: 0.0,
            ..cfg(Variant::Dust)
        };
        let d = rand_mat(&mut rng, 12, 5);
        let w_hat = Mat::from_fn(12, 5, |_, _| f64::from(rng.random_bool(0.5) as u8));
        let mut params = init_params_with_noise(&c, 5, 0, 0.0).unwrap();
        let lp = &mut params[0];
        lp.log_mu = 0.3;
        lp.rho = 0.0;
        lp.y1 = rand_mat(&mut rng, 12, 5);
        lp.y2 = rand_mat(&mut rng, 12, 5);
        lp.y3 = rand_mat(&mut rng, 12, 5);
        let st = LayerState {
            l: rand_mat(&mut rng, 12, 5),
            s: rand_mat(&mut rng, 12, 5),
            u1: rand_mat(&mut rng, 12, 5),
            u2: rand_mat(&mut rng, 12, 5),
        };
        let input = NetworkInput {
            d: &d,
            w_hat: &w_hat,
            pair: None,
        };
        let out = layer_forward(&st, &input, lp, &c).unwrap();

        let solver_state = SolverState {
            l: st.l.clone(),
            s: st.s.clone(),
            u1: st.u1.clone(),
            u2: st.u2.clone(),
            y1: lp.y1.clone(),
            y2: lp.y2.clone(),
            y3: lp.y3.clone(),
            mu: lp.mu(),
        };
        let scfg = SolverConfig {
            l_step: LStep::Merged,
            ..Default::default()
        };
        let l_ref = update_l_ista(&solver_state, &d, &scfg).unwrap();
        let half = Mat::from_element(12, 5, 0.5);
        let s_ref = update_s_ista(&solver_state, &d, &half, &scfg, lp.lambda()).unwrap();
        assert!((&out.l - l_ref).amax() <= 1e-10);
        assert!((&out.s - s_ref).amax() <= 1e-10);
    }

    #[test]
    fn ablation_ignores_u_and_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = cfg(Variant::CoronaAblation);
        let d = rand_mat(&mut rng, 12, 5);
        let params = init_params(&c, 5, 3).unwrap();
        assert!(params[0].kernels[3].is_zero() && params[0].y2.amax() == 0.0);
        let base = LayerState {
            l: rand_mat(&mut rng, 12, 5),
            s: rand_mat(&mut rng, 12, 5),
            u1: rand_mat(&mut rng, 12, 5),
            u2: rand_mat(&mut rng, 12, 5),
        };
        let w1 = Mat::zeros(12, 5);
        let w2 = Mat::from_element(12, 5, 1.0);
        let a = layer_forward(
            &base,
            &NetworkInput {
                d: &d,
                w_hat: &w1,
                pair: None,
            },
            &params[0],
            &c,
        )
        .unwrap();
        let moved = LayerState {
            u1: rand_mat(&mut rng, 12, 5),
            u2: rand_mat(&mut rng, 12, 5),
            ..base.clone()
        };
        let b = layer_forward(
            &moved,
            &NetworkInput {
                d: &d,
                w_hat: &w2,
                pair: None,
            },
            &params[0],
            &c,
        )
        .unwrap();
        assert_eq!(a.l, b.l);
        assert_eq!(a.s, b.s);
    }

    #[test]
    fn init_is_deterministic_and_centered() {
        let c = cfg(Variant::Dust);
        assert_eq!(init_params(&c, 5, 9).unwrap(), init_params(&c, 5, 9).unwrap());
        assert_ne!(init_params(&c, 5, 9).unwrap(), init_params(&c, 5, 10).unwrap());
        let big = NetworkConfig {
            layers: 50,
            ..c.clone()
        };
        let params = init_params(&big, 5, 1).unwrap();
        let clean = init_params_with_noise(&big, 5, 1, 0.0).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for (a, b) in params.iter().zip(&clean) {
            for (ka, kb) in a.kernels.iter().zip(&b.kernels) {
                for (x, y) in ka.0.iter().zip(&kb.0) {
                    sum += x - y;
                    count += 1;
                }
            }
        }
        // 10⁴ draws of N(0, 0.01²): mean within 3σ/√n
        assert_eq!(count, 10_000);
        assert!((sum / count as f64).abs() <= 3.0 * 0.01 / 100.0);
        assert_eq!(apply_variant(params.clone(), &c), params);
    }

    #[test]
    fn checkpoint_round_trip() {
        let c = cfg(Variant::CoronaAblation);
        let mut params = init_params(&c, 5, 2).unwrap();
        params[1].y1[(3, 2)] = -0.25;
        let ck = Checkpoint {
            cfg: c,
            q: 5,
            params,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.bin");
        save_checkpoint(&ck, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, ck);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..5], b"DUST1");
        assert!(matches!(
            parse_checkpoint(&bytes[..bytes.len() - 3]),
            Err(Error::Format { .. })
        ));
        assert!(matches!(parse_checkpoint(b"DUST2"), Err(Error::Format { offset: 0, .. })));
    }
}
