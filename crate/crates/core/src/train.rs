//! Hand-derived reverse mode through the unfolded network, the two-term MSE
//! loss, Adam, and the epoch loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::linalg::{
    conv_adjoint_mat_acc, conv_kernel_grad_acc, ensure_same_shape, Mat,
};
use crate::network::{
    init_params, network_forward, network_forward_cached, LayerCache, LayerParams, LayerState,
    NetworkConfig, NetworkInput, Variant, GROUP_NAMES,
};
use crate::prox::{soft_threshold_vjp, svt_vjp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2e-3,
            batch_size: 100,
            epochs: 30,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 {
            return Err(Error::arg("learning_rate must be > 0 and batch_size >= 1"));
        }
        if !(0.0..1.0).contains(&self.adam_beta1)
            || !(0.0..1.0).contains(&self.adam_beta2)
            || !(self.adam_eps > 0.0)
        {
            return Err(Error::arg("bad Adam hyperparameters"));
        }
        Ok(())
    }
}

/// `total = ½(f_L + f_S)`, each `f` a batch mean of squared Frobenius errors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub f_l: f64,
    pub f_s: f64,
}

impl LossParts {
    fn from_sums(sum_l: f64, sum_s: f64, n: usize) -> Self {
        let f_l = sum_l / n as f64;
        let f_s = sum_s / n as f64;
        Self {
            total: 0.5 * (f_l + f_s),
            f_l,
            f_s,
        }
    }
}

pub fn mse_loss(l_hat: &[Mat], s_hat: &[Mat], l_true: &[Mat], s_true: &[Mat]) -> Result<LossParts> {
    let n = l_hat.len();
    if n == 0 || s_hat.len() != n || l_true.len() != n || s_true.len() != n {
        return Err(Error::dim("loss needs equally many, non-zero predictions and targets"));
    }
    let mut sum_l = 0.0;
    let mut sum_s = 0.0;
    for i in 0..n {
        ensure_same_shape(&l_hat[i], &l_true[i], "loss L")?;
        ensure_same_shape(&s_hat[i], &s_true[i], "loss S")?;
        sum_l += (&l_hat[i] - &l_true[i]).norm_squared();
        sum_s += (&s_hat[i] - &s_true[i]).norm_squared();
    }
    Ok(LossParts::from_sums(sum_l, sum_s, n))
}

/// One gradient per learnable, laid out like the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerParams>,
}

impl GradientSet {
    pub fn zeros_like(params: &[LayerParams]) -> Self {
        let (p, q) = params[0].y1.shape();
        Self {
            layers: params.iter().map(|_| LayerParams::zeros(p, q)).collect(),
        }
    }

    fn check_finite(&self) -> Result<()> {
        for (k, lp) in self.layers.iter().enumerate() {
            for (name, g) in GROUP_NAMES.iter().zip(lp.groups()) {
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numerical(format!(
                        "non-finite gradient for {name} in layer {}",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn sample_input(s: &Sample) -> NetworkInput<'_> {
    NetworkInput {
        d: &s.d,
        w_hat: &s.w_hat,
        pair: Some(&s.pair),
    }
}

/// Propagates output gradients of one layer to its inputs, accumulating
/// parameter gradients into `grad`. `u_out` holds the U₁, U₂ this layer produced.
fn layer_backward(
    cache: &LayerCache,
    u_out: Option<(&Mat, &Mat)>,
    input: &NetworkInput,
    lp: &LayerParams,
    cfg: &NetworkConfig,
    g_out: &LayerState,
    grad: &mut LayerParams,
) -> Result<LayerState> {
    let dims = cfg.dims();
    let mu = lp.mu();
    let lambda = lp.lambda();
    let ablated = cfg.variant == Variant::CoronaAblation;
    let inp = &cache.input;
    let k = &lp.kernels;
    let (p, q) = input.d.shape();
    let mut g_in = LayerState::zeros(p, q);

    let (g_zs, g_t) = soft_threshold_vjp(&cache.z_s, &cache.thresholds, &g_out.s)?;
    // T = (λ/μ)·Φ(ρ, Ŵ)
    let gt_t = g_t.dot(&cache.thresholds);
    grad.log_lambda += gt_t;
    grad.log_mu -= gt_t;
    if let Some(phi) = &cache.phi {
        let scale = lambda / mu;
        grad.rho += g_t
            .iter()
            .zip(phi.iter())
            .zip(input.w_hat.iter())
            .map(|((g, f), w)| g * scale * f * (1.0 - f) * w)
            .sum::<f64>();
    }
    conv_kernel_grad_acc(&inp.l, &g_zs, dims, &mut grad.kernels[5]);
    conv_kernel_grad_acc(&inp.s, &g_zs, dims, &mut grad.kernels[6]);
    conv_kernel_grad_acc(input.d, &g_zs, dims, &mut grad.kernels[7]);
    conv_adjoint_mat_acc(&k[5], &g_zs, dims, &mut g_in.l);
    conv_adjoint_mat_acc(&k[6], &g_zs, dims, &mut g_in.s);
    grad.y1 += &g_zs / mu;
    grad.log_mu -= g_zs.dot(&lp.y1) / mu;

    let (g_zl, g_alpha) = svt_vjp(&cache.svt, &g_out.l)?;
    // threshold 1/μ = exp(−log μ)
    grad.log_mu -= g_alpha / mu;
    conv_kernel_grad_acc(&inp.l, &g_zl, dims, &mut grad.kernels[0]);
    conv_kernel_grad_acc(&inp.s, &g_zl, dims, &mut grad.kernels[1]);
    conv_kernel_grad_acc(input.d, &g_zl, dims, &mut grad.kernels[2]);
    conv_adjoint_mat_acc(&k[0], &g_zl, dims, &mut g_in.l);
    conv_adjoint_mat_acc(&k[1], &g_zl, dims, &mut g_in.s);
    let g_zl_mu = &g_zl / mu;
    grad.y1 += &g_zl_mu;
    grad.log_mu -= g_zl_mu.dot(&lp.y1);
    if !ablated {
        conv_kernel_grad_acc(&inp.u1, &g_zl, dims, &mut grad.kernels[3]);
        conv_kernel_grad_acc(&inp.u2, &g_zl, dims, &mut grad.kernels[4]);
        conv_adjoint_mat_acc(&k[3], &g_zl, dims, &mut g_in.u1);
        conv_adjoint_mat_acc(&k[4], &g_zl, dims, &mut g_in.u2);
        grad.y2 += &g_zl_mu;
        grad.y3 += &g_zl_mu;
        grad.log_mu -= g_zl_mu.dot(&(&lp.y2 + &lp.y3));
    }

    if let (Some((u1, u2)), false) = (u_out, ablated) {
        // U₁ = M₁⁻¹(μL + Y₂), so ∂/∂μ = M₁⁻¹(L − U₁); same on the right for U₂
        let g = match &cache.f1 {
            Some(f) => f.solve(&g_out.u1)?,
            None => &g_out.u1 / mu,
        };
        let h = match &cache.f2 {
            Some(f) => f.solve_right(&g_out.u2)?,
            None => &g_out.u2 / mu,
        };
        g_in.l += (&g + &h) * mu;
        let g_mu = g.dot(&(&inp.l - u1)) + h.dot(&(&inp.l - u2));
        grad.y2 += g;
        grad.y3 += h;
        grad.log_mu += mu * g_mu;
    }
    Ok(g_in)
}

/// Forward and backward for one sample; the loss is scaled for a batch of `n`.
/// Returns the unscaled squared errors `(‖L̂−L‖², ‖Ŝ−S‖²)`.
pub fn sample_backward(
    sample: &Sample,
    params: &[LayerParams],
    cfg: &NetworkConfig,
    n: usize,
    grads: &mut GradientSet,
) -> Result<(f64, f64)> {
    let input = sample_input(sample);
    let (out, caches) = network_forward_cached(&input, params, cfg)?;
    let rl = &out.l - &sample.l_true;
    let rs = &out.s - &sample.s_true;
    let errs = (rl.norm_squared(), rs.norm_squared());
    let (p, q) = sample.d.shape();
    let mut g = LayerState {
        l: rl / n as f64,
        s: rs / n as f64,
        u1: Mat::zeros(p, q),
        u2: Mat::zeros(p, q),
    };
    for k in (0..params.len()).rev() {
        let u_out = if caches[k].with_u {
            let next = &caches[k + 1].input;
            Some((&next.u1, &next.u2))
        } else {
            None
        };
        g = layer_backward(
            &caches[k],
            u_out,
            &input,
            &params[k],
            cfg,
            &g,
            &mut grads.layers[k],
        )?;
    }
    Ok(errs)
}

/// Loss and exact gradients over a batch, reduced in sample order.
pub fn backward(
    batch: &[&Sample],
    params: &[LayerParams],
    cfg: &NetworkConfig,
) -> Result<(LossParts, GradientSet)> {
    if batch.is_empty() {
        return Err(Error::arg("empty batch"));
    }
    let mut grads = GradientSet::zeros_like(params);
    let (mut sum_l, mut sum_s) = (0.0, 0.0);
    for s in batch {
        let (el, es) = sample_backward(s, params, cfg, batch.len(), &mut grads)?;
        sum_l += el;
        sum_s += es;
    }
    grads.check_finite()?;
    Ok((LossParts::from_sums(sum_l, sum_s, batch.len()), grads))
}

/// Forward-only loss over a set of samples.
pub fn evaluate(samples: &[Sample], params: &[LayerParams], cfg: &NetworkConfig) -> Result<LossParts> {
    if samples.is_empty() {
        return Err(Error::arg("nothing to evaluate"));
    }
    let (mut sum_l, mut sum_s) = (0.0, 0.0);
    for s in samples {
        let (l, sp) = network_forward(&sample_input(s), params, cfg)?;
        sum_l += (&l - &s.l_true).norm_squared();
        sum_s += (&sp - &s.s_true).norm_squared();
    }
    Ok(LossParts::from_sums(sum_l, sum_s, samples.len()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<LayerParams>,
    pub v: Vec<LayerParams>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &[LayerParams]) -> Self {
        let z = GradientSet::zeros_like(params).layers;
        Self {
            m: z.clone(),
            v: z,
            step: 0,
        }
    }
}

/// Bias-corrected Adam applied to every scalar.
pub fn adam_step(
    params: &mut [LayerParams],
    grads: &GradientSet,
    state: &mut AdamState,
    cfg: &TrainConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (k, lp) in params.iter_mut().enumerate() {
        let gl = grads.layers[k].groups();
        let ml = state.m[k].groups_mut();
        let vl = state.v[k].groups_mut();
        for (((theta, g), m), v) in lp.groups_mut().into_iter().zip(gl).zip(ml).zip(vl) {
            for i in 0..theta.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub split: Split,
    pub loss: LossParts,
}

/// Trains from `init_params(net, q, seed)`.
pub fn train(
    ds: &Dataset,
    net: &NetworkConfig,
    tc: &TrainConfig,
) -> Result<(Vec<LayerParams>, Vec<EpochRecord>)> {
    net.validate()?;
    let params = init_params(net, ds.q, tc.seed)?;
    train_from(ds, net, tc, params)
}

/// The training row of an epoch averages the batch losses seen during that
/// epoch; the test row is evaluated after its last update.
pub fn train_from(
    ds: &Dataset,
    net: &NetworkConfig,
    tc: &TrainConfig,
    mut params: Vec<LayerParams>,
) -> Result<(Vec<LayerParams>, Vec<EpochRecord>)> {
    tc.validate()?;
    net.validate()?;
    if net.dims() != ds.dims {
        return Err(Error::dim(format!(
            "network frames {}x{} vs dataset {}x{}",
            net.m, net.n, ds.dims.m, ds.dims.n
        )));
    }
    if params.len() != net.layers || params.iter().any(|p| p.y1.shape() != (net.dims().pixels(), ds.q)) {
        return Err(Error::dim("parameters do not match the network and dataset"));
    }
    let mut adam = AdamState::new(&params);
    let mut history = Vec::with_capacity(2 * tc.epochs);
    if ds.train.is_empty() {
        return Err(Error::arg("empty training set"));
    }
    for epoch in 1..=tc.epochs {
        let mut order: Vec<usize> = (0..ds.train.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);
        let (mut sum_l, mut sum_s) = (0.0, 0.0);
        for (b, chunk) in order.chunks(tc.batch_size).enumerate() {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &ds.train[i]).collect();
            let (loss, grads) = backward(&batch, &params, net).map_err(|e| {
                Error::Numerical(format!("epoch {epoch}, batch {}: {e}", b + 1))
            })?;
            if !loss.total.is_finite() {
                return Err(Error::Numerical(format!(
                    "loss diverged at epoch {epoch}, batch {}",
                    b + 1
                )));
            }
            sum_l += loss.f_l * batch.len() as f64;
            sum_s += loss.f_s * batch.len() as f64;
            adam_step(&mut params, &grads, &mut adam, tc);
        }
        let train_loss = LossParts::from_sums(sum_l, sum_s, ds.train.len());
        history.push(EpochRecord {
            epoch,
            split: Split::Train,
            loss: train_loss,
        });
        if !ds.test.is_empty() {
            let test_loss = evaluate(&ds.test, &params, net)?;
            history.push(EpochRecord {
                epoch,
                split: Split::Test,
                loss: test_loss,
            });
            log::info!(
                "epoch {epoch}: train {:.6e} test {:.6e}",
                train_loss.total,
                test_loss.total
            );
        }
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        let one = vec![Mat::from_element(1, 1, 1.0)];
        let zero = vec![Mat::zeros(1, 1)];
        let l = mse_loss(&one, &zero, &zero, &zero).unwrap();
        assert_eq!((l.total, l.f_l, l.f_s), (0.5, 1.0, 0.0));
        let l = mse_loss(&one, &one, &one, &one).unwrap();
        assert_eq!(l.total, 0.0);
        assert!(mse_loss(&one, &zero, &[], &zero).is_err());
    }

    #[test]
    fn mse_matches_double_loop() {
        let mk = |s: f64| -> Vec<Mat> {
            (0..3)
                .map(|i| Mat::from_fn(4, 3, |r, c| ((r * 7 + c * 3 + i) as f64 * s).sin()))
                .collect()
        };
        let (a, b, c, d) = (mk(1.0), mk(0.7), mk(1.3), mk(0.2));
        let got = mse_loss(&a, &b, &c, &d).unwrap();
        let (mut fl, mut fs) = (0.0, 0.0);
        for i in 0..3 {
            for r in 0..4 {
                for k in 0..3 {
                    fl += (a[i][(r, k)] - c[i][(r, k)]).powi(2);
                    fs += (b[i][(r, k)] - d[i][(r, k)]).powi(2);
                }
            }
        }
        assert!((got.f_l - fl / 3.0).abs() <= 1e-12);
        assert!((got.f_s - fs / 3.0).abs() <= 1e-12);
        assert_eq!(got.total, 0.5 * (got.f_l + got.f_s));
    }

    #[test]
    fn adam_first_step_and_zero_gradient() {
        let mut params = vec![LayerParams::zeros(2, 2)];
        params[0].rho = 1.0;
        let tc = TrainConfig::default();
        let mut st = AdamState::new(&params);
        let zero = GradientSet::zeros_like(&params);
        let before = params.clone();
        adam_step(&mut params, &zero, &mut st, &tc);
        assert_eq!(params, before);
        assert_eq!(st.step, 1);

        let mut st = AdamState::new(&params);
        let mut g = GradientSet::zeros_like(&params);
        g.layers[0].rho = -3.0;
        g.layers[0].y1[(1, 0)] = 0.5;
        adam_step(&mut params, &g, &mut st, &tc);
        assert!((params[0].rho - (1.0 + 2e-3)).abs() <= 2e-3 * 1e-3);
        assert!((params[0].y1[(1, 0)] + 2e-3).abs() <= 2e-3 * 1e-3);
    }

    #[test]
    fn adam_matches_scalar_recurrence() {
        let tc = TrainConfig::default();
        let gs = [0.3, -1.2, 0.05, 2.0, -0.7];
        let mut params = vec![LayerParams::zeros(1, 1)];
        params[0].log_mu = 0.4;
        let mut st = AdamState::new(&params);
        let (mut theta, mut m, mut v) = (0.4f64, 0.0f64, 0.0f64);
        for (t, &g) in gs.iter().enumerate() {
            let mut grad = GradientSet::zeros_like(&params);
            grad.layers[0].log_mu = g;
            adam_step(&mut params, &grad, &mut st, &tc);
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t as i32 + 1));
            let vh = v / (1.0 - 0.999f64.powi(t as i32 + 1));
            theta -= 2e-3 * mh / (vh.sqrt() + 1e-8);
            assert!((params[0].log_mu - theta).abs() <= 1e-12);
        }
    }
}
