//! Iterative reference solvers: PCP by inexact augmented Lagrangian, and the
//! graph-regularized, reweighted ADMM scheme with linearized (ISTA) L/S steps.

use crate::error::{Error, Result};
use crate::graph::{trace_quad, LaplacianPair};
use crate::linalg::{all_finite, ensure_same_shape, nuclear_norm, spectral_norm, Mat, SpdFactor};
use crate::prox::{soft_threshold, svt};
use serde::{Deserialize, Serialize};

/// Which quadratic the L-step linearizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LStep {
    /// The single merged residual `‖D − L − S + U₁ + U₂ + (Y₁+Y₂+Y₃)/μ‖²`.
    /// This is the step the unfolded network generalizes.
    Merged,
    /// The sum of the three separate penalties (curvature `3` in L).
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `None` means `1/√max(p, q)`.
    pub lambda: Option<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    /// `None` means `1.25 / ‖D‖₂`.
    pub mu0: Option<f64>,
    pub mu_growth: f64,
    pub mu_max: f64,
    /// Lipschitz constant of the linearized steps.
    pub c: f64,
    pub max_iter: usize,
    pub tol_primal: f64,
    pub l_step: LStep,
    /// When false, U₁, U₂, Y₂, Y₃ stay at zero.
    pub aux_updates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            gamma1: 0.0,
            gamma2: 0.0,
            mu0: None,
            mu_growth: 1.2,
            mu_max: 1e7,
            c: 1.0,
            max_iter: 500,
            tol_primal: 1e-6,
            l_step: LStep::Exact,
            aux_updates: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("gamma1", self.gamma1 >= 0.0),
            ("gamma2", self.gamma2 >= 0.0),
            ("mu_growth", self.mu_growth >= 1.0),
            ("mu_max", self.mu_max > 0.0),
            ("c", self.c > 0.0),
            ("tol_primal", self.tol_primal > 0.0),
            ("lambda", self.lambda.is_none_or(|l| l > 0.0)),
            ("mu0", self.mu0.is_none_or(|m| m > 0.0)),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::arg(format!("solver config: bad {name}")));
            }
        }
        Ok(())
    }

    pub fn lambda_for(&self, d: &Mat) -> f64 {
        self.lambda
            .unwrap_or_else(|| 1.0 / (d.nrows().max(d.ncols()) as f64).sqrt())
    }

    fn mu0_for(&self, d: &Mat) -> Result<f64> {
        if let Some(m) = self.mu0 {
            return Ok(m);
        }
        let s = spectral_norm(d)?;
        Ok(if s > 0.0 { 1.25 / s } else { 1.0 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub l: Mat,
    pub s: Mat,
    pub u1: Mat,
    pub u2: Mat,
    pub y1: Mat,
    pub y2: Mat,
    pub y3: Mat,
    pub mu: f64,
}

impl SolverState {
    pub fn zeros(p: usize, q: usize, mu: f64) -> Self {
        let z = Mat::zeros(p, q);
        Self {
            l: z.clone(),
            s: z.clone(),
            u1: z.clone(),
            u2: z.clone(),
            y1: z.clone(),
            y2: z.clone(),
            y3: z,
            mu,
        }
    }

    fn is_finite(&self) -> bool {
        [
            &self.l, &self.s, &self.u1, &self.u2, &self.y1, &self.y2, &self.y3,
        ]
        .iter()
        .all(|m| all_finite(m))
            && self.mu.is_finite()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    /// `[‖D−L−S‖_F, ‖L−U₁‖_F, ‖L−U₂‖_F]` per iteration.
    pub primal_residuals: Vec<[f64; 3]>,
    pub converged: bool,
}

/// `‖L‖_* + λ‖W∘S‖₁ + γ₁Tr(LᵀA_sL) + γ₂Tr(LA_tLᵀ)`.
pub fn objective(
    l: &Mat,
    s: &Mat,
    w: &Mat,
    pair: Option<&LaplacianPair>,
    lambda: f64,
    gamma1: f64,
    gamma2: f64,
) -> Result<f64> {
    ensure_same_shape(l, s, "objective L/S")?;
    ensure_same_shape(l, w, "objective L/W")?;
    let mut total = nuclear_norm(l)? + lambda * w.component_mul(s).abs().sum();
    if gamma1 != 0.0 || gamma2 != 0.0 {
        let pair = pair.ok_or_else(|| Error::arg("graph terms need a Laplacian pair"))?;
        let (ts, tt) = trace_quad(l, pair)?;
        total += gamma1 * ts + gamma2 * tt;
    }
    Ok(total)
}

/// `2γA + μI`, or `None` when `γ = 0` (the system is then diagonal).
pub(crate) fn regularized_factor(gamma: f64, a: &Mat, mu: f64) -> Result<Option<SpdFactor>> {
    if gamma == 0.0 {
        return Ok(None);
    }
    let mut m = a * (2.0 * gamma);
    for i in 0..m.nrows() {
        m[(i, i)] += mu;
    }
    SpdFactor::new(&m).map(Some)
}

pub(crate) fn u1_with(factor: Option<&SpdFactor>, l: &Mat, y2: &Mat, mu: f64) -> Result<Mat> {
    let rhs = l * mu + y2;
    match factor {
        Some(f) => f.solve(&rhs),
        None => Ok(rhs / mu),
    }
}

pub(crate) fn u2_with(factor: Option<&SpdFactor>, l: &Mat, y3: &Mat, mu: f64) -> Result<Mat> {
    let rhs = l * mu + y3;
    match factor {
        Some(f) => f.solve_right(&rhs),
        None => Ok(rhs / mu),
    }
}

/// `(2γ₁A_s + μI)⁻¹(μL + Y₂)`.
pub fn update_u1(l: &Mat, y2: &Mat, mu: f64, gamma1: f64, a_s: &Mat) -> Result<Mat> {
    ensure_same_shape(l, y2, "update_u1")?;
    if a_s.nrows() != l.nrows() {
        return Err(Error::dim("spatial Laplacian does not match L rows"));
    }
    if !(mu > 0.0) {
        return Err(Error::arg("mu must be positive"));
    }
    u1_with(regularized_factor(gamma1, a_s, mu)?.as_ref(), l, y2, mu)
}

/// `(μL + Y₃)(2γ₂A_t + μI)⁻¹`.
pub fn update_u2(l: &Mat, y3: &Mat, mu: f64, gamma2: f64, a_t: &Mat) -> Result<Mat> {
    ensure_same_shape(l, y3, "update_u2")?;
    if a_t.nrows() != l.ncols() {
        return Err(Error::dim("temporal Laplacian does not match L columns"));
    }
    if !(mu > 0.0) {
        return Err(Error::arg("mu must be positive"));
    }
    u2_with(regularized_factor(gamma2, a_t, mu)?.as_ref(), l, y3, mu)
}

/// Linearized L-step on the merged residual:
/// `Ψ_{1/(μc)}((1 − 1/c)L − (1/c)(S − D − U₁ − U₂ − (Y₁+Y₂+Y₃)/μ))`.
pub fn update_l_ista(state: &SolverState, d: &Mat, cfg: &SolverConfig) -> Result<Mat> {
    ensure_same_shape(&state.l, d, "update_l_ista")?;
    let (mu, c) = (state.mu, cfg.c);
    let inner = &state.s - d - &state.u1 - &state.u2 - (&state.y1 + &state.y2 + &state.y3) / mu;
    let arg = &state.l * (1.0 - 1.0 / c) - inner / c;
    Ok(svt(&arg, 1.0 / (mu * c))?.value)
}

/// Linearized L-step on the exact sum of the three penalties.
pub fn update_l_exact(state: &SolverState, d: &Mat, cfg: &SolverConfig) -> Result<Mat> {
    ensure_same_shape(&state.l, d, "update_l_exact")?;
    let mu = state.mu;
    let step = 3.0 * cfg.c;
    let grad = &state.l * 3.0
        - (d - &state.s + &state.u1 + &state.u2)
        - (&state.y1 - &state.y2 - &state.y3) / mu;
    let arg = &state.l - grad / step;
    Ok(svt(&arg, 1.0 / (mu * step))?.value)
}

/// `Θ_{(λ/(μc))·W}((1 − 1/c)S − (1/c)(L − D − Y₁/μ))`.
pub fn update_s_ista(
    state: &SolverState,
    d: &Mat,
    w: &Mat,
    cfg: &SolverConfig,
    lambda: f64,
) -> Result<Mat> {
    ensure_same_shape(&state.s, d, "update_s_ista")?;
    ensure_same_shape(w, d, "update_s_ista weights")?;
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::arg("threshold weights must be non-negative"));
    }
    let (mu, c) = (state.mu, cfg.c);
    let arg = &state.s * (1.0 - 1.0 / c) - (&state.l - d - &state.y1 / mu) / c;
    let thresholds = w * (lambda / (mu * c));
    soft_threshold(&arg, &thresholds)
}

/// Multiplier ascent and `μ ← min(growth·μ, μ_max)`.
pub fn dual_update(state: &SolverState, d: &Mat, cfg: &SolverConfig) -> SolverState {
    let mu = state.mu;
    let mut next = state.clone();
    next.y1 += (d - &state.l - &state.s) * mu;
    if cfg.aux_updates {
        next.y2 += (&state.l - &state.u1) * mu;
        next.y3 += (&state.l - &state.u2) * mu;
    }
    next.mu = (cfg.mu_growth * mu).min(cfg.mu_max);
    next
}

fn residuals(state: &SolverState, d: &Mat) -> [f64; 3] {
    [
        (d - &state.l - &state.s).norm(),
        (&state.l - &state.u1).norm(),
        (&state.l - &state.u2).norm(),
    ]
}

/// Runs the spatiotemporal scheme from an all-zero state.
/// Each iteration updates U₁, U₂, L, S, then the multipliers.
pub fn solve(
    d: &Mat,
    pair: Option<&LaplacianPair>,
    w: &Mat,
    cfg: &SolverConfig,
) -> Result<(Mat, Mat, SolveReport)> {
    cfg.validate()?;
    ensure_same_shape(d, w, "solve weights")?;
    let (p, q) = d.shape();
    let uses_graph = cfg.aux_updates && (cfg.gamma1 != 0.0 || cfg.gamma2 != 0.0);
    if uses_graph {
        let pair = pair.ok_or_else(|| Error::arg("graph terms need a Laplacian pair"))?;
        if pair.spatial.nrows() != p || pair.temporal.nrows() != q {
            return Err(Error::dim("Laplacian pair does not match D"));
        }
    }
    let lambda = cfg.lambda_for(d);
    let dnorm = d.norm();
    let mut state = SolverState::zeros(p, q, cfg.mu0_for(d)?);
    let mut report = SolveReport::default();

    // factorizations are reused until μ changes
    let mut cached_mu = f64::NAN;
    let mut f1: Option<SpdFactor> = None;
    let mut f2: Option<SpdFactor> = None;

    for it in 1..=cfg.max_iter {
        if cfg.aux_updates {
            if state.mu != cached_mu {
                if let Some(pair) = pair.filter(|_| uses_graph) {
                    f1 = regularized_factor(cfg.gamma1, &pair.spatial, state.mu)?;
                    f2 = regularized_factor(cfg.gamma2, &pair.temporal, state.mu)?;
                }
                cached_mu = state.mu;
            }
            state.u1 = u1_with(f1.as_ref(), &state.l, &state.y2, state.mu)?;
            state.u2 = u2_with(f2.as_ref(), &state.l, &state.y3, state.mu)?;
        }
        state.l = match cfg.l_step {
            LStep::Merged => update_l_ista(&state, d, cfg)?,
            LStep::Exact => update_l_exact(&state, d, cfg)?,
        };
        state.s = update_s_ista(&state, d, w, cfg, lambda)?;
        if !state.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        let res = residuals(&state, d);
        report.primal_residuals.push(res);
        report.objective_trace.push(objective(
            &state.l,
            &state.s,
            w,
            pair,
            lambda,
            if uses_graph { cfg.gamma1 } else { 0.0 },
            if uses_graph { cfg.gamma2 } else { 0.0 },
        )?);
        report.iterations = it;
        state = dual_update(&state, d, cfg);
        if !state.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        let tol = cfg.tol_primal * dnorm;
        let ok = if cfg.aux_updates {
            res.iter().all(|&r| r <= tol)
        } else {
            res[0] <= tol
        };
        if ok {
            report.converged = true;
            break;
        }
    }
    Ok((state.l, state.s, report))
}

/// PCP by inexact augmented Lagrangian.
pub fn rpca_pcp(d: &Mat, lambda: f64, cfg: &SolverConfig) -> Result<(Mat, Mat, SolveReport)> {
    cfg.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::arg("lambda must be positive"));
    }
    let (p, q) = d.shape();
    let dnorm = d.norm();
    let mut mu = cfg.mu0_for(d)?;
    let mut l = Mat::zeros(p, q);
    let mut s = Mat::zeros(p, q);
    let mut y = Mat::zeros(p, q);
    let mut report = SolveReport::default();
    for it in 1..=cfg.max_iter {
        l = svt(&(d - &s + &y / mu), 1.0 / mu)?.value;
        let arg = d - &l + &y / mu;
        s = arg.map(|v| crate::prox::soft(v, lambda / mu));
        if !all_finite(&l) || !all_finite(&s) {
            return Err(Error::Divergence { iteration: it });
        }
        let r = d - &l - &s;
        let rn = r.norm();
        report.primal_residuals.push([rn, 0.0, 0.0]);
        report
            .objective_trace
            .push(nuclear_norm(&l)? + lambda * s.abs().sum());
        report.iterations = it;
        y += r * mu;
        mu = (cfg.mu_growth * mu).min(cfg.mu_max);
        if rn <= cfg.tol_primal * dnorm {
            report.converged = true;
            break;
        }
    }
    Ok((l, s, report))
}
