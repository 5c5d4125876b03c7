//! Lagrangian and splitting solvers: dual ascent, augmented Lagrangian,
//! Bregman iteration, ADMM and its linearized form, divide and concur, the
//! primal-dual composite iteration, dual forward-backward, Picard-Opial and
//! half-quadratic IRLS.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, check_positive, Error, Result};
use crate::linalg::{dist_inf, dominant_eigenvalue, dot, norm2, norm_inf, Cholesky, DenseMatrix};
use crate::models::{
    logit_curvature, CompositePenalty, HqEntry, LinearOperator, LogisticLoss, Loss,
    QuadraticLoss,
};
use crate::prox::Proximable;
use crate::solvers::{ensure_finite, fista, Recorder, SolverConfig, SolverTrace, DIVERGENCE_LIMIT};

/// `x = −P⁻¹(q + Aᵀz)`, `z ← z + αₖ(Ax − y)` for `min l(x)` s.t. `Ax = y`.
///
/// The loss must be strictly convex (`P` positive definite). Residual
/// `‖Ax − y‖∞`; the dual `z` is returned in [`SolverTrace::dual`].
pub fn dual_ascent(
    loss: &QuadraticLoss,
    a: &DenseMatrix,
    y: &[f64],
    alpha: &dyn Fn(usize) -> f64,
    z0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_len("dual_ascent A cols", loss.dim(), a.cols())?;
    check_len("dual_ascent y", a.rows(), y.len())?;
    let chol = Cholesky::factor(loss.p())
        .map_err(|_| Error::Unbounded("dual ascent inner argmin (loss not strictly convex)"))?;
    let mut z = match z0 {
        Some(z0) => {
            check_len("dual_ascent z0", a.rows(), z0.len())?;
            z0.to_vec()
        }
        None => vec![0.0; a.rows()],
    };
    let mut rec = Recorder::new(cfg, &vec![0.0; a.cols()]);
    let mut x = vec![0.0; a.cols()];
    for k in 0..cfg.max_iter {
        let atz = a.matvec_t(&z)?;
        let rhs: Vec<f64> = loss.q().iter().zip(&atz).map(|(q, t)| -(q + t)).collect();
        x = chol.solve(&rhs)?;
        let ax = a.matvec(&x)?;
        let r: Vec<f64> = ax.iter().zip(y).map(|(u, v)| u - v).collect();
        let step = alpha(k);
        check_positive("dual ascent step", step)?;
        for (zi, ri) in z.iter_mut().zip(&r) {
            *zi += step * ri;
        }
        let residual = norm_inf(&r);
        rec.push(&x, Loss::value(loss, &x)?, residual, step);
        if residual <= cfg.tol {
            return Ok(rec.finish_with_dual(x, z, true));
        }
    }
    Ok(rec.finish_with_dual(x, z, false))
}

/// Scaled augmented Lagrangian:
/// `x = argmin l(x) + (ρ/2)‖Ax − y + u‖²`, `u ← u + Ax − y`.
///
/// The inner step solves `(P + ρAᵀA)x = ρAᵀ(y − u) − q` with one factorization.
pub fn augmented_lagrangian(
    loss: &QuadraticLoss,
    a: &DenseMatrix,
    y: &[f64],
    rho: f64,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_positive("rho", rho)?;
    check_len("augmented_lagrangian A cols", loss.dim(), a.cols())?;
    check_len("augmented_lagrangian y", a.rows(), y.len())?;
    let mut m = a.gram();
    m.scale(rho);
    m.add_scaled(1.0, loss.p())?;
    let chol = Cholesky::factor(&m)?;
    let mut u = vec![0.0; a.rows()];
    let mut x = vec![0.0; a.cols()];
    let mut rec = Recorder::new(cfg, &x);
    for _ in 0..cfg.max_iter {
        let target: Vec<f64> = y.iter().zip(&u).map(|(yi, ui)| yi - ui).collect();
        let at = a.matvec_t(&target)?;
        let rhs: Vec<f64> = at.iter().zip(loss.q()).map(|(t, q)| rho * t - q).collect();
        x = chol.solve(&rhs)?;
        let ax = a.matvec(&x)?;
        let mut residual = 0.0f64;
        for i in 0..u.len() {
            let r = ax[i] - y[i];
            u[i] += r;
            residual = residual.max(r.abs());
        }
        rec.push(&x, Loss::value(loss, &x)?, residual, rho);
        if residual <= cfg.tol {
            return Ok(rec.finish_with_dual(x, u, true));
        }
    }
    Ok(rec.finish_with_dual(x, u, false))
}

/// Bregman iteration for basis pursuit `min ‖x‖₁` s.t. `Ax = y`:
/// `x = argmin ‖x‖₁ + (γ/2)‖Ax − z‖²` (inner FISTA to 1e-10), `z ← z + y − Ax`.
pub fn bregman_iteration(
    a: &DenseMatrix,
    y: &[f64],
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_positive("gamma", gamma)?;
    check_len("bregman_iteration y", a.rows(), y.len())?;
    let d = a.cols();
    let mut p = a.gram();
    p.scale(gamma);
    let base = QuadraticLoss::new(p, vec![0.0; d], 0.0)?;
    let l1 = CompositePenalty::lasso(d, 1.0)?;
    let mut inner = SolverConfig::default().with_tol(1e-10).with_max_iter(1_000_000);
    inner.restart = true;
    let mut z = y.to_vec();
    let mut x = vec![0.0; d];
    let mut rec = Recorder::new(cfg, &x);
    for _ in 0..cfg.max_iter {
        let atz = a.matvec_t(&z)?;
        let q: Vec<f64> = atz.iter().map(|v| -gamma * v).collect();
        let loss = base.with_linear(q, 0.5 * gamma * dot(&z, &z))?;
        let t = fista(&loss, &l1, &x, &inner)?;
        if !t.converged {
            return Err(Error::NoConvergence {
                what: "Bregman inner lasso",
                iterations: t.iterations,
                estimate: t.records.last().map(|r| r.residual).unwrap_or(f64::NAN),
            });
        }
        x = t.x;
        let ax = a.matvec(&x)?;
        let mut residual = 0.0f64;
        for i in 0..z.len() {
            let r = y[i] - ax[i];
            z[i] += r;
            residual = residual.max(r.abs());
        }
        rec.push(&x, x.iter().map(|v| v.abs()).sum(), residual, gamma);
        if residual <= cfg.tol {
            return Ok(rec.finish_with_dual(x, z, true));
        }
    }
    Ok(rec.finish_with_dual(x, z, false))
}

/// State of a scaled-form splitting iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// Scaled dual (multiplier divided by `ρ`).
    pub u: Vec<f64>,
    pub rho: f64,
    /// Relaxation for Picard-Opial; unused by ADMM.
    pub kappa: f64,
}

impl SplitState {
    pub fn new(x0: &[f64], rho: f64) -> Result<Self> {
        check_positive("rho", rho)?;
        Ok(SplitState {
            x: x0.to_vec(),
            z: x0.to_vec(),
            u: vec![0.0; x0.len()],
            rho,
            kappa: 0.5,
        })
    }
}

/// Which prox ADMM applies first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdmmOrder {
    /// `z = prox_{l/ρ}(x + u)`, then `x = prox_{φ/ρ}(z − u)`.
    #[default]
    LossFirst,
    /// `x = prox_{φ/ρ}(z − u)`, then `z = prox_{l/ρ}(x + u)`.
    PenaltyFirst,
}

/// One ADMM sweep; returns the primal residual `‖x − z‖₂` and the dual
/// residual `ρ‖s − s_prev‖₂`, where `s` is the variable updated second.
/// `u` accumulates `x − z` coordinatewise.
pub fn admm_step(
    state: &mut SplitState,
    prox_loss: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    prox_penalty: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    order: AdmmOrder,
) -> Result<(f64, f64)> {
    let n = state.x.len();
    let z_prev = core::mem::take(&mut state.z);
    let x_prev = core::mem::take(&mut state.x);
    let (x, z) = match order {
        AdmmOrder::LossFirst => {
            let v: Vec<f64> = (0..n).map(|i| x_prev[i] + state.u[i]).collect();
            let z = prox_loss(&v)?;
            let w: Vec<f64> = (0..n).map(|i| z[i] - state.u[i]).collect();
            (prox_penalty(&w)?, z)
        }
        AdmmOrder::PenaltyFirst => {
            let w: Vec<f64> = (0..n).map(|i| z_prev[i] - state.u[i]).collect();
            let x = prox_penalty(&w)?;
            let v: Vec<f64> = (0..n).map(|i| x[i] + state.u[i]).collect();
            (x, prox_loss(&v)?)
        }
    };
    let mut primal = 0.0;
    let mut dual = 0.0;
    for i in 0..n {
        let r = x[i] - z[i];
        state.u[i] += r;
        primal += r * r;
        let ds = match order {
            AdmmOrder::LossFirst => x[i] - x_prev[i],
            AdmmOrder::PenaltyFirst => z[i] - z_prev[i],
        };
        dual += ds * ds;
    }
    state.x = x;
    state.z = z;
    Ok((libm::sqrt(primal), state.rho * libm::sqrt(dual)))
}

/// Scaled ADMM for `min l(x) + φ(x)`; stops when both residuals are below `tol`.
/// The penalty-side iterate `x` is returned and its objective `l(x) + φ(x)` recorded.
pub fn admm<L, P>(
    loss: &L,
    penalty: &P,
    x0: &[f64],
    rho: f64,
    order: AdmmOrder,
    cfg: &SolverConfig,
) -> Result<SolverTrace>
where
    L: Proximable + ?Sized,
    P: Proximable + ?Sized,
{
    cfg.validate()?;
    let mut state = SplitState::new(x0, rho)?;
    let mut prox_l = loss.prox_map(1.0 / rho)?;
    let mut prox_p = penalty.prox_map(1.0 / rho)?;
    let mut rec = Recorder::new(cfg, x0);
    for iteration in 1..=cfg.max_iter {
        let (primal, dual) = admm_step(&mut state, &mut *prox_l, &mut *prox_p, order)?;
        let norm = norm_inf(&state.x).max(norm_inf(&state.u));
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { iteration, norm });
        }
        let objective = loss.value(&state.x) + penalty.value(&state.x);
        rec.push(&state.x, objective, primal.max(dual), 1.0 / rho);
        if primal <= cfg.tol && dual <= cfg.tol {
            return Ok(rec.finish_with_dual(state.x, state.u, true));
        }
    }
    Ok(rec.finish_with_dual(state.x, state.u, false))
}

/// Linearized ADMM for `min l(w) + φ(Aw)`:
/// `w ← prox_{l/(ρμ)}(w − μ⁻¹Aᵀ(Aw − v + u))`, `v ← prox_{φ/ρ}(Aw + u)`,
/// `u ← u + Aw − v`, with `μ ≥ σ_max(A)²` (computed when `mu` is `None`).
///
/// `φ` acts on the range of `A`. Every step checks
/// `‖A(w₊ − w)‖² ≤ μ‖w₊ − w‖²`, the condition under which the linearized
/// term majorizes `(ρ/2)‖Aw − v + u‖²`.
pub fn linearized_admm<L, P>(
    loss_prox: &L,
    penalty_prox: &P,
    a: &LinearOperator,
    rho: f64,
    mu: Option<f64>,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace>
where
    L: Proximable + ?Sized,
    P: Proximable + ?Sized,
{
    cfg.validate()?;
    check_positive("rho", rho)?;
    check_len("linearized_admm x0", a.cols(), x0.len())?;
    let sigma = a.spectral_norm()?;
    let norm_sq = sigma * sigma;
    let mu = match mu {
        Some(m) => {
            check_positive("mu", m)?;
            if m < norm_sq * (1.0 - 1e-9) {
                return Err(Error::MajorizationViolation {
                    iteration: 0,
                    excess: norm_sq - m,
                });
            }
            m
        }
        None => norm_sq.max(f64::MIN_POSITIVE),
    };
    let mut prox_l = loss_prox.prox_map(1.0 / (rho * mu))?;
    let mut prox_p = penalty_prox.prox_map(1.0 / rho)?;
    let k = a.rows();
    let mut w = x0.to_vec();
    let mut aw = a.apply(&w)?;
    let mut v = aw.clone();
    let mut u = vec![0.0; k];
    let mut rec = Recorder::new(cfg, x0);
    for iteration in 1..=cfg.max_iter {
        let r: Vec<f64> = (0..k).map(|i| aw[i] - v[i] + u[i]).collect();
        let atr = a.apply_t(&r)?;
        let point: Vec<f64> = w.iter().zip(&atr).map(|(wi, g)| wi - g / mu).collect();
        let w_new = prox_l(&point)?;
        let aw_new = a.apply(&w_new)?;
        let mut step_sq = 0.0;
        let mut image_sq = 0.0;
        for i in 0..w.len() {
            step_sq += (w_new[i] - w[i]) * (w_new[i] - w[i]);
        }
        for i in 0..k {
            image_sq += (aw_new[i] - aw[i]) * (aw_new[i] - aw[i]);
        }
        let excess = image_sq - mu * step_sq;
        if excess > 1e-10 * (1.0 + mu * step_sq) {
            return Err(Error::MajorizationViolation { iteration, excess });
        }
        let shifted: Vec<f64> = (0..k).map(|i| aw_new[i] + u[i]).collect();
        let v_new = prox_p(&shifted)?;
        let mut primal = 0.0;
        for i in 0..k {
            let ri = aw_new[i] - v_new[i];
            u[i] += ri;
            primal += ri * ri;
        }
        let dv: Vec<f64> = (0..k).map(|i| v_new[i] - v[i]).collect();
        let dual = rho * norm2(&a.apply_t(&dv)?);
        let primal = libm::sqrt(primal);
        w = w_new;
        aw = aw_new;
        v = v_new;
        let norm = norm_inf(&w).max(norm_inf(&u));
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { iteration, norm });
        }
        let objective = loss_prox.value(&w) + penalty_prox.value(&aw);
        rec.push(&w, objective, primal.max(dual), 1.0 / (rho * mu));
        if primal <= cfg.tol && dual <= cfg.tol {
            return Ok(rec.finish_with_dual(w, u, true));
        }
    }
    Ok(rec.finish_with_dual(w, u, false))
}

/// Consensus splitting over blocks: `xⱼ = prox_{γlⱼ}(x̄ − uⱼ)`,
/// `x̄ = mean(xⱼ)`, `uⱼ ← uⱼ + xⱼ − x̄`. The residual is `maxⱼ‖xⱼ − x̄‖∞`;
/// the run stops once it and the change in `x̄` are both below `tol`.
pub fn divide_and_concur(
    blocks: &[&dyn Proximable],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    if blocks.is_empty() {
        return Err(Error::Unsupported("divide_and_concur needs at least one block".into()));
    }
    let gamma = cfg.fixed_step_or(1.0);
    let j = blocks.len();
    let d = x0.len();
    let mut proxes: Vec<_> = blocks
        .iter()
        .map(|b| b.prox_map(gamma))
        .collect::<Result<_>>()?;
    let mut us = vec![vec![0.0; d]; j];
    let mut xbar = x0.to_vec();
    let mut rec = Recorder::new(cfg, x0);
    for _ in 0..cfg.max_iter {
        let mut xs = Vec::with_capacity(j);
        for (idx, prox) in proxes.iter_mut().enumerate() {
            let point: Vec<f64> = (0..d).map(|i| xbar[i] - us[idx][i]).collect();
            let xj = prox(&point).map_err(|e| Error::Block {
                index: idx,
                inner: Box::new(e),
            })?;
            check_len("divide_and_concur block output", d, xj.len())?;
            xs.push(xj);
        }
        // Mean as x₁ + Σ(xⱼ − x₁)/J, exact when the blocks agree.
        let mut mean = xs[0].clone();
        for i in 0..d {
            let mut s = 0.0;
            for xj in &xs[1..] {
                s += xj[i] - xs[0][i];
            }
            mean[i] += s / j as f64;
        }
        let mut residual = 0.0f64;
        for (uj, xj) in us.iter_mut().zip(&xs) {
            for i in 0..d {
                let r = xj[i] - mean[i];
                uj[i] += r;
                residual = residual.max(r.abs());
            }
        }
        let moved = dist_inf(&mean, &xbar);
        xbar = mean;
        ensure_finite(&xbar, "divide and concur average")?;
        let objective = blocks.iter().map(|b| b.value(&xbar)).sum();
        rec.push(&xbar, objective, residual, gamma);
        if residual <= cfg.tol && moved <= cfg.tol {
            return Ok(rec.finish(xbar, true));
        }
    }
    Ok(rec.finish(xbar, false))
}

/// Primal-dual iteration for `min l(x) + φ(Bx)`:
/// `x₊ = prox_{λ_l l}(x − λ_l Bᵀz)`, `w = z + λ_φ B(2x₊ − x)`,
/// `z₊ = w − λ_φ prox_{φ/λ_φ}(w/λ_φ)` (the conjugate prox by Moreau decomposition).
///
/// Requires `λ_l λ_φ σ_max(B)² < 1`. `φ` acts on the range of `B`.
pub fn primal_dual_composite<L, P>(
    loss_prox: &L,
    penalty_prox: &P,
    b: &LinearOperator,
    lambda_l: f64,
    lambda_phi: f64,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace>
where
    L: Proximable + ?Sized,
    P: Proximable + ?Sized,
{
    cfg.validate()?;
    check_positive("lambda_l", lambda_l)?;
    check_positive("lambda_phi", lambda_phi)?;
    check_len("primal_dual_composite x0", b.cols(), x0.len())?;
    let sigma = b.spectral_norm()?;
    let product = lambda_l * lambda_phi * sigma * sigma;
    if product >= 1.0 {
        return Err(Error::StepBound {
            what: "primal-dual step product lambda_l*lambda_phi*sigma_max(B)^2",
            step: product,
            bound: 1.0,
        });
    }
    let mut prox_l = loss_prox.prox_map(lambda_l)?;
    let mut prox_p = penalty_prox.prox_map(1.0 / lambda_phi)?;
    let k = b.rows();
    let mut x = x0.to_vec();
    let mut z = vec![0.0; k];
    let mut rec = Recorder::new(cfg, x0);
    for iteration in 1..=cfg.max_iter {
        let btz = b.apply_t(&z)?;
        let point: Vec<f64> = x.iter().zip(&btz).map(|(xi, g)| xi - lambda_l * g).collect();
        let x_new = prox_l(&point)?;
        let bar: Vec<f64> = x_new.iter().zip(&x).map(|(a, c)| 2.0 * a - c).collect();
        let bbar = b.apply(&bar)?;
        let w: Vec<f64> = (0..k).map(|i| z[i] + lambda_phi * bbar[i]).collect();
        let scaled: Vec<f64> = w.iter().map(|wi| wi / lambda_phi).collect();
        let p = prox_p(&scaled)?;
        let z_new: Vec<f64> = (0..k).map(|i| w[i] - lambda_phi * p[i]).collect();
        let residual = dist_inf(&x_new, &x).max(dist_inf(&z_new, &z));
        x = x_new;
        z = z_new;
        let norm = norm_inf(&x).max(norm_inf(&z));
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { iteration, norm });
        }
        let objective = loss_prox.value(&x) + penalty_prox.value(&b.apply(&x)?);
        rec.push(&x, objective, residual, lambda_l);
        if residual <= cfg.tol {
            return Ok(rec.finish_with_dual(x, z, true));
        }
    }
    Ok(rec.finish_with_dual(x, z, false))
}

/// A state-dependent quadratic majorizer of a smooth loss:
/// `l(x) ≤ ½xᵀΛ(z)x − η(z)ᵀx + c(z)` with equality at `x = z`.
pub trait QuadraticEnvelope {
    fn dim(&self) -> usize;
    /// `(Λ(z), η(z))`.
    fn curvature_at(&self, z: &[f64]) -> Result<(DenseMatrix, Vec<f64>)>;
    /// The loss itself.
    fn objective(&self, x: &[f64]) -> Result<f64>;
}

/// A quadratic loss is its own envelope: `Λ = P`, `η = −q`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticLossEnvelope<'a>(pub &'a QuadraticLoss);

impl QuadraticEnvelope for QuadraticLossEnvelope<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn curvature_at(&self, _z: &[f64]) -> Result<(DenseMatrix, Vec<f64>)> {
        Ok((self.0.p().clone(), self.0.q().iter().map(|v| -v).collect()))
    }
    fn objective(&self, x: &[f64]) -> Result<f64> {
        Loss::value(self.0, x)
    }
}

/// Logistic majorizer: `Λ(z) = 2AᵀDiag(mᵢλ(aᵢᵀz))A`, `η = Aᵀ(y − m/2)`, with
/// `λ(s) = tanh(s/2)/(4s)`.
#[derive(Debug, Clone, Copy)]
pub struct LogitEnvelope<'a>(pub &'a LogisticLoss);

impl QuadraticEnvelope for LogitEnvelope<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn curvature_at(&self, z: &[f64]) -> Result<(DenseMatrix, Vec<f64>)> {
        let a = self.0.design();
        let s = a.matvec(z)?;
        let w: Vec<f64> = s
            .iter()
            .zip(self.0.trials())
            .map(|(si, mi)| 2.0 * mi * logit_curvature(*si))
            .collect();
        let resid: Vec<f64> = self
            .0
            .successes()
            .iter()
            .zip(self.0.trials())
            .map(|(yi, mi)| yi - 0.5 * mi)
            .collect();
        Ok((a.weighted_gram(Some(&w)), a.matvec_t(&resid)?))
    }
    fn objective(&self, x: &[f64]) -> Result<f64> {
        self.0.value(x)
    }
}

/// Where the quadratic part of a composite problem comes from.
pub enum Curvature<'a> {
    /// Fixed SPD `Λ` and `η`.
    Fixed { lambda: DenseMatrix, eta: Vec<f64> },
    /// A majorizer rebuilt at every outer iteration, with proximal damping
    /// `Λ + εI`, `η + εz`, `ε = damping·max diag Λ(z)`. The damping keeps the
    /// curvature positive definite when the envelope is singular.
    Envelope {
        envelope: &'a dyn QuadraticEnvelope,
        damping: f64,
    },
}

/// `min ½xᵀΛx − ηᵀx + weight·Σφ(Bx − b)`.
pub struct QuadraticCompositeProblem<'a> {
    pub curvature: Curvature<'a>,
    pub penalty: CompositePenalty,
}

impl<'a> QuadraticCompositeProblem<'a> {
    pub fn fixed(lambda: DenseMatrix, eta: Vec<f64>, penalty: CompositePenalty) -> Result<Self> {
        check_len("QuadraticCompositeProblem eta", lambda.rows(), eta.len())?;
        check_len("QuadraticCompositeProblem penalty", lambda.rows(), penalty.dim())?;
        if !lambda.is_symmetric(1e-12 * (1.0 + lambda.max_abs_row_sum())) {
            return Err(Error::Unsupported("curvature matrix must be symmetric".into()));
        }
        Ok(QuadraticCompositeProblem {
            curvature: Curvature::Fixed { lambda, eta },
            penalty,
        })
    }

    pub fn envelope(
        envelope: &'a dyn QuadraticEnvelope,
        penalty: CompositePenalty,
        damping: f64,
    ) -> Result<Self> {
        check_len("QuadraticCompositeProblem penalty", envelope.dim(), penalty.dim())?;
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "damping",
                value: damping,
                expected: ">= 0",
            });
        }
        Ok(QuadraticCompositeProblem {
            curvature: Curvature::Envelope { envelope, damping },
            penalty,
        })
    }

    pub fn dim(&self) -> usize {
        self.penalty.dim()
    }

    /// Smooth part plus penalty.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let smooth = match &self.curvature {
            Curvature::Fixed { lambda, eta } => 0.5 * dot(x, &lambda.matvec(x)?) - dot(eta, x),
            Curvature::Envelope { envelope, .. } => envelope.objective(x)?,
        };
        Ok(smooth + self.penalty.eval(x)?)
    }

    /// The curvature used at outer point `z` (damped for envelopes).
    fn curvature_at(&self, z: &[f64]) -> Result<(DenseMatrix, Vec<f64>)> {
        match &self.curvature {
            Curvature::Fixed { lambda, eta } => Ok((lambda.clone(), eta.clone())),
            Curvature::Envelope { envelope, damping } => {
                let (mut lam, mut eta) = envelope.curvature_at(z)?;
                let scale = (0..lam.rows()).map(|i| lam.get(i, i)).fold(0.0, f64::max);
                let eps = damping * scale.max(1e-12);
                if eps > 0.0 {
                    lam.add_diag(eps);
                    for (e, zi) in eta.iter_mut().zip(z) {
                        *e += eps * zi;
                    }
                }
                Ok((lam, eta))
            }
        }
    }
}

/// Step rule for the dual iterations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DualStep {
    /// `γ = 1/σ_max(BΛ⁻¹Bᵀ)`.
    #[default]
    Auto,
    Fixed(f64),
}

/// The dual forward-backward operator
/// `H(v) = (I − prox_{γ⁻¹g})(BΛ⁻¹η + (I − γBΛ⁻¹Bᵀ)v)`
/// for `min ½xᵀΛx − ηᵀx + g(Bx)`, with primal recovery `x = Λ⁻¹(η − γBᵀv)`.
pub struct DualOperator<P> {
    chol: Cholesky,
    eta: Vec<f64>,
    op: LinearOperator,
    outer: P,
    gamma: f64,
    sigma: f64,
}

impl<P: Proximable> DualOperator<P> {
    /// `sigma_bound`, when known, replaces the power-iteration estimate of
    /// `σ_max(BΛ⁻¹Bᵀ)`.
    pub fn new(
        lambda: &DenseMatrix,
        eta: Vec<f64>,
        op: LinearOperator,
        outer: P,
        step: DualStep,
        sigma_bound: Option<f64>,
    ) -> Result<Self> {
        check_len("DualOperator eta", lambda.rows(), eta.len())?;
        check_len("DualOperator operator", lambda.rows(), op.cols())?;
        let chol = Cholesky::factor(lambda)?;
        let sigma = match sigma_bound {
            Some(s) => s,
            None => {
                let mut tmp = vec![0.0; op.cols()];
                dominant_eigenvalue(
                    op.rows(),
                    |v, out| {
                        // B Λ⁻¹ Bᵀ v; the operator calls cannot fail on matching sizes.
                        let btv = op.apply_t(v).unwrap_or_default();
                        tmp.copy_from_slice(&btv);
                        chol.solve_in_place(&mut tmp);
                        let r = op.apply(&tmp).unwrap_or_default();
                        out.copy_from_slice(&r);
                    },
                    1e-9,
                    100_000,
                )?
            }
        };
        let gamma = match step {
            DualStep::Auto => {
                if sigma > 0.0 {
                    1.0 / sigma
                } else {
                    1.0
                }
            }
            DualStep::Fixed(g) => {
                check_positive("dual step", g)?;
                if sigma > 0.0 && g >= 2.0 / sigma {
                    return Err(Error::StepBound {
                        what: "dual forward-backward step",
                        step: g,
                        bound: 2.0 / sigma,
                    });
                }
                g
            }
        };
        Ok(DualOperator {
            chol,
            eta,
            op,
            outer,
            gamma,
            sigma,
        })
    }

    pub fn step(&self) -> f64 {
        self.gamma
    }

    /// Estimate (or supplied bound) of `σ_max(BΛ⁻¹Bᵀ)`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dual_dim(&self) -> usize {
        self.op.rows()
    }

    /// `x = Λ⁻¹(η − γBᵀv)`.
    pub fn primal(&self, v: &[f64]) -> Result<Vec<f64>> {
        let btv = self.op.apply_t(v)?;
        let mut rhs: Vec<f64> = self
            .eta
            .iter()
            .zip(&btv)
            .map(|(e, b)| e - self.gamma * b)
            .collect();
        self.chol.solve_in_place(&mut rhs);
        Ok(rhs)
    }

    /// `(H(v), x(v))`.
    pub fn apply_with_primal(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = self.primal(v)?;
        let bx = self.op.apply(&x)?;
        let a: Vec<f64> = bx.iter().zip(v).map(|(b, vi)| b + vi).collect();
        let p = self.outer.prox(&a, 1.0 / self.gamma)?;
        let h = a.iter().zip(&p).map(|(ai, pi)| ai - pi).collect();
        Ok((h, x))
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply_with_primal(v).map(|(h, _)| h)
    }
}

/// Solves `min ½xᵀΛx − ηᵀx + g(Bx)` by accelerated dual forward-backward,
/// returning `(x, v)`. Used for inner subproblems.
pub fn quadratic_composite_solve<P: Proximable + ?Sized>(
    lambda: &DenseMatrix,
    eta: &[f64],
    op: &LinearOperator,
    outer: &P,
    sigma_bound: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dual = DualOperator::new(lambda, eta.to_vec(), op.clone(), outer, DualStep::Auto, sigma_bound)?;
    accelerated_dual(&dual, vec![0.0; op.rows()], tol, max_iter)
}

fn accelerated_dual<P: Proximable>(
    dual: &DualOperator<P>,
    v0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = v0;
    let mut w = v.clone();
    let mut t = 1.0;
    let mut x_prev = dual.primal(&v)?;
    for _ in 0..max_iter {
        let (v_new, _) = dual.apply_with_primal(&w)?;
        let t_new = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
        let beta = (t - 1.0) / t_new;
        // Restart the momentum when it points uphill.
        let mut s = 0.0;
        for i in 0..v.len() {
            s += (w[i] - v_new[i]) * (v_new[i] - v[i]);
        }
        let (beta, t_next) = if s > 0.0 { (0.0, 1.0) } else { (beta, t_new) };
        for i in 0..v.len() {
            w[i] = v_new[i] + beta * (v_new[i] - v[i]);
        }
        v = v_new;
        t = t_next;
        let x = dual.primal(&v)?;
        if dist_inf(&x, &x_prev) <= tol * (1.0 + norm_inf(&x)) {
            return Ok((x, v));
        }
        x_prev = x;
    }
    Err(Error::NoConvergence {
        what: "dual forward-backward subproblem",
        iterations: max_iter,
        estimate: norm_inf(&x_prev),
    })
}

fn run_dual_iteration(
    problem: &QuadraticCompositeProblem<'_>,
    step: DualStep,
    kappa: f64,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::ParameterOutOfRange {
            name: "kappa",
            value: kappa,
            expected: "0 <= kappa < 1",
        });
    }
    let d = problem.dim();
    check_len("dual iteration x0", d, x0.len())?;
    let outer = problem.penalty.outer();
    let op = problem.penalty.operator().clone();
    let mut rec = Recorder::new(cfg, x0);
    match &problem.curvature {
        Curvature::Fixed { lambda, eta } => {
            let dual = DualOperator::new(lambda, eta.clone(), op, &outer, step, None)?;
            let mut v = vec![0.0; dual.dual_dim()];
            let mut x = dual.primal(&v)?;
            for _ in 0..cfg.max_iter {
                let (h, _) = dual.apply_with_primal(&v)?;
                let v_new: Vec<f64> = v
                    .iter()
                    .zip(&h)
                    .map(|(vi, hi)| kappa * vi + (1.0 - kappa) * hi)
                    .collect();
                let residual = dist_inf(&v_new, &v);
                v = v_new;
                x = dual.primal(&v)?;
                ensure_finite(&x, "dual iteration primal")?;
                rec.push(&x, problem.objective(&x)?, residual, dual.step());
                if residual <= cfg.tol {
                    return Ok(rec.finish_with_dual(x, v, true));
                }
            }
            Ok(rec.finish_with_dual(x, v, false))
        }
        Curvature::Envelope { .. } => {
            // Majorize-minimize: each outer step solves the damped quadratic
            // model at z with the (relaxed) dual iteration, warm-started.
            let mut z = x0.to_vec();
            let mut v = vec![0.0; op.rows()];
            let inner_tol = 1e-3 * cfg.tol;
            let mut gamma_used = 0.0;
            for _ in 0..cfg.max_iter {
                let (lam, eta) = problem.curvature_at(&z)?;
                let dual = DualOperator::new(&lam, eta, op.clone(), &outer, step, None)?;
                if gamma_used != 0.0 && gamma_used != dual.step() {
                    // The scaled dual depends on γ; rescale the warm start.
                    let r = gamma_used / dual.step();
                    v.iter_mut().for_each(|vi| *vi *= r);
                }
                gamma_used = dual.step();
                let mut x = dual.primal(&v)?;
                let mut inner_done = false;
                for _ in 0..1_000_000 {
                    let (h, _) = dual.apply_with_primal(&v)?;
                    for (vi, hi) in v.iter_mut().zip(&h) {
                        *vi = kappa * *vi + (1.0 - kappa) * hi;
                    }
                    let x_new = dual.primal(&v)?;
                    let moved = dist_inf(&x_new, &x);
                    x = x_new;
                    if moved <= inner_tol * (1.0 + norm_inf(&x)) {
                        inner_done = true;
                        break;
                    }
                }
                if !inner_done {
                    return Err(Error::NoConvergence {
                        what: "majorizer subproblem",
                        iterations: 1_000_000,
                        estimate: norm_inf(&x),
                    });
                }
                ensure_finite(&x, "dual iteration primal")?;
                let residual = dist_inf(&x, &z);
                z = x;
                rec.push(&z, problem.objective(&z)?, residual, gamma_used);
                if residual <= cfg.tol {
                    return Ok(rec.finish_with_dual(z, v, true));
                }
            }
            Ok(rec.finish_with_dual(z, v, false))
        }
    }
}

/// Picard-Opial iteration `v ← κv + (1 − κ)H(v)` on the dual operator, with
/// `x = Λ⁻¹(η − γBᵀv)` recovered at every step.
///
/// Fixed curvature: the residual is `‖vᵗ⁺¹ − vᵗ‖∞`, one trace row per step.
/// Envelope curvature: one row per majorize-minimize step with residual
/// `‖xᵗ⁺¹ − xᵗ‖∞`.
pub fn picard_opial(
    problem: &QuadraticCompositeProblem<'_>,
    step: DualStep,
    kappa: f64,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "kappa",
            value: kappa,
            expected: "0 < kappa < 1",
        });
    }
    run_dual_iteration(problem, step, kappa, x0, cfg)
}

/// Dual forward-backward `v ← H(v)` (the Picard-Opial map without relaxation).
pub fn dual_forward_backward(
    problem: &QuadraticCompositeProblem<'_>,
    step: DualStep,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    run_dual_iteration(problem, step, 0.0, x0, cfg)
}

/// Half-quadratic variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HqMode {
    /// Weights `φ′(δ)/δ` (IRLS).
    #[default]
    Multiplicative,
    /// Weights `cδ − φ′(δ)` with fixed curvature `c`.
    Additive,
}

/// Half-quadratic IRLS for `l(x) + γ_pen Σφ((Bx − b)ᵢ)` with a quadratic
/// envelope `(Λ, η)` of the loss:
///
/// - multiplicative: `(Λ + γ_pen BᵀVB)x = η + γ_pen BᵀVb`, `V = diag(φ′(δ)/δ)`;
/// - additive: `(Λ + γ_pen c BᵀB)x = η + γ_pen Bᵀ(cδ − φ′(δ) + cb)`.
///
/// Residual `‖xᵗ⁺¹ − xᵗ‖∞`; the recorded objective uses the exact loss.
#[allow(clippy::too_many_arguments)]
pub fn hq_solver(
    envelope: &dyn QuadraticEnvelope,
    entry: &HqEntry,
    b: &LinearOperator,
    offset: Option<&[f64]>,
    gamma_pen: f64,
    mode: HqMode,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_positive("gamma_pen", gamma_pen)?;
    let d = envelope.dim();
    check_len("hq_solver x0", d, x0.len())?;
    check_len("hq_solver operator", d, b.cols())?;
    let k = b.rows();
    let zeros = vec![0.0; k];
    let offset = offset.unwrap_or(&zeros);
    check_len("hq_solver offset", k, offset.len())?;
    let bd = b.to_dense();
    let objective = |x: &[f64]| -> Result<f64> {
        let bx = b.apply(x)?;
        let mut pen = 0.0;
        for i in 0..k {
            pen += entry.row.value(bx[i] - offset[i])?;
        }
        Ok(envelope.objective(x)? + gamma_pen * pen)
    };
    let mut x = x0.to_vec();
    let mut rec = Recorder::new(cfg, x0);
    for _ in 0..cfg.max_iter {
        let (mut lam, mut rhs) = envelope.curvature_at(&x)?;
        let bx = b.apply(&x)?;
        let delta: Vec<f64> = bx.iter().zip(offset).map(|(u, o)| u - o).collect();
        let (weights, shift): (Vec<f64>, Vec<f64>) = match mode {
            HqMode::Multiplicative => {
                let v: Vec<f64> = delta
                    .iter()
                    .map(|t| entry.row.mult_weight(*t))
                    .collect::<Result<_>>()?;
                let s = v.iter().zip(offset).map(|(vi, o)| vi * o).collect();
                (v, s)
            }
            HqMode::Additive => {
                let s: Vec<f64> = delta
                    .iter()
                    .zip(offset)
                    .map(|(t, o)| entry.row.add_weight(*t, entry.c).map(|a| a + entry.c * o))
                    .collect::<Result<_>>()?;
                (vec![entry.c; k], s)
            }
        };
        let mut reg = bd.weighted_gram(Some(&weights));
        reg.scale(gamma_pen);
        lam.add_scaled(1.0, &reg)?;
        let bts = b.apply_t(&shift)?;
        for (r, v) in rhs.iter_mut().zip(&bts) {
            *r += gamma_pen * v;
        }
        let x_new = Cholesky::factor(&lam)?.solve(&rhs)?;
        ensure_finite(&x_new, "half-quadratic iterate")?;
        let residual = dist_inf(&x_new, &x);
        x = x_new;
        rec.push(&x, objective(&x)?, residual, gamma_pen);
        if residual <= cfg.tol {
            return Ok(rec.finish(x, true));
        }
    }
    Ok(rec.finish(x, false))
}
