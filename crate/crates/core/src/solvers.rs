//! First-order solvers: proximal point, forward-backward (ISTA/FISTA),
//! proximal Newton, Douglas-Rachford and cyclic descent for the bridge penalty.

use alloc::vec::Vec;

use crate::error::{check_len, check_positive, Error, Result};
use crate::linalg::{all_finite, dist_inf, dot, norm_inf, Cholesky, DenseMatrix};
use crate::models::{LinearOperator, Loss};
use crate::prox::{prox_lq, LqEntry, Proximable};
use crate::rng::SplitMix64;
use crate::splitting::quadratic_composite_solve;

/// How the step `γ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// `γ = 1/λ_l`; with backtracking, the starting trial step.
    InverseLipschitz,
}

/// Solver settings shared by every algorithm.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub step: StepRule,
    pub max_iter: usize,
    /// Stopping threshold on the per-solver residual (see each solver).
    pub tol: f64,
    pub accelerate: bool,
    /// Gradient-based adaptive restart for FISTA.
    pub restart: bool,
    /// Shrink factor `β ∈ (0, 1)` when backtracking is on.
    pub backtracking: Option<f64>,
    pub seed: u64,
    /// Randomized coordinate order in cyclic descent.
    pub random_order: bool,
    /// Keep every iterate in [`SolverTrace::iterates`].
    pub record_iterates: bool,
    /// Wall clock in seconds; without one every trace records 0.
    pub clock: Option<fn() -> f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: StepRule::InverseLipschitz,
            max_iter: 10_000,
            tol: 1e-8,
            accelerate: false,
            restart: false,
            backtracking: None,
            seed: 0,
            random_order: false,
            record_iterates: false,
            clock: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("tol", self.tol)?;
        if let StepRule::Fixed(g) = self.step {
            check_positive("step", g)?;
        }
        if let Some(beta) = self.backtracking {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "backtracking beta",
                    value: beta,
                    expected: "0 < beta < 1",
                });
            }
        }
        if self.max_iter == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "max_iter",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(())
    }

    pub fn with_step(mut self, gamma: f64) -> Self {
        self.step = StepRule::Fixed(gamma);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// The fixed step, or `default` when the rule is Lipschitz-based.
    pub fn fixed_step_or(&self, default: f64) -> f64 {
        match self.step {
            StepRule::Fixed(g) => g,
            StepRule::InverseLipschitz => default,
        }
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub objective: f64,
    pub residual: f64,
    pub step: f64,
    /// Cumulative seconds since the solver started.
    pub seconds: f64,
}

/// Per-iteration history and final point of a solver run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub x: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `x⁰, x¹, …` when requested (one more than `iterations`).
    pub iterates: Vec<Vec<f64>>,
    /// Final dual variable for the Lagrangian solvers.
    pub dual: Vec<f64>,
}

impl SolverTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }
}

/// Collects trace rows; used by every solver in the crate.
pub(crate) struct Recorder {
    trace: SolverTrace,
    clock: Option<fn() -> f64>,
    start: f64,
    keep_iterates: bool,
}

impl Recorder {
    pub(crate) fn new(cfg: &SolverConfig, x0: &[f64]) -> Self {
        let start = cfg.clock.map(|c| c()).unwrap_or(0.0);
        let mut trace = SolverTrace::default();
        if cfg.record_iterates {
            trace.iterates.push(x0.to_vec());
        }
        Recorder {
            trace,
            clock: cfg.clock,
            start,
            keep_iterates: cfg.record_iterates,
        }
    }

    pub(crate) fn push(&mut self, x: &[f64], objective: f64, residual: f64, step: f64) {
        let seconds = self.clock.map(|c| c() - self.start).unwrap_or(0.0);
        self.trace.records.push(TraceRecord {
            objective,
            residual,
            step,
            seconds,
        });
        self.trace.iterations += 1;
        if self.keep_iterates {
            self.trace.iterates.push(x.to_vec());
        }
    }

    pub(crate) fn finish(mut self, x: Vec<f64>, converged: bool) -> SolverTrace {
        self.trace.x = x;
        self.trace.converged = converged;
        self.trace
    }

    pub(crate) fn finish_with_dual(self, x: Vec<f64>, dual: Vec<f64>, converged: bool) -> SolverTrace {
        let mut t = self.finish(x, converged);
        t.dual = dual;
        t
    }
}

pub(crate) fn ensure_finite(x: &[f64], what: &'static str) -> Result<()> {
    if all_finite(x) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `xᵗ⁺¹ = prox_{γf}(xᵗ)`; stops when `‖xᵗ⁺¹ − xᵗ‖∞ ≤ tol`.
pub fn proximal_point<F>(f: &F, x0: &[f64], cfg: &SolverConfig) -> Result<SolverTrace>
where
    F: Proximable + ?Sized,
{
    cfg.validate()?;
    let gamma = cfg.fixed_step_or(1.0);
    let mut prox = f.prox_map(gamma)?;
    let mut rec = Recorder::new(cfg, x0);
    let mut x = x0.to_vec();
    for _ in 0..cfg.max_iter {
        let next = prox(&x)?;
        ensure_finite(&next, "proximal point iterate")?;
        let residual = dist_inf(&next, &x);
        x = next;
        rec.push(&x, f.value(&x), residual, gamma);
        if residual <= cfg.tol {
            return Ok(rec.finish(x, true));
        }
    }
    Ok(rec.finish(x, false))
}

/// FISTA momentum `(t − 1)/(t + 2)` at iteration `t ≥ 1`.
pub fn momentum_coefficient(t: usize) -> f64 {
    let t = t as f64;
    (t - 1.0) / (t + 2.0)
}

fn majorization_slack(lx: f64) -> f64 {
    1e-12 * (1.0 + lx.abs())
}

/// Whether `l(x₊) ≤ l(x) + ∇l(x)ᵀ(x₊ − x) + ‖x₊ − x‖²/(2γ)` (up to rounding slack).
pub fn majorization_holds<L: Loss + ?Sized>(
    loss: &L,
    x: &[f64],
    x_next: &[f64],
    gamma: f64,
) -> Result<bool> {
    let (lx, g) = loss.value_grad(x)?;
    let l_next = match loss.value(x_next) {
        Ok(v) => v,
        Err(Error::Overflow(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    Ok(upper_model_ok(lx, &g, x, x_next, l_next, gamma))
}

fn upper_model_ok(lx: f64, g: &[f64], x: &[f64], x_next: &[f64], l_next: f64, gamma: f64) -> bool {
    let mut lin = 0.0;
    let mut sq = 0.0;
    for i in 0..x.len() {
        let d = x_next[i] - x[i];
        lin += g[i] * d;
        sq += d * d;
    }
    l_next.is_finite() && l_next <= lx + lin + sq / (2.0 * gamma) + majorization_slack(lx)
}

fn forward_point(x: &[f64], g: &[f64], gamma: f64) -> Vec<f64> {
    x.iter().zip(g).map(|(a, b)| a - gamma * b).collect()
}

/// Backtracking from `γ0`: returns the first `γ = γ0βᵏ` whose forward-backward
/// point satisfies the quadratic upper model, together with `l` at that point.
fn backtrack<L, P>(
    loss: &L,
    penalty: &P,
    x: &[f64],
    lx: f64,
    g: &[f64],
    gamma0: f64,
    beta: f64,
) -> Result<(f64, Vec<f64>, f64)>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    let mut gamma = gamma0;
    loop {
        if gamma < 1e-300 {
            return Err(Error::StepUnderflow { step: gamma });
        }
        let next = penalty.prox(&forward_point(x, g, gamma), gamma)?;
        if all_finite(&next) {
            let l_next = match loss.value(&next) {
                Ok(v) => v,
                Err(Error::Overflow(_)) | Err(Error::NonFinite(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if upper_model_ok(lx, g, x, &next, l_next, gamma) {
                return Ok((gamma, next, l_next));
            }
        }
        gamma *= beta;
    }
}

/// One backtracking forward-backward step from `x`.
pub fn backtracking_step<L, P>(
    loss: &L,
    penalty: &P,
    x: &[f64],
    gamma0: f64,
    beta: f64,
) -> Result<(f64, Vec<f64>)>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    check_positive("gamma0", gamma0)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "beta",
            value: beta,
            expected: "0 < beta < 1",
        });
    }
    let (lx, g) = loss.value_grad(x)?;
    let (gamma, next, _) = backtrack(loss, penalty, x, lx, &g, gamma0, beta)?;
    Ok((gamma, next))
}

fn initial_step<L: Loss + ?Sized>(loss: &L, cfg: &SolverConfig) -> Result<f64> {
    match (cfg.step, loss.lipschitz_bound(), cfg.backtracking) {
        (StepRule::Fixed(g), _, _) => Ok(g),
        (StepRule::InverseLipschitz, Some(l), _) if l > 0.0 => Ok(1.0 / l),
        (StepRule::InverseLipschitz, Some(_), _) => Ok(1.0),
        (StepRule::InverseLipschitz, None, Some(_)) => Ok(1.0),
        (StepRule::InverseLipschitz, None, None) => Err(Error::Unsupported(
            "loss has no Lipschitz bound: enable backtracking or give a fixed step".into(),
        )),
    }
}

fn composite_value<L, P>(loss: &L, penalty: &P, x: &[f64]) -> Result<f64>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    Ok(loss.value(x)? + penalty.value(x))
}

fn forward_backward<L, P>(
    loss: &L,
    penalty: &P,
    x0: &[f64],
    cfg: &SolverConfig,
    accelerate: bool,
) -> Result<SolverTrace>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    cfg.validate()?;
    check_len("forward-backward x0", loss.dim(), x0.len())?;
    let mut gamma = initial_step(loss, cfg)?;
    let mut rec = Recorder::new(cfg, x0);
    let mut x = x0.to_vec();
    let mut x_prev = x.clone();
    // Iteration counter for the momentum schedule; reset by restarts.
    let mut k = 1usize;
    for _ in 0..cfg.max_iter {
        let y: Vec<f64> = if accelerate {
            let c = momentum_coefficient(k);
            x.iter()
                .zip(&x_prev)
                .map(|(a, b)| a + c * (a - b))
                .collect()
        } else {
            x.clone()
        };
        let (ly, g) = loss.value_grad(&y)?;
        let (next, l_next) = match cfg.backtracking {
            Some(beta) => {
                let (gm, next, l_next) = backtrack(loss, penalty, &y, ly, &g, gamma, beta)?;
                gamma = gm;
                (next, l_next)
            }
            None => {
                let next = penalty.prox(&forward_point(&y, &g, gamma), gamma)?;
                let l_next = loss.value(&next)?;
                (next, l_next)
            }
        };
        ensure_finite(&next, "forward-backward iterate")?;
        let residual = dist_inf(&y, &next) / gamma;
        let objective = l_next + penalty.value(&next);
        if accelerate && cfg.restart {
            let mut s = 0.0;
            for i in 0..next.len() {
                s += (y[i] - next[i]) * (next[i] - x[i]);
            }
            k = if s > 0.0 { 1 } else { k + 1 };
        } else {
            k += 1;
        }
        x_prev = core::mem::replace(&mut x, next);
        rec.push(&x, objective, residual, gamma);
        if residual <= cfg.tol {
            return Ok(rec.finish(x, true));
        }
    }
    Ok(rec.finish(x, false))
}

/// `xᵗ⁺¹ = prox_{γφ}(xᵗ − γ∇l(xᵗ))`, stopping on `‖G_γ(xᵗ)‖∞ ≤ tol`.
///
/// Uses momentum when `cfg.accelerate` is set.
pub fn proximal_gradient<L, P>(
    loss: &L,
    penalty: &P,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    forward_backward(loss, penalty, x0, cfg, cfg.accelerate)
}

/// Accelerated forward-backward with momentum `(t − 1)/(t + 2)`; the residual
/// is measured at the extrapolated point.
pub fn fista<L, P>(loss: &L, penalty: &P, x0: &[f64], cfg: &SolverConfig) -> Result<SolverTrace>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    forward_backward(loss, penalty, x0, cfg, true)
}

/// Proximal Newton: each step minimizes
/// `φ(v) + ∇l(z)ᵀ(v − z) + ½(v − z)ᵀ(γ⁻¹I + H_z)(v − z)`
/// with the inner dual forward-backward loop, then takes the largest step
/// `2⁻ʲ` along the direction that does not increase the objective.
/// Stops when `‖xᵗ⁺¹ − xᵗ‖∞ ≤ tol`.
pub fn proximal_newton<L, P>(
    loss: &L,
    penalty: &P,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    cfg.validate()?;
    let d = loss.dim();
    check_len("proximal_newton x0", d, x0.len())?;
    let gamma = cfg.fixed_step_or(1.0);
    let mut rec = Recorder::new(cfg, x0);
    let mut z = x0.to_vec();
    let mut fz = composite_value(loss, penalty, &z)?;
    for iteration in 1..=cfg.max_iter {
        let g = loss.gradient(&z)?;
        let h = loss.hessian(&z)?;
        check_len("proximal_newton Hessian", d, h.rows())?;
        let mut probe = h.clone();
        let diag_scale = (0..d).map(|i| h.get(i, i).abs()).fold(1.0, f64::max);
        probe.add_diag(1e-10 * diag_scale);
        if Cholesky::factor(&probe).is_err() {
            return Err(Error::IndefiniteHessian { iteration });
        }
        let mut lambda = h;
        lambda.add_diag(1.0 / gamma);
        let lz = lambda.matvec(&z)?;
        let eta: Vec<f64> = lz.iter().zip(&g).map(|(a, b)| a - b).collect();
        let (target, _) = quadratic_composite_solve(
            &lambda,
            &eta,
            &LinearOperator::Identity(d),
            penalty,
            Some(gamma),
            1e-13,
            100_000,
        )?;
        let dir: Vec<f64> = target.iter().zip(&z).map(|(a, b)| a - b).collect();
        let mut t = 1.0;
        let mut next = target;
        let mut fnext = composite_value(loss, penalty, &next).unwrap_or(f64::INFINITY);
        let mut halvings = 0;
        while !(fnext <= fz + 1e-12 * (1.0 + fz.abs())) && halvings < 40 {
            t *= 0.5;
            halvings += 1;
            next = z.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            fnext = composite_value(loss, penalty, &next).unwrap_or(f64::INFINITY);
        }
        ensure_finite(&next, "proximal Newton iterate")?;
        let residual = dist_inf(&next, &z);
        z = next;
        fz = fnext;
        rec.push(&z, fz, residual, gamma * t);
        if residual <= cfg.tol {
            return Ok(rec.finish(z, true));
        }
    }
    Ok(rec.finish(z, false))
}

/// Iterates with `‖x‖∞` above this are treated as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Douglas-Rachford: `w = prox_{γl}(x)`, `z = prox_{γφ}(2w − x)`, `x ← x + z − w`.
///
/// The objective `l(w) + φ(w)` and residual `‖z − w‖∞` are recorded; the
/// returned point is the last `w`.
pub fn douglas_rachford<L, P>(
    loss_prox: &L,
    penalty_prox: &P,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace>
where
    L: Proximable + ?Sized,
    P: Proximable + ?Sized,
{
    cfg.validate()?;
    let gamma = cfg.fixed_step_or(1.0);
    let mut prox_l = loss_prox.prox_map(gamma)?;
    let mut prox_p = penalty_prox.prox_map(gamma)?;
    let mut rec = Recorder::new(cfg, x0);
    let mut x = x0.to_vec();
    let mut w = x.clone();
    for iteration in 1..=cfg.max_iter {
        w = prox_l(&x)?;
        let reflected: Vec<f64> = w.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
        let z = prox_p(&reflected)?;
        let mut residual = 0.0f64;
        for i in 0..x.len() {
            let diff = z[i] - w[i];
            residual = residual.max(diff.abs());
            x[i] += diff;
        }
        let norm = norm_inf(&x);
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { iteration, norm });
        }
        rec.push(&w, loss_prox.value(&w) + penalty_prox.value(&w), residual, gamma);
        if residual <= cfg.tol {
            return Ok(rec.finish(w, true));
        }
    }
    Ok(rec.finish(w, false))
}

/// `½‖y − Ax‖² + λΣ|xᵢ|^q`.
pub fn lq_objective(a: &DenseMatrix, y: &[f64], entry: &LqEntry, x: &[f64]) -> Result<f64> {
    let ax = a.matvec(x)?;
    check_len("lq_objective y", a.rows(), y.len())?;
    let r: f64 = y.iter().zip(&ax).map(|(u, v)| (u - v) * (u - v)).sum();
    Ok(0.5 * r + x.iter().map(|t| entry.value(*t)).sum::<f64>())
}

/// Gauss-Seidel cyclic descent for `½‖y − Ax‖² + λΣ|xᵢ|^q`.
///
/// Coordinate `i` is set to `prox` of `λ/‖Aᵢ‖²·|·|^q` at
/// `uᵢ = Aᵢᵀr/‖Aᵢ‖² + xᵢ`, with the residual `r = y − Ax` updated in place.
/// One trace row per full cycle; the residual is the largest coordinate move.
pub fn cyclic_descent_lq(
    a: &DenseMatrix,
    y: &[f64],
    entry: &LqEntry,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    let (n, d) = (a.rows(), a.cols());
    check_len("cyclic_descent_lq y", n, y.len())?;
    check_len("cyclic_descent_lq x0", d, x0.len())?;
    let columns: Vec<Vec<f64>> = (0..d).map(|j| a.column(j)).collect();
    let mut entries = Vec::with_capacity(d);
    let mut norms = Vec::with_capacity(d);
    for (j, col) in columns.iter().enumerate() {
        let nj = dot(col, col);
        if nj == 0.0 {
            return Err(Error::Unsupported(alloc::format!("column {j} of A is zero")));
        }
        norms.push(nj);
        entries.push(LqEntry::new(entry.q(), entry.lambda() / nj)?);
    }
    let mut x = x0.to_vec();
    let ax = a.matvec(&x)?;
    let mut r: Vec<f64> = y.iter().zip(&ax).map(|(u, v)| u - v).collect();
    let mut order: Vec<usize> = (0..d).collect();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut rec = Recorder::new(cfg, x0);
    for _ in 0..cfg.max_iter {
        if cfg.random_order {
            rng.shuffle(&mut order);
        }
        let mut moved = 0.0f64;
        for &j in &order {
            let col = &columns[j];
            let u = dot(col, &r) / norms[j] + x[j];
            let new = prox_lq(u, &entries[j])?.select();
            let delta = new - x[j];
            if delta != 0.0 {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri -= delta * ci;
                }
                x[j] = new;
                moved = moved.max(delta.abs());
            }
        }
        let objective =
            0.5 * dot(&r, &r) + x.iter().map(|t| entry.value(*t)).sum::<f64>();
        rec.push(&x, objective, moved, 1.0);
        if moved <= cfg.tol {
            return Ok(rec.finish(x, true));
        }
    }
    Ok(rec.finish(x, false))
}
