//! Problem builders, solver dispatch and the experiment drivers: single runs
//! on simulated data, bridge-penalty MSE surfaces and regularization paths.

use std::path::Path;

use proxkit_core::linalg::{solve_spd, spectral_norm, DenseMatrix};
use proxkit_core::models::{
    CompositePenalty, HqEntry, HqRow, LogisticLoss, Loss, NewtonProx, PoissonLoss, QuadraticLoss,
};
use proxkit_core::prox::{LqEntry, Proximable};
use proxkit_core::solvers::{
    cyclic_descent_lq, douglas_rachford, fista, lq_objective, proximal_gradient, proximal_newton,
    SolverConfig, SolverTrace,
};
use proxkit_core::splitting::{
    admm, dual_forward_backward, hq_solver, linearized_admm, picard_opial, primal_dual_composite,
    AdmmOrder, DualStep, HqMode, LogitEnvelope, QuadraticCompositeProblem, QuadraticEnvelope,
    QuadraticLossEnvelope,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate, standardize, SimData, SimFamily, SimSpec};
use crate::error::{Error, Result};
use crate::io::{ingest_csv, Dataset};

/// Predictors of the prostate data, in path order.
pub const PROSTATE_PREDICTORS: [&str; 8] =
    ["lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45"];
pub const PROSTATE_RESPONSE: &str = "lpsa";

/// Fit term of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LossFamily {
    /// `½‖y − Ax‖²`.
    Gaussian,
    /// Binomial negative log-likelihood.
    Logistic,
    /// Poisson negative log-likelihood.
    Poisson,
}

/// Penalty shape; the weight is given separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyKind {
    None,
    L1,
    Fused,
    Lq,
}

/// Solver choice for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Ista,
    Fista,
    ProxNewton,
    Admm,
    DouglasRachford,
    LinearizedAdmm,
    PrimalDual,
    DualFb,
    PicardOpial,
    Hq,
    Cyclic,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ista => "ista",
            SolverKind::Fista => "fista",
            SolverKind::ProxNewton => "prox-newton",
            SolverKind::Admm => "admm",
            SolverKind::DouglasRachford => "douglas-rachford",
            SolverKind::LinearizedAdmm => "linearized-admm",
            SolverKind::PrimalDual => "primal-dual",
            SolverKind::DualFb => "dual-fb",
            SolverKind::PicardOpial => "picard-opial",
            SolverKind::Hq => "hq",
            SolverKind::Cyclic => "cyclic",
        }
    }
}

/// `d`-dimensional penalty of the given kind and weight.
pub fn build_penalty(kind: PenaltyKind, d: usize, weight: f64, q: f64) -> Result<CompositePenalty> {
    Ok(match kind {
        PenaltyKind::None => CompositePenalty::lasso(d, 0.0)?,
        PenaltyKind::L1 => CompositePenalty::lasso(d, weight)?,
        PenaltyKind::Fused => CompositePenalty::fused_lasso(d, weight)?,
        PenaltyKind::Lq => CompositePenalty::bridge(d, q, weight)?,
    })
}

/// The smooth part of a composite problem.
#[derive(Debug, Clone)]
pub enum LossModel {
    Quadratic(QuadraticLoss),
    Logistic(LogisticLoss),
    Poisson(PoissonLoss),
}

/// `l(x) + φ(Bx)` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct Problem {
    pub loss: LossModel,
    pub penalty: CompositePenalty,
    pub design: DenseMatrix,
    pub response: Vec<f64>,
}

impl Problem {
    /// `trials` is used by the logistic family only (defaults to ones).
    pub fn new(
        family: LossFamily,
        design: DenseMatrix,
        response: Vec<f64>,
        trials: Option<Vec<f64>>,
        penalty: CompositePenalty,
    ) -> Result<Self> {
        if penalty.dim() != design.cols() {
            return Err(Error::Config(format!(
                "penalty dimension {} does not match {} design columns",
                penalty.dim(),
                design.cols()
            )));
        }
        let loss = match family {
            LossFamily::Gaussian => {
                LossModel::Quadratic(QuadraticLoss::weighted_least_squares(&design, &response, None)?)
            }
            LossFamily::Logistic => {
                let m = trials.unwrap_or_else(|| vec![1.0; design.rows()]);
                LossModel::Logistic(LogisticLoss::new(design.clone(), response.clone(), m)?)
            }
            LossFamily::Poisson => LossModel::Poisson(PoissonLoss::new(design.clone(), response.clone())?),
        };
        Ok(Problem {
            loss,
            penalty,
            design,
            response,
        })
    }

    pub fn dim(&self) -> usize {
        self.design.cols()
    }

    pub fn loss_value(&self, x: &[f64]) -> Result<f64> {
        Ok(match &self.loss {
            LossModel::Quadratic(l) => Loss::value(l, x)?,
            LossModel::Logistic(l) => l.value(x)?,
            LossModel::Poisson(l) => l.value(x)?,
        })
    }

    /// `l(x) + φ(Bx)`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        Ok(self.loss_value(x)? + self.penalty.eval(x)?)
    }
}

/// Solver choice with the tuning parameters the splitting methods need.
#[derive(Debug, Clone, Copy)]
pub struct SolverSpec {
    pub kind: SolverKind,
    /// ADMM and linearized ADMM penalty parameter.
    pub rho: f64,
    /// Picard-Opial relaxation.
    pub kappa: f64,
    /// Proximal damping of state-dependent envelopes (dual FB, Picard-Opial).
    pub damping: f64,
    pub hq_row: HqRow,
    pub hq_mode: HqMode,
    pub cfg: SolverConfig,
}

impl SolverSpec {
    pub fn new(kind: SolverKind, cfg: SolverConfig) -> Self {
        SolverSpec {
            kind,
            rho: 1.0,
            kappa: 0.5,
            damping: 0.1,
            hq_row: HqRow::Charbonnier { alpha: 1e-6 },
            hq_mode: HqMode::Multiplicative,
            cfg,
        }
    }
}

/// Runs the chosen solver from `x0`.
pub fn solve(problem: &Problem, spec: &SolverSpec, x0: &[f64]) -> Result<SolverTrace> {
    if x0.len() != problem.dim() {
        return Err(Error::Config(format!(
            "starting point has {} entries, expected {}",
            x0.len(),
            problem.dim()
        )));
    }
    if spec.kind == SolverKind::Cyclic {
        return solve_cyclic(problem, spec, x0);
    }
    match &problem.loss {
        LossModel::Quadratic(l) => dispatch(l, Some(&QuadraticLossEnvelope(l)), problem, spec, x0),
        LossModel::Logistic(l) => dispatch(&NewtonProx::new(l), Some(&LogitEnvelope(l)), problem, spec, x0),
        LossModel::Poisson(l) => dispatch(&NewtonProx::new(l), None, problem, spec, x0),
    }
}

fn solve_cyclic(problem: &Problem, spec: &SolverSpec, x0: &[f64]) -> Result<SolverTrace> {
    match (&problem.loss, problem.penalty.phi()) {
        (LossModel::Quadratic(_), proxkit_core::prox::ScalarPenalty::Bridge { q }) => {
            let entry = LqEntry::new(*q, problem.penalty.weight())?;
            Ok(cyclic_descent_lq(&problem.design, &problem.response, &entry, x0, &spec.cfg)?)
        }
        _ => Err(Error::Config(
            "cyclic descent needs the gaussian family with the lq penalty".into(),
        )),
    }
}

fn dispatch<L>(
    loss: &L,
    envelope: Option<&dyn QuadraticEnvelope>,
    problem: &Problem,
    spec: &SolverSpec,
    x0: &[f64],
) -> Result<SolverTrace>
where
    L: Loss + Proximable,
{
    let pen = &problem.penalty;
    let cfg = &spec.cfg;
    let need_envelope = || {
        envelope.ok_or_else(|| {
            Error::Config(format!(
                "solver {} needs a quadratic envelope of the loss (gaussian or logistic)",
                spec.kind.name()
            ))
        })
    };
    let trace = match spec.kind {
        SolverKind::Ista => proximal_gradient(loss, pen, x0, cfg)?,
        SolverKind::Fista => fista(loss, pen, x0, cfg)?,
        SolverKind::ProxNewton => proximal_newton(loss, pen, x0, cfg)?,
        SolverKind::Admm => admm(loss, pen, x0, spec.rho, AdmmOrder::LossFirst, cfg)?,
        SolverKind::DouglasRachford => douglas_rachford(loss, pen, x0, cfg)?,
        SolverKind::LinearizedAdmm => {
            linearized_admm(loss, &pen.outer(), pen.operator(), spec.rho, None, x0, cfg)?
        }
        SolverKind::PrimalDual => {
            let lambda_l = cfg.fixed_step_or(1.0 / loss.lipschitz_bound().unwrap_or(1.0));
            let sigma = pen.operator().spectral_norm()?;
            let lambda_phi = if sigma > 0.0 {
                0.95 / (lambda_l * sigma * sigma)
            } else {
                1.0
            };
            primal_dual_composite(loss, &pen.outer(), pen.operator(), lambda_l, lambda_phi, x0, cfg)?
        }
        SolverKind::DualFb | SolverKind::PicardOpial => {
            let prob = QuadraticCompositeProblem::envelope(need_envelope()?, pen.clone(), spec.damping)?;
            let step = match cfg.step {
                proxkit_core::solvers::StepRule::Fixed(g) => DualStep::Fixed(g),
                proxkit_core::solvers::StepRule::InverseLipschitz => DualStep::Auto,
            };
            if spec.kind == SolverKind::DualFb {
                dual_forward_backward(&prob, step, x0, cfg)?
            } else {
                picard_opial(&prob, step, spec.kappa, x0, cfg)?
            }
        }
        SolverKind::Hq => {
            let entry = HqEntry::new(spec.hq_row)?;
            hq_solver(
                need_envelope()?,
                &entry,
                pen.operator(),
                Some(pen.offset()),
                pen.weight(),
                spec.hq_mode,
                x0,
                cfg,
            )?
        }
        SolverKind::Cyclic => unreachable!("handled before dispatch"),
    };
    Ok(trace)
}

/// Default penalty of a simulated family: `0.1·σ_max(A)` for the logistic
/// families, 1 for Poisson, and `0.1·λ_max(q)` for the bridge family.
pub fn default_penalty(family: SimFamily, data: &SimData, q: f64) -> Result<(PenaltyKind, f64)> {
    Ok(match family {
        SimFamily::LogisticL1 => (PenaltyKind::L1, 0.1 * spectral_norm(&data.a, 1e-10, 10_000)?),
        SimFamily::LogitFused => (PenaltyKind::Fused, 0.1 * spectral_norm(&data.a, 1e-10, 10_000)?),
        SimFamily::PoissonFused => (PenaltyKind::Fused, 1.0),
        SimFamily::LqBridge => (PenaltyKind::Lq, 0.1 * lq_lambda_max(&data.a, &data.y, q)?),
    })
}

/// Builds the composite problem of a simulated family.
pub fn simulated_problem(spec: &SimSpec, data: &SimData, weight: Option<f64>, q: f64) -> Result<Problem> {
    let (kind, default_weight) = default_penalty(spec.family, data, q)?;
    let weight = weight.unwrap_or(default_weight);
    let family = match spec.family {
        SimFamily::LogisticL1 | SimFamily::LogitFused => LossFamily::Logistic,
        SimFamily::PoissonFused => LossFamily::Poisson,
        SimFamily::LqBridge => LossFamily::Gaussian,
    };
    let penalty = build_penalty(kind, spec.d, weight, q)?;
    Problem::new(family, data.a.clone(), data.y.clone(), Some(data.trials.clone()), penalty)
}

/// Summary of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub family: String,
    pub solver: String,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub penalty_weight: f64,
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub support: usize,
    /// `‖x̂ − x_true‖²/d`.
    pub mse: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub trace: SolverTrace,
    pub summary: RunSummary,
}

/// Generates the instance, runs the solver from zero and summarizes.
/// Solver failures carry the spec in their message.
pub fn run_experiment(spec: &SimSpec, solver: &SolverSpec, weight: Option<f64>, q: f64) -> Result<ExperimentRun> {
    let attach = |e: Error| Error::Experiment {
        context: format!("{} ({:?}, solver {})", spec.family.name(), spec, solver.kind.name()),
        source: Box::new(e),
    };
    let data = generate(spec).map_err(attach)?;
    let problem = simulated_problem(spec, &data, weight, q).map_err(attach)?;
    let trace = solve(&problem, solver, &vec![0.0; spec.d]).map_err(attach)?;
    let final_objective = problem.objective(&trace.x).map_err(attach)?;
    let summary = RunSummary {
        family: spec.family.name().into(),
        solver: solver.kind.name().into(),
        n: spec.n,
        d: spec.d,
        seed: spec.seed,
        penalty_weight: problem.penalty.weight(),
        final_objective,
        iterations: trace.iterations,
        converged: trace.converged,
        support: support_size(&trace.x),
        mse: mse(&trace.x, &data.x_true),
    };
    Ok(ExperimentRun { trace, summary })
}

/// First 1-based iteration whose recorded objective is at most `target`.
pub fn iterations_to_target(trace: &SolverTrace, target: f64) -> Option<usize> {
    trace.records.iter().position(|r| r.objective <= target).map(|i| i + 1)
}

pub fn support_size(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

fn mse(x: &[f64], truth: &[f64]) -> f64 {
    x.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
        return Err(Error::Config(format!(
            "log grid needs 0 < lo < hi and at least 2 points (lo {lo}, hi {hi}, n {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Smallest `λ` at which cyclic descent started from zero keeps every
/// coefficient at zero: coordinate `j` stays put while
/// `|Aⱼᵀy|/‖Aⱼ‖² < h(λ/‖Aⱼ‖², q)`, with `h(λ) = (2 − q)/(2(1 − q))·b(λ)` and
/// `b(λ) = (2λ(1 − q))^{1/(2−q)}`.
pub fn lq_lambda_max(a: &DenseMatrix, y: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Config(format!("q must lie in (0, 1), got {q}")));
    }
    let aty = a.matvec_t(y)?;
    let mut best = 0.0f64;
    for (j, g) in aty.iter().enumerate() {
        let c: f64 = a.column(j).iter().map(|v| v * v).sum();
        if c == 0.0 {
            continue;
        }
        let u = g.abs() / c;
        let b = u * 2.0 * (1.0 - q) / (2.0 - q);
        let lambda = b.powf(2.0 - q) / (2.0 * (1.0 - q));
        best = best.max(c * lambda);
    }
    Ok(best)
}

/// The default grid: 50 log-spaced points over `[1e-4, 2]·λ_max`.
pub fn default_lambda_grid(lambda_max: f64) -> Result<Vec<f64>> {
    log_grid(1e-4 * lambda_max, 2.0 * lambda_max, 50)
}

/// One `(λ, q)` cell of a path or surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCell {
    pub lambda: f64,
    pub q: f64,
    pub x: Vec<f64>,
    pub support: usize,
    /// Estimation MSE `‖x̂ − x_true‖²/d` when the truth is known, otherwise
    /// the in-sample residual MSE `‖y − Ax̂‖²/n`.
    pub mse: f64,
    pub objective: f64,
    /// Failure or non-convergence note; the cell still holds the last iterate.
    pub error: Option<String>,
}

/// Solutions over a `λ × q` grid; cells are stored q-major with `λ`
/// ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationPath {
    pub lambdas: Vec<f64>,
    pub qs: Vec<f64>,
    pub names: Vec<String>,
    pub cells: Vec<PathCell>,
}

impl RegularizationPath {
    pub fn cell(&self, qi: usize, li: usize) -> &PathCell {
        &self.cells[qi * self.lambdas.len() + li]
    }

    /// Coefficient `j` along `λ` at the `qi`-th `q`.
    pub fn coefficient(&self, qi: usize, j: usize) -> Vec<f64> {
        (0..self.lambdas.len()).map(|li| self.cell(qi, li).x[j]).collect()
    }
}

/// Settings for path and surface runs.
#[derive(Debug, Clone, Copy)]
pub struct PathOptions {
    pub cfg: SolverConfig,
    /// Start each cell from the previous (larger) `λ`'s solution.
    pub warm_start: bool,
    pub threads: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            cfg: SolverConfig::default().with_tol(1e-10).with_max_iter(100_000),
            warm_start: true,
            threads: 1,
        }
    }
}

fn check_increasing(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{name} grid must be non-empty, finite and strictly increasing")));
    }
    Ok(())
}

/// Bridge-penalty path for one `q`, solved from the largest `λ` downwards.
/// `λ = 0` gives the least-squares fit.
fn lq_path_for_q(
    a: &DenseMatrix,
    y: &[f64],
    truth: Option<&[f64]>,
    q: f64,
    lambdas: &[f64],
    opts: &PathOptions,
) -> Vec<PathCell> {
    let d = a.cols();
    let mut cells: Vec<Option<PathCell>> = vec![None; lambdas.len()];
    let mut start = vec![0.0; d];
    for (li, &lambda) in lambdas.iter().enumerate().rev() {
        let x0 = if opts.warm_start { start.clone() } else { vec![0.0; d] };
        let (x, error) = match solve_lq_cell(a, y, q, lambda, &x0, &opts.cfg) {
            Ok((x, None)) => (x, None),
            Ok((x, Some(note))) => (x, Some(note)),
            Err(e) => (x0.clone(), Some(e.to_string())),
        };
        let objective = if lambda > 0.0 {
            LqEntry::new(q, lambda)
                .and_then(|e| lq_objective(a, y, &e, &x))
                .unwrap_or(f64::NAN)
        } else {
            residual_sq(a, y, &x) / 2.0
        };
        let mse = match truth {
            Some(t) => mse(&x, t),
            None => residual_sq(a, y, &x) / a.rows() as f64,
        };
        start = x.clone();
        cells[li] = Some(PathCell {
            lambda,
            q,
            support: support_size(&x),
            x,
            mse,
            objective,
            error,
        });
    }
    cells.into_iter().map(|c| c.expect("every cell solved")).collect()
}

fn residual_sq(a: &DenseMatrix, y: &[f64], x: &[f64]) -> f64 {
    match a.matvec(x) {
        Ok(ax) => ax.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum(),
        Err(_) => f64::NAN,
    }
}

fn solve_lq_cell(
    a: &DenseMatrix,
    y: &[f64],
    q: f64,
    lambda: f64,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Option<String>)> {
    if lambda == 0.0 {
        let x = solve_spd(&a.gram(), &a.matvec_t(y)?)?;
        return Ok((x, None));
    }
    let entry = LqEntry::new(q, lambda)?;
    let t = cyclic_descent_lq(a, y, &entry, x0, cfg)?;
    let note = (!t.converged).then(|| format!("not converged after {} cycles", t.iterations));
    Ok((t.x, note))
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `log10 MSE` surface over `λ × q` on simulated bridge data. Each `q` is an
/// independent warm-started path; failed cells are recorded, not fatal.
pub fn lq_mse_surface(data: &SimData, lambdas: &[f64], qs: &[f64], opts: &PathOptions) -> Result<RegularizationPath> {
    check_increasing("lambda", lambdas)?;
    check_increasing("q", qs)?;
    if lambdas[0] < 0.0 {
        return Err(Error::Config("lambda grid must be non-negative".into()));
    }
    if qs.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(Error::Config("q grid must lie in (0, 1)".into()));
    }
    let per_q: Vec<Vec<PathCell>> = with_pool(opts.threads, || {
        qs.par_iter()
            .map(|&q| lq_path_for_q(&data.a, &data.y, Some(&data.x_true), q, lambdas, opts))
            .collect()
    })?;
    Ok(RegularizationPath {
        lambdas: lambdas.to_vec(),
        qs: qs.to_vec(),
        names: (1..=data.a.cols()).map(|j| format!("x{j}")).collect(),
        cells: per_q.into_iter().flatten().collect(),
    })
}

/// Reads the prostate file: `lpsa` response, the eight clinical predictors,
/// at least 20 rows; predictors standardized and response centered.
pub fn load_prostate(path: &Path) -> Result<Dataset> {
    let mut data = ingest_csv(path, Some(PROSTATE_RESPONSE), Some(&PROSTATE_PREDICTORS))?;
    if data.y.len() < 20 {
        return Err(Error::data(path, format!("{} rows, need at least 20", data.y.len())));
    }
    standardize(&mut data.a, &mut data.y).map_err(|e| Error::data(path, e.to_string()))?;
    Ok(data)
}

/// Bridge-penalty coefficient path on a (standardized) dataset.
pub fn prostate_path(data: &Dataset, q: f64, lambdas: &[f64], opts: &PathOptions) -> Result<RegularizationPath> {
    check_increasing("lambda", lambdas)?;
    if lambdas[0] < 0.0 {
        return Err(Error::Config("lambda grid must be non-negative".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Config(format!("q must lie in (0, 1), got {q}")));
    }
    let cells = lq_path_for_q(&data.a, &data.y, None, q, lambdas, opts);
    Ok(RegularizationPath {
        lambdas: lambdas.to_vec(),
        qs: vec![q],
        names: data.names.clone(),
        cells,
    })
}

/// A coefficient leaving the model discontinuously between grid points
/// `lambda_index` and `lambda_index + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub coefficient: usize,
    pub lambda_index: usize,
    /// `|x(λₖ)|` just before the exit.
    pub size: f64,
    /// Largest change of the same coefficient over the neighboring `λ` steps.
    pub neighbor: f64,
}

/// Exits (nonzero at `λₖ`, zero at `λₖ₊₁`) whose size exceeds `ratio` times
/// the coefficient's change over the adjacent `λ` steps.
pub fn detect_jumps(path: &RegularizationPath, qi: usize, ratio: f64) -> Vec<Jump> {
    let m = path.lambdas.len();
    let mut jumps = Vec::new();
    if m < 2 {
        return jumps;
    }
    let d = path.cell(qi, 0).x.len();
    for j in 0..d {
        let c = path.coefficient(qi, j);
        let delta = |k: usize| (c[k + 1] - c[k]).abs();
        for k in 0..m - 1 {
            if c[k] != 0.0 && c[k + 1] == 0.0 {
                let before = if k > 0 { delta(k - 1) } else { 0.0 };
                let after = if k + 2 < m { delta(k + 1) } else { 0.0 };
                let neighbor = before.max(after);
                let size = delta(k);
                if size > ratio * neighbor {
                    jumps.push(Jump {
                        coefficient: j,
                        lambda_index: k,
                        size,
                        neighbor,
                    });
                }
            }
        }
    }
    jumps
}
