//! Losses, composite penalties, Bregman divergences and half-quadratic rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, check_positive, Error, Result};
use crate::linalg::{
    dist_inf, dot, largest_eigenvalue_psd, norm_inf, spectral_norm, Cholesky, DenseMatrix,
    NORM_MAX_ITER, NORM_TOL,
};
use crate::prox::{
    prox_quadratic, prox_tv1d, sgn, ProxMap, Proximable, ScalarPenalty,
};

/// A smooth loss `l(x)`.
pub trait Loss {
    fn dim(&self) -> usize;

    /// `(l(x), ∇l(x))`.
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.value_grad(x).map(|(v, _)| v)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_grad(x).map(|(_, g)| g)
    }

    /// Global Lipschitz constant of `∇l`, when one exists.
    fn lipschitz_bound(&self) -> Option<f64>;

    fn hessian(&self, x: &[f64]) -> Result<DenseMatrix>;
}

impl<T: Loss + ?Sized> Loss for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        (**self).value_grad(x)
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(x)
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        (**self).lipschitz_bound()
    }
    fn hessian(&self, x: &[f64]) -> Result<DenseMatrix> {
        (**self).hessian(x)
    }
}

/// `l(x) = ½xᵀPx + qᵀx + r` with `P` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadraticLoss {
    p: DenseMatrix,
    q: Vec<f64>,
    r: f64,
    lipschitz: f64,
}

impl QuadraticLoss {
    pub fn new(p: DenseMatrix, q: Vec<f64>, r: f64) -> Result<Self> {
        check_len("QuadraticLoss q", p.rows(), q.len())?;
        if !p.is_symmetric(1e-12 * (1.0 + p.max_abs_row_sum())) {
            return Err(Error::Unsupported(format!(
                "QuadraticLoss needs a symmetric P ({}x{})",
                p.rows(),
                p.cols()
            )));
        }
        if !r.is_finite() || q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("QuadraticLoss q/r"));
        }
        let lipschitz = largest_eigenvalue_psd(&p, NORM_TOL, NORM_MAX_ITER)?;
        Ok(QuadraticLoss { p, q, r, lipschitz })
    }

    /// `½(y − Ax)ᵀΩ(y − Ax)` expanded as `P = AᵀΩA`, `q = −AᵀΩy`, `r = yᵀΩy/2`.
    /// `omega = None` means `Ω = I`.
    pub fn weighted_least_squares(
        a: &DenseMatrix,
        y: &[f64],
        omega: Option<&DenseMatrix>,
    ) -> Result<Self> {
        check_len("weighted_least_squares y", a.rows(), y.len())?;
        let (p, wy) = match omega {
            None => (a.gram(), y.to_vec()),
            Some(w) => {
                check_len("weighted_least_squares omega", a.rows(), w.rows())?;
                let p = a.transpose().matmul(&w.matmul(a)?)?;
                // Symmetrize against rounding in the triple product.
                let mut ps = p.clone();
                for i in 0..p.rows() {
                    for j in 0..p.cols() {
                        ps.set(i, j, 0.5 * (p.get(i, j) + p.get(j, i)));
                    }
                }
                (ps, w.matvec(y)?)
            }
        };
        let q: Vec<f64> = a.matvec_t(&wy)?.into_iter().map(|v| -v).collect();
        let r = 0.5 * dot(y, &wy);
        Self::new(p, q, r)
    }

    /// Same curvature, new linear term and offset (keeps the cached bound).
    pub fn with_linear(&self, q: Vec<f64>, r: f64) -> Result<Self> {
        check_len("QuadraticLoss::with_linear", self.q.len(), q.len())?;
        Ok(QuadraticLoss {
            p: self.p.clone(),
            q,
            r,
            lipschitz: self.lipschitz,
        })
    }

    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

impl Loss for QuadraticLoss {
    fn dim(&self) -> usize {
        self.q.len()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_len("QuadraticLoss", self.q.len(), x.len())?;
        let mut g = self.p.matvec(x)?;
        let v = 0.5 * dot(x, &g) + dot(&self.q, x) + self.r;
        for (gi, qi) in g.iter_mut().zip(&self.q) {
            *gi += qi;
        }
        Ok((v, g))
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn hessian(&self, _x: &[f64]) -> Result<DenseMatrix> {
        Ok(self.p.clone())
    }
}

impl Proximable for QuadraticLoss {
    fn value(&self, x: &[f64]) -> f64 {
        Loss::value(self, x).unwrap_or(f64::NAN)
    }

    fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        check_positive("gamma", gamma)?;
        prox_quadratic(&self.p, &self.q, x, 1.0 / gamma)
    }

    fn prox_map(&self, gamma: f64) -> Result<ProxMap<'_>> {
        check_positive("gamma", gamma)?;
        let mut m = self.p.clone();
        m.add_diag(1.0 / gamma);
        let chol = Cholesky::factor(&m)?;
        Ok(alloc::boxed::Box::new(move |x: &[f64]| {
            check_len("QuadraticLoss prox", self.q.len(), x.len())?;
            let mut rhs: Vec<f64> = x
                .iter()
                .zip(&self.q)
                .map(|(xi, qi)| xi / gamma - qi)
                .collect();
            chol.solve_in_place(&mut rhs);
            Ok(rhs)
        }))
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + libm::log1p(libm::exp(-t.abs()))
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// Binomial-logistic loss `Σ mᵢ log(1 + e^{aᵢᵀx}) − yᵢ aᵢᵀx`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    a: DenseMatrix,
    y: Vec<f64>,
    m: Vec<f64>,
    lipschitz: f64,
}

impl LogisticLoss {
    /// `y` are success counts, `m` trial counts (`0 ≤ yᵢ ≤ mᵢ`, `mᵢ ≥ 1`).
    pub fn new(a: DenseMatrix, y: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        check_len("LogisticLoss y", a.rows(), y.len())?;
        check_len("LogisticLoss m", a.rows(), m.len())?;
        for (yi, mi) in y.iter().zip(&m) {
            if !(*mi >= 1.0 && mi.is_finite()) {
                return Err(Error::ParameterOutOfRange {
                    name: "m",
                    value: *mi,
                    expected: ">= 1",
                });
            }
            if !(*yi >= 0.0 && yi <= mi) {
                return Err(Error::ParameterOutOfRange {
                    name: "y",
                    value: *yi,
                    expected: "0 <= y <= m",
                });
            }
        }
        let s = spectral_norm(&a, NORM_TOL, NORM_MAX_ITER)?;
        let mmax = m.iter().cloned().fold(0.0, f64::max);
        Ok(LogisticLoss {
            a,
            y,
            m,
            lipschitz: mmax * s * s / 4.0,
        })
    }

    pub fn design(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn successes(&self) -> &[f64] {
        &self.y
    }

    pub fn trials(&self) -> &[f64] {
        &self.m
    }

    fn predictor(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("LogisticLoss x", self.a.cols(), x.len())?;
        let eta = self.a.matvec(x)?;
        if eta.iter().any(|e| !e.is_finite()) {
            return Err(Error::Overflow("logistic linear predictor"));
        }
        Ok(eta)
    }
}

impl Loss for LogisticLoss {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let eta = self.predictor(x)?;
        let mut v = 0.0;
        let mut resid = vec![0.0; eta.len()];
        for i in 0..eta.len() {
            v += self.m[i] * softplus(eta[i]) - self.y[i] * eta[i];
            resid[i] = self.m[i] * sigmoid(eta[i]) - self.y[i];
        }
        if !v.is_finite() {
            return Err(Error::Overflow("logistic loss"));
        }
        Ok((v, self.a.matvec_t(&resid)?))
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn hessian(&self, x: &[f64]) -> Result<DenseMatrix> {
        let eta = self.predictor(x)?;
        let w: Vec<f64> = eta
            .iter()
            .zip(&self.m)
            .map(|(e, m)| {
                let s = sigmoid(*e);
                m * s * (1.0 - s)
            })
            .collect();
        Ok(self.a.weighted_gram(Some(&w)))
    }
}

/// Poisson loss `Σ exp(aᵢᵀx) − yᵢ aᵢᵀx` (no global Lipschitz bound).
#[derive(Debug, Clone)]
pub struct PoissonLoss {
    a: DenseMatrix,
    y: Vec<f64>,
}

/// Largest linear predictor whose exponential is representable.
const EXP_LIMIT: f64 = 709.0;

impl PoissonLoss {
    pub fn new(a: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        check_len("PoissonLoss y", a.rows(), y.len())?;
        if let Some(bad) = y.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::ParameterOutOfRange {
                name: "y",
                value: *bad,
                expected: ">= 0",
            });
        }
        Ok(PoissonLoss { a, y })
    }

    pub fn design(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn counts(&self) -> &[f64] {
        &self.y
    }

    fn predictor(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("PoissonLoss x", self.a.cols(), x.len())?;
        let eta = self.a.matvec(x)?;
        if eta.iter().any(|e| !(e.is_finite() && *e <= EXP_LIMIT)) {
            return Err(Error::Overflow("Poisson rate exp(aᵀx)"));
        }
        Ok(eta)
    }
}

impl Loss for PoissonLoss {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let eta = self.predictor(x)?;
        let mut v = 0.0;
        let mut resid = vec![0.0; eta.len()];
        for i in 0..eta.len() {
            let mu = libm::exp(eta[i]);
            v += mu - self.y[i] * eta[i];
            resid[i] = mu - self.y[i];
        }
        if !v.is_finite() {
            return Err(Error::Overflow("Poisson loss"));
        }
        Ok((v, self.a.matvec_t(&resid)?))
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    fn hessian(&self, x: &[f64]) -> Result<DenseMatrix> {
        let eta = self.predictor(x)?;
        let w: Vec<f64> = eta.iter().map(|e| libm::exp(*e)).collect();
        Ok(self.a.weighted_gram(Some(&w)))
    }
}

/// Prox of a smooth loss computed by damped Newton iterations, for losses
/// without a closed-form prox (logistic, Poisson).
#[derive(Debug, Clone)]
pub struct NewtonProx<L> {
    pub loss: L,
    /// Stationarity tolerance on the prox subproblem gradient.
    pub tol: f64,
    pub max_iter: usize,
}

impl<L: Loss> NewtonProx<L> {
    pub fn new(loss: L) -> Self {
        NewtonProx {
            loss,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl<L: Loss> Proximable for NewtonProx<L> {
    fn value(&self, x: &[f64]) -> f64 {
        self.loss.value(x).unwrap_or(f64::INFINITY)
    }

    fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        check_positive("gamma", gamma)?;
        let obj = |z: &[f64]| -> f64 {
            match self.loss.value(z) {
                Ok(v) => v + dist_sq(z, x) / (2.0 * gamma),
                Err(_) => f64::INFINITY,
            }
        };
        let mut z = x.to_vec();
        let scale = 1.0 + norm_inf(x);
        for _ in 0..self.max_iter {
            let (v, mut g) = self.loss.value_grad(&z)?;
            for i in 0..z.len() {
                g[i] += (z[i] - x[i]) / gamma;
            }
            if norm_inf(&g) <= self.tol * scale {
                return Ok(z);
            }
            let mut h = self.loss.hessian(&z)?;
            h.add_diag(1.0 / gamma);
            let step = Cholesky::factor(&h)?.solve(&g)?;
            let f0 = v + dist_sq(&z, x) / (2.0 * gamma);
            let slope = -dot(&g, &step);
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                if obj(&cand) <= f0 + 1e-4 * t * slope || t < 1e-12 {
                    z = cand;
                    break;
                }
                t *= 0.5;
            }
        }
        Err(Error::NoConvergence {
            what: "Newton prox of smooth loss",
            iterations: self.max_iter,
            estimate: norm_inf(&z),
        })
    }
}

impl<L: Loss> Loss for NewtonProx<L> {
    fn dim(&self) -> usize {
        self.loss.dim()
    }
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.loss.value_grad(x)
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        self.loss.lipschitz_bound()
    }
    fn hessian(&self, x: &[f64]) -> Result<DenseMatrix> {
        self.loss.hessian(x)
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The linear map `B` inside a composite penalty `φ(Bx − b)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    /// `I_d`.
    Identity(usize),
    /// `(d − 1) × d` first differences.
    FirstDifference(usize),
    Dense(DenseMatrix),
}

impl LinearOperator {
    pub fn rows(&self) -> usize {
        match self {
            LinearOperator::Identity(d) => *d,
            LinearOperator::FirstDifference(d) => d.saturating_sub(1),
            LinearOperator::Dense(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearOperator::Identity(d) | LinearOperator::FirstDifference(d) => *d,
            LinearOperator::Dense(m) => m.cols(),
        }
    }

    /// `Bx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("LinearOperator::apply", self.cols(), x.len())?;
        Ok(match self {
            LinearOperator::Identity(_) => x.to_vec(),
            LinearOperator::FirstDifference(_) => x.windows(2).map(|w| w[1] - w[0]).collect(),
            LinearOperator::Dense(m) => m.matvec(x)?,
        })
    }

    /// `Bᵀv`.
    pub fn apply_t(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("LinearOperator::apply_t", self.rows(), v.len())?;
        Ok(match self {
            LinearOperator::Identity(_) => v.to_vec(),
            LinearOperator::FirstDifference(d) => {
                let mut out = vec![0.0; *d];
                for (i, vi) in v.iter().enumerate() {
                    out[i] -= vi;
                    out[i + 1] += vi;
                }
                out
            }
            LinearOperator::Dense(m) => m.matvec_t(v)?,
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            LinearOperator::Identity(d) => DenseMatrix::identity(*d),
            LinearOperator::FirstDifference(d) => {
                crate::linalg::first_difference_matrix(*d).unwrap_or(DenseMatrix::zeros(0, *d))
            }
            LinearOperator::Dense(m) => m.clone(),
        }
    }

    /// `σ_max(B)`; exact for the structured operators.
    pub fn spectral_norm(&self) -> Result<f64> {
        match self {
            LinearOperator::Identity(d) => Ok(if *d == 0 { 0.0 } else { 1.0 }),
            LinearOperator::FirstDifference(d) => {
                let d = *d as f64;
                Ok(2.0 * libm::sin(core::f64::consts::PI * (d - 1.0) / (2.0 * d)))
            }
            LinearOperator::Dense(m) => spectral_norm(m, NORM_TOL, NORM_MAX_ITER),
        }
    }
}

/// `weight · Σⱼ φ((Bx − b)ⱼ)`.
#[derive(Debug, Clone)]
pub struct CompositePenalty {
    op: LinearOperator,
    offset: Vec<f64>,
    phi: ScalarPenalty,
    weight: f64,
}

impl CompositePenalty {
    /// `weight = 0` is allowed and means "no penalty".
    pub fn new(
        op: LinearOperator,
        offset: Option<Vec<f64>>,
        phi: ScalarPenalty,
        weight: f64,
    ) -> Result<Self> {
        phi.validate()?;
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "weight",
                value: weight,
                expected: ">= 0",
            });
        }
        let offset = offset.unwrap_or_else(|| vec![0.0; op.rows()]);
        check_len("CompositePenalty offset", op.rows(), offset.len())?;
        Ok(CompositePenalty {
            op,
            offset,
            phi,
            weight,
        })
    }

    /// `weight·‖x‖₁`.
    pub fn lasso(d: usize, weight: f64) -> Result<Self> {
        Self::new(
            LinearOperator::Identity(d),
            None,
            ScalarPenalty::Laplace { omega: 1.0 },
            weight,
        )
    }

    /// `weight·Σ|x_{i+1} − x_i|`.
    pub fn fused_lasso(d: usize, weight: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::ParameterOutOfRange {
                name: "d",
                value: d as f64,
                expected: ">= 2",
            });
        }
        Self::new(
            LinearOperator::FirstDifference(d),
            None,
            ScalarPenalty::Laplace { omega: 1.0 },
            weight,
        )
    }

    /// `weight·Σ|x_i|^q`.
    pub fn bridge(d: usize, q: f64, weight: f64) -> Result<Self> {
        Self::new(
            LinearOperator::Identity(d),
            None,
            ScalarPenalty::Bridge { q },
            weight,
        )
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.op
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn phi(&self) -> &ScalarPenalty {
        &self.phi
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.op.cols()
    }

    /// The separable part `weight·Σφ(vⱼ − bⱼ)` as a function of `v = Bx`.
    pub fn outer(&self) -> SeparablePenalty {
        SeparablePenalty {
            phi: self.phi,
            offset: self.offset.clone(),
            weight: self.weight,
        }
    }

    /// `weight · Σⱼ φ((Bx − b)ⱼ)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if self.weight == 0.0 {
            check_len("CompositePenalty", self.op.cols(), x.len())?;
            return Ok(0.0);
        }
        let bx = self.op.apply(x)?;
        Ok(self.weight
            * bx
                .iter()
                .zip(&self.offset)
                .map(|(v, b)| self.phi.value(v - b))
                .sum::<f64>())
    }

    fn offset_is_zero(&self) -> bool {
        self.offset.iter().all(|b| *b == 0.0)
    }

    /// Inner accelerated dual iteration for `prox_{c·Σφ(B· − b)}` with convex φ.
    fn dual_prox(&self, x: &[f64], c: f64) -> Result<Vec<f64>> {
        if !self.phi.is_convex() {
            return Err(Error::Unsupported(format!(
                "prox of a non-convex {} penalty composed with a general operator",
                self.phi.name()
            )));
        }
        let norm = self.op.spectral_norm()?;
        if norm == 0.0 {
            return Ok(x.to_vec());
        }
        let tau = 1.0 / (norm * norm);
        let k = self.op.rows();
        let mut u = vec![0.0; k];
        let mut w = u.clone();
        let mut t = 1.0;
        let mut z_prev = x.to_vec();
        let scale = 1.0 + norm_inf(x);
        for _ in 0..200_000 {
            let bt = self.op.apply_t(&w)?;
            let z: Vec<f64> = x.iter().zip(&bt).map(|(a, b)| a - b).collect();
            let bz = self.op.apply(&z)?;
            let mut u_new = vec![0.0; k];
            for j in 0..k {
                let v = w[j] + tau * bz[j];
                let inner = self.phi.prox(v / tau - self.offset[j], c / tau)?.select();
                u_new[j] = v - tau * (self.offset[j] + inner);
            }
            let t_new = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
            let beta = (t - 1.0) / t_new;
            for j in 0..k {
                w[j] = u_new[j] + beta * (u_new[j] - u[j]);
            }
            u = u_new;
            t = t_new;
            let zu: Vec<f64> = x
                .iter()
                .zip(self.op.apply_t(&u)?)
                .map(|(a, b)| a - b)
                .collect();
            if dist_inf(&zu, &z_prev) <= 1e-13 * scale {
                return Ok(zu);
            }
            z_prev = zu;
        }
        Err(Error::NoConvergence {
            what: "composite prox dual iteration",
            iterations: 200_000,
            estimate: norm_inf(&z_prev),
        })
    }
}

impl Proximable for CompositePenalty {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }

    fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        check_positive("gamma", gamma)?;
        check_len("CompositePenalty prox", self.op.cols(), x.len())?;
        if self.weight == 0.0 {
            return Ok(x.to_vec());
        }
        let c = gamma * self.weight;
        match (&self.op, self.phi) {
            (LinearOperator::Identity(_), phi) => x
                .iter()
                .zip(&self.offset)
                .map(|(xi, bi)| phi.prox(xi - bi, c).map(|r| bi + r.select()))
                .collect(),
            (LinearOperator::FirstDifference(_), ScalarPenalty::Laplace { omega })
                if self.offset_is_zero() =>
            {
                Ok(prox_tv1d(x, c * omega))
            }
            _ => self.dual_prox(x, c),
        }
    }
}

/// `weight·Σⱼ φ(vⱼ − bⱼ)` on the range space of a composite penalty.
#[derive(Debug, Clone)]
pub struct SeparablePenalty {
    pub phi: ScalarPenalty,
    pub offset: Vec<f64>,
    pub weight: f64,
}

impl Proximable for SeparablePenalty {
    fn value(&self, v: &[f64]) -> f64 {
        self.weight
            * v.iter()
                .zip(&self.offset)
                .map(|(a, b)| self.phi.value(a - b))
                .sum::<f64>()
    }

    fn prox(&self, v: &[f64], gamma: f64) -> Result<Vec<f64>> {
        check_positive("gamma", gamma)?;
        check_len("SeparablePenalty prox", self.offset.len(), v.len())?;
        if self.weight == 0.0 {
            return Ok(v.to_vec());
        }
        v.iter()
            .zip(&self.offset)
            .map(|(a, b)| {
                self.phi
                    .prox(a - b, gamma * self.weight)
                    .map(|r| b + r.select())
            })
            .collect()
    }
}

/// `D(x, y) = d(x) − d(y) − d′(y)(x − y)` for a strictly convex generator `d`.
#[derive(Debug, Clone, Copy)]
pub struct BregmanDivergence {
    name: &'static str,
    d: fn(f64) -> f64,
    d_prime: fn(f64) -> f64,
    first_ok: fn(f64) -> bool,
    second_ok: fn(f64) -> bool,
}

impl BregmanDivergence {
    pub fn new(
        name: &'static str,
        d: fn(f64) -> f64,
        d_prime: fn(f64) -> f64,
        first_ok: fn(f64) -> bool,
        second_ok: fn(f64) -> bool,
    ) -> Self {
        BregmanDivergence {
            name,
            d,
            d_prime,
            first_ok,
            second_ok,
        }
    }

    /// `d(t) = t²/2`: the squared distance `(x − y)²/2`.
    pub fn squared() -> Self {
        Self::new("squared", |t| 0.5 * t * t, |t| t, |_| true, |_| true)
    }

    /// `d(μ) = μ log μ − μ`: `D(y, μ) = y log(y/μ) − y + μ`, with `0 log 0 = 0`.
    pub fn poisson() -> Self {
        Self::new(
            "poisson",
            |t| if t == 0.0 { 0.0 } else { t * libm::log(t) - t },
            libm::log,
            |t| t >= 0.0,
            |t| t > 0.0,
        )
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Whether `v` may appear as the second argument (the divergence's base point).
    pub fn in_domain(&self, v: f64) -> bool {
        v.is_finite() && (self.second_ok)(v)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && (self.first_ok)(x)) {
            return Err(Error::OutsideDomain {
                what: "Bregman divergence (first argument)",
                value: x,
            });
        }
        if !self.in_domain(y) {
            return Err(Error::OutsideDomain {
                what: "Bregman divergence (second argument)",
                value: y,
            });
        }
        let v = (self.d)(x) - (self.d)(y) - (self.d_prime)(y) * (x - y);
        Ok(v.max(0.0))
    }
}

/// `bregman(div, x, y) = D(x, y)`.
pub fn bregman(div: &BregmanDivergence, x: f64, y: f64) -> Result<f64> {
    div.eval(x, y)
}

/// Curvature of the logistic majorizer, `λ(s) = tanh(s/2)/(4s)`, `λ(0) = 1/8`.
///
/// `log(1 + eᵗ) ≤ t/2 + log(2cosh(s/2)) + λ(s)(t² − s²)` for all `t`.
pub fn logit_curvature(s: f64) -> f64 {
    if s.abs() < 1e-4 {
        0.125 - s * s / 96.0
    } else {
        libm::tanh(0.5 * s) / (4.0 * s)
    }
}

/// Half-quadratic penalty rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HqRow {
    /// `|t|^α`, `α ∈ (1, 2]`.
    Power { alpha: f64 },
    /// `√(α + t²)`.
    Charbonnier { alpha: f64 },
    /// `|t|/α − log(1 + |t|/α)`.
    LogRatio { alpha: f64 },
    /// `t²/2` for `|t| ≤ α`, `α|t| − α²/2` beyond.
    Huber { alpha: f64 },
    /// `log cosh(αt)`.
    LogCosh { alpha: f64 },
    /// `−1/(1 + |t|)`.
    Rational,
    /// `−1/(1 + √t)`, `t ≥ 0`.
    RationalSqrt,
}

impl HqRow {
    pub fn name(&self) -> &'static str {
        match self {
            HqRow::Power { .. } => "power",
            HqRow::Charbonnier { .. } => "charbonnier",
            HqRow::LogRatio { .. } => "log-ratio",
            HqRow::Huber { .. } => "huber",
            HqRow::LogCosh { .. } => "log-cosh",
            HqRow::Rational => "rational",
            HqRow::RationalSqrt => "rational-sqrt",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (name, alpha, ok) = match *self {
            HqRow::Power { alpha } => ("alpha", alpha, alpha > 1.0 && alpha <= 2.0),
            HqRow::Charbonnier { alpha }
            | HqRow::LogRatio { alpha }
            | HqRow::Huber { alpha }
            | HqRow::LogCosh { alpha } => ("alpha", alpha, alpha > 0.0 && alpha.is_finite()),
            HqRow::Rational | HqRow::RationalSqrt => return Ok(()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange {
                name,
                value: alpha,
                expected: "in the row's range",
            })
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !t.is_finite() || (matches!(self, HqRow::RationalSqrt) && t < 0.0) {
            return Err(Error::OutsideDomain {
                what: "half-quadratic row",
                value: t,
            });
        }
        Ok(())
    }

    /// `φ(t)`.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.validate()?;
        self.check_domain(t)?;
        let a = t.abs();
        Ok(match *self {
            HqRow::Power { alpha } => libm::pow(a, alpha),
            HqRow::Charbonnier { alpha } => libm::sqrt(alpha + t * t),
            HqRow::LogRatio { alpha } => a / alpha - libm::log1p(a / alpha),
            HqRow::Huber { alpha } => {
                if a <= alpha {
                    0.5 * t * t
                } else {
                    alpha * a - 0.5 * alpha * alpha
                }
            }
            HqRow::LogCosh { alpha } => {
                let u = (alpha * t).abs();
                u + libm::log1p(libm::exp(-2.0 * u)) - core::f64::consts::LN_2
            }
            HqRow::Rational => -1.0 / (1.0 + a),
            HqRow::RationalSqrt => -1.0 / (1.0 + libm::sqrt(t)),
        })
    }

    /// `φ′(t)`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.validate()?;
        self.check_domain(t)?;
        let a = t.abs();
        Ok(match *self {
            HqRow::Power { alpha } => alpha * libm::pow(a, alpha - 1.0) * sgn(t),
            HqRow::Charbonnier { alpha } => t / libm::sqrt(alpha + t * t),
            HqRow::LogRatio { alpha } => t / (alpha * (alpha + a)),
            HqRow::Huber { alpha } => {
                if a <= alpha {
                    t
                } else {
                    alpha * sgn(t)
                }
            }
            HqRow::LogCosh { alpha } => alpha * libm::tanh(alpha * t),
            HqRow::Rational => sgn(t) / ((1.0 + a) * (1.0 + a)),
            HqRow::RationalSqrt => {
                if t == 0.0 {
                    return Err(Error::OutsideDomain {
                        what: "derivative of -1/(1+sqrt t) at 0",
                        value: t,
                    });
                }
                let r = libm::sqrt(t);
                1.0 / (2.0 * r * (1.0 + r) * (1.0 + r))
            }
        })
    }

    /// Multiplicative weight `σ(t) = φ′(t)/t`, with `σ(0) = φ″(0⁺)`.
    pub fn mult_weight(&self, t: f64) -> Result<f64> {
        self.validate()?;
        self.check_domain(t)?;
        if t != 0.0 {
            return Ok(self.derivative(t)? / t);
        }
        match *self {
            HqRow::Power { alpha: 2.0 } => Ok(2.0),
            HqRow::Power { .. } | HqRow::RationalSqrt => Err(Error::OutsideDomain {
                what: "multiplicative weight (infinite at 0)",
                value: t,
            }),
            HqRow::Charbonnier { alpha } => Ok(1.0 / libm::sqrt(alpha)),
            HqRow::LogRatio { alpha } => Ok(1.0 / (alpha * alpha)),
            HqRow::Huber { .. } => Ok(1.0),
            HqRow::LogCosh { alpha } => Ok(alpha * alpha),
            HqRow::Rational => Ok(-2.0),
        }
    }

    /// Additive weight `σ(t) = ct − φ′(t)`.
    pub fn add_weight(&self, t: f64, c: f64) -> Result<f64> {
        Ok(c * t - self.derivative(t)?)
    }

    /// Lipschitz constant of `φ′` where finite, else 1.
    pub fn default_c(&self) -> f64 {
        match *self {
            HqRow::Power { alpha: 2.0 } => 2.0,
            HqRow::Charbonnier { alpha } => 1.0 / libm::sqrt(alpha),
            HqRow::LogRatio { alpha } => 1.0 / (alpha * alpha),
            HqRow::Huber { .. } => 1.0,
            HqRow::LogCosh { alpha } => alpha * alpha,
            _ => 1.0,
        }
    }
}

/// A half-quadratic row with its additive-form constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HqEntry {
    pub row: HqRow,
    pub c: f64,
}

impl HqEntry {
    pub fn new(row: HqRow) -> Result<Self> {
        row.validate()?;
        Ok(HqEntry {
            row,
            c: row.default_c(),
        })
    }

    pub fn with_c(row: HqRow, c: f64) -> Result<Self> {
        row.validate()?;
        check_positive("c", c)?;
        Ok(HqEntry { row, c })
    }
}

/// `(σ_mult(t), σ_add(t))`.
pub fn hq_weights(entry: &HqEntry, t: f64) -> Result<(f64, f64)> {
    Ok((entry.row.mult_weight(t)?, entry.row.add_weight(t, entry.c)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::finite_diff_gradient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::new(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn quadratic_examples() {
        let l = QuadraticLoss::new(DenseMatrix::identity(2), vec![0.0, 0.0], 0.0).unwrap();
        let (v, g) = l.value_grad(&[3.0, 4.0]).unwrap();
        assert_eq!(v, 12.5);
        assert_eq!(g, vec![3.0, 4.0]);
        let l2 = QuadraticLoss::new(DenseMatrix::from_diag(&[2.0, 5.0]).unwrap(), vec![0.0; 2], 0.0)
            .unwrap();
        assert!((l2.lipschitz_bound().unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_prox_map_matches_prox() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 6, 4);
        let l = QuadraticLoss::weighted_least_squares(&a, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.3], None)
            .unwrap();
        let mut map = l.prox_map(0.7).unwrap();
        let x = [0.3, -0.2, 1.0, 2.0];
        assert!(dist_inf(&map(&x).unwrap(), &l.prox(&x, 0.7).unwrap()) < 1e-12);
    }

    #[test]
    fn weighted_least_squares_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 7, 3);
            let y: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b = random_matrix(&mut rng, 7, 7);
            let mut omega = b.gram();
            omega.add_diag(0.1);
            let l = QuadraticLoss::weighted_least_squares(&a, &y, Some(&omega)).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let r: Vec<f64> = y.iter().zip(a.matvec(&x).unwrap()).map(|(u, v)| u - v).collect();
            let direct = 0.5 * dot(&r, &omega.matvec(&r).unwrap());
            let v = Loss::value(&l, &x).unwrap();
            assert!((v - direct).abs() < 1e-10 * (1.0 + direct.abs()), "{v} vs {direct}");
        }
    }

    #[test]
    fn logistic_at_zero() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[-1.0, 0.5], &[0.3, 0.3]]).unwrap();
        let y = vec![1.0, 0.0, 2.0];
        let m = vec![1.0, 2.0, 3.0];
        let l = LogisticLoss::new(a.clone(), y.clone(), m.clone()).unwrap();
        let (v, g) = l.value_grad(&[0.0, 0.0]).unwrap();
        assert!((v - 6.0 * core::f64::consts::LN_2).abs() < 1e-14);
        let resid: Vec<f64> = m.iter().zip(&y).map(|(mi, yi)| mi / 2.0 - yi).collect();
        assert!(dist_inf(&g, &a.matvec_t(&resid).unwrap()) < 1e-15);
    }

    #[test]
    fn logistic_scalar_lipschitz() {
        let l = LogisticLoss::new(DenseMatrix::identity(1), vec![0.0], vec![1.0]).unwrap();
        assert!((l.lipschitz_bound().unwrap() - 0.25).abs() < 1e-12);
        // The Hessian peaks at x = 0 with p(1 − p) = 1/4.
        let h = l.hessian(&[0.0]).unwrap().get(0, 0);
        let fd = finite_diff_gradient(|x| l.gradient(x).unwrap()[0], &[0.0], 1e-5).unwrap()[0];
        assert!((h - 0.25).abs() < 1e-15 && (fd - 0.25).abs() < 1e-8);
    }

    #[test]
    fn logistic_rejects_bad_counts() {
        let a = DenseMatrix::identity(2);
        assert!(LogisticLoss::new(a.clone(), vec![3.0, 0.0], vec![2.0, 2.0]).is_err());
        assert!(LogisticLoss::new(a, vec![0.0, 0.0], vec![0.0, 2.0]).is_err());
    }

    #[test]
    fn logistic_finite_for_large_predictors() {
        let l = LogisticLoss::new(DenseMatrix::from_diag(&[700.0]).unwrap(), vec![1.0], vec![2.0])
            .unwrap();
        for x in [-1.0, 1.0] {
            let (v, g) = l.value_grad(&[x]).unwrap();
            assert!(v.is_finite() && g[0].is_finite());
        }
    }

    #[test]
    fn poisson_at_zero_and_overflow() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[2.0, 1.0], &[0.0, -1.0]]).unwrap();
        let y = vec![0.0, 3.0, 1.0];
        let l = PoissonLoss::new(a.clone(), y.clone()).unwrap();
        let (v, g) = l.value_grad(&[0.0, 0.0]).unwrap();
        assert_eq!(v, 3.0);
        let resid: Vec<f64> = y.iter().map(|yi| 1.0 - yi).collect();
        assert_eq!(g, a.matvec_t(&resid).unwrap());
        assert!(l.lipschitz_bound().is_none());
        assert!(matches!(l.value(&[400.0, 0.0]), Err(Error::Overflow(_))));
        assert!(PoissonLoss::new(a, vec![0.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 8, 5);
        let y: Vec<f64> = (0..8).map(|i| (i % 3) as f64).collect();
        let losses: Vec<alloc::boxed::Box<dyn Loss>> = vec![
            alloc::boxed::Box::new(QuadraticLoss::weighted_least_squares(&a, &y, None).unwrap()),
            alloc::boxed::Box::new(LogisticLoss::new(a.clone(), y.clone(), vec![2.0; 8]).unwrap()),
            alloc::boxed::Box::new(PoissonLoss::new(a.clone(), y.clone()).unwrap()),
        ];
        for l in &losses {
            for _ in 0..20 {
                let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
                let g = l.gradient(&x).unwrap();
                let fd = finite_diff_gradient(|z| l.value(z).unwrap(), &x, 1e-6).unwrap();
                let err = dist_inf(&g, &fd) / norm_inf(&g).max(1.0);
                assert!(err <= 1e-5, "relative error {err}");
            }
        }
    }

    #[test]
    fn newton_prox_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(&mut rng, 10, 4);
        let y: Vec<f64> = (0..10).map(|i| (i % 4) as f64).collect();
        let np = NewtonProx::new(PoissonLoss::new(a, y).unwrap());
        let x = [0.2, -0.1, 0.4, 0.0];
        let z = np.prox(&x, 0.5).unwrap();
        let g = np.loss.gradient(&z).unwrap();
        for i in 0..4 {
            assert!((g[i] + (z[i] - x[i]) / 0.5).abs() < 1e-9);
        }
        // With a quadratic loss it must agree with the closed form.
        let q = QuadraticLoss::new(DenseMatrix::from_diag(&[2.0, 1.0]).unwrap(), vec![1.0, -1.0], 0.0)
            .unwrap();
        let nq = NewtonProx::new(q.clone());
        assert!(dist_inf(&nq.prox(&[1.0, 2.0], 0.3).unwrap(), &q.prox(&[1.0, 2.0], 0.3).unwrap()) < 1e-12);
    }

    #[test]
    fn penalty_examples() {
        let l1 = CompositePenalty::lasso(2, 1.0).unwrap();
        assert_eq!(l1.eval(&[1.0, -2.0]).unwrap(), 3.0);
        let fused = CompositePenalty::fused_lasso(3, 1.0).unwrap();
        assert_eq!(fused.eval(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(fused.eval(&[0.0, 2.0, -1.0]).unwrap(), 5.0);
    }

    #[test]
    fn first_difference_operator_matches_dense() {
        let op = LinearOperator::FirstDifference(6);
        let dense = LinearOperator::Dense(op.to_dense());
        let x = [0.3, 1.0, -2.0, 4.0, 0.0, 0.5];
        assert_eq!(op.apply(&x).unwrap(), dense.apply(&x).unwrap());
        let v = [1.0, -1.0, 0.5, 2.0, 3.0];
        assert_eq!(op.apply_t(&v).unwrap(), dense.apply_t(&v).unwrap());
        let exact = op.spectral_norm().unwrap();
        let est = dense.spectral_norm().unwrap();
        assert!((exact - est).abs() < 1e-8);
    }

    #[test]
    fn general_composite_prox_matches_tv() {
        // Dense first differences go through the dual iteration; the
        // structured operator uses the direct TV algorithm.
        let fused = CompositePenalty::fused_lasso(8, 0.4).unwrap();
        let dense = CompositePenalty::new(
            LinearOperator::Dense(fused.operator().to_dense()),
            None,
            ScalarPenalty::Laplace { omega: 1.0 },
            0.4,
        )
        .unwrap();
        let x = [0.1, 1.5, 1.2, -0.3, 2.0, 2.1, -1.0, 0.4];
        let a = fused.prox(&x, 1.3).unwrap();
        let b = dense.prox(&x, 1.3).unwrap();
        assert!(dist_inf(&a, &b) < 1e-8, "{a:?} vs {b:?}");
    }

    #[test]
    fn composite_prox_with_offset() {
        let pen = CompositePenalty::new(
            LinearOperator::Identity(2),
            Some(vec![1.0, -1.0]),
            ScalarPenalty::Laplace { omega: 1.0 },
            0.5,
        )
        .unwrap();
        // b + soft(x − b, 0.5).
        assert_eq!(pen.prox(&[3.0, -1.2], 1.0).unwrap(), vec![2.5, -1.0]);
    }

    #[test]
    fn bregman_examples() {
        let sq = BregmanDivergence::squared();
        assert_eq!(bregman(&sq, 3.0, 1.0).unwrap(), 2.0);
        let po = BregmanDivergence::poisson();
        assert!(bregman(&po, 2.0, 2.0).unwrap().abs() < 1e-15);
        let e = core::f64::consts::E;
        assert!((bregman(&po, 1.0, e).unwrap() - (e - 2.0)).abs() < 1e-15);
        assert!(bregman(&po, 1.0, 0.0).is_err());
        assert!(bregman(&po, -1.0, 1.0).is_err());
        assert_eq!(bregman(&po, 0.0, 1.5).unwrap(), 1.5);
    }

    #[test]
    fn bregman_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for div in [BregmanDivergence::squared(), BregmanDivergence::poisson()] {
            for _ in 0..1000 {
                let x = rng.random_range(0.0..20.0);
                let y = rng.random_range(1e-6..20.0);
                assert!(div.eval(x, y).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn logit_curvature_majorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let s: f64 = rng.random_range(-8.0..8.0);
            let t: f64 = rng.random_range(-10.0..10.0);
            let bound = t / 2.0 + (2.0 * (s / 2.0).cosh()).ln() + logit_curvature(s) * (t * t - s * s);
            assert!(softplus(t) <= bound + 1e-12);
        }
        assert_eq!(logit_curvature(0.0), 0.125);
        assert!((logit_curvature(1e-3) - (0.5e-3f64).tanh() / 4e-3).abs() < 1e-15);
    }

    #[test]
    fn hq_examples() {
        let ch = HqEntry::new(HqRow::Charbonnier { alpha: 1.0 }).unwrap();
        assert_eq!(hq_weights(&ch, 0.0).unwrap().0, 1.0);
        let hu = HqEntry::new(HqRow::Huber { alpha: 1.0 }).unwrap();
        assert_eq!(hq_weights(&hu, 0.7).unwrap().0, 1.0);
        assert_eq!(hq_weights(&hu, -0.7).unwrap().0, 1.0);
        let lc = HqEntry::new(HqRow::LogCosh { alpha: 1.0 }).unwrap();
        assert_eq!(hq_weights(&lc, 0.0).unwrap().0, 1.0);
        assert!((hq_weights(&lc, 1e-6).unwrap().0 - 1.0).abs() < 1e-11);
        assert_eq!(HqRow::Rational.mult_weight(0.0).unwrap(), -2.0);
        assert!(HqRow::RationalSqrt.mult_weight(0.0).is_err());
        assert!(HqRow::RationalSqrt.mult_weight(-1.0).is_err());
        assert!(HqRow::Power { alpha: 1.5 }.mult_weight(0.0).is_err());
        assert!(HqRow::Power { alpha: 2.5 }.validate().is_err());
    }

    fn hq_rows() -> Vec<HqRow> {
        vec![
            HqRow::Power { alpha: 1.5 },
            HqRow::Power { alpha: 2.0 },
            HqRow::Charbonnier { alpha: 0.7 },
            HqRow::LogRatio { alpha: 0.8 },
            HqRow::Huber { alpha: 1.2 },
            HqRow::LogCosh { alpha: 1.5 },
            HqRow::Rational,
            HqRow::RationalSqrt,
        ]
    }

    #[test]
    fn hq_weights_match_table_formulas() {
        for t in [-2.5, -0.4, 0.3, 1.7, 3.2] {
            for row in hq_rows() {
                if matches!(row, HqRow::RationalSqrt) && t < 0.0 {
                    continue;
                }
                let d = finite_diff_gradient(|x| row.value(x[0]).unwrap(), &[t], 1e-6).unwrap()[0];
                let m = row.mult_weight(t).unwrap();
                assert!((m * t - d).abs() < 1e-7, "{row:?} t={t}");
                let c = row.default_c();
                assert!((row.add_weight(t, c).unwrap() - (c * t - d)).abs() < 1e-7);
            }
        }
        // Spot checks against the closed forms in the table.
        let t: f64 = 0.9;
        assert!((HqRow::Charbonnier { alpha: 0.7 }.mult_weight(t).unwrap() - 1.0 / (0.7 + t * t).sqrt()).abs() < 1e-15);
        assert!((HqRow::LogRatio { alpha: 0.8 }.mult_weight(t).unwrap() - 1.0 / (0.8 * (0.8 + t))).abs() < 1e-15);
        assert!((HqRow::Rational.mult_weight(t).unwrap() - 1.0 / (t * (t + 1.0) * (t + 1.0))).abs() < 1e-15);
        assert!((HqRow::RationalSqrt.mult_weight(t).unwrap() - 1.0 / (2.0 * t.powf(1.5) * (t.sqrt() + 1.0).powi(2))).abs() < 1e-14);
    }

    /// `min_s {½t²s + ψ(s)}` with `ψ(s) = sup_τ {φ(τ) − ½τ²s}` computed on grids.
    #[test]
    fn hq_envelope_identity() {
        let taus: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.005).collect();
        for row in [
            HqRow::Power { alpha: 2.0 },
            HqRow::Charbonnier { alpha: 0.7 },
            HqRow::LogRatio { alpha: 0.8 },
            HqRow::Huber { alpha: 1.2 },
            HqRow::LogCosh { alpha: 1.5 },
        ] {
            let s_max = row.mult_weight(0.0).unwrap();
            let ss: Vec<f64> = (1..=2000).map(|i| s_max * i as f64 / 2000.0).collect();
            let psi: Vec<f64> = ss
                .iter()
                .map(|s| {
                    taus.iter()
                        .map(|tau| row.value(*tau).unwrap() - 0.5 * tau * tau * s)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            for k in 0..20 {
                let t = 0.1 + 0.2 * k as f64;
                let env = ss
                    .iter()
                    .zip(&psi)
                    .map(|(s, p)| 0.5 * t * t * s + p)
                    .fold(f64::INFINITY, f64::min);
                let phi = row.value(t).unwrap();
                assert!((env - phi).abs() < 2e-3, "{row:?} t={t}: {env} vs {phi}");
            }
        }
    }

    /// Rows without a usable conjugate: σ(t) must be a stationary point of
    /// `s ↦ ½t²s + ψ(s)`, i.e. `ψ′(σ(t)) = −½t²`, which holds iff the pair
    /// `(t, σ(t))` satisfies `φ′(t) = t·σ(t)`.
    #[test]
    fn hq_stationarity_for_remaining_rows() {
        for row in [HqRow::Power { alpha: 1.5 }, HqRow::Rational, HqRow::RationalSqrt] {
            for k in 0..20 {
                let t = 0.15 + 0.2 * k as f64;
                let d = finite_diff_gradient(|x| row.value(x[0]).unwrap(), &[t], 1e-6).unwrap()[0];
                assert!((t * row.mult_weight(t).unwrap() - d).abs() < 1e-7);
            }
        }
    }
}
