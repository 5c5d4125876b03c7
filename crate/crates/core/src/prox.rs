//! Proximal operators.
//!
//! `prox_{γf}(x) = argmin_z f(z) + (1/2γ)‖z − x‖²`. Scalar operators act
//! coordinatewise on vectors through the [`Proximable`] trait.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{check_len, check_positive, Error, Result};
use crate::linalg::{scalar_root, Cholesky, DenseMatrix};

/// A function with a computable proximal operator.
///
/// `value` returns `+∞` outside the domain.
pub trait Proximable {
    fn value(&self, x: &[f64]) -> f64;
    fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>>;

    /// The prox at a fixed `γ`, for solvers that apply it repeatedly.
    /// Implementors with expensive setup (factorizations) override this.
    fn prox_map(&self, gamma: f64) -> Result<ProxMap<'_>> {
        check_positive("gamma", gamma)?;
        Ok(Box::new(move |x: &[f64]| self.prox(x, gamma)))
    }
}

/// A prox operator with its parameter fixed.
pub type ProxMap<'a> = Box<dyn FnMut(&[f64]) -> Result<Vec<f64>> + 'a>;

impl<T: Proximable + ?Sized> Proximable for &T {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        (**self).prox(x, gamma)
    }
    fn prox_map(&self, gamma: f64) -> Result<ProxMap<'_>> {
        (**self).prox_map(gamma)
    }
}

/// The zero function; its prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl Proximable for ZeroFunction {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn prox(&self, x: &[f64], _gamma: f64) -> Result<Vec<f64>> {
        Ok(x.to_vec())
    }
}

/// Indicator of the box `[lo, hi]` in every coordinate; the prox is a clamp.
#[derive(Debug, Clone, Copy)]
pub struct BoxIndicator {
    pub lo: f64,
    pub hi: f64,
}

impl Proximable for BoxIndicator {
    fn value(&self, x: &[f64]) -> f64 {
        if x.iter().all(|v| *v >= self.lo && *v <= self.hi) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, x: &[f64], _gamma: f64) -> Result<Vec<f64>> {
        Ok(x.iter().map(|v| v.clamp(self.lo, self.hi)).collect())
    }
}

/// Sign with `sgn(0) = 0` (unlike `f64::signum`).
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Soft thresholding `sgn(y)·max(|y| − τ, 0)`.
pub fn soft_threshold(y: f64, tau: f64) -> f64 {
    sgn(y) * (y.abs() - tau).max(0.0)
}

/// Coordinatewise soft thresholding: the prox of `τ‖·‖₁`.
pub fn prox_l1(x: &[f64], tau: f64) -> Vec<f64> {
    x.iter().map(|v| soft_threshold(*v, tau)).collect()
}

/// Minimizer of `½zᵀPz + qᵀz + (γ/2)‖z − x‖²`, i.e. `(P + γI)⁻¹(γx − q)`.
///
/// Note the parametrization: `γ` weights the proximity term, so this is
/// `prox_{l/γ}` in the step-size convention used elsewhere.
pub fn prox_quadratic(p: &DenseMatrix, q: &[f64], x: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_positive("gamma", gamma)?;
    check_len("prox_quadratic q", p.rows(), q.len())?;
    check_len("prox_quadratic x", p.rows(), x.len())?;
    let mut m = p.clone();
    m.add_diag(gamma);
    let rhs: Vec<f64> = x.iter().zip(q).map(|(xi, qi)| gamma * xi - qi).collect();
    Cholesky::factor(&m)?.solve(&rhs)
}

/// One or two minimizers of a scalar proximal problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxResult {
    first: f64,
    second: Option<f64>,
}

impl ProxResult {
    pub fn single(v: f64) -> Self {
        ProxResult {
            first: v,
            second: None,
        }
    }

    pub fn pair(a: f64, b: f64) -> Self {
        ProxResult {
            first: a,
            second: Some(b),
        }
    }

    pub fn is_set_valued(&self) -> bool {
        self.second.is_some()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> {
        core::iter::once(self.first).chain(self.second)
    }

    /// Deterministic selection: the nonzero element when the set is
    /// `{0, ±b}`, otherwise the single value.
    pub fn select(&self) -> f64 {
        match self.second {
            Some(b) if self.first == 0.0 => b,
            _ => self.first,
        }
    }
}

/// Bridge penalty `λ|t|^q`, `0 < q < 1`, with its prox thresholds.
///
/// `b` is the smallest nonzero magnitude the prox can return and `h` the
/// input magnitude at which it jumps from 0 to `±b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqEntry {
    q: f64,
    lambda: f64,
    b: f64,
    h: f64,
}

impl LqEntry {
    pub fn new(q: f64, lambda: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ParameterOutOfRange {
                name: "q",
                value: q,
                expected: "0 < q < 1",
            });
        }
        check_positive("lambda", lambda)?;
        let b = libm::pow(2.0 * lambda * (1.0 - q), 1.0 / (2.0 - q));
        let h = b + lambda * q * libm::pow(b, q - 1.0);
        Ok(LqEntry { q, lambda, b, h })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn b_threshold(&self) -> f64 {
        self.b
    }

    pub fn h_threshold(&self) -> f64 {
        self.h
    }

    pub fn value(&self, t: f64) -> f64 {
        self.lambda * libm::pow(t.abs(), self.q)
    }
}

/// Width of the band around `h` treated as the tie `|y| = h`.
const LQ_TIE_BAND: f64 = 1e-12;

/// Prox of `λ|·|^q`: `{0}` below `h`, `{0, ±b}` at `h`, and the larger root of
/// `x + λq x^{q−1} = |y|` above `h`.
pub fn prox_lq(y: f64, entry: &LqEntry) -> Result<ProxResult> {
    if !y.is_finite() {
        return Err(Error::NonFinite("prox_lq input"));
    }
    let v = y.abs();
    let (q, lambda, b, h) = (entry.q, entry.lambda, entry.b, entry.h);
    if (v - h).abs() <= LQ_TIE_BAND * h.max(1.0) {
        return Ok(ProxResult::pair(0.0, sgn(y) * b));
    }
    if v < h {
        return Ok(ProxResult::single(0.0));
    }
    let f = |x: f64| x + lambda * q * libm::pow(x, q - 1.0) - v;
    let root = scalar_root(f, b, v, 1e-12 * (1.0 + v))?;
    Ok(ProxResult::single(sgn(y) * root))
}

/// Scalar penalties with known proximal maps.
///
/// Each variant is `φ(t)` with the named parameters; [`ScalarPenalty::prox`]
/// evaluates `prox_{γφ}` for any `γ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarPenalty {
    /// `ω|t|`.
    Laplace { omega: f64 },
    /// `τt²`.
    Gaussian { tau: f64 },
    /// `κ|t|^p`, `p > 1`; closed forms at `p ∈ {4/3, 3/2, 3, 4}`.
    GroupLp { kappa: f64, p: f64 },
    /// `−κ ln t + ωt` on `t > 0`.
    GammaChi { kappa: f64, omega: f64 },
    /// `w·log(1 + |t|/a)`.
    DoublePareto { weight: f64, a: f64 },
    /// `τt²` for `|t| ≤ ω/√(2τ)`, `ω√(2τ)|t| − ω²/2` beyond.
    Huber { omega: f64, tau: f64 },
    /// `ω|t| + τt² + κ|t|^p`, `p > 1`, `p ≠ 2`.
    MaxEntropy {
        omega: f64,
        tau: f64,
        kappa: f64,
        p: f64,
    },
    /// `ω|t| − ln(1 + ω|t|)`.
    SmoothedLaplace { omega: f64 },
    /// `ωt` on `t ≥ 0`.
    Exponential { omega: f64 },
    /// Indicator of `[−ω, ω]`.
    Uniform { omega: f64 },
    /// `−κ ln t + ωt^p` on `t > 0`.
    Weibull { kappa: f64, omega: f64, p: f64 },
    /// `−κ ln t + ωt + ρ/t` on `t > 0`.
    Gig { kappa: f64, omega: f64, rho: f64 },
    /// `|t|^q`, `0 < q < 1` (non-convex, set-valued prox).
    Bridge { q: f64 },
}

fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::ParameterOutOfRange {
        name,
        value,
        expected,
    }
}

fn require(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(out_of_range(name, value, expected))
    }
}

/// Finds `lo > 0` with `g(lo) < 0` by halving from `hi`, for `g` increasing
/// with `g(0⁺) = −∞`.
fn lower_bracket<G: Fn(f64) -> f64>(g: &G, hi: f64) -> Result<f64> {
    let mut lo = hi;
    while g(lo) >= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::RootNotBracketed {
                lo,
                hi,
                f_lo: g(lo),
                f_hi: g(hi),
            });
        }
    }
    Ok(lo)
}

/// Root of `ρ + c ρ^{p−1} = v` on `[0, v]`, `c ≥ 0`, `p > 1`, `v ≥ 0`.
fn power_shrink_root(v: f64, c: f64, p: f64) -> Result<f64> {
    if v == 0.0 || c == 0.0 {
        return Ok(v);
    }
    let f = |r: f64| r + c * libm::pow(r, p - 1.0) - v;
    scalar_root(f, 0.0, v, 1e-12 * (1.0 + v))
}

impl ScalarPenalty {
    pub fn name(&self) -> &'static str {
        match self {
            ScalarPenalty::Laplace { .. } => "laplace",
            ScalarPenalty::Gaussian { .. } => "gaussian",
            ScalarPenalty::GroupLp { .. } => "group-lp",
            ScalarPenalty::GammaChi { .. } => "gamma-chi",
            ScalarPenalty::DoublePareto { .. } => "double-pareto",
            ScalarPenalty::Huber { .. } => "huber",
            ScalarPenalty::MaxEntropy { .. } => "max-entropy",
            ScalarPenalty::SmoothedLaplace { .. } => "smoothed-laplace",
            ScalarPenalty::Exponential { .. } => "exponential",
            ScalarPenalty::Uniform { .. } => "uniform",
            ScalarPenalty::Weibull { .. } => "weibull",
            ScalarPenalty::Gig { .. } => "gig",
            ScalarPenalty::Bridge { .. } => "bridge",
        }
    }

    /// Named parameters, in declaration order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        use ScalarPenalty::*;
        match *self {
            Laplace { omega } => alloc::vec![("omega", omega)],
            Gaussian { tau } => alloc::vec![("tau", tau)],
            GroupLp { kappa, p } => alloc::vec![("kappa", kappa), ("p", p)],
            GammaChi { kappa, omega } => alloc::vec![("kappa", kappa), ("omega", omega)],
            DoublePareto { weight, a } => alloc::vec![("weight", weight), ("a", a)],
            Huber { omega, tau } => alloc::vec![("omega", omega), ("tau", tau)],
            MaxEntropy {
                omega,
                tau,
                kappa,
                p,
            } => alloc::vec![("omega", omega), ("tau", tau), ("kappa", kappa), ("p", p)],
            SmoothedLaplace { omega } => alloc::vec![("omega", omega)],
            Exponential { omega } => alloc::vec![("omega", omega)],
            Uniform { omega } => alloc::vec![("omega", omega)],
            Weibull { kappa, omega, p } => {
                alloc::vec![("kappa", kappa), ("omega", omega), ("p", p)]
            }
            Gig { kappa, omega, rho } => {
                alloc::vec![("kappa", kappa), ("omega", omega), ("rho", rho)]
            }
            Bridge { q } => alloc::vec![("q", q)],
        }
    }

    /// Checks the parameter ranges of the row.
    pub fn validate(&self) -> Result<()> {
        use ScalarPenalty::*;
        match *self {
            Laplace { omega } => require(omega >= 0.0, "omega", omega, ">= 0"),
            Gaussian { tau } => require(tau >= 0.0, "tau", tau, ">= 0"),
            GroupLp { kappa, p } => {
                require(kappa >= 0.0, "kappa", kappa, ">= 0")?;
                require(p > 1.0, "p", p, "> 1")
            }
            GammaChi { kappa, omega } => {
                require(kappa > 0.0, "kappa", kappa, "> 0")?;
                require(true, "omega", omega, "finite")
            }
            DoublePareto { weight, a } => {
                require(weight > 0.0, "weight", weight, "> 0")?;
                require(a > 0.0, "a", a, "> 0")
            }
            Huber { omega, tau } => {
                require(omega > 0.0, "omega", omega, "> 0")?;
                require(tau > 0.0, "tau", tau, "> 0")
            }
            MaxEntropy {
                omega,
                tau,
                kappa,
                p,
            } => {
                require(omega > 0.0, "omega", omega, "> 0")?;
                require(tau > 0.0, "tau", tau, "> 0")?;
                require(kappa > 0.0, "kappa", kappa, "> 0")?;
                require(p > 1.0 && p != 2.0, "p", p, "> 1 and != 2")
            }
            SmoothedLaplace { omega } => require(omega > 0.0, "omega", omega, "> 0"),
            Exponential { omega } => require(omega >= 0.0, "omega", omega, ">= 0"),
            Uniform { omega } => require(omega > 0.0, "omega", omega, "> 0"),
            Weibull { kappa, omega, p } => {
                require(kappa > 0.0, "kappa", kappa, "> 0")?;
                require(omega >= 0.0, "omega", omega, ">= 0")?;
                require(p > 1.0, "p", p, "> 1")
            }
            Gig { kappa, omega, rho } => {
                require(kappa >= 0.0, "kappa", kappa, ">= 0")?;
                require(rho >= 0.0, "rho", rho, ">= 0")?;
                require(kappa + rho > 0.0, "kappa + rho", kappa + rho, "> 0")?;
                require(true, "omega", omega, "finite")
            }
            Bridge { q } => require(q > 0.0 && q < 1.0, "q", q, "0 < q < 1"),
        }
    }

    /// Whether `φ` is convex (and so its prox single-valued for every `γ`).
    pub fn is_convex(&self) -> bool {
        !matches!(
            self,
            ScalarPenalty::Bridge { .. } | ScalarPenalty::DoublePareto { .. }
        )
    }

    /// `φ(t)`, `+∞` outside the domain.
    pub fn value(&self, t: f64) -> f64 {
        use ScalarPenalty::*;
        let a = t.abs();
        match *self {
            Laplace { omega } => omega * a,
            Gaussian { tau } => tau * t * t,
            GroupLp { kappa, p } => kappa * libm::pow(a, p),
            GammaChi { kappa, omega } => {
                if t > 0.0 {
                    -kappa * libm::log(t) + omega * t
                } else {
                    f64::INFINITY
                }
            }
            DoublePareto { weight, a: scale } => weight * libm::log1p(a / scale),
            Huber { omega, tau } => {
                let s = libm::sqrt(2.0 * tau);
                if a <= omega / s {
                    tau * t * t
                } else {
                    omega * s * a - 0.5 * omega * omega
                }
            }
            MaxEntropy {
                omega,
                tau,
                kappa,
                p,
            } => omega * a + tau * t * t + kappa * libm::pow(a, p),
            SmoothedLaplace { omega } => omega * a - libm::log1p(omega * a),
            Exponential { omega } => {
                if t >= 0.0 {
                    omega * t
                } else {
                    f64::INFINITY
                }
            }
            Uniform { omega } => {
                if a <= omega {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Weibull { kappa, omega, p } => {
                if t > 0.0 {
                    -kappa * libm::log(t) + omega * libm::pow(t, p)
                } else {
                    f64::INFINITY
                }
            }
            Gig { kappa, omega, rho } => {
                if t > 0.0 {
                    -kappa * libm::log(t) + omega * t + rho / t
                } else {
                    f64::INFINITY
                }
            }
            Bridge { q } => libm::pow(a, q),
        }
    }

    /// A minimizer of `φ` when one exists in closed form.
    pub fn minimizer(&self) -> Option<f64> {
        use ScalarPenalty::*;
        match *self {
            GammaChi { kappa, omega } => (omega > 0.0).then(|| kappa / omega),
            Weibull { kappa, omega, p } => {
                (omega > 0.0).then(|| libm::pow(kappa / (p * omega), 1.0 / p))
            }
            Gig { kappa, omega, rho } => (omega > 0.0)
                .then(|| (kappa + libm::sqrt(kappa * kappa + 4.0 * omega * rho)) / (2.0 * omega)),
            _ => Some(0.0),
        }
    }

    /// `prox_{γφ}(y)`.
    pub fn prox(&self, y: f64, gamma: f64) -> Result<ProxResult> {
        use ScalarPenalty::*;
        check_positive("gamma", gamma)?;
        self.validate()?;
        if !y.is_finite() {
            return Err(Error::NonFinite("prox input"));
        }
        let s = sgn(y);
        let v = y.abs();
        let single = |z: f64| Ok(ProxResult::single(z));
        match *self {
            Laplace { omega } => single(soft_threshold(y, gamma * omega)),
            Gaussian { tau } => single(y / (2.0 * gamma * tau + 1.0)),
            GroupLp { kappa, p } => {
                let k = gamma * kappa;
                if k == 0.0 {
                    return single(y);
                }
                if p == 4.0 / 3.0 {
                    let chi = libm::sqrt(y * y + 256.0 * k * k * k / 729.0);
                    single(
                        y + 4.0 * k / (3.0 * libm::cbrt(2.0))
                            * (libm::cbrt(chi - y) - libm::cbrt(chi + y)),
                    )
                } else if p == 1.5 {
                    single(y + 9.0 * k * k * s * (1.0 - libm::sqrt(1.0 + 16.0 * v / (9.0 * k * k))) / 8.0)
                } else if p == 3.0 {
                    single(s * (libm::sqrt(1.0 + 12.0 * k * v) - 1.0) / (6.0 * k))
                } else if p == 4.0 {
                    let chi = libm::sqrt(y * y + 1.0 / (27.0 * k));
                    single(libm::cbrt((chi + y) / (8.0 * k)) - libm::cbrt((chi - y) / (8.0 * k)))
                } else {
                    single(s * power_shrink_root(v, p * k, p)?)
                }
            }
            GammaChi { kappa, omega } => {
                let c = y - gamma * omega;
                single(0.5 * (c + libm::sqrt(c * c + 4.0 * gamma * kappa)))
            }
            DoublePareto { weight, a } => {
                let g = gamma * weight;
                let d = (a * v - g).max(0.0);
                let z = 0.5 * (v - a + libm::sqrt((a - v) * (a - v) + 4.0 * d));
                if g <= a * a {
                    return single(s * z);
                }
                // Non-convex regime: the closed form is only a stationary
                // point, so compare it with the origin.
                let disc = (a + v) * (a + v) - 4.0 * g;
                if disc < 0.0 {
                    return single(0.0);
                }
                let zp = 0.5 * (v - a + libm::sqrt(disc));
                if zp <= 0.0 {
                    return single(0.0);
                }
                let obj = |z: f64| g * libm::log1p(z / a) + 0.5 * (z - v) * (z - v);
                let (j0, jp) = (obj(0.0), obj(zp));
                if (j0 - jp).abs() <= 1e-12 * j0.abs().max(1.0) {
                    Ok(ProxResult::pair(0.0, s * zp))
                } else if jp < j0 {
                    single(s * zp)
                } else {
                    single(0.0)
                }
            }
            Huber { omega, tau } => {
                let t2 = gamma * tau;
                let w2 = omega * libm::sqrt(gamma);
                let root = libm::sqrt(2.0 * t2);
                if v <= w2 * (2.0 * t2 + 1.0) / root {
                    single(y / (2.0 * t2 + 1.0))
                } else {
                    single(y - w2 * root * s)
                }
            }
            MaxEntropy {
                omega,
                tau,
                kappa,
                p,
            } => {
                let denom = 2.0 * gamma * tau + 1.0;
                let inner = (v - gamma * omega).max(0.0) / denom;
                let c = p * gamma * kappa / denom;
                single(s * power_shrink_root(inner, c, p)?)
            }
            SmoothedLaplace { omega } => {
                let c = omega * v - 1.0 - gamma * omega * omega;
                single(s * (c + libm::sqrt(c * c + 4.0 * omega * v)) / (2.0 * omega))
            }
            Exponential { omega } => single((y - gamma * omega).max(0.0)),
            Uniform { omega } => single(y.clamp(-omega, omega)),
            Weibull { kappa, omega, p } => {
                let g = |x: f64| {
                    -gamma * kappa / x + p * gamma * omega * libm::pow(x, p - 1.0) + x - y
                };
                let hi = y.max(0.0) + libm::sqrt(gamma * kappa) + 1.0;
                let lo = lower_bracket(&g, hi)?;
                single(scalar_root(g, lo, hi, 1e-12 * (1.0 + v))?)
            }
            Gig { kappa, omega, rho } => {
                let g = |x: f64| -gamma * kappa / x + gamma * omega - gamma * rho / (x * x) + x - y;
                let hi = (y - gamma * omega).max(0.0)
                    + libm::sqrt(gamma * kappa)
                    + libm::cbrt(gamma * rho)
                    + 1.0;
                let lo = lower_bracket(&g, hi)?;
                single(scalar_root(g, lo, hi, 1e-12 * (1.0 + v))?)
            }
            Bridge { q } => prox_lq(y, &LqEntry::new(q, gamma)?),
        }
    }
}

/// `Σ φ(x_i)`, with coordinatewise prox (nonzero tie-break).
impl Proximable for ScalarPenalty {
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|t| ScalarPenalty::value(self, *t)).sum()
    }
    fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        x.iter()
            .map(|t| ScalarPenalty::prox(self, *t, gamma).map(|r| r.select()))
            .collect()
    }
}

/// Moreau envelope `φ(ẑ) + (1/2γ)‖ẑ − x‖²` with `ẑ = prox_{γφ}(x)`.
pub fn moreau_envelope<F: Proximable + ?Sized>(f: &F, x: &[f64], gamma: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    let z = f.prox(x, gamma)?;
    let dist2: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(f.value(&z) + dist2 / (2.0 * gamma))
}

/// Moreau decomposition `x = prox_{λφ}(x) + (x − prox_{λφ}(x))`.
///
/// For convex `φ` the second part equals `λ·prox_{φ*/λ}(x/λ)`.
pub fn moreau_decompose<F: Proximable + ?Sized>(
    f: &F,
    x: &[f64],
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_positive("lambda", lambda)?;
    let p = f.prox(x, lambda)?;
    let r = x.iter().zip(&p).map(|(a, b)| a - b).collect();
    Ok((p, r))
}

/// Exact prox of `λ Σ|x_{i+1} − x_i|` (1-D total variation).
///
/// Condat's direct algorithm: a single forward pass that extends the current
/// constant segment while the running dual stays in `[−λ, λ]`, with
/// backtracking to the last breakpoint otherwise. Linear in practice.
pub fn prox_tv1d(input: &[f64], lambda: f64) -> Vec<f64> {
    let width = input.len();
    if width == 0 || lambda <= 0.0 {
        return input.to_vec();
    }
    let mut output = alloc::vec![0.0; width];
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let mut umin = lambda;
    let mut umax = -lambda;
    let mut vmin = input[0] - lambda;
    let mut vmax = input[0] + lambda;
    let twolambda = 2.0 * lambda;
    let minlambda = -lambda;
    loop {
        while k == width - 1 {
            if umin < 0.0 {
                loop {
                    output[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = input[k0];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    output[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = input[k0];
                umax = minlambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                loop {
                    output[k0] = vmin;
                    k0 += 1;
                    if k0 > k {
                        break;
                    }
                }
                return output;
            }
        }
        umin += input[k + 1] - vmin;
        if umin < minlambda {
            loop {
                output[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = input[k0];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = minlambda;
            continue;
        }
        umax += input[k + 1] - vmax;
        if umax > lambda {
            loop {
                output[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = input[k0];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = minlambda;
        } else {
            k += 1;
            if umin >= lambda {
                kminus = k;
                vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
                umin = lambda;
            }
            if umax <= minlambda {
                kplus = k;
                vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
                umax = minlambda;
            }
        }
    }
}
