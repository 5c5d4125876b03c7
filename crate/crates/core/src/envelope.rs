//! Forward-backward, Douglas-Rachford and Bregman-Moreau envelopes.

use alloc::vec::Vec;

use crate::error::{check_positive, Error, Result};
use crate::linalg::{dot, golden_section};
use crate::models::{BregmanDivergence, Loss};
use crate::prox::{Proximable, ScalarPenalty};

/// Forward-backward envelope at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FBEval {
    /// `F^FB_γ(x)`.
    pub value: f64,
    /// `P_γ(x) = prox_{γφ}(x − γ∇l(x))`.
    pub prox_point: Vec<f64>,
    /// `G_γ(x) = (x − P_γ(x))/γ`.
    pub residual: Vec<f64>,
    pub gamma: f64,
}

fn check_step<L: Loss + ?Sized>(loss: &L, gamma: f64) -> Result<()> {
    check_positive("gamma", gamma)?;
    if let Some(lip) = loss.lipschitz_bound() {
        if gamma * lip >= 1.0 {
            return Err(Error::StepBound {
                what: "envelope step gamma",
                step: gamma,
                bound: 1.0 / lip,
            });
        }
    }
    Ok(())
}

/// `F^FB_γ(x) = l(x) − (γ/2)‖∇l(x)‖² + φ^γ(x − γ∇l(x))`.
pub fn fbe<L, P>(loss: &L, penalty: &P, x: &[f64], gamma: f64) -> Result<FBEval>
where
    L: Loss + ?Sized,
    P: Proximable + ?Sized,
{
    check_step(loss, gamma)?;
    let (lx, g) = loss.value_grad(x)?;
    let forward: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - gamma * b).collect();
    let p = penalty.prox(&forward, gamma)?;
    let gap: f64 = p
        .iter()
        .zip(&forward)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let envelope = penalty.value(&p) + gap / (2.0 * gamma);
    let value = lx - 0.5 * gamma * dot(&g, &g) + envelope;
    let residual = x.iter().zip(&p).map(|(a, b)| (a - b) / gamma).collect();
    Ok(FBEval {
        value,
        prox_point: p,
        residual,
        gamma,
    })
}

/// `F^DR_γ(x) = l^γ(x) − γ‖∇l^γ(x)‖² + φ^γ(x − 2γ∇l^γ(x))`.
///
/// Equals `fbe(loss, penalty, prox_{γl}(x), γ).value`.
pub fn dre<L, P>(loss: &L, penalty: &P, x: &[f64], gamma: f64) -> Result<f64>
where
    L: Loss + Proximable + ?Sized,
    P: Proximable + ?Sized,
{
    check_step(loss, gamma)?;
    let w = Proximable::prox(loss, x, gamma)?;
    let grad: Vec<f64> = x.iter().zip(&w).map(|(a, b)| (a - b) / gamma).collect();
    let g2 = dot(&grad, &grad);
    let loss_env = Loss::value(loss, &w)? + 0.5 * gamma * g2;
    let reflected: Vec<f64> = x
        .iter()
        .zip(&grad)
        .map(|(a, b)| a - 2.0 * gamma * b)
        .collect();
    let pen_env = crate::prox::moreau_envelope(penalty, &reflected, gamma)?;
    Ok(loss_env - gamma * g2 + pen_env)
}

/// `inf_v D(x, v) + φ(v)` by golden-section search. Returns `(value, minimizer)`.
///
/// The search bracket is `[1e-8, x + 10(1 + |x|)]` when the divergence needs a
/// positive base point and `x ± 10(1 + |x|)` otherwise; a minimizer pinned to
/// an open edge of the bracket is reported as unbounded.
pub fn d_moreau(div: &BregmanDivergence, phi: &ScalarPenalty, x: f64) -> Result<(f64, f64)> {
    phi.validate()?;
    let width = 10.0 * (1.0 + x.abs());
    let positive = !div.in_domain(-1.0);
    let (lo, hi) = if positive {
        (1e-8, x.max(0.0) + width)
    } else {
        (x - width, x + width)
    };
    let h = |v: f64| -> f64 {
        match div.eval(x, v) {
            Ok(d) => d + phi.value(v),
            Err(_) => f64::INFINITY,
        }
    };
    if !h(x.max(lo)).is_finite() && !div.in_domain(x) && x != 0.0 {
        return Err(Error::OutsideDomain {
            what: "d_moreau point",
            value: x,
        });
    }
    let (mut v, mut best) = golden_section(h, lo, hi, 1e-12);
    // Golden section can miss a kink; compare against the natural candidates.
    let mut candidates = alloc::vec![x];
    if let Some(m) = phi.minimizer() {
        candidates.push(m);
    }
    for c in candidates {
        if c >= lo && c <= hi {
            let hc = h(c);
            if hc < best {
                best = hc;
                v = c;
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::Unbounded("d_moreau objective"));
    }
    let edge = 1e-6 * (hi - lo);
    if hi - v <= edge || (!positive && v - lo <= edge) {
        return Err(Error::Unbounded("d_moreau minimizer at the search bracket edge"));
    }
    Ok((best, v))
}
