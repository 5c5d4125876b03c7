//! Prox catalog check: every scalar prox and the bridge prox against brute
//! force grid minimization on random parameterizations.

use proxkit_core::prox::{prox_lq, LqEntry, ProxResult, ScalarPenalty};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const GRID_LO: f64 = -20.0;
pub const GRID_HI: f64 = 20.0;
pub const GRID_STEP: f64 = 1e-4;
pub const TOLERANCE: f64 = 1e-3;
pub const DEFAULT_DRAWS: usize = 50;

/// One penalty checked by the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    Scalar(ScalarPenalty),
    /// `λ|t|^q` through [`prox_lq`]; `γ` scales `λ`.
    Lq { q: f64, lambda: f64 },
}

impl CatalogEntry {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            CatalogEntry::Scalar(p) => p.value(t),
            CatalogEntry::Lq { q, lambda } => lambda * t.abs().powf(q),
        }
    }

    /// The shipped prox of `γφ` at `y`.
    pub fn prox(&self, y: f64, gamma: f64) -> proxkit_core::Result<ProxResult> {
        match *self {
            CatalogEntry::Scalar(p) => p.prox(y, gamma),
            CatalogEntry::Lq { q, lambda } => prox_lq(y, &LqEntry::new(q, gamma * lambda)?),
        }
    }
}

/// Prox implementation under test: `(entry, y, γ) ↦ prox_{γφ}(y)`.
pub type ProxFn = dyn Fn(&CatalogEntry, f64, f64) -> proxkit_core::Result<ProxResult> + Sync;

/// Row names of the catalog, in report order.
pub const ENTRY_NAMES: [&str; 14] = [
    "laplace",
    "gaussian",
    "group-lp",
    "gamma-chi",
    "double-pareto",
    "huber",
    "max-entropy",
    "smoothed-laplace",
    "exponential",
    "uniform",
    "weibull",
    "gig",
    "bridge",
    "lq",
];

/// Random parameterization of row `index`; ranges keep every minimizer
/// inside the grid.
pub fn random_entry(index: usize, rng: &mut impl Rng) -> CatalogEntry {
    use ScalarPenalty::*;
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let s = match index {
        0 => Laplace { omega: u(0.0, 3.0) },
        1 => Gaussian { tau: u(0.0, 3.0) },
        2 => {
            let pick = u(0.0, 1.0);
            let p = if pick < 0.5 {
                [4.0 / 3.0, 1.5, 3.0, 4.0][(pick * 8.0) as usize]
            } else {
                u(1.1, 4.0)
            };
            GroupLp { kappa: u(0.0, 2.0), p }
        }
        3 => GammaChi {
            kappa: u(0.05, 3.0),
            omega: u(-2.0, 2.0),
        },
        4 => DoublePareto {
            weight: u(0.1, 3.0),
            a: u(0.2, 3.0),
        },
        5 => Huber {
            omega: u(0.1, 3.0),
            tau: u(0.1, 3.0),
        },
        6 => {
            let mut p = u(1.1, 4.0);
            if (p - 2.0).abs() < 1e-3 {
                p = 2.5;
            }
            MaxEntropy {
                omega: u(0.1, 2.0),
                tau: u(0.1, 2.0),
                kappa: u(0.1, 2.0),
                p,
            }
        }
        7 => SmoothedLaplace { omega: u(0.1, 3.0) },
        8 => Exponential { omega: u(0.0, 3.0) },
        9 => Uniform { omega: u(0.1, 5.0) },
        10 => Weibull {
            kappa: u(0.05, 3.0),
            omega: u(0.0, 2.0),
            p: u(1.1, 3.0),
        },
        11 => Gig {
            kappa: u(0.0, 2.0),
            omega: u(-2.0, 2.0),
            rho: u(0.05, 2.0),
        },
        12 => Bridge { q: u(0.1, 0.9) },
        _ => {
            return CatalogEntry::Lq {
                q: u(0.1, 0.9),
                lambda: u(0.1, 3.0),
            }
        }
    };
    CatalogEntry::Scalar(s)
}

/// Result of one catalog row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogRow {
    pub name: String,
    pub draws: usize,
    /// Largest distance between the prox and the grid minimizer.
    pub max_deviation: f64,
    pub passed: bool,
    /// First failing draw, if any.
    pub failure: Option<String>,
}

fn grid_objective(entry: &CatalogEntry, y: f64, gamma: f64, z: f64) -> f64 {
    gamma * entry.value(z) + 0.5 * (z - y) * (z - y)
}

/// Grid minimizer over `[lo, hi]` with spacing [`GRID_STEP`].
fn grid_argmin(entry: &CatalogEntry, y: f64, gamma: f64, lo: f64, hi: f64) -> (f64, f64) {
    let steps = ((hi - lo) / GRID_STEP).round() as usize;
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..=steps {
        let z = lo + i as f64 * GRID_STEP;
        let v = grid_objective(entry, y, gamma, z);
        if v < best.1 {
            best = (z, v);
        }
    }
    best
}

/// Distance from the prox set to the grid minimizer. When the objective has
/// several (near-)global minimizers, a prox value that is itself within grid
/// resolution of a global minimum counts against its own basin.
pub fn oracle_deviation(entry: &CatalogEntry, y: f64, gamma: f64, prox: &ProxResult) -> f64 {
    let (g, fg) = grid_argmin(entry, y, gamma, GRID_LO, GRID_HI);
    let mut best = prox.values().map(|v| (v - g).abs()).fold(f64::INFINITY, f64::min);
    if best > TOLERANCE {
        for v in prox.values() {
            let (lg, fl) = grid_argmin(entry, y, gamma, v - 0.01, v + 0.01);
            if fl <= fg + 1e-9 * (1.0 + fg.abs()) {
                best = best.min((v - lg).abs());
            }
        }
    }
    best
}

fn check_row(index: usize, prox: &ProxFn, seed: u64, draws: usize) -> CatalogRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((index as u64 + 1) << 32));
    let mut max_deviation = 0.0f64;
    let mut failure = None;
    for k in 0..draws {
        let entry = random_entry(index, &mut rng);
        let y = rng.random_range(-5.0..5.0);
        let gamma = rng.random_range(0.2..2.0);
        let dev = match prox(&entry, y, gamma) {
            Ok(r) => oracle_deviation(&entry, y, gamma, &r),
            Err(e) => {
                failure.get_or_insert_with(|| format!("draw {k}: {entry:?} y={y} gamma={gamma}: {e}"));
                f64::INFINITY
            }
        };
        if !(dev <= TOLERANCE) {
            failure.get_or_insert_with(|| format!("draw {k}: {entry:?} y={y} gamma={gamma}: deviation {dev}"));
        }
        max_deviation = max_deviation.max(dev);
    }
    CatalogRow {
        name: ENTRY_NAMES[index].to_string(),
        draws,
        max_deviation,
        passed: failure.is_none(),
        failure,
    }
}

/// Checks the shipped proxes.
pub fn catalog_check(seed: u64, draws: usize) -> Vec<CatalogRow> {
    catalog_check_with(&|e, y, g| e.prox(y, g), seed, draws)
}

/// Checks an arbitrary prox implementation against the grid oracle.
pub fn catalog_check_with(prox: &ProxFn, seed: u64, draws: usize) -> Vec<CatalogRow> {
    (0..ENTRY_NAMES.len())
        .into_par_iter()
        .map(|i| check_row(i, prox, seed, draws))
        .collect()
}

/// Fixed-width report, one line per row.
pub fn render_report(rows: &[CatalogRow]) -> String {
    let mut out = format!("{:<18} {:>6} {:>14}  {}\n", "entry", "draws", "max_deviation", "status");
    for r in rows {
        out.push_str(&format!(
            "{:<18} {:>6} {:>14.3e}  {}\n",
            r.name,
            r.draws,
            r.max_deviation,
            if r.passed { "PASS" } else { "FAIL" }
        ));
        if let Some(f) = &r.failure {
            out.push_str(&format!("    {f}\n"));
        }
    }
    out
}

/// Whether every row passed.
pub fn all_passed(rows: &[CatalogRow]) -> bool {
    rows.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_laplace_fails_only_laplace() {
        let broken = |e: &CatalogEntry, y: f64, g: f64| match e {
            CatalogEntry::Scalar(ScalarPenalty::Laplace { omega }) => {
                Ok(ProxResult::single(proxkit_core::prox::soft_threshold(y, 0.5 * g * omega)))
            }
            other => other.prox(y, g),
        };
        let rows = catalog_check_with(&broken, 7, 10);
        for r in &rows {
            assert_eq!(r.passed, r.name != "laplace", "{r:?}");
        }
        assert!(render_report(&rows).contains("FAIL"));
    }

    #[test]
    fn report_lists_deviation() {
        let rows = catalog_check(1, 2);
        let text = render_report(&rows);
        assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), ENTRY_NAMES.len());
        assert!(rows.iter().all(|r| r.max_deviation.is_finite()));
    }
}
