//! Seeded data generators for the simulated applications and the
//! standardization used for real data.

use proxkit_core::linalg::DenseMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise level at the reference signal-to-noise ratio of the bridge example.
const REFERENCE_SIGMA: f64 = 0.0369;
const REFERENCE_SNR: f64 = 16.5;

/// Likelihood and penalty pairing of a simulated experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SimFamily {
    /// Binomial logistic regression with an ℓ1 penalty.
    LogisticL1,
    /// Binomial logistic regression with a fused-lasso penalty.
    LogitFused,
    /// Poisson regression with a fused-lasso penalty.
    PoissonFused,
    /// Gaussian regression with a bridge `|t|^q` penalty.
    LqBridge,
}

impl SimFamily {
    pub fn name(self) -> &'static str {
        match self {
            SimFamily::LogisticL1 => "logistic-l1",
            SimFamily::LogitFused => "logit-fused",
            SimFamily::PoissonFused => "poisson-fused",
            SimFamily::LqBridge => "lq-bridge",
        }
    }
}

/// A simulated problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub d: usize,
    /// Fraction of nonzero entries in the true signal, in `(0, 1]`.
    pub sparsity: f64,
    /// Binomial trials per observation (logistic families).
    pub trials: u32,
    /// Signal-to-noise ratio in dB (bridge family).
    pub snr: f64,
    pub seed: u64,
    pub family: SimFamily,
}

impl SimSpec {
    /// The sparse logistic instance: `n = 100`, `d = 300`, 10% sparsity, two trials.
    pub fn logistic_l1(seed: u64) -> Self {
        SimSpec {
            n: 100,
            d: 300,
            sparsity: 0.1,
            trials: 2,
            snr: REFERENCE_SNR,
            seed,
            family: SimFamily::LogisticL1,
        }
    }

    /// The fused logistic instance, `n = 100`, `d = 400`, two trials.
    pub fn logit_fused(seed: u64) -> Self {
        SimSpec {
            d: 400,
            family: SimFamily::LogitFused,
            ..Self::logistic_l1(seed)
        }
    }

    /// The Poisson fused-lasso instance, `n = 100`, `d = 300`, 10% sparsity.
    pub fn poisson_fused(seed: u64) -> Self {
        SimSpec {
            trials: 1,
            family: SimFamily::PoissonFused,
            ..Self::logistic_l1(seed)
        }
    }

    /// The bridge-regression instance, `n = 100`, `d = 256`, 5% sparsity, SNR 16.5.
    pub fn lq_bridge(seed: u64) -> Self {
        SimSpec {
            n: 100,
            d: 256,
            sparsity: 0.05,
            trials: 1,
            snr: REFERENCE_SNR,
            seed,
            family: SimFamily::LqBridge,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Config("n and d must be at least 1".into()));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::Config(format!(
                "sparsity must lie in (0, 1], got {}",
                self.sparsity
            )));
        }
        if matches!(self.family, SimFamily::LogisticL1 | SimFamily::LogitFused) && self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !self.snr.is_finite() {
            return Err(Error::Config(format!("snr must be finite, got {}", self.snr)));
        }
        Ok(())
    }

    /// Number of nonzero entries of the true signal, `⌈sparsity·d⌉`.
    pub fn support_size(&self) -> usize {
        ((self.sparsity * self.d as f64).ceil() as usize).clamp(1, self.d)
    }

    /// Gaussian noise level for the bridge family.
    pub fn noise_sigma(&self) -> f64 {
        noise_sigma(self.snr)
    }
}

/// `σ(snr) = 0.0369·10^{(16.5 − snr)/20}`.
pub fn noise_sigma(snr: f64) -> f64 {
    REFERENCE_SIGMA * 10f64.powf((REFERENCE_SNR - snr) / 20.0)
}

/// A generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub a: DenseMatrix,
    pub y: Vec<f64>,
    pub x_true: Vec<f64>,
    /// Trials per row; all ones outside the logistic families.
    pub trials: Vec<f64>,
}

/// Draws `(A, y, x_true)`: standard-normal `A` with unit-norm columns, a
/// `⌈sparsity·d⌉`-sparse standard-normal signal at seeded positions, and `y`
/// from the family's likelihood.
pub fn generate(spec: &SimSpec) -> Result<SimData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d) = (spec.n, spec.d);
    let mut data: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    for j in 0..d {
        let norm = (0..n).map(|i| data[i * d + j].powi(2)).sum::<f64>().sqrt();
        for i in 0..n {
            data[i * d + j] /= norm;
        }
    }
    let a = DenseMatrix::new(n, d, data)?;
    let mut positions = index::sample(&mut rng, d, spec.support_size()).into_vec();
    positions.sort_unstable();
    let mut x_true = vec![0.0; d];
    for j in positions {
        x_true[j] = StandardNormal.sample(&mut rng);
    }
    let eta = a.matvec(&x_true)?;
    let mut trials = vec![1.0; n];
    let y = match spec.family {
        SimFamily::LogisticL1 | SimFamily::LogitFused => {
            trials = vec![spec.trials as f64; n];
            eta.iter()
                .map(|&s| {
                    let p = 1.0 / (1.0 + (-s).exp());
                    let dist = Binomial::new(spec.trials as u64, p)
                        .map_err(|e| Error::Config(format!("binomial draw: {e}")))?;
                    Ok(dist.sample(&mut rng) as f64)
                })
                .collect::<Result<Vec<_>>>()?
        }
        SimFamily::PoissonFused => eta
            .iter()
            .map(|&s| {
                let dist = Poisson::new(s.exp())
                    .map_err(|e| Error::Config(format!("Poisson draw: {e}")))?;
                Ok(dist.sample(&mut rng))
            })
            .collect::<Result<Vec<_>>>()?,
        SimFamily::LqBridge => {
            let sigma = spec.noise_sigma();
            eta.iter()
                .map(|&s| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    s + sigma * e
                })
                .collect()
        }
    };
    Ok(SimData { a, y, x_true, trials })
}

/// Centers and scales every column of `a` to zero mean and unit variance
/// (population convention, divisor `n`) and centers `y`. Returns the column
/// means and scales.
pub fn standardize(a: &mut DenseMatrix, y: &mut [f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, d) = (a.rows(), a.cols());
    let mut means = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for j in 0..d {
        let col = a.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        if var <= 0.0 {
            return Err(Error::Config(format!("column {} is constant", j + 1)));
        }
        let sd = var.sqrt();
        for i in 0..n {
            a.set(i, j, (a.get(i, j) - mean) / sd);
        }
        means.push(mean);
        scales.push(sd);
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    y.iter_mut().for_each(|v| *v -= ybar);
    Ok((means, scales))
}
