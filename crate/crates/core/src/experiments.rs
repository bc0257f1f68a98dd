//! Monte Carlo stability study: how coupling estimates of a uniform chain
//! degrade as Gaussian noise is added to both measured spectra.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{recover_weights, NegativeWeights, RecoveryOptions};
use crate::model::{build_chain_matrix, ChainSpec, Perturbation};
use crate::protocol::measure_spectra;
use crate::reconstruction::reconstruct_chain;
use crate::spectral::{perturb_spectrum, stream_seed, NoiseModel, Spectrum};

pub const CSV_HEADER: &str = "N,sigma,mean_error,failure_fraction,samples";

fn default_coupling() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub sigmas: Vec<f64>,
    pub samples: usize,
    pub field_strength: f64,
    #[serde(default = "default_coupling")]
    pub true_coupling: f64,
    pub master_seed: u64,
    /// Use the applied field instead of inferring it from the noisy spectra.
    #[serde(default)]
    pub use_known_field: bool,
    #[serde(default)]
    pub negative_weights: NegativeWeights,
}

impl SweepConfig {
    /// Chains of length 2..=20, four noise levels, 1000 samples, `f = 10`.
    pub fn figure_two(master_seed: u64) -> Self {
        Self {
            n_min: 2,
            n_max: 20,
            sigmas: vec![0.01, 0.02, 0.04, 0.08],
            samples: 1000,
            field_strength: 10.0,
            true_coupling: 1.0,
            master_seed,
            use_known_field: false,
            negative_weights: NegativeWeights::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= n_min <= n_max, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.sigmas.is_empty() {
            return Err(Error::InvalidConfig("no noise levels given".into()));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma {s} is not a nonnegative number")));
        }
        if self.field_strength == 0.0 || !self.field_strength.is_finite() {
            return Err(Error::InvalidConfig("field_strength must be finite and nonzero".into()));
        }
        if !(self.true_coupling > 0.0) || !self.true_coupling.is_finite() {
            return Err(Error::InvalidConfig("true_coupling must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub sigma: f64,
    pub mean_error: f64,
    pub failure_fraction: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, n: usize, sigma: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.n == n && r.sigma == sigma)
    }

    /// One line per `(N, sigma)`, floats at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{}",
                r.n, r.sigma, r.mean_error, r.failure_fraction, r.samples
            );
        }
        out
    }

    /// Smallest `N` whose mean error at `sigma` exceeds `factor` times the
    /// mean error at the shortest chain in the sweep.
    pub fn breakdown_length(&self, sigma: f64, factor: f64) -> Option<usize> {
        let mut rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.sigma == sigma).collect();
        rows.sort_by_key(|r| r.n);
        let base = rows.first()?.mean_error;
        rows.iter().find(|r| r.mean_error > factor * base).map(|r| r.n)
    }
}

/// Mean squared coupling error `sum_n (c_n - c^_n)^2 / (N - 1)`.
pub fn chain_error(true_couplings: &[f64], estimated: &[f64]) -> Result<f64> {
    if true_couplings.len() != estimated.len() {
        return Err(Error::DimensionMismatch {
            expected: true_couplings.len(),
            found: estimated.len(),
        });
    }
    if true_couplings.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = true_couplings
        .iter()
        .zip(estimated)
        .map(|(c, e)| (c - e) * (c - e))
        .sum();
    Ok(total / true_couplings.len() as f64)
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    error: f64,
    failed: bool,
}

fn run_trial(
    truth: &ChainSpec,
    clean: &(Spectrum, Spectrum),
    noise: [NoiseModel; 2],
    options: RecoveryOptions,
) -> TrialOutcome {
    let s = perturb_spectrum(&clean.0, &noise[0]);
    let s_prime = perturb_spectrum(&clean.1, &noise[1]);
    let zeros = vec![0.0; truth.couplings().len()];

    let (estimate, failed) = match recover_weights(&s, &s_prime, options).and_then(|m| reconstruct_chain(&m)) {
        Ok(chain) => (chain.couplings().to_vec(), false),
        Err(Error::ReconstructionBreakdown { partial, .. }) => (partial.couplings, true),
        Err(_) => (zeros, true),
    };
    let error = chain_error(truth.couplings(), &estimate).expect("estimate has the true chain's length");
    TrialOutcome { error, failed }
}

/// Runs every `(N, sigma, trial)` combination of `config`.
///
/// Trials run on the current rayon pool. Each draws its noise from streams
/// derived from `(master_seed, N, sigma index, trial, spectrum)`, and the
/// per-cell reduction is sequential over trial order, so the result does not
/// depend on the number of threads.
pub fn run_stability_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut rows = Vec::with_capacity((config.n_max - config.n_min + 1) * config.sigmas.len());

    for n in config.n_min..=config.n_max {
        let truth = ChainSpec::uniform(n, config.true_coupling)?;
        let h = build_chain_matrix(&truth);
        let marker = Perturbation::site(n, 0, config.field_strength)?;
        let clean = measure_spectra(&h, &marker)?;
        let options = RecoveryOptions {
            field: config.use_known_field.then_some(config.field_strength),
            negative_weights: config.negative_weights,
            ..Default::default()
        };

        for (sigma_index, &sigma) in config.sigmas.iter().enumerate() {
            let outcomes: Vec<TrialOutcome> = (0..config.samples)
                .into_par_iter()
                .map(|trial| {
                    let path = |draw: u64| [n as u64, sigma_index as u64, trial as u64, draw];
                    let noise = [
                        NoiseModel::new(sigma, stream_seed(config.master_seed, &path(0))),
                        NoiseModel::new(sigma, stream_seed(config.master_seed, &path(1))),
                    ]
                    .map(|m| m.expect("sigma validated"));
                    run_trial(&truth, &clean, noise, options)
                })
                .collect();

            let total_error: f64 = outcomes.iter().map(|o| o.error).sum();
            let failures = outcomes.iter().filter(|o| o.failed).count();
            rows.push(SweepRow {
                n,
                sigma,
                mean_error: total_error / config.samples as f64,
                failure_fraction: failures as f64 / config.samples as f64,
                samples: config.samples,
            });
        }
    }
    Ok(SweepResult { rows })
}
