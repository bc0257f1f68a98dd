//! Local spectral weights `|<e_k|psi>|^2` from the spectra of `H` and of
//! the marker-perturbed `H' = H + f |psi><psi|`.
//!
//! The rank-one secular equation `1 = f sum_n w_n / (x - e_n)` has the
//! eigenvalues of `H'` as its roots. Taking residues at each pole gives
//!
//! ```text
//! w_k = (e'_k - e_k) / f * prod_{m != k} (e_k - e'_m) / (e_k - e_m)
//! ```
//!
//! with both spectra sorted ascending and paired by index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

const WEIGHT_SUM_TOL: f64 = 1e-9;
const ZERO_FIELD_TOL: f64 = 1e-10;
const DEFAULT_RELATIVE_GAP: f64 = 1e-8;
const DEFAULT_OVERLAP_ULPS: f64 = 16.0;

/// Nodes `e_k` with weights `|<e_k|psi>|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Set when negative weights were clamped or the weights renormalized.
    degraded: bool,
}

impl SpectralMeasure {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::with_flag(nodes, weights, false)
    }

    fn with_flag(nodes: Vec<f64>, weights: Vec<f64>, degraded: bool) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if nodes.iter().chain(&weights).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("measure contains non-finite values".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateSpectrum {
                index: i,
                gap: nodes[i + 1] - nodes[i],
                tolerance: 0.0,
            });
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidSpec("measure weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidSpec(format!("measure weights sum to {total}, not 1")));
        }
        Ok(Self {
            nodes,
            weights,
            degraded,
        })
    }

    /// Serde does not re-check invariants; call this on untrusted input.
    pub fn validated(self) -> Result<Self> {
        Self::with_flag(self.nodes, self.weights, self.degraded)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degraded(&self) -> bool {
        self.degraded
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of strictly positive weights.
    pub fn support(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }
}

/// `tr H' - tr H`, which equals `f` for any normalized probe.
pub fn infer_field_strength(s: &Spectrum, s_prime: &Spectrum) -> Result<f64> {
    check_lengths(s, s_prime)?;
    Ok(s.eigenvalues()
        .iter()
        .zip(s_prime.eigenvalues())
        .map(|(e, ep)| ep - e)
        .sum())
}

fn check_lengths(s: &Spectrum, s_prime: &Spectrum) -> Result<()> {
    if s.len() != s_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: s_prime.len(),
        });
    }
    if s.is_empty() {
        return Err(Error::InvalidSpec("spectra are empty".into()));
    }
    Ok(())
}

/// What to do with the negative weights that noisy, non-interlacing spectra
/// produce.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeWeights {
    /// Set to zero. The measure loses support, so the chain reconstruction
    /// breaks down at the first missing node.
    #[default]
    Clamp,
    /// Replace by the absolute value, keeping every node in the support.
    Reflect,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RecoveryOptions {
    /// Known field strength; inferred from the trace difference when absent.
    pub field: Option<f64>,
    /// Smallest allowed gap between neighbouring eigenvalues of `H`;
    /// defaults to `1e-8` times the width of its spectrum.
    pub gap_tolerance: Option<f64>,
    /// Smallest allowed distance between an eigenvalue of `H` and one of
    /// `H'`; defaults to a few ulps of the largest eigenvalue magnitude.
    /// Zero disables the check.
    pub overlap_tolerance: Option<f64>,
    pub negative_weights: NegativeWeights,
}

pub fn default_gap_tolerance(s: &Spectrum) -> f64 {
    let e = s.eigenvalues();
    match (e.first(), e.last()) {
        (Some(lo), Some(hi)) => DEFAULT_RELATIVE_GAP * (hi - lo),
        _ => 0.0,
    }
}

/// Distance below which two eigenvalues are indistinguishable in floating
/// point. A smaller separation only means a weight below rounding level.
pub fn default_overlap_tolerance(s: &Spectrum, s_prime: &Spectrum) -> f64 {
    let scale = s
        .eigenvalues()
        .iter()
        .chain(s_prime.eigenvalues())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    DEFAULT_OVERLAP_ULPS * f64::EPSILON * scale
}

/// Recovers `|<e_k|psi>|^2` for every eigenvalue `e_k` of `H`.
///
/// Negative weights, which only arise from noisy input, are clamped to zero
/// and the weights renormalized; the result is then flagged as degraded.
pub fn recover_weights(s: &Spectrum, s_prime: &Spectrum, options: RecoveryOptions) -> Result<SpectralMeasure> {
    check_lengths(s, s_prime)?;
    let field = match options.field {
        Some(f) => f,
        None => infer_field_strength(s, s_prime)?,
    };
    if !(field.abs() >= ZERO_FIELD_TOL) {
        return Err(Error::ZeroField(field));
    }

    let tol = options.gap_tolerance.unwrap_or_else(|| default_gap_tolerance(s));
    let overlap_tol = options
        .overlap_tolerance
        .unwrap_or_else(|| default_overlap_tolerance(s, s_prime));
    let e = s.eigenvalues();
    let ep = s_prime.eigenvalues();

    for (i, w) in e.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap <= tol {
            return Err(Error::DegenerateSpectrum {
                index: i,
                gap,
                tolerance: tol,
            });
        }
    }
    // Both lists are sorted, so the closest e'_m to each e_k is adjacent to
    // its insertion point.
    for (k, &ek) in e.iter().enumerate() {
        let pos = ep.partition_point(|&x| x < ek);
        for m in [pos.wrapping_sub(1), pos] {
            if let Some(&epm) = ep.get(m) {
                let distance = (ek - epm).abs();
                if overlap_tol > 0.0 && distance <= overlap_tol {
                    return Err(Error::SpectraOverlap {
                        index: k,
                        other: m,
                        distance,
                        tolerance: overlap_tol,
                    });
                }
            }
        }
    }

    let n = e.len();
    let mut weights: Vec<f64> = (0..n)
        .map(|k| {
            let mut w = (ep[k] - e[k]) / field;
            for m in (0..n).filter(|&m| m != k) {
                w *= (e[k] - ep[m]) / (e[k] - e[m]);
            }
            w
        })
        .collect();

    let mut degraded = false;
    for w in weights.iter_mut() {
        if *w < 0.0 {
            *w = match options.negative_weights {
                NegativeWeights::Clamp => 0.0,
                NegativeWeights::Reflect => -*w,
            };
            degraded = true;
        }
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::EmptyMeasure);
    }
    if degraded || (total - 1.0).abs() > WEIGHT_SUM_TOL {
        degraded = true;
        weights.iter_mut().for_each(|w| *w /= total);
    }
    SpectralMeasure::with_flag(e.to_vec(), weights, degraded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSign {
    Positive,
    Negative,
}

/// Rank-one interlacing diagnostic. For a positive field
/// `e_k <= e'_k <= e_{k+1}`, for a negative one `e_{k-1} <= e'_k <= e_k`.
pub fn check_interlacing(s: &Spectrum, s_prime: &Spectrum, sign: FieldSign) -> bool {
    if s.len() != s_prime.len() {
        return false;
    }
    let e = s.eigenvalues();
    let ep = s_prime.eigenvalues();
    let n = e.len();
    (0..n).all(|k| match sign {
        FieldSign::Positive => e[k] <= ep[k] && (k + 1 == n || ep[k] <= e[k + 1]),
        FieldSign::Negative => ep[k] <= e[k] && (k == 0 || e[k - 1] <= ep[k]),
    })
}
