//! Eigendecomposition, spectrum extraction and simulated spectroscopy noise.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Complex64, HermitianMatrix};

const EIGEN_EPS: f64 = f64::EPSILON;
const EIGEN_MAX_ITER: usize = 10_000;

/// Sorted eigenvalues, as revealed by spectroscopy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub label: String,
    #[serde(serialize_with = "serialize_full_precision")]
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Sorts `eigenvalues` ascending. Non-finite values are rejected.
    pub fn new(label: impl Into<String>, mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("spectrum contains non-finite values".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            label: label.into(),
            eigenvalues,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Serde does not re-check the sort order; call this after deserializing
    /// untrusted input.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.label, self.eigenvalues)
    }
}

fn serialize_full_precision<S: Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::{Error as _, SerializeSeq};
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        let raw = serde_json::value::RawValue::from_string(format!("{v:.16e}")).map_err(S::Error::custom)?;
        seq.serialize_element(&raw)?;
    }
    seq.end()
}

/// Eigenvalues (ascending) with the matching orthonormal eigenvectors as
/// columns.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenBasis {
    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.vectors.column(k).into_owned()
    }

    /// `|<site|e_k>|^2` for every `k`.
    pub fn site_weights(&self, site: usize) -> Vec<f64> {
        self.vectors.row(site).iter().map(|z| z.norm_sqr()).collect()
    }

    /// `V diag(e) V^dagger`.
    pub fn reassemble(&self) -> DMatrix<Complex64> {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(e);
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Dense Hermitian eigendecomposition (Householder tridiagonalization
/// followed by implicit-shift QR), eigenvalues sorted ascending.
pub fn eigen_decompose(h: &HermitianMatrix) -> Result<EigenBasis> {
    let eig = h
        .as_matrix()
        .clone()
        .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::ConvergenceFailure {
            max_iterations: EIGEN_MAX_ITER,
        })?;

    let n = h.dimension();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenBasis { eigenvalues, vectors })
}

/// Simulated spectroscopy: eigenvalues only.
pub fn spectrum(h: &HermitianMatrix, label: impl Into<String>) -> Result<Spectrum> {
    let basis = eigen_decompose(h)?;
    Ok(Spectrum {
        label: label.into(),
        eigenvalues: basis.eigenvalues,
    })
}

/// Independent Gaussian noise on each measured eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidSpec(format!("noise sigma must be nonnegative, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Adds one `N(0, sigma^2)` deviate per eigenvalue from a stream seeded by
/// `noise.seed`, then re-sorts.
pub fn perturb_spectrum(s: &Spectrum, noise: &NoiseModel) -> Spectrum {
    if noise.sigma == 0.0 {
        return s.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut eigenvalues: Vec<f64> = s
        .eigenvalues
        .iter()
        .map(|&e| {
            let z: f64 = StandardNormal.sample(&mut rng);
            e + noise.sigma * z
        })
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    Spectrum {
        label: s.label.clone(),
        eigenvalues,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a path of
/// indices, e.g. `(chain length, sigma index, trial, draw)`. Pure function:
/// no generator state is shared between streams.
pub fn stream_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &i| splitmix64(acc ^ splitmix64(i.wrapping_add(0xA076_1D64_78BD_642F))))
}
