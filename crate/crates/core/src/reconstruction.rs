//! From spectral measures to Hamiltonian parameters.
//!
//! Chains: the site-1 measure of a Jacobi matrix determines it uniquely.
//! The moment equations `sum_k e_k^m w_k = <1|H^m|1>` are solved by running
//! the three-term recurrence (Lanczos on `diag(e)` started from `sqrt(w)`),
//! which produces the same parameters without forming the polynomial system.
//!
//! Networks: diagonal weights from single-site probes plus cross terms from
//! the two superposition probes give every eigenvector up to a phase, which
//! is fixed per eigenvector at its heaviest site.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::SpectralMeasure;
use crate::model::{ChainSpec, Complex64, NetworkSpec};
use crate::spectral::Spectrum;

pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-12;

const RELATIVE_NODE_TOL: f64 = 1e-8;
const CAUCHY_SCHWARZ_SLACK: f64 = 1e-9;
const CONSISTENCY_TOL: f64 = 1e-6;
const EDGE_TOL: f64 = 1e-12;
const SITE_TOL: f64 = 1e-10;

/// Raw tridiagonal parameters. Unlike [`ChainSpec`] the couplings may be
/// zero, which is how a partial result after breakdown is reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiParameters {
    pub onsite: Vec<f64>,
    pub couplings: Vec<f64>,
}

impl From<&ChainSpec> for JacobiParameters {
    fn from(spec: &ChainSpec) -> Self {
        Self {
            onsite: spec.onsite().to_vec(),
            couplings: spec.couplings().to_vec(),
        }
    }
}

/// `sum_k e_k^m w_k`, i.e. `<psi|H^m|psi>`.
pub fn moment(measure: &SpectralMeasure, m: u32) -> f64 {
    measure
        .nodes()
        .iter()
        .zip(measure.weights())
        .map(|(&e, &w)| e.powi(m as i32) * w)
        .sum()
}

pub fn reconstruct_chain(measure: &SpectralMeasure) -> Result<ChainSpec> {
    reconstruct_chain_with(measure, DEFAULT_BREAKDOWN_TOL)
}

/// Jacobi matrix whose site-1 spectral measure is `measure`.
///
/// Fails with [`Error::ReconstructionBreakdown`] when a squared coupling
/// falls to `breakdown_tol` or below; the error carries the parameters found
/// so far, with the rest set to zero. A measure supported on fewer than `N`
/// nodes always breaks down at its support size.
pub fn reconstruct_chain_with(measure: &SpectralMeasure, breakdown_tol: f64) -> Result<ChainSpec> {
    let n = measure.len();
    let x = DVector::from_column_slice(measure.nodes());
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    basis.push(DVector::from_iterator(n, measure.weights().iter().map(|w| w.sqrt())));

    let mut onsite = vec![0.0; n];
    let mut couplings = vec![0.0; n.saturating_sub(1)];

    for j in 0..n {
        let q = &basis[j];
        let xq = x.component_mul(q);
        onsite[j] = q.dot(&xq);
        if j + 1 == n {
            break;
        }
        let mut r = xq - q * onsite[j];
        if j > 0 {
            r -= &basis[j - 1] * couplings[j - 1];
        }
        // twice is enough
        for _ in 0..2 {
            for v in &basis {
                let proj = v.dot(&r);
                r.axpy(-proj, v, 1.0);
            }
        }
        let norm_sq = r.norm_squared();
        if !(norm_sq > breakdown_tol) {
            return Err(Error::ReconstructionBreakdown {
                index: j,
                partial: Box::new(JacobiParameters { onsite, couplings }),
            });
        }
        let c = norm_sq.sqrt();
        couplings[j] = c;
        basis.push(r / c);
    }
    ChainSpec::new(couplings, onsite)
}

/// `t_k = <n|e_k><e_k|m>` for one site pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCrossTerms", into = "RawCrossTerms")]
pub struct CrossTermData {
    pair: (usize, usize),
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawCrossTerms {
    pair: [usize; 2],
    values: Vec<[f64; 2]>,
}

impl TryFrom<RawCrossTerms> for CrossTermData {
    type Error = Error;

    fn try_from(raw: RawCrossTerms) -> Result<Self> {
        let [n, m] = raw.pair;
        if n == m {
            return Err(Error::InvalidSpec("cross terms need two distinct sites".into()));
        }
        Ok(Self {
            pair: (n, m),
            values: raw.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
        })
    }
}

impl From<CrossTermData> for RawCrossTerms {
    fn from(data: CrossTermData) -> Self {
        RawCrossTerms {
            pair: [data.pair.0, data.pair.1],
            values: data.values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl CrossTermData {
    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

fn node_tolerance(nodes: &[f64]) -> f64 {
    let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    RELATIVE_NODE_TOL * (hi - lo).max(f64::MIN_POSITIVE)
}

fn check_nodes(reference: &[f64], other: &[f64], tol: f64) -> Result<()> {
    if reference.len() != other.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: other.len(),
        });
    }
    for (index, (a, b)) in reference.iter().zip(other).enumerate() {
        let distance = (a - b).abs();
        if distance > tol {
            return Err(Error::NodeMismatch { index, distance });
        }
    }
    Ok(())
}

/// Cross terms from the four probes `|n>`, `|m>`, `(|n> + |m>)/sqrt 2` and
/// `(|n> + i|m>)/sqrt 2`:
///
/// ```text
/// Re t_k = w_plus,k - (w_n,k + w_m,k) / 2
/// Im t_k = (w_n,k + w_m,k) / 2 - w_imag,k
/// ```
pub fn recover_cross_terms(
    w_n: &SpectralMeasure,
    w_m: &SpectralMeasure,
    w_plus: &SpectralMeasure,
    w_imag: &SpectralMeasure,
    pair: (usize, usize),
) -> Result<CrossTermData> {
    if pair.0 == pair.1 {
        return Err(Error::InvalidSpec("cross terms need two distinct sites".into()));
    }
    let tol = node_tolerance(w_n.nodes());
    for other in [w_m, w_plus, w_imag] {
        check_nodes(w_n.nodes(), other.nodes(), tol)?;
    }
    let values = (0..w_n.len())
        .map(|k| {
            let mean = 0.5 * (w_n.weights()[k] + w_m.weights()[k]);
            Complex64::new(w_plus.weights()[k] - mean, mean - w_imag.weights()[k])
        })
        .collect::<Vec<_>>();

    for (k, t) in values.iter().enumerate() {
        let bound = w_n.weights()[k] * w_m.weights()[k] + CAUCHY_SCHWARZ_SLACK;
        if t.norm_sqr() > bound {
            return Err(Error::InconsistentData(format!(
                "cross term {k} of pair {pair:?} exceeds the Cauchy-Schwarz bound: |t|^2 = {:e} > {bound:e}",
                t.norm_sqr()
            )));
        }
    }
    Ok(CrossTermData { pair, values })
}

/// Rebuilds `H = sum_k e_k |e_k><e_k|` from per-site measures and cross
/// terms on a set of pairs connecting all sites.
///
/// For each `k` the heaviest site `r` gets the real positive amplitude
/// `sqrt(w_r,k)`; the other amplitudes follow from
/// `<b|e_k> = conj(t_k(a, b)) / conj(<a|e_k>)`, always extending along the
/// strongest available link. Redundant pairs are cross-checked.
pub fn assemble_network(
    diagonal_measures: &[SpectralMeasure],
    cross: &[CrossTermData],
    s: &Spectrum,
) -> Result<NetworkSpec> {
    let n = diagonal_measures.len();
    if n == 0 {
        return Err(Error::InvalidSpec("no diagonal measures given".into()));
    }
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.len(),
        });
    }
    let e = s.eigenvalues();
    let tol = node_tolerance(e);
    for (index, w) in e.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap <= tol {
            return Err(Error::DegenerateSpectrum {
                index,
                gap,
                tolerance: tol,
            });
        }
    }
    for m in diagonal_measures {
        check_nodes(e, m.nodes(), tol)?;
    }

    // t(a, b) for both orientations of every pair
    let mut links: BTreeMap<(usize, usize), &[Complex64]> = BTreeMap::new();
    for data in cross {
        let (a, b) = data.pair;
        if a >= n || b >= n {
            return Err(Error::InvalidSpec(format!("pair {:?} out of range for {n} sites", data.pair)));
        }
        if data.values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: data.values.len(),
            });
        }
        links.insert((a, b), &data.values);
    }
    let link = |a: usize, b: usize, k: usize| -> Option<Complex64> {
        links
            .get(&(a, b))
            .map(|t| t[k])
            .or_else(|| links.get(&(b, a)).map(|t| t[k].conj()))
    };

    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (k, &ek) in e.iter().enumerate() {
        let weights: Vec<f64> = diagonal_measures.iter().map(|m| m.weights()[k]).collect();
        let pivot = weights
            .iter()
            .enumerate()
            .fold(0, |best, (i, &w)| if w > weights[best] { i } else { best });

        let mut amp: Vec<Option<Complex64>> = vec![None; n];
        amp[pivot] = Some(Complex64::new(weights[pivot].sqrt(), 0.0));
        loop {
            let mut best: Option<(f64, usize, Complex64)> = None;
            for (&(a, b), t) in &links {
                for (from, to, tk) in [(a, b, t[k]), (b, a, t[k].conj())] {
                    if let (Some(va), None) = (amp[from], amp[to]) {
                        let strength = tk.norm();
                        if strength > EDGE_TOL && best.is_none_or(|(s, _, _)| strength > s) {
                            best = Some((strength, to, tk.conj() / va.conj()));
                        }
                    }
                }
            }
            match best {
                Some((_, site, value)) => amp[site] = Some(value),
                None => break,
            }
        }

        let mut vector = DVector::<Complex64>::zeros(n);
        for site in 0..n {
            match amp[site] {
                Some(v) => vector[site] = v,
                None if weights[site] > SITE_TOL => {
                    return Err(Error::DisconnectedPhaseGraph { eigen_index: k, site });
                }
                None => {}
            }
        }

        for &(a, b) in links.keys() {
            let t = link(a, b, k).unwrap_or_default();
            let implied = vector[a] * vector[b].conj();
            let deviation = (t - implied).norm();
            if deviation > CONSISTENCY_TOL {
                return Err(Error::InconsistentData(format!(
                    "pair ({a}, {b}) disagrees with the propagated phases by {deviation:e} for eigenvector {k}"
                )));
            }
        }

        h += (&vector * vector.adjoint()) * Complex64::new(ek, 0.0);
    }
    NetworkSpec::from_hermitian_part(&h)
}
