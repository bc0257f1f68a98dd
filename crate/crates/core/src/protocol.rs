//! End-to-end helpers that chain the measurement simulation, weight recovery
//! and reconstruction steps together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{recover_weights, RecoveryOptions, SpectralMeasure};
use crate::model::{apply_perturbation, HermitianMatrix, NetworkSpec, Perturbation};
use crate::reconstruction::{assemble_network, reconstruct_chain, recover_cross_terms, CrossTermData};
use crate::model::ChainSpec;
use crate::spectral::{spectrum, Spectrum};

/// Spectra of `h` and of `h` with the marker field applied.
pub fn measure_spectra(h: &HermitianMatrix, marker: &Perturbation) -> Result<(Spectrum, Spectrum)> {
    let perturbed = apply_perturbation(h, marker)?;
    Ok((spectrum(h, "H")?, spectrum(&perturbed, "H'")?))
}

/// Site-1 weights and the chain they determine.
pub fn estimate_chain(s: &Spectrum, s_prime: &Spectrum, options: RecoveryOptions) -> Result<(SpectralMeasure, ChainSpec)> {
    let measure = recover_weights(s, s_prime, options)?;
    let chain = reconstruct_chain(&measure)?;
    Ok((measure, chain))
}

/// Measures from the two superposition probes on one site pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMeasurement {
    pub pair: (usize, usize),
    pub plus: SpectralMeasure,
    pub imag: SpectralMeasure,
}

/// Everything the network protocol observes: the spectrum of `H`, one
/// measure per site probe, and the superposition measures per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeasurements {
    pub spectrum: Spectrum,
    pub sites: Vec<SpectralMeasure>,
    pub pairs: Vec<PairMeasurement>,
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect()
}

/// Runs the four-probe protocol on `network` with field strength `field`,
/// noiselessly, for every site and for each pair in `pairs`.
pub fn simulate_network_measurements(
    network: &NetworkSpec,
    field: f64,
    pairs: &[(usize, usize)],
) -> Result<NetworkMeasurements> {
    let h = network.to_matrix();
    let n = h.dimension();
    let s = spectrum(&h, "H")?;
    // A probe orthogonal to some eigenvector leaves that eigenvalue in place;
    // its weight is then exactly zero rather than an overlap error.
    let options = RecoveryOptions {
        field: Some(field),
        overlap_tolerance: Some(0.0),
        ..Default::default()
    };
    let probe = |p: Perturbation| -> Result<SpectralMeasure> {
        let sp = spectrum(&apply_perturbation(&h, &p)?, "H'")?;
        recover_weights(&s, &sp, options)
    };

    let sites = (0..n)
        .map(|site| probe(Perturbation::site(n, site, field)?))
        .collect::<Result<Vec<_>>>()?;
    let pairs = pairs
        .iter()
        .map(|&(a, b)| {
            Ok(PairMeasurement {
                pair: (a, b),
                plus: probe(Perturbation::pair_sum(n, a, b, field)?)?,
                imag: probe(Perturbation::pair_imag(n, a, b, field)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkMeasurements { spectrum: s, sites, pairs })
}

/// Cross terms for every measured pair.
pub fn network_cross_terms(data: &NetworkMeasurements) -> Result<Vec<CrossTermData>> {
    let n = data.sites.len();
    data.pairs
        .iter()
        .map(|p| {
            let (a, b) = p.pair;
            if a >= n || b >= n {
                return Err(Error::InvalidSpec(format!("pair {:?} out of range for {n} sites", p.pair)));
            }
            recover_cross_terms(&data.sites[a], &data.sites[b], &p.plus, &p.imag, p.pair)
        })
        .collect()
}

pub fn estimate_network(data: &NetworkMeasurements) -> Result<NetworkSpec> {
    let cross = network_cross_terms(data)?;
    assemble_network(&data.sites, &cross, &data.spectrum)
}
