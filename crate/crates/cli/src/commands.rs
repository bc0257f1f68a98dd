use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use zeeman_core::protocol::{all_pairs, estimate_network, measure_spectra, simulate_network_measurements};
use zeeman_core::protocol::{NetworkMeasurements, PairMeasurement};
use zeeman_core::spectral::stream_seed;
use zeeman_core::{
    build_chain_matrix, build_spin_single_excitation, infer_field_strength, perturb_spectrum,
    reconstruct_chain, recover_weights, run_stability_sweep, ChainSpec, Complex64, Error,
    HermitianMatrix, NetworkSpec, NoiseModel, Perturbation, RecoveryOptions, SpectralMeasure, Spectrum,
    SpinChainSpec, SweepConfig,
};

use crate::args::*;
use crate::files::{invalid, read_json, read_probe, OutDir, System};
use crate::manifest::RunManifest;

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Gen(a) => gen(command, a),
        Command::Spectrum(a) => spectrum_cmd(command, a),
        Command::EstimateChain(a) => estimate_chain(command, a),
        Command::EstimateNetwork(a) => estimate_network_cmd(command, a),
        Command::Sweep(a) => sweep(command, a),
        Command::Replay(a) => replay(a),
    }
}

/// Core errors raised while checking user input count as invalid input.
fn input<T>(result: zeeman_core::Result<T>) -> Result<T> {
    result.map_err(|e| invalid(e.to_string()))
}

fn gen(command: &Command, a: &GenArgs) -> Result<()> {
    let mut rng = a.seed.map(ChaCha8Rng::seed_from_u64);
    let mut inputs = Vec::new();
    if a.kind != GenKind::SweepConfig && a.kind != GenKind::Measurements && a.sites == 0 {
        bail!(invalid("--sites must be at least 1"));
    }

    let mut out = OutDir::new(&a.out);
    match a.kind {
        GenKind::Chain => {
            let chain = match rng.as_mut() {
                Some(r) => input(ChainSpec::new(
                    (1..a.sites).map(|_| r.random_range(0.5..1.5)).collect(),
                    (0..a.sites).map(|_| r.random_range(-0.5..0.5)).collect(),
                ))?,
                None => input(ChainSpec::uniform(a.sites, a.coupling))?,
            };
            out.write_json("system.json", &chain)?;
        }
        GenKind::Spin => {
            let spin = match rng.as_mut() {
                Some(r) => input(SpinChainSpec::new(
                    (1..a.sites).map(|_| r.random_range(0.5..1.5)).collect(),
                    (0..a.sites).map(|_| r.random_range(-0.5..0.5)).collect(),
                    a.anisotropy,
                ))?,
                None => input(SpinChainSpec::new(vec![a.coupling; a.sites - 1], vec![0.0; a.sites], a.anisotropy))?,
            };
            out.write_json("system.json", &spin)?;
        }
        GenKind::Network => {
            let Some(r) = rng.as_mut() else {
                bail!(invalid("gen network needs --seed"));
            };
            let n = a.sites;
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = Complex64::new(r.random_range(-1.0..1.0), 0.0);
                for j in (i + 1)..n {
                    m[(i, j)] = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
                    m[(j, i)] = m[(i, j)].conj();
                }
            }
            out.write_json("system.json", &input(NetworkSpec::new(m))?)?;
        }
        GenKind::SweepConfig => {
            out.write_json("sweep_config.json", &SweepConfig::figure_two(a.seed.unwrap_or(0)))?;
        }
        GenKind::Measurements => {
            let Some(path) = &a.spec else {
                bail!(invalid("gen measurements needs --spec"));
            };
            inputs.push(path.clone());
            let network = match System::load(path)? {
                System::Network(n) => n,
                System::Chain(c) => input(NetworkSpec::new(build_chain_matrix(&c).into_matrix()))?,
                System::Spin(_) => bail!(invalid("gen measurements takes a chain or network spec")),
            };
            let n = network.dimension();
            let data = simulate_network_measurements(&network, a.field, &all_pairs(n))?;
            write_measurements(&mut out, &data)?;
        }
    }
    RunManifest::new(command, inputs, a.seed).finish(&mut out)
}

fn write_measurements(out: &mut OutDir, data: &NetworkMeasurements) -> Result<()> {
    out.write_json("spectrum_h.json", &data.spectrum)?;
    for (site, m) in data.sites.iter().enumerate() {
        out.write_json(&format!("site_{site}.json"), m)?;
    }
    for p in &data.pairs {
        let (a, b) = p.pair;
        out.write_json(&format!("plus_{a}_{b}.json"), &p.plus)?;
        out.write_json(&format!("imag_{a}_{b}.json"), &p.imag)?;
    }
    Ok(())
}

fn system_matrix(system: &System) -> Result<HermitianMatrix> {
    Ok(match system {
        System::Chain(c) => build_chain_matrix(c),
        System::Spin(s) => build_chain_matrix(&input(build_spin_single_excitation(s))?),
        System::Network(n) => n.to_matrix(),
    })
}

fn spectrum_cmd(command: &Command, a: &SpectrumArgs) -> Result<()> {
    let system = System::load(&a.spec)?;
    let n = system.n_sites();
    let mut inputs = vec![a.spec.clone()];
    let marker = match (a.site, &a.probe) {
        (Some(site), _) => input(Perturbation::site(n, site, a.field))?,
        (None, Some(path)) => {
            inputs.push(path.clone());
            let amplitudes = read_probe(path)?;
            input(Perturbation::new(DVector::from_vec(amplitudes), a.field))?
        }
        (None, None) => bail!(invalid("give --site or --probe")),
    };
    if marker.dimension() != n {
        bail!(invalid(format!("probe has {} amplitudes for {n} sites", marker.dimension())));
    }
    let noise = |draw: u64| input(NoiseModel::new(a.sigma, stream_seed(a.seed, &[draw])));
    let noise = [noise(0)?, noise(1)?];

    let h = system_matrix(&system)?;
    let (s, sp) = measure_spectra(&h, &marker)?;
    let s = perturb_spectrum(&s, &noise[0]);
    let sp = perturb_spectrum(&sp, &noise[1]);

    let mut out = OutDir::new(&a.out);
    out.write_json("spectrum_h.json", &s)?;
    out.write_json("spectrum_h_prime.json", &sp)?;
    RunManifest::new(command, inputs, Some(a.seed)).finish(&mut out)
}

#[derive(Serialize)]
struct ChainEstimate<'a> {
    n_sites: usize,
    couplings: &'a [f64],
    onsite: &'a [f64],
    field: f64,
    degraded: bool,
    /// Index of the coupling at which the recurrence stopped; the remaining
    /// parameters are reported as zero.
    breakdown: Option<usize>,
}

fn load_spectrum(path: &Path) -> Result<Spectrum> {
    input(read_json::<Spectrum>(path)?.validated())
}

fn estimate_chain(command: &Command, a: &EstimateChainArgs) -> Result<()> {
    let s = load_spectrum(&a.spectrum_h)?;
    let sp = load_spectrum(&a.spectrum_h_prime)?;
    if s.len() != sp.len() {
        bail!(invalid(format!("spectra have {} and {} eigenvalues", s.len(), sp.len())));
    }
    if let Some(f) = a.field {
        if !f.is_finite() {
            bail!(invalid("--field must be finite"));
        }
    }
    let field = match a.field {
        Some(f) => f,
        None => infer_field_strength(&s, &sp)?,
    };
    let options = RecoveryOptions {
        field: a.field,
        ..Default::default()
    };
    let measure = recover_weights(&s, &sp, options)?;

    let (params, breakdown, failure) = match reconstruct_chain(&measure) {
        Ok(chain) => ((chain.couplings().to_vec(), chain.onsite().to_vec()), None, None),
        Err(e @ Error::ReconstructionBreakdown { .. }) => {
            let Error::ReconstructionBreakdown { index, partial } = &e else {
                unreachable!()
            };
            ((partial.couplings.clone(), partial.onsite.clone()), Some(*index), Some(e))
        }
        Err(e) => return Err(e.into()),
    };

    let mut out = OutDir::new(&a.out);
    out.write_json("measure.json", &measure)?;
    out.write_json(
        "chain.json",
        &ChainEstimate {
            n_sites: measure.len(),
            couplings: &params.0,
            onsite: &params.1,
            field,
            degraded: measure.degraded(),
            breakdown,
        },
    )?;
    let mut manifest = RunManifest::new(command, vec![a.spectrum_h.clone(), a.spectrum_h_prime.clone()], None);
    manifest.resolved = json!({ "field": field });
    manifest.finish(&mut out)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Reads `site_<n>.json` for every site and every `plus_<a>_<b>.json`
/// that has a matching `imag_<a>_<b>.json`.
fn load_measurements(dir: &Path) -> Result<(NetworkMeasurements, Vec<PathBuf>)> {
    let spectrum_path = dir.join("spectrum_h.json");
    let spectrum = load_spectrum(&spectrum_path)?;
    let mut inputs = vec![spectrum_path];
    let load = |path: &Path| -> Result<SpectralMeasure> { input(read_json::<SpectralMeasure>(path)?.validated()) };

    let mut sites = Vec::with_capacity(spectrum.len());
    for site in 0..spectrum.len() {
        let path = dir.join(format!("site_{site}.json"));
        sites.push(load(&path)?);
        inputs.push(path);
    }

    let entries = fs::read_dir(dir).map_err(|e| invalid(format!("cannot list {}: {e}", dir.display())))?;
    let mut pair_keys = BTreeMap::new();
    for entry in entries {
        let name = entry?.file_name().to_string_lossy().into_owned();
        let Some(rest) = name.strip_prefix("plus_").and_then(|r| r.strip_suffix(".json")) else {
            continue;
        };
        let pair = rest
            .split_once('_')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| invalid(format!("cannot read a site pair from {name}")))?;
        pair_keys.insert(pair, rest.to_string());
    }
    let mut pairs = Vec::with_capacity(pair_keys.len());
    for (pair, key) in pair_keys {
        let plus_path = dir.join(format!("plus_{key}.json"));
        let imag_path = dir.join(format!("imag_{key}.json"));
        pairs.push(PairMeasurement {
            pair,
            plus: load(&plus_path)?,
            imag: load(&imag_path)?,
        });
        inputs.extend([plus_path, imag_path]);
    }
    Ok((NetworkMeasurements { spectrum, sites, pairs }, inputs))
}

fn estimate_network_cmd(command: &Command, a: &EstimateNetworkArgs) -> Result<()> {
    let (data, inputs) = load_measurements(&a.measures)?;
    let network = estimate_network(&data)?;
    let mut out = OutDir::new(&a.out);
    out.write_json("network.json", &network)?;
    RunManifest::new(command, inputs, None).finish(&mut out)
}

fn thread_count() -> Result<usize> {
    match std::env::var("ZEEMAN_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("ZEEMAN_THREADS must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn sweep(command: &Command, a: &SweepArgs) -> Result<()> {
    let mut config: SweepConfig = read_json(&a.config)?;
    if a.known_field {
        config.use_known_field = true;
    }
    input(config.validate())?;
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let result = pool.install(|| run_stability_sweep(&config))?;

    let mut out = OutDir::new(&a.out);
    out.write_text("sweep.csv", &result.to_csv())?;
    let mut manifest = RunManifest::new(command, vec![a.config.clone()], Some(config.master_seed));
    manifest.resolved = json!({ "config": config });
    manifest.finish(&mut out)
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::load(&a.manifest)?;
    let mut command = manifest.parameters;
    if let Some(out) = &a.out {
        match &mut command {
            Command::Gen(c) => c.out = out.clone(),
            Command::Spectrum(c) => c.out = out.clone(),
            Command::EstimateChain(c) => c.out = out.clone(),
            Command::EstimateNetwork(c) => c.out = out.clone(),
            Command::Sweep(c) => c.out = out.clone(),
            Command::Replay(_) => {}
        }
    }
    if matches!(command, Command::Replay(_)) {
        bail!(invalid("a manifest cannot record a replay"));
    }
    run(&command)
}
