use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "zeeman", version, about = "Estimate Hamiltonian parameters from the spectra of H and of H with a local field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write an example system, sweep config or simulated network data.
    Gen(GenArgs),
    /// Simulate spectroscopy on H and on H' = H + f |probe><probe|.
    Spectrum(SpectrumArgs),
    /// Recover the site measure and the chain from two spectra.
    EstimateChain(EstimateChainArgs),
    /// Rebuild a network from a directory of probe measures.
    EstimateNetwork(EstimateNetworkArgs),
    /// Run the noisy-spectra stability sweep.
    Sweep(SweepArgs),
    /// Repeat the run recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Spectrum(_) => "spectrum",
            Command::EstimateChain(_) => "estimate-chain",
            Command::EstimateNetwork(_) => "estimate-network",
            Command::Sweep(_) => "sweep",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    /// Tight-binding chain; uniform unless a seed is given.
    Chain,
    /// XXZ spin chain; uniform unless a seed is given.
    Spin,
    /// Random Hermitian network (needs a seed).
    Network,
    /// The four-noise-level, 1000-sample sweep over N = 2..=20.
    SweepConfig,
    /// Noiseless all-pairs probe measures for the network in `--spec`.
    Measurements,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long, default_value_t = 4)]
    pub sites: usize,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    pub anisotropy: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Network system, for `measurements`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub field: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    /// Chain, spin chain or network JSON.
    #[arg(long)]
    pub spec: PathBuf,
    /// Marker site, counted from 0.
    #[arg(long, conflicts_with = "probe", required_unless_present = "probe")]
    pub site: Option<usize>,
    /// JSON list of `[re, im]` amplitudes of a normalized probe state.
    #[arg(long)]
    pub probe: Option<PathBuf>,
    #[arg(long)]
    pub field: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EstimateChainArgs {
    /// Spectrum of H.
    pub spectrum_h: PathBuf,
    /// Spectrum of H'.
    pub spectrum_h_prime: PathBuf,
    /// Known field strength; inferred from the spectra when omitted.
    #[arg(long)]
    pub field: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EstimateNetworkArgs {
    /// Directory with `spectrum_h.json`, `site_<n>.json`,
    /// `plus_<a>_<b>.json` and `imag_<a>_<b>.json`.
    pub measures: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Use the applied field instead of inferring it from each noisy pair.
    #[arg(long)]
    pub known_field: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
