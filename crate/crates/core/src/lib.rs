//! Hamiltonian parameter estimation from spectra alone.
//!
//! A static field `f` on a marker state `|psi>` turns `H` into
//! `H' = H + f |psi><psi|`. The two spectra fix the local weights
//! `|<e_k|psi>|^2` ([`inversion`]), which in turn fix a tight-binding chain
//! or, with probes on site pairs, a whole network ([`reconstruction`]).
//! [`experiments`] measures how the chain estimate degrades under noisy
//! spectroscopy.

// `!(x > tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod inversion;
pub mod model;
pub mod protocol;
pub mod reconstruction;
pub mod spectral;

pub use error::{Error, Result};
pub use experiments::{chain_error, run_stability_sweep, SweepConfig, SweepResult, SweepRow};
pub use inversion::{check_interlacing, infer_field_strength, recover_weights, FieldSign, RecoveryOptions, SpectralMeasure};
pub use model::{
    apply_perturbation, build_chain_matrix, build_complex_chain_matrix, build_spin_single_excitation, gauge_reduce,
    ChainSpec, Complex64, HermitianMatrix, NetworkSpec, Perturbation, SpinChainSpec,
};
pub use reconstruction::{
    assemble_network, moment, reconstruct_chain, recover_cross_terms, CrossTermData, JacobiParameters,
};
pub use spectral::{eigen_decompose, perturb_spectrum, spectrum, EigenBasis, NoiseModel, Spectrum};
