mod common;

use nalgebra::DMatrix;
use rand::Rng;
use zeeman_core::inversion::{default_gap_tolerance, default_overlap_tolerance};
use zeeman_core::protocol::{all_pairs, estimate_network, measure_spectra, simulate_network_measurements};
use zeeman_core::{
    build_chain_matrix, build_complex_chain_matrix, check_interlacing, gauge_reduce, infer_field_strength, moment,
    reconstruct_chain, recover_cross_terms, recover_weights, spectrum, ChainSpec, Complex64, Error, FieldSign,
    HermitianMatrix, NetworkSpec, Perturbation, RecoveryOptions, SpectralMeasure, Spectrum,
};

use common::*;

fn spectra(chain: &ChainSpec, f: f64) -> (Spectrum, Spectrum) {
    let h = build_chain_matrix(chain);
    measure_spectra(&h, &Perturbation::site(chain.n_sites(), 0, f).unwrap()).unwrap()
}

/// Squared first components of the eigenvectors, from Jacobi rotations.
fn oracle_weights(chain: &ChainSpec) -> (Vec<f64>, Vec<f64>) {
    let (values, vectors) = jacobi_eigen(&real_tridiagonal(chain.couplings(), chain.onsite()));
    let weights = (0..values.len()).map(|k| vectors[(0, k)].powi(2)).collect();
    (values, weights)
}

#[test]
fn three_site_weights_match_eigenvectors() {
    let chain = ChainSpec::uniform(3, 1.0).unwrap();
    let (s, sp) = spectra(&chain, 10.0);
    let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
    for (w, want) in m.weights().iter().zip([0.25, 0.5, 0.25]) {
        assert!((w - want).abs() < 1e-12);
    }
    let (_, oracle) = oracle_weights(&chain);
    for (w, o) in m.weights().iter().zip(&oracle) {
        assert!((w - o).abs() < 1e-12);
    }
    assert!((infer_field_strength(&s, &sp).unwrap() - 10.0).abs() < 1e-12);
    let c = reconstruct_chain(&m).unwrap();
    for x in c.couplings() {
        assert!((x - 1.0).abs() < 1e-10);
    }
}

#[test]
fn weights_match_oracle_on_random_chains() {
    let mut r = rng(101);
    for _ in 0..100 {
        let n = r.random_range(1..=20);
        let chain = random_chain(&mut r, n);
        let (s, sp) = spectra(&chain, 10.0);
        let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
        let (nodes, oracle) = oracle_weights(&chain);
        for k in 0..n {
            assert!((m.nodes()[k] - nodes[k]).abs() < 1e-12);
            assert!((m.weights()[k] - oracle[k]).abs() < 1e-8, "N={n} k={k}");
        }
    }
}

#[test]
fn weights_sum_to_one_with_known_field() {
    let mut r = rng(102);
    for f in [0.1, 1.0, 10.0] {
        for _ in 0..40 {
            let n = r.random_range(1..=20);
            let chain = random_chain(&mut r, n);
            let (s, sp) = spectra(&chain, f);
            let opts = RecoveryOptions {
                field: Some(f),
                ..Default::default()
            };
            let m = recover_weights(&s, &sp, opts).unwrap();
            // not degraded means no clamping and no renormalization was needed
            assert!(!m.degraded(), "f={f} N={n}");
            assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn weights_do_not_depend_on_field() {
    let mut r = rng(103);
    for _ in 0..40 {
        let n = r.random_range(1..=20);
        let chain = random_chain(&mut r, n);
        let reference = {
            let (s, sp) = spectra(&chain, 0.5);
            recover_weights(&s, &sp, RecoveryOptions::default()).unwrap()
        };
        for f in [2.0, 10.0] {
            let (s, sp) = spectra(&chain, f);
            let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
            for (a, b) in m.weights().iter().zip(reference.weights()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn secular_polynomial_factorizes() {
    let mut r = rng(104);
    for _ in 0..50 {
        let n = r.random_range(1..=10);
        let chain = random_chain(&mut r, n);
        let f = 10.0;
        let (s, sp) = spectra(&chain, f);
        let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
        let e = s.eigenvalues();
        let ep = sp.eigenvalues();
        for _ in 0..20 {
            let x: f64 = r.random_range(-3.0..13.0);
            let lhs: f64 = ep.iter().map(|v| x - v).product();
            let full: f64 = e.iter().map(|v| x - v).product();
            let correction: f64 = (0..n)
                .map(|k| m.weights()[k] * (0..n).filter(|&j| j != k).map(|j| x - e[j]).product::<f64>())
                .sum();
            let rhs = full - f * correction;
            let scale = lhs.abs().max(full.abs()).max(f * correction.abs()).max(1e-300);
            assert!((lhs - rhs).abs() <= 1e-8 * scale, "x={x}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn positive_fields_interlace() {
    let mut r = rng(105);
    for _ in 0..50 {
        let n = r.random_range(1..=20);
        let chain = random_chain(&mut r, n);
        let f = [0.1, 1.0, 10.0][r.random_range(0..3)];
        let (s, sp) = spectra(&chain, f);
        assert!(check_interlacing(&s, &sp, FieldSign::Positive));
        let (s, sp) = spectra(&chain, -f);
        assert!(check_interlacing(&s, &sp, FieldSign::Negative));
    }
}

#[test]
fn negative_field_recovers_same_weights() {
    let chain = ChainSpec::new(vec![0.8, 1.2, 0.9], vec![0.1, -0.3, 0.2, 0.0]).unwrap();
    let (s, sp) = spectra(&chain, -4.0);
    let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
    let (_, oracle) = oracle_weights(&chain);
    for (a, b) in m.weights().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn moments_match_matrix_powers() {
    let mut r = rng(106);
    for _ in 0..40 {
        let n = r.random_range(1..=10);
        let chain = random_chain(&mut r, n);
        let (s, sp) = spectra(&chain, 10.0);
        let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
        let h = real_tridiagonal(chain.couplings(), chain.onsite());
        let mut power = DMatrix::<f64>::identity(n, n);
        for order in 0..=8u32 {
            let direct = power[(0, 0)];
            assert!((moment(&m, order) - direct).abs() < 1e-8 * direct.abs().max(1.0), "m={order}");
            power = &power * &h;
        }
    }
}

#[test]
fn literal_moment_equations_agree_with_recurrence() {
    // with zero onsite fields: mu_2 = c1^2, mu_4 = c1^2 (c1^2 + c2^2)
    let mut r = rng(107);
    for _ in 0..20 {
        let n = r.random_range(3..=12);
        let couplings: Vec<f64> = (0..n - 1).map(|_| r.random_range(0.5..1.5)).collect();
        let chain = ChainSpec::new(couplings, vec![0.0; n]).unwrap();
        let (s, sp) = spectra(&chain, 10.0);
        let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
        let c1_sq = moment(&m, 2);
        let c2_sq = moment(&m, 4) / c1_sq - c1_sq;
        let rebuilt = reconstruct_chain(&m).unwrap();
        assert!((rebuilt.couplings()[0] - c1_sq.sqrt()).abs() < 1e-10);
        assert!((rebuilt.couplings()[1] - c2_sq.sqrt()).abs() < 1e-10);
        assert!((rebuilt.couplings()[0] - chain.couplings()[0]).abs() < 1e-10);
    }
}

#[test]
fn reconstructed_chain_reproduces_measure() {
    let mut r = rng(108);
    for _ in 0..60 {
        let n = r.random_range(1..=20);
        let nodes: Vec<f64> = {
            let mut v: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        if nodes.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let m = SpectralMeasure::new(nodes.clone(), raw.iter().map(|w| w / total).collect()).unwrap();
        let chain = reconstruct_chain(&m).unwrap();
        assert!(chain.couplings().iter().all(|&c| c > 0.0));
        let (values, vectors) = jacobi_eigen(&real_tridiagonal(chain.couplings(), chain.onsite()));
        for k in 0..n {
            assert!((values[k] - nodes[k]).abs() < 1e-8);
            assert!((vectors[(0, k)].powi(2) - m.weights()[k]).abs() < 1e-8);
        }
    }
}

#[test]
fn chain_round_trip_with_onsite_fields() {
    // longer random chains have eigenvectors localized far from site 0 whose
    // weights sit near rounding level; those are covered by the acceptance run
    let mut r = rng(109);
    for _ in 0..100 {
        let n = r.random_range(1..=12);
        let chain = random_chain(&mut r, n);
        let (s, sp) = spectra(&chain, 10.0);
        let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
        let est = reconstruct_chain(&m).unwrap();
        for (a, b) in est.couplings().iter().zip(chain.couplings()) {
            assert!((a - b).abs() < 1e-6);
        }
        for (a, b) in est.onsite().iter().zip(chain.onsite()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn complex_chain_recovers_magnitudes() {
    let mut r = rng(110);
    for _ in 0..30 {
        let n = r.random_range(2..=15);
        let couplings: Vec<Complex64> = (0..n - 1)
            .map(|_| Complex64::from_polar(r.random_range(0.5..1.5), r.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
            .collect();
        let onsite: Vec<f64> = (0..n).map(|_| r.random_range(-0.5..0.5)).collect();
        let h = build_complex_chain_matrix(&couplings, &onsite).unwrap();
        let (s, sp) = measure_spectra(&h, &Perturbation::site(n, 0, 10.0).unwrap()).unwrap();
        let est = reconstruct_chain(&recover_weights(&s, &sp, RecoveryOptions::default()).unwrap()).unwrap();
        let (mags, _) = gauge_reduce(&couplings).unwrap();
        for (a, b) in est.couplings().iter().zip(&mags) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn cross_terms_match_eigenvectors_on_random_hermitian() {
    let mut r = rng(111);
    let mut checked = 0;
    while checked < 20 {
        let m = random_hermitian(&mut r, 3);
        if min_gap(&hermitian_eigenvalues(&m)) < 1e-2 {
            continue;
        }
        checked += 1;
        let net = NetworkSpec::from_hermitian_part(&m).unwrap();
        let data = simulate_network_measurements(&net, 10.0, &[(0, 2)]).unwrap();
        let t = recover_cross_terms(&data.sites[0], &data.sites[2], &data.pairs[0].plus, &data.pairs[0].imag, (0, 2))
            .unwrap();
        // direct eigendecomposition through the real embedding: each
        // eigenvalue appears twice, with the complex vector (u + i v) packed
        // as [u; v]. Compare gauge-invariant products instead of vectors.
        let basis = zeeman_core::eigen_decompose(&net.to_matrix()).unwrap();
        for k in 0..3 {
            let v = basis.vector(k);
            let want = v[0] * v[2].conj();
            assert!((t.values()[k] - want).norm() < 1e-8, "k={k}: {} vs {want}", t.values()[k]);
        }
        // and the product is consistent with the independent spectrum
        let oracle = hermitian_eigenvalues(&m);
        for (a, b) in data.spectrum.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn network_round_trip_random_hermitian() {
    let mut r = rng(112);
    let mut done = 0;
    while done < 30 {
        let n = r.random_range(1..=6);
        let m = random_hermitian(&mut r, n);
        if n > 1 && min_gap(&hermitian_eigenvalues(&m)) < 1e-2 {
            continue;
        }
        done += 1;
        let net = NetworkSpec::from_hermitian_part(&m).unwrap();
        let data = simulate_network_measurements(&net, 10.0, &all_pairs(n)).unwrap();
        let est = estimate_network(&data).unwrap();
        assert!(max_abs(&(est.entries() - net.entries())) < 1e-6);
    }
}

#[test]
fn network_with_spanning_pairs_only() {
    // a chain treated as a network, probing only the nearest-neighbour pairs
    let chain = ChainSpec::new(vec![1.0, 0.7, 1.3], vec![0.2, -0.1, 0.0, 0.3]).unwrap();
    let h = build_chain_matrix(&chain);
    let net = NetworkSpec::new(h.as_matrix().clone()).unwrap();
    let data = simulate_network_measurements(&net, 10.0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let est = estimate_network(&data).unwrap();
    assert!(max_abs(&(est.entries() - h.as_matrix())) < 1e-8);
}

#[test]
fn three_site_chain_as_network() {
    let h = build_chain_matrix(&ChainSpec::uniform(3, 1.0).unwrap());
    let net = NetworkSpec::new(h.as_matrix().clone()).unwrap();
    let est = estimate_network(&simulate_network_measurements(&net, 10.0, &all_pairs(3)).unwrap()).unwrap();
    assert!(max_abs(&(est.entries() - h.as_matrix())) < 1e-8);
}

#[test]
fn corrupted_redundant_pair_is_inconsistent() {
    let mut r = rng(113);
    let m = loop {
        let m = random_hermitian(&mut r, 3);
        if min_gap(&hermitian_eigenvalues(&m)) > 0.05 {
            break m;
        }
    };
    let net = NetworkSpec::from_hermitian_part(&m).unwrap();
    let mut data = simulate_network_measurements(&net, 10.0, &all_pairs(3)).unwrap();
    // swap the two superposition measures of one pair: flips the sign of Im t
    let p = &mut data.pairs[2];
    std::mem::swap(&mut p.plus, &mut p.imag);
    assert!(matches!(estimate_network(&data), Err(Error::InconsistentData(_))));
}

#[test]
fn degenerate_network_is_rejected() {
    let m = DMatrix::<Complex64>::identity(3, 3);
    let net = NetworkSpec::from_hermitian_part(&m).unwrap();
    assert!(matches!(
        simulate_network_measurements(&net, 10.0, &all_pairs(3)),
        Err(Error::DegenerateSpectrum { .. })
    ));
}

#[test]
fn default_gap_tolerance_scales_with_range() {
    let s = Spectrum::new("", vec![-1.0, 1.0]).unwrap();
    let sp = Spectrum::new("", vec![0.0, 3.0]).unwrap();
    assert!((default_gap_tolerance(&s) - 2e-8).abs() < 1e-20);
    assert!(default_overlap_tolerance(&s, &sp) < 1e-13);
    let h = HermitianMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    assert_eq!(spectrum(&h, "").unwrap().len(), 2);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn chain_strategy() -> impl Strategy<Value = ChainSpec> {
        (1usize..=12).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.5f64..1.5, n - 1),
                proptest::collection::vec(-0.5f64..0.5, n),
            )
                .prop_map(|(c, b)| ChainSpec::new(c, b).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn known_field_weights_are_normalized(chain in chain_strategy(), f in prop::sample::select(vec![0.1, 1.0, 10.0])) {
            let (s, sp) = spectra(&chain, f);
            prop_assert!(check_interlacing(&s, &sp, FieldSign::Positive));
            let m = recover_weights(&s, &sp, RecoveryOptions { field: Some(f), ..Default::default() }).unwrap();
            prop_assert!(!m.degraded());
            prop_assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn weights_are_field_invariant(chain in chain_strategy()) {
            let reference = {
                let (s, sp) = spectra(&chain, 0.5);
                recover_weights(&s, &sp, RecoveryOptions::default()).unwrap()
            };
            for f in [2.0, 10.0] {
                let (s, sp) = spectra(&chain, f);
                prop_assert!((infer_field_strength(&s, &sp).unwrap() - f).abs() < 1e-9);
                let m = recover_weights(&s, &sp, RecoveryOptions::default()).unwrap();
                for (a, b) in m.weights().iter().zip(reference.weights()) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
        }

        #[test]
        fn chain_survives_the_round_trip(chain in chain_strategy()) {
            let (s, sp) = spectra(&chain, 10.0);
            let est = reconstruct_chain(&recover_weights(&s, &sp, RecoveryOptions::default()).unwrap()).unwrap();
            for (a, b) in est.couplings().iter().zip(chain.couplings()).chain(est.onsite().iter().zip(chain.onsite())) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }

        #[test]
        fn measure_survives_the_round_trip(raw in proptest::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..10)) {
            let mut raw = raw;
            raw.sort_by(|a, b| a.0.total_cmp(&b.0));
            prop_assume!(raw.windows(2).all(|w| w[1].0 - w[0].0 > 1e-2));
            let total: f64 = raw.iter().map(|p| p.1).sum();
            let measure = SpectralMeasure::new(raw.iter().map(|p| p.0).collect(), raw.iter().map(|p| p.1 / total).collect()).unwrap();
            let chain = reconstruct_chain(&measure).unwrap();
            let (values, vectors) = jacobi_eigen(&real_tridiagonal(chain.couplings(), chain.onsite()));
            for k in 0..values.len() {
                prop_assert!((values[k] - measure.nodes()[k]).abs() < 1e-8);
                prop_assert!((vectors[(0, k)].powi(2) - measure.weights()[k]).abs() < 1e-8);
            }
        }
    }
}
