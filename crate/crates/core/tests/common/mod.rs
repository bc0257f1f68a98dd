//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's eigensolver or inversion code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeeman_core::{ChainSpec, Complex64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_chain(rng: &mut impl Rng, n: usize) -> ChainSpec {
    let couplings = (0..n - 1).map(|_| rng.random_range(0.5..1.5)).collect();
    let onsite = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    ChainSpec::new(couplings, onsite).unwrap()
}

/// Cyclic Jacobi rotations on a real symmetric matrix. Returns eigenvalues
/// ascending and the matching eigenvectors as columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (values, vectors)
}

/// Complex Hermitian `H` as the real symmetric `[[Re, -Im], [Im, Re]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled.
pub fn realify(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Spectrum of a complex Hermitian matrix via [`realify`] and Jacobi.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let (values, _) = jacobi_eigen(&realify(h));
    values.into_iter().step_by(2).collect()
}

pub fn real_tridiagonal(couplings: &[f64], onsite: &[f64]) -> DMatrix<f64> {
    let n = onsite.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = onsite[i];
    }
    for (i, &c) in couplings.iter().enumerate() {
        m[(i, i + 1)] = c;
        m[(i + 1, i)] = c;
    }
    m
}

/// `sigma^x`, `sigma^y`, `sigma^z` on site `site` of an `n`-spin register,
/// basis index bit `n - 1 - site` set meaning spin up.
fn pauli_on(kind: char, site: usize, n: usize) -> DMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let local = match kind {
        // basis order (down, up)
        'x' => DMatrix::from_row_slice(2, 2, &[0.0 * one, one, one, 0.0 * one]),
        'y' => DMatrix::from_row_slice(2, 2, &[0.0 * one, i, -i, 0.0 * one]),
        'z' => DMatrix::from_row_slice(2, 2, &[-one, 0.0 * one, 0.0 * one, one]),
        _ => unreachable!(),
    };
    let mut acc = DMatrix::from_element(1, 1, one);
    for s in 0..n {
        let factor = if s == site { local.clone() } else { DMatrix::identity(2, 2) };
        acc = acc.kronecker(&factor);
    }
    acc
}

/// Full `2^N` XXZ Hamiltonian restricted to the one-up-spin sector, in the
/// basis `|up at site 0>, |up at site 1>, ...`.
pub fn brute_force_single_excitation(couplings: &[f64], fields: &[f64], anisotropy: f64) -> DMatrix<f64> {
    let n = fields.len();
    let dim = 1usize << n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (s, &c) in couplings.iter().enumerate() {
        let xx = pauli_on('x', s, n) * pauli_on('x', s + 1, n);
        let yy = pauli_on('y', s, n) * pauli_on('y', s + 1, n);
        let zz = pauli_on('z', s, n) * pauli_on('z', s + 1, n);
        h += (xx + yy + zz * Complex64::new(anisotropy, 0.0)) * Complex64::new(c, 0.0);
    }
    for (s, &b) in fields.iter().enumerate() {
        h += pauli_on('z', s, n) * Complex64::new(b, 0.0);
    }
    let index = |site: usize| 1usize << (n - 1 - site);
    DMatrix::from_fn(n, n, |a, b| {
        let z = h[(index(a), index(b))];
        assert!(z.im.abs() < 1e-14);
        z.re
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn min_gap(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
