//! Hamiltonian construction: tight-binding chains, the single-excitation
//! sector of XXZ spin chains, general Hermitian networks, and rank-one
//! marker perturbations `H' = H + f |psi><psi|`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nalgebra::Complex;
pub type Complex64 = Complex<f64>;

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const ZERO_COUPLING_TOL: f64 = 1e-14;

/// Dense Hermitian matrix. Chains are stored densely as well; the
/// tridiagonal structure only matters to the eigensolver.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Accepts `matrix` if it is square and Hermitian to within `1e-12`
    /// relative to its largest entry.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidSpec("matrix has dimension zero".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = matrix.nrows();
        for i in 0..n {
            for j in i..n {
                let asym = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if asym > HERMITIAN_TOL * scale {
                    return Err(Error::InvalidSpec(format!(
                        "matrix is not Hermitian at ({i}, {j}): deviation {asym:e}"
                    )));
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }
}

/// Couplings `c_n` and onsite fields `b_n` of an open tight-binding chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct ChainSpec {
    couplings: Vec<f64>,
    onsite: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    n_sites: usize,
    couplings: Vec<f64>,
    onsite: Vec<f64>,
}

impl TryFrom<RawChain> for ChainSpec {
    type Error = Error;

    fn try_from(raw: RawChain) -> Result<Self> {
        check_lengths(raw.n_sites, &raw.couplings, &raw.onsite)?;
        ChainSpec::new(raw.couplings, raw.onsite)
    }
}

impl From<ChainSpec> for RawChain {
    fn from(spec: ChainSpec) -> Self {
        RawChain {
            n_sites: spec.n_sites(),
            couplings: spec.couplings,
            onsite: spec.onsite,
        }
    }
}

fn check_lengths(n_sites: usize, couplings: &[f64], onsite: &[f64]) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::InvalidSpec("n_sites must be positive".into()));
    }
    if onsite.len() != n_sites {
        return Err(Error::InvalidSpec(format!(
            "expected {n_sites} onsite fields, found {}",
            onsite.len()
        )));
    }
    if couplings.len() + 1 != n_sites {
        return Err(Error::InvalidSpec(format!(
            "expected {} couplings, found {}",
            n_sites - 1,
            couplings.len()
        )));
    }
    if couplings.iter().chain(onsite).any(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec("parameters must be finite".into()));
    }
    Ok(())
}

impl ChainSpec {
    /// Builds a chain from `N - 1` strictly positive couplings and `N` onsite fields.
    pub fn new(couplings: Vec<f64>, onsite: Vec<f64>) -> Result<Self> {
        check_lengths(onsite.len(), &couplings, &onsite)?;
        if let Some(i) = couplings.iter().position(|&c| c <= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "coupling {i} is {} but must be positive (gauge-reduce complex or negative couplings first)",
                couplings[i]
            )));
        }
        Ok(Self { couplings, onsite })
    }

    /// Uniform chain with equal couplings and no onsite fields.
    pub fn uniform(n_sites: usize, coupling: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidSpec("n_sites must be positive".into()));
        }
        Self::new(vec![coupling; n_sites - 1], vec![0.0; n_sites])
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }
}

/// Open XXZ chain `sum c_n (XX + YY + delta ZZ)_{n,n+1} + sum b_n Z_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpinChain", into = "RawSpinChain")]
pub struct SpinChainSpec {
    couplings: Vec<f64>,
    onsite: Vec<f64>,
    anisotropy: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSpinChain {
    n_sites: usize,
    couplings: Vec<f64>,
    onsite: Vec<f64>,
    anisotropy: f64,
}

impl TryFrom<RawSpinChain> for SpinChainSpec {
    type Error = Error;

    fn try_from(raw: RawSpinChain) -> Result<Self> {
        check_lengths(raw.n_sites, &raw.couplings, &raw.onsite)?;
        SpinChainSpec::new(raw.couplings, raw.onsite, raw.anisotropy)
    }
}

impl From<SpinChainSpec> for RawSpinChain {
    fn from(spec: SpinChainSpec) -> Self {
        RawSpinChain {
            n_sites: spec.n_sites(),
            couplings: spec.couplings,
            onsite: spec.onsite,
            anisotropy: spec.anisotropy,
        }
    }
}

impl SpinChainSpec {
    pub fn new(couplings: Vec<f64>, onsite: Vec<f64>, anisotropy: f64) -> Result<Self> {
        check_lengths(onsite.len(), &couplings, &onsite)?;
        if !anisotropy.is_finite() {
            return Err(Error::InvalidSpec("anisotropy must be finite".into()));
        }
        Ok(Self {
            couplings,
            onsite,
            anisotropy,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }
}

/// A general Hermitian network Hamiltonian, Hermitian exactly as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct NetworkSpec {
    entries: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    dimension: usize,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
}

impl TryFrom<RawNetwork> for NetworkSpec {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        let n = raw.dimension;
        if raw.entries.len() != n * n {
            return Err(Error::InvalidSpec(format!(
                "expected {} entries for dimension {n}, found {}",
                n * n,
                raw.entries.len()
            )));
        }
        let entries =
            DMatrix::from_row_iterator(n, n, raw.entries.iter().map(|&[re, im]| Complex64::new(re, im)));
        NetworkSpec::new(entries)
    }
}

impl From<NetworkSpec> for RawNetwork {
    fn from(spec: NetworkSpec) -> Self {
        let n = spec.dimension();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = spec.entries[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        RawNetwork {
            dimension: n,
            entries,
        }
    }
}

impl NetworkSpec {
    /// Requires bitwise Hermiticity: `H[n][m] == conj(H[m][n])`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidSpec("network matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            for j in i..n {
                if entries[(i, j)] != entries[(j, i)].conj() {
                    return Err(Error::InvalidSpec(format!(
                        "network entries ({i}, {j}) and ({j}, {i}) are not conjugate"
                    )));
                }
            }
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSpec("network has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    /// Averages `m` with its adjoint so the stored matrix is exactly Hermitian.
    pub fn from_hermitian_part(m: &DMatrix<Complex64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ncols(),
            });
        }
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            entries[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                entries[(i, j)] = z;
                entries[(j, i)] = z.conj();
            }
        }
        Self::new(entries)
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn to_matrix(&self) -> HermitianMatrix {
        HermitianMatrix(self.entries.clone())
    }
}

/// Rank-one marker field `f |psi><psi|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    vector: DVector<Complex64>,
    strength: f64,
}

impl Perturbation {
    pub fn new(vector: DVector<Complex64>, strength: f64) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::InvalidSpec("probe vector is empty".into()));
        }
        let norm = vector.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidSpec(format!(
                "probe vector must be normalized, has norm {norm}"
            )));
        }
        if strength == 0.0 || !strength.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "field strength must be finite and nonzero, got {strength}"
            )));
        }
        Ok(Self { vector, strength })
    }

    /// Field on a single basis site `|site>` (0-based).
    pub fn site(dimension: usize, site: usize, strength: f64) -> Result<Self> {
        check_site(dimension, site)?;
        let mut v = DVector::zeros(dimension);
        v[site] = Complex64::new(1.0, 0.0);
        Self::new(v, strength)
    }

    /// Field on `(|n> + |m>) / sqrt 2`.
    pub fn pair_sum(dimension: usize, n: usize, m: usize, strength: f64) -> Result<Self> {
        Self::pair(dimension, n, m, Complex64::new(1.0, 0.0), strength)
    }

    /// Field on `(|n> + i |m>) / sqrt 2`.
    pub fn pair_imag(dimension: usize, n: usize, m: usize, strength: f64) -> Result<Self> {
        Self::pair(dimension, n, m, Complex64::new(0.0, 1.0), strength)
    }

    fn pair(dimension: usize, n: usize, m: usize, phase: Complex64, strength: f64) -> Result<Self> {
        check_site(dimension, n)?;
        check_site(dimension, m)?;
        if n == m {
            return Err(Error::InvalidSpec("pair probe needs two distinct sites".into()));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = DVector::zeros(dimension);
        v[n] = Complex64::new(s, 0.0);
        v[m] = phase * s;
        Self::new(v, strength)
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &DVector<Complex64> {
        &self.vector
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }
}

fn check_site(dimension: usize, site: usize) -> Result<()> {
    if site >= dimension {
        return Err(Error::InvalidSpec(format!(
            "site {site} out of range for dimension {dimension}"
        )));
    }
    Ok(())
}

/// Real symmetric tridiagonal matrix with `c_n` on the off-diagonals and `b_n`
/// on the diagonal.
pub fn build_chain_matrix(spec: &ChainSpec) -> HermitianMatrix {
    let n = spec.n_sites();
    let mut m = DMatrix::zeros(n, n);
    for (i, &b) in spec.onsite().iter().enumerate() {
        m[(i, i)] = Complex64::new(b, 0.0);
    }
    for (i, &c) in spec.couplings().iter().enumerate() {
        m[(i, i + 1)] = Complex64::new(c, 0.0);
        m[(i + 1, i)] = Complex64::new(c, 0.0);
    }
    HermitianMatrix(m)
}

/// Tridiagonal chain with complex hoppings: `c_n` at `(n, n+1)` and
/// `conj(c_n)` at `(n+1, n)`.
pub fn build_complex_chain_matrix(couplings: &[Complex64], onsite: &[f64]) -> Result<HermitianMatrix> {
    let n = onsite.len();
    if n == 0 || couplings.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1),
            found: couplings.len(),
        });
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, &b) in onsite.iter().enumerate() {
        m[(i, i)] = Complex64::new(b, 0.0);
    }
    for (i, &c) in couplings.iter().enumerate() {
        m[(i, i + 1)] = c;
        m[(i + 1, i)] = c.conj();
    }
    HermitianMatrix::new(m)
}

/// Effective tight-binding model of the one-excitation sector (one spin up
/// on a spin-down background, `Z|down> = -|down>`).
///
/// Hopping is `2 c_n`; the diagonal is
/// `2 b_n - sum_m b_m + delta (sum_m c_m - 2 (c_{n-1} + c_n))` with
/// `c_0 = c_N = 0`. Negative spin couplings are mapped to positive hoppings
/// by a basis sign flip, which leaves the spectrum unchanged.
pub fn build_spin_single_excitation(spec: &SpinChainSpec) -> Result<ChainSpec> {
    let n = spec.n_sites();
    let c = spec.couplings();
    let total_field: f64 = spec.onsite().iter().sum();
    let total_coupling: f64 = c.iter().sum();
    let delta = spec.anisotropy();

    let diagonal = (0..n)
        .map(|i| {
            let left = if i > 0 { c[i - 1] } else { 0.0 };
            let right = if i + 1 < n { c[i] } else { 0.0 };
            2.0 * spec.onsite()[i] - total_field + delta * (total_coupling - 2.0 * (left + right))
        })
        .collect();

    let hopping = c
        .iter()
        .enumerate()
        .map(|(i, &ci)| {
            if ci.abs() < ZERO_COUPLING_TOL {
                Err(Error::ZeroCoupling {
                    index: i,
                    magnitude: ci.abs(),
                })
            } else {
                Ok(2.0 * ci.abs())
            }
        })
        .collect::<Result<Vec<_>>>()?;

    ChainSpec::new(hopping, diagonal)
}

/// `h + f |psi><psi|`.
pub fn apply_perturbation(h: &HermitianMatrix, p: &Perturbation) -> Result<HermitianMatrix> {
    if h.dimension() != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            found: p.dimension(),
        });
    }
    let psi = p.vector();
    let mut m = h.0.clone();
    let n = h.dimension();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += psi[i] * psi[j].conj() * p.strength();
        }
    }
    Ok(HermitianMatrix(m))
}

/// Splits complex couplings into magnitudes and phases `c_n = |c_n| e^{i phi_n}`.
///
/// The phases are removed by the diagonal change of basis
/// `|k> -> e^{-i (phi_1 + ... + phi_{k-1})} |k>`, so the chain with couplings
/// `|c_n|` has the same spectrum.
pub fn gauge_reduce(couplings: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut magnitudes = Vec::with_capacity(couplings.len());
    let mut phases = Vec::with_capacity(couplings.len());
    for (index, c) in couplings.iter().enumerate() {
        let magnitude = c.norm();
        if !(magnitude >= ZERO_COUPLING_TOL) {
            return Err(Error::ZeroCoupling { index, magnitude });
        }
        magnitudes.push(magnitude);
        phases.push(c.arg());
    }
    Ok((magnitudes, phases))
}

/// Diagonal unitary `U` with `U^dagger H(c) U = H(|c|)`, returned as its
/// diagonal entries.
pub fn gauge_transform(phases: &[f64]) -> Vec<Complex64> {
    let mut acc = 0.0;
    let mut diag = Vec::with_capacity(phases.len() + 1);
    diag.push(Complex64::new(1.0, 0.0));
    for &phi in phases {
        acc += phi;
        diag.push(Complex64::from_polar(1.0, -acc));
    }
    diag
}
