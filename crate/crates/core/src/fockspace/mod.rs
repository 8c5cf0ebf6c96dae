//! Operator algebra on a truncated Fock space.
//!
//! Everything here is a pure constructor: ladder and displacement operators,
//! coherent and cat states, the two-photon driven Kerr Hamiltonian with its
//! spectrum, and the diagonal Laguerre operator that the Josephson control
//! term reduces to under the rotating-wave approximation.

mod cat;
mod laguerre;
mod spectrum;

pub use cat::{cat_basis, CatBasis};
pub use laguerre::{laguerre_control_op, laguerre_diagonal};
pub use spectrum::{kerr_spectrum, KerrSpectrum};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex operator on the first `dim` Fock levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidDimension { dim: 0, reason: "operator must be non-empty" });
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { matrix: DMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn dot(&self, other: &FockOperator) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }

    pub fn add(&self, other: &FockOperator) -> Self {
        Self { matrix: &self.matrix + &other.matrix }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { matrix: &self.matrix * factor }
    }

    pub fn commutator(&self, other: &FockOperator) -> Self {
        Self { matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix }
    }

    pub fn apply(&self, state: &FockState) -> FockState {
        FockState { amplitudes: &self.matrix * &state.amplitudes }
    }

    /// ⟨bra|self|ket⟩.
    pub fn matrix_element(&self, bra: &FockState, ket: &FockState) -> C64 {
        bra.amplitudes.dotc(&(&self.matrix * &ket.amplitudes))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// max |H − H†| over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// max |U†U − 1| over entries.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let d = self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(n, n);
        d.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Matrix exponential (Padé scaling-and-squaring).
    pub fn exp(&self) -> Self {
        Self { matrix: self.matrix.exp() }
    }
}

/// Pure state on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: DVector<C64>,
}

impl FockState {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, reason: "state must be non-empty" });
        }
        Ok(Self { amplitudes: DVector::from_vec(amplitudes) })
    }

    /// Fock number state |n⟩.
    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension { dim, reason: "basis index beyond truncation" });
        }
        let mut v = DVector::zeros(dim);
        v[n] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self { amplitudes: &self.amplitudes / C64::new(n, 0.0) }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn add(&self, other: &FockState) -> Self {
        Self { amplitudes: &self.amplitudes + &other.amplitudes }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { amplitudes: &self.amplitudes * factor }
    }
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(Error::InvalidDimension { dim, reason: "Fock truncation too small" });
    }
    Ok(())
}

/// Annihilation and creation operators `(a, a†)` with ⟨n−1|a|n⟩ = √n.
pub fn ladder_ops(dim: usize) -> Result<(FockOperator, FockOperator)> {
    check_dim(dim, 2)?;
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    Ok((FockOperator { matrix: a }, FockOperator { matrix: ad }))
}

/// Number operator a†a.
pub fn number_op(dim: usize) -> Result<FockOperator> {
    check_dim(dim, 1)?;
    let d: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    Ok(FockOperator::from_diagonal(&d))
}

/// Photon-number parity (−1)^{a†a}.
pub fn parity_op(dim: usize) -> Result<FockOperator> {
    check_dim(dim, 1)?;
    let d: Vec<f64> = (0..dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Ok(FockOperator::from_diagonal(&d))
}

/// Population of the untruncated coherent state |α⟩ above level `dim − 1`.
pub fn coherent_tail_weight(dim: usize, alpha: C64) -> f64 {
    let x = alpha.norm_sqr();
    // Poisson(x) cumulative up to dim-1, accumulated in a numerically safe way.
    let mut term = (-x).exp();
    let mut acc = term;
    for n in 1..dim {
        term *= x / n as f64;
        acc += term;
    }
    (1.0 - acc).max(0.0)
}

const TRUNCATION_WARN: f64 = 1e-8;

/// D(α) = exp(α a† − α* a), built by matrix exponential of the truncated generator.
pub fn displacement(dim: usize, alpha: C64) -> Result<FockOperator> {
    let (a, ad) = ladder_ops(dim)?;
    if alpha.norm_sqr() > dim as f64 / 4.0 {
        log::warn!("displacement: |alpha|^2 = {} exceeds dim/4 = {}", alpha.norm_sqr(), dim as f64 / 4.0);
    }
    let loss = coherent_tail_weight(dim, alpha);
    if loss > TRUNCATION_WARN {
        log::warn!("displacement: D|0> loses {loss:e} of its norm to truncation at dim {dim}");
    }
    let generator = ad.scale(alpha).add(&a.scale(-alpha.conj()));
    Ok(generator.exp())
}

/// Coherent state |α⟩ on `dim` levels, renormalized after truncation.
///
/// Returns the state and the norm lost to truncation before renormalization.
pub fn coherent_state(dim: usize, alpha: C64) -> Result<(FockState, f64)> {
    check_dim(dim, 1)?;
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let loss = 1.0 - norm_sq;
    if loss > TRUNCATION_WARN {
        log::warn!("coherent_state: truncation loss {loss:e} at dim {dim}, alpha {alpha}");
    }
    let s = norm_sq.sqrt();
    for z in amps.iter_mut() {
        *z /= s;
    }
    Ok((FockState { amplitudes: DVector::from_vec(amps) }, loss.max(0.0)))
}

/// −K a†²a² + P(a†² + a²).
pub fn kerr_hamiltonian(dim: usize, kerr: f64, pump: f64) -> Result<FockOperator> {
    check_dim(dim, 2)?;
    if !(kerr > 0.0) {
        return Err(Error::param("K", format!("must be positive, got {kerr}")));
    }
    if !(pump >= 0.0) {
        return Err(Error::param("P", format!("must be non-negative, got {pump}")));
    }
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim {
        let nf = n as f64;
        h[(n, n)] = C64::new(-kerr * nf * (nf - 1.0), 0.0);
        if n + 2 < dim {
            let v = pump * ((nf + 1.0) * (nf + 2.0)).sqrt();
            h[(n + 2, n)] = C64::new(v, 0.0);
            h[(n, n + 2)] = C64::new(v, 0.0);
        }
    }
    Ok(FockOperator { matrix: h })
}
