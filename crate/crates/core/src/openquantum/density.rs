use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fockspace::{FockState, C64};

/// Density operator on the truncated Fock space or the 2-level cat subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const NEGATIVITY_TOL: f64 = -1e-8;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let rho = Self { matrix };
        let h = rho.hermiticity_error();
        if h > HERMITIAN_TOL {
            return Err(Error::param("rho", format!("not Hermitian (max |rho - rho^dag| = {h:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::param("rho", format!("trace {tr} differs from 1")));
        }
        let ev = rho.min_eigenvalue();
        if ev < NEGATIVITY_TOL {
            return Err(Error::param("rho", format!("negative eigenvalue {ev:e}")));
        }
        Ok(rho)
    }

    /// |ψ⟩⟨ψ| for a normalized state.
    pub fn pure(state: &FockState) -> Result<Self> {
        let v = state.amplitudes();
        Self::from_matrix(v * v.adjoint())
    }

    /// |ψ⟩⟨ψ| for amplitudes on (|C₋⟩, |C₊⟩).
    pub fn two_level(psi: [C64; 2]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(&psi);
        Self::from_matrix(&v * v.adjoint())
    }

    pub(crate) fn unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
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

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Loss and dephasing rates in units of K.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseParams {
    pub kappa: f64,
    pub kappa_phi: f64,
}

impl NoiseParams {
    pub fn new(kappa: f64, kappa_phi: f64) -> Result<Self> {
        let p = Self { kappa, kappa_phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::param("kappa", format!("must be non-negative, got {}", self.kappa)));
        }
        if !(self.kappa_phi >= 0.0) || !self.kappa_phi.is_finite() {
            return Err(Error::param("kappa_phi", format!("must be non-negative, got {}", self.kappa_phi)));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.kappa == 0.0 && self.kappa_phi == 0.0
    }
}
