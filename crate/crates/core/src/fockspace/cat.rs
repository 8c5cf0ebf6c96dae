use super::{coherent_state, ladder_ops, laguerre_control_op, FockState, C64, ZERO};
use crate::error::{Error, Result};

/// The cat qubit basis |C_±⟩ = N_±(|α⟩ ± |−α⟩) together with the two matrix
/// elements that calibrate physical drives against the two-level model.
#[derive(Debug, Clone)]
pub struct CatBasis {
    pub alpha: C64,
    pub dim: usize,
    pub c_plus: FockState,
    pub c_minus: FockState,
    /// Analytic normalization 1/√(2(1 + e^{−2|α|²})).
    pub n_plus: f64,
    /// Analytic normalization 1/√(2(1 − e^{−2|α|²})).
    pub n_minus: f64,
    /// Re ⟨C₊|a + a†|C₋⟩.
    pub sx_element: f64,
    /// ⟨C₊|M|C₊⟩ − ⟨C₋|M|C₋⟩ for the Laguerre operator at φ_a = 2|α|.
    pub m_diag_gap: f64,
}

const PARITY_TOL: f64 = 1e-12;

impl CatBasis {
    pub fn phi_a(&self) -> f64 {
        2.0 * self.alpha.norm()
    }

    /// Projects a state onto (⟨C₋|ψ⟩, ⟨C₊|ψ⟩).
    pub fn project(&self, state: &FockState) -> Result<[C64; 2]> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: state.dim() });
        }
        Ok([self.c_minus.inner(state), self.c_plus.inner(state)])
    }

    /// Embeds logical amplitudes (c₋, c₊) into Fock space.
    pub fn embed(&self, logical: [C64; 2]) -> FockState {
        self.c_minus.scale(logical[0]).add(&self.c_plus.scale(logical[1]))
    }
}

/// Builds the cat basis on `dim` levels.
pub fn cat_basis(dim: usize, alpha: C64) -> Result<CatBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "cat basis needs at least two levels" });
    }
    let r2 = alpha.norm_sqr();
    if (dim as f64) < 10.0 * r2 {
        log::warn!("cat_basis: dim {dim} below the recommended 10|alpha|^2 = {}", 10.0 * r2);
    }
    let (coh, _) = coherent_state(dim, alpha)?;
    // |−α⟩ has amplitudes (−1)^n ⟨n|α⟩; sum/difference kills the wrong parity exactly.
    let mut plus = Vec::with_capacity(dim);
    let mut minus = Vec::with_capacity(dim);
    for (n, &z) in coh.as_slice().iter().enumerate() {
        if n % 2 == 0 {
            plus.push(z);
            minus.push(ZERO);
        } else {
            plus.push(ZERO);
            minus.push(z);
        }
    }
    let c_plus = FockState::from_amplitudes(plus)?.normalized();
    let c_minus = FockState::from_amplitudes(minus)?.normalized();

    for (n, z) in c_plus.as_slice().iter().enumerate() {
        if n % 2 == 1 && z.norm() > PARITY_TOL {
            return Err(Error::Consistency(format!("|C+> has odd-level amplitude {z} at n={n}")));
        }
    }
    for (n, z) in c_minus.as_slice().iter().enumerate() {
        if n % 2 == 0 && z.norm() > PARITY_TOL {
            return Err(Error::Consistency(format!("|C-> has even-level amplitude {z} at n={n}")));
        }
    }

    let e = (-2.0 * r2).exp();
    let n_plus = 1.0 / (2.0 * (1.0 + e)).sqrt();
    let n_minus = if r2 > 0.0 { 1.0 / (2.0 * (1.0 - e)).sqrt() } else { f64::INFINITY };

    let (a, ad) = ladder_ops(dim)?;
    let x = a.add(&ad);
    let sx_element = x.matrix_element(&c_plus, &c_minus).re;

    let phi_a = 2.0 * alpha.norm();
    let m_diag_gap = if phi_a > 0.0 {
        let m = laguerre_control_op(dim, phi_a)?;
        m.matrix_element(&c_plus, &c_plus).re - m.matrix_element(&c_minus, &c_minus).re
    } else {
        0.0
    };

    Ok(CatBasis { alpha, dim, c_plus, c_minus, n_plus, n_minus, sx_element, m_diag_gap })
}
