use nalgebra::linalg::SymmetricEigen;

use super::kerr_hamiltonian;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct KerrSpectrum {
    /// Eigenvalues in descending order; the cat doublet comes first.
    pub eigenvalues: Vec<f64>,
    /// Mean of the top (cat) pair minus mean of the next pair.
    pub gap: f64,
    /// False when adding ten levels moves the gap by more than 1%.
    pub converged: bool,
}

fn sorted_eigenvalues(dim: usize, kerr: f64, pump: f64) -> Result<Vec<f64>> {
    let h = kerr_hamiltonian(dim, kerr, pump)?;
    let eig = SymmetricEigen::new(h.into_matrix());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

fn pair_gap(ev: &[f64]) -> f64 {
    if ev.len() < 4 {
        return f64::NAN;
    }
    (ev[0] + ev[1]) / 2.0 - (ev[2] + ev[3]) / 2.0
}

pub fn kerr_spectrum(dim: usize, kerr: f64, pump: f64) -> Result<KerrSpectrum> {
    let eigenvalues = sorted_eigenvalues(dim, kerr, pump)?;
    let gap = pair_gap(&eigenvalues);
    let wider = pair_gap(&sorted_eigenvalues(dim + 10, kerr, pump)?);
    let converged = ((wider - gap) / gap).abs() <= 0.01;
    if !converged {
        log::warn!("kerr_spectrum: gap {gap} not converged at dim {dim} (dim+10 gives {wider})");
    }
    Ok(KerrSpectrum { eigenvalues, gap, converged })
}
