use nalgebra::DMatrix;

use super::effective::NORM_FAILURE;
use super::trajectory::{Diagnostics, TimeGrid, Trajectory, TrajectoryStates};
use crate::error::{Error, Result};
use crate::fockspace::{laguerre_diagonal, CatBasis, FockOperator, FockState, C64};
use crate::integrate::{integrate, StepControl};
use crate::pulsecraft::PulseSchedule;

/// Banded representation of H(t) = H_Kerr − E_J(t)·M(φ_a) + ε(t)(a + a†).
///
/// Every term is real and at most pentadiagonal in the Fock basis, which the
/// right-hand sides of both the Schrödinger and master equations exploit.
#[derive(Debug, Clone)]
pub struct FullModel {
    pub dim: usize,
    pub kerr: f64,
    pub pump: f64,
    pub phi_a: f64,
    pub(crate) kerr_diag: Vec<f64>,
    pub(crate) m_diag: Vec<f64>,
    /// √(n+1): ⟨n|a|n+1⟩.
    pub(crate) hop1: Vec<f64>,
    /// P√((n+1)(n+2)): ⟨n|P a²|n+2⟩.
    pub(crate) hop2: Vec<f64>,
}

impl FullModel {
    pub fn new(dim: usize, kerr: f64, pump: f64, phi_a: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidDimension { dim, reason: "full model needs at least three levels" });
        }
        if !(kerr > 0.0) {
            return Err(Error::param("K", format!("must be positive, got {kerr}")));
        }
        if !(pump >= 0.0) {
            return Err(Error::param("P", format!("must be non-negative, got {pump}")));
        }
        let m_diag = laguerre_diagonal(dim, phi_a)?;
        let kerr_diag = (0..dim).map(|n| -kerr * n as f64 * (n as f64 - 1.0)).collect();
        let hop1 = (0..dim - 1).map(|n| ((n + 1) as f64).sqrt()).collect();
        let hop2 = (0..dim - 2).map(|n| pump * (((n + 1) * (n + 2)) as f64).sqrt()).collect();
        Ok(Self { dim, kerr, pump, phi_a, kerr_diag, m_diag, hop1, hop2 })
    }

    /// Model on the basis truncation with φ_a = 2|α|.
    pub fn for_basis(basis: &CatBasis, kerr: f64, pump: f64) -> Result<Self> {
        Self::new(basis.dim, kerr, pump, basis.phi_a())
    }

    /// Drives above this magnitude leave the ω_gap ≈ 4K|α|² protected regime.
    pub fn drive_limit(&self) -> f64 {
        4.0 * self.pump / 5.0
    }

    pub fn hamiltonian(&self, e_j: f64, eps: f64) -> FockOperator {
        let d = self.dim;
        let mut h = DMatrix::<C64>::zeros(d, d);
        for n in 0..d {
            h[(n, n)] = C64::new(self.kerr_diag[n] - e_j * self.m_diag[n], 0.0);
        }
        for n in 0..d - 1 {
            let v = C64::new(eps * self.hop1[n], 0.0);
            h[(n, n + 1)] = v;
            h[(n + 1, n)] = v;
        }
        for n in 0..d - 2 {
            let v = C64::new(self.hop2[n], 0.0);
            h[(n, n + 2)] = v;
            h[(n + 2, n)] = v;
        }
        FockOperator::from_matrix(h).expect("square by construction")
    }

    /// out = −i H ψ.
    pub(crate) fn schrodinger_rhs(&self, e_j: f64, eps: f64, psi: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for n in 0..d {
            let mut acc = psi[n] * (self.kerr_diag[n] - e_j * self.m_diag[n]);
            if n >= 1 {
                acc += psi[n - 1] * (eps * self.hop1[n - 1]);
            }
            if n + 1 < d {
                acc += psi[n + 1] * (eps * self.hop1[n]);
            }
            if n >= 2 {
                acc += psi[n - 2] * self.hop2[n - 2];
            }
            if n + 2 < d {
                acc += psi[n + 2] * self.hop2[n];
            }
            out[n] = C64::new(acc.im, -acc.re);
        }
    }
}

pub(crate) fn warn_if_outside_regime(model: &FullModel, schedule: &PulseSchedule) -> Result<()> {
    let d = schedule.drives()?;
    let peak = d.e_j.iter().chain(&d.epsilon).fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak > model.drive_limit() {
        log::warn!(
            "drive amplitude {peak:.3} exceeds gap/5 = {:.3}; the two-level reduction is not reliable here",
            model.drive_limit()
        );
    }
    Ok(())
}

/// H_Kerr − E_J(t)·M(φ_a) + ε(t)(a + a†) with the calibrated drives at `t`.
pub fn full_hamiltonian_at(
    t: f64,
    schedule: &PulseSchedule,
    basis: &CatBasis,
    kerr: f64,
    pump: f64,
    phi_a: f64,
) -> Result<FockOperator> {
    schedule.drives()?;
    let model = FullModel::new(basis.dim, kerr, pump, phi_a)?;
    let (e_j, eps) = schedule.interpolant()?.drives(t)?;
    Ok(model.hamiltonian(e_j, eps))
}

/// Schrödinger propagation on the truncated Fock space with φ_a = 2|α|.
pub fn propagate_full(
    schedule: &PulseSchedule,
    basis: &CatBasis,
    kerr: f64,
    pump: f64,
    psi0: &FockState,
    grid: TimeGrid,
) -> Result<Trajectory> {
    propagate_full_with(&FullModel::for_basis(basis, kerr, pump)?, schedule, basis, psi0, grid)
}

pub fn propagate_full_with(model: &FullModel, schedule: &PulseSchedule, basis: &CatBasis, psi0: &FockState, grid: TimeGrid) -> Result<Trajectory> {
    if psi0.dim() != model.dim || basis.dim != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, got: psi0.dim().max(basis.dim) });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::param("psi0", format!("initial state must be normalized, norm = {}", psi0.norm())));
    }
    let ip = schedule.interpolant()?;
    grid.check_within(ip.t_f())?;
    warn_if_outside_regime(model, schedule)?;

    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    let (mut p_plus, mut p_minus) = (Vec::new(), Vec::new());
    let mut diag = Diagnostics::default();
    let stats = integrate(
        |t, y, dy| {
            let (e_j, eps) = ip.drives(t).expect("calibration checked above");
            model.schrodinger_rhs(e_j, eps, y, dy);
        },
        grid.t0,
        psi0.as_slice(),
        &times,
        StepControl::with_rtol(grid.tolerance),
        |_, t, y| {
            let state = FockState::from_amplitudes(y.to_vec())?;
            let nrm = state.norm();
            diag.norm_drift = diag.norm_drift.max((nrm - 1.0).abs());
            if diag.norm_drift > NORM_FAILURE {
                return Err(Error::Integrator { t, reason: format!("norm drift {:e}", diag.norm_drift) });
            }
            let [m, p] = basis.project(&state)?;
            p_minus.push(m.norm_sqr());
            p_plus.push(p.norm_sqr());
            norms.push(nrm);
            states.push(state);
            Ok(())
        },
    )?;
    diag.steps = stats.accepted;
    Ok(Trajectory::assemble(times, TrajectoryStates::Fock(states), norms, p_plus, p_minus, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::effective_hamiltonian;
    use crate::fockspace::{cat_basis, kerr_hamiltonian, laguerre_control_op, ladder_ops};
    use crate::pulsecraft::{base_schedule, calibrate_physical, CalibrationMode, ProtocolSpec};

    fn setup() -> (PulseSchedule, CatBasis) {
        let b = cat_basis(60, C64::new(2.0, 0.0)).unwrap();
        let s = base_schedule(&ProtocolSpec::base(5.0)).unwrap();
        (calibrate_physical(&s, &b, CalibrationMode::ExactProjection).unwrap(), b)
    }

    #[test]
    fn banded_matches_dense_operator_algebra() {
        let dim = 30;
        let model = FullModel::new(dim, 1.0, 4.0, 4.0).unwrap();
        let (a, ad) = ladder_ops(dim).unwrap();
        // independent construction from ladder algebra
        let dense = kerr_hamiltonian(dim, 1.0, 4.0)
            .unwrap()
            .add(&laguerre_control_op(dim, 4.0).unwrap().scale(C64::new(-0.7, 0.0)))
            .add(&a.add(&ad).scale(C64::new(0.3, 0.0)));
        assert!((model.hamiltonian(0.7, 0.3).matrix() - dense.matrix()).camax() < 1e-12);
        let psi: Vec<C64> = (0..dim).map(|n| C64::new((n as f64).cos(), (0.3 * n as f64).sin())).collect();
        let mut out = vec![C64::default(); dim];
        model.schrodinger_rhs(0.7, 0.3, &psi, &mut out);
        let hv = dense.matrix() * nalgebra::DVector::from_vec(psi);
        for n in 0..dim {
            assert!((out[n] - hv[n] * C64::new(0.0, -1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn control_projection_equals_effective_hamiltonian() {
        let (s, b) = setup();
        let m = FullModel::for_basis(&b, 1.0, 4.0).unwrap();
        let h0 = m.hamiltonian(0.0, 0.0);
        for k in [1, 400, 1000, 1733] {
            let d = s.drives().unwrap();
            let hc = m.hamiltonian(d.e_j[k], d.epsilon[k]).add(&h0.scale(C64::new(-1.0, 0.0)));
            // (|C₊⟩, |C₋⟩) ordering of the physical drive
            let v = [&b.c_plus, &b.c_minus];
            let proj = |i: usize, j: usize| hc.matrix_element(v[i], v[j]);
            let eff = effective_hamiltonian(s.delta[k], C64::new(s.omega_re[k], 0.0));
            let shift = (proj(0, 0) + proj(1, 1)) / 2.0;
            assert!((proj(0, 0) - shift - eff[(0, 0)]).norm() < 1e-10);
            assert!((proj(1, 1) - shift - eff[(1, 1)]).norm() < 1e-10);
            assert!((proj(0, 1) - eff[(0, 1)]).norm() < 1e-10);
            assert!((proj(1, 0) - eff[(1, 0)]).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_drive_is_bare_kerr() {
        let (s, b) = setup();
        let mut z = s.clone();
        let d = z.drives.as_mut().unwrap();
        d.e_j.iter_mut().for_each(|v| *v = 0.0);
        d.epsilon.iter_mut().for_each(|v| *v = 0.0);
        let h = full_hamiltonian_at(2.0, &z, &b, 1.0, 4.0, 4.0).unwrap();
        assert!((h.matrix() - kerr_hamiltonian(60, 1.0, 4.0).unwrap().matrix()).camax() < 1e-15);
        let tr = propagate_full(&z, &b, 1.0, 4.0, &b.c_plus, TimeGrid::span(5.0).unwrap()).unwrap();
        assert!(tr.p_plus.iter().all(|p| (p - 1.0).abs() < 1e-8));
    }

    #[test]
    fn uncalibrated_schedule_rejected() {
        let b = cat_basis(60, C64::new(2.0, 0.0)).unwrap();
        let s = base_schedule(&ProtocolSpec::base(5.0)).unwrap();
        assert!(matches!(full_hamiltonian_at(1.0, &s, &b, 1.0, 4.0, 4.0), Err(Error::Uncalibrated)));
        assert!(matches!(
            propagate_full(&s, &b, 1.0, 4.0, &b.c_plus, TimeGrid::span(5.0).unwrap()),
            Err(Error::Uncalibrated)
        ));
    }

    #[test]
    fn base_protocol_full_inversion() {
        let (s, b) = setup();
        let tr = propagate_full(&s, &b, 1.0, 4.0, &b.c_plus, TimeGrid::span(5.0).unwrap()).unwrap();
        assert!((tr.final_p_minus() - 0.999).abs() <= 2e-3, "{}", tr.final_p_minus());
        assert!(tr.diagnostics.norm_drift <= 1e-8);
        assert!(tr.leakage.iter().all(|&l| l <= 1e-3));
    }
}
