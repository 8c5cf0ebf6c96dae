use nalgebra::Matrix2;

use super::trajectory::{Diagnostics, TimeGrid, Trajectory, TrajectoryStates};
use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::integrate::{integrate, StepControl};
use crate::pulsecraft::{PulseSchedule, ScheduleInterpolant};

/// ½[[Δ, Re Ω − i Im Ω], [Re Ω + i Im Ω, −Δ]] on (|C₋⟩, |C₊⟩).
pub fn effective_hamiltonian(delta: f64, omega: C64) -> Matrix2<C64> {
    let d = C64::new(delta / 2.0, 0.0);
    Matrix2::new(d, omega.conj() / 2.0, omega / 2.0, -d)
}

pub(crate) const NORM_FAILURE: f64 = 1e-6;

pub(crate) fn effective_rhs(ip: &ScheduleInterpolant, t: f64, y: &[C64], dy: &mut [C64]) {
    let (delta, re, im) = ip.controls(t);
    let mi = C64::new(0.0, -0.5);
    let om = C64::new(re, im);
    dy[0] = mi * (y[0] * delta + om.conj() * y[1]);
    dy[1] = mi * (om * y[0] - y[1] * delta);
}

/// Integrates i ψ̇ = H_eff(t) ψ with the schedule interpolated cubically.
pub fn propagate_effective(schedule: &PulseSchedule, psi0: [C64; 2], grid: TimeGrid) -> Result<Trajectory> {
    let n0 = (psi0[0].norm_sqr() + psi0[1].norm_sqr()).sqrt();
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::param("psi0", format!("initial state must be normalized, norm = {n0}")));
    }
    let ip = schedule.interpolant()?;
    grid.check_within(ip.t_f())?;
    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    let (mut p_plus, mut p_minus) = (Vec::new(), Vec::new());
    let mut diag = Diagnostics::default();
    let stats = integrate(
        |t, y, dy| effective_rhs(&ip, t, y, dy),
        grid.t0,
        &psi0,
        &times,
        StepControl::with_rtol(grid.tolerance),
        |_, t, y| {
            let nrm = (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
            diag.norm_drift = diag.norm_drift.max((nrm - 1.0).abs());
            if diag.norm_drift > NORM_FAILURE {
                return Err(Error::Integrator { t, reason: format!("norm drift {:e}", diag.norm_drift) });
            }
            states.push([y[0], y[1]]);
            norms.push(nrm);
            p_minus.push(y[0].norm_sqr());
            p_plus.push(y[1].norm_sqr());
            Ok(())
        },
    )?;
    diag.steps = stats.accepted;
    Ok(Trajectory::assemble(times, TrajectoryStates::TwoLevel(states), norms, p_plus, p_minus, diag))
}
