use nalgebra::Matrix2;

use super::effective::effective_hamiltonian;
use super::trajectory::TimeGrid;
use crate::error::Result;
use crate::fockspace::C64;
use crate::pulsecraft::PulseSchedule;

/// I = ½[[cos γ, sin γ e^{iβ}], [sin γ e^{−iβ}, −cos γ]] on (|C₋⟩, |C₊⟩).
pub fn invariant_matrix(gamma: f64, beta: f64) -> Matrix2<C64> {
    let (sg, cg) = gamma.sin_cos();
    let e = C64::from_polar(1.0, beta);
    Matrix2::new(C64::new(cg / 2.0, 0.0), e * (sg / 2.0), e.conj() * (sg / 2.0), C64::new(-cg / 2.0, 0.0))
}

/// Eigenvectors (|φ₊⟩, |φ₋⟩) of the invariant with eigenvalues ±½.
pub fn invariant_eigenstates(gamma: f64, beta: f64) -> ([C64; 2], [C64; 2]) {
    let (s, c) = (gamma / 2.0).sin_cos();
    let e = C64::from_polar(1.0, beta);
    ([e * c, C64::new(s, 0.0)], [C64::new(s, 0.0), -e.conj() * c])
}

fn invariant_derivative(gamma: f64, gamma_dot: f64, beta: f64, beta_dot: f64) -> Matrix2<C64> {
    let (sg, cg) = gamma.sin_cos();
    let e = C64::from_polar(1.0, beta);
    let i = C64::new(0.0, 1.0);
    let off = e * (cg * gamma_dot / 2.0) + i * e * (sg * beta_dot / 2.0);
    Matrix2::new(C64::new(-sg * gamma_dot / 2.0, 0.0), off, off.conj(), C64::new(sg * gamma_dot / 2.0, 0.0))
}

/// Frobenius norm of i ∂ₜI − [H_eff, I] at one instant.
pub fn invariant_residual_at(gamma: f64, gamma_dot: f64, beta: f64, beta_dot: f64, delta: f64, omega: C64) -> f64 {
    let i = C64::new(0.0, 1.0);
    let inv = invariant_matrix(gamma, beta);
    let h = effective_hamiltonian(delta, omega);
    let r = invariant_derivative(gamma, gamma_dot, beta, beta_dot) * i - (h * inv - inv * h);
    r.norm()
}

/// Largest invariant-equation residual over the schedule samples inside the grid window.
pub fn invariant_residual(schedule: &PulseSchedule, grid: TimeGrid) -> Result<f64> {
    schedule.validate()?;
    grid.check_within(schedule.t_f())?;
    let slack = 1e-12 * schedule.t_f();
    let mut worst = 0.0_f64;
    for k in 0..schedule.len() {
        let t = schedule.times[k];
        if t < grid.t0 - slack || t > grid.t_f + slack {
            continue;
        }
        let r = invariant_residual_at(
            schedule.gamma[k],
            schedule.gamma_dot[k],
            schedule.beta[k],
            schedule.beta_dot[k],
            schedule.delta[k],
            C64::new(schedule.omega_re[k], schedule.omega_im[k]),
        );
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsecraft::{base_schedule, optimal_schedule, Protocol, ProtocolSpec};
    use nalgebra::Vector2;
    use std::f64::consts::PI;

    #[test]
    fn eigenstates_at_the_poles() {
        let (p, _) = invariant_eigenstates(PI, 0.4);
        assert!(p[0].norm() < 1e-15 && (p[1].re - 1.0).abs() < 1e-15);
        let (p, _) = invariant_eigenstates(0.0, -1.1);
        assert!((p[0] - C64::from_polar(1.0, -1.1)).norm() < 1e-15 && p[1].norm() == 0.0);
    }

    #[test]
    fn eigen_equation_and_orthonormality() {
        for (g, b) in [(0.3, 1.2), (2.5, -1.57), (PI / 2.0, 0.0), (1.0, 3.0)] {
            let inv = invariant_matrix(g, b);
            let (p, m) = invariant_eigenstates(g, b);
            let (vp, vm) = (Vector2::new(p[0], p[1]), Vector2::new(m[0], m[1]));
            assert!((inv * vp - vp * C64::new(0.5, 0.0)).norm() < 1e-14);
            assert!((inv * vm + vm * C64::new(0.5, 0.0)).norm() < 1e-14);
            assert!((vp.norm() - 1.0).abs() < 1e-14 && vp.dotc(&vm).norm() < 1e-14);
            // independent oracle: eigenvalues of a traceless 2×2 Hermitian are ±√(a² + |b|²)
            let lam = (inv[(0, 0)].re.powi(2) + inv[(0, 1)].norm_sqr()).sqrt();
            assert!((lam - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn designed_schedules_satisfy_invariant_equation() {
        for spec in [ProtocolSpec::base(5.0), ProtocolSpec::optimal(1, 5.0), ProtocolSpec::optimal(5, 1.0)] {
            let s = if spec.kind == crate::pulsecraft::ProtocolKind::Base { base_schedule(&spec) } else { optimal_schedule(&spec) }.unwrap();
            let r = invariant_residual(&s, TimeGrid::span(spec.t_f).unwrap()).unwrap();
            assert!(r <= 1e-8, "{spec:?}: {r}");
        }
    }

    #[test]
    fn finite_difference_derivative_oracle() {
        // central-difference ∂I/∂t from the closed-form protocol
        let spec = ProtocolSpec::base(5.0);
        let proto = Protocol::new(&spec).unwrap();
        let h = 1e-5;
        for t in [0.4, 1.3, 2.5, 3.9] {
            let c = proto.at(t).unwrap();
            let (a, b) = (proto.at(t + h).unwrap(), proto.at(t - h).unwrap());
            let fd = (invariant_matrix(a.gamma, a.beta) - invariant_matrix(b.gamma, b.beta)) / C64::new(2.0 * h, 0.0);
            let inv = invariant_matrix(c.gamma, c.beta);
            let hm = effective_hamiltonian(c.delta, C64::new(c.omega_re, c.omega_im));
            let r = fd * C64::new(0.0, 1.0) - (hm * inv - inv * hm);
            assert!(r.norm() < 1e-8, "t={t}: {}", r.norm());
        }
    }

    #[test]
    fn frozen_schedule_has_zero_residual() {
        assert_eq!(invariant_residual_at(1.0, 0.0, -0.5, 0.0, 0.0, C64::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn state_follows_invariant_eigenvector_with_dynamical_phase() {
        use crate::dynamics::propagate_effective;
        use crate::pulsecraft::dynamical_phase;
        for spec in [ProtocolSpec::base(5.0), ProtocolSpec::optimal(1, 5.0), ProtocolSpec::optimal(3, 5.0)] {
            let s = crate::pulsecraft::design(&spec).unwrap();
            let phase = dynamical_phase(&s).unwrap();
            let (p0, _) = invariant_eigenstates(s.gamma[0], s.beta[0]);
            let tr = propagate_effective(&s, p0, TimeGrid::span(5.0).unwrap()).unwrap();
            let crate::dynamics::TrajectoryStates::TwoLevel(states) = &tr.states else { panic!() };
            let stride = (s.len() - 1) / (tr.times.len() - 1);
            let mut unwrapped = 0.0_f64;
            for (j, psi) in states.iter().enumerate() {
                let k = j * stride;
                let (p, _) = invariant_eigenstates(s.gamma[k], s.beta[k]);
                let ov = p[0].conj() * psi[0] + p[1].conj() * psi[1];
                assert!((ov.norm() - 1.0).abs() <= 1e-4);
                // nearest-branch continuation from t = 0
                let raw = ov.arg();
                unwrapped += (raw - unwrapped + PI).rem_euclid(2.0 * PI) - PI;
                assert!((unwrapped - phase[k]).abs() <= 1e-3, "{:?} t={} {} vs {}", spec.kind, tr.times[j], unwrapped, phase[k]);
            }
        }
    }
}
