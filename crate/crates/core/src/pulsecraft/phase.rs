use super::{Protocol, ProtocolKind, ProtocolSpec, PulseSchedule, ScheduleSample};
use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::quad::cumulative;

pub(crate) const QUAD_TOL: f64 = 1e-9;

/// R₊(t) sampled on the schedule grid, zero at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LrPhase {
    /// Quadrature of Ṙ₊ = (cos β Re Ω − sin β Im Ω)/(2 sin γ).
    pub numeric: Vec<f64>,
    /// (n/2)(2γ − sin 2γ) − nπ, available for optimal schedules.
    pub analytic: Option<Vec<f64>>,
}

/// Design phase of the invariant eigenvector |φ₊⟩.
///
/// The rate is integrated from the closed-form protocol so the removable
/// 0/0 at the endpoints of the base protocol never enters the quadrature.
pub fn lr_phase(schedule: &PulseSchedule, spec: &ProtocolSpec) -> Result<LrPhase> {
    schedule.validate()?;
    if schedule.len() != spec.samples || (schedule.t_f() - spec.t_f).abs() > 1e-12 * spec.t_f {
        return Err(Error::param("spec", "schedule grid does not match the protocol spec"));
    }
    let proto = Protocol::new(spec)?;
    let numeric = cumulative(&schedule.times, QUAD_TOL, |t| {
        let (c, g, b) = proto.eval_full(t)?;
        Ok(C64::new((b.cos * c.omega_re - b.sin * c.omega_im) / (2.0 * g.sin), 0.0))
    })?;
    let analytic = (spec.kind == ProtocolKind::Optimal).then(|| {
        let n = spec.n as f64;
        let pi = std::f64::consts::PI;
        schedule.gamma.iter().map(|g| n / 2.0 * (2.0 * g - (2.0 * g).sin()) - n * pi).collect()
    });
    Ok(LrPhase { numeric, analytic })
}

/// Ṙ₊ = ⟨φ₊|i∂ₜ − H|φ₊⟩ = −β̇ cos²(γ/2) − ½(Re Ω sγ cβ − Im Ω sγ sβ + Δ cγ).
pub(crate) fn dynamical_rate(s: &ScheduleSample) -> f64 {
    let (sg, cg) = s.gamma.sin_cos();
    let (sb, cb) = s.beta.sin_cos();
    let half = (s.gamma / 2.0).cos();
    -s.beta_dot * half * half - 0.5 * (s.omega_re * sg * cb - s.omega_im * sg * sb + s.delta * cg)
}

/// Phase picked up by a state that follows |φ₊(t)⟩ exactly, integrated
/// from the interpolated schedule (finite everywhere, so usable on any
/// schedule including perturbed ones).
pub fn dynamical_phase(schedule: &PulseSchedule) -> Result<Vec<f64>> {
    let ip = schedule.interpolant()?;
    cumulative(&schedule.times, QUAD_TOL, |t| Ok(C64::new(dynamical_rate(&ip.at(t)), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsecraft::{base_schedule, optimal_schedule};

    #[test]
    fn optimal_numeric_matches_analytic() {
        for n in 1..=5 {
            let spec = ProtocolSpec::optimal(n, 5.0);
            let s = optimal_schedule(&spec).unwrap();
            let p = lr_phase(&s, &spec).unwrap();
            let a = p.analytic.unwrap();
            let worst = p.numeric.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-6, "n={n} worst={worst}");
            assert!((a[a.len() - 1] + n as f64 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn base_phase_stays_small() {
        let spec = ProtocolSpec::base(5.0);
        let s = base_schedule(&spec).unwrap();
        let p = lr_phase(&s, &spec).unwrap();
        assert!(p.analytic.is_none());
        assert!(p.numeric[p.numeric.len() - 1].abs() <= 1e-3);
        assert_eq!(p.numeric, s.r_plus);
    }

    #[test]
    fn mismatched_spec_rejected() {
        let spec = ProtocolSpec::base(5.0);
        let s = base_schedule(&spec).unwrap();
        assert!(lr_phase(&s, &ProtocolSpec::base(4.0)).is_err());
    }

    #[test]
    fn dynamical_phase_differs_by_half_beta_shift() {
        // on-shell the two rates satisfy Ṙ(dynamical) + Ṙ(design) = −β̇/2
        let spec = ProtocolSpec::base(5.0);
        let s = base_schedule(&spec).unwrap();
        let d = dynamical_phase(&s).unwrap();
        for k in (0..s.len()).step_by(100) {
            let expect = -(s.beta[k] - s.beta[0]) / 2.0 - s.r_plus[k];
            assert!((d[k] - expect).abs() < 1e-8, "k={k}");
        }
    }
}
