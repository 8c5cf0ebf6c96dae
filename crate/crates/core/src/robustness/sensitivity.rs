use std::f64::consts::PI;

use super::ErrorModel;
use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::pulsecraft::{dynamical_phase, ProtocolKind, ProtocolSpec, PulseSchedule, ScheduleInterpolant};
use crate::quad::{gauss8, panel_integrals};
use crate::sweep::{Model, Prepared, RunSettings};

/// Bound on the quadrature error of the overlap integral.
const QS_QUAD_TOL: f64 = 1e-9;

/// Phase of |φ₊⟩ at arbitrary t: grid value plus a nested Gauss–Legendre
/// integral of the rate across the partial panel.
struct PhaseAt<'a> {
    ip: &'a ScheduleInterpolant,
    times: &'a [f64],
    grid_phase: Vec<f64>,
}

impl PhaseAt<'_> {
    fn eval(&self, t: f64) -> Result<f64> {
        let h = self.times[1] - self.times[0];
        let k = (((t - self.times[0]) / h).floor().max(0.0) as usize).min(self.times.len() - 2);
        let t_k = self.times[k];
        let partial = gauss8().integrate(t_k, t, |x| Ok(C64::new(crate::pulsecraft::dynamical_rate(&self.ip.at(x)), 0.0)))?;
        Ok(self.grid_phase[k] + partial.re)
    }
}

/// Second-order sensitivity of the final C₋ population to an amplitude error.
///
/// `Base` evaluates ¼|∫ e^{2iR₊} Ω_R (−cos²(γ/2) e^{2iβ} + sin²(γ/2)) dt|² with
/// R₊ the phase actually accumulated along |φ₊⟩. `Optimal` evaluates
/// |∫ e^{2iR₊} γ̇ sin²γ dt|² with the designed `r_plus`.
pub fn qs_quadrature(schedule: &PulseSchedule, kind: ProtocolKind) -> Result<f64> {
    schedule.validate()?;
    if schedule.r_plus.len() != schedule.len() || schedule.r_plus.iter().any(|r| !r.is_finite()) {
        return Err(Error::param("r_plus", "schedule phase is not populated"));
    }
    let ip = schedule.interpolant()?;
    let panels = match kind {
        ProtocolKind::Base => {
            let phase = PhaseAt { ip: &ip, times: &schedule.times, grid_phase: dynamical_phase(schedule)? };
            panel_integrals(&schedule.times, QS_QUAD_TOL, |t| {
                let s = ip.at(t);
                let (sh, ch) = (s.gamma / 2.0).sin_cos();
                let bracket = C64::from_polar(-ch * ch, 2.0 * s.beta) + sh * sh;
                Ok(C64::from_polar(s.omega_re, 2.0 * phase.eval(t)?) * bracket)
            })?
        }
        ProtocolKind::Optimal => panel_integrals(&schedule.times, QS_QUAD_TOL, |t| {
            let s = ip.at(t);
            Ok(C64::from_polar(s.gamma_dot * s.gamma.sin().powi(2), 2.0 * s.r_plus))
        })?,
    };
    let total: C64 = panels.iter().sum();
    Ok(match kind {
        ProtocolKind::Base => total.norm_sqr() / 4.0,
        ProtocolKind::Optimal => total.norm_sqr(),
    })
}

/// sin²(nπ)/(4n²), continued to π²/4 at n = 0 and exactly 0 at integer n ≥ 1.
/// Non-integer n is accepted for diagnostics.
pub fn qs_analytic(n: f64) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::param("n", format!("must be non-negative, got {n}")));
    }
    if n == 0.0 {
        return Ok(PI * PI / 4.0);
    }
    if n.fract() == 0.0 {
        return Ok(0.0);
    }
    Ok((n * PI).sin().powi(2) / (4.0 * n * n))
}

/// Central difference (P₋(0) − ½[P₋(+μ) + P₋(−μ)])/μ² from three propagations.
pub fn qs_finite_difference(spec: &ProtocolSpec, mu_step: f64, model: Model) -> Result<f64> {
    qs_finite_difference_with(spec, mu_step, &RunSettings::with_model(model))
}

pub fn qs_finite_difference_with(spec: &ProtocolSpec, mu_step: f64, settings: &RunSettings) -> Result<f64> {
    if !(1e-3..=0.1).contains(&mu_step) {
        return Err(Error::param("mu_step", format!("must lie in [1e-3, 0.1], got {mu_step}")));
    }
    if !matches!(settings.model, Model::Effective | Model::Full) {
        return Err(Error::param("model", format!("finite-difference sensitivity needs a closed model, got {}", settings.model)));
    }
    let prepared = Prepared::new(spec, settings)?;
    let p = |mu: f64| -> Result<f64> { Ok(prepared.run(ErrorModel::new(mu, 0.0)?)?.final_p_minus()) };
    let (p0, pp, pm) = (p(0.0)?, p(mu_step)?, p(-mu_step)?);
    Ok((p0 - 0.5 * (pp + pm)) / (mu_step * mu_step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsecraft::{base_schedule, design, optimal_schedule};

    #[test]
    fn base_value_near_pi_squared_over_four() {
        let s = base_schedule(&ProtocolSpec::base(5.0)).unwrap();
        let q = qs_quadrature(&s, ProtocolKind::Base).unwrap();
        assert!((q / (PI * PI / 4.0) - 1.0).abs() <= 0.02, "{q}");
        assert!((2.42..=2.52).contains(&q));
    }

    #[test]
    fn optimal_protocols_are_flat() {
        for n in 1..=5 {
            let s = optimal_schedule(&ProtocolSpec::optimal(n, 5.0)).unwrap();
            let q = qs_quadrature(&s, ProtocolKind::Optimal).unwrap();
            assert!(q <= 1e-6, "n={n}: {q}");
        }
    }

    #[test]
    fn frozen_schedule_has_zero_sensitivity() {
        let mut s = base_schedule(&ProtocolSpec::base(5.0)).unwrap();
        let g = s.gamma[0];
        for k in 0..s.len() {
            s.gamma[k] = g;
            s.gamma_dot[k] = 0.0;
            s.omega_re[k] = 0.0;
        }
        assert_eq!(qs_quadrature(&s, ProtocolKind::Base).unwrap(), 0.0);
        assert_eq!(qs_quadrature(&s, ProtocolKind::Optimal).unwrap(), 0.0);
    }

    #[test]
    fn analytic_values() {
        assert_eq!(qs_analytic(0.0).unwrap(), PI * PI / 4.0);
        assert_eq!(qs_analytic(3.0).unwrap(), 0.0);
        assert!((qs_analytic(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(qs_analytic(-1.0).is_err());
        // continuity at the origin
        assert!((qs_analytic(1e-4).unwrap() - PI * PI / 4.0).abs() < 1e-6);
    }

    #[test]
    fn finite_difference_matches_quadrature() {
        let spec = ProtocolSpec::base(5.0);
        let fd = qs_finite_difference(&spec, 0.02, Model::Effective).unwrap();
        let quad = qs_quadrature(&design(&spec).unwrap(), ProtocolKind::Base).unwrap();
        assert!((fd / quad - 1.0).abs() <= 0.1, "fd={fd} quad={quad}");
        assert!((fd / qs_analytic(0.0).unwrap() - 1.0).abs() <= 0.1);

        let fd = qs_finite_difference(&ProtocolSpec::optimal(1, 5.0), 0.05, Model::Effective).unwrap();
        assert!(fd.abs() <= 1e-2, "{fd}");
    }

    #[test]
    fn finite_difference_preconditions() {
        let spec = ProtocolSpec::base(5.0);
        assert!(qs_finite_difference(&spec, 0.5, Model::Effective).is_err());
        assert!(qs_finite_difference(&spec, 0.02, Model::LindbladEffective).is_err());
    }
}
