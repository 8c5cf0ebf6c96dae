//! Systematic control errors and the sensitivity of the final population to them.
//!
//! An [`ErrorModel`] rescales the calibrated drives: μ multiplies the
//! single-photon drive ε (and with it Ω), ν multiplies the Josephson drive
//! E_J (and with it Δ). Perturbed schedules are always re-propagated; the
//! perturbative sensitivity integrals only serve as cross-checks.

mod sensitivity;

pub use sensitivity::{qs_analytic, qs_finite_difference, qs_finite_difference_with, qs_quadrature};

use crate::error::{Error, Result};
use crate::pulsecraft::{ProtocolSpec, PulseSchedule};
use crate::sweep::{sweep_metadata, Axis, Prepared, RunSettings, SweepResult};

/// Fractional amplitude errors μ (on ε) and ν (on E_J), each within [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorModel {
    mu: f64,
    nu: f64,
}

impl ErrorModel {
    pub const NONE: Self = Self { mu: 0.0, nu: 0.0 };

    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu)] {
            if !(v.abs() <= 1.0) {
                return Err(Error::param(name, format!("must lie in [-1, 1], got {v}")));
            }
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Copy of `schedule` with Ω, ε scaled by 1 + μ and Δ, E_J scaled by 1 + ν.
///
/// Uncalibrated schedules only have their effective controls rescaled.
pub fn apply_error(schedule: &PulseSchedule, err: ErrorModel) -> PulseSchedule {
    let (a, d) = (1.0 + err.mu, 1.0 + err.nu);
    let scale = |v: &[f64], f: f64| v.iter().map(|x| x * f).collect::<Vec<_>>();
    let mut out = schedule.clone();
    out.omega_re = scale(&schedule.omega_re, a);
    out.omega_im = scale(&schedule.omega_im, a);
    out.delta = scale(&schedule.delta, d);
    if let Some(drives) = out.drives.as_mut() {
        drives.epsilon = scale(&drives.epsilon, a);
        drives.e_j = scale(&drives.e_j, d);
    }
    out
}

/// P₋(t_f) over the (μ, ν) grid, one propagation per cell.
pub fn robustness_sweep(spec: &ProtocolSpec, mu_values: &[f64], nu_values: &[f64], settings: &RunSettings) -> Result<SweepResult> {
    let (mu, nu) = (Axis::new("mu", mu_values)?, Axis::new("nu", nu_values)?);
    for &m in &mu.values {
        ErrorModel::new(m, 0.0)?;
    }
    for &n in &nu.values {
        ErrorModel::new(0.0, n)?;
    }
    let prepared = Prepared::new(spec, settings)?;
    let metadata = sweep_metadata(spec, settings, &[]);
    Ok(SweepResult::evaluate(mu, Some(nu), metadata, |m, n| {
        let err = ErrorModel::new(m, n.expect("two-axis sweep"))?;
        Ok(prepared.run(err)?.final_p_minus())
    }))
}
