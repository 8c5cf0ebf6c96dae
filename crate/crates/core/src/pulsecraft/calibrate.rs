use super::PulseSchedule;
use crate::error::{Error, Result};
use crate::fockspace::CatBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CalibrationMode {
    /// Large-α closed forms: Δ = −E_J/(α√2π), Ω = 2(α* + α)ε.
    ClosedForm,
    /// Cat-subspace matrix elements computed on the truncated Fock space.
    ExactProjection,
}

impl std::str::FromStr for CalibrationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Self::ClosedForm),
            "exact-projection" => Ok(Self::ExactProjection),
            other => Err(Error::param("calibration", format!("expected closed-form or exact-projection, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for CalibrationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed-form",
            Self::ExactProjection => "exact-projection",
        })
    }
}

/// Josephson amplitude E_J(t) and single-photon drive ε(t) in the full
/// Hamiltonian H_Kerr − E_J·M(φ_a) + ε(a + a†).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalDrives {
    pub e_j: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub mode: CalibrationMode,
}

const DEGENERATE: f64 = 1e-12;

/// Converts (Δ, Re Ω) into physical drive amplitudes.
///
/// The cat-subspace projection of −E_J·M + ε(a + a†) is
/// ½[Δ σ_z + Re Ω σ_x] (up to identity) in the (|C₊⟩, |C₋⟩) ordering when
/// Δ = −E_J·m_diag_gap and Re Ω = 2ε·sx_element.
pub fn calibrate_physical(schedule: &PulseSchedule, basis: &CatBasis, mode: CalibrationMode) -> Result<PulseSchedule> {
    schedule.validate()?;
    if (basis.alpha - schedule.spec.alpha).norm() > 1e-12 * basis.alpha.norm().max(1.0) {
        return Err(Error::param(
            "alpha",
            format!("cat basis alpha {} differs from the schedule's {}", basis.alpha, schedule.spec.alpha),
        ));
    }
    let max_re = schedule.omega_re.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let max_im = schedule.omega_im.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_im > 1e-9 * max_re.max(f64::MIN_POSITIVE) {
        return Err(Error::param("omega_im", "a real drive ε(a + a†) cannot produce an imaginary Ω"));
    }

    let (ej_per_delta, eps_per_omega) = match mode {
        CalibrationMode::ClosedForm => {
            let a = basis.alpha;
            if a.norm() < DEGENERATE || a.re.abs() < DEGENERATE {
                return Err(Error::DegenerateCalibration("alpha (closed-form needs Re alpha != 0)"));
            }
            (-a.norm() * (2.0 * std::f64::consts::PI).sqrt(), 1.0 / (2.0 * 2.0 * a.re))
        }
        CalibrationMode::ExactProjection => {
            if basis.m_diag_gap.abs() < DEGENERATE {
                return Err(Error::DegenerateCalibration("m_diag_gap"));
            }
            if basis.sx_element.abs() < DEGENERATE {
                return Err(Error::DegenerateCalibration("sx_element"));
            }
            (-1.0 / basis.m_diag_gap, 1.0 / (2.0 * basis.sx_element))
        }
    };

    let mut out = schedule.clone();
    out.drives = Some(PhysicalDrives {
        e_j: schedule.delta.iter().map(|d| d * ej_per_delta).collect(),
        epsilon: schedule.omega_re.iter().map(|o| o * eps_per_omega).collect(),
        mode,
    });
    Ok(out)
}
