use super::NoiseParams;
use crate::error::{Error, Result};
use crate::pulsecraft::ProtocolSpec;
use crate::robustness::ErrorModel;
use crate::sweep::{simulate, sweep_metadata, Axis, RunSettings, SweepResult};

/// Terminal P₋ over (t_f, κ); the schedule is redesigned at every t_f and
/// κ^φ is taken from `noise_base`.
pub fn decoherence_sweep(
    spec: &ProtocolSpec,
    t_f_values: &[f64],
    kappa_values: &[f64],
    noise_base: NoiseParams,
    settings: &RunSettings,
) -> Result<SweepResult> {
    if !settings.model.is_dissipative() {
        return Err(Error::param("model", format!("decoherence sweeps need a lindblad model, got {}", settings.model)));
    }
    let (tf_axis, kappa_axis) = (Axis::new("t_f", t_f_values)?, Axis::new("kappa", kappa_values)?);
    for &t_f in &tf_axis.values {
        ProtocolSpec { t_f, ..spec.clone() }.validate()?;
    }
    for &kappa in &kappa_axis.values {
        NoiseParams::new(kappa, noise_base.kappa_phi)?;
    }
    let base = RunSettings { noise: noise_base, ..*settings };
    base.validate()?;
    let metadata = sweep_metadata(spec, &base, &["t_f", "kappa"]);
    Ok(SweepResult::evaluate(tf_axis, Some(kappa_axis), metadata, |t_f, kappa| {
        let cell_spec = ProtocolSpec { t_f, ..spec.clone() };
        let cell = RunSettings { noise: NoiseParams::new(kappa.expect("two-axis sweep"), noise_base.kappa_phi)?, ..base };
        Ok(simulate(&cell_spec, ErrorModel::NONE, &cell)?.final_p_minus())
    }))
}
