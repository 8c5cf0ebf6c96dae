use super::FockOperator;
use crate::error::{Error, Result};

// Rescale the running recurrence whenever its magnitude leaves this window.
const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;
// Below this argument the prefactor is applied once up front.
const FOLD_THRESHOLD: f64 = 30.0;

/// Diagonal entries e^{−φ²/2} L_n(φ²), n = 0..dim.
///
/// Uses the three-term recurrence (n+1)L_{n+1} = (2n+1−x)L_n − n L_{n−1}.
/// For x = φ² > 30 the exponential prefactor is carried as a log-scale next to
/// the recurrence so neither it nor L_n overflows.
pub fn laguerre_diagonal(dim: usize, phi_a: f64) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "operator must be non-empty" });
    }
    if !(phi_a > 0.0) || !phi_a.is_finite() {
        return Err(Error::param("phi_a", format!("must be positive and finite, got {phi_a}")));
    }
    let x = phi_a * phi_a;
    if x <= FOLD_THRESHOLD {
        direct(dim, x)
    } else {
        folded(dim, x)
    }
}

fn direct(dim: usize, x: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(dim);
    let (mut prev, mut cur) = (0.0, (-x / 2.0).exp());
    for n in 0..dim {
        if !cur.is_finite() {
            return Err(Error::LaguerreOverflow { n });
        }
        out.push(cur);
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - x) * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(out)
}

// value_n = exp(log_scale) * u_n, prefactor folded into log_scale
fn folded(dim: usize, x: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(dim);
    let mut log_scale = -x / 2.0;
    let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
    for n in 0..dim {
        let v = if cur == 0.0 { 0.0 } else { cur.signum() * (log_scale + cur.abs().ln()).exp() };
        if !v.is_finite() || !cur.is_finite() {
            return Err(Error::LaguerreOverflow { n });
        }
        out.push(v);
        let nf = n as f64;
        let mut next = ((2.0 * nf + 1.0 - x) * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        let mag = next.abs().max(prev.abs());
        if mag > RESCALE_HI || (mag < RESCALE_LO && mag > 0.0) {
            next /= mag;
            prev /= mag;
            log_scale += mag.ln();
        }
        cur = next;
    }
    Ok(out)
}

/// M = Σ e^{−φ²/2} L_n(φ²) |n⟩⟨n|, the rotating-wave form of the Josephson term.
pub fn laguerre_control_op(dim: usize, phi_a: f64) -> Result<FockOperator> {
    Ok(FockOperator::from_diagonal(&laguerre_diagonal(dim, phi_a)?))
}
