//! Adaptive Dormand–Prince 5(4) integration of complex-valued linear ODEs.
//!
//! Both the Schrödinger and the (vectorised) Lindblad equations are advanced
//! with this stepper. Output times are hit exactly by shortening the step that
//! would cross them, so no dense-output interpolation is involved.

use crate::error::{Error, Result};
use crate::fockspace::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 20_000_000 }
    }
}

impl StepControl {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, atol: (rtol * 1e-2).max(1e-15), ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrates y' = f(t, y) from `t0` through every time in `outputs`
/// (ascending, all ≥ t0) and hands each output state to `observe`.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    y0: &[C64],
    outputs: &[f64],
    control: StepControl,
    mut observe: O,
) -> Result<IntegrationStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::param("outputs", "output times must be ascending and not before t0"));
    }

    let mut y = y0.to_vec();
    let mut ynew = vec![C64::default(); n];
    let mut tmp = vec![C64::default(); n];
    let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![C64::default(); n]);

    let mut t = t0;
    let mut out_idx = 0;
    while out_idx < outputs.len() && outputs[out_idx] <= t0 {
        observe(out_idx, t0, &y)?;
        out_idx += 1;
    }
    if out_idx == outputs.len() {
        return Ok(stats);
    }

    let t_end = *outputs.last().unwrap();
    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = initial_step(&y, &k[0], t_end - t0, control);
    let mut err_prev = 1e-4_f64;

    while out_idx < outputs.len() {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(Error::Integrator { t, reason: "maximum step count exceeded".into() });
        }
        let target = outputs[out_idx];
        let mut step = h;
        let mut hits = false;
        if t + step >= target - 1e-14 * target.abs().max(1.0) {
            step = target - t;
            hits = true;
        }
        if step < 1e-14 * t.abs().max(1.0) && !hits {
            return Err(Error::StepUnderflow { t });
        }

        let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
        stage(&mut tmp, &y, step, &[(A21, &*k1)]);
        rhs(t + C2 * step, &tmp, k2);
        stage(&mut tmp, &y, step, &[(A31, &*k1), (A32, &*k2)]);
        rhs(t + C3 * step, &tmp, k3);
        stage(&mut tmp, &y, step, &[(A41, &*k1), (A42, &*k2), (A43, &*k3)]);
        rhs(t + C4 * step, &tmp, k4);
        stage(&mut tmp, &y, step, &[(A51, &*k1), (A52, &*k2), (A53, &*k3), (A54, &*k4)]);
        rhs(t + C5 * step, &tmp, k5);
        stage(&mut tmp, &y, step, &[(A61, &*k1), (A62, &*k2), (A63, &*k3), (A64, &*k4), (A65, &*k5)]);
        rhs(t + step, &tmp, k6);
        stage(&mut ynew, &y, step, &[(A71, &*k1), (A73, &*k3), (A74, &*k4), (A75, &*k5), (A76, &*k6)]);
        rhs(t + step, &ynew, k7);
        stats.rhs_evals += 6;

        let mut acc = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
            let sc = control.atol + control.rtol * y[i].norm().max(ynew[i].norm());
            acc += (e.norm() / sc).powi(2);
        }
        let err = (acc / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integrator { t, reason: "non-finite error estimate".into() });
        }

        if err <= 1.0 {
            t = if hits { target } else { t + step };
            std::mem::swap(&mut y, &mut ynew);
            let (first, rest) = k.split_at_mut(1);
            std::mem::swap(&mut first[0], &mut rest[5]);
            stats.accepted += 1;
            // PI controller (Hairer & Wanner II.4)
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            let fac = fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
            if hits {
                observe(out_idx, t, &y)?;
                out_idx += 1;
                while out_idx < outputs.len() && outputs[out_idx] <= t {
                    observe(out_idx, t, &y)?;
                    out_idx += 1;
                }
                // a clipped step says nothing about the natural step size
                h = h.max(step) * fac.min(1.0).max(0.5);
            } else {
                h = step * fac;
            }
        } else {
            stats.rejected += 1;
            h = step * (0.9 * err.powf(-0.2)).max(0.1);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t });
            }
        }
    }
    Ok(stats)
}

fn stage(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &Vec<C64>)]) {
    for i in 0..out.len() {
        let mut s = C64::default();
        for (a, k) in terms {
            s += k[i] * *a;
        }
        out[i] = y[i] + s * h;
    }
}

fn initial_step(y: &[C64], f: &[C64], span: f64, control: StepControl) -> f64 {
    let n = y.len() as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for (yi, fi) in y.iter().zip(f) {
        let sc = control.atol + control.rtol * yi.norm();
        d0 += (yi.norm() / sc).powi(2);
        d1 += (fi.norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.abs() / 10.0).max(1e-12)
}
