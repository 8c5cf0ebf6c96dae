//! Control schedule design.
//!
//! The mixing angle γ is a cubic that carries the invariant eigenvector from
//! |C₊⟩ to |C₋⟩; the phase angle β is either a quartic (base protocol) or
//! slaved to γ by cot β = 4n sin³γ (optimal family, whose time-varying phase
//! makes the first-order amplitude-error sensitivity vanish). Schedules are
//! sampled on a uniform grid and can be calibrated into physical Josephson
//! and single-photon drive amplitudes.

mod calibrate;
mod phase;
mod polynomial;
mod protocol;

pub use calibrate::{calibrate_physical, CalibrationMode, PhysicalDrives};
pub use phase::{dynamical_phase, lr_phase, LrPhase};
pub(crate) use phase::dynamical_rate;
pub use polynomial::{solve_boundary_polynomial, BoundaryCondition, PolynomialCurve};
pub use protocol::{beta_conditions, gamma_conditions, ControlPoint, Protocol, ProtocolKind};

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::interp::UniformCubic;
use crate::output::{num, write_table};

pub const DEFAULT_SAMPLES: usize = 2001;
pub const MIN_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    /// Phase-winding parameter of the optimal family; ignored by the base protocol.
    pub n: u32,
    pub t_f: f64,
    pub samples: usize,
    pub alpha: C64,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        Self { kind: ProtocolKind::Optimal, n: 1, t_f: 5.0, samples: DEFAULT_SAMPLES, alpha: C64::new(2.0, 0.0) }
    }
}

impl ProtocolSpec {
    pub fn base(t_f: f64) -> Self {
        Self { kind: ProtocolKind::Base, t_f, ..Self::default() }
    }

    pub fn optimal(n: u32, t_f: f64) -> Self {
        Self { kind: ProtocolKind::Optimal, n, t_f, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::param("samples", format!("need at least {MIN_SAMPLES}, got {}", self.samples)));
        }
        if !(self.t_f > 0.0) || !self.t_f.is_finite() {
            return Err(Error::param("t_f", format!("must be positive and finite, got {}", self.t_f)));
        }
        if self.kind == ProtocolKind::Optimal && self.n < 1 {
            return Err(Error::param("n", "the optimal protocol needs n >= 1"));
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::param("alpha", "must be finite"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples).map(|k| if k + 1 == self.samples { self.t_f } else { self.t_f * k as f64 / last }).collect()
    }
}

/// Sampled control schedule. Energies in units of K, times in 1/K.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub spec: ProtocolSpec,
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_dot: Vec<f64>,
    pub beta: Vec<f64>,
    pub beta_dot: Vec<f64>,
    pub omega_re: Vec<f64>,
    pub omega_im: Vec<f64>,
    pub delta: Vec<f64>,
    pub r_plus: Vec<f64>,
    /// Physical drive amplitudes; `None` until calibrated.
    pub drives: Option<PhysicalDrives>,
}

pub const SCHEDULE_HEADER: [&str; 11] =
    ["t", "gamma", "gamma_dot", "beta", "beta_dot", "omega_re", "omega_im", "delta", "r_plus", "e_j", "epsilon"];

impl PulseSchedule {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_f(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    fn channels(&self) -> [&Vec<f64>; 9] {
        [
            &self.gamma,
            &self.gamma_dot,
            &self.beta,
            &self.beta_dot,
            &self.omega_re,
            &self.omega_im,
            &self.delta,
            &self.r_plus,
            &self.times,
        ]
    }

    /// Structural checks: equal lengths, uniform grid from 0, finite entries.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n < 4 {
            return Err(Error::param("schedule", format!("need at least 4 samples, got {n}")));
        }
        if self.channels().iter().any(|c| c.len() != n) {
            return Err(Error::param("schedule", "channel lengths differ"));
        }
        if let Some(d) = &self.drives {
            if d.e_j.len() != n || d.epsilon.len() != n {
                return Err(Error::param("schedule", "drive lengths differ from the time grid"));
            }
        }
        let t_f = self.t_f();
        if self.times[0] != 0.0 || !(t_f > 0.0) {
            return Err(Error::param("schedule", "time grid must start at 0 and end after it"));
        }
        let step = t_f / (n - 1) as f64;
        for (k, t) in self.times.iter().enumerate() {
            if (t - step * k as f64).abs() > 1e-9 * t_f {
                return Err(Error::param("schedule", format!("time grid is not uniform at sample {k}")));
            }
        }
        for (ci, c) in self.channels().iter().enumerate() {
            if let Some(k) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::param("schedule", format!("non-finite entry in {} at sample {k}", SCHEDULE_HEADER[(ci + 1) % 9])));
            }
        }
        Ok(())
    }

    /// Boundary conditions every designed schedule satisfies.
    pub fn check_design_invariants(&self) -> Result<()> {
        self.validate()?;
        let last = self.len() - 1;
        let tol = 1e-8;
        let checks = [
            ("gamma(0) = pi", (self.gamma[0] - PI).abs()),
            ("gamma(t_f) = 0", self.gamma[last].abs()),
            ("gamma_dot(0) = 0", self.gamma_dot[0].abs()),
            ("gamma_dot(t_f) = 0", self.gamma_dot[last].abs()),
            ("|omega|(0) = 0", self.omega_re[0].hypot(self.omega_im[0])),
            ("|omega|(t_f) = 0", self.omega_re[last].hypot(self.omega_im[last])),
        ];
        for (name, err) in checks {
            if !(err <= tol) {
                return Err(Error::Consistency(format!("{name} violated by {err:e}")));
            }
        }
        Ok(())
    }

    pub fn drives(&self) -> Result<&PhysicalDrives> {
        self.drives.as_ref().ok_or(Error::Uncalibrated)
    }

    pub fn interpolant(&self) -> Result<ScheduleInterpolant> {
        self.validate()?;
        let step = self.t_f() / (self.len() - 1) as f64;
        let mk = |v: &Vec<f64>| UniformCubic::new(0.0, step, v.clone());
        Ok(ScheduleInterpolant {
            t_f: self.t_f(),
            gamma: mk(&self.gamma),
            gamma_dot: mk(&self.gamma_dot),
            beta: mk(&self.beta),
            beta_dot: mk(&self.beta_dot),
            omega_re: mk(&self.omega_re),
            omega_im: mk(&self.omega_im),
            delta: mk(&self.delta),
            r_plus: mk(&self.r_plus),
            drives: self.drives.as_ref().map(|d| (mk(&d.e_j), mk(&d.epsilon))),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let (e_j, eps) = match &self.drives {
            Some(d) => (Some(&d.e_j), Some(&d.epsilon)),
            None => (None, None),
        };
        let rows = (0..self.len()).map(|k| {
            vec![
                num(self.times[k]),
                num(self.gamma[k]),
                num(self.gamma_dot[k]),
                num(self.beta[k]),
                num(self.beta_dot[k]),
                num(self.omega_re[k]),
                num(self.omega_im[k]),
                num(self.delta[k]),
                num(self.r_plus[k]),
                num(e_j.map_or(f64::NAN, |v| v[k])),
                num(eps.map_or(f64::NAN, |v| v[k])),
            ]
        });
        write_table(out, &[], &SCHEDULE_HEADER, rows)
    }
}

/// Cubic interpolation of every schedule channel.
#[derive(Debug, Clone)]
pub struct ScheduleInterpolant {
    t_f: f64,
    gamma: UniformCubic,
    gamma_dot: UniformCubic,
    beta: UniformCubic,
    beta_dot: UniformCubic,
    omega_re: UniformCubic,
    omega_im: UniformCubic,
    delta: UniformCubic,
    r_plus: UniformCubic,
    drives: Option<(UniformCubic, UniformCubic)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSample {
    pub gamma: f64,
    pub gamma_dot: f64,
    pub beta: f64,
    pub beta_dot: f64,
    pub omega_re: f64,
    pub omega_im: f64,
    pub delta: f64,
    pub r_plus: f64,
}

impl ScheduleInterpolant {
    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn at(&self, t: f64) -> ScheduleSample {
        ScheduleSample {
            gamma: self.gamma.eval(t),
            gamma_dot: self.gamma_dot.eval(t),
            beta: self.beta.eval(t),
            beta_dot: self.beta_dot.eval(t),
            omega_re: self.omega_re.eval(t),
            omega_im: self.omega_im.eval(t),
            delta: self.delta.eval(t),
            r_plus: self.r_plus.eval(t),
        }
    }

    /// Effective-model drive (Δ, Re Ω, Im Ω) only.
    pub fn controls(&self, t: f64) -> (f64, f64, f64) {
        (self.delta.eval(t), self.omega_re.eval(t), self.omega_im.eval(t))
    }

    /// (E_J, ε) at time t.
    pub fn drives(&self, t: f64) -> Result<(f64, f64)> {
        let (e, p) = self.drives.as_ref().ok_or(Error::Uncalibrated)?;
        Ok((e.eval(t), p.eval(t)))
    }
}

fn sample(spec: &ProtocolSpec) -> Result<(Protocol, PulseSchedule)> {
    let proto = Protocol::new(spec)?;
    let times = spec.times();
    let n = times.len();
    let mut s = PulseSchedule {
        spec: spec.clone(),
        times: times.clone(),
        gamma: Vec::with_capacity(n),
        gamma_dot: Vec::with_capacity(n),
        beta: Vec::with_capacity(n),
        beta_dot: Vec::with_capacity(n),
        omega_re: Vec::with_capacity(n),
        omega_im: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
        r_plus: vec![0.0; n],
        drives: None,
    };
    for &t in &times {
        let c = proto.at(t)?;
        s.gamma.push(c.gamma);
        s.gamma_dot.push(c.gamma_dot);
        s.beta.push(c.beta);
        s.beta_dot.push(c.beta_dot);
        s.omega_re.push(c.omega_re);
        s.omega_im.push(c.omega_im);
        s.delta.push(c.delta);
    }
    Ok((proto, s))
}

/// Base protocol: Ω_R = γ̇/sin β, Δ = Ω_R cot γ cos β − β̇ with a quartic β.
pub fn base_schedule(spec: &ProtocolSpec) -> Result<PulseSchedule> {
    if spec.kind != ProtocolKind::Base {
        return Err(Error::param("kind", "base_schedule needs kind = base"));
    }
    let (proto, mut s) = sample(spec)?;
    let last = s.len() - 1;
    for (k, te) in [(0, 0.0), (last, spec.t_f)] {
        let numeric = proto.numeric_endpoint_delta(te)?;
        if (numeric - s.delta[k]).abs() > 1e-6 / spec.t_f {
            return Err(Error::EndpointLimit { t: te });
        }
    }
    if let Some(k) = s.delta.iter().position(|d| !d.is_finite()) {
        return Err(Error::EndpointLimit { t: s.times[k] });
    }
    s.r_plus = lr_phase(&s, spec)?.numeric;
    Ok(s)
}

/// Optimal family: cot β = 4n sin³γ, which keeps Im Ω identically zero.
pub fn optimal_schedule(spec: &ProtocolSpec) -> Result<PulseSchedule> {
    if spec.kind != ProtocolKind::Optimal {
        return Err(Error::param("kind", "optimal_schedule needs kind = optimal"));
    }
    let (_, mut s) = sample(spec)?;
    let max_re = s.omega_re.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (k, im) in s.omega_im.iter().enumerate() {
        if im.abs() > 1e-10 * max_re {
            return Err(Error::BranchSelection { t: s.times[k], im: *im });
        }
    }
    s.r_plus = lr_phase(&s, spec)?.numeric;
    Ok(s)
}

/// Dispatches on `spec.kind`.
pub fn design(spec: &ProtocolSpec) -> Result<PulseSchedule> {
    match spec.kind {
        ProtocolKind::Base => base_schedule(spec),
        ProtocolKind::Optimal => optimal_schedule(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_schedule_shape() {
        let s = base_schedule(&ProtocolSpec::base(5.0)).unwrap();
        s.check_design_invariants().unwrap();
        assert!(s.omega_im.iter().all(|&v| v == 0.0));
        let mid = s.len() / 2;
        assert!((s.omega_re[mid] - 3.0 * PI / 10.0).abs() < 1e-12);
        assert!((s.delta[mid] - PI / 20.0).abs() < 1e-12);
        assert!((s.delta[0] + 3.0 * PI / 10.0).abs() < 1e-12);
        assert!(s.omega_re[0] == 0.0 && s.omega_re[s.len() - 1] == 0.0);
        let min_sin = s.beta.iter().map(|b| b.sin().abs()).fold(1.0, f64::min);
        assert!(min_sin >= 0.9);
        assert!(s.beta.iter().all(|&b| b > -PI && b < 0.0));
    }

    #[test]
    fn optimal_schedule_shape() {
        let s = optimal_schedule(&ProtocolSpec::optimal(1, 5.0)).unwrap();
        s.check_design_invariants().unwrap();
        assert!(s.omega_im.iter().all(|v| v.abs() < 1e-14));
        assert!((s.beta[0] + PI / 2.0).abs() < 1e-15 && (s.beta[s.len() - 1] + PI / 2.0).abs() < 1e-15);
        assert!(s.omega_re.iter().all(|&v| v >= 0.0));
        // cot β = 4n sin³γ at interior points
        for k in 1..s.len() - 1 {
            let r = 1.0 / s.beta[k].tan() - 4.0 * s.gamma[k].sin().powi(3);
            assert!(r.abs() <= 1e-9, "k={k} r={r}");
        }
    }

    #[test]
    fn peak_drive_grows_with_n() {
        let peaks: Vec<f64> = (1..=5)
            .map(|n| optimal_schedule(&ProtocolSpec::optimal(n, 5.0)).unwrap().omega_re.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
            .collect();
        assert!(peaks.windows(2).all(|w| w[1] > w[0]), "{peaks:?}");
    }

    #[test]
    fn wrong_kind_and_small_grid_rejected() {
        assert!(base_schedule(&ProtocolSpec::optimal(1, 5.0)).is_err());
        assert!(optimal_schedule(&ProtocolSpec::base(5.0)).is_err());
        let small = ProtocolSpec { samples: 199, ..ProtocolSpec::base(5.0) };
        assert!(matches!(base_schedule(&small), Err(Error::InvalidParameter { .. })));
        let zero_n = ProtocolSpec::optimal(0, 5.0);
        assert!(optimal_schedule(&zero_n).is_err());
    }

    #[test]
    fn interpolant_hits_samples_and_midpoints() {
        let s = optimal_schedule(&ProtocolSpec::optimal(2, 5.0)).unwrap();
        let ip = s.interpolant().unwrap();
        let proto = Protocol::new(&s.spec).unwrap();
        for t in [0.0, 0.00123, 1.7, 2.5, 4.999] {
            let a = ip.at(t);
            let b = proto.at(t).unwrap();
            assert!((a.omega_re - b.omega_re).abs() < 1e-9, "t={t}");
            assert!((a.delta - b.delta).abs() < 1e-9, "t={t}");
        }
        assert!(matches!(ip.drives(1.0), Err(Error::Uncalibrated)));
    }

    #[test]
    fn csv_header_and_rows() {
        let s = base_schedule(&ProtocolSpec { samples: 200, ..ProtocolSpec::base(5.0) }).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,gamma,gamma_dot,beta,beta_dot,omega_re,omega_im,delta,r_plus,e_j,epsilon");
        assert_eq!(lines.count(), 200);
    }
}
