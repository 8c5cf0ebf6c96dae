use std::f64::consts::{FRAC_PI_2, PI};

use super::polynomial::{solve_boundary_polynomial, BoundaryCondition, PolynomialCurve};
use super::ProtocolSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Base,
    Optimal,
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProtocolKind::Base => "base",
            ProtocolKind::Optimal => "optimal",
        })
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(ProtocolKind::Base),
            "optimal" => Ok(ProtocolKind::Optimal),
            other => Err(Error::param("kind", format!("expected base or optimal, got {other:?}"))),
        }
    }
}

/// Angle with its sine and cosine, evaluated without cancellation near anchors.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Angle {
    pub value: f64,
    pub sin: f64,
    pub cos: f64,
}

impl Angle {
    /// anchor + d, where anchor is snapped to an exact multiple of π/2 when it is one.
    fn shifted(anchor: f64, d: f64) -> Self {
        let m = (anchor / FRAC_PI_2).round();
        let value = anchor + d;
        if (anchor - m * FRAC_PI_2).abs() <= 1e-12 * anchor.abs().max(1.0) {
            let (s, c) = d.sin_cos();
            let (sin, cos) = match (m as i64).rem_euclid(4) {
                0 => (s, c),
                1 => (c, -s),
                2 => (-s, -c),
                _ => (-c, s),
            };
            Self { value, sin, cos }
        } else {
            let (sin, cos) = value.sin_cos();
            Self { value, sin, cos }
        }
    }
}

/// Polynomial re-expanded around a point where some derivatives are known exactly.
#[derive(Debug, Clone)]
struct Expansion {
    t0: f64,
    coeffs: Vec<f64>,
}

impl Expansion {
    fn new(curve: &PolynomialCurve, t0: f64, conditions: &[BoundaryCondition]) -> Self {
        let mut coeffs = curve.taylor_at(t0);
        let mut fact = 1.0;
        for k in 0..coeffs.len() {
            if k > 0 {
                fact *= k as f64;
            }
            if let Some(c) = conditions.iter().find(|c| c.point == t0 && c.order == k) {
                coeffs[k] = c.value / fact;
            }
        }
        Self { t0, coeffs }
    }

    /// (p(t) − p(t0), p'(t))
    fn offset_and_rate(&self, t: f64) -> (f64, f64) {
        let tau = t - self.t0;
        let (mut d, mut r) = (0.0, 0.0);
        for k in (1..self.coeffs.len()).rev() {
            d = d * tau + self.coeffs[k];
            r = r * tau + k as f64 * self.coeffs[k];
        }
        (d * tau, r)
    }

    /// Order of the first non-vanishing derivative beyond the value.
    fn contact_order(&self) -> Option<usize> {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        (1..self.coeffs.len()).find(|&k| self.coeffs[k].abs() > 1e-12 * scale)
    }
}

struct AnchoredCurve {
    anchors: Vec<Expansion>,
}

impl AnchoredCurve {
    fn new(curve: &PolynomialCurve, conditions: &[BoundaryCondition]) -> Self {
        let mut points: Vec<f64> = conditions.iter().filter(|c| c.order == 0).map(|c| c.point).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self { anchors: points.into_iter().map(|p| Expansion::new(curve, p, conditions)).collect() }
    }

    fn nearest(&self, t: f64) -> &Expansion {
        self.anchors.iter().min_by(|a, b| (a.t0 - t).abs().total_cmp(&(b.t0 - t).abs())).expect("at least one anchor")
    }

    fn eval(&self, t: f64) -> (Angle, f64) {
        let e = self.nearest(t);
        let (d, rate) = e.offset_and_rate(t);
        (Angle::shifted(e.coeffs[0], d), rate)
    }
}

/// Closed-form control quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub gamma: f64,
    pub gamma_dot: f64,
    pub beta: f64,
    pub beta_dot: f64,
    pub omega_re: f64,
    pub omega_im: f64,
    pub delta: f64,
}

/// Evaluates either protocol analytically at arbitrary times.
pub struct Protocol {
    spec: ProtocolSpec,
    gamma: AnchoredCurve,
    gamma_curve: PolynomialCurve,
    beta: Option<(AnchoredCurve, PolynomialCurve)>,
}

pub fn gamma_conditions(t_f: f64) -> Vec<BoundaryCondition> {
    vec![
        BoundaryCondition::new(0.0, 0, PI),
        BoundaryCondition::new(0.0, 1, 0.0),
        BoundaryCondition::new(t_f, 0, 0.0),
        BoundaryCondition::new(t_f, 1, 0.0),
    ]
}

pub fn beta_conditions(t_f: f64) -> Vec<BoundaryCondition> {
    vec![
        BoundaryCondition::new(0.0, 0, -FRAC_PI_2),
        BoundaryCondition::new(t_f / 2.0, 0, -FRAC_PI_2),
        BoundaryCondition::new(t_f, 0, -FRAC_PI_2),
        BoundaryCondition::new(0.0, 1, PI / (2.0 * t_f)),
        BoundaryCondition::new(t_f, 1, PI / (2.0 * t_f)),
    ]
}

impl Protocol {
    pub fn new(spec: &ProtocolSpec) -> Result<Self> {
        spec.validate()?;
        let gc = gamma_conditions(spec.t_f);
        let gamma_curve = solve_boundary_polynomial(&gc, 3, spec.t_f)?;
        let gamma = AnchoredCurve::new(&gamma_curve, &gc);
        let beta = match spec.kind {
            ProtocolKind::Base => {
                let bc = beta_conditions(spec.t_f);
                let curve = solve_boundary_polynomial(&bc, 4, spec.t_f)?;
                Some((AnchoredCurve::new(&curve, &bc), curve))
            }
            ProtocolKind::Optimal => None,
        };
        Ok(Self { spec: spec.clone(), gamma, gamma_curve, beta })
    }

    pub fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    pub fn gamma_curve(&self) -> &PolynomialCurve {
        &self.gamma_curve
    }

    pub fn beta_curve(&self) -> Option<&PolynomialCurve> {
        self.beta.as_ref().map(|(_, c)| c)
    }

    /// Returns the control point and the stable (sin, cos) of γ and β.
    pub(crate) fn eval_full(&self, t: f64) -> Result<(ControlPoint, Angle, Angle)> {
        let (g, gdot) = self.gamma.eval(t);
        match &self.beta {
            Some((beta, _)) => {
                let (b, bdot) = beta.eval(t);
                let omega_re = gdot / b.sin;
                let delta = if g.sin == 0.0 {
                    self.endpoint_delta(t, b, bdot)?
                } else {
                    gdot * g.cos * b.cos / (g.sin * b.sin) - bdot
                };
                if !delta.is_finite() || !omega_re.is_finite() {
                    return Err(Error::EndpointLimit { t });
                }
                let cp = ControlPoint {
                    gamma: g.value,
                    gamma_dot: gdot,
                    beta: b.value,
                    beta_dot: bdot,
                    omega_re,
                    omega_im: 0.0,
                    delta,
                };
                Ok((cp, g, b))
            }
            None => {
                let n = self.spec.n as f64;
                let x = 4.0 * n * g.sin.powi(3);
                let root = (1.0 + x * x).sqrt();
                let theta = x.atan();
                let b = Angle { value: -FRAC_PI_2 - theta, sin: -1.0 / root, cos: -x / root };
                let bdot = -12.0 * n * g.sin * g.sin * g.cos * gdot / (1.0 + x * x);
                let (omega_re, omega_im, delta) = general_controls(n, g, gdot, b, bdot);
                let cp = ControlPoint { gamma: g.value, gamma_dot: gdot, beta: b.value, beta_dot: bdot, omega_re, omega_im, delta };
                Ok((cp, g, b))
            }
        }
    }

    pub fn at(&self, t: f64) -> Result<ControlPoint> {
        Ok(self.eval_full(t)?.0)
    }

    /// lim γ̇ cot γ cot β − β̇ where sin γ = 0: with γ − γ_e ∝ τ^k and cos β ∝ τ,
    /// γ̇ cot γ → k/τ and cot β → −β̇τ/sin²β, so Δ → −kβ̇/sin²β − β̇.
    fn endpoint_delta(&self, t: f64, b: Angle, bdot: f64) -> Result<f64> {
        let e = self.gamma.nearest(t);
        let k = e.contact_order().ok_or(Error::EndpointLimit { t })?;
        if b.cos.abs() > 1e-12 {
            return Err(Error::EndpointLimit { t });
        }
        Ok(-(k as f64) * bdot / (b.sin * b.sin) - bdot)
    }

    /// Richardson-extrapolated Δ from the interior side of an endpoint.
    pub(crate) fn numeric_endpoint_delta(&self, t_end: f64) -> Result<f64> {
        let h = 1e-6 * self.spec.t_f;
        let dir = if t_end > self.spec.t_f / 2.0 { -1.0 } else { 1.0 };
        let d1 = self.at(t_end + dir * h)?.delta;
        let d2 = self.at(t_end + dir * 2.0 * h)?.delta;
        Ok(2.0 * d1 - d2)
    }
}

/// Drives that keep the invariant for given (γ, β) trajectories and a
/// phase rate Ṙ₊ = 2nγ̇ sin²γ; with n = 0 this is Ω = γ̇(sin β, cos β), Δ = −β̇.
pub(crate) fn general_controls(n: f64, g: Angle, gdot: f64, b: Angle, bdot: f64) -> (f64, f64, f64) {
    let s3 = g.sin.powi(3);
    let omega_re = (4.0 * n * b.cos * s3 + b.sin) * gdot;
    let omega_im = (-4.0 * n * b.sin * s3 + b.cos) * gdot;
    let delta = 4.0 * n * gdot * g.cos * g.sin * g.sin - bdot;
    (omega_re, omega_im, delta)
}
