use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Prescribed value of the `order`-th derivative at `point`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub point: f64,
    pub order: usize,
    pub value: f64,
}

impl BoundaryCondition {
    pub fn new(point: f64, order: usize, value: f64) -> Self {
        Self { point, order, value }
    }
}

/// Polynomial in t on [0, t_f], coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCurve {
    pub coefficients: Vec<f64>,
    pub t_f: f64,
}

// d^k/dt^k t^i = i!/(i−k)! t^{i−k}
fn falling(i: usize, k: usize) -> f64 {
    (i + 1 - k..=i).map(|j| j as f64).product()
}

impl PolynomialCurve {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    pub fn derivative(&self, t: f64, order: usize) -> f64 {
        let c = &self.coefficients;
        if order >= c.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in (order..c.len()).rev() {
            acc = acc * t + c[i] * falling(i, order);
        }
        acc
    }

    /// Coefficients of the same polynomial in powers of (t − t0).
    pub fn taylor_at(&self, t0: f64) -> Vec<f64> {
        let mut fact = 1.0;
        (0..self.coefficients.len())
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                self.derivative(t0, k) / fact
            })
            .collect()
    }
}

/// Solves for the unique polynomial of `degree` meeting every condition.
pub fn solve_boundary_polynomial(conditions: &[BoundaryCondition], degree: usize, t_f: f64) -> Result<PolynomialCurve> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::param("t_f", format!("must be positive and finite, got {t_f}")));
    }
    let m = degree + 1;
    if conditions.len() != m {
        return Err(Error::param(
            "conditions",
            format!("a degree-{degree} polynomial needs {m} conditions, got {}", conditions.len()),
        ));
    }
    for (i, c) in conditions.iter().enumerate() {
        if !(0.0..=t_f).contains(&c.point) || !c.value.is_finite() {
            return Err(Error::param("conditions", format!("condition {i} {c:?} lies outside [0, {t_f}] or is not finite")));
        }
    }

    // Work in s = t/t_f so the system stays well scaled for any duration.
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (r, c) in conditions.iter().enumerate() {
        let s = c.point / t_f;
        for i in c.order..m {
            a[(r, i)] = falling(i, c.order) * s.powi((i - c.order) as i32);
        }
        b[r] = c.value * t_f.powi(c.order as i32);
    }

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let (imin, smin) = svd.singular_values.argmin();
    if smin <= 1e-12 * smax.max(1.0) {
        // rows with weight in the left null vector are the mutually inconsistent ones
        let u = svd.u.as_ref().expect("requested U");
        let involved: Vec<String> = (0..m)
            .filter(|&r| u[(r, imin)].abs() > 1e-6)
            .map(|r| {
                let c = conditions[r];
                format!("#{r} (t={}, order {}, value {})", c.point, c.order, c.value)
            })
            .collect();
        return Err(Error::SingularBoundary(format!("conditions {} are linearly dependent", involved.join(", "))));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::SingularBoundary(e.to_string()))?;

    let coefficients: Vec<f64> = (0..m).map(|i| x[i] / t_f.powi(i as i32)).collect();
    let curve = PolynomialCurve { coefficients, t_f };
    for (i, c) in conditions.iter().enumerate() {
        let got = curve.derivative(c.point, c.order);
        let scale = 1.0_f64.max(c.value.abs());
        if (got - c.value).abs() > 1e-10 * scale {
            return Err(Error::Consistency(format!("condition {i} residual {} exceeds 1e-10", got - c.value)));
        }
    }
    Ok(curve)
}
