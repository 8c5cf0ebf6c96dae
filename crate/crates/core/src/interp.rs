//! Piecewise-cubic interpolation on a uniform sample grid.

/// Four-point Lagrange interpolant through uniformly spaced samples.
///
/// Each evaluation uses the stencil of four samples surrounding `t`, shifted
/// inward at the boundaries. Cubic data is reproduced exactly.
#[derive(Debug, Clone)]
pub struct UniformCubic {
    t0: f64,
    step: f64,
    values: Vec<f64>,
}

impl UniformCubic {
    /// `values[k]` is the sample at `t0 + k·step`. Needs at least four samples.
    pub fn new(t0: f64, step: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 4, "cubic interpolation needs at least four samples");
        assert!(step > 0.0);
        Self { t0, step, values }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let x = (t - self.t0) / self.step;
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = x - base as f64;
        let y = &self.values[base..base + 4];
        // nodes at u = 0, 1, 2, 3
        let (u0, u1, u2, u3) = (u, u - 1.0, u - 2.0, u - 3.0);
        -y[0] * u1 * u2 * u3 / 6.0 + y[1] * u0 * u2 * u3 / 2.0 - y[2] * u0 * u1 * u3 / 2.0
            + y[3] * u0 * u1 * u2 / 6.0
    }
}
