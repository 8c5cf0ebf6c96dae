//! Composite Gauss–Legendre quadrature on a fixed panel grid.
//!
//! Gauss nodes are interior to every panel, so integrands that are only
//! removably singular at the grid points are never evaluated there.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fockspace::C64;

pub(crate) struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// n-point rule on [−1, 1] via Newton iteration on P_n.
    fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    pub(crate) fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<C64>
    where
        F: FnMut(f64) -> Result<C64>,
    {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let mut acc = C64::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x)? * *w;
        }
        Ok(acc * half)
    }
}

pub(crate) fn gauss4() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(4))
}

pub(crate) fn gauss8() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(8))
}

/// Integrals of `f` over every panel `[grid[k], grid[k+1]]`.
///
/// The eight-point result is returned; the summed |8-point − 4-point|
/// difference must stay below `tolerance`.
pub(crate) fn panel_integrals<F>(grid: &[f64], tolerance: f64, mut f: F) -> Result<Vec<C64>>
where
    F: FnMut(f64) -> Result<C64>,
{
    let mut out = Vec::with_capacity(grid.len().saturating_sub(1));
    let mut estimate = 0.0;
    for w in grid.windows(2) {
        let fine = gauss8().integrate(w[0], w[1], &mut f)?;
        let coarse = gauss4().integrate(w[0], w[1], &mut f)?;
        estimate += (fine - coarse).norm();
        out.push(fine);
    }
    if !estimate.is_finite() || estimate > tolerance {
        return Err(Error::Quadrature { estimate, tolerance });
    }
    Ok(out)
}

/// Running integral of `f` evaluated at every grid point, starting from 0.
pub(crate) fn cumulative<F>(grid: &[f64], tolerance: f64, f: F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<C64>,
{
    let panels = panel_integrals(grid, tolerance, f)?;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    out.push(0.0);
    for p in panels {
        acc += p.re;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        // 8 points integrate degree 15 exactly
        let v = gauss8().integrate(0.0, 2.0, |x| Ok(C64::new(x.powi(15), 0.0))).unwrap();
        assert!((v.re - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let v = gauss4().integrate(-1.0, 1.0, |x| Ok(C64::new(x.powi(6), 0.0))).unwrap();
        assert!((v.re - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for r in [gauss4(), gauss8()] {
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
            assert!(r.nodes.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn cumulative_sine() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.03).collect();
        let c = cumulative(&grid, 1e-12, |t| Ok(C64::new(t.sin(), 0.0))).unwrap();
        for (t, v) in grid.iter().zip(&c) {
            assert!((v - (1.0 - t.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn coarse_grid_fails_tolerance() {
        let grid = [0.0, 10.0];
        let r = panel_integrals(&grid, 1e-10, |t| Ok(C64::new((5.0 * t).sin(), 0.0)));
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
