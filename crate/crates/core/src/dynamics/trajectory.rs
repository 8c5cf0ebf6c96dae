use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fockspace::{CatBasis, FockState, C64};
use crate::output::{num, write_table};

/// Output times and integrator tolerance for one propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_f: f64,
    pub output_points: usize,
    pub tolerance: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_OUTPUT_POINTS: usize = 201;

impl TimeGrid {
    pub fn new(t0: f64, t_f: f64, output_points: usize, tolerance: f64) -> Result<Self> {
        if !(t_f > t0) || !t0.is_finite() || !t_f.is_finite() {
            return Err(Error::param("grid", format!("need t_f > t0, got [{t0}, {t_f}]")));
        }
        if output_points < 2 {
            return Err(Error::param("output_points", "need at least 2 output times"));
        }
        if !(1e-14..=1e-6).contains(&tolerance) {
            return Err(Error::param("tolerance", format!("must lie in [1e-14, 1e-6], got {tolerance}")));
        }
        Ok(Self { t0, t_f, output_points, tolerance })
    }

    /// [0, t_f] with the default point count and tolerance.
    pub fn span(t_f: f64) -> Result<Self> {
        Self::new(0.0, t_f, DEFAULT_OUTPUT_POINTS, DEFAULT_TOLERANCE)
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.output_points - 1) as f64;
        (0..self.output_points)
            .map(|k| if k + 1 == self.output_points { self.t_f } else { self.t0 + (self.t_f - self.t0) * k as f64 / last })
            .collect()
    }

    pub(crate) fn check_within(&self, t_f: f64) -> Result<()> {
        if self.t0 < 0.0 || self.t_f > t_f * (1.0 + 1e-12) {
            return Err(Error::param("grid", format!("[{}, {}] extends beyond the schedule [0, {t_f}]", self.t0, self.t_f)));
        }
        Ok(())
    }
}

/// Stored states of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryStates {
    /// Amplitudes on (|C₋⟩, |C₊⟩).
    TwoLevel(Vec<[C64; 2]>),
    Fock(Vec<FockState>),
    /// Density matrices; 2×2 ones are in the (|C₋⟩, |C₊⟩) basis.
    Density(Vec<DMatrix<C64>>),
}

impl TrajectoryStates {
    pub fn len(&self) -> usize {
        match self {
            Self::TwoLevel(v) => v.len(),
            Self::Fock(v) => v.len(),
            Self::Density(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Drift diagnostics collected while integrating.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// max |‖ψ‖ − 1| or max |tr ρ − 1|.
    pub norm_drift: f64,
    /// max entry of |ρ − ρ†| (density runs only).
    pub hermiticity_drift: f64,
    /// Smallest eigenvalue seen (density runs only; 0 otherwise).
    pub min_eigenvalue: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: TrajectoryStates,
    /// ‖ψ‖ for pure states, tr ρ for density matrices.
    pub norms: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    /// 1 − P₊ − P₋.
    pub leakage: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Populations {
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub p_s: Vec<f64>,
}

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "p_plus", "p_minus", "p_s", "leakage", "norm"];

impl Trajectory {
    pub(crate) fn assemble(times: Vec<f64>, states: TrajectoryStates, norms: Vec<f64>, p_plus: Vec<f64>, p_minus: Vec<f64>, diagnostics: Diagnostics) -> Self {
        let leakage = p_plus.iter().zip(&p_minus).map(|(a, b)| 1.0 - a - b).collect();
        Self { times, states, norms, p_plus, p_minus, leakage, diagnostics }
    }

    pub fn p_s(&self) -> Vec<f64> {
        self.p_plus.iter().zip(&self.p_minus).map(|(a, b)| a + b).collect()
    }

    pub fn final_p_minus(&self) -> f64 {
        *self.p_minus.last().expect("non-empty trajectory")
    }

    /// Writes t, p_plus, p_minus, p_s, leakage, norm, plus the renormalized
    /// populations when `renormalized` is given.
    pub fn write_csv<W: Write>(&self, out: W, renormalized: Option<(&[f64], &[f64])>) -> Result<()> {
        let mut header = TRAJECTORY_HEADER.to_vec();
        if let Some((a, b)) = renormalized {
            if a.len() != self.times.len() || b.len() != self.times.len() {
                return Err(Error::DimensionMismatch { expected: self.times.len(), got: a.len().min(b.len()) });
            }
            header.extend(["p_plus_r", "p_minus_r"]);
        }
        let rows = (0..self.times.len()).map(|k| {
            let mut r = vec![
                num(self.times[k]),
                num(self.p_plus[k]),
                num(self.p_minus[k]),
                num(self.p_plus[k] + self.p_minus[k]),
                num(self.leakage[k]),
                num(self.norms[k]),
            ];
            if let Some((a, b)) = renormalized {
                r.push(num(a[k]));
                r.push(num(b[k]));
            }
            r
        });
        write_table(out, &[], &header, rows)
    }
}

/// Cat-state populations recomputed from the stored states.
pub fn populations(traj: &Trajectory, basis: &CatBasis) -> Result<Populations> {
    let (mut p_plus, mut p_minus) = (Vec::new(), Vec::new());
    match &traj.states {
        TrajectoryStates::TwoLevel(v) => {
            for s in v {
                p_minus.push(s[0].norm_sqr());
                p_plus.push(s[1].norm_sqr());
            }
        }
        TrajectoryStates::Fock(v) => {
            for s in v {
                let [m, p] = basis.project(s)?;
                p_minus.push(m.norm_sqr());
                p_plus.push(p.norm_sqr());
            }
        }
        TrajectoryStates::Density(v) => {
            for rho in v {
                let (pp, pm) = density_populations(rho, basis)?;
                p_plus.push(pp);
                p_minus.push(pm);
            }
        }
    }
    let p_s = p_plus.iter().zip(&p_minus).map(|(a, b)| a + b).collect();
    Ok(Populations { p_plus, p_minus, p_s })
}

/// (⟨C₊|ρ|C₊⟩, ⟨C₋|ρ|C₋⟩); 2×2 matrices are read in the (|C₋⟩, |C₊⟩) basis.
pub(crate) fn density_populations(rho: &DMatrix<C64>, basis: &CatBasis) -> Result<(f64, f64)> {
    if rho.nrows() == 2 {
        return Ok((rho[(1, 1)].re, rho[(0, 0)].re));
    }
    if rho.nrows() != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, got: rho.nrows() });
    }
    let expect = |v: &FockState| {
        let a = v.amplitudes();
        (a.adjoint() * rho * a)[(0, 0)].re
    };
    Ok((expect(&basis.c_plus), expect(&basis.c_minus)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::cat_basis;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 11, 1e-10).is_ok());
        assert!(TimeGrid::new(1.0, 1.0, 11, 1e-10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 11, 1e-5).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 11, 1e-15).is_err());
        let g = TimeGrid::new(0.0, 5.0, 3, 1e-10).unwrap();
        assert_eq!(g.times(), vec![0.0, 2.5, 5.0]);
    }

    #[test]
    fn populations_of_simple_states() {
        let b = cat_basis(40, C64::new(2.0, 0.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let states = vec![b.c_plus.clone(), b.embed([C64::new(h, 0.0), C64::new(h, 0.0)])];
        let traj = Trajectory::assemble(vec![0.0, 1.0], TrajectoryStates::Fock(states), vec![1.0; 2], vec![0.0; 2], vec![0.0; 2], Diagnostics::default());
        let p = populations(&traj, &b).unwrap();
        assert!((p.p_plus[0] - 1.0).abs() < 1e-12 && p.p_minus[0].abs() < 1e-12 && (p.p_s[0] - 1.0).abs() < 1e-12);
        assert!((p.p_plus[1] - 0.5).abs() < 1e-12 && (p.p_minus[1] - 0.5).abs() < 1e-12);

        let small = cat_basis(20, C64::new(2.0, 0.0)).unwrap();
        assert!(matches!(populations(&traj, &small), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn csv_columns() {
        let traj = Trajectory::assemble(
            vec![0.0, 1.0],
            TrajectoryStates::TwoLevel(vec![[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]; 2]),
            vec![1.0; 2],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            Diagnostics::default(),
        );
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,p_plus,p_minus,p_s,leakage,norm");
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, Some((&[1.0, 0.0], &[0.0, 1.0]))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,p_plus,p_minus,p_s,leakage,norm,p_plus_r,p_minus_r");
    }
}
