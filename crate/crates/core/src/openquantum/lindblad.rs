use nalgebra::{DMatrix, Matrix2};

use super::density::{DensityMatrix, NoiseParams};
use crate::dynamics::{density_populations, warn_if_outside_regime, Diagnostics, FullModel, TimeGrid, Trajectory, TrajectoryStates};
use crate::error::{Error, Result};
use crate::fockspace::{CatBasis, C64};
use crate::integrate::{integrate, StepControl};
use crate::pulsecraft::{PulseSchedule, ScheduleInterpolant};

const TRACE_FAILURE: f64 = 1e-6;
const NEGATIVITY_FAILURE: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LindbladOptions {
    /// Include the control drive in the commutator. With `false` only the
    /// bare Kerr Hamiltonian generates coherent evolution.
    pub include_drive: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { include_drive: true }
    }
}

/// Which dissipators the cat-subspace master equation keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelMode {
    /// Projected loss and dephasing with their tanh|α|² corrections.
    FullChannel,
    /// Single-photon loss as a pure bit flip; dephasing drops out.
    BitflipOnly,
}

impl std::str::FromStr for ChannelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-channel" => Ok(Self::FullChannel),
            "bitflip-only" => Ok(Self::BitflipOnly),
            other => Err(Error::param("channel", format!("expected full-channel or bitflip-only, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::FullChannel => "full-channel",
            Self::BitflipOnly => "bitflip-only",
        })
    }
}

/// Elementwise master-equation right-hand side for a pentadiagonal real H.
///
/// With ρ stored row-major:
///   (aρa†)ᵢⱼ = √((i+1)(j+1)) ρᵢ₊₁,ⱼ₊₁,  ½{a†a, ρ}ᵢⱼ = ½(i+j) ρᵢⱼ,
///   D[a†a]ρᵢⱼ = −½(i−j)² ρᵢⱼ.
fn full_rhs(model: &FullModel, e_j: f64, eps: f64, noise: &NoiseParams, rho: &[C64], out: &mut [C64]) {
    let d = model.dim;
    let h = |n: usize| model.kerr_diag[n] - e_j * model.m_diag[n];
    let at = |i: usize, j: usize| rho[i * d + j];
    for i in 0..d {
        let hi = h(i);
        for j in 0..d {
            // [H, ρ]ᵢⱼ
            let mut c = at(i, j) * (hi - h(j));
            if i >= 1 {
                c += at(i - 1, j) * (eps * model.hop1[i - 1]);
            }
            if i + 1 < d {
                c += at(i + 1, j) * (eps * model.hop1[i]);
            }
            if i >= 2 {
                c += at(i - 2, j) * model.hop2[i - 2];
            }
            if i + 2 < d {
                c += at(i + 2, j) * model.hop2[i];
            }
            if j >= 1 {
                c -= at(i, j - 1) * (eps * model.hop1[j - 1]);
            }
            if j + 1 < d {
                c -= at(i, j + 1) * (eps * model.hop1[j]);
            }
            if j >= 2 {
                c -= at(i, j - 2) * model.hop2[j - 2];
            }
            if j + 2 < d {
                c -= at(i, j + 2) * model.hop2[j];
            }
            let mut v = C64::new(c.im, -c.re);
            let r = at(i, j);
            if noise.kappa > 0.0 {
                let mut jump = -r * (0.5 * (i + j) as f64);
                if i + 1 < d && j + 1 < d {
                    jump += at(i + 1, j + 1) * (((i + 1) * (j + 1)) as f64).sqrt();
                }
                v += jump * noise.kappa;
            }
            if noise.kappa_phi > 0.0 {
                let dn = i as f64 - j as f64;
                v -= r * (0.5 * noise.kappa_phi * dn * dn);
            }
            out[i * d + j] = v;
        }
    }
}

struct Recorder<'a> {
    basis: Option<&'a CatBasis>,
    states: Vec<DMatrix<C64>>,
    norms: Vec<f64>,
    p_plus: Vec<f64>,
    p_minus: Vec<f64>,
    diag: Diagnostics,
}

impl<'a> Recorder<'a> {
    fn new(basis: Option<&'a CatBasis>) -> Self {
        let diag = Diagnostics { min_eigenvalue: f64::INFINITY, ..Diagnostics::default() };
        Self { basis, states: vec![], norms: vec![], p_plus: vec![], p_minus: vec![], diag }
    }

    fn record(&mut self, t: f64, flat: &[C64], dim: usize) -> Result<()> {
        let m = DMatrix::from_row_slice(dim, dim, flat);
        let rho = DensityMatrix::unchecked(m);
        let tr = rho.trace();
        let d = &mut self.diag;
        d.norm_drift = d.norm_drift.max((tr - 1.0).abs());
        d.hermiticity_drift = d.hermiticity_drift.max(rho.hermiticity_error());
        d.min_eigenvalue = d.min_eigenvalue.min(rho.min_eigenvalue());
        if d.norm_drift > TRACE_FAILURE {
            return Err(Error::Integrator { t, reason: format!("trace drift {:e}", d.norm_drift) });
        }
        if d.min_eigenvalue < NEGATIVITY_FAILURE {
            return Err(Error::Integrator { t, reason: format!("negative eigenvalue {:e}", d.min_eigenvalue) });
        }
        let m = rho.into_matrix();
        let (pp, pm) = match self.basis {
            Some(b) => density_populations(&m, b)?,
            None => (m[(1, 1)].re, m[(0, 0)].re),
        };
        self.p_plus.push(pp);
        self.p_minus.push(pm);
        self.norms.push(tr);
        self.states.push(m);
        Ok(())
    }

    fn finish(self, times: Vec<f64>, steps: usize) -> Trajectory {
        let mut diag = self.diag;
        diag.steps = steps;
        Trajectory::assemble(times, TrajectoryStates::Density(self.states), self.norms, self.p_plus, self.p_minus, diag)
    }
}

/// Full Fock-space master equation with the driven Hamiltonian.
pub fn lindblad_propagate(
    schedule: &PulseSchedule,
    basis: &CatBasis,
    kerr: f64,
    pump: f64,
    noise: NoiseParams,
    rho0: &DensityMatrix,
    grid: TimeGrid,
) -> Result<Trajectory> {
    let model = FullModel::for_basis(basis, kerr, pump)?;
    lindblad_propagate_with(&model, schedule, basis, noise, rho0, grid, LindbladOptions::default())
}

pub fn lindblad_propagate_with(
    model: &FullModel,
    schedule: &PulseSchedule,
    basis: &CatBasis,
    noise: NoiseParams,
    rho0: &DensityMatrix,
    grid: TimeGrid,
    options: LindbladOptions,
) -> Result<Trajectory> {
    noise.validate()?;
    let d = model.dim;
    if rho0.dim() != d || basis.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho0.dim().max(basis.dim) });
    }
    let ip = schedule.interpolant()?;
    grid.check_within(ip.t_f())?;
    if options.include_drive {
        warn_if_outside_regime(model, schedule)?;
    }
    let drive = |t: f64| if options.include_drive { ip.drives(t) } else { Ok((0.0, 0.0)) };
    drive(grid.t0)?;

    let y0: Vec<C64> = rho0.matrix().transpose().as_slice().to_vec();
    let times = grid.times();
    let mut rec = Recorder::new(Some(basis));
    let stats = integrate(
        |t, y, dy| {
            let (e_j, eps) = drive(t).expect("drive availability checked above");
            full_rhs(model, e_j, eps, &noise, y, dy);
        },
        grid.t0,
        &y0,
        &times,
        StepControl::with_rtol(grid.tolerance),
        |_, t, y| rec.record(t, y, d),
    )?;
    Ok(rec.finish(times, stats.accepted))
}

fn pauli() -> (Matrix2<C64>, Matrix2<C64>, Matrix2<C64>) {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    // (|C₋⟩, |C₊⟩) ordering of the cat-basis Pauli matrices
    (Matrix2::new(o, l, l, o), Matrix2::new(o, i, -i, o), Matrix2::new(-l, o, o, l))
}

/// Jump operators (already scaled by √rate) of the cat-subspace channel.
pub fn effective_jump_operators(alpha: C64, noise: NoiseParams, mode: ChannelMode) -> Vec<Matrix2<C64>> {
    let r2 = alpha.norm_sqr();
    let (sx, sy, sz) = pauli();
    let mut ops = Vec::new();
    match mode {
        ChannelMode::BitflipOnly => {
            if noise.kappa > 0.0 {
                ops.push(sx * C64::new((noise.kappa * r2).sqrt(), 0.0));
            }
        }
        ChannelMode::FullChannel => {
            let a = r2.tanh();
            if noise.kappa > 0.0 {
                let l = sx * C64::new((a + 1.0 / a) / 2.0, 0.0) + sy * C64::new((a - 1.0 / a) / 2.0, 0.0);
                ops.push(l * C64::new((noise.kappa * r2).sqrt(), 0.0));
            }
            if noise.kappa_phi > 0.0 {
                let (a2, am2) = (a * a, 1.0 / (a * a));
                let l = Matrix2::identity() * C64::new((a2 + am2) / 2.0, 0.0) - sz * C64::new((a2 - am2) / 2.0, 0.0);
                ops.push(l * C64::new((noise.kappa_phi * r2 * r2).sqrt(), 0.0));
            }
        }
    }
    ops
}

fn effective_rhs(ip: &ScheduleInterpolant, jumps: &[(Matrix2<C64>, Matrix2<C64>)], t: f64, y: &[C64], dy: &mut [C64]) {
    let rho = Matrix2::new(y[0], y[1], y[2], y[3]);
    let (delta, re, im) = ip.controls(t);
    let h = crate::dynamics::effective_hamiltonian(delta, C64::new(re, im));
    let mut out = (h * rho - rho * h) * C64::new(0.0, -1.0);
    for (l, ldl) in jumps {
        out += l * rho * l.adjoint() - (ldl * rho + rho * ldl) * C64::new(0.5, 0.0);
    }
    dy.copy_from_slice(&[out[(0, 0)], out[(0, 1)], out[(1, 0)], out[(1, 1)]]);
}

/// Two-level master equation on (|C₋⟩, |C₊⟩) driven by the effective Hamiltonian.
pub fn effective_lindblad_propagate(
    schedule: &PulseSchedule,
    alpha: C64,
    noise: NoiseParams,
    rho0: &DensityMatrix,
    grid: TimeGrid,
    mode: ChannelMode,
) -> Result<Trajectory> {
    noise.validate()?;
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho0.dim() });
    }
    if mode == ChannelMode::FullChannel && alpha.norm_sqr() < 1e-8 {
        return Err(Error::param("alpha", "the projected channel diverges as alpha -> 0"));
    }
    let ip = schedule.interpolant()?;
    grid.check_within(ip.t_f())?;
    let jumps: Vec<_> = effective_jump_operators(alpha, noise, mode).into_iter().map(|l| (l, l.adjoint() * l)).collect();
    let y0: Vec<C64> = rho0.matrix().transpose().as_slice().to_vec();
    let times = grid.times();
    let mut rec = Recorder::new(None);
    let stats = integrate(
        |t, y, dy| effective_rhs(&ip, &jumps, t, y, dy),
        grid.t0,
        &y0,
        &times,
        StepControl::with_rtol(grid.tolerance),
        |_, t, y| rec.record(t, y, 2),
    )?;
    Ok(rec.finish(times, stats.accepted))
}

/// P_±^R = P_± / (P₊ + P₋).
pub fn renormalized_populations(traj: &Trajectory) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut plus = Vec::with_capacity(traj.times.len());
    let mut minus = Vec::with_capacity(traj.times.len());
    for k in 0..traj.times.len() {
        let ps = traj.p_plus[k] + traj.p_minus[k];
        if !(ps > 1e-12) {
            return Err(Error::Renormalization { t: traj.times[k], p_s: ps });
        }
        plus.push(traj.p_plus[k] / ps);
        minus.push(traj.p_minus[k] / ps);
    }
    Ok((plus, minus))
}
