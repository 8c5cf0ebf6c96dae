//! Shared run orchestration: design, calibrate, perturb and propagate one
//! protocol under a chosen model, and evaluate grids of such runs in
//! parallel with results gathered by index.

use std::io::Write;

use rayon::prelude::*;

use crate::dynamics::{propagate_effective, propagate_full_with, FullModel, TimeGrid, Trajectory, DEFAULT_OUTPUT_POINTS, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fockspace::{cat_basis, CatBasis, C64};
use crate::openquantum::{effective_lindblad_propagate, lindblad_propagate_with, ChannelMode, DensityMatrix, LindbladOptions, NoiseParams};
use crate::output::{num, write_table};
use crate::pulsecraft::{calibrate_physical, design, CalibrationMode, ProtocolSpec, PulseSchedule};
use crate::robustness::{apply_error, ErrorModel};

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "KERRCAT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Effective,
    Full,
    LindbladFull,
    LindbladEffective,
}

impl Model {
    pub fn is_dissipative(self) -> bool {
        matches!(self, Self::LindbladFull | Self::LindbladEffective)
    }

    fn needs_calibration(self) -> bool {
        matches!(self, Self::Full | Self::LindbladFull)
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "effective" => Ok(Self::Effective),
            "full" => Ok(Self::Full),
            "lindblad-full" => Ok(Self::LindbladFull),
            "lindblad-effective" => Ok(Self::LindbladEffective),
            other => Err(Error::param("model", format!("expected effective, full, lindblad-full or lindblad-effective, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Effective => "effective",
            Self::Full => "full",
            Self::LindbladFull => "lindblad-full",
            Self::LindbladEffective => "lindblad-effective",
        })
    }
}

/// Everything besides the protocol that determines a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub model: Model,
    /// Truncation for closed full-space runs.
    pub dim: usize,
    /// Truncation for full-space master-equation runs.
    pub lindblad_dim: usize,
    pub kerr: f64,
    pub calibration: CalibrationMode,
    pub tolerance: f64,
    pub output_points: usize,
    pub noise: NoiseParams,
    pub channel: ChannelMode,
    /// Keep the control drive in the master-equation commutator.
    pub include_drive: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            model: Model::Effective,
            dim: 60,
            lindblad_dim: 40,
            kerr: 1.0,
            calibration: CalibrationMode::ExactProjection,
            tolerance: DEFAULT_TOLERANCE,
            output_points: DEFAULT_OUTPUT_POINTS,
            noise: NoiseParams::default(),
            channel: ChannelMode::FullChannel,
            include_drive: true,
        }
    }
}

impl RunSettings {
    pub fn with_model(model: Model) -> Self {
        Self { model, ..Self::default() }
    }

    /// Two-photon pump that places the Kerr ground states at ±α.
    pub fn pump(&self, alpha: C64) -> f64 {
        self.kerr * alpha.norm_sqr()
    }

    /// Fock truncation used by the selected model, if it has one.
    pub fn active_dim(&self) -> Option<usize> {
        match self.model {
            Model::Full => Some(self.dim),
            Model::LindbladFull => Some(self.lindblad_dim),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kerr > 0.0) || !self.kerr.is_finite() {
            return Err(Error::param("K", format!("must be positive, got {}", self.kerr)));
        }
        self.noise.validate()?;
        if !self.model.is_dissipative() && !self.noise.is_zero() {
            return Err(Error::param("model", format!("noise requires a lindblad model, got {}", self.model)));
        }
        TimeGrid::new(0.0, 1.0, self.output_points, self.tolerance)?;
        Ok(())
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("model".to_string(), self.model.to_string()),
            ("K".to_string(), num(self.kerr)),
            ("tolerance".to_string(), num(self.tolerance)),
            ("output_points".to_string(), self.output_points.to_string()),
        ];
        if let Some(d) = self.active_dim() {
            m.push(("dim".to_string(), d.to_string()));
            m.push(("calibration".to_string(), self.calibration.to_string()));
        }
        if self.model.is_dissipative() {
            m.push(("kappa".to_string(), num(self.noise.kappa)));
            m.push(("kappa_phi".to_string(), num(self.noise.kappa_phi)));
            if self.model == Model::LindbladEffective {
                m.push(("channel".to_string(), self.channel.to_string()));
            } else {
                m.push(("include_drive".to_string(), self.include_drive.to_string()));
            }
        }
        m
    }
}

/// A designed (and, where the model needs it, calibrated) nominal schedule.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub schedule: PulseSchedule,
    basis: Option<CatBasis>,
    model: Option<FullModel>,
    settings: RunSettings,
}

impl Prepared {
    pub fn new(spec: &ProtocolSpec, settings: &RunSettings) -> Result<Self> {
        settings.validate()?;
        let schedule = design(spec)?;
        Self::from_schedule(schedule, settings)
    }

    /// Wraps an already designed schedule, calibrating it against this run's
    /// truncation when the model needs physical drives.
    pub fn from_schedule(schedule: PulseSchedule, settings: &RunSettings) -> Result<Self> {
        settings.validate()?;
        let alpha = schedule.spec.alpha;
        let (schedule, basis, model) = match settings.active_dim() {
            Some(dim) => {
                let basis = cat_basis(dim, alpha)?;
                let schedule = calibrate_physical(&schedule, &basis, settings.calibration)?;
                let model = FullModel::for_basis(&basis, settings.kerr, settings.pump(alpha))?;
                (schedule, Some(basis), Some(model))
            }
            None => (schedule, None, None),
        };
        debug_assert!(!settings.model.needs_calibration() || schedule.drives.is_some());
        Ok(Self { schedule, basis, model, settings: *settings })
    }

    pub fn settings(&self) -> &RunSettings {
        &self.settings
    }

    pub fn basis(&self) -> Option<&CatBasis> {
        self.basis.as_ref()
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.schedule.t_f(), self.settings.output_points, self.settings.tolerance)
    }

    /// Propagates |C₊⟩ under the perturbed schedule.
    pub fn run(&self, err: ErrorModel) -> Result<Trajectory> {
        let schedule = apply_error(&self.schedule, err);
        let grid = self.grid()?;
        let s = &self.settings;
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match s.model {
            Model::Effective => propagate_effective(&schedule, [zero, one], grid),
            Model::Full => {
                let (basis, model) = self.full_parts();
                propagate_full_with(model, &schedule, basis, &basis.c_plus, grid)
            }
            Model::LindbladFull => {
                let (basis, model) = self.full_parts();
                let rho0 = DensityMatrix::pure(&basis.c_plus)?;
                lindblad_propagate_with(model, &schedule, basis, s.noise, &rho0, grid, LindbladOptions { include_drive: s.include_drive })
            }
            Model::LindbladEffective => {
                let rho0 = DensityMatrix::two_level([zero, one])?;
                effective_lindblad_propagate(&schedule, schedule.spec.alpha, s.noise, &rho0, grid, s.channel)
            }
        }
    }

    fn full_parts(&self) -> (&CatBasis, &FullModel) {
        (self.basis.as_ref().expect("full models carry a basis"), self.model.as_ref().expect("full models carry a model"))
    }
}

/// Design, calibrate and propagate a single protocol from |C₊⟩.
pub fn simulate(spec: &ProtocolSpec, err: ErrorModel, settings: &RunSettings) -> Result<Trajectory> {
    Prepared::new(spec, settings)?.run(err)
}

/// Worker count: available cores, capped by `KERRCAT_THREADS` when set.
pub fn worker_count() -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n.min(cores),
            _ => {
                log::warn!("ignoring {THREADS_ENV}={v:?}: expected a positive integer");
                cores
            }
        },
        Err(_) => cores,
    }
}

/// Maps `f` over `items` on a bounded pool; output order follows input order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("falling back to serial evaluation: {e}");
            items.iter().map(f).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &'static str, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param(name, "sweep axis must not be empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(name, format!("non-finite axis value {v}")));
        }
        Ok(Self { name: name.to_string(), values: values.to_vec() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellFailure {
    pub index: usize,
    pub message: String,
}

/// Terminal P₋ on a one- or two-axis grid, row-major with `axis1` outermost.
/// Failed cells hold NaN and are listed in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub p_minus: Vec<f64>,
    pub failures: Vec<CellFailure>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub(crate) fn evaluate<F>(axis1: Axis, axis2: Option<Axis>, metadata: Vec<(String, String)>, cell: F) -> Self
    where
        F: Fn(f64, Option<f64>) -> Result<f64> + Sync + Send,
    {
        let n2 = axis2.as_ref().map_or(1, |a| a.values.len());
        let mut cells: Vec<(f64, Option<f64>)> = Vec::with_capacity(axis1.values.len() * n2);
        for &a in &axis1.values {
            for j in 0..n2 {
                cells.push((a, axis2.as_ref().map(|ax| ax.values[j])));
            }
        }
        let results = par_map(&cells, |&(a, b)| cell(a, b));
        let mut p_minus = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for (index, r) in results.into_iter().enumerate() {
            match r {
                Ok(p) => p_minus.push(p),
                Err(e) => {
                    log::warn!("sweep cell {index} failed: {e}");
                    failures.push(CellFailure { index, message: e.to_string() });
                    p_minus.push(f64::NAN);
                }
            }
        }
        Self { axis1, axis2, p_minus, failures, metadata }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.values.len(), self.axis2.as_ref().map_or(1, |a| a.values.len()))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p_minus[i * self.shape().1 + j]
    }

    /// Long-format CSV: one row per cell, metadata and failures as `#` lines.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut comments: Vec<String> = self.metadata.iter().map(|(k, v)| format!("{k}={v}")).collect();
        comments.extend(self.failures.iter().map(|f| format!("failed cell {}: {}", f.index, f.message)));
        let mut header = vec![self.axis1.name.as_str()];
        if let Some(a) = &self.axis2 {
            header.push(a.name.as_str());
        }
        header.push("p_minus");
        let (_, n2) = self.shape();
        let rows = (0..self.p_minus.len()).map(|k| {
            let mut row = vec![num(self.axis1.values[k / n2])];
            if let Some(a) = &self.axis2 {
                row.push(num(a.values[k % n2]));
            }
            row.push(num(self.p_minus[k]));
            row
        });
        write_table(out, &comments, &header, rows)
    }
}

pub(crate) fn spec_metadata(spec: &ProtocolSpec) -> Vec<(String, String)> {
    let mut m = vec![("protocol".to_string(), spec.kind.to_string())];
    if spec.kind == crate::pulsecraft::ProtocolKind::Optimal {
        m.push(("n".to_string(), spec.n.to_string()));
    }
    m.push(("t_f".to_string(), num(spec.t_f)));
    m.push(("samples".to_string(), spec.samples.to_string()));
    m.push(("alpha_re".to_string(), num(spec.alpha.re)));
    m.push(("alpha_im".to_string(), num(spec.alpha.im)));
    m
}

pub(crate) fn sweep_metadata(spec: &ProtocolSpec, settings: &RunSettings, skip: &[&str]) -> Vec<(String, String)> {
    let mut m = spec_metadata(spec);
    m.extend(settings.metadata());
    m.retain(|(k, _)| !skip.contains(&k.as_str()));
    m
}
