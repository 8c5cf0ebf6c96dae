use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::fockspace::cat_basis;
use crate::openquantum::{decoherence_sweep, renormalized_populations, NoiseParams};
use crate::output::{num, write_table};
use crate::pulsecraft::{calibrate_physical, design, ProtocolSpec};
use crate::robustness::{robustness_sweep, ErrorModel};
use crate::sweep::{simulate, Model, RunSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
    Bench9,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [Self::Fig2, Self::Fig3, Self::Fig4, Self::Fig6, Self::Fig7, Self::Fig8, Self::Bench9];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::Bench9 => "bench9",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param("figure", format!("unknown preset {s:?}; expected one of fig2, fig3, fig4, fig6, fig7, fig8, bench9")))
    }
}

/// Default K for the benchmark report: 2π × 6.7 MHz.
pub const BENCH_K_MHZ: f64 = 2.0 * std::f64::consts::PI * 6.7;

/// Numerical settings a preset inherits from the user config; the physics
/// (protocol, model, noise, errors) is fixed by the preset.
fn numerics(config: &RunConfig, model: Model) -> RunSettings {
    RunSettings { model, noise: NoiseParams::default(), ..config.settings }
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn file(&mut self, name: &str, body: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        body(BufWriter::new(File::create(&path)?))?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs a preset and writes its CSV files into `dir`; returns the paths written.
pub fn run_figure_preset(id: FigureId, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut w = Writer { dir, written: Vec::new() };
    let stage = |what: &str| {
        let what = what.to_owned();
        move |e: Error| stage_error(id, &what, e)
    };
    match id {
        FigureId::Fig2 => schedule_and_populations(&mut w, config, ProtocolSpec::base(5.0), "fig2").map_err(stage("base protocol"))?,
        FigureId::Fig4 => {
            for n in [1, 2, 5] {
                schedule_and_populations(&mut w, config, ProtocolSpec::optimal(n, 5.0), &format!("fig4_n{n}")).map_err(stage(&format!("n={n}")))?;
            }
        }
        FigureId::Fig3 => {
            let settings = numerics(config, Model::Effective);
            let protocols = [("base", ProtocolSpec::base(5.0)), ("n1", ProtocolSpec::optimal(1, 5.0)), ("n2", ProtocolSpec::optimal(2, 5.0)), ("n5", ProtocolSpec::optimal(5, 5.0))];
            let mus = RunConfig::default().mu_values;
            for (label, spec) in protocols {
                let r = robustness_sweep(&spec, &mus, &[0.0], &settings).map_err(stage(label))?;
                w.file(&format!("fig3_{label}.csv"), |f| r.write_csv(f))?;
            }
        }
        FigureId::Fig6 => {
            let grid = super::config::parse_axis("-0.2:0.2:0.04").expect("literal axis");
            let r = robustness_sweep(&ProtocolSpec::optimal(1, 5.0), &grid, &grid, &numerics(config, Model::Full)).map_err(stage("mu-nu grid"))?;
            w.file("fig6.csv", |f| r.write_csv(f))?;
        }
        FigureId::Fig7 => {
            let spec = ProtocolSpec::optimal(1, 5.0);
            for (label, noise) in [("loss", NoiseParams::new(0.01, 0.0)?), ("dephasing", NoiseParams::new(0.0, 0.01)?)] {
                let settings = RunSettings { noise, ..numerics(config, Model::LindbladFull) };
                let tr = simulate(&spec, ErrorModel::NONE, &settings).map_err(stage(label))?;
                let (rp, rm) = renormalized_populations(&tr).map_err(stage(label))?;
                w.file(&format!("fig7_{label}.csv"), |f| tr.write_csv(f, Some((&rp, &rm))))?;
            }
        }
        FigureId::Fig8 => {
            let d = RunConfig::default();
            let spec = ProtocolSpec::optimal(1, 5.0);
            let r = decoherence_sweep(&spec, &d.t_f_values, &d.kappa_values, NoiseParams::default(), &numerics(config, Model::LindbladFull))
                .map_err(stage("t_f-kappa grid"))?;
            w.file("fig8.csv", |f| r.write_csv(f))?;
        }
        FigureId::Bench9 => bench9(&mut w, config).map_err(stage("benchmark"))?,
    }
    Ok(w.written)
}

fn stage_error(id: FigureId, what: &str, e: Error) -> Error {
    log::error!("preset {} failed at {what}: {e}", id.name());
    e
}

fn schedule_and_populations(w: &mut Writer<'_>, config: &RunConfig, spec: ProtocolSpec, stem: &str) -> Result<()> {
    let settings = numerics(config, Model::Full);
    let basis = cat_basis(settings.dim, spec.alpha)?;
    let schedule = calibrate_physical(&design(&spec)?, &basis, settings.calibration)?;
    w.file(&format!("{stem}_schedule.csv"), |f| schedule.write_csv(f))?;
    let tr = simulate(&spec, ErrorModel::NONE, &settings)?;
    w.file(&format!("{stem}_populations.csv"), |f| tr.write_csv(f, None))
}

fn bench9(w: &mut Writer<'_>, config: &RunConfig) -> Result<()> {
    let k_mhz = config.k_mhz.unwrap_or(BENCH_K_MHZ);
    // quoted device rates: κ/2π = 0.01 MHz, κ^φ/2π = 0.045 MHz
    let two_pi = 2.0 * std::f64::consts::PI;
    let noise = NoiseParams::new(two_pi * 0.01 / k_mhz, two_pi * 0.045 / k_mhz)?;
    let err = ErrorModel::new(0.1, 0.1)?;
    let spec = ProtocolSpec::optimal(1, 1.1);
    let settings = RunSettings { noise, ..numerics(config, Model::LindbladFull) };
    let tr = simulate(&spec, err, &settings)?;
    let (_, rm) = renormalized_populations(&tr)?;
    let t_f_ns = spec.t_f / k_mhz * 1e3;
    let header = ["k_mhz", "t_f", "t_f_ns", "kappa", "kappa_phi", "mu", "nu", "p_minus", "p_minus_r"];
    let row = vec![
        num(k_mhz),
        num(spec.t_f),
        num(t_f_ns),
        num(noise.kappa),
        num(noise.kappa_phi),
        num(err.mu()),
        num(err.nu()),
        num(tr.final_p_minus()),
        num(*rm.last().expect("nonempty trajectory")),
    ];
    let comments = vec![format!("lindblad_dim={}", settings.lindblad_dim), format!("tolerance={}", num(settings.tolerance))];
    w.file("bench9.csv", |f| write_table(f, &comments, &header, std::iter::once(row)))
}
