//! Command-line front end: configuration, subcommands and figure presets.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad config, flags or
//! arguments, unwritable output), 2 when a computation fails numerically.

mod config;
mod presets;

pub use config::{parse_config, ConfigSource, RunConfig, SweepKind, KEYS};
pub use presets::{run_figure_preset, FigureId, BENCH_K_MHZ};

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::error::{Error, Result};
use crate::fockspace::kerr_spectrum;
use crate::openquantum::{decoherence_sweep, renormalized_populations};
use crate::output::{num, write_table};
use crate::pulsecraft::{calibrate_physical, design};
use crate::fockspace::cat_basis;
use crate::robustness::robustness_sweep;
use crate::sweep::simulate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

fn command() -> Command {
    let mut cmd = Command::new("kerrcat")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Shortcut-to-adiabaticity pulses for Kerr-cat qubits")
        .subcommand_required(true)
        .arg(Arg::new("config").long("config").short('c').value_name("FILE").global(true).help("key = value configuration file"))
        .subcommand(Command::new("design").about("Emit the control schedule as CSV"))
        .subcommand(Command::new("evolve").about("Propagate |C+> and emit the trajectory as CSV"))
        .subcommand(Command::new("sweep").about("Robustness (mu, nu) or decoherence (t_f, kappa) grid"))
        .subcommand(Command::new("spectrum").about("Eigenvalues of the Kerr Hamiltonian"))
        .subcommand(
            Command::new("figure")
                .about("Reproduce a figure's data set into the output directory")
                .arg(Arg::new("id").required(true).value_parser(FigureId::ALL.map(|f| f.name()))),
        );
    for (key, help) in KEYS {
        cmd = cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").global(true).allow_hyphen_values(true).action(ArgAction::Set).help(*help));
    }
    cmd
}

fn load(matches: &ArgMatches) -> Result<RunConfig> {
    let mut src = match matches.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config { location: path.clone(), reason: e.to_string() })?;
            ConfigSource::parse(&text)?
        }
        None => ConfigSource::default(),
    };
    for (key, _) in KEYS {
        if let Some(v) = matches.get_one::<String>(key) {
            src.set_flag(key, v)?;
        }
    }
    src.build()
}

fn with_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            body(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_design(c: &RunConfig) -> Result<()> {
    let dim = c.settings.active_dim().unwrap_or(c.settings.dim);
    let schedule = calibrate_physical(&design(&c.spec)?, &cat_basis(dim, c.spec.alpha)?, c.settings.calibration)?;
    with_output(c.output.as_deref(), |w| schedule.write_csv(w))
}

fn cmd_evolve(c: &RunConfig) -> Result<()> {
    let tr = simulate(&c.spec, c.error, &c.settings)?;
    if c.renormalize {
        let (rp, rm) = renormalized_populations(&tr)?;
        with_output(c.output.as_deref(), |w| tr.write_csv(w, Some((&rp, &rm))))
    } else {
        with_output(c.output.as_deref(), |w| tr.write_csv(w, None))
    }
}

fn cmd_sweep(c: &RunConfig) -> Result<()> {
    let r = match c.sweep {
        SweepKind::Robustness => robustness_sweep(&c.spec, &c.mu_values, &c.nu_values, &c.settings)?,
        SweepKind::Decoherence => decoherence_sweep(&c.spec, &c.t_f_values, &c.kappa_values, c.settings.noise, &c.settings)?,
    };
    with_output(c.output.as_deref(), |w| r.write_csv(w))?;
    if r.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Consistency(format!("{} of {} sweep cells failed", r.failures.len(), r.p_minus.len())))
    }
}

fn cmd_spectrum(c: &RunConfig) -> Result<()> {
    let pump = c.settings.pump(c.spec.alpha);
    let s = kerr_spectrum(c.settings.dim, c.settings.kerr, pump)?;
    let comments = vec![
        format!("dim={}", c.settings.dim),
        format!("K={}", num(c.settings.kerr)),
        format!("P={}", num(pump)),
        format!("gap={}", num(s.gap)),
        format!("converged={}", s.converged),
    ];
    let rows = s.eigenvalues.iter().enumerate().map(|(k, e)| vec![k.to_string(), num(*e)]);
    with_output(c.output.as_deref(), |w| write_table(w, &comments, &["level", "energy"], rows))
}

fn cmd_figure(c: &RunConfig, id: &str) -> Result<()> {
    let id: FigureId = id.parse()?;
    let dir = c.output.clone().unwrap_or_else(|| PathBuf::from("."));
    for path in run_figure_preset(id, c, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = load(&matches).and_then(|c| match matches.subcommand() {
        Some(("design", _)) => cmd_design(&c),
        Some(("evolve", _)) => cmd_evolve(&c),
        Some(("sweep", _)) => cmd_sweep(&c),
        Some(("spectrum", _)) => cmd_spectrum(&c),
        Some(("figure", sub)) => cmd_figure(&c, sub.get_one::<String>("id").expect("required argument")),
        _ => unreachable!("subcommand_required"),
    });
    match result {
        Ok(()) => EXIT_OK,
        // downstream consumer (e.g. `head`) closed the pipe; nothing left to report
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("kerrcat: {e}");
            exit_code(&e)
        }
    }
}
