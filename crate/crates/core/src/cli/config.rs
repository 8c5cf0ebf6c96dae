use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::openquantum::NoiseParams;
use crate::pulsecraft::{ProtocolKind, ProtocolSpec};
use crate::robustness::ErrorModel;
use crate::sweep::RunSettings;

/// Every accepted configuration key with a one-line description. Command-line
/// flags mirror these names (`--t_f 1.1` overrides `t_f = ...` in the file).
pub const KEYS: &[(&str, &str)] = &[
    ("kind", "protocol kind: base | optimal"),
    ("n", "optimal-protocol order (integer >= 1)"),
    ("t_f", "total evolution time in 1/K"),
    ("samples", "schedule grid points"),
    ("alpha", "cat amplitude (real part)"),
    ("alpha_im", "cat amplitude (imaginary part)"),
    ("dim", "Fock truncation for closed full-space runs"),
    ("lindblad_dim", "Fock truncation for master-equation runs"),
    ("kerr", "Kerr strength K (sets the unit of energy)"),
    ("calibration", "drive calibration: exact-projection | closed-form"),
    ("model", "effective | full | lindblad-full | lindblad-effective"),
    ("channel", "cat-subspace channel: full-channel | bitflip-only"),
    ("drive", "keep the control drive in the master equation (true | false)"),
    ("kappa", "single-photon loss rate in units of K"),
    ("kappa_phi", "pure dephasing rate in units of K"),
    ("mu", "fractional error on the single-photon drive"),
    ("nu", "fractional error on the Josephson drive"),
    ("output", "output file (directory for `figure`); stdout when absent"),
    ("output_points", "trajectory output points"),
    ("tolerance", "integrator relative tolerance"),
    ("renormalize", "add p_plus_r, p_minus_r to trajectory output (true | false)"),
    ("sweep", "sweep kind: robustness | decoherence"),
    ("mu_values", "mu axis: comma list or start:stop:step"),
    ("nu_values", "nu axis: comma list or start:stop:step"),
    ("t_f_values", "t_f axis for decoherence sweeps"),
    ("kappa_values", "kappa axis for decoherence sweeps"),
    ("k_mhz", "K in MHz (angular) for the physical-units benchmark report"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Robustness,
    Decoherence,
}

impl FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robustness" => Ok(Self::Robustness),
            "decoherence" => Ok(Self::Decoherence),
            other => Err(Error::param("sweep", format!("expected robustness or decoherence, got {other:?}"))),
        }
    }
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ProtocolSpec,
    pub settings: RunSettings,
    pub error: ErrorModel,
    pub output: Option<PathBuf>,
    pub renormalize: bool,
    pub sweep: SweepKind,
    pub mu_values: Vec<f64>,
    pub nu_values: Vec<f64>,
    pub t_f_values: Vec<f64>,
    pub kappa_values: Vec<f64>,
    pub k_mhz: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: ProtocolSpec::default(),
            settings: RunSettings::default(),
            error: ErrorModel::NONE,
            output: None,
            renormalize: false,
            sweep: SweepKind::Robustness,
            mu_values: decimal_range(-0.3, 0.3, 0.02),
            nu_values: vec![0.0],
            t_f_values: decimal_range(0.5, 5.1, 0.2),
            kappa_values: decimal_range(0.0, 0.02, 0.0025),
            k_mhz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Source {
    Line(usize),
    Flag(&'static str),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Line(l) => write!(f, "line {l}"),
            Source::Flag(k) => write!(f, "flag --{k}"),
        }
    }
}

/// Raw key/value pairs collected from a config document and command-line
/// flags; later sources override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    entries: BTreeMap<&'static str, (String, Source)>,
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().map(|(k, _)| *k).find(|k| *k == key)
}

impl ConfigSource {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut src = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let at = |reason: String| Error::Config { location: Source::Line(line).to_string(), reason };
            let (k, v) = content.split_once('=').ok_or_else(|| at(format!("expected `key = value`, got {content:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let key = known_key(k).ok_or_else(|| at(format!("unknown key {k:?}")))?;
            if v.is_empty() {
                return Err(at(format!("missing value for {key}")));
            }
            if let Some((_, prev)) = src.entries.get(key) {
                return Err(at(format!("duplicate key {key} (first set on {prev})")));
            }
            src.entries.insert(key, (v.to_string(), Source::Line(line)));
        }
        Ok(src)
    }

    /// Overrides one key from a command-line flag.
    pub fn set_flag(&mut self, key: &str, value: &str) -> Result<()> {
        let key = known_key(key).ok_or_else(|| Error::Config { location: format!("flag --{key}"), reason: "unknown key".into() })?;
        self.entries.insert(key, (value.trim().to_string(), Source::Flag(key)));
        Ok(())
    }

    pub fn build(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        let mut alpha = c.spec.alpha;
        let (mut kappa, mut kappa_phi) = (0.0, 0.0);
        let (mut mu, mut nu) = (0.0, 0.0);
        for (&key, (value, source)) in &self.entries {
            let wrap = |e: Error| Error::Config { location: source.to_string(), reason: format!("{key}: {}", strip(e)) };
            let v = value.as_str();
            match key {
                "kind" => c.spec.kind = v.parse::<ProtocolKind>().map_err(wrap)?,
                "n" => c.spec.n = parse_num(v).map_err(wrap)?,
                "t_f" => c.spec.t_f = parse_num(v).map_err(wrap)?,
                "samples" => c.spec.samples = parse_num(v).map_err(wrap)?,
                "alpha" => alpha.re = parse_num(v).map_err(wrap)?,
                "alpha_im" => alpha.im = parse_num(v).map_err(wrap)?,
                "dim" => c.settings.dim = parse_num(v).map_err(wrap)?,
                "lindblad_dim" => c.settings.lindblad_dim = parse_num(v).map_err(wrap)?,
                "kerr" => c.settings.kerr = parse_num(v).map_err(wrap)?,
                "calibration" => c.settings.calibration = v.parse().map_err(wrap)?,
                "model" => c.settings.model = v.parse().map_err(wrap)?,
                "channel" => c.settings.channel = v.parse().map_err(wrap)?,
                "drive" => c.settings.include_drive = parse_bool(v).map_err(wrap)?,
                "kappa" => kappa = parse_num(v).map_err(wrap)?,
                "kappa_phi" => kappa_phi = parse_num(v).map_err(wrap)?,
                "mu" => mu = parse_num(v).map_err(wrap)?,
                "nu" => nu = parse_num(v).map_err(wrap)?,
                "output" => c.output = Some(PathBuf::from(v)),
                "output_points" => c.settings.output_points = parse_num(v).map_err(wrap)?,
                "tolerance" => c.settings.tolerance = parse_num(v).map_err(wrap)?,
                "renormalize" => c.renormalize = parse_bool(v).map_err(wrap)?,
                "sweep" => c.sweep = v.parse().map_err(wrap)?,
                "mu_values" => c.mu_values = parse_axis(v).map_err(wrap)?,
                "nu_values" => c.nu_values = parse_axis(v).map_err(wrap)?,
                "t_f_values" => c.t_f_values = parse_axis(v).map_err(wrap)?,
                "kappa_values" => c.kappa_values = parse_axis(v).map_err(wrap)?,
                "k_mhz" => c.k_mhz = Some(parse_num(v).map_err(wrap)?),
                _ => unreachable!("key table and match arms out of sync: {key}"),
            }
        }
        c.spec.alpha = alpha;
        self.locate(|| NoiseParams::new(kappa, kappa_phi).map(|n| c.settings.noise = n))?;
        self.locate(|| ErrorModel::new(mu, nu).map(|e| c.error = e))?;
        self.locate(|| validate(&c))?;
        Ok(c)
    }

    /// Runs a check and attributes any parameter error to the line or flag
    /// that set the offending key.
    fn locate(&self, check: impl FnOnce() -> Result<()>) -> Result<()> {
        check().map_err(|e| {
            let key = match &e {
                Error::InvalidParameter { name, .. } => Some(*name),
                Error::InvalidDimension { .. } => Some("dim"),
                _ => None,
            };
            let key = key.map(|k| if k == "K" { "kerr" } else { k });
            let location = key.and_then(|k| self.entries.get(k)).map_or_else(|| "defaults".to_string(), |(_, s)| s.to_string());
            Error::Config { location, reason: strip(e) }
        })
    }
}

fn validate(c: &RunConfig) -> Result<()> {
    c.spec.validate()?;
    c.settings.validate()?;
    if c.spec.alpha.norm() < 0.5 {
        return Err(Error::param("alpha", format!("|alpha| = {} is too small for a cat qubit", c.spec.alpha.norm())));
    }
    let alpha2 = c.spec.alpha.norm_sqr();
    for (key, dim) in [("dim", c.settings.dim), ("lindblad_dim", c.settings.lindblad_dim)] {
        // the coherent components must fit comfortably inside the truncation
        if (dim as f64) < alpha2 + 6.0 * c.spec.alpha.norm() + 6.0 {
            return Err(Error::param(key, format!("truncation {dim} too small for |alpha|^2 = {alpha2}")));
        }
    }
    for &m in &c.mu_values {
        ErrorModel::new(m, 0.0).map_err(|_| Error::param("mu_values", format!("{m} outside [-1, 1]")))?;
    }
    for &n in &c.nu_values {
        ErrorModel::new(0.0, n).map_err(|_| Error::param("nu_values", format!("{n} outside [-1, 1]")))?;
    }
    for &t in &c.t_f_values {
        if !(t > 0.0) {
            return Err(Error::param("t_f_values", format!("{t} is not a positive time")));
        }
    }
    for &k in &c.kappa_values {
        if !(k >= 0.0) {
            return Err(Error::param("kappa_values", format!("{k} is negative")));
        }
    }
    if let Some(k) = c.k_mhz {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::param("k_mhz", format!("must be positive, got {k}")));
        }
    }
    Ok(())
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidParameter { reason, .. } => reason,
        Error::Config { reason, .. } => reason,
        other => other.to_string(),
    }
}

/// Parses a whole config document (no flag overrides).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigSource::parse(text)?.build()
}

fn parse_num<T: FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::param("value", format!("cannot parse {v:?} as a {}", std::any::type_name::<T>())))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::param("value", format!("expected true or false, got {v:?}"))),
    }
}

/// Splits a plain decimal literal into an integer mantissa and a count of
/// decimal places (so `0.02` becomes (2, 2)).
fn decimal_parts(s: &str) -> Option<(i64, u32)> {
    let s = s.trim();
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
        return None;
    }
    let m: i64 = format!("{int}{frac}").parse().ok()?;
    Some((if neg { -m } else { m }, frac.len() as u32))
}

/// Inclusive range built from exact decimal arithmetic, so every grid point
/// is the correctly rounded value of its decimal literal.
fn decimal_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    range_from_strs(&start.to_string(), &stop.to_string(), &step.to_string()).expect("literal range")
}

fn range_from_strs(a: &str, b: &str, s: &str) -> Result<Vec<f64>> {
    let bad = || Error::param("value", format!("range {a}:{b}:{s} needs plain decimal bounds and a positive step"));
    let (pa, pb, ps) = (decimal_parts(a).ok_or_else(bad)?, decimal_parts(b).ok_or_else(bad)?, decimal_parts(s).ok_or_else(bad)?);
    let d = pa.1.max(pb.1).max(ps.1);
    let scale = |(m, k): (i64, u32)| m * 10_i64.pow(d - k);
    let (ia, ib, is) = (scale(pa), scale(pb), scale(ps));
    if is <= 0 || ib < ia {
        return Err(bad());
    }
    let count = (ib - ia) / is + 1;
    if count > 100_000 {
        return Err(Error::param("value", format!("range {a}:{b}:{s} has {count} points")));
    }
    let denom = 10_f64.powi(d as i32);
    Ok((0..count).map(|k| (ia + k * is) as f64 / denom).collect())
}

pub(crate) fn parse_axis(v: &str) -> Result<Vec<f64>> {
    let values = match v.split(':').collect::<Vec<_>>()[..] {
        [a, b, s] => range_from_strs(a, b, s)?,
        [_] => v.split(',').map(|x| parse_num::<f64>(x.trim())).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::param("value", format!("expected a comma list or start:stop:step, got {v:?}"))),
    };
    if values.is_empty() || values.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("value", format!("axis {v:?} must be nonempty and finite")));
    }
    Ok(values)
}

impl RunConfig {
    /// Cat amplitude as a complex number.
    pub fn alpha(&self) -> C64 {
        self.spec.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Model;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.spec.alpha, C64::new(2.0, 0.0));
        assert_eq!((c.settings.dim, c.spec.t_f, c.spec.kind, c.spec.n), (60, 5.0, ProtocolKind::Optimal, 1));
        assert_eq!(c.settings.kerr, 1.0);
    }

    #[test]
    fn optimal_with_zero_order_is_rejected_at_its_line() {
        let e = parse_config("kind = optimal\n\nn = 0\n").unwrap_err();
        assert!(matches!(&e, Error::Config { location, .. } if location == "line 3"), "{e}");
        assert!(e.is_validation());
        assert!(parse_config("kind = base\nn = 0\n").is_ok());
    }

    #[test]
    fn benchmark_document() {
        let c = parse_config("# short pulse\nt_f = 1.1\nkappa = 0.01\nmodel = lindblad-full\n").unwrap();
        assert_eq!(c.spec.t_f, 1.1);
        assert_eq!(c.settings.noise, NoiseParams::new(0.01, 0.0).unwrap());
        assert_eq!(c.settings.model, Model::LindbladFull);
    }

    #[test]
    fn diagnostics_carry_lines() {
        for (doc, line) in [("t_f = 5\nbogus = 1\n", "line 2"), ("dim = sixty", "line 1"), ("t_f\n", "line 1"), ("n = 2\nn = 3\n", "line 2")] {
            let e = parse_config(doc).unwrap_err();
            assert!(matches!(&e, Error::Config { location, .. } if location == line), "{doc:?}: {e}");
        }
        // noise on a closed model is attributed to the kappa line
        let e = parse_config("kappa = 0.01\n").unwrap_err();
        assert!(e.to_string().contains("defaults") || e.to_string().contains("line 1"), "{e}");
        let e = parse_config("mu = 1.5\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = parse_config("dim = 10\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn flags_override_file_values() {
        let mut src = ConfigSource::parse("t_f = 5\nn = 2\n").unwrap();
        src.set_flag("t_f", "1.1").unwrap();
        let c = src.build().unwrap();
        assert_eq!((c.spec.t_f, c.spec.n), (1.1, 2));
        src.set_flag("n", "0").unwrap();
        let e = src.build().unwrap_err();
        assert!(e.to_string().contains("flag --n"), "{e}");
        assert!(src.set_flag("nope", "1").is_err());
    }

    #[test]
    fn axes() {
        assert_eq!(parse_axis("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        let r = parse_axis("-0.3:0.3:0.02").unwrap();
        assert_eq!(r.len(), 31);
        assert_eq!(r[15], 0.0);
        assert_eq!(r[20], 0.1);
        assert_eq!(r[0], -0.3);
        assert!(parse_axis("0:1:0").is_err());
        assert!(parse_axis("1:0:0.1").is_err());
        assert!(parse_axis("").is_err());
        assert!(RunConfig::default().t_f_values.contains(&1.1));
        assert!(RunConfig::default().kappa_values.contains(&0.01));
    }
}
