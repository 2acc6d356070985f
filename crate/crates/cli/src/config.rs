//! Run configuration: a line-oriented `key = value` format with one
//! `[experiment]` section.
//!
//! ```text
//! output_dir = results
//!
//! [beam]
//! n_atoms = 200
//! tau = 3.1/g
//! lambda1 = -0.0762g
//! lambda2 = 0.1g
//! ```
//!
//! Rates carry an optional `g` suffix and times an optional `/g` suffix;
//! a rate written with `/g` (or a time with `g`) is rejected. Complex values
//! are written `a+bi`. `#` starts a comment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use cavsqueeze::beam::PhaseClock;
use cavsqueeze::C64;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Beam(BeamSection),
    Bath(BathSection),
    Wigner(WignerSection),
    Design(DesignSection),
    Validate,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Beam(_) => "beam",
            Experiment::Bath(_) => "bath",
            Experiment::Wigner(_) => "wigner",
            Experiment::Design(_) => "design",
            Experiment::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    Static,
    Dispersive,
}

/// How the atom–field couplings are given.
#[derive(Debug, Clone, PartialEq)]
pub enum Couplings {
    /// λ1, λ2, β directly.
    Effective { lambda1: C64, lambda2: C64, beta: C64 },
    /// g, Ω1..Ω4 and detunings of the Λ atom. Missing δ's are matched.
    Drives {
        g: C64,
        omega: [C64; 4],
        big_delta: [f64; 3],
        small_delta: Option<[f64; 3]>,
        hamiltonian: HamiltonianKind,
        clock: PhaseClock,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSection {
    pub n_atoms: usize,
    pub tau: f64,
    pub couplings: Couplings,
    pub n_max: usize,
    pub kappa: f64,
    /// Coherent amplitude of the initial field; 0 is the vacuum.
    pub field0_alpha: C64,
    pub r_at: Option<f64>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathSection {
    pub lambda: C64,
    pub gamma_cav: f64,
    pub gamma_at: f64,
    pub r: f64,
    pub phis: Vec<f64>,
    /// Defaults to 5/(Γ_eng e^{−2r}).
    pub t_end: Option<f64>,
    pub samples: usize,
    pub n_max: usize,
    pub dt: Option<f64>,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            lambda: C64::new(0.04, 0.0),
            gamma_cav: 40.0,
            gamma_at: 0.0,
            r: 1.5,
            phis: vec![0.0, PI / 2.0, PI],
            t_end: None,
            samples: 400,
            n_max: 3,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerSection {
    pub beam: BeamSection,
    pub checkpoints: Vec<usize>,
    pub extent: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSection {
    pub r: f64,
    pub phi: f64,
    pub alpha: C64,
    pub scale: f64,
    pub g: C64,
    pub big_delta: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Rate,
    Time,
    None,
}

struct Entry {
    value: String,
    line: usize,
}

/// Entries of one section; every key must be consumed.
struct Fields {
    section: String,
    header_line: usize,
    entries: BTreeMap<String, Entry>,
}

fn err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config { line, message: message.into() }
}

fn parse_real(text: &str) -> Option<f64> {
    let v: f64 = text.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`; parentheses are optional.
pub fn parse_complex(text: &str) -> Option<C64> {
    let s: String = text.trim().chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(&s);
    let Some(body) = s.strip_suffix('i') else {
        return parse_real(s).map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => parse_real(t)?,
    };
    Some(C64::new(re, im))
}

fn strip_unit<'a>(key: &str, value: &'a str, unit: Unit, line: usize) -> Result<&'a str, CliError> {
    let v = value.trim();
    let (body, found) = if let Some(b) = v.strip_suffix("/g") {
        (b, Unit::Time)
    } else if let Some(b) = v.strip_suffix('g') {
        (b, Unit::Rate)
    } else {
        (v, Unit::None)
    };
    match (unit, found) {
        (_, Unit::None) => Ok(body),
        (want, got) if want == got => Ok(body),
        (Unit::Rate, Unit::Time) => Err(err(line, format!("'{key}' is a rate in units of g; write '{}g', not '/g'", body.trim()))),
        (Unit::Time, Unit::Rate) => Err(err(line, format!("'{key}' is a time in units of 1/g; write '{}/g', not 'g'", body.trim()))),
        _ => Err(err(line, format!("'{key}' is dimensionless; drop the unit suffix"))),
    }
}

impl Fields {
    fn take_raw(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn missing(&self, key: &str) -> CliError {
        err(self.header_line, format!("[{}] needs '{key}'", self.section))
    }

    fn complex(&mut self, key: &str, unit: Unit) -> Result<Option<C64>, CliError> {
        let Some(e) = self.take_raw(key) else { return Ok(None) };
        let body = strip_unit(key, &e.value, unit, e.line)?;
        parse_complex(body).map(Some).ok_or_else(|| err(e.line, format!("'{key}': cannot read '{}' as a number", e.value.trim())))
    }

    fn real(&mut self, key: &str, unit: Unit) -> Result<Option<f64>, CliError> {
        let Some(e) = self.take_raw(key) else { return Ok(None) };
        let body = strip_unit(key, &e.value, unit, e.line)?;
        parse_real(body).map(Some).ok_or_else(|| err(e.line, format!("'{key}': cannot read '{}' as a real number", e.value.trim())))
    }

    fn nonnegative(&mut self, key: &str, unit: Unit) -> Result<Option<f64>, CliError> {
        let line = self.entries.get(key).map(|e| e.line);
        match self.real(key, unit)? {
            Some(v) if v < 0.0 => Err(err(line.unwrap_or(0), format!("'{key}' must be ≥ 0"))),
            v => Ok(v),
        }
    }

    fn positive(&mut self, key: &str, unit: Unit) -> Result<Option<f64>, CliError> {
        let line = self.entries.get(key).map(|e| e.line);
        match self.real(key, unit)? {
            Some(v) if v <= 0.0 => Err(err(line.unwrap_or(0), format!("'{key}' must be > 0"))),
            v => Ok(v),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        let Some(e) = self.take_raw(key) else { return Ok(None) };
        let body = strip_unit(key, &e.value, Unit::None, e.line)?;
        body.trim().parse().map(Some).map_err(|_| err(e.line, format!("'{key}' must be a non-negative integer, got '{}'", body.trim())))
    }

    fn word(&mut self, key: &str, choices: &[&str]) -> Result<Option<(String, usize)>, CliError> {
        let Some(e) = self.take_raw(key) else { return Ok(None) };
        let w = e.value.trim().to_string();
        if choices.contains(&w.as_str()) {
            Ok(Some((w, e.line)))
        } else {
            Err(err(e.line, format!("'{key}' must be one of {}, got '{w}'", choices.join(", "))))
        }
    }

    fn list<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>, CliError> {
        let Some(e) = self.take_raw(key) else { return Ok(None) };
        let items: Option<Vec<T>> = e.value.split(',').map(|s| parse(s.trim())).collect();
        match items {
            Some(v) if !v.is_empty() => Ok(Some(v)),
            _ => Err(err(e.line, format!("'{key}' must be a comma-separated list, got '{}'", e.value.trim()))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            Some((key, e)) => Err(err(e.line, format!("unknown key '{key}' in [{}]", self.section))),
            None => Ok(()),
        }
    }
}

const BEAM_DEFAULT_NMAX: usize = 30;

fn beam_section(f: &mut Fields) -> Result<BeamSection, CliError> {
    let n_atoms = f.count("n_atoms")?.ok_or_else(|| f.missing("n_atoms"))?;
    if n_atoms == 0 {
        return Err(err(f.header_line, "'n_atoms' must be ≥ 1"));
    }
    let tau = f.positive("tau", Unit::Time)?.ok_or_else(|| f.missing("tau"))?;
    let mode = f.word("coupling", &["effective", "drives"])?.map(|(w, _)| w);
    let couplings = if mode.as_deref() == Some("drives") {
        let g = f.complex("g", Unit::Rate)?.ok_or_else(|| f.missing("g"))?;
        let mut omega = [C64::new(0.0, 0.0); 4];
        for (k, o) in omega.iter_mut().enumerate() {
            *o = f.complex(&format!("omega{}", k + 1), Unit::Rate)?.unwrap_or_default();
        }
        let mut big_delta = [0.0; 3];
        for (k, d) in big_delta.iter_mut().enumerate() {
            let key = format!("Delta{}", k + 1);
            *d = match f.real(&key, Unit::Rate)? {
                Some(v) => v,
                None if k < 2 => return Err(f.missing(&key)),
                None => 0.0,
            };
        }
        let given: Vec<Option<f64>> = (1..=3).map(|k| f.real(&format!("delta{k}"), Unit::Rate)).collect::<Result<_, _>>()?;
        let small_delta = if given.iter().all(Option::is_none) {
            None
        } else {
            Some([given[0].unwrap_or(0.0), given[1].unwrap_or(0.0), given[2].unwrap_or(0.0)])
        };
        let hamiltonian = match f.word("hamiltonian", &["static", "dispersive"])? {
            Some((w, _)) if w == "static" => HamiltonianKind::Static,
            _ => HamiltonianKind::Dispersive,
        };
        let clock = match f.word("clock", &["global", "reset"])? {
            Some((w, _)) if w == "reset" => PhaseClock::PerAtomReset,
            _ => PhaseClock::Global,
        };
        Couplings::Drives { g, omega, big_delta, small_delta, hamiltonian, clock }
    } else {
        Couplings::Effective {
            lambda1: f.complex("lambda1", Unit::Rate)?.ok_or_else(|| f.missing("lambda1"))?,
            lambda2: f.complex("lambda2", Unit::Rate)?.ok_or_else(|| f.missing("lambda2"))?,
            beta: f.complex("beta", Unit::Rate)?.unwrap_or_default(),
        }
    };
    let n_max = f.count("n_max")?.unwrap_or(BEAM_DEFAULT_NMAX);
    Ok(BeamSection {
        n_atoms,
        tau,
        couplings,
        n_max,
        kappa: f.nonnegative("kappa", Unit::Rate)?.unwrap_or(0.0),
        field0_alpha: f.complex("field0_alpha", Unit::None)?.unwrap_or_default(),
        r_at: f.nonnegative("r_at", Unit::Rate)?,
        dt: f.positive("dt", Unit::Time)?,
    })
}

fn bath_section(f: &mut Fields) -> Result<BathSection, CliError> {
    let d = BathSection::default();
    Ok(BathSection {
        lambda: f.complex("lambda", Unit::Rate)?.unwrap_or(d.lambda),
        gamma_cav: f.positive("gamma_cav", Unit::Rate)?.unwrap_or(d.gamma_cav),
        gamma_at: f.nonnegative("gamma_at", Unit::Rate)?.unwrap_or(d.gamma_at),
        r: f.nonnegative("r", Unit::None)?.unwrap_or(d.r),
        phis: f.list("phis", parse_real)?.unwrap_or(d.phis),
        t_end: f.positive("t_end", Unit::Time)?,
        samples: f.count("samples")?.unwrap_or(d.samples),
        n_max: f.count("n_max")?.unwrap_or(d.n_max),
        dt: f.positive("dt", Unit::Time)?,
    })
}

fn wigner_section(f: &mut Fields) -> Result<WignerSection, CliError> {
    let beam = beam_section(f)?;
    Ok(WignerSection {
        beam,
        checkpoints: f.list("checkpoints", |s| s.parse().ok())?.unwrap_or_else(|| vec![50, 100, 200]),
        extent: f.positive("extent", Unit::None)?.unwrap_or(4.0),
        resolution: f.count("resolution")?.unwrap_or(81),
    })
}

fn design_section(f: &mut Fields) -> Result<DesignSection, CliError> {
    let r = f.nonnegative("r", Unit::None)?.ok_or_else(|| f.missing("r"))?;
    let scale = f.positive("scale", Unit::Rate)?.ok_or_else(|| f.missing("scale"))?;
    // Ω/|Δ| = scale/|g|; these keep every Δ gap above 6 Ω at scale 0.1.
    let defaults = [300.0, 100.0, 600.0];
    let mut big_delta = defaults;
    for (k, d) in big_delta.iter_mut().enumerate() {
        if let Some(v) = f.real(&format!("Delta{}", k + 1), Unit::Rate)? {
            *d = v;
        }
    }
    Ok(DesignSection {
        r,
        phi: f.real("phi", Unit::None)?.unwrap_or(0.0),
        alpha: f.complex("alpha", Unit::None)?.unwrap_or_default(),
        scale,
        g: f.complex("g", Unit::Rate)?.unwrap_or(C64::new(1.0, 0.0)),
        big_delta,
    })
}

const SECTIONS: [&str; 5] = ["beam", "bath", "wigner", "design", "validate"];

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut preamble = Fields { section: "top level".into(), header_line: 1, entries: BTreeMap::new() };
    let mut section: Option<Fields> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err(line, format!("malformed section header '{content}'")))?.trim();
            if !SECTIONS.contains(&name) {
                return Err(err(line, format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", "))));
            }
            if let Some(prev) = &section {
                return Err(err(line, format!("second experiment section [{name}]; [{}] is already present", prev.section)));
            }
            section = Some(Fields { section: name.to_string(), header_line: line, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(err(line, format!("expected 'key = value', got '{content}'")));
        }
        let target = section.as_mut().unwrap_or(&mut preamble);
        if target.entries.contains_key(key) {
            return Err(err(line, format!("duplicate key '{key}'")));
        }
        target.entries.insert(key.to_string(), Entry { value: value.to_string(), line });
    }
    let mut fields = section.ok_or(CliError::NoExperiment)?;
    let output_dir = preamble.take_raw("output_dir").map(|e| PathBuf::from(e.value));
    preamble.finish()?;
    let experiment = match fields.section.as_str() {
        "beam" => Experiment::Beam(beam_section(&mut fields)?),
        "bath" => Experiment::Bath(bath_section(&mut fields)?),
        "wigner" => Experiment::Wigner(wigner_section(&mut fields)?),
        "design" => Experiment::Design(design_section(&mut fields)?),
        _ => Experiment::Validate,
    };
    fields.finish()?;
    Ok(RunConfig { output_dir, experiment })
}

/// Shortest text that reads back to the same `f64`.
fn real_text(x: f64) -> String {
    format!("{x:?}")
}

pub fn complex_text(z: C64) -> String {
    if z.im == 0.0 {
        return real_text(z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", real_text(z.re), real_text(z.im.abs()))
}

fn list_text<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn write_beam(out: &mut String, b: &BeamSection) {
    let _ = writeln!(out, "n_atoms = {}", b.n_atoms);
    let _ = writeln!(out, "tau = {}/g", real_text(b.tau));
    match &b.couplings {
        Couplings::Effective { lambda1, lambda2, beta } => {
            let _ = writeln!(out, "coupling = effective");
            let _ = writeln!(out, "lambda1 = {}g", complex_text(*lambda1));
            let _ = writeln!(out, "lambda2 = {}g", complex_text(*lambda2));
            let _ = writeln!(out, "beta = {}g", complex_text(*beta));
        }
        Couplings::Drives { g, omega, big_delta, small_delta, hamiltonian, clock } => {
            let _ = writeln!(out, "coupling = drives");
            let _ = writeln!(out, "g = {}g", complex_text(*g));
            for (k, o) in omega.iter().enumerate() {
                let _ = writeln!(out, "omega{} = {}g", k + 1, complex_text(*o));
            }
            for (k, d) in big_delta.iter().enumerate() {
                let _ = writeln!(out, "Delta{} = {}g", k + 1, real_text(*d));
            }
            if let Some(s) = small_delta {
                for (k, d) in s.iter().enumerate() {
                    let _ = writeln!(out, "delta{} = {}g", k + 1, real_text(*d));
                }
            }
            let h = match hamiltonian {
                HamiltonianKind::Static => "static",
                HamiltonianKind::Dispersive => "dispersive",
            };
            let c = match clock {
                PhaseClock::Global => "global",
                PhaseClock::PerAtomReset => "reset",
            };
            let _ = writeln!(out, "hamiltonian = {h}\nclock = {c}");
        }
    }
    let _ = writeln!(out, "n_max = {}", b.n_max);
    let _ = writeln!(out, "kappa = {}g", real_text(b.kappa));
    let _ = writeln!(out, "field0_alpha = {}", complex_text(b.field0_alpha));
    if let Some(r) = b.r_at {
        let _ = writeln!(out, "r_at = {}g", real_text(r));
    }
    if let Some(dt) = b.dt {
        let _ = writeln!(out, "dt = {}/g", real_text(dt));
    }
}

impl RunConfig {
    /// Canonical text form; [`parse_config`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(out, "output_dir = {}\n", dir.display());
        }
        let _ = writeln!(out, "[{}]", self.experiment.name());
        match &self.experiment {
            Experiment::Beam(b) => write_beam(&mut out, b),
            Experiment::Bath(b) => {
                let _ = writeln!(out, "lambda = {}g", complex_text(b.lambda));
                let _ = writeln!(out, "gamma_cav = {}g", real_text(b.gamma_cav));
                let _ = writeln!(out, "gamma_at = {}g", real_text(b.gamma_at));
                let _ = writeln!(out, "r = {}", real_text(b.r));
                let _ = writeln!(out, "phis = {}", list_text(&b.phis, |x| real_text(*x)));
                if let Some(t) = b.t_end {
                    let _ = writeln!(out, "t_end = {}/g", real_text(t));
                }
                let _ = writeln!(out, "samples = {}\nn_max = {}", b.samples, b.n_max);
                if let Some(dt) = b.dt {
                    let _ = writeln!(out, "dt = {}/g", real_text(dt));
                }
            }
            Experiment::Wigner(w) => {
                write_beam(&mut out, &w.beam);
                let _ = writeln!(out, "checkpoints = {}", list_text(&w.checkpoints, |k| k.to_string()));
                let _ = writeln!(out, "extent = {}\nresolution = {}", real_text(w.extent), w.resolution);
            }
            Experiment::Design(d) => {
                let _ = writeln!(out, "r = {}\nphi = {}", real_text(d.r), real_text(d.phi));
                let _ = writeln!(out, "alpha = {}", complex_text(d.alpha));
                let _ = writeln!(out, "scale = {}g\ng = {}g", real_text(d.scale), complex_text(d.g));
                for (k, v) in d.big_delta.iter().enumerate() {
                    let _ = writeln!(out, "Delta{} = {}g", k + 1, real_text(*v));
                }
            }
            Experiment::Validate => {}
        }
        out
    }

    /// Applies the `--nmax` and `--dt` overrides.
    pub fn with_overrides(mut self, n_max: Option<usize>, dt: Option<f64>) -> Self {
        let beam = |b: &mut BeamSection| {
            if let Some(n) = n_max {
                b.n_max = n;
            }
            if dt.is_some() {
                b.dt = dt;
            }
        };
        match &mut self.experiment {
            Experiment::Beam(b) => beam(b),
            Experiment::Wigner(w) => beam(&mut w.beam),
            Experiment::Bath(b) => {
                if let Some(n) = n_max {
                    b.n_max = n;
                }
                if dt.is_some() {
                    b.dt = dt;
                }
            }
            Experiment::Design(_) | Experiment::Validate => {}
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |re, im| Some(C64::new(re, im));
        assert_eq!(parse_complex("0.1"), c(0.1, 0.0));
        assert_eq!(parse_complex("0.1+0.02i"), c(0.1, 0.02));
        assert_eq!(parse_complex("-0.1-0.02i"), c(-0.1, -0.02));
        assert_eq!(parse_complex("1e-3-2e-4i"), c(1e-3, -2e-4));
        assert_eq!(parse_complex("2.5e+1i"), c(0.0, 25.0));
        assert_eq!(parse_complex("-i"), c(0.0, -1.0));
        assert_eq!(parse_complex("(0.3 + 0.4i)"), c(0.3, 0.4));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("inf"), None);
    }

    #[test]
    fn complex_text_round_trips() {
        for z in [C64::new(0.1, -0.0), C64::new(-1e-7, 3.0), C64::new(0.0, 0.0), C64::new(2.0, -0.5)] {
            assert_eq!(parse_complex(&complex_text(z)), Some(z));
        }
    }

    #[test]
    fn unit_suffixes() {
        assert!(strip_unit("tau", "3.1/g", Unit::Time, 1).is_ok());
        assert!(strip_unit("lambda1", "0.1g", Unit::Rate, 1).is_ok());
        assert!(strip_unit("lambda1", "0.1", Unit::Rate, 1).is_ok());
        let e = strip_unit("tau", "3.1g", Unit::Time, 7).unwrap_err().to_string();
        assert!(e.contains("line 7") && e.contains("/g"), "{e}");
        assert!(strip_unit("lambda1", "0.1/g", Unit::Rate, 1).is_err());
        assert!(strip_unit("r", "1g", Unit::None, 1).is_err());
    }
}
