//! Command-line front end: reads a run configuration, runs one experiment
//! and writes its CSV and grid files.

pub mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use cavsqueeze::beam::{run_beam, BeamConfig, BeamHamiltonian};
use cavsqueeze::io::write_key_values;
use cavsqueeze::model::{
    check_regime, design_couplings, effective_params, squeeze_spec, target_state, EffectiveParams, PhysicalParams,
    SqueezeTarget, DEFAULT_REGIME_THRESHOLD,
};
use cavsqueeze::squeezedbath::{bath_params, phase_sensitivity_report, ExactOptions, BAD_CAVITY_ADVISORY};
use cavsqueeze::validate::run_suite;
use cavsqueeze::wigner::{beam_snapshots, square_axes};
use cavsqueeze::C64;

pub use config::{parse_config, BathSection, BeamSection, Couplings, DesignSection, Experiment, RunConfig, WignerSection};
use config::HamiltonianKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("no experiment section; add one of [beam], [bath], [wigner], [design], [validate]")]
    NoExperiment,
    #[error(transparent)]
    Core(#[from] cavsqueeze::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} validation check(s) failed")]
    ChecksFailed(usize),
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// `(label, value)` lines of the printed summary table.
    pub summary: Vec<(String, String)>,
    /// Regime warnings; `--strict` turns these into exit code 2.
    pub advisories: Vec<String>,
}

impl Outcome {
    fn note(&mut self, label: impl Into<String>, value: impl std::fmt::Display) {
        self.summary.push((label.into(), value.to_string()));
    }

    /// Summary as an aligned two-column table.
    pub fn table(&self) -> String {
        let width = self.summary.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.summary {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        out
    }
}

fn create(dir: &Path, name: &str, outcome: &mut Outcome) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    outcome.files.push(path);
    Ok(BufWriter::new(file))
}

fn physical(c: &Couplings) -> Option<PhysicalParams> {
    match c {
        Couplings::Drives { g, omega, big_delta, small_delta, .. } => {
            let p = PhysicalParams { g: *g, omega: *omega, big_delta: *big_delta, small_delta: [0.0; 3], bare: None };
            Some(match small_delta {
                Some(s) => PhysicalParams { small_delta: *s, ..p },
                None => p.with_matched_detunings(),
            })
        }
        Couplings::Effective { .. } => None,
    }
}

/// Builds the core beam configuration and collects regime advisories.
pub fn beam_config(b: &BeamSection, advisories: &mut Vec<String>) -> Result<BeamConfig, CliError> {
    let (hamiltonian, eff) = match (&b.couplings, physical(&b.couplings)) {
        (Couplings::Effective { lambda1, lambda2, beta }, _) => {
            let eff = EffectiveParams { lambda1: *lambda1, lambda2: *lambda2, beta: *beta, stark_g: 0.0, stark_e: 0.0 };
            (BeamHamiltonian::Static(eff), eff)
        }
        (Couplings::Drives { hamiltonian, clock, .. }, Some(params)) => {
            let eff = effective_params(&params)?;
            let n_bar = squeeze_spec(&eff).map(|s| s.mean_photons()).unwrap_or(1.0);
            let report = check_regime(&params, n_bar, DEFAULT_REGIME_THRESHOLD)?;
            advisories.extend(report.violations().map(|c| format!("regime: {} = {:.3} exceeds {}", c.name, c.value, c.threshold)));
            match hamiltonian {
                HamiltonianKind::Static => (BeamHamiltonian::Static(eff), eff),
                HamiltonianKind::Dispersive => (BeamHamiltonian::Dispersive { params, clock: *clock }, eff),
            }
        }
        (Couplings::Drives { .. }, None) => unreachable!("drives always map to physical parameters"),
    };
    let dominant = eff.lambda1.norm().max(eff.lambda2.norm());
    if dominant * b.tau > 0.5 {
        advisories.push(format!("|lambda| tau = {:.3} is not small", dominant * b.tau));
    }
    if let Err(e) = squeeze_spec(&eff) {
        advisories.push(format!("couplings admit no steady state: {e}"));
    }
    let field0 = target_state(b.field0_alpha, 0.0, 0.0, b.n_max)?;
    Ok(BeamConfig {
        n_atoms: b.n_atoms,
        tau: b.tau,
        hamiltonian,
        field0,
        r_at: b.r_at,
        kappa: b.kappa,
        atom_level: None,
        dt: b.dt,
    })
}

fn run_beam_experiment(b: &BeamSection, dir: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let cfg = beam_config(b, &mut out.advisories)?;
    let res = run_beam(&cfg)?;
    res.write_csv(create(dir, "beam_observables.csv", out)?)?;
    let mut pairs = res.summary();
    if let (Some(r_at), Some(spec)) = (b.r_at, res.spec) {
        let rate = cavsqueeze::beam::engineered_rate(r_at, spec.lambda.norm(), b.tau)?;
        pairs.push(("gamma_eng", cavsqueeze::io::format_number(rate)));
    }
    write_key_values(create(dir, "beam_summary.csv", out)?, &pairs)?;
    for (k, v) in pairs {
        out.note(k, v);
    }
    Ok(())
}

fn run_bath_experiment(b: &BathSection, dir: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let bp = bath_params(b.lambda, b.gamma_cav, b.gamma_at, b.r, 0.0)?;
    if bp.bad_cavity_ratio() < BAD_CAVITY_ADVISORY {
        out.advisories.push(format!(
            "Gamma/|lambda| = {:.2} is below {BAD_CAVITY_ADVISORY}; adiabatic elimination is unreliable",
            bp.bad_cavity_ratio()
        ));
    }
    let t_end = b.t_end.unwrap_or(5.0 / (bp.gamma_eng() * (-2.0 * b.r).exp()));
    let opts = ExactOptions { n_max: b.n_max, samples: b.samples, dt: b.dt };
    let report = phase_sensitivity_report(&bp, &b.phis, t_end, &opts)?;
    for (idx, row) in report.rows.iter().enumerate() {
        row.write_csv(create(dir, &format!("bath_phi{idx}.csv"), out)?)?;
        let high = row.exact.channel("high_population").map_or(0.0, |v| v.iter().cloned().fold(0.0, f64::max));
        if high >= 1e-3 {
            out.advisories.push(format!("phi = {:.4}: field population above |1> reached {high:.2e}", row.phi));
        }
        out.note(
            format!("phi = {:.4}", row.phi),
            format!(
                "exact-adiabatic {:.2e}  exact-analytic {:.2e}  half time {}",
                row.exact_vs_adiabatic,
                row.exact_vs_analytic,
                row.half_time.map_or("never".to_string(), |t| format!("{t:.4e}"))
            ),
        );
    }
    report.write_summary(create(dir, "bath_summary.csv", out)?)?;
    out.note("gamma_eng", format!("{:.6e}", bp.gamma_eng()));
    out.note("t_end", format!("{t_end:.6e}"));
    out.note("decay ordering holds", report.ordering_holds);
    Ok(())
}

fn run_wigner_experiment(w: &WignerSection, dir: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let cfg = beam_config(&w.beam, &mut out.advisories)?;
    let (x, p) = square_axes(w.extent, w.resolution)?;
    for (k, grid) in beam_snapshots(&cfg, &w.checkpoints, x, p)? {
        grid.write(create(dir, &format!("wigner_{k}.grid"), out)?)?;
        if let Some(text) = &grid.warning {
            if !out.advisories.contains(text) {
                out.advisories.push(text.clone());
            }
        }
        let (minor, major) = grid.moments().principal_variances();
        out.note(format!("atoms = {k}"), format!("integral {:.4}  min {:.3e}  variances {minor:.4} / {major:.4}", grid.integral(), grid.min_value()));
    }
    Ok(())
}

fn run_design_experiment(d: &DesignSection, dir: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let target = SqueezeTarget { r: d.r, phi: d.phi, alpha: d.alpha };
    let design = design_couplings(&target, d.g, d.big_delta, d.scale)?;
    let p = &design.params;
    let mut pairs: Vec<(String, String)> = Vec::new();
    let fmt = |z: C64| config::complex_text(z);
    pairs.push(("g".into(), fmt(p.g)));
    for (k, o) in p.omega.iter().enumerate() {
        if *o != C64::new(0.0, 0.0) {
            pairs.push((format!("omega{}", k + 1), fmt(*o)));
        }
    }
    for (k, v) in p.big_delta.iter().enumerate() {
        pairs.push((format!("Delta{}", k + 1), format!("{v}")));
    }
    for (k, v) in p.small_delta.iter().enumerate() {
        pairs.push((format!("delta{}", k + 1), format!("{v:.6e}")));
    }
    let eff = effective_params(p)?;
    pairs.push(("lambda1".into(), fmt(eff.lambda1)));
    pairs.push(("lambda2".into(), fmt(eff.lambda2)));
    pairs.push(("beta".into(), fmt(eff.beta)));
    for c in &design.report.checks {
        let flag = if c.passed() { "ok" } else { "ADVISORY" };
        pairs.push((format!("regime {}", c.name), format!("{:.4} (<= {}) {flag}", c.value, c.threshold)));
        if !c.passed() {
            out.advisories.push(format!("regime: {} = {:.3} exceeds {}", c.name, c.value, c.threshold));
        }
    }
    let kv: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    write_key_values(create(dir, "design.csv", out)?, &kv)?;
    for (k, v) in pairs {
        out.note(k, v);
    }
    Ok(())
}

fn run_validate(dir: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let results = run_suite();
    let rows: Vec<(&str, String)> = results.iter().map(|c| (c.name.as_str(), format!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.detail))).collect();
    write_key_values(create(dir, "validation.csv", out)?, &rows)?;
    for c in &results {
        out.note(&c.name, format!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.detail));
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

/// Runs the configured experiment, writing files into `dir` (created if needed).
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut out = Outcome::default();
    match &cfg.experiment {
        Experiment::Beam(b) => run_beam_experiment(b, dir, &mut out)?,
        Experiment::Bath(b) => run_bath_experiment(b, dir, &mut out)?,
        Experiment::Wigner(w) => run_wigner_experiment(w, dir, &mut out)?,
        Experiment::Design(d) => run_design_experiment(d, dir, &mut out)?,
        Experiment::Validate => run_validate(dir, &mut out)?,
    }
    Ok(out)
}
