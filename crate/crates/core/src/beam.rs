//! Repeated interactions: a sequence of atoms crosses the cavity one at a
//! time, each interacting with the field for a time τ before being traced out.
//!
//! With `|λ2| > |λ1|` and atoms prepared in |g⟩ the beam acts as a zero
//! temperature reservoir for the transformed field `D†(α) S†(ξ) a S(ξ) D(α)`,
//! so the field relaxes to `D(α) S(ξ) |0⟩`.

use crate::dynamics::{evolve_master, propagator, CollapseChannel, HamiltonianSource, MasterOptions};
use crate::hilbert::{
    atomic_projector, c, destroy, number, on_field, quadrature_x1, quadrature_x2, trace_product, CMatrix, CVector,
    Factor, Operator, QuantumState, C64, G,
};
use crate::model::{
    build_h_eff_rotating, build_h_eff_static, effective_params, squeeze_spec, EffectiveParams, PhysicalParams,
    SqueezeSpec,
};
use crate::io::{format_number, write_csv, Cell};
use crate::{Error, Result};
use std::io::Write;

/// Which effective Hamiltonian drives each atom–field interaction.
#[derive(Debug, Clone, PartialEq)]
pub enum BeamHamiltonian {
    /// `(λ1 a + λ2 a† + β) σ₋ + h.c.`
    Static(EffectiveParams),
    /// Couplings with Stark shifts, dispersive terms and residual detunings.
    Dispersive { params: PhysicalParams, clock: PhaseClock },
}

/// Origin of the e^{iδt} phases for successive atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseClock {
    /// Atom k sees t ∈ [kτ, (k+1)τ].
    Global,
    /// Every atom sees t ∈ [0, τ].
    PerAtomReset,
}

#[derive(Debug, Clone)]
pub struct BeamConfig {
    pub n_atoms: usize,
    pub tau: f64,
    pub hamiltonian: BeamHamiltonian,
    pub field0: QuantumState,
    /// Atom arrival rate, used only to report γ_eng.
    pub r_at: Option<f64>,
    /// Cavity loss rate during each interaction; 0 disables the channel.
    pub kappa: f64,
    /// Level the atoms are prepared in; defaults to the one that cools the transformed field.
    pub atom_level: Option<usize>,
    /// Step for time-dependent or lossy runs; `None` uses the default rule.
    pub dt: Option<f64>,
}

impl BeamConfig {
    /// Static-Hamiltonian beam starting from the vacuum.
    pub fn new(eff: EffectiveParams, tau: f64, n_atoms: usize, n_max: usize) -> Result<Self> {
        Ok(Self {
            n_atoms,
            tau,
            hamiltonian: BeamHamiltonian::Static(eff),
            field0: QuantumState::fock(0, n_max)?,
            r_at: None,
            kappa: 0.0,
            atom_level: None,
            dt: None,
        })
    }

    pub fn n_max(&self) -> usize {
        self.field0.dim() - 1
    }

    pub fn effective(&self) -> Result<EffectiveParams> {
        match &self.hamiltonian {
            BeamHamiltonian::Static(eff) => Ok(*eff),
            BeamHamiltonian::Dispersive { params, .. } => effective_params(params),
        }
    }

    /// Steady-state description, when the couplings admit one.
    pub fn spec(&self) -> Option<SqueezeSpec> {
        self.effective().ok().and_then(|e| squeeze_spec(&e).ok())
    }

    fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::InvalidParameter("n_atoms must be ≥ 1".into()));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("τ must be positive, got {}", self.tau)));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("κ must be ≥ 0, got {}", self.kappa)));
        }
        if self.field0.dims().len() != 1 || self.field0.dim() < 2 {
            return Err(Error::InvalidSpace("field0 must be a single-mode state with n_max ≥ 1".into()));
        }
        if let Some(level) = self.atom_level {
            if level > 1 {
                return Err(Error::LevelOutOfRange { index: level, levels: 2 });
            }
        }
        let eff = self.effective()?;
        let dominant = eff.lambda1.norm().max(eff.lambda2.norm());
        if dominant * self.tau > 0.5 {
            log::warn!("|λ|τ = {:.3} is not small; the reservoir picture needs |λ|τ ≪ 1", dominant * self.tau);
        }
        Ok(())
    }

    fn preparation_level(&self) -> usize {
        self.atom_level.or_else(|| self.spec().map(|s| s.preparation_level())).unwrap_or(G)
    }
}

/// Per-atom observables; index 0 is the initial field.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamResult {
    pub n_mean: Vec<f64>,
    pub var_x1: Vec<f64>,
    pub var_x2: Vec<f64>,
    /// Fidelity to `D(α) S(ξ) |0⟩`; NaN when the couplings admit no steady state.
    pub fidelity: Vec<f64>,
    pub purity: Vec<f64>,
    pub final_field: QuantumState,
    pub spec: Option<SqueezeSpec>,
}

/// Columns of the per-atom observables CSV.
pub const BEAM_COLUMNS: [&str; 6] = ["atom_index", "n_mean", "var_x1", "var_x2", "fidelity", "purity"];

impl BeamResult {
    pub fn len(&self) -> usize {
        self.n_mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_mean.is_empty()
    }

    /// One row per atom, [`BEAM_COLUMNS`] order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.len()).map(|k| {
            vec![
                Cell::from(k),
                self.n_mean[k].into(),
                self.var_x1[k].into(),
                self.var_x2[k].into(),
                self.fidelity[k].into(),
                self.purity[k].into(),
            ]
        });
        write_csv(out, &BEAM_COLUMNS, rows)
    }

    /// Final observables and the target they approach, as key/value pairs.
    pub fn summary(&self) -> Vec<(&'static str, String)> {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        let mut pairs = vec![
            ("n_atoms", (self.len().saturating_sub(1)).to_string()),
            ("final_n_mean", format_number(last(&self.n_mean))),
            ("final_var_x1", format_number(last(&self.var_x1))),
            ("final_var_x2", format_number(last(&self.var_x2))),
            ("final_fidelity", format_number(last(&self.fidelity))),
            ("final_purity", format_number(last(&self.purity))),
        ];
        if let Some(spec) = &self.spec {
            let (v1, v2) = spec.quadrature_variances();
            pairs.extend([
                ("r", format_number(spec.r)),
                ("phi", format_number(spec.phi)),
                ("alpha_re", format_number(spec.alpha.re)),
                ("alpha_im", format_number(spec.alpha.im)),
                ("lambda_abs", format_number(spec.lambda.norm())),
                ("target_n_mean", format_number(spec.mean_photons())),
                ("target_var_x1", format_number(v1)),
                ("target_var_x2", format_number(v2)),
            ]);
        }
        pairs
    }
}

/// γ_eng = r_at |λ|² τ².
pub fn engineered_rate(r_at: f64, lambda: f64, tau: f64) -> Result<f64> {
    if r_at < 0.0 || lambda < 0.0 || tau < 0.0 {
        return Err(Error::InvalidParameter("engineered rate needs r_at, |λ|, τ ≥ 0".into()));
    }
    Ok(r_at * lambda * lambda * tau * tau)
}

/// Projection of `D(α) S(ξ) |0⟩` onto Fock levels 0..=n_max, unnormalized,
/// so that ⟨ψ|ρ|ψ⟩ is the exact fidelity for any ρ on the truncated space.
pub fn projected_target(spec: &SqueezeSpec, n_max: usize) -> Result<CVector> {
    let big = 2 * (n_max + 1) + 40;
    let u = crate::hilbert::displacement(spec.alpha, big)? * crate::hilbert::squeeze(spec.xi(), big)?;
    Ok(CVector::from_iterator(n_max + 1, u.matrix().column(0).iter().take(n_max + 1).cloned()))
}

/// How one atom acts on the field.
enum AtomMap {
    /// Kraus operators, same for every atom.
    Fixed(Vec<CMatrix>),
    /// Kraus operators recomputed for atom k.
    PerAtom,
    /// Joint Lindblad evolution including cavity loss.
    Lossy,
}

fn kraus_from_unitary(u: &CMatrix, level: usize, d: usize) -> Vec<CMatrix> {
    (0..2).map(|b| u.view((b * d, level * d), (d, d)).into_owned()).collect()
}

fn apply_kraus(ops: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for k in ops {
        out += k * rho * k.adjoint();
    }
    // Re-symmetrize against rounding.
    (&out + out.adjoint()) * c(0.5)
}

struct Observables {
    n: CMatrix,
    x1: CMatrix,
    x1sq: CMatrix,
    x2: CMatrix,
    x2sq: CMatrix,
    target: Option<CVector>,
}

impl Observables {
    fn new(n_max: usize, spec: Option<&SqueezeSpec>) -> Result<Self> {
        let x1 = quadrature_x1(n_max)?.into_matrix();
        let x2 = quadrature_x2(n_max)?.into_matrix();
        Ok(Self {
            n: number(n_max)?.into_matrix(),
            x1sq: &x1 * &x1,
            x2sq: &x2 * &x2,
            x1,
            x2,
            target: spec.map(|s| projected_target(s, n_max)).transpose()?,
        })
    }

    fn record(&self, rho: &CMatrix, out: &mut BeamResult) {
        let e = |op: &CMatrix| trace_product(op, rho).re;
        out.n_mean.push(e(&self.n));
        out.var_x1.push(e(&self.x1sq) - e(&self.x1).powi(2));
        out.var_x2.push(e(&self.x2sq) - e(&self.x2).powi(2));
        out.fidelity.push(match &self.target {
            Some(t) => t.dotc(&(rho * t)).re,
            None => f64::NAN,
        });
        out.purity.push(trace_product(rho, rho).re);
    }
}

/// Runs the beam and records observables after every atom.
pub fn run_beam(cfg: &BeamConfig) -> Result<BeamResult> {
    run_beam_observed(cfg, |_, _| {})
}

/// [`run_beam`] that also hands the field state after each atom (and the
/// initial state, index 0) to `observer`.
pub fn run_beam_observed<F>(cfg: &BeamConfig, mut observer: F) -> Result<BeamResult>
where
    F: FnMut(usize, &QuantumState),
{
    cfg.validate()?;
    let n_max = cfg.n_max();
    let d = n_max + 1;
    let level = cfg.preparation_level();
    let spec = cfg.spec();
    let obs = Observables::new(n_max, spec.as_ref())?;

    let dispersive;
    let static_h;
    let h: &dyn HamiltonianSource = match &cfg.hamiltonian {
        BeamHamiltonian::Static(eff) => {
            static_h = build_h_eff_static(eff, n_max)?;
            &static_h
        }
        BeamHamiltonian::Dispersive { params, .. } => {
            // Atom-only phases of the Stark frame leave the field state untouched.
            dispersive = build_h_eff_rotating(params, n_max)?;
            &dispersive
        }
    };
    let clock = match &cfg.hamiltonian {
        BeamHamiltonian::Dispersive { clock, .. } => *clock,
        BeamHamiltonian::Static(_) => PhaseClock::PerAtomReset,
    };
    let map = if cfg.kappa > 0.0 {
        AtomMap::Lossy
    } else if h.static_matrix().is_some() || clock == PhaseClock::PerAtomReset {
        let u = propagator(h, 0.0, cfg.tau, if h.static_matrix().is_some() { None } else { cfg.dt })?;
        AtomMap::Fixed(kraus_from_unitary(u.matrix(), level, d))
    } else {
        AtomMap::PerAtom
    };
    let atom0 = atomic_projector(level, level, 2)?.into_matrix();
    let loss = [CollapseChannel::new(on_field(&destroy(n_max)?, 2), cfg.kappa)?];

    let mut result = BeamResult {
        n_mean: Vec::with_capacity(cfg.n_atoms + 1),
        var_x1: Vec::with_capacity(cfg.n_atoms + 1),
        var_x2: Vec::with_capacity(cfg.n_atoms + 1),
        fidelity: Vec::with_capacity(cfg.n_atoms + 1),
        purity: Vec::with_capacity(cfg.n_atoms + 1),
        final_field: cfg.field0.to_mixed(),
        spec,
    };
    let mut rho = cfg.field0.density_matrix();
    obs.record(&rho, &mut result);
    observer(0, &QuantumState::mixed_unchecked(rho.clone(), vec![d]));
    for k in 0..cfg.n_atoms {
        let t0 = match clock {
            PhaseClock::Global => k as f64 * cfg.tau,
            PhaseClock::PerAtomReset => 0.0,
        };
        rho = match &map {
            AtomMap::Fixed(ops) => apply_kraus(ops, &rho),
            AtomMap::PerAtom => {
                let u = propagator(h, t0, t0 + cfg.tau, cfg.dt)?;
                apply_kraus(&kraus_from_unitary(u.matrix(), level, d), &rho)
            }
            AtomMap::Lossy => {
                let joint = QuantumState::mixed_unchecked(atom0.kronecker(&rho), vec![2, d]);
                let opts = MasterOptions { dt: cfg.dt, samples: 1, t_start: t0, ..Default::default() };
                let (out, _) = evolve_master(h, &loss, &joint, t0 + cfg.tau, &opts)?;
                out.partial_trace(Factor::Field)?.density_matrix()
            }
        };
        obs.record(&rho, &mut result);
        let state = QuantumState::mixed_unchecked(rho.clone(), vec![d]);
        observer(k + 1, &state);
    }
    result.final_field = QuantumState::mixed_unchecked(rho, vec![d]);
    Ok(result)
}

/// Per-atom fidelity of `U† ρ U` to the vacuum, with `U = D(α) S(ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedReport {
    pub fidelity: Vec<f64>,
    /// 10-atom moving average is nondecreasing after a 20-atom burn-in.
    pub monotone_after_burn_in: bool,
}

pub const BURN_IN: usize = 20;
pub const SMOOTHING_WINDOW: usize = 10;

/// Whether the `window`-point moving average of `series[burn_in..]` never decreases by more than `tol`.
pub fn smoothed_nondecreasing(series: &[f64], burn_in: usize, window: usize, tol: f64) -> bool {
    if series.len() < burn_in + window {
        return true;
    }
    let tail = &series[burn_in..];
    let avg: Vec<f64> = tail.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect();
    avg.windows(2).all(|w| w[1] >= w[0] - tol)
}

/// Runs the beam and reports the field's approach to the vacuum in the transformed picture.
pub fn transformed_picture_check(cfg: &BeamConfig) -> Result<TransformedReport> {
    let spec = cfg.spec().ok_or_else(|| Error::InvalidParameter("couplings admit no steady state".into()))?;
    let n_max = cfg.n_max();
    let d = n_max + 1;
    // U† applied in a padded space, vacuum component read back.
    let big = 2 * d + 40;
    let u = crate::hilbert::displacement(spec.alpha, big)? * crate::hilbert::squeeze(spec.xi(), big)?;
    let udag_rows = u.matrix().adjoint().view((0, 0), (1, d)).into_owned();
    let mut fidelity = Vec::with_capacity(cfg.n_atoms + 1);
    run_beam_observed(cfg, |_, field| {
        let rho = field.density_matrix();
        let v = &udag_rows * &rho * udag_rows.adjoint();
        fidelity.push(v[(0, 0)].re);
    })?;
    let monotone = smoothed_nondecreasing(&fidelity, BURN_IN, SMOOTHING_WINDOW, 1e-9);
    Ok(TransformedReport { fidelity, monotone_after_burn_in: monotone })
}

/// Unitary wrapper used by tests that need the joint propagator of one atom.
pub fn single_atom_propagator(cfg: &BeamConfig, t0: f64) -> Result<Operator> {
    let n_max = cfg.n_max();
    match &cfg.hamiltonian {
        BeamHamiltonian::Static(eff) => propagator(&build_h_eff_static(eff, n_max)?, t0, t0 + cfg.tau, None),
        BeamHamiltonian::Dispersive { params, .. } => {
            propagator(&build_h_eff_rotating(params, n_max)?, t0, t0 + cfg.tau, cfg.dt)
        }
    }
}

/// Complex coupling helper for configurations written with real numbers.
pub fn real_couplings(lambda1: f64, lambda2: f64, beta: C64) -> EffectiveParams {
    EffectiveParams { lambda1: c(lambda1), lambda2: c(lambda2), beta, stark_g: 0.0, stark_e: 0.0 }
}
