//! A two-level atom coupled to a strongly damped cavity through
//! `λ R a† + λ* R† a`, `R = cosh r σ₋ − e^{iφ} sinh r σ₊`.
//!
//! When Γ ≫ |λ| the cavity can be eliminated and the atom sees an ideal
//! squeezed vacuum with `Γ_eng = 4|λ|²/Γ`, `N = sinh² r`,
//! `M = e^{iφ} sinh r cosh r`. This module runs the joint atom–cavity master
//! equation, the reduced atomic one, and the closed-form ⟨σ_x⟩(t).

use crate::dynamics::{evolve_effective_atom, evolve_master, CollapseChannel, MasterOptions, TimeSeries};
use crate::hilbert::{
    c, destroy, number, on_atom, on_field, sigma_minus, sigma_x, sigma_y, sigma_z, CMatrix, CVector, Operator,
    QuantumState, C64,
};
use crate::model::{build_h_bath, build_h_eff_rotating, PhysicalParams};
use crate::io::{write_csv, Cell};
use crate::{Error, Result};

/// Ratio Γ/|λ| below which the reduced description is flagged.
pub const BAD_CAVITY_ADVISORY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Cavity decay Γ.
    pub gamma_cav: f64,
    /// Atomic decay γ.
    pub gamma_at: f64,
    pub lambda: C64,
    pub r: f64,
    pub phi: f64,
}

impl BathParams {
    /// Γ_eng = 4|λ|²/Γ.
    pub fn gamma_eng(&self) -> f64 {
        4.0 * self.lambda.norm_sqr() / self.gamma_cav
    }

    /// N = sinh² r.
    pub fn n(&self) -> f64 {
        self.r.sinh().powi(2)
    }

    /// M = e^{iφ} sinh r cosh r.
    pub fn m(&self) -> C64 {
        C64::from_polar(self.r.sinh() * self.r.cosh(), self.phi)
    }

    /// Γ/|λ|; ∞ when λ = 0.
    pub fn bad_cavity_ratio(&self) -> f64 {
        self.gamma_cav / self.lambda.norm()
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self { phi, ..*self }
    }
}

pub fn bath_params(lambda: C64, gamma_cav: f64, gamma_at: f64, r: f64, phi: f64) -> Result<BathParams> {
    if !(gamma_cav > 0.0) || !gamma_cav.is_finite() {
        return Err(Error::InvalidParameter(format!("Γ must be positive, got {gamma_cav}")));
    }
    if !(gamma_at >= 0.0) {
        return Err(Error::InvalidParameter(format!("γ must be ≥ 0, got {gamma_at}")));
    }
    if !(r >= 0.0) || !r.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad squeezing r = {r}, φ = {phi}")));
    }
    let bp = BathParams { gamma_cav, gamma_at, lambda, r, phi };
    if bp.bad_cavity_ratio() < BAD_CAVITY_ADVISORY {
        log::warn!("Γ/|λ| = {:.2} is below {BAD_CAVITY_ADVISORY}; adiabatic elimination will be inaccurate", bp.bad_cavity_ratio());
    }
    Ok(bp)
}

/// (|g⟩ + |e⟩)/√2, the +1 eigenstate of σ_x.
pub fn plus_state() -> QuantumState {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    QuantumState::pure(CVector::from_vec(vec![h, h]), vec![2]).expect("normalized")
}

/// Interaction used by [`run_exact`].
#[derive(Debug, Clone, PartialEq)]
pub enum ExactForm {
    /// `λ R a† + h.c.` built from the bath parameters.
    Bath,
    /// Effective couplings with Stark and dispersive terms (rotating frame).
    Dispersive(PhysicalParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOptions {
    /// Field truncation; 3 keeps two guard levels above the {|0⟩, |1⟩} block.
    pub n_max: usize,
    pub samples: usize,
    pub dt: Option<f64>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { n_max: 3, samples: 400, dt: None }
    }
}

/// Joint atom ⊗ field evolution with channels (a, Γ) and (σ₋, γ), field
/// starting in |0⟩. Channels: `sx`, `sy`, `sz`, `n_cavity`, `high_population`
/// (weight above |1⟩) and `min_eig`.
pub fn run_exact(bp: &BathParams, form: &ExactForm, atom0: &QuantumState, opts: &ExactOptions, t_end: f64) -> Result<TimeSeries> {
    if atom0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: atom0.dim() });
    }
    let n_max = opts.n_max;
    let d = n_max + 1;
    let h_static;
    let h_phased;
    let h: &dyn crate::dynamics::HamiltonianSource = match form {
        ExactForm::Bath => {
            h_static = build_h_bath(bp.lambda, bp.r, bp.phi, n_max)?;
            &h_static
        }
        ExactForm::Dispersive(p) => {
            h_phased = build_h_eff_rotating(p, n_max)?;
            &h_phased
        }
    };
    let channels = [
        CollapseChannel::new(on_field(&destroy(n_max)?, 2), bp.gamma_cav)?,
        CollapseChannel::new(on_atom(&sigma_minus(), d), bp.gamma_at)?,
    ];
    let n = number(n_max)?;
    let mut high = CMatrix::zeros(d, d);
    for k in 2..d {
        high[(k, k)] = c(1.0);
    }
    let opts = MasterOptions { dt: opts.dt, samples: opts.samples, track_positivity: true, ..Default::default() }
        .observe("sx", on_atom(&sigma_x(), d))
        .observe("sy", on_atom(&sigma_y(), d))
        .observe("sz", on_atom(&sigma_z(), d))
        .observe("n_cavity", on_field(&n, 2))
        .observe("high_population", on_field(&Operator::from_matrix(high)?, 2));
    let rho0 = atom0.product(&QuantumState::fock(0, n_max)?);
    let (_, series) = evolve_master(h, &channels, &rho0, t_end, &opts)?;
    Ok(series)
}

/// Reduced atomic dynamics in the ideal squeezed vacuum plus decay γ.
pub fn run_adiabatic(bp: &BathParams, atom0: &QuantumState, t_end: f64, samples: usize, dt: Option<f64>) -> Result<TimeSeries> {
    evolve_effective_atom(bp.gamma_eng(), bp.n(), bp.m(), bp.gamma_at, atom0, t_end, dt, samples)
}

/// ⟨σ_x⟩(t) for an atom starting in (|g⟩ + |e⟩)/√2 with γ = 0:
/// `½ e^{−Γ_eng e^{2r} t/2} (1 + cos φ) + ½ e^{−Γ_eng e^{−2r} t/2} (1 − cos φ)`.
pub fn sigma_x_analytic(t: f64, gamma_eng: f64, r: f64, phi: f64) -> f64 {
    let fast = (-gamma_eng * (2.0 * r).exp() * t / 2.0).exp();
    let slow = (-gamma_eng * (-2.0 * r).exp() * t / 2.0).exp();
    0.5 * fast * (1.0 + phi.cos()) + 0.5 * slow * (1.0 - phi.cos())
}

/// Equations of motion of the {|0⟩, |1⟩} field blocks of the joint state.
///
/// `rho` is a joint atom ⊗ field density matrix supported on field levels
/// 0 and 1. Returns (ρ̇₀₀, ρ̇₁₀, ρ̇₁₁) as 2×2 atomic matrices.
pub fn subspace_rates(bp: &BathParams, rho: &CMatrix) -> Result<(CMatrix, CMatrix, CMatrix)> {
    if !rho.nrows().is_multiple_of(2) || rho.nrows() < 4 {
        return Err(Error::InvalidSpace("need a 2 ⊗ (n_max+1) state with n_max ≥ 1".into()));
    }
    let d = rho.nrows() / 2;
    let block = |m: usize, n: usize| -> CMatrix {
        CMatrix::from_fn(2, 2, |a, b| rho[(a * d + m, b * d + n)])
    };
    let (r00, r10, r11) = (block(0, 0), block(1, 0), block(1, 1));
    let r01 = block(0, 1);
    let big_r = (sigma_minus() * c(bp.r.cosh()) - sigma_minus().adjoint() * C64::from_polar(bp.r.sinh(), bp.phi)).into_matrix();
    let lr = &big_r * bp.lambda;
    let lrd = lr.adjoint();
    let sm = sigma_minus().into_matrix();
    let sp = sm.adjoint();
    let pe = &sp * &sm;
    let l_at = |x: &CMatrix| -> CMatrix { (&sm * x * &sp * c(2.0) - &pe * x - x * &pe) * c(bp.gamma_at / 2.0) };
    let i = C64::new(0.0, 1.0);
    let g = bp.gamma_cav;
    let d00 = (&lrd * &r10 - &r01 * &lr) * -i + &r11 * c(g) + l_at(&r00);
    let d10 = (&lr * &r00 - &r11 * &lr) * -i - &r10 * c(g / 2.0) + l_at(&r10);
    let d11 = (&lr * &r01 - &r10 * &lrd) * -i - &r11 * c(g) + l_at(&r11);
    Ok((d00, d10, d11))
}

/// One row of [`phase_sensitivity_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    pub phi: f64,
    pub exact_vs_adiabatic: f64,
    pub exact_vs_analytic: f64,
    pub adiabatic_vs_analytic: f64,
    /// First time the exact ⟨σ_x⟩ reaches 0.5 (linear interpolation); None if it never does.
    pub half_time: Option<f64>,
    pub exact: TimeSeries,
    pub adiabatic: TimeSeries,
    /// Closed-form ⟨σ_x⟩ at the exact run's sample times.
    pub analytic: Vec<f64>,
}

/// Columns of the per-φ time-series CSV.
pub const BATH_COLUMNS: [&str; 10] = [
    "t",
    "sx_exact",
    "sy_exact",
    "sz_exact",
    "sx_adiabatic",
    "sy_adiabatic",
    "sz_adiabatic",
    "sx_analytic",
    "n_cavity",
    "high_population",
];

/// Columns of the deviation summary CSV, one row per φ.
pub const BATH_SUMMARY_COLUMNS: [&str; 8] = [
    "phi",
    "gamma_eng",
    "r",
    "exact_vs_adiabatic",
    "exact_vs_analytic",
    "adiabatic_vs_analytic",
    "half_time",
    "max_n_cavity",
];

impl PhaseRow {
    /// Exact, adiabatic and closed-form series on the exact run's time grid.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let ex = |name| self.exact.channel(name).ok_or_else(|| Error::InvalidParameter(format!("missing channel {name}")));
        let ad = |name| self.adiabatic.channel(name).ok_or_else(|| Error::InvalidParameter(format!("missing channel {name}")));
        if self.adiabatic.len() != self.exact.len() || self.analytic.len() != self.exact.len() {
            return Err(Error::InvalidParameter("exact and adiabatic runs are sampled differently".into()));
        }
        let cols = [ex("sx")?, ex("sy")?, ex("sz")?, ad("sx")?, ad("sy")?, ad("sz")?, &self.analytic, ex("n_cavity")?, ex("high_population")?];
        let rows = self.exact.times.iter().enumerate().map(|(k, &t)| {
            std::iter::once(Cell::Real(t)).chain(cols.iter().map(|c| Cell::Real(c[k]))).collect::<Vec<_>>()
        });
        write_csv(out, &BATH_COLUMNS, rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub gamma_eng: f64,
    pub r: f64,
    pub rows: Vec<PhaseRow>,
    /// Half times increase with φ across the rows (φ sorted ascending in [0, π]).
    pub ordering_holds: bool,
}

impl PhaseReport {
    /// One [`BATH_SUMMARY_COLUMNS`] row per φ; `half_time` is NaN when ⟨σ_x⟩ never reaches 0.5.
    pub fn write_summary<W: std::io::Write>(&self, out: W) -> Result<()> {
        let rows = self.rows.iter().map(|row| {
            let n_cav = row.exact.channel("n_cavity").map_or(f64::NAN, |v| v.iter().cloned().fold(0.0, f64::max));
            vec![
                Cell::Real(row.phi),
                Cell::Real(self.gamma_eng),
                Cell::Real(self.r),
                Cell::Real(row.exact_vs_adiabatic),
                Cell::Real(row.exact_vs_analytic),
                Cell::Real(row.adiabatic_vs_analytic),
                Cell::Real(row.half_time.unwrap_or(f64::NAN)),
                Cell::Real(n_cav),
            ]
        });
        write_csv(out, &BATH_SUMMARY_COLUMNS, rows)
    }
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// First crossing of `level` from above.
pub fn crossing_time(times: &[f64], values: &[f64], level: f64) -> Option<f64> {
    for k in 1..values.len() {
        let (v0, v1) = (values[k - 1], values[k]);
        if v0 > level && v1 <= level {
            let f = (v0 - level) / (v0 - v1);
            return Some(times[k - 1] + f * (times[k] - times[k - 1]));
        }
    }
    None
}

/// Runs exact, adiabatic and analytic ⟨σ_x⟩ for each φ from (|g⟩ + |e⟩)/√2.
pub fn phase_sensitivity_report(bp: &BathParams, phis: &[f64], t_end: f64, opts: &ExactOptions) -> Result<PhaseReport> {
    let mut rows = Vec::with_capacity(phis.len());
    for &phi in phis {
        let p = bp.with_phi(phi);
        let exact = run_exact(&p, &ExactForm::Bath, &plus_state(), opts, t_end)?;
        let adiabatic = run_adiabatic(&p, &plus_state(), t_end, opts.samples, None)?;
        let sx_exact = exact.channel("sx").expect("recorded");
        let sx_adiabatic = adiabatic.channel("sx").expect("recorded");
        let analytic: Vec<f64> = exact.times.iter().map(|&t| sigma_x_analytic(t, p.gamma_eng(), p.r, phi)).collect();
        rows.push(PhaseRow {
            phi,
            exact_vs_adiabatic: max_deviation(sx_exact, sx_adiabatic),
            exact_vs_analytic: max_deviation(sx_exact, &analytic),
            adiabatic_vs_analytic: max_deviation(sx_adiabatic, &analytic),
            half_time: crossing_time(&exact.times, sx_exact, 0.5),
            exact,
            adiabatic,
            analytic,
        });
    }
    let mut ordered: Vec<&PhaseRow> = rows.iter().collect();
    ordered.sort_by(|a, b| a.phi.cos().partial_cmp(&b.phi.cos()).expect("finite").reverse());
    let ordering_holds = ordered.windows(2).all(|w| match (w[0].half_time, w[1].half_time) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    });
    Ok(PhaseReport { gamma_eng: bp.gamma_eng(), r: bp.r, rows, ordering_holds })
}
