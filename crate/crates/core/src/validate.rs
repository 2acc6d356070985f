//! Self-checks runnable from the command line: closed-form oracles and
//! numerical invariants of the simulators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{evolve_effective_atom, evolve_master, propagate_unitary, CollapseChannel, MasterOptions};
use crate::hilbert::{
    atomic_projector, c, destroy, expect, number, on_atom, on_field, quadrature_x1, quadrature_x2, sigma_minus,
    squeeze, variance, Operator, QuantumState, C64,
};
use crate::model::{
    build_h_transformed, conjugation_residual, design_couplings, effective_params, squeeze_spec, EffectiveParams,
    SqueezeTarget,
};
use crate::squeezedbath::{bath_params, plus_state, run_adiabatic, run_exact, ExactForm, ExactOptions};
use crate::wigner::{default_axes, wigner_grid};
use crate::Result;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_bound(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value.is_finite() && value < bound,
            detail: format!("{value:.3e} < {bound:.0e}"),
        }
    }

    fn from_result(name: &str, r: Result<Self>) -> Self {
        r.unwrap_or_else(|e| Self { name: name.to_string(), passed: false, detail: format!("error: {e}") })
    }
}

/// Tolerance for the closed-form oracles.
pub const ORACLE_TOLERANCE: f64 = 1e-5;

fn max_error(times: &[f64], values: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
    times.iter().zip(values).map(|(t, v)| (v - exact(*t)).abs()).fold(0.0, f64::max)
}

/// ⟨n⟩(t) = e^{−Γt} for a damped single photon.
pub fn damped_cavity_error() -> Result<f64> {
    let (n_max, gamma) = (4, 0.7);
    let h = Operator::zeros(&[n_max + 1]);
    let ch = [CollapseChannel::new(destroy(n_max)?, gamma)?];
    let opts = MasterOptions { samples: 50, ..Default::default() }.observe("n", number(n_max)?);
    let (_, ts) = evolve_master(&h, &ch, &QuantumState::fock(1, n_max)?, 5.0, &opts)?;
    Ok(max_error(&ts.times, ts.channel("n").expect("recorded"), |t| (-gamma * t).exp()))
}

/// ρ_ee(t) = e^{−γt} for spontaneous decay.
pub fn atomic_decay_error() -> Result<f64> {
    let gamma = 0.9;
    let h = Operator::zeros(&[2]);
    let ch = [CollapseChannel::new(sigma_minus(), gamma)?];
    let opts = MasterOptions { samples: 50, ..Default::default() }.observe("pe", atomic_projector(1, 1, 2)?);
    let (_, ts) = evolve_master(&h, &ch, &QuantumState::basis(1, 2)?, 5.0, &opts)?;
    Ok(max_error(&ts.times, ts.channel("pe").expect("recorded"), |t| (-gamma * t).exp()))
}

/// |e,0⟩ → |g,1⟩ after t = π/(2λ) under λ a† σ₋ + h.c.
pub fn jc_transfer_error() -> Result<f64> {
    let (n_max, lambda) = (3, 0.25);
    let h = build_h_transformed(c(lambda), n_max)?;
    let psi0 = QuantumState::basis(1, 2)?.product(&QuantumState::fock(0, n_max)?);
    let t = std::f64::consts::PI / (2.0 * lambda);
    let out = propagate_unitary(&h, &psi0, 0.0, t, Some(1e-3))?;
    let target = QuantumState::basis(0, 2)?.product(&QuantumState::fock(1, n_max)?);
    Ok((1.0 - crate::hilbert::fidelity(&out, &target)?).abs())
}

/// (ΔX₁)², (ΔX₂)² and ⟨n⟩ of S(1)|0⟩ against e^{±2}/4 and sinh² 1.
pub fn squeezed_moments_error() -> Result<f64> {
    let n_max = 100;
    let r = 1.0f64;
    let sv = QuantumState::fock(0, n_max)?.transform(&squeeze(c(r), n_max)?)?;
    let errs = [
        variance(&quadrature_x1(n_max)?, &sv)? - (2.0 * r).exp() / 4.0,
        variance(&quadrature_x2(n_max)?, &sv)? - (-2.0 * r).exp() / 4.0,
        expect(&number(n_max)?, &sv)?.re - r.sinh().powi(2),
    ];
    Ok(errs.iter().map(|e| e.abs()).fold(0.0, f64::max))
}

type Oracle = fn() -> Result<f64>;
type Check = Box<dyn Fn() -> Result<f64>>;

/// The four closed-form checks, each against [`ORACLE_TOLERANCE`].
pub fn closed_form_oracles() -> Vec<CheckOutcome> {
    let checks: [(&str, Oracle); 4] = [
        ("damped cavity <n>(t) = exp(-Gt)", damped_cavity_error),
        ("two-level rho_ee(t) = exp(-gt)", atomic_decay_error),
        ("Jaynes-Cummings pi-pulse transfer", jc_transfer_error),
        ("squeezed vacuum moments", squeezed_moments_error),
    ];
    checks
        .iter()
        .map(|(name, f)| CheckOutcome::from_result(name, f().map(|e| CheckOutcome::from_bound(name, e, ORACLE_TOLERANCE))))
        .collect()
}

/// Largest |Tr ρ − 1| over a lossy atom–cavity run.
pub fn trace_drift() -> Result<f64> {
    let n_max = 5;
    let d = n_max + 1;
    let a = on_field(&destroy(n_max)?, 2);
    let sm = on_atom(&sigma_minus(), d);
    let h = (&a.adjoint() * &sm) * c(0.3) + (&a * &sm.adjoint()) * c(0.3) + (&a + &a.adjoint()) * 0.2;
    let ch = [CollapseChannel::new(a.clone(), 1.5)?, CollapseChannel::new(sm, 0.2)?];
    let opts = MasterOptions { samples: 40, ..Default::default() }.observe("one", Operator::identity(&[2, d]));
    let psi0 = QuantumState::basis(1, 2)?.product(&QuantumState::fock(0, n_max)?);
    let (_, ts) = evolve_master(&h, &ch, &psi0, 20.0, &opts)?;
    Ok(ts.channel("one").expect("recorded").iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
}

/// Largest x² + y² + z² − 1 over exact and reduced bath runs.
pub fn bloch_excess() -> Result<f64> {
    let bp = bath_params(c(0.2), 4.0, 0.01, 1.0, 0.6)?;
    let t_end = 10.0 / bp.gamma_eng();
    let opts = ExactOptions { samples: 100, ..Default::default() };
    let exact = run_exact(&bp, &ExactForm::Bath, &plus_state(), &opts, t_end)?;
    let reduced = run_adiabatic(&bp, &plus_state(), t_end, 100, None)?;
    let mut worst = f64::NEG_INFINITY;
    for ts in [&exact, &reduced] {
        let (x, y, z) = (ts.channel("sx").unwrap(), ts.channel("sy").unwrap(), ts.channel("sz").unwrap());
        for k in 0..ts.len() {
            worst = worst.max(x[k] * x[k] + y[k] * y[k] + z[k] * z[k] - 1.0);
        }
    }
    Ok(worst)
}

/// |∫W − 1| for the vacuum and the r = 1 squeezed vacuum on the default grid.
pub fn wigner_normalization_error() -> Result<f64> {
    let (x, p) = default_axes();
    let vac = QuantumState::fock(0, 30)?;
    let sv = crate::model::target_state(c(0.0), 1.0, 0.0, 60)?;
    let a = wigner_grid(&vac, x, p)?.integral();
    let b = wigner_grid(&sv, x, p)?.integral();
    Ok((a - 1.0).abs().max((b - 1.0).abs()))
}

/// max | |M|² − N(N+1) | over a range of r.
pub fn bath_identity_error() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let r = 0.1 * k as f64;
        let bp = bath_params(c(0.04), 40.0, 0.0, r, 0.3 * k as f64)?;
        let err = (bp.m().norm_sqr() - bp.n() * (bp.n() + 1.0)).abs() / (1.0 + bp.n() * (bp.n() + 1.0));
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Largest (r, φ, α) error of design → effective couplings → squeeze spec over seeded draws.
pub fn design_round_trip_error(draws: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let target = SqueezeTarget {
            r: rng.random_range(0.05..1.5),
            phi: rng.random_range(-3.0..3.0),
            alpha: C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)),
        };
        let g = C64::from_polar(1.0, rng.random_range(-3.0..3.0));
        let design = design_couplings(&target, g, [300.0, -500.0, 700.0], 0.02)?;
        let spec = squeeze_spec(&effective_params(&design.params)?)?;
        let dphi = (spec.phi - target.phi + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        worst = worst.max((spec.r - target.r).abs()).max(dphi.abs()).max((spec.alpha - target.alpha).norm());
    }
    Ok(worst)
}

/// Random β = 0 couplings with |λ1| < |λ2|, drawn from `rng`.
pub fn random_couplings(rng: &mut ChaCha8Rng) -> EffectiveParams {
    let l2 = C64::from_polar(rng.random_range(0.02..0.2), rng.random_range(-3.0..3.0));
    let ratio = rng.random_range(0.0..0.8);
    let l1 = C64::from_polar(ratio * l2.norm(), rng.random_range(-3.0..3.0));
    EffectiveParams { lambda1: l1, lambda2: l2, beta: c(0.0), stark_g: 0.0, stark_e: 0.0 }
}

/// Worst [`conjugation_residual`] over seeded random β = 0 draws.
pub fn conjugation_error(draws: usize, seed: u64, n_max: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        worst = worst.max(conjugation_residual(&random_couplings(&mut rng), n_max)?);
    }
    Ok(worst)
}

/// ⟨σ_z⟩ steady state −1/(2N+1) in the reduced bath.
pub fn steady_inversion_error() -> Result<f64> {
    let r = 0.8f64;
    let n = r.sinh().powi(2);
    let ts = evolve_effective_atom(1.0, n, C64::from_polar(r.sinh() * r.cosh(), 0.4), 0.0, &plus_state(), 80.0, None, 4)?;
    Ok((ts.channel("sz").unwrap().last().unwrap() + 1.0 / (2.0 * n + 1.0)).abs())
}

/// Invariant suite: the closed-form oracles followed by the numerical invariants.
pub fn run_suite() -> Vec<CheckOutcome> {
    let mut out = closed_form_oracles();
    let checks: [(&str, Check, f64); 7] = [
        ("trace drift", Box::new(trace_drift), 1e-7),
        ("Bloch-ball confinement (excess)", Box::new(|| bloch_excess().map(|e| e.max(0.0))), 1e-8),
        ("Wigner normalization", Box::new(wigner_normalization_error), 0.01),
        ("|M|^2 = N(N+1)", Box::new(bath_identity_error), 1e-12),
        ("design_couplings round trip", Box::new(|| design_round_trip_error(20, 11)), 1e-9),
        ("unitary equivalence (beta = 0)", Box::new(|| conjugation_error(5, 3, 20)), 1e-6),
        ("squeezed-bath steady inversion", Box::new(steady_inversion_error), 1e-8),
    ];
    for (name, f, bound) in checks.iter() {
        out.push(CheckOutcome::from_result(name, f().map(|e| CheckOutcome::from_bound(name, e, *bound))));
    }
    out
}
