use cavsqueeze::model::{design_couplings, effective_params, squeeze_spec, SqueezeTarget};
use cavsqueeze::squeezedbath::{bath_params, plus_state, run_exact, BathParams, ExactForm, ExactOptions};
use cavsqueeze::C64;
use std::f64::consts::PI;

fn bath(phi: f64) -> BathParams {
    bath_params(C64::new(0.04, 0.0), 40.0, 0.0, 1.5, phi).unwrap()
}

fn t_end(bp: &BathParams) -> f64 {
    5.0 / (bp.gamma_eng() * (-2.0 * bp.r).exp())
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

const CHANNELS: [&str; 5] = ["sx", "sy", "sz", "n_cavity", "high_population"];

#[test]
fn halving_the_step_changes_nothing() {
    let bp = bath(PI / 2.0);
    let dt = 0.05 / bp.gamma_cav;
    let run = |dt| run_exact(&bp, &ExactForm::Bath, &plus_state(), &ExactOptions { dt: Some(dt), samples: 100, ..Default::default() }, t_end(&bp)).unwrap();
    let (coarse, fine) = (run(dt), run(dt / 2.0));
    for name in CHANNELS {
        let gap = max_gap(coarse.channel(name).unwrap(), fine.channel(name).unwrap());
        assert!(gap < 1e-6, "{name}: {gap}");
    }
}

#[test]
fn field_stays_near_vacuum_and_state_stays_physical() {
    for phi in [0.0, PI / 2.0, PI] {
        let bp = bath(phi);
        let ts = run_exact(&bp, &ExactForm::Bath, &plus_state(), &ExactOptions::default(), t_end(&bp)).unwrap();
        let peak = |name| ts.channel(name).unwrap().iter().cloned().fold(f64::MIN, f64::max);
        assert!(peak("high_population") < 1e-3);
        assert!(peak("n_cavity") < 0.05);
        assert!(ts.channel("min_eig").unwrap().iter().all(|&e| e >= -1e-6));
        let (sx, sy, sz) = (ts.channel("sx").unwrap(), ts.channel("sy").unwrap(), ts.channel("sz").unwrap());
        for k in 0..ts.len() {
            assert!(sx[k].powi(2) + sy[k].powi(2) + sz[k].powi(2) <= 1.0 + 1e-8);
        }
    }
}

// Γ_eng ∝ 1/Γ: at matched Γ_eng t the curves coincide.
#[test]
fn doubling_cavity_decay_rescales_time() {
    let base = bath(0.0);
    let doubled = bath_params(base.lambda, 2.0 * base.gamma_cav, 0.0, base.r, 0.0).unwrap();
    assert!((doubled.gamma_eng() - base.gamma_eng() / 2.0).abs() < 1e-18);
    let opts = ExactOptions { samples: 200, ..Default::default() };
    let horizon = 5.0 / (base.gamma_eng() * (2.0 * base.r).exp());
    let a = run_exact(&base, &ExactForm::Bath, &plus_state(), &opts, horizon).unwrap();
    let b = run_exact(&doubled, &ExactForm::Bath, &plus_state(), &opts, 2.0 * horizon).unwrap();
    let gap = max_gap(a.channel("sx").unwrap(), b.channel("sx").unwrap());
    assert!(gap < 0.02, "{gap}");
}

// The same bath realised through driven Λ-atom couplings (dispersive terms
// included) reproduces the λ R a† + h.c. form.
#[test]
fn dispersive_couplings_reproduce_the_bath() {
    let (r, lambda) = (1.5, 0.04);
    let target = SqueezeTarget { r, phi: 0.0, alpha: C64::new(0.0, 0.0) };
    let params = design_couplings(&target, C64::new(1.0, 0.0), [100.0, 120.0, 150.0], lambda * r.cosh()).unwrap().params;
    let spec = squeeze_spec(&effective_params(&params).unwrap()).unwrap();
    assert!((spec.lambda.norm() - lambda).abs() < 1e-12);
    let bp = bath_params(spec.lambda, 40.0, 0.0, spec.r, spec.bath_angle()).unwrap();
    let horizon = 5.0 / (bp.gamma_eng() * (2.0 * r).exp());
    let opts = ExactOptions { samples: 100, ..Default::default() };
    let a = run_exact(&bp, &ExactForm::Bath, &plus_state(), &opts, horizon).unwrap();
    let b = run_exact(&bp, &ExactForm::Dispersive(params), &plus_state(), &opts, horizon).unwrap();
    let gap = max_gap(a.channel("sx").unwrap(), b.channel("sx").unwrap());
    assert!(gap < 0.02, "{gap}");
}
