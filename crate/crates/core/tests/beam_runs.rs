use approx::assert_abs_diff_eq;
use cavsqueeze::beam::{
    engineered_rate, real_couplings, run_beam, smoothed_nondecreasing, transformed_picture_check, BeamConfig,
    BeamHamiltonian, PhaseClock, BURN_IN, SMOOTHING_WINDOW,
};
use cavsqueeze::io::Axis;
use cavsqueeze::model::{design_couplings, effective_params, squeeze_spec, target_state, SqueezeTarget};
use cavsqueeze::wigner::beam_snapshots;
use cavsqueeze::C64;

const N_MAX: usize = 30;

fn r1_config(n_atoms: usize) -> BeamConfig {
    let l2 = 0.1;
    let lambda = l2 / 1f64.cosh();
    BeamConfig::new(real_couplings(-l2 * 1f64.tanh(), l2, C64::new(0.0, 0.0)), 0.2 / lambda, n_atoms, N_MAX).unwrap()
}

#[test]
fn steady_state_forgets_initial_field() {
    let from_vacuum = run_beam(&r1_config(400)).unwrap();
    let mut cfg = r1_config(400);
    cfg.field0 = target_state(C64::new(0.5, 0.0), 0.0, 0.0, N_MAX).unwrap();
    let from_coherent = run_beam(&cfg).unwrap();
    assert!(from_coherent.fidelity[0] < 0.9);
    let (a, b) = (from_vacuum.fidelity[400], from_coherent.fidelity[400]);
    assert!((a - b).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn purity_and_fidelity_along_the_run() {
    let res = run_beam(&r1_config(400)).unwrap();
    assert_eq!(res.len(), 401);
    assert!(res.purity.iter().all(|&p| p <= 1.0 + 1e-9));
    assert!(*res.purity.last().unwrap() > 0.96);
    assert!(smoothed_nondecreasing(&res.fidelity, BURN_IN, SMOOTHING_WINDOW, 1e-9));
}

#[test]
fn transformed_field_relaxes_to_vacuum() {
    let report = transformed_picture_check(&r1_config(200)).unwrap();
    assert_abs_diff_eq!(report.fidelity[0], 1.0 / 1f64.cosh(), epsilon = 1e-9);
    assert!(report.fidelity[200] > 0.98, "{}", report.fidelity[200]);
    assert!(report.monotone_after_burn_in);
}

#[test]
fn engineered_rate_at_beam_parameters() {
    let tau = 3.1;
    let lambda = 0.2 / tau;
    assert_abs_diff_eq!(engineered_rate(1.0 / tau, lambda, tau).unwrap(), 0.04 / 3.1, epsilon = 1e-15);
}

// Ω1 = Ω2 = 10g, same-sign detunings.
fn ten_g_design() -> cavsqueeze::model::PhysicalParams {
    let target = SqueezeTarget { r: 1.0, phi: 0.0, alpha: C64::new(0.0, 0.0) };
    let scale = 0.1;
    let d2 = 10.0 / scale;
    let d1 = 10.0 / (scale * 1f64.tanh());
    let design = design_couplings(&target, C64::new(1.0, 0.0), [d1, d2, 150.0], scale).unwrap();
    assert!(design.params.omega[..2].iter().all(|o| (o.norm() - 10.0).abs() < 1e-9));
    design.params
}

#[test]
fn dispersive_beam_tracks_static_beam_at_ten_g_drives() {
    let params = ten_g_design();
    let eff = effective_params(&params).unwrap();
    let tau = 0.2 / squeeze_spec(&eff).unwrap().lambda.norm();
    let fixed = run_beam(&BeamConfig::new(eff, tau, 200, N_MAX).unwrap()).unwrap();
    for clock in [PhaseClock::Global, PhaseClock::PerAtomReset] {
        let mut cfg = BeamConfig::new(eff, tau, 200, N_MAX).unwrap();
        cfg.hamiltonian = BeamHamiltonian::Dispersive { params: params.clone(), clock };
        let full = run_beam(&cfg).unwrap();
        let rel = (full.n_mean[200] - fixed.n_mean[200]).abs() / fixed.n_mean[200];
        assert!(rel < 0.05, "{clock:?}: {} vs {} ({rel})", full.n_mean[200], fixed.n_mean[200]);
    }
}

#[test]
fn snapshots_squeeze_monotonically() {
    let cfg = r1_config(200);
    let x = Axis::new(-6.0, 6.0, 121).unwrap();
    let p = Axis::new(-1.5, 1.5, 61).unwrap();
    let snaps = beam_snapshots(&cfg, &[50, 100, 200], x, p).unwrap();
    assert_eq!(snaps.iter().map(|(k, _)| *k).collect::<Vec<_>>(), vec![0, 50, 100, 200]);
    assert_abs_diff_eq!(snaps[0].1.max_value(), 2.0 / std::f64::consts::PI, epsilon = 1e-9);
    let minor: Vec<f64> = snaps.iter().map(|(_, g)| g.moments().principal_variances().0).collect();
    assert!(minor.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{minor:?}");
    let m = snaps[3].1.moments();
    let ratio = m.var_x / m.var_p;
    assert!((ratio / 4f64.exp() - 1.0).abs() < 0.05, "{ratio}");
}
