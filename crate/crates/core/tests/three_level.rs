use cavsqueeze::dynamics::propagate_unitary;
use cavsqueeze::hilbert::{Factor, QuantumState, C64};
use cavsqueeze::model::{
    build_h_eff_dispersive, build_h_interaction, design_couplings, effective_params, squeeze_spec, target_state,
    SqueezeTarget,
};

fn max_entry(m: &cavsqueeze::CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// One atom crossing with a coherent field: the Λ atom and its two-level
// reduction leave the field in nearly the same state.
#[test]
fn lambda_atom_matches_effective_two_level_atom() {
    let target = SqueezeTarget { r: 1.0, phi: 0.0, alpha: C64::new(0.0, 0.0) };
    let params = design_couplings(&target, C64::new(1.0, 0.0), [100.0, 120.0, 150.0], 0.1).unwrap().params;
    let tau = 0.2 / squeeze_spec(&effective_params(&params).unwrap()).unwrap().lambda.norm();
    let n_max = 6;
    let field = target_state(C64::new(0.5, 0.0), 0.0, 0.0, n_max).unwrap();
    let full0 = QuantumState::basis(0, 3).unwrap().product(&field);
    let eff0 = QuantumState::basis(0, 2).unwrap().product(&field);
    let reduce = |s: QuantumState| s.to_mixed().partial_trace(Factor::Field).unwrap().density_matrix();
    let full = reduce(propagate_unitary(&build_h_interaction(&params, n_max).unwrap(), &full0, 0.0, tau, None).unwrap());
    let eff = reduce(propagate_unitary(&build_h_eff_dispersive(&params, n_max).unwrap(), &eff0, 0.0, tau, None).unwrap());
    let change = max_entry(&(&eff - field.density_matrix()));
    let gap = max_entry(&(&full - &eff));
    assert!(change > 0.03, "{change}");
    assert!(gap < 5e-3, "{gap}");
}
