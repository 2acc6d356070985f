use cavsqueeze::beam::PhaseClock;
use cavsqueeze::C64;
use cavsqueeze_cli::config::HamiltonianKind;
use cavsqueeze_cli::{parse_config, CliError, Couplings, Experiment};

const MINIMAL: &str = "[beam]\nn_atoms = 200\ntau = 3.1\nlambda1 = 0.1\nlambda2 = 0.076\n";

fn line_of(e: CliError) -> usize {
    match e {
        CliError::Config { line, .. } => line,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn minimal_beam_config_round_trips() {
    let cfg = parse_config(MINIMAL).unwrap();
    let Experiment::Beam(b) = &cfg.experiment else { panic!("not a beam config") };
    assert_eq!(b.n_atoms, 200);
    assert_eq!(b.tau, 3.1);
    assert_eq!(b.couplings, Couplings::Effective { lambda1: C64::new(0.1, 0.0), lambda2: C64::new(0.076, 0.0), beta: C64::new(0.0, 0.0) });
    let text = cfg.to_text();
    let back = parse_config(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_text(), text);
}

#[test]
fn drives_config_round_trips() {
    let text = "output_dir = out/drives\n\n[beam]\nn_atoms = 10\ntau = 2.5/g\ncoupling = drives\ng = 1\n\
                omega1 = 10g\nomega2 = -10g\nomega3 = 0.5-0.25i\nDelta1 = 131.3g\nDelta2 = 100g\nDelta3 = 400\n\
                hamiltonian = dispersive\nclock = reset\nn_max = 20\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.output_dir.as_deref(), Some(std::path::Path::new("out/drives")));
    let Experiment::Beam(b) = &cfg.experiment else { panic!("not a beam config") };
    let Couplings::Drives { omega, big_delta, small_delta, hamiltonian, clock, .. } = &b.couplings else { panic!("not drives") };
    assert_eq!(omega[2], C64::new(0.5, -0.25));
    assert_eq!(omega[3], C64::new(0.0, 0.0));
    assert_eq!(*big_delta, [131.3, 100.0, 400.0]);
    assert_eq!(*small_delta, None);
    assert_eq!(*hamiltonian, HamiltonianKind::Dispersive);
    assert_eq!(*clock, PhaseClock::PerAtomReset);
    assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
}

#[test]
fn every_experiment_round_trips() {
    for text in [
        "[bath]\nphis = 0, 1.5708, 3.1416\nt_end = 2e4\n",
        "[wigner]\nn_atoms = 20\ntau = 3.1\nlambda1 = -0.076\nlambda2 = 0.1\ncheckpoints = 5, 10\n",
        "[design]\nr = 1\nphi = 0.3\nalpha = 0.5+0.5i\nscale = 0.1\n",
        "[validate]\n",
    ] {
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg, "{text}");
    }
}

#[test]
fn unknown_key_names_its_line() {
    let e = parse_config("[beam]\nn_atoms = 200\ntau = 3.1\nfoo = 1\nlambda1 = 0.1\nlambda2 = 0.076\n").unwrap_err();
    let text = e.to_string();
    assert!(text.contains("foo"), "{text}");
    assert_eq!(line_of(e), 4);
}

#[test]
fn empty_file_has_no_experiment() {
    for text in ["", "# nothing here\n\n", "output_dir = x\n"] {
        let e = parse_config(text).unwrap_err();
        assert!(matches!(e, CliError::NoExperiment));
        assert!(e.to_string().contains("no experiment section"));
    }
}

#[test]
fn unit_suffix_misuse_is_rejected() {
    // a rate with a time suffix, a time with a rate suffix, a suffix on a dimensionless value
    let cases = [
        ("[beam]\nn_atoms = 5\ntau = 3.1\nlambda1 = 0.1/g\nlambda2 = 0.076\n", 4),
        ("[beam]\nn_atoms = 5\ntau = 3.1g\nlambda1 = 0.1\nlambda2 = 0.076\n", 3),
        ("[design]\nr = 1g\nscale = 0.1\n", 2),
    ];
    for (text, line) in cases {
        assert_eq!(line_of(parse_config(text).unwrap_err()), line, "{text}");
    }
}

#[test]
fn structural_errors_carry_line_numbers() {
    let cases = [
        ("[beam]\nn_atoms = 5\n[bath]\n", 3),
        ("[beams]\n", 1),
        ("[beam]\nn_atoms = 5\nn_atoms = 6\n", 3),
        ("[beam]\nn_atoms 5\n", 2),
        ("[beam]\nn_atoms = five\ntau = 3.1\nlambda1 = 0.1\nlambda2 = 0.076\n", 2),
    ];
    for (text, line) in cases {
        assert_eq!(line_of(parse_config(text).unwrap_err()), line, "{text}");
    }
}

#[test]
fn missing_required_key_is_an_error() {
    let e = parse_config("[beam]\nn_atoms = 5\nlambda1 = 0.1\nlambda2 = 0.076\n").unwrap_err();
    assert!(e.to_string().contains("tau"), "{e}");
}

#[test]
fn overrides_reach_the_experiment() {
    let cfg = parse_config(MINIMAL).unwrap().with_overrides(Some(12), Some(0.01));
    let Experiment::Beam(b) = cfg.experiment else { panic!("not a beam config") };
    assert_eq!((b.n_max, b.dt), (12, Some(0.01)));
}
