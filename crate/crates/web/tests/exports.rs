use std::f64::consts::{FRAC_2_PI, PI};

use cavsqueeze::C64;
use cavsqueeze_web::{bath_rows, beam_rows, view_cutoff, wigner_values, BATH_STRIDE, BEAM_STRIDE, MAX_VIEW_R};

#[test]
fn vacuum_map_is_a_normalised_gaussian() {
    let (extent, res) = (3.0, 61);
    let w = wigner_values(0.0, 0.0, C64::new(0.0, 0.0), extent, res).unwrap();
    assert_eq!(w.len(), res * res);
    let centre = w[(res / 2) * res + res / 2];
    assert!((centre - FRAC_2_PI).abs() < 1e-10, "{centre}");
    let step = 2.0 * extent / (res - 1) as f64;
    let integral: f64 = w.iter().sum::<f64>() * step * step;
    assert!((integral - 1.0).abs() < 1e-3, "{integral}");
}

#[test]
fn displaced_squeezed_map_peaks_at_alpha() {
    let res = 81;
    let w = wigner_values(0.5, 0.0, C64::new(1.0, -0.5), 4.0, res).unwrap();
    let (idx, _) = w.iter().enumerate().fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let step = 8.0 / (res - 1) as f64;
    let (x, p) = (-4.0 + (idx % res) as f64 * step, -4.0 + (idx / res) as f64 * step);
    assert!((x - 1.0).abs() <= step && (p + 0.5).abs() <= step, "peak at ({x}, {p})");
}

#[test]
fn viewer_rejects_large_squeezing() {
    assert!(wigner_values(MAX_VIEW_R + 0.1, 0.0, C64::new(0.0, 0.0), 4.0, 11).is_err());
    assert!(view_cutoff(C64::new(0.0, 0.0), MAX_VIEW_R, 4.0) <= 200);
}

#[test]
fn beam_rows_approach_the_squeezed_target() {
    let (l2, n_atoms) = (0.1, 200);
    let rows = beam_rows(-l2 * 1f64.tanh(), l2, 0.2 / (l2 / 1f64.cosh()), n_atoms, 30).unwrap();
    assert_eq!(rows.len(), (n_atoms + 1) * BEAM_STRIDE);
    let last = &rows[n_atoms * BEAM_STRIDE..];
    assert!((last[0] - 1f64.sinh().powi(2)).abs() < 0.05, "{}", last[0]);
    assert!(last[3] > 0.99 && last[4] > 0.99);
}

#[test]
fn bath_rows_follow_the_closed_form() {
    for phi in [0.0, PI / 2.0, PI] {
        let rows = bath_rows(1.5, phi, 0.04, 40.0, 50).unwrap();
        assert_eq!(rows.len(), 51 * BATH_STRIDE);
        assert_eq!(rows[0], 0.0);
        for row in rows.chunks(BATH_STRIDE) {
            assert!((row[1] - row[2]).abs() < 1e-6, "phi {phi}: {row:?}");
        }
    }
}

#[test]
fn bad_inputs_are_errors() {
    assert!(beam_rows(0.1, 0.1, 3.1, 5, 10).is_ok());
    assert!(beam_rows(-0.05, 0.1, -1.0, 5, 10).is_err());
    assert!(bath_rows(1.0, 0.0, 0.04, -1.0, 10).is_err());
}
