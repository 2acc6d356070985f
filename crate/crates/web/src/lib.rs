//! Browser bindings: target-state Wigner maps, beam runs and squeezed-bath
//! decay curves. Every export returns a flat `Float64Array`.

use cavsqueeze::beam::{real_couplings, run_beam, BeamConfig};
use cavsqueeze::io::Axis;
use cavsqueeze::model::target_state;
use cavsqueeze::squeezedbath::{bath_params, plus_state, run_adiabatic, sigma_x_analytic};
use cavsqueeze::wigner::wigner_grid;
use cavsqueeze::{Error, C64};
use wasm_bindgen::prelude::*;

/// Largest squeezing the Wigner view accepts; beyond it the basis gets too large for a page.
pub const MAX_VIEW_R: f64 = 1.5;

/// Fock cutoff that holds `D(α) S(r)|0⟩` and the displayed window.
pub fn view_cutoff(alpha: C64, r: f64, extent: f64) -> usize {
    let spread = 2.0 * alpha.norm_sqr() + 8.0 * (2.0 * r).exp() + extent * extent;
    (spread.ceil() as usize).clamp(20, 200)
}

/// W(x, p) of `D(α) S(r, φ)|0⟩` on a `resolution`² grid over [−extent, extent]²,
/// row-major with p as the row index.
pub fn wigner_values(r: f64, phi: f64, alpha: C64, extent: f64, resolution: usize) -> Result<Vec<f64>, Error> {
    if r > MAX_VIEW_R {
        return Err(Error::InvalidParameter(format!("r = {r} is above the viewer limit {MAX_VIEW_R}")));
    }
    let state = target_state(alpha, r, phi, view_cutoff(alpha, r, extent))?;
    let axis = Axis::new(-extent, extent, resolution)?;
    let grid = wigner_grid(&state, axis, axis)?;
    Ok(grid.values.into_iter().flatten().collect())
}

/// Values per atom in [`beam_rows`]: n_mean, var_x1, var_x2, fidelity, purity.
pub const BEAM_STRIDE: usize = 5;

/// Runs the static-coupling beam from the vacuum; one row per atom, index 0 the initial field.
pub fn beam_rows(lambda1: f64, lambda2: f64, tau: f64, n_atoms: usize, n_max: usize) -> Result<Vec<f64>, Error> {
    let cfg = BeamConfig::new(real_couplings(lambda1, lambda2, C64::new(0.0, 0.0)), tau, n_atoms, n_max)?;
    let res = run_beam(&cfg)?;
    let mut out = Vec::with_capacity(res.len() * BEAM_STRIDE);
    for k in 0..res.len() {
        out.extend([res.n_mean[k], res.var_x1[k], res.var_x2[k], res.fidelity[k], res.purity[k]]);
    }
    Ok(out)
}

/// Values per sample in [`bath_rows`]: t, ⟨σ_x⟩ from the reduced atomic equation, closed form.
pub const BATH_STRIDE: usize = 3;

/// ⟨σ_x⟩(t) of an atom starting in |+⟩ in the engineered squeezed vacuum, over
/// five slow decay times.
pub fn bath_rows(r: f64, phi: f64, lambda: f64, gamma_cav: f64, samples: usize) -> Result<Vec<f64>, Error> {
    let bp = bath_params(C64::new(lambda, 0.0), gamma_cav, 0.0, r, phi)?;
    let t_end = 5.0 / (bp.gamma_eng() * (-2.0 * r).exp());
    let ts = run_adiabatic(&bp, &plus_state(), t_end, samples, None)?;
    let sx = ts.channel("sx").ok_or_else(|| Error::InvalidParameter("missing sx channel".into()))?;
    let mut out = Vec::with_capacity(ts.times.len() * BATH_STRIDE);
    for (t, s) in ts.times.iter().zip(sx) {
        out.extend([*t, *s, sigma_x_analytic(*t, bp.gamma_eng(), r, phi)]);
    }
    Ok(out)
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = targetWigner)]
pub fn target_wigner(r: f64, phi: f64, alpha_re: f64, alpha_im: f64, extent: f64, resolution: usize) -> Result<Vec<f64>, JsError> {
    wigner_values(r, phi, C64::new(alpha_re, alpha_im), extent, resolution).map_err(js)
}

#[wasm_bindgen(js_name = beamSeries)]
pub fn beam_series(lambda1: f64, lambda2: f64, tau: f64, n_atoms: usize, n_max: usize) -> Result<Vec<f64>, JsError> {
    beam_rows(lambda1, lambda2, tau, n_atoms, n_max).map_err(js)
}

#[wasm_bindgen(js_name = bathCurves)]
pub fn bath_curves(r: f64, phi: f64, lambda: f64, gamma_cav: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    bath_rows(r, phi, lambda, gamma_cav, samples).map_err(js)
}
