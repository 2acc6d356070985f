//! Wigner function of a single-mode field state.
//!
//! `W(x, p) = (2/π) Tr[ρ D(α) Π D†(α)]` with `α = x + ip` and Π the photon
//! parity, normalized so that `∫∫ W dx dp = 1`. The vacuum is
//! `(2/π) e^{−2(x² + p²)}`. Since `D(α) Π D†(α) = D(2α) Π`, every grid point
//! is a sum over exact displacement matrix elements (associated Laguerre
//! polynomials), with no truncation of D itself.

use std::io::{BufRead, Write};

use crate::beam::{run_beam_observed, BeamConfig};
use crate::hilbert::{QuantumState, C64};
use crate::io::{read_grid, write_grid, Axis};
use crate::{Error, Result};

/// Sampled Wigner function; `values[j][i]` is W(x_i, p_j).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Axis,
    pub p_axis: Axis,
    pub values: Vec<Vec<f64>>,
    pub cell_area: f64,
    /// Largest imaginary residue encountered while summing.
    pub max_imaginary: f64,
    /// Set when the grid reaches beyond |α|² = n_max/2.
    pub warning: Option<String>,
}

/// Phase-space moments of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMoments {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

impl GridMoments {
    /// Eigenvalues of the 2×2 covariance, smaller first.
    pub fn principal_variances(&self) -> (f64, f64) {
        let tr = self.var_x + self.var_p;
        let det = self.var_x * self.var_p - self.cov_xp * self.cov_xp;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }
}

impl WignerGrid {
    /// Σ W · cell area.
    pub fn integral(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.cell_area
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn moments(&self) -> GridMoments {
        let xs = self.x_axis.values();
        let ps = self.p_axis.values();
        let mut s = [0.0; 6];
        for (j, row) in self.values.iter().enumerate() {
            for (i, w) in row.iter().enumerate() {
                let (x, p) = (xs[i], ps[j]);
                s[0] += w;
                s[1] += w * x;
                s[2] += w * p;
                s[3] += w * x * x;
                s[4] += w * p * p;
                s[5] += w * x * p;
            }
        }
        let norm = s[0];
        let (mx, mp) = (s[1] / norm, s[2] / norm);
        GridMoments {
            norm: norm * self.cell_area,
            mean_x: mx,
            mean_p: mp,
            var_x: s[3] / norm - mx * mx,
            var_p: s[4] / norm - mp * mp,
            cov_xp: s[5] / norm - mx * mp,
        }
    }

    /// ∫ W dp as a function of x.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = self.p_axis.step();
        (0..self.x_axis.count).map(|i| self.values.iter().map(|row| row[i]).sum::<f64>() * dp).collect()
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        write_grid(out, self.x_axis, self.p_axis, &self.values)
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let (x_axis, p_axis, values) = read_grid(input)?;
        Ok(Self {
            cell_area: x_axis.step() * p_axis.step(),
            x_axis,
            p_axis,
            values,
            max_imaginary: 0.0,
            warning: None,
        })
    }
}

/// Square grid over `[−extent, extent]²` with `resolution` points per axis.
pub fn square_axes(extent: f64, resolution: usize) -> Result<(Axis, Axis)> {
    let a = Axis::new(-extent, extent, resolution)?;
    Ok((a, a))
}

/// Default 81 × 81 grid on [−4, 4]².
pub fn default_axes() -> (Axis, Axis) {
    square_axes(4.0, 81).expect("valid default axes")
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ⟨m|D(β)|n⟩ for all m, n < d, row-major in m.
pub fn displacement_elements(beta: C64, d: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    let x = beta.norm_sqr();
    if x == 0.0 {
        for n in 0..d {
            out[n * d + n] = C64::new(1.0, 0.0);
        }
        return out;
    }
    let (ln_abs, arg) = (beta.norm().ln(), beta.arg());
    for k in 0..d {
        // n runs over 0..d−k; prefactor sqrt(n!/(n+k)!) |β|^k e^{−x/2}.
        let mut pref = (k as f64 * ln_abs - x / 2.0 - 0.5 * ln_factorial(k)).exp();
        let (mut l_prev, mut l_cur) = (0.0, 1.0);
        let phase = C64::from_polar(1.0, k as f64 * arg);
        // ⟨n|D(β)|n+k⟩ = sqrt(n!/(n+k)!) (−β*)^k e^{−x/2} L_n^{(k)}(x).
        let back_phase = C64::from_polar(1.0, k as f64 * (std::f64::consts::PI - arg));
        for n in 0..d - k {
            let value = pref * l_cur;
            out[(n + k) * d + n] = phase * value;
            if k > 0 {
                out[n * d + n + k] = back_phase * value;
            }
            let nf = n as f64;
            let l_next = ((2.0 * nf + 1.0 + k as f64 - x) * l_cur - (nf + k as f64) * l_prev) / (nf + 1.0);
            l_prev = l_cur;
            l_cur = l_next;
            pref *= ((nf + 1.0) / (nf + 1.0 + k as f64)).sqrt();
        }
    }
    out
}

/// Samples W on the given axes. `rho` must be a single-mode state.
pub fn wigner_grid(rho: &QuantumState, x_axis: Axis, p_axis: Axis) -> Result<WignerGrid> {
    if rho.dims().len() != 1 {
        return Err(Error::InvalidSpace(format!("Wigner function needs a single field factor, got {:?}", rho.dims())));
    }
    let m = rho.density_matrix();
    let d = m.nrows();
    let n_max = d - 1;
    let reach = x_axis.min.abs().max(x_axis.max.abs()).powi(2) + p_axis.min.abs().max(p_axis.max.abs()).powi(2);
    let warning = (reach > n_max as f64 / 2.0).then(|| {
        let text = format!("grid reaches |α|² = {reach:.2} beyond n_max/2 = {:.1}; values there are unreliable", n_max as f64 / 2.0);
        log::warn!("{text}");
        text
    });
    let mut values = Vec::with_capacity(p_axis.count);
    let mut max_imaginary: f64 = 0.0;
    for p in p_axis.values() {
        let mut row = Vec::with_capacity(x_axis.count);
        for x in x_axis.values() {
            let disp = displacement_elements(C64::new(2.0 * x, 2.0 * p), d);
            // Tr[ρ D(2α) Π] = Σ_{m,n} ρ_{nm} (−1)^n ⟨m|D(2α)|n⟩.
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..d {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let mut col = C64::new(0.0, 0.0);
                for mm in 0..d {
                    col += m[(n, mm)] * disp[mm * d + n];
                }
                acc += col * sign;
            }
            let w = acc * (2.0 / std::f64::consts::PI);
            max_imaginary = max_imaginary.max(w.im.abs());
            row.push(w.re);
        }
        values.push(row);
    }
    Ok(WignerGrid {
        cell_area: x_axis.step() * p_axis.step(),
        x_axis,
        p_axis,
        values,
        max_imaginary,
        warning,
    })
}

/// Runs the beam and samples W of the field initially and after each checkpoint atom count.
pub fn beam_snapshots(cfg: &BeamConfig, checkpoints: &[usize], x_axis: Axis, p_axis: Axis) -> Result<Vec<(usize, WignerGrid)>> {
    if let Some(&bad) = checkpoints.iter().find(|&&k| k > cfg.n_atoms) {
        return Err(Error::InvalidParameter(format!("checkpoint {bad} exceeds n_atoms = {}", cfg.n_atoms)));
    }
    let mut wanted: Vec<usize> = std::iter::once(0).chain(checkpoints.iter().cloned()).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut states = Vec::new();
    run_beam_observed(cfg, |k, field| {
        if wanted.contains(&k) {
            states.push((k, field.clone()));
        }
    })?;
    states.into_iter().map(|(k, s)| Ok((k, wigner_grid(&s, x_axis, p_axis)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{displacement, expm, max_abs, quadrature_x1, quadrature_x2, variance, destroy, expect, CMatrix};
    use crate::model::target_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn displacement_elements_match_matrix_exponential() {
        let beta = C64::new(0.8, -0.6);
        let d = 12;
        let exact = displacement_elements(beta, d);
        let big = displacement(beta, 80).unwrap();
        for m in 0..d {
            for n in 0..d {
                assert!((exact[m * d + n] - big.get(m, n)).norm() < 1e-10, "({m},{n})");
            }
        }
        let zero = displacement_elements(C64::new(0.0, 0.0), 3);
        assert_eq!(zero[4], C64::new(1.0, 0.0));
        assert_eq!(zero[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn vacuum_is_gaussian() {
        let vac = QuantumState::fock(0, 10).unwrap();
        let (x, p) = square_axes(2.0, 21).unwrap();
        let g = wigner_grid(&vac, x, p).unwrap();
        for (j, pv) in p.values().iter().enumerate() {
            for (i, xv) in x.values().iter().enumerate() {
                let expected = 2.0 / std::f64::consts::PI * (-2.0 * (xv * xv + pv * pv)).exp();
                assert_abs_diff_eq!(g.values[j][i], expected, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(g.max_value(), 2.0 / std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn fock_one_is_negative_at_origin() {
        let one = QuantumState::fock(1, 6).unwrap();
        let (x, p) = square_axes(1.0, 3).unwrap();
        let g = wigner_grid(&one, x, p).unwrap();
        assert_abs_diff_eq!(g.values[1][1], -2.0 / std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_vacuum_normalization_and_axes() {
        // The r = 1 state has amplitude tanh(1)^{n/2} at level n; below n = 140
        // the cut-off tail no longer shows up at the 1e-9 level.
        let n_max = 140;
        let sv = target_state(C64::new(0.0, 0.0), 1.0, 0.0, n_max).unwrap();
        let (x, p) = default_axes();
        let g = wigner_grid(&sv.to_mixed(), x, p).unwrap();
        assert!(g.max_imaginary < 1e-10);
        assert_abs_diff_eq!(g.integral(), 1.0, epsilon = 0.01);
        assert!(g.min_value() > -1e-9, "{}", g.min_value());
        let m = g.moments();
        let ratio = (4.0f64).exp();
        assert_abs_diff_eq!(m.var_x / m.var_p, ratio, epsilon = 0.05 * ratio);
        let v2 = variance(&quadrature_x2(n_max).unwrap(), &sv).unwrap();
        assert_abs_diff_eq!(m.var_p, v2, epsilon = 0.01 * v2);
        // the ±4 window clips the stretched tail (about 3σ)
        let v1 = variance(&quadrature_x1(n_max).unwrap(), &sv).unwrap();
        assert_abs_diff_eq!(m.var_x, v1, epsilon = 0.05 * v1);
    }

    #[test]
    fn displaced_grid_is_shifted() {
        let n_max = 30;
        let alpha = C64::new(0.5, -0.25);
        let sv = target_state(C64::new(0.0, 0.0), 0.4, 0.7, n_max).unwrap();
        let shifted = sv.transform(&displacement(alpha, n_max).unwrap()).unwrap();
        let x = Axis::new(-2.0, 2.0, 17).unwrap();
        let p = Axis::new(-2.0, 2.0, 17).unwrap();
        let a = wigner_grid(&shifted, x, p).unwrap();
        let xs = Axis::new(-2.5, 1.5, 17).unwrap();
        let ps = Axis::new(-1.75, 2.25, 17).unwrap();
        let b = wigner_grid(&sv, xs, ps).unwrap();
        for j in 0..17 {
            for i in 0..17 {
                assert!((a.values[j][i] - b.values[j][i]).abs() < 1e-3);
            }
        }
        let mean = expect(&destroy(n_max).unwrap(), &shifted).unwrap();
        assert!((mean - alpha).norm() < 1e-6);
    }

    #[test]
    fn matrix_form_agrees_with_parity_definition() {
        // Tr[ρ D(α) Π D†(α)] with D from a large truncated exponential.
        let psi = target_state(C64::new(0.3, 0.2), 0.5, 0.3, 20).unwrap();
        let rho = psi.density_matrix();
        let alpha = C64::new(0.4, -0.7);
        let big = 90;
        let a = destroy(big).unwrap();
        let dgen = &a.adjoint() * alpha - &a * alpha.conj();
        let dm = expm(&dgen).unwrap();
        let parity = CMatrix::from_diagonal(&crate::CVector::from_fn(big + 1, |n, _| {
            C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }));
        let kernel = dm.matrix() * parity * dm.matrix().adjoint();
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..21 {
            for j in 0..21 {
                tr += rho[(i, j)] * kernel[(j, i)];
            }
        }
        let x = Axis::new(alpha.re - 0.1, alpha.re + 0.1, 3).unwrap();
        let p = Axis::new(alpha.im - 0.1, alpha.im + 0.1, 3).unwrap();
        let g = wigner_grid(&psi, x, p).unwrap();
        assert_abs_diff_eq!(g.values[1][1], tr.re * 2.0 / std::f64::consts::PI, epsilon = 1e-9);
        assert!(max_abs(&(dm.matrix() * dm.matrix().adjoint() - CMatrix::identity(big + 1, big + 1))) < 1e-8);
    }

    #[test]
    fn grid_file_round_trip() {
        let vac = QuantumState::fock(0, 4).unwrap();
        let (x, p) = square_axes(1.0, 5).unwrap();
        let g = wigner_grid(&vac, x, p).unwrap();
        let mut buf = Vec::new();
        g.write(&mut buf).unwrap();
        let back = WignerGrid::read(buf.as_slice()).unwrap();
        assert_eq!(back.x_axis, g.x_axis);
        for (r1, r2) in back.values.iter().zip(&g.values) {
            for (a, b) in r1.iter().zip(r2) {
                assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn warns_beyond_reliable_region() {
        let vac = QuantumState::fock(0, 4).unwrap();
        let (x, p) = square_axes(4.0, 3).unwrap();
        assert!(wigner_grid(&vac, x, p).unwrap().warning.is_some());
        let composite = vac.product(&QuantumState::fock(0, 2).unwrap());
        assert!(wigner_grid(&composite, x, p).is_err());
    }
}
