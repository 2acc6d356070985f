//! Fixed-step fourth-order Runge–Kutta evolution: Schrödinger, von Neumann
//! and Lindblad equations.
//!
//! The default step is `dt = min(0.05/‖H‖, 0.05/max rate)` with the Frobenius
//! norm standing in for the spectral norm. A user-supplied step must satisfy
//! `dt · max(‖H‖, max rate) ≤ 0.1`.
//!
//! For time-independent generators on small spaces (d ≤ 16) the RK4 one-step
//! map is assembled as a d²×d² matrix and raised to the number of steps per
//! sample by repeated squaring. The trajectory is the same as stepping RK4 at
//! that `dt` (up to rounding), which makes runs of 10⁸–10⁹ steps affordable.

use crate::hilbert::{c, max_abs, min_eigenvalue, trace_product, CMatrix, CVector, Operator, QuantumState, C64};
use crate::{Error, Result};

/// Anything that yields a Hamiltonian matrix at time `t`.
pub trait HamiltonianSource {
    fn dims(&self) -> &[usize];
    fn matrix_at(&self, t: f64) -> CMatrix;
    /// Upper bound on ‖H(t)‖ over all t.
    fn norm_bound(&self) -> f64;
    /// `Some(H)` when the Hamiltonian does not depend on time.
    fn static_matrix(&self) -> Option<CMatrix>;

    fn dim(&self) -> usize {
        self.dims().iter().product()
    }
}

impl HamiltonianSource for Operator {
    fn dims(&self) -> &[usize] {
        Operator::dims(self)
    }

    fn matrix_at(&self, _t: f64) -> CMatrix {
        self.matrix().clone()
    }

    fn norm_bound(&self) -> f64 {
        self.norm()
    }

    fn static_matrix(&self) -> Option<CMatrix> {
        Some(self.matrix().clone())
    }
}

/// One oscillating term `e^{iωt} T + h.c.`.
#[derive(Debug, Clone)]
pub struct PhasedTerm {
    pub frequency: f64,
    pub op: CMatrix,
}

/// `H(t) = C + Σ_k (e^{iω_k t} T_k + h.c.)`, with `C` Hermitian.
#[derive(Debug, Clone)]
pub struct PhasedHamiltonian {
    dims: Vec<usize>,
    constant: CMatrix,
    terms: Vec<PhasedTerm>,
}

/// Frequencies below this are treated as exactly zero.
const STATIC_FREQUENCY: f64 = 1e-12;

impl PhasedHamiltonian {
    pub fn new(constant: Operator) -> Self {
        let dims = constant.dims().to_vec();
        Self { dims, constant: constant.into_matrix(), terms: Vec::new() }
    }

    /// Adds `e^{iωt} T + h.c.`. Terms with zero amplitude are dropped.
    pub fn with_term(mut self, frequency: f64, op: Operator) -> Self {
        assert_eq!(op.dims(), self.dims.as_slice(), "term dimensions differ");
        if max_abs(op.matrix()) > 0.0 {
            self.terms.push(PhasedTerm { frequency, op: op.into_matrix() });
        }
        self
    }

    pub fn terms(&self) -> &[PhasedTerm] {
        &self.terms
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.frequency.abs() <= STATIC_FREQUENCY)
    }

    pub fn at(&self, t: f64) -> Operator {
        Operator::from_parts(self.matrix_at(t), self.dims.clone())
    }
}

impl HamiltonianSource for PhasedHamiltonian {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        let mut h = self.constant.clone();
        for term in &self.terms {
            let phase = if term.frequency.abs() <= STATIC_FREQUENCY {
                c(1.0)
            } else {
                C64::from_polar(1.0, term.frequency * t)
            };
            let x = &term.op * phase;
            h += &x;
            h += x.adjoint();
        }
        h
    }

    fn norm_bound(&self) -> f64 {
        self.constant.norm() + 2.0 * self.terms.iter().map(|t| t.op.norm()).sum::<f64>()
    }

    fn static_matrix(&self) -> Option<CMatrix> {
        self.is_static().then(|| self.matrix_at(0.0))
    }
}

/// Dissipation channel `rate · D[op]`.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    op: Operator,
    rate: f64,
}

impl CollapseChannel {
    pub fn new(op: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("collapse rate must be ≥ 0, got {rate}")));
        }
        Ok(Self { op, rate })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Sampled observables on a strictly increasing time grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn with_channels<S: AsRef<str>>(names: &[S]) -> Self {
        Self {
            times: Vec::new(),
            channels: names.iter().map(|n| (n.as_ref().to_string(), Vec::new())).collect(),
        }
    }

    pub fn push(&mut self, t: f64, values: &[f64]) {
        assert_eq!(values.len(), self.channels.len(), "one value per channel");
        if let Some(&last) = self.times.last() {
            assert!(t > last, "sample times must increase");
        }
        self.times.push(t);
        for ((_, series), &v) in self.channels.iter_mut().zip(values) {
            series.push(v);
        }
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_consistent(&self) -> bool {
        self.channels.iter().all(|(_, v)| v.len() == self.times.len())
            && self.times.windows(2).all(|w| w[1] > w[0])
    }
}

/// `dt = min(0.05/‖H‖, 0.05/max rate)`.
pub fn default_dt(h_norm: f64, max_rate: f64) -> f64 {
    let scale = h_norm.max(max_rate);
    if scale > 0.0 {
        0.05 / scale
    } else {
        f64::INFINITY
    }
}

fn check_step(dt: f64, scale: f64) -> Result<()> {
    let product = dt * scale;
    if !(dt > 0.0) || product > 0.1 + 1e-12 {
        return Err(Error::StepTooLarge { dt, product });
    }
    Ok(())
}

/// Uniform grid: `samples` intervals, each split into an integer number of steps no larger than `dt_max`.
fn grid(duration: f64, samples: usize, dt_max: f64) -> (f64, u64) {
    let samples = samples.max(1);
    let interval = duration / samples as f64;
    let per_sample = if dt_max.is_finite() { (interval / dt_max).ceil().max(1.0) as u64 } else { 1 };
    (interval / per_sample as f64, per_sample)
}

fn resolve_dt(dt: Option<f64>, scale: f64) -> Result<f64> {
    match dt {
        Some(dt) => {
            check_step(dt, scale)?;
            Ok(dt)
        }
        None => Ok(default_dt(scale, 0.0)),
    }
}

fn rk4<F>(f: F, t: f64, y: &CMatrix, dt: f64) -> CMatrix
where
    F: Fn(f64, &CMatrix) -> CMatrix,
{
    let h = c(dt);
    let half = c(dt / 2.0);
    let k1 = f(t, y);
    let k2 = f(t + dt / 2.0, &(y + &k1 * half));
    let k3 = f(t + dt / 2.0, &(y + &k2 * half));
    let k4 = f(t + dt, &(y + &k3 * h));
    y + (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0)
}

/// −i H y, used for state vectors (as n×1 matrices) and propagators.
fn schrodinger<'a>(h: &'a dyn HamiltonianSource, static_h: &Option<CMatrix>) -> impl Fn(f64, &CMatrix) -> CMatrix + 'a {
    let static_h = static_h.clone();
    move |t, y| {
        let m = match &static_h {
            Some(m) => m * y,
            None => h.matrix_at(t) * y,
        };
        m * C64::new(0.0, -1.0)
    }
}

/// Evolves a state under `H(t)` from `t0` to `t_end` with RK4.
///
/// Pure states follow the Schrödinger equation and fail if the norm drifts by
/// more than 1e−8; density matrices follow the von Neumann equation.
pub fn propagate_unitary(
    h: &dyn HamiltonianSource,
    state0: &QuantumState,
    t0: f64,
    t_end: f64,
    dt: Option<f64>,
) -> Result<QuantumState> {
    if state0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: state0.dim() });
    }
    let duration = t_end - t0;
    if duration == 0.0 {
        return Ok(state0.clone());
    }
    if duration < 0.0 {
        return Err(Error::InvalidParameter("t_end precedes t0".into()));
    }
    let dt = resolve_dt(dt, h.norm_bound())?;
    let (dt, steps) = grid(duration, 1, dt);
    match state0 {
        QuantumState::Pure { vector, dims } => {
            let static_h = h.static_matrix();
            let f = schrodinger(h, &static_h);
            let mut y = CMatrix::from_column_slice(vector.len(), 1, vector.as_slice());
            for k in 0..steps {
                y = rk4(&f, t0 + k as f64 * dt, &y, dt);
            }
            let v = CVector::from_column_slice(y.as_slice());
            let drift = (v.norm_squared() - vector.norm_squared()).abs();
            if drift > 1e-8 {
                return Err(Error::NormDrift(drift));
            }
            Ok(QuantumState::Pure { vector: v, dims: dims.clone() })
        }
        QuantumState::Mixed { matrix, dims } => {
            let gen = Lindblad::new(h, &[])?;
            let rho = integrate(&gen, matrix.clone(), t0, duration, 1, dt, |_, _| Ok(()))?;
            Ok(QuantumState::mixed_unchecked(rho, dims.clone()))
        }
    }
}

/// Time-ordered propagator U(t1, t0) by RK4 on the matrix equation.
pub fn propagator(h: &dyn HamiltonianSource, t0: f64, t1: f64, dt: Option<f64>) -> Result<Operator> {
    let d = h.dim();
    let dims = h.dims().to_vec();
    if let Some(m) = h.static_matrix() {
        if dt.is_none() {
            let gen = Operator::from_parts(m * C64::new(0.0, -(t1 - t0)), dims);
            return gen.expm();
        }
    }
    let dt = resolve_dt(dt, h.norm_bound())?;
    let (dt, steps) = grid(t1 - t0, 1, dt);
    let static_h = h.static_matrix();
    let f = schrodinger(h, &static_h);
    let mut u = CMatrix::identity(d, d);
    for k in 0..steps {
        u = rk4(&f, t0 + k as f64 * dt, &u, dt);
    }
    let drift = max_abs(&(u.adjoint() * &u - CMatrix::identity(d, d)));
    if drift > 1e-8 {
        return Err(Error::NormDrift(drift));
    }
    Ok(Operator::from_parts(u, dims))
}

/// A linear generator ρ̇ = 𝓛(t)ρ acting on d×d matrices.
pub trait Liouvillian {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, rho: &CMatrix) -> CMatrix;
    fn is_static(&self) -> bool;
    /// Largest frequency scale, for step-size selection.
    fn scale(&self) -> f64;
}

/// Lindblad generator `−i[H, ρ] + Σ rate (LρL† − ½{L†L, ρ})`.
pub struct Lindblad<'a> {
    h: &'a dyn HamiltonianSource,
    static_h: Option<CMatrix>,
    ops: Vec<(CMatrix, CMatrix, f64)>,
    decay: CMatrix,
    max_rate: f64,
}

impl<'a> Lindblad<'a> {
    pub fn new(h: &'a dyn HamiltonianSource, channels: &[CollapseChannel]) -> Result<Self> {
        let d = h.dim();
        let mut decay = CMatrix::zeros(d, d);
        let mut ops = Vec::new();
        let mut max_rate: f64 = 0.0;
        for ch in channels {
            if ch.op.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: ch.op.dim() });
            }
            if ch.rate == 0.0 {
                continue;
            }
            let l = ch.op.matrix().clone();
            let ldl = l.adjoint() * &l;
            decay += &ldl * c(0.5 * ch.rate);
            ops.push((l.clone(), l.adjoint(), ch.rate));
            max_rate = max_rate.max(ch.rate);
        }
        Ok(Self { h, static_h: h.static_matrix(), ops, decay, max_rate })
    }
}

impl Liouvillian for Lindblad<'_> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn apply(&self, t: f64, rho: &CMatrix) -> CMatrix {
        // Non-Hermitian form: −i(K ρ − ρ K†) + Σ rate L ρ L†, K = H − (i/2) Σ rate L†L.
        let h = match &self.static_h {
            Some(m) => m.clone(),
            None => self.h.matrix_at(t),
        };
        let k = h - &self.decay * C64::new(0.0, 1.0);
        let mut out = (&k * rho - rho * k.adjoint()) * C64::new(0.0, -1.0);
        for (l, ld, rate) in &self.ops {
            out += l * rho * ld * c(*rate);
        }
        out
    }

    fn is_static(&self) -> bool {
        self.static_h.is_some()
    }

    fn scale(&self) -> f64 {
        self.h.norm_bound().max(self.max_rate)
    }
}

const STEP_MAP_MAX_DIM: usize = 16;

fn vec_index(i: usize, j: usize, d: usize) -> usize {
    i + j * d
}

/// Matrix of the RK4 one-step map on column-stacked d×d matrices.
fn step_map(gen: &dyn Liouvillian, dt: f64) -> CMatrix {
    let d = gen.dim();
    let mut p = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = c(1.0);
            let out = rk4(|t, y| gen.apply(t, y), 0.0, &e, dt);
            let col = vec_index(i, j, d);
            for (row, z) in out.as_slice().iter().enumerate() {
                p[(row, col)] = *z;
            }
        }
    }
    p
}

fn matrix_power(m: &CMatrix, mut k: u64) -> CMatrix {
    let n = m.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Integrates from `t_start` over `duration` in `samples` uniform intervals.
/// `on_sample` sees the state at `t_start` and after every interval.
fn integrate<F>(
    gen: &dyn Liouvillian,
    rho0: CMatrix,
    t_start: f64,
    duration: f64,
    samples: usize,
    dt: f64,
    mut on_sample: F,
) -> Result<CMatrix>
where
    F: FnMut(f64, &CMatrix) -> Result<()>,
{
    let d = gen.dim();
    let samples = samples.max(1);
    let (dt, per_sample) = grid(duration, samples, dt);
    let trace0 = rho0.trace();
    let check = |rho: &CMatrix| -> Result<()> {
        let drift = (rho.trace() - trace0).norm();
        if drift > 1e-7 {
            return Err(Error::TraceDrift(drift));
        }
        let herm = max_abs(&(rho - rho.adjoint()));
        if herm > 1e-7 {
            return Err(Error::HermiticityDrift(herm));
        }
        Ok(())
    };
    on_sample(t_start, &rho0)?;
    let mut rho = rho0;
    if gen.is_static() && d <= STEP_MAP_MAX_DIM {
        let sample_map = matrix_power(&step_map(gen, dt), per_sample);
        for s in 1..=samples {
            let v = &sample_map * CVector::from_column_slice(rho.as_slice());
            rho = CMatrix::from_column_slice(d, d, v.as_slice());
            check(&rho)?;
            on_sample(t_start + s as f64 * per_sample as f64 * dt, &rho)?;
        }
    } else {
        let mut t = t_start;
        for s in 1..=samples {
            for _ in 0..per_sample {
                rho = rk4(|t, y| gen.apply(t, y), t, &rho, dt);
                t += dt;
            }
            check(&rho)?;
            on_sample(t_start + s as f64 * per_sample as f64 * dt, &rho)?;
        }
    }
    Ok(rho)
}

/// Sampling and step control for [`evolve_master`].
#[derive(Debug, Clone)]
pub struct MasterOptions {
    /// Step size; `None` selects the default rule.
    pub dt: Option<f64>,
    /// Number of uniform sampling intervals over the run.
    pub samples: usize,
    /// Observables recorded as Re Tr(ρ O) at each sample.
    pub observables: Vec<(String, Operator)>,
    /// Also record the smallest eigenvalue of ρ as channel `min_eig`.
    pub track_positivity: bool,
    pub t_start: f64,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self { dt: None, samples: 100, observables: Vec::new(), track_positivity: false, t_start: 0.0 }
    }
}

impl MasterOptions {
    pub fn observe(mut self, name: &str, op: Operator) -> Self {
        self.observables.push((name.to_string(), op));
        self
    }
}

/// Lindblad evolution of `rho0` (pure states are promoted) up to `t_end`.
pub fn evolve_master(
    h: &dyn HamiltonianSource,
    channels: &[CollapseChannel],
    rho0: &QuantumState,
    t_end: f64,
    opts: &MasterOptions,
) -> Result<(QuantumState, TimeSeries)> {
    if rho0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.dim() });
    }
    for (_, op) in &opts.observables {
        if op.dim() != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: op.dim() });
        }
    }
    let duration = t_end - opts.t_start;
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must exceed the start time, got {t_end}")));
    }
    let gen = Lindblad::new(h, channels)?;
    let dt = match opts.dt {
        Some(dt) => {
            check_step(dt, gen.scale())?;
            dt
        }
        None => default_dt(h.norm_bound(), gen.max_rate),
    };
    let mut names: Vec<String> = opts.observables.iter().map(|(n, _)| n.clone()).collect();
    if opts.track_positivity {
        names.push("min_eig".into());
    }
    let mut series = TimeSeries::with_channels(&names);
    let rho = integrate(&gen, rho0.density_matrix(), opts.t_start, duration, opts.samples, dt, |t, rho| {
        let mut values: Vec<f64> =
            opts.observables.iter().map(|(_, op)| trace_product(op.matrix(), rho).re).collect();
        if opts.track_positivity {
            values.push(min_eigenvalue(rho));
        }
        series.push(t, &values);
        Ok(())
    })?;
    Ok((QuantumState::mixed_unchecked(rho, rho0.dims().to_vec()), series))
}

/// Two-level squeezed-vacuum generator with an additional vacuum decay γ.
#[derive(Debug, Clone)]
pub struct SqueezedBathGenerator {
    pub gamma_eng: f64,
    pub n: f64,
    pub m: C64,
    pub gamma: f64,
}

impl SqueezedBathGenerator {
    pub fn new(gamma_eng: f64, n: f64, m: C64, gamma: f64) -> Result<Self> {
        if !(gamma_eng >= 0.0) || !(gamma >= 0.0) {
            return Err(Error::InvalidParameter("decay rates must be ≥ 0".into()));
        }
        if !(n >= 0.0) {
            return Err(Error::InvalidParameter(format!("N must be ≥ 0, got {n}")));
        }
        let bound = n * (n + 1.0);
        if m.norm_sqr() > bound * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::UnphysicalBath { m_sq: m.norm_sqr(), bound });
        }
        Ok(Self { gamma_eng, n, m, gamma })
    }
}

impl Liouvillian for SqueezedBathGenerator {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, _t: f64, rho: &CMatrix) -> CMatrix {
        let sm = crate::hilbert::sigma_minus().into_matrix();
        let sp = sm.adjoint();
        let pe = &sp * &sm;
        let pg = &sm * &sp;
        let lind = |l: &CMatrix, ld: &CMatrix, ldl: &CMatrix| -> CMatrix {
            l * rho * ld * c(2.0) - ldl * rho - rho * ldl
        };
        let down = lind(&sm, &sp, &pe);
        let up = lind(&sp, &sm, &pg);
        let anomalous = &sp * rho * &sp * (self.m * -2.0) - &sm * rho * &sm * (self.m.conj() * 2.0);
        let bath = down.clone() * c(self.n + 1.0) + up * c(self.n) + anomalous;
        bath * c(self.gamma_eng / 2.0) + down * c(self.gamma / 2.0)
    }

    fn is_static(&self) -> bool {
        true
    }

    fn scale(&self) -> f64 {
        (self.gamma_eng * (2.0 * self.n + 1.0 + 2.0 * self.m.norm())).max(self.gamma)
    }
}

/// Evolves a two-level atom in a (possibly ideal) squeezed vacuum with
/// parameters (Γ_eng, N, M) plus ordinary decay γ; records Bloch components
/// `sx`, `sy`, `sz`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_effective_atom(
    gamma_eng: f64,
    n: f64,
    m: C64,
    gamma: f64,
    rho_at0: &QuantumState,
    t_end: f64,
    dt: Option<f64>,
    samples: usize,
) -> Result<TimeSeries> {
    if rho_at0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho_at0.dim() });
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    let gen = SqueezedBathGenerator::new(gamma_eng, n, m, gamma)?;
    let dt = match dt {
        Some(dt) => {
            check_step(dt, gen.scale())?;
            dt
        }
        None => default_dt(gen.scale(), 0.0),
    };
    let (sx, sy, sz) = (
        crate::hilbert::sigma_x().into_matrix(),
        crate::hilbert::sigma_y().into_matrix(),
        crate::hilbert::sigma_z().into_matrix(),
    );
    let mut series = TimeSeries::with_channels(&["sx", "sy", "sz"]);
    integrate(&gen, rho_at0.density_matrix(), 0.0, t_end, samples, dt, |t, rho| {
        series.push(
            t,
            &[trace_product(&sx, rho).re, trace_product(&sy, rho).re, trace_product(&sz, rho).re],
        );
        Ok(())
    })?;
    Ok(series)
}

/// Applies the generator once; used for finite-difference and equation-of-motion checks.
pub fn generator_action(gen: &dyn Liouvillian, t: f64, rho: &CMatrix) -> CMatrix {
    gen.apply(t, rho)
}
