//! Atom–cavity parameters, the effective two-level couplings and the
//! Hamiltonians of the Λ scheme.
//!
//! The Λ atom has ground states |g⟩, |e⟩ and an excited state |i⟩. Drives
//! Ω1, Ω3 act on g↔i, Ω2, Ω4 on e↔i; the cavity couples to both legs with
//! strength `g`. Eliminating |i⟩ leaves
//! `H = (λ1 a + λ2 a† + β) σ₋ + h.c.` plus Stark terms.

use crate::dynamics::PhasedHamiltonian;
use crate::hilbert::{
    atomic_projector, c, destroy, displacement, number, squeeze, tensor, CVector, Operator, QuantumState,
    C64, E, G, I,
};
use crate::{Error, Result};

/// Lab-frame frequencies; only used to cross-check the detuning definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareFrequencies {
    pub omega_g: f64,
    pub omega_e: f64,
    pub omega_i: f64,
    pub omega_cavity: f64,
    /// ω1..ω4 of the classical drives.
    pub drives: [f64; 4],
}

/// Couplings and detunings of the Λ scheme.
///
/// `omega[k]` is Ω_{k+1}; `big_delta[k]` is Δ_{k+1}; `small_delta[k]` is δ_{k+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub g: C64,
    pub omega: [C64; 4],
    pub big_delta: [f64; 3],
    pub small_delta: [f64; 3],
    pub bare: Option<BareFrequencies>,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.g) || self.omega.iter().any(|z| !finite(*z)) {
            return Err(Error::NonFinite);
        }
        if self.big_delta.iter().chain(&self.small_delta).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        for (k, d) in self.big_delta.iter().enumerate().take(2) {
            if *d == 0.0 {
                return Err(Error::ZeroDetuning(k + 1));
            }
        }
        if self.big_delta[2] == 0.0 && (self.omega[2] != c(0.0) || self.omega[3] != c(0.0)) {
            return Err(Error::ZeroDetuning(3));
        }
        Ok(())
    }

    /// Whether the Ω3/Ω4 pair is switched on.
    pub fn has_displacement_drive(&self) -> bool {
        self.omega[2] != c(0.0) || self.omega[3] != c(0.0)
    }

    /// ϖ_e − ϖ_g.
    pub fn stark_difference(&self) -> f64 {
        let (wg, we) = stark_shifts(self);
        we - wg
    }

    /// Copy with δ1 = −δ2 = −δ3 = ϖ_e − ϖ_g, which makes the effective
    /// Hamiltonian time independent.
    pub fn with_matched_detunings(&self) -> Self {
        let d = self.stark_difference();
        Self { small_delta: [d, -d, -d], ..self.clone() }
    }
}

/// Effective couplings and Stark shifts after eliminating |i⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub lambda1: C64,
    pub lambda2: C64,
    pub beta: C64,
    /// ϖ_g, ϖ_e.
    pub stark_g: f64,
    pub stark_e: f64,
}

/// Field-dependent dispersive shifts χ_g (on σ_gg n) and χ_e (on σ_ee n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveShifts {
    pub chi_g: f64,
    pub chi_e: f64,
}

fn stark_shifts(p: &PhysicalParams) -> (f64, f64) {
    let [o1, o2, o3, o4] = p.omega;
    let [d1, d2, d3] = p.big_delta;
    let ratio = |o: C64, d: f64| if o == c(0.0) { 0.0 } else { o.norm_sqr() / d };
    let wg = ratio(o1, d1) - ratio(o3, d3);
    let we = -ratio(o2, d2) - ratio(o4, d3);
    (wg, we)
}

/// λ1 = gΩ1*/Δ1, λ2 = −g*Ω2/Δ2, β = −Ω3*Ω4/Δ3 and the Stark shifts ϖ_g, ϖ_e.
pub fn effective_params(p: &PhysicalParams) -> Result<EffectiveParams> {
    p.validate()?;
    let [o1, o2, o3, o4] = p.omega;
    let [d1, d2, d3] = p.big_delta;
    let beta = if p.has_displacement_drive() { -o3.conj() * o4 / d3 } else { c(0.0) };
    let (stark_g, stark_e) = stark_shifts(p);
    Ok(EffectiveParams {
        lambda1: p.g * o1.conj() / d1,
        lambda2: -p.g.conj() * o2 / d2,
        beta,
        stark_g,
        stark_e,
    })
}

/// χ_g = −|g|²/Δ2, χ_e = |g|²/Δ1.
pub fn dispersive_shifts(p: &PhysicalParams) -> Result<DispersiveShifts> {
    p.validate()?;
    let g2 = p.g.norm_sqr();
    Ok(DispersiveShifts { chi_g: -g2 / p.big_delta[1], chi_e: g2 / p.big_delta[0] })
}

/// Which effective coupling is larger in magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominant {
    /// |λ2| > |λ1|: atoms prepared in |g⟩ cool the field.
    Lambda2,
    /// |λ1| > |λ2|: the roles of |g⟩ and |e⟩ swap; atoms must start in |e⟩.
    Lambda1,
}

/// Steady state and transformed coupling of the effective interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSpec {
    pub r: f64,
    pub phi: f64,
    pub alpha: C64,
    /// Jaynes–Cummings coupling after the transformation, in the frame where
    /// the prepared level is the lower one.
    pub lambda: C64,
    pub dominant: Dominant,
}

impl SqueezeSpec {
    pub fn xi(&self) -> C64 {
        C64::from_polar(self.r, self.phi)
    }

    /// Level the beam atoms must be prepared in.
    pub fn preparation_level(&self) -> usize {
        match self.dominant {
            Dominant::Lambda2 => G,
            Dominant::Lambda1 => E,
        }
    }

    /// Squeezing angle for [`build_h_bath`] that reproduces the static
    /// effective Hamiltonian exactly: φ − 2 arg λ.
    pub fn bath_angle(&self) -> f64 {
        self.phi - 2.0 * self.lambda.arg()
    }

    /// ⟨n⟩ of the target state: sinh² r + |α|².
    pub fn mean_photons(&self) -> f64 {
        self.r.sinh().powi(2) + self.alpha.norm_sqr()
    }

    /// (ΔX₁)², (ΔX₂)² of the target state: `(cosh 2r ± sinh 2r cos φ)/4`.
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let (ch, sh) = ((2.0 * self.r).cosh(), (2.0 * self.r).sinh() * self.phi.cos());
        ((ch + sh) / 4.0, (ch - sh) / 4.0)
    }
}

/// Derives (r, φ, α, λ) from the effective couplings.
pub fn squeeze_spec(eff: &EffectiveParams) -> Result<SqueezeSpec> {
    let (l1, l2) = (eff.lambda1, eff.lambda2);
    let (m1, m2) = (l1.norm(), l2.norm());
    if m1 == 0.0 && m2 == 0.0 {
        return Err(Error::NoCoupling);
    }
    if (m1 - m2).abs() <= 1e-12 * m1.max(m2) {
        return Err(Error::InfiniteSqueezing);
    }
    // In the λ1-dominant case relabel g ↔ e: λ1' = λ2*, λ2' = λ1*.
    let (dominant, sub, dom) = if m2 > m1 {
        (Dominant::Lambda2, l1, l2)
    } else {
        (Dominant::Lambda1, l2.conj(), l1.conj())
    };
    let ratio = sub / dom;
    let r = ratio.norm().atanh();
    let phi = if sub == c(0.0) { 0.0 } else { (-ratio.conj()).arg() };
    let lambda = dom / r.cosh();
    let alpha = solve_displacement(l1, l2, eff.beta)?;
    Ok(SqueezeSpec { r, phi, alpha, lambda, dominant })
}

/// Solves α λ1 + α* λ2 = −β.
fn solve_displacement(l1: C64, l2: C64, beta: C64) -> Result<C64> {
    if beta == c(0.0) {
        return Ok(c(0.0));
    }
    let det = l1.norm_sqr() - l2.norm_sqr();
    if det.abs() <= 1e-12 * (l1.norm_sqr() + l2.norm_sqr()) {
        return Err(Error::SingularDisplacement);
    }
    // Real form: [a1+a2, b2−b1; b1+b2, a1−a2] (x, y) = (−Re β, −Im β).
    let (a1, b1, a2, b2) = (l1.re, l1.im, l2.re, l2.im);
    let (u, v) = (-beta.re, -beta.im);
    let x = ((a1 - a2) * u - (b2 - b1) * v) / det;
    let y = ((a1 + a2) * v - (b1 + b2) * u) / det;
    Ok(C64::new(x, y))
}

/// One entry of a [`ValidityReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

impl RegimeCheck {
    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

/// Dimensionless ratios that must be small for the effective model to hold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidityReport {
    pub checks: Vec<RegimeCheck>,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(RegimeCheck::passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    fn push(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.checks.push(RegimeCheck { name: name.into(), value, threshold });
    }
}

/// Threshold used by [`check_regime`] unless overridden.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 0.1;

/// Threshold of the report attached by [`design_couplings`].
pub const DESIGN_REGIME_THRESHOLD: f64 = 0.15;

/// Tolerance for the bare-frequency definitions of the detunings.
const DEFINITION_TOLERANCE: f64 = 1e-9;

/// Evaluates the adiabatic-elimination conditions for a mean photon number `n_bar`.
pub fn check_regime(p: &PhysicalParams, n_bar: f64, threshold: f64) -> Result<ValidityReport> {
    let eff = effective_params(p)?;
    let mut report = ValidityReport::default();
    let [d1, d2, d3] = p.big_delta;
    let field = p.g.norm() * n_bar.max(1.0).sqrt();
    report.push("g*sqrt(n)/|D1|", field / d1.abs(), threshold);
    report.push("g*sqrt(n)/|D2|", field / d2.abs(), threshold);
    let drives = [(0, d1), (1, d2), (2, d3), (3, d3)];
    let mut active = Vec::new();
    for (k, d) in drives {
        let o = p.omega[k];
        if o != c(0.0) {
            report.push(format!("|O{}|/|D{}|", k + 1, if k < 2 { k + 1 } else { 3 }), o.norm() / d.abs(), threshold);
            active.push(o.norm());
        }
    }
    for k in 0..2 {
        let o = p.omega[k];
        if o != c(0.0) {
            report.push(format!("|g|/|O{}|", k + 1), p.g.norm() / o.norm(), threshold);
        }
    }
    let mut detunings = vec![(1, d1), (2, d2)];
    if p.has_displacement_drive() {
        detunings.push((3, d3));
    }
    let coupling = active.iter().cloned().fold(field, f64::max);
    for (i, &(k, dk)) in detunings.iter().enumerate() {
        for &(l, dl) in &detunings[i + 1..] {
            let gap = (dk.abs() - dl.abs()).abs();
            let value = if gap == 0.0 { f64::INFINITY } else { coupling / gap };
            report.push(format!("coupling/||D{k}|-|D{l}||"), value, threshold);
        }
    }
    let scale = [eff.lambda1.norm(), eff.lambda2.norm(), eff.beta.norm()].into_iter().fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let [s1, s2, s3] = p.small_delta;
    let stark = eff.stark_e - eff.stark_g;
    report.push("|d1+d2|/lambda", (s1 + s2).abs() / scale, threshold);
    report.push("|d1-(we-wg)|/lambda", (s1 - stark).abs() / scale, threshold);
    if p.has_displacement_drive() {
        report.push("|d1+d3|/lambda", (s1 + s3).abs() / scale, threshold);
    }
    if let Some(b) = p.bare {
        let [w1, w2, w3, w4] = b.drives;
        let (wig, wie) = (b.omega_i - b.omega_g, b.omega_i - b.omega_e);
        let rel = |name: &str, delta: f64, defined: f64, report: &mut ValidityReport| {
            let value = (delta - defined).abs() / delta.abs().max(f64::MIN_POSITIVE);
            report.push(name, value, DEFINITION_TOLERANCE);
        };
        rel("D1 = w - w_ie", d1, b.omega_cavity - wie, &mut report);
        rel("D1 = w1 - w_ig - d1", d1, w1 - wig - s1, &mut report);
        rel("D2 = w_ig - w - d2", d2, wig - b.omega_cavity - s2, &mut report);
        rel("D2 = w_ie - w2", d2, wie - w2, &mut report);
        if p.has_displacement_drive() {
            rel("D3 = w_ig - w3 - d3", d3, wig - w3 - s3, &mut report);
            rel("D3 = w_ie - w4", d3, wie - w4, &mut report);
        }
    }
    Ok(report)
}

/// Requested field state D(α) S(r e^{iφ}) |0⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeTarget {
    pub r: f64,
    pub phi: f64,
    pub alpha: C64,
}

/// Physical parameters produced by [`design_couplings`] and their regime report.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub params: PhysicalParams,
    pub report: ValidityReport,
}

/// Inverts [`squeeze_spec`]: chooses Ω1..Ω4 and matched δ's so that the
/// effective couplings are λ2 = `scale`, λ1 = −scale tanh r e^{−iφ}.
///
/// Fails with [`Error::Unreachable`] when a drive would need |Ω| ≥ |Δ|;
/// milder regime violations are left in the report.
pub fn design_couplings(target: &SqueezeTarget, g: C64, big_delta: [f64; 3], scale: f64) -> Result<Design> {
    if !(target.r >= 0.0) || !target.r.is_finite() {
        return Err(Error::InvalidParameter(format!("r must be finite and ≥ 0, got {}", target.r)));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling scale must be positive, got {scale}")));
    }
    if g == c(0.0) {
        return Err(Error::InvalidParameter("g must be nonzero".into()));
    }
    let [d1, d2, d3] = big_delta;
    for (k, d) in big_delta.iter().enumerate().take(2) {
        if *d == 0.0 {
            return Err(Error::ZeroDetuning(k + 1));
        }
    }
    let lambda2 = c(scale);
    let lambda1 = -C64::from_polar(scale * target.r.tanh(), -target.phi);
    let o1 = (lambda1 * d1 / g).conj();
    let o2 = -lambda2 * d2 / g.conj();
    let beta = -(target.alpha * lambda1 + target.alpha.conj() * lambda2);
    let (o3, o4) = if beta == c(0.0) {
        (c(0.0), c(0.0))
    } else {
        if d3 == 0.0 {
            return Err(Error::ZeroDetuning(3));
        }
        let o3 = c((beta * d3).norm().sqrt());
        (o3, -beta * d3 / o3)
    };
    let params = PhysicalParams {
        g,
        omega: [o1, o2, o3, o4],
        big_delta,
        small_delta: [0.0; 3],
        bare: None,
    }
    .with_matched_detunings();
    let drive_delta = [d1, d2, d3, d3];
    for (k, (o, d)) in params.omega.iter().zip(drive_delta).enumerate() {
        if *o != c(0.0) && o.norm() >= d.abs() {
            return Err(Error::Unreachable(format!(
                "|Ω{}| = {:.4} is not below |Δ| = {:.4}",
                k + 1,
                o.norm(),
                d.abs()
            )));
        }
    }
    let n_bar = target.r.sinh().powi(2) + target.alpha.norm_sqr();
    let report = check_regime(&params, n_bar, DESIGN_REGIME_THRESHOLD)?;
    Ok(Design { params, report })
}

fn field_ops(n_max: usize) -> Result<(Operator, Operator)> {
    let a = destroy(n_max)?;
    let ad = a.adjoint();
    Ok((a, ad))
}

/// Full Λ-atom interaction-picture Hamiltonian on the 3 ⊗ (n_max+1) space.
pub fn build_h_interaction(p: &PhysicalParams, n_max: usize) -> Result<PhasedHamiltonian> {
    p.validate()?;
    let (a, _) = field_ops(n_max)?;
    let d = n_max + 1;
    let id = Operator::identity(&[d]);
    let s_ig = atomic_projector(I, G, 3)?;
    let s_ie = atomic_projector(I, E, 3)?;
    let [o1, o2, o3, o4] = p.omega;
    let [d1, d2, d3] = p.big_delta;
    let [s1, s2, s3] = p.small_delta;
    let ig_a = tensor(&s_ig, &a);
    let ig = tensor(&s_ig, &id);
    let ie_a = tensor(&s_ie, &a);
    let ie = tensor(&s_ie, &id);
    Ok(PhasedHamiltonian::new(Operator::zeros(&[3, d]))
        .with_term(d2 + s2, &ig_a * p.g)
        .with_term(-(d1 + s1), &ig * o1)
        .with_term(d3 + s3, &ig * o3)
        .with_term(-d1, &ie_a * p.g)
        .with_term(d2, &ie * o2)
        .with_term(d3, &ie * o4))
}

/// Effective two-level Hamiltonian with Stark and dispersive terms and
/// residual detunings δ1..δ3, on the 2 ⊗ (n_max+1) space.
pub fn build_h_eff_dispersive(p: &PhysicalParams, n_max: usize) -> Result<PhasedHamiltonian> {
    let eff = effective_params(p)?;
    let chi = dispersive_shifts(p)?;
    let (a, ad) = field_ops(n_max)?;
    let d = n_max + 1;
    let n = number(n_max)?;
    let id = Operator::identity(&[d]);
    let pg = atomic_projector(G, G, 2)?;
    let pe = atomic_projector(E, E, 2)?;
    let sge = atomic_projector(G, E, 2)?;
    let diag_g = &n * c(chi.chi_g) + &id * c(eff.stark_g);
    let diag_e = &n * c(chi.chi_e) + &id * c(eff.stark_e);
    let constant = tensor(&pg, &diag_g) + tensor(&pe, &diag_e);
    let [s1, s2, s3] = p.small_delta;
    Ok(PhasedHamiltonian::new(constant)
        .with_term(s1, tensor(&sge, &a) * eff.lambda1)
        .with_term(-s2, tensor(&sge, &ad) * eff.lambda2)
        .with_term(-s3, tensor(&sge, &id) * eff.beta))
}

/// [`build_h_eff_dispersive`] in the frame rotating with ϖ_g σ_gg + ϖ_e σ_ee.
///
/// With matched detunings every term is static and the result equals the
/// static effective Hamiltonian plus the χ terms.
pub fn build_h_eff_rotating(p: &PhysicalParams, n_max: usize) -> Result<PhasedHamiltonian> {
    let eff = effective_params(p)?;
    let chi = dispersive_shifts(p)?;
    let (a, ad) = field_ops(n_max)?;
    let d = n_max + 1;
    let n = number(n_max)?;
    let id = Operator::identity(&[d]);
    let pg = atomic_projector(G, G, 2)?;
    let pe = atomic_projector(E, E, 2)?;
    let sge = atomic_projector(G, E, 2)?;
    let constant = tensor(&pg, &(&n * c(chi.chi_g))) + tensor(&pe, &(&n * c(chi.chi_e)));
    let stark = eff.stark_e - eff.stark_g;
    let [s1, s2, s3] = p.small_delta;
    Ok(PhasedHamiltonian::new(constant)
        .with_term(s1 - stark, tensor(&sge, &a) * eff.lambda1)
        .with_term(-(s2 + stark), tensor(&sge, &ad) * eff.lambda2)
        .with_term(-(s3 + stark), tensor(&sge, &id) * eff.beta))
}

/// `(λ1 a + λ2 a† + β) σ₋ + h.c.` on the 2 ⊗ (n_max+1) space.
pub fn build_h_eff_static(eff: &EffectiveParams, n_max: usize) -> Result<Operator> {
    let (a, ad) = field_ops(n_max)?;
    let id = Operator::identity(&[n_max + 1]);
    let field = &a * eff.lambda1 + &ad * eff.lambda2 + &id * eff.beta;
    let sm = atomic_projector(G, E, 2)?;
    let x = tensor(&sm, &field);
    Ok(&x + &x.adjoint())
}

/// Jaynes–Cummings form `λ a† σ₋ + λ* a σ₊`.
pub fn build_h_transformed(lambda: C64, n_max: usize) -> Result<Operator> {
    let (_, ad) = field_ops(n_max)?;
    let sm = atomic_projector(G, E, 2)?;
    let x = tensor(&sm, &ad) * lambda;
    Ok(&x + &x.adjoint())
}

/// `λ R a† + λ* R† a` with `R = cosh r σ₋ − e^{iφ} sinh r σ₊`; the atom
/// sees a squeezed vacuum when the field decays fast.
pub fn build_h_bath(lambda: C64, r: f64, phi: f64, n_max: usize) -> Result<Operator> {
    let (_, ad) = field_ops(n_max)?;
    let big_r = atomic_projector(G, E, 2)? * c(r.cosh()) - atomic_projector(E, G, 2)? * C64::from_polar(r.sinh(), phi);
    let x = tensor(&big_r, &ad) * lambda;
    Ok(&x + &x.adjoint())
}

/// Extra Fock levels used when building the target state before truncation.
const TARGET_PADDING: usize = 20;

/// D(α) S(r e^{iφ}) |0⟩ on Fock levels 0..=n_max.
///
/// Built in a larger space and truncated; fails with [`Error::Truncation`]
/// when the discarded weight reaches 1e−6.
pub fn target_state(alpha: C64, r: f64, phi: f64, n_max: usize) -> Result<QuantumState> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("r must be finite and ≥ 0, got {r}")));
    }
    let big = 2 * (n_max + 1) + TARGET_PADDING;
    let u = displacement(alpha, big)? * squeeze(C64::from_polar(r, phi), big)?;
    let column = u.matrix().column(0);
    let kept = CVector::from_iterator(n_max + 1, column.iter().take(n_max + 1).cloned());
    let loss = 1.0 - kept.norm_squared();
    if loss >= 1e-6 {
        return Err(Error::Truncation { loss });
    }
    QuantumState::pure_normalized(kept, vec![n_max + 1])
}

/// U = D(α) S(ξ) embedded as I_atom ⊗ U on the 2 ⊗ (n_max+1) space.
pub fn transformation(spec: &SqueezeSpec, n_max: usize) -> Result<Operator> {
    let u = displacement(spec.alpha, n_max)? * squeeze(spec.xi(), n_max)?;
    Ok(tensor(&Operator::identity(&[2]), &u))
}

/// Largest deviation between `U† H U` and the Jaynes–Cummings form on Fock
/// levels `n ≤ n_max/2`, with `H` the static effective Hamiltonian and
/// `U = D(α) S(ξ)` from [`squeeze_spec`].
///
/// The conjugation is done in a padded Fock space so that the comparison
/// block is free of cutoff artifacts. `S |n⟩` spreads to roughly `n e^{2r}`
/// quanta, so the padding grows with the squeezing.
pub fn conjugation_residual(eff: &EffectiveParams, n_max: usize) -> Result<f64> {
    let spec = squeeze_spec(eff)?;
    let spread = (2.0 * (n_max / 2 + 1 + spec.alpha.norm_sqr().ceil() as usize) as f64 * (2.0 * spec.r).exp()).ceil();
    let big = (4 * n_max).max(spread as usize) + 80;
    let u = displacement(spec.alpha, big)? * squeeze(spec.xi(), big)?;
    let a = destroy(big)?;
    let at = &(&u.adjoint() * &a) * &u;
    let id = Operator::identity(&[big + 1]);
    // Coefficient of σ₋ = |g⟩⟨e| in U† H U.
    let f = &at * eff.lambda1 + &at.adjoint() * eff.lambda2 + &id * eff.beta;
    let expected = match spec.dominant {
        Dominant::Lambda2 => &a.adjoint() * spec.lambda,
        Dominant::Lambda1 => &a * spec.lambda.conj(),
    };
    let mut worst: f64 = 0.0;
    for m in 0..=n_max / 2 {
        for n in 0..=n_max / 2 {
            worst = worst.max((f.get(m, n) - expected.get(m, n)).norm());
        }
    }
    Ok(worst)
}
