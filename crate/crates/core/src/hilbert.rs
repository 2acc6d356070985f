//! Dense operators and states on truncated atom ⊗ field Hilbert spaces.
//!
//! Every composite object carries its factor dimensions (`dims`). The
//! ordering convention is atom ⊗ field throughout the crate.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Ground state index of the atom.
pub const G: usize = 0;
/// Excited (upper lower-manifold) state index.
pub const E: usize = 1;
/// Auxiliary state of the Λ system.
pub const I: usize = 2;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Truncation of the composite space: Fock states `0..=n_max` for the field
/// and a two- or three-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    n_max: usize,
    atom_levels: usize,
}

impl HilbertConfig {
    pub fn new(n_max: usize, atom_levels: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidSpace(format!("n_max must be ≥ 1, got {n_max}")));
        }
        if !(2..=3).contains(&atom_levels) {
            return Err(Error::InvalidSpace(format!(
                "atom_levels must be 2 or 3, got {atom_levels}"
            )));
        }
        Ok(Self { n_max, atom_levels })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn atom_levels(&self) -> usize {
        self.atom_levels
    }

    pub fn field_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.atom_levels * self.field_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.atom_levels, self.field_dim()]
    }
}

/// A square complex matrix tagged with its tensor factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if dims.is_empty() || product != mat.nrows() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: product });
        }
        Ok(Self { mat, dims })
    }

    /// Single-factor operator.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, vec![n])
    }

    pub(crate) fn from_parts(mat: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.nrows());
        Self { mat, dims }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self { mat: CMatrix::zeros(n, n), dims: dims.to_vec() }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self { mat: CMatrix::identity(n, n), dims: dims.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint(), dims: self.dims.clone() }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { mat: &self.mat * z, dims: self.dims.clone() }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        max_abs(&(self.mat.adjoint() * &self.mat - CMatrix::identity(n, n))) <= tol
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator::from_parts(&self.mat * &other.mat - &other.mat * &self.mat, self.dims.clone())
    }

    pub fn tensor(&self, other: &Operator) -> Operator {
        tensor(self, other)
    }

    pub fn expm(&self) -> Result<Operator> {
        expm(self)
    }

    /// Frobenius norm, used as a cheap upper bound on the spectral norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v
    }
}

fn same_dims(a: &Operator, b: &Operator) {
    assert_eq!(a.dims, b.dims, "operator factor dimensions differ");
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        same_dims(self, rhs);
        Operator::from_parts(&self.mat + &rhs.mat, self.dims.clone())
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        same_dims(self, rhs);
        Operator::from_parts(&self.mat - &rhs.mat, self.dims.clone())
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        same_dims(self, rhs);
        Operator::from_parts(&self.mat * &rhs.mat, self.dims.clone())
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, z: C64) -> Operator {
        self.scale(z)
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, z: C64) -> Operator {
        self.scale(z)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, x: f64) -> Operator {
        self.scale(c(x))
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(c(-1.0))
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Field annihilation operator on Fock states `0..=n_max`.
pub fn destroy(n_max: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(Error::InvalidSpace(format!("n_max must be ≥ 1, got {n_max}")));
    }
    let d = n_max + 1;
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    Ok(Operator::from_parts(m, vec![d]))
}

pub fn create(n_max: usize) -> Result<Operator> {
    Ok(destroy(n_max)?.adjoint())
}

pub fn number(n_max: usize) -> Result<Operator> {
    let d = n_max + 1;
    if n_max < 1 {
        return Err(Error::InvalidSpace(format!("n_max must be ≥ 1, got {n_max}")));
    }
    let m = CMatrix::from_diagonal(&CVector::from_fn(d, |n, _| c(n as f64)));
    Ok(Operator::from_parts(m, vec![d]))
}

/// X₁ = (a + a†)/2.
pub fn quadrature_x1(n_max: usize) -> Result<Operator> {
    let a = destroy(n_max)?;
    Ok((&a + &a.adjoint()) * 0.5)
}

/// X₂ = −i(a − a†)/2.
pub fn quadrature_x2(n_max: usize) -> Result<Operator> {
    let a = destroy(n_max)?;
    Ok((&a - &a.adjoint()) * C64::new(0.0, -0.5))
}

/// |l⟩⟨m| on an atom with `levels` levels (0 = g, 1 = e, 2 = i).
pub fn atomic_projector(l: usize, m: usize, levels: usize) -> Result<Operator> {
    for index in [l, m] {
        if index >= levels {
            return Err(Error::LevelOutOfRange { index, levels });
        }
    }
    let mut mat = CMatrix::zeros(levels, levels);
    mat[(l, m)] = c(1.0);
    Ok(Operator::from_parts(mat, vec![levels]))
}

/// σ₋ = |g⟩⟨e| on the two-level atom.
pub fn sigma_minus() -> Operator {
    atomic_projector(G, E, 2).expect("valid levels")
}

/// σ₊ = |e⟩⟨g| on the two-level atom.
pub fn sigma_plus() -> Operator {
    atomic_projector(E, G, 2).expect("valid levels")
}

/// σ_x = σ₋ + σ₊.
pub fn sigma_x() -> Operator {
    sigma_minus() + sigma_plus()
}

/// σ_y = −i(σ₋ − σ₊).
pub fn sigma_y() -> Operator {
    (sigma_minus() - sigma_plus()) * C64::new(0.0, -1.0)
}

/// σ_z = σ_ee − σ_gg.
pub fn sigma_z() -> Operator {
    atomic_projector(E, E, 2).expect("valid levels") - atomic_projector(G, G, 2).expect("valid levels")
}

/// Kronecker product; factor dimensions concatenate.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator::from_parts(a.mat.kronecker(&b.mat), dims)
}

/// Embeds an atomic operator as `A ⊗ I_field`.
pub fn on_atom(op: &Operator, field_dim: usize) -> Operator {
    tensor(op, &Operator::identity(&[field_dim]))
}

/// Embeds a field operator as `I_atom ⊗ B`.
pub fn on_field(op: &Operator, atom_levels: usize) -> Operator {
    tensor(&Operator::identity(&[atom_levels]), op)
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn expm(a: &Operator) -> Result<Operator> {
    if a.mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(Operator::from_parts(a.mat.exp(), a.dims.clone()))
}

/// D(α) = exp(α a† − α* a) on the truncated Fock space.
pub fn displacement(alpha: C64, n_max: usize) -> Result<Operator> {
    if alpha.norm_sqr() > n_max as f64 / 4.0 {
        log::warn!("|α|² = {:.3} exceeds n_max/4 = {:.2}; truncation error likely", alpha.norm_sqr(), n_max as f64 / 4.0);
    }
    let a = destroy(n_max)?;
    let gen = &a.adjoint() * alpha - &a * alpha.conj();
    expm(&gen)
}

/// S(ξ) = exp[(ξ a†² − ξ* a²)/2], so that S†(ξ) a S(ξ) = a cosh r + a† e^{iφ} sinh r
/// with ξ = r e^{iφ}. With this orientation φ = 0 squeezes X₂.
pub fn squeeze(xi: C64, n_max: usize) -> Result<Operator> {
    let r = xi.norm();
    if r.sinh().powi(2) > 0.45 * n_max as f64 {
        log::warn!("squeezing r = {r:.3} is large for n_max = {n_max}; truncation error likely");
    }
    let a = destroy(n_max)?;
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let gen = (&ad2 * xi - &a2 * xi.conj()) * 0.5;
    expm(&gen)
}

/// Which factor of a two-factor (atom ⊗ field) state to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Atom,
    Field,
}

/// A pure state vector or a density matrix, tagged with factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { vector: CVector, dims: Vec<usize> },
    Mixed { matrix: CMatrix, dims: Vec<usize> },
}

impl QuantumState {
    /// Pure state; must have unit norm within 1e−10.
    pub fn pure(vector: CVector, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if product != vector.len() {
            return Err(Error::DimensionMismatch { expected: vector.len(), found: product });
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self::Pure { vector, dims })
    }

    /// Normalizes the vector before wrapping it.
    pub fn pure_normalized(vector: CVector, dims: Vec<usize>) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::pure(vector / c(norm), dims)
    }

    /// Density matrix; Hermitian within 1e−10, unit trace within 1e−8 and
    /// diagonal ≥ −1e−10.
    pub fn mixed(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if !matrix.is_square() || product != matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: product });
        }
        let herm = max_abs(&(&matrix - matrix.adjoint()));
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.2e})")));
        }
        let tr = matrix.trace();
        if (tr - c(1.0)).norm() > 1e-8 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if let Some(d) = matrix.diagonal().iter().find(|d| d.re < -1e-10) {
            return Err(Error::InvalidState(format!("negative population {}", d.re)));
        }
        Ok(Self::Mixed { matrix, dims })
    }

    pub(crate) fn mixed_unchecked(matrix: CMatrix, dims: Vec<usize>) -> Self {
        Self::Mixed { matrix, dims }
    }

    /// Fock state |n⟩.
    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::LevelOutOfRange { index: n, levels: n_max + 1 });
        }
        let mut v = CVector::zeros(n_max + 1);
        v[n] = c(1.0);
        Ok(Self::Pure { vector: v, dims: vec![n_max + 1] })
    }

    pub fn basis(index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::LevelOutOfRange { index, levels: dim });
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        Ok(Self::Pure { vector: v, dims: vec![dim] })
    }

    /// Product state `self ⊗ other`, promoted to a density matrix if either is mixed.
    pub fn product(&self, other: &QuantumState) -> QuantumState {
        let mut dims = self.dims().to_vec();
        dims.extend_from_slice(other.dims());
        match (self, other) {
            (Self::Pure { vector: a, .. }, Self::Pure { vector: b, .. }) => {
                Self::Pure { vector: a.kronecker(b), dims }
            }
            _ => Self::Mixed { matrix: self.density_matrix().kronecker(&other.density_matrix()), dims },
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            Self::Pure { dims, .. } | Self::Mixed { dims, .. } => dims,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_pure_kind(&self) -> bool {
        matches!(self, Self::Pure { .. })
    }

    /// ρ (|ψ⟩⟨ψ| for pure states).
    pub fn density_matrix(&self) -> CMatrix {
        match self {
            Self::Pure { vector, .. } => vector * vector.adjoint(),
            Self::Mixed { matrix, .. } => matrix.clone(),
        }
    }

    pub fn to_mixed(&self) -> QuantumState {
        Self::Mixed { matrix: self.density_matrix(), dims: self.dims().to_vec() }
    }

    /// Reduced state of one factor of an atom ⊗ field state.
    pub fn partial_trace(&self, keep: Factor) -> Result<QuantumState> {
        let dims = self.dims();
        if dims.len() != 2 {
            return Err(Error::InvalidSpace(format!(
                "partial trace needs exactly 2 factors, found {}",
                dims.len()
            )));
        }
        let rho = self.density_matrix();
        let (da, df) = (dims[0], dims[1]);
        let reduced = match keep {
            Factor::Field => {
                let mut out = CMatrix::zeros(df, df);
                for a in 0..da {
                    out += rho.view((a * df, a * df), (df, df));
                }
                out
            }
            Factor::Atom => CMatrix::from_fn(da, da, |a, b| {
                (0..df).map(|n| rho[(a * df + n, b * df + n)]).sum()
            }),
        };
        let kept = if keep == Factor::Field { df } else { da };
        Ok(Self::Mixed { matrix: reduced, dims: vec![kept] })
    }

    pub fn trace(&self) -> f64 {
        match self {
            Self::Pure { vector, .. } => vector.norm_squared(),
            Self::Mixed { matrix, .. } => matrix.trace().re,
        }
    }

    /// Applies a unitary: |ψ⟩ → U|ψ⟩ or ρ → U ρ U†.
    pub fn transform(&self, u: &Operator) -> Result<QuantumState> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.dim() });
        }
        Ok(match self {
            Self::Pure { vector, dims } => Self::Pure { vector: u.matrix() * vector, dims: dims.clone() },
            Self::Mixed { matrix, dims } => {
                Self::Mixed { matrix: u.matrix() * matrix * u.matrix().adjoint(), dims: dims.clone() }
            }
        })
    }
}

fn check_dim(op: &Operator, state: &QuantumState) -> Result<()> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: op.dim() });
    }
    Ok(())
}

/// Tr(ρ O), or ⟨ψ|O|ψ⟩ for pure states.
pub fn expect(op: &Operator, state: &QuantumState) -> Result<C64> {
    check_dim(op, state)?;
    Ok(match state {
        QuantumState::Pure { vector, .. } => vector.dotc(&(op.matrix() * vector)),
        QuantumState::Mixed { matrix, .. } => trace_product(op.matrix(), matrix),
    })
}

/// Tr(A B) without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// ⟨O²⟩ − ⟨O⟩² for a Hermitian observable.
pub fn variance(op: &Operator, state: &QuantumState) -> Result<f64> {
    let mean = expect(op, state)?.re;
    let sq = expect(&(op * op), state)?.re;
    Ok(sq - mean * mean)
}

/// ⟨ψ|ρ|ψ⟩ for a pure reference ψ.
pub fn fidelity(rho: &QuantumState, psi: &QuantumState) -> Result<f64> {
    let QuantumState::Pure { vector, .. } = psi else {
        return Err(Error::InvalidState("fidelity reference must be a pure state".into()));
    };
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: psi.dim() });
    }
    Ok(match rho {
        QuantumState::Pure { vector: phi, .. } => vector.dotc(phi).norm_sqr(),
        QuantumState::Mixed { matrix, .. } => vector.dotc(&(matrix * vector)).re,
    })
}

/// Tr(ρ²).
pub fn purity(rho: &QuantumState) -> f64 {
    match rho {
        QuantumState::Pure { vector, .. } => vector.norm_squared().powi(2),
        QuantumState::Mixed { matrix, .. } => trace_product(matrix, matrix).re,
    }
}

/// Smallest eigenvalue of the Hermitian part of a density matrix.
pub fn min_eigenvalue(rho: &CMatrix) -> f64 {
    let h = (rho + rho.adjoint()) * c(0.5);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
        max_abs(&(a - b))
    }

    #[test]
    fn destroy_entries() {
        let a = destroy(2).unwrap();
        assert_abs_diff_eq!(a.get(0, 1).re, 1.0);
        assert_abs_diff_eq!(a.get(1, 2).re, 2f64.sqrt());
        let nonzero = a.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
        assert!(destroy(0).is_err());
    }

    #[test]
    fn destroy_annihilates_vacuum_and_counts() {
        let a = destroy(6).unwrap();
        let vac = CVector::from_fn(7, |i, _| c(if i == 0 { 1.0 } else { 0.0 }));
        assert!(a.apply(&vac).norm() == 0.0);
        let n = &a.adjoint() * &a;
        for k in 0..=6 {
            assert_abs_diff_eq!(n.get(k, k).re, k as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let n_max = 8;
        let a = destroy(n_max).unwrap();
        let comm = a.commutator(&a.adjoint());
        for i in 0..=n_max - 2 {
            for j in 0..=n_max - 2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm.get(i, j).re, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn projector_completeness_and_ladder() {
        let sum = (0..3).fold(Operator::zeros(&[3]), |acc, l| acc + atomic_projector(l, l, 3).unwrap());
        assert_eq!(sum.matrix(), &CMatrix::identity(3, 3));
        let ee = atomic_projector(E, E, 2).unwrap();
        assert_eq!((&sigma_plus() * &sigma_minus()).matrix(), ee.matrix());
        // [σ₊, σ₋] = σ_ee − σ_gg
        let comm = sigma_plus().commutator(&sigma_minus());
        let expected = CMatrix::from_row_slice(2, 2, &[c(-1.0), c(0.0), c(0.0), c(1.0)]);
        assert_eq!(comm.matrix(), &expected);
        assert!(atomic_projector(3, 0, 3).is_err());
    }

    #[test]
    fn tensor_identities() {
        let i6 = tensor(&Operator::identity(&[2]), &Operator::identity(&[3]));
        assert_eq!(i6.matrix(), &CMatrix::identity(6, 6));
        assert_eq!(i6.dims(), &[2, 3]);
        let t = tensor(&Operator::identity(&[2]), &Operator::identity(&[4]));
        assert_eq!(t.dim(), 8);
    }

    #[test]
    fn tensor_matches_brute_force_expansion() {
        // (A⊗B)(x⊗y) = (Ax)⊗(By), with the product vector expanded by hand.
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new(0.3 * i as f64 - 0.7, 0.2 + j as f64));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64 * 0.1 + 0.5, i as f64 - 0.4 * j as f64));
        let x = CVector::from_vec(vec![C64::new(0.2, -1.0), C64::new(1.5, 0.3)]);
        let y = CVector::from_vec(vec![C64::new(-0.1, 0.4), C64::new(0.9, 0.0), C64::new(0.0, 2.0)]);
        let ab = tensor(&Operator::from_matrix(a.clone()).unwrap(), &Operator::from_matrix(b.clone()).unwrap());
        let mut xy = CVector::zeros(6);
        for i in 0..2 {
            for j in 0..3 {
                xy[i * 3 + j] = x[i] * y[j];
            }
        }
        let lhs = ab.apply(&xy);
        let (ax, by) = (&a * &x, &b * &y);
        for i in 0..2 {
            for j in 0..3 {
                assert!((lhs[i * 3 + j] - ax[i] * by[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ordering_is_atom_then_field() {
        let sz = on_atom(&sigma_z(), 5);
        let a = on_field(&destroy(4).unwrap(), 2);
        assert!(max_abs(sz.commutator(&a).matrix()) < 1e-15);
        // σ₋ ⊗ I lowers the atom index block
        let sm = on_atom(&sigma_minus(), 5);
        assert_eq!(sm.get(0, 5).re, 1.0);
    }

    #[test]
    fn expm_basic_identities() {
        let z = Operator::zeros(&[4]);
        assert_eq!(expm(&z).unwrap().matrix(), &CMatrix::identity(4, 4));
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(expm(&Operator::from_matrix(bad).unwrap()).is_err());
    }

    #[test]
    fn expm_rotation_against_series() {
        // exp(iθσ_y) summed term by term.
        let theta = 0.3;
        let gen = sigma_y() * C64::new(0.0, theta);
        let mut series = CMatrix::identity(2, 2);
        let mut term = CMatrix::identity(2, 2);
        for k in 1..30 {
            term = &term * gen.matrix() / c(k as f64);
            series += &term;
        }
        let u = expm(&gen).unwrap();
        assert!(dist(u.matrix(), &series) < 1e-14);
        // σ_y = [[0, -i],[i, 0]] in (g, e) order: exp(iθσ_y) = cos θ I + i sin θ σ_y
        assert_abs_diff_eq!(u.get(0, 0).re, theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(u.get(0, 1).re, theta.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(u.get(1, 0).re, -theta.sin(), epsilon = 1e-14);
    }

    #[test]
    fn expm_large_norm_against_eigendecomposition() {
        // Anti-Hermitian generator with ‖A‖ ≈ 50; compare with V e^{-iΛ} V†.
        let n = 6;
        let h = CMatrix::from_fn(n, n, |i, j| {
            let s = (i + 1) as f64 * (j + 2) as f64;
            C64::new((s * 0.37).sin(), if i == j { 0.0 } else { (s * 0.11).cos() })
        });
        let h = (&h + h.adjoint()) * c(0.5);
        let scale = 50.0 / h.norm();
        let h = h * c(scale);
        let gen = Operator::from_matrix(&h * C64::new(0.0, -1.0)).unwrap();
        let u = expm(&gen).unwrap();
        assert!(u.is_unitary(1e-10));
        let eig = h.clone().symmetric_eigen();
        let v = eig.eigenvectors.clone();
        let d = CMatrix::from_diagonal(&CVector::from_fn(n, |i, _| C64::new(0.0, -eig.eigenvalues[i]).exp()));
        let reference = &v * d * v.adjoint();
        assert!(dist(u.matrix(), &reference) < 1e-10 * reference.norm());
    }

    #[test]
    fn partial_trace_cases() {
        let atom = QuantumState::mixed(
            CMatrix::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]),
            vec![2],
        )
        .unwrap();
        let field = QuantumState::fock(1, 3).unwrap();
        let joint = atom.product(&field);
        let rf = joint.partial_trace(Factor::Field).unwrap();
        assert!(dist(&rf.density_matrix(), &field.density_matrix()) < 1e-15);
        let ra = joint.partial_trace(Factor::Atom).unwrap();
        assert!(dist(&ra.density_matrix(), &atom.density_matrix()) < 1e-15);
        assert_abs_diff_eq!(ra.trace(), joint.trace(), epsilon = 1e-12);

        // Bell pair (|g0⟩ + |e1⟩)/√2 reduces to I/2; contraction written out by index.
        let mut v = CVector::zeros(4);
        v[0] = c(0.5f64.sqrt());
        v[3] = c(0.5f64.sqrt());
        let bell = QuantumState::pure(v.clone(), vec![2, 2]).unwrap();
        let red = bell.partial_trace(Factor::Field).unwrap().density_matrix();
        let mut oracle = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    oracle[(i, j)] += v[k * 2 + i] * v[k * 2 + j].conj();
                }
            }
        }
        assert!(dist(&red, &oracle) < 1e-15);
        assert!(dist(&red, &(CMatrix::identity(2, 2) * c(0.5))) < 1e-15);

        let single = QuantumState::fock(0, 2).unwrap();
        assert!(single.partial_trace(Factor::Atom).is_err());
    }

    #[test]
    fn displacement_cases() {
        assert!(dist(displacement(C64::new(0.0, 0.0), 5).unwrap().matrix(), &CMatrix::identity(6, 6)) < 1e-15);
        let n_max = 30;
        let d = displacement(c(1.0), n_max).unwrap();
        let coh = QuantumState::fock(0, n_max).unwrap().transform(&d).unwrap();
        // Poisson oracle: ⟨n⟩ = Σ n e^{-|α|²}|α|^{2n}/n!
        let mut poisson_mean = 0.0;
        let mut p = (-1.0f64).exp();
        for n in 0..=n_max {
            if n > 0 {
                p /= n as f64;
            }
            poisson_mean += n as f64 * p;
        }
        let mean = expect(&number(n_max).unwrap(), &coh).unwrap().re;
        assert_abs_diff_eq!(mean, poisson_mean, epsilon = 1e-6);
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-6);
        let back = &displacement(c(0.5), n_max).unwrap() * &displacement(c(-0.5), n_max).unwrap();
        assert!(dist(back.matrix(), &CMatrix::identity(31, 31)) < 1e-8);
    }

    #[test]
    fn squeeze_moments() {
        let n_max = 100;
        assert!(dist(squeeze(c(0.0), 4).unwrap().matrix(), &CMatrix::identity(5, 5)) < 1e-15);
        let sv = QuantumState::fock(0, n_max).unwrap().transform(&squeeze(c(1.0), n_max).unwrap()).unwrap();
        let v2 = variance(&quadrature_x2(n_max).unwrap(), &sv).unwrap();
        assert_abs_diff_eq!(v2, (-2.0f64).exp() / 4.0, epsilon = 1e-8);
        let n = expect(&number(n_max).unwrap(), &sv).unwrap().re;
        assert_abs_diff_eq!(n, 1f64.sinh().powi(2), epsilon = 1e-8);
    }

    #[test]
    fn squeeze_transforms_annihilator() {
        // S† a S = a cosh r + a† e^{iφ} sinh r on low Fock levels.
        let n_max = 120;
        let (r, phi) = (0.6, 0.9);
        let xi = C64::from_polar(r, phi);
        let s = squeeze(xi, n_max).unwrap();
        let a = destroy(n_max).unwrap();
        let lhs = &(&s.adjoint() * &a) * &s;
        let rhs = &a * c(r.cosh()) + &a.adjoint() * (C64::from_polar(1.0, phi) * r.sinh());
        for i in 0..=10 {
            for j in 0..=10 {
                assert!((lhs.get(i, j) - rhs.get(i, j)).norm() < 1e-9, "({i},{j})");
            }
        }
    }

    #[test]
    fn vacuum_statistics() {
        let vac = QuantumState::fock(0, 10).unwrap();
        assert_abs_diff_eq!(variance(&quadrature_x1(10).unwrap(), &vac).unwrap(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(variance(&quadrature_x2(10).unwrap(), &vac).unwrap(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(fidelity(&vac.to_mixed(), &vac).unwrap(), 1.0, epsilon = 1e-15);
        let half = QuantumState::mixed(CMatrix::identity(2, 2) * c(0.5), vec![2]).unwrap();
        assert_abs_diff_eq!(purity(&half), 0.5, epsilon = 1e-15);
        assert!(expect(&number(3).unwrap(), &vac).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(QuantumState::pure(CVector::from_element(2, c(1.0)), vec![2]).is_err());
        assert!(QuantumState::mixed(CMatrix::identity(2, 2), vec![2]).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0);
        m[(0, 1)] = c(0.3);
        assert!(QuantumState::mixed(m, vec![2]).is_err());
        assert!(HilbertConfig::new(0, 2).is_err());
        assert!(HilbertConfig::new(3, 4).is_err());
        assert_eq!(HilbertConfig::new(30, 2).unwrap().dim(), 62);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn partial_trace_inverts_tensor(p in 0.0f64..1.0, q in 0.0f64..1.0, re in -0.3f64..0.3, im in -0.3f64..0.3) {
                let coh = C64::new(re, im) * (p * (1.0 - p)).sqrt();
                let atom = CMatrix::from_row_slice(2, 2, &[c(p), coh, coh.conj(), c(1.0 - p)]);
                let field = CMatrix::from_diagonal(&CVector::from_vec(vec![c(q), c(1.0 - q), c(0.0)]));
                let joint = QuantumState::mixed_unchecked(atom.kronecker(&field), vec![2, 3]);
                let f = joint.partial_trace(Factor::Field).unwrap().density_matrix();
                let a = joint.partial_trace(Factor::Atom).unwrap().density_matrix();
                prop_assert!(max_abs(&(f - &field)) < 1e-14);
                prop_assert!(max_abs(&(a - &atom)) < 1e-14);
            }

            #[test]
            fn expm_of_anti_hermitian_is_unitary(entries in proptest::collection::vec(-3.0f64..3.0, 32)) {
                let h = CMatrix::from_fn(4, 4, |i, j| C64::new(entries[i * 4 + j], entries[16 + i * 4 + j]));
                let h = (&h + h.adjoint()) * c(0.5);
                let u = expm(&Operator::from_matrix(h * C64::new(0.0, 1.0)).unwrap()).unwrap();
                prop_assert!(u.is_unitary(1e-10));
            }
        }
    }
}
