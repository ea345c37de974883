//! Truncated Fock spaces, elementary operators, and tensor-product embedding
//! for `M` bosonic modes plus an optional two-level atom.
//!
//! Basis ordering is frozen once and for all, because reproducible output
//! depends on it: the tensor factors are `(atom, mode 0, mode 1, ...)`, the
//! atom ground state is index 0, and Fock indices ascend within each mode.
//! With row-major Kronecker products this means the atom index is the
//! slowest-varying digit and the last mode the fastest.

use num_complex::Complex64;

use crate::linalg::{hermitian_eigenvalues, Matrix};
use crate::{tol, Error, Result};

/// One bosonic mode: Fock cutoff, detuning from the atom (units of the atomic
/// decay rate), and initial thermal mean occupation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpec {
    pub cutoff: usize,
    pub detuning: f64,
    pub nbar: f64,
}

impl ModeSpec {
    pub fn new(cutoff: usize, detuning: f64, nbar: f64) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidDimension(format!(
                "mode cutoff must be at least 2, got {cutoff}"
            )));
        }
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::InvalidSpec(format!("nbar must be finite and >= 0, got {nbar}")));
        }
        if !detuning.is_finite() {
            return Err(Error::InvalidSpec("detuning must be finite".into()));
        }
        Ok(Self { cutoff, detuning, nbar })
    }

    /// Mode resonant with the atom.
    pub fn resonant(cutoff: usize, nbar: f64) -> Result<Self> {
        Self::new(cutoff, 0.0, nbar)
    }
}

/// A full simulation instance: the mode list, the atomic decay rate `gamma`
/// (which sets the time unit), and whether the two-level atom is part of the
/// space.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    modes: Vec<ModeSpec>,
    gamma: f64,
    atom_included: bool,
    dim: usize,
}

impl SystemSpec {
    pub fn new(modes: Vec<ModeSpec>, gamma: f64, atom_included: bool) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidSpec("at least one mode is required".into()));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidSpec(format!("gamma must be finite and > 0, got {gamma}")));
        }
        let mut dim: usize = if atom_included { 2 } else { 1 };
        for m in &modes {
            dim = dim.checked_mul(m.cutoff).ok_or_else(|| {
                Error::InvalidDimension("total Hilbert dimension overflows usize".into())
            })?;
        }
        Ok(Self { modes, gamma, atom_included, dim })
    }

    /// `M` identical resonant thermal modes plus the atom.
    pub fn uniform(m: usize, cutoff: usize, nbar: f64, gamma: f64) -> Result<Self> {
        let modes = (0..m).map(|_| ModeSpec::resonant(cutoff, nbar)).collect::<Result<_>>()?;
        Self::new(modes, gamma, true)
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn atom_included(&self) -> bool {
        self.atom_included
    }

    /// Total Hilbert dimension, `(2 if atom else 1) * prod(cutoffs)`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Product of the mode cutoffs alone.
    pub fn field_dim(&self) -> usize {
        if self.atom_included {
            self.dim / 2
        } else {
            self.dim
        }
    }

    /// Stride of each mode in the flattened Fock index (last mode fastest).
    pub fn mode_strides(&self) -> Vec<usize> {
        let m = self.modes.len();
        let mut strides = vec![1usize; m];
        for k in (0..m.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.modes[k + 1].cutoff;
        }
        strides
    }

    /// Decompose a full-space basis index into (atom excited?, mode occupations).
    pub fn decode(&self, index: usize) -> (bool, Vec<usize>) {
        let field_dim = self.field_dim();
        let (atom, mut rest) = if self.atom_included {
            (index >= field_dim, index % field_dim)
        } else {
            (false, index)
        };
        let strides = self.mode_strides();
        let ns = strides
            .iter()
            .map(|&s| {
                let n = rest / s;
                rest %= s;
                n
            })
            .collect();
        (atom, ns)
    }

    /// Total excitation number (atom + photons) of a basis index.
    pub fn excitation(&self, index: usize) -> usize {
        let (atom, ns) = self.decode(index);
        ns.iter().sum::<usize>() + usize::from(atom)
    }

    /// Flat basis index of `(atom excited?, occupations)`.
    pub fn encode(&self, atom: bool, ns: &[usize]) -> usize {
        debug_assert_eq!(ns.len(), self.modes.len());
        let strides = self.mode_strides();
        let fock: usize = ns.iter().zip(&strides).map(|(n, s)| n * s).sum();
        if self.atom_included && atom {
            self.field_dim() + fock
        } else {
            fock
        }
    }
}

/// Which tensor factor an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Atom,
    Mode(usize),
}

/// A labeled dense operator on some Hilbert space.
#[derive(Clone, Debug)]
pub struct Operator {
    label: String,
    matrix: Matrix,
}

impl Operator {
    pub fn new(label: impl Into<String>, matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDimension("operators must be square".into()));
        }
        Ok(Self { label: label.into(), matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { label: "I".into(), matrix: Matrix::identity(dim) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { label: format!("{}^dag", self.label), matrix: self.matrix.adjoint() }
    }

    /// Operator composition `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "compose {} ({}) with {} ({})",
                self.label,
                self.dim(),
                other.label,
                other.dim()
            )));
        }
        Ok(Self {
            label: format!("{} {}", self.label, other.label),
            matrix: self.matrix.mul(&other.matrix),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("operator addition".into()));
        }
        Ok(Self { label: self.label.clone(), matrix: self.matrix.add(&other.matrix) })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { label: self.label.clone(), matrix: self.matrix.scale(c) }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch(format!(
                "apply {} ({}) to state ({})",
                self.label,
                self.dim(),
                state.dim()
            )));
        }
        Ok(StateVector::raw(self.matrix.matvec(state.entries())))
    }
}

/// A dense complex square matrix carrying a quantum state, with the
/// Hermiticity/trace invariants checked on construction.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDimension("density matrix must be square".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol::HERMITICITY {
            return Err(Error::InvariantViolation(format!(
                "density matrix Hermiticity defect {defect:.3e} exceeds {:.0e}",
                tol::HERMITICITY
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvariantViolation(format!(
                "density matrix trace {tr} is not 1 within {:.0e}",
                tol::TRACE
            )));
        }
        Ok(Self { matrix })
    }

    /// Projector `|psi><psi|` onto a normalized state.
    pub fn pure(state: &StateVector) -> Result<Self> {
        let n = state.norm();
        if (n - 1.0).abs() > tol::STATE_NORM {
            return Err(Error::InvariantViolation(format!(
                "pure-state projector needs a normalized vector, got |psi| = {n}"
            )));
        }
        let d = state.dim();
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            let a = state.entries()[i];
            if a == Complex64::ZERO {
                continue;
            }
            for j in 0..d {
                m.set(i, j, a * state.entries()[j].conj());
            }
        }
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Smallest eigenvalue; the positivity invariant asks for
    /// `>= -tol::EIGENVALUE_FLOOR`. Checked on demand, not per step.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = hermitian_eigenvalues(&self.matrix)?;
        Ok(eig.first().copied().unwrap_or(0.0))
    }

    /// Errors unless the smallest eigenvalue clears the positivity floor.
    pub fn check_positivity(&self) -> Result<f64> {
        let min = self.min_eigenvalue()?;
        if min < -tol::EIGENVALUE_FLOOR {
            return Err(Error::InvariantViolation(format!(
                "minimum eigenvalue {min:.3e} below -{:.0e}",
                tol::EIGENVALUE_FLOOR
            )));
        }
        Ok(min)
    }
}

/// Dense complex vector; either normalized to 1 or the zero vector.
#[derive(Clone, Debug)]
pub struct StateVector {
    entries: Vec<Complex64>,
    null: bool,
}

impl StateVector {
    /// A vector expected to be normalized.
    pub fn normalized(entries: Vec<Complex64>) -> Result<Self> {
        let v = Self { entries, null: false };
        let n = v.norm();
        if (n - 1.0).abs() > tol::STATE_NORM {
            return Err(Error::InvariantViolation(format!(
                "state vector norm {n} differs from 1 by more than {:.0e}",
                tol::STATE_NORM
            )));
        }
        Ok(v)
    }

    /// The zero vector, used for annihilated states.
    pub fn null(dim: usize) -> Self {
        Self { entries: vec![Complex64::ZERO; dim], null: true }
    }

    /// Basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidDimension(format!("basis index {index} >= dim {dim}")));
        }
        let mut entries = vec![Complex64::ZERO; dim];
        entries[index] = Complex64::ONE;
        Ok(Self { entries, null: false })
    }

    /// Wrap raw amplitudes without a norm check (for operator images, which
    /// may legitimately be unnormalized or zero).
    pub fn raw(entries: Vec<Complex64>) -> Self {
        let null = entries.iter().all(|v| *v == Complex64::ZERO);
        Self { entries, null }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_null(&self) -> bool {
        self.null
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("inner product".into()));
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum())
    }

    /// Rescale to unit norm; errors on the zero vector.
    pub fn into_normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvariantViolation("cannot normalize the zero vector".into()));
        }
        let inv = Complex64::new(1.0 / n, 0.0);
        for v in &mut self.entries {
            *v *= inv;
        }
        self.null = false;
        Ok(self)
    }
}

/// Truncated annihilation operator on a `d`-dimensional Fock space:
/// `A[n-1, n] = sqrt(n)`.
pub fn annihilation_op(d: usize) -> Result<Operator> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "annihilation operator needs d >= 2, got {d}"
        )));
    }
    let mut m = Matrix::zeros(d, d);
    for n in 1..d {
        m.set(n - 1, n, Complex64::new((n as f64).sqrt(), 0.0));
    }
    Operator::new("a", m)
}

/// Two-level lowering operator `|g><e|` with the ground state at index 0.
pub fn sigma_minus() -> Operator {
    let mut m = Matrix::zeros(2, 2);
    m.set(0, 1, Complex64::ONE);
    Operator::new("sigma_-", m).expect("2x2 is square")
}

/// Lift a local operator to the full space: `I (x) ... (x) op (x) ... (x) I`,
/// with factor ordering `(atom, mode 0, ..., mode M-1)`.
pub fn embed(op: &Operator, slot: Slot, spec: &SystemSpec) -> Result<Operator> {
    let local_dim = match slot {
        Slot::Atom => {
            if !spec.atom_included() {
                return Err(Error::SlotOutOfRange(
                    "atom slot requested but the spec has no atom".into(),
                ));
            }
            2
        }
        Slot::Mode(k) => {
            if k >= spec.mode_count() {
                return Err(Error::SlotOutOfRange(format!(
                    "mode {k} out of range for M = {}",
                    spec.mode_count()
                )));
            }
            spec.modes()[k].cutoff
        }
    };
    if op.dim() != local_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} does not match slot dim {local_dim}",
            op.dim()
        )));
    }

    // Dimensions of the factors before and after the slot.
    let mut pre: usize = 1;
    let mut post: usize = 1;
    let atom_factor = usize::from(spec.atom_included());
    let slot_pos = match slot {
        Slot::Atom => 0,
        Slot::Mode(k) => atom_factor + k,
    };
    let factor_dims: Vec<usize> = (0..atom_factor)
        .map(|_| 2)
        .chain(spec.modes().iter().map(|m| m.cutoff))
        .collect();
    for (pos, d) in factor_dims.iter().enumerate() {
        if pos < slot_pos {
            pre *= d;
        } else if pos > slot_pos {
            post *= d;
        }
    }

    let lifted = Matrix::identity(pre).kron(op.matrix()).kron(&Matrix::identity(post));
    Operator::new(op.label(), lifted)
}

/// `Tr(rho op)`. The imaginary part is retained so callers can check it
/// against [`tol::EXPECTATION_IMAG`] for Hermitian operators.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<Complex64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "expectation of {} ({}) in state of dim {}",
            op.label(),
            op.dim(),
            rho.dim()
        )));
    }
    // Tr(rho op) = sum_{i,j} rho[i, j] op[j, i].
    let n = rho.dim();
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            let o = op.matrix().get(j, i);
            if o == Complex64::ZERO {
                continue;
            }
            acc += rho.matrix().get(i, j) * o;
        }
    }
    Ok(acc)
}
