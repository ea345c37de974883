//! The collective-mode basis: one bright (symmetric) mode plus `M - 1` dark
//! modes, collective number states, and collective occupation observables.
//!
//! The change of basis is a real unitary `U` whose first row is uniform
//! `1/sqrt(M)`; every other row sums to zero, which is exactly the condition
//! for the corresponding mode to decouple from matter under equal couplings.
//! For odd `M` there is no canonical sign pattern, so the dark rows are fixed
//! deterministically by Gram-Schmidt over the mean-subtracted unit vectors
//! `e_j - (1/M) 1` taken in index order.

use num_complex::Complex64;

use crate::hilbert::{
    annihilation_op, embed, expectation, DensityMatrix, Operator, Slot, StateVector, SystemSpec,
};
use crate::linalg::Matrix;
use crate::{tol, Error, Result};

/// The `M x M` unitary mapping bare modes to collective modes; rows are
/// collective modes, columns bare modes.
#[derive(Clone, Debug)]
pub struct CollectiveBasis {
    m: usize,
    u: Matrix,
}

impl CollectiveBasis {
    /// Wrap a matrix after checking the three basis invariants: unitarity,
    /// uniform bright row, zero-sum dark rows.
    pub fn from_matrix(u: Matrix) -> Result<Self> {
        if !u.is_square() || u.rows() == 0 {
            return Err(Error::InvalidDimension("collective basis must be square".into()));
        }
        let m = u.rows();

        let product = u.mul(&u.adjoint());
        let defect = product.sub(&Matrix::identity(m)).max_abs();
        if defect > tol::UNITARITY {
            return Err(Error::InvariantViolation(format!(
                "basis unitarity defect {defect:.3e} exceeds {:.0e}",
                tol::UNITARITY
            )));
        }

        let uniform = 1.0 / (m as f64).sqrt();
        for j in 0..m {
            let entry = u.get(0, j);
            if (entry - Complex64::new(uniform, 0.0)).norm() > tol::BRIGHT_ROW {
                return Err(Error::InvariantViolation(format!(
                    "bright row entry {entry} differs from 1/sqrt(M) = {uniform}"
                )));
            }
        }

        for mu in 1..m {
            let row_sum: Complex64 = (0..m).map(|j| u.get(mu, j)).sum();
            if row_sum.norm() > tol::DARK_ROW_SUM {
                return Err(Error::InvariantViolation(format!(
                    "dark row {mu} sums to {row_sum}, not zero"
                )));
            }
        }

        Ok(Self { m, u })
    }

    pub fn mode_count(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &Matrix {
        &self.u
    }

    /// Coefficient `U_{mu j}` of bare mode `j` in collective mode `mu`.
    pub fn coefficient(&self, mu: usize, j: usize) -> Complex64 {
        self.u.get(mu, j)
    }
}

/// Occupations `(n_0, ..., n_{M-1})` of the collective modes; `n_0` counts
/// photons in the bright mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollectiveIndex {
    occupations: Vec<usize>,
}

impl CollectiveIndex {
    pub fn new(occupations: Vec<usize>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::InvalidSpec("collective index needs at least one mode".into()));
        }
        Ok(Self { occupations })
    }

    pub fn occupations(&self) -> &[usize] {
        &self.occupations
    }

    pub fn mode_count(&self) -> usize {
        self.occupations.len()
    }

    /// Total excitation number `N`.
    pub fn total(&self) -> usize {
        self.occupations.iter().sum()
    }

    /// Photons in the bright mode.
    pub fn bright(&self) -> usize {
        self.occupations[0]
    }

    /// True when no photons occupy the bright mode.
    pub fn is_dark(&self) -> bool {
        self.occupations[0] == 0
    }
}

/// Build the deterministic collective basis for `m` modes.
pub fn build_basis(m: usize) -> Result<CollectiveBasis> {
    if m < 1 {
        return Err(Error::InvalidSpec("collective basis needs m >= 1".into()));
    }
    let uniform = 1.0 / (m as f64).sqrt();
    let mut rows: Vec<Vec<f64>> = vec![vec![uniform; m]];

    for j in 0..m.saturating_sub(1) {
        // Candidate e_j - (1/m) * ones, orthogonalized against accepted rows.
        let mut v: Vec<f64> = (0..m).map(|col| f64::from(col == j) - 1.0 / m as f64).collect();
        for row in &rows {
            let proj: f64 = row.iter().zip(&v).map(|(r, x)| r * x).sum();
            for (x, r) in v.iter_mut().zip(row) {
                *x -= proj * r;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "Gram-Schmidt candidate {j} degenerated for m = {m}"
            )));
        }
        for x in &mut v {
            *x /= norm;
        }
        rows.push(v);
    }

    let matrix = Matrix::from_rows(
        rows.into_iter()
            .map(|row| row.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
            .collect(),
    )?;
    CollectiveBasis::from_matrix(matrix)
}

fn check_uniform_cutoffs(spec: &SystemSpec) -> Result<usize> {
    let d = spec.modes()[0].cutoff;
    if spec.modes().iter().any(|mode| mode.cutoff != d) {
        return Err(Error::InvalidSpec(
            "collective operators require all mode cutoffs to be equal".into(),
        ));
    }
    Ok(d)
}

fn check_basis_matches(basis: &CollectiveBasis, spec: &SystemSpec) -> Result<()> {
    if basis.mode_count() != spec.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} modes, spec has {}",
            basis.mode_count(),
            spec.mode_count()
        )));
    }
    Ok(())
}

/// The collective annihilation operator `A_mu = sum_j U_{mu j} a_j` lifted to
/// the full space of `spec`.
pub fn collective_annihilator(
    basis: &CollectiveBasis,
    mu: usize,
    spec: &SystemSpec,
) -> Result<Operator> {
    check_basis_matches(basis, spec)?;
    if mu >= basis.mode_count() {
        return Err(Error::SlotOutOfRange(format!(
            "collective mode {mu} out of range for M = {}",
            basis.mode_count()
        )));
    }
    let d = check_uniform_cutoffs(spec)?;
    let local = annihilation_op(d)?;
    let mut acc = Matrix::zeros(spec.dim(), spec.dim());
    for j in 0..spec.mode_count() {
        let lifted = embed(&local, Slot::Mode(j), spec)?;
        acc.scaled_add(basis.coefficient(mu, j), lifted.matrix());
    }
    Operator::new(format!("A_{mu}"), acc)
}

/// The collective number state `prod_mu (A_mu^dag)^{n_mu} / sqrt(n_mu!) |vac>`
/// on the full space of `spec` (atom in the ground state when present).
pub fn collective_state(
    basis: &CollectiveBasis,
    index: &CollectiveIndex,
    spec: &SystemSpec,
) -> Result<StateVector> {
    check_basis_matches(basis, spec)?;
    if index.mode_count() != basis.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "collective index has {} modes, basis has {}",
            index.mode_count(),
            basis.mode_count()
        )));
    }
    let d = check_uniform_cutoffs(spec)?;
    let total = index.total();
    if total > d - 1 {
        return Err(Error::Truncation(format!(
            "{total} excitations do not fit below the cutoff {d}"
        )));
    }

    let mut state = StateVector::basis(spec.dim(), 0)?; // |g> (x) |0,...,0>
    for (mu, &occupation) in index.occupations().iter().enumerate() {
        if occupation == 0 {
            continue;
        }
        let raising = collective_annihilator(basis, mu, spec)?.adjoint();
        let mut factorial = 1.0f64;
        for power in 1..=occupation {
            state = raising.apply(&state)?;
            factorial *= power as f64;
        }
        let scale = Complex64::new(1.0 / factorial.sqrt(), 0.0);
        state = StateVector::raw(state.entries().iter().map(|v| v * scale).collect());
    }
    // Exact up to rounding when the precondition holds; renormalize to strip
    // the accumulated float error.
    state.into_normalized()
}

/// Expected occupation `<A_mu^dag A_mu>` of every collective mode.
pub fn occupation_expectations(
    rho: &DensityMatrix,
    basis: &CollectiveBasis,
    spec: &SystemSpec,
) -> Result<Vec<f64>> {
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} does not match spec dim {}",
            rho.dim(),
            spec.dim()
        )));
    }
    let mut out = Vec::with_capacity(basis.mode_count());
    for mu in 0..basis.mode_count() {
        let lowering = collective_annihilator(basis, mu, spec)?;
        let number = lowering.adjoint().compose(&lowering)?;
        let value = expectation(rho, &number)?;
        if value.im.abs() > tol::EXPECTATION_IMAG {
            return Err(Error::InvariantViolation(format!(
                "occupation expectation has imaginary part {:.3e}",
                value.im
            )));
        }
        if value.re < -tol::EXPECTATION_IMAG {
            return Err(Error::InvariantViolation(format!(
                "occupation expectation is negative: {:.3e}",
                value.re
            )));
        }
        out.push(value.re);
    }
    Ok(out)
}

/// All compositions of `n_total` into `m` nonnegative parts, lexicographically
/// ascending. The length is `C(n_total + m - 1, m - 1)`.
pub fn enumerate_collective_indices(n_total: usize, m: usize) -> Result<Vec<CollectiveIndex>> {
    if m < 1 {
        return Err(Error::InvalidSpec("enumeration needs m >= 1".into()));
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    fill(&mut out, &mut current, 0, n_total);
    Ok(out)
}

fn fill(out: &mut Vec<CollectiveIndex>, current: &mut Vec<usize>, slot: usize, budget: usize) {
    if slot == current.len() - 1 {
        current[slot] = budget;
        out.push(CollectiveIndex { occupations: current.clone() });
        return;
    }
    for take in 0..=budget {
        current[slot] = take;
        fill(out, current, slot + 1, budget - take);
    }
}
