//! Thermal (Bose-Einstein) states on truncated Fock spaces and their
//! projections onto collective states.
//!
//! Truncation leaves a geometric tail outside the kept levels; the truncated
//! state is renormalized to unit trace and the discarded tail mass is
//! available through [`tail_mass`] so callers can budget the error.

use num_complex::Complex64;

use crate::hilbert::{DensityMatrix, StateVector, SystemSpec};
use crate::linalg::Matrix;
use crate::{tol, Error, Result};

/// A single-mode thermal state description: mean occupation and Fock cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalSpec {
    pub nbar: f64,
    pub cutoff: usize,
}

impl ThermalSpec {
    pub fn new(nbar: f64, cutoff: usize) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::InvalidSpec(format!("nbar must be finite and >= 0, got {nbar}")));
        }
        if cutoff < 2 {
            return Err(Error::InvalidDimension(format!(
                "thermal cutoff must be at least 2, got {cutoff}"
            )));
        }
        Ok(Self { nbar, cutoff })
    }

    /// Geometric weight of the discarded levels `n >= cutoff`.
    pub fn tail_mass(&self) -> f64 {
        tail_mass(self.nbar, self.cutoff)
    }

    /// True when the discarded tail exceeds the warn threshold
    /// [`tol::THERMAL_TAIL_WARN`].
    pub fn is_tail_heavy(&self) -> bool {
        self.tail_mass() > tol::THERMAL_TAIL_WARN
    }
}

/// Boltzmann weight `P_n = (1 / (1 + nbar)) (nbar / (1 + nbar))^n`.
pub fn occupation_weight(nbar: f64, n: usize) -> f64 {
    let q = nbar / (1.0 + nbar);
    q.powi(n as i32) / (1.0 + nbar)
}

/// Mass of the geometric tail `sum_{n >= cutoff} P_n = q^cutoff`.
pub fn tail_mass(nbar: f64, cutoff: usize) -> f64 {
    (nbar / (1.0 + nbar)).powi(cutoff as i32)
}

/// Smallest cutoff whose tail mass stays below
/// [`tol::THERMAL_TAIL_TARGET`], never below 2.
pub fn suggested_cutoff(nbar: f64) -> usize {
    if nbar <= 0.0 {
        return 2;
    }
    // q^d < target  =>  d > ln(target) / ln(q); solve in closed form, then
    // nudge for float rounding at the boundary.
    let q = nbar / (1.0 + nbar);
    let mut d = ((tol::THERMAL_TAIL_TARGET.ln() / q.ln()).floor().max(1.0) as usize).max(2);
    while tail_mass(nbar, d) >= tol::THERMAL_TAIL_TARGET {
        d += 1;
    }
    while d > 2 && tail_mass(nbar, d - 1) < tol::THERMAL_TAIL_TARGET {
        d -= 1;
    }
    d
}

/// Single-mode thermal density matrix: diagonal `P_n`, renormalized to unit
/// trace after truncation.
pub fn thermal_dm(spec: ThermalSpec) -> Result<DensityMatrix> {
    let weights = thermal_weights(spec.nbar, spec.cutoff);
    let diag: Vec<Complex64> = weights.iter().map(|w| Complex64::new(*w, 0.0)).collect();
    DensityMatrix::from_matrix(Matrix::from_diag(&diag))
}

fn thermal_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    let mut weights: Vec<f64> = (0..cutoff).map(|n| occupation_weight(nbar, n)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// Product thermal state of every mode in `spec`, with the atom factor
/// `|g><g|` in front when the spec includes the atom. Diagonal in the bare
/// Fock basis by construction.
pub fn product_thermal(spec: &SystemSpec) -> Result<DensityMatrix> {
    let per_mode: Vec<Vec<f64>> = spec
        .modes()
        .iter()
        .map(|mode| thermal_weights(mode.nbar, mode.cutoff))
        .collect();

    let dim = spec.dim();
    let mut diag = vec![Complex64::ZERO; dim];
    for (idx, entry) in diag.iter_mut().enumerate().take(spec.field_dim()) {
        let (_, ns) = spec.decode(idx);
        let weight: f64 = ns.iter().zip(&per_mode).map(|(&n, w)| w[n]).product();
        *entry = Complex64::new(weight, 0.0);
    }
    // Atom-excited half (if any) stays zero: the atom starts in |g>.
    DensityMatrix::from_matrix(Matrix::from_diag(&diag))
}

/// Projection `<psi| rho |psi>` of a state onto a (normalized) vector.
pub fn dark_projection(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "projection of rho (dim {}) onto psi (dim {})",
            rho.dim(),
            psi.dim()
        )));
    }
    let image = rho.matrix().matvec(psi.entries());
    let value: Complex64 =
        psi.entries().iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
    if value.im.abs() > tol::EXPECTATION_IMAG {
        return Err(Error::InvariantViolation(format!(
            "projection has imaginary part {:.3e}",
            value.im
        )));
    }
    if value.re < -tol::EXPECTATION_IMAG || value.re > 1.0 + tol::EXPECTATION_IMAG {
        return Err(Error::InvariantViolation(format!(
            "projection {:.6e} outside [0, 1]",
            value.re
        )));
    }
    Ok(value.re)
}

/// Bose-Einstein occupation `1 / (e^x - 1)` for `x = hbar omega / k_B T`.
pub fn bose_einstein(omega_over_kt: f64) -> Result<f64> {
    if omega_over_kt <= 0.0 || omega_over_kt.is_nan() {
        return Err(Error::Domain(format!(
            "Bose-Einstein occupation needs x > 0, got {omega_over_kt}"
        )));
    }
    Ok(1.0 / omega_over_kt.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation_op, expectation, ModeSpec};

    #[test]
    fn zero_temperature_is_the_vacuum() {
        let rho = thermal_dm(ThermalSpec::new(0.0, 4).unwrap()).unwrap();
        assert!((rho.matrix().get(0, 0).re - 1.0).abs() < 1e-15);
        for n in 1..4 {
            assert_eq!(rho.matrix().get(n, n), Complex64::ZERO);
        }
    }

    #[test]
    fn geometric_weights_at_low_occupation() {
        // nbar = 0.1, d = 6: P_0 = 1/1.1, P_1 = 0.1/1.21 before the (tiny)
        // truncation renormalization.
        let rho = thermal_dm(ThermalSpec::new(0.1, 6).unwrap()).unwrap();
        assert!((rho.matrix().get(0, 0).re - 1.0 / 1.1).abs() < 1e-6);
        assert!((rho.matrix().get(1, 1).re - 0.1 / 1.21).abs() < 1e-6);
    }

    #[test]
    fn mean_occupation_converges_with_cutoff() {
        let rho = thermal_dm(ThermalSpec::new(1.0, 30).unwrap()).unwrap();
        let a = annihilation_op(30).unwrap();
        let n_op = a.adjoint().compose(&a).unwrap();
        let n = expectation(&rho, &n_op).unwrap();
        assert!((n.re - 1.0).abs() < 1e-6, "mean occupation {}", n.re);
    }

    #[test]
    fn tail_mass_tracks_the_geometric_series() {
        assert!((tail_mass(0.1, 5) - (0.1f64 / 1.1).powi(5)).abs() < 1e-18);
        assert_eq!(tail_mass(0.0, 3), 0.0);
        // The suggested cutoff is the smallest d meeting the 1e-8 target.
        for nbar in [0.01, 0.1, 0.5, 1.0, 7.3] {
            let d = suggested_cutoff(nbar);
            assert!(tail_mass(nbar, d) < tol::THERMAL_TAIL_TARGET, "nbar {nbar}");
            assert!(
                d == 2 || tail_mass(nbar, d - 1) >= tol::THERMAL_TAIL_TARGET,
                "nbar {nbar}: d {d} is not minimal"
            );
        }
        assert_eq!(suggested_cutoff(0.0), 2);
        // Large occupations resolve in closed form rather than by stepping.
        let d_hot = suggested_cutoff(1e6);
        assert!(tail_mass(1e6, d_hot) < tol::THERMAL_TAIL_TARGET);
        assert!(tail_mass(1e6, d_hot - 1) >= tol::THERMAL_TAIL_TARGET);
    }

    #[test]
    fn truncated_mean_occupation_carries_the_tail_deficit() {
        // At nbar = 0.1, d = 6 the renormalized mean sits 3.4e-6 below nbar;
        // the frozen expectation comes from summing the geometric weights
        // directly.
        let rho = thermal_dm(ThermalSpec::new(0.1, 6).unwrap()).unwrap();
        let a = annihilation_op(6).unwrap();
        let n_op = a.adjoint().compose(&a).unwrap();
        let measured = expectation(&rho, &n_op).unwrap().re;

        let weights: Vec<f64> = (0..6).map(|n| occupation_weight(0.1, n)).collect();
        let norm: f64 = weights.iter().sum();
        let expected: f64 =
            weights.iter().enumerate().map(|(n, w)| n as f64 * w / norm).sum();
        assert!((measured - expected).abs() < 1e-14);
        assert!((measured - 0.1).abs() < 5e-6, "deficit {}", (measured - 0.1).abs());
        assert!(measured < 0.1);
    }

    #[test]
    fn product_state_is_diagonal_with_product_weights() {
        let spec = SystemSpec::uniform(2, 2, 0.05, 1.0).unwrap();
        let rho = product_thermal(&spec).unwrap();
        // Off-diagonal entries vanish identically.
        for i in 0..spec.dim() {
            for j in 0..spec.dim() {
                if i != j {
                    assert_eq!(rho.matrix().get(i, j), Complex64::ZERO);
                }
            }
        }
        // Weights factor as P_i P_j on |g>|i, j>.
        let w = thermal_weights(0.05, 2);
        for i in 0..2 {
            for j in 0..2 {
                let idx = spec.encode(false, &[i, j]);
                assert!((rho.matrix().get(idx, idx).re - w[i] * w[j]).abs() < 1e-15);
            }
        }
        // Atom-excited half carries no weight.
        for idx in spec.field_dim()..spec.dim() {
            assert_eq!(rho.matrix().get(idx, idx), Complex64::ZERO);
        }
    }

    #[test]
    fn vacuum_product_state() {
        let spec = SystemSpec::uniform(2, 3, 0.0, 1.0).unwrap();
        let rho = product_thermal(&spec).unwrap();
        assert!((rho.matrix().get(0, 0).re - 1.0).abs() < 1e-15);
        for idx in 1..spec.dim() {
            assert_eq!(rho.matrix().get(idx, idx), Complex64::ZERO);
        }
    }

    #[test]
    fn total_occupation_adds_over_modes() {
        let spec = SystemSpec::new(
            vec![
                ModeSpec::resonant(12, 0.1).unwrap(),
                ModeSpec::resonant(12, 0.1).unwrap(),
                ModeSpec::resonant(12, 0.1).unwrap(),
            ],
            1.0,
            false,
        )
        .unwrap();
        let rho = product_thermal(&spec).unwrap();
        let mut total = 0.0;
        for idx in 0..spec.dim() {
            total += rho.matrix().get(idx, idx).re * spec.excitation(idx) as f64;
        }
        assert!((total - 0.3).abs() < 1e-5, "total occupation {total}");
    }

    #[test]
    fn projection_edge_cases() {
        let spec = SystemSpec::new(
            vec![ModeSpec::resonant(3, 0.0).unwrap(), ModeSpec::resonant(3, 0.0).unwrap()],
            1.0,
            false,
        )
        .unwrap();
        let vacuum = product_thermal(&spec).unwrap();
        let basis = crate::collective::build_basis(2).unwrap();
        let dark = crate::collective::collective_state(
            &basis,
            &crate::collective::CollectiveIndex::new(vec![0, 1]).unwrap(),
            &spec,
        )
        .unwrap();
        // Vacuum has no overlap with any one-photon state.
        assert!(dark_projection(&vacuum, &dark).unwrap().abs() < 1e-15);
        // A projector onto psi projects to 1.
        let pure = DensityMatrix::pure(&dark).unwrap();
        assert!((dark_projection(&pure, &dark).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bose_einstein_values() {
        assert!((bose_einstein(std::f64::consts::LN_2).unwrap() - 1.0).abs() < 1e-15);
        let x = 30.0;
        let val = bose_einstein(x).unwrap();
        assert!((val - (-x).exp()).abs() < 1e-18);
        assert!((bose_einstein(1.0).unwrap() - 0.5819767068693265).abs() < 1e-15);
        assert!(bose_einstein(0.0).is_err());
        assert!(bose_einstein(-1.0).is_err());
    }
}
