//! Observable post-processing: first-order-correlation intensity, bright/dark
//! energy partition, and free-space Planck-integral energy-density ratios.
//!
//! The intensity `<E^- E^+>` measures coupling-weighted bright-mode
//! occupation, not total field energy; the two agree only for a single mode.
//! The Planck-side routines compare the full free-space energy density with
//! what a single mode per frequency would carry. The printed ratio
//! `u_total / u_one` is a pure number even though the two densities carry
//! different physical units (J/m^3 vs J/s); the arithmetic here reproduces
//! that convention as published rather than repairing it.

use num_complex::Complex64;

use crate::collective::{occupation_expectations, CollectiveBasis};
use crate::hilbert::{annihilation_op, embed, expectation, DensityMatrix, Slot, SystemSpec};
use crate::linalg::Matrix;
use crate::{tol, Error, Result};

/// Reduced Planck constant, J s (CODATA).
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant, J/K (exact SI).
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Speed of light, m/s (exact SI).
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Field energy split between the bright mode and the dark modes, in units
/// of the common mode quantum `hbar omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyPartition {
    pub bright: f64,
    pub dark: f64,
    pub total: f64,
}

impl EnergyPartition {
    /// Fraction of the energy stored in dark modes, `dark / total`;
    /// zero for an empty field.
    pub fn dark_fraction(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.dark / self.total
        }
    }
}

/// Free-space thermal energy densities and their ratio at one temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanckReport {
    pub temperature: f64,
    /// Closed form `(pi^2 / 15) (k_B T)^4 / (hbar^3 c^3)`, J/m^3.
    pub u_total: f64,
    /// Closed form `(pi^2 / 6) (k_B T)^2 / hbar`, J/s.
    pub u_one: f64,
    /// Closed form `(2/5) (k_B T)^2 / (hbar^2 c^3)`.
    pub ratio: f64,
    /// `u_total` rebuilt from adaptive quadrature of `x^3 / (e^x - 1)`.
    pub u_total_quadrature: f64,
    /// `u_one` rebuilt from adaptive quadrature of `x / (e^x - 1)`.
    pub u_one_quadrature: f64,
}

/// Intensity `<E^- E^+>` with `E^+ = sum_k s_k a_k`, for sign patterns
/// `s_k` in `{+1, -1}`.
pub fn g1_intensity(rho: &DensityMatrix, signs: &[f64], spec: &SystemSpec) -> Result<f64> {
    if signs.len() != spec.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} signs for {} modes",
            signs.len(),
            spec.mode_count()
        )));
    }
    if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
        return Err(Error::InvalidSpec("signs must be +1 or -1".into()));
    }
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} does not match spec dim {}",
            rho.dim(),
            spec.dim()
        )));
    }

    let mut field = Matrix::zeros(spec.dim(), spec.dim());
    for (k, sign) in signs.iter().enumerate() {
        let a = annihilation_op(spec.modes()[k].cutoff)?;
        let lifted = embed(&a, Slot::Mode(k), spec)?;
        field.scaled_add(Complex64::new(*sign, 0.0), lifted.matrix());
    }
    let e_plus = crate::hilbert::Operator::new("E+", field)?;
    let intensity_op = e_plus.adjoint().compose(&e_plus)?;
    let value = expectation(rho, &intensity_op)?;
    if value.im.abs() > tol::EXPECTATION_IMAG {
        return Err(Error::InvariantViolation(format!(
            "intensity has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Split the field energy between the bright mode and the dark modes.
/// Requires degenerate modes (equal detunings), which is when the collective
/// modes share one frequency and the split is meaningful.
pub fn energy_partition(
    rho: &DensityMatrix,
    basis: &CollectiveBasis,
    spec: &SystemSpec,
) -> Result<EnergyPartition> {
    let delta0 = spec.modes()[0].detuning;
    if spec.modes().iter().any(|m| (m.detuning - delta0).abs() > 1e-12) {
        return Err(Error::Config(
            "energy partition requires degenerate modes (equal detunings)".into(),
        ));
    }
    let occupations = occupation_expectations(rho, basis, spec)?;
    let bright = occupations[0];
    let dark: f64 = occupations[1..].iter().sum();
    Ok(EnergyPartition { bright, dark, total: bright + dark })
}

/// Free-space mode density per unit volume and angular frequency,
/// `D(omega) = omega^2 / (pi^2 c^3)` in SI (s/m^3).
pub fn mode_density(omega: f64) -> Result<f64> {
    if omega <= 0.0 || omega.is_nan() {
        return Err(Error::Domain(format!("mode density needs omega > 0, got {omega}")));
    }
    Ok(omega * omega / (std::f64::consts::PI.powi(2) * SPEED_OF_LIGHT.powi(3)))
}

/// Number of modes per unit volume within a matter linewidth `Gamma`:
/// `D(omega) * Gamma`.
pub fn effective_modes(omega: f64, gamma_linewidth: f64) -> Result<f64> {
    if gamma_linewidth <= 0.0 || gamma_linewidth.is_nan() {
        return Err(Error::Domain("effective_modes needs Gamma > 0".into()));
    }
    Ok(mode_density(omega)? * gamma_linewidth)
}

/// Closed-form free-space energy densities plus an independent quadrature
/// route; errors if the two routes disagree beyond
/// [`tol::PLANCK_QUADRATURE_REL`].
pub fn planck_report(temperature: f64) -> Result<PlanckReport> {
    if temperature <= 0.0 || temperature.is_nan() {
        return Err(Error::Domain(format!("temperature must be > 0 K, got {temperature}")));
    }
    let pi = std::f64::consts::PI;
    let kt = BOLTZMANN * temperature;

    let u_total = pi.powi(2) / 15.0 * kt.powi(4) / (HBAR.powi(3) * SPEED_OF_LIGHT.powi(3));
    let u_one = pi.powi(2) / 6.0 * kt.powi(2) / HBAR;
    let ratio = 0.4 * kt.powi(2) / (HBAR.powi(2) * SPEED_OF_LIGHT.powi(3));

    // Independent route: scale out x = hbar omega / k_B T and integrate the
    // dimensionless Bose integrals numerically.
    let i3 = bose_integral(3);
    let i1 = bose_integral(1);
    let u_total_quadrature = kt.powi(4) / (pi.powi(2) * HBAR.powi(3) * SPEED_OF_LIGHT.powi(3)) * i3;
    let u_one_quadrature = kt.powi(2) / HBAR * i1;

    for (quad, closed, label) in [
        (u_total_quadrature, u_total, "u_total"),
        (u_one_quadrature, u_one, "u_one"),
    ] {
        let rel = ((quad - closed) / closed).abs();
        if rel > tol::PLANCK_QUADRATURE_REL {
            return Err(Error::InvariantViolation(format!(
                "{label}: quadrature {quad:.9e} vs closed form {closed:.9e} (rel {rel:.3e})"
            )));
        }
    }
    let ratio_check = u_total / u_one;
    if ((ratio - ratio_check) / ratio).abs() > 1e-10 {
        return Err(Error::InvariantViolation(
            "closed-form ratio disagrees with u_total / u_one".into(),
        ));
    }

    Ok(PlanckReport { temperature, u_total, u_one, ratio, u_total_quadrature, u_one_quadrature })
}

/// `int_0^inf x^p / (e^x - 1) dx` by adaptive Simpson quadrature. The
/// integrand is finite at 0 for p >= 1 (limit 1 at p = 1, 0 above) and decays
/// like e^{-x}, so [0, 60] captures it beyond f64 relevance. The two values
/// the crate uses are cached; they are temperature-independent constants.
fn bose_integral(p: i32) -> f64 {
    use std::sync::OnceLock;
    static CUBIC: OnceLock<f64> = OnceLock::new();
    static LINEAR: OnceLock<f64> = OnceLock::new();
    let compute = move || {
        let f = move |x: f64| {
            if x == 0.0 {
                if p == 1 {
                    1.0
                } else {
                    0.0
                }
            } else {
                x.powi(p) / x.exp_m1()
            }
        };
        adaptive_simpson(&f, 0.0, 60.0, 1e-10, 30)
    };
    match p {
        3 => *CUBIC.get_or_init(compute),
        1 => *LINEAR.get_or_init(compute),
        _ => compute(),
    }
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(b))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let whole = simpson(f, a, b);
    let left = simpson(f, a, mid);
    let right = simpson(f, mid, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, mid, eps / 2.0, depth - 1)
            + adaptive_simpson(f, mid, b, eps / 2.0, depth - 1)
    }
}
