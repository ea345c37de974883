//! Named observables sampled along a trajectory.
//!
//! Observables are stored sparsely (COO over full-space indices) so that a
//! trajectory over a few-thousand-dimensional space never materializes dense
//! `dim x dim` matrices per sample. Builders are provided for everything the
//! scenarios record; arbitrary operators can be converted with
//! [`Observable::from_operator`].

use num_complex::Complex64;

use crate::collective::CollectiveBasis;
use crate::hilbert::{Operator, SystemSpec};
use crate::{Error, Result};

/// A named sparse Hermitian observable.
#[derive(Clone, Debug)]
pub struct Observable {
    name: String,
    /// `(row, col, value)` entries of the operator.
    entries: Vec<(u32, u32, Complex64)>,
}

impl Observable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn entries(&self) -> &[(u32, u32, Complex64)] {
        &self.entries
    }

    /// Convert a dense operator by scanning its nonzero entries.
    pub fn from_operator(name: impl Into<String>, op: &Operator) -> Self {
        let mut entries = Vec::new();
        let n = op.dim();
        for i in 0..n {
            for j in 0..n {
                let v = op.matrix().get(i, j);
                if v != Complex64::ZERO {
                    entries.push((i as u32, j as u32, v));
                }
            }
        }
        Self { name: name.into(), entries }
    }

    fn diagonal(name: String, spec: &SystemSpec, weight: impl Fn(usize) -> f64) -> Self {
        let entries = (0..spec.dim())
            .filter_map(|idx| {
                let w = weight(idx);
                (w != 0.0).then_some((idx as u32, idx as u32, Complex64::new(w, 0.0)))
            })
            .collect();
        Self { name, entries }
    }

    /// Photon number of bare mode `k`.
    pub fn mode_occupation(spec: &SystemSpec, k: usize) -> Result<Self> {
        if k >= spec.mode_count() {
            return Err(Error::SlotOutOfRange(format!("mode {k}")));
        }
        Ok(Self::diagonal(format!("n_mode_{k}"), spec, |idx| spec.decode(idx).1[k] as f64))
    }

    /// Total photon number summed over the bare modes.
    pub fn total_photons(spec: &SystemSpec) -> Self {
        Self::diagonal("nbar_total".into(), spec, |idx| {
            spec.decode(idx).1.iter().sum::<usize>() as f64
        })
    }

    /// Atomic excited-state population.
    pub fn excited_population(spec: &SystemSpec) -> Result<Self> {
        if !spec.atom_included() {
            return Err(Error::Config("excited population needs the atom".into()));
        }
        Ok(Self::diagonal("pe".into(), spec, |idx| f64::from(spec.decode(idx).0)))
    }

    /// `sum_{j,k} conj(c_j) c_k a_j^dag a_k` built directly in sparse form.
    /// Covers collective occupations (`c` = a basis row) and the intensity
    /// (`c` = detector signs).
    pub fn mode_quadratic(
        name: impl Into<String>,
        spec: &SystemSpec,
        coefficients: &[Complex64],
    ) -> Result<Self> {
        if coefficients.len() != spec.mode_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} modes",
                coefficients.len(),
                spec.mode_count()
            )));
        }
        let mut entries = Vec::new();
        let m = spec.mode_count();
        for col in 0..spec.dim() {
            let (atom, ns) = spec.decode(col);
            for k in 0..m {
                if ns[k] == 0 || coefficients[k] == Complex64::ZERO {
                    continue;
                }
                // a_k lowers mode k...
                let mut lowered = ns.clone();
                lowered[k] -= 1;
                let amp_k = (ns[k] as f64).sqrt();
                for j in 0..m {
                    if coefficients[j] == Complex64::ZERO {
                        continue;
                    }
                    // ...then a_j^dag raises mode j, cutoff permitting.
                    if lowered[j] + 1 >= spec.modes()[j].cutoff {
                        continue;
                    }
                    let mut raised = lowered.clone();
                    raised[j] += 1;
                    let amp = amp_k * ((lowered[j] + 1) as f64).sqrt();
                    let row = spec.encode(atom, &raised);
                    entries.push((
                        row as u32,
                        col as u32,
                        coefficients[j].conj() * coefficients[k] * amp,
                    ));
                }
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Ok(Self { name: name.into(), entries })
    }

    /// Occupation `A_mu^dag A_mu` of collective mode `mu`.
    pub fn collective_occupation(
        spec: &SystemSpec,
        basis: &CollectiveBasis,
        mu: usize,
    ) -> Result<Self> {
        if mu >= basis.mode_count() {
            return Err(Error::SlotOutOfRange(format!("collective mode {mu}")));
        }
        let coefficients: Vec<Complex64> =
            (0..basis.mode_count()).map(|j| basis.coefficient(mu, j)).collect();
        Self::mode_quadratic(format!("ncoll_{mu}"), spec, &coefficients)
    }

    /// Intensity `E^- E^+` for detector signs `s_k` in `{+1, -1}`.
    pub fn intensity(spec: &SystemSpec, signs: &[f64]) -> Result<Self> {
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidSpec("signs must be +1 or -1".into()));
        }
        let coefficients: Vec<Complex64> =
            signs.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        Self::mode_quadratic("g1_intensity", spec, &coefficients)
    }

    /// Rename in place (builder style).
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}
