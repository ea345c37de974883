//! Time evolution under the dissipative atom-field master equation
//!
//! `d rho/dt = -i [H(t), rho] + gamma (sigma_- rho sigma_+ - 1/2 {sigma_+ sigma_-, rho})`
//!
//! with piecewise-constant coupling schedules and mode detunings, plus the
//! effective bright-mode-only dynamics that the full equation reduces to at
//! weak coupling, and the analytic decay law it obeys.
//!
//! Time is measured in units of `1/gamma`; couplings and detunings in units
//! of `gamma`. Integration is classical fixed-step RK4. Because the coupling
//! conserves total excitation and the decay only lowers it, the integrator
//! works on excitation-graded blocks of the density matrix;
//! for the always-diagonal initial states of interest this is equivalent to
//! dense RK4 but several times cheaper, and the equivalence is pinned by a
//! dense reference test.

mod observables;
mod sectors;

pub use observables::Observable;

use num_complex::Complex64;

use crate::collective::{CollectiveBasis, CollectiveIndex};
use crate::hilbert::{DensityMatrix, Operator, SystemSpec};
use crate::linalg::Matrix;
use crate::thermal;
use crate::{tol, Error, Result};

use sectors::{BandLayout, Grading, JumpLadder, SectorOp};

/// Piecewise-constant signed couplings `g_k(t)`, in units of `gamma`.
///
/// `breakpoints` are the switching times (ascending); `segments[i]` holds the
/// per-mode couplings on the interval `[breakpoints[i-1], breakpoints[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSchedule {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<f64>>,
}

impl CouplingSchedule {
    /// A single segment that never switches.
    pub fn constant(couplings: Vec<f64>) -> Result<Self> {
        Self::piecewise(Vec::new(), vec![couplings])
    }

    pub fn piecewise(breakpoints: Vec<f64>, segments: Vec<Vec<f64>>) -> Result<Self> {
        if segments.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidSpec(format!(
                "{} segments for {} breakpoints (need breakpoints + 1)",
                segments.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec("breakpoints must be strictly ascending".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidSpec("breakpoints must be finite and >= 0".into()));
        }
        let m = segments.first().map_or(0, Vec::len);
        if m == 0 || segments.iter().any(|s| s.len() != m) {
            return Err(Error::InvalidSpec(
                "every segment must list one coupling per mode".into(),
            ));
        }
        if segments.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::InvalidSpec("couplings must be finite".into()));
        }
        Ok(Self { breakpoints, segments })
    }

    pub fn mode_count(&self) -> usize {
        self.segments[0].len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    /// Couplings in force at time `t` (right-open intervals).
    pub fn couplings_at(&self, t: f64) -> &[f64] {
        let seg = self.breakpoints.iter().take_while(|b| **b <= t).count();
        &self.segments[seg]
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.segments.iter().flatten().fold(0.0f64, |acc, g| acc.max(g.abs()))
    }

    /// Deterministic digest of the schedule for run manifests (FNV-1a over
    /// the canonical text form).
    pub fn digest(&self) -> String {
        let text = format!("breaks={:?};segments={:?}", self.breakpoints, self.segments);
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in text.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

/// Integration parameters and the observables to record.
#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub observables: Vec<Observable>,
    /// Check the minimum eigenvalue at every sample point. On by default;
    /// comparison reruns (halved step, doubled cutoff) may switch it off.
    pub check_positivity: bool,
}

impl EvolutionConfig {
    pub fn new(t_end: f64, dt: f64, sample_every: usize) -> Result<Self> {
        if t_end <= 0.0 || dt <= 0.0 || t_end.is_nan() || dt.is_nan() {
            return Err(Error::Config(format!(
                "t_end and dt must be positive, got t_end = {t_end}, dt = {dt}"
            )));
        }
        if sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        Ok(Self { t_end, dt, sample_every, observables: Vec::new(), check_positivity: true })
    }

    pub fn with_observables(mut self, observables: Vec<Observable>) -> Self {
        self.observables = observables;
        self
    }

    /// The stability guard: `dt <= 0.01 / max(gamma, M max|g|, max|delta|)`.
    pub fn dt_bound(spec: &SystemSpec, schedule: &CouplingSchedule) -> f64 {
        let max_detuning =
            spec.modes().iter().map(|m| m.detuning.abs()).fold(0.0f64, f64::max);
        let scale = spec
            .gamma()
            .max(spec.mode_count() as f64 * schedule.max_abs_coupling())
            .max(max_detuning);
        tol::DT_GUARD / scale
    }

    fn validate_for(&self, spec: &SystemSpec, schedule: &CouplingSchedule) -> Result<()> {
        let bound = Self::dt_bound(spec, schedule);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} violates the stability guard dt <= {bound}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Worst invariant defects seen at the sample points of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantSummary {
    pub max_trace_deviation: f64,
    pub max_hermiticity_defect: f64,
    /// Smallest eigenvalue across checked samples; `None` when positivity
    /// checking was off.
    pub min_eigenvalue: Option<f64>,
    pub samples: usize,
}

/// Everything about a run except the data: system echo, schedule digest,
/// grid, engine notes, and the invariant summary.
#[derive(Clone, Debug)]
pub struct RunMetadata {
    pub spec: SystemSpec,
    pub schedule_digest: String,
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    pub engine: String,
    pub notes: Vec<String>,
    pub invariants: InvariantSummary,
}

/// One named series of sampled real values.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// Sampled time series of named observables plus run metadata.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub series: Vec<Series>,
    pub metadata: RunMetadata,
}

impl TrajectoryRecord {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    /// Value of a series at the sample closest to `t`.
    pub fn value_at(&self, name: &str, t: f64) -> Option<f64> {
        let values = self.series(name)?;
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - t).abs().partial_cmp(&(**b - t).abs()).expect("finite times")
            })?
            .0;
        values.get(idx).copied()
    }
}

/// The Hamiltonian in force at time `t`, in the frame rotating at the atomic
/// frequency:
/// `H(t) = sum_j delta_j a_j^dag a_j + sum_k g_k(t) (sigma_+ a_k + sigma_- a_k^dag)`.
pub fn hamiltonian_at(
    spec: &SystemSpec,
    schedule: &CouplingSchedule,
    t: f64,
) -> Result<Operator> {
    if schedule.mode_count() != spec.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "schedule has {} modes, spec has {}",
            schedule.mode_count(),
            spec.mode_count()
        )));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    hamiltonian_with_couplings(spec, schedule.couplings_at(t))
}

fn hamiltonian_with_couplings(spec: &SystemSpec, couplings: &[f64]) -> Result<Operator> {
    if !spec.atom_included() {
        return Err(Error::Config("the interaction Hamiltonian needs the atom".into()));
    }
    if couplings.len() != spec.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings for {} modes",
            couplings.len(),
            spec.mode_count()
        )));
    }
    let dim = spec.dim();
    let mut h = Matrix::zeros(dim, dim);

    for idx in 0..dim {
        let (atom, ns) = spec.decode(idx);
        let detuning_energy: f64 =
            ns.iter().zip(spec.modes()).map(|(&n, m)| m.detuning * n as f64).sum();
        if detuning_energy != 0.0 {
            h.set(idx, idx, Complex64::new(detuning_energy, 0.0));
        }
        if atom {
            continue;
        }
        // sigma_+ a_k : |g, n_k> -> |e, n_k - 1>, amplitude g_k sqrt(n_k);
        // the Hermitian conjugate is filled symmetrically.
        for (k, &g) in couplings.iter().enumerate() {
            if g == 0.0 || ns[k] == 0 {
                continue;
            }
            let mut lowered = ns.clone();
            lowered[k] -= 1;
            let row = spec.encode(true, &lowered);
            let amp = Complex64::new(g * (ns[k] as f64).sqrt(), 0.0);
            let existing = h.get(row, idx);
            h.set(row, idx, existing + amp);
            let existing_t = h.get(idx, row);
            h.set(idx, row, existing_t + amp);
        }
    }
    Operator::new("H", h)
}

/// Right-hand side of the master equation for a state with the atom as the
/// leading tensor factor:
/// `-i [H, rho] + gamma (sigma_- rho sigma_+ - 1/2 {sigma_+ sigma_-, rho})`.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &Operator, gamma: f64) -> Result<Matrix> {
    lindblad_rhs_matrix(rho.matrix(), h, gamma)
}

fn lindblad_rhs_matrix(rho: &Matrix, h: &Operator, gamma: f64) -> Result<Matrix> {
    let dim = rho.rows();
    if h.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "H dim {} vs rho dim {dim}",
            h.dim()
        )));
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(
            "state has no leading two-level factor (odd dimension)".into(),
        ));
    }
    let half = dim / 2;

    // -i (H rho - rho H)
    let h_rho = h.matrix().mul(rho);
    let rho_h = rho.mul(h.matrix());
    let mut out = h_rho.sub(&rho_h).scale(Complex64::new(0.0, -1.0));

    // With basis index = atom * half + field, rho splits into four
    // half x half blocks; the dissipator reads them directly:
    //   sigma_- rho sigma_+ = rho_ee placed in the gg block,
    //   {sigma_+ sigma_-, rho} = (0, rho_ge; rho_eg, 2 rho_ee).
    let g = Complex64::new(gamma, 0.0);
    let half_g = Complex64::new(0.5 * gamma, 0.0);
    for i in 0..half {
        for j in 0..half {
            let ee = rho.get(half + i, half + j);
            let ge = rho.get(i, half + j);
            let eg = rho.get(half + i, j);
            let mut gg_out = out.get(i, j);
            gg_out += g * ee;
            out.set(i, j, gg_out);

            let mut ge_out = out.get(i, half + j);
            ge_out -= half_g * ge;
            out.set(i, half + j, ge_out);

            let mut eg_out = out.get(half + i, j);
            eg_out -= half_g * eg;
            out.set(half + i, j, eg_out);

            let mut ee_out = out.get(half + i, half + j);
            ee_out -= g * ee;
            out.set(half + i, half + j, ee_out);
        }
    }
    Ok(out)
}

/// Bright-mode decay rate of the effective radiation-only master equation,
/// `kappa = 4 M g^2 / gamma`.
pub fn kappa(m: usize, g: f64, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 || gamma.is_nan() {
        return Err(Error::Domain(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(4.0 * m as f64 * g * g / gamma)
}

/// Analytic total mean photon number under the effective dynamics:
/// `nbar(t) = nbar0 (e^{-kappa t} + m - 1) / m`.
pub fn effective_nbar(t: f64, m: usize, nbar0: f64, kappa: f64) -> f64 {
    let m = m as f64;
    nbar0 / m * (-kappa * t).exp() + (m - 1.0) / m * nbar0
}

/// Action of the equal-coupling interaction on a collective state: one bright
/// photon moves to the atom with amplitude `sqrt(M n_0)`; dark states are
/// left untouched with amplitude zero.
pub fn interaction_action(
    index: &CollectiveIndex,
    basis: &CollectiveBasis,
) -> (f64, CollectiveIndex) {
    debug_assert_eq!(index.mode_count(), basis.mode_count());
    let n0 = index.bright();
    if n0 == 0 {
        return (0.0, index.clone());
    }
    let mut occupations = index.occupations().to_vec();
    occupations[0] -= 1;
    let amplitude = (basis.mode_count() as f64 * n0 as f64).sqrt();
    (amplitude, CollectiveIndex::new(occupations).expect("nonempty occupations"))
}

// ---------------------------------------------------------------------------
// Full master-equation integration
// ---------------------------------------------------------------------------

struct ResolvedObservable {
    name: String,
    /// (data offset, conjugate?, weight): value = sum w * rho_entry.
    terms: Vec<(usize, bool, Complex64)>,
}

fn resolve_observable(
    obs: &Observable,
    grading: &Grading,
    layout: &BandLayout,
) -> ResolvedObservable {
    let mut terms = Vec::with_capacity(obs.entries().len());
    for &(row_o, col_o, weight) in obs.entries() {
        // Tr(rho O) = sum_{u,v} rho[u, v] O[v, u]; here v = row_o, u = col_o.
        let x = col_o as usize; // row index into rho
        let y = row_o as usize; // column index into rho
        let (sx, px) = grading.locate[x];
        let (sy, py) = grading.locate[y];
        let (band, block_col, i, j, conj) = if sx >= sy {
            ((sx - sy) as usize, sy as usize, px as usize, py as usize, false)
        } else {
            ((sy - sx) as usize, sx as usize, py as usize, px as usize, true)
        };
        let Some(band_idx) = layout.bands.iter().position(|&k| k == band) else {
            // Absent bands are identically zero along the whole run.
            continue;
        };
        let (offset, _rows, cols) = layout.blocks[band_idx][block_col];
        terms.push((offset + i * cols + j, conj, weight));
    }
    ResolvedObservable { name: obs.name().to_string(), terms }
}

fn eval_observable(resolved: &ResolvedObservable, data: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &(offset, conj, weight) in &resolved.terms {
        let entry = data[offset];
        acc += weight * if conj { entry.conj() } else { entry };
    }
    acc
}

fn atom_jump_ladder(spec: &SystemSpec, grading: &Grading) -> JumpLadder {
    let sector_count = grading.sector_count();
    let field_dim = spec.field_dim();
    let mut pairs = vec![Vec::new(); sector_count];
    let mut pdiag: Vec<Vec<f64>> = grading
        .sectors
        .iter()
        .map(|members| {
            members.iter().map(|&u| f64::from(u as usize >= field_dim)).collect()
        })
        .collect();
    for (s, members) in grading.sectors.iter().enumerate() {
        for (pos, &u) in members.iter().enumerate() {
            let u = u as usize;
            if u < field_dim {
                // |g, fock> gains from |e, fock> one sector up.
                let partner = u + field_dim;
                let (ps, pp) = grading.locate[partner];
                debug_assert_eq!(ps as usize, s + 1);
                pairs[s].push((pos as u32, pp, 1.0));
            }
        }
    }
    // pdiag rows for empty sectors stay empty.
    for row in &mut pdiag {
        row.shrink_to_fit();
    }
    JumpLadder { rate: spec.gamma(), pairs, pdiag }
}

struct StepPlan {
    total_steps: usize,
    /// (first step, last step, segment index); half-open step ranges.
    pieces: Vec<(usize, usize, usize)>,
    notes: Vec<String>,
}

fn plan_steps(config: &EvolutionConfig, schedule: &CouplingSchedule) -> Result<StepPlan> {
    let mut notes = Vec::new();
    let raw_steps = config.t_end / config.dt;
    let total_steps = raw_steps.round().max(1.0) as usize;
    if (total_steps as f64 - raw_steps).abs() > 1e-9 * raw_steps.max(1.0) {
        notes.push(format!(
            "t_end snapped to the step grid: {} -> {}",
            config.t_end,
            total_steps as f64 * config.dt
        ));
    }

    let mut boundaries = vec![0usize];
    let mut segment_of_piece = vec![0usize];
    for (i, b) in schedule.breakpoints().iter().enumerate() {
        let raw = b / config.dt;
        let snapped = raw.round() as usize;
        if (snapped as f64 - raw).abs() > 1e-9 * raw.max(1.0) {
            notes.push(format!(
                "breakpoint {b} snapped to the step grid at {}",
                snapped as f64 * config.dt
            ));
        }
        if snapped == 0 || snapped >= total_steps {
            // Segment never becomes active inside the run.
            continue;
        }
        if snapped <= *boundaries.last().expect("nonempty") {
            return Err(Error::Config(format!(
                "breakpoints collide on the step grid near t = {b}"
            )));
        }
        boundaries.push(snapped);
        segment_of_piece.push(i + 1);
    }
    boundaries.push(total_steps);

    let pieces = boundaries
        .windows(2)
        .zip(segment_of_piece)
        .map(|(w, seg)| (w[0], w[1], seg))
        .collect();
    Ok(StepPlan { total_steps, pieces, notes })
}

/// Result of a monitored integration: the record always contains whatever
/// was sampled before a failure (if any); the final state is present only on
/// success.
#[derive(Clone, Debug)]
pub struct EvolveOutcome {
    pub record: TrajectoryRecord,
    pub final_state: Option<DensityMatrix>,
    pub failure: Option<Error>,
}

/// Integrate the full master equation, reporting failures alongside the
/// partial record instead of discarding it. Configuration errors (bad
/// dimensions, guard violations) still fail fast.
pub fn evolve_monitored(
    spec: &SystemSpec,
    schedule: &CouplingSchedule,
    initial: &DensityMatrix,
    config: &EvolutionConfig,
) -> Result<EvolveOutcome> {
    if !spec.atom_included() {
        return Err(Error::Config("full master-equation evolution needs the atom".into()));
    }
    if initial.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state dim {} vs spec dim {}",
            initial.dim(),
            spec.dim()
        )));
    }
    config.validate_for(spec, schedule)?;
    let plan = plan_steps(config, schedule)?;

    let grading = Grading::new(spec.dim(), |idx| spec.excitation(idx));
    let jump = atom_jump_ladder(spec, &grading);
    let bands = sectors::detect_bands(initial.matrix(), &grading);
    let layout = BandLayout::new(grading.sector_dims(), bands);
    let mut notes = plan.notes;
    if !layout.band_zero_only() {
        notes.push(format!(
            "initial state carries {} excitation bands",
            layout.bands.len()
        ));
    }

    let mut data = sectors::scatter(initial.matrix(), &grading, &layout);
    let mut scratch = sectors::Scratch::new(layout.len);

    let resolved: Vec<ResolvedObservable> = config
        .observables
        .iter()
        .map(|obs| resolve_observable(obs, &grading, &layout))
        .collect();

    let mut times = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); resolved.len()];
    let mut summary = InvariantSummary {
        max_trace_deviation: 0.0,
        max_hermiticity_defect: 0.0,
        min_eigenvalue: config.check_positivity.then_some(f64::INFINITY),
        samples: 0,
    };

    let sample = |step: usize, data: &[Complex64],
                      summary: &mut InvariantSummary,
                      times: &mut Vec<f64>,
                      series: &mut Vec<Vec<f64>>|
     -> Result<()> {
        let t = step as f64 * config.dt;
        let tr = sectors::trace(&layout, data);
        let trace_dev = (tr - Complex64::ONE).norm();
        if trace_dev > tol::TRACE_DRIFT {
            return Err(Error::IntegrationFailure {
                time: t,
                message: format!("trace drifted to {tr} (deviation {trace_dev:.3e})"),
            });
        }
        let herm = sectors::hermiticity_defect(&layout, data);
        if herm > tol::HERMITICITY {
            return Err(Error::IntegrationFailure {
                time: t,
                message: format!("Hermiticity defect {herm:.3e}"),
            });
        }
        summary.max_trace_deviation = summary.max_trace_deviation.max(trace_dev);
        summary.max_hermiticity_defect = summary.max_hermiticity_defect.max(herm);
        if let Some(min_eig) = summary.min_eigenvalue.as_mut() {
            let eig = sectors::min_eigenvalue(&grading, &layout, data)?;
            if eig < -tol::EIGENVALUE_FLOOR {
                return Err(Error::IntegrationFailure {
                    time: t,
                    message: format!("minimum eigenvalue {eig:.3e}"),
                });
            }
            *min_eig = min_eig.min(eig);
        }
        summary.samples += 1;

        times.push(t);
        for (resolved_obs, values) in resolved.iter().zip(series.iter_mut()) {
            let value = eval_observable(resolved_obs, data);
            if value.im.abs() > tol::SAMPLE_IMAG {
                return Err(Error::IntegrationFailure {
                    time: t,
                    message: format!(
                        "observable {} has imaginary part {:.3e}",
                        resolved_obs.name, value.im
                    ),
                });
            }
            values.push(value.re);
        }
        Ok(())
    };

    let mut failure: Option<Error> = None;
    if let Err(e) = sample(0, &data, &mut summary, &mut times, &mut series) {
        failure = Some(e);
    }

    if failure.is_none() {
        'pieces: for &(start, end, segment) in &plan.pieces {
            // Segment selection comes from the plan, not from couplings_at: a
            // snapped breakpoint may sit slightly before its nominal time.
            let h = hamiltonian_with_couplings(spec, &schedule.segments()[segment])?;
            let h_scaled =
                sectors::split_into_sectors(h.matrix(), &grading, Complex64::new(0.0, -1.0))?;
            for step in start..end {
                sectors::rk4_step(&layout, &h_scaled, &jump, config.dt, &mut data, &mut scratch);
                let done = step + 1;
                if done % config.sample_every == 0 || done == plan.total_steps {
                    if let Err(e) = sample(done, &data, &mut summary, &mut times, &mut series) {
                        failure = Some(e);
                        break 'pieces;
                    }
                }
            }
        }
    }

    let final_state = if failure.is_none() {
        let final_dense = sectors::gather(&data, &grading, &layout);
        match DensityMatrix::from_matrix(final_dense) {
            Ok(state) => Some(state),
            Err(e) => {
                failure = Some(Error::IntegrationFailure {
                    time: plan.total_steps as f64 * config.dt,
                    message: format!("final state violates invariants: {e}"),
                });
                None
            }
        }
    } else {
        None
    };

    let record = TrajectoryRecord {
        times,
        series: resolved
            .iter()
            .zip(series)
            .map(|(r, values)| Series { name: r.name.clone(), values })
            .collect(),
        metadata: RunMetadata {
            spec: spec.clone(),
            schedule_digest: schedule.digest(),
            dt: config.dt,
            steps: plan.total_steps,
            sample_every: config.sample_every,
            engine: "rk4-sector-banded".into(),
            notes,
            invariants: summary,
        },
    };
    Ok(EvolveOutcome { record, final_state, failure })
}

/// Integrate the full master equation; returns the sampled record and the
/// final state, or the first failure.
pub fn evolve_with_final(
    spec: &SystemSpec,
    schedule: &CouplingSchedule,
    initial: &DensityMatrix,
    config: &EvolutionConfig,
) -> Result<(TrajectoryRecord, DensityMatrix)> {
    let outcome = evolve_monitored(spec, schedule, initial, config)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => {
            let state = outcome.final_state.expect("present when no failure");
            Ok((outcome.record, state))
        }
    }
}

/// Integrate the full master equation, keeping only the sampled record.
pub fn evolve(
    spec: &SystemSpec,
    schedule: &CouplingSchedule,
    initial: &DensityMatrix,
    config: &EvolutionConfig,
) -> Result<TrajectoryRecord> {
    evolve_with_final(spec, schedule, initial, config).map(|(record, _)| record)
}

/// Integrate the effective bright-mode-only master equation
/// `d rho_R/dt = kappa D[A_0] rho_R` on a truncated single-mode space seeded
/// with the bright share `nbar0 / m` of the thermal occupation, and rebuild
/// the total photon number by adding the frozen dark share.
///
/// Records two series: `nbar_bright` and `nbar_total`. The observables field
/// of `config` is not consulted (the effective space has its own observable).
pub fn effective_evolve(
    nbar0: f64,
    m: usize,
    g: f64,
    gamma: f64,
    config: &EvolutionConfig,
) -> Result<TrajectoryRecord> {
    if m == 0 {
        return Err(Error::InvalidSpec("effective dynamics needs m >= 1".into()));
    }
    if nbar0 < 0.0 || nbar0.is_nan() {
        return Err(Error::InvalidSpec(format!("nbar0 must be >= 0, got {nbar0}")));
    }
    let rate = kappa(m, g, gamma)?;
    let bright0 = nbar0 / m as f64;
    let dark_share = nbar0 * (m as f64 - 1.0) / m as f64;
    let cutoff = thermal::suggested_cutoff(bright0).max(3);

    // Single bosonic mode, graded by photon number; jump operator A_0 with
    // rate kappa: pairs (n <- n+1, sqrt(n+1)), L^dag L diagonal n.
    let mut pairs = vec![Vec::new(); cutoff];
    for (n, row) in pairs.iter_mut().enumerate().take(cutoff - 1) {
        row.push((0u32, 0u32, ((n + 1) as f64).sqrt()));
    }
    let pdiag: Vec<Vec<f64>> = (0..cutoff).map(|n| vec![n as f64]).collect();
    let jump = JumpLadder { rate, pairs, pdiag };
    let layout = BandLayout::new(vec![1; cutoff], vec![0]);

    // Thermal seed, diagonal.
    let weights: Vec<f64> = {
        let mut w: Vec<f64> =
            (0..cutoff).map(|n| thermal::occupation_weight(bright0, n)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    };
    let mut data: Vec<Complex64> =
        weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut scratch = sectors::Scratch::new(layout.len);

    // Free evolution: H = 0 in the rotating frame.
    let h_scaled: Vec<SectorOp> = (0..cutoff)
        .map(|_| SectorOp { row_ptr: vec![0, 0], entries: Vec::new() })
        .collect();

    let raw_steps = config.t_end / config.dt;
    let total_steps = raw_steps.round().max(1.0) as usize;

    let bright_of = |data: &[Complex64]| -> f64 {
        data.iter().enumerate().map(|(n, v)| n as f64 * v.re).sum()
    };

    let mut times = vec![0.0];
    let mut bright_series = vec![bright_of(&data)];
    for step in 0..total_steps {
        sectors::rk4_step(&layout, &h_scaled, &jump, config.dt, &mut data, &mut scratch);
        let done = step + 1;
        if done % config.sample_every == 0 || done == total_steps {
            times.push(done as f64 * config.dt);
            bright_series.push(bright_of(&data));
        }
    }

    let total_series: Vec<f64> = bright_series.iter().map(|b| b + dark_share).collect();
    let samples = times.len();
    let spec_echo = SystemSpec::new(
        vec![crate::hilbert::ModeSpec::resonant(cutoff, bright0)?],
        gamma,
        false,
    )?;
    Ok(TrajectoryRecord {
        times,
        series: vec![
            Series { name: "nbar_bright".into(), values: bright_series },
            Series { name: "nbar_total".into(), values: total_series },
        ],
        metadata: RunMetadata {
            spec: spec_echo,
            schedule_digest: format!("effective(kappa={rate})"),
            dt: config.dt,
            steps: total_steps,
            sample_every: config.sample_every,
            engine: "rk4-effective-bright-mode".into(),
            notes: vec![format!("bright cutoff {cutoff}, dark share {dark_share}")],
            invariants: InvariantSummary {
                max_trace_deviation: 0.0,
                max_hermiticity_defect: 0.0,
                min_eigenvalue: None,
                samples,
            },
        },
    })
}
