//! Preset parameter bindings and their resolution into executable runs.
//!
//! Bindings (time in units of `1/gamma`, couplings in units of `gamma`):
//!
//! - `fig2`: M equal resonant modes (default 2), `gamma/g = 10`,
//!   `nbar = 0.1` per mode, cutoff 5, run to `t = 8/kappa`.
//! - `fig3`: M = 2, `|g| = gamma/4`, `nbar = 0.1`, cutoff 5; equal couplings
//!   until `t = 50`, then the first sign flips; run to `t = 100`.
//! - `figs1`: survival-ratio table for `N <= 10`, `M <= 8`; no dynamics.
//! - `figs2`: M = 5 detuned modes (`delta = gamma/15` ladder, atom resonant
//!   with mode 2), `gamma/g = 3`, `nbar = 0.05`, cutoff 3, `dt = 0.006`,
//!   run to `t = 1000` where the field has fully drained.
//! - `planck`: free-space report at the given temperature.
//! - `custom`: everything supplied by hand.

use std::collections::BTreeMap;

use darkfield::collective::build_basis;
use darkfield::dynamics::{kappa, CouplingSchedule, EvolutionConfig, Observable};
use darkfield::hilbert::{ModeSpec, SystemSpec};

use crate::config::{Overrides, Scenario, ScenarioConfig};
use crate::CliError;

/// A trajectory run ready for the integrator.
#[derive(Clone, Debug)]
pub struct TrajectoryRun {
    pub spec: SystemSpec,
    pub schedule: CouplingSchedule,
    pub config: EvolutionConfig,
    /// Mode count, coupling magnitude, and per-mode occupation, echoed into
    /// manifests and used by the effective-model comparison.
    pub m: usize,
    pub g: f64,
    pub nbar: f64,
}

/// What a scenario resolves to.
#[derive(Clone, Debug)]
pub enum ResolvedRun {
    Trajectory(Box<TrajectoryRun>),
    RatioTable { n_max: usize, m_max: usize },
    Planck { temperature: f64 },
}

/// Reject override keys the preset does not consume.
fn reject_unused(overrides: &Overrides, allowed: &[&str], scenario: Scenario) -> Result<(), CliError> {
    for key in overrides.set_keys() {
        if !allowed.contains(&key) {
            return Err(CliError::config(format!(
                "key '{key}' is not applicable to scenario {}",
                scenario.name()
            )));
        }
    }
    Ok(())
}

/// The standard observable set for trajectory scenarios: total photons,
/// atomic population, the uniform-sign intensity, per-mode occupations, and
/// collective occupations.
pub fn standard_observables(spec: &SystemSpec) -> Result<Vec<Observable>, CliError> {
    let m = spec.mode_count();
    let basis = build_basis(m)?;
    let mut observables = vec![
        Observable::total_photons(spec),
        Observable::excited_population(spec)?,
        Observable::intensity(spec, &vec![1.0; m])?,
    ];
    for k in 0..m {
        observables.push(Observable::mode_occupation(spec, k)?);
    }
    for mu in 0..m {
        observables.push(Observable::collective_occupation(spec, &basis, mu)?);
    }
    Ok(observables)
}

/// Resolve a scenario request into an executable run plus the parameter echo
/// for the manifest.
pub fn resolve(
    config: &ScenarioConfig,
) -> Result<(ResolvedRun, BTreeMap<String, serde_json::Value>), CliError> {
    let o = &config.overrides;
    let mut params: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let scenario = config.scenario;

    match scenario {
        Scenario::Fig2 => {
            reject_unused(
                o,
                &["modes", "nbar", "cutoffs", "gamma_over_g", "dt", "t_end", "sample_every"],
                scenario,
            )?;
            let m = o.modes.unwrap_or(2);
            let gamma_over_g = o.gamma_over_g.unwrap_or(10.0);
            let nbar = o.nbar.unwrap_or(0.1);
            let cutoff = o.cutoffs.unwrap_or(5);
            let g = 1.0 / gamma_over_g;
            let k = kappa(m, g, 1.0).map_err(CliError::from)?;
            let t_end = o.t_end.unwrap_or(8.0 / k);
            let dt = o.dt.unwrap_or(0.01);
            let sample_every = o.sample_every.unwrap_or(100);
            let run = trajectory(
                m,
                cutoff,
                nbar,
                vec![0.0; m],
                CouplingSchedule::constant(vec![g; m]).map_err(CliError::from)?,
                g,
                t_end,
                dt,
                sample_every,
            )?;
            params.insert("kappa".into(), k.into());
            echo_trajectory(&mut params, &run);
            Ok((ResolvedRun::Trajectory(Box::new(run)), params))
        }
        Scenario::Fig3 => {
            reject_unused(
                o,
                &[
                    "modes",
                    "nbar",
                    "cutoffs",
                    "gamma_over_g",
                    "dt",
                    "t_end",
                    "break_time",
                    "signs",
                    "sample_every",
                ],
                scenario,
            )?;
            let m = o.modes.unwrap_or(2);
            let gamma_over_g = o.gamma_over_g.unwrap_or(4.0);
            let nbar = o.nbar.unwrap_or(0.1);
            let cutoff = o.cutoffs.unwrap_or(5);
            let g = 1.0 / gamma_over_g;
            let t_end = o.t_end.unwrap_or(100.0);
            let break_time = o.break_time.unwrap_or(50.0);
            let dt = o.dt.unwrap_or(0.01);
            let sample_every = o.sample_every.unwrap_or(100);
            let signs = match &o.signs {
                Some(signs) => {
                    if signs.len() != m {
                        return Err(CliError::config(format!(
                            "{} signs for {} modes",
                            signs.len(),
                            m
                        )));
                    }
                    signs.clone()
                }
                // Default symmetry break: flip the first coupling.
                None => std::iter::once(-1.0)
                    .chain(std::iter::repeat_n(1.0, m - 1))
                    .collect(),
            };
            let before = vec![g; m];
            let after: Vec<f64> = signs.iter().map(|s| s * g).collect();
            let schedule = CouplingSchedule::piecewise(vec![break_time], vec![before, after])
                .map_err(CliError::from)?;
            let run = trajectory(m, cutoff, nbar, vec![0.0; m], schedule, g, t_end, dt, sample_every)?;
            params.insert("break_time".into(), break_time.into());
            params.insert(
                "signs".into(),
                serde_json::Value::Array(signs.iter().map(|s| (*s).into()).collect()),
            );
            echo_trajectory(&mut params, &run);
            Ok((ResolvedRun::Trajectory(Box::new(run)), params))
        }
        Scenario::FigS1 => {
            reject_unused(o, &[], scenario)?;
            params.insert("n_max".into(), 10.into());
            params.insert("m_max".into(), 8.into());
            Ok((ResolvedRun::RatioTable { n_max: 10, m_max: 8 }, params))
        }
        Scenario::FigS2 => {
            reject_unused(
                o,
                &[
                    "modes",
                    "nbar",
                    "cutoffs",
                    "gamma_over_g",
                    "dt",
                    "t_end",
                    "detuning_step",
                    "sample_every",
                ],
                scenario,
            )?;
            let m = o.modes.unwrap_or(5);
            let gamma_over_g = o.gamma_over_g.unwrap_or(3.0);
            let nbar = o.nbar.unwrap_or(0.05);
            let cutoff = o.cutoffs.unwrap_or(3);
            let g = 1.0 / gamma_over_g;
            let step = o.detuning_step.unwrap_or(1.0 / 15.0);
            // The atom sits resonant with the middle mode of the ladder.
            let resonant = m / 2;
            let detunings: Vec<f64> =
                (0..m).map(|j| (j as f64 - resonant as f64) * step).collect();
            let t_end = o.t_end.unwrap_or(1000.0);
            let dt = o.dt.unwrap_or(0.006);
            let sample_every = o.sample_every.unwrap_or(500);
            let schedule = CouplingSchedule::constant(vec![g; m]).map_err(CliError::from)?;
            let run =
                trajectory(m, cutoff, nbar, detunings.clone(), schedule, g, t_end, dt, sample_every)?;
            params.insert("detuning_step".into(), step.into());
            params.insert(
                "detunings".into(),
                serde_json::Value::Array(detunings.iter().map(|d| (*d).into()).collect()),
            );
            params.insert("resonant_mode".into(), resonant.into());
            echo_trajectory(&mut params, &run);
            Ok((ResolvedRun::Trajectory(Box::new(run)), params))
        }
        Scenario::Planck => {
            reject_unused(o, &["temperature"], scenario)?;
            let temperature = o
                .temperature
                .ok_or_else(|| CliError::config("planck needs --temperature <K>"))?;
            params.insert("temperature".into(), temperature.into());
            Ok((ResolvedRun::Planck { temperature }, params))
        }
        Scenario::Custom => {
            reject_unused(o, &Overrides::KEYS[..10], scenario)?;
            let need = |name: &str, value: Option<f64>| {
                value.ok_or_else(|| CliError::config(format!("custom needs --{name}")))
            };
            let m = o
                .modes
                .ok_or_else(|| CliError::config("custom needs --modes"))?;
            let nbar = need("nbar", o.nbar)?;
            let cutoff = o
                .cutoffs
                .ok_or_else(|| CliError::config("custom needs --cutoffs"))?;
            let gamma_over_g = need("gamma_over_g", o.gamma_over_g)?;
            let t_end = need("t_end", o.t_end)?;
            let g = 1.0 / gamma_over_g;
            let step = o.detuning_step.unwrap_or(0.0);
            let resonant = m / 2;
            let detunings: Vec<f64> =
                (0..m).map(|j| (j as f64 - resonant as f64) * step).collect();
            let max_detuning = detunings.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
            let guard = 0.01 / 1.0f64.max(m as f64 * g.abs()).max(max_detuning);
            let dt = o.dt.unwrap_or(guard);
            let sample_every = o.sample_every.unwrap_or(100);
            let schedule = match o.break_time {
                Some(break_time) => {
                    let signs: Vec<f64> = o.signs.clone().unwrap_or_else(|| {
                        std::iter::once(-1.0).chain(std::iter::repeat_n(1.0, m - 1)).collect()
                    });
                    if signs.len() != m {
                        return Err(CliError::config(format!(
                            "{} signs for {m} modes",
                            signs.len()
                        )));
                    }
                    params.insert("break_time".into(), break_time.into());
                    params.insert(
                        "signs".into(),
                        serde_json::Value::Array(signs.iter().map(|s| (*s).into()).collect()),
                    );
                    CouplingSchedule::piecewise(
                        vec![break_time],
                        vec![vec![g; m], signs.iter().map(|s| s * g).collect()],
                    )
                    .map_err(CliError::from)?
                }
                None => {
                    if o.signs.is_some() {
                        return Err(CliError::config(
                            "custom: signs need a break_time to take effect",
                        ));
                    }
                    CouplingSchedule::constant(vec![g; m]).map_err(CliError::from)?
                }
            };
            if step != 0.0 {
                params.insert("detuning_step".into(), step.into());
            }
            let run = trajectory(m, cutoff, nbar, detunings, schedule, g, t_end, dt, sample_every)?;
            echo_trajectory(&mut params, &run);
            Ok((ResolvedRun::Trajectory(Box::new(run)), params))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn trajectory(
    m: usize,
    cutoff: usize,
    nbar: f64,
    detunings: Vec<f64>,
    schedule: CouplingSchedule,
    g: f64,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<TrajectoryRun, CliError> {
    let modes: Result<Vec<ModeSpec>, _> =
        detunings.iter().map(|&d| ModeSpec::new(cutoff, d, nbar)).collect();
    let spec = SystemSpec::new(modes.map_err(CliError::from)?, 1.0, true)
        .map_err(CliError::from)?;
    let config = EvolutionConfig::new(t_end, dt, sample_every)
        .map_err(CliError::from)?
        .with_observables(standard_observables(&spec)?);
    Ok(TrajectoryRun { spec, schedule, config, m, g, nbar })
}

fn echo_trajectory(params: &mut BTreeMap<String, serde_json::Value>, run: &TrajectoryRun) {
    params.insert("modes".into(), run.m.into());
    params.insert("g".into(), run.g.into());
    params.insert("gamma".into(), 1.0.into());
    params.insert("nbar".into(), run.nbar.into());
    params.insert("cutoffs".into(), run.spec.modes()[0].cutoff.into());
    params.insert("dt".into(), run.config.dt.into());
    params.insert("t_end".into(), run.config.t_end.into());
    params.insert("sample_every".into(), run.config.sample_every.into());
    params.insert("hilbert_dim".into(), run.spec.dim().into());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    #[test]
    fn fig2_bindings() {
        let config = ScenarioConfig::new(Scenario::Fig2);
        let (run, params) = resolve(&config).unwrap();
        let ResolvedRun::Trajectory(run) = run else { panic!("expected trajectory") };
        assert_eq!(run.m, 2);
        assert_eq!(run.spec.modes()[0].cutoff, 5);
        assert!((run.g - 0.1).abs() < 1e-15);
        assert!((run.nbar - 0.1).abs() < 1e-15);
        // t_end = 8 / kappa = 8 / 0.08 = 100.
        assert!((run.config.t_end - 100.0).abs() < 1e-9);
        assert_eq!(params["modes"], serde_json::json!(2));
    }

    #[test]
    fn fig3_breaks_symmetry() {
        let config = ScenarioConfig::new(Scenario::Fig3);
        let (run, _) = resolve(&config).unwrap();
        let ResolvedRun::Trajectory(run) = run else { panic!("expected trajectory") };
        assert_eq!(run.schedule.breakpoints(), &[50.0]);
        assert_eq!(run.schedule.segments()[0], vec![0.25, 0.25]);
        assert_eq!(run.schedule.segments()[1], vec![-0.25, 0.25]);
        assert!((run.config.t_end - 100.0).abs() < 1e-12);
    }

    #[test]
    fn figs2_detuning_ladder() {
        let config = ScenarioConfig::new(Scenario::FigS2);
        let (run, params) = resolve(&config).unwrap();
        let ResolvedRun::Trajectory(run) = run else { panic!("expected trajectory") };
        assert_eq!(run.m, 5);
        assert_eq!(run.spec.modes()[0].cutoff, 3);
        let detunings: Vec<f64> = run.spec.modes().iter().map(|m| m.detuning).collect();
        assert!((detunings[0] + 2.0 / 15.0).abs() < 1e-15);
        assert_eq!(detunings[2], 0.0);
        assert!((detunings[4] - 2.0 / 15.0).abs() < 1e-15);
        assert_eq!(params["resonant_mode"], serde_json::json!(2));
        assert!((run.config.dt - 0.006).abs() < 1e-15);
    }

    #[test]
    fn inapplicable_keys_are_rejected() {
        let mut config = ScenarioConfig::new(Scenario::Fig2);
        config.overrides.set("break_time", "10").unwrap();
        assert!(resolve(&config).is_err());

        let mut planck = ScenarioConfig::new(Scenario::Planck);
        planck.overrides.set("modes", "2").unwrap();
        assert!(resolve(&planck).is_err());

        let planck_missing = ScenarioConfig::new(Scenario::Planck);
        assert!(resolve(&planck_missing).is_err());
    }

    #[test]
    fn custom_requires_the_core_parameters() {
        let mut config = ScenarioConfig::new(Scenario::Custom);
        assert!(resolve(&config).is_err());
        for (key, value) in [
            ("modes", "2"),
            ("nbar", "0.1"),
            ("cutoffs", "4"),
            ("gamma_over_g", "10"),
            ("t_end", "20"),
        ] {
            config.overrides.set(key, value).unwrap();
        }
        let (run, _) = resolve(&config).unwrap();
        let ResolvedRun::Trajectory(run) = run else { panic!("expected trajectory") };
        assert_eq!(run.m, 2);
        // Default dt falls back to the stability guard (here 0.01).
        assert!((run.config.dt - 0.01).abs() < 1e-15);
    }
}
