//! Execute one resolved scenario: run the numerics, build the data table,
//! write the data file and its manifest (or print to stdout when no output
//! path was given).

use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use darkfield::analysis::planck_report;
use darkfield::combinatorics::{
    all_counts, brute_count_all, brute_count_dark, brute_count_fixed_n0,
    brute_final_excitations, brute_initial_excitations, brute_survival_ratio, survival_ratio,
    CountKind,
};
use darkfield::dynamics::{evolve_monitored, TrajectoryRecord};
use darkfield::thermal::product_thermal;

use crate::config::{OutputFormat, ScenarioConfig};
use crate::output::{self, Cell, Table};
use crate::presets::{resolve, ResolvedRun, TrajectoryRun};
use crate::CliError;

/// Files written (or payload produced) by a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub data_path: Option<PathBuf>,
    pub manifest_path: Option<PathBuf>,
    /// Data payload when no output path was requested.
    pub stdout_payload: Option<String>,
}

/// Run one scenario end to end.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, CliError> {
    let (resolved, parameters) = resolve(config)?;
    let format = config.effective_format();
    let started = Instant::now();

    let (table, invariants, notes, digest, failure): (
        Table,
        Option<Value>,
        Vec<String>,
        Option<String>,
        Option<CliError>,
    ) = match &resolved {
        ResolvedRun::Trajectory(run) => {
            let outcome = run_trajectory(run)?;
            let digest = outcome.record.metadata.schedule_digest.clone();
            let invariants = invariants_json(&outcome.record);
            let notes = outcome.record.metadata.notes.clone();
            let table = trajectory_table(&outcome.record);
            (table, Some(invariants), notes, Some(digest), outcome.failure.map(CliError::from))
        }
        ResolvedRun::RatioTable { n_max, m_max } => {
            (ratio_table(*n_max, *m_max)?, None, Vec::new(), None, None)
        }
        ResolvedRun::Planck { temperature } => {
            let report = planck_report(*temperature).map_err(CliError::from)?;
            (planck_table(&report), None, Vec::new(), None, None)
        }
    };

    let payload = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(config.scenario.name()),
    };
    let duration = started.elapsed().as_secs_f64();

    let status = match &failure {
        None => "ok".to_string(),
        Some(e) => format!("failed: {}", e.message),
    };

    let output = match &config.output_path {
        Some(path) => {
            output::write_file(path, &payload)?;
            let manifest_value = output::manifest(
                config.scenario.name(),
                &config.echo(),
                &parameters,
                path,
                format.name(),
                duration,
                invariants,
                &notes,
                digest.as_deref(),
                &status,
            );
            let manifest_file = output::manifest_path(path);
            output::write_file(&manifest_file, &output::pretty(&manifest_value))?;
            RunOutput {
                data_path: Some(path.clone()),
                manifest_path: Some(manifest_file),
                stdout_payload: None,
            }
        }
        None => RunOutput { data_path: None, manifest_path: None, stdout_payload: Some(payload) },
    };

    match failure {
        // Partial data has been flushed and the manifest carries the marker.
        Some(e) => Err(e),
        None => Ok(output),
    }
}

fn run_trajectory(run: &TrajectoryRun) -> Result<darkfield::dynamics::EvolveOutcome, CliError> {
    let initial = product_thermal(&run.spec).map_err(CliError::from)?;
    evolve_monitored(&run.spec, &run.schedule, &initial, &run.config).map_err(CliError::from)
}

/// Assemble the trajectory table: normalized photon number and atomic
/// population first, then the raw sampled series.
fn trajectory_table(record: &TrajectoryRecord) -> Table {
    let photons = record.series("nbar_total").unwrap_or(&[]);
    let pe = record.series("pe").unwrap_or(&[]);
    let nbar0 = photons.first().copied().unwrap_or(0.0);
    let pe_max = pe.iter().fold(0.0f64, |acc, v| acc.max(*v));

    let mut columns = vec!["gamma_t".to_string(), "nbar_norm".to_string(), "pe_norm".to_string()];
    columns.extend(record.series.iter().map(|s| s.name.clone()));

    let mut rows = Vec::with_capacity(record.times.len());
    for (i, t) in record.times.iter().enumerate() {
        let mut row = Vec::with_capacity(columns.len());
        row.push(Cell::Float(*t));
        let nbar_norm = if nbar0 > 0.0 { photons.get(i).copied().unwrap_or(0.0) / nbar0 } else { 0.0 };
        let pe_norm = if pe_max > 0.0 { pe.get(i).copied().unwrap_or(0.0) / pe_max } else { 0.0 };
        row.push(Cell::Float(nbar_norm));
        row.push(Cell::Float(pe_norm));
        for series in &record.series {
            row.push(Cell::Float(series.values[i]));
        }
        rows.push(row);
    }
    Table { columns, rows }
}

fn invariants_json(record: &TrajectoryRecord) -> Value {
    let inv = &record.metadata.invariants;
    json!({
        "max_trace_deviation": inv.max_trace_deviation,
        "max_hermiticity_defect": inv.max_hermiticity_defect,
        "min_eigenvalue": inv.min_eigenvalue,
        "samples_checked": inv.samples,
    })
}

/// The survival-ratio table: closed forms against brute-force nested sums
/// for every (n, m), ratios as exact rational strings.
fn ratio_table(n_max: usize, m_max: usize) -> Result<Table, CliError> {
    let columns = vec![
        "n".to_string(),
        "m".to_string(),
        "initial_excitations".to_string(),
        "final_excitations".to_string(),
        "survival_ratio".to_string(),
        "brute_force_ratio".to_string(),
        "closed_equals_brute".to_string(),
    ];
    let mut rows = Vec::new();
    for m in 2..=m_max {
        for n in 1..=n_max {
            let counts = all_counts(n, m).map_err(CliError::from)?;
            let initial = counts
                .iter()
                .find(|c| c.kind == CountKind::InitialExcitations)
                .expect("initial present")
                .value
                .clone();
            let final_count = counts
                .iter()
                .find(|c| c.kind == CountKind::FinalExcitations)
                .expect("final present")
                .value
                .clone();
            let ratio = survival_ratio(n, m).map_err(CliError::from)?;
            let brute = brute_survival_ratio(n, m).map_err(CliError::from)?;
            let equal = ratio == brute;
            rows.push(vec![
                Cell::Int(n as u64),
                Cell::Int(m as u64),
                Cell::Text(initial.to_string()),
                Cell::Text(final_count.to_string()),
                Cell::Text(format!("{}/{}", ratio.numer(), ratio.denom())),
                Cell::Text(format!("{}/{}", brute.numer(), brute.denom())),
                Cell::Int(u64::from(equal)),
            ]);
        }
    }
    Ok(Table { columns, rows })
}

fn planck_table(report: &darkfield::analysis::PlanckReport) -> Table {
    Table {
        columns: vec![
            "temperature_kelvin".into(),
            "u_total".into(),
            "u_one".into(),
            "ratio".into(),
            "u_total_quadrature".into(),
            "u_one_quadrature".into(),
        ],
        rows: vec![vec![
            Cell::Float(report.temperature),
            Cell::Float(report.u_total),
            Cell::Float(report.u_one),
            Cell::Float(report.ratio),
            Cell::Float(report.u_total_quadrature),
            Cell::Float(report.u_one_quadrature),
        ]],
    }
}

/// The `count` subcommand: every closed-form count for `(n, m)` next to its
/// brute-force value, plus the survival ratio, as one JSON object (or a CSV
/// table).
pub fn run_count(
    n: usize,
    m: usize,
    out: Option<PathBuf>,
    format: OutputFormat,
) -> Result<RunOutput, CliError> {
    let counts = all_counts(n, m).map_err(CliError::from)?;
    let brute: Vec<(CountKind, String)> = vec![
        (CountKind::Dark, brute_count_dark(n, m).map_err(CliError::from)?.to_string()),
        (CountKind::All, brute_count_all(n, m).map_err(CliError::from)?.to_string()),
        (CountKind::FixedN0, brute_count_fixed_n0(n, m, 0).map_err(CliError::from)?.to_string()),
        (
            CountKind::InitialExcitations,
            brute_initial_excitations(n, m).map_err(CliError::from)?.to_string(),
        ),
        (
            CountKind::FinalExcitations,
            brute_final_excitations(n, m).map_err(CliError::from)?.to_string(),
        ),
    ];

    let mut columns =
        vec!["kind".to_string(), "closed_form".to_string(), "brute_force".to_string(), "equal".to_string()];
    let mut rows = Vec::new();
    let mut all_equal = true;
    for (count, (brute_kind, brute_value)) in counts.iter().zip(&brute) {
        debug_assert_eq!(count.kind, *brute_kind);
        let closed = count.value.to_string();
        let equal = closed == *brute_value;
        all_equal &= equal;
        rows.push(vec![
            Cell::Text(count.kind.as_str().to_string()),
            Cell::Text(closed),
            Cell::Text(brute_value.clone()),
            Cell::Int(u64::from(equal)),
        ]);
    }
    if n >= 1 {
        let ratio = survival_ratio(n, m).map_err(CliError::from)?;
        let brute_ratio = brute_survival_ratio(n, m).map_err(CliError::from)?;
        let equal = ratio == brute_ratio;
        all_equal &= equal;
        rows.push(vec![
            Cell::Text("survival_ratio".into()),
            Cell::Text(format!("{}/{}", ratio.numer(), ratio.denom())),
            Cell::Text(format!("{}/{}", brute_ratio.numer(), brute_ratio.denom())),
            Cell::Int(u64::from(equal)),
        ]);
    }
    columns.push("n".into());
    columns.push("m".into());
    for row in &mut rows {
        row.push(Cell::Int(n as u64));
        row.push(Cell::Int(m as u64));
    }

    let table = Table { columns, rows };
    let payload = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => {
            let value = json!({
                "all_checks_pass": all_equal,
                "columns": table.columns,
                "m": m,
                "n": n,
                "rows": table.rows.iter()
                    .map(|row| Value::Array(row.iter().map(|c| match c {
                        Cell::Float(v) => json!(v),
                        Cell::Int(v) => json!(v),
                        Cell::Text(s) => json!(s),
                    }).collect()))
                    .collect::<Vec<_>>(),
            });
            output::pretty(&value)
        }
    };
    if !all_equal {
        return Err(CliError::numerical(format!(
            "closed forms disagree with brute force at n = {n}, m = {m}"
        )));
    }

    match out {
        Some(path) => {
            output::write_file(&path, &payload)?;
            Ok(RunOutput { data_path: Some(path), manifest_path: None, stdout_payload: None })
        }
        None => Ok(RunOutput { data_path: None, manifest_path: None, stdout_payload: Some(payload) }),
    }
}
