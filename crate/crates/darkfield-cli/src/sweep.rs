//! Concurrent execution of many scenario runs.
//!
//! Each run is deterministic in isolation and owns its own output files, so
//! the bytes on disk cannot depend on scheduling; the worker count only
//! changes the wall clock.

use std::collections::{BTreeSet, VecDeque};
use std::path::PathBuf;
use std::sync::Mutex;

use crate::config::{OutputFormat, Scenario, ScenarioConfig};
use crate::runner::run_scenario;
use crate::CliError;

/// Result of a sweep: per-run outcomes in manifest order.
#[derive(Debug)]
pub struct SweepReport {
    pub outcomes: Vec<(PathBuf, Result<(), CliError>)>,
}

impl SweepReport {
    pub fn failures(&self) -> Vec<(&PathBuf, &CliError)> {
        self.outcomes
            .iter()
            .filter_map(|(path, result)| result.as_ref().err().map(|e| (path, e)))
            .collect()
    }

    /// 0 on full success, 3 when any run failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures().is_empty() {
            0
        } else {
            3
        }
    }
}

/// Parse a sweep manifest: either a JSON array of run objects
/// (`{"scenario", "overrides", "out", "format"}`) or plain text with one
/// run per line (`<scenario> key=value ... out=PATH [format=csv|json]`).
pub fn parse_sweep_manifest(text: &str) -> Result<Vec<ScenarioConfig>, CliError> {
    let trimmed = text.trim_start();
    let mut configs = Vec::new();
    if trimmed.starts_with('[') {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("sweep manifest is not valid JSON: {e}")))?;
        let array = value
            .as_array()
            .ok_or_else(|| CliError::config("sweep manifest must be a JSON array"))?;
        for entry in array {
            let object = entry
                .as_object()
                .ok_or_else(|| CliError::config("each sweep entry must be an object"))?;
            let scenario_name = object
                .get("scenario")
                .and_then(|v| v.as_str())
                .ok_or_else(|| CliError::config("sweep entry needs a 'scenario' string"))?;
            let mut config = ScenarioConfig::new(Scenario::parse(scenario_name)?);
            if let Some(overrides) = object.get("overrides") {
                let obj = overrides
                    .as_object()
                    .ok_or_else(|| CliError::config("'overrides' must be an object"))?;
                for (key, val) in obj {
                    let text_value = match val {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Number(n) => n.to_string(),
                        serde_json::Value::Array(items) => items
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                        other => other.to_string(),
                    };
                    config.overrides.set(key, &text_value)?;
                }
            }
            let out = object
                .get("out")
                .and_then(|v| v.as_str())
                .ok_or_else(|| CliError::config("sweep entry needs an 'out' path"))?;
            config.output_path = Some(PathBuf::from(out));
            if let Some(format) = object.get("format").and_then(|v| v.as_str()) {
                config.format = Some(OutputFormat::parse(format)?);
            }
            configs.push(config);
        }
    } else {
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let scenario_name = parts.next().expect("nonempty line");
            let mut config = ScenarioConfig::new(Scenario::parse(scenario_name)?);
            for part in parts {
                let (key, value) = part.split_once('=').ok_or_else(|| {
                    CliError::config(format!("expected key=value in sweep line, got '{part}'"))
                })?;
                match key {
                    "out" => config.output_path = Some(PathBuf::from(value)),
                    "format" => config.format = Some(OutputFormat::parse(value)?),
                    other => config.overrides.set(other, value)?,
                }
            }
            if config.output_path.is_none() {
                return Err(CliError::config(format!(
                    "sweep line '{line}' is missing out=PATH"
                )));
            }
            configs.push(config);
        }
    }
    Ok(configs)
}

/// Run the configs concurrently with at most `workers` threads.
pub fn run_sweep(configs: &[ScenarioConfig], workers: usize) -> Result<SweepReport, CliError> {
    let mut seen = BTreeSet::new();
    for config in configs {
        let path = config
            .output_path
            .as_ref()
            .ok_or_else(|| CliError::config("every sweep run needs an output path"))?;
        if !seen.insert(path.clone()) {
            return Err(CliError::config(format!(
                "duplicate output path in sweep: {}",
                path.display()
            )));
        }
    }

    let workers = workers.max(1).min(configs.len().max(1));
    let queue: Mutex<VecDeque<usize>> = Mutex::new((0..configs.len()).collect());
    let results: Mutex<Vec<Option<Result<(), CliError>>>> =
        Mutex::new(vec![None; configs.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = queue.lock().expect("queue lock").pop_front();
                let Some(index) = next else { break };
                let outcome = run_scenario(&configs[index]).map(|_| ());
                results.lock().expect("results lock")[index] = Some(outcome);
            });
        }
    });

    let outcomes = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .zip(configs)
        .map(|(result, config)| {
            let path = config.output_path.clone().expect("validated above");
            (path, result.expect("every index processed"))
        })
        .collect();
    Ok(SweepReport { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_manifest_round_trip() {
        let text = "# sweep\nfig2 modes=1 out=a.csv\nfig2 modes=2 out=b.csv format=json\n";
        let configs = parse_sweep_manifest(text).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].overrides.modes, Some(1));
        assert_eq!(configs[1].format, Some(OutputFormat::Json));
        assert_eq!(configs[1].output_path.as_ref().unwrap().to_str(), Some("b.csv"));
    }

    #[test]
    fn json_manifest_round_trip() {
        let text = r#"[
            {"scenario": "fig2", "overrides": {"modes": 1}, "out": "a.csv"},
            {"scenario": "planck", "overrides": {"temperature": 5770}, "out": "p.json", "format": "json"}
        ]"#;
        let configs = parse_sweep_manifest(text).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].overrides.modes, Some(1));
        assert_eq!(configs[1].overrides.temperature, Some(5770.0));
    }

    #[test]
    fn rejects_duplicates_and_missing_paths() {
        let dup = parse_sweep_manifest("fig2 out=a.csv\nfig3 out=a.csv\n").unwrap();
        assert!(run_sweep(&dup, 2).is_err());
        assert!(parse_sweep_manifest("fig2 modes=1\n").is_err());
    }

    #[test]
    fn empty_manifest_is_a_successful_noop() {
        let configs = parse_sweep_manifest("").unwrap();
        assert!(configs.is_empty());
        let report = run_sweep(&configs, 4).unwrap();
        assert_eq!(report.exit_code(), 0);
    }
}
