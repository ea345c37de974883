//! Scenario configuration: preset names, typed overrides, config-file
//! parsing (flat `key=value` text or a JSON object).

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::CliError;

/// The named scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Fig2,
    Fig3,
    FigS1,
    FigS2,
    Planck,
    Custom,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name.to_ascii_lowercase().as_str() {
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "figs1" => Ok(Self::FigS1),
            "figs2" => Ok(Self::FigS2),
            "planck" => Ok(Self::Planck),
            "custom" => Ok(Self::Custom),
            other => Err(CliError::config(format!(
                "unknown scenario '{other}' (expected fig2, fig3, figs1, figs2, planck, custom)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::FigS1 => "figs1",
            Self::FigS2 => "figs2",
            Self::Planck => "planck",
            Self::Custom => "custom",
        }
    }

    /// Data format when none is requested.
    pub fn default_format(self) -> OutputFormat {
        match self {
            Self::Planck => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::config(format!("unknown format '{other}' (csv or json)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }

    pub fn extension(self) -> &'static str {
        self.name()
    }
}

/// Typed scenario parameter overrides. Unset fields fall back to the preset
/// bindings; keys a preset does not accept are rejected at resolve time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub modes: Option<usize>,
    pub nbar: Option<f64>,
    pub cutoffs: Option<usize>,
    pub gamma_over_g: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub break_time: Option<f64>,
    pub detuning_step: Option<f64>,
    pub signs: Option<Vec<f64>>,
    pub sample_every: Option<usize>,
    pub temperature: Option<f64>,
}

impl Overrides {
    /// Every key this CLI understands, for diagnostics.
    pub const KEYS: [&'static str; 11] = [
        "modes",
        "nbar",
        "cutoffs",
        "gamma_over_g",
        "dt",
        "t_end",
        "break_time",
        "detuning_step",
        "signs",
        "sample_every",
        "temperature",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| {
            CliError::config(format!("invalid value '{value}' for {key} (expected {what})"))
        };
        match key {
            "modes" => self.modes = Some(value.parse().map_err(|_| bad("a positive integer"))?),
            "nbar" => self.nbar = Some(value.parse().map_err(|_| bad("a real number"))?),
            "cutoffs" => {
                self.cutoffs = Some(value.parse().map_err(|_| bad("a positive integer"))?)
            }
            "gamma_over_g" => {
                self.gamma_over_g = Some(value.parse().map_err(|_| bad("a real number"))?)
            }
            "dt" => self.dt = Some(value.parse().map_err(|_| bad("a real number"))?),
            "t_end" => self.t_end = Some(value.parse().map_err(|_| bad("a real number"))?),
            "break_time" => {
                self.break_time = Some(value.parse().map_err(|_| bad("a real number"))?)
            }
            "detuning_step" => {
                self.detuning_step = Some(value.parse().map_err(|_| bad("a real number"))?)
            }
            "signs" => {
                let signs: Result<Vec<f64>, _> =
                    value.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let signs = signs.map_err(|_| bad("comma-separated +1/-1"))?;
                if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
                    return Err(bad("comma-separated +1/-1"));
                }
                self.signs = Some(signs);
            }
            "sample_every" => {
                self.sample_every = Some(value.parse().map_err(|_| bad("a positive integer"))?)
            }
            "temperature" => {
                self.temperature = Some(value.parse().map_err(|_| bad("a real number"))?)
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown key '{other}' (known keys: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Keys that are set, in declaration order.
    pub fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        if self.modes.is_some() {
            keys.push("modes");
        }
        if self.nbar.is_some() {
            keys.push("nbar");
        }
        if self.cutoffs.is_some() {
            keys.push("cutoffs");
        }
        if self.gamma_over_g.is_some() {
            keys.push("gamma_over_g");
        }
        if self.dt.is_some() {
            keys.push("dt");
        }
        if self.t_end.is_some() {
            keys.push("t_end");
        }
        if self.break_time.is_some() {
            keys.push("break_time");
        }
        if self.detuning_step.is_some() {
            keys.push("detuning_step");
        }
        if self.signs.is_some() {
            keys.push("signs");
        }
        if self.sample_every.is_some() {
            keys.push("sample_every");
        }
        if self.temperature.is_some() {
            keys.push("temperature");
        }
        keys
    }
}

/// A fully parsed run request.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub overrides: Overrides,
    pub output_path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self { scenario, overrides: Overrides::default(), output_path: None, format: None }
    }

    pub fn effective_format(&self) -> OutputFormat {
        self.format.unwrap_or_else(|| self.scenario.default_format())
    }

    /// Parse a config file: either a JSON object or flat `key=value` lines
    /// (with `#` comments). Values already set on `self` win over the file.
    pub fn merge_file(&mut self, text: &str) -> Result<(), CliError> {
        let mut file_overrides = Overrides::default();
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(text)
                .map_err(|e| CliError::config(format!("config file is not valid JSON: {e}")))?;
            let object = value
                .as_object()
                .ok_or_else(|| CliError::config("config JSON must be an object"))?;
            for (key, val) in object {
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
                file_overrides.set(key, &text_value)?;
            }
        } else {
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::config(format!("expected key=value, got '{line}'"))
                })?;
                file_overrides.set(key.trim(), value.trim())?;
            }
        }
        // Flags beat the file.
        merge_missing(&mut self.overrides, file_overrides);
        Ok(())
    }

    /// Echo of the request for manifests (sorted keys by construction).
    pub fn echo(&self) -> BTreeMap<String, serde_json::Value> {
        let mut map = BTreeMap::new();
        map.insert("scenario".into(), serde_json::Value::from(self.scenario.name()));
        map.insert("format".into(), serde_json::Value::from(self.effective_format().name()));
        if let Some(path) = &self.output_path {
            map.insert("out".into(), serde_json::Value::from(path.display().to_string()));
        }
        map
    }
}

fn merge_missing(target: &mut Overrides, fallback: Overrides) {
    macro_rules! fill {
        ($($field:ident),*) => {
            $(if target.$field.is_none() { target.$field = fallback.$field; })*
        };
    }
    fill!(
        modes,
        nbar,
        cutoffs,
        gamma_over_g,
        dt,
        t_end,
        break_time,
        detuning_step,
        signs,
        sample_every,
        temperature
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_roundtrip() {
        for name in ["fig2", "fig3", "figs1", "figs2", "planck", "custom"] {
            assert_eq!(Scenario::parse(name).unwrap().name(), name);
        }
        // Scenario names are case-insensitive.
        assert_eq!(Scenario::parse("figS2").unwrap(), Scenario::FigS2);
        assert!(Scenario::parse("fig9").is_err());
    }

    #[test]
    fn overrides_parse_and_reject() {
        let mut o = Overrides::default();
        o.set("modes", "3").unwrap();
        o.set("nbar", "0.1").unwrap();
        o.set("signs", "-1, 1").unwrap();
        assert_eq!(o.modes, Some(3));
        assert_eq!(o.signs, Some(vec![-1.0, 1.0]));
        assert!(o.set("signs", "0.5,1").is_err());
        assert!(o.set("modes", "three").is_err());
        assert!(o.set("bogus", "1").is_err());
        assert_eq!(o.set_keys(), vec!["modes", "nbar", "signs"]);
    }

    #[test]
    fn config_file_formats() {
        let mut config = ScenarioConfig::new(Scenario::Custom);
        config
            .merge_file("# comment\nmodes = 2\nnbar=0.1\n\nsigns = -1,1\n")
            .unwrap();
        assert_eq!(config.overrides.modes, Some(2));
        assert_eq!(config.overrides.signs, Some(vec![-1.0, 1.0]));

        let mut json_config = ScenarioConfig::new(Scenario::Custom);
        json_config
            .merge_file(r#"{"modes": 2, "nbar": 0.1, "signs": [-1, 1]}"#)
            .unwrap();
        assert_eq!(json_config.overrides, config.overrides);

        // Flags win over the file.
        let mut flagged = ScenarioConfig::new(Scenario::Custom);
        flagged.overrides.set("modes", "5").unwrap();
        flagged.merge_file("modes = 2").unwrap();
        assert_eq!(flagged.overrides.modes, Some(5));

        let mut bad = ScenarioConfig::new(Scenario::Custom);
        assert!(bad.merge_file("modes: 2").is_err());
        assert!(bad.merge_file(r#"{"modes": [1, 2]}"#).is_err());
    }

    #[test]
    fn default_formats() {
        assert_eq!(ScenarioConfig::new(Scenario::Fig2).effective_format(), OutputFormat::Csv);
        assert_eq!(
            ScenarioConfig::new(Scenario::Planck).effective_format(),
            OutputFormat::Json
        );
    }
}
