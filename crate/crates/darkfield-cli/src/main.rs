use std::path::PathBuf;
use std::process::ExitCode;

use darkfield_cli::config::{OutputFormat, Scenario, ScenarioConfig};
use darkfield_cli::{parse_sweep_manifest, run_count, run_scenario, run_sweep, CliError};

const USAGE: &str = "\
darkfield - bright/dark collective-mode scenarios

USAGE:
  darkfield run <scenario> [--key value ...] [--config FILE] [--out PATH] [--format csv|json]
  darkfield sweep --manifest FILE [--workers N]
  darkfield count --n N --m M [--out PATH] [--format csv|json]

SCENARIOS:
  fig2     M equal resonant thermal modes, gamma/g = 10, full master equation
  fig3     two crossed modes, |g| = gamma/4, sign flip at t = 50
  figs1    survival-ratio table (closed form vs brute force, N <= 10, M <= 8)
  figs2    five detuned modes, delta = gamma/15 ladder, full energy drain
  planck   free-space energy-density report (--temperature K)
  custom   all parameters by hand (--modes, --nbar, --cutoffs, --gamma_over_g, --t_end, ...)

OVERRIDE KEYS:
  modes nbar cutoffs gamma_over_g dt t_end break_time detuning_step signs
  sample_every temperature

Without --out, data goes to stdout and no manifest is written. With --out,
a JSON manifest lands next to the data file (<out>.manifest.json).

EXIT CODES:
  0 success   1 configuration error   2 numerical failure   3 partial sweep failure
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(args: &[String]) -> Result<ExitCode, CliError> {
    let mut args = args.iter().map(String::as_str);
    match args.next() {
        Some("run") => cmd_run(&mut args),
        Some("sweep") => cmd_sweep(&mut args),
        Some("count") => cmd_count(&mut args),
        Some("help") | Some("--help") | Some("-h") => {
            print!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        Some(other) => Err(CliError::config(format!(
            "unknown subcommand '{other}'; try 'darkfield help'"
        ))),
        None => {
            print!("{USAGE}");
            Ok(ExitCode::from(1))
        }
    }
}

fn expect_value<'a>(
    args: &mut impl Iterator<Item = &'a str>,
    flag: &str,
) -> Result<&'a str, CliError> {
    args.next().ok_or_else(|| CliError::config(format!("flag {flag} needs a value")))
}

fn cmd_run<'a>(args: &mut impl Iterator<Item = &'a str>) -> Result<ExitCode, CliError> {
    let scenario_name =
        args.next().ok_or_else(|| CliError::config("run needs a scenario name"))?;
    let mut config = ScenarioConfig::new(Scenario::parse(scenario_name)?);
    let mut config_file: Option<PathBuf> = None;

    while let Some(flag) = args.next() {
        let Some(key) = flag.strip_prefix("--") else {
            return Err(CliError::config(format!("expected a --flag, got '{flag}'")));
        };
        let value = expect_value(args, flag)?;
        match key {
            "out" => config.output_path = Some(PathBuf::from(value)),
            "format" => config.format = Some(OutputFormat::parse(value)?),
            "config" => config_file = Some(PathBuf::from(value)),
            other => config.overrides.set(other, value)?,
        }
    }
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        config.merge_file(&text)?;
    }

    let output = run_scenario(&config)?;
    if let Some(payload) = output.stdout_payload {
        print!("{payload}");
    } else if let Some(path) = output.data_path {
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep<'a>(args: &mut impl Iterator<Item = &'a str>) -> Result<ExitCode, CliError> {
    let mut manifest: Option<PathBuf> = None;
    let mut workers: Option<usize> = None;
    while let Some(flag) = args.next() {
        match flag {
            "--manifest" => manifest = Some(PathBuf::from(expect_value(args, flag)?)),
            "--workers" => {
                let value = expect_value(args, flag)?;
                workers = Some(value.parse().map_err(|_| {
                    CliError::config(format!("invalid worker count '{value}'"))
                })?);
            }
            other => return Err(CliError::config(format!("unknown sweep flag '{other}'"))),
        }
    }
    let manifest =
        manifest.ok_or_else(|| CliError::config("sweep needs --manifest FILE"))?;
    let text = std::fs::read_to_string(&manifest).map_err(|e| {
        CliError::config(format!("cannot read manifest {}: {e}", manifest.display()))
    })?;
    let configs = parse_sweep_manifest(&text)?;
    let workers = workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    let report = run_sweep(&configs, workers)?;
    for (path, outcome) in &report.outcomes {
        match outcome {
            Ok(()) => eprintln!("ok    {}", path.display()),
            Err(e) => eprintln!("FAIL  {}: {}", path.display(), e.message),
        }
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn cmd_count<'a>(args: &mut impl Iterator<Item = &'a str>) -> Result<ExitCode, CliError> {
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut out: Option<PathBuf> = None;
    let mut format = OutputFormat::Json;
    while let Some(flag) = args.next() {
        let value = expect_value(args, flag)?;
        match flag {
            "--n" => {
                n = Some(value.parse().map_err(|_| {
                    CliError::config(format!("invalid --n value '{value}'"))
                })?)
            }
            "--m" => {
                m = Some(value.parse().map_err(|_| {
                    CliError::config(format!("invalid --m value '{value}'"))
                })?)
            }
            "--out" => out = Some(PathBuf::from(value)),
            "--format" => format = OutputFormat::parse(value)?,
            other => return Err(CliError::config(format!("unknown count flag '{other}'"))),
        }
    }
    let n = n.ok_or_else(|| CliError::config("count needs --n"))?;
    let m = m.ok_or_else(|| CliError::config("count needs --m"))?;
    let output = run_count(n, m, out, format)?;
    if let Some(payload) = output.stdout_payload {
        print!("{payload}");
    } else if let Some(path) = output.data_path {
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
