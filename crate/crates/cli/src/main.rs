//! `ra-sim`: run rotatable-antenna link scenarios from TOML configs.

mod config;
mod error;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use ra_sim_core::engine::{compare_modes, run_scenario, Comparison, ScenarioConfig};
use rayon::prelude::*;
use toml::Value;

use crate::error::CliError;

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "RA_SIM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "ra-sim-out";

#[derive(Parser)]
#[command(name = "ra-sim", version, about = "Vision-steered rotatable antenna link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config file (TOML)
    config: PathBuf,
    /// Output directory [default: $RA_SIM_OUT_DIR or ./ra-sim-out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. --set camera.hfov_deg=45
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-tick records
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write every synthetic detection to detections.csv
        #[arg(long)]
        dump_detections: bool,
        /// Also write per-frame tracker state to tracks.csv
        #[arg(long)]
        dump_tracks: bool,
    },
    /// Run the scenario with a rotatable and a fixed antenna and compare
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Check a config and print it with defaults filled in
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Compare modes over a parameter grid
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid axis as key=start:stop:steps; repeat for a cartesian product
        #[arg(long, required = true, value_name = "KEY=START:STOP:STEPS")]
        grid: Vec<String>,
        /// Worker threads [default: all cores]
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Writes to stdout, ignoring a closed pipe (`ra-sim ... | head`).
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn out_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn load(common: &Common) -> Result<ScenarioConfig, CliError> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    config::load(&common.config, &overrides)
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(anyhow::anyhow!("cannot create {}: {e}", dir.display())))
}

fn cmd_run(common: &Common, dump_detections: bool, dump_tracks: bool) -> Result<(), CliError> {
    let started = now_unix();
    let cfg = load(common)?;
    let dir = out_dir(common.out.as_deref());
    let out = run_scenario(&cfg)?;
    prepare(&dir)?;
    output::write_records(&dir.join("records.csv"), &out.records)?;
    if dump_detections {
        output::write_detections(&dir.join("detections.csv"), &out.detections)?;
    }
    if dump_tracks {
        output::write_tracks(&dir.join("tracks.csv"), &out.tracks)?;
    }
    let mut summary = output::summary_block("run", &out.summary);
    summary.push_str(&format!(
        "camera_frames         {}\nframes_captured       {}\n",
        out.camera_frames, out.frames_captured
    ));
    fs::write(dir.join("summary.txt"), &summary)?;
    output::write_manifest(&dir, &common.config, cfg.seed, started)?;
    emit(&summary);
    emit(&format!("wrote {}\n", dir.display()));
    Ok(())
}

fn write_comparison(dir: &Path, c: &Comparison) -> Result<(), CliError> {
    prepare(dir)?;
    output::write_comparison(&dir.join("compare.csv"), &c.rows)?;
    output::write_records(&dir.join("records_rotatable.csv"), &c.rotatable.records)?;
    output::write_records(&dir.join("records_fixed.csv"), &c.fixed.records)?;
    fs::write(dir.join("summary.txt"), output::comparison_summary(c))?;
    fs::write(dir.join("plot.svg"), output::plot_svg(&c.rows))?;
    Ok(())
}

fn cmd_compare(common: &Common) -> Result<(), CliError> {
    let started = now_unix();
    let cfg = load(common)?;
    let dir = out_dir(common.out.as_deref());
    let c = compare_modes(&cfg)?;
    write_comparison(&dir, &c)?;
    output::write_manifest(&dir, &common.config, cfg.seed, started)?;
    emit(&output::comparison_summary(&c));
    emit(&format!("wrote {}\n", dir.display()));
    Ok(())
}

fn cmd_validate(path: &Path, overrides: &[String]) -> Result<(), CliError> {
    let cfg = config::load(path, overrides)?;
    emit(&config::to_toml(&cfg));
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
struct GridAxis {
    key: String,
    values: Vec<Value>,
}

fn parse_grid(spec: &str) -> Result<GridAxis, CliError> {
    let bad = || CliError::Validation(format!("grid `{spec}` must look like key=start:stop:steps"));
    let (key, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let integral = start.fract() == 0.0 && stop.fract() == 0.0 && !range.contains('.');
    let values = (0..steps)
        .map(|i| {
            let x = if steps == 1 {
                start
            } else {
                start + (stop - start) * i as f64 / (steps - 1) as f64
            };
            if integral && x.fract() == 0.0 {
                Value::Integer(x as i64)
            } else {
                Value::Float(x)
            }
        })
        .collect();
    Ok(GridAxis {
        key: key.trim().to_string(),
        values,
    })
}

fn grid_points(axes: &[GridAxis]) -> Vec<Vec<Value>> {
    axes.iter().fold(vec![vec![]], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect()
    })
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Float(x) => output::num(*x),
        other => other.to_string(),
    }
}

fn cmd_sweep(common: &Common, grid: &[String], jobs: Option<usize>) -> Result<(), CliError> {
    let started = now_unix();
    let axes = grid.iter().map(|g| parse_grid(g)).collect::<Result<Vec<_>, _>>()?;
    let mut base = config::read_table(&common.config)?;
    for o in &common.overrides {
        config::apply_override(&mut base, o)?;
    }
    if let Some(seed) = common.seed {
        config::set_path(&mut base, "seed", Value::Integer(seed as i64))?;
    }
    let points = grid_points(&axes);
    // validate every point before running any of them
    let configs = points
        .iter()
        .enumerate()
        .map(|(i, values)| {
            let mut t = base.clone();
            for (axis, v) in axes.iter().zip(values) {
                config::set_path(&mut t, &axis.key, v.clone())?;
            }
            config::finish(t).map_err(|e| match e {
                CliError::Validation(m) => CliError::Validation(format!("grid point {i}:\n{m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let dir = out_dir(common.out.as_deref());
    prepare(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.into()))?;
    let results: Vec<Result<Comparison, CliError>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                let c = compare_modes(cfg)?;
                write_comparison(&dir.join(format!("point_{i:04}")), &c)?;
                Ok(c)
            })
            .collect()
    });

    let mut w = csv::Writer::from_path(dir.join("index.csv"))?;
    let mut header = vec!["point".to_string(), "dir".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(
        [
            "power_gain_db",
            "prx_mean_rotatable_dbm",
            "prx_mean_fixed_dbm",
            "pointing_error_p95_rotatable_rad",
            "tracking_fraction_rotatable",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for (i, (values, res)) in points.iter().zip(results).enumerate() {
        let c = res?;
        let mut row = vec![i.to_string(), format!("point_{i:04}")];
        row.extend(values.iter().map(value_text));
        row.extend([
            output::num(c.power_gain_db),
            output::num(c.rotatable.summary.prx_mean_dbm),
            output::num(c.fixed.summary.prx_mean_dbm),
            output::num(c.rotatable.summary.pointing_error_p95),
            output::num(c.rotatable.summary.tracking_fraction),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);
    let seed = configs.first().map_or(0, |c| c.seed);
    output::write_manifest(&dir, &common.config, seed, started)?;
    emit(&format!("{} grid points written to {}\n", points.len(), dir.display()));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            common,
            dump_detections,
            dump_tracks,
        } => cmd_run(common, *dump_detections, *dump_tracks),
        Command::Compare { common } => cmd_compare(common),
        Command::Validate { config, overrides } => cmd_validate(config, overrides),
        Command::Sweep { common, grid, jobs } => cmd_sweep(common, grid, *jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("pattern.hpbw_deg=30:90:3").unwrap();
        assert_eq!(g.key, "pattern.hpbw_deg");
        assert_eq!(g.values, vec![Value::Integer(30), Value::Integer(60), Value::Integer(90)]);
        let g = parse_grid("detector.pixel_noise_sigma=0.0:1.0:3").unwrap();
        assert_eq!(g.values, vec![Value::Float(0.0), Value::Float(0.5), Value::Float(1.0)]);
        assert!(parse_grid("x=1:2").is_err());
        assert!(parse_grid("x=1:2:0").is_err());
    }

    #[test]
    fn grid_is_cartesian() {
        let a = parse_grid("a=1:2:2").unwrap();
        let b = parse_grid("b=0:1:3").unwrap();
        let pts = grid_points(&[a, b]);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![Value::Integer(1), Value::Float(0.5)]);
    }
}
