//! Experiment runner CLI. Progress goes to stderr; data only lands in the
//! output directory.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tfplink::exp::config::{apply_overrides, bundled_preset, preset_names, Profile};
use tfplink::exp::results::{RunManifest, RESULT_SCHEMA_VERSION};
use tfplink::exp::{emit_results, load_config_str, run_experiment};

#[derive(Parser)]
#[command(name = "tfplink", version, about = "Time-frequency-packed optical link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (a file path or a bundled preset name).
    Run {
        config: String,
        /// desk: scaled-down sequences/carriers; full: published budgets.
        #[arg(long, default_value = "desk")]
        profile: String,
        /// Output directory for results.csv, manifest.json, figure CSVs.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Config overrides, dotted-key=value; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Reference scenario id for the delta figure file.
        #[arg(long)]
        reference: Option<String>,
    },
    /// List the bundled presets.
    Presets,
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run {
            config,
            profile,
            out,
            seed,
            mut overrides,
            reference,
        } => {
            let profile = match profile.as_str() {
                "desk" => Profile::Desk,
                "full" => Profile::Full,
                other => return Err(format!("unknown profile {other:?}; use desk or full")),
            };
            let text = match bundled_preset(&config) {
                Some(t) => t.to_string(),
                None => std::fs::read_to_string(&config)
                    .map_err(|e| format!("cannot read {config}: {e}"))?,
            };
            if let Some(seed) = seed {
                overrides.push(format!("seed={seed}"));
            }
            let text = apply_overrides(&text, &overrides).map_err(|e| e.to_string())?;
            let cfg = load_config_str(&text).map_err(|e| e.to_string())?;
            eprintln!(
                "running scenario {:?} ({:?} profile), seed {}",
                cfg.scenario, profile, cfg.seed
            );
            let started = std::time::Instant::now();
            let rows = run_experiment(&cfg, profile).map_err(|e| e.to_string())?;
            let ok = rows.iter().filter(|r| r.is_ok()).count();
            eprintln!(
                "finished {} points ({} ok) in {:.1} s",
                rows.len(),
                ok,
                started.elapsed().as_secs_f64()
            );
            let manifest = RunManifest {
                schema_version: RESULT_SCHEMA_VERSION,
                package_version: env!("CARGO_PKG_VERSION").into(),
                profile: format!("{profile:?}").to_lowercase(),
                seed: cfg.seed,
                config_echo: cfg.echo(),
                rows: rows.len(),
            };
            let files = emit_results(&rows, &out, &manifest, reference.as_deref())
                .map_err(|e| e.to_string())?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            if ok == 0 && !rows.is_empty() {
                return Err("every grid point failed".into());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
