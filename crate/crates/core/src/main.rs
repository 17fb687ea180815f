use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use forensic_bias::harness::{parse_override, run_preset, validate_config, HarnessError, Preset};

#[derive(Parser)]
#[command(name = "bias", version, about = "Seeded experiments on contextual bias in forensic decisions")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write its outputs and manifest.
    Run {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        seed: u64,
        /// Override one parameter; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Flat TOML file of parameters, applied before `--set`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; outputs do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available presets.
    ListPresets,
    /// Check a config file and print it with every default filled in.
    Validate {
        file: PathBuf,
        #[arg(long)]
        preset: Option<String>,
    },
}

fn read(path: &PathBuf) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::ListPresets => {
            for p in Preset::ALL {
                println!("{:<18} {}", p.name(), p.summary());
            }
        }
        Command::Validate { file, preset } => {
            let mut overrides = Vec::new();
            if let Some(p) = preset {
                overrides.push(("preset".to_string(), toml::Value::String(p)));
            }
            let config = validate_config(&read(&file)?, &overrides)?;
            let text = serde_json::to_string_pretty(&config).map_err(|e| HarnessError::Output(e.to_string()))?;
            println!("{text}");
        }
        Command::Run {
            preset,
            seed,
            overrides,
            config,
            out,
            threads,
        } => {
            let preset: Preset = preset.parse()?;
            let raw = match &config {
                Some(path) => read(path)?,
                None => String::new(),
            };
            let overrides = overrides
                .iter()
                .map(|o| parse_override(o))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = validate_config(&raw, &overrides)?;
            if let Some(p) = cfg.preset {
                if p != preset {
                    return Err(HarnessError::Usage(format!(
                        "config names preset `{p}` but --preset is `{preset}`"
                    )));
                }
            }
            if let Some(s) = cfg.seed {
                if s != seed {
                    return Err(HarnessError::Usage(format!("config names seed {s} but --seed is {seed}")));
                }
            }
            if threads == Some(0) {
                return Err(HarnessError::Usage("--threads must be >= 1".into()));
            }
            let manifest = run_preset(preset, seed, &cfg.parameters, &out, threads)?;
            for a in &manifest.artifacts {
                println!("{}  {}", a.sha256, out.join(&a.path).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bias: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
