use clap::{Parser, Subcommand};
use feqo::analysis::regime::{central_couplings, classify_regime};
use feqo::config::ExperimentParams;
use feqo::constants::NM;
use feqo::io::{render_ppm, ColorMap, GridFile, RenderOptions, Scale};
use feqo::physics::two_level_validity;
use feqo::presets::{preset, PresetName};
use feqo::runner::{run, RunOutcome};
use feqo::sweep::{sweep, Axis, SweepOptions};
use feqo::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Free-electron wavepackets in a phase-matched optical grating.
///
/// Exit codes: 0 success, 1 validation error, 2 solver abort, 3 I/O error,
/// 4 config syntax error.
#[derive(Parser)]
#[command(name = "feqo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a named preset, or print its configuration.
    Preset {
        name: String,
        #[arg(long)]
        emit_config: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the cartesian product of one or more axes over a base configuration.
    Sweep {
        config: PathBuf,
        /// key=v1,v2,... ; repeat for more axes.
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 64)]
        cap: usize,
        /// Only classify each point; no propagation.
        #[arg(long)]
        classify_only: bool,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Render a binary grid file as a PPM image.
    Render {
        grid: PathBuf,
        /// Symmetric-log normalization instead of linear.
        #[arg(long)]
        log: bool,
        /// viridis, gray or diverging
        #[arg(long, default_value = "viridis")]
        colormap: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Parse and validate a configuration without running it.
    Validate { config: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(c) => c.exit_code() as u8,
        Error::Io { .. } => 3,
        Error::NormDrift { .. } | Error::Singular { .. } | Error::StepTooLarge { .. } | Error::NoPeak(_) => 2,
        Error::Domain { .. } | Error::Grid(_) | Error::Representation { .. } | Error::Format(_) => 1,
    }
}

fn finish_run(out: RunOutcome) -> ExitCode {
    let m = &out.manifest;
    println!("regime: {}", m.regime);
    println!("klein-cook Q = {:.4}, validity ratio = {:.4}", m.klein_cook_q, m.validity_ratio);
    println!(
        "final p(+q/2) = {:.4}, p(-q/2) = {:.4}, leakage = {:.4}",
        m.final_p_plus_half, m.final_p_minus_half, m.final_leakage
    );
    println!("max norm drift = {:.3e}", m.max_norm_drift);
    println!("wrote {} files to {}", m.files.len() + 1, out.out_dir.display());
    if out.aborted() {
        eprintln!("solver aborted: {}", m.error.as_deref().unwrap_or(""));
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn run_params(params: &ExperimentParams, out: &Path) -> Result<ExitCode, Error> {
    Ok(finish_run(run(params, out)?))
}

fn validate(path: &Path) -> Result<ExitCode, Error> {
    let params = ExperimentParams::from_file(path)?;
    let r = params.resolve()?;
    let derived = central_couplings(&params)?;
    let label = classify_regime(&params, &derived);
    println!("grating period = {:.6} nm", r.laser.grating_period / NM);
    println!("q = {:.6e} rad/m", r.laser.q);
    println!("domain = {:.3} nm, {} points", r.grid.length() / NM, r.grid.n_points());
    println!("steps = {}, dt = {:.4e} s", r.evolution.n_steps, r.evolution.dt());
    println!("klein-cook Q = {:.4}", derived.klein_cook_q);
    println!("validity ratio = {:.4}", two_level_validity(&derived).ratio);
    println!("regime: {} ({})", label.regime, label.rationale());
    Ok(ExitCode::SUCCESS)
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { config, out } => run_params(&ExperimentParams::from_file(&config)?, &out),
        Command::Preset { name, emit_config, out } => {
            let params = preset(PresetName::parse(&name)?)?;
            if emit_config {
                print!("{}", params.to_config_string());
                Ok(ExitCode::SUCCESS)
            } else {
                run_params(&params, &out)
            }
        }
        Command::Sweep {
            config,
            axes,
            workers,
            cap,
            classify_only,
            out,
        } => {
            let base = ExperimentParams::from_file(&config)?;
            let axes: Vec<Axis> = axes.iter().map(|a| Axis::parse(a)).collect::<Result<_, _>>()?;
            let opts = SweepOptions {
                workers,
                cap,
                classify_only,
            };
            let rows = sweep(&base, &axes, &out, &opts)?;
            for r in &rows {
                println!("{:4} {:<24} {}", r.index, r.values.join(","), r.label);
            }
            println!("wrote {}", out.join("regime_map.csv").display());
            let aborted = rows.iter().any(|r| r.status == "aborted");
            Ok(if aborted { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Render {
            grid,
            log,
            colormap,
            output,
        } => {
            let color_map = ColorMap::parse(&colormap).ok_or_else(|| {
                Error::Format(format!("unknown colour map `{colormap}`; expected viridis, gray or diverging"))
            })?;
            let g = GridFile::read(&grid)?;
            let opts = RenderOptions {
                scale: if log { Scale::SymLog { linthresh: 1e-3 } } else { Scale::Linear },
                color_map,
            };
            std::fs::write(&output, render_ppm(&g, &opts)).map_err(|e| Error::Io {
                path: output.display().to_string(),
                source: e,
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => validate(&config),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
