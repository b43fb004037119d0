// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use qsynapse_cli::scenario::{calibration_only, config_digest};
use qsynapse_cli::{run_fusion_demo, run_scenario, ConfigError, FusionFile, RunError, RunOptions, Scenario};

/// Default output root when neither `--out` nor `output.directory` is set.
const OUT_ENV: &str = "QSYNAPSE_OUT";

#[derive(Parser)]
#[command(name = "qsynapse", about = "LIF networks driving a simulated quantum synapse", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace, quantum and meta files.
    Simulate(RunArgs),
    /// Run a scenario and its classical/quantum calibration.
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
        /// Also calibrate this many consecutive seeds in parallel (sweep.csv).
        #[arg(long)]
        sweep: Option<u64>,
    },
    /// Run the sensor-fusion demo.
    Fuse(RunArgs),
    /// Check a scenario without running it.
    Validate(RunArgs),
    /// Print version information.
    Version,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let quiet = match &cli.command {
        Command::Simulate(a) | Command::Fuse(a) | Command::Validate(a) => a.quiet,
        Command::Calibrate { run, .. } => run.quiet,
        Command::Version => false,
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "error" } else { "info" }))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Simulate(args) => simulate(&args, false, None),
        Command::Calibrate { run, sweep } => simulate(&run, true, sweep),
        Command::Fuse(args) => fuse(&args),
        Command::Validate(args) => validate(&args),
        Command::Version => {
            println!("qsynapse {} (trace format {})", env!("CARGO_PKG_VERSION"), qsynapse_cli::TRACE_FORMAT_VERSION);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn out_dir(args: &RunArgs, configured: Option<&Path>) -> PathBuf {
    if let Some(dir) = &args.out {
        return dir.clone();
    }
    let base = args.config.parent().unwrap_or(Path::new(""));
    if let Some(dir) = configured {
        return base.join(dir);
    }
    let stem = args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    match std::env::var_os(OUT_ENV) {
        Some(root) => PathBuf::from(root).join(stem),
        None => PathBuf::from("qsynapse-out").join(stem),
    }
}

fn validate(args: &RunArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| ConfigError::Read { path: args.config.clone(), source })?;
    if text.contains("[fusion]") {
        FusionFile::parse(&text)?;
    } else {
        let scenario = Scenario::load(&args.config)?;
        for w in &scenario.warnings {
            log::warn!("{w}");
        }
    }
    log::info!("{} is valid (sha256 {})", args.config.display(), config_digest(text.as_bytes()));
    Ok(())
}

fn simulate(args: &RunArgs, calibrate: bool, sweep: Option<u64>) -> Result<(), Failure> {
    let scenario = Scenario::load(&args.config)?;
    if calibrate && scenario.config.calibration.is_none() {
        return Err(Failure::Validation("calibrate needs a [calibration] section".into()));
    }
    let seed = args.seed.unwrap_or(scenario.seed());
    let dir = out_dir(args, scenario.config.output.directory.as_deref());
    let summary = run_scenario(&scenario, seed, &dir, RunOptions { calibrate })?;
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    log::info!("wrote {} to {}", summary.files.join(", "), dir.display());
    if let Some(report) = &summary.calibration {
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        println!(
            "calibration {verdict}: tv = {}, ks = {}, epsilon = {}",
            report.tv_distance, report.ks_statistic, report.epsilon
        );
        if let Some(f) = &report.failure {
            println!("calibration failure: {f}");
        }
    }
    if let Some(n) = sweep {
        let reports: Vec<_> = (0..n)
            .into_par_iter()
            .map(|i| {
                let s = seed.wrapping_add(i);
                calibration_only(&scenario, s).map(|r| (s, r))
            })
            .collect::<Result<_, _>>()?;
        let path = dir.join("sweep.csv");
        let io = |source| RunError::Io { path: path.clone(), source };
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io)?);
        writeln!(w, "seed,tv_distance,ks_statistic,pass").map_err(io)?;
        for (s, r) in &reports {
            writeln!(w, "{s},{},{},{}", r.tv_distance, r.ks_statistic, r.pass).map_err(io)?;
        }
        w.flush().map_err(io)?;
        let passed = reports.iter().filter(|(_, r)| r.pass).count();
        println!("sweep: {passed} of {n} seeds pass");
    }
    Ok(())
}

fn fuse(args: &RunArgs) -> Result<(), Failure> {
    let file = FusionFile::load(&args.config)?;
    let seed = args.seed.unwrap_or(file.fusion.seed);
    let report = run_fusion_demo(&file, seed).map_err(Failure::Runtime)?;
    let dir = out_dir(args, None);
    std::fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    for (name, write) in [("fusion.csv", FusionWrite::Table), ("fusion_summary.csv", FusionWrite::Summary)] {
        let path = dir.join(name);
        let io = |source| RunError::Io { path: path.clone(), source };
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io)?);
        match write {
            FusionWrite::Table => report.write_csv(&mut w),
            FusionWrite::Summary => report.write_summary(&mut w),
        }
        .and_then(|()| w.flush())
        .map_err(io)?;
    }
    if let Some(f) = report.failure {
        return Err(Failure::Runtime(format!("fusion failed: {f}")));
    }
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!("fusion {verdict}: tv = {} (epsilon {})", report.tv_distance, report.epsilon);
    println!("reference = {:?}", report.reference);
    println!("fused     = {:?}", report.fused);
    Ok(())
}

#[derive(Clone, Copy)]
enum FusionWrite {
    Table,
    Summary,
}
