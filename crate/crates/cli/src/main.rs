use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use detproj::estimates::{gronwall_classical, gronwall_generalized_check};
use detproj::experiment::{
    certification_artifact, certify_projection, estimate_suite, twin_run, CertifyConfig,
    ExperimentConfig,
};
use detproj::snapshot;
use detproj::solver::{integrate, SolverConfig};
use detproj::Error;

const EXIT_VIOLATION: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "detproj",
    version,
    about = "Determining-projection experiments for 2D Navier–Stokes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Final time `t_end`.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SnapshotFormat {
    Csv,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv and field snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "csv")]
        snapshot_format: SnapshotFormat,
    },
    /// Twin-solution experiment; writes twin_report.json and twin_norms.csv.
    Twin {
        #[command(flatten)]
        common: Common,
    },
    /// Verify every applicable a priori estimate; writes estimates.json and estimates.csv.
    Estimates {
        #[command(flatten)]
        common: Common,
        /// Averaging window for time-averaged estimates (default: one dissipation time).
        #[arg(long)]
        averaging: Option<f64>,
    },
    /// Measure approximation constants for a projection family; writes certification.toml.
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Check a `time,alpha,beta,y` series file against the Gronwall bounds; writes gronwall.json.
    Gronwall {
        #[arg(long)]
        series: PathBuf,
        /// Window length for the generalized check.
        #[arg(long)]
        window: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn apply_overrides(c: &mut SolverConfig, common: &Common) {
    if let Some(n) = common.resolution {
        c.resolution = n;
    }
    if let Some(dt) = common.dt {
        c.dt = dt;
    }
    if let Some(t) = common.horizon {
        c.t_end = t;
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn out_dir(p: &Path) -> Result<&Path, Error> {
    fs::create_dir_all(p)?;
    Ok(p)
}

fn simulate(common: &Common, format: SnapshotFormat) -> Result<u8, Error> {
    let mut cfg = SolverConfig::from_toml(&read(&common.config)?)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    apply_overrides(&mut cfg, common);
    let rec = integrate(&cfg)?;
    let dir = out_dir(&common.out)?;
    rec.write_csv(BufWriter::new(fs::File::create(
        dir.join("trajectory.csv"),
    )?))?;
    let states = rec
        .snapshots
        .iter()
        .map(|(t, f)| (Some(*t), f))
        .chain(std::iter::once((None, &rec.final_state)));
    for (i, (_, field)) in states.enumerate() {
        let name = if i == rec.snapshots.len() {
            "final".to_string()
        } else {
            format!("snapshot_{i:05}")
        };
        match format {
            SnapshotFormat::Csv => snapshot::write_csv(
                field,
                BufWriter::new(fs::File::create(dir.join(format!("{name}.csv")))?),
            )?,
            SnapshotFormat::Binary => snapshot::write_binary(
                field,
                BufWriter::new(fs::File::create(dir.join(format!("{name}.bin")))?),
            )?,
        }
    }
    println!(
        "{} samples, max energy-balance residual {:.3e}",
        rec.samples.len(),
        rec.max_residual()
    );
    Ok(0)
}

fn twin(common: &Common) -> Result<u8, Error> {
    let mut cfg = ExperimentConfig::from_toml(&read(&common.config)?)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    apply_overrides(&mut cfg.solver, common);
    let rep = twin_run(&cfg)?;
    let dir = out_dir(&common.out)?;
    fs::write(dir.join("twin_report.json"), rep.to_json()?)?;
    fs::write(dir.join("twin_norms.csv"), rep.to_csv_string())?;
    println!(
        "N = {}, trailing |u - v|_H = {:.3e}, verdict {:?}{}",
        rep.count,
        rep.trailing_gap,
        rep.verdict,
        rep.n_bound
            .as_ref()
            .map(|b| format!(", n_bound = {}", b.n_bound))
            .unwrap_or_default()
    );
    Ok(0)
}

fn estimates(common: &Common, averaging: Option<f64>) -> Result<u8, Error> {
    let mut cfg = SolverConfig::from_toml(&read(&common.config)?)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    apply_overrides(&mut cfg, common);
    let suite = estimate_suite(&cfg, averaging)?;
    let dir = out_dir(&common.out)?;
    fs::write(dir.join("estimates.json"), suite.to_json()?)?;
    fs::write(dir.join("estimates.csv"), suite.to_csv_string())?;
    for r in &suite.reports {
        println!(
            "{:<14} measured {:.4e} bound {:.4e} {}",
            r.id.name(),
            r.measured,
            r.bound,
            if r.satisfied { "satisfied" } else { "VIOLATED" }
        );
    }
    Ok(if suite.all_satisfied {
        0
    } else {
        EXIT_VIOLATION
    })
}

fn certify(common: &Common) -> Result<u8, Error> {
    let mut cfg = CertifyConfig::from_toml(&read(&common.config)?)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = common.resolution {
        cfg.resolution = n;
    }
    let cert = certify_projection(&cfg)?;
    let dir = out_dir(&common.out)?;
    fs::write(
        dir.join("certification.toml"),
        certification_artifact(&cert)?,
    )?;
    println!(
        "C1 = {:.6}, gamma = {:.6}, fit residual {:.3e}",
        cert.c1, cert.gamma, cert.fit_residual
    );
    Ok(0)
}

/// Reads a CSV with header `time,alpha,beta,y`; `#` lines are comments.
fn read_series(path: &Path) -> Result<[Vec<f64>; 4], Error> {
    let text = read(path)?;
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .collect();
    let cols = ["time", "alpha", "beta", "y"];
    let pos: Vec<usize> = cols
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| Error::Config(format!("series file lacks column `{c}`")))
        })
        .collect::<Result<_, _>>()?;
    let mut out: [Vec<f64>; 4] = Default::default();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        for (slot, &p) in out.iter_mut().zip(&pos) {
            let cell = cells
                .get(p)
                .ok_or_else(|| Error::Parse(format!("row {} is short", i + 2)))?;
            slot.push(
                cell.trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))?,
            );
        }
    }
    Ok(out)
}

fn gronwall(series: &Path, window: f64, out: &Path) -> Result<u8, Error> {
    let [t, alpha, beta, y] = read_series(series)?;
    let verdict = gronwall_generalized_check(&alpha, &beta, &y, &t, window)?;
    let mut doc = serde_json::json!({ "generalized": verdict });
    let mut code = 0;
    if alpha.iter().chain(&beta).all(|v| *v >= 0.0) {
        let bound = gronwall_classical(y[0], &alpha, &beta, &t)?;
        let excess = y
            .iter()
            .zip(&bound)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max);
        let scale = bound.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        let holds = excess <= 1e-8 * scale.max(1.0);
        doc["classical"] = serde_json::json!({ "max_excess": excess, "holds": holds });
        if !holds {
            code = EXIT_VIOLATION;
        }
    }
    let dir = out_dir(out)?;
    fs::write(
        dir.join("gronwall.json"),
        serde_json::to_string_pretty(&doc).map_err(Error::from)?,
    )?;
    println!(
        "generalized verdict {:?} (m = {:.4e}, M = {:.4e})",
        verdict.verdict, verdict.m, verdict.big_m
    );
    Ok(code)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BlowUp { .. } | Error::Stability { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            common,
            snapshot_format,
        } => simulate(common, *snapshot_format),
        Command::Twin { common } => twin(common),
        Command::Estimates { common, averaging } => estimates(common, *averaging),
        Command::Certify { common } => certify(common),
        Command::Gronwall {
            series,
            window,
            out,
        } => gronwall(series, *window, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
