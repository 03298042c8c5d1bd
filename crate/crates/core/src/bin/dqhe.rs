//! Command-line front end: parameter scans, Chern integration, disorder
//! averaging, and figure presets, all driven by a TOML config.

use clap::{Parser, Subcommand};
use dqhe::config::{RunConfig, ScanAxis};
use dqhe::experiments::{
    chern_curve, couplings_curve, curvature_at, disorder_curve, gap_curve, resolve_point,
    scan_curve, Manifest, ScanTable,
};
use dqhe::presets::{run_preset, Preset};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "dqhe", version, about = "Dynamical quantum Hall effect simulator for coupled superconducting qubits")]
struct Cli {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output].dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Disorder base seed (overrides [disorder].base_seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exchange couplings versus bias current.
    CouplingsScan,
    /// Spectral gap at the measurement angle along the scan axis.
    GapScan,
    /// One ramp at the configured operating point.
    Ramp,
    /// Berry curvature along the configured scan axis.
    Scan,
    /// Berry curvature versus theta and its integral (the Chern number).
    Chern {
        /// Theta grid size.
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Disorder-averaged Berry curvature (and Chern with scan.chern_grid > 0).
    Disorder,
    /// Regenerate a reference figure dataset.
    Preset { name: String },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> dqhe::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| dqhe::Error::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.disorder.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.display().to_string();
    }
    let out_dir = PathBuf::from(&cfg.output.dir);
    let started = Instant::now();

    let (name, table): (&str, ScanTable) = match &cli.command {
        Command::CouplingsScan => ("couplings_scan.csv", couplings_curve(&cfg)?),
        Command::GapScan => ("gap_scan.csv", gap_curve(&cfg)?),
        Command::Scan => ("scan.csv", scan_curve(&cfg)?),
        Command::Disorder => ("disorder.csv", disorder_curve(&cfg)?),
        Command::Chern { grid } => {
            let (table, ch) = chern_curve(&cfg, *grid)?;
            println!("Ch = {ch}");
            ("chern.csv", table)
        }
        Command::Ramp => {
            let control = match cfg.scan.axis {
                ScanAxis::IBOverIcr => cfg.chain.i_b_over_icr.unwrap_or(cfg.scan.min),
                ScanAxis::JbarOverH => cfg.chain.jbar_over_h.unwrap_or(cfg.scan.min),
                _ => cfg.scan.min,
            };
            let point = resolve_point(&cfg, control)?;
            let f = curvature_at(&cfg, &point, None)?;
            println!("F = {f}");
            let mut t = ScanTable::new(&[cfg.scan.axis_label(), "F"]);
            t.rows.push(vec![control, f]);
            ("ramp.csv", t)
        }
        Command::Preset { name } => {
            let preset: Preset = name.parse()?;
            let files = run_preset(preset, &out_dir, cfg.disorder.base_seed)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            return Ok(());
        }
    };

    let path = out_dir.join(name);
    table.write(&path)?;
    let mut manifest = Manifest::new(cfg.disorder.base_seed);
    manifest.files.push(name.to_string());
    manifest.configs.insert(name.to_string(), cfg.clone());
    manifest.wall_time_ms = started.elapsed().as_millis();
    let mpath = manifest.write(&out_dir)?;
    println!("wrote {}", path.display());
    println!("wrote {}", mpath.display());
    Ok(())
}
