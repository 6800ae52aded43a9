use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use polywave::mesh::{self, HoleConfig, MeshFamily};
use polywave::scenario::{self, BoundaryRule, MeshSpec, NamedScheme, Scenario, ScenarioConfig, ScenarioError};

#[derive(Parser)]
#[command(name = "polywave", version, about = "Mixed virtual element solver for the acoustic wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the one in the scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 gives bit-for-bit reproducible runs.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized mesh families, overriding the scenario.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh, write it in polymesh format with a JSON quality report.
    Mesh {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<MeshFamily>,
        #[arg(long)]
        n: Option<usize>,
        /// `five` or `eight`.
        #[arg(long)]
        holes: Option<HoleConfig>,
        #[arg(long, default_value_t = 0)]
        refine: u32,
    },
    /// Run one scenario.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Refinement study over the scenario's `convergence` block.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// Energy traces for each time integrator.
    Energy {
        #[command(flatten)]
        common: Common,
    },
}

fn config_err(m: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Config(m.to_string())
}

fn load(common: &Common) -> Result<ScenarioConfig, ScenarioError> {
    let path = common.config.as_ref().ok_or_else(|| config_err("--config <file> is required"))?;
    ScenarioConfig::from_file(path)
}

fn print(value: &serde_json::Value) {
    // A closed pipe downstream is not an error of the run.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_mesh(common: &Common, family: Option<MeshFamily>, n: Option<usize>, holes: Option<HoleConfig>, refine: u32) -> Result<(), ScenarioError> {
    let (spec, rule) = match (holes, family, &common.config) {
        (Some(config), None, _) => (MeshSpec::Holes { config, n: n.unwrap_or(38), refine }, BoundaryRule::RobinOuterNeumannInner),
        (None, Some(family), _) => {
            let n = n.ok_or_else(|| config_err("--n is required with --family"))?;
            (MeshSpec::Generated { family, n, seed: common.seed.unwrap_or(0) }, BoundaryRule::AllDirichlet)
        }
        (None, None, Some(_)) => {
            let cfg = load(common)?;
            let rule = cfg.boundary_rule();
            (cfg.mesh, rule)
        }
        (Some(_), Some(_), _) => return Err(config_err("--family and --holes are mutually exclusive")),
        (None, None, None) => return Err(config_err("one of --family, --holes or --config is required")),
    };
    let m = scenario::build_mesh(&spec, rule, common.seed)?;
    let report = mesh::validate(&m).map_err(config_err)?;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("mesh.poly"));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    }
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| ScenarioError::Io { path: p, source }
    };
    let f = fs::File::create(&out).map_err(io(&out))?;
    mesh::write_polymesh(&m, BufWriter::new(f)).map_err(|e| ScenarioError::Solver(e.to_string()))?;
    let quality = out.with_extension("quality.json");
    fs::write(&quality, serde_json::to_string_pretty(&report).expect("serializable")).map_err(io(&quality))?;
    print(&json!({
        "mesh": spec,
        "cells": m.num_cells(),
        "edges": m.num_edges(),
        "vertices": m.num_vertices(),
        "quality": report,
        "files": [out, quality],
    }));
    Ok(())
}

fn cmd_run(common: &Common) -> Result<(), ScenarioError> {
    let cfg = load(common)?;
    let out = cfg.output_dir(common.out.as_deref());
    let sc = Scenario::new(cfg, common.seed)?;
    log::info!("running {} steps, {}", sc.config.stepping.num_steps().unwrap_or(0), scenario::describe_scheme(&sc.config.stepping));
    let outcome = sc.run(Some(&out))?;
    print(&serde_json::to_value(&outcome.summary).expect("serializable"));
    Ok(())
}

fn cmd_convergence(common: &Common) -> Result<(), ScenarioError> {
    let cfg = load(common)?;
    let spec = cfg.convergence.clone().ok_or_else(|| config_err("scenario has no `convergence` block"))?;
    let spec = scenario::ConvergenceSpec { seed: common.seed.unwrap_or(spec.seed), ..spec };
    if spec.n.len() < 2 {
        log::warn!("a single mesh gives no convergence rates");
    }
    let out = cfg.output_dir(common.out.as_deref());
    let verdicts = scenario::run_convergence(&cfg, &spec)?;
    let files = scenario::write_convergence(&out, &verdicts)?;
    print(&json!({
        "verdicts": verdicts.iter().map(|v| json!({
            "family": v.family, "k": v.k, "eoc_u": v.eoc_u, "eoc_p": v.eoc_p,
            "eoc_energy": v.eoc_energy, "quadrature_drift": v.quadrature_drift, "pass": v.pass,
        })).collect::<Vec<_>>(),
        "files": files,
    }));
    Ok(())
}

fn cmd_energy(common: &Common) -> Result<(), ScenarioError> {
    let cfg = load(common)?;
    let schemes = cfg.energy.as_ref().map(|e| e.schemes.clone()).unwrap_or_else(|| NamedScheme::ALL.to_vec());
    let out = cfg.output_dir(common.out.as_deref());
    let sc = Scenario::new(cfg, common.seed)?;
    let (drifts, _) = scenario::run_energy(&sc, &schemes, Some(&out))?;
    print(&json!({ "drift": drifts, "dir": out }));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Mesh { common, .. } | Command::Run { common } | Command::Convergence { common } | Command::Energy { common } => common,
    };
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Mesh { common, family, n, holes, refine } => cmd_mesh(common, *family, *n, *holes, *refine),
        Command::Run { common } => cmd_run(common),
        Command::Convergence { common } => cmd_convergence(common),
        Command::Energy { common } => cmd_energy(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
