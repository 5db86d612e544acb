//! `roughctl`: run lift-convergence, robustness and validation experiments
//! from a TOML configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roughctl::experiment::{
    convergence_csv, convergence_medians, decreasing_by_family, evaluation_csv, robustness_csv, run_evaluate, run_hjb,
    run_noise_convergence, run_robustness, run_validate, ExperimentConfig, ExperimentKind,
};
use roughctl::rough::write_columnar;
use roughctl::{Error, TimeGrid};
use serde_json::json;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "roughctl", version, about = "Rough-path noise lifts and robustness of near-optimal controls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run with this single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for path-parallel work.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the self-test suites.
    Validate(Common),
    /// Export the lift of the first configured family, level and seed.
    Lift(Common),
    /// Solve the HJB equation of the configured model.
    Hjb(Common),
    /// Estimate the cost of the configured policy.
    Evaluate(Common),
    /// Distance of each noise lift to its Stratonovich reference.
    NoiseConvergence(Common),
    /// Cost gaps between approximate and idealised noise.
    Robustness(Common),
}

enum Failure {
    Run(Error),
    Acceptance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

fn load(common: &Common, expected: Option<ExperimentKind>) -> Result<(ExperimentConfig, String, PathBuf), Error> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(kind) = expected {
        if cfg.experiment != kind {
            return Err(Error::Config(format!(
                "configuration is for {:?}, not {kind:?}",
                cfg.experiment
            )));
        }
    }
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(Error::Io)?;
    let resolved = cfg.to_toml();
    fs::write(out.join("resolved-config.toml"), &resolved).map_err(Error::Io)?;
    Ok((cfg, resolved, out))
}

fn sidecar(out: &Path, name: &str, cfg: &ExperimentConfig, resolved: &str, summary: serde_json::Value) -> Result<(), Failure> {
    let doc = json!({
        "experiment": name,
        "version": env!("CARGO_PKG_VERSION"),
        "seeds": cfg.seeds,
        "resolved_config": resolved,
        "summary": summary,
    });
    fs::write(out.join(format!("{name}.json")), serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(c) => {
            let (cfg, _, out) = load(&c, None)?;
            let report = run_validate(&cfg)?;
            let text = serde_json::to_string_pretty(&report).unwrap_or_default();
            fs::write(out.join("validate.json"), text + "\n")?;
            for s in &report.suites {
                for check in &s.checks {
                    let mark = if check.passed { "pass" } else { "FAIL" };
                    println!("{mark} {}/{} {}", s.suite, check.name, check.detail);
                }
            }
            if !report.passed {
                return Err(Failure::Acceptance(format!("failed checks: {}", report.failed_checks().join(", "))));
            }
        }
        Command::Lift(c) => {
            let (cfg, _, out) = load(&c, None)?;
            let sweep = cfg
                .noise
                .families
                .first()
                .ok_or_else(|| Error::Config("[noise] needs at least one family".into()))?;
            let level = sweep.effective_levels().first().copied().unwrap_or(0.0);
            let spec = cfg.noise_spec(sweep.family.at(level), cfg.seeds[0]);
            let grid = TimeGrid::uniform(0.0, cfg.grid.horizon, cfg.grid.cells)?;
            let lift = spec.lift(&grid, 0)?;
            let path = out.join("lift.csv");
            fs::write(&path, write_columnar(&lift))?;
            println!("wrote {}", path.display());
        }
        Command::Hjb(c) => {
            let (cfg, resolved, out) = load(&c, None)?;
            let outcome = run_hjb(&cfg)?;
            fs::write(out.join("hjb.csv"), outcome.value.to_table())?;
            let summary = json!({
                "iterations": outcome.value.report.iterations,
                "residual_upwind": outcome.residual_upwind,
                "residual_centered": outcome.residual_centered,
                "value_at_origin": outcome.value.value_at(0, 0.0),
            });
            println!("{}", serde_json::to_string(&summary).unwrap_or_default());
            sidecar(&out, "hjb", &cfg, &resolved, summary)?;
        }
        Command::Evaluate(c) => {
            let (cfg, resolved, out) = load(&c, None)?;
            let rows = run_evaluate(&cfg)?;
            fs::write(out.join("evaluate.csv"), evaluation_csv(&rows))?;
            let summary = serde_json::to_value(&rows).unwrap_or_default();
            sidecar(&out, "evaluate", &cfg, &resolved, summary)?;
            print!("{}", evaluation_csv(&rows));
        }
        Command::NoiseConvergence(c) => {
            let (cfg, resolved, out) = load(&c, Some(ExperimentKind::NoiseConvergence))?;
            let rows = run_noise_convergence(&cfg)?;
            let csv = convergence_csv(&rows);
            fs::write(out.join("noise-convergence.csv"), &csv)?;
            let medians = convergence_medians(&rows);
            let checks = decreasing_by_family(&medians);
            sidecar(
                &out,
                "noise-convergence",
                &cfg,
                &resolved,
                json!({ "medians": medians, "decreasing": checks }),
            )?;
            for m in &medians {
                println!("{} level {} median rho {}", m.family, m.level, m.median);
            }
            let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
            if !failed.is_empty() {
                return Err(Failure::Acceptance(format!("median distance not decreasing for {}", failed.join(", "))));
            }
        }
        Command::Robustness(c) => {
            let (cfg, resolved, out) = load(&c, Some(ExperimentKind::RobustnessSweep))?;
            let report = run_robustness(&cfg)?;
            fs::write(out.join("robustness.csv"), robustness_csv(&report.rows))?;
            let checks = report.family_checks();
            sidecar(
                &out,
                "robustness",
                &cfg,
                &resolved,
                json!({
                    "criterion": report.criterion,
                    "horizon": report.horizon,
                    "truncation_bound": report.truncation_bound,
                    "certified_lipschitz": report.certified_lipschitz,
                    "raw_selector_slope": report.raw_selector_slope,
                    "sampled_lipschitz_ratio": report.sampled_lipschitz_ratio,
                    "median_gaps": report.median_gaps,
                    "median_combined_se": report.median_combined_se,
                    "checks": checks,
                }),
            )?;
            for m in &report.median_gaps {
                println!("{} level {} median gap {}", m.family, m.level, m.median);
            }
            if !report.passed() {
                return Err(Failure::Acceptance("cost gaps do not shrink along the levels".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Acceptance(msg)) => {
            eprintln!("roughctl: {msg}");
            ExitCode::from(EXIT_ACCEPTANCE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("roughctl: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG })
        }
    }
}
