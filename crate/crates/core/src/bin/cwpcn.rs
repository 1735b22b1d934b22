use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cwpcn::bcd::solve_per_state;
use cwpcn::checks::{check_exhaustive, check_p1, check_su_power, check_tau1};
use cwpcn::dual::{check_feasibility, estimate_eps_p};
use cwpcn::harness::{run_experiment, Algorithm, ExperimentSpec};
use cwpcn::model::{generate_ensemble, generate_state};
use cwpcn::{Error, NetworkConfig, SecrecyMode};

#[derive(Parser)]
#[command(version, about = "Secure cooperative spectrum sharing for wireless-powered secondary users")]
struct Cli {
    /// Network configuration (TOML, powers in dBW). Defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Experiment specification (TOML), for `run`.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Overrides the root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of fading states.
    #[arg(long, global = true)]
    states: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Secrecy model used by the solvers: noncollusive, collusive or collusive-lb.
    #[arg(long, global = true)]
    mode: Option<SecrecyMode>,
    /// Use the per-eavesdropper min-max power rules instead of exact block maximisation.
    #[arg(long, global = true)]
    paper_faithful: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write results.csv and manifest.json.
    Run,
    /// Solve one fading state and print the allocation as JSON.
    SolveState {
        /// Index of the state within the ensemble.
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Outage penalty.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
    /// Compare the block solvers and the per-state solver with brute-force references.
    OracleCheck {
        /// Random instances per block check.
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Check whether the configured outage reduction is achievable.
    Feasibility,
}

fn load_config(cli: &Cli) -> cwpcn::Result<NetworkConfig> {
    let mut cfg = match &cli.config {
        Some(path) => NetworkConfig::from_path(path)?,
        None => NetworkConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.paper_faithful {
        cfg.solver.paper_faithful = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> cwpcn::Result<bool> {
    let cfg = load_config(cli)?;
    let mode = cli.mode.unwrap_or_else(|| SecrecyMode::default_for(&cfg));
    match &cli.command {
        Command::Run => {
            let path = cli
                .spec
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("`run` needs --spec".into()))?;
            let mut spec = ExperimentSpec::from_path(path)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            if let Some(states) = cli.states {
                spec.states = states;
            }
            if let Some(out) = &cli.out {
                spec.output = Some(out.clone());
            }
            if cli.mode.is_some() {
                spec.mode = cli.mode;
            }
            let result = run_experiment(&spec, &cfg)?;
            let mut ok = true;
            for row in &result.rows {
                println!(
                    "{:<16} {:>8} {:<13} rate={} eps_ps={} eps_0={:.4}",
                    row.algorithm.as_str(),
                    row.value,
                    row.status,
                    row.ergodic_su_rate.map_or("-".into(), |r| format!("{r:.4}")),
                    row.eps_ps.map_or("-".into(), |e| format!("{e:.4}")),
                    row.eps_0,
                );
                if row.algorithm == Algorithm::Alg1 && row.status == "infeasible" {
                    ok = false;
                }
            }
            Ok(ok)
        }
        Command::SolveState { index, eta } => {
            let state = generate_state(&cfg, *index);
            let sol = solve_per_state(&state, &cfg, *eta, mode);
            println!("{}", serde_json::to_string_pretty(&sol)?);
            Ok(true)
        }
        Command::OracleCheck { instances } => {
            let seed = cfg.seed;
            let reports = [
                check_tau1(&cfg, mode, *instances, seed),
                check_p1(&cfg, mode, *instances, seed.wrapping_add(1)),
                check_su_power(&cfg, mode, *instances, seed.wrapping_add(2)),
            ];
            let mut ok = true;
            for r in &reports {
                println!(
                    "{:<9} {} instances={} shortfalls={} violations={}",
                    r.name,
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.instances,
                    r.shortfalls,
                    r.violations
                );
                ok &= r.passed();
            }
            let small = cfg.with_counts(1, 1);
            let states = cli.states.unwrap_or(200);
            let ex = check_exhaustive(&small, mode, states, 60, 0.02, seed.wrapping_add(3))?;
            let pass = ex.fraction() >= 0.9;
            println!(
                "exhaustive {} within 2%: {}/{}",
                if pass { "PASS" } else { "FAIL" },
                ex.within,
                ex.states
            );
            Ok(ok && pass)
        }
        Command::Feasibility => {
            let states = generate_ensemble(&cfg, cli.states.unwrap_or(5000));
            let eps_p = estimate_eps_p(&states, &cfg);
            let eps_0 = eps_p - cfg.outage_reduction;
            let min = check_feasibility(&states, &cfg, mode);
            let feasible = eps_0 >= 0.0 && min <= eps_0;
            println!(
                "{} eps_p={eps_p:.4} eps_0={eps_0:.4} min_achievable={min:.4}",
                if feasible { "feasible" } else { "infeasible" }
            );
            Ok(feasible)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
