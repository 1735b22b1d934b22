//! Experiment sweeps: regenerate an ensemble per sweep point, run the chosen
//! algorithms on it and aggregate the results into CSV rows plus a JSON
//! manifest.
//!
//! Every algorithm at one sweep point sees the same ensemble (same root
//! seed), so differences between rows are paired comparisons.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::dual::{estimate_eps_p, run_dual, EnsembleSolution};
use crate::error::{Error, Result};
use crate::model::generate_ensemble;
use crate::rates::SecrecyMode;
use crate::variants::{run_greedy, run_unknown_csi, GreedyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Multiplier iteration with an outage target.
    Alg1,
    /// Fixed large outage penalty.
    Greedy,
    /// Eavesdropper channels unknown.
    UnknownCsi,
    /// No cooperation: the SUs stay silent, the PU transmits alone.
    NoCoopBaseline,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Greedy => "greedy",
            Algorithm::UnknownCsi => "unknown_csi",
            Algorithm::NoCoopBaseline => "no_coop_baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    OutageReduction,
    NumSus,
    NumEavs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub algorithms: Vec<Algorithm>,
    pub sweep: Sweep,
    /// Fading states per ensemble.
    pub states: usize,
    #[serde(default = "one")]
    pub replicates: usize,
    /// Root seed; replicate `r` uses `seed + r`.
    pub seed: u64,
    /// Directory receiving `results.csv`, `manifest.json` and dual logs.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Secrecy model used inside the solvers; defaults from the configuration.
    #[serde(default)]
    pub mode: Option<SecrecyMode>,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.algorithms.is_empty() {
            return bad("no algorithms listed".into());
        }
        if self.sweep.values.is_empty() {
            return bad("sweep has no values".into());
        }
        if self.states == 0 || self.replicates == 0 {
            return bad("states and replicates must be at least 1".into());
        }
        for &v in &self.sweep.values {
            let ok = match self.sweep.axis {
                SweepAxis::OutageReduction => (0.0..=1.0).contains(&v),
                SweepAxis::NumSus | SweepAxis::NumEavs => v >= 1.0 && v.fract() == 0.0,
            };
            if !ok {
                return bad(format!("invalid {:?} sweep value {v}", self.sweep.axis));
            }
        }
        Ok(())
    }

    /// Configuration at one sweep point and replicate.
    pub fn point_config(&self, base: &NetworkConfig, value: f64, replicate: usize) -> NetworkConfig {
        let mut cfg = match self.sweep.axis {
            SweepAxis::OutageReduction => NetworkConfig {
                outage_reduction: value,
                ..base.clone()
            },
            SweepAxis::NumSus => base.with_counts(value as usize, base.num_eavs),
            SweepAxis::NumEavs => base.with_counts(base.num_sus, value as usize),
        };
        cfg.seed = self.seed.wrapping_add(replicate as u64);
        cfg
    }
}

/// One CSV row. The column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub mode: String,
    pub axis: SweepAxis,
    pub value: f64,
    pub num_sus: usize,
    pub num_eavs: usize,
    pub outage_reduction: f64,
    pub states: usize,
    pub replicates: usize,
    pub seed: u64,
    pub config_hash: String,
    /// `ok`, `not_converged` or `infeasible`.
    pub status: String,
    pub ergodic_su_rate: Option<f64>,
    /// Standard error of the ergodic rate over all pooled states.
    pub rate_se: Option<f64>,
    pub eps_p: f64,
    pub eps_ps: Option<f64>,
    pub eps_ps_se: Option<f64>,
    pub eps_0: f64,
    pub eta: Option<f64>,
    pub dual_iterations: Option<usize>,
    /// Smallest outage reachable, reported for infeasible targets.
    pub min_achievable: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub algorithm: Algorithm,
    pub value: f64,
    pub config_hash: String,
    pub status: String,
    /// `eps_ps - eps_0` per replicate.
    pub residuals: Vec<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub package: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub config: NetworkConfig,
    pub config_hash: String,
    pub points: Vec<ManifestEntry>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
}

fn mean_and_se<I: IntoIterator<Item = f64>>(xs: I) -> (f64, f64) {
    let xs: Vec<f64> = xs.into_iter().collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs one algorithm on one ensemble configuration.
fn run_one(
    algorithm: Algorithm,
    cfg: &NetworkConfig,
    states: usize,
    mode: SecrecyMode,
) -> Result<EnsembleSolution> {
    let ensemble = generate_ensemble(cfg, states);
    match algorithm {
        Algorithm::Alg1 => run_dual(&ensemble, cfg, mode),
        Algorithm::Greedy => run_greedy(
            &ensemble,
            cfg,
            GreedyConfig {
                eta_greedy: cfg.solver.eta_greedy,
                mode,
            },
        ),
        Algorithm::UnknownCsi => run_unknown_csi(&ensemble, cfg),
        Algorithm::NoCoopBaseline => {
            let eps_p = estimate_eps_p(&ensemble, cfg);
            Ok(EnsembleSolution {
                per_state: Vec::new(),
                ergodic_su_rate: 0.0,
                eps_ps: eps_p,
                eps_p,
                eps_0: eps_p - cfg.outage_reduction,
                eta: 0.0,
                trace: Default::default(),
            })
        }
    }
}

pub fn run_experiment(spec: &ExperimentSpec, base: &NetworkConfig) -> Result<ExperimentResult> {
    spec.validate()?;
    let started = Instant::now();
    let mode = spec.mode.unwrap_or_else(|| SecrecyMode::default_for(base));
    let mut rows = Vec::new();
    let mut points = Vec::new();
    if let Some(dir) = &spec.output {
        std::fs::create_dir_all(dir)?;
    }

    for (point, &value) in spec.sweep.values.iter().enumerate() {
        for &algorithm in &spec.algorithms {
            let point_started = Instant::now();
            let cfg0 = spec.point_config(base, value, 0);
            let mut row = ResultRow {
                algorithm,
                mode: mode.to_string(),
                axis: spec.sweep.axis,
                value,
                num_sus: cfg0.num_sus,
                num_eavs: cfg0.num_eavs,
                outage_reduction: cfg0.outage_reduction,
                states: spec.states,
                replicates: spec.replicates,
                seed: spec.seed,
                config_hash: cfg0.hash(),
                status: "ok".into(),
                ergodic_su_rate: None,
                rate_se: None,
                eps_p: 0.0,
                eps_ps: None,
                eps_ps_se: None,
                eps_0: 0.0,
                eta: None,
                dual_iterations: None,
                min_achievable: None,
            };
            let mut solutions = Vec::new();
            let mut eps_p = Vec::new();
            for r in 0..spec.replicates {
                let cfg = spec.point_config(base, value, r);
                match run_one(algorithm, &cfg, spec.states, mode) {
                    Ok(sol) => {
                        if let (Some(dir), Algorithm::Alg1) = (&spec.output, algorithm) {
                            let log = dir.join(format!("dual_log_p{point}_r{r}.csv"));
                            sol.trace.write_log(sol.eps_0, &log)?;
                        }
                        eps_p.push(sol.eps_p);
                        solutions.push(sol);
                    }
                    Err(Error::Infeasible {
                        eps_p: e,
                        min_achievable,
                        ..
                    }) => {
                        row.status = "infeasible".into();
                        eps_p.push(e);
                        row.min_achievable = Some(
                            row.min_achievable.map_or(min_achievable, |m| m.max(min_achievable)),
                        );
                    }
                    Err(e) => return Err(e),
                }
            }
            row.eps_p = eps_p.iter().sum::<f64>() / eps_p.len() as f64;
            row.eps_0 = row.eps_p - cfg0.outage_reduction;
            let residuals: Vec<f64> = solutions.iter().map(|s| s.residual()).collect();
            if row.status == "ok" {
                fill_metrics(&mut row, algorithm, &solutions);
            }
            points.push(ManifestEntry {
                algorithm,
                value,
                config_hash: row.config_hash.clone(),
                status: row.status.clone(),
                residuals,
                wall_time_s: point_started.elapsed().as_secs_f64(),
            });
            rows.push(row);
        }
    }

    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.clone(),
        config: base.clone(),
        config_hash: base.hash(),
        points,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let result = ExperimentResult { rows, manifest };
    if let Some(dir) = &spec.output {
        write_results(&result.rows, &dir.join("results.csv"))?;
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&result.manifest)?,
        )?;
    }
    Ok(result)
}

fn fill_metrics(row: &mut ResultRow, algorithm: Algorithm, solutions: &[EnsembleSolution]) {
    if algorithm == Algorithm::NoCoopBaseline {
        row.ergodic_su_rate = Some(0.0);
        row.rate_se = Some(0.0);
        row.eps_ps = Some(row.eps_p);
        let n = (row.states * row.replicates) as f64;
        row.eps_ps_se = Some((row.eps_p * (1.0 - row.eps_p) / n).sqrt());
        return;
    }
    let pooled = || solutions.iter().flat_map(|s| s.per_state.iter());
    let (rate, rate_se) = mean_and_se(pooled().map(|s| s.su_rate));
    let (eps_ps, eps_ps_se) = mean_and_se(pooled().map(|s| f64::from(u8::from(s.true_outage))));
    row.ergodic_su_rate = Some(rate);
    row.rate_se = Some(rate_se);
    row.eps_ps = Some(eps_ps);
    row.eps_ps_se = Some(eps_ps_se);
    row.eta = Some(solutions.iter().map(|s| s.eta).sum::<f64>() / solutions.len() as f64);
    if algorithm == Algorithm::Alg1 {
        row.dual_iterations = Some(solutions.iter().map(|s| s.trace.iterations).sum());
        if !solutions.iter().all(|s| s.trace.converged) {
            row.status = "not_converged".into();
        }
    }
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
