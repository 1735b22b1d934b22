//! Multiplier iteration over a fixed ensemble of fading states.
//!
//! The ensemble outage constraint `E{outage} <= eps_0` is relaxed with a
//! multiplier `eta`; for fixed `eta` every state is solved independently by
//! [`crate::bcd`], and `eta` follows a projected subgradient step.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bcd::{solve_per_state, PerStateSolution};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::model::FadingState;
use crate::rates::{self, SecrecyMode};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DualTrace {
    pub eta_history: Vec<f64>,
    /// `E{outage} - eps_0` at each multiplier.
    pub violation_history: Vec<f64>,
    /// Ergodic SU rate at each multiplier.
    pub rate_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Serialize)]
struct LogRecord {
    iteration: usize,
    eta: f64,
    mean_outage: f64,
    eps_0: f64,
    ergodic_su_rate: f64,
}

impl DualTrace {
    /// Writes one CSV record per multiplier evaluated.
    pub fn write_log(&self, eps_0: f64, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for (t, ((&eta, &v), &rate)) in self
            .eta_history
            .iter()
            .zip(&self.violation_history)
            .zip(&self.rate_history)
            .enumerate()
        {
            w.serialize(LogRecord {
                iteration: t,
                eta,
                mean_outage: v + eps_0,
                eps_0,
                ergodic_su_rate: rate,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSolution {
    pub per_state: Vec<PerStateSolution>,
    pub ergodic_su_rate: f64,
    /// Outage probability with cooperation, under the configured eavesdropper model.
    pub eps_ps: f64,
    /// Outage probability without cooperation.
    pub eps_p: f64,
    /// Outage target.
    pub eps_0: f64,
    /// Multiplier the returned solutions were computed at.
    pub eta: f64,
    pub trace: DualTrace,
}

impl EnsembleSolution {
    pub fn from_states(
        per_state: Vec<PerStateSolution>,
        eps_p: f64,
        eps_0: f64,
        eta: f64,
        trace: DualTrace,
    ) -> Self {
        let n = per_state.len() as f64;
        let ergodic_su_rate = per_state.iter().map(|s| s.su_rate).sum::<f64>() / n;
        let eps_ps = per_state.iter().filter(|s| s.true_outage).count() as f64 / n;
        EnsembleSolution {
            per_state,
            ergodic_su_rate,
            eps_ps,
            eps_p,
            eps_0,
            eta,
            trace,
        }
    }

    /// `eps_ps - eps_0`; positive means the outage target is missed.
    pub fn residual(&self) -> f64 {
        self.eps_ps - self.eps_0
    }
}

/// Fraction of states whose non-cooperative secrecy rate falls below the target.
pub fn estimate_eps_p(states: &[FadingState], cfg: &NetworkConfig) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    let outages = states
        .iter()
        .filter(|s| rates::outage_indicator(rates::no_coop_secrecy(s, cfg), cfg.secrecy_rate))
        .count();
    outages as f64 / states.len() as f64
}

/// Solves every state at one multiplier. Output order follows the input.
pub fn solve_all(
    states: &[FadingState],
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
) -> Vec<PerStateSolution> {
    states
        .par_iter()
        .map(|s| solve_per_state(s, cfg, eta, mode))
        .collect()
}

fn mean_rate(per_state: &[PerStateSolution]) -> f64 {
    per_state.iter().map(|s| s.su_rate).sum::<f64>() / per_state.len() as f64
}

fn mean_outage(per_state: &[PerStateSolution]) -> f64 {
    per_state.iter().filter(|s| s.outage).count() as f64 / per_state.len() as f64
}

/// Smallest outage probability the allocation can practically reach: the
/// ensemble outage with a very large penalty on every outage.
pub fn check_feasibility(states: &[FadingState], cfg: &NetworkConfig, mode: SecrecyMode) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    mean_outage(&solve_all(states, cfg, cfg.solver.eta_greedy, mode))
}

/// Runs the multiplier iteration to convergence, then bisects on the
/// multiplier so the returned solution satisfies the outage target.
///
/// Fails with [`Error::Infeasible`] when the target is negative or lies
/// below what the large-penalty probe reaches. If the constraint already
/// holds without any penalty, `eta = 0` is optimal and returned at once.
pub fn run_dual(
    states: &[FadingState],
    cfg: &NetworkConfig,
    mode: SecrecyMode,
) -> Result<EnsembleSolution> {
    if states.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let settings = &cfg.solver;
    let eps_p = estimate_eps_p(states, cfg);
    let eps_0 = eps_p - cfg.outage_reduction;
    let min_achievable = check_feasibility(states, cfg, mode);
    if eps_0 < 0.0 || min_achievable > eps_0 {
        return Err(Error::Infeasible {
            eps_p,
            eps_0,
            min_achievable,
        });
    }

    let mut trace = DualTrace::default();
    let record = |trace: &mut DualTrace, eta: f64, per_state: &[PerStateSolution]| {
        let outage = mean_outage(per_state);
        trace.eta_history.push(eta);
        trace.violation_history.push(outage - eps_0);
        trace.rate_history.push(mean_rate(per_state));
        outage
    };

    let unpenalised = solve_all(states, cfg, 0.0, mode);
    if mean_outage(&unpenalised) <= eps_0 {
        record(&mut trace, 0.0, &unpenalised);
        trace.converged = true;
        return Ok(EnsembleSolution::from_states(
            unpenalised,
            eps_p,
            eps_0,
            0.0,
            trace,
        ));
    }

    // Multiplier settings are relative to the unpenalised ergodic rate.
    let scale = mean_rate(&unpenalised).max(f64::MIN_POSITIVE);
    // Bracket for the polish: largest violating and smallest satisfying
    // multiplier seen so far, the latter with its solutions.
    let mut below = 0.0;
    let mut above: Option<(f64, Vec<PerStateSolution>)> = None;
    let mut keep = |eta: f64, outage: f64, per_state: Vec<PerStateSolution>| {
        if outage > eps_0 {
            below = f64::max(below, eta);
        } else if above.as_ref().map_or(true, |(e, _)| eta < *e) {
            above = Some((eta, per_state));
        }
    };
    let mut eta = settings.eta_init * scale;
    loop {
        let per_state = solve_all(states, cfg, eta, mode);
        let outage = record(&mut trace, eta, &per_state);
        keep(eta, outage, per_state);
        let t = trace.iterations;
        trace.iterations += 1;
        let step = settings.step_size * scale / ((t + 1) as f64).sqrt();
        let next = (eta - step * (eps_0 - outage)).max(0.0);
        trace.converged = (next - eta).abs() <= settings.dual_tol * scale;
        if trace.converged || trace.iterations >= settings.max_dual_iters {
            break;
        }
        eta = next;
    }

    // The constraint is a step function of the multiplier; bisecting the
    // bracket lands on the satisfying side as close to the edge as the
    // ensemble allows.
    let mut bracket_top = above.as_ref().map_or(settings.eta_greedy, |(e, _)| *e);
    for _ in 0..settings.refine_iters {
        if bracket_top - below <= settings.dual_tol * scale * 1e-3 {
            break;
        }
        let mid = if below > 0.0 && bracket_top > 4.0 * below {
            (below * bracket_top).sqrt()
        } else {
            0.5 * (below + bracket_top)
        };
        let per_state = solve_all(states, cfg, mid, mode);
        let outage = record(&mut trace, mid, &per_state);
        trace.iterations += 1;
        if outage > eps_0 {
            below = mid;
        } else {
            bracket_top = mid;
            above = Some((mid, per_state));
        }
    }
    let (eta, per_state) = match above {
        Some(found) => found,
        None => (
            settings.eta_greedy,
            solve_all(states, cfg, settings.eta_greedy, mode),
        ),
    };
    Ok(EnsembleSolution::from_states(
        per_state, eps_p, eps_0, eta, trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_ensemble;

    #[test]
    fn zero_target_rate_never_outages() {
        let mut cfg = NetworkConfig::default().with_counts(3, 2);
        cfg.secrecy_rate = 0.0;
        let states = generate_ensemble(&cfg, 50);
        assert_eq!(estimate_eps_p(&states, &cfg), 0.0);
    }

    #[test]
    fn blind_eavesdroppers_never_outage() {
        let cfg = NetworkConfig::default().with_counts(3, 2);
        let states: Vec<_> = generate_ensemble(&cfg, 50)
            .into_iter()
            .map(|s| s.with_eav_gains(|| 0.0))
            .collect();
        assert_eq!(check_feasibility(&states, &cfg, SecrecyMode::NonCollusive), 0.0);
    }

    #[test]
    fn reduction_beyond_eps_p_is_rejected() {
        let mut cfg = NetworkConfig::default().with_counts(3, 2);
        let states = generate_ensemble(&cfg, 40);
        cfg.outage_reduction = estimate_eps_p(&states, &cfg) + 0.01;
        let err = run_dual(&states, &cfg, SecrecyMode::NonCollusive).unwrap_err();
        assert!(matches!(err, Error::Infeasible { eps_0, .. } if eps_0 < 0.0));
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        let cfg = NetworkConfig::default();
        assert!(matches!(
            run_dual(&[], &cfg, SecrecyMode::NonCollusive),
            Err(Error::EmptyEnsemble)
        ));
    }

    #[test]
    fn log_has_one_record_per_multiplier() {
        let trace = DualTrace {
            eta_history: vec![50.0, 49.0],
            violation_history: vec![0.1, -0.2],
            rate_history: vec![1.0, 2.0],
            converged: false,
            iterations: 2,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        trace.write_log(0.3, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iteration,eta,mean_outage,eps_0,ergodic_su_rate");
        assert_eq!(lines.len(), 3);
    }
}
