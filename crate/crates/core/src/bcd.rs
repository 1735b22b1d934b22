//! Per-state coordinate ascent.
//!
//! For a fixed multiplier `eta`, each fading state is solved on its own:
//! maximise `su_rate - eta * outage` over scheduling, SU powers, the
//! information-phase duration `tau1` and the PU information power `p1`.
//! One pass updates scheduling and SU powers, then `tau1`, then `p1`; passes
//! repeat until the objective stops improving.
//!
//! Jammers always end a pass at their energy caps, and those caps bind the
//! `tau1` update at its current value, so a single run keeps `tau1` where it
//! started. Runs are therefore launched from several starting durations and
//! the best local solution is kept.

use serde::Serialize;

use crate::config::NetworkConfig;
use crate::model::FadingState;
use crate::rates::{self, Allocation, SecrecyMode};
use crate::subproblems::{schedule_and_powers, update_p1, update_tau1};

/// Solution of one fading state at a fixed multiplier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerStateSolution {
    pub allocation: Allocation,
    /// Objective `su_rate - eta * outage` at the returned allocation.
    pub dual_value: f64,
    pub su_rate: f64,
    /// Secrecy rate under the solve mode.
    pub secrecy: f64,
    /// Outage under the solve mode; this is what the multiplier update sees.
    pub outage: bool,
    /// Outage under the eavesdropper model of the configuration.
    pub true_outage: bool,
    pub bcd_iterations: usize,
    /// Stopped on the improvement tolerance rather than the iteration cap.
    pub converged: bool,
}

/// `su_rate - eta * outage` for one block.
pub fn objective(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
) -> f64 {
    let rate = rates::su_rate(state, alloc, cfg);
    let outage = rates::coop_secrecy(state, alloc, cfg, mode).outage;
    rate - if outage { eta } else { 0.0 }
}

/// Fills in the power-transfer phase so that the whole block and the whole
/// PU budget are used.
pub fn reconstruct(alloc: &mut Allocation, cfg: &NetworkConfig) {
    if alloc.tau1 >= 1.0 {
        alloc.tau1 = 1.0;
        alloc.tau0 = 0.0;
        alloc.p0 = 0.0;
    } else {
        alloc.tau0 = 1.0 - alloc.tau1;
        alloc.p0 = ((cfg.pu_power_budget - alloc.p1 * alloc.tau1) / alloc.tau0).max(0.0);
    }
}

/// One coordinate-ascent run from a given starting duration.
#[derive(Debug, Clone, PartialEq)]
pub struct BcdRun {
    pub allocation: Allocation,
    /// Objective before the first pass and after every pass.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn run_bcd(
    state: &FadingState,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
    tau1_start: f64,
) -> BcdRun {
    let settings = &cfg.solver;
    let mut alloc = Allocation::idle(state.num_sus(), tau1_start, cfg.pu_power_budget);
    reconstruct(&mut alloc, cfg);
    let mut value = objective(state, &alloc, cfg, eta, mode);
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.bcd_max_iters {
        iterations += 1;
        // The block solvers decide secrecy with their own arithmetic; an
        // allocation landing exactly on the threshold can come out an ulp
        // on the other side here. Such a step is not taken.
        let mut current = value;
        let mut step = |alloc: &mut Allocation, update: &dyn Fn(&Allocation) -> Allocation| {
            let mut next = update(alloc);
            reconstruct(&mut next, cfg);
            let v = objective(state, &next, cfg, eta, mode);
            if v >= current {
                *alloc = next;
                current = v;
            }
        };
        step(&mut alloc, &|a| schedule_and_powers(state, a, cfg, eta, mode));
        step(&mut alloc, &|a| Allocation {
            tau1: update_tau1(state, a, cfg),
            ..a.clone()
        });
        step(&mut alloc, &|a| Allocation {
            p1: update_p1(state, a, cfg, eta, mode),
            ..a.clone()
        });
        let next = current;
        trace.push(next);
        let gain = next - value;
        value = next;
        if gain < settings.bcd_tol {
            converged = true;
            break;
        }
    }
    BcdRun {
        allocation: alloc,
        trace,
        iterations,
        converged,
    }
}

/// Starting durations tried by [`solve_per_state`], primary start first.
pub fn tau1_starts(cfg: &NetworkConfig) -> impl Iterator<Item = f64> + '_ {
    std::iter::once(cfg.solver.tau1_init).chain(cfg.solver.tau1_starts.iter().copied())
}

pub fn solve_per_state(
    state: &FadingState,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
) -> PerStateSolution {
    let mut best: Option<(BcdRun, f64)> = None;
    for start in tau1_starts(cfg) {
        let run = run_bcd(state, cfg, eta, mode, start);
        let value = objective(state, &run.allocation, cfg, eta, mode);
        if best.as_ref().map_or(true, |(_, v)| value > *v) {
            best = Some((run, value));
        }
    }
    let (run, _) = best.expect("at least one start");
    finish(state, cfg, eta, mode, run.allocation, run.iterations, run.converged)
}

/// Packages an allocation into a [`PerStateSolution`].
///
/// A block with no power-transfer phase leaves the SUs without energy; the
/// PU then transmits at full budget, which never hurts secrecy.
pub fn finish(
    state: &FadingState,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
    mut allocation: Allocation,
    bcd_iterations: usize,
    converged: bool,
) -> PerStateSolution {
    reconstruct(&mut allocation, cfg);
    if allocation.tau0 == 0.0 && allocation.info_power.iter().all(|&p| p == 0.0) {
        let mut full = allocation.clone();
        full.p1 = cfg.pu_power_budget;
        if objective(state, &full, cfg, eta, mode) >= objective(state, &allocation, cfg, eta, mode)
        {
            allocation = full;
        }
    }
    let report = rates::coop_secrecy(state, &allocation, cfg, mode);
    let actual = SecrecyMode::actual(cfg);
    let true_outage = if actual == mode {
        report.outage
    } else {
        rates::coop_secrecy(state, &allocation, cfg, actual).outage
    };
    let su_rate = rates::su_rate(state, &allocation, cfg);
    PerStateSolution {
        dual_value: su_rate - if report.outage { eta } else { 0.0 },
        su_rate,
        secrecy: report.secrecy,
        outage: report.outage,
        true_outage,
        allocation,
        bcd_iterations,
        converged,
    }
}
