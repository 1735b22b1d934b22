//! Two alternatives to the multiplier iteration: a greedy solver that
//! protects the PU as much as possible, and a heuristic for when the
//! eavesdroppers' channels are unknown.

use serde::{Deserialize, Serialize};

use crate::bcd::{finish, PerStateSolution};
use crate::config::NetworkConfig;
use crate::dual::{estimate_eps_p, solve_all, DualTrace, EnsembleSolution};
use crate::error::{Error, Result};
use crate::golden::scan_then_golden;
use crate::model::FadingState;
use crate::rates::{self, Allocation, SecrecyMode};

/// Samples of the coarse scan that seeds the search over `tau1`.
pub const UNKNOWN_CSI_SCAN_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Fixed penalty on every outage.
    pub eta_greedy: f64,
    pub mode: SecrecyMode,
}

impl GreedyConfig {
    pub fn from_config(cfg: &NetworkConfig) -> Self {
        GreedyConfig {
            eta_greedy: cfg.solver.eta_greedy,
            mode: SecrecyMode::default_for(cfg),
        }
    }
}

/// Solves every state at a fixed large penalty, without an outage target.
pub fn run_greedy(
    states: &[FadingState],
    cfg: &NetworkConfig,
    greedy: GreedyConfig,
) -> Result<EnsembleSolution> {
    if states.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !(greedy.eta_greedy >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "eta_greedy must be nonnegative, got {}",
            greedy.eta_greedy
        )));
    }
    let per_state = solve_all(states, cfg, greedy.eta_greedy, greedy.mode);
    let eps_p = estimate_eps_p(states, cfg);
    Ok(EnsembleSolution::from_states(
        per_state,
        eps_p,
        eps_p - cfg.outage_reduction,
        greedy.eta_greedy,
        DualTrace {
            converged: true,
            ..DualTrace::default()
        },
    ))
}

/// Rate of the strongest SU when it spends all the access point's energy
/// and the PU transmits its whole budget during the information phase.
pub fn unknown_csi_rate(cfg: &NetworkConfig, h_ss: f64, h_psr: f64, tau1: f64) -> f64 {
    if tau1 <= 0.0 || tau1 >= 1.0 {
        return 0.0;
    }
    let ps = cfg.lambda() * h_ss * cfg.chap_power * (1.0 - tau1) / tau1;
    rates::scheduled_rate(cfg, h_ss, h_psr, ps, cfg.pu_power_budget / tau1, tau1)
}

/// Allocation for a block whose eavesdropper channels are unknown.
///
/// The strongest SU transmits, every other SU jams with all its energy and
/// the PU transfers no power: `p0 = 0`, `p1 = P / tau1`. Only the SU access
/// gains, the PU-to-access-point gain and the configuration are read.
pub fn unknown_csi_allocation(state: &FadingState, cfg: &NetworkConfig) -> Allocation {
    let k_star = (1..=state.num_sus())
        .filter(|&k| state.h_ss[k] > 0.0)
        .fold(None, |best: Option<usize>, k| match best {
            Some(b) if state.h_ss[b] >= state.h_ss[k] => Some(b),
            _ => Some(k),
        });
    let Some(k_star) = k_star else {
        return Allocation::idle(state.num_sus(), 1.0, cfg.pu_power_budget);
    };
    let (h_ss, h_psr) = (state.h_ss[k_star], state.h_psr);
    let (tau1, _) = scan_then_golden(
        |t| unknown_csi_rate(cfg, h_ss, h_psr, t),
        0.0,
        1.0,
        UNKNOWN_CSI_SCAN_POINTS,
        cfg.solver.golden_tol,
    );
    let tau0 = 1.0 - tau1;
    let mut alloc = Allocation::idle(state.num_sus(), tau1, cfg.pu_power_budget / tau1);
    alloc.tau0 = tau0;
    alloc.p0 = 0.0;
    alloc.scheduled = k_star;
    for k in 1..=state.num_sus() {
        let energy = cfg.lambda() * state.h_ss[k] * cfg.chap_power * tau0 / tau1;
        if k == k_star {
            alloc.info_power[k] = energy;
        } else {
            alloc.jam_power[k] = energy;
        }
    }
    alloc
}

/// [`unknown_csi_allocation`] packaged with its rate and the outage under
/// the true eavesdropper channels.
pub fn solve_unknown_csi(state: &FadingState, cfg: &NetworkConfig) -> PerStateSolution {
    let alloc = unknown_csi_allocation(state, cfg);
    finish(state, cfg, 0.0, SecrecyMode::actual(cfg), alloc, 0, true)
}

pub fn run_unknown_csi(states: &[FadingState], cfg: &NetworkConfig) -> Result<EnsembleSolution> {
    use rayon::prelude::*;
    if states.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let per_state: Vec<_> = states.par_iter().map(|s| solve_unknown_csi(s, cfg)).collect();
    let eps_p = estimate_eps_p(states, cfg);
    Ok(EnsembleSolution::from_states(
        per_state,
        eps_p,
        eps_p - cfg.outage_reduction,
        0.0,
        DualTrace {
            converged: true,
            ..DualTrace::default()
        },
    ))
}
