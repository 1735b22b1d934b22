//! Brute-force and closed-form references.
//!
//! Nothing here calls into the solvers: feasibility is re-derived from the
//! block constraints and objectives are evaluated through [`crate::rates`]
//! only, so agreement between an oracle and a solver is evidence about the
//! solver.

use serde::Serialize;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::model::FadingState;
use crate::rates::{self, Allocation, SecrecyMode};

/// Default resolution of the one-dimensional grids.
pub const GRID_POINTS: usize = 10_000;
/// Default per-axis resolution of the exhaustive search.
pub const EXHAUSTIVE_RESOLUTION: usize = 60;

/// Best grid point of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOptimum {
    pub arg: f64,
    pub value: f64,
    /// Grid spacing.
    pub step: f64,
}

fn objective(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
) -> f64 {
    let rate = rates::su_rate(state, alloc, cfg);
    rate - if rates::coop_secrecy(state, alloc, cfg, mode).outage {
        eta
    } else {
        0.0
    }
}

/// Energy SU `k` may spend in the information phase, from the harvesting
/// constraint with the whole block and whole PU budget used. Negative when
/// the constraint cannot hold.
fn spendable(state: &FadingState, cfg: &NetworkConfig, k: usize, tau1: f64, p1: f64) -> f64 {
    if tau1 >= 1.0 {
        return 0.0;
    }
    let harvested_energy = cfg.lambda()
        * (state.h_pst[k] * (cfg.pu_power_budget - p1 * tau1)
            + state.h_ss[k] * cfg.chap_power * (1.0 - tau1));
    harvested_energy / tau1
}

fn slack(x: f64) -> f64 {
    1e-12 * x.abs().max(1e-300)
}

/// Uniform grid over `tau1` in `[0, 1]` restricted to durations the PU
/// budget and every SU's harvested energy allow.
pub fn grid_tau1(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
    points: usize,
) -> GridOptimum {
    let step = 1.0 / (points - 1) as f64;
    let feasible = |tau1: f64| {
        if alloc.p1 * tau1 > cfg.pu_power_budget * (1.0 + 1e-12) {
            return false;
        }
        (1..=state.num_sus()).all(|k| {
            let spend = (alloc.info_power[k] + alloc.jam_power[k]) * tau1;
            if tau1 >= 1.0 {
                return spend == 0.0;
            }
            let energy = cfg.lambda()
                * (state.h_pst[k] * (cfg.pu_power_budget - alloc.p1 * tau1)
                    + state.h_ss[k] * cfg.chap_power * (1.0 - tau1));
            spend <= energy + slack(energy)
        })
    };
    let mut best = GridOptimum {
        arg: 0.0,
        value: f64::NEG_INFINITY,
        step,
    };
    let mut trial = alloc.clone();
    for i in 0..points {
        let tau1 = i as f64 * step;
        if !feasible(tau1) {
            continue;
        }
        trial.tau1 = tau1;
        let v = objective(state, &trial, cfg, eta, mode);
        if v > best.value {
            best.arg = tau1;
            best.value = v;
        }
    }
    best
}

/// Upper end of the PU information power range for fixed `tau1` and SU powers.
fn p1_limit(state: &FadingState, alloc: &Allocation, cfg: &NetworkConfig) -> f64 {
    let tau1 = alloc.tau1;
    let lam = cfg.lambda();
    let mut limit = cfg.pu_power_budget / tau1;
    for k in 1..=state.num_sus() {
        let spend = (alloc.info_power[k] + alloc.jam_power[k]) * tau1;
        // spend <= lam * (h_pst * (P - p1 tau1) + h_ss Q (1 - tau1)), solved for p1.
        let spare = lam * (state.h_pst[k] * cfg.pu_power_budget
            + state.h_ss[k] * cfg.chap_power * (1.0 - tau1))
            - spend;
        let per_watt = lam * state.h_pst[k] * tau1;
        if per_watt > 0.0 {
            limit = limit.min(spare / per_watt);
        } else if spare < 0.0 {
            limit = 0.0;
        }
    }
    limit.max(0.0)
}

/// Uniform grid over the PU information power range.
pub fn grid_p1(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
    points: usize,
) -> GridOptimum {
    let limit = p1_limit(state, alloc, cfg);
    let step = limit / (points - 1) as f64;
    let mut best = GridOptimum {
        arg: 0.0,
        value: f64::NEG_INFINITY,
        step,
    };
    let mut trial = alloc.clone();
    for i in 0..points {
        trial.p1 = i as f64 * step;
        let v = objective(state, &trial, cfg, eta, mode);
        if v > best.value {
            best.arg = trial.p1;
            best.value = v;
        }
    }
    best
}

/// Allocation with user `k` scheduled at power `ps` and every other actual
/// user jamming with all its harvested energy; `None` if infeasible.
fn scheduled_allocation(
    state: &FadingState,
    cfg: &NetworkConfig,
    k: usize,
    tau1: f64,
    p1: f64,
    ps: f64,
) -> Option<Allocation> {
    let mut alloc = Allocation::idle(state.num_sus(), tau1, p1);
    alloc.scheduled = k;
    for j in 1..=state.num_sus() {
        let budget = spendable(state, cfg, j, tau1, p1);
        if budget < 0.0 {
            return None;
        }
        if j == k {
            alloc.info_power[j] = ps;
        } else {
            alloc.jam_power[j] = budget;
        }
    }
    if k == 0 && ps > 0.0 {
        return None;
    }
    Some(alloc)
}

/// Uniform grid over user `k`'s information power with the others jamming
/// at full energy.
pub fn grid_ps(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    k: usize,
    mode: SecrecyMode,
    points: usize,
) -> GridOptimum {
    let (tau1, p1) = (alloc.tau1, alloc.p1);
    let limit = if k == 0 {
        0.0
    } else {
        spendable(state, cfg, k, tau1, p1).max(0.0)
    };
    let step = limit / (points - 1) as f64;
    let mut best = GridOptimum {
        arg: 0.0,
        value: f64::NEG_INFINITY,
        step,
    };
    for i in 0..points {
        let ps = i as f64 * step;
        let Some(trial) = scheduled_allocation(state, cfg, k, tau1, p1, ps) else {
            continue;
        };
        let v = objective(state, &trial, cfg, eta, mode);
        if v > best.value {
            best.arg = ps;
            best.value = v;
        }
        if k == 0 {
            break;
        }
    }
    best
}

/// Best point of the exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveOptimum {
    pub value: f64,
    pub tau1: f64,
    pub p1: f64,
    pub ps: f64,
    pub scheduled: usize,
}

/// Geometric PU-power axis: zero followed by `count - 1` points spread
/// evenly in log scale from `top * 1e-7` to `top`.
fn p1_axis(top: f64, count: usize) -> impl Iterator<Item = f64> {
    let n = count.saturating_sub(1).max(1);
    let ratio = 1e7f64.powf(1.0 / (n.max(2) - 1) as f64);
    std::iter::once(0.0).chain((0..n).map(move |i| top * 1e-7 * ratio.powi(i as i32)))
}

/// Exhaustive search over scheduling, `tau1`, `p1` and the scheduled
/// power, with every other user jamming at full energy. Limited to small
/// networks.
///
/// `tau1` runs over `1/res, 2/res, ..., 1`; `p1` over zero plus a geometric
/// axis ending at `P / tau1` (only `P` itself at `tau1 = 1`); the scheduled power over a uniform axis of its
/// energy limit.
pub fn exhaustive_small(
    state: &FadingState,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
    resolution: usize,
) -> Result<ExhaustiveOptimum> {
    let (sus, eavs) = (state.num_sus(), state.num_eavs());
    if sus > 2 || eavs > 2 {
        return Err(Error::OracleTooLarge { sus, eavs });
    }
    let res = resolution.max(2);
    let mut best = ExhaustiveOptimum {
        value: f64::NEG_INFINITY,
        tau1: 0.0,
        p1: 0.0,
        ps: 0.0,
        scheduled: 0,
    };
    for i in 1..=res {
        let tau1 = i as f64 / res as f64;
        // A block without a power-transfer phase spends the PU budget at once.
        let p1_values: Vec<f64> = if i == res {
            vec![cfg.pu_power_budget]
        } else {
            p1_axis(cfg.pu_power_budget / tau1, res).collect()
        };
        for p1 in p1_values {
            for k in 0..=sus {
                let limit = if k == 0 {
                    0.0
                } else {
                    spendable(state, cfg, k, tau1, p1)
                };
                if limit < 0.0 {
                    continue;
                }
                let ps_points = if k == 0 { 1 } else { res };
                for l in 0..ps_points {
                    let ps = if ps_points == 1 {
                        0.0
                    } else {
                        limit * l as f64 / (ps_points - 1) as f64
                    };
                    let Some(alloc) = scheduled_allocation(state, cfg, k, tau1, p1, ps) else {
                        continue;
                    };
                    let v = objective(state, &alloc, cfg, eta, mode);
                    if v > best.value {
                        best = ExhaustiveOptimum {
                            value: v,
                            tau1,
                            p1,
                            ps,
                            scheduled: k,
                        };
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Outage probability of a single-eavesdropper link without cooperation
/// under unit-mean exponential fading.
///
/// `a` and `b` are the mean SNRs at the legitimate receiver and at the
/// eavesdropper. With `X, Y ~ Exp(1)`, the link is secure iff
/// `1 + aX >= 2^R (1 + bY)`, so conditioning on `Y` and integrating gives
/// `P(secure) = exp(-(2^R - 1)/a) / (1 + 2^R b / a)`. Valid for `R > 0`.
pub fn analytic_eps_p(a: f64, b: f64, target: f64) -> f64 {
    let growth = 2f64.powf(target);
    1.0 - (-(growth - 1.0) / a).exp() / (1.0 + growth * b / a)
}
