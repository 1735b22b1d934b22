//! Solver-versus-oracle consistency checks on random instances.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bcd::{objective, reconstruct, solve_per_state};
use crate::config::NetworkConfig;
use crate::model::{generate_state, FadingState};
use crate::oracles::{self, GRID_POINTS};
use crate::rates::{self, Allocation, SecrecyMode};
use crate::subproblems::{energy_cap, update_p1, update_su_power, update_tau1};

/// Absolute tolerance on constraint violations.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// A random block: fading state, feasible allocation and penalty.
#[derive(Debug, Clone)]
pub struct Instance {
    pub state: FadingState,
    pub alloc: Allocation,
    pub eta: f64,
}

/// Draws a state, then `tau1`, `p1`, a scheduled user and SU powers at
/// random fractions of their energy caps, and a log-uniform penalty in
/// `[1e-4, 10]`.
pub fn random_instance<R: Rng>(cfg: &NetworkConfig, rng: &mut R) -> Instance {
    let state = generate_state(cfg, rng.gen());
    let tau1 = rng.gen_range(0.02..0.98);
    let p1_top = cfg.pu_power_budget / tau1;
    let p1 = if rng.gen_bool(0.1) {
        0.0
    } else {
        p1_top * 10f64.powf(rng.gen_range(-7.0..0.0))
    };
    let mut alloc = Allocation::idle(state.num_sus(), tau1, p1);
    alloc.scheduled = rng.gen_range(0..=state.num_sus());
    for k in 1..=state.num_sus() {
        let cap = energy_cap(&state, cfg, k, tau1, p1);
        let share = if rng.gen_bool(0.3) { 1.0 } else { rng.gen::<f64>() };
        if k == alloc.scheduled {
            alloc.info_power[k] = share * cap;
        } else {
            alloc.jam_power[k] = share * cap;
        }
    }
    reconstruct(&mut alloc, cfg);
    let eta = 10f64.powf(rng.gen_range(-4.0..1.0));
    Instance { state, alloc, eta }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    /// Instances where the solver fell short of the oracle by more than the slack.
    pub shortfalls: usize,
    /// Instances where the solver's output broke a constraint.
    pub violations: usize,
    /// Largest `oracle - solver - slack` seen (negative when all pass).
    pub worst_excess: f64,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.into(),
            instances: 0,
            shortfalls: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, solver: f64, oracle: f64, slack: f64, feasible: bool) {
        self.instances += 1;
        let rounding = 1e-12 * oracle.abs().max(solver.abs()) + 1e-15;
        let excess = oracle - solver - slack - rounding;
        self.worst_excess = self.worst_excess.max(excess);
        if excess > 0.0 {
            self.shortfalls += 1;
        }
        if !feasible {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.shortfalls == 0 && self.violations == 0
    }
}

fn feasible(state: &FadingState, alloc: &Allocation, cfg: &NetworkConfig) -> bool {
    let mut full = alloc.clone();
    reconstruct(&mut full, cfg);
    full.max_violation(state, cfg) <= FEASIBILITY_TOL
}

/// `update_tau1` against [`oracles::grid_tau1`].
pub fn check_tau1(cfg: &NetworkConfig, mode: SecrecyMode, instances: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("tau1");
    for _ in 0..instances {
        let Instance { state, alloc, eta } = random_instance(cfg, &mut rng);
        let mut ours = alloc.clone();
        ours.tau1 = update_tau1(&state, &alloc, cfg);
        let grid = oracles::grid_tau1(&state, &alloc, cfg, eta, mode, GRID_POINTS);
        // The rate is linear in tau1 with this slope; outage only improves with tau1.
        let mut unit = alloc.clone();
        unit.tau1 = 1.0;
        let slack = rates::su_rate(&state, &unit, cfg) * grid.step;
        report.record(
            objective(&state, &ours, cfg, eta, mode),
            grid.value,
            slack,
            feasible(&state, &ours, cfg),
        );
    }
    report
}

/// `update_p1` against [`oracles::grid_p1`].
pub fn check_p1(cfg: &NetworkConfig, mode: SecrecyMode, instances: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("p1");
    for _ in 0..instances {
        let Instance { state, alloc, eta } = random_instance(cfg, &mut rng);
        let mut ours = alloc.clone();
        ours.p1 = update_p1(&state, &alloc, cfg, eta, mode);
        let grid = oracles::grid_p1(&state, &alloc, cfg, eta, mode, GRID_POINTS);
        let k = alloc.scheduled;
        let signal = alloc.info_power[k] * state.h_ss[k];
        let noise = cfg.noise_power;
        let steepest = alloc.tau1 * signal * state.h_psr / (noise * (noise + signal) * LN_2);
        report.record(
            objective(&state, &ours, cfg, eta, mode),
            grid.value,
            steepest * grid.step,
            feasible(&state, &ours, cfg),
        );
    }
    report
}

/// `update_su_power` against [`oracles::grid_ps`], the other users jamming
/// at full energy.
pub fn check_su_power(
    cfg: &NetworkConfig,
    mode: SecrecyMode,
    instances: usize,
    seed: u64,
) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("su_power");
    for _ in 0..instances {
        let Instance { state, alloc, eta } = random_instance(cfg, &mut rng);
        let k = rng.gen_range(0..=state.num_sus());
        let (tau1, p1) = (alloc.tau1, alloc.p1);
        let mut ours = Allocation::idle(state.num_sus(), tau1, p1);
        ours.scheduled = k;
        for j in 1..=state.num_sus() {
            if j != k {
                ours.jam_power[j] = energy_cap(&state, cfg, j, tau1, p1);
            }
        }
        ours.info_power[k] = update_su_power(&state, &ours, cfg, eta, k, mode);
        let grid = oracles::grid_ps(&state, &ours, cfg, eta, k, mode, GRID_POINTS);
        let steepest = tau1 * state.h_ss[k] / ((cfg.noise_power + p1 * state.h_psr) * LN_2);
        report.record(
            objective(&state, &ours, cfg, eta, mode),
            grid.value,
            steepest * grid.step,
            feasible(&state, &ours, cfg),
        );
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveReport {
    pub states: usize,
    /// States where the per-state solver is within the relative tolerance
    /// of (or above) the exhaustive optimum.
    pub within: usize,
    pub rel_tol: f64,
    /// Smallest `solver / oracle` ratio over states with a positive optimum.
    pub worst_ratio: f64,
}

impl ExhaustiveReport {
    pub fn fraction(&self) -> f64 {
        self.within as f64 / self.states as f64
    }
}

/// Per-state solver against [`oracles::exhaustive_small`] with penalties
/// log-uniform in `[1e-4, 1]`. `cfg` must have `K, N <= 2`.
pub fn check_exhaustive(
    cfg: &NetworkConfig,
    mode: SecrecyMode,
    states: usize,
    resolution: usize,
    rel_tol: f64,
    seed: u64,
) -> crate::Result<ExhaustiveReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ExhaustiveReport {
        states,
        within: 0,
        rel_tol,
        worst_ratio: f64::INFINITY,
    };
    for _ in 0..states {
        let state = generate_state(cfg, rng.gen());
        let eta = 10f64.powf(rng.gen_range(-4.0..0.0));
        let best = oracles::exhaustive_small(&state, cfg, eta, mode, resolution)?;
        let ours = solve_per_state(&state, cfg, eta, mode).dual_value;
        if ours >= best.value - rel_tol * best.value.abs() {
            report.within += 1;
        }
        if best.value > 0.0 {
            report.worst_ratio = report.worst_ratio.min(ours / best.value);
        }
    }
    Ok(report)
}
