//! Single-block updates used inside the coordinate ascent.
//!
//! Each update maximises the per-state objective `su_rate - eta * outage`
//! over one block of variables with the others held fixed:
//!
//! * [`update_tau1`]: the information-phase duration, pushed to the largest
//!   value the PU budget and the SU energy budgets allow.
//! * [`update_p1`]: the PU information power. The SU rate falls with `p1`
//!   while secrecy needs `p1` above a per-eavesdropper threshold, so the
//!   optimum is either zero or the smallest secure power.
//! * [`update_su_power`]: the power of one scheduled SU with everybody else
//!   jamming at full budget. Per eavesdropper, secrecy holds on the
//!   sublevel set of a convex quadratic in that power.
//! * [`schedule_and_powers`]: the above for every candidate SU, keeping the best.
//!
//! The exact updates evaluate the true objective at a candidate set that
//! contains the block optimum. With `paper_faithful` set, the PU power and SU
//! power instead follow the per-eavesdropper min-max selection.

use crate::config::NetworkConfig;
use crate::golden::golden_max;
use crate::model::FadingState;
use crate::rates::{self, Allocation, Interference, SecrecyMode};

/// `2^(R / tau1) - 1`, the SINR-ratio excess secrecy demands.
fn secrecy_excess(target: f64, tau1: f64) -> f64 {
    (target / tau1 * std::f64::consts::LN_2).exp_m1()
}

/// Largest total power SU `k` can spend during the information phase.
pub fn energy_cap(state: &FadingState, cfg: &NetworkConfig, k: usize, tau1: f64, p1: f64) -> f64 {
    // No power-transfer phase, nothing harvested.
    if k == 0 || tau1 >= 1.0 {
        return 0.0;
    }
    let lam = cfg.lambda();
    let (h_pst, h_ss) = (state.h_pst[k], state.h_ss[k]);
    let cap = lam * (h_pst * cfg.pu_power_budget + h_ss * cfg.chap_power) / tau1
        - lam * (h_pst * p1 + h_ss * cfg.chap_power);
    cap.max(0.0)
}

/// Power limits implied by the current block values.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCaps {
    /// Upper limit on the PU information power.
    pub p1_bar: f64,
    /// Per-SU limit on information or jamming power (zero for the virtual user).
    pub su_bar: Vec<f64>,
}

pub fn power_caps(state: &FadingState, alloc: &Allocation, cfg: &NetworkConfig) -> PowerCaps {
    PowerCaps {
        p1_bar: p1_cap(state, alloc, cfg),
        su_bar: (0..=state.num_sus())
            .map(|k| energy_cap(state, cfg, k, alloc.tau1, alloc.p1))
            .collect(),
    }
}

/// Upper limit on `p1` given `tau1` and the SU powers.
pub fn p1_cap(state: &FadingState, alloc: &Allocation, cfg: &NetworkConfig) -> f64 {
    let lam = cfg.lambda();
    let tau1 = alloc.tau1;
    let mut cap = cfg.pu_power_budget / tau1;
    for k in 1..=state.num_sus() {
        let (h_pst, h_ss) = (state.h_pst[k], state.h_ss[k]);
        let spend = alloc.info_power[k] + alloc.jam_power[k];
        let num = lam * h_pst * cfg.pu_power_budget + lam * h_ss * cfg.chap_power
            - (lam * h_ss * cfg.chap_power + spend) * tau1;
        let bound = if h_pst > 0.0 {
            num / (lam * h_pst * tau1)
        } else if num >= 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        cap = cap.min(bound);
    }
    cap.max(0.0)
}

/// Largest feasible information-phase duration for the current powers,
/// kept below one while any SU spends energy.
pub fn update_tau1(state: &FadingState, alloc: &Allocation, cfg: &NetworkConfig) -> f64 {
    let lam = cfg.lambda();
    let budget = cfg.pu_power_budget;
    let mut tau1: f64 = if alloc.p1 > 0.0 {
        (budget / alloc.p1).min(1.0)
    } else {
        1.0
    };
    for k in 1..=state.num_sus() {
        let (h_pst, h_ss) = (state.h_pst[k], state.h_ss[k]);
        let num = lam * (h_pst * budget + h_ss * cfg.chap_power);
        let den = alloc.info_power[k]
            + alloc.jam_power[k]
            + lam * h_pst * alloc.p1
            + lam * h_ss * cfg.chap_power;
        if den > 0.0 {
            tau1 = tau1.min(num / den);
        }
    }
    // Recomputing the binding constraint can land an ulp under a feasible
    // incumbent, and secrecy sitting on its threshold would notice.
    if tau1 < alloc.tau1 && tau1 >= alloc.tau1 * (1.0 - 1e-12) {
        tau1 = alloc.tau1;
    }
    // Any SU spending energy needs a power-transfer phase of positive length.
    let spending = (1..=state.num_sus()).any(|k| alloc.info_power[k] + alloc.jam_power[k] > 0.0);
    let top = if spending {
        1.0 - cfg.solver.tau1_min
    } else {
        1.0
    };
    tau1.clamp(cfg.solver.tau1_min, top)
}

/// Steps `x` toward `limit` in growing relative increments until `ok(x)`
/// holds; a boundary point computed in closed form can land a rounding
/// error on the wrong side.
fn settle<F: Fn(f64) -> bool>(x: f64, limit: f64, ok: F) -> Option<f64> {
    if ok(x) {
        return Some(x);
    }
    let dir = (limit - x).signum();
    let scale = x.abs().max(limit.abs()).max(f64::MIN_POSITIVE);
    let mut step = scale * 1e-14;
    for _ in 0..24 {
        let y = x + dir * step;
        if (limit - y) * dir < 0.0 {
            break;
        }
        if ok(y) {
            return Some(y);
        }
        step *= 4.0;
    }
    None
}

// ---------------------------------------------------------------------------
// PU information power
// ---------------------------------------------------------------------------

/// Per-state objective as a function of `p1` with everything else fixed.
struct PuPowerProblem<'a> {
    state: &'a FadingState,
    cfg: &'a NetworkConfig,
    alloc: &'a Allocation,
    mode: SecrecyMode,
    interference: Interference,
}

impl PuPowerProblem<'_> {
    fn rate(&self, p1: f64) -> f64 {
        let k = self.alloc.scheduled;
        rates::scheduled_rate(
            self.cfg,
            self.state.h_ss[k],
            self.state.h_psr,
            self.alloc.info_power[k],
            p1,
            self.alloc.tau1,
        )
    }

    fn secure(&self, p1: f64) -> bool {
        let at_eav = self.interference.at_eav(self.mode);
        let s = rates::secrecy_with(
            self.state,
            self.cfg,
            self.mode,
            p1,
            self.alloc.tau1,
            self.interference.pu,
            |n| at_eav[n],
        );
        !rates::outage_indicator(s, self.cfg.secrecy_rate)
    }

    fn objective(&self, p1: f64, eta: f64) -> f64 {
        let penalty = if self.secure(p1) { 0.0 } else { eta };
        self.rate(p1) - penalty
    }

    /// `W` coefficients: secrecy holds iff `W * p1 >= 2^(R/tau1) - 1`, for
    /// every entry when non-collusive and for the single entry otherwise.
    fn slopes(&self) -> Vec<f64> {
        let (state, cfg) = (self.state, self.cfg);
        let noise = cfg.noise_power;
        let growth = 1.0 + secrecy_excess(cfg.secrecy_rate, self.alloc.tau1);
        let pu = state.h_pp / (noise + self.interference.pu);
        let at_eav = self.interference.at_eav(self.mode);
        let eav = |n: usize| state.h_pe[n] / (noise + at_eav[n]);
        if self.mode.is_collusive() {
            let total: f64 = (0..state.num_eavs()).map(eav).sum();
            vec![pu - growth * total]
        } else {
            (0..state.num_eavs()).map(|n| pu - growth * eav(n)).collect()
        }
    }

    /// Smallest `p1` at which each slope's secrecy condition holds.
    fn thresholds(&self) -> Vec<Option<f64>> {
        let excess = secrecy_excess(self.cfg.secrecy_rate, self.alloc.tau1);
        self.slopes()
            .into_iter()
            .map(|w| (w > 0.0 && excess.is_finite()).then(|| excess / w))
            .collect()
    }
}

/// PU information power maximising the per-state objective for fixed
/// `tau1` and SU powers. Always lies in `[0, p1_cap]`.
pub fn update_p1(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
) -> f64 {
    let cap = p1_cap(state, alloc, cfg);
    let problem = PuPowerProblem {
        state,
        cfg,
        alloc,
        mode,
        interference: Interference::of(state, alloc),
    };
    let thresholds = problem.thresholds();

    if cfg.solver.paper_faithful && !mode.is_collusive() {
        return faithful_p1(&problem, &thresholds, cap, eta);
    }

    let mut candidates = vec![0.0];
    if let Some(need) = thresholds.iter().copied().collect::<Option<Vec<f64>>>() {
        let need = need.into_iter().fold(0.0, f64::max);
        if need <= cap {
            if let Some(p) = settle(need, cap, |p| problem.secure(p)) {
                candidates.push(p);
            }
        }
    }
    // The incumbent was feasible; a cap recomputed from powers that sit on
    // their own caps can land below it, amplified by a weak PU-to-SU gain.
    // Judge it against harvested energy with rounding-level slack instead.
    let incumbent_fits = alloc.p1 <= cap || {
        let mut shaved = alloc.clone();
        for k in 1..=state.num_sus() {
            shaved.info_power[k] *= 1.0 - 1e-12;
            shaved.jam_power[k] *= 1.0 - 1e-12;
        }
        alloc.p1 <= p1_cap(state, &shaved, cfg)
    };
    if incumbent_fits {
        candidates.push(alloc.p1);
    }
    best_of(&candidates, |p| problem.objective(p, eta))
}

/// Per-eavesdropper selection followed by the min-max pick over eavesdroppers.
fn faithful_p1(problem: &PuPowerProblem<'_>, thresholds: &[Option<f64>], cap: f64, eta: f64) -> f64 {
    let f0 = problem.rate(0.0);
    let excess = secrecy_excess(problem.cfg.secrecy_rate, problem.alloc.tau1);
    let slopes = problem.slopes();
    let mut best: Option<(f64, f64)> = None;
    for (n, thr) in thresholds.iter().enumerate() {
        let p = match thr {
            Some(t) if *t <= cap && problem.rate(*t) >= f0 - eta => *t,
            _ => 0.0,
        };
        let secure_n = slopes[n] * p >= excess;
        let value = problem.rate(p) - if secure_n { 0.0 } else { eta };
        if best.map_or(true, |(_, v)| value < v) {
            best = Some((p, value));
        }
    }
    let p = best.map_or(0.0, |(p, _)| p);
    if p > 0.0 {
        settle(p, cap, |x| problem.secure(x)).unwrap_or(p)
    } else {
        p
    }
}

/// First candidate attaining the largest value.
fn best_of<F: Fn(f64) -> f64>(candidates: &[f64], value: F) -> f64 {
    let mut best = (candidates[0], value(candidates[0]));
    for &x in &candidates[1..] {
        let v = value(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best.0
}

// ---------------------------------------------------------------------------
// SU information power
// ---------------------------------------------------------------------------

/// Coefficients of `a x^2 + b x + c <= 0`, the condition for secrecy
/// against one eavesdropper as a function of the scheduled SU's power `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `b^2 - 4ac`.
    pub disc: f64,
    /// Real roots in ascending order when `a > 0` and `disc >= 0`.
    pub roots: Option<(f64, f64)>,
}

impl SecrecyQuadratic {
    pub fn value(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    /// The set of reals where the quadratic is non-positive.
    pub fn solution_set(&self) -> Option<(f64, f64)> {
        let (a, b, c) = (self.a, self.b, self.c);
        if a > 0.0 {
            return self.roots;
        }
        if b > 0.0 {
            Some((f64::NEG_INFINITY, -c / b))
        } else if b < 0.0 {
            Some((-c / b, f64::INFINITY))
        } else if c <= 0.0 {
            Some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            None
        }
    }

    fn new(a: f64, b: f64, c: f64) -> Self {
        let disc = b * b - 4.0 * a * c;
        let roots = if a > 0.0 && disc >= 0.0 {
            // Cancellation-free pair.
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let (r1, r2) = if q != 0.0 {
                (q / a, c / q)
            } else {
                (-b / (2.0 * a), -b / (2.0 * a))
            };
            Some((r1.min(r2), r1.max(r2)))
        } else {
            None
        };
        Self {
            a,
            b,
            c,
            disc,
            roots,
        }
    }
}

/// The per-state objective as a function of SU `k`'s information power,
/// with every other actual SU jamming at its cap.
pub(crate) struct UserPowerProblem<'a> {
    state: &'a FadingState,
    cfg: &'a NetworkConfig,
    mode: SecrecyMode,
    k: usize,
    tau1: f64,
    p1: f64,
    /// Cap on this user's information power.
    pub cap: f64,
    /// Jamming power received at each eavesdropper from the other users.
    jam: Vec<f64>,
}

impl<'a> UserPowerProblem<'a> {
    pub fn new(
        state: &'a FadingState,
        cfg: &'a NetworkConfig,
        mode: SecrecyMode,
        k: usize,
        tau1: f64,
        p1: f64,
        caps: &[f64],
    ) -> Self {
        let jam = (0..state.num_eavs())
            .map(|n| {
                (1..caps.len())
                    .filter(|&j| j != k)
                    .map(|j| caps[j] * state.h_se[j][n])
                    .sum()
            })
            .collect();
        Self {
            state,
            cfg,
            mode,
            k,
            tau1,
            p1,
            cap: caps[k],
            jam,
        }
    }

    pub fn rate(&self, x: f64) -> f64 {
        rates::scheduled_rate(
            self.cfg,
            self.state.h_ss[self.k],
            self.state.h_psr,
            x,
            self.p1,
            self.tau1,
        )
    }

    pub fn secrecy(&self, x: f64) -> f64 {
        let (state, k) = (self.state, self.k);
        let info_at_eav = if self.mode.jamming_only() { 0.0 } else { x };
        rates::secrecy_with(
            state,
            self.cfg,
            self.mode,
            self.p1,
            self.tau1,
            x * state.h_sp[k],
            |n| self.jam[n] + info_at_eav * state.h_se[k][n],
        )
    }

    pub fn secure(&self, x: f64) -> bool {
        !rates::outage_indicator(self.secrecy(x), self.cfg.secrecy_rate)
    }

    pub fn objective(&self, x: f64, eta: f64) -> f64 {
        self.rate(x) - if self.secure(x) { 0.0 } else { eta }
    }

    pub fn quadratic(&self, n: usize) -> SecrecyQuadratic {
        let (state, cfg, k) = (self.state, self.cfg, self.k);
        let noise = cfg.noise_power;
        let excess = secrecy_excess(cfg.secrecy_rate, self.tau1);
        let growth = 1.0 + excess;
        let (h_sp, h_se) = (state.h_sp[k], state.h_se[k][n]);
        let jam = noise + self.jam[n];
        let pu = noise + self.p1 * state.h_pp;
        let a = excess * h_sp * h_se;
        let b = growth * (noise * h_se + h_sp * (jam + self.p1 * state.h_pe[n])) - pu * h_se - jam * h_sp;
        let c = growth * noise * (jam + self.p1 * state.h_pe[n]) - pu * jam;
        SecrecyQuadratic::new(a, b, c)
    }

    /// Powers in `[0, cap]` for which secrecy holds, when they form an
    /// interval; `None` when there are none.
    fn secure_interval(&self) -> Option<(f64, f64)> {
        let target = self.cfg.secrecy_rate;
        let excess = secrecy_excess(target, self.tau1);
        if !excess.is_finite() || self.p1 <= 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, self.cap);
        match self.mode {
            SecrecyMode::NonCollusive => {
                for n in 0..self.state.num_eavs() {
                    let (l, h) = self.quadratic(n).solution_set()?;
                    lo = lo.max(l);
                    hi = hi.min(h);
                }
            }
            SecrecyMode::CollusiveLowerBound => {
                // The eavesdropper term does not depend on this user's power.
                let (state, noise) = (self.state, self.cfg.noise_power);
                let sinr: f64 = (0..state.num_eavs())
                    .map(|n| self.p1 * state.h_pe[n] / (noise + self.jam[n]))
                    .sum();
                let needed = (1.0 + excess) * (1.0 + sinr) - 1.0;
                let room = self.p1 * state.h_pp / needed - noise;
                let h_sp = state.h_sp[self.k];
                if h_sp > 0.0 {
                    hi = hi.min(room / h_sp);
                } else if room < 0.0 {
                    return None;
                }
            }
            SecrecyMode::Collusive => return self.scan_interval(),
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Numerical stand-in for the collusive case: the largest secure power
    /// found by a uniform scan, golden-section on the secrecy rate and
    /// bisection to the boundary.
    fn scan_interval(&self) -> Option<(f64, f64)> {
        const SAMPLES: usize = 32;
        let cap = self.cap;
        if self.secure(cap) {
            return Some((cap, cap));
        }
        let mut feasible = None;
        for i in (0..SAMPLES).rev() {
            let x = cap * i as f64 / SAMPLES as f64;
            if self.secure(x) {
                feasible = Some(x);
                break;
            }
        }
        let start = match feasible {
            Some(x) => x,
            None => {
                let (x, s) = golden_max(|x| self.secrecy(x), 0.0, cap, cap * 1e-9);
                if s < self.cfg.secrecy_rate || !self.secure(x) {
                    return None;
                }
                x
            }
        };
        let upper_sample = ((start / cap * SAMPLES as f64).floor() + 1.0) / SAMPLES as f64 * cap;
        let (mut good, mut bad) = (start, upper_sample.min(cap));
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if self.secure(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Some((good, good))
    }
}

/// Coefficients of the per-eavesdropper secrecy quadratic for user `k`
/// scheduled, every other actual user jamming at its cap.
pub fn secrecy_quadratic(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    k: usize,
    n: usize,
) -> SecrecyQuadratic {
    let caps = user_caps(state, cfg, alloc.tau1, alloc.p1);
    UserPowerProblem::new(state, cfg, SecrecyMode::NonCollusive, k, alloc.tau1, alloc.p1, &caps)
        .quadratic(n)
}

fn user_caps(state: &FadingState, cfg: &NetworkConfig, tau1: f64, p1: f64) -> Vec<f64> {
    (0..=state.num_sus())
        .map(|k| energy_cap(state, cfg, k, tau1, p1))
        .collect()
}

fn solve_user(problem: &UserPowerProblem<'_>, cfg: &NetworkConfig, eta: f64) -> f64 {
    let cap = problem.cap;
    if cfg.solver.paper_faithful && problem.mode == SecrecyMode::NonCollusive {
        return faithful_su_power(problem, eta);
    }
    let mut candidates = vec![cap];
    if let Some((lo, hi)) = problem.secure_interval() {
        if let Some(x) = settle(hi, lo, |x| problem.secure(x)) {
            candidates.push(x);
        } else {
            candidates.push(0.5 * (lo + hi));
        }
    }
    candidates.push(0.0);
    best_of(&candidates, |x| problem.objective(x, eta))
}

/// Per-eavesdropper branch table followed by the min-max pick.
fn faithful_su_power(problem: &UserPowerProblem<'_>, eta: f64) -> f64 {
    let cap = problem.cap;
    let excess = secrecy_excess(problem.cfg.secrecy_rate, problem.tau1);
    if !excess.is_finite() || problem.p1 <= 0.0 {
        return cap;
    }
    let f_cap = problem.rate(cap);
    let mut best: Option<(f64, f64)> = None;
    for n in 0..problem.state.num_eavs() {
        let quad = problem.quadratic(n);
        let clipped = quad
            .solution_set()
            .map(|(l, h)| (l.max(0.0), h.min(cap)))
            .filter(|(l, h)| l <= h);
        let x = match clipped {
            Some((_, h)) if problem.rate(h) >= f_cap - eta => h,
            _ => cap,
        };
        let secure_n = clipped.is_some_and(|(l, h)| l <= x && x <= h);
        let value = problem.rate(x) - if secure_n { 0.0 } else { eta };
        if best.map_or(true, |(_, v)| value < v) {
            best = Some((x, value));
        }
    }
    let x = best.map_or(cap, |(x, _)| x);
    if x < cap {
        settle(x, 0.0, |y| problem.secure(y)).unwrap_or(x)
    } else {
        x
    }
}

/// Information power of SU `k` when it is the scheduled user and every
/// other actual SU jams at its cap. Lies in `[0, cap_k]`.
pub fn update_su_power(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    k: usize,
    mode: SecrecyMode,
) -> f64 {
    let caps = user_caps(state, cfg, alloc.tau1, alloc.p1);
    let problem = UserPowerProblem::new(state, cfg, mode, k, alloc.tau1, alloc.p1, &caps);
    solve_user(&problem, cfg, eta)
}

/// Scheduling and SU powers for fixed `tau1` and `p1`.
///
/// Every candidate user (the virtual one included) is solved with the
/// others jamming at their caps; the best objective wins, ties going to the
/// lowest index.
pub fn schedule_and_powers(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    eta: f64,
    mode: SecrecyMode,
) -> Allocation {
    let (tau1, p1) = (alloc.tau1, alloc.p1);
    let caps = user_caps(state, cfg, tau1, p1);
    let mut best: Option<(usize, f64, f64)> = None;
    for k in 0..=state.num_sus() {
        let problem = UserPowerProblem::new(state, cfg, mode, k, tau1, p1, &caps);
        let x = solve_user(&problem, cfg, eta);
        let value = problem.objective(x, eta);
        if best.map_or(true, |(_, _, v)| value > v) {
            best = Some((k, x, value));
        }
    }
    let (scheduled, power, _) = best.expect("virtual user is always a candidate");
    let mut out = alloc.clone();
    out.scheduled = scheduled;
    for k in 0..=state.num_sus() {
        out.info_power[k] = if k == scheduled { power } else { 0.0 };
        out.jam_power[k] = if k == scheduled || k == 0 { 0.0 } else { caps[k] };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_state;

    fn small_cfg(k: usize, n: usize) -> NetworkConfig {
        NetworkConfig::default().with_counts(k, n)
    }

    #[test]
    fn tau1_all_idle_is_one() {
        let cfg = small_cfg(3, 2);
        let s = generate_state(&cfg, 0);
        let alloc = Allocation::idle(3, 0.5, cfg.pu_power_budget);
        assert!((update_tau1(&s, &alloc, &cfg) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tau1_limited_by_pu_budget() {
        let cfg = small_cfg(1, 1);
        let mut s = FadingState::zeros(1, 1);
        s.h_pst[1] = 1e-6;
        let alloc = Allocation::idle(1, 0.5, 2.0 * cfg.pu_power_budget);
        assert!((update_tau1(&s, &alloc, &cfg) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tau1_saturates_jammer_budget() {
        let cfg = small_cfg(4, 2);
        let s = generate_state(&cfg, 2);
        let alloc = Allocation::idle(4, 0.3, 1.0);
        let jam = schedule_and_powers(&s, &alloc, &cfg, 1.0, SecrecyMode::NonCollusive);
        let t = update_tau1(&s, &jam, &cfg);
        assert!(t <= 0.3 + 1e-12);
    }

    #[test]
    fn p1_zero_without_penalty() {
        let cfg = small_cfg(2, 2);
        let s = generate_state(&cfg, 5);
        let mut alloc = Allocation::idle(2, 0.5, cfg.pu_power_budget);
        alloc = schedule_and_powers(&s, &alloc, &cfg, 0.0, SecrecyMode::NonCollusive);
        assert_eq!(update_p1(&s, &alloc, &cfg, 0.0, SecrecyMode::NonCollusive), 0.0);
    }

    #[test]
    fn p1_zero_when_no_secure_power_exists() {
        let cfg = small_cfg(1, 1);
        let mut s = FadingState::zeros(1, 1);
        s.h_pp = 1e-6;
        s.h_pe[0] = 1e-5;
        let alloc = Allocation::idle(1, 0.5, 1.0);
        let problem = PuPowerProblem {
            state: &s,
            cfg: &cfg,
            alloc: &alloc,
            mode: SecrecyMode::NonCollusive,
            interference: Interference::of(&s, &alloc),
        };
        assert!(problem.slopes().iter().all(|&w| w <= 0.0));
        assert_eq!(update_p1(&s, &alloc, &cfg, 5.0, SecrecyMode::NonCollusive), 0.0);
    }

    #[test]
    fn quadratic_at_zero_pu_power() {
        let cfg = small_cfg(3, 2);
        let s = generate_state(&cfg, 8);
        let alloc = Allocation::idle(3, 0.4, 0.0);
        let caps = user_caps(&s, &cfg, 0.4, 0.0);
        let growth = 2f64.powf(cfg.secrecy_rate / 0.4);
        for n in 0..2 {
            let q = secrecy_quadratic(&s, &alloc, &cfg, 2, n);
            let jam: f64 = [1, 3].iter().map(|&j| caps[j] * s.h_se[j][n]).sum();
            let sig = cfg.noise_power;
            let expected = (growth - 1.0) * sig * (sig + jam);
            assert!((q.c - expected).abs() <= 1e-12 * expected.abs());
            assert!(q.c > 0.0);
            let a = (growth - 1.0) * s.h_sp[2] * s.h_se[2][n];
            assert!((q.a - a).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn su_power_cap_when_never_secure() {
        // PU link far weaker than the eavesdropper's: no power is secure.
        let cfg = small_cfg(2, 1);
        let mut s = generate_state(&cfg, 1);
        s.h_pp = 1e-12;
        let alloc = Allocation::idle(2, 0.5, 1.0);
        for k in 1..=2 {
            let q = secrecy_quadratic(&s, &alloc, &cfg, k, 0);
            assert!(q.disc < 0.0 || q.roots.unwrap().1 < 0.0);
            let cap = energy_cap(&s, &cfg, k, 0.5, 1.0);
            let x = update_su_power(&s, &alloc, &cfg, 3.0, k, SecrecyMode::NonCollusive);
            assert_eq!(x, cap);
        }
    }

    #[test]
    fn su_power_cap_without_penalty() {
        let cfg = small_cfg(3, 3);
        let s = generate_state(&cfg, 4);
        let alloc = Allocation::idle(3, 0.5, 1e-3);
        for k in 1..=3 {
            let x = update_su_power(&s, &alloc, &cfg, 0.0, k, SecrecyMode::NonCollusive);
            assert_eq!(x, energy_cap(&s, &cfg, k, 0.5, 1e-3));
        }
    }

    #[test]
    fn all_silent_links_schedule_virtual_user() {
        let cfg = small_cfg(3, 2);
        let mut s = generate_state(&cfg, 6);
        s.h_ss.iter_mut().for_each(|h| *h = 0.0);
        let alloc = Allocation::idle(3, 0.5, 1.0);
        let out = schedule_and_powers(&s, &alloc, &cfg, 2.0, SecrecyMode::NonCollusive);
        assert_eq!(out.scheduled, 0);
        assert!(out.info_power.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn quadratic_root_sign_pattern() {
        let cfg = small_cfg(3, 2);
        let mut seen = 0;
        for i in 0..200 {
            let s = generate_state(&cfg, i);
            let alloc = Allocation::idle(3, 0.5, 2e-3);
            for k in 1..=3 {
                let q = secrecy_quadratic(&s, &alloc, &cfg, k, 0);
                if let Some((x1, x2)) = q.roots {
                    if q.disc > 0.0 && x2 > x1 {
                        let d = (x2 - x1) * 1e-3;
                        assert!(q.value(x1 - d) > 0.0);
                        assert!(q.value(0.5 * (x1 + x2)) < 0.0);
                        assert!(q.value(x2 + d) > 0.0);
                        seen += 1;
                    }
                }
            }
        }
        assert!(seen > 10, "{seen}");
    }
}
