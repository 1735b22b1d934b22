//! Rate, secrecy-rate and outage evaluation.
//!
//! All rates are base-2, in bits/s/Hz. Rates carried by the information
//! phase are scaled by its duration `tau1`; a zero-length phase carries
//! nothing.

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::model::FadingState;

/// How the eavesdroppers combine what they overhear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecrecyMode {
    /// Each eavesdropper decodes alone; the strongest one counts.
    #[serde(rename = "noncollusive", alias = "non-collusive")]
    NonCollusive,
    /// Maximum-ratio combining across eavesdroppers.
    #[serde(rename = "collusive")]
    Collusive,
    /// Collusive combining with the scheduled user's information signal left
    /// out of the eavesdropper interference. Never exceeds the collusive
    /// secrecy rate.
    #[serde(rename = "collusive-lb")]
    CollusiveLowerBound,
}

impl SecrecyMode {
    /// The mode describing the eavesdroppers configured in `cfg`.
    pub fn actual(cfg: &NetworkConfig) -> Self {
        if cfg.collusive {
            Self::Collusive
        } else {
            Self::NonCollusive
        }
    }

    /// The mode the optimiser uses by default for `cfg`.
    pub fn default_for(cfg: &NetworkConfig) -> Self {
        if cfg.collusive {
            Self::CollusiveLowerBound
        } else {
            Self::NonCollusive
        }
    }

    pub fn is_collusive(self) -> bool {
        !matches!(self, Self::NonCollusive)
    }

    /// Whether information-signal interference is dropped at the eavesdroppers.
    pub(crate) fn jamming_only(self) -> bool {
        matches!(self, Self::CollusiveLowerBound)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NonCollusive => "noncollusive",
            Self::Collusive => "collusive",
            Self::CollusiveLowerBound => "collusive-lb",
        }
    }
}

impl std::str::FromStr for SecrecyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "noncollusive" | "non-collusive" => Ok(Self::NonCollusive),
            "collusive" => Ok(Self::Collusive),
            "collusive-lb" | "collusive_lower_bound" => Ok(Self::CollusiveLowerBound),
            other => Err(format!("unknown secrecy mode `{other}`")),
        }
    }
}

impl std::fmt::Display for SecrecyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Decision variables of one fading block.
///
/// Per-user vectors have `K + 1` entries with entry 0 the virtual user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// Power-transfer phase duration.
    pub tau0: f64,
    /// Information-transfer phase duration.
    pub tau1: f64,
    /// PU transmit power while transferring energy.
    pub p0: f64,
    /// PU transmit power while sending information.
    pub p1: f64,
    /// Information power of each SU.
    pub info_power: Vec<f64>,
    /// Jamming power of each SU.
    pub jam_power: Vec<f64>,
    /// The SU sending information; 0 means every actual SU jams.
    pub scheduled: usize,
}

impl Allocation {
    /// Zero SU powers with the given phase split and PU powers.
    pub fn idle(num_sus: usize, tau1: f64, p1: f64) -> Self {
        Self {
            tau0: 1.0 - tau1,
            tau1,
            p0: 0.0,
            p1,
            info_power: vec![0.0; num_sus + 1],
            jam_power: vec![0.0; num_sus + 1],
            scheduled: 0,
        }
    }

    pub fn num_sus(&self) -> usize {
        self.info_power.len() - 1
    }

    /// Largest violation of the block constraints, in the units of each
    /// constraint. Zero for a feasible allocation.
    pub fn max_violation(&self, state: &FadingState, cfg: &NetworkConfig) -> f64 {
        let mut worst: f64 = 0.0;
        let mut check = |excess: f64| worst = worst.max(excess);
        check(self.p0 * self.tau0 + self.p1 * self.tau1 - cfg.pu_power_budget);
        check(self.tau0 + self.tau1 - 1.0);
        for v in [self.tau0, self.tau1, self.p0, self.p1] {
            check(-v);
        }
        let mut senders = 0;
        for k in 0..self.info_power.len() {
            let (ps, qs) = (self.info_power[k], self.jam_power[k]);
            check(-ps);
            check(-qs);
            check(ps * qs);
            if ps > 0.0 {
                senders += 1;
                if k != self.scheduled {
                    check(ps);
                }
            }
            let harvested = cfg.lambda()
                * (state.h_pst[k] * self.p0 + state.h_ss[k] * cfg.chap_power)
                * self.tau0;
            check((ps + qs) * self.tau1 - harvested);
        }
        if senders > 1 {
            worst = f64::INFINITY;
        }
        worst
    }
}

/// PU-side outcome of one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecrecyReport {
    /// Rate at the primary receiver.
    pub pu_rate: f64,
    /// Per-eavesdropper rates, or a single combined rate when collusive.
    pub eav_rates: Vec<f64>,
    pub secrecy: f64,
    pub outage: bool,
}

/// `true` when the secrecy rate misses the target; meeting it exactly is not an outage.
pub fn outage_indicator(secrecy: f64, target: f64) -> bool {
    secrecy < target
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Secrecy rate given the interference each receiver sees.
///
/// `pu_interference` is the SU information power received at the PRx and
/// `eav_interference(n)` the SU power (information and/or jamming, as the
/// mode dictates) received at eavesdropper `n`, both excluding noise.
#[inline]
pub(crate) fn secrecy_with<F: Fn(usize) -> f64>(
    state: &FadingState,
    cfg: &NetworkConfig,
    mode: SecrecyMode,
    p1: f64,
    tau1: f64,
    pu_interference: f64,
    eav_interference: F,
) -> f64 {
    if tau1 <= 0.0 || p1 <= 0.0 {
        return 0.0;
    }
    let noise = cfg.noise_power;
    let pu = log2_1p(p1 * state.h_pp / (noise + pu_interference));
    let eav = eav_log_rate(state, noise, mode, p1, eav_interference);
    tau1 * (pu - eav).max(0.0)
}

#[inline]
fn eav_log_rate<F: Fn(usize) -> f64>(
    state: &FadingState,
    noise: f64,
    mode: SecrecyMode,
    p1: f64,
    eav_interference: F,
) -> f64 {
    let sinr = |n: usize| p1 * state.h_pe[n] / (noise + eav_interference(n));
    let n_eavs = state.h_pe.len();
    if mode.is_collusive() {
        log2_1p((0..n_eavs).map(sinr).sum())
    } else {
        (0..n_eavs).map(|n| log2_1p(sinr(n))).fold(0.0, f64::max)
    }
}

/// Interference sums of an allocation.
pub(crate) struct Interference {
    pub pu: f64,
    /// Information plus jamming power at each eavesdropper.
    pub eav_total: Vec<f64>,
    /// Jamming power only at each eavesdropper.
    pub eav_jam: Vec<f64>,
}

impl Interference {
    pub fn of(state: &FadingState, alloc: &Allocation) -> Self {
        let n_eavs = state.num_eavs();
        let mut pu = 0.0;
        let mut eav_total = vec![0.0; n_eavs];
        let mut eav_jam = vec![0.0; n_eavs];
        for k in 0..alloc.info_power.len() {
            let (ps, qs) = (alloc.info_power[k], alloc.jam_power[k]);
            pu += ps * state.h_sp[k];
            for n in 0..n_eavs {
                let h = state.h_se[k][n];
                eav_total[n] += (ps + qs) * h;
                eav_jam[n] += qs * h;
            }
        }
        Self {
            pu,
            eav_total,
            eav_jam,
        }
    }

    pub fn at_eav(&self, mode: SecrecyMode) -> &[f64] {
        if mode.jamming_only() {
            &self.eav_jam
        } else {
            &self.eav_total
        }
    }
}

/// Secrecy rate of the PU without SU cooperation, transmitting at full
/// budget for the whole block.
pub fn no_coop_secrecy(state: &FadingState, cfg: &NetworkConfig) -> f64 {
    let mode = SecrecyMode::actual(cfg);
    secrecy_with(state, cfg, mode, cfg.pu_power_budget, 1.0, 0.0, |_| 0.0)
}

pub fn coop_secrecy(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    mode: SecrecyMode,
) -> SecrecyReport {
    let interference = Interference::of(state, alloc);
    let at_eav = interference.at_eav(mode);
    let (tau1, p1, noise) = (alloc.tau1, alloc.p1, cfg.noise_power);
    let scaled = |x: f64| if tau1 > 0.0 { tau1 * x } else { 0.0 };
    let pu_rate = scaled(log2_1p(p1 * state.h_pp / (noise + interference.pu)));
    let sinr = |n: usize| p1 * state.h_pe[n] / (noise + at_eav[n]);
    let eav_rates: Vec<f64> = if mode.is_collusive() {
        vec![scaled(log2_1p((0..state.num_eavs()).map(sinr).sum()))]
    } else {
        (0..state.num_eavs())
            .map(|n| scaled(log2_1p(sinr(n))))
            .collect()
    };
    let secrecy = secrecy_with(state, cfg, mode, p1, tau1, interference.pu, |n| {
        at_eav[n]
    });
    SecrecyReport {
        pu_rate,
        eav_rates,
        secrecy,
        outage: outage_indicator(secrecy, cfg.secrecy_rate),
    }
}

/// Secrecy rate against eavesdropper `n` alone.
pub fn per_eav_secrecy(
    state: &FadingState,
    alloc: &Allocation,
    cfg: &NetworkConfig,
    n: usize,
) -> Result<f64> {
    let count = state.num_eavs();
    if n >= count {
        return Err(Error::EavOutOfRange { index: n, count });
    }
    let interference = Interference::of(state, alloc);
    let (tau1, p1, noise) = (alloc.tau1, alloc.p1, cfg.noise_power);
    if tau1 <= 0.0 || p1 <= 0.0 {
        return Ok(0.0);
    }
    let pu = log2_1p(p1 * state.h_pp / (noise + interference.pu));
    let eav = log2_1p(p1 * state.h_pe[n] / (noise + interference.eav_total[n]));
    Ok(tau1 * (pu - eav).max(0.0))
}

/// SU rate at the access point for one block.
pub fn su_rate(state: &FadingState, alloc: &Allocation, cfg: &NetworkConfig) -> f64 {
    if alloc.tau1 <= 0.0 {
        return 0.0;
    }
    let denom = cfg.noise_power + alloc.p1 * state.h_psr;
    let sum: f64 = alloc
        .info_power
        .iter()
        .zip(&state.h_ss)
        .map(|(&ps, &h)| log2_1p(ps * h / denom))
        .sum();
    alloc.tau1 * sum
}

/// SU rate of the single scheduled user with power `ps` and gain `h_ss`.
#[inline]
pub(crate) fn scheduled_rate(
    cfg: &NetworkConfig,
    h_ss: f64,
    h_psr: f64,
    ps: f64,
    p1: f64,
    tau1: f64,
) -> f64 {
    if tau1 <= 0.0 {
        return 0.0;
    }
    tau1 * log2_1p(ps * h_ss / (cfg.noise_power + p1 * h_psr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_state;

    fn cfg_unit() -> NetworkConfig {
        let mut cfg = NetworkConfig::default();
        cfg.noise_power = 1.0;
        cfg.pu_power_budget = 1.0;
        cfg.num_sus = 1;
        cfg.num_eavs = 1;
        cfg
    }

    #[test]
    fn no_coop_examples() {
        let mut cfg = cfg_unit();
        let mut s = FadingState::zeros(1, 1);
        s.h_pp = 3.0;
        s.h_pe[0] = 1.0;
        assert!((no_coop_secrecy(&s, &cfg) - 1.0).abs() < 1e-12);

        s.h_pp = 1.0;
        s.h_pe[0] = 3.0;
        assert_eq!(no_coop_secrecy(&s, &cfg), 0.0);

        cfg.collusive = true;
        cfg.num_eavs = 2;
        let mut s = FadingState::zeros(1, 2);
        s.h_pp = 1.0;
        s.h_pe = vec![1.0, 1.0];
        assert_eq!(no_coop_secrecy(&s, &cfg), 0.0);
        // Non-collusive with the same gains: log2(2) - log2(2) = 0 as well,
        // but a stronger PU link separates the two.
        s.h_pp = 7.0;
        assert!((no_coop_secrecy(&s, &cfg) - (3.0 - 3f64.log2())).abs() < 1e-12);
        cfg.collusive = false;
        assert!((no_coop_secrecy(&s, &cfg) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_pu_power_means_outage() {
        let cfg = NetworkConfig::default();
        let s = generate_state(&cfg, 1);
        let alloc = Allocation::idle(cfg.num_sus, 0.5, 0.0);
        let rep = coop_secrecy(&s, &alloc, &cfg, SecrecyMode::NonCollusive);
        assert_eq!(rep.pu_rate, 0.0);
        assert!(rep.eav_rates.iter().all(|&r| r == 0.0));
        assert_eq!(rep.secrecy, 0.0);
        assert!(rep.outage);
    }

    #[test]
    fn huge_jamming_silences_eavesdroppers() {
        let cfg = cfg_unit();
        let mut s = FadingState::zeros(1, 1);
        s.h_pp = 3.0;
        s.h_pe[0] = 2.0;
        s.h_se[1][0] = 1.0;
        let mut alloc = Allocation::idle(1, 0.5, 1.0);
        alloc.jam_power[1] = 1e12;
        let rep = coop_secrecy(&s, &alloc, &cfg, SecrecyMode::NonCollusive);
        assert!(rep.eav_rates[0] < 1e-11);
        assert!((rep.secrecy - 0.5 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn su_rate_examples() {
        let cfg = cfg_unit();
        let mut s = FadingState::zeros(1, 1);
        s.h_ss[1] = 2.0;
        s.h_psr = 1.0;
        let mut alloc = Allocation::idle(1, 0.5, 1.0);
        alloc.info_power[1] = 1.0;
        alloc.scheduled = 1;
        // 1 * 2 / (1 + 1) = 1
        assert!((su_rate(&s, &alloc, &cfg) - 0.5).abs() < 1e-12);
        alloc.p1 = 1e15;
        assert!(su_rate(&s, &alloc, &cfg) < 1e-14);
        let idle = Allocation::idle(1, 0.5, 1.0);
        assert_eq!(su_rate(&s, &idle, &cfg), 0.0);
        let mut flat = alloc.clone();
        flat.tau1 = 0.0;
        assert_eq!(su_rate(&s, &flat, &cfg), 0.0);
    }

    #[test]
    fn outage_boundary() {
        assert!(outage_indicator(0.4, 0.5));
        assert!(!outage_indicator(0.5, 0.5));
        assert!(!outage_indicator(0.6, 0.5));
    }

    #[test]
    fn per_eav_edges() {
        let cfg = NetworkConfig::default();
        let s = generate_state(&cfg.with_counts(2, 1), 3);
        let mut alloc = Allocation::idle(2, 0.5, 1e-3);
        alloc.jam_power[1] = 1e-5;
        let whole = coop_secrecy(&s, &alloc, &cfg, SecrecyMode::NonCollusive).secrecy;
        assert_eq!(per_eav_secrecy(&s, &alloc, &cfg, 0).unwrap(), whole);
        assert!(matches!(
            per_eav_secrecy(&s, &alloc, &cfg, 1),
            Err(Error::EavOutOfRange { index: 1, count: 1 })
        ));
        let mut blind = s.clone();
        blind.h_pe[0] = 0.0;
        let rep = coop_secrecy(&blind, &alloc, &cfg, SecrecyMode::NonCollusive);
        assert_eq!(per_eav_secrecy(&blind, &alloc, &cfg, 0).unwrap(), rep.pu_rate);
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [
            SecrecyMode::NonCollusive,
            SecrecyMode::Collusive,
            SecrecyMode::CollusiveLowerBound,
        ] {
            assert_eq!(m.as_str().parse::<SecrecyMode>().unwrap(), m);
        }
        assert!("both".parse::<SecrecyMode>().is_err());
    }
}
