use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cwpcn::bcd::{run_bcd, solve_per_state, tau1_starts};
use cwpcn::checks::{random_instance, Instance};
use cwpcn::rates::{coop_secrecy, per_eav_secrecy, su_rate};
use cwpcn::subproblems::{energy_cap, schedule_and_powers, secrecy_quadratic, update_tau1};
use cwpcn::variants::unknown_csi_allocation;
use cwpcn::{NetworkConfig, SecrecyMode};

const MODES: [SecrecyMode; 3] = [
    SecrecyMode::NonCollusive,
    SecrecyMode::Collusive,
    SecrecyMode::CollusiveLowerBound,
];

fn instance(k: usize, n: usize, seed: u64) -> (NetworkConfig, Instance) {
    let cfg = NetworkConfig::default().with_counts(k, n);
    let inst = random_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
    (cfg, inst)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) + 1e-300
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn secrecy_never_drops_with_more_jamming(
        k in 1usize..6, n in 1usize..5, seed: u64, who in 0usize..6, factor in 1.0f64..100.0
    ) {
        let (cfg, Instance { state, alloc, .. }) = instance(k, n, seed);
        let others: Vec<usize> = (1..=k).filter(|&j| j != alloc.scheduled).collect();
        if others.is_empty() {
            return Ok(());
        }
        let j = others[who % others.len()];
        let mut louder = alloc.clone();
        louder.jam_power[j] = alloc.jam_power[j].max(1e-9) * factor;
        for mode in MODES {
            let before = coop_secrecy(&state, &alloc, &cfg, mode).secrecy;
            let after = coop_secrecy(&state, &louder, &cfg, mode).secrecy;
            prop_assert!(after >= before * (1.0 - 1e-12), "{mode}: {before} -> {after}");
        }
    }

    #[test]
    fn collusion_orders_secrecy(k in 1usize..6, n in 1usize..5, seed: u64) {
        let (cfg, Instance { state, alloc, .. }) = instance(k, n, seed);
        let [non, col, lb] = MODES.map(|m| coop_secrecy(&state, &alloc, &cfg, m));
        prop_assert!(lb.secrecy <= col.secrecy * (1.0 + 1e-12));
        prop_assert!(col.secrecy <= non.secrecy * (1.0 + 1e-12));
        prop_assert!(lb.outage >= col.outage && col.outage >= non.outage);
        for r in [&non, &col, &lb] {
            prop_assert!(r.secrecy >= 0.0 && r.secrecy.is_finite());
            prop_assert_eq!(r.outage, r.secrecy < cfg.secrecy_rate);
        }
    }

    #[test]
    fn worst_eavesdropper_sets_secrecy(k in 1usize..6, n in 1usize..5, seed: u64) {
        let (cfg, Instance { state, alloc, .. }) = instance(k, n, seed);
        let report = coop_secrecy(&state, &alloc, &cfg, SecrecyMode::NonCollusive);
        let per: Vec<f64> = (0..n).map(|i| per_eav_secrecy(&state, &alloc, &cfg, i).unwrap()).collect();
        let min = per.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(close(min, report.secrecy), "{min} vs {}", report.secrecy);
        let any_outage = per.iter().any(|&s| s < cfg.secrecy_rate);
        prop_assert_eq!(any_outage, report.outage);
        prop_assert!(per_eav_secrecy(&state, &alloc, &cfg, n).is_err());
    }

    #[test]
    fn rates_are_finite_and_nonnegative(k in 1usize..6, n in 1usize..5, seed: u64) {
        let (cfg, Instance { state, alloc, .. }) = instance(k, n, seed);
        let r = su_rate(&state, &alloc, &cfg);
        prop_assert!(r >= 0.0 && r.is_finite());
        let mut idle = alloc.clone();
        idle.tau1 = 0.0;
        prop_assert_eq!(su_rate(&state, &idle, &cfg), 0.0);
        prop_assert_eq!(coop_secrecy(&state, &idle, &cfg, SecrecyMode::NonCollusive).pu_rate, 0.0);
    }

    #[test]
    fn tau1_update_is_feasible(k in 1usize..6, n in 1usize..5, seed: u64) {
        let (cfg, Instance { state, mut alloc, .. }) = instance(k, n, seed);
        let tau1 = update_tau1(&state, &alloc, &cfg);
        prop_assert!((cfg.solver.tau1_min..=1.0).contains(&tau1));
        prop_assert!(tau1 >= alloc.tau1 * (1.0 - 1e-12), "never below the current feasible value");
        alloc.tau1 = tau1;
        alloc.tau0 = 1.0 - tau1;
        alloc.p0 = if tau1 < 1.0 { (cfg.pu_power_budget - alloc.p1 * tau1) / alloc.tau0 } else { 0.0 };
        prop_assert!(alloc.max_violation(&state, &cfg) <= 1e-9);
    }

    #[test]
    fn scheduling_picks_at_most_one_user(k in 1usize..6, n in 1usize..5, seed: u64) {
        let (cfg, Instance { state, alloc, eta }) = instance(k, n, seed);
        for mode in MODES {
            let a = schedule_and_powers(&state, &alloc, &cfg, eta, mode);
            let senders: Vec<usize> = (1..=k).filter(|&j| a.info_power[j] > 0.0).collect();
            prop_assert!(senders.len() <= 1);
            if let Some(&s) = senders.first() {
                prop_assert_eq!(s, a.scheduled);
            }
            for j in (1..=k).filter(|&j| j != a.scheduled) {
                let cap = energy_cap(&state, &cfg, j, a.tau1, a.p1);
                prop_assert_eq!(a.jam_power[j], cap);
                prop_assert_eq!(a.info_power[j], 0.0);
            }
            prop_assert_eq!(a.jam_power[a.scheduled], 0.0);
        }
    }

    #[test]
    fn quadratic_sign_matches_direct_secrecy(k in 1usize..5, n in 1usize..4, seed: u64) {
        let (cfg, Instance { state, alloc, .. }) = instance(k, n, seed);
        let who = 1 + (seed as usize) % k;
        for eav in 0..n {
            let q = secrecy_quadratic(&state, &alloc, &cfg, who, eav);
            prop_assert!(q.a >= 0.0);
            if let Some((x1, x2)) = q.roots {
                prop_assert!(x1 <= x2);
                if q.disc > 0.0 && x2 - x1 > 1e-9 * x2.abs().max(1e-300) {
                    let d = 1e-6 * (x2 - x1);
                    prop_assert!(q.value(x1 - d) > 0.0);
                    prop_assert!(q.value(0.5 * (x1 + x2)) < 0.0);
                    prop_assert!(q.value(x2 + d) > 0.0);
                }
            }
        }
    }

    #[test]
    fn per_state_solutions_are_complete_and_feasible(
        k in 1usize..5, n in 1usize..4, index: u64, log_eta in -4.0f64..1.0
    ) {
        let cfg = NetworkConfig::default().with_counts(k, n);
        let state = cwpcn::model::generate_state(&cfg, index);
        for mode in MODES {
            let sol = solve_per_state(&state, &cfg, 10f64.powf(log_eta), mode);
            let a = &sol.allocation;
            prop_assert!((a.tau0 + a.tau1 - 1.0).abs() <= 1e-9);
            prop_assert!((a.p0 * a.tau0 + a.p1 * a.tau1 - cfg.pu_power_budget).abs() <= 1e-9);
            prop_assert!(a.max_violation(&state, &cfg) <= 1e-9);
            prop_assert!(sol.bcd_iterations <= cfg.solver.bcd_max_iters);
        }
    }

    #[test]
    fn coordinate_ascent_never_loses_ground(k in 1usize..5, n in 1usize..4, index: u64, log_eta in -4.0f64..1.0) {
        let cfg = NetworkConfig::default().with_counts(k, n);
        let state = cwpcn::model::generate_state(&cfg, index);
        let eta = 10f64.powf(log_eta);
        for start in tau1_starts(&cfg).collect::<Vec<_>>() {
            let run = run_bcd(&state, &cfg, eta, SecrecyMode::NonCollusive, start);
            for w in run.trace.windows(2).skip(1) {
                prop_assert!(w[1] >= w[0] - 1e-9, "{:?}", run.trace);
            }
        }
    }

    #[test]
    fn unknown_csi_ignores_eavesdroppers(k in 1usize..8, n in 1usize..5, index: u64, scale in 0.0f64..1e3) {
        let cfg = NetworkConfig::default().with_counts(k, n);
        let state = cwpcn::model::generate_state(&cfg, index);
        let mut i = 0.0;
        let mutated = state.clone().with_eav_gains(|| { i += 1.0; scale * i });
        prop_assert_eq!(unknown_csi_allocation(&state, &cfg), unknown_csi_allocation(&mutated, &cfg));
    }
}
