//! Invariants of the finite game, its dynamics and its tolls.

#![allow(clippy::needless_range_loop)]

mod common;

use cellgame::analysis::{self, potential_v1};
use cellgame::dynamics::{self, RunConfig, RunStatus, Rule, Scheduler, TieBreak};
use cellgame::pricing::{self, Tolled};
use cellgame::AssociationProfile;
use common::*;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn costs_agree_with_linear_solve(seed in any::<u64>(), m in 1usize..7, n in 1usize..4) {
        let mut r = rng(seed);
        let net = random_network(&mut r, m, n, 0.05, 1.5);
        let a = random_profile(&mut r, &net);
        let oracle = oracle_powers(net.gains(), net.target_sinrs(), 1.0, a.as_slice());
        for i in 0..m {
            let c = net.mobile_cost(&a, i);
            prop_assert_eq!(c.is_finite(), oracle[i].is_finite());
            if c.is_finite() {
                prop_assert!(rel_err(c, oracle[i]) < 1e-9, "{} vs {}", c, oracle[i]);
            }
            for j in 0..n {
                let h = net.hypothetical_cost(&a, i, j);
                let o = oracle_cost(&net, a.with_move(i, j).as_slice(), i);
                prop_assert!(h == o || rel_err(h, o) < 1e-9);
            }
        }
        let total = net.system_cost(&a);
        let o = oracle_system_cost(&net, a.as_slice());
        prop_assert!(total == o || rel_err(total, o) < 1e-9);
    }

    /// Total power decreases by exactly the mover's tolled-cost drop.
    #[test]
    fn system_cost_is_exact_tolled_potential(seed in any::<u64>(), m in 2usize..7, n in 2usize..4) {
        let mut r = rng(seed);
        let net = random_network(&mut r, m, n, 0.05, 0.4);
        let a = random_profile(&mut r, &net);
        let i = r.gen_range(0..m);
        let j = r.gen_range(0..n);
        let b = a.with_move(i, j);
        let (ca, cb) = (net.system_cost(&a), net.system_cost(&b));
        let (ta, tb) = (pricing::tolled_cost(&net, &a, i), pricing::tolled_cost(&net, &b, i));
        if ca.is_finite() && cb.is_finite() {
            let scale = ca.abs().max(cb.abs()).max(1e-12);
            prop_assert!(((cb - ca) - (tb - ta)).abs() <= 1e-9 * scale);
        }
        let view = pricing::tolled_cost_view(&net, &a, i);
        if view.total.is_finite() {
            prop_assert!(rel_err(view.total, ta) < 1e-9);
            prop_assert!(view.toll >= 0.0);
        }
    }

    /// The single-class potential never rises along a MAPC run.
    #[test]
    fn single_class_runs_descend_potential(seed in any::<u64>(), m in 2usize..9, n in 2usize..5) {
        let mut r = rng(seed);
        let net = single_class(&mut r, m, n);
        let a0 = net.profile(vec![0; m]).unwrap();
        let cfg = RunConfig::new(Rule::Mapc, Scheduler::RandomSingle).with_seed(seed);
        let res = dynamics::run(&net, &a0, &cfg).unwrap();
        prop_assert_eq!(res.status, RunStatus::ConvergedNe);
        let mut a = a0;
        let mut v = potential_v1(&net, &a).unwrap();
        for t in &res.trace {
            prop_assert_eq!(a.bs_of(t.mobile), t.from_bs);
            prop_assert!(t.cost_after < t.cost_before);
            a = a.with_move(t.mobile, t.to_bs);
            let next = potential_v1(&net, &a).unwrap();
            // V1 is 0 while some cell is overloaded, so those switches tie.
            prop_assert!(next < v || (v == 0.0 && next == 0.0), "{} -> {}", v, next);
            v = next;
        }
        prop_assert_eq!(&a, &res.final_profile);
        prop_assert!(oracle_is_nash(&net, a.as_slice(), 1e-9));
    }

    #[test]
    fn tolled_runs_reach_tolled_nash(seed in any::<u64>(), m in 2usize..7, n in 2usize..4) {
        let mut r = rng(seed);
        let net = random_network(&mut r, m, n, 0.05, 0.3);
        let a0 = random_profile(&mut r, &net);
        let cfg = RunConfig::round_robin(Rule::Mapc).with_max_steps(10_000);
        let res = pricing::run_tolled(&net, &a0, &cfg).unwrap();
        prop_assert_eq!(res.status, RunStatus::ConvergedNe);
        prop_assert!(dynamics::is_nash(&Tolled(&net), &res.final_profile));
        prop_assert!(net.system_cost(&res.final_profile) <= net.system_cost(&a0));
        // No unilateral move lowers total power at a tolled equilibrium.
        let c = net.system_cost(&res.final_profile);
        for i in 0..m {
            for j in 0..n {
                let alt = oracle_system_cost(&net, res.final_profile.with_move(i, j).as_slice());
                prop_assert!(alt >= c * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn runs_are_reproducible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 6, 3, 0.05, 0.5);
        let a0 = random_profile(&mut r, &net);
        let cfg = RunConfig::new(Rule::MapcStar, Scheduler::IndependentProb { probabilities: vec![0.4; 6] })
            .with_seed(seed)
            .with_tie_break(TieBreak::Random)
            .with_max_steps(2_000);
        let x = dynamics::run(&net, &a0, &cfg).unwrap();
        let y = dynamics::run(&net, &a0, &cfg).unwrap();
        prop_assert_eq!(x.trace, y.trace);
        prop_assert_eq!(x.final_profile, y.final_profile);
    }
}

#[test]
fn enumeration_agrees_with_oracle() {
    let mut r = rng(7);
    for _ in 0..20 {
        let net = random_network(&mut r, 4, 3, 0.1, 0.9);
        let nash: Vec<Vec<usize>> = analysis::enumerate_nash(&net)
            .unwrap()
            .iter()
            .map(|a| a.as_slice().to_vec())
            .collect();
        for p in all_profiles(4, 3) {
            assert_eq!(nash.contains(&p), oracle_is_nash(&net, &p, 1e-9), "{p:?}");
        }
        let best = all_profiles(4, 3)
            .iter()
            .map(|p| oracle_system_cost(&net, p))
            .fold(f64::INFINITY, f64::min);
        for a in analysis::system_optimal_profiles(&net).unwrap() {
            assert!(rel_err(net.system_cost(&a), best) < 1e-9);
        }
    }
}

#[test]
fn pareto_dominance_matches_definition() {
    let mut r = rng(11);
    let net = random_network(&mut r, 3, 2, 0.1, 0.6);
    let profiles: Vec<AssociationProfile> = all_profiles(3, 2).into_iter().map(|p| net.profile(p).unwrap()).collect();
    for a in &profiles {
        let dominated = profiles.iter().any(|b| {
            let (cb, ca): (Vec<f64>, Vec<f64>) = (0..3).map(|i| (net.mobile_cost(b, i), net.mobile_cost(a, i))).unzip();
            cb.iter().zip(&ca).all(|(x, y)| x <= y) && cb.iter().zip(&ca).any(|(x, y)| x < y)
        });
        assert_eq!(analysis::is_pareto_efficient(&net, a).unwrap(), !dominated, "{a}");
    }
}

#[test]
fn round_robin_never_cycles_with_collocated_mobiles() {
    let mut r = rng(3);
    for _ in 0..50 {
        let net = collocated_mobiles(&mut r, 7, 3, false);
        let a0 = random_profile(&mut r, &net);
        for rule in [Rule::Mapc, Rule::MapcStar] {
            let res = dynamics::run(&net, &a0, &RunConfig::round_robin(rule).with_max_steps(5_000)).unwrap();
            assert_eq!(res.status, RunStatus::ConvergedNe);
            assert!(res.cycle.is_none());
            assert!(oracle_is_nash(&net, res.final_profile.as_slice(), 1e-9));
        }
    }
}
