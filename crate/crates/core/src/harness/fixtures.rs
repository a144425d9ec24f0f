//! Built-in example instances, numbered 1 to 7.
//!
//! Examples 1 to 4 are finite games given only through inequalities on
//! gains and SINRs; the constructors pick numbers satisfying them and each
//! run records the inequalities it checked. Examples 5 and 6 are two-cell
//! continuum instances and example 7 is the five-cell price-of-anarchy sweep.

use serde_json::{json, Value};

use super::output::json_f64;
use super::{
    dominates_one_based, one_based_list, poa_sweep, profile_table, random, run_dynamics, run_json, write_profile,
    write_solution, write_tolls, write_trace, Artifacts, Scenario, PROFILE_TABLE_HEADER,
};
use crate::analysis::{self, DEFAULT_ENUMERATION_CAP};
use crate::discrete::{AssociationProfile, NetworkInstance};
use crate::dynamics::{self, Rule, RunConfig};
use crate::error::{Error, Result};
use crate::nonatomic::{self, two_bs_ne_fraction, two_bs_opt_fraction, CongestionProfile, NonatomicInstance};
use crate::poa::SingleClassInstance;
use crate::pricing::Tolled;

/// Two mobiles, two cells, `gamma = 0.5`. Each mobile's better cell beats the
/// other by less than the factor `1 / (1 - gamma)`:
/// `h12 < h11 < h12 / (1 - gamma)` and `h21 < h22 < h21 / (1 - gamma)`.
pub fn example1() -> NetworkInstance {
    NetworkInstance::new(vec![vec![1.0, 0.6], vec![0.6, 1.0]], 1.0, vec![0.5, 0.5]).expect("valid fixture")
}

/// Four collocated mobiles, `beta = 0.2`, gains `(1.5, 1)`:
/// `h1 (1 - 3 beta) = h2 (1 - 2 beta)` and `h1 (1 - 2 beta) > h2 (1 - beta)`.
///
/// The equality is a cost tie that survives rounding only up to a few ulps,
/// so the fixture uses a `1e-12` tie band.
pub fn example2() -> NetworkInstance {
    NetworkInstance::new(vec![vec![1.5, 1.0]; 4], 1.0, vec![0.25; 4])
        .and_then(|n| n.with_tie_tolerance(1e-12))
        .expect("valid fixture")
}

/// Two collocated cells, unit gains, `beta = (0.2, 0.2, 0.3, 0.3)`.
pub fn example3() -> NetworkInstance {
    NetworkInstance::new(vec![vec![1.0, 1.0]; 4], 1.0, vec![0.25, 0.25, 3.0 / 7.0, 3.0 / 7.0]).expect("valid fixture")
}

/// Five mobiles on two collocated cells with `h_i = i` and `beta = 0.3`,
/// inside `(1/4, 1/3)`.
pub fn example4() -> NetworkInstance {
    let gains = (1..=5).map(|i| vec![i as f64; 2]).collect();
    NetworkInstance::new(gains, 1.0, vec![3.0 / 7.0; 5]).expect("valid fixture")
}

pub const EXAMPLE5_GAINS: [f64; 2] = [0.1, 0.9];
pub const EXAMPLE5_GAMMA: f64 = 0.01;
/// Default class-1 mass, below the threshold at which splitting classes beats
/// the balanced equilibrium.
pub const EXAMPLE5_MASS: f64 = 20.0;

/// Two classes of masses `m1` and `3 m1` on two collocated cells, class gains
/// `h1 = 0.1 < h2 / 3 = 0.3`.
pub fn example5(m1: f64) -> Result<NonatomicInstance> {
    let [h1, h2] = EXAMPLE5_GAINS;
    NonatomicInstance::new(
        vec![vec![h1, h1], vec![h2, h2]],
        1.0,
        vec![EXAMPLE5_GAMMA; 2],
        vec![m1, 3.0 * m1],
    )
}

/// `m1` below which sending each class to its own cell costs less than
/// the equilibrium.
pub fn example5_threshold() -> f64 {
    let [h1, h2] = EXAMPLE5_GAINS;
    (h2 / 3.0 - h1) / (h2 - h1) / EXAMPLE5_GAMMA
}

/// Closed-form costs `(equilibrium, segregated)` for [`example5`].
pub fn example5_costs(m1: f64) -> (f64, f64) {
    let [h1, h2] = EXAMPLE5_GAINS;
    let x = EXAMPLE5_GAMMA * m1;
    let ne = x / (h1 * (1.0 - 2.0 * x)) + 3.0 * x / (h2 * (1.0 - 2.0 * x));
    let seg = x / (h1 * (1.0 - x)) + 3.0 * x / (h2 * (1.0 - 3.0 * x));
    (ne, seg)
}

pub const EXAMPLE6_GAINS: [f64; 2] = [1.0, 0.5];
pub const EXAMPLE6_GAMMA: f64 = 0.01;
pub const EXAMPLE6_MASS: f64 = 60.0;

/// One class of mass 60 on two cells with gains `(1, 0.5)`.
pub fn example6() -> NonatomicInstance {
    NonatomicInstance::new(
        vec![EXAMPLE6_GAINS.to_vec()],
        1.0,
        vec![EXAMPLE6_GAMMA],
        vec![EXAMPLE6_MASS],
    )
    .expect("valid fixture")
}

pub const EXAMPLE7_NUM_BS: usize = 5;
pub const EXAMPLE7_GAMMA: f64 = 0.01;

/// Five cells with uniform (0, 1] gains drawn from `seed`.
pub fn example7(seed: u64) -> SingleClassInstance {
    random::random_single_class(EXAMPLE7_NUM_BS, EXAMPLE7_GAMMA, 1.0, seed).expect("valid fixture")
}

fn condition(text: &str, holds: bool) -> Value {
    json!({ "condition": text, "holds": holds })
}

fn dominance(net: &NetworkInstance, dominant: &[usize], dominated: &[usize]) -> Result<Value> {
    Ok(json!({
        "dominant": dominant,
        "dominated": dominated,
        "holds": dominates_one_based(net, dominant, dominated)?,
    }))
}

fn profile(net: &NetworkInstance, one_based: &[usize]) -> AssociationProfile {
    AssociationProfile::from_one_based(one_based, net.num_bs()).expect("fixture profile")
}

fn profiles_csv(net: &NetworkInstance, art: &mut Artifacts) -> Result<()> {
    art.csv("profiles.csv", &PROFILE_TABLE_HEADER, profile_table(net, DEFAULT_ENUMERATION_CAP)?)
}

fn equilibria(net: &NetworkInstance) -> Result<Value> {
    Ok(json!({
        "nash": one_based_list(&analysis::enumerate_nash(net)?),
        "tolled_nash": one_based_list(&analysis::enumerate_nash_in(&Tolled(net), DEFAULT_ENUMERATION_CAP)?),
        "pareto_efficient": one_based_list(&analysis::pareto_efficient_profiles(net, DEFAULT_ENUMERATION_CAP)?),
        "system_optimal": one_based_list(&analysis::system_optimal_profiles(net)?),
    }))
}

/// Status of one profile: cost and equilibrium flags.
fn describe(net: &NetworkInstance, one_based: &[usize]) -> Result<Value> {
    let a = profile(net, one_based);
    let optimal = analysis::system_optimal_profiles(net)?;
    Ok(json!({
        "profile": one_based,
        "system_cost": json_f64(net.system_cost(&a)),
        "nash": dynamics::is_nash(net, &a),
        "tolled_nash": dynamics::is_nash(&Tolled(net), &a),
        "pareto_efficient": analysis::is_pareto_efficient(net, &a)?,
        "system_optimal": optimal.contains(&a),
    }))
}

fn simulate_from(
    net: &NetworkInstance,
    from: &[usize],
    rule: Rule,
    sc: &Scenario,
    trace_name: &str,
    art: &mut Artifacts,
) -> Result<Value> {
    let initial = profile(net, from);
    let config = RunConfig::round_robin(rule).with_seed(sc.seed);
    let r = run_dynamics(net, &initial, &config, false)?;
    write_trace(art, trace_name, &r.trace)?;
    let mut v = run_json(net, &initial, &r, false);
    v["rule"] = json!(rule);
    v["trace"] = json!(trace_name);
    Ok(v)
}

pub(crate) fn run_example(k: u8, sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    match k {
        1 => run_example1(sc, art),
        2 => run_example2(sc, art),
        3 => run_example3(art),
        4 => run_example4(art),
        5 => run_example5(sc, art),
        6 => run_example6(sc, art),
        7 => poa_sweep(&example7(sc.seed), sc, art),
        _ => Err(Error::Validation(format!("no example {k}"))),
    }
}

fn run_example1(sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let net = example1();
    let (h, gamma) = (net.gains(), net.target_sinr(0));
    let trapped = simulate_from(&net, &[2, 1], Rule::Mapc, sc, "trace_from_2_1.csv", art)?;
    let escape = simulate_from(&net, &[2, 2], Rule::Mapc, sc, "trace_from_2_2.csv", art)?;
    profiles_csv(&net, art)?;
    art.json(
        "example.json",
        &json!({
            "example": 1,
            "conditions": [
                condition("h12 < h11 < h12 / (1 - gamma)", h[0][1] < h[0][0] && h[0][0] < h[0][1] / (1.0 - gamma)),
                condition("h21 < h22 < h21 / (1 - gamma)", h[1][0] < h[1][1] && h[1][1] < h[1][0] / (1.0 - gamma)),
            ],
            "equilibria": equilibria(&net)?,
            "runs": [trapped, escape],
            "dominance": dominance(&net, &[1, 2], &[2, 1])?,
            "profiles": [describe(&net, &[2, 1])?, describe(&net, &[1, 2])?],
        }),
    )?;
    Ok(format!("example 1: MAPC from (2,1) stops at {}", trapped["final_profile"]))
}

fn run_example2(sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let net = example2();
    let (h1, h2, beta) = (net.gain(0, 0), net.gain(0, 1), net.beta(0));
    let tol = net.tie_tolerance();
    let mapc = simulate_from(&net, &[1, 1, 1, 2], Rule::Mapc, sc, "trace_mapc.csv", art)?;
    let star = simulate_from(&net, &[1, 1, 1, 2], Rule::MapcStar, sc, "trace_mapc_star.csv", art)?;
    profiles_csv(&net, art)?;
    art.json(
        "example.json",
        &json!({
            "example": 2,
            "conditions": [
                condition("h1 (1 - 3 beta) = h2 (1 - 2 beta)", (h1 * (1.0 - 3.0 * beta) - h2 * (1.0 - 2.0 * beta)).abs() <= tol),
                condition("h1 (1 - 2 beta) > h2 (1 - beta)", h1 * (1.0 - 2.0 * beta) > h2 * (1.0 - beta)),
            ],
            "equilibria": equilibria(&net)?,
            "runs": [mapc, star],
            "dominance": dominance(&net, &[2, 2, 1, 1], &[1, 1, 1, 2])?,
            "profiles": [describe(&net, &[1, 1, 1, 2])?, describe(&net, &[2, 2, 1, 1])?],
        }),
    )?;
    Ok(format!(
        "example 2: MAPC stops at {}, MAPC* at {}",
        mapc["final_profile"], star["final_profile"]
    ))
}

fn run_example3(art: &mut Artifacts) -> Result<String> {
    let net = example3();
    profiles_csv(&net, art)?;
    write_tolls(&net, &profile(&net, &[1, 1, 2, 2]), "tolls_1_1_2_2.csv", art)?;
    let grouped = describe(&net, &[1, 1, 2, 2])?;
    let mixed = describe(&net, &[1, 2, 1, 2])?;
    let special: Vec<String> = analysis::special_cases(&net).iter().map(|c| format!("{c:?}")).collect();
    art.json(
        "example.json",
        &json!({
            "example": 3,
            "conditions": [
                condition("collocated cells with a common gain", net.gains().iter().flatten().all(|&h| h == 1.0)),
                condition("beta = (2b, 2b, 3b, 3b)", net.beta(0) == net.beta(1) && net.beta(2) == net.beta(3)
                    && (3.0 * net.beta(0) - 2.0 * net.beta(2)).abs() < 1e-15),
            ],
            "special_cases": special,
            "equilibria": equilibria(&net)?,
            "profiles": [grouped, mixed],
        }),
    )?;
    Ok(format!(
        "example 3: cost {} at (1,1,2,2) vs {} at (1,2,1,2)",
        grouped["system_cost"], mixed["system_cost"]
    ))
}

fn run_example4(art: &mut Artifacts) -> Result<String> {
    let net = example4();
    let beta = net.beta(0);
    profiles_csv(&net, art)?;
    write_tolls(&net, &profile(&net, &[1, 2, 1, 2, 2]), "tolls_1_2_1_2_2.csv", art)?;
    let nash = analysis::enumerate_nash(&net)?;
    let all_two_three = nash.iter().all(|a| {
        let c = a.counts(2);
        c[0].min(c[1]) == 2
    });
    art.json(
        "example.json",
        &json!({
            "example": 4,
            "conditions": [
                condition("1/4 < beta < 1/3", 0.25 < beta && beta < 1.0 / 3.0),
                condition("h_i = i h on collocated cells", (0..5).all(|i| net.gain(i, 0) == (i + 1) as f64 && net.gain(i, 1) == net.gain(i, 0))),
            ],
            "equilibria": equilibria(&net)?,
            "every_nash_splits_two_three": all_two_three,
            "profiles": [describe(&net, &[1, 1, 2, 2, 2])?, describe(&net, &[1, 2, 1, 2, 2])?],
        }),
    )?;
    Ok(format!("example 4: {} equilibria", nash.len()))
}

fn run_example5(sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let m1 = EXAMPLE5_MASS;
    let inst = example5(m1)?;
    let ne = nonatomic::solve_ne(&inst, &sc.solver)?;
    let opt = nonatomic::solve_system_optimal(&inst, &sc.solver)?;
    let segregated = CongestionProfile::new(vec![vec![m1, 0.0], vec![0.0, 3.0 * m1]], &inst)?;
    write_solution(&inst, &ne, "profile_ne", art)?;
    write_solution(&inst, &opt, "profile_opt", art)?;
    write_profile(&inst, &segregated, "profile_segregated", art)?;
    let (ne_closed, seg_closed) = example5_costs(m1);
    let [h1, h2] = EXAMPLE5_GAINS;
    let seg_cost = nonatomic::system_cost(&inst, &segregated);
    art.json(
        "example.json",
        &json!({
            "example": 5,
            "class_mass": m1,
            "conditions": [
                condition("3 M1 gamma < 1", 3.0 * m1 * EXAMPLE5_GAMMA < 1.0),
                condition("h1 < h2 / 3", h1 < h2 / 3.0),
                condition("M1 below the threshold", m1 < example5_threshold()),
            ],
            "threshold": json_f64(example5_threshold()),
            "ne_cost_closed_form": json_f64(ne_closed),
            "ne_cost_solver": json_f64(nonatomic::system_cost(&inst, &ne.profile)),
            "ne_loads": ne.loads,
            "segregated_cost_closed_form": json_f64(seg_closed),
            "segregated_cost": json_f64(seg_cost),
            "opt_cost_solver": json_f64(nonatomic::system_cost(&inst, &opt.profile)),
            "opt_certified": opt.certified,
            "segregated_beats_ne": seg_cost < ne_closed,
        }),
    )?;
    Ok(format!("example 5: equilibrium cost {ne_closed}, segregated {seg_cost}"))
}

fn run_example6(sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let inst = example6();
    let [h1, h2] = EXAMPLE6_GAINS;
    let m = EXAMPLE6_MASS;
    let ne = nonatomic::solve_ne(&inst, &sc.solver)?;
    let opt = nonatomic::solve_system_optimal(&inst, &sc.solver)?;
    write_solution(&inst, &ne, "profile_ne", art)?;
    write_solution(&inst, &opt, "profile_opt", art)?;
    let alpha_ne = two_bs_ne_fraction(h1, h2, EXAMPLE6_GAMMA, m)?;
    let alpha_opt = two_bs_opt_fraction(h1, h2, EXAMPLE6_GAMMA, m)?;
    art.json(
        "example.json",
        &json!({
            "example": 6,
            "alpha_ne_closed_form": json_f64(alpha_ne),
            "alpha_ne_solver": json_f64(ne.profile.get(0, 0) / m),
            "alpha_opt_closed_form": json_f64(alpha_opt),
            "alpha_opt_solver": json_f64(opt.profile.get(0, 0) / m),
            "ne_cost": json_f64(nonatomic::system_cost(&inst, &ne.profile)),
            "opt_cost": json_f64(nonatomic::system_cost(&inst, &opt.profile)),
            "opt_certified": opt.certified,
        }),
    )?;
    Ok(format!("example 6: alpha* = {alpha_ne}, alpha_o = {alpha_opt}"))
}
