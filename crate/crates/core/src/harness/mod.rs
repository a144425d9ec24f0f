//! Scenario-driven experiments and their CSV/JSON artifacts.
//!
//! Every experiment writes its artifacts plus `metadata.json` (version, seed
//! and the fully resolved scenario). Wall time goes to `run.log` only, so the
//! CSV and JSON files are byte-identical across reruns with the same seed.

pub mod fixtures;
pub mod output;
pub mod random;
pub mod scenario;

use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

pub use output::Artifacts;
pub use random::{generate_random_instance, RandomDims};
pub use scenario::{parse_scenario, parse_scenario_str, parse_scenario_with_seed, Experiment, Instance, Kind, Scenario};

use crate::analysis::{self, pareto_dominates};
use crate::discrete::{AssociationProfile, NetworkInstance};
use crate::dynamics::{self, RunConfig, RunResult, RunStatus, TraceEntry};
use crate::error::{Error, Result};
use crate::nonatomic::{self, CongestionProfile, NonatomicInstance, SolveOutcome};
use crate::poa::{self, SingleClassInstance};
use crate::pricing::{self, Tolled};
use output::{fmt_f64, fmt_profile, json_f64, json_f64s};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Deterministic artifacts, in the order written.
    pub files: Vec<String>,
    /// One-line outcome for the console.
    pub message: String,
    pub wall_time: Duration,
}

/// Runs `scenario`, writing artifacts into `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    let mut art = Artifacts::create(out_dir)?;
    let message = dispatch(scenario, &mut art)?;
    art.json("metadata.json", &metadata(scenario))?;
    let wall_time = started.elapsed();
    art.text(
        "run.log",
        &format!("{}\nwall_time_s={:.6}\n", message, wall_time.as_secs_f64()),
    )?;
    Ok(RunSummary {
        files: art.written().to_vec(),
        message,
        wall_time,
    })
}

fn metadata(scenario: &Scenario) -> Value {
    json!({
        "name": scenario.name,
        "version": VERSION,
        "seed": scenario.seed,
        "scenario": scenario,
    })
}

fn dispatch(sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    match (sc.experiment, &sc.instance) {
        (Experiment::Example, _) => {
            let k = sc.example.expect("validated at parse time");
            fixtures::run_example(k, sc, art)
        }
        (Experiment::Simulate, Some(Instance::Discrete(net))) => simulate(net, sc, art),
        (Experiment::Enumerate, Some(Instance::Discrete(net))) => enumerate(net, sc, art),
        (Experiment::Tolls, Some(Instance::Discrete(net))) => {
            let p = sc.profile.as_ref().or(sc.initial_profile.as_ref()).expect("validated at parse time");
            tolls(net, &AssociationProfile::from_one_based(p, net.num_bs())?, art)
        }
        (Experiment::SolveNe, Some(Instance::Nonatomic(inst))) => {
            let out = nonatomic::solve_ne(inst, &sc.solver)?;
            write_solution(inst, &out, "profile", art)?;
            Ok(solution_message("equilibrium", &out))
        }
        (Experiment::SolveOpt, Some(Instance::Nonatomic(inst))) => {
            let out = nonatomic::solve_system_optimal(inst, &sc.solver)?;
            write_solution(inst, &out, "profile", art)?;
            Ok(solution_message("optimum", &out))
        }
        (Experiment::PoaSweep, Some(Instance::SingleClass(inst))) => poa_sweep(inst, sc, art),
        (Experiment::ReproduceFig1, Some(Instance::SingleClass(inst))) => poa_sweep(inst, sc, art),
        (Experiment::ReproduceFig1, None) => {
            let inst = random::random_single_class(sc.sweep.num_bs, sc.sweep.gamma, 1.0, sc.seed)?;
            poa_sweep(&inst, sc, art)
        }
        (e, _) => Err(Error::Validation(format!("experiment {e:?} does not match the instance kind"))),
    }
}

// Discrete experiments.

pub(crate) fn run_dynamics(
    net: &NetworkInstance,
    initial: &AssociationProfile,
    config: &RunConfig,
    tolled: bool,
) -> Result<RunResult> {
    if tolled {
        pricing::run_tolled(net, initial, config)
    } else {
        dynamics::run(net, initial, config)
    }
}

pub(crate) fn write_trace(art: &mut Artifacts, name: &str, trace: &[TraceEntry]) -> Result<()> {
    art.csv(
        name,
        &["step", "mobile", "from_bs", "to_bs", "cost_before", "cost_after"],
        trace.iter().map(|t| {
            vec![
                t.step.to_string(),
                (t.mobile + 1).to_string(),
                (t.from_bs + 1).to_string(),
                (t.to_bs + 1).to_string(),
                fmt_f64(t.cost_before),
                fmt_f64(t.cost_after),
            ]
        }),
    )
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::ConvergedNe => "converged_ne",
        RunStatus::CycleDetected => "cycle_detected",
        RunStatus::IterationCap => "iteration_cap",
    }
}

pub(crate) fn run_json(net: &NetworkInstance, initial: &AssociationProfile, r: &RunResult, tolled: bool) -> Value {
    let nash = if tolled {
        dynamics::is_nash(&Tolled(net), &r.final_profile)
    } else {
        dynamics::is_nash(net, &r.final_profile)
    };
    json!({
        "initial_profile": initial.to_one_based(),
        "final_profile": r.final_profile.to_one_based(),
        "status": status_name(r.status),
        "steps": r.steps,
        "switches": r.trace.len(),
        "tolled": tolled,
        "final_is_nash": nash,
        "system_cost": json_f64(net.system_cost(&r.final_profile)),
        "cycle": r.cycle.as_ref().map(|c| json!({
            "first_move": c.first_move + 1,
            "length": c.length,
            "profile": c.profile.iter().map(|b| b + 1).collect::<Vec<_>>(),
        })),
    })
}

fn simulate(net: &NetworkInstance, sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let d = &sc.dynamics;
    if d.runs == 1 {
        let initial = match &sc.initial_profile {
            Some(p) => AssociationProfile::from_one_based(p, net.num_bs())?,
            None => net.profile(random::random_profile(net.num_mobiles(), net.num_bs(), sc.seed))?,
        };
        let r = run_dynamics(net, &initial, &d.config(sc.seed), d.tolled)?;
        write_trace(art, "trace.csv", &r.trace)?;
        art.json("result.json", &run_json(net, &initial, &r, d.tolled))?;
        return Ok(format!(
            "{} after {} switches at {}",
            status_name(r.status),
            r.trace.len(),
            r.final_profile
        ));
    }

    let mut rows = Vec::with_capacity(d.runs);
    let (mut converged, mut cycles, mut capped) = (0usize, 0usize, 0usize);
    let mut cycle_lengths = Vec::new();
    for k in 0..d.runs as u64 {
        let seed = sc.seed.wrapping_add(k);
        let initial = net.profile(random::random_profile(net.num_mobiles(), net.num_bs(), seed))?;
        let r = run_dynamics(net, &initial, &d.config(seed), d.tolled)?;
        match r.status {
            RunStatus::ConvergedNe => converged += 1,
            RunStatus::CycleDetected => cycles += 1,
            RunStatus::IterationCap => capped += 1,
        }
        if let Some(c) = &r.cycle {
            cycle_lengths.push(c.length);
        }
        rows.push(vec![
            k.to_string(),
            seed.to_string(),
            fmt_profile(&initial.to_one_based()),
            fmt_profile(&r.final_profile.to_one_based()),
            status_name(r.status).to_string(),
            r.steps.to_string(),
            r.trace.len().to_string(),
        ]);
    }
    art.csv(
        "runs.csv",
        &["run", "seed", "initial_profile", "final_profile", "status", "steps", "switches"],
        rows,
    )?;
    art.json(
        "result.json",
        &json!({
            "runs": d.runs,
            "converged_ne": converged,
            "cycle_detected": cycles,
            "iteration_cap": capped,
            "cycle_lengths": cycle_lengths,
            "tolled": d.tolled,
        }),
    )?;
    Ok(format!("{} runs: {converged} converged, {cycles} cycles, {capped} capped", d.runs))
}

/// Rows `(profile, system_cost, nash, tolled_nash, pareto_efficient, system_optimal)`
/// for every profile of a small instance.
pub(crate) fn profile_table(net: &NetworkInstance, cap: u128) -> Result<Vec<Vec<String>>> {
    let pareto = analysis::pareto_efficient_profiles(net, cap)?;
    let optimal = analysis::system_optimal_profiles_in(net, cap)?;
    Ok(analysis::all_profiles(net, cap)?
        .map(|a| {
            vec![
                fmt_profile(&a.to_one_based()),
                fmt_f64(net.system_cost(&a)),
                dynamics::is_nash(net, &a).to_string(),
                dynamics::is_nash(&Tolled(net), &a).to_string(),
                pareto.contains(&a).to_string(),
                optimal.contains(&a).to_string(),
            ]
        })
        .collect())
}

pub(crate) const PROFILE_TABLE_HEADER: [&str; 6] =
    ["profile", "system_cost", "nash", "tolled_nash", "pareto_efficient", "system_optimal"];

pub(crate) fn one_based_list(ps: &[AssociationProfile]) -> Vec<Vec<usize>> {
    ps.iter().map(AssociationProfile::to_one_based).collect()
}

fn enumerate(net: &NetworkInstance, sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let cap = sc.enumeration_cap as u128;
    let nash = analysis::enumerate_nash_in(net, cap)?;
    let tolled = analysis::enumerate_nash_in(&Tolled(net), cap)?;
    let optimal = analysis::system_optimal_profiles_in(net, cap)?;
    let rows = nash
        .iter()
        .map(|a| {
            Ok(vec![
                fmt_profile(&a.to_one_based()),
                fmt_f64(net.system_cost(a)),
                analysis::is_pareto_efficient(net, a)?.to_string(),
                optimal.contains(a).to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    art.csv("nash.csv", &["profile", "system_cost", "pareto_efficient", "system_optimal"], rows)?;
    let special: Vec<String> = analysis::special_cases(net).iter().map(|c| format!("{c:?}")).collect();
    art.json(
        "enumerate.json",
        &json!({
            "profiles": analysis::profile_count(net.num_mobiles(), net.num_bs()) as u64,
            "special_cases": special,
            "nash": one_based_list(&nash),
            "tolled_nash": one_based_list(&tolled),
            "system_optimal": one_based_list(&optimal),
            "optimal_cost": json_f64(optimal.first().map_or(f64::INFINITY, |a| net.system_cost(a))),
        }),
    )?;
    Ok(format!("{} equilibria, {} tolled, {} optimal", nash.len(), tolled.len(), optimal.len()))
}

pub(crate) fn write_tolls(net: &NetworkInstance, a: &AssociationProfile, name: &str, art: &mut Artifacts) -> Result<()> {
    let table = pricing::toll_table(net, a);
    art.csv(
        name,
        &["mobile", "bs", "base_cost", "toll", "total"],
        table.iter().enumerate().map(|(i, v)| {
            vec![
                (i + 1).to_string(),
                (a.bs_of(i) + 1).to_string(),
                fmt_f64(v.base_cost),
                fmt_f64(v.toll),
                fmt_f64(v.total),
            ]
        }),
    )
}

fn tolls(net: &NetworkInstance, a: &AssociationProfile, art: &mut Artifacts) -> Result<String> {
    net.check_profile(a)?;
    write_tolls(net, a, "tolls.csv", art)?;
    let broadcast: Vec<f64> = (0..net.num_bs()).map(|j| pricing::broadcast_quantity(net, a, j)).collect();
    let tolled_nash = dynamics::is_nash(&Tolled(net), a);
    art.json(
        "tolls.json",
        &json!({
            "profile": a.to_one_based(),
            "broadcast": json_f64s(&broadcast),
            "toll_potential": json_f64(pricing::toll_potential(net, a)),
            "system_cost": json_f64(net.system_cost(a)),
            "nash": dynamics::is_nash(net, a),
            "tolled_nash": tolled_nash,
        }),
    )?;
    Ok(format!("tolls at {a}: tolled NE = {tolled_nash}"))
}

/// Checks that `b` Pareto-dominates `a`, both given 1-based.
pub(crate) fn dominates_one_based(net: &NetworkInstance, b: &[usize], a: &[usize]) -> Result<bool> {
    let b = AssociationProfile::from_one_based(b, net.num_bs())?;
    let a = AssociationProfile::from_one_based(a, net.num_bs())?;
    Ok(pareto_dominates(net, &b, &a))
}

// Nonatomic experiments.

/// `<stem>.json` with the class x BS matrix and loads, `<stem>.csv` in long form.
pub(crate) fn write_solution(inst: &NonatomicInstance, out: &SolveOutcome, stem: &str, art: &mut Artifacts) -> Result<()> {
    write_profile(inst, &out.profile, stem, art)?;
    let starts: Vec<Value> = out
        .starts
        .iter()
        .map(|s| {
            json!({
                "start": s.start,
                "loads": json_f64s(&s.loads),
                "residual": json_f64(s.residual),
                "iterations": s.iterations,
                "objective": json_f64(s.objective),
            })
        })
        .collect();
    art.json(
        &format!("{stem}.json"),
        &json!({
            "masses": out.profile.masses.iter().map(|r| json_f64s(r)).collect::<Vec<_>>(),
            "loads": json_f64s(&out.loads),
            "residual": json_f64(out.residual),
            "iterations": out.iterations,
            "objective": json_f64(out.objective),
            "system_cost": json_f64(nonatomic::system_cost(inst, &out.profile)),
            "certified": out.certified,
            "grid_points": out.grid_points,
            "starts": starts,
        }),
    )
}

pub(crate) fn write_profile(inst: &NonatomicInstance, p: &CongestionProfile, stem: &str, art: &mut Artifacts) -> Result<()> {
    let loads = p.loads(inst);
    let mut rows = Vec::new();
    for l in 0..inst.num_classes() {
        for j in 0..inst.num_bs() {
            rows.push(vec![
                (l + 1).to_string(),
                (j + 1).to_string(),
                fmt_f64(p.get(l, j)),
                fmt_f64(loads[j]),
                fmt_f64(nonatomic::cost_density(inst, p, l, j)),
                fmt_f64(nonatomic::tolled_cost_density(inst, p, l, j)),
            ]);
        }
    }
    art.csv(
        &format!("{stem}.csv"),
        &["class", "bs", "mass", "load", "cost_density", "tolled_cost_density"],
        rows,
    )
}

fn solution_message(what: &str, out: &SolveOutcome) -> String {
    format!(
        "{what}: objective {} residual {:e} certified {}",
        fmt_f64(out.objective),
        out.residual,
        out.certified
    )
}

// Price of anarchy.

pub(crate) fn poa_sweep(inst: &SingleClassInstance, sc: &Scenario, art: &mut Artifacts) -> Result<String> {
    let masses = match &sc.sweep.masses {
        Some(m) => m.clone(),
        None => poa::mass_grid(inst, sc.sweep.points),
    };
    let report = poa::sweep(inst, &masses)?;
    art.csv(
        "poa.csv",
        &["mass", "ne_cost", "opt_cost", "poa"],
        report
            .rows
            .iter()
            .map(|r| vec![fmt_f64(r.mass), fmt_f64(r.ne_cost), fmt_f64(r.opt_cost), fmt_f64(r.poa)]),
    )?;
    let gains = inst.gains();
    let bound = poa::anarchy_bound(gains[gains.len() - 1], gains[0])?;
    art.json(
        "poa_summary.json",
        &json!({
            "gains": json_f64s(gains),
            "gamma": json_f64(inst.gamma()),
            "noise_power": json_f64(inst.noise_power()),
            "capacity": json_f64(inst.capacity()),
            "points": report.rows.len(),
            "spillovers": json_f64s(&report.spillovers),
            "argmax_mass": json_f64(report.argmax_mass),
            "argmax_poa": json_f64(report.argmax_poa),
            "spillover_distance": json_f64(report.spillover_distance),
            "argmax_spillovers": report.argmax_spillovers,
            "argmax_at_spillover": !report.argmax_spillovers.is_empty(),
            "anarchy_bound": json_f64(bound),
        }),
    )?;
    Ok(format!(
        "max PoA {} at mass {} (spill-over: {})",
        fmt_f64(report.argmax_poa),
        fmt_f64(report.argmax_mass),
        !report.argmax_spillovers.is_empty()
    ))
}
