//! Pairwise mass-exchange descent over the product of class simplices.
//!
//! Each sweep visits every class once and moves mass from its most
//! expensive used base station to its cheapest one, with an exact line
//! search along that direction. For the potential `V` the step has a closed
//! form; for the system cost `C` the directional derivative is monotone in
//! the step, so the root is found by bisection. Iterates stay feasible
//! because costs blow up as a load approaches one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    congestion_cost, congestion_cost_marginal, ne_residual, potential, system_cost, tolled_residual,
    CongestionProfile, NonatomicInstance,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Equilibrium of the plain game.
    Potential,
    /// System optimum, equivalently equilibrium of the tolled game.
    SystemCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Bound on the relative KKT residual.
    pub tolerance: f64,
    /// Maximum number of sweeps per start.
    pub max_iters: usize,
    pub starts: usize,
    pub seed: u64,
    /// Grid steps per class simplex in the non-convex optimum search.
    pub grid_resolution: usize,
    /// Grid scan is skipped when it would exceed this many points.
    pub grid_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_iters: 100_000,
            starts: 8,
            seed: 0,
            grid_resolution: 4,
            grid_cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: usize,
    pub loads: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub profile: CongestionProfile,
    pub loads: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub objective: f64,
    /// The result is a proven global minimizer (convex objective).
    pub certified: bool,
    /// Number of grid points evaluated by the optimum search.
    pub grid_points: usize,
    pub starts: Vec<StartOutcome>,
}

fn residual(inst: &NonatomicInstance, p: &CongestionProfile, objective: Objective) -> f64 {
    match objective {
        Objective::Potential => ne_residual(inst, p),
        Objective::SystemCost => tolled_residual(inst, p),
    }
}

fn value(inst: &NonatomicInstance, p: &CongestionProfile, objective: Objective) -> f64 {
    match objective {
        Objective::Potential => potential(inst, p),
        Objective::SystemCost => system_cost(inst, p),
    }
}

/// `c_lj` or `c_lj + t_lj` from precomputed loads and base powers.
fn marginal(inst: &NonatomicInstance, objective: Objective, l: usize, j: usize, load: f64, s: f64) -> f64 {
    let c = inst.base_cost(l, j) * congestion_cost(load);
    match objective {
        Objective::Potential => c,
        Objective::SystemCost => {
            if s == 0.0 {
                c
            } else {
                c + inst.sinr_density(l) * s * congestion_cost_marginal(load)
            }
        }
    }
}

/// Exact line-search step moving class `l` mass from `a` to `b`.
fn step(
    inst: &NonatomicInstance,
    objective: Objective,
    l: usize,
    (a, b): (usize, usize),
    (load_a, load_b): (f64, f64),
    (s_a, s_b): (f64, f64),
    available: f64,
) -> f64 {
    let gamma = inst.sinr_density(l);
    let (ga, gb) = (inst.base_cost(l, a), inst.base_cost(l, b));
    match objective {
        Objective::Potential => {
            let t = (ga * (1.0 - load_b) - gb * (1.0 - load_a)) / (gamma * (ga + gb));
            t.clamp(0.0, available)
        }
        Objective::SystemCost => {
            let slope = |t: f64| {
                marginal(inst, objective, l, b, load_b + gamma * t, s_b + gb * t)
                    - marginal(inst, objective, l, a, load_a - gamma * t, s_a - ga * t)
            };
            let cap = (1.0 - load_b) / gamma;
            let mut hi = available.min(cap);
            if hi == available && slope(hi) <= 0.0 {
                return available;
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }
}

/// Runs sweeps from `start` until the residual drops below the tolerance.
fn descend(
    inst: &NonatomicInstance,
    objective: Objective,
    start: CongestionProfile,
    opts: &SolverOptions,
) -> Result<(CongestionProfile, f64, usize)> {
    let mut p = start;
    let (classes, n) = (inst.num_classes(), inst.num_bs());
    let mut r = residual(inst, &p, objective);
    let mut iters = 0;
    while r > opts.tolerance {
        if iters >= opts.max_iters {
            return Err(Error::Convergence {
                iterations: iters,
                residual: r,
                tolerance: opts.tolerance,
            });
        }
        iters += 1;
        let mut moved = false;
        for l in 0..classes {
            let loads = p.loads(inst);
            let s = p.base_powers(inst);
            let costs: Vec<f64> = (0..n).map(|j| marginal(inst, objective, l, j, loads[j], s[j])).collect();
            let b = (0..n).min_by(|&x, &y| costs[x].total_cmp(&costs[y])).expect("at least one BS");
            let a = (0..n)
                .filter(|&j| p.masses[l][j] > 0.0)
                .max_by(|&x, &y| costs[x].total_cmp(&costs[y]))
                .expect("class mass is positive");
            if a == b || costs[a] <= costs[b] {
                continue;
            }
            let t = step(inst, objective, l, (a, b), (loads[a], loads[b]), (s[a], s[b]), p.masses[l][a]);
            if t > 0.0 {
                if t >= p.masses[l][a] {
                    p.masses[l][b] += p.masses[l][a];
                    p.masses[l][a] = 0.0;
                } else {
                    p.masses[l][a] -= t;
                    p.masses[l][b] += t;
                }
                moved = true;
            }
        }
        r = residual(inst, &p, objective);
        if !moved && r > opts.tolerance {
            // Steps underflowed: the residual is at the floating-point floor.
            return Err(Error::Convergence {
                iterations: iters,
                residual: r,
                tolerance: opts.tolerance,
            });
        }
    }
    Ok((p, r, iters))
}

/// Start 0 is the uniform split; later starts are random splits pulled
/// towards uniform until every load is below one.
fn start_profile(inst: &NonatomicInstance, k: usize, seed: u64) -> CongestionProfile {
    let uniform = inst.uniform_profile();
    if k == 0 {
        return uniform;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
    let n = inst.num_bs();
    let raw: Vec<Vec<f64>> = (0..inst.num_classes())
        .map(|l| {
            let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|x| inst.mass(l) * x / total).collect()
        })
        .collect();
    let mut shrink = 1.0;
    loop {
        let p = CongestionProfile {
            masses: raw
                .iter()
                .zip(&uniform.masses)
                .map(|(r, u)| r.iter().zip(u).map(|(x, y)| y + shrink * (x - y)).collect())
                .collect(),
        };
        if p.loads(inst).iter().all(|&m| m < 1.0) {
            return p;
        }
        shrink *= 0.5;
    }
}

fn run_start(
    inst: &NonatomicInstance,
    objective: Objective,
    k: usize,
    start: CongestionProfile,
    opts: &SolverOptions,
) -> Result<(CongestionProfile, StartOutcome)> {
    let (p, residual, iterations) = descend(inst, objective, start, opts)?;
    let outcome = StartOutcome {
        start: k,
        loads: p.loads(inst),
        residual,
        iterations,
        objective: value(inst, &p, objective),
    };
    Ok((p, outcome))
}

fn finish(
    inst: &NonatomicInstance,
    runs: Vec<(CongestionProfile, StartOutcome)>,
    certified: bool,
    grid_points: usize,
) -> SolveOutcome {
    let best = runs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.objective.total_cmp(&y.1 .1.objective))
        .map(|(k, _)| k)
        .expect("at least one start");
    let (profile, o) = &runs[best];
    SolveOutcome {
        profile: profile.clone(),
        loads: profile.loads(inst),
        residual: o.residual,
        iterations: o.iterations,
        objective: o.objective,
        certified,
        grid_points,
        starts: runs.into_iter().map(|r| r.1).collect(),
    }
}

/// Equilibrium via minimization of the convex potential, from `starts` starts.
pub fn solve_ne(inst: &NonatomicInstance, opts: &SolverOptions) -> Result<SolveOutcome> {
    let runs = (0..opts.starts.max(1))
        .map(|k| run_start(inst, Objective::Potential, k, start_profile(inst, k, opts.seed), opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(inst, runs, true, 0))
}

/// Stationary point of `C` from the uniform split: an equilibrium of the
/// tolled game. Certified optimal when mobiles are collocated.
pub fn solve_tolled_ne(inst: &NonatomicInstance, opts: &SolverOptions) -> Result<SolveOutcome> {
    let run = run_start(inst, Objective::SystemCost, 0, inst.uniform_profile(), opts)?;
    Ok(finish(inst, vec![run], inst.collocated_mobiles(), 0))
}

/// Minimizer of `C`.
///
/// With collocated mobiles `C` is convex and one descent certifies the
/// optimum. Otherwise the best of several descents (random starts plus the
/// best point of a coarse grid) is returned with `certified = false`.
pub fn solve_system_optimal(inst: &NonatomicInstance, opts: &SolverOptions) -> Result<SolveOutcome> {
    if inst.collocated_mobiles() {
        return solve_tolled_ne(inst, opts);
    }
    let mut runs = (0..opts.starts.max(1))
        .map(|k| run_start(inst, Objective::SystemCost, k, start_profile(inst, k, opts.seed), opts))
        .collect::<Result<Vec<_>>>()?;
    let (grid_best, grid_points) = grid_scan(inst, opts);
    if let Some(p) = grid_best {
        runs.push(run_start(inst, Objective::SystemCost, runs.len(), p, opts)?);
    }
    Ok(finish(inst, runs, false, grid_points))
}

/// All ways to put `r` units into `n` bins.
fn compositions(r: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![r]];
    }
    let mut out = Vec::new();
    for first in 0..=r {
        for mut rest in compositions(r - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Best feasible point of a lattice on the product of class simplices.
fn grid_scan(inst: &NonatomicInstance, opts: &SolverOptions) -> (Option<CongestionProfile>, usize) {
    let (classes, n, r) = (inst.num_classes(), inst.num_bs(), opts.grid_resolution.max(1));
    let per_class = binomial(r + n - 1, n - 1);
    if per_class.powi(classes as i32) > opts.grid_cap as f64 {
        return (None, 0);
    }
    let comps = compositions(r, n);
    let mut idx = vec![0usize; classes];
    let mut best: Option<(f64, CongestionProfile)> = None;
    let mut count = 0;
    loop {
        let p = CongestionProfile {
            masses: (0..classes)
                .map(|l| comps[idx[l]].iter().map(|&k| inst.mass(l) * k as f64 / r as f64).collect())
                .collect(),
        };
        count += 1;
        if p.loads(inst).iter().all(|&m| m < 1.0) {
            let c = system_cost(inst, &p);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, p));
            }
        }
        let mut k = classes;
        loop {
            if k == 0 {
                return (best.map(|b| b.1), count);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < comps.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
