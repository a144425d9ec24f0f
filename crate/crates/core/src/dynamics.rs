//! Best-response association dynamics.
//!
//! One epoch lets the scheduled mobile(s) re-evaluate every base station and
//! move to a best response. Powers never need to be tracked explicitly: after
//! each move they are the Pareto powers of the new profile.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::{AssociationProfile, NetworkInstance};
use crate::error::{Error, Result};
use crate::numeric::{extended, strictly_less, weakly_less};

/// Costs a mobile compares when it considers switching.
///
/// The plain game uses the Pareto powers; the tolled game adds the
/// marginal-cost toll.
pub trait GameCosts {
    fn network(&self) -> &NetworkInstance;

    /// Cost of `mobile` if it alone switched to `bs`.
    fn deviation_cost(&self, profile: &AssociationProfile, mobile: usize, bs: usize) -> f64;

    fn current_cost(&self, profile: &AssociationProfile, mobile: usize) -> f64 {
        self.deviation_cost(profile, mobile, profile.bs_of(mobile))
    }
}

impl GameCosts for NetworkInstance {
    fn network(&self) -> &NetworkInstance {
        self
    }

    fn deviation_cost(&self, profile: &AssociationProfile, mobile: usize, bs: usize) -> f64 {
        self.hypothetical_cost(profile, mobile, bs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Mapc,
    /// Ties in cost go to the base station with the smallest resulting load.
    MapcStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Uniform choice among the tied base stations, drawn from the run's RNG.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheduler {
    /// Mobile `t mod M` updates at epoch `t`.
    RoundRobin,
    /// One uniformly drawn mobile updates per epoch.
    RandomSingle,
    /// Each mobile updates independently with its own probability.
    IndependentProb { probabilities: Vec<f64> },
}

impl Scheduler {
    fn validate(&self, num_mobiles: usize) -> Result<()> {
        if let Scheduler::IndependentProb { probabilities } = self {
            if probabilities.len() != num_mobiles {
                return Err(Error::Validation(format!(
                    "{} update probabilities for {num_mobiles} mobiles",
                    probabilities.len()
                )));
            }
            if let Some(e) = probabilities.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                return Err(Error::Validation(format!(
                    "update probability {e} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(())
    }

    fn is_random(&self) -> bool {
        !matches!(self, Scheduler::RoundRobin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub rule: Rule,
    pub scheduler: Scheduler,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Defaults to `1000 * M`.
    #[serde(default)]
    pub max_steps: Option<usize>,
    /// Switch-free epochs before the NE check. Round robin always uses `M`.
    #[serde(default)]
    pub quiet_window: Option<usize>,
}

impl RunConfig {
    pub fn new(rule: Rule, scheduler: Scheduler) -> Self {
        Self {
            rule,
            scheduler,
            seed: 0,
            tie_break: TieBreak::LowestIndex,
            max_steps: None,
            quiet_window: None,
        }
    }

    pub fn round_robin(rule: Rule) -> Self {
        Self::new(rule, Scheduler::RoundRobin)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = Some(max_steps);
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    ConvergedNe,
    CycleDetected,
    IterationCap,
}

/// One switch. Indices are 0-based; `step` is the 1-based epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub mobile: usize,
    pub from_bs: usize,
    pub to_bs: usize,
    #[serde(with = "extended")]
    pub cost_before: f64,
    #[serde(with = "extended")]
    pub cost_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    /// Trace index of the first move on the cycle.
    pub first_move: usize,
    /// Number of moves around the cycle.
    pub length: usize,
    /// The profile that recurred.
    pub profile: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_profile: AssociationProfile,
    pub steps: usize,
    pub status: RunStatus,
    pub trace: Vec<TraceEntry>,
    pub cycle: Option<Cycle>,
}

/// All base stations minimizing the mobile's deviation cost (within the tie band).
pub fn best_response_set<G: GameCosts + ?Sized>(
    game: &G,
    profile: &AssociationProfile,
    mobile: usize,
) -> Vec<usize> {
    let costs = deviation_costs(game, profile, mobile);
    let tol = game.network().tie_tolerance();
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    (0..costs.len())
        .filter(|&j| weakly_less(costs[j], min, tol))
        .collect()
}

fn deviation_costs<G: GameCosts + ?Sized>(game: &G, profile: &AssociationProfile, mobile: usize) -> Vec<f64> {
    (0..game.network().num_bs())
        .map(|j| game.deviation_cost(profile, mobile, j))
        .collect()
}

pub fn is_nash<G: GameCosts + ?Sized>(game: &G, profile: &AssociationProfile) -> bool {
    (0..profile.len()).all(|i| best_response_set(game, profile, i).contains(&profile.bs_of(i)))
}

/// Where `mobile` goes under `rule`, or `None` if it stays.
fn choose_move<G: GameCosts + ?Sized>(
    game: &G,
    profile: &AssociationProfile,
    mobile: usize,
    rule: Rule,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<usize> {
    let current = profile.bs_of(mobile);
    let mut candidates = best_response_set(game, profile, mobile);
    if rule == Rule::MapcStar {
        let net = game.network();
        let loads: Vec<f64> = candidates
            .iter()
            .map(|&j| net.load_with(profile, j, Some((mobile, j))))
            .collect();
        let min = loads.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = net.tie_tolerance();
        candidates = candidates
            .into_iter()
            .zip(loads)
            .filter(|&(_, l)| weakly_less(l, min, tol))
            .map(|(j, _)| j)
            .collect();
    }
    if candidates.contains(&current) {
        return None;
    }
    match rng {
        Some(rng) => candidates.choose(rng).copied(),
        None => candidates.first().copied(),
    }
}

/// One MAPC update of `mobile` (lowest-index tie break).
pub fn mapc_step<G: GameCosts + ?Sized>(game: &G, profile: &AssociationProfile, mobile: usize) -> AssociationProfile {
    match choose_move(game, profile, mobile, Rule::Mapc, None) {
        Some(bs) => profile.with_move(mobile, bs),
        None => profile.clone(),
    }
}

/// One MAPC* update of `mobile`: lexicographic minimum of (cost, resulting load).
pub fn mapc_star_step<G: GameCosts + ?Sized>(
    game: &G,
    profile: &AssociationProfile,
    mobile: usize,
) -> AssociationProfile {
    match choose_move(game, profile, mobile, Rule::MapcStar, None) {
        Some(bs) => profile.with_move(mobile, bs),
        None => profile.clone(),
    }
}

pub fn run<G: GameCosts + ?Sized>(
    game: &G,
    initial: &AssociationProfile,
    config: &RunConfig,
) -> Result<RunResult> {
    let net = game.network();
    net.check_profile(initial)?;
    let m = net.num_mobiles();
    config.scheduler.validate(m)?;
    let max_steps = config.max_steps.unwrap_or(1000 * m);
    if max_steps == 0 {
        return Err(Error::Validation("max_steps must be at least 1".into()));
    }
    let window = match config.scheduler {
        Scheduler::RoundRobin => m,
        _ => config.quiet_window.unwrap_or(m).max(1),
    };
    let tol = net.tie_tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut profile = initial.clone();
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut seen: HashMap<AssociationProfile, usize> = HashMap::new();
    seen.insert(profile.clone(), 0);
    let mut quiet = 0usize;
    let mut movers = Vec::with_capacity(m);

    for step in 1..=max_steps {
        movers.clear();
        match &config.scheduler {
            Scheduler::RoundRobin => movers.push((step - 1) % m),
            Scheduler::RandomSingle => movers.push(rng.gen_range(0..m)),
            Scheduler::IndependentProb { probabilities } => {
                for (i, &eps) in probabilities.iter().enumerate() {
                    if rng.gen::<f64>() < eps {
                        movers.push(i);
                    }
                }
            }
        }

        let mut switched = false;
        for &i in &movers {
            let tie_rng = match config.tie_break {
                TieBreak::Random => Some(&mut rng),
                TieBreak::LowestIndex => None,
            };
            let Some(to) = choose_move(game, &profile, i, config.rule, tie_rng) else {
                continue;
            };
            let from = profile.bs_of(i);
            let cost_before = game.current_cost(&profile, i);
            let cost_after = game.deviation_cost(&profile, i, to);
            profile.set(i, to);
            trace.push(TraceEntry {
                step,
                mobile: i,
                from_bs: from,
                to_bs: to,
                cost_before,
                cost_after,
            });
            switched = true;

            if let Some(&k) = seen.get(&profile) {
                if trace[k..].iter().any(|e| strictly_less(e.cost_after, e.cost_before, tol)) {
                    let cycle = Cycle {
                        first_move: k,
                        length: trace.len() - k,
                        profile: profile.as_slice().to_vec(),
                    };
                    return Ok(RunResult {
                        final_profile: profile,
                        steps: step,
                        status: RunStatus::CycleDetected,
                        trace,
                        cycle: Some(cycle),
                    });
                }
            }
            seen.insert(profile.clone(), trace.len());
        }

        if switched {
            quiet = 0;
            continue;
        }
        quiet += 1;
        if quiet >= window {
            if is_nash(game, &profile) {
                return Ok(RunResult {
                    final_profile: profile,
                    steps: step,
                    status: RunStatus::ConvergedNe,
                    trace,
                    cycle: None,
                });
            }
            // Only possible under a randomized scheduler that skipped a mobile.
            debug_assert!(config.scheduler.is_random());
            quiet = 0;
        }
    }

    let status = if is_nash(game, &profile) {
        RunStatus::ConvergedNe
    } else {
        RunStatus::IterationCap
    };
    Ok(RunResult {
        final_profile: profile,
        steps: max_steps,
        status,
        trace,
        cycle: None,
    })
}

/// First best-response cycle along `trace`, replayed from `initial`.
///
/// A cycle is a recurrence of a profile with at least one strict cost
/// improvement among the moves in between.
pub fn detect_cycle(initial: &AssociationProfile, trace: &[TraceEntry], tol: f64) -> Option<Cycle> {
    let mut profile = initial.clone();
    let mut seen: HashMap<AssociationProfile, usize> = HashMap::new();
    seen.insert(profile.clone(), 0);
    for (k, e) in trace.iter().enumerate() {
        profile.set(e.mobile, e.to_bs);
        let after = k + 1;
        if let Some(&start) = seen.get(&profile) {
            if trace[start..after]
                .iter()
                .any(|e| strictly_less(e.cost_after, e.cost_before, tol))
            {
                return Some(Cycle {
                    first_move: start,
                    length: after - start,
                    profile: profile.as_slice().to_vec(),
                });
            }
        }
        seen.insert(profile.clone(), after);
    }
    None
}
