//! Brute-force oracles over the finite game and the special-case potentials.
//!
//! Everything here walks the full profile space `N^M`, so it is only meant
//! for small instances; a cap guards against accidental blow-ups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::{AssociationProfile, NetworkInstance};
use crate::dynamics::{is_nash, GameCosts};
use crate::error::{Error, Result};
use crate::numeric::{positive_part, strictly_less, weakly_less};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialCase {
    /// All mobiles share one target SINR.
    SingleClass,
    /// `h_ij` depends only on `j`.
    CollocatedMobiles,
    /// `h_ij` depends only on `i`.
    CollocatedBs,
    /// `h_ij` constant.
    CollocatedBsSymmetric,
    General,
}

impl SpecialCase {
    pub fn holds(self, net: &NetworkInstance) -> bool {
        let h = net.gains();
        match self {
            SpecialCase::SingleClass => net.load_factors().iter().all(|&b| b == net.beta(0)),
            SpecialCase::CollocatedMobiles => h.iter().all(|row| row == &h[0]),
            SpecialCase::CollocatedBs => h.iter().all(|row| row.iter().all(|&x| x == row[0])),
            SpecialCase::CollocatedBsSymmetric => h.iter().flatten().all(|&x| x == h[0][0]),
            SpecialCase::General => true,
        }
    }

    fn require(self, net: &NetworkInstance, what: &str) -> Result<()> {
        if self.holds(net) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what} needs a {self:?} instance")))
        }
    }
}

/// Every special case the instance belongs to, `General` last.
pub fn special_cases(net: &NetworkInstance) -> Vec<SpecialCase> {
    [
        SpecialCase::SingleClass,
        SpecialCase::CollocatedMobiles,
        SpecialCase::CollocatedBs,
        SpecialCase::CollocatedBsSymmetric,
        SpecialCase::General,
    ]
    .into_iter()
    .filter(|c| c.holds(net))
    .collect()
}

/// `N^M`, saturating at `u128::MAX`.
pub fn profile_count(num_mobiles: usize, num_bs: usize) -> u128 {
    let mut count: u128 = 1;
    for _ in 0..num_mobiles {
        count = count.saturating_mul(num_bs as u128);
    }
    count
}

/// All profiles in lexicographic order (mobile 1 most significant).
pub fn all_profiles(net: &NetworkInstance, cap: u128) -> Result<Profiles> {
    let count = profile_count(net.num_mobiles(), net.num_bs());
    if count > cap {
        return Err(Error::SizeCap { count, cap });
    }
    Ok(Profiles {
        next: Some(vec![0; net.num_mobiles()]),
        num_bs: net.num_bs(),
    })
}

pub struct Profiles {
    next: Option<Vec<usize>>,
    num_bs: usize,
}

impl Iterator for Profiles {
    type Item = AssociationProfile;

    fn next(&mut self) -> Option<AssociationProfile> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        while k > 0 {
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.num_bs {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        AssociationProfile::new(current, self.num_bs).ok()
    }
}

pub fn enumerate_nash(net: &NetworkInstance) -> Result<Vec<AssociationProfile>> {
    enumerate_nash_in(net, DEFAULT_ENUMERATION_CAP)
}

/// Nash equilibria of `game` (plain or tolled), lexicographically ordered.
pub fn enumerate_nash_in<G: GameCosts + ?Sized>(game: &G, cap: u128) -> Result<Vec<AssociationProfile>> {
    Ok(all_profiles(game.network(), cap)?
        .filter(|a| is_nash(game, a))
        .collect())
}

fn cost_vector(net: &NetworkInstance, a: &AssociationProfile) -> Vec<f64> {
    (0..net.num_mobiles()).map(|i| net.mobile_cost(a, i)).collect()
}

fn dominates(cb: &[f64], ca: &[f64], tol: f64) -> bool {
    cb.iter().zip(ca).all(|(&b, &a)| weakly_less(b, a, tol))
        && cb.iter().zip(ca).any(|(&b, &a)| strictly_less(b, a, tol))
}

/// Whether `b` Pareto-dominates `a`.
pub fn pareto_dominates(net: &NetworkInstance, b: &AssociationProfile, a: &AssociationProfile) -> bool {
    dominates(&cost_vector(net, b), &cost_vector(net, a), net.tie_tolerance())
}

pub fn is_pareto_efficient(net: &NetworkInstance, a: &AssociationProfile) -> Result<bool> {
    let ca = cost_vector(net, a);
    let tol = net.tie_tolerance();
    Ok(!all_profiles(net, DEFAULT_ENUMERATION_CAP)?.any(|b| dominates(&cost_vector(net, &b), &ca, tol)))
}

/// All Pareto-efficient profiles, computed from one pass of cost vectors.
pub fn pareto_efficient_profiles(net: &NetworkInstance, cap: u128) -> Result<Vec<AssociationProfile>> {
    let profiles: Vec<AssociationProfile> = all_profiles(net, cap)?.collect();
    let costs: Vec<Vec<f64>> = profiles.iter().map(|a| cost_vector(net, a)).collect();
    let tol = net.tie_tolerance();
    Ok(profiles
        .iter()
        .enumerate()
        .filter(|&(k, _)| !costs.iter().any(|cb| dominates(cb, &costs[k], tol)))
        .map(|(_, a)| a.clone())
        .collect())
}

pub fn system_optimal_profiles(net: &NetworkInstance) -> Result<Vec<AssociationProfile>> {
    system_optimal_profiles_in(net, DEFAULT_ENUMERATION_CAP)
}

pub fn system_optimal_profiles_in(net: &NetworkInstance, cap: u128) -> Result<Vec<AssociationProfile>> {
    let scored: Vec<(AssociationProfile, f64)> = all_profiles(net, cap)?
        .map(|a| {
            let c = net.system_cost(&a);
            (a, c)
        })
        .collect();
    let min = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let tol = net.tie_tolerance();
    Ok(scored
        .into_iter()
        .filter(|(_, c)| weakly_less(*c, min, tol))
        .map(|(a, _)| a)
        .collect())
}

/// Base stations with the strongest gain for `mobile`.
pub fn best_match_bs(net: &NetworkInstance, mobile: usize) -> Vec<usize> {
    let row = &net.gains()[mobile];
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..row.len()).filter(|&j| row[j] == best).collect()
}

/// Single-class potential: a product over mobiles' gains and per-cell slack terms.
pub fn potential_v1(net: &NetworkInstance, a: &AssociationProfile) -> Result<f64> {
    SpecialCase::SingleClass.require(net, "V1")?;
    let beta = net.beta(0);
    let mut value = 1.0 / (net.noise_power() * beta);
    for (l, &j) in a.as_slice().iter().enumerate() {
        value *= net.gain(l, j);
    }
    for count in a.counts(net.num_bs()) {
        for t in 1..=count {
            value *= positive_part(1.0 - t as f64 * beta);
        }
    }
    Ok(-value)
}

/// Collocated-mobile potential.
pub fn potential_v2(net: &NetworkInstance, a: &AssociationProfile) -> Result<f64> {
    SpecialCase::CollocatedMobiles.require(net, "V2")?;
    let loads: Vec<f64> = (0..net.num_bs()).map(|j| net.load_with(a, j, None)).collect();
    let sum: f64 = a
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let b = net.beta(i);
            net.gain(0, j) / net.noise_power() * b * (positive_part(1.0 - loads[j]) + (1.0 - b))
        })
        .sum();
    Ok(-sum)
}

/// Collocated-base-station potential.
pub fn potential_v3(net: &NetworkInstance, a: &AssociationProfile) -> Result<f64> {
    SpecialCase::CollocatedBs.require(net, "V3")?;
    let loads: Vec<f64> = (0..net.num_bs()).map(|j| net.load_with(a, j, None)).collect();
    let sum: f64 = a
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &j)| net.beta(i) * positive_part(1.0 - loads[j]) / net.noise_power())
        .sum();
    Ok(-sum)
}

/// Sign of `new - old` with a relative dead band; equal infinities are a tie.
fn sign_of_change(new: f64, old: f64, rel_tol: f64) -> i8 {
    if new == old {
        return 0;
    }
    let d = new - old;
    let scale = new.abs().max(old.abs());
    if d.is_finite() && d.abs() <= rel_tol * scale {
        0
    } else if d < 0.0 {
        -1
    } else {
        1
    }
}

const SIGN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialViolation {
    /// 1-based profile.
    pub profile: Vec<usize>,
    /// 1-based mobile.
    pub mobile: usize,
    /// 1-based target base station.
    pub to_bs: usize,
    pub delta_cost: f64,
    pub delta_potential: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub instances: usize,
    pub deviations: usize,
    /// Deviations where either profile is infeasible; the `[x]^+` clamp
    /// breaks the potential identities there, so they are not judged.
    pub skipped_infeasible: usize,
    /// Deviations where one side falls inside the numerical dead band.
    pub ambiguous: usize,
    pub violations: Vec<PotentialViolation>,
}

impl PotentialReport {
    pub fn merge(&mut self, other: PotentialReport) {
        self.instances += other.instances;
        self.deviations += other.deviations;
        self.skipped_infeasible += other.skipped_infeasible;
        self.ambiguous += other.ambiguous;
        self.violations.extend(other.violations);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn judge<G: GameCosts + ?Sized>(
        &mut self,
        game: &G,
        potential: &dyn Fn(&AssociationProfile) -> f64,
        a: &AssociationProfile,
        mobile: usize,
        to: usize,
    ) {
        let net = game.network();
        let b = a.with_move(mobile, to);
        self.deviations += 1;
        if !net.is_feasible(a) || !net.is_feasible(&b) {
            self.skipped_infeasible += 1;
            return;
        }
        let c_old = game.current_cost(a, mobile);
        let c_new = game.deviation_cost(a, mobile, to);
        let v_old = potential(a);
        let v_new = potential(&b);
        let sc = sign_of_change(c_new, c_old, SIGN_TOLERANCE);
        let sv = sign_of_change(v_new, v_old, SIGN_TOLERANCE);
        if (sc == 0) != (sv == 0) {
            self.ambiguous += 1;
        }
        // Checks both directions of the biconditional.
        if sc != 0 && sv != 0 && sc != sv {
            self.violations.push(PotentialViolation {
                profile: a.to_one_based(),
                mobile: mobile + 1,
                to_bs: to + 1,
                delta_cost: c_new - c_old,
                delta_potential: v_new - v_old,
            });
        }
    }
}

/// Checks `c_i(b) < c_i(a) <=> V(b) < V(a)` on sampled unilateral deviations.
pub fn check_ordinal_potential<G: GameCosts + ?Sized>(
    game: &G,
    potential: &dyn Fn(&AssociationProfile) -> f64,
    samples: usize,
    seed: u64,
) -> PotentialReport {
    let net = game.network();
    let (m, n) = (net.num_mobiles(), net.num_bs());
    let mut report = PotentialReport {
        instances: 1,
        ..Default::default()
    };
    if n < 2 {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let assignment: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
        let a = AssociationProfile::new(assignment, n).expect("sampled indices are in range");
        let mobile = rng.gen_range(0..m);
        let mut to = rng.gen_range(0..n - 1);
        if to >= a.bs_of(mobile) {
            to += 1;
        }
        report.judge(game, potential, &a, mobile, to);
    }
    report
}

/// The same check over every profile and every unilateral deviation.
pub fn check_ordinal_potential_exhaustive<G: GameCosts + ?Sized>(
    game: &G,
    potential: &dyn Fn(&AssociationProfile) -> f64,
    cap: u128,
) -> Result<PotentialReport> {
    let net = game.network();
    let mut report = PotentialReport {
        instances: 1,
        ..Default::default()
    };
    for a in all_profiles(net, cap)? {
        for i in 0..net.num_mobiles() {
            for j in (0..net.num_bs()).filter(|&j| j != a.bs_of(i)) {
                report.judge(game, potential, &a, i, j);
            }
        }
    }
    Ok(report)
}
