//! Marginal-cost tolls for the finite game.
//!
//! A mobile on base station `j` is charged the extra power its presence
//! forces on the other mobiles of `j`. The tolled cost then telescopes to the
//! total power of `j` with the mobile minus the total without it, which makes
//! the system cost `C` an exact potential of the tolled game.

use serde::{Deserialize, Serialize};

use crate::discrete::{AssociationProfile, NetworkInstance};
use crate::dynamics::{self, GameCosts, RunConfig, RunResult};
use crate::error::Result;
use crate::numeric::{extended, limit_sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolledCostView {
    #[serde(with = "extended")]
    pub base_cost: f64,
    #[serde(with = "extended")]
    pub toll: f64,
    #[serde(with = "extended")]
    pub total: f64,
}

/// Powers of the other mobiles on `mobile`'s cell, with and without it.
fn others_power(net: &NetworkInstance, a: &AssociationProfile, mobile: usize) -> (f64, f64) {
    let bs = a.bs_of(mobile);
    let with = net.load_with(a, bs, None);
    let without = net.load_without(a, bs, mobile);
    (
        net.power_sum(a, bs, with, Some(mobile)),
        net.power_sum(a, bs, without, Some(mobile)),
    )
}

/// `t_i(a)`: extra power the other mobiles of `i`'s cell spend because of `i`.
///
/// `inf - inf` resolves to `+inf`: the overloaded term dominates.
pub fn toll(net: &NetworkInstance, a: &AssociationProfile, mobile: usize) -> f64 {
    let (with, without) = others_power(net, a, mobile);
    limit_sub(with, without)
}

/// `c_i + t_i`, evaluated in telescoped form.
pub fn tolled_cost(net: &NetworkInstance, a: &AssociationProfile, mobile: usize) -> f64 {
    let bs = a.bs_of(mobile);
    let with = net.bs_power(a, bs);
    let without = net.power_sum(a, bs, net.load_without(a, bs, mobile), Some(mobile));
    limit_sub(with, without)
}

pub fn tolled_cost_view(net: &NetworkInstance, a: &AssociationProfile, mobile: usize) -> TolledCostView {
    let base_cost = net.mobile_cost(a, mobile);
    let toll = toll(net, a, mobile);
    TolledCostView {
        base_cost,
        toll,
        total: base_cost + toll,
    }
}

pub fn toll_table(net: &NetworkInstance, a: &AssociationProfile) -> Vec<TolledCostView> {
    (0..a.len()).map(|i| tolled_cost_view(net, a, i)).collect()
}

/// Potential of the tolled game. It is the system cost, computed by the same
/// routine so the two agree bit for bit.
pub fn toll_potential(net: &NetworkInstance, a: &AssociationProfile) -> f64 {
    net.system_cost(a)
}

/// Total power of the cell, which a base station announces so that each
/// mobile can evaluate its own tolled cost.
pub fn broadcast_quantity(net: &NetworkInstance, a: &AssociationProfile, bs: usize) -> f64 {
    net.bs_power(a, bs)
}

/// The tolled game as seen by the dynamics.
#[derive(Debug, Clone, Copy)]
pub struct Tolled<'a>(pub &'a NetworkInstance);

impl GameCosts for Tolled<'_> {
    fn network(&self) -> &NetworkInstance {
        self.0
    }

    fn deviation_cost(&self, profile: &AssociationProfile, mobile: usize, bs: usize) -> f64 {
        if profile.bs_of(mobile) == bs {
            tolled_cost(self.0, profile, mobile)
        } else {
            tolled_cost(self.0, &profile.with_move(mobile, bs), mobile)
        }
    }
}

pub fn run_tolled(net: &NetworkInstance, initial: &AssociationProfile, config: &RunConfig) -> Result<RunResult> {
    dynamics::run(&Tolled(net), initial, config)
}
