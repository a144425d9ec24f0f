//! Discrete network model: mobiles, base stations, association profiles and
//! the Pareto-efficient power allocation of each cell.
//!
//! Every base station operates on its own channel, so a mobile only sees
//! interference from the other mobiles associated with the same base station.
//! For a fixed association the power control problem of base station `j` is
//! feasible iff the load `sum_{l on j} beta_l` is below one, where
//! `beta = gamma / (1 + gamma)`. The unique Pareto-efficient power of mobile
//! `i` on `j` is then
//!
//! ```text
//! p_i = (sigma^2 / h_ij) * beta_i / [1 - load_j]^+
//! ```
//!
//! which doubles as the mobile's cost. A zero denominator encodes an
//! infeasible cell as `+inf`.
//!
//! Indices are 0-based here; file formats and the CLI use 1-based indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::over_positive_part;

/// `gamma / (1 + gamma)`, the share of a cell's capacity a mobile consumes.
pub fn load_factor(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "target SINR must be a positive finite number, got {gamma}"
        )));
    }
    Ok(gamma / (1.0 + gamma))
}

/// A discrete uplink network: `M` mobiles, `N` base stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkInstanceRepr", into = "NetworkInstanceRepr")]
pub struct NetworkInstance {
    /// `gains[i][j]`: power gain from mobile `i` to base station `j`.
    gains: Vec<Vec<f64>>,
    noise_power: f64,
    target_sinr: Vec<f64>,
    load_factors: Vec<f64>,
    tie_tolerance: f64,
}

impl NetworkInstance {
    pub fn new(gains: Vec<Vec<f64>>, noise_power: f64, target_sinr: Vec<f64>) -> Result<Self> {
        let num_mobiles = gains.len();
        if num_mobiles == 0 {
            return Err(Error::Validation("the network needs at least one mobile".into()));
        }
        let num_bs = gains[0].len();
        if num_bs == 0 {
            return Err(Error::Validation("the network needs at least one base station".into()));
        }
        for (i, row) in gains.iter().enumerate() {
            if row.len() != num_bs {
                return Err(Error::Validation(format!(
                    "gain row of mobile {} has {} entries, expected {num_bs}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|h| !(*h > 0.0) || !h.is_finite()) {
                return Err(Error::Validation(format!(
                    "gain h[{}][{}] = {} must be positive and finite",
                    i + 1,
                    j + 1,
                    row[j]
                )));
            }
        }
        if !(noise_power > 0.0) || !noise_power.is_finite() {
            return Err(Error::Validation(format!(
                "noise power must be positive and finite, got {noise_power}"
            )));
        }
        if target_sinr.len() != num_mobiles {
            return Err(Error::Validation(format!(
                "{} target SINRs given for {num_mobiles} mobiles",
                target_sinr.len()
            )));
        }
        let load_factors = target_sinr
            .iter()
            .map(|&g| load_factor(g))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(Self {
            gains,
            noise_power,
            target_sinr,
            load_factors,
            tie_tolerance: 0.0,
        })
    }

    /// Absolute band inside which two costs count as tied (default 0).
    pub fn with_tie_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::Validation(format!(
                "tie tolerance must be a finite non-negative number, got {tol}"
            )));
        }
        self.tie_tolerance = tol;
        Ok(self)
    }

    pub fn num_bs(&self) -> usize {
        self.gains[0].len()
    }

    pub fn num_mobiles(&self) -> usize {
        self.gains.len()
    }

    pub fn gain(&self, mobile: usize, bs: usize) -> f64 {
        self.gains[mobile][bs]
    }

    pub fn gains(&self) -> &[Vec<f64>] {
        &self.gains
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn target_sinr(&self, mobile: usize) -> f64 {
        self.target_sinr[mobile]
    }

    pub fn target_sinrs(&self) -> &[f64] {
        &self.target_sinr
    }

    pub fn beta(&self, mobile: usize) -> f64 {
        self.load_factors[mobile]
    }

    pub fn load_factors(&self) -> &[f64] {
        &self.load_factors
    }

    pub fn tie_tolerance(&self) -> f64 {
        self.tie_tolerance
    }

    /// Build a profile from 0-based base-station indices, checked against this instance.
    pub fn profile(&self, assignment: Vec<usize>) -> Result<AssociationProfile> {
        let profile = AssociationProfile::new(assignment, self.num_bs())?;
        self.check_profile(&profile)?;
        Ok(profile)
    }

    pub fn check_profile(&self, profile: &AssociationProfile) -> Result<()> {
        if profile.len() != self.num_mobiles() {
            return Err(Error::Validation(format!(
                "profile assigns {} mobiles, the instance has {}",
                profile.len(),
                self.num_mobiles()
            )));
        }
        if let Some(&bs) = profile.as_slice().iter().find(|&&b| b >= self.num_bs()) {
            return Err(Error::Index {
                what: "base station",
                index: bs,
                len: self.num_bs(),
            });
        }
        Ok(())
    }

    /// Load on `bs`: sum of `beta_l` over its mobiles, in mobile-index order.
    pub fn bs_load(&self, profile: &AssociationProfile, bs: usize) -> Result<f64> {
        if bs >= self.num_bs() {
            return Err(Error::Index {
                what: "base station",
                index: bs,
                len: self.num_bs(),
            });
        }
        Ok(self.load_with(profile, bs, None))
    }

    /// Load on `bs` under `profile`, optionally with one mobile moved.
    ///
    /// All load evaluations go through here so that equal mobile sets always
    /// produce bit-identical sums.
    pub(crate) fn load_with(
        &self,
        profile: &AssociationProfile,
        bs: usize,
        deviation: Option<(usize, usize)>,
    ) -> f64 {
        let mut load = 0.0;
        for (l, &b) in profile.as_slice().iter().enumerate() {
            let at = match deviation {
                Some((mobile, to)) if mobile == l => to,
                _ => b,
            };
            if at == bs {
                load += self.load_factors[l];
            }
        }
        load
    }

    /// Load on `bs` with `excluded` removed from the profile.
    pub(crate) fn load_without(&self, profile: &AssociationProfile, bs: usize, excluded: usize) -> f64 {
        let mut load = 0.0;
        for (l, &b) in profile.as_slice().iter().enumerate() {
            if l != excluded && b == bs {
                load += self.load_factors[l];
            }
        }
        load
    }

    /// Minimal power for `mobile` on `bs` when that cell carries `load`.
    #[inline]
    pub(crate) fn power_at_load(&self, mobile: usize, bs: usize, load: f64) -> f64 {
        over_positive_part(
            self.noise_power / self.gains[mobile][bs] * self.load_factors[mobile],
            1.0 - load,
        )
    }

    pub fn is_feasible(&self, profile: &AssociationProfile) -> bool {
        (0..self.num_bs()).all(|j| self.load_with(profile, j, None) < 1.0)
    }

    pub fn pareto_powers(&self, profile: &AssociationProfile) -> PowerVector {
        let loads: Vec<f64> = (0..self.num_bs())
            .map(|j| self.load_with(profile, j, None))
            .collect();
        PowerVector(
            profile
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, &j)| self.power_at_load(i, j, loads[j]))
                .collect(),
        )
    }

    /// `c_i(a)`: the power mobile `i` needs at its current base station.
    pub fn mobile_cost(&self, profile: &AssociationProfile, mobile: usize) -> f64 {
        let bs = profile.bs_of(mobile);
        self.power_at_load(mobile, bs, self.load_with(profile, bs, None))
    }

    /// `c_i((bs, a_{-i}))`: the cost after a unilateral switch to `bs`.
    pub fn hypothetical_cost(&self, profile: &AssociationProfile, mobile: usize, bs: usize) -> f64 {
        self.power_at_load(mobile, bs, self.load_with(profile, bs, Some((mobile, bs))))
    }

    /// Total power drawn by the mobiles of `bs`, summed in mobile-index order.
    pub fn bs_power(&self, profile: &AssociationProfile, bs: usize) -> f64 {
        let load = self.load_with(profile, bs, None);
        self.power_sum(profile, bs, load, None)
    }

    /// Sum of powers on `bs` at `load`, skipping `excluded`.
    pub(crate) fn power_sum(
        &self,
        profile: &AssociationProfile,
        bs: usize,
        load: f64,
        excluded: Option<usize>,
    ) -> f64 {
        profile
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(l, &b)| b == bs && Some(l) != excluded)
            .map(|(l, _)| self.power_at_load(l, bs, load))
            .sum()
    }

    /// `C(a) = sum_i c_i(a)`.
    ///
    /// Summed cell by cell, with the per-cell totals added in ascending order,
    /// so profiles that permute identical mobiles or identical cells give
    /// bit-identical totals.
    pub fn system_cost(&self, profile: &AssociationProfile) -> f64 {
        let mut per_bs: Vec<f64> = (0..self.num_bs()).map(|j| self.bs_power(profile, j)).collect();
        per_bs.sort_by(f64::total_cmp);
        per_bs.iter().sum()
    }

    /// SINR of `mobile` under an explicit power vector.
    pub fn achieved_sinr(
        &self,
        profile: &AssociationProfile,
        powers: &PowerVector,
        mobile: usize,
    ) -> Result<f64> {
        if let Some(p) = powers.0.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("power vector contains non-finite entry {p}")));
        }
        let bs = profile.bs_of(mobile);
        let interference: f64 = profile
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(l, &b)| l != mobile && b == bs)
            .map(|(l, _)| self.gains[l][bs] * powers.0[l])
            .sum();
        Ok(self.gains[mobile][bs] * powers.0[mobile] / (interference + self.noise_power))
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkInstanceRepr {
    noise_power: f64,
    target_sinr: Vec<f64>,
    /// Rows are mobiles, columns base stations.
    gains: Vec<Vec<f64>>,
    #[serde(default)]
    tie_tolerance: f64,
}

impl TryFrom<NetworkInstanceRepr> for NetworkInstance {
    type Error = Error;

    fn try_from(r: NetworkInstanceRepr) -> Result<Self> {
        NetworkInstance::new(r.gains, r.noise_power, r.target_sinr)?.with_tie_tolerance(r.tie_tolerance)
    }
}

impl From<NetworkInstance> for NetworkInstanceRepr {
    fn from(n: NetworkInstance) -> Self {
        NetworkInstanceRepr {
            noise_power: n.noise_power,
            target_sinr: n.target_sinr,
            gains: n.gains,
            tie_tolerance: n.tie_tolerance,
        }
    }
}

/// Base station chosen by every mobile (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssociationProfile(Vec<usize>);

impl AssociationProfile {
    pub fn new(assignment: Vec<usize>, num_bs: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Validation("a profile must assign at least one mobile".into()));
        }
        if let Some(&bs) = assignment.iter().find(|&&b| b >= num_bs) {
            return Err(Error::Index {
                what: "base station",
                index: bs,
                len: num_bs,
            });
        }
        Ok(Self(assignment))
    }

    /// From the 1-based indices used in files and on the command line.
    pub fn from_one_based(assignment: &[usize], num_bs: usize) -> Result<Self> {
        if let Some(&bs) = assignment.iter().find(|&&b| b == 0 || b > num_bs) {
            return Err(Error::Validation(format!(
                "base station index {bs} outside 1..={num_bs}"
            )));
        }
        Self::new(assignment.iter().map(|b| b - 1).collect(), num_bs)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|b| b + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bs_of(&self, mobile: usize) -> usize {
        self.0[mobile]
    }

    pub fn with_move(&self, mobile: usize, bs: usize) -> Self {
        let mut next = self.0.clone();
        next[mobile] = bs;
        Self(next)
    }

    pub(crate) fn set(&mut self, mobile: usize, bs: usize) {
        self.0[mobile] = bs;
    }

    /// Number of mobiles on each base station.
    pub fn counts(&self, num_bs: usize) -> Vec<usize> {
        let mut counts = vec![0; num_bs];
        for &b in &self.0 {
            counts[b] += 1;
        }
        counts
    }
}

impl std::fmt::Display for AssociationProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, b) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", b + 1)?;
        }
        write!(f, ")")
    }
}

/// Transmit powers per mobile; `+inf` marks a mobile in an overloaded cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerVector(pub Vec<f64>);

impl PowerVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, mobile: usize) -> f64 {
        self.0[mobile]
    }
}
