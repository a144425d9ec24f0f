//! Seeded random instances. Gains are drawn i.i.d. uniform on (0, 1].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{Instance, Kind};
use crate::discrete::NetworkInstance;
use crate::error::{Error, Result};
use crate::nonatomic::NonatomicInstance;
use crate::poa::SingleClassInstance;

/// Upper bound on mobiles, classes and base stations for generated instances.
pub const MAX_DIM: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomDims {
    /// Mobiles of a discrete instance.
    pub num_mobiles: usize,
    /// Classes of a nonatomic instance.
    pub num_classes: usize,
    pub num_bs: usize,
    /// Target SINRs (or densities) are drawn uniformly from this set...
    pub sinr_set: Vec<f64>,
    /// ...unless a `[lo, hi)` range is given.
    pub sinr_range: Option<[f64; 2]>,
    pub noise_power: f64,
    /// Nonatomic demand `sum_l gamma_l M_l` as a fraction of `N`, drawn from `[lo, hi)`.
    pub demand_fraction: [f64; 2],
}

impl Default for RandomDims {
    fn default() -> Self {
        Self {
            num_mobiles: 4,
            num_classes: 2,
            num_bs: 2,
            sinr_set: vec![0.5, 1.0],
            sinr_range: None,
            noise_power: 1.0,
            demand_fraction: [0.2, 0.9],
        }
    }
}

impl RandomDims {
    fn check(&self, kind: Kind) -> Result<()> {
        let count = |what: &str, n: usize| {
            if n == 0 {
                Err(Error::Validation(format!("random instance needs at least one {what}")))
            } else if n > MAX_DIM {
                Err(Error::Validation(format!("{n} {what}s exceeds the cap of {MAX_DIM}")))
            } else {
                Ok(())
            }
        };
        count("base station", self.num_bs)?;
        match kind {
            Kind::Discrete => count("mobile", self.num_mobiles)?,
            Kind::Nonatomic => count("class", self.num_classes)?,
            Kind::SingleClassPoa => {}
        }
        match self.sinr_range {
            Some([lo, hi]) if !(lo > 0.0 && hi > lo && hi.is_finite()) => {
                return Err(Error::Validation(format!("SINR range [{lo}, {hi}) must satisfy 0 < lo < hi")));
            }
            None if self.sinr_set.is_empty() => {
                return Err(Error::Validation("SINR set is empty".into()));
            }
            _ => {}
        }
        let [lo, hi] = self.demand_fraction;
        if kind == Kind::Nonatomic && !(lo > 0.0 && hi >= lo && hi < 1.0) {
            return Err(Error::Validation(format!(
                "demand fraction range [{lo}, {hi}) must lie inside (0, 1)"
            )));
        }
        Ok(())
    }

    fn draw_sinr<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.sinr_range {
            Some([lo, hi]) => rng.gen_range(lo..hi),
            None => *self.sinr_set.choose(rng).expect("checked non-empty"),
        }
    }
}

/// A gain in (0, 1].
pub fn uniform_gain<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn gain_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| uniform_gain(rng)).collect()).collect()
}

pub fn random_network(dims: &RandomDims, seed: u64) -> Result<NetworkInstance> {
    dims.check(Kind::Discrete)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = gain_matrix(&mut rng, dims.num_mobiles, dims.num_bs);
    let sinr = (0..dims.num_mobiles).map(|_| dims.draw_sinr(&mut rng)).collect();
    NetworkInstance::new(gains, dims.noise_power, sinr)
}

/// Masses are drawn uniformly and then scaled so the total SINR demand is a
/// random fraction of the number of base stations.
pub fn random_nonatomic(dims: &RandomDims, seed: u64) -> Result<NonatomicInstance> {
    dims.check(Kind::Nonatomic)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = gain_matrix(&mut rng, dims.num_classes, dims.num_bs);
    let sinr: Vec<f64> = (0..dims.num_classes).map(|_| dims.draw_sinr(&mut rng)).collect();
    let raw: Vec<f64> = (0..dims.num_classes).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let [lo, hi] = dims.demand_fraction;
    let fraction = if hi > lo { rng.gen_range(lo..hi) } else { lo };
    let demand: f64 = sinr.iter().zip(&raw).map(|(g, m)| g * m).sum();
    let scale = fraction * dims.num_bs as f64 / demand;
    let masses = raw.iter().map(|m| m * scale).collect();
    NonatomicInstance::new(gains, dims.noise_power, sinr, masses)
}

/// Single-class instance with `num_bs` uniform gains and a fixed density.
pub fn random_single_class(num_bs: usize, gamma: f64, noise_power: f64, seed: u64) -> Result<SingleClassInstance> {
    if num_bs == 0 || num_bs > MAX_DIM {
        return Err(Error::Validation(format!(
            "single-class instance needs between 1 and {MAX_DIM} base stations, got {num_bs}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = (0..num_bs).map(|_| uniform_gain(&mut rng)).collect();
    SingleClassInstance::new(gains, gamma, noise_power)
}

/// For single-class instances the density is the first entry of the SINR set
/// (or the lower end of the range).
pub fn generate_random_instance(kind: Kind, dims: &RandomDims, seed: u64) -> Result<Instance> {
    match kind {
        Kind::Discrete => random_network(dims, seed).map(Instance::Discrete),
        Kind::Nonatomic => random_nonatomic(dims, seed).map(Instance::Nonatomic),
        Kind::SingleClassPoa => {
            dims.check(kind)?;
            let gamma = match dims.sinr_range {
                Some([lo, _]) => lo,
                None => dims.sinr_set[0],
            };
            random_single_class(dims.num_bs, gamma, dims.noise_power, seed).map(Instance::SingleClass)
        }
    }
}

/// Uniformly random association profile.
pub fn random_profile(num_mobiles: usize, num_bs: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_mobiles).map(|_| rng.gen_range(0..num_bs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let dims = RandomDims::default();
        for kind in [Kind::Discrete, Kind::Nonatomic, Kind::SingleClassPoa] {
            let a = generate_random_instance(kind, &dims, 7).unwrap();
            let b = generate_random_instance(kind, &dims, 7).unwrap();
            assert_eq!(a, b);
        }
        assert_ne!(random_network(&dims, 1).unwrap(), random_network(&dims, 2).unwrap());
    }

    #[test]
    fn gains_in_unit_interval() {
        let dims = RandomDims {
            num_mobiles: 50,
            num_bs: 4,
            ..RandomDims::default()
        };
        let net = random_network(&dims, 3).unwrap();
        assert!(net.gains().iter().flatten().all(|h| *h > 0.0 && *h <= 1.0));
        assert!(net.target_sinrs().iter().all(|g| *g == 0.5 || *g == 1.0));
    }

    #[test]
    fn nonatomic_demand_is_feasible() {
        let dims = RandomDims {
            num_classes: 6,
            num_bs: 3,
            sinr_range: Some([0.01, 0.1]),
            ..RandomDims::default()
        };
        for seed in 0..20 {
            let inst = random_nonatomic(&dims, seed).unwrap();
            let frac = inst.demand() / 3.0;
            assert!((0.2 - 1e-12..0.9).contains(&frac), "{frac}");
        }
    }

    #[test]
    fn zero_mobiles_rejected() {
        let dims = RandomDims {
            num_mobiles: 0,
            ..RandomDims::default()
        };
        assert!(matches!(
            generate_random_instance(Kind::Discrete, &dims, 0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(random_single_class(0, 0.01, 1.0, 0), Err(Error::Validation(_))));
    }
}
