//! Price of anarchy for a single class of nonatomic mobiles.
//!
//! Base stations are sorted by decreasing gain. At equilibrium the mass
//! water-fills on `h`: used cells share a common `h_k (1 - gamma m_k)`, and
//! cell `j` starts receiving mass once the total exceeds its spill-over mass
//! `Delta_j`. The optimum water-fills the same way on `sqrt(h)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonatomic::NonatomicInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SingleClassRepr", into = "SingleClassRepr")]
pub struct SingleClassInstance {
    /// Sorted in decreasing order.
    gains: Vec<f64>,
    gamma: f64,
    sigma2: f64,
}

#[derive(Serialize, Deserialize)]
struct SingleClassRepr {
    gains: Vec<f64>,
    gamma: f64,
    #[serde(default = "unit_noise")]
    noise_power: f64,
}

fn unit_noise() -> f64 {
    1.0
}

impl TryFrom<SingleClassRepr> for SingleClassInstance {
    type Error = Error;

    fn try_from(r: SingleClassRepr) -> Result<Self> {
        SingleClassInstance::new(r.gains, r.gamma, r.noise_power)
    }
}

impl From<SingleClassInstance> for SingleClassRepr {
    fn from(s: SingleClassInstance) -> Self {
        SingleClassRepr {
            gains: s.gains,
            gamma: s.gamma,
            noise_power: s.sigma2,
        }
    }
}

impl SingleClassInstance {
    /// Gains may be given in any order; they are sorted on construction.
    pub fn new(mut gains: Vec<f64>, gamma: f64, sigma2: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::Validation("at least one base station is required".into()));
        }
        if gains.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Validation("gains must be positive and finite".into()));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Validation(format!("SINR density must be positive, got {gamma}")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::Validation(format!("noise power must be positive, got {sigma2}")));
        }
        gains.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { gains, gamma, sigma2 })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn noise_power(&self) -> f64 {
        self.sigma2
    }

    pub fn num_bs(&self) -> usize {
        self.gains.len()
    }

    /// Mass at which the network saturates.
    pub fn capacity(&self) -> f64 {
        self.num_bs() as f64 / self.gamma
    }

    /// `e_j = sum_{k <= j} 1/h_k`, for `j` in `0..=N`.
    pub fn e(&self, j: usize) -> f64 {
        self.gains[..j].iter().map(|h| 1.0 / h).sum()
    }

    /// `e*_j = sum_{k <= j} 1/sqrt(h_k)`.
    pub fn e_star(&self, j: usize) -> f64 {
        self.gains[..j].iter().map(|h| 1.0 / h.sqrt()).sum()
    }

    /// The same network as a one-class nonatomic instance carrying `mass`.
    pub fn to_nonatomic(&self, mass: f64) -> Result<NonatomicInstance> {
        NonatomicInstance::new(vec![self.gains.clone()], self.sigma2, vec![self.gamma], vec![mass])
    }

    fn check_mass(&self, mass: f64) -> Result<()> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        if mass >= self.capacity() {
            return Err(Error::Validation(format!(
                "mass {mass} is infeasible: gamma * mass must stay below N = {}",
                self.num_bs()
            )));
        }
        Ok(())
    }
}

/// Spill-over masses `Delta_2 .. Delta_N`; nondecreasing.
pub fn spillover_masses(inst: &SingleClassInstance) -> Vec<f64> {
    spill(inst, |h| h, |j| inst.e(j))
}

/// The analogous thresholds for the optimum (water-filling on `sqrt(h)`).
pub fn optimal_spillover_masses(inst: &SingleClassInstance) -> Vec<f64> {
    spill(inst, f64::sqrt, |j| inst.e_star(j))
}

fn spill(inst: &SingleClassInstance, w: impl Fn(f64) -> f64, e: impl Fn(usize) -> f64) -> Vec<f64> {
    (2..=inst.num_bs())
        .map(|j| ((j - 1) as f64 - w(inst.gains[j - 1]) * e(j - 1)) / inst.gamma)
        .collect()
}

/// Number of cells in use at `mass`.
fn used_cells(thresholds: &[f64], mass: f64) -> usize {
    1 + thresholds.iter().filter(|&&d| d < mass).count()
}

/// Equilibrium masses per base station (in sorted gain order).
pub fn ne_loads(inst: &SingleClassInstance, mass: f64) -> Result<Vec<f64>> {
    inst.check_mass(mass)?;
    let n = used_cells(&spillover_masses(inst), mass);
    let level = (n as f64 - inst.gamma * mass) / inst.e(n);
    Ok(fill(inst, n, |h| level / h))
}

/// System-optimal masses per base station.
pub fn opt_loads(inst: &SingleClassInstance, mass: f64) -> Result<Vec<f64>> {
    inst.check_mass(mass)?;
    let n = used_cells(&optimal_spillover_masses(inst), mass);
    let k = (n as f64 - inst.gamma * mass) / inst.e_star(n);
    Ok(fill(inst, n, |h| k / h.sqrt()))
}

/// Masses `(1 - slack(h_k)) / gamma` on the first `n` cells, zero beyond.
fn fill(inst: &SingleClassInstance, n: usize, slack: impl Fn(f64) -> f64) -> Vec<f64> {
    inst.gains
        .iter()
        .enumerate()
        .map(|(k, &h)| if k < n { (1.0 - slack(h)) / inst.gamma } else { 0.0 })
        .collect()
}

/// `C` at equilibrium: `sigma^2 gamma M e_n / (n - gamma M)`.
pub fn ne_cost(inst: &SingleClassInstance, mass: f64) -> Result<f64> {
    inst.check_mass(mass)?;
    let n = used_cells(&spillover_masses(inst), mass);
    let x = inst.gamma * mass;
    Ok(inst.sigma2 * x * inst.e(n) / (n as f64 - x))
}

/// `n e_n - e*_n^2`, summed as `sum_{k<l} (1/sqrt(h_k) - 1/sqrt(h_l))^2` to
/// avoid cancellation.
fn dispersion(inst: &SingleClassInstance, n: usize) -> f64 {
    let r: Vec<f64> = inst.gains[..n].iter().map(|h| 1.0 / h.sqrt()).collect();
    let mut d = 0.0;
    for k in 0..n {
        for l in k + 1..n {
            d += (r[k] - r[l]) * (r[k] - r[l]);
        }
    }
    d
}

/// Optimal `C`: `sigma^2 (e*_n^2 / (n - gamma M) - e_n)`, evaluated as
/// `sigma^2 (gamma M e_n - D_n) / (n - gamma M)` with `D_n = n e_n - e*_n^2`.
pub fn opt_cost(inst: &SingleClassInstance, mass: f64) -> Result<f64> {
    inst.check_mass(mass)?;
    let n = used_cells(&optimal_spillover_masses(inst), mass);
    let x = inst.gamma * mass;
    Ok(inst.sigma2 * (x * inst.e(n) - dispersion(inst, n)) / (n as f64 - x))
}

pub fn poa(inst: &SingleClassInstance, mass: f64) -> Result<f64> {
    Ok(ne_cost(inst, mass)? / opt_cost(inst, mass)?)
}

/// Closed form valid once every cell is used at equilibrium (`M >= Delta_N`).
pub fn poa_large_mass(inst: &SingleClassInstance, mass: f64) -> Result<f64> {
    inst.check_mass(mass)?;
    let n = inst.num_bs();
    let (e, gap) = (inst.e(n), dispersion(inst, n));
    Ok(1.0 + gap / (e * mass * inst.gamma - gap))
}

/// Two base stations with gain ratio `lambda = h2/h1`.
pub fn poa_two_bs(lambda: f64, gamma: f64, mass: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Domain(format!("gain ratio must lie in (0, 1], got {lambda}")));
    }
    if !(gamma > 0.0) || !(mass > 0.0) {
        return Err(Error::Domain("gamma and mass must be positive".into()));
    }
    let x = gamma * mass;
    if x >= 2.0 {
        return Err(Error::Validation(format!("gamma * mass = {x} exceeds two cells")));
    }
    let r = lambda.sqrt();
    let denom = 2.0 * r - (1.0 - x) * (1.0 + lambda);
    Ok(if x <= 1.0 - r {
        1.0
    } else if x <= 1.0 - lambda {
        lambda * (2.0 - x) * x / ((1.0 - x) * denom)
    } else {
        x * (1.0 + lambda) / denom
    })
}

/// Peak of [`poa_two_bs`], reached at `M = (1 - lambda) / gamma`.
pub fn max_poa_two_bs(lambda: f64) -> f64 {
    (1.0 - lambda * lambda) / (2.0 * lambda.sqrt() - lambda * (1.0 + lambda))
}

/// Upper bound `(1 + sqrt(h_max / h_min)) / 2` on the price of anarchy.
///
/// It is the supremum over cells of the anarchy value of the cost
/// `c_h(m) = sigma^2 gamma / (h (1 - gamma m))`, taken over loads up to
/// `theta_h = (1 - h_min / h) / gamma`, beyond which the weakest cell is
/// cheaper than cell `h`.
pub fn anarchy_bound(h_min: f64, h_max: f64) -> Result<f64> {
    if !(h_min > 0.0 && h_min <= h_max) || !h_max.is_finite() {
        return Err(Error::Domain(format!(
            "need 0 < h_min <= h_max, got h_min = {h_min}, h_max = {h_max}"
        )));
    }
    Ok(0.5 * (1.0 + (h_max / h_min).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoAPoint {
    pub mass: f64,
    pub ne_cost: f64,
    pub opt_cost: f64,
    pub poa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<PoAPoint>,
    /// `Delta_2 .. Delta_N`.
    pub spillovers: Vec<f64>,
    pub argmax_mass: f64,
    pub argmax_poa: f64,
    /// Distance from the argmax to the nearest spill-over mass.
    pub spillover_distance: f64,
    /// 1-based indices `j` with `Delta_j` equal to the argmax mass (several
    /// when gains tie).
    pub argmax_spillovers: Vec<usize>,
}

/// `points` evenly spaced masses in `(0, N/gamma)` merged with every
/// positive spill-over mass.
pub fn mass_grid(inst: &SingleClassInstance, points: usize) -> Vec<f64> {
    let cap = inst.capacity();
    let mut grid: Vec<f64> = (1..points.max(2)).map(|k| cap * k as f64 / points.max(2) as f64).collect();
    grid.extend(spillover_masses(inst).into_iter().filter(|&d| d > 0.0 && d < cap));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub fn sweep(inst: &SingleClassInstance, masses: &[f64]) -> Result<SweepReport> {
    if masses.is_empty() {
        return Err(Error::Validation("mass grid is empty".into()));
    }
    let rows = masses
        .iter()
        .map(|&m| {
            let (ne, opt) = (ne_cost(inst, m)?, opt_cost(inst, m)?);
            Ok(PoAPoint {
                mass: m,
                ne_cost: ne,
                opt_cost: opt,
                poa: ne / opt,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .enumerate()
        .fold(0, |b, (k, r)| if r.poa > rows[b].poa { k } else { b });
    let spillovers = spillover_masses(inst);
    let argmax_mass = rows[best].mass;
    let spillover_distance = spillovers
        .iter()
        .map(|d| (d - argmax_mass).abs())
        .fold(f64::INFINITY, f64::min);
    let argmax_spillovers = spillovers
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == argmax_mass)
        .map(|(k, _)| k + 2)
        .collect();
    Ok(SweepReport {
        argmax_poa: rows[best].poa,
        rows,
        spillovers,
        argmax_mass,
        spillover_distance,
        argmax_spillovers,
    })
}
