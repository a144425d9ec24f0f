//! Continuum of mobiles split into classes.
//!
//! Class `l` has mass `M_l`, SINR density `gamma_l` and gain `h_lj` to base
//! station `j`. A congestion profile puts mass `m_lj` of class `l` on `j`; the
//! aggregate load is `m_j = sum_l gamma_l m_lj` and the cost density of a
//! class-`l` mobile on `j` is `g_lj / (1 - m_j)` with `g_lj = gamma_l sigma^2 / h_lj`.

mod closed_form;
mod solver;

pub use closed_form::{two_bs_ne_fraction, two_bs_opt_fraction};
pub use solver::{
    solve_ne, solve_system_optimal, solve_tolled_ne, Objective, SolveOutcome, SolverOptions, StartOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c(z) = 1 / (1 - z)`, infinite once the cell is saturated.
pub fn congestion_cost(z: f64) -> f64 {
    if z >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - z)
    }
}

/// `c'(z) = 1 / (1 - z)^2`.
pub fn congestion_cost_marginal(z: f64) -> f64 {
    if z >= 1.0 {
        f64::INFINITY
    } else {
        let s = 1.0 - z;
        1.0 / (s * s)
    }
}

/// `I(m) = integral_0^m ln c(x) dx = m + (1 - m) ln(1 - m)`.
pub fn integrated_log_cost(m: f64) -> f64 {
    if m >= 1.0 {
        f64::INFINITY
    } else {
        m + (1.0 - m) * (-m).ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonatomicRepr", into = "NonatomicRepr")]
pub struct NonatomicInstance {
    /// `gains[l][j]`.
    gains: Vec<Vec<f64>>,
    noise_power: f64,
    sinr_density: Vec<f64>,
    masses: Vec<f64>,
    /// `g[l][j] = gamma_l sigma^2 / h_lj`.
    g: Vec<Vec<f64>>,
}

impl NonatomicInstance {
    pub fn new(gains: Vec<Vec<f64>>, noise_power: f64, sinr_density: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let classes = gains.len();
        if classes == 0 {
            return Err(Error::Validation("at least one mobile class is required".into()));
        }
        let n = gains[0].len();
        if n == 0 {
            return Err(Error::Validation("at least one base station is required".into()));
        }
        if gains.iter().any(|row| row.len() != n) {
            return Err(Error::Validation("every class needs one gain per base station".into()));
        }
        if gains.iter().flatten().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Validation("gains must be positive and finite".into()));
        }
        if !(noise_power > 0.0) || !noise_power.is_finite() {
            return Err(Error::Validation(format!(
                "noise power must be positive and finite, got {noise_power}"
            )));
        }
        if sinr_density.len() != classes || masses.len() != classes {
            return Err(Error::Validation(format!(
                "{classes} classes but {} SINR densities and {} masses",
                sinr_density.len(),
                masses.len()
            )));
        }
        if sinr_density.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::Validation("SINR densities must be positive and finite".into()));
        }
        if masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Validation("class masses must be positive and finite".into()));
        }
        let demand: f64 = sinr_density.iter().zip(&masses).map(|(g, m)| g * m).sum();
        if demand >= n as f64 {
            return Err(Error::Validation(format!(
                "global feasibility requires sum_l gamma_l M_l < N, got {demand} >= {n}"
            )));
        }
        let g = gains
            .iter()
            .zip(&sinr_density)
            .map(|(row, &gamma)| row.iter().map(|&h| gamma * noise_power / h).collect())
            .collect();
        Ok(Self {
            gains,
            noise_power,
            sinr_density,
            masses,
            g,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.gains.len()
    }

    pub fn num_bs(&self) -> usize {
        self.gains[0].len()
    }

    pub fn gain(&self, class: usize, bs: usize) -> f64 {
        self.gains[class][bs]
    }

    pub fn gains(&self) -> &[Vec<f64>] {
        &self.gains
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn sinr_density(&self, class: usize) -> f64 {
        self.sinr_density[class]
    }

    pub fn mass(&self, class: usize) -> f64 {
        self.masses[class]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `g_lj`, the cost density on an empty cell.
    pub fn base_cost(&self, class: usize, bs: usize) -> f64 {
        self.g[class][bs]
    }

    /// Whether `h_lj` depends only on `j`.
    pub fn collocated_mobiles(&self) -> bool {
        self.gains.iter().all(|row| row == &self.gains[0])
    }

    /// Whether `h_lj` depends only on `l`.
    pub fn collocated_bs(&self) -> bool {
        self.gains.iter().all(|row| row.iter().all(|&h| h == row[0]))
    }

    /// Total SINR mass `sum_l gamma_l M_l`.
    pub fn demand(&self) -> f64 {
        self.sinr_density.iter().zip(&self.masses).map(|(g, m)| g * m).sum()
    }

    /// Every class spread evenly over all base stations.
    pub fn uniform_profile(&self) -> CongestionProfile {
        let n = self.num_bs() as f64;
        CongestionProfile {
            masses: self.masses.iter().map(|&m| vec![m / n; self.num_bs()]).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NonatomicRepr {
    noise_power: f64,
    masses: Vec<f64>,
    sinr_density: Vec<f64>,
    /// Rows are classes, columns base stations.
    gains: Vec<Vec<f64>>,
}

impl TryFrom<NonatomicRepr> for NonatomicInstance {
    type Error = Error;

    fn try_from(r: NonatomicRepr) -> Result<Self> {
        NonatomicInstance::new(r.gains, r.noise_power, r.sinr_density, r.masses)
    }
}

impl From<NonatomicInstance> for NonatomicRepr {
    fn from(n: NonatomicInstance) -> Self {
        NonatomicRepr {
            noise_power: n.noise_power,
            masses: n.masses,
            sinr_density: n.sinr_density,
            gains: n.gains,
        }
    }
}

/// Mass `m_lj` of every class on every base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestionProfile {
    pub masses: Vec<Vec<f64>>,
}

impl CongestionProfile {
    /// Checks shape, sign and per-class conservation (relative tolerance `1e-9`).
    pub fn new(masses: Vec<Vec<f64>>, inst: &NonatomicInstance) -> Result<Self> {
        let p = Self { masses };
        p.validate(inst)?;
        Ok(p)
    }

    pub fn validate(&self, inst: &NonatomicInstance) -> Result<()> {
        if self.masses.len() != inst.num_classes() || self.masses.iter().any(|r| r.len() != inst.num_bs()) {
            return Err(Error::Validation(format!(
                "profile must be {} x {}",
                inst.num_classes(),
                inst.num_bs()
            )));
        }
        for (l, row) in self.masses.iter().enumerate() {
            if row.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
                return Err(Error::Validation(format!("class {} has a negative or non-finite mass", l + 1)));
            }
            let total: f64 = row.iter().sum();
            if (total - inst.mass(l)).abs() > 1e-9 * inst.mass(l) {
                return Err(Error::Validation(format!(
                    "class {} masses sum to {total}, expected {}",
                    l + 1,
                    inst.mass(l)
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, class: usize, bs: usize) -> f64 {
        self.masses[class][bs]
    }

    /// Aggregate loads `m_j = sum_l gamma_l m_lj`.
    pub fn loads(&self, inst: &NonatomicInstance) -> Vec<f64> {
        (0..inst.num_bs())
            .map(|j| {
                (0..inst.num_classes())
                    .map(|l| inst.sinr_density(l) * self.masses[l][j])
                    .sum()
            })
            .collect()
    }

    /// `S_j = sum_l m_lj g_lj`: the cell's power at zero interference.
    pub(crate) fn base_powers(&self, inst: &NonatomicInstance) -> Vec<f64> {
        (0..inst.num_bs())
            .map(|j| {
                (0..inst.num_classes())
                    .map(|l| self.masses[l][j] * inst.base_cost(l, j))
                    .sum()
            })
            .collect()
    }
}

/// `c_lj(m) = g_lj c(m_j)`.
pub fn cost_density(inst: &NonatomicInstance, p: &CongestionProfile, class: usize, bs: usize) -> f64 {
    inst.base_cost(class, bs) * congestion_cost(p.loads(inst)[bs])
}

/// The convex potential whose minimizers are the equilibria.
pub fn potential(inst: &NonatomicInstance, p: &CongestionProfile) -> f64 {
    let loads = p.loads(inst);
    let mut v = 0.0;
    for (j, &mj) in loads.iter().enumerate() {
        if mj >= 1.0 {
            return f64::INFINITY;
        }
        for l in 0..inst.num_classes() {
            v += inst.sinr_density(l) * p.masses[l][j] * inst.base_cost(l, j).ln();
        }
        v += integrated_log_cost(mj);
    }
    v
}

/// `C(m) = sum_j c(m_j) sum_l m_lj g_lj`.
pub fn system_cost(inst: &NonatomicInstance, p: &CongestionProfile) -> f64 {
    let loads = p.loads(inst);
    let s = p.base_powers(inst);
    loads
        .iter()
        .zip(&s)
        .map(|(&mj, &sj)| if sj == 0.0 { 0.0 } else { congestion_cost(mj) * sj })
        .sum()
}

/// `t_lj(m) = gamma_l S_j c'(m_j)`.
pub fn toll_density(inst: &NonatomicInstance, p: &CongestionProfile, class: usize, bs: usize) -> f64 {
    let sj = p.base_powers(inst)[bs];
    if sj == 0.0 {
        return 0.0;
    }
    inst.sinr_density(class) * sj * congestion_cost_marginal(p.loads(inst)[bs])
}

/// `c_lj + t_lj`, which equals `dC/dm_lj`.
pub fn tolled_cost_density(inst: &NonatomicInstance, p: &CongestionProfile, class: usize, bs: usize) -> f64 {
    cost_density(inst, p, class, bs) + toll_density(inst, p, class, bs)
}

/// Mass below which a class is considered absent from a base station.
pub(crate) fn usage_threshold(inst: &NonatomicInstance, class: usize) -> f64 {
    1e-9 * inst.mass(class)
}

fn relative_residual(
    inst: &NonatomicInstance,
    p: &CongestionProfile,
    cost: impl Fn(usize, usize) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 0..inst.num_classes() {
        let costs: Vec<f64> = (0..inst.num_bs()).map(|j| cost(l, j)).collect();
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let thr = usage_threshold(inst, l);
        for j in 0..inst.num_bs() {
            if p.masses[l][j] > thr {
                let gap = if costs[j] == min { 0.0 } else { (costs[j] - min) / min };
                worst = worst.max(gap);
            }
        }
    }
    worst
}

/// Largest relative excess cost a used (class, BS) pair pays over the
/// class's cheapest option. Zero exactly at an equilibrium.
pub fn ne_residual(inst: &NonatomicInstance, p: &CongestionProfile) -> f64 {
    let loads = p.loads(inst);
    relative_residual(inst, p, |l, j| inst.base_cost(l, j) * congestion_cost(loads[j]))
}

/// [`ne_residual`] for the tolled costs; zero exactly at stationary points of `C`.
pub fn tolled_residual(inst: &NonatomicInstance, p: &CongestionProfile) -> f64 {
    let loads = p.loads(inst);
    let s = p.base_powers(inst);
    relative_residual(inst, p, |l, j| {
        inst.base_cost(l, j) * congestion_cost(loads[j])
            + if s[j] == 0.0 {
                0.0
            } else {
                inst.sinr_density(l) * s[j] * congestion_cost_marginal(loads[j])
            }
    })
}

/// A single cell can serve SINR mass `sinr_mass` iff it is below one.
pub fn single_cell_feasible(sinr_mass: f64) -> bool {
    sinr_mass < 1.0
}

/// Pareto power density `gamma sigma^2 / (h (1 - sinr_mass))` in a single cell.
pub fn single_cell_power_density(gamma: f64, gain: f64, noise_power: f64, sinr_mass: f64) -> f64 {
    gamma * noise_power / gain * congestion_cost(sinr_mass)
}
