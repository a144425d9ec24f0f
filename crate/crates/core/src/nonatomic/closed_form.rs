//! Closed-form splits of a single class between two base stations.

use crate::error::{Error, Result};

fn check(h1: f64, h2: f64, gamma: f64, mass: f64) -> Result<f64> {
    for (name, v) in [("h1", h1), ("h2", h2), ("gamma", gamma), ("mass", mass)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let x = gamma * mass;
    if x >= 2.0 {
        return Err(Error::Validation(format!(
            "infeasible instance: gamma * mass = {x} must stay below the number of base stations (2)"
        )));
    }
    Ok(x)
}

/// Fraction on BS 1 equalizing `r_j (1 - m_j)` across both cells, with the
/// corner cases where one cell alone is cheaper even when fully loaded.
fn split(r1: f64, r2: f64, x: f64) -> f64 {
    if r1 / r2 <= 1.0 - x {
        0.0
    } else if r2 / r1 <= 1.0 - x {
        1.0
    } else {
        (r1 - r2 + x * r2) / ((r1 + r2) * x)
    }
}

/// Equilibrium share `alpha*` of the mass on BS 1.
pub fn two_bs_ne_fraction(h1: f64, h2: f64, gamma: f64, mass: f64) -> Result<f64> {
    let x = check(h1, h2, gamma, mass)?;
    Ok(split(h1, h2, x))
}

/// System-optimal share `alpha^o` on BS 1: the same split on `sqrt(h)`.
pub fn two_bs_opt_fraction(h1: f64, h2: f64, gamma: f64, mass: f64) -> Result<f64> {
    let x = check(h1, h2, gamma, mass)?;
    Ok(split(h1.sqrt(), h2.sqrt(), x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(two_bs_ne_fraction(1.0, 0.5, 0.01, 20.0).unwrap(), 1.0);
        assert!((two_bs_ne_fraction(1.0, 0.5, 0.01, 60.0).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!((two_bs_opt_fraction(1.0, 0.5, 0.01, 60.0).unwrap() - 0.70017).abs() < 1e-5);
        assert_eq!(two_bs_ne_fraction(0.7, 0.7, 0.01, 30.0).unwrap(), 0.5);
        assert_eq!(two_bs_opt_fraction(0.7, 0.7, 0.01, 30.0).unwrap(), 0.5);
        assert_eq!(two_bs_ne_fraction(0.5, 1.0, 0.01, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn interior_fractions_equalize_costs() {
        let (h1, h2, gamma, mass) = (1.0, 0.7, 0.02, 40.0);
        let a = two_bs_ne_fraction(h1, h2, gamma, mass).unwrap();
        let c1 = 1.0 / (h1 * (1.0 - a * gamma * mass));
        let c2 = 1.0 / (h2 * (1.0 - (1.0 - a) * gamma * mass));
        assert!((c1 - c2).abs() < 1e-12);
        let o = two_bs_opt_fraction(h1, h2, gamma, mass).unwrap();
        let k1 = h1.sqrt() * (1.0 - o * gamma * mass);
        let k2 = h2.sqrt() * (1.0 - (1.0 - o) * gamma * mass);
        assert!((k1 - k2).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(two_bs_ne_fraction(1.0, 0.5, 0.01, 200.0), Err(Error::Validation(_))));
        assert!(matches!(two_bs_opt_fraction(0.0, 0.5, 0.01, 20.0), Err(Error::Domain(_))));
        // Above one cell's capacity the split is still interior.
        let a = two_bs_ne_fraction(1.0, 0.5, 0.01, 150.0).unwrap();
        assert!(a > 0.0 && a < 1.0);
    }
}
