//! Independent oracles and seeded instance generators for integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use cellgame::{AssociationProfile, NetworkInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gain<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimal powers meeting every SINR target with equality, from the linear
/// system `h_i p_i - gamma_i sum_{k != i} h_k p_k = gamma_i sigma^2` per
/// cell. `+inf` for mobiles of a cell with no positive solution.
pub fn oracle_powers(h: &[Vec<f64>], gamma: &[f64], sigma2: f64, a: &[usize]) -> Vec<f64> {
    let n = h[0].len();
    let mut p = vec![f64::INFINITY; a.len()];
    for j in 0..n {
        let members: Vec<usize> = (0..a.len()).filter(|&i| a[i] == j).collect();
        if members.is_empty() {
            continue;
        }
        let m = members.len();
        let mut mat = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for (r, &i) in members.iter().enumerate() {
            for (c, &k) in members.iter().enumerate() {
                mat[r][c] = if r == c { h[i][j] } else { -gamma[i] * h[k][j] };
            }
            rhs[r] = gamma[i] * sigma2;
        }
        if let Some(x) = gauss(mat, rhs) {
            if x.iter().all(|v| *v > 0.0 && v.is_finite()) {
                for (r, &i) in members.iter().enumerate() {
                    p[i] = x[r];
                }
            }
        }
    }
    p
}

pub fn oracle_cost(net: &NetworkInstance, a: &[usize], mobile: usize) -> f64 {
    oracle_powers(net.gains(), net.target_sinrs(), net.noise_power(), a)[mobile]
}

/// Total power, `+inf` when any cell is overloaded.
pub fn oracle_system_cost(net: &NetworkInstance, a: &[usize]) -> f64 {
    oracle_powers(net.gains(), net.target_sinrs(), net.noise_power(), a).iter().sum()
}

/// NE check on oracle costs: no mobile gains more than `rel` by moving.
pub fn oracle_is_nash(net: &NetworkInstance, a: &[usize], rel: f64) -> bool {
    for i in 0..a.len() {
        let now = oracle_cost(net, a, i);
        for j in 0..net.num_bs() {
            if j == a[i] {
                continue;
            }
            let mut b = a.to_vec();
            b[i] = j;
            let alt = oracle_cost(net, &b, i);
            if alt.is_finite() && (now.is_infinite() || alt < now * (1.0 - rel)) {
                return false;
            }
        }
    }
    true
}

/// SINR achieved by `p` under profile `a`, computed directly.
pub fn sinr(net: &NetworkInstance, a: &[usize], p: &[f64], mobile: usize) -> f64 {
    let j = a[mobile];
    let interference: f64 = (0..a.len())
        .filter(|&k| k != mobile && a[k] == j)
        .map(|k| net.gain(k, j) * p[k])
        .sum();
    net.gain(mobile, j) * p[mobile] / (net.noise_power() + interference)
}

/// Random instance with `m` mobiles and `n` cells, SINRs in `[lo, hi)`.
pub fn random_network<R: Rng>(rng: &mut R, m: usize, n: usize, lo: f64, hi: f64) -> NetworkInstance {
    let gains = (0..m).map(|_| (0..n).map(|_| gain(rng)).collect()).collect();
    let sinr = (0..m).map(|_| rng.gen_range(lo..hi)).collect();
    NetworkInstance::new(gains, 1.0, sinr).unwrap()
}

pub fn single_class<R: Rng>(rng: &mut R, m: usize, n: usize) -> NetworkInstance {
    let gains = (0..m).map(|_| (0..n).map(|_| gain(rng)).collect()).collect();
    let g = rng.gen_range(0.05..0.8);
    NetworkInstance::new(gains, 1.0, vec![g; m]).unwrap()
}

pub fn collocated_mobiles<R: Rng>(rng: &mut R, m: usize, n: usize, single_class: bool) -> NetworkInstance {
    let row: Vec<f64> = (0..n).map(|_| gain(rng)).collect();
    let g0 = rng.gen_range(0.05..0.8);
    let sinr = (0..m).map(|_| if single_class { g0 } else { rng.gen_range(0.05..0.8) }).collect();
    NetworkInstance::new(vec![row; m], 1.0, sinr).unwrap()
}

pub fn collocated_bs<R: Rng>(rng: &mut R, m: usize, n: usize) -> NetworkInstance {
    let gains = (0..m).map(|_| vec![gain(rng); n]).collect();
    let sinr = (0..m).map(|_| rng.gen_range(0.05..0.8)).collect();
    NetworkInstance::new(gains, 1.0, sinr).unwrap()
}

/// `h_ij = h` for all pairs.
pub fn symmetric<R: Rng>(rng: &mut R, m: usize, n: usize) -> NetworkInstance {
    let h = gain(rng);
    let sinr = (0..m).map(|_| rng.gen_range(0.05..0.8)).collect();
    NetworkInstance::new(vec![vec![h; n]; m], 1.0, sinr).unwrap()
}

pub fn random_profile<R: Rng>(rng: &mut R, net: &NetworkInstance) -> AssociationProfile {
    let a = (0..net.num_mobiles()).map(|_| rng.gen_range(0..net.num_bs())).collect();
    net.profile(a).unwrap()
}

pub fn all_profiles(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
