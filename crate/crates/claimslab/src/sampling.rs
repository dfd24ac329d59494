//! Seeded samplers for problems, weights, and weight pairs.
//!
//! Everything here is deterministic given a seed; the checkers and the CLI
//! embed the seed in their reports so every run can be reproduced exactly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core::{ClaimsProblem, WeightVector};

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Interior simplex point via normalized exponentials, rejecting vectors
/// with a component below 1e-3 so downstream ratios stay tame.
pub fn sample_weight<R: Rng>(rng: &mut R, n: usize) -> WeightVector {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12..1.0_f64).ln()).collect();
        let w = WeightVector::normalized(&raw).expect("positive by construction");
        if w.as_slice().iter().all(|&x| x >= 1e-3) {
            return w;
        }
    }
}

/// Wellformed problem with a desk-scale endowment and claims spread over
/// two orders of magnitude.
pub fn sample_wellformed_problem<R: Rng>(rng: &mut R, n: usize) -> ClaimsProblem {
    loop {
        let endowment = rng.gen_range(0.5..10.0);
        let claims: Vec<f64> = (0..n)
            .map(|_| {
                let magnitude = 10f64.powf(rng.gen_range(-1.5..1.0));
                endowment * magnitude
            })
            .collect();
        let total: f64 = claims.iter().sum();
        if total >= endowment {
            return ClaimsProblem::new(endowment, claims).unwrap();
        }
    }
}

/// Hand-picked problems exercising every interesting region: claim ties,
/// zero claims, boundary totals, one-small/one-large splits, and the
/// non-wellformed pass-through case.
pub fn structured_problems(n: usize) -> Vec<ClaimsProblem> {
    let mut out = Vec::new();
    let mk = |e: f64, c: Vec<f64>| ClaimsProblem::new(e, c).unwrap();
    if n == 3 {
        out.extend([
            mk(6.0, vec![1.0, 4.0, 4.0]),
            mk(6.0, vec![4.0, 4.0, 4.0]),
            mk(6.0, vec![2.0, 4.0, 6.0]),
            mk(6.0, vec![1.0, 4.0, 5.0]),
            mk(6.0, vec![1.0, 3.0, 5.0]),
            mk(6.0, vec![1.0, 1.0, 5.0]),
            mk(6.0, vec![1.9, 1.9, 5.0]),
            mk(6.0, vec![5.0, 3.0, 1.0]),
            mk(6.0, vec![4.0, 1.0, 1.0]),
            mk(6.0, vec![10.0, 5.0, 5.0]),
            mk(5.0, vec![10.0, 1.0, 0.5]),
            mk(10.0, vec![1.0, 2.0, 3.0]),
            mk(1.0, vec![0.5, 0.3, 0.6]),
            mk(12.0, vec![9.0, 3.0, 2.0]),
            mk(9.0, vec![3.0, 3.0, 3.0]),
            mk(9.0, vec![27.0, 3.0, 3.0]),
            mk(1.0, vec![0.3, 0.5, 0.3]),
        ]);
    }
    let e = 6.0;
    let nf = n as f64;
    // Equal claims above, at, and below the per-head endowment.
    out.push(mk(e, vec![1.5 * e / nf; n]));
    out.push(mk(e, vec![e / nf; n]));
    out.push(mk(e, vec![e / (2.0 * nf); n]));
    // One small claimant against large ones, and the reverse.
    let mut small_first = vec![e / 2.0; n];
    small_first[0] = e / (3.0 * nf);
    out.push(mk(e, small_first));
    let mut large_first = vec![e / (2.0 * nf); n];
    large_first[0] = 3.0 * e;
    out.push(mk(e, large_first));
    // Ramp and a zero claim.
    out.push(mk(e, (0..n).map(|i| e * (i + 1) as f64 / nf).collect()));
    let mut zero_first = vec![e; n];
    zero_first[0] = 0.0;
    out.push(mk(e, zero_first));
    out
}

/// All permutations of `0..n` (intended for small `n`).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let item = rest.remove(k);
            prefix.push(item);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(k, item);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// Partner weight sharing the `index`-deleted direction with `u` (scaled by
/// `t`), with the deleted component absorbing the slack.
pub fn shared_direction_partner(u: &WeightVector, index: usize, t: f64) -> Option<WeightVector> {
    let rest: f64 = u.without(index).iter().sum();
    let pivot = 1.0 - t * rest;
    if pivot <= 1e-6 {
        return None;
    }
    let mut v: Vec<f64> = u.as_slice().iter().map(|&x| t * x).collect();
    v[index] = pivot;
    WeightVector::new(v).ok()
}

/// Partner forming a cross-ratio (`i`,`j`) pair with `u`: the remainder is
/// scaled by `t` and the freed mass is split so the defining strict
/// inequalities hold.
pub fn cross_ratio_partner(
    u: &WeightVector,
    i: usize,
    j: usize,
    t_raw: f64,
) -> Option<WeightVector> {
    let n = u.len();
    if i == j || i >= n || j >= n || n < 3 {
        return None;
    }
    let rest: f64 = (0..n)
        .filter(|k| *k != i && *k != j)
        .map(|k| u.get(k))
        .sum();
    // Keep the freed mass strictly positive after paying t*u_i.
    let t = t_raw.min(0.95 / (rest + u.get(i)));
    if t <= 0.0 {
        return None;
    }
    let freed = 1.0 - t * rest;
    let vj = 0.5 * (t * u.get(j)).min(freed - t * u.get(i));
    if vj <= 1e-9 {
        return None;
    }
    let vi = freed - vj;
    let mut v = vec![0.0; n];
    for k in 0..n {
        if k != i && k != j {
            v[k] = t * u.get(k);
        }
    }
    v[i] = vi;
    v[j] = vj;
    WeightVector::new(v).ok()
}

/// Seeded weight pairs mixing independent draws with constructed
/// shared-direction and cross-ratio partners, so relation tests exercise
/// both the populated and the empty branches.
pub fn mixed_weight_pairs(n: usize, count: usize, seed: u64) -> Vec<(WeightVector, WeightVector)> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = sample_weight(&mut rng, n);
        let pair = match out.len() % 3 {
            0 => {
                let v = sample_weight(&mut rng, n);
                if v == u {
                    continue;
                }
                (u, v)
            }
            1 => {
                let idx = rng.gen_range(0..n);
                let t = rng.gen_range(0.6..1.3);
                match shared_direction_partner(&u, idx, t) {
                    Some(v) if v != u => (u, v),
                    _ => continue,
                }
            }
            _ => {
                let i = rng.gen_range(0..n);
                let j = (i + 1 + rng.gen_range(0..n - 1)) % n;
                let t = rng.gen_range(0.85..1.15);
                match cross_ratio_partner(&u, i, j, t) {
                    Some(v) if v != u => (u, v),
                    _ => continue,
                }
            }
        };
        out.push(pair);
    }
    out
}

/// Candidate weights for independent-set construction: alternates fresh
/// draws with partners related to earlier candidates, so the greedy filter
/// has real work to do.
pub fn candidate_pool(n: usize, count: usize, seed: u64) -> Vec<WeightVector> {
    let mut rng = rng(seed);
    let mut out: Vec<WeightVector> = Vec::with_capacity(count);
    while out.len() < count {
        if out.len() % 2 == 0 || out.is_empty() {
            let w = sample_weight(&mut rng, n);
            if !out.contains(&w) {
                out.push(w);
            }
        } else {
            let base = out[rng.gen_range(0..out.len())].clone();
            let made = if rng.gen_bool(0.5) {
                shared_direction_partner(&base, rng.gen_range(0..n), rng.gen_range(0.6..1.3))
            } else {
                let i = rng.gen_range(0..n);
                let j = (i + 1 + rng.gen_range(0..n - 1)) % n;
                cross_ratio_partner(&base, i, j, rng.gen_range(0.85..1.15))
            };
            match made {
                Some(w) if !out.contains(&w) => out.push(w),
                _ => continue,
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_interior_simplex_points() {
        let mut r = rng(7);
        for n in [2usize, 3, 5, 8] {
            let w = sample_weight(&mut r, n);
            assert_eq!(w.len(), n);
            assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_problems_are_wellformed() {
        let mut r = rng(11);
        for _ in 0..100 {
            let p = sample_wellformed_problem(&mut r, 3);
            assert!(p.is_wellformed());
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn same_seed_same_pairs() {
        let a = mixed_weight_pairs(4, 20, 99);
        let b = mixed_weight_pairs(4, 20, 99);
        assert_eq!(a, b);
    }
}
