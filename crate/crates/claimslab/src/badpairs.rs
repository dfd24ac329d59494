//! Relations on weight pairs, impossibility witnesses, and independent sets.
//!
//! A problem is a member of the deviation relation for a weight when one
//! claimant can be seen as having inflated a proportional profile: all other
//! claims are a common multiple of the weight, the inflater's claim strictly
//! exceeds its proportional level, and the endowment covers the proportional
//! profile. Two weights clash when a single problem is a member for both;
//! [`impossibility_witness`] constructs such a problem for cross-ratio
//! ("bad") pairs, and [`common_d_witness`] realizes the identity
//! "bad or shared-direction  ==  some common member problem".

use serde::Serialize;

use crate::core::{is_parallel, without, ClaimsProblem, WeightVector, PARALLEL_TOL};
use crate::{Error, Result};

/// Strictness guard for the inflater's claim, relative to claim scale.
const STRICT_TOL: f64 = 1e-9;

/// Result of testing a problem for deviation-relation membership.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DMembership {
    pub member: bool,
    /// The inflating claimant, when a member.
    pub witness_index: Option<usize>,
    /// The proportional claim the inflater deviated from.
    pub reduced_claim: Option<f64>,
    /// The multiple relating the other claims to the weight.
    pub scale: Option<f64>,
}

impl DMembership {
    fn none() -> Self {
        Self {
            member: false,
            witness_index: None,
            reduced_claim: None,
            scale: None,
        }
    }
}

/// A constructed problem on which two weights force contradictory awards.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessProblem {
    pub problem: ClaimsProblem,
    pub pair: (WeightVector, WeightVector),
    pub indices: (usize, usize),
    pub forced_award_u: Vec<f64>,
    pub forced_award_v: Vec<f64>,
    /// Minimum endowments activating each side's forcing.
    pub thresholds: (f64, f64),
}

/// Tests whether `problem` is a member of the deviation relation for `w`.
///
/// Scans each claimant `i`, fits the remaining claims against the remaining
/// weights, and accepts when the fitted proportional claim is strictly below
/// the actual one and the endowment covers the proportional profile.
pub fn d_member(problem: &ClaimsProblem, w: &WeightVector) -> DMembership {
    let n = problem.claimant_count();
    if w.len() != n {
        return DMembership::none();
    }
    let e = problem.endowment;
    for i in 0..n {
        let others = without(&problem.claims, i);
        let (ok, scale) = is_parallel(&others, &w.without(i), PARALLEL_TOL);
        if !ok {
            continue;
        }
        let scale = scale.unwrap();
        let reduced = scale * w.get(i);
        let claim = problem.claims[i];
        let strict = reduced < claim - STRICT_TOL * (1.0 + claim.abs());
        let others_total: f64 = others.iter().sum();
        let covered = e + 1e-12 * (1.0 + e) >= others_total + reduced;
        if strict && covered {
            return DMembership {
                member: true,
                witness_index: Some(i),
                reduced_claim: Some(reduced),
                scale: Some(scale),
            };
        }
    }
    DMembership::none()
}

/// True when deleting some coordinate leaves the two weights parallel;
/// returns the first such coordinate.
pub fn is_b_prime(u: &WeightVector, v: &WeightVector) -> (bool, Option<usize>) {
    assert_eq!(u.len(), v.len());
    for i in 0..u.len() {
        let (ok, _) = is_parallel(&u.without(i), &v.without(i), PARALLEL_TOL);
        if ok {
            return (true, Some(i));
        }
    }
    (false, None)
}

/// Tests the cross-ratio condition at a fixed ordered index pair.
pub fn is_bad_pair_at(u: &WeightVector, v: &WeightVector, i: usize, j: usize) -> bool {
    if i == j || i >= u.len() || j >= u.len() || u.len() != v.len() {
        return false;
    }
    let drop2 = |w: &WeightVector| -> Vec<f64> {
        (0..w.len())
            .filter(|k| *k != i && *k != j)
            .map(|k| w.get(k))
            .collect()
    };
    let u_rest = drop2(u);
    let v_rest = drop2(v);
    let (ok, _) = is_parallel(&u_rest, &v_rest, PARALLEL_TOL);
    if !ok {
        return false;
    }
    let su: f64 = u_rest.iter().sum();
    let sv: f64 = v_rest.iter().sum();
    u.get(i) * sv < v.get(i) * su && u.get(j) * sv > v.get(j) * su
}

/// Scans ordered index pairs lexicographically for the cross-ratio
/// condition: remainders parallel, head strictly cheaper under `u`, tail
/// strictly richer.
pub fn is_bad_pair(u: &WeightVector, v: &WeightVector) -> (bool, Option<(usize, usize)>) {
    assert_eq!(u.len(), v.len());
    let n = u.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && is_bad_pair_at(u, v, i, j) {
                return (true, Some((i, j)));
            }
        }
    }
    (false, None)
}

/// Builds the clash problem for an (`i`,`j`)-bad pair.
///
/// The shared remainder is taken at scale one; the two special claims are
/// set to each other's proportional levels, and the endowment is the larger
/// of the two activation thresholds. Each weight then forces a different
/// award (they disagree at index `i` by exactly total-claims minus
/// endowment).
pub fn impossibility_witness(
    u: &WeightVector,
    v: &WeightVector,
    i: usize,
    j: usize,
) -> Result<WitnessProblem> {
    if !is_bad_pair_at(u, v, i, j) {
        return Err(Error::NotBadPair { i, j });
    }
    let n = u.len();
    let su: f64 = (0..n)
        .filter(|k| *k != i && *k != j)
        .map(|k| u.get(k))
        .sum();
    let sv: f64 = (0..n)
        .filter(|k| *k != i && *k != j)
        .map(|k| v.get(k))
        .sum();
    let scale_v = su / sv;

    let mut claims = vec![0.0; n];
    for k in 0..n {
        if k != i && k != j {
            claims[k] = u.get(k);
        }
    }
    claims[i] = scale_v * v.get(i);
    claims[j] = u.get(j);

    let sum_minus = |claims: &[f64], skip: usize| -> f64 {
        claims
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, &c)| c)
            .sum()
    };
    let threshold_u = sum_minus(&claims, i) + u.get(i);
    let threshold_v = sum_minus(&claims, j) + scale_v * v.get(j);
    let endowment = threshold_u.max(threshold_v);
    let total: f64 = claims.iter().sum();
    debug_assert!(endowment < total, "badness guarantees strict shortage");

    let mut forced_u = claims.clone();
    forced_u[i] = endowment - sum_minus(&claims, i);
    let mut forced_v = claims.clone();
    forced_v[j] = endowment - sum_minus(&claims, j);

    Ok(WitnessProblem {
        problem: ClaimsProblem::new(endowment, claims)?,
        pair: (u.clone(), v.clone()),
        indices: (i, j),
        forced_award_u: forced_u,
        forced_award_v: forced_v,
        thresholds: (threshold_u, threshold_v),
    })
}

/// Searches for a problem that is a deviation-relation member for both
/// weights. Exists exactly when the pair is bad (either orientation) or
/// shares a deleted-coordinate direction.
pub fn common_d_witness(u: &WeightVector, v: &WeightVector) -> Option<ClaimsProblem> {
    if let (true, Some((i, j))) = is_bad_pair(u, v) {
        return impossibility_witness(u, v, i, j).ok().map(|w| w.problem);
    }
    if let (true, Some((i, j))) = is_bad_pair(v, u) {
        return impossibility_witness(v, u, i, j).ok().map(|w| w.problem);
    }
    if let (true, Some(i)) = is_b_prime(u, v) {
        let (_, scale) = is_parallel(&u.without(i), &v.without(i), PARALLEL_TOL);
        let scale = scale.unwrap_or(1.0);
        let top = u.get(i).max(scale * v.get(i));
        let mut claims: Vec<f64> = u.as_slice().to_vec();
        claims[i] = 2.0 * top;
        let rest: f64 = u.without(i).iter().sum();
        let endowment = rest + top;
        return ClaimsProblem::new(endowment, claims).ok();
    }
    None
}

/// Greedy scan keeping each candidate that clashes with none of the kept
/// ones (bad in either orientation, or shared-direction). Maximal within
/// the candidate list; input order preserved.
pub fn greedy_independent_set(candidates: &[WeightVector]) -> Vec<WeightVector> {
    let mut kept: Vec<WeightVector> = Vec::new();
    for w in candidates {
        let clashes = kept.iter().any(|k| {
            is_bad_pair(w, k).0 || is_bad_pair(k, w).0 || is_b_prime(w, k).0
        });
        if !clashes {
            kept.push(w.clone());
        }
    }
    kept
}

/// Counts members of `set` whose (`i`,`j`)-deleted remainder is parallel to
/// the direction `p`. Any clash-free family meets each such line at most
/// once.
pub fn line_intersection_probe(
    set: &[WeightVector],
    i: usize,
    j: usize,
    p: &[f64],
) -> usize {
    set.iter()
        .filter(|w| {
            let rest: Vec<f64> = (0..w.len())
                .filter(|k| *k != i && *k != j)
                .map(|k| w.get(k))
                .collect();
            rest.len() == p.len() && is_parallel(&rest, p, PARALLEL_TOL).0
        })
        .count()
}
