//! Domain types, the rule contract, and the cap-balancing solver.
//!
//! Every rule must satisfy three conditions relative to its input problem:
//!
//! 1. if total claims exceed the endowment, awards sum to the endowment;
//! 2. if total claims fit within the endowment, awards equal claims;
//! 3. no award exceeds its claim.
//!
//! [`check_rule_contract`] verifies the three in the order (3), (1), (2).
//! [`solve_cap_lambda`] balances any monotone cap family by bracketing and
//! bisection; [`water_fill`] is the exact closed form for caps that are
//! linear in the balancing scalar. The two must agree and are cross-checked
//! in the test suite.

use serde::Serialize;

use crate::{Error, Result};

/// Relative tolerance for the balancing residual of the cap solver.
pub const BALANCE_TOL: f64 = 1e-12;
/// Relative tolerance for contract checks and award comparisons.
pub const CONTRACT_TOL: f64 = 1e-9;
/// Relative tolerance for parallelism tests.
pub const PARALLEL_TOL: f64 = 1e-9;

/// Award/contract tolerance at endowment scale `e`.
pub fn award_tol(e: f64) -> f64 {
    CONTRACT_TOL * (1.0 + e)
}

/// Balancing-residual tolerance at endowment scale `e`.
pub fn balance_tol(e: f64) -> f64 {
    BALANCE_TOL * (1.0 + e)
}

/// An endowment together with one nonnegative claim per claimant.
///
/// Problems are not required to be wellformed (claims may sum to less than
/// the endowment); rules answer claims verbatim in that case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimsProblem {
    pub endowment: f64,
    pub claims: Vec<f64>,
}

impl ClaimsProblem {
    pub fn new(endowment: f64, claims: Vec<f64>) -> Result<Self> {
        if !endowment.is_finite() || endowment < 0.0 {
            return Err(Error::InvalidProblem(format!(
                "endowment must be finite and nonnegative, got {endowment}"
            )));
        }
        if claims.len() < 2 {
            return Err(Error::InvalidProblem(format!(
                "need at least 2 claimants, got {}",
                claims.len()
            )));
        }
        if let Some(bad) = claims.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidProblem(format!(
                "claims must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self { endowment, claims })
    }

    pub fn claimant_count(&self) -> usize {
        self.claims.len()
    }

    pub fn total_claims(&self) -> f64 {
        self.claims.iter().sum()
    }

    /// True when total claims cover the endowment (exact comparison).
    pub fn is_wellformed(&self) -> bool {
        self.total_claims() >= self.endowment
    }

    /// Same problem with every quantity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            endowment: self.endowment * factor,
            claims: self.claims.iter().map(|c| c * factor).collect(),
        }
    }

    /// Same problem with claimant `index` demanding `claim` instead.
    pub fn with_claim(&self, index: usize, claim: f64) -> Self {
        let mut claims = self.claims.clone();
        claims[index] = claim;
        Self {
            endowment: self.endowment,
            claims,
        }
    }
}

/// A strictly positive vector summing to one; indexes a family of rules
/// and axioms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidWeight(format!(
                "need at least 2 components, got {}",
                weights.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidWeight(format!(
                "components must be strictly positive, got {bad}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeight(format!(
                "components must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(Self { weights })
    }

    /// Equal weights over `n` claimants.
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Normalizes a strictly positive vector onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidWeight("need at least 2 components".into()));
        }
        if raw.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidWeight(
                "components must be strictly positive".into(),
            ));
        }
        let total: f64 = raw.iter().sum();
        Ok(Self {
            weights: raw.iter().map(|w| w / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Components with index `i` removed, order preserved.
    pub fn without(&self, i: usize) -> Vec<f64> {
        without(&self.weights, i)
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.weights[0];
        self.weights.iter().all(|w| (w - first).abs() <= 1e-12)
    }

    /// Reindexed copy: component `i` becomes the old component `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            weights: perm.iter().map(|&j| self.weights[j]).collect(),
        }
    }
}

/// A rule's output: one award per claimant plus the balancing scalar when
/// the rule used one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AwardVector {
    pub awards: Vec<f64>,
    pub lambda: Option<f64>,
}

impl AwardVector {
    pub fn new(awards: Vec<f64>, lambda: Option<f64>) -> Self {
        Self { awards, lambda }
    }

    pub fn total(&self) -> f64 {
        self.awards.iter().sum()
    }
}

/// Outcome of checking a rule output against the three contract equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractReport {
    pub passed: bool,
    pub violated_equation: Option<u8>,
    pub offending_index: Option<usize>,
    pub discrepancy: f64,
}

impl ContractReport {
    fn pass() -> Self {
        Self {
            passed: true,
            violated_equation: None,
            offending_index: None,
            discrepancy: 0.0,
        }
    }

    fn fail(equation: u8, index: Option<usize>, discrepancy: f64) -> Self {
        Self {
            passed: false,
            violated_equation: Some(equation),
            offending_index: index,
            discrepancy,
        }
    }
}

/// Checks a rule output against the contract, reporting the first violated
/// equation in the order (3), (1), (2).
pub fn check_rule_contract(
    output: &AwardVector,
    problem: &ClaimsProblem,
    tol: f64,
) -> Result<ContractReport> {
    if output.awards.len() != problem.claims.len() {
        return Err(Error::DimensionMismatch {
            left: output.awards.len(),
            right: problem.claims.len(),
        });
    }
    // Equation (3): awards never exceed claims.
    for (i, (&z, &c)) in output.awards.iter().zip(&problem.claims).enumerate() {
        if z > c + tol {
            return Ok(ContractReport::fail(3, Some(i), z - c));
        }
    }
    let total_claims = problem.total_claims();
    let total_awards = output.total();
    if total_claims > problem.endowment {
        // Equation (1): awards balance the endowment.
        let residual = (total_awards - problem.endowment).abs();
        if residual > tol {
            return Ok(ContractReport::fail(1, None, residual));
        }
    } else {
        // Equation (2): supply covers all claims, so awards equal claims.
        for (i, (&z, &c)) in output.awards.iter().zip(&problem.claims).enumerate() {
            if (z - c).abs() > tol {
                return Ok(ContractReport::fail(2, Some(i), (z - c).abs()));
            }
        }
    }
    Ok(ContractReport::pass())
}

/// Largest bracketing value tried before the cap family is declared
/// non-bracketable.
const MAX_BRACKET: f64 = 1.8446744073709552e19; // 2^64

/// Balances a monotone cap family: finds the scalar at which the capped
/// claims sum to the endowment.
///
/// `cap_at(i, lambda)` must be nondecreasing and continuous in `lambda`,
/// zero at zero, and eventually at least `claims[i]`. Total claims must
/// exceed the endowment. The residual at the returned scalar is within
/// `1e-12 * (1 + endowment)`.
pub fn solve_cap_lambda<F>(cap_at: F, problem: &ClaimsProblem) -> Result<(f64, AwardVector)>
where
    F: Fn(usize, f64) -> f64,
{
    let e = problem.endowment;
    if problem.total_claims() <= e {
        return Err(Error::Solver(
            "total claims must exceed the endowment".into(),
        ));
    }
    if e == 0.0 {
        // Forced by balance and claim bounds.
        let awards = vec![0.0; problem.claimant_count()];
        return Ok((0.0, AwardVector::new(awards, Some(0.0))));
    }
    let capped_sum = |lambda: f64| -> f64 {
        problem
            .claims
            .iter()
            .enumerate()
            .map(|(i, &c)| c.min(cap_at(i, lambda)))
            .sum()
    };
    let tol = balance_tol(e);

    let mut hi = 1.0_f64;
    while capped_sum(hi) < e {
        hi *= 2.0;
        if hi > MAX_BRACKET {
            return Err(Error::Solver(format!(
                "non-bracketable: capped sum is {} at lambda 2^64, endowment {}",
                capped_sum(MAX_BRACKET),
                e
            )));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = capped_sum(mid);
        if (s - e).abs() <= tol {
            let awards: Vec<f64> = problem
                .claims
                .iter()
                .enumerate()
                .map(|(i, &c)| c.min(cap_at(i, mid)))
                .collect();
            return Ok((mid, AwardVector::new(awards, Some(mid))));
        }
        if s < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Solver(format!(
        "bisection stalled: residual {} exceeds tolerance {} (cap family may be discontinuous)",
        (capped_sum(0.5 * (lo + hi)) - e).abs(),
        tol
    )))
}

/// Exact closed form for caps `lambda * slopes[i]`: sorts the claim/slope
/// breakpoints and fills until the endowment is exhausted.
///
/// Claimants whose slope is zero (or not positive) never receive anything;
/// the remaining claims must be able to absorb the endowment. Requires
/// total claims strictly above the endowment.
pub fn water_fill(endowment: f64, claims: &[f64], slopes: &[f64]) -> Result<(f64, Vec<f64>)> {
    if claims.len() != slopes.len() {
        return Err(Error::DimensionMismatch {
            left: claims.len(),
            right: slopes.len(),
        });
    }
    let total: f64 = claims.iter().sum();
    if total <= endowment {
        return Err(Error::Solver(
            "total claims must exceed the endowment".into(),
        ));
    }
    let n = claims.len();
    if endowment == 0.0 {
        return Ok((0.0, vec![0.0; n]));
    }

    // Active claimants, sorted by the level at which their claim binds.
    let mut active: Vec<usize> = (0..n).filter(|&i| slopes[i] > 0.0).collect();
    let servable: f64 = active.iter().map(|&i| claims[i]).sum();
    if servable <= endowment {
        return Err(Error::Solver(
            "claims reachable through positive slopes cannot absorb the endowment".into(),
        ));
    }
    let ratio = |i: usize| -> f64 {
        if slopes[i].is_infinite() {
            0.0
        } else {
            claims[i] / slopes[i]
        }
    };
    active.sort_by(|&a, &b| ratio(a).partial_cmp(&ratio(b)).unwrap());

    let mut served = 0.0_f64;
    for (pos, &k) in active.iter().enumerate() {
        // Slope mass of everyone not yet capped, summed fresh for accuracy.
        let mass: f64 = active[pos..].iter().map(|&i| slopes[i]).sum();
        let level = ratio(k);
        if served + level * mass >= endowment {
            let lambda = (endowment - served) / mass;
            let awards: Vec<f64> = (0..n)
                .map(|i| {
                    if slopes[i] <= 0.0 {
                        0.0
                    } else if slopes[i].is_infinite() {
                        claims[i]
                    } else {
                        claims[i].min(lambda * slopes[i])
                    }
                })
                .collect();
            return Ok((lambda, awards));
        }
        served += claims[k];
    }
    unreachable!("servable claims exceed the endowment, so some segment must bind");
}

/// Tests whether `x` is a nonnegative multiple of `y`.
///
/// Returns the least-squares scale when the fit holds componentwise within
/// `rel_tol * (1 + max|x|)`. Empty and all-zero vectors are parallel by
/// convention (scale 0); singletons are parallel whenever `y` is positive.
pub fn is_parallel(x: &[f64], y: &[f64], rel_tol: f64) -> (bool, Option<f64>) {
    assert_eq!(x.len(), y.len(), "parallelism needs equal lengths");
    let sum_yy: f64 = y.iter().map(|v| v * v).sum();
    if sum_yy == 0.0 {
        // y is zero (or empty): only the zero x is a multiple of it.
        return if x.iter().all(|v| *v == 0.0) {
            (true, Some(0.0))
        } else {
            (false, None)
        };
    }
    let sum_xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let scale = (sum_xy / sum_yy).max(0.0);
    let x_max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let band = rel_tol * (1.0 + x_max);
    let ok = x
        .iter()
        .zip(y)
        .all(|(a, b)| (a - scale * b).abs() <= band);
    if ok {
        (true, Some(scale))
    } else {
        (false, None)
    }
}

/// Slice with index `i` removed, order preserved.
pub fn without(v: &[f64], i: usize) -> Vec<f64> {
    v.iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, &x)| x)
        .collect()
}

/// Largest absolute componentwise difference.
pub fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;

    fn problem(e: f64, claims: &[f64]) -> ClaimsProblem {
        ClaimsProblem::new(e, claims.to_vec()).unwrap()
    }

    #[test]
    fn wellformedness() {
        assert!(problem(6.0, &[1.0, 4.0, 4.0]).is_wellformed());
        assert!(!problem(10.0, &[1.0, 2.0, 3.0]).is_wellformed());
        // Boundary: total claims equal the endowment.
        assert!(problem(6.0, &[1.0, 2.0, 3.0]).is_wellformed());
    }

    #[test]
    fn contract_passes_on_balanced_feasible_output() {
        let p = problem(6.0, &[1.0, 4.0, 4.0]);
        let out = AwardVector::new(vec![1.0, 2.5, 2.5], None);
        let report = check_rule_contract(&out, &p, award_tol(6.0)).unwrap();
        assert!(report.passed);
        assert_eq!(report.violated_equation, None);
    }

    #[test]
    fn contract_flags_claim_bound_first() {
        let p = problem(5.0, &[10.0, 1.0, 0.5]);
        let out = AwardVector::new(vec![1.0, 1.0, 3.0], None);
        let report = check_rule_contract(&out, &p, award_tol(5.0)).unwrap();
        assert!(!report.passed);
        assert_eq!(report.violated_equation, Some(3));
        assert_eq!(report.offending_index, Some(2));
        assert!((report.discrepancy - 2.5).abs() < 1e-12);
    }

    #[test]
    fn contract_passes_when_supply_covers_claims() {
        let p = problem(10.0, &[1.0, 2.0, 3.0]);
        let out = AwardVector::new(vec![1.0, 2.0, 3.0], None);
        let report = check_rule_contract(&out, &p, award_tol(10.0)).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn contract_rejects_dimension_mismatch() {
        let p = problem(6.0, &[1.0, 4.0, 4.0]);
        let out = AwardVector::new(vec![1.0, 2.0], None);
        assert!(check_rule_contract(&out, &p, 1e-9).is_err());
    }

    #[test]
    fn cap_solver_equal_shares() {
        let p = problem(6.0, &[1.0, 4.0, 4.0]);
        let (lambda, out) = solve_cap_lambda(|_, l| l / 3.0, &p).unwrap();
        assert!((lambda - 7.5).abs() < 1e-9);
        for (z, want) in out.awards.iter().zip([1.0, 2.5, 2.5]) {
            assert!((z - want).abs() < 1e-9);
        }
    }

    #[test]
    fn cap_solver_weighted_all_binding() {
        let w = [0.5, 0.3, 0.2];
        let p = problem(6.0, &[4.0, 4.0, 4.0]);
        let (lambda, out) = solve_cap_lambda(|i, l| l * w[i], &p).unwrap();
        assert!((lambda - 6.0).abs() < 1e-9);
        for (z, want) in out.awards.iter().zip([3.0, 1.8, 1.2]) {
            assert!((z - want).abs() < 1e-9);
        }
    }

    #[test]
    fn cap_solver_power_law_caps() {
        // Slopes w_i^2 / c_i for unit-exponent power-law caps, uniform w.
        let claims = [1.0, 4.0, 5.0];
        let u: Vec<f64> = claims.iter().map(|c| (1.0 / 9.0) / c).collect();
        let p = problem(6.0, &claims);
        let (lambda, out) = solve_cap_lambda(|i, l| l * u[i], &p).unwrap();
        assert!((lambda - 100.0).abs() < 1e-6);
        for (z, want) in out.awards.iter().zip([1.0, 100.0 / 36.0, 100.0 / 45.0]) {
            assert!((z - want).abs() < 1e-6);
        }
    }

    #[test]
    fn cap_solver_rejects_unreachable_endowment() {
        let p = problem(6.0, &[1.0, 4.0, 4.0]);
        let err = solve_cap_lambda(|_, _| 0.0, &p);
        assert!(err.is_err());
    }

    #[test]
    fn parallel_examples() {
        let (ok, s) = is_parallel(&[0.36, 0.24], &[0.48, 0.32], PARALLEL_TOL);
        assert!(ok);
        assert!((s.unwrap() - 0.75).abs() < 1e-12);

        let (ok, s) = is_parallel(&[0.5, 0.3], &[0.5, 0.2], PARALLEL_TOL);
        assert!(!ok);
        assert!(s.is_none());

        let (ok, s) = is_parallel(&[0.3], &[0.4], PARALLEL_TOL);
        assert!(ok);
        assert!((s.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn parallel_degenerate_cases() {
        let (ok, s) = is_parallel(&[0.0, 0.0], &[0.0, 0.0], PARALLEL_TOL);
        assert!(ok);
        assert_eq!(s, Some(0.0));
        let (ok, s) = is_parallel(&[], &[], PARALLEL_TOL);
        assert!(ok);
        assert_eq!(s, Some(0.0));
        let (ok, _) = is_parallel(&[1.0, 0.0], &[0.0, 0.0], PARALLEL_TOL);
        assert!(!ok);
    }

    #[test]
    fn water_fill_matches_bisection_on_seeded_instances() {
        // 1000 instances spread over several claimant counts.
        let mut rng = sampling::rng(0x57A7_F111);
        for trial in 0..1000 {
            let n = [2usize, 3, 5, 8][trial % 4];
            let w = sampling::sample_weight(&mut rng, n);
            let p = sampling::sample_wellformed_problem(&mut rng, n);
            if p.total_claims() <= p.endowment {
                continue;
            }
            let slopes = w.as_slice().to_vec();
            let (_, closed) = water_fill(p.endowment, &p.claims, &slopes).unwrap();
            let (_, bisected) = solve_cap_lambda(|i, l| l * slopes[i], &p).unwrap();
            assert!(
                linf_diff(&closed, &bisected.awards) <= 1e-9,
                "disagreement at trial {trial}: {closed:?} vs {bisected:?}"
            );
        }
    }

    #[test]
    fn water_fill_awards_monotone_in_endowment() {
        let mut rng = sampling::rng(0x0E0E);
        for _ in 0..50 {
            let n = 4;
            let w = sampling::sample_weight(&mut rng, n);
            let claims: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
            let total: f64 = claims.iter().sum();
            let mut prev: Option<Vec<f64>> = None;
            for step in 1..10 {
                let e = total * step as f64 / 10.0;
                let (_, awards) = water_fill(e, &claims, w.as_slice()).unwrap();
                if let Some(before) = prev {
                    for (a, b) in awards.iter().zip(&before) {
                        assert!(a + 1e-9 >= *b, "awards decreased as endowment grew");
                    }
                }
                prev = Some(awards);
            }
        }
    }

    #[test]
    fn cap_solver_invariant_under_permutation() {
        let slopes = [0.5, 0.1, 0.3, 0.1];
        let p = problem(4.0, &[1.0, 3.0, 0.5, 2.0]);
        let (lambda, out) = solve_cap_lambda(|i, l| l * slopes[i], &p).unwrap();
        let perm = [2usize, 0, 3, 1];
        let p2 = problem(4.0, &[0.5, 1.0, 2.0, 3.0]);
        let slopes2: Vec<f64> = perm.iter().map(|&i| slopes[i]).collect();
        let (lambda2, out2) = solve_cap_lambda(|i, l| l * slopes2[i], &p2).unwrap();
        assert!((lambda - lambda2).abs() < 1e-9);
        for (k, &i) in perm.iter().enumerate() {
            assert!((out.awards[i] - out2.awards[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_claims_receive_nothing() {
        let p = problem(3.0, &[0.0, 2.0, 2.0]);
        let (_, out) = solve_cap_lambda(|_, l| l / 3.0, &p).unwrap();
        assert_eq!(out.awards[0], 0.0);
        let (_, awards) = water_fill(3.0, &p.claims, &[1.0 / 3.0; 3]).unwrap();
        assert_eq!(awards[0], 0.0);
    }
}
