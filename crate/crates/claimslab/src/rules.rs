//! The rule catalog and the single allocation dispatcher.
//!
//! Weighted constrained equal awards (and its power-law deformation) run
//! through the exact water-filling closed form; generic separable
//! directional rules go through the bisection solver, and the two paths are
//! cross-checked in the tests. Two literal three-claimant constructions are
//! kept verbatim even where their formulas can breach the contract; the
//! repaired variants clamp and redistribute. The patched rule dispatches on
//! deviation-relation membership over an independent weight set.

use std::fmt;

use serde::Serialize;

use crate::badpairs::d_member;
use crate::core::{
    solve_cap_lambda, water_fill, AwardVector, ClaimsProblem, WeightVector,
};
use crate::{Error, Result};

/// Claims below this are treated as zero when building power-law caps,
/// which would otherwise overflow.
const TINY_CLAIM: f64 = 1e-300;

/// Per-claimant cap-slope family for separable directional rules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CapFamily {
    /// Slope `w_i * (c_i / w_i)^(-kappa)`; zero exponent is plain weighted
    /// equal awards, larger exponents penalize large claims.
    PowerLaw { weight: WeightVector, kappa: f64 },
    /// Slope equal to the claim itself; balances to proportional division.
    Identity,
    /// Piecewise-linear slope functions, one breakpoint table per claimant.
    /// Tables map claim values to slopes; evaluation interpolates and holds
    /// the last value beyond the final breakpoint.
    ExplicitTable { tables: Vec<Vec<(f64, f64)>> },
}

impl CapFamily {
    /// Cap slope for claimant `i` at claim `c`.
    pub fn slope(&self, i: usize, c: f64) -> f64 {
        match self {
            CapFamily::PowerLaw { weight, kappa } => {
                if c < TINY_CLAIM {
                    0.0
                } else {
                    let w = weight.get(i);
                    w * (c / w).powf(-kappa)
                }
            }
            CapFamily::Identity => c,
            CapFamily::ExplicitTable { tables } => {
                let table = &tables[i];
                if c < TINY_CLAIM || table.is_empty() {
                    return 0.0;
                }
                let mut prev = (0.0, 0.0);
                for &(x, u) in table {
                    if c <= x {
                        let span = x - prev.0;
                        if span <= 0.0 {
                            return u;
                        }
                        let t = (c - prev.0) / span;
                        return prev.1 + t * (u - prev.1);
                    }
                    prev = (x, u);
                }
                prev.1
            }
        }
    }

    pub fn claimant_requirement(&self) -> Option<usize> {
        match self {
            CapFamily::PowerLaw { weight, .. } => Some(weight.len()),
            CapFamily::Identity => None,
            CapFamily::ExplicitTable { tables } => Some(tables.len()),
        }
    }

    fn permuted(&self, perm: &[usize]) -> Self {
        match self {
            CapFamily::PowerLaw { weight, kappa } => CapFamily::PowerLaw {
                weight: weight.permuted(perm),
                kappa: *kappa,
            },
            CapFamily::Identity => CapFamily::Identity,
            CapFamily::ExplicitTable { tables } => CapFamily::ExplicitTable {
                tables: perm.iter().map(|&j| tables[j].clone()).collect(),
            },
        }
    }
}

/// Parametric descriptor of a catalog rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RuleSpec {
    /// Weighted constrained equal awards: caps proportional to the weight.
    Cea { weight: WeightVector },
    /// Power-law deformation of weighted equal awards.
    CeaKappa { weight: WeightVector, kappa: f64 },
    /// Split the endowment proportionally to claims.
    Proportional,
    /// Caps `lambda * u_i(c_i)` for a configured slope family.
    SeparableDirectional { cap_family: CapFamily },
    /// Literal three-claimant construction keyed on which claims sit below
    /// a third of the endowment.
    NonCharLiteral,
    /// Same construction followed by the feasibility repair.
    NonCharRepaired,
    /// Literal three-claimant sort-based construction.
    ResponsiveSfLiteral,
    /// Same construction followed by the feasibility repair.
    ResponsiveSfRepaired,
    /// Dispatch on deviation-relation membership over an independent weight
    /// set, falling back to another rule off the matched regions.
    Patched {
        independent_set: Vec<WeightVector>,
        fallback: Box<RuleSpec>,
    },
}

impl RuleSpec {
    pub fn cea(weight: WeightVector) -> Self {
        RuleSpec::Cea { weight }
    }

    pub fn cea_kappa(weight: WeightVector, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(Error::InvalidRule(format!(
                "kappa must be nonnegative, got {kappa}"
            )));
        }
        Ok(RuleSpec::CeaKappa { weight, kappa })
    }

    /// Builds the patched rule, checking the weight set is clash-free and
    /// the fallback is not itself patched.
    pub fn patched(independent_set: Vec<WeightVector>, fallback: RuleSpec) -> Result<Self> {
        if matches!(fallback, RuleSpec::Patched { .. }) {
            return Err(Error::InvalidRule(
                "patched fallback must not be patched".into(),
            ));
        }
        for (a, wa) in independent_set.iter().enumerate() {
            for (b, wb) in independent_set.iter().enumerate().skip(a + 1) {
                let clash = crate::badpairs::is_bad_pair(wa, wb).0
                    || crate::badpairs::is_bad_pair(wb, wa).0
                    || crate::badpairs::is_b_prime(wa, wb).0;
                if clash {
                    return Err(Error::IndependenceViolated { first: a, second: b });
                }
            }
        }
        Ok(RuleSpec::Patched {
            independent_set,
            fallback: Box::new(fallback),
        })
    }

    /// Claimant count this rule insists on, when it does.
    pub fn claimant_requirement(&self) -> Option<usize> {
        match self {
            RuleSpec::Cea { weight } | RuleSpec::CeaKappa { weight, .. } => Some(weight.len()),
            RuleSpec::Proportional => None,
            RuleSpec::SeparableDirectional { cap_family } => cap_family.claimant_requirement(),
            RuleSpec::NonCharLiteral
            | RuleSpec::NonCharRepaired
            | RuleSpec::ResponsiveSfLiteral
            | RuleSpec::ResponsiveSfRepaired => Some(3),
            RuleSpec::Patched { independent_set, .. } => {
                independent_set.first().map(|w| w.len())
            }
        }
    }

    /// The weight this rule is naturally associated with, when any: its own
    /// weight for the weighted kinds, uniform for the fixed three-claimant
    /// constructions.
    pub fn weight(&self) -> Option<WeightVector> {
        match self {
            RuleSpec::Cea { weight } | RuleSpec::CeaKappa { weight, .. } => Some(weight.clone()),
            RuleSpec::SeparableDirectional {
                cap_family: CapFamily::PowerLaw { weight, .. },
            } => Some(weight.clone()),
            RuleSpec::NonCharLiteral
            | RuleSpec::NonCharRepaired
            | RuleSpec::ResponsiveSfLiteral
            | RuleSpec::ResponsiveSfRepaired => Some(WeightVector::uniform(3)),
            _ => None,
        }
    }

    /// True when the rule carries no weight or a uniform one, so the plain
    /// anonymity check applies.
    pub fn is_uniform_weighted(&self) -> bool {
        match self {
            RuleSpec::Cea { weight } | RuleSpec::CeaKappa { weight, .. } => weight.is_uniform(),
            RuleSpec::Proportional => true,
            RuleSpec::SeparableDirectional { cap_family } => match cap_family {
                CapFamily::PowerLaw { weight, .. } => weight.is_uniform(),
                CapFamily::Identity => true,
                CapFamily::ExplicitTable { .. } => false,
            },
            RuleSpec::NonCharLiteral
            | RuleSpec::NonCharRepaired
            | RuleSpec::ResponsiveSfLiteral
            | RuleSpec::ResponsiveSfRepaired => true,
            RuleSpec::Patched { .. } => false,
        }
    }

    /// Reindexed copy for the joint-permutation anonymity check.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        match self {
            RuleSpec::Cea { weight } => RuleSpec::Cea {
                weight: weight.permuted(perm),
            },
            RuleSpec::CeaKappa { weight, kappa } => RuleSpec::CeaKappa {
                weight: weight.permuted(perm),
                kappa: *kappa,
            },
            RuleSpec::Proportional => RuleSpec::Proportional,
            RuleSpec::SeparableDirectional { cap_family } => RuleSpec::SeparableDirectional {
                cap_family: cap_family.permuted(perm),
            },
            RuleSpec::NonCharLiteral => RuleSpec::NonCharLiteral,
            RuleSpec::NonCharRepaired => RuleSpec::NonCharRepaired,
            RuleSpec::ResponsiveSfLiteral => RuleSpec::ResponsiveSfLiteral,
            RuleSpec::ResponsiveSfRepaired => RuleSpec::ResponsiveSfRepaired,
            RuleSpec::Patched {
                independent_set,
                fallback,
            } => RuleSpec::Patched {
                independent_set: independent_set.iter().map(|w| w.permuted(perm)).collect(),
                fallback: Box::new(fallback.permuted(perm)),
            },
        }
    }
}

fn fmt_weight(w: &WeightVector) -> String {
    if w.is_uniform() {
        "uniform".to_string()
    } else {
        w.as_slice()
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Cea { weight } => write!(f, "cea:w={}", fmt_weight(weight)),
            RuleSpec::CeaKappa { weight, kappa } => {
                write!(f, "ceaKappa:w={};kappa={}", fmt_weight(weight), kappa)
            }
            RuleSpec::Proportional => write!(f, "proportional"),
            RuleSpec::SeparableDirectional { cap_family } => match cap_family {
                CapFamily::PowerLaw { weight, kappa } => write!(
                    f,
                    "separableDirectional:cap=powerLaw;w={};kappa={}",
                    fmt_weight(weight),
                    kappa
                ),
                CapFamily::Identity => write!(f, "separableDirectional:cap=identity"),
                CapFamily::ExplicitTable { tables } => write!(
                    f,
                    "separableDirectional:cap=explicitTable;claimants={}",
                    tables.len()
                ),
            },
            RuleSpec::NonCharLiteral => write!(f, "nonCharLiteral"),
            RuleSpec::NonCharRepaired => write!(f, "nonCharRepaired"),
            RuleSpec::ResponsiveSfLiteral => write!(f, "responsiveSFLiteral"),
            RuleSpec::ResponsiveSfRepaired => write!(f, "responsiveSFRepaired"),
            RuleSpec::Patched {
                independent_set,
                fallback,
            } => {
                let inline = independent_set
                    .iter()
                    .map(|w| {
                        w.as_slice()
                            .iter()
                            .map(|x| x.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect::<Vec<_>>()
                    .join("|");
                write!(f, "patched:weights={inline};fallback={fallback}")
            }
        }
    }
}

/// A problem where a literal catalog formula breaches the contract, kept as
/// a regression anchor.
#[derive(Debug, Clone, Serialize)]
pub struct DocumentedViolation {
    pub rule: RuleSpec,
    pub problem: ClaimsProblem,
    pub violated_equation: u8,
}

/// Known contract breaches of the literal constructions.
pub fn documented_violations() -> Vec<DocumentedViolation> {
    vec![DocumentedViolation {
        rule: RuleSpec::ResponsiveSfLiteral,
        problem: ClaimsProblem::new(5.0, vec![10.0, 1.0, 0.5]).unwrap(),
        violated_equation: 3,
    }]
}

/// True when a documented violation matches the given rule and problem.
pub fn is_documented_violation(rule: &RuleSpec, problem: &ClaimsProblem) -> bool {
    documented_violations()
        .iter()
        .any(|v| v.rule == *rule && v.problem == *problem)
}

/// Evaluates a catalog rule on a problem.
///
/// Whenever total claims fit within the endowment every rule answers the
/// claims themselves; all kind-specific logic applies only to the shortage
/// case.
pub fn allocate(spec: &RuleSpec, problem: &ClaimsProblem) -> Result<AwardVector> {
    let n = problem.claimant_count();
    if let Some(required) = spec.claimant_requirement() {
        if required != n {
            return Err(Error::Incompatible(format!(
                "rule '{spec}' needs {required} claimants, problem has {n}"
            )));
        }
    }
    if problem.total_claims() <= problem.endowment {
        return Ok(AwardVector::new(problem.claims.clone(), None));
    }

    match spec {
        RuleSpec::Cea { weight } => {
            let (lambda, awards) =
                water_fill(problem.endowment, &problem.claims, weight.as_slice())?;
            Ok(AwardVector::new(awards, Some(lambda)))
        }
        RuleSpec::CeaKappa { weight, kappa } => {
            allocate_power_law_closed_form(problem, weight, *kappa)
        }
        RuleSpec::Proportional => {
            let total = problem.total_claims();
            let scale = problem.endowment / total;
            let awards = problem.claims.iter().map(|c| c * scale).collect();
            Ok(AwardVector::new(awards, Some(scale)))
        }
        RuleSpec::SeparableDirectional { cap_family } => {
            let slopes: Vec<f64> = problem
                .claims
                .iter()
                .enumerate()
                .map(|(i, &c)| cap_family.slope(i, c))
                .collect();
            let (lambda, out) = solve_cap_lambda(|i, l| l * slopes[i], problem)?;
            Ok(AwardVector::new(out.awards, Some(lambda)))
        }
        RuleSpec::NonCharLiteral => non_char_literal(problem),
        RuleSpec::NonCharRepaired => {
            let raw = non_char_literal(problem)?;
            Ok(feasibility_repair(&raw, problem))
        }
        RuleSpec::ResponsiveSfLiteral => responsive_sf_literal(problem),
        RuleSpec::ResponsiveSfRepaired => {
            let raw = responsive_sf_literal(problem)?;
            Ok(feasibility_repair(&raw, problem))
        }
        RuleSpec::Patched {
            independent_set,
            fallback,
        } => patched_allocate(independent_set, fallback, problem),
    }
}

/// Power-law caps are linear in the balancing scalar once claims are fixed,
/// so the closed-form fill applies; claimants with (near-)zero claims are
/// excluded from the solve and awarded zero.
fn allocate_power_law_closed_form(
    problem: &ClaimsProblem,
    weight: &WeightVector,
    kappa: f64,
) -> Result<AwardVector> {
    let n = problem.claimant_count();
    let live: Vec<usize> = (0..n)
        .filter(|&i| problem.claims[i] >= TINY_CLAIM)
        .collect();
    let family = CapFamily::PowerLaw {
        weight: weight.clone(),
        kappa,
    };
    let live_claims: Vec<f64> = live.iter().map(|&i| problem.claims[i]).collect();
    let live_slopes: Vec<f64> = live
        .iter()
        .map(|&i| family.slope(i, problem.claims[i]))
        .collect();
    let (lambda, live_awards) = water_fill(problem.endowment, &live_claims, &live_slopes)?;
    let mut awards = vec![0.0; n];
    for (k, &i) in live.iter().enumerate() {
        awards[i] = live_awards[k];
    }
    Ok(AwardVector::new(awards, Some(lambda)))
}

/// Keyed on `I`, the set of claims below a third of the endowment. Away
/// from singleton `I` the min-of-claim-and-third lower bound pins the whole
/// award; at singleton `I` the formula hands the largest other claimant as
/// much as the leftover allows.
fn non_char_literal(problem: &ClaimsProblem) -> Result<AwardVector> {
    let e = problem.endowment;
    let c = &problem.claims;
    let third = e / 3.0;
    let low: Vec<usize> = (0..3).filter(|&i| c[i] < third).collect();
    let awards = match low.len() {
        0 => vec![third, third, third],
        1 => {
            let i = low[0];
            let mut best = None;
            for k in 0..3 {
                if k != i {
                    let better = match best {
                        None => true,
                        Some(j) => c[k] > c[j as usize],
                    };
                    if better {
                        best = Some(k as u8);
                    }
                }
            }
            let j = best.unwrap() as usize;
            let mut z = vec![0.0; 3];
            z[i] = c[i];
            z[j] = (e - c[i]).min(c[j]);
            let k = (0..3).find(|&k| k != i && k != j).unwrap();
            z[k] = e - z[i] - z[j];
            z
        }
        2 => {
            let (i, j) = (low[0], low[1]);
            let mut z = vec![0.0; 3];
            z[i] = c[i];
            z[j] = c[j];
            let k = (0..3).find(|&k| k != i && k != j).unwrap();
            z[k] = e - c[i] - c[j];
            z
        }
        // All three below a third means total claims fall short of the
        // endowment, which the pass-through branch already handled.
        _ => unreachable!("shortage implies at most two claims below a third"),
    };
    Ok(AwardVector::new(awards, None))
}

/// Sort-based construction: descending claims with index tie-break, branch
/// on whether the two smaller sorted claims tie, then unsort.
fn responsive_sf_literal(problem: &ClaimsProblem) -> Result<AwardVector> {
    let e = problem.endowment;
    let c = &problem.claims;
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        c[b].partial_cmp(&c[a])
            .unwrap()
            .then_with(|| a.cmp(&b))
    });
    let s: Vec<f64> = order.iter().map(|&i| c[i]).collect();
    let sorted_awards = if s[1] == s[2] {
        [
            (e - 2.0 * s[2]).max(e / 3.0),
            s[2].min(e / 3.0),
            s[2].min(e / 3.0),
        ]
    } else {
        [
            s[1].min(e / 2.0),
            s[1].min(e / 2.0),
            (e - 2.0 * s[1]).max(0.0),
        ]
    };
    let mut awards = vec![0.0; 3];
    for (pos, &i) in order.iter().enumerate() {
        awards[i] = sorted_awards[pos];
    }
    Ok(AwardVector::new(awards, None))
}

/// Clamps every award into `[0, claim]` and hands the clamped excess to
/// claimants with slack, largest claim first (index tie-break). Identity on
/// already-feasible input; the output satisfies the full contract whenever
/// the raw total matched the deliverable total.
pub fn feasibility_repair(raw: &AwardVector, problem: &ClaimsProblem) -> AwardVector {
    let n = problem.claimant_count();
    let mut awards: Vec<f64> = raw
        .awards
        .iter()
        .zip(&problem.claims)
        .map(|(&z, &c)| z.max(0.0).min(c))
        .collect();
    let raw_total: f64 = raw.awards.iter().sum();
    let mut excess = raw_total - awards.iter().sum::<f64>();
    if excess > 0.0 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            problem.claims[b]
                .partial_cmp(&problem.claims[a])
                .unwrap()
                .then_with(|| a.cmp(&b))
        });
        for &i in &order {
            if excess <= 0.0 {
                break;
            }
            let slack = problem.claims[i] - awards[i];
            if slack > 0.0 {
                let give = slack.min(excess);
                awards[i] += give;
                excess -= give;
            }
        }
    }
    AwardVector::new(awards, raw.lambda)
}

/// Patched-rule dispatcher: answer the forced award on any matched
/// deviation region, the fallback elsewhere. Two distinct matches mean the
/// weight set was not clash-free.
pub fn patched_allocate(
    weights: &[WeightVector],
    fallback: &RuleSpec,
    problem: &ClaimsProblem,
) -> Result<AwardVector> {
    if problem.total_claims() <= problem.endowment {
        return Ok(AwardVector::new(problem.claims.clone(), None));
    }
    let mut matched: Option<(usize, usize, f64)> = None;
    for (k, w) in weights.iter().enumerate() {
        let m = d_member(problem, w);
        if m.member {
            if let Some((first, _, _)) = matched {
                return Err(Error::IndependenceViolated { first, second: k });
            }
            matched = Some((k, m.witness_index.unwrap(), m.scale.unwrap()));
        }
    }
    match matched {
        Some((_, i, scale)) => {
            let mut awards = problem.claims.clone();
            let others: f64 = crate::core::without(&problem.claims, i).iter().sum();
            awards[i] = problem.endowment - others;
            Ok(AwardVector::new(awards, Some(scale)))
        }
        None => allocate(fallback, problem),
    }
}

/// Canonical three-claimant catalog used by the audit suites.
pub fn demo_catalog() -> Vec<RuleSpec> {
    let uniform = WeightVector::uniform(3);
    let skewed = WeightVector::new(vec![0.5, 0.3, 0.2]).unwrap();
    vec![
        RuleSpec::cea(uniform.clone()),
        RuleSpec::cea(skewed.clone()),
        RuleSpec::cea_kappa(uniform.clone(), 1.0).unwrap(),
        RuleSpec::cea_kappa(uniform, 0.5).unwrap(),
        RuleSpec::Proportional,
        RuleSpec::SeparableDirectional {
            cap_family: CapFamily::Identity,
        },
        RuleSpec::NonCharLiteral,
        RuleSpec::NonCharRepaired,
        RuleSpec::ResponsiveSfLiteral,
        RuleSpec::ResponsiveSfRepaired,
        RuleSpec::patched(vec![skewed], RuleSpec::cea(WeightVector::uniform(3))).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{check_rule_contract, award_tol, linf_diff};
    use crate::sampling;

    fn p(e: f64, claims: &[f64]) -> ClaimsProblem {
        ClaimsProblem::new(e, claims.to_vec()).unwrap()
    }

    fn w(components: &[f64]) -> WeightVector {
        WeightVector::new(components.to_vec()).unwrap()
    }

    #[test]
    fn cea_uniform_water_fills() {
        let rule = RuleSpec::cea(WeightVector::uniform(3));
        let out = allocate(&rule, &p(6.0, &[1.0, 4.0, 4.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 2.5, 2.5]) < 1e-9);
        assert!((out.lambda.unwrap() - 7.5).abs() < 1e-9);
    }

    #[test]
    fn cea_weighted_all_caps_bind() {
        let rule = RuleSpec::cea(w(&[0.5, 0.3, 0.2]));
        let out = allocate(&rule, &p(6.0, &[4.0, 4.0, 4.0])).unwrap();
        assert!(linf_diff(&out.awards, &[3.0, 1.8, 1.2]) < 1e-9);
    }

    #[test]
    fn proportional_scales_claims() {
        let out = allocate(&RuleSpec::Proportional, &p(6.0, &[2.0, 4.0, 6.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 2.0, 3.0]) < 1e-12);
    }

    #[test]
    fn power_law_unit_exponent() {
        let rule = RuleSpec::cea_kappa(WeightVector::uniform(3), 1.0).unwrap();
        let out = allocate(&rule, &p(6.0, &[1.0, 4.0, 5.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 2.7778, 2.2222]) < 1e-4);
        assert!((out.lambda.unwrap() - 100.0).abs() < 1e-6);
    }

    #[test]
    fn non_char_branches() {
        let out = allocate(&RuleSpec::NonCharLiteral, &p(6.0, &[1.0, 3.0, 5.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 0.0, 5.0]) < 1e-12);
        let out = allocate(&RuleSpec::NonCharLiteral, &p(6.0, &[1.0, 1.0, 5.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 1.0, 4.0]) < 1e-12);
        // No claim below a third: equal split.
        let out = allocate(&RuleSpec::NonCharLiteral, &p(6.0, &[4.0, 4.0, 4.0])).unwrap();
        assert!(linf_diff(&out.awards, &[2.0, 2.0, 2.0]) < 1e-12);
    }

    #[test]
    fn responsive_sf_branches() {
        let out = allocate(&RuleSpec::ResponsiveSfLiteral, &p(6.0, &[5.0, 3.0, 1.0])).unwrap();
        assert!(linf_diff(&out.awards, &[3.0, 3.0, 0.0]) < 1e-12);
        // Total exactly matches the endowment: pass-through branch.
        let out = allocate(&RuleSpec::ResponsiveSfLiteral, &p(6.0, &[4.0, 1.0, 1.0])).unwrap();
        assert!(linf_diff(&out.awards, &[4.0, 1.0, 1.0]) < 1e-12);
    }

    #[test]
    fn every_kind_passes_through_when_supply_covers_claims() {
        for rule in demo_catalog() {
            let out = allocate(&rule, &p(10.0, &[1.0, 2.0, 3.0])).unwrap();
            assert!(
                linf_diff(&out.awards, &[1.0, 2.0, 3.0]) < 1e-12,
                "rule {rule} failed pass-through"
            );
        }
    }

    #[test]
    fn repair_clamps_and_redistributes() {
        let problem = p(5.0, &[10.0, 1.0, 0.5]);
        let raw = AwardVector::new(vec![1.0, 1.0, 3.0], None);
        let fixed = feasibility_repair(&raw, &problem);
        assert!(linf_diff(&fixed.awards, &[3.5, 1.0, 0.5]) < 1e-12);

        let feasible = AwardVector::new(vec![1.0, 2.5, 2.5], None);
        let out = feasibility_repair(&feasible, &p(6.0, &[1.0, 4.0, 4.0]));
        assert!(linf_diff(&out.awards, &[1.0, 2.5, 2.5]) < 1e-12);

        let already = AwardVector::new(vec![1.0, 0.0, 5.0], None);
        let out = feasibility_repair(&already, &p(6.0, &[1.0, 3.0, 5.0]));
        assert!(linf_diff(&out.awards, &[1.0, 0.0, 5.0]) < 1e-12);
    }

    #[test]
    fn documented_violation_is_real_and_repair_fixes_it() {
        let violation = &documented_violations()[0];
        let raw = allocate(&violation.rule, &violation.problem).unwrap();
        let report =
            check_rule_contract(&raw, &violation.problem, award_tol(violation.problem.endowment))
                .unwrap();
        assert!(!report.passed);
        assert_eq!(report.violated_equation, Some(violation.violated_equation));
        assert_eq!(report.offending_index, Some(2));
        assert!((report.discrepancy - 2.5).abs() < 1e-9);

        let fixed = allocate(&RuleSpec::ResponsiveSfRepaired, &violation.problem).unwrap();
        let report = check_rule_contract(
            &fixed,
            &violation.problem,
            award_tol(violation.problem.endowment),
        )
        .unwrap();
        assert!(report.passed);
        assert!(linf_diff(&fixed.awards, &[3.5, 1.0, 0.5]) < 1e-12);
    }

    #[test]
    fn patched_dispatch() {
        let set = vec![w(&[0.5, 0.3, 0.2])];
        let fallback = RuleSpec::cea(WeightVector::uniform(3));
        // Matched region: the inflater is balanced, the rest get claims.
        let out = patched_allocate(&set, &fallback, &p(12.0, &[9.0, 3.0, 2.0])).unwrap();
        assert!(linf_diff(&out.awards, &[7.0, 3.0, 2.0]) < 1e-9);
        // No match: fall back.
        let out = patched_allocate(&set, &fallback, &p(6.0, &[1.0, 4.0, 4.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 2.5, 2.5]) < 1e-9);
        // Empty set: always the fallback.
        let out = patched_allocate(&[], &RuleSpec::Proportional, &p(6.0, &[2.0, 4.0, 6.0])).unwrap();
        assert!(linf_diff(&out.awards, &[1.0, 2.0, 3.0]) < 1e-12);
    }

    #[test]
    fn patched_constructor_rejects_clashing_sets() {
        let u = w(&[0.2, 0.5, 0.3]);
        let v = w(&[0.4, 0.2, 0.4]);
        assert!(RuleSpec::patched(vec![u, v], RuleSpec::Proportional).is_err());
    }

    #[test]
    fn plain_cea_equals_zero_exponent_power_law() {
        let mut rng = sampling::rng(0xCEA0);
        for _ in 0..200 {
            let n = 3;
            let weight = sampling::sample_weight(&mut rng, n);
            let problem = sampling::sample_wellformed_problem(&mut rng, n);
            let a = allocate(&RuleSpec::cea(weight.clone()), &problem).unwrap();
            let b = allocate(&RuleSpec::cea_kappa(weight, 0.0).unwrap(), &problem).unwrap();
            assert!(linf_diff(&a.awards, &b.awards) < 1e-9);
        }
    }

    #[test]
    fn power_law_kind_matches_generic_separable_solver() {
        let mut rng = sampling::rng(0x5E9A);
        for _ in 0..100 {
            let weight = sampling::sample_weight(&mut rng, 3);
            let problem = sampling::sample_wellformed_problem(&mut rng, 3);
            if problem.total_claims() <= problem.endowment {
                continue;
            }
            let closed = allocate(
                &RuleSpec::cea_kappa(weight.clone(), 1.0).unwrap(),
                &problem,
            )
            .unwrap();
            let generic = allocate(
                &RuleSpec::SeparableDirectional {
                    cap_family: CapFamily::PowerLaw { weight, kappa: 1.0 },
                },
                &problem,
            )
            .unwrap();
            assert!(linf_diff(&closed.awards, &generic.awards) < 1e-8);
        }
    }

    #[test]
    fn identity_caps_reproduce_proportional() {
        let mut rng = sampling::rng(0x1DE);
        for _ in 0..100 {
            let problem = sampling::sample_wellformed_problem(&mut rng, 4);
            let a = allocate(&RuleSpec::Proportional, &problem).unwrap();
            let b = allocate(
                &RuleSpec::SeparableDirectional {
                    cap_family: CapFamily::Identity,
                },
                &problem,
            )
            .unwrap();
            assert!(linf_diff(&a.awards, &b.awards) < 1e-8);
        }
    }

    #[test]
    fn incompatible_claimant_count_is_rejected() {
        let err = allocate(&RuleSpec::NonCharLiteral, &p(6.0, &[1.0, 2.0, 3.0, 4.0]));
        assert!(err.is_err());
    }

    #[test]
    fn display_round_trip_shapes() {
        assert_eq!(RuleSpec::Proportional.to_string(), "proportional");
        assert_eq!(
            RuleSpec::cea(WeightVector::uniform(3)).to_string(),
            "cea:w=uniform"
        );
        assert_eq!(
            RuleSpec::cea(w(&[0.5, 0.3, 0.2])).to_string(),
            "cea:w=0.5,0.3,0.2"
        );
        assert_eq!(
            RuleSpec::cea_kappa(WeightVector::uniform(3), 1.0)
                .unwrap()
                .to_string(),
            "ceaKappa:w=uniform;kappa=1"
        );
    }
}
