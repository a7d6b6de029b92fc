//! Filter, payoff and grouping cross-checks of a profile against the
//! brute-force oracle. Each check lists every entry that misses its tolerance.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::beliefs::{pi_table, theta_table, PrivateBeliefTable};
use crate::dp::{profile_payoff, DpError};
use crate::info::InfoPattern;
use crate::model::ProblemSpec;
use crate::oracle::{exact_payoff, exhaustive_pi, exhaustive_theta, AgentTree};
use crate::scalar::{grouping_key, Scalar};
use crate::strategy::StrategyProfile;

const KEY_DECIMALS: i32 = 10;

/// One entry outside tolerance. `delta` is 1 when only one side has support.
#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub check: String,
    /// 1-based; absent for shared-history checks.
    pub agent: Option<usize>,
    pub stage: usize,
    pub realization: Vec<String>,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome { name: name.into(), checked: 0, mismatches: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn compare<S: Scalar>(&mut self, got: Option<&[S]>, want: Option<&[S]>, tol: f64, at: impl FnOnce() -> (Option<usize>, usize, Vec<String>)) {
        let delta = match (got, want) {
            (None, None) => return,
            (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (*x - *y).abs().to_f64_lossy()).fold(0.0, f64::max),
            _ => 1.0,
        };
        self.checked += 1;
        if delta > tol || delta.is_nan() {
            let (agent, stage, realization) = at();
            self.mismatches.push(Mismatch { check: self.name.clone(), agent, stage, realization, delta });
        }
    }
}

fn shared_labels<S: Scalar>(spec: &ProblemSpec<S>, pattern: &InfoPattern, t: usize, d: usize) -> Vec<String> {
    let np = pattern.private_count(0, t);
    pattern.info_at(0, t, d * np).shared_labels(spec)
}

/// Private, shared-state and joint posteriors against exhaustive Bayes.
pub fn posteriors<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, tol: f64) -> Vec<CheckOutcome> {
    let pattern = spec.pattern();
    let mut xi = CheckOutcome::new("private posterior");
    for k in 0..spec.num_agents() {
        let table = PrivateBeliefTable::compute(spec, &pattern, profile, k);
        let tree = AgentTree::build(spec, profile, k);
        for t in 1..=spec.horizon {
            for i in 0..pattern.info_count(k, t) {
                let ex = tree.posterior(t, i);
                xi.compare(table.get(t, i).map(|p| p.probs.as_slice()), ex.as_deref(), tol, || {
                    (Some(k + 1), t, pattern.info_at(k, t, i).labels(spec))
                });
            }
        }
    }
    let mut theta = CheckOutcome::new("lagged state posterior");
    let mut pi = CheckOutcome::new("joint posterior");
    let thetas = theta_table(spec, &pattern);
    let pis = pi_table(spec, &pattern, profile);
    for t in 1..=spec.horizon {
        if pattern.shared_len(t) > 0 {
            for (d, ex) in exhaustive_theta(spec, profile, t).into_iter().enumerate() {
                // Theta ignores the strategy, so it is only compared where the profile reaches
                if ex.is_some() {
                    let got = thetas[t - 1][d].as_ref().map(|p| p.probs.as_slice());
                    theta.compare(got, ex.as_deref(), tol, || (None, t, shared_labels(spec, &pattern, t, d)));
                }
            }
        }
        for (d, ex) in exhaustive_pi(spec, profile, t).into_iter().enumerate() {
            let got = pis[t - 1][d].as_ref().map(|p| p.probs.as_slice());
            pi.compare(got, ex.as_deref(), tol, || (None, t, shared_labels(spec, &pattern, t, d)));
        }
    }
    vec![xi, theta, pi]
}

/// DP policy evaluation against the exhaustive joint-law payoff.
pub fn payoff<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, tol: f64) -> Result<CheckOutcome, DpError> {
    let mut out = CheckOutcome::new("payoff");
    let dp = profile_payoff(spec, profile)?;
    let ex = exact_payoff(spec, profile);
    out.compare(Some(&[dp][..]), Some(&[ex][..]), tol, || (None, spec.horizon, Vec::new()));
    Ok(out)
}

/// Realizations sharing `(xi, delta, u)` must induce the same law on next posteriors.
/// `checked` counts the groups.
pub fn markov_grouping<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, tol: f64) -> CheckOutcome {
    let pattern = spec.pattern();
    let mut out = CheckOutcome::new("markov grouping");
    let key = |v: &[S]| -> Vec<i64> { v.iter().map(|&p| grouping_key(p, KEY_DECIMALS)).collect() };
    for k in 0..spec.num_agents() {
        let tree = AgentTree::build(spec, profile, k);
        for t in 1..spec.horizon {
            let np = pattern.private_count(k, t);
            let mut order = Vec::new();
            let mut groups: HashMap<(Vec<i64>, usize, usize), Vec<(usize, HashMap<Vec<i64>, f64>)>> = HashMap::new();
            for i in 0..pattern.info_count(k, t) {
                let Some(xi) = tree.posterior(t, i) else { continue };
                for u in 0..spec.num_actions(k) {
                    let mut law: HashMap<Vec<i64>, f64> = HashMap::new();
                    for (child, p) in tree.transition(t, i, u) {
                        if let Some(next) = tree.posterior(t + 1, child) {
                            *law.entry(key(&next)).or_default() += p.to_f64_lossy();
                        }
                    }
                    let g = (key(&xi), i / np, u);
                    if !groups.contains_key(&g) {
                        order.push(g.clone());
                    }
                    groups.entry(g).or_default().push((i, law));
                }
            }
            for g in &order {
                let members = &groups[g];
                out.checked += 1;
                let (_, first) = &members[0];
                for (i, law) in &members[1..] {
                    let support: BTreeSet<&Vec<i64>> = law.keys().chain(first.keys()).collect();
                    let delta = support
                        .into_iter()
                        .map(|s| (law.get(s).copied().unwrap_or(0.0) - first.get(s).copied().unwrap_or(0.0)).abs())
                        .fold(0.0, f64::max);
                    if delta > tol {
                        out.mismatches.push(Mismatch {
                            check: out.name.clone(),
                            agent: Some(k + 1),
                            stage: t,
                            realization: pattern.info_at(k, t, *i).labels(spec),
                            delta,
                        });
                    }
                }
            }
        }
    }
    out
}
