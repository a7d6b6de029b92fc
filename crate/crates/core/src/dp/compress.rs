use std::collections::HashMap;

use serde::Serialize;

use super::{AgentDp, ValueTable};
use crate::beliefs::{stage_measure, theta_table, IncrementSpace};
use crate::model::ProblemSpec;
use crate::scalar::{grouping_key, Scalar};
use crate::strategy::StrategyProfile;

const KEY_DECIMALS: i32 = 10;
const VALUE_TOLERANCE: f64 = 1e-10;
const MEASURE_TOLERANCE: f64 = 1e-12;

/// Partition statistics for one `(agent, stage)`.
#[derive(Debug, Clone, Serialize)]
pub struct StageCompression {
    pub agent: usize,
    pub stage: usize,
    pub reachable: usize,
    /// Groups under `(xi, delta, lambda)`.
    pub groups_full: usize,
    /// Groups under `(xi, delta)`.
    pub groups_xi_delta: usize,
    /// Groups under `(xi, theta, lambda)`.
    pub groups_separated: usize,
    /// Groups under `xi` alone.
    pub groups_xi: usize,
    /// At the horizon: equal values and argmin sets within every `(xi, delta)` group.
    pub terminal_consistent: Option<bool>,
    /// Before the horizon: equal stage transition measures within every `(xi, delta)` group.
    pub transition_equal: Option<bool>,
    pub actions_factor_separated: bool,
    pub actions_factor_xi: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressionReport {
    pub stages: Vec<StageCompression>,
}

impl CompressionReport {
    pub fn terminal_consistent(&self) -> bool {
        self.stages.iter().all(|s| s.terminal_consistent != Some(false))
    }

    pub fn transition_equal(&self) -> bool {
        self.stages.iter().all(|s| s.transition_equal != Some(false))
    }

    pub fn actions_factor_xi(&self) -> bool {
        self.stages.iter().all(|s| s.actions_factor_xi)
    }

    pub fn actions_factor_separated(&self) -> bool {
        self.stages.iter().all(|s| s.actions_factor_separated)
    }
}

fn key<S: Scalar>(p: &[S]) -> Vec<i64> {
    p.iter().map(|&v| grouping_key(v, KEY_DECIMALS)).collect()
}

fn group<K: std::hash::Hash + Eq>(items: impl Iterator<Item = (K, usize)>) -> Vec<Vec<usize>> {
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut map: HashMap<K, usize> = HashMap::new();
    for (k, i) in items {
        let slot = *map.entry(k).or_insert_with(|| {
            order.push(Vec::new());
            order.len() - 1
        });
        order[slot].push(i);
    }
    order
}

fn constant(group: &[usize], f: impl Fn(usize) -> usize) -> bool {
    group.iter().all(|&i| f(i) == f(group[0]))
}

/// Groups reachable realizations by candidate sufficient statistics and checks
/// what factors through them.
pub fn compression_report<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, values: &[ValueTable<S>]) -> CompressionReport {
    let pattern = spec.pattern();
    let thetas = theta_table(spec, &pattern);
    let n = spec.horizon;
    let mut stages = Vec::new();
    for (k, table) in values.iter().enumerate() {
        let dp = AgentDp::new(spec, &pattern, profile, k);
        for t in 1..=n {
            let np = pattern.private_count(k, t);
            let reachable: Vec<usize> = (0..pattern.info_count(k, t)).filter(|&i| dp.beliefs().reachable(t, i)).collect();
            let xi_key = |i: usize| key(&dp.beliefs().get(t, i).expect("reachable").probs);
            let theta_key = |i: usize| match thetas[t - 1].get(i / np) {
                Some(Some(th)) => key(&th.probs),
                _ => Vec::new(),
            };
            let action = |i: usize| profile.action(k, t, i);

            let full = group(reachable.iter().map(|&i| ((xi_key(i), i / np, i % np), i)));
            let xd = group(reachable.iter().map(|&i| ((xi_key(i), i / np), i)));
            let sep = group(reachable.iter().map(|&i| ((xi_key(i), theta_key(i), i % np), i)));
            let xi_only = group(reachable.iter().map(|&i| (xi_key(i), i)));

            let terminal_consistent = (t == n).then(|| {
                xd.iter().all(|g| {
                    let v0 = table.value(t, g[0]).expect("reachable");
                    let a0 = table.argmin_set(t, g[0], VALUE_TOLERANCE);
                    g.iter().all(|&i| {
                        (table.value(t, i).expect("reachable") - v0).abs().to_f64_lossy() <= VALUE_TOLERANCE
                            && table.argmin_set(t, i, VALUE_TOLERANCE) == a0
                    })
                })
            });
            let transition_equal = (t < n).then(|| {
                let space = IncrementSpace::new(spec, &pattern, k, t);
                xd.iter().all(|g| {
                    (0..spec.num_actions(k)).all(|u| {
                        let m = |i: usize| {
                            stage_measure(spec, &pattern, &space, dp.beliefs().get(t, i).expect("reachable"), i / np, u, profile)
                        };
                        let m0 = m(g[0]);
                        g[1..].iter().all(|&i| {
                            m(i).iter().zip(&m0).all(|(a, b)| (*a - *b).abs().to_f64_lossy() <= MEASURE_TOLERANCE)
                        })
                    })
                })
            });
            stages.push(StageCompression {
                agent: k,
                stage: t,
                reachable: reachable.len(),
                groups_full: full.len(),
                groups_xi_delta: xd.len(),
                groups_separated: sep.len(),
                groups_xi: xi_only.len(),
                terminal_consistent,
                transition_equal,
                actions_factor_separated: sep.iter().all(|g| constant(g, action)),
                actions_factor_xi: xi_only.iter().all(|g| constant(g, action)),
            });
        }
    }
    CompressionReport { stages }
}
