//! Deterministic strategy profiles `gamma_t^k : i_t^k -> u_t^k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::info::{InfoPattern, InfoRealization};

/// Action tables indexed `[agent][stage - 1][info index]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyProfile {
    tables: Vec<Vec<Vec<usize>>>,
}

impl StrategyProfile {
    /// Every agent plays action 0 everywhere.
    pub fn lowest_index(pattern: &InfoPattern) -> Self {
        Self::from_fn(pattern, |_, _, _| 0)
    }

    /// Uniformly random actions from a seeded stream.
    pub fn random(pattern: &InfoPattern, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(pattern, |k, _, _| rng.gen_range(0..pattern.num_actions(k)))
    }

    pub fn from_fn(pattern: &InfoPattern, mut f: impl FnMut(usize, usize, usize) -> usize) -> Self {
        let tables = (0..pattern.num_agents())
            .map(|k| {
                (1..=pattern.horizon())
                    .map(|t| (0..pattern.info_count(k, t)).map(|i| f(k, t, i)).collect())
                    .collect()
            })
            .collect();
        StrategyProfile { tables }
    }

    pub fn num_agents(&self) -> usize {
        self.tables.len()
    }

    pub fn horizon(&self) -> usize {
        self.tables.first().map_or(0, Vec::len)
    }

    pub fn action(&self, k: usize, t: usize, index: usize) -> usize {
        self.tables[k][t - 1][index]
    }

    pub fn set_action(&mut self, k: usize, t: usize, index: usize, u: usize) {
        self.tables[k][t - 1][index] = u;
    }

    pub fn stage(&self, k: usize, t: usize) -> &[usize] {
        &self.tables[k][t - 1]
    }

    pub fn set_stage(&mut self, k: usize, t: usize, actions: Vec<usize>) {
        assert_eq!(actions.len(), self.tables[k][t - 1].len());
        self.tables[k][t - 1] = actions;
    }

    /// Agent `k`'s whole strategy, `[stage - 1][info index]`.
    pub fn agent(&self, k: usize) -> &[Vec<usize>] {
        &self.tables[k]
    }

    pub fn with_agent(&self, k: usize, strategy: Vec<Vec<usize>>) -> Self {
        let mut p = self.clone();
        assert_eq!(strategy.len(), p.tables[k].len());
        p.tables[k] = strategy;
        p
    }

    /// Action prescribed at a realization (index computed from the pattern).
    pub fn act_in(&self, pattern: &InfoPattern, i: &InfoRealization) -> usize {
        self.action(i.agent, i.stage, pattern.info_index(i))
    }

    /// Checks that table sizes and action labels fit `pattern`.
    pub fn fits(&self, pattern: &InfoPattern) -> bool {
        self.tables.len() == pattern.num_agents()
            && self.tables.iter().enumerate().all(|(k, agent)| {
                agent.len() == pattern.horizon()
                    && agent.iter().enumerate().all(|(t0, stage)| {
                        stage.len() == pattern.info_count(k, t0 + 1)
                            && stage.iter().all(|&u| u < pattern.num_actions(k))
                    })
            })
    }
}
