//! Agent-history tree: every joint history with agent `k`'s actions left free
//! and the other agents playing their fixed strategies.

use rayon::prelude::*;

use super::joint_obs_prob;
use crate::info::{History, InfoPattern, MixedRadix};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

/// Masses accumulated over agent `k`'s information realizations.
///
/// `mass[t-1][i]` is the probability of the realization's observations and the
/// other agents' shared entries with `k`'s own actions pinned to those in `i`.
#[derive(Debug, Clone)]
pub struct AgentTree<S> {
    pub agent: usize,
    pub mass: Vec<Vec<S>>,
    /// `[t-1][i][x * |Lambda^{-k}| + h]`, unnormalized.
    pub hidden: Vec<Vec<Vec<S>>>,
    /// `[t-1][i][u]`: mass-weighted stage cost of playing `u` at `i`.
    pub cost: Vec<Vec<Vec<S>>>,
    /// `[t-1][i][u]`: children at stage `t+1` reached by playing `u` (empty at the horizon).
    pub children: Vec<Vec<Vec<Vec<usize>>>>,
}

impl<S: Scalar> AgentTree<S> {
    pub fn build(spec: &ProblemSpec<S>, profile: &StrategyProfile, k: usize) -> Self {
        let pattern = spec.pattern();
        let n = spec.horizon;
        let others: Vec<usize> = (0..spec.num_agents()).filter(|&j| j != k).collect();
        let hidden_radix: Vec<MixedRadix> = (1..=n)
            .map(|t| MixedRadix::new(others.iter().map(|&j| pattern.private_count(j, t)).collect()))
            .collect();
        let mut tree = AgentTree {
            agent: k,
            mass: (1..=n).map(|t| vec![S::zero(); pattern.info_count(k, t)]).collect(),
            hidden: (1..=n)
                .map(|t| vec![vec![S::zero(); spec.num_states() * hidden_radix[t - 1].size()]; pattern.info_count(k, t)])
                .collect(),
            cost: (1..=n).map(|t| vec![vec![S::zero(); spec.num_actions(k)]; pattern.info_count(k, t)]).collect(),
            children: (1..=n)
                .map(|t| vec![vec![Vec::new(); spec.num_actions(k)]; pattern.info_count(k, t)])
                .collect(),
        };
        let mut b = Builder { spec, pattern: &pattern, profile, k, others, hidden_radix, tree: &mut tree, hist: History::default() };
        for x in 0..spec.num_states() {
            if spec.initial[x] > S::zero() {
                b.rec(1, x, 0, spec.initial[x]);
            }
        }
        for t in 1..n {
            for idx in 0..pattern.info_count(k, t + 1) {
                let ext = pattern.split_last(&pattern.info_at(k, t + 1, idx)).expect("stage >= 2");
                tree.children[t - 1][pattern.info_index(&ext.parent)][ext.action].push(idx);
            }
        }
        tree
    }

    pub fn reachable(&self, t: usize, i: usize) -> bool {
        self.mass[t - 1][i] > S::zero()
    }

    /// Exhaustive-Bayes `P(x_t, lambda_t^{-k} | i_t^k)`; `None` off-support.
    pub fn posterior(&self, t: usize, i: usize) -> Option<Vec<S>> {
        let m = self.mass[t - 1][i];
        (m > S::zero()).then(|| self.hidden[t - 1][i].iter().map(|&p| p / m).collect())
    }

    /// `P(i_{t+1} | i_t, u)` for each child reached by `u`.
    pub fn transition(&self, t: usize, i: usize, u: usize) -> Vec<(usize, S)> {
        let m = self.mass[t - 1][i];
        self.children[t - 1][i][u].iter().map(|&c| (c, self.mass[t][c] / m)).collect()
    }

    /// Mass-weighted cost-to-go `W_t(i)` of agent `k` playing `strategy` (`[t-1][i]`).
    fn weighted_values(&self, strategy: &[Vec<usize>]) -> Vec<Vec<S>> {
        let n = self.mass.len();
        let mut w: Vec<Vec<S>> = vec![Vec::new(); n];
        for t in (1..=n).rev() {
            w[t - 1] = (0..self.mass[t - 1].len())
                .map(|i| {
                    let u = strategy[t - 1][i];
                    let cont: S = if t < n { self.children[t - 1][i][u].iter().map(|&c| w[t][c]).sum() } else { S::zero() };
                    self.cost[t - 1][i][u] + cont
                })
                .collect();
        }
        w
    }

    /// `J_n` with agent `k` playing `strategy` against the tree's fixed others.
    pub fn payoff(&self, strategy: &[Vec<usize>]) -> S {
        self.weighted_values(strategy)[0].iter().copied().sum()
    }

    /// Conditional cost-to-go `J_{t,n}(i)` on reachable realizations.
    pub fn policy_values(&self, strategy: &[Vec<usize>]) -> Vec<Vec<Option<S>>> {
        let w = self.weighted_values(strategy);
        w.iter()
            .enumerate()
            .map(|(t0, row)| {
                row.iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let m = self.mass[t0][i];
                        (m > S::zero()).then(|| v / m)
                    })
                    .collect()
            })
            .collect()
    }

    /// Backward induction over the tree; ties to the lowest action.
    pub fn best_response(&self) -> (Vec<Vec<usize>>, S) {
        let n = self.mass.len();
        let mut w: Vec<Vec<S>> = vec![Vec::new(); n];
        let mut strategy: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in (1..=n).rev() {
            let (vals, acts): (Vec<S>, Vec<usize>) = (0..self.mass[t - 1].len())
                .into_par_iter()
                .map(|i| {
                    if self.mass[t - 1][i] <= S::zero() {
                        return (S::zero(), 0);
                    }
                    let mut best = (S::infinity(), 0);
                    for (u, &c) in self.cost[t - 1][i].iter().enumerate() {
                        let cont: S =
                            if t < n { self.children[t - 1][i][u].iter().map(|&c| w[t][c]).sum() } else { S::zero() };
                        let v = (c + cont) / self.mass[t - 1][i];
                        if v < best.0 {
                            best = (v, u);
                        }
                    }
                    (best.0 * self.mass[t - 1][i], best.1)
                })
                .unzip();
            w[t - 1] = vals;
            strategy[t - 1] = acts;
        }
        let payoff = w[0].iter().copied().sum();
        (strategy, payoff)
    }
}

struct Builder<'a, S> {
    spec: &'a ProblemSpec<S>,
    pattern: &'a InfoPattern,
    profile: &'a StrategyProfile,
    k: usize,
    others: Vec<usize>,
    hidden_radix: Vec<MixedRadix>,
    tree: &'a mut AgentTree<S>,
    hist: History,
}

impl<S: Scalar> Builder<'_, S> {
    fn rec(&mut self, t: usize, x: usize, prev: usize, mass: S) {
        let spec = self.spec;
        let k_all = spec.num_agents();
        let radix = super::joint_obs_radix(spec);
        let nh = self.hidden_radix[t - 1].size();
        for yi in 0..radix.size() {
            let ys = radix.decode(yi);
            let m = mass * joint_obs_prob(spec, t, x, prev, &ys);
            if m <= S::zero() {
                continue;
            }
            self.hist.observations.push(ys);
            let i = self.pattern.info_index_from_history(self.k, t, &self.hist);
            let h = self.hidden_radix[t - 1].encode(self.others.iter().map(|&j| {
                let lam = self.pattern.from_history(j, t, &self.hist).private;
                self.pattern.private_index(j, t, &lam)
            }));
            self.tree.mass[t - 1][i] = self.tree.mass[t - 1][i] + m;
            let cell = &mut self.tree.hidden[t - 1][i][x * nh + h];
            *cell = *cell + m;
            let mut us: Vec<usize> = (0..k_all)
                .map(|j| if j == self.k { 0 } else { self.profile.action(j, t, self.pattern.info_index_from_history(j, t, &self.hist)) })
                .collect();
            for u in 0..spec.num_actions(self.k) {
                us[self.k] = u;
                let ju = spec.joint_action_index(&us);
                let c = &mut self.tree.cost[t - 1][i][u];
                *c = *c + m * spec.stage_cost(t, x, ju);
                if t < spec.horizon {
                    self.hist.actions.push(us.clone());
                    for x2 in 0..spec.num_states() {
                        let s = spec.transition_prob(x, ju, x2);
                        if s > S::zero() {
                            self.rec(t + 1, x2, ju, m * s);
                        }
                    }
                    self.hist.actions.pop();
                }
            }
            self.hist.observations.pop();
        }
    }
}

/// Exact best response of agent `k` to the others in `profile`, by backward
/// induction on the raw history tree. Returns the strategy (`[t-1][i]`) and `J_n`.
pub fn tree_best_response<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, k: usize) -> (Vec<Vec<usize>>, S) {
    AgentTree::build(spec, profile, k).best_response()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_paper_example;
    use crate::oracle::exact_payoff;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tree_payoff_matches_joint_law() {
        let p = build_paper_example::<f64>();
        let pat = p.pattern();
        for seed in 0..5 {
            let profile = StrategyProfile::random(&pat, seed);
            for k in 0..2 {
                let tree = AgentTree::build(&p, &profile, k);
                assert_abs_diff_eq!(tree.payoff(profile.agent(k)), exact_payoff(&p, &profile), epsilon = 1e-12);
                let (br, v) = tree.best_response();
                assert_abs_diff_eq!(exact_payoff(&p, &profile.with_agent(k, br)), v, epsilon = 1e-12);
                assert!(v <= exact_payoff(&p, &profile) + 1e-12);
            }
        }
    }

    #[test]
    fn single_stage_is_myopic() {
        let mut p = build_paper_example::<f64>();
        p.horizon = 1;
        p.delay = 1;
        p.cost.truncate(1);
        let profile = StrategyProfile::lowest_index(&p.pattern());
        let (br, _) = tree_best_response(&p, &profile, 0);
        // agent 1 cost: c1 costs 0 in s1 and 8 in s2; c2 costs 1 and 2
        let tree = AgentTree::build(&p, &profile, 0);
        for y in 0..2 {
            let post = tree.posterior(1, y).unwrap();
            let ps1: f64 = post[..2].iter().sum();
            let c1 = 8.0 * (1.0 - ps1);
            let c2 = ps1 + 2.0 * (1.0 - ps1);
            assert_eq!(br[0][y], if c2 < c1 { 1 } else { 0 });
        }
    }
}
