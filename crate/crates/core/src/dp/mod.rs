//! Per-agent backward dynamic programming over information realizations,
//! person-by-person iteration, equilibrium verification and structural reports.

mod compress;
mod iterate;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::beliefs::{hidden_radix, others, stage_measure, IncrementSpace, PrivateBeliefTable};
use crate::info::{InfoPattern, MixedRadix};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

pub use compress::{compression_report, CompressionReport, StageCompression};
pub use iterate::{pbp_iterate, pbp_iterate_with, verify_equilibrium, verify_equilibrium_with, EquilibriumReport, Mode, VerificationReport};

/// Equality slack when picking the lowest-index minimizer.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Numerical slack used by the iteration and the equilibrium test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative slack under which two minimands count as tied.
    pub tie: f64,
    /// Largest best-response gap still accepted as an equilibrium.
    pub equilibrium: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tie: TIE_TOLERANCE, equilibrium: iterate::EQUILIBRIUM_TOLERANCE }
    }
}

#[derive(Debug, Clone, Error)]
pub enum DpError {
    #[error("no fixed point after {sweeps} sweeps")]
    NotConverged { sweeps: usize, last: Box<StrategyProfile>, previous: Box<StrategyProfile> },
    #[error("agent {agent} stage {stage}: continuation {index} has positive weight but is off-support")]
    Inconsistent { agent: usize, stage: usize, index: usize },
}

/// Values `V_t(i_t^k)` and minimizers for one agent; `None` marks unreachable realizations.
#[derive(Debug, Clone, Serialize)]
pub struct ValueTable<S> {
    pub agent: usize,
    /// `[t-1][info index]`.
    pub values: Vec<Vec<Option<S>>>,
    pub actions: Vec<Vec<usize>>,
    /// Minimand for every action, `[t-1][info index][u]`.
    #[serde(skip)]
    pub qvalues: Vec<Vec<Option<Vec<S>>>>,
}

impl<S: Scalar> ValueTable<S> {
    pub fn value(&self, t: usize, index: usize) -> Option<S> {
        self.values[t - 1][index]
    }

    pub fn action(&self, t: usize, index: usize) -> usize {
        self.actions[t - 1][index]
    }

    /// Actions within `tol` of the minimum at a reachable realization.
    pub fn argmin_set(&self, t: usize, index: usize, tol: f64) -> Option<Vec<usize>> {
        let q = self.qvalues[t - 1][index].as_ref()?;
        let m = q.iter().copied().fold(S::infinity(), S::min);
        Some((0..q.len()).filter(|&u| q[u] <= m + S::lit(tol)).collect())
    }
}

/// Result of one backward stage.
#[derive(Debug, Clone)]
pub struct StageSolution<S> {
    pub values: Vec<Option<S>>,
    pub actions: Vec<usize>,
    pub qvalues: Vec<Option<Vec<S>>>,
}

fn argmin<S: Scalar>(q: &[S], tie: f64) -> (S, usize) {
    let m = q.iter().copied().fold(S::infinity(), S::min);
    let slack = S::lit(tie) * m.abs().max(S::one());
    let u = q.iter().position(|&v| v <= m + slack).expect("nonempty action set");
    (q[u], u)
}

/// Agent `k`'s DP against the other agents' strategies in a fixed profile.
pub struct AgentDp<'a, S> {
    spec: &'a ProblemSpec<S>,
    pattern: &'a InfoPattern,
    profile: &'a StrategyProfile,
    k: usize,
    beliefs: PrivateBeliefTable<S>,
    hidden: Vec<usize>,
    tie: f64,
}

impl<'a, S: Scalar> AgentDp<'a, S> {
    pub fn new(spec: &'a ProblemSpec<S>, pattern: &'a InfoPattern, profile: &'a StrategyProfile, k: usize) -> Self {
        AgentDp {
            spec,
            pattern,
            profile,
            k,
            beliefs: PrivateBeliefTable::compute(spec, pattern, profile, k),
            hidden: others(k, spec.num_agents()),
            tie: TIE_TOLERANCE,
        }
    }

    pub fn with_tie_tolerance(mut self, tie: f64) -> Self {
        self.tie = tie;
        self
    }

    pub fn beliefs(&self) -> &PrivateBeliefTable<S> {
        &self.beliefs
    }

    /// `E_xi[l(t, x, u, gamma_t^{-k}(delta, lambda^{-k}))]` for every own action.
    fn current_costs(&self, t: usize, shared_index: usize, xi: &[S]) -> Vec<S> {
        let spec = self.spec;
        let radix: MixedRadix = hidden_radix(self.pattern, &self.hidden, t);
        let nh = radix.size();
        let mut us = vec![0; spec.num_agents()];
        let mut out = vec![S::zero(); spec.num_actions(self.k)];
        for (e, &p) in xi.iter().enumerate() {
            if p <= S::zero() {
                continue;
            }
            let (x, h) = (e / nh, e % nh);
            for (&j, d) in self.hidden.iter().zip(radix.decode(h)) {
                us[j] = self.profile.action(j, t, self.pattern.info_index_parts(j, t, shared_index, d));
            }
            for (u, slot) in out.iter_mut().enumerate() {
                us[self.k] = u;
                *slot = *slot + p * spec.stage_cost(t, x, spec.joint_action_index(&us));
            }
        }
        out
    }

    /// Continuation `sum_inc P(inc | xi, delta, u) * next(extend(i, inc))`.
    fn continuation(
        &self,
        t: usize,
        index: usize,
        space: &IncrementSpace,
        u: usize,
        next: &[Option<S>],
    ) -> Result<S, DpError> {
        let xi = self.beliefs.get(t, index).expect("reachable");
        let i = self.pattern.info_at(self.k, t, index);
        let shared_index = index / self.pattern.private_count(self.k, t);
        let m = stage_measure(self.spec, self.pattern, space, xi, shared_index, u, self.profile);
        let mut total = S::zero();
        for (inc, &w) in m.iter().enumerate() {
            if w <= S::zero() {
                continue;
            }
            let (y, oy, ou) = space.decode(inc);
            let child = self.pattern.extend_info(&i, y, u, &oy, &ou).expect("valid increment");
            let ci = self.pattern.info_index(&child);
            let v = next[ci].ok_or(DpError::Inconsistent { agent: self.k, stage: t, index: ci })?;
            total = total + w * v;
        }
        Ok(total)
    }

    /// Minimand for every action at every reachable stage-`t` realization.
    pub fn qvalues(&self, t: usize, next: Option<&[Option<S>]>) -> Result<Vec<Option<Vec<S>>>, DpError> {
        let space = IncrementSpace::new(self.spec, self.pattern, self.k, t);
        let np = self.pattern.private_count(self.k, t);
        (0..self.pattern.info_count(self.k, t))
            .into_par_iter()
            .map(|idx| {
                let Some(xi) = self.beliefs.get(t, idx) else { return Ok(None) };
                let mut q = self.current_costs(t, idx / np, &xi.probs);
                if let Some(next) = next {
                    for (u, slot) in q.iter_mut().enumerate() {
                        *slot = *slot + self.continuation(t, idx, &space, u, next)?;
                    }
                }
                Ok(Some(q))
            })
            .collect()
    }

    /// One backward stage; `next` is `None` at the horizon.
    pub fn stage(&self, t: usize, next: Option<&[Option<S>]>) -> Result<StageSolution<S>, DpError> {
        let qvalues = self.qvalues(t, next)?;
        let (values, actions) = qvalues
            .iter()
            .map(|q| match q {
                Some(q) => {
                    let (v, u) = argmin(q, self.tie);
                    (Some(v), u)
                }
                None => (None, 0),
            })
            .unzip();
        Ok(StageSolution { values, actions, qvalues })
    }

    /// Optimal stages `n` down to `from`; entry `t - from` holds stage `t`.
    pub fn backward(&self, from: usize) -> Result<Vec<StageSolution<S>>, DpError> {
        let n = self.spec.horizon;
        let mut out: Vec<StageSolution<S>> = Vec::new();
        for t in (from..=n).rev() {
            let sol = self.stage(t, out.last().map(|s| s.values.as_slice()))?;
            out.push(sol);
        }
        out.reverse();
        Ok(out)
    }

    /// Stage-`t` realizations with positive probability when agent `k` also
    /// follows `own` (`[t-1][i]`) at earlier stages.
    pub fn admissible(&self, t: usize, own: &[Vec<usize>]) -> Vec<bool> {
        let mut row: Vec<bool> = (0..self.pattern.info_count(self.k, 1)).map(|i| self.beliefs.reachable(1, i)).collect();
        for s in 2..=t {
            row = (0..self.pattern.info_count(self.k, s))
                .map(|i| {
                    self.beliefs.reachable(s, i) && {
                        let ext = self.pattern.split_last(&self.pattern.info_at(self.k, s, i)).expect("stage >= 2");
                        let p = self.pattern.info_index(&ext.parent);
                        row[p] && own[s - 2][p] == ext.action
                    }
                })
                .collect();
        }
        row
    }

    /// Probability of each first-stage realization.
    pub fn first_stage_weights(&self) -> Vec<S> {
        let spec = self.spec;
        (0..self.pattern.info_count(self.k, 1))
            .map(|y| (0..spec.num_states()).map(|x| spec.initial[x] * spec.initial_obs_prob(self.k, x, y)).sum())
            .collect()
    }

    pub fn best_response(&self) -> Result<BestResponse<S>, DpError> {
        let stages = self.backward(1)?;
        let w = self.first_stage_weights();
        let expected_value = stages[0]
            .values
            .iter()
            .zip(&w)
            .filter_map(|(v, &p)| v.map(|v| v * p))
            .sum();
        let table = ValueTable {
            agent: self.k,
            actions: stages.iter().map(|s| s.actions.clone()).collect(),
            values: stages.iter().map(|s| s.values.clone()).collect(),
            qvalues: stages.into_iter().map(|s| s.qvalues).collect(),
        };
        Ok(BestResponse { strategy: table.actions.clone(), table, expected_value })
    }

    /// Conditional cost-to-go of agent `k` playing `own` (`[t-1][i]`), and `J_n`.
    pub fn evaluate(&self, own: &[Vec<usize>]) -> Result<(Vec<Vec<Option<S>>>, S), DpError> {
        let n = self.spec.horizon;
        let mut values: Vec<Vec<Option<S>>> = vec![Vec::new(); n];
        for t in (1..=n).rev() {
            let space = IncrementSpace::new(self.spec, self.pattern, self.k, t);
            let np = self.pattern.private_count(self.k, t);
            let next = if t < n { Some(values[t].as_slice()) } else { None };
            let row: Result<Vec<Option<S>>, DpError> = (0..self.pattern.info_count(self.k, t))
                .into_par_iter()
                .map(|idx| {
                    let Some(xi) = self.beliefs.get(t, idx) else { return Ok(None) };
                    let u = own[t - 1][idx];
                    let mut v = self.current_costs(t, idx / np, &xi.probs)[u];
                    if let Some(next) = next {
                        v = v + self.continuation(t, idx, &space, u, next)?;
                    }
                    Ok(Some(v))
                })
                .collect();
            values[t - 1] = row?;
        }
        let j = values[0]
            .iter()
            .zip(self.first_stage_weights())
            .filter_map(|(v, p)| v.map(|v| v * p))
            .sum();
        Ok((values, j))
    }
}

#[derive(Debug, Clone)]
pub struct BestResponse<S> {
    pub table: ValueTable<S>,
    /// `[t-1][info index]`; unreachable realizations get action 0.
    pub strategy: Vec<Vec<usize>>,
    /// `E[V_1^k(I_1^k)]`, which equals `J_n` of the best response against the others.
    pub expected_value: S,
}

/// `V_n` and its minimizers for agent `k` against the others in `profile`.
pub fn terminal_stage<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, k: usize) -> Result<StageSolution<S>, DpError> {
    let pattern = spec.pattern();
    AgentDp::new(spec, &pattern, profile, k).stage(spec.horizon, None)
}

/// `V_t` given `V_{t+1}` (indexed by stage-`t+1` info index).
pub fn interior_stage<S: Scalar>(
    spec: &ProblemSpec<S>,
    profile: &StrategyProfile,
    k: usize,
    t: usize,
    next: &[Option<S>],
) -> Result<StageSolution<S>, DpError> {
    let pattern = spec.pattern();
    AgentDp::new(spec, &pattern, profile, k).stage(t, Some(next))
}

pub fn best_response<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, k: usize) -> Result<BestResponse<S>, DpError> {
    let pattern = spec.pattern();
    AgentDp::new(spec, &pattern, profile, k).best_response()
}

/// `J_n(gamma)` by policy evaluation from agent 0's side.
pub fn profile_payoff<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile) -> Result<S, DpError> {
    let pattern = spec.pattern();
    AgentDp::new(spec, &pattern, profile, 0).evaluate(profile.agent(0)).map(|(_, j)| j)
}
