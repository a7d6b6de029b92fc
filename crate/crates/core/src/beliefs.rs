//! Private posteriors `Xi_t^k`, centralized posteriors `Theta_t` and `Pi_t`,
//! and the one-step predictive measures they induce.
//!
//! Posteriors are dense vectors. A private posterior for agent `k` lives on
//! `X x Lambda_t^{-k}`, stored at `x * |Lambda_t^{-k}| + h` where `h` is the
//! mixed-radix index of the other agents' private components in ascending agent
//! order. `Pi_t` uses the same layout over all agents.
//!
//! Zero normalizers never produce a pmf: updates return `None` and the caller
//! treats the realization as off-support.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::info::{InfoPattern, InfoRealization, MixedRadix, PrivateComponent, SharedStage};
use crate::model::ProblemSpec;
use crate::scalar::{normalize, Scalar};
use crate::strategy::StrategyProfile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("impossible observation {label} for agent {agent} at stage 1")]
    ImpossibleObservation { agent: usize, label: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivatePosterior<S> {
    pub agent: usize,
    pub stage: usize,
    pub num_states: usize,
    pub probs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaPosterior<S> {
    pub stage: usize,
    pub probs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiPosterior<S> {
    pub stage: usize,
    pub num_states: usize,
    pub probs: Vec<S>,
}

impl<S: Scalar> PrivatePosterior<S> {
    pub fn hidden_count(&self) -> usize {
        self.probs.len() / self.num_states
    }

    pub fn get(&self, x: usize, hidden: usize) -> S {
        self.probs[x * self.hidden_count() + hidden]
    }

    pub fn state_marginal(&self) -> Vec<S> {
        state_marginal(&self.probs, self.num_states)
    }
}

impl<S: Scalar> PiPosterior<S> {
    pub fn state_marginal(&self) -> Vec<S> {
        state_marginal(&self.probs, self.num_states)
    }
}

fn state_marginal<S: Scalar>(probs: &[S], n: usize) -> Vec<S> {
    let h = probs.len() / n;
    (0..n).map(|x| probs[x * h..(x + 1) * h].iter().copied().sum()).collect()
}

/// Agents other than `k`, ascending.
pub fn others(k: usize, num_agents: usize) -> Vec<usize> {
    (0..num_agents).filter(|&j| j != k).collect()
}

/// Mixed radix over the private spaces of `agents` at stage `t`.
pub(crate) fn hidden_radix(pattern: &InfoPattern, agents: &[usize], t: usize) -> MixedRadix {
    MixedRadix::new(agents.iter().map(|&j| pattern.private_count(j, t)).collect())
}

/// How the entries leaving the hidden agents' windows are treated.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Dropped<'a> {
    /// Keep only prior mass whose leaving entries equal these (aligned with the hidden agents).
    Condition { obs: &'a [usize], actions: &'a [usize] },
    /// Sum over them.
    Marginalize,
}

/// The agent whose own observation enters the update, if any.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Observer {
    pub agent: usize,
    pub action: usize,
    /// `None` sums over every next observation.
    pub next_obs: Option<usize>,
}

/// One weighted successor of a prior entry.
pub(crate) struct Successor<'a> {
    pub next_state: usize,
    pub next_hidden: usize,
    pub observer_obs: usize,
    /// Hidden agents' entries leaving the window (empty if nothing is shared by this step).
    pub dropped_obs: &'a [usize],
    pub dropped_actions: &'a [usize],
}

/// Enumerates weighted successors of `prior` (a pmf on `X x Lambda_t^H`).
/// `act(j, p)` is hidden agent `j`'s stage-`t` action at private index `p`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn for_each_successor<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    t: usize,
    hidden: &[usize],
    prior: &[S],
    observer: Option<Observer>,
    dropped: Dropped<'_>,
    act: impl Fn(usize, usize) -> usize,
    mut emit: impl FnMut(&Successor<'_>, S),
) {
    let k_all = spec.num_agents();
    let radix = hidden_radix(pattern, hidden, t);
    let next_radix = hidden_radix(pattern, hidden, t + 1);
    let nh = radix.size();
    let shares = pattern.shares_on_extend(t);
    let obs_radix = MixedRadix::new(hidden.iter().map(|&j| spec.num_obs(j)).collect());
    let mut joint = vec![0usize; k_all];
    if let Some(o) = observer {
        joint[o.agent] = o.action;
    }
    let mut privates: Vec<PrivateComponent> = Vec::with_capacity(hidden.len());
    let mut acts = vec![0usize; hidden.len()];
    let mut d_obs = Vec::with_capacity(hidden.len());
    let mut d_act = Vec::with_capacity(hidden.len());
    let mut next_digits = vec![0usize; hidden.len()];
    let observer_ys: Vec<usize> = match observer {
        None => vec![0],
        Some(Observer { next_obs: Some(y), .. }) => vec![y],
        Some(Observer { agent, .. }) => (0..spec.num_obs(agent)).collect(),
    };

    for (e, &p) in prior.iter().enumerate() {
        if p <= S::zero() {
            continue;
        }
        let x = e / nh;
        let digits = radix.decode(e % nh);
        privates.clear();
        d_obs.clear();
        d_act.clear();
        for (i, &j) in hidden.iter().enumerate() {
            let lam = pattern.private_at(j, t, digits[i]);
            let u = act(j, digits[i]);
            acts[i] = u;
            joint[j] = u;
            if shares {
                d_obs.push(lam.observations[0]);
                d_act.push(lam.actions.first().copied().unwrap_or(u));
            }
            privates.push(lam);
        }
        if let (true, Dropped::Condition { obs, actions }) = (shares, dropped) {
            if d_obs != obs || d_act != actions {
                continue;
            }
        }
        let ju = spec.joint_action_index(&joint);
        for x2 in 0..spec.num_states() {
            let s = spec.transition_prob(x, ju, x2);
            if s <= S::zero() {
                continue;
            }
            for ys_idx in 0..obs_radix.size() {
                let ys = obs_radix.decode(ys_idx);
                let mut q = p * s;
                for (i, &j) in hidden.iter().enumerate() {
                    q = q * spec.obs_prob(j, x2, ju, ys[i]);
                }
                if q <= S::zero() {
                    continue;
                }
                for (i, &j) in hidden.iter().enumerate() {
                    let (_, next) = pattern.slide(j, t, &privates[i], ys[i], acts[i]);
                    next_digits[i] = pattern.private_index(j, t + 1, &next);
                }
                let next_hidden = next_radix.encode(next_digits.iter().copied());
                for &y in &observer_ys {
                    let w = match observer {
                        Some(o) => q * spec.obs_prob(o.agent, x2, ju, y),
                        None => q,
                    };
                    if w <= S::zero() {
                        continue;
                    }
                    let succ = Successor {
                        next_state: x2,
                        next_hidden,
                        observer_obs: y,
                        dropped_obs: &d_obs,
                        dropped_actions: &d_act,
                    };
                    emit(&succ, w);
                }
            }
        }
    }
}

pub(crate) fn profile_actions<'a>(
    pattern: &'a InfoPattern,
    profile: &'a StrategyProfile,
    t: usize,
    shared_index: usize,
) -> impl Fn(usize, usize) -> usize + 'a {
    move |j, p| profile.action(j, t, pattern.info_index_parts(j, t, shared_index, p))
}

/// `Xi_1^k[y]`: joint pmf of `X_1` and the other agents' first observations.
pub fn private_init<S: Scalar>(spec: &ProblemSpec<S>, k: usize, y: usize) -> Result<PrivatePosterior<S>, BeliefError> {
    let hidden = others(k, spec.num_agents());
    let obs_radix = MixedRadix::new(hidden.iter().map(|&j| spec.num_obs(j)).collect());
    let nh = obs_radix.size();
    let mut probs = vec![S::zero(); spec.num_states() * nh];
    for x in 0..spec.num_states() {
        let base = spec.initial[x] * spec.initial_obs_prob(k, x, y);
        for h in 0..nh {
            let ys = obs_radix.decode(h);
            probs[x * nh + h] = hidden
                .iter()
                .zip(&ys)
                .fold(base, |acc, (&j, &yj)| acc * spec.initial_obs_prob(j, x, yj));
        }
    }
    normalize(&mut probs).ok_or_else(|| BeliefError::ImpossibleObservation {
        agent: k,
        label: spec.agents[k].observations[y].clone(),
    })?;
    Ok(PrivatePosterior { agent: k, stage: 1, num_states: spec.num_states(), probs })
}

/// One step of the private filter: `Xi_{t+1}^k` from `Xi_t^k`, the stage-`t`
/// realization, the next own observation and own action, and (when a stage is
/// shared by the step) the other agents' newly shared entries.
///
/// Returns the posterior together with the conditional probability of the
/// step's new information, or `None` when that probability is zero.
#[allow(clippy::too_many_arguments)]
pub fn private_update<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    xi: &PrivatePosterior<S>,
    i: &InfoRealization,
    next_obs: usize,
    action: usize,
    others_obs: &[usize],
    others_actions: &[usize],
    profile: &StrategyProfile,
) -> Option<(PrivatePosterior<S>, S)> {
    let (k, t) = (i.agent, i.stage);
    let hidden = others(k, spec.num_agents());
    let nh2 = hidden_radix(pattern, &hidden, t + 1).size();
    let mut out = vec![S::zero(); spec.num_states() * nh2];
    for_each_successor(
        spec,
        pattern,
        t,
        &hidden,
        &xi.probs,
        Some(Observer { agent: k, action, next_obs: Some(next_obs) }),
        Dropped::Condition { obs: others_obs, actions: others_actions },
        profile_actions(pattern, profile, t, pattern.shared_index(t, &i.shared)),
        |s, w| out[s.next_state * nh2 + s.next_hidden] = out[s.next_state * nh2 + s.next_hidden] + w,
    );
    let mass = normalize(&mut out)?;
    Some((PrivatePosterior { agent: k, stage: t + 1, num_states: spec.num_states(), probs: out }, mass))
}

/// `P(y_{t+1}^k | xi_t^k, delta_t, u_t^k)`.
pub fn predictive_obs<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    xi: &PrivatePosterior<S>,
    i: &InfoRealization,
    action: usize,
    profile: &StrategyProfile,
) -> Vec<S> {
    let (k, t) = (i.agent, i.stage);
    let mut out = vec![S::zero(); spec.num_obs(k)];
    for_each_successor(
        spec,
        pattern,
        t,
        &others(k, spec.num_agents()),
        &xi.probs,
        Some(Observer { agent: k, action, next_obs: None }),
        Dropped::Marginalize,
        profile_actions(pattern, profile, t, pattern.shared_index(t, &i.shared)),
        |s, w| out[s.observer_obs] = out[s.observer_obs] + w,
    );
    out
}

/// Layout of the one-step increment `(y_{t+1}^k, y_{t-T+1}^{-k}, u_{t-T+1}^{-k})`
/// that turns `i_t^k` into `i_{t+1}^k`.
#[derive(Debug, Clone)]
pub struct IncrementSpace {
    pub agent: usize,
    pub stage: usize,
    pub shares: bool,
    radix: MixedRadix,
}

impl IncrementSpace {
    pub fn new<S: Scalar>(spec: &ProblemSpec<S>, pattern: &InfoPattern, k: usize, t: usize) -> Self {
        let shares = pattern.shares_on_extend(t);
        let mut r = vec![spec.num_obs(k)];
        if shares {
            for j in others(k, spec.num_agents()) {
                r.push(spec.num_obs(j));
                r.push(spec.num_actions(j));
            }
        }
        IncrementSpace { agent: k, stage: t, shares, radix: MixedRadix::new(r) }
    }

    pub fn size(&self) -> usize {
        self.radix.size()
    }

    pub fn encode(&self, next_obs: usize, others_obs: &[usize], others_actions: &[usize]) -> usize {
        let mut d = vec![next_obs];
        for (y, u) in others_obs.iter().zip(others_actions) {
            d.push(*y);
            d.push(*u);
        }
        self.radix.encode(d)
    }

    /// `(y_{t+1}^k, others' observations, others' actions)`.
    pub fn decode(&self, index: usize) -> (usize, Vec<usize>, Vec<usize>) {
        let d = self.radix.decode(index);
        let obs = d[1..].iter().step_by(2).copied().collect();
        let acts = d[1..].iter().skip(1).step_by(2).copied().collect();
        (d[0], obs, acts)
    }
}

/// Stage transition measure: probability of each increment given
/// `(xi_t^k, delta_t, u_t^k)`. It never reads `lambda_t^k`.
#[allow(clippy::too_many_arguments)]
pub fn stage_measure<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    space: &IncrementSpace,
    xi: &PrivatePosterior<S>,
    shared_index: usize,
    action: usize,
    profile: &StrategyProfile,
) -> Vec<S> {
    let (k, t) = (space.agent, space.stage);
    let mut out = vec![S::zero(); space.size()];
    for_each_successor(
        spec,
        pattern,
        t,
        &others(k, spec.num_agents()),
        &xi.probs,
        Some(Observer { agent: k, action, next_obs: None }),
        Dropped::Marginalize,
        profile_actions(pattern, profile, t, shared_index),
        |s, w| {
            let idx = space.encode(s.observer_obs, s.dropped_obs, s.dropped_actions);
            out[idx] = out[idx] + w;
        },
    );
    out
}

/// Forward table of `Xi_t^k` over every realization; `None` marks off-support.
#[derive(Debug, Clone)]
pub struct PrivateBeliefTable<S> {
    pub agent: usize,
    /// `[stage - 1][info index]`.
    pub stages: Vec<Vec<Option<PrivatePosterior<S>>>>,
}

impl<S: Scalar> PrivateBeliefTable<S> {
    /// Only the other agents' strategies in `profile` are consulted.
    pub fn compute(spec: &ProblemSpec<S>, pattern: &InfoPattern, profile: &StrategyProfile, k: usize) -> Self {
        let first: Vec<_> = (0..pattern.info_count(k, 1))
            .map(|idx| {
                let i = pattern.info_at(k, 1, idx);
                private_init(spec, k, i.private.observations[0]).ok()
            })
            .collect();
        let mut stages = vec![first];
        for t in 1..pattern.horizon() {
            let prev = &stages[t - 1];
            let next: Vec<_> = (0..pattern.info_count(k, t + 1))
                .into_par_iter()
                .map(|idx| {
                    let i = pattern.info_at(k, t + 1, idx);
                    let ext = pattern.split_last(&i).expect("stage >= 2");
                    let xi = prev[pattern.info_index(&ext.parent)].as_ref()?;
                    private_update(
                        spec,
                        pattern,
                        xi,
                        &ext.parent,
                        ext.next_obs,
                        ext.action,
                        &ext.others_obs,
                        &ext.others_actions,
                        profile,
                    )
                    .map(|(p, _)| p)
                })
                .collect();
            stages.push(next);
        }
        PrivateBeliefTable { agent: k, stages }
    }

    pub fn get(&self, t: usize, index: usize) -> Option<&PrivatePosterior<S>> {
        self.stages[t - 1][index].as_ref()
    }

    pub fn reachable(&self, t: usize, index: usize) -> bool {
        self.stages[t - 1][index].is_some()
    }
}

/// `Theta_{T+1}[delta]`: `P(x_1 | y_1^(K))`.
pub fn theta_init<S: Scalar>(spec: &ProblemSpec<S>, first: &SharedStage) -> Option<ThetaPosterior<S>> {
    let mut probs: Vec<S> = (0..spec.num_states())
        .map(|x| {
            (0..spec.num_agents()).fold(spec.initial[x], |acc, j| acc * spec.initial_obs_prob(j, x, first.observations[j]))
        })
        .collect();
    normalize(&mut probs)?;
    Some(ThetaPosterior { stage: spec.delay + 1, probs })
}

/// `Theta_{t+1}` from `Theta_t`, the stage `t-T+1` observations and stage `t-T` actions.
pub fn theta_update<S: Scalar>(
    spec: &ProblemSpec<S>,
    theta: &ThetaPosterior<S>,
    observations: &[usize],
    actions: &[usize],
) -> Option<ThetaPosterior<S>> {
    let ju = spec.joint_action_index(actions);
    let mut probs: Vec<S> = (0..spec.num_states())
        .map(|x2| {
            let q = (0..spec.num_agents()).fold(S::one(), |acc, j| acc * spec.obs_prob(j, x2, ju, observations[j]));
            theta
                .probs
                .iter()
                .enumerate()
                .map(|(x, &p)| p * spec.transition_prob(x, ju, x2))
                .sum::<S>()
                * q
        })
        .collect();
    normalize(&mut probs)?;
    Some(ThetaPosterior { stage: theta.stage + 1, probs })
}

/// `Theta_t[delta_t]` run forward along `delta_t`; `None` for `t <= T` or zero-probability `delta`.
pub fn theta_for<S: Scalar>(spec: &ProblemSpec<S>, t: usize, shared: &crate::info::SharedHistory) -> Option<ThetaPosterior<S>> {
    let stages = &shared.stages;
    let first = stages.first()?;
    let mut theta = theta_init(spec, first)?;
    for s in 1..stages.len() {
        theta = theta_update(spec, &theta, &stages[s].observations, &stages[s - 1].actions)?;
    }
    debug_assert_eq!(theta.stage, t);
    Some(theta)
}

/// `Pi_1`: joint pmf of `X_1` and every agent's first observation.
pub fn pi_init<S: Scalar>(spec: &ProblemSpec<S>) -> PiPosterior<S> {
    let obs_radix = MixedRadix::new((0..spec.num_agents()).map(|j| spec.num_obs(j)).collect());
    let nh = obs_radix.size();
    let mut probs = vec![S::zero(); spec.num_states() * nh];
    for x in 0..spec.num_states() {
        for h in 0..nh {
            let ys = obs_radix.decode(h);
            probs[x * nh + h] =
                ys.iter().enumerate().fold(spec.initial[x], |acc, (j, &y)| acc * spec.initial_obs_prob(j, x, y));
        }
    }
    PiPosterior { stage: 1, num_states: spec.num_states(), probs }
}

/// `Pi_{t+1}[delta_{t+1}]` from `Pi_t[delta_t]`; `new_stage` is the stage
/// `t-T+1` block appended to `delta_t` (ignored when nothing is shared).
/// Returns the posterior and `P(delta_{t+1} | delta_t)`.
pub fn pi_update<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    pi: &PiPosterior<S>,
    shared_index: usize,
    new_stage: Option<&SharedStage>,
    profile: &StrategyProfile,
) -> Option<(PiPosterior<S>, S)> {
    pi_update_with(spec, pattern, pi, new_stage, profile_actions(pattern, profile, pi.stage, shared_index))
}

/// [`pi_update`] with stage-`t` actions given as `act(j, private index)`.
pub(crate) fn pi_update_with<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    pi: &PiPosterior<S>,
    new_stage: Option<&SharedStage>,
    act: impl Fn(usize, usize) -> usize,
) -> Option<(PiPosterior<S>, S)> {
    let t = pi.stage;
    let all: Vec<usize> = (0..spec.num_agents()).collect();
    let nh2 = hidden_radix(pattern, &all, t + 1).size();
    let mut out = vec![S::zero(); spec.num_states() * nh2];
    let dropped = match new_stage {
        Some(s) => Dropped::Condition { obs: &s.observations, actions: &s.actions },
        None => Dropped::Marginalize,
    };
    for_each_successor(spec, pattern, t, &all, &pi.probs, None, dropped, act, |s, w| {
        out[s.next_state * nh2 + s.next_hidden] = out[s.next_state * nh2 + s.next_hidden] + w
    });
    let mass = normalize(&mut out)?;
    Some((PiPosterior { stage: t + 1, num_states: spec.num_states(), probs: out }, mass))
}

/// `Pi_t[delta]` for every stage and shared realization (`[stage - 1][shared index]`).
pub fn pi_table<S: Scalar>(
    spec: &ProblemSpec<S>,
    pattern: &InfoPattern,
    profile: &StrategyProfile,
) -> Vec<Vec<Option<PiPosterior<S>>>> {
    let mut table = vec![vec![Some(pi_init(spec))]];
    for t in 1..pattern.horizon() {
        let shares = pattern.shares_on_extend(t);
        let prev = &table[t - 1];
        let next: Vec<_> = (0..pattern.shared_count(t + 1))
            .into_par_iter()
            .map(|idx| {
                let delta = pattern.shared_at(t + 1, idx);
                let parent = delta.prefix(pattern.shared_len(t));
                let pidx = pattern.shared_index(t, &parent);
                let pi = prev[pidx].as_ref()?;
                let stage = if shares { delta.stages.last() } else { None };
                pi_update(spec, pattern, pi, pidx, stage, profile).map(|(p, _)| p)
            })
            .collect();
        table.push(next);
    }
    table
}

/// `Theta_t[delta]` for every `t > T` and shared realization (`[stage - 1][shared index]`; empty for `t <= T`).
pub fn theta_table<S: Scalar>(spec: &ProblemSpec<S>, pattern: &InfoPattern) -> Vec<Vec<Option<ThetaPosterior<S>>>> {
    (1..=pattern.horizon())
        .map(|t| {
            if pattern.shared_len(t) == 0 {
                return Vec::new();
            }
            (0..pattern.shared_count(t))
                .into_par_iter()
                .map(|idx| theta_for(spec, t, &pattern.shared_at(t, idx)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_paper_example;
    use approx::assert_abs_diff_eq;

    #[test]
    fn paper_private_init() {
        let p = build_paper_example::<f64>();
        let xi = private_init(&p, 0, 1).unwrap();
        assert_abs_diff_eq!(xi.state_marginal()[0], 7.0 / 34.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xi.get(0, 0), 7.0 / 34.0 * 0.7, epsilon = 1e-15);
        let total: f64 = xi.probs.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_init_is_point_mass() {
        let mut p = build_paper_example::<f64>();
        p.initial_obs[0] = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let xi = private_init(&p, 0, 0).unwrap();
        assert_eq!(xi.state_marginal(), vec![1.0, 0.0]);
    }

    #[test]
    fn impossible_first_observation() {
        let mut p = build_paper_example::<f64>();
        p.initial_obs[0] = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(private_init(&p, 0, 1), Err(BeliefError::ImpossibleObservation { .. })));
    }

    #[test]
    fn paper_theta() {
        let p = build_paper_example::<f64>();
        let th = theta_init(&p, &SharedStage { observations: vec![1, 1], actions: vec![0, 0] }).unwrap();
        assert_abs_diff_eq!(th.probs[0], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn predictive_sums_to_one() {
        let p = build_paper_example::<f64>();
        let pat = p.pattern();
        let profile = StrategyProfile::random(&pat, 3);
        let table = PrivateBeliefTable::compute(&p, &pat, &profile, 1);
        for t in 1..3 {
            for idx in 0..pat.info_count(1, t) {
                if let Some(xi) = table.get(t, idx) {
                    let i = pat.info_at(1, t, idx);
                    for u in 0..2 {
                        let pr = predictive_obs(&p, &pat, xi, &i, u, &profile);
                        assert_abs_diff_eq!(pr.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                        let m = stage_measure(&p, &pat, &IncrementSpace::new(&p, &pat, 1, t), xi, pat.shared_index(t, &i.shared), u, &profile);
                        assert_abs_diff_eq!(m.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pi_tables_normalized() {
        let p = build_paper_example::<f64>();
        let pat = p.pattern();
        let profile = StrategyProfile::lowest_index(&pat);
        for stage in pi_table(&p, &pat, &profile) {
            for pi in stage.into_iter().flatten() {
                assert_abs_diff_eq!(pi.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }
}
