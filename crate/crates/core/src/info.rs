//! Delayed-sharing information patterns.
//!
//! At stage `t` (1-based) agent `k` holds `i_t^k = (delta_t, lambda_t^k)`:
//!
//! * `delta_t`: every agent's observations and actions at stages `1..=t-T`
//!   (empty while `t <= T`);
//! * `lambda_t^k`: the agent's own observations at stages `w..=t` and own
//!   actions at stages `w..t`, where `w = max(1, t-T+1)`.
//!
//! Realizations are enumerated over all label combinations in lexicographic
//! order of the canonical tuple: shared block first (stage by stage, the
//! observations of agents `1..K` then their actions), followed by the private
//! observations and then the private actions. The position of a realization in
//! that order is its *index*, used to key strategy and value tables.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfoError {
    #[error("label {label} out of range for {what} (size {size})")]
    LabelOutOfRange { what: &'static str, label: usize, size: usize },
    #[error("cannot extend a stage-{stage} realization past horizon {horizon}")]
    PastHorizon { stage: usize, horizon: usize },
    #[error("stage {stage} does not share a new stage; expected no other-agent entries, got {got}")]
    UnexpectedShared { stage: usize, got: usize },
    #[error("expected {expected} other-agent entries, got {got}")]
    MissingShared { expected: usize, got: usize },
}

/// Mixed-radix bijection between digit tuples and `0..size()`; first digit most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MixedRadix {
    radices: Vec<usize>,
}

impl MixedRadix {
    pub(crate) fn new(radices: Vec<usize>) -> Self {
        MixedRadix { radices }
    }

    pub(crate) fn size(&self) -> usize {
        self.radices.iter().product()
    }

    pub(crate) fn encode(&self, digits: impl IntoIterator<Item = usize>) -> usize {
        let mut n = 0;
        let mut count = 0;
        for (d, r) in digits.into_iter().zip(&self.radices) {
            debug_assert!(d < *r);
            n = n * r + d;
            count += 1;
        }
        debug_assert_eq!(count, self.radices.len());
        n
    }

    pub(crate) fn decode(&self, mut n: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (i, r) in self.radices.iter().enumerate().rev() {
            out[i] = n % r;
            n /= r;
        }
        out
    }
}

/// Observations and actions of all agents at one shared stage.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SharedStage {
    pub observations: Vec<usize>,
    pub actions: Vec<usize>,
}

/// `delta_t`: shared stages `1..=t-T`, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct SharedHistory {
    pub stages: Vec<SharedStage>,
}

impl SharedHistory {
    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// The first `len` shared stages.
    pub fn prefix(&self, len: usize) -> SharedHistory {
        SharedHistory { stages: self.stages[..len].to_vec() }
    }
}

/// `lambda_t^k`: own observations at stages `w..=t` and own actions at `w..t`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct PrivateComponent {
    pub observations: Vec<usize>,
    pub actions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct InfoRealization {
    pub agent: usize,
    pub stage: usize,
    pub shared: SharedHistory,
    pub private: PrivateComponent,
}

/// Everything `extend_info` consumed to produce a stage `t+1` realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub parent: InfoRealization,
    pub next_obs: usize,
    pub action: usize,
    /// Other agents' stage `t-T+1` observations, ascending agent order without `k`; empty if nothing new is shared.
    pub others_obs: Vec<usize>,
    pub others_actions: Vec<usize>,
}

/// A full joint history of observations and actions (stage `s` at index `s-1`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    pub observations: Vec<Vec<usize>>,
    pub actions: Vec<Vec<usize>>,
}

/// Window geometry of a delayed-sharing pattern with given space sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoPattern {
    horizon: usize,
    delay: usize,
    obs_sizes: Vec<usize>,
    act_sizes: Vec<usize>,
}

impl InfoPattern {
    pub fn new(horizon: usize, delay: usize, obs_sizes: Vec<usize>, act_sizes: Vec<usize>) -> Self {
        assert_eq!(obs_sizes.len(), act_sizes.len());
        InfoPattern { horizon, delay, obs_sizes, act_sizes }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn num_agents(&self) -> usize {
        self.obs_sizes.len()
    }

    pub fn num_obs(&self, k: usize) -> usize {
        self.obs_sizes[k]
    }

    pub fn num_actions(&self, k: usize) -> usize {
        self.act_sizes[k]
    }

    /// Number of shared stages at stage `t`, i.e. `max(t - T, 0)`.
    pub fn shared_len(&self, t: usize) -> usize {
        t.saturating_sub(self.delay)
    }

    /// First stage of the private window at `t`.
    pub fn window_start(&self, t: usize) -> usize {
        (t + 1).saturating_sub(self.delay).max(1)
    }

    pub fn window_obs_len(&self, t: usize) -> usize {
        t + 1 - self.window_start(t)
    }

    pub fn window_act_len(&self, t: usize) -> usize {
        t - self.window_start(t)
    }

    /// Whether moving from `t` to `t+1` shares stage `t-T+1`.
    pub fn shares_on_extend(&self, t: usize) -> bool {
        self.shared_len(t + 1) > self.shared_len(t)
    }

    fn shared_radix(&self, t: usize) -> MixedRadix {
        let mut r = Vec::new();
        for _ in 0..self.shared_len(t) {
            r.extend(&self.obs_sizes);
            r.extend(&self.act_sizes);
        }
        MixedRadix::new(r)
    }

    fn private_radix(&self, k: usize, t: usize) -> MixedRadix {
        let mut r = vec![self.obs_sizes[k]; self.window_obs_len(t)];
        r.extend(std::iter::repeat_n(self.act_sizes[k], self.window_act_len(t)));
        MixedRadix::new(r)
    }

    pub fn shared_count(&self, t: usize) -> usize {
        self.shared_radix(t).size()
    }

    pub fn private_count(&self, k: usize, t: usize) -> usize {
        self.private_radix(k, t).size()
    }

    pub fn info_count(&self, k: usize, t: usize) -> usize {
        self.shared_count(t) * self.private_count(k, t)
    }

    pub fn shared_index(&self, t: usize, shared: &SharedHistory) -> usize {
        debug_assert_eq!(shared.stages.len(), self.shared_len(t));
        self.shared_radix(t).encode(
            shared
                .stages
                .iter()
                .flat_map(|s| s.observations.iter().chain(&s.actions).copied()),
        )
    }

    pub fn shared_at(&self, t: usize, index: usize) -> SharedHistory {
        let digits = self.shared_radix(t).decode(index);
        let k = self.num_agents();
        SharedHistory {
            stages: digits
                .chunks(2 * k)
                .map(|c| SharedStage { observations: c[..k].to_vec(), actions: c[k..].to_vec() })
                .collect(),
        }
    }

    pub fn private_index(&self, k: usize, t: usize, p: &PrivateComponent) -> usize {
        self.private_radix(k, t).encode(p.observations.iter().chain(&p.actions).copied())
    }

    pub fn private_at(&self, k: usize, t: usize, index: usize) -> PrivateComponent {
        let digits = self.private_radix(k, t).decode(index);
        let n = self.window_obs_len(t);
        PrivateComponent { observations: digits[..n].to_vec(), actions: digits[n..].to_vec() }
    }

    pub fn info_index(&self, i: &InfoRealization) -> usize {
        self.shared_index(i.stage, &i.shared) * self.private_count(i.agent, i.stage)
            + self.private_index(i.agent, i.stage, &i.private)
    }

    /// Index of `(shared, private)` given the shared index directly.
    pub fn info_index_parts(&self, k: usize, t: usize, shared_index: usize, private_index: usize) -> usize {
        shared_index * self.private_count(k, t) + private_index
    }

    pub fn info_at(&self, k: usize, t: usize, index: usize) -> InfoRealization {
        let np = self.private_count(k, t);
        InfoRealization {
            agent: k,
            stage: t,
            shared: self.shared_at(t, index / np),
            private: self.private_at(k, t, index % np),
        }
    }

    /// All `delta_t`, lexicographic in declared label order.
    pub fn enumerate_shared(&self, t: usize) -> Vec<SharedHistory> {
        (0..self.shared_count(t)).map(|i| self.shared_at(t, i)).collect()
    }

    /// All `i_t^k`: the product of [`enumerate_shared`](Self::enumerate_shared) with the private space.
    pub fn enumerate_info(&self, t: usize, k: usize) -> Vec<InfoRealization> {
        (0..self.info_count(k, t)).map(|i| self.info_at(k, t, i)).collect()
    }

    /// Slides agent `k`'s window from `t` to `t+1`. Returns the own stage
    /// `t-T+1` entries that leave the window (and enter the shared block).
    pub fn slide(
        &self,
        k: usize,
        t: usize,
        private: &PrivateComponent,
        next_obs: usize,
        action: usize,
    ) -> (Option<(usize, usize)>, PrivateComponent) {
        let _ = k;
        let mut obs = private.observations.clone();
        obs.push(next_obs);
        let mut acts = private.actions.clone();
        acts.push(action);
        if self.shares_on_extend(t) {
            let dropped = (obs.remove(0), acts.remove(0));
            (Some(dropped), PrivateComponent { observations: obs, actions: acts })
        } else {
            (None, PrivateComponent { observations: obs, actions: acts })
        }
    }

    /// `i_{t+1}^k = (i_t^k, y_{t+1}^k, u_t^k, y_{t-T+1}^{-k}, u_{t-T+1}^{-k})`.
    ///
    /// `others_obs`/`others_actions` list the other agents' entries in ascending
    /// agent order and must be empty when no stage is shared by the step.
    pub fn extend_info(
        &self,
        i: &InfoRealization,
        next_obs: usize,
        action: usize,
        others_obs: &[usize],
        others_actions: &[usize],
    ) -> Result<InfoRealization, InfoError> {
        let (k, t) = (i.agent, i.stage);
        if t >= self.horizon {
            return Err(InfoError::PastHorizon { stage: t, horizon: self.horizon });
        }
        check_label("observation", next_obs, self.obs_sizes[k])?;
        check_label("action", action, self.act_sizes[k])?;
        let (dropped, private) = self.slide(k, t, &i.private, next_obs, action);
        let mut shared = i.shared.clone();
        match dropped {
            None => {
                let got = others_obs.len() + others_actions.len();
                if got > 0 {
                    return Err(InfoError::UnexpectedShared { stage: t, got });
                }
            }
            Some((own_y, own_u)) => {
                let expected = self.num_agents() - 1;
                for got in [others_obs.len(), others_actions.len()] {
                    if got != expected {
                        return Err(InfoError::MissingShared { expected, got });
                    }
                }
                let mut observations = Vec::with_capacity(self.num_agents());
                let mut actions = Vec::with_capacity(self.num_agents());
                let mut others = others_obs.iter().zip(others_actions);
                for j in 0..self.num_agents() {
                    if j == k {
                        observations.push(own_y);
                        actions.push(own_u);
                    } else {
                        let (&y, &u) = others.next().expect("length checked");
                        check_label("observation", y, self.obs_sizes[j])?;
                        check_label("action", u, self.act_sizes[j])?;
                        observations.push(y);
                        actions.push(u);
                    }
                }
                shared.stages.push(SharedStage { observations, actions });
            }
        }
        Ok(InfoRealization { agent: k, stage: t + 1, shared, private })
    }

    /// Inverse of [`extend_info`](Self::extend_info); `None` at stage 1.
    pub fn split_last(&self, i: &InfoRealization) -> Option<Extension> {
        let (k, t1) = (i.agent, i.stage);
        if t1 < 2 {
            return None;
        }
        let t = t1 - 1;
        let mut obs = i.private.observations.clone();
        let mut acts = i.private.actions.clone();
        let mut shared = i.shared.clone();
        let (mut others_obs, mut others_actions) = (Vec::new(), Vec::new());
        if self.shares_on_extend(t) {
            let last = shared.stages.pop().expect("shared stage present");
            obs.insert(0, last.observations[k]);
            acts.insert(0, last.actions[k]);
            for j in (0..self.num_agents()).filter(|&j| j != k) {
                others_obs.push(last.observations[j]);
                others_actions.push(last.actions[j]);
            }
        }
        let next_obs = obs.pop().expect("window holds the newest observation");
        let action = acts.pop().expect("window holds the newest action");
        Some(Extension {
            parent: InfoRealization {
                agent: k,
                stage: t,
                shared,
                private: PrivateComponent { observations: obs, actions: acts },
            },
            next_obs,
            action,
            others_obs,
            others_actions,
        })
    }

    /// Rebuilds agent `j`'s realization at stage `t-T+1` from `delta_t` and
    /// `y_{t-T+1}^j`; every other argument lies in `delta_t`. `None` if `t-T+1 < 1`.
    pub fn reconstruct_info(&self, t: usize, shared: &SharedHistory, j: usize, obs: usize) -> Option<InfoRealization> {
        let s = (t + 1).checked_sub(self.delay).filter(|&s| s >= 1)?;
        let start = self.window_start(s);
        let mut observations: Vec<usize> = (start..s).map(|r| shared.stages[r - 1].observations[j]).collect();
        observations.push(obs);
        let actions = (start..s).map(|r| shared.stages[r - 1].actions[j]).collect();
        Some(InfoRealization {
            agent: j,
            stage: s,
            shared: shared.prefix(self.shared_len(s)),
            private: PrivateComponent { observations, actions },
        })
    }

    /// Agent `k`'s realization at stage `t` read off a joint history.
    pub fn from_history(&self, k: usize, t: usize, h: &History) -> InfoRealization {
        let stages = (0..self.shared_len(t))
            .map(|s| SharedStage { observations: h.observations[s].clone(), actions: h.actions[s].clone() })
            .collect();
        let start = self.window_start(t);
        InfoRealization {
            agent: k,
            stage: t,
            shared: SharedHistory { stages },
            private: PrivateComponent {
                observations: (start..=t).map(|s| h.observations[s - 1][k]).collect(),
                actions: (start..t).map(|s| h.actions[s - 1][k]).collect(),
            },
        }
    }

    /// Index form of [`from_history`](Self::from_history) without allocating the realization.
    pub fn info_index_from_history(&self, k: usize, t: usize, h: &History) -> usize {
        let shared = self.shared_radix(t).encode(
            (0..self.shared_len(t)).flat_map(|s| h.observations[s].iter().chain(&h.actions[s]).copied()),
        );
        let start = self.window_start(t);
        let private = self.private_radix(k, t).encode(
            (start..=t)
                .map(|s| h.observations[s - 1][k])
                .chain((start..t).map(|s| h.actions[s - 1][k])),
        );
        shared * self.private_count(k, t) + private
    }

    /// True iff every action recorded in `delta_t` is what `profile` prescribes
    /// on the realization reconstructed from `delta_t`'s own prefix.
    pub fn shared_action_consistency(&self, t: usize, shared: &SharedHistory, profile: &StrategyProfile) -> bool {
        let len = self.shared_len(t);
        (1..=len).all(|s| {
            // delta restricted to stages < s + T holds every argument of gamma_s
            let view_t = s + self.delay - 1;
            (0..self.num_agents()).all(|j| {
                let i = self
                    .reconstruct_info(view_t, &shared.prefix(self.shared_len(view_t)), j, shared.stages[s - 1].observations[j])
                    .expect("s >= 1");
                profile.act_in(self, &i) == shared.stages[s - 1].actions[j]
            })
        })
    }
}

fn check_label(what: &'static str, label: usize, size: usize) -> Result<(), InfoError> {
    if label < size {
        Ok(())
    } else {
        Err(InfoError::LabelOutOfRange { what, label, size })
    }
}

impl InfoRealization {
    /// Canonical label tuple (shared block, then private observations, then private actions).
    pub fn labels<S: Scalar>(&self, spec: &ProblemSpec<S>) -> Vec<String> {
        let mut out = Vec::new();
        for stage in &self.shared.stages {
            for (j, &y) in stage.observations.iter().enumerate() {
                out.push(spec.agents[j].observations[y].clone());
            }
            for (j, &u) in stage.actions.iter().enumerate() {
                out.push(spec.agents[j].actions[u].clone());
            }
        }
        let a = &spec.agents[self.agent];
        out.extend(self.private.observations.iter().map(|&y| a.observations[y].clone()));
        out.extend(self.private.actions.iter().map(|&u| a.actions[u].clone()));
        out
    }

    /// Shared-block labels only.
    pub fn shared_labels<S: Scalar>(&self, spec: &ProblemSpec<S>) -> Vec<String> {
        let n: usize = self.shared.stages.iter().map(|s| s.observations.len() + s.actions.len()).sum();
        self.labels(spec)[..n].to_vec()
    }

    pub fn private_labels<S: Scalar>(&self, spec: &ProblemSpec<S>) -> Vec<String> {
        let n: usize = self.shared.stages.iter().map(|s| s.observations.len() + s.actions.len()).sum();
        self.labels(spec)[n..].to_vec()
    }

    pub fn display<S: Scalar>(&self, spec: &ProblemSpec<S>) -> String {
        format!("({})", self.labels(spec).join(","))
    }
}

impl fmt::Display for InfoRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {} stage {}: shared {:?} private {:?}", self.agent + 1, self.stage, self.shared.stages, self.private)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_paper_example, random_problem, RandomDims};
    use proptest::prelude::*;

    fn paper() -> (ProblemSpec<f64>, InfoPattern) {
        let p = build_paper_example::<f64>();
        let pat = p.pattern();
        (p, pat)
    }

    #[test]
    fn paper_counts() {
        let (_, pat) = paper();
        assert_eq!(pat.enumerate_shared(1), vec![SharedHistory::default()]);
        assert_eq!(pat.enumerate_shared(2).len(), 1);
        assert_eq!(pat.enumerate_shared(3).len(), 16);
        assert_eq!(pat.enumerate_info(1, 0).len(), 2);
        assert_eq!(pat.enumerate_info(2, 0).len(), 8);
        assert_eq!(pat.enumerate_info(3, 0).len(), 128);
        assert_eq!(pat.enumerate_info(3, 1).len(), 128);
    }

    #[test]
    fn closed_form_private_counts() {
        for (t_, d) in [(3, 1), (3, 2), (3, 3), (4, 2)] {
            let pat = InfoPattern::new(t_, d, vec![2, 3], vec![3, 2]);
            for t in 1..=t_ {
                for k in 0..2 {
                    let w = t.min(d);
                    let acts = if t > 1 { w.saturating_sub(1) } else { 0 };
                    let expected = pat.num_obs(k).pow(w as u32) * pat.num_actions(k).pow(acts as u32);
                    assert_eq!(pat.private_count(k, t), expected);
                }
            }
        }
    }

    #[test]
    fn no_sharing_when_delay_is_horizon() {
        let pat = InfoPattern::new(3, 3, vec![2, 2], vec![2, 2]);
        for t in 1..=3 {
            assert_eq!(pat.enumerate_shared(t), vec![SharedHistory::default()]);
        }
        let i = pat.info_at(0, 1, 1);
        let i2 = pat.extend_info(&i, 0, 1, &[], &[]).unwrap();
        let i3 = pat.extend_info(&i2, 1, 0, &[], &[]).unwrap();
        assert!(i3.shared.is_empty());
        assert_eq!(i3.private.observations, vec![1, 0, 1]);
        assert_eq!(i3.private.actions, vec![1, 0]);
    }

    #[test]
    fn table_iv_extensions() {
        let (p, pat) = paper();
        // (o2) -> (o2, o1, c2)
        let i1 = pat.info_at(0, 1, 1);
        assert_eq!(i1.display(&p), "(o2)");
        let i2 = pat.extend_info(&i1, 0, 1, &[], &[]).unwrap();
        assert_eq!(i2.display(&p), "(o2,o1,c2)");
        // (o2, o2, c2) with other's stage-1 entries (o2, c2) and own (o1, c1)
        let i2b = pat.extend_info(&i1, 1, 1, &[], &[]).unwrap();
        let i3 = pat.extend_info(&i2b, 0, 0, &[1], &[1]).unwrap();
        assert_eq!(i3.display(&p), "(o2,o2,c2,c2,o2,o1,c1)");
        // sample stage-3 tuple: y1 = (o2, o2), u1 = (c2, c2), then own (y2, y3, u2) = (o1, o1, c1)
        let i2c = pat.extend_info(&i1, 0, 1, &[], &[]).unwrap();
        let row = pat.extend_info(&i2c, 0, 0, &[1], &[1]).unwrap();
        assert_eq!(row.display(&p), "(o2,o2,c2,c2,o1,o1,c1)");
    }

    #[test]
    fn extend_errors() {
        let (_, pat) = paper();
        let i1 = pat.info_at(0, 1, 0);
        assert!(matches!(pat.extend_info(&i1, 2, 0, &[], &[]), Err(InfoError::LabelOutOfRange { .. })));
        assert!(matches!(pat.extend_info(&i1, 0, 0, &[0], &[0]), Err(InfoError::UnexpectedShared { .. })));
        let i2 = pat.info_at(0, 2, 0);
        assert!(matches!(pat.extend_info(&i2, 0, 0, &[], &[]), Err(InfoError::MissingShared { .. })));
        assert!(matches!(pat.extend_info(&i2, 0, 0, &[0], &[5]), Err(InfoError::LabelOutOfRange { .. })));
        let i3 = pat.info_at(0, 3, 0);
        assert!(matches!(pat.extend_info(&i3, 0, 0, &[0], &[0]), Err(InfoError::PastHorizon { .. })));
    }

    #[test]
    fn reconstruction_covers_oldest_window_arguments() {
        let pat = InfoPattern::new(5, 2, vec![2, 2], vec![2, 2]);
        let h = History {
            observations: vec![vec![0, 1], vec![1, 1], vec![0, 0], vec![1, 0], vec![0, 1]],
            actions: vec![vec![1, 0], vec![0, 0], vec![1, 1], vec![0, 1], vec![1, 0]],
        };
        for t in 1..=5 {
            let delta = pat.from_history(0, t, &h).shared;
            for j in 0..2 {
                let s = (t + 1).checked_sub(2).filter(|&s| s >= 1);
                let r = pat.reconstruct_info(t, &delta, j, s.map(|s| h.observations[s - 1][j]).unwrap_or(0));
                match s {
                    None => assert!(r.is_none()),
                    Some(s) => assert_eq!(r.unwrap(), pat.from_history(j, s, &h)),
                }
            }
        }
    }

    #[test]
    fn vacuous_consistency_before_sharing() {
        let (_, pat) = paper();
        let profile = StrategyProfile::lowest_index(&pat);
        assert!(pat.shared_action_consistency(2, &SharedHistory::default(), &profile));
        // delta_3 recording u_1^1 = c2 while gamma_1^1 plays c1 everywhere
        let bad = SharedHistory { stages: vec![SharedStage { observations: vec![1, 0], actions: vec![1, 0] }] };
        assert!(!pat.shared_action_consistency(3, &bad, &profile));
        let good = SharedHistory { stages: vec![SharedStage { observations: vec![1, 0], actions: vec![0, 0] }] };
        assert!(pat.shared_action_consistency(3, &good, &profile));
    }

    proptest! {
        #[test]
        fn index_bijection_and_nesting(seed in 0u64..500, delay in 1usize..4, k in 0usize..2) {
            let dims = RandomDims { horizon: 4, delay: delay.min(4), agents: 2, states: 2, observations: 2, actions: 3 };
            let p: ProblemSpec<f64> = random_problem(seed, dims);
            let pat = p.pattern();
            for t in 1..=4 {
                let n = pat.info_count(k, t);
                let idx = (seed as usize * 7919) % n;
                let i = pat.info_at(k, t, idx);
                prop_assert_eq!(pat.info_index(&i), idx);
                if let Some(ext) = pat.split_last(&i) {
                    let back = pat.extend_info(&ext.parent, ext.next_obs, ext.action, &ext.others_obs, &ext.others_actions).unwrap();
                    prop_assert_eq!(&back, &i);
                    // delta_t is a prefix of delta_{t+1}; window slides by one stage
                    prop_assert_eq!(&i.shared.stages[..ext.parent.shared.stages.len()], &ext.parent.shared.stages[..]);
                    prop_assert_eq!(i.private.observations.last().copied(), Some(ext.next_obs));
                    prop_assert_eq!(pat.window_start(t) - pat.window_start(t - 1), i.shared.stages.len() - ext.parent.shared.stages.len());
                }
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_distinct() {
        let (_, pat) = paper();
        let a = pat.enumerate_info(3, 1);
        assert_eq!(a, pat.enumerate_info(3, 1));
        let set: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len());
    }
}
