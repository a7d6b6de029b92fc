//! Classical single-agent belief-state backward induction.

use std::collections::HashMap;

use super::OracleError;
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

#[derive(Debug, Clone)]
pub struct PomdpSolution<S> {
    pub value: S,
    /// Optimal policy lifted onto the problem's information pattern.
    pub profile: StrategyProfile,
}

type Key = (Vec<usize>, Vec<usize>);

struct Solver<'a, S> {
    spec: &'a ProblemSpec<S>,
    policy: HashMap<Key, usize>,
}

impl<S: Scalar> Solver<'_, S> {
    /// Optimal expected cost from stage `t` given the posterior `b` over `x_t`.
    fn value(&mut self, t: usize, b: &[S], obs: &mut Vec<usize>, acts: &mut Vec<usize>) -> S {
        let spec = self.spec;
        let mut best = (S::infinity(), 0);
        for u in 0..spec.num_actions(0) {
            let mut v: S = b.iter().enumerate().map(|(x, &p)| p * spec.stage_cost(t, x, u)).sum();
            if t < spec.horizon {
                for y in 0..spec.num_obs(0) {
                    let mut next: Vec<S> = (0..spec.num_states())
                        .map(|x2| {
                            let s: S = b.iter().enumerate().map(|(x, &p)| p * spec.transition_prob(x, u, x2)).sum();
                            s * spec.obs_prob(0, x2, u, y)
                        })
                        .collect();
                    let mass: S = next.iter().copied().sum();
                    if mass <= S::zero() {
                        continue;
                    }
                    next.iter_mut().for_each(|p| *p = *p / mass);
                    obs.push(y);
                    acts.push(u);
                    v = v + mass * self.value(t + 1, &next, obs, acts);
                    obs.pop();
                    acts.pop();
                }
            }
            if v < best.0 {
                best = (v, u);
            }
        }
        self.policy.insert((obs.clone(), acts.clone()), best.1);
        best.0
    }
}

/// Exact finite-horizon optimum of a single-agent problem.
pub fn centralized_pomdp_solve<S: Scalar>(spec: &ProblemSpec<S>) -> Result<PomdpSolution<S>, OracleError> {
    if spec.num_agents() != 1 {
        return Err(OracleError::NotSingleAgent(spec.num_agents()));
    }
    let mut solver = Solver { spec, policy: HashMap::new() };
    let mut value = S::zero();
    for y in 0..spec.num_obs(0) {
        let mut b: Vec<S> = (0..spec.num_states()).map(|x| spec.initial[x] * spec.initial_obs_prob(0, x, y)).collect();
        let mass: S = b.iter().copied().sum();
        if mass <= S::zero() {
            continue;
        }
        b.iter_mut().for_each(|p| *p = *p / mass);
        value = value + mass * solver.value(1, &b, &mut vec![y], &mut Vec::new());
    }
    let pattern = spec.pattern();
    let profile = StrategyProfile::from_fn(&pattern, |_, t, idx| {
        let i = pattern.info_at(0, t, idx);
        let mut obs: Vec<usize> = i.shared.stages.iter().map(|s| s.observations[0]).collect();
        let mut acts: Vec<usize> = i.shared.stages.iter().map(|s| s.actions[0]).collect();
        obs.extend(&i.private.observations);
        acts.extend(&i.private.actions);
        solver.policy.get(&(obs, acts)).copied().unwrap_or(0)
    });
    Ok(PomdpSolution { value, profile })
}
