//! Brute-force ground truth built directly on the joint law of states,
//! observations and actions. Nothing here calls the filters or the DP.

mod centralized;
mod pomdp;
mod team;
mod tree;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::info::{History, InfoPattern, MixedRadix};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

pub use centralized::{exhaustive_pi, exhaustive_theta};
pub use pomdp::{centralized_pomdp_solve, PomdpSolution};
pub use team::{common_info_dp, enumerate_team_optimal, CommonInfoSolution, TeamSolution};
pub use tree::{tree_best_response, AgentTree};

/// Default cap on the number of joint deterministic profiles enumerated.
pub const TEAM_PROFILE_LIMIT: f64 = 1e7;
/// Default cap on joint prescriptions per stage in the common-information DP.
pub const PRESCRIPTION_LIMIT: f64 = 65536.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{what}: {count:.3e} exceeds the limit {limit:.3e}")]
    SizeGuard { what: &'static str, count: f64, limit: f64 },
    #[error("expected a single-agent problem, got {0} agents")]
    NotSingleAgent(usize),
    #[error("delay equals horizon: no information is ever shared, so the common-information cost-to-go is vacuous")]
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub observations: Vec<Vec<usize>>,
    pub actions: Vec<Vec<usize>>,
}

pub(crate) fn joint_obs_radix<S: Scalar>(spec: &ProblemSpec<S>) -> MixedRadix {
    MixedRadix::new((0..spec.num_agents()).map(|k| spec.num_obs(k)).collect())
}

/// Probability of a joint observation at stage `t` given the state and the previous joint action.
pub(crate) fn joint_obs_prob<S: Scalar>(spec: &ProblemSpec<S>, t: usize, x: usize, prev: usize, ys: &[usize]) -> S {
    ys.iter().enumerate().fold(S::one(), |acc, (k, &y)| {
        acc * if t == 1 { spec.initial_obs_prob(k, x, y) } else { spec.obs_prob(k, x, prev, y) }
    })
}

/// Depth-first walk over every positive-mass trajectory, actions given by
/// `act(k, t, history)` where `history` holds observations through `t` and
/// actions through `t-1`.
pub(crate) fn walk<S: Scalar>(
    spec: &ProblemSpec<S>,
    act: &impl Fn(usize, usize, &History) -> usize,
    visit: &mut impl FnMut(&[usize], &History, S),
) {
    struct Ctx<'a, S, A, V> {
        spec: &'a ProblemSpec<S>,
        radix: MixedRadix,
        act: &'a A,
        visit: &'a mut V,
        states: Vec<usize>,
        hist: History,
    }
    fn rec<S: Scalar, A: Fn(usize, usize, &History) -> usize, V: FnMut(&[usize], &History, S)>(
        c: &mut Ctx<'_, S, A, V>,
        t: usize,
        x: usize,
        prev: usize,
        mass: S,
    ) {
        let k_all = c.spec.num_agents();
        for yi in 0..c.radix.size() {
            let ys = c.radix.decode(yi);
            let m = mass * joint_obs_prob(c.spec, t, x, prev, &ys);
            if m <= S::zero() {
                continue;
            }
            c.hist.observations.push(ys);
            let us: Vec<usize> = (0..k_all).map(|k| (c.act)(k, t, &c.hist)).collect();
            let ju = c.spec.joint_action_index(&us);
            c.hist.actions.push(us);
            if t == c.spec.horizon {
                (c.visit)(&c.states, &c.hist, m);
            } else {
                for x2 in 0..c.spec.num_states() {
                    let s = c.spec.transition_prob(x, ju, x2);
                    if s > S::zero() {
                        c.states.push(x2);
                        rec(c, t + 1, x2, ju, m * s);
                        c.states.pop();
                    }
                }
            }
            c.hist.actions.pop();
            c.hist.observations.pop();
        }
    }
    let mut c = Ctx { spec, radix: joint_obs_radix(spec), act, visit, states: Vec::new(), hist: History::default() };
    for x in 0..spec.num_states() {
        let p = spec.initial[x];
        if p > S::zero() {
            c.states.push(x);
            rec(&mut c, 1, x, 0, p);
            c.states.pop();
        }
    }
}

pub(crate) fn profile_act<'a>(pattern: &'a InfoPattern, profile: &'a StrategyProfile) -> impl Fn(usize, usize, &History) -> usize + 'a {
    move |k, t, h| profile.action(k, t, pattern.info_index_from_history(k, t, h))
}

pub(crate) fn trajectory_cost<S: Scalar>(spec: &ProblemSpec<S>, states: &[usize], h: &History) -> S {
    states
        .iter()
        .enumerate()
        .map(|(s, &x)| spec.stage_cost(s + 1, x, spec.joint_action_index(&h.actions[s])))
        .sum()
}

/// Every positive-mass trajectory under `profile` with its probability.
pub fn joint_law<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile) -> Vec<(Trajectory, S)> {
    let pattern = spec.pattern();
    let mut out = Vec::new();
    walk(spec, &profile_act(&pattern, profile), &mut |states, h, m| {
        out.push((
            Trajectory { states: states.to_vec(), observations: h.observations.clone(), actions: h.actions.clone() },
            m,
        ))
    });
    out
}

/// `J_n(gamma) = E[sum_t l(t, X_t, U_t)]`.
pub fn exact_payoff<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile) -> S {
    let pattern = spec.pattern();
    let mut total = S::zero();
    walk(spec, &profile_act(&pattern, profile), &mut |states, h, m| {
        total = total + m * trajectory_cost(spec, states, h)
    });
    total
}

/// Seeded rollouts; returns `(mean, standard error)`.
pub fn monte_carlo_payoff<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, samples: usize, seed: u64) -> (f64, f64) {
    assert!(samples >= 1, "at least one sample");
    let pattern = spec.pattern();
    let k_all = spec.num_agents();
    let nj = spec.num_joint_actions();
    let weights = |row: &[S]| WeightedIndex::new(row.iter().map(|p| p.to_f64_lossy())).expect("stochastic row");
    let init = weights(&spec.initial);
    let trans: Vec<_> = spec.transition.iter().map(|r| weights(r)).collect();
    let obs1: Vec<Vec<_>> = spec.initial_obs.iter().map(|a| a.iter().map(|r| weights(r)).collect()).collect();
    let obs: Vec<Vec<_>> = spec.observation.iter().map(|a| a.iter().map(|r| weights(r)).collect()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    let mut h = History::default();
    for _ in 0..samples {
        h.observations.clear();
        h.actions.clear();
        let mut x = init.sample(&mut rng);
        let mut prev = 0;
        let mut cost = 0.0;
        for t in 1..=spec.horizon {
            let ys: Vec<usize> = (0..k_all)
                .map(|k| if t == 1 { obs1[k][x].sample(&mut rng) } else { obs[k][x * nj + prev].sample(&mut rng) })
                .collect();
            h.observations.push(ys);
            let us: Vec<usize> = (0..k_all).map(|k| profile.action(k, t, pattern.info_index_from_history(k, t, &h))).collect();
            let ju = spec.joint_action_index(&us);
            h.actions.push(us);
            cost += spec.stage_cost(t, x, ju).to_f64_lossy();
            if t < spec.horizon {
                x = trans[x * nj + ju].sample(&mut rng);
            }
            prev = ju;
        }
        sum += cost;
        sum_sq += cost * cost;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_paper_example;
    use approx::assert_abs_diff_eq;

    #[test]
    fn paper_joint_law_size_and_mass() {
        let p = build_paper_example::<f64>();
        let profile = StrategyProfile::lowest_index(&p.pattern());
        let law = joint_law(&p, &profile);
        assert_eq!(law.len(), 512);
        assert_abs_diff_eq!(law.iter().map(|(_, m)| m).sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_kernels_single_trajectory() {
        let mut p = build_paper_example::<f64>();
        p.initial = vec![1.0, 0.0];
        for row in p.transition.iter_mut() {
            *row = vec![0.0, 1.0];
        }
        for k in 0..2 {
            p.initial_obs[k] = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            for (r, row) in p.observation[k].iter_mut().enumerate() {
                *row = if r / 4 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
            }
        }
        let profile = StrategyProfile::lowest_index(&p.pattern());
        let law = joint_law(&p, &profile);
        assert_eq!(law.len(), 1);
        assert_eq!(law[0].1, 1.0);
        let (_, se) = monte_carlo_payoff(&p, &profile, 100, 1);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn zero_cost_payoff() {
        let mut p = build_paper_example::<f64>();
        for row in p.cost.iter_mut() {
            row.iter_mut().for_each(|c| *c = 0.0);
        }
        assert_eq!(exact_payoff(&p, &StrategyProfile::lowest_index(&p.pattern())), 0.0);
    }

    #[test]
    fn single_stage_law_is_product() {
        let mut p = build_paper_example::<f64>();
        p.horizon = 1;
        p.delay = 1;
        p.cost.truncate(1);
        let law = joint_law(&p, &StrategyProfile::lowest_index(&p.pattern()));
        for (tr, m) in law {
            let x = tr.states[0];
            let expected = p.initial[x] * p.initial_obs[0][x][tr.observations[0][0]] * p.initial_obs[1][x][tr.observations[0][1]];
            assert_abs_diff_eq!(m, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let p = build_paper_example::<f64>();
        let profile = StrategyProfile::random(&p.pattern(), 9);
        assert_eq!(monte_carlo_payoff(&p, &profile, 2000, 5), monte_carlo_payoff(&p, &profile, 2000, 5));
    }
}
