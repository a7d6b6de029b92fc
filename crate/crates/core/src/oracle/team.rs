//! Global benchmarks for tiny instances: exhaustive team optimum and the
//! common-information (coordinator) dynamic program.

use rayon::prelude::*;

use super::{joint_obs_prob, joint_obs_radix, OracleError, PRESCRIPTION_LIMIT, TEAM_PROFILE_LIMIT};
use crate::beliefs::{hidden_radix, pi_init, pi_update_with, PiPosterior};
use crate::info::{InfoRealization, MixedRadix, SharedStage};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

#[derive(Debug, Clone)]
pub struct TeamSolution<S> {
    pub payoff: S,
    pub profile: StrategyProfile,
    pub profiles_evaluated: usize,
}

#[derive(Debug, Clone)]
pub struct CommonInfoSolution<S> {
    pub payoff: S,
    pub profile: StrategyProfile,
}

/// Observation-only information of each agent: own observations through `t`
/// and the others' observations through `t-T`. Actions are functions of these
/// under any deterministic profile, so this class attains the team optimum.
struct ObsStrategies {
    /// `[k][t-1][joint observation path index]` -> entry in agent `k`'s strategy vector.
    entry: Vec<Vec<Vec<usize>>>,
    entries: Vec<usize>,
    actions: Vec<usize>,
}

impl ObsStrategies {
    fn new<S: Scalar>(spec: &ProblemSpec<S>) -> Self {
        let k_all = spec.num_agents();
        let jr = joint_obs_radix(spec);
        let pattern = spec.pattern();
        let mut entry = vec![Vec::new(); k_all];
        let mut entries = vec![0; k_all];
        for k in 0..k_all {
            let mut offset = 0;
            for t in 1..=spec.horizon {
                let shared = pattern.shared_len(t);
                let mut r = vec![spec.num_obs(k); t];
                for _ in 0..shared {
                    r.extend((0..k_all).filter(|&j| j != k).map(|j| spec.num_obs(j)));
                }
                let radix = MixedRadix::new(r);
                let paths = MixedRadix::new(vec![jr.size(); t]);
                let table = (0..paths.size())
                    .map(|pi| {
                        let ys: Vec<Vec<usize>> = paths.decode(pi).into_iter().map(|y| jr.decode(y)).collect();
                        offset + radix.encode(obs_digits(&ys, k, t, shared))
                    })
                    .collect();
                entry[k].push(table);
                offset += radix.size();
            }
            entries[k] = offset;
        }
        ObsStrategies { entry, entries, actions: (0..k_all).map(|k| spec.num_actions(k)).collect() }
    }

    fn count(&self) -> f64 {
        self.entries.iter().zip(&self.actions).map(|(&e, &u)| (u as f64).powi(e as i32)).product()
    }
}

fn obs_digits(ys: &[Vec<usize>], k: usize, t: usize, shared: usize) -> Vec<usize> {
    let mut d: Vec<usize> = (0..t).map(|s| ys[s][k]).collect();
    for y in ys.iter().take(shared) {
        d.extend(y.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v));
    }
    d
}

fn decode_digits(mut n: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = n % base;
        n /= base;
    }
    d
}

fn obs_payoff<S: Scalar>(spec: &ProblemSpec<S>, os: &ObsStrategies, strategies: &[Vec<usize>]) -> S {
    let jr = joint_obs_radix(spec);
    let decoded: Vec<Vec<usize>> = (0..jr.size()).map(|y| jr.decode(y)).collect();
    fn rec<S: Scalar>(
        spec: &ProblemSpec<S>,
        os: &ObsStrategies,
        strategies: &[Vec<usize>],
        decoded: &[Vec<usize>],
        t: usize,
        x: usize,
        prev: usize,
        path: usize,
        mass: S,
    ) -> S {
        let mut total = S::zero();
        let mut us = vec![0; spec.num_agents()];
        for (yi, ys) in decoded.iter().enumerate() {
            let m = mass * joint_obs_prob(spec, t, x, prev, ys);
            if m <= S::zero() {
                continue;
            }
            let p = path * decoded.len() + yi;
            for (k, u) in us.iter_mut().enumerate() {
                *u = strategies[k][os.entry[k][t - 1][p]];
            }
            let ju = spec.joint_action_index(&us);
            total = total + m * spec.stage_cost(t, x, ju);
            if t < spec.horizon {
                for x2 in 0..spec.num_states() {
                    let s = spec.transition_prob(x, ju, x2);
                    if s > S::zero() {
                        total = total + rec(spec, os, strategies, decoded, t + 1, x2, ju, p, m * s);
                    }
                }
            }
        }
        total
    }
    (0..spec.num_states())
        .filter(|&x| spec.initial[x] > S::zero())
        .map(|x| rec(spec, os, strategies, &decoded, 1, x, 0, 0, spec.initial[x]))
        .sum()
}

/// Exhaustive minimum of `J_n` over all joint deterministic profiles; ties to the lowest enumeration index.
pub fn enumerate_team_optimal<S: Scalar>(spec: &ProblemSpec<S>) -> Result<TeamSolution<S>, OracleError> {
    enumerate_team_optimal_with_limit(spec, TEAM_PROFILE_LIMIT)
}

pub fn enumerate_team_optimal_with_limit<S: Scalar>(spec: &ProblemSpec<S>, limit: f64) -> Result<TeamSolution<S>, OracleError> {
    let os = ObsStrategies::new(spec);
    let count = os.count();
    if count > limit {
        return Err(OracleError::SizeGuard { what: "joint deterministic profiles", count, limit });
    }
    let per_agent: Vec<usize> = os.entries.iter().zip(&os.actions).map(|(&e, &u)| u.pow(e as u32)).collect();
    let agent_radix = MixedRadix::new(per_agent);
    let total = agent_radix.size();
    let decode = |g: usize| -> Vec<Vec<usize>> {
        agent_radix
            .decode(g)
            .into_iter()
            .enumerate()
            .map(|(k, n)| decode_digits(n, os.actions[k], os.entries[k]))
            .collect()
    };
    let (payoff, best) = (0..total)
        .into_par_iter()
        .map(|g| (obs_payoff(spec, &os, &decode(g)), g))
        .reduce(|| (S::infinity(), usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let strategies = decode(best);

    let pattern = spec.pattern();
    let profile = StrategyProfile::from_fn(&pattern, |k, t, idx| {
        let i = pattern.info_at(k, t, idx);
        strategies[k][lift_entry(spec, &os, &i)]
    });
    Ok(TeamSolution { payoff, profile, profiles_evaluated: total })
}

fn lift_entry<S: Scalar>(spec: &ProblemSpec<S>, os: &ObsStrategies, i: &InfoRealization) -> usize {
    // rebuild a joint observation path agreeing with everything agent k can see
    let jr = joint_obs_radix(spec);
    let mut path = 0;
    for s in 1..=i.stage {
        let ys: Vec<usize> = match i.shared.stages.get(s - 1) {
            Some(st) => st.observations.clone(),
            None => {
                let mut v = vec![0; spec.num_agents()];
                v[i.agent] = i.private.observations[s - (i.stage + 1 - i.private.observations.len())];
                v
            }
        };
        path = path * jr.size() + jr.encode(ys);
    }
    os.entry[i.agent][i.stage - 1][path]
}

struct Node {
    /// `[j][private index]` prescribed action.
    prescription: Vec<Vec<usize>>,
    children: Vec<(usize, Node)>,
}

struct Coordinator<'a, S> {
    spec: &'a ProblemSpec<S>,
    pattern: crate::info::InfoPattern,
}

impl<S: Scalar> Coordinator<'_, S> {
    fn solve(&self, t: usize, delta_index: usize, pi: &PiPosterior<S>) -> (S, Node) {
        let spec = self.spec;
        let pat = &self.pattern;
        let k_all = spec.num_agents();
        let counts: Vec<usize> = (0..k_all).map(|j| pat.private_count(j, t)).collect();
        let per_agent: Vec<usize> = (0..k_all).map(|j| spec.num_actions(j).pow(counts[j] as u32)).collect();
        let joint = MixedRadix::new(per_agent);
        let hr = hidden_radix(pat, &(0..k_all).collect::<Vec<_>>(), t);
        let nh = hr.size();
        let hidden_digits: Vec<Vec<usize>> = (0..nh).map(|h| hr.decode(h)).collect();
        let shares = pat.shares_on_extend(t);
        let stage_radix = MixedRadix::new(
            (0..k_all).map(|j| spec.num_obs(j)).chain((0..k_all).map(|j| spec.num_actions(j))).collect(),
        );
        let delta = pat.shared_at(t, delta_index);

        let mut best: Option<(S, Node)> = None;
        for g in 0..joint.size() {
            let prescription: Vec<Vec<usize>> = joint
                .decode(g)
                .into_iter()
                .enumerate()
                .map(|(j, n)| decode_digits(n, spec.num_actions(j), counts[j]))
                .collect();
            let mut value = S::zero();
            let mut us = vec![0; k_all];
            for (e, &p) in pi.probs.iter().enumerate() {
                if p <= S::zero() {
                    continue;
                }
                let (x, h) = (e / nh, e % nh);
                for j in 0..k_all {
                    us[j] = prescription[j][hidden_digits[h][j]];
                }
                value = value + p * spec.stage_cost(t, x, spec.joint_action_index(&us));
            }
            let mut children = Vec::new();
            if t < spec.horizon {
                let act = |j: usize, p: usize| prescription[j][p];
                let branches: Vec<Option<SharedStage>> = if shares {
                    (0..stage_radix.size())
                        .map(|s| {
                            let d = stage_radix.decode(s);
                            Some(SharedStage { observations: d[..k_all].to_vec(), actions: d[k_all..].to_vec() })
                        })
                        .collect()
                } else {
                    vec![None]
                };
                for stage in branches {
                    let Some((next, mass)) = pi_update_with(spec, pat, pi, stage.as_ref(), act) else { continue };
                    let mut d2 = delta.clone();
                    if let Some(s) = stage {
                        d2.stages.push(s);
                    }
                    let idx2 = pat.shared_index(t + 1, &d2);
                    let (v, node) = self.solve(t + 1, idx2, &next);
                    value = value + mass * v;
                    children.push((idx2, node));
                }
            }
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, Node { prescription, children }));
            }
        }
        best.expect("at least one prescription")
    }

    fn lift(&self, t: usize, delta_index: usize, node: &Node, profile: &mut StrategyProfile) {
        for (j, pres) in node.prescription.iter().enumerate() {
            for (p, &u) in pres.iter().enumerate() {
                profile.set_action(j, t, self.pattern.info_index_parts(j, t, delta_index, p), u);
            }
        }
        for (idx, child) in &node.children {
            self.lift(t + 1, *idx, child, profile);
        }
    }
}

/// Coordinator DP over common information `delta_t` (with the path of past
/// prescriptions fixing `Pi_t`), minimizing over joint prescriptions
/// `lambda_t^k -> u_t^k` at each stage.
pub fn common_info_dp<S: Scalar>(spec: &ProblemSpec<S>) -> Result<CommonInfoSolution<S>, OracleError> {
    if spec.delay >= spec.horizon {
        return Err(OracleError::Vacuous);
    }
    let pattern = spec.pattern();
    let k_all = spec.num_agents();
    let mut nodes = 1.0;
    let mut total = 0.0;
    for t in 1..=spec.horizon {
        let count: f64 = (0..k_all).map(|j| (spec.num_actions(j) as f64).powi(pattern.private_count(j, t) as i32)).product();
        if count > PRESCRIPTION_LIMIT {
            return Err(OracleError::SizeGuard { what: "joint prescriptions per stage", count, limit: PRESCRIPTION_LIMIT });
        }
        let branches: f64 = if t < spec.horizon && pattern.shares_on_extend(t) {
            (0..k_all).map(|j| (spec.num_obs(j) * spec.num_actions(j)) as f64).product()
        } else {
            1.0
        };
        nodes *= count * branches;
        total += nodes;
    }
    if total > TEAM_PROFILE_LIMIT {
        return Err(OracleError::SizeGuard { what: "coordinator tree nodes", count: total, limit: TEAM_PROFILE_LIMIT });
    }
    let coord = Coordinator { spec, pattern };
    let (payoff, root) = coord.solve(1, 0, &pi_init(spec));
    let mut profile = StrategyProfile::lowest_index(&coord.pattern);
    coord.lift(1, 0, &root, &mut profile);
    Ok(CommonInfoSolution { payoff, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_paper_example, random_problem, RandomDims};
    use crate::oracle::{centralized_pomdp_solve, exact_payoff};
    use approx::assert_abs_diff_eq;

    fn tiny(seed: u64, agents: usize) -> ProblemSpec<f64> {
        random_problem(seed, RandomDims { horizon: 2, delay: 1, agents, states: 2, observations: 2, actions: 2 })
    }

    #[test]
    fn team_and_coordinator_agree_single_agent() {
        let p = tiny(4, 1);
        let team = enumerate_team_optimal(&p).unwrap();
        let ci = common_info_dp(&p).unwrap();
        let pomdp = centralized_pomdp_solve(&p).unwrap();
        assert_abs_diff_eq!(team.payoff, pomdp.value, epsilon = 1e-12);
        assert_abs_diff_eq!(ci.payoff, pomdp.value, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_payoff(&p, &team.profile), team.payoff, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_payoff(&p, &ci.profile), ci.payoff, epsilon = 1e-12);
    }

    #[test]
    fn guards() {
        let p = build_paper_example::<f64>();
        assert!(matches!(enumerate_team_optimal(&p), Err(OracleError::SizeGuard { .. })));
        assert!(matches!(common_info_dp(&p), Err(OracleError::SizeGuard { .. })));
        let mut q = tiny(1, 2);
        q.delay = 2;
        assert_eq!(common_info_dp(&q).unwrap_err(), OracleError::Vacuous);
    }

    #[test]
    fn two_agent_count() {
        let os = ObsStrategies::new(&tiny(0, 2));
        assert_eq!(os.entries, vec![10, 10]);
        assert_eq!(os.count(), 1024.0 * 1024.0);
    }
}
