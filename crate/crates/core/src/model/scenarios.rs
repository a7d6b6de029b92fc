//! Built-in problem instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgentSpaces, ModelError, ProblemSpec};
use crate::scalar::Scalar;

/// Sizes for [`random_problem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomDims {
    pub horizon: usize,
    pub delay: usize,
    pub agents: usize,
    pub states: usize,
    pub observations: usize,
    pub actions: usize,
}

impl Default for RandomDims {
    fn default() -> Self {
        RandomDims { horizon: 3, delay: 2, agents: 2, states: 2, observations: 2, actions: 2 }
    }
}

/// Named built-in scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Two-agent master/apprentice example: n = 3, T = 2.
    PaperExample,
    /// Product of `subproblems` independent random two-state POMDPs.
    Separated { subproblems: usize, seed: u64 },
    Random { seed: u64, dims: RandomDims },
}

impl ScenarioId {
    /// Scenario for a CLI name, using `seed` where the scenario is random.
    pub fn from_name(name: &str, seed: u64) -> Result<Self, ModelError> {
        match name {
            "paper_example" | "paper" => Ok(ScenarioId::PaperExample),
            "separated" => Ok(ScenarioId::Separated { subproblems: 2, seed }),
            "random" => Ok(ScenarioId::Random { seed, dims: RandomDims::default() }),
            other => Err(ModelError::Schema {
                path: "scenario".into(),
                message: format!("unknown scenario {other:?} (expected paper_example, separated or random)"),
            }),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioId::PaperExample => write!(f, "paper_example"),
            ScenarioId::Separated { subproblems, seed } => write!(f, "separated({subproblems}, seed={seed})"),
            ScenarioId::Random { seed, .. } => write!(f, "random(seed={seed})"),
        }
    }
}

impl FromStr for ScenarioId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::from_name(s, 0)
    }
}

pub fn build_scenario<S: Scalar>(id: ScenarioId) -> Result<ProblemSpec<S>, ModelError> {
    match id {
        ScenarioId::PaperExample => Ok(build_paper_example()),
        ScenarioId::Separated { subproblems, seed } => {
            build_separated_example(&separated_parts(subproblems, seed), 2)
        }
        ScenarioId::Random { seed, dims } => Ok(random_problem(seed, dims)),
    }
}

/// The single-agent sub-problems behind `ScenarioId::Separated`.
pub fn separated_parts<S: Scalar>(subproblems: usize, seed: u64) -> Vec<ProblemSpec<S>> {
    let dims = RandomDims { horizon: 3, delay: 1, agents: 1, states: 2, observations: 2, actions: 2 };
    (0..subproblems as u64)
        .map(|i| random_problem(seed.wrapping_mul(1_000_003).wrapping_add(i), dims))
        .collect()
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// The two-agent master/apprentice instance: agent 1 observes through the
/// more reliable channel, stage cost is additive `l1(x,u1) + l2(x,u2)`.
pub fn build_paper_example<S: Scalar>() -> ProblemSpec<S> {
    let l = S::lit;
    let q1 = [[0.9, 0.1], [0.1, 0.9]];
    let q2 = [[0.7, 0.3], [0.3, 0.7]];
    // rows ordered (x, u1, u2) with u2 fastest
    let s = [
        [0.9, 0.1],
        [0.7, 0.3],
        [0.8, 0.2],
        [0.7, 0.3],
        [0.2, 0.8],
        [0.5, 0.5],
        [0.7, 0.3],
        [0.8, 0.2],
    ];
    let l1 = [[0.0, 1.0], [8.0, 2.0]];
    let l2 = [[0.0, 1.0], [4.0, 2.0]];

    let agent = || AgentSpaces { observations: labels("o", 2), actions: labels("c", 2) };
    let obs_rows = |q: &[[f64; 2]; 2]| -> Vec<Vec<S>> {
        (0..2).flat_map(|x| (0..4).map(move |_| q[x].iter().map(|&p| l(p)).collect())).collect()
    };
    let stage_cost: Vec<S> = (0..2)
        .flat_map(|x| (0..2).flat_map(move |u1| (0..2).map(move |u2| l(l1[x][u1] + l2[x][u2]))))
        .collect();

    ProblemSpec {
        horizon: 3,
        delay: 2,
        states: labels("s", 2),
        agents: vec![agent(), agent()],
        initial: vec![l(0.7), l(0.3)],
        initial_obs: vec![
            q1.iter().map(|r| r.iter().map(|&p| l(p)).collect()).collect(),
            q2.iter().map(|r| r.iter().map(|&p| l(p)).collect()).collect(),
        ],
        transition: s.iter().map(|r| r.iter().map(|&p| l(p)).collect()).collect(),
        observation: vec![obs_rows(&q1), obs_rows(&q2)],
        cost: vec![stage_cost; 3],
    }
}

/// Product of independent single-agent POMDPs: agent `k` acts on and
/// observes only component `k` of the state, and pays only its own cost.
pub fn build_separated_example<S: Scalar>(
    subs: &[ProblemSpec<S>],
    delay: usize,
) -> Result<ProblemSpec<S>, ModelError> {
    let mismatch = |message: String| ModelError::Schema { path: "sub_specs".into(), message };
    let first = subs.first().ok_or_else(|| mismatch("at least one sub-problem required".into()))?;
    let horizon = first.horizon;
    for (i, sub) in subs.iter().enumerate() {
        if sub.num_agents() != 1 {
            return Err(mismatch(format!("sub-problem {i} has {} agents, expected 1", sub.num_agents())));
        }
        if sub.horizon != horizon {
            return Err(mismatch(format!("sub-problem {i} horizon {} differs from {horizon}", sub.horizon)));
        }
        let v = sub.validate();
        if !v.is_empty() {
            return Err(ModelError::Invalid(v));
        }
    }

    let sizes: Vec<usize> = subs.iter().map(|s| s.num_states()).collect();
    let nx: usize = sizes.iter().product();
    let decode = |mut x: usize| {
        let mut out = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            out[i] = x % sizes[i];
            x /= sizes[i];
        }
        out
    };
    let states: Vec<String> = (0..nx)
        .map(|x| {
            decode(x).iter().zip(subs).map(|(&xi, s)| s.states[xi].as_str()).collect::<Vec<_>>().join("|")
        })
        .collect();
    let agents: Vec<AgentSpaces> = subs.iter().map(|s| s.agents[0].clone()).collect();

    let mut spec = ProblemSpec {
        horizon,
        delay,
        states,
        agents,
        initial: Vec::new(),
        initial_obs: Vec::new(),
        transition: Vec::new(),
        observation: Vec::new(),
        cost: Vec::new(),
    };
    let nj = spec.num_joint_actions();

    spec.initial = (0..nx)
        .map(|x| decode(x).iter().zip(subs).map(|(&xi, s)| s.initial[xi]).fold(S::one(), |a, b| a * b))
        .collect();
    spec.initial_obs = subs
        .iter()
        .enumerate()
        .map(|(k, s)| (0..nx).map(|x| s.initial_obs[0][decode(x)[k]].clone()).collect())
        .collect();
    spec.transition = (0..nx * nj)
        .map(|r| {
            let (xs, u) = (decode(r / nj), spec.joint_action(r % nj));
            (0..nx)
                .map(|x2| {
                    let ys = decode(x2);
                    subs.iter()
                        .enumerate()
                        .map(|(k, s)| s.transition_prob(xs[k], u[k], ys[k]))
                        .fold(S::one(), |a, b| a * b)
                })
                .collect()
        })
        .collect();
    spec.observation = subs
        .iter()
        .enumerate()
        .map(|(k, s)| {
            (0..nx * nj)
                .map(|r| {
                    let (xs, u) = (decode(r / nj), spec.joint_action(r % nj));
                    s.observation[0][xs[k] * s.num_joint_actions() + u[k]].clone()
                })
                .collect()
        })
        .collect();
    spec.cost = (1..=horizon)
        .map(|t| {
            (0..nx * nj)
                .map(|r| {
                    let (xs, u) = (decode(r / nj), spec.joint_action(r % nj));
                    subs.iter().enumerate().map(|(k, s)| s.stage_cost(t, xs[k], u[k])).sum()
                })
                .collect()
        })
        .collect();
    Ok(spec)
}

fn random_row<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<S> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut row: Vec<S> = w.iter().map(|p| S::lit(p / total)).collect();
    // absorb rounding so the row sums to one in the target precision
    let rest: S = row[1..].iter().copied().sum();
    row[0] = S::one() - rest;
    row
}

/// Random instance with strictly positive kernels and costs in `[0, 10)`.
pub fn random_problem<S: Scalar>(seed: u64, dims: RandomDims) -> ProblemSpec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents: Vec<AgentSpaces> = (0..dims.agents)
        .map(|_| AgentSpaces { observations: labels("o", dims.observations), actions: labels("c", dims.actions) })
        .collect();
    let nx = dims.states;
    let nj = dims.actions.pow(dims.agents as u32);
    let initial = random_row(&mut rng, nx);
    let initial_obs = (0..dims.agents)
        .map(|_| (0..nx).map(|_| random_row(&mut rng, dims.observations)).collect())
        .collect();
    let transition = (0..nx * nj).map(|_| random_row(&mut rng, nx)).collect();
    let observation = (0..dims.agents)
        .map(|_| (0..nx * nj).map(|_| random_row(&mut rng, dims.observations)).collect())
        .collect();
    let cost = (0..dims.horizon)
        .map(|_| (0..nx * nj).map(|_| S::lit((rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0)).collect())
        .collect();
    ProblemSpec {
        horizon: dims.horizon,
        delay: dims.delay,
        states: labels("s", nx),
        agents,
        initial,
        initial_obs,
        transition,
        observation,
        cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_tables() {
        let p = build_paper_example::<f64>();
        // Q^1(o1|s1)
        assert_eq!(p.initial_obs_prob(0, 0, 0), 0.9);
        assert_eq!(p.obs_prob(0, 0, 3, 0), 0.9);
        assert_eq!(p.obs_prob(1, 1, 2, 1), 0.7);
        // S(s1 | s2, (c2, c1))
        assert_eq!(p.transition_prob(1, p.joint_action_index(&[1, 0]), 0), 0.7);
        assert_eq!(p.transition_prob(0, p.joint_action_index(&[0, 1]), 1), 0.3);
        // l(t, s2, (c1, c1)) = 8 + 4
        for t in 1..=3 {
            assert_eq!(p.stage_cost(t, 1, p.joint_action_index(&[0, 0])), 12.0);
            assert_eq!(p.stage_cost(t, 0, p.joint_action_index(&[1, 1])), 2.0);
        }
        assert_eq!(p.initial, vec![0.7, 0.3]);
    }

    #[test]
    fn separated_product_sizes_and_marginals() {
        let dims = RandomDims { horizon: 3, delay: 1, agents: 1, states: 2, observations: 2, actions: 2 };
        let subs: Vec<ProblemSpec<f64>> = vec![random_problem(1, dims), random_problem(2, dims)];
        let p = build_separated_example(&subs, 2).unwrap();
        assert_eq!(p.num_states(), 4);
        assert!(p.validate().is_empty(), "{:?}", p.validate());
        // marginalizing the product transition over the other component
        for x in 0..4 {
            for j in 0..p.num_joint_actions() {
                let u = p.joint_action(j);
                for x2a in 0..2 {
                    let marginal: f64 = (0..2).map(|x2b| p.transition_prob(x, j, x2a * 2 + x2b)).sum();
                    let expected = subs[0].transition_prob(x / 2, u[0], x2a);
                    assert!((marginal - expected).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn separated_rejects_mismatched_horizons() {
        let d = RandomDims { horizon: 3, delay: 1, agents: 1, states: 2, observations: 2, actions: 2 };
        let a: ProblemSpec<f64> = random_problem(1, d);
        let b: ProblemSpec<f64> = random_problem(2, RandomDims { horizon: 2, ..d });
        assert!(build_separated_example(&[a.clone(), b], 1).is_err());
        let two: ProblemSpec<f64> = random_problem(3, RandomDims { agents: 2, ..d });
        assert!(build_separated_example(&[a, two], 1).is_err());
    }

    #[test]
    fn random_problem_is_valid_and_seeded() {
        let dims = RandomDims { horizon: 2, delay: 1, agents: 3, states: 3, observations: 2, actions: 2 };
        let a: ProblemSpec<f64> = random_problem(11, dims);
        assert!(a.validate().is_empty(), "{:?}", a.validate());
        assert_eq!(a, random_problem(11, dims));
        assert_ne!(a, random_problem(12, dims));
    }

    #[test]
    fn scenario_names() {
        assert_eq!(ScenarioId::from_name("paper_example", 3).unwrap(), ScenarioId::PaperExample);
        assert!(ScenarioId::from_name("nope", 0).is_err());
        let s: ProblemSpec<f64> = build_scenario(ScenarioId::from_name("separated", 7).unwrap()).unwrap();
        assert!(s.is_valid());
    }
}
