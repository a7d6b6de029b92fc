//! Finite decentralized POMDP instances: spaces, kernels, stage costs.
//!
//! Spaces and kernels are time-invariant; only the stage cost carries a time
//! index. Observations at stage `t >= 2` are drawn from
//! `Q^k(y | x_t, u_{t-1})`, the first observation from a separate
//! action-free kernel `Q^k_1(y | x_1)`.

mod io;
mod scenarios;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{load_problem, parse_problem, save_problem, ModelError};
pub use scenarios::{
    build_paper_example, build_scenario, build_separated_example, random_problem, separated_parts, RandomDims,
    ScenarioId,
};

use crate::info::InfoPattern;
use crate::scalar::Scalar;

/// Observation and action labels of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpaces {
    pub observations: Vec<String>,
    pub actions: Vec<String>,
}

/// A finite-horizon decentralized POMDP with a `delay`-step sharing pattern.
///
/// Joint actions `(u^1, ..., u^K)` are flattened with agent 1 as the most
/// significant digit; see [`ProblemSpec::joint_action_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<S> {
    pub horizon: usize,
    pub delay: usize,
    pub states: Vec<String>,
    pub agents: Vec<AgentSpaces>,
    /// Distribution of the initial state.
    pub initial: Vec<S>,
    /// `initial_obs[k][x][y]` is `Q^k_1(y | x)`.
    pub initial_obs: Vec<Vec<Vec<S>>>,
    /// `transition[x * J + u][x']` is `S(x' | x, u)`.
    pub transition: Vec<Vec<S>>,
    /// `observation[k][x * J + u][y]` is `Q^k(y | x, u)` with `u` the previous joint action.
    pub observation: Vec<Vec<Vec<S>>>,
    /// `cost[t - 1][x * J + u]` is the stage cost at stage `t`.
    pub cost: Vec<Vec<S>>,
}

/// One failed invariant, with the table coordinate where it was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl<S: Scalar> ProblemSpec<S> {
    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_obs(&self, k: usize) -> usize {
        self.agents[k].observations.len()
    }

    pub fn num_actions(&self, k: usize) -> usize {
        self.agents[k].actions.len()
    }

    pub fn num_joint_actions(&self) -> usize {
        self.agents.iter().map(|a| a.actions.len()).product()
    }

    pub fn joint_action_index(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.num_agents());
        actions
            .iter()
            .zip(&self.agents)
            .fold(0, |acc, (&u, a)| acc * a.actions.len() + u)
    }

    pub fn joint_action(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_agents()];
        for (k, a) in self.agents.iter().enumerate().rev() {
            let r = a.actions.len();
            out[k] = index % r;
            index /= r;
        }
        out
    }

    pub fn transition_prob(&self, x: usize, joint_u: usize, next: usize) -> S {
        self.transition[x * self.num_joint_actions() + joint_u][next]
    }

    pub fn obs_prob(&self, k: usize, x: usize, prev_joint_u: usize, y: usize) -> S {
        self.observation[k][x * self.num_joint_actions() + prev_joint_u][y]
    }

    pub fn initial_obs_prob(&self, k: usize, x: usize, y: usize) -> S {
        self.initial_obs[k][x][y]
    }

    /// Stage cost at stage `t` (1-based).
    pub fn stage_cost(&self, t: usize, x: usize, joint_u: usize) -> S {
        self.cost[t - 1][x * self.num_joint_actions() + joint_u]
    }

    /// Information-pattern geometry (window lengths and realization counts).
    pub fn pattern(&self) -> InfoPattern {
        InfoPattern::new(
            self.horizon,
            self.delay,
            self.agents.iter().map(|a| a.observations.len()).collect(),
            self.agents.iter().map(|a| a.actions.len()).collect(),
        )
    }

    fn joint_action_label(&self, joint_u: usize) -> String {
        self.joint_action(joint_u)
            .iter()
            .enumerate()
            .map(|(k, &u)| self.agents[k].actions[u].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Checks every structural and stochasticity invariant and returns all violations.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |location: String, message: String| out.push(Violation { location, message });

        if self.horizon == 0 {
            push("horizon".into(), "horizon must be at least 1".into());
        }
        if self.delay == 0 {
            push("delay".into(), "delay must be at least 1".into());
        } else if self.delay > self.horizon {
            push(
                "delay".into(),
                format!("delay exceeds horizon ({} > {})", self.delay, self.horizon),
            );
        }
        if self.agents.is_empty() {
            push("agents".into(), "at least one agent is required".into());
        }
        if self.states.is_empty() {
            push("states".into(), "state space is empty".into());
        }
        for (k, a) in self.agents.iter().enumerate() {
            if a.observations.is_empty() {
                push(format!("agents[{k}].obs"), "observation space is empty".into());
            }
            if a.actions.is_empty() {
                push(format!("agents[{k}].actions"), "action space is empty".into());
            }
        }
        check_labels(&mut push, "states", &self.states);
        for (k, a) in self.agents.iter().enumerate() {
            check_labels(&mut push, &format!("agents[{k}].obs"), &a.observations);
            check_labels(&mut push, &format!("agents[{k}].actions"), &a.actions);
        }
        if !out.is_empty() {
            return out;
        }
        let mut push = |location: String, message: String| out.push(Violation { location, message });

        let nx = self.num_states();
        let nj = self.num_joint_actions();
        let tol = S::stochastic_tolerance();

        check_row(&mut push, "initial".into(), &self.initial, nx, tol);

        if self.initial_obs.len() != self.num_agents() {
            push(
                "initial_obs".into(),
                format!("expected {} agent tables, found {}", self.num_agents(), self.initial_obs.len()),
            );
        } else {
            for (k, table) in self.initial_obs.iter().enumerate() {
                if table.len() != nx {
                    push(format!("initial_obs[{k}]"), format!("expected {nx} rows, found {}", table.len()));
                    continue;
                }
                for (x, row) in table.iter().enumerate() {
                    check_row(
                        &mut push,
                        format!("initial_obs[{k}]({})", self.states[x]),
                        row,
                        self.num_obs(k),
                        tol,
                    );
                }
            }
        }

        if self.transition.len() != nx * nj {
            push(
                "transition".into(),
                format!("expected {} rows, found {}", nx * nj, self.transition.len()),
            );
        } else {
            for (r, row) in self.transition.iter().enumerate() {
                let loc = format!("transition({},{})", self.states[r / nj], self.joint_action_label(r % nj));
                check_row(&mut push, loc, row, nx, tol);
            }
        }

        if self.observation.len() != self.num_agents() {
            push(
                "observation".into(),
                format!("expected {} agent tables, found {}", self.num_agents(), self.observation.len()),
            );
        } else {
            for (k, table) in self.observation.iter().enumerate() {
                if table.len() != nx * nj {
                    push(
                        format!("observation[{k}]"),
                        format!("expected {} rows, found {}", nx * nj, table.len()),
                    );
                    continue;
                }
                for (r, row) in table.iter().enumerate() {
                    let loc = format!(
                        "observation[{k}]({},{})",
                        self.states[r / nj],
                        self.joint_action_label(r % nj)
                    );
                    check_row(&mut push, loc, row, self.num_obs(k), tol);
                }
            }
        }

        if self.cost.len() != self.horizon {
            push(
                "cost".into(),
                format!("expected {} stages, found {}", self.horizon, self.cost.len()),
            );
        } else {
            for (t, stage) in self.cost.iter().enumerate() {
                if stage.len() != nx * nj {
                    push(
                        format!("cost[{}]", t + 1),
                        format!("expected {} entries, found {}", nx * nj, stage.len()),
                    );
                }
                for (r, c) in stage.iter().enumerate() {
                    if !c.is_finite() {
                        push(format!("cost[{}][{r}]", t + 1), "non-finite cost".into());
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Converts every table to another scalar type.
    pub fn cast<T: Scalar>(&self) -> ProblemSpec<T> {
        let c = |v: &S| T::from_f64(v.to_f64_lossy()).unwrap_or_else(T::nan);
        let row = |r: &Vec<S>| r.iter().map(c).collect::<Vec<T>>();
        ProblemSpec {
            horizon: self.horizon,
            delay: self.delay,
            states: self.states.clone(),
            agents: self.agents.clone(),
            initial: row(&self.initial),
            initial_obs: self.initial_obs.iter().map(|t| t.iter().map(row).collect()).collect(),
            transition: self.transition.iter().map(row).collect(),
            observation: self.observation.iter().map(|t| t.iter().map(row).collect()).collect(),
            cost: self.cost.iter().map(row).collect(),
        }
    }
}

fn check_labels(push: &mut impl FnMut(String, String), loc: &str, labels: &[String]) {
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() || l.contains(|c: char| c == ',' || c == '(' || c == ')' || c.is_whitespace()) {
            push(format!("{loc}[{i}]"), format!("label {l:?} must be non-empty without commas, parentheses or spaces"));
        }
        if labels[..i].contains(l) {
            push(format!("{loc}[{i}]"), format!("duplicate label {l:?}"));
        }
    }
}

fn check_row<S: Scalar>(push: &mut impl FnMut(String, String), loc: String, row: &[S], len: usize, tol: S) {
    if row.len() != len {
        push(loc, format!("expected {len} entries, found {}", row.len()));
        return;
    }
    if let Some(p) = row.iter().find(|p| !(**p >= S::zero())) {
        push(loc, format!("negative or non-finite entry {p}"));
        return;
    }
    let total: S = row.iter().copied().sum();
    if (total - S::one()).abs() > tol {
        push(loc, format!("row sum {total} ≠ 1"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_action_round_trip() {
        let p = build_paper_example::<f64>();
        for j in 0..p.num_joint_actions() {
            assert_eq!(p.joint_action_index(&p.joint_action(j)), j);
        }
        assert_eq!(p.joint_action_index(&[1, 0]), 2);
    }

    #[test]
    fn paper_example_is_valid() {
        assert!(build_paper_example::<f64>().validate().is_empty());
        assert!(build_paper_example::<f32>().validate().is_empty());
    }

    #[test]
    fn row_sum_violation_is_reported() {
        let mut p = build_paper_example::<f64>();
        p.transition[0] = vec![0.9, 0.2];
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "transition(s1,c1,c1)");
        assert!(v[0].message.contains("row sum 1.1"), "{}", v[0].message);
    }

    #[test]
    fn delay_beyond_horizon_is_reported() {
        let mut p = build_paper_example::<f64>();
        p.delay = p.horizon + 1;
        let v = p.validate();
        assert!(v.iter().any(|v| v.message.contains("delay exceeds horizon")));
    }

    #[test]
    fn negative_entry_and_bad_dimensions() {
        let mut p = build_paper_example::<f64>();
        p.observation[1][3] = vec![1.5, -0.5];
        p.cost.pop();
        let v = p.validate();
        assert!(v.iter().any(|v| v.location.starts_with("observation[1]") && v.message.contains("negative")));
        assert!(v.iter().any(|v| v.location == "cost"));
    }

    #[test]
    fn cast_preserves_tables() {
        let p = build_paper_example::<f64>();
        let q: ProblemSpec<f32> = p.cast();
        assert_eq!(q.cast::<f64>().states, p.states);
        assert!((q.transition_prob(1, 2, 0) - 0.7).abs() < 1e-6);
    }
}
