//! JSON problem files.
//!
//! ```text
//! {
//!   "horizon": 3, "delay": 2,
//!   "states": ["s1", "s2"],
//!   "agents": [{"obs": ["o1", "o2"], "actions": ["c1", "c2"]}, ...],
//!   "initial": [0.7, 0.3],
//!   "initial_obs": [[[0.9, 0.1], [0.1, 0.9]], ...],        // [agent][state][obs]
//!   "transition": {"(s1,c1,c1)": [0.9, 0.1], ...},          // (x,u1,...,uK) -> p(x')
//!   "observation": [{"(s1,c1,c1)": [0.9, 0.1], ...}, ...],  // per agent, (x,u_prev) -> q(y)
//!   "cost": {"(1,s1,c1,c1)": 0.0, ...}                      // (t,x,u1,...,uK) -> cost
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::{AgentSpaces, ProblemSpec, Violation};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid problem: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    obs: Vec<String>,
    actions: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    horizon: usize,
    delay: usize,
    states: Vec<String>,
    agents: Vec<AgentDoc>,
    initial: Vec<f64>,
    initial_obs: Vec<Vec<Vec<f64>>>,
    transition: Map<String, Value>,
    observation: Vec<Map<String, Value>>,
    cost: Map<String, Value>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Schema { path: path.into(), message: message.into() }
}

fn key(parts: &[&str]) -> String {
    format!("({})", parts.join(","))
}

fn split_key(path: &str, k: &str) -> Result<Vec<String>, ModelError> {
    let inner = k
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| schema(path, format!("key {k:?} is not a parenthesized label tuple")))?;
    Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
}

fn lookup(path: &str, labels: &[String], label: &str) -> Result<usize, ModelError> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| schema(path, format!("unknown label {label:?}")))
}

fn row_from(path: &str, v: &Value) -> Result<Vec<f64>, ModelError> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an array of probabilities"))?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| p.as_f64().ok_or_else(|| schema(format!("{path}[{i}]"), "expected a number")))
        .collect()
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<ProblemSpec<f64>, ModelError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ProblemDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => schema(if path == "." { "document".into() } else { path }, inner.to_string()),
            _ => ModelError::Parse { line: inner.line(), column: inner.column(), message: inner.to_string() },
        }
    })?;
    let spec = from_doc(doc)?;
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations));
    }
    Ok(spec)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec<f64>, ModelError> {
    parse_problem(&std::fs::read_to_string(path)?)
}

fn from_doc(doc: ProblemDoc) -> Result<ProblemSpec<f64>, ModelError> {
    let agents: Vec<AgentSpaces> = doc
        .agents
        .into_iter()
        .map(|a| AgentSpaces { observations: a.obs, actions: a.actions })
        .collect();
    let mut spec = ProblemSpec {
        horizon: doc.horizon,
        delay: doc.delay,
        states: doc.states,
        agents,
        initial: doc.initial,
        initial_obs: doc.initial_obs,
        transition: Vec::new(),
        observation: Vec::new(),
        cost: Vec::new(),
    };
    if spec.agents.is_empty() {
        return Err(schema("agents", "at least one agent is required"));
    }
    let nx = spec.num_states();
    let nj = spec.num_joint_actions();
    let k_agents = spec.num_agents();

    // "(x,u1,...,uK)" -> row index x * J + joint(u)
    let row_index = |path: &str, k: &str, spec: &ProblemSpec<f64>| -> Result<usize, ModelError> {
        let parts = split_key(path, k)?;
        if parts.len() != 1 + k_agents {
            return Err(schema(path, format!("key {k:?} must have {} components", 1 + k_agents)));
        }
        let x = lookup(path, &spec.states, &parts[0])?;
        let mut u = Vec::with_capacity(k_agents);
        for (j, label) in parts[1..].iter().enumerate() {
            u.push(lookup(path, &spec.agents[j].actions, label)?);
        }
        Ok(x * nj + spec.joint_action_index(&u))
    };

    let fill_table = |path: &str, map: &Map<String, Value>, spec: &ProblemSpec<f64>| -> Result<Vec<Vec<f64>>, ModelError> {
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; nx * nj];
        for (k, v) in map {
            let p = format!("{path}[{k:?}]");
            let r = row_index(&p, k, spec)?;
            if rows[r].is_some() {
                return Err(schema(p, "duplicate row"));
            }
            rows[r] = Some(row_from(&p, v)?);
        }
        rows.into_iter()
            .enumerate()
            .map(|(r, row)| {
                row.ok_or_else(|| {
                    let x = &spec.states[r / nj];
                    let u: Vec<&str> = spec
                        .joint_action(r % nj)
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| spec.agents[j].actions[a].as_str())
                        .collect();
                    let mut parts = vec![x.as_str()];
                    parts.extend(u);
                    schema(path, format!("missing row {}", key(&parts)))
                })
            })
            .collect()
    };

    spec.transition = fill_table("transition", &doc.transition, &spec)?;
    if doc.observation.len() != k_agents {
        return Err(schema("observation", format!("expected {k_agents} agent tables, found {}", doc.observation.len())));
    }
    spec.observation = doc
        .observation
        .iter()
        .enumerate()
        .map(|(k, m)| fill_table(&format!("observation[{k}]"), m, &spec))
        .collect::<Result<_, _>>()?;

    let mut cost: Vec<Vec<Option<f64>>> = vec![vec![None; nx * nj]; spec.horizon];
    for (k, v) in &doc.cost {
        let p = format!("cost[{k:?}]");
        let parts = split_key(&p, k)?;
        let t: usize = parts
            .first()
            .and_then(|s| s.parse().ok())
            .filter(|t| (1..=spec.horizon).contains(t))
            .ok_or_else(|| schema(&p, format!("stage must be an integer in 1..={}", spec.horizon)))?;
        let r = row_index(&p, &key(&parts[1..].iter().map(String::as_str).collect::<Vec<_>>()), &spec)?;
        let c = v.as_f64().ok_or_else(|| schema(&p, "expected a number"))?;
        if cost[t - 1][r].replace(c).is_some() {
            return Err(schema(p, "duplicate entry"));
        }
    }
    spec.cost = cost
        .into_iter()
        .enumerate()
        .map(|(t, stage)| {
            stage
                .into_iter()
                .enumerate()
                .map(|(r, c)| c.ok_or_else(|| schema("cost", format!("missing entry for stage {} row {r}", t + 1))))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(spec)
}

/// Serializes a problem to the JSON document format (pretty-printed).
pub fn save_problem<S: Scalar>(spec: &ProblemSpec<S>) -> String {
    let f = |v: &S| v.to_f64_lossy();
    let nj = spec.num_joint_actions();
    let row_key = |r: usize| {
        let mut parts = vec![spec.states[r / nj].clone()];
        parts.extend(
            spec.joint_action(r % nj)
                .iter()
                .enumerate()
                .map(|(j, &a)| spec.agents[j].actions[a].clone()),
        );
        parts
    };
    let table = |rows: &[Vec<S>]| -> Map<String, Value> {
        rows.iter()
            .enumerate()
            .map(|(r, row)| {
                let parts = row_key(r);
                let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
                (key(&refs), Value::from(row.iter().map(f).collect::<Vec<f64>>()))
            })
            .collect()
    };
    let mut cost = Map::new();
    for (t, stage) in spec.cost.iter().enumerate() {
        for (r, c) in stage.iter().enumerate() {
            let stage_label = (t + 1).to_string();
            let parts = row_key(r);
            let mut refs = vec![stage_label.as_str()];
            refs.extend(parts.iter().map(String::as_str));
            cost.insert(key(&refs), Value::from(f(c)));
        }
    }
    let doc = ProblemDoc {
        horizon: spec.horizon,
        delay: spec.delay,
        states: spec.states.clone(),
        agents: spec
            .agents
            .iter()
            .map(|a| AgentDoc { obs: a.observations.clone(), actions: a.actions.clone() })
            .collect(),
        initial: spec.initial.iter().map(f).collect(),
        initial_obs: spec
            .initial_obs
            .iter()
            .map(|t| t.iter().map(|r| r.iter().map(f).collect()).collect())
            .collect(),
        transition: table(&spec.transition),
        observation: spec.observation.iter().map(|t| table(t)).collect(),
        cost,
    };
    serde_json::to_string_pretty(&doc).expect("problem document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_paper_example, random_problem, RandomDims};

    #[test]
    fn paper_example_round_trips() {
        let p = build_paper_example::<f64>();
        let text = save_problem(&p);
        assert_eq!(parse_problem(&text).unwrap(), p);
    }

    #[test]
    fn random_problem_round_trips() {
        let dims = RandomDims { horizon: 2, delay: 1, agents: 3, states: 3, observations: 2, actions: 3 };
        let p: ProblemSpec<f64> = random_problem(5, dims);
        assert_eq!(parse_problem(&save_problem(&p)).unwrap(), p);
    }

    #[test]
    fn missing_transition_names_the_field() {
        let mut v: Value = serde_json::from_str(&save_problem(&build_paper_example::<f64>())).unwrap();
        v.as_object_mut().unwrap().remove("transition");
        let err = parse_problem(&v.to_string()).unwrap_err();
        match err {
            ModelError::Schema { message, .. } => assert!(message.contains("transition"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_schema_error_has_path() {
        let mut v: Value = serde_json::from_str(&save_problem(&build_paper_example::<f64>())).unwrap();
        v["agents"][1]["obs"] = Value::from(3);
        match parse_problem(&v.to_string()).unwrap_err() {
            ModelError::Schema { path, .. } => assert_eq!(path, "agents[1].obs"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_location() {
        match parse_problem("{\n  \"horizon\": 3,\n  oops\n}").unwrap_err() {
            ModelError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn near_stochastic_row_fails_at_load() {
        let mut v: Value = serde_json::from_str(&save_problem(&build_paper_example::<f64>())).unwrap();
        v["transition"]["(s1,c1,c1)"] = serde_json::json!([0.899999, 0.1]);
        match parse_problem(&v.to_string()).unwrap_err() {
            ModelError::Invalid(vs) => {
                assert_eq!(vs.len(), 1);
                assert_eq!(vs[0].location, "transition(s1,c1,c1)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_label_and_missing_row() {
        let mut v: Value = serde_json::from_str(&save_problem(&build_paper_example::<f64>())).unwrap();
        let row = v["transition"]["(s1,c1,c1)"].clone();
        v["transition"].as_object_mut().unwrap().remove("(s1,c1,c1)");
        let err = parse_problem(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("missing row (s1,c1,c1)"), "{err}");
        v["transition"]["(s9,c1,c1)"] = row;
        let err = parse_problem(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("unknown label \"s9\""), "{err}");
    }
}
