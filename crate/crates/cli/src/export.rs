//! Realization-keyed dumps of value tables, strategies and posteriors.

use std::fs;
use std::path::Path;

use decpomdp_pbp::beliefs::{others, PrivateBeliefTable};
use decpomdp_pbp::dp::{best_response, profile_payoff, DpError};
use decpomdp_pbp::model::ProblemSpec;
use decpomdp_pbp::{build_paper_example, InfoPattern, InfoRealization, StrategyProfile};
use serde::Serialize;

/// `(agent index, stage, displayed realization)` of the sample rows for the built-in example.
const SAMPLE_ROWS: [(usize, usize, &str); 6] = [
    (0, 1, "(o2)"),
    (0, 2, "(o2,o1,c2)"),
    (0, 3, "(o2,o2,c2,c2,o1,o1,c1)"),
    (1, 1, "(o2)"),
    (1, 2, "(o2,o1,c2)"),
    (1, 3, "(o2,o2,c2,c2,o1,o1,c1)"),
];

#[derive(Debug, Clone, Serialize)]
pub struct Key {
    /// 1-based.
    pub agent: usize,
    pub stage: usize,
    pub realization: Vec<String>,
    pub shared: Vec<String>,
    pub private: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueRow {
    #[serde(flatten)]
    pub key: Key,
    pub value: f64,
    pub action: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyRow {
    #[serde(flatten)]
    pub key: Key,
    pub action: String,
    pub reachable: bool,
}

/// One entry of `P(x_t, lambda_t^{-k} | i_t^k)`; `others` lists the other agents' private components in agent order.
#[derive(Debug, Clone, Serialize)]
pub struct PosteriorEntry {
    pub state: String,
    pub others: Vec<Vec<String>>,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosteriorRow {
    #[serde(flatten)]
    pub key: Key,
    pub entries: Vec<PosteriorEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Export {
    pub problem: String,
    pub payoff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_iv: Option<Vec<ValueRow>>,
    /// Best-response values against the other agents, reachable realizations only.
    pub values: Vec<ValueRow>,
    pub strategies: Vec<StrategyRow>,
    pub posteriors: Vec<PosteriorRow>,
}

fn key(spec: &ProblemSpec<f64>, i: &InfoRealization) -> Key {
    Key {
        agent: i.agent + 1,
        stage: i.stage,
        realization: i.labels(spec),
        shared: i.shared_labels(spec),
        private: i.private_labels(spec),
    }
}

fn private_labels(spec: &ProblemSpec<f64>, pattern: &InfoPattern, j: usize, t: usize, index: usize) -> Vec<String> {
    let p = pattern.private_at(j, t, index);
    let a = &spec.agents[j];
    p.observations
        .iter()
        .map(|&y| a.observations[y].clone())
        .chain(p.actions.iter().map(|&u| a.actions[u].clone()))
        .collect()
}

/// Column labels of agent `k`'s posterior at stage `t`.
fn columns(spec: &ProblemSpec<f64>, pattern: &InfoPattern, k: usize, t: usize) -> Vec<(String, Vec<Vec<String>>)> {
    let hidden = others(k, spec.num_agents());
    let sizes: Vec<usize> = hidden.iter().map(|&j| pattern.private_count(j, t)).collect();
    let nh: usize = sizes.iter().product();
    let mut out = Vec::new();
    for x in &spec.states {
        for h in 0..nh {
            let mut rest = h;
            let mut digits = vec![0; sizes.len()];
            for (d, &size) in digits.iter_mut().zip(&sizes).rev() {
                *d = rest % size;
                rest /= size;
            }
            let labels = hidden.iter().zip(&digits).map(|(&j, &d)| private_labels(spec, pattern, j, t, d)).collect();
            out.push((x.clone(), labels));
        }
    }
    out
}

pub fn build(spec: &ProblemSpec<f64>, profile: &StrategyProfile, problem: String) -> Result<Export, DpError> {
    let pattern = spec.pattern();
    let mut values = Vec::new();
    let mut strategies = Vec::new();
    let mut posteriors = Vec::new();
    for k in 0..spec.num_agents() {
        let table = best_response(spec, profile, k)?.table;
        let beliefs = PrivateBeliefTable::compute(spec, &pattern, profile, k);
        let labels_k = &spec.agents[k].actions;
        for t in 1..=spec.horizon {
            let cols = columns(spec, &pattern, k, t);
            for i in 0..pattern.info_count(k, t) {
                let real = pattern.info_at(k, t, i);
                let key = key(spec, &real);
                if let Some(v) = table.value(t, i) {
                    values.push(ValueRow { key: key.clone(), value: v, action: labels_k[table.action(t, i)].clone() });
                }
                strategies.push(StrategyRow {
                    key: key.clone(),
                    action: labels_k[profile.action(k, t, i)].clone(),
                    reachable: beliefs.reachable(t, i),
                });
                if let Some(xi) = beliefs.get(t, i) {
                    let entries = cols
                        .iter()
                        .zip(&xi.probs)
                        .map(|((state, others), &prob)| PosteriorEntry { state: state.clone(), others: others.clone(), prob })
                        .collect();
                    posteriors.push(PosteriorRow { key, entries });
                }
            }
        }
    }
    let table_iv = (*spec == build_paper_example::<f64>()).then(|| {
        SAMPLE_ROWS
            .iter()
            .filter_map(|&(k, t, label)| {
                values.iter().find(|r| r.key.agent == k + 1 && r.key.stage == t && format!("({})", r.key.realization.join(",")) == label)
            })
            .cloned()
            .collect()
    });
    Ok(Export { problem, payoff: profile_payoff(spec, profile)?, table_iv, values, strategies, posteriors })
}

fn tuple(labels: &[String]) -> String {
    serde_json::to_string(labels).expect("label tuple")
}

fn key_fields(k: &Key) -> Vec<String> {
    vec![k.agent.to_string(), k.stage.to_string(), tuple(&k.realization), tuple(&k.shared), tuple(&k.private)]
}

const KEY_HEADER: [&str; 5] = ["agent", "stage", "realization", "shared", "private"];

fn write_values(path: &Path, rows: &[ValueRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(KEY_HEADER.iter().chain(&["value", "action"]))?;
    for r in rows {
        let mut rec = key_fields(&r.key);
        rec.push(r.value.to_string());
        rec.push(r.action.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`, `values.csv`, `strategies.csv`, `posteriors.csv` and,
/// for the built-in example, `table_iv.csv` into `dir`. Label tuples are JSON arrays.
pub fn write_csv(data: &Export, dir: &Path) -> Result<(), csv::Error> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(["problem", "payoff"])?;
    w.write_record([data.problem.clone(), data.payoff.to_string()])?;
    w.flush()?;

    write_values(&dir.join("values.csv"), &data.values)?;
    if let Some(rows) = &data.table_iv {
        write_values(&dir.join("table_iv.csv"), rows)?;
    }

    let mut w = csv::Writer::from_path(dir.join("strategies.csv"))?;
    w.write_record(KEY_HEADER.iter().chain(&["action", "reachable"]))?;
    for r in &data.strategies {
        let mut rec = key_fields(&r.key);
        rec.push(r.action.clone());
        rec.push(r.reachable.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("posteriors.csv"))?;
    w.write_record(KEY_HEADER.iter().chain(&["state", "others", "prob"]))?;
    for r in &data.posteriors {
        for e in &r.entries {
            let mut rec = key_fields(&r.key);
            rec.push(e.state.clone());
            rec.push(serde_json::to_string(&e.others).expect("label tuples"));
            rec.push(e.prob.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
