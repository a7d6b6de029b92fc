use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::{compression_report, AgentDp, CompressionReport, DpError, Tolerances, ValueTable};
use crate::model::ProblemSpec;
use crate::oracle::{exact_payoff, tree_best_response};
use crate::scalar::Scalar;
use crate::strategy::StrategyProfile;

/// Gap below which a profile counts as person-by-person optimal.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Stages from the horizon backwards, agents cycled at each stage until it settles.
    TimeFirst,
    /// Whole-horizon best responses, agent by agent.
    FullSweep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::TimeFirst => "time_first",
            Mode::FullSweep => "full_sweep",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "time_first" => Ok(Mode::TimeFirst),
            "full_sweep" => Ok(Mode::FullSweep),
            other => Err(format!("unknown mode {other:?} (expected time_first or full_sweep)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport<S> {
    pub mode: Mode,
    pub converged: bool,
    pub sweeps: usize,
    pub payoff: S,
    /// `E[V_1^k(I_1^k)]` per agent.
    pub expected_values: Vec<S>,
    /// `J_n(gamma) - min over agent k's strategies`, per agent.
    pub gaps: Vec<S>,
    /// `J_n` after every sweep (time_first) or every agent update (full_sweep).
    pub payoff_trace: Vec<S>,
    pub profile: StrategyProfile,
    pub values: Vec<ValueTable<S>>,
    pub compression: CompressionReport,
}

/// Person-by-person iteration from `initial` until the profile is a fixed point.
///
/// In time-first mode only admissible realizations (positive probability under
/// the current profile, own past actions included) are updated; the others keep
/// their action until they become admissible. In the returned profile every
/// reachable entry holds the DP minimizer; unreachable entries are left as the
/// iteration found them.
pub fn pbp_iterate<S: Scalar>(
    spec: &ProblemSpec<S>,
    initial: &StrategyProfile,
    mode: Mode,
    max_outer: usize,
) -> Result<EquilibriumReport<S>, DpError> {
    pbp_iterate_with(spec, initial, mode, max_outer, Tolerances::default())
}

pub fn pbp_iterate_with<S: Scalar>(
    spec: &ProblemSpec<S>,
    initial: &StrategyProfile,
    mode: Mode,
    max_outer: usize,
    tol: Tolerances,
) -> Result<EquilibriumReport<S>, DpError> {
    let pattern = spec.pattern();
    let n = spec.horizon;
    let mut profile = initial.clone();
    let mut trace = Vec::new();
    for sweep in 1..=max_outer {
        let old = profile.clone();
        match mode {
            Mode::TimeFirst => {
                for t in (1..=n).rev() {
                    let mut rounds = 0;
                    loop {
                        rounds += 1;
                        if rounds > max_outer {
                            return Err(DpError::NotConverged {
                                sweeps: sweep,
                                last: Box::new(profile),
                                previous: Box::new(old),
                            });
                        }
                        let mut changed = false;
                        for k in 0..spec.num_agents() {
                            let actions = {
                                let dp = AgentDp::new(spec, &pattern, &profile, k).with_tie_tolerance(tol.tie);
                                let next = if t < n { Some(dp.backward(t + 1)?.swap_remove(0).values) } else { None };
                                let admissible = dp.admissible(t, profile.agent(k));
                                let mut actions = dp.stage(t, next.as_deref())?.actions;
                                for (i, u) in actions.iter_mut().enumerate() {
                                    if !admissible[i] {
                                        *u = profile.action(k, t, i);
                                    }
                                }
                                actions
                            };
                            if actions != profile.stage(k, t) {
                                changed = true;
                                profile.set_stage(k, t, actions);
                            }
                        }
                        debug!("sweep {sweep} stage {t} round {rounds}: changed={changed}");
                        if !changed {
                            break;
                        }
                    }
                }
                trace.push(super::profile_payoff(spec, &profile)?);
            }
            Mode::FullSweep => {
                for k in 0..spec.num_agents() {
                    let br = AgentDp::new(spec, &pattern, &profile, k).with_tie_tolerance(tol.tie).best_response()?;
                    profile = profile.with_agent(k, br.strategy);
                    trace.push(super::profile_payoff(spec, &profile)?);
                }
            }
        }
        info!("sweep {sweep}: payoff {}", trace.last().copied().unwrap_or_else(S::zero));
        if profile == old {
            return report(spec, profile, mode, sweep, trace, tol);
        }
    }
    let previous = profile.clone();
    Err(DpError::NotConverged { sweeps: max_outer, last: Box::new(profile), previous: Box::new(previous) })
}

fn report<S: Scalar>(
    spec: &ProblemSpec<S>,
    profile: StrategyProfile,
    mode: Mode,
    sweeps: usize,
    payoff_trace: Vec<S>,
    tol: Tolerances,
) -> Result<EquilibriumReport<S>, DpError> {
    let pattern = spec.pattern();
    let mut values = Vec::new();
    let mut expected_values = Vec::new();
    for k in 0..spec.num_agents() {
        let br = AgentDp::new(spec, &pattern, &profile, k).with_tie_tolerance(tol.tie).best_response()?;
        expected_values.push(br.expected_value);
        values.push(br.table);
    }
    // own off-path entries affect no agent's tables; unreachable ones are where other
    // agents' deviations land, so they are kept
    let profile = StrategyProfile::from_fn(&pattern, |k, t, i| match values[k].value(t, i) {
        Some(_) => values[k].action(t, i),
        None => profile.action(k, t, i),
    });
    let payoff = super::profile_payoff(spec, &profile)?;
    let gaps: Vec<S> = expected_values.iter().map(|&v| payoff - v).collect();
    let converged = gaps.iter().all(|g| g.to_f64_lossy() <= tol.equilibrium);
    let compression = compression_report(spec, &profile, &values);
    Ok(EquilibriumReport { mode, converged, sweeps, payoff, expected_values, gaps, payoff_trace, profile, values, compression })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<S> {
    /// `J_n` from the exhaustive joint law.
    pub payoff: S,
    /// `J_n` from DP policy evaluation.
    pub dp_payoff: S,
    pub dp_gaps: Vec<S>,
    pub oracle_gaps: Vec<S>,
    pub equilibrium: bool,
}

/// Best-response gaps for every agent along both the DP and the history-tree paths.
pub fn verify_equilibrium<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile) -> Result<VerificationReport<S>, DpError> {
    verify_equilibrium_with(spec, profile, Tolerances::default())
}

pub fn verify_equilibrium_with<S: Scalar>(
    spec: &ProblemSpec<S>,
    profile: &StrategyProfile,
    tol: Tolerances,
) -> Result<VerificationReport<S>, DpError> {
    let pattern = spec.pattern();
    let payoff = exact_payoff(spec, profile);
    let dp_payoff = super::profile_payoff(spec, profile)?;
    let mut dp_gaps = Vec::new();
    let mut oracle_gaps = Vec::new();
    for k in 0..spec.num_agents() {
        dp_gaps.push(dp_payoff - AgentDp::new(spec, &pattern, profile, k).with_tie_tolerance(tol.tie).best_response()?.expected_value);
        oracle_gaps.push(payoff - tree_best_response(spec, profile, k).1);
    }
    let equilibrium = dp_gaps.iter().chain(&oracle_gaps).all(|g| g.to_f64_lossy() <= tol.equilibrium);
    Ok(VerificationReport { payoff, dp_payoff, dp_gaps, oracle_gaps, equilibrium })
}
