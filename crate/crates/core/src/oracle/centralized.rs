//! Exhaustive `P(x_{t-T} | delta_t)` and `P(x_t, lambda_t^(K) | delta_t)` from the joint law.

use super::{profile_act, walk};
use crate::info::{History, MixedRadix};
use crate::model::ProblemSpec;
use crate::scalar::{normalize, Scalar};
use crate::strategy::StrategyProfile;

fn accumulate<S: Scalar>(
    spec: &ProblemSpec<S>,
    profile: &StrategyProfile,
    t: usize,
    width: usize,
    cell: impl Fn(&[usize], &History) -> usize,
) -> Vec<Option<Vec<S>>> {
    let pattern = spec.pattern();
    let mut acc = vec![vec![S::zero(); width]; pattern.shared_count(t)];
    walk(spec, &profile_act(&pattern, profile), &mut |states, h, m| {
        let d = pattern.shared_index(t, &pattern.from_history(0, t, h).shared);
        let c = cell(states, h);
        acc[d][c] = acc[d][c] + m;
    });
    acc.into_iter()
        .map(|mut v| normalize(&mut v).map(|_| v))
        .collect()
}

/// `Theta_t` by conditioning the joint law on `delta_t`, indexed by shared index; `None` off-support.
pub fn exhaustive_theta<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, t: usize) -> Vec<Option<Vec<S>>> {
    let lag = t.checked_sub(spec.delay).filter(|&s| s >= 1).expect("theta is defined for t > T");
    accumulate(spec, profile, t, spec.num_states(), |states, _| states[lag - 1])
}

/// `Pi_t` by conditioning the joint law on `delta_t`, laid out as `x * |Lambda^(K)| + h`.
pub fn exhaustive_pi<S: Scalar>(spec: &ProblemSpec<S>, profile: &StrategyProfile, t: usize) -> Vec<Option<Vec<S>>> {
    let pattern = spec.pattern();
    let radix = MixedRadix::new((0..spec.num_agents()).map(|j| pattern.private_count(j, t)).collect());
    let nh = radix.size();
    accumulate(spec, profile, t, spec.num_states() * nh, |states, h| {
        let idx = radix.encode((0..spec.num_agents()).map(|j| pattern.private_index(j, t, &pattern.from_history(j, t, h).private)));
        states[t - 1] * nh + idx
    })
}
