//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::collections::HashMap;
use std::time::Instant;

use decpomdp_pbp::beliefs::{pi_table, stage_measure, theta_table, IncrementSpace, PrivateBeliefTable};
use decpomdp_pbp::dp::{best_response, compression_report, pbp_iterate, verify_equilibrium, EquilibriumReport, Mode};
use decpomdp_pbp::model::{
    build_paper_example, build_separated_example, random_problem, separated_parts, ProblemSpec, RandomDims,
};
use decpomdp_pbp::oracle::{
    centralized_pomdp_solve, common_info_dp, enumerate_team_optimal, exact_payoff, exhaustive_pi, exhaustive_theta,
    joint_law, monte_carlo_payoff, tree_best_response, AgentTree,
};
use decpomdp_pbp::{InfoPattern, StrategyProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn solve(p: &ProblemSpec<f64>) -> EquilibriumReport<f64> {
    pbp_iterate(p, &StrategyProfile::lowest_index(&p.pattern()), Mode::TimeFirst, 100).expect("converges")
}

fn c1_payoff(report: &EquilibriumReport<f64>, elapsed: f64) -> Outcome {
    let j = report.payoff;
    ensure((j - 4.3005).abs() <= 5e-4, || format!("J = {j:.6}"))?;
    for (k, v) in report.expected_values.iter().enumerate() {
        ensure((v - j).abs() <= 1e-9, || format!("E[V1^{}] = {v:.12} vs J = {j:.12}", k + 1))?;
    }
    ensure(elapsed < 5.0, || format!("took {elapsed:.2} s"))?;
    Ok(format!("J = {j:.6}, E[V1] = {:?}, {elapsed:.3} s", report.expected_values))
}

fn c2_table_iv(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    let pat = p.pattern();
    let rows = [
        (0, 1, "(o2)", 6.71, "c2"),
        (0, 2, "(o2,o1,c2)", 1.61, "c1"),
        (0, 3, "(o2,o2,c2,c2,o1,o1,c1)", 0.33, "c1"),
        (1, 1, "(o2)", 5.81, "c2"),
        (1, 2, "(o2,o1,c2)", 1.99, "c1"),
        (1, 3, "(o2,o2,c2,c2,o1,o1,c1)", 0.51, "c1"),
    ];
    let mut got = Vec::new();
    for (k, t, label, value, action) in rows {
        let idx = (0..pat.info_count(k, t))
            .find(|&i| pat.info_at(k, t, i).display(p) == label)
            .ok_or_else(|| format!("no realization {label}"))?;
        let v = report.values[k].value(t, idx).ok_or_else(|| format!("agent {} {label} unreachable", k + 1))?;
        let u = &p.agents[k].actions[report.values[k].action(t, idx)];
        ensure((v - value).abs() <= 5e-3 && u == action, || {
            format!("agent {} {label}: {v:.4} {u} vs {value} {action}", k + 1)
        })?;
        got.push(format!("{v:.2}/{u}"));
    }
    Ok(format!("rows {}", got.join(" ")))
}

/// Xi, Theta and Pi against exhaustive Bayes on every reachable realization.
fn filters_match(p: &ProblemSpec<f64>, profile: &StrategyProfile) -> Result<usize, String> {
    let pat = p.pattern();
    let mut checked = 0;
    for k in 0..p.num_agents() {
        let table = PrivateBeliefTable::compute(p, &pat, profile, k);
        let tree = AgentTree::build(p, profile, k);
        for t in 1..=p.horizon {
            for idx in 0..pat.info_count(k, t) {
                match (table.get(t, idx), tree.posterior(t, idx)) {
                    (Some(xi), Some(ex)) => {
                        let d = max_diff(&xi.probs, &ex);
                        ensure(d <= 1e-12, || format!("xi agent {} t={t} idx={idx}: {d:e}", k + 1))?;
                        checked += 1;
                    }
                    (None, None) => {}
                    _ => return Err(format!("xi support mismatch agent {} t={t} idx={idx}", k + 1)),
                }
            }
        }
    }
    let pis = pi_table(p, &pat, profile);
    let thetas = theta_table(p, &pat);
    for t in 1..=p.horizon {
        for (d, ex) in exhaustive_pi(p, profile, t).into_iter().enumerate() {
            match (&pis[t - 1][d], ex) {
                (Some(pi), Some(ex)) => {
                    let e = max_diff(&pi.probs, &ex);
                    ensure(e <= 1e-12, || format!("pi t={t} delta={d}: {e:e}"))?;
                    checked += 1;
                }
                (None, None) => {}
                _ => return Err(format!("pi support mismatch t={t} delta={d}")),
            }
        }
        if pat.shared_len(t) > 0 {
            for (d, ex) in exhaustive_theta(p, profile, t).into_iter().enumerate() {
                if let Some(ex) = ex {
                    let th = thetas[t - 1][d].as_ref().ok_or_else(|| format!("theta missing t={t} delta={d}"))?;
                    let e = max_diff(&th.probs, &ex);
                    ensure(e <= 1e-12, || format!("theta t={t} delta={d}: {e:e}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

fn c3_filters(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    let n = filters_match(p, &report.profile)?;
    Ok(format!("{n} posteriors match exhaustive Bayes within 1e-12"))
}

/// `P(x_t, lambda^{-k} | i_t^k)` from the joint law with agent k following its strategy.
fn strategy_bayes(p: &ProblemSpec<f64>, pat: &InfoPattern, profile: &StrategyProfile, k: usize, t: usize, idx: usize) -> Option<Vec<f64>> {
    let others: Vec<usize> = (0..p.num_agents()).filter(|&j| j != k).collect();
    let sizes: Vec<usize> = others.iter().map(|&j| pat.private_count(j, t)).collect();
    let nh: usize = sizes.iter().product();
    let mut acc = vec![0.0; p.num_states() * nh];
    for (tr, m) in joint_law(p, profile) {
        let h = decpomdp_pbp::History { observations: tr.observations.clone(), actions: tr.actions.clone() };
        if pat.info_index_from_history(k, t, &h) != idx {
            continue;
        }
        let mut hidden = 0;
        for (&j, &size) in others.iter().zip(&sizes) {
            hidden = hidden * size + pat.private_index(j, t, &pat.from_history(j, t, &h).private);
        }
        acc[tr.states[t - 1] * nh + hidden] += m;
    }
    let total: f64 = acc.iter().sum();
    (total > 0.0).then(|| acc.iter().map(|v| v / total).collect())
}

/// Forces agent k's strategy to play the own actions recorded along `idx`.
fn realize(pat: &InfoPattern, profile: &mut StrategyProfile, k: usize, t: usize, idx: usize) {
    let mut i = pat.info_at(k, t, idx);
    while let Some(ext) = pat.split_last(&i) {
        let pi = pat.info_index(&ext.parent);
        profile.set_action(k, ext.parent.stage, pi, ext.action);
        i = ext.parent;
    }
}

fn c4_own_strategy(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    let pat = p.pattern();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    while done < 20 {
        let k = rng.gen_range(0..2);
        let t = rng.gen_range(2..=p.horizon);
        let idx = rng.gen_range(0..pat.info_count(k, t));
        let mut a = report.profile.with_agent(k, StrategyProfile::random(&pat, rng.gen()).agent(k).to_vec());
        let mut b = report.profile.with_agent(k, StrategyProfile::random(&pat, rng.gen()).agent(k).to_vec());
        realize(&pat, &mut a, k, t, idx);
        realize(&pat, &mut b, k, t, idx);
        let xa = PrivateBeliefTable::compute(p, &pat, &a, k);
        let xb = PrivateBeliefTable::compute(p, &pat, &b, k);
        let (Some(pa), Some(pb)) = (xa.get(t, idx), xb.get(t, idx)) else { continue };
        ensure(pa.probs == pb.probs, || format!("recursion differs at agent {} t={t} idx={idx}", k + 1))?;
        let ea = strategy_bayes(p, &pat, &a, k, t, idx).ok_or("realization has zero mass under strategy a")?;
        let eb = strategy_bayes(p, &pat, &b, k, t, idx).ok_or("realization has zero mass under strategy b")?;
        ensure(max_diff(&ea, &eb) <= 1e-12 && max_diff(&ea, &pa.probs) <= 1e-12, || {
            format!("strategy-conditioned Bayes differs at agent {} t={t} idx={idx}", k + 1)
        })?;
        done += 1;
    }
    Ok("20 own-strategy pairs: identical recursion output, equal to strategy-conditioned Bayes".into())
}

fn key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|p| (p * 1e10).round() as i64).collect()
}

/// Paper example with agent 2's channel made uninformative, so distinct private
/// components share posteriors and the grouping checks have non-trivial groups.
fn blind_variant() -> ProblemSpec<f64> {
    let mut p = build_paper_example::<f64>();
    p.initial_obs[1] = vec![vec![0.5, 0.5]; 2];
    p.observation[1] = vec![vec![0.5, 0.5]; p.observation[1].len()];
    p
}

fn c5_markov_grouping(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    let (g1, m1) = markov_groups(p, report)?;
    let b = blind_variant();
    let (g2, m2) = markov_groups(&b, &solve(&b))?;
    ensure(m1 + m2 > 0, || "no group with several members".into())?;
    Ok(format!(
        "identical next-state laws in all (xi, delta, u) groups: paper {g1} groups ({m1} multi-member), blind-channel variant {g2} ({m2} multi-member)"
    ))
}

fn markov_groups(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Result<(usize, usize), String> {
    let pat = p.pattern();
    let mut groups_checked = 0;
    let mut multi = 0;
    for k in 0..2 {
        let tree = AgentTree::build(p, &report.profile, k);
        for t in 1..p.horizon {
            let np = pat.private_count(k, t);
            let mut groups: HashMap<(Vec<i64>, usize, usize), Vec<HashMap<Vec<i64>, f64>>> = HashMap::new();
            for idx in 0..pat.info_count(k, t) {
                let Some(xi) = tree.posterior(t, idx) else { continue };
                for u in 0..p.num_actions(k) {
                    let mut dist: HashMap<Vec<i64>, f64> = HashMap::new();
                    for (child, pr) in tree.transition(t, idx, u) {
                        if let Some(next) = tree.posterior(t + 1, child) {
                            *dist.entry(key(&next)).or_default() += pr;
                        }
                    }
                    groups.entry((key(&xi), idx / np, u)).or_default().push(dist);
                }
            }
            for members in groups.values() {
                groups_checked += 1;
                if members.len() > 1 {
                    multi += 1;
                }
                for m in &members[1..] {
                    let keys: std::collections::HashSet<_> = m.keys().chain(members[0].keys()).collect();
                    for key in keys {
                        let a = m.get(key).copied().unwrap_or(0.0);
                        let b = members[0].get(key).copied().unwrap_or(0.0);
                        ensure((a - b).abs() <= 1e-10, || format!("agent {} t={t}: next-state law differs by {:e}", k + 1, (a - b).abs()))?;
                    }
                }
            }
        }
    }
    Ok((groups_checked, multi))
}

fn c6_best_response(p: &ProblemSpec<f64>) -> Outcome {
    let pat = p.pattern();
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let others = StrategyProfile::random(&pat, 500 + seed);
        for k in 0..2 {
            let dp = best_response(p, &others, k).map_err(|e| e.to_string())?.expected_value;
            let (_, tree) = tree_best_response(p, &others, k);
            worst = worst.max((dp - tree).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |dp - tree| = {worst:e}"))?;
    Ok(format!("20 best responses, max |dp - tree| = {worst:.1e}"))
}

fn equilibrium_checks(p: &ProblemSpec<f64>, profile: &StrategyProfile, seed: u64) -> Result<String, String> {
    let pat = p.pattern();
    let v = verify_equilibrium(p, profile).map_err(|e| e.to_string())?;
    ensure(v.equilibrium, || format!("gaps dp {:?} oracle {:?}", v.dp_gaps, v.oracle_gaps))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for trial in 0..100 {
        let k = trial % p.num_agents();
        let alt = profile.with_agent(k, StrategyProfile::random(&pat, rng.gen()).agent(k).to_vec());
        worst = worst.min(exact_payoff(p, &alt) - v.payoff);
    }
    ensure(worst >= -1e-9, || format!("a random own strategy improves by {:e}", -worst))?;
    let gap = v.dp_gaps.iter().chain(&v.oracle_gaps).copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("max gap {gap:.1e}; best of 100 random deviations is worse by {worst:.4}"))
}

fn c7_equilibrium(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    equilibrium_checks(p, &report.profile, 77)
}

fn c8_separated() -> Outcome {
    let subs: Vec<ProblemSpec<f64>> = separated_parts(2, 7);
    let p = build_separated_example(&subs, 2).map_err(|e| e.to_string())?;
    let report = solve(&p);
    let sum: f64 = subs.iter().map(|s| centralized_pomdp_solve(s).expect("single agent").value).sum();
    ensure((report.payoff - sum).abs() <= 1e-9, || format!("J = {} vs sum {}", report.payoff, sum))?;
    Ok(format!("J = {:.9} = sum of POMDP optima {:.9}", report.payoff, sum))
}

fn c9_team(seed: u64) -> Outcome {
    let dims = RandomDims { horizon: 2, delay: 1, agents: 2, states: 2, observations: 2, actions: 2 };
    let p: ProblemSpec<f64> = random_problem(seed, dims);
    let team = enumerate_team_optimal(&p).map_err(|e| e.to_string())?;
    let ci = common_info_dp(&p).map_err(|e| e.to_string())?;
    let pbp = solve(&p).payoff;
    ensure((team.payoff - ci.payoff).abs() <= 1e-12, || format!("team {} vs coordinator {}", team.payoff, ci.payoff))?;
    ensure(team.payoff <= pbp + 1e-12, || format!("team {} > pbp {}", team.payoff, pbp))?;
    Ok(format!(
        "{} profiles: team {:.9} = coordinator {:.9} <= PbP {:.9}",
        team.profiles_evaluated, team.payoff, ci.payoff, pbp
    ))
}

fn c10_compression(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    let (t1, p1) = compression_counts(p, report)?;
    let b = blind_variant();
    let (t2, p2) = compression_counts(&b, &solve(&b))?;
    ensure(t1 + t2 > 0 && p1 + p2 > 0, || "no merged realizations to compare".into())?;
    Ok(format!(
        "terminal (xi, delta) groups agree on value and argmin set, transition measures equal: paper {t1} merged terminal / {p1} measure pairs, blind-channel variant {t2} / {p2}"
    ))
}

fn compression_counts(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Result<(usize, usize), String> {
    let c = compression_report(p, &report.profile, &report.values);
    ensure(c.terminal_consistent(), || "terminal (xi, delta) groups disagree".into())?;
    ensure(c.transition_equal(), || "stage transition measures differ within (xi, delta) groups".into())?;
    // the measure itself, recomputed from the filter, never depends on lambda^k
    let pat = p.pattern();
    let mut pairs = 0;
    for k in 0..2 {
        let table = PrivateBeliefTable::compute(p, &pat, &report.profile, k);
        for t in 1..p.horizon {
            let space = IncrementSpace::new(p, &pat, k, t);
            let np = pat.private_count(k, t);
            let mut seen: HashMap<(Vec<i64>, usize), Vec<Vec<f64>>> = HashMap::new();
            for idx in 0..pat.info_count(k, t) {
                let Some(xi) = table.get(t, idx) else { continue };
                let m: Vec<Vec<f64>> = (0..2).map(|u| stage_measure(p, &pat, &space, xi, idx / np, u, &report.profile)).collect();
                match seen.get(&(key(&xi.probs), idx / np)) {
                    Some(m0) => {
                        pairs += 1;
                        for u in 0..2 {
                            ensure(max_diff(&m[u], &m0[u]) <= 1e-12, || format!("agent {} t={t} idx={idx}", k + 1))?;
                        }
                    }
                    None => {
                        seen.insert((key(&xi.probs), idx / np), m);
                    }
                }
            }
        }
    }
    let terminal: usize = c.stages.iter().filter(|s| s.terminal_consistent.is_some()).map(|s| s.reachable - s.groups_xi_delta).sum();
    Ok((terminal, pairs))
}

fn c11_monte_carlo(p: &ProblemSpec<f64>, report: &EquilibriumReport<f64>) -> Outcome {
    let exact = exact_payoff(p, &report.profile);
    let (mean, se) = monte_carlo_payoff(p, &report.profile, 1_000_000, 42);
    let z = (mean - exact) / se;
    ensure(z.abs() <= 4.0, || format!("mean {mean:.5} se {se:.5} exact {exact:.5} z {z:.2}"))?;
    Ok(format!("mean {mean:.5} +- {se:.5} vs exact {exact:.5} (z = {z:.2})"))
}

fn c12_degenerate() -> Outcome {
    let mut lines = Vec::new();
    for delay in [3, 1] {
        let dims = RandomDims { horizon: 3, delay, agents: 2, states: 2, observations: 2, actions: 2 };
        let p: ProblemSpec<f64> = random_problem(1234 + delay as u64, dims);
        let pat = p.pattern();
        if delay == 3 {
            ensure((1..=3).all(|t| pat.shared_len(t) == 0 && pat.shared_count(t) == 1), || "shared part not empty".into())?;
        }
        let report = solve(&p);
        let n = filters_match(&p, &report.profile)?;
        let eq = equilibrium_checks(&p, &report.profile, delay as u64)?;
        if delay == 3 {
            ensure(report.compression.actions_factor_xi(), || "T=n actions do not factor through xi".into())?;
        }
        lines.push(format!("T={delay}: J {:.6}, {n} posteriors match, {eq}", report.payoff));
    }
    Ok(lines.join("; "))
}

fn main() {
    let p = build_paper_example::<f64>();
    let start = Instant::now();
    let report = solve(&p);
    let elapsed = start.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("paper payoff", Box::new(|| c1_payoff(&report, elapsed))),
        ("sample value rows", Box::new(|| c2_table_iv(&p, &report))),
        ("filter-oracle equivalence", Box::new(|| c3_filters(&p, &report))),
        ("posterior ignores own strategy", Box::new(|| c4_own_strategy(&p, &report))),
        ("conditional Markov grouping", Box::new(|| c5_markov_grouping(&p, &report))),
        ("DP vs tree best response", Box::new(|| c6_best_response(&p))),
        ("equilibrium verification", Box::new(|| c7_equilibrium(&p, &report))),
        ("separated sanity check", Box::new(c8_separated)),
        ("tiny-instance global benchmark", Box::new(|| c9_team(3))),
        ("structural compression", Box::new(|| c10_compression(&p, &report))),
        ("Monte-Carlo cross-check", Box::new(|| c11_monte_carlo(&p, &report))),
        ("degenerate delays", Box::new(c12_degenerate)),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{:.2} s]", n + 1, t0.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", n + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
