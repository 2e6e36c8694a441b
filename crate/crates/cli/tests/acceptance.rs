//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles here are written independently of the library code they
//! check.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use scarce_core::agents::llm::ScriptedTransport;
use scarce_core::agents::prompts::*;
use scarce_core::agents::*;
use scarce_core::engine::*;
use scarce_core::evaluate::entry_resource_grid;
use scarce_core::metrics::{compute_metrics, gini, rop};
use scarce_core::optimizer::*;
use scarce_core::policy::*;
use scarce_core::scenario::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn rule() -> RuleBackend {
    RuleBackend::new(AgentParams::default())
}

fn within(started: Instant, limit: Duration, detail: String) -> Verdict {
    let took = started.elapsed();
    if took > limit {
        Err(format!("{detail}; took {took:.2?} > {limit:?}"))
    } else {
        Ok(format!("{detail}; {took:.2?}"))
    }
}

// 1 ------------------------------------------------------------------------

fn rop_oracle() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..200 {
        let n = rng.random_range(1..=50);
        let r = rng.random_range(1..=50);
        let s = generate_scenario(&ScenarioSpec::sized(n, r), case).map_err(|e| e.to_string())?;
        let mut free: Vec<u32> = s.resources.iter().map(|h| h.id).collect();
        let mut outcome = AllocationOutcome::default();
        for p in &s.participants {
            let got = if !free.is_empty() && rng.random_bool(0.7) {
                Some(free.swap_remove(rng.random_range(0..free.len())))
            } else {
                None
            };
            outcome.assignment.insert(p.id, got);
        }
        let held: Vec<(u32, f64)> = s
            .participants
            .iter()
            .filter_map(|p| {
                let rid = outcome.assignment[&p.id]?;
                Some((p.family_size, s.resources.iter().find(|h| h.id == rid)?.size))
            })
            .collect();
        let mut expected = 0u64;
        for a in &held {
            for b in &held {
                if a.0 > b.0 && a.1 < b.1 {
                    expected += 1;
                }
            }
        }
        let got = rop(&outcome, &s);
        if got != expected {
            return Err(format!("case {case}: rop {got} != double loop {expected}"));
        }
    }
    within(t, Duration::from_secs(1), "200 random outcomes match".into())
}

// 2 ------------------------------------------------------------------------

fn gini_analytic() -> Verdict {
    let flat = gini(&[10.0f64, 10.0, 10.0, 10.0]);
    let skew = gini(&[0.0f64, 0.0, 0.0, 12.0]);
    if flat.abs() > 1e-9 || (skew - 0.75).abs() > 1e-9 {
        return Err(format!("gini flat {flat}, skew {skew}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..200.0)).collect();
        let alpha = rng.random_range(0.01..100.0);
        let scaled: Vec<f64> = xs.iter().map(|x| x * alpha).collect();
        worst = worst.max((gini(&xs) - gini(&scaled)).abs());
    }
    if worst > 1e-9 {
        return Err(format!("scale invariance off by {worst:e}"));
    }
    Ok(format!("0 and 0.75 exact; max scale drift {worst:.1e}"))
}

// 3 ------------------------------------------------------------------------

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

fn km_correctness() -> Verdict {
    let t = Instant::now();
    let mut perms = Vec::new();
    permutations(&mut (0..6).collect(), 0, &mut perms);
    assert_eq!(perms.len(), 720);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let u: Vec<Vec<Ratio<i64>>> =
            (0..6).map(|_| (0..6).map(|_| Ratio::new(rng.random_range(0..1000), rng.random_range(1..8))).collect()).collect();
        let best = perms
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| u[i][j]).sum::<Ratio<i64>>())
            .max()
            .expect("non-empty");
        let km = km_baseline(&u).map_err(|e| e.to_string())?;
        if km.total != best {
            return Err(format!("case {case}: km {} != oracle {best}", km.total));
        }
    }
    within(t, Duration::from_secs(5), "100 exact 6x6 matches".into())
}

// 4 ------------------------------------------------------------------------

fn km_upper_bound() -> Verdict {
    let backend = rule();
    let s = generate_scenario(&ScenarioSpec::default(), 42).map_err(|e| e.to_string())?;
    let u: Vec<Vec<f64>> = s
        .participants
        .iter()
        .map(|p| s.resources.iter().map(|h| score_resource(p, h, &s.rating_table).map(|x| x.u)).collect())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let bound = km_baseline(&u).map_err(|e| e.to_string())?.total;
    let vulnerable = vulnerable_group(&s, 0.2);
    let mut worst: f64 = 0.0;
    for policy in entry_resource_grid(&Preset::Beijing.policy()) {
        let trace = run_simulation(&s, &policy, &backend, 42, &EngineConfig::default()).map_err(|e| e.to_string())?;
        let sw = compute_metrics::<f64>(&trace.outcome, &s, &vulnerable).sw;
        if sw > bound + 1e-9 {
            return Err(format!("{}: SW {sw:.2} > KM {bound:.2}", policy.label()));
        }
        worst = worst.max(sw);
    }
    Ok(format!("9 policies, max SW {worst:.1} <= KM {bound:.1}"))
}

// 5 ------------------------------------------------------------------------

#[derive(Default)]
struct Tally {
    injective: usize,
    pool: usize,
    capacity: usize,
    deferral: usize,
}

fn conservation_violations(trace: &SimulationTrace) -> Tally {
    let mut t = Tally::default();
    let (k, c) = (trace.policy.k, trace.policy.c);
    let mut owners: BTreeMap<u32, u32> = BTreeMap::new();
    let mut holders: BTreeSet<u32> = BTreeSet::new();
    let mut prev_pool: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
    let mut declines: BTreeMap<u32, u32> = BTreeMap::new();
    for log in &trace.rounds {
        let arrived: BTreeSet<u32> = log.admitted_resources.iter().copied().collect();
        for q in &log.queues {
            for id in &q.promoted {
                declines.insert(*id, 0);
            }
        }
        for d in &log.decisions {
            match &d.outcome {
                DecisionOutcome::Chose { resource, .. } => {
                    if owners.insert(*resource, d.participant).is_some() || !holders.insert(d.participant) {
                        t.injective += 1;
                    }
                    let known = prev_pool.get(&d.queue).is_some_and(|p| p.contains(resource)) || arrived.contains(resource);
                    if !d.visible.contains(resource) || !known {
                        t.pool += 1;
                    }
                }
                DecisionOutcome::Declined => {
                    let n = declines.entry(d.participant).or_default();
                    *n += 1;
                    if *n > k {
                        t.deferral += 1;
                    }
                    if d.returned_to_waiting {
                        *n = 0;
                    }
                }
                _ => {}
            }
        }
        for q in &log.queues {
            let cap = (c * q.pool.len() as f64 - 1e-9).ceil().max(0.0) as usize;
            if q.selection.len() > cap {
                t.capacity += 1;
            }
            for id in &q.waiting {
                declines.insert(*id, 0);
            }
            prev_pool.insert(q.queue, q.pool.iter().copied().collect());
        }
    }
    t
}

fn conservation() -> Verdict {
    let backend = rule();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut total = Tally::default();
    let mut decisions = 0;
    for run in 0..100u64 {
        let policy = decode_policy(&random_policy_vector(&mut rng)).map_err(|e| e.to_string())?;
        let n = rng.random_range(5..=60);
        let r = rng.random_range(3..=40);
        let s = generate_scenario(&ScenarioSpec::sized(n, r), run).map_err(|e| e.to_string())?;
        let trace = run_simulation(&s, &policy, &backend, run, &EngineConfig::default()).map_err(|e| e.to_string())?;
        decisions += trace.rounds.iter().map(|r| r.decisions.len()).sum::<usize>();
        let v = conservation_violations(&trace);
        total.injective += v.injective;
        total.pool += v.pool;
        total.capacity += v.capacity;
        total.deferral += v.deferral;
    }
    let sum = total.injective + total.pool + total.capacity + total.deferral;
    let detail = format!(
        "{decisions} decisions; violations injective {} pool {} capacity {} deferral {}",
        total.injective, total.pool, total.capacity, total.deferral
    );
    if sum == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 6 ------------------------------------------------------------------------

fn waitlist_trend() -> Verdict {
    let t = Instant::now();
    let backend = rule();
    let mean_wt = |k: u32, c: f64| -> Result<f64, String> {
        let mut acc = 0.0;
        for seed in 0..5u64 {
            let s = generate_scenario(&ScenarioSpec::default(), seed).map_err(|e| e.to_string())?;
            let policy = Policy { k, c, ..Preset::Beijing.policy() };
            let trace = run_simulation(&s, &policy, &backend, seed, &EngineConfig::default()).map_err(|e| e.to_string())?;
            acc += compute_metrics::<f64>(&trace.outcome, &s, &vulnerable_group(&s, 0.2)).avg_wt;
        }
        Ok(acc / 5.0)
    };
    let low = mean_wt(1, 1.2)?;
    let high = mean_wt(3, 1.8)?;
    let detail = format!("Avg WT k=3,c=1.8: {high:.3} vs k=1,c=1.2: {low:.3}");
    if high <= low {
        within(t, Duration::from_secs(120), detail)
    } else {
        Err(detail)
    }
}

// 7 ------------------------------------------------------------------------

fn bottom_fifth(s: &Scenario) -> BTreeSet<u32> {
    let mut ranked: Vec<(f64, u32)> =
        s.participants.iter().map(|p| (p.rent_budget / p.family_size as f64, p.id)).collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
    let take = (ranked.len() as f64 * 0.2).ceil() as usize;
    ranked.into_iter().take(take).map(|(_, id)| id).collect()
}

fn vfa_priority() -> Verdict {
    let backend = rule();
    let mut rounds = 0;
    let mut bad = 0;
    for seed in 0..20u64 {
        let s = generate_scenario(&ScenarioSpec::default(), 100 + seed).map_err(|e| e.to_string())?;
        let vulnerable = bottom_fifth(&s);
        let trace = run_simulation(&s, &Preset::OptFairness.policy(), &backend, seed, &EngineConfig::default())
            .map_err(|e| e.to_string())?;
        for log in &trace.rounds {
            rounds += 1;
            let ok = log.queues.iter().all(|q| {
                let order = &q.sorted_waiting;
                let promoted_prefix = order.starts_with(&q.promoted);
                let split = order.iter().position(|id| !vulnerable.contains(id)).unwrap_or(order.len());
                promoted_prefix && order[split..].iter().all(|id| !vulnerable.contains(id))
            });
            if !ok {
                bad += 1;
            }
        }
    }
    let detail = format!("{} of {rounds} rounds ordered vulnerable-first", rounds - bad);
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 8 ------------------------------------------------------------------------

fn poa_convergence() -> Verdict {
    let t = Instant::now();
    let target = [3.0, 2.0, 1.0, 3.0, 3.0, 0.0, 1.0, 1.0];
    let fitness = |v: &PolicyVector| -> f64 {
        -v.genes
            .iter()
            .zip(target.iter())
            .zip(GENE_DOMAIN.iter())
            .map(|((g, t), d)| ((g - t) / d.range()).powi(2))
            .sum::<f64>()
    };
    let mut hits = 0;
    let mut improvement = 0.0;
    for seed in 0..20 {
        let r = poa_optimize(&[], fitness, &GaParams { seed, iterations: 50, ..GaParams::default() })
            .map_err(|e| e.to_string())?;
        let found = r.best_vector.genes.iter().zip(target.iter()).enumerate().all(|(i, (g, t))| {
            if matches!(GENE_DOMAIN[i].kind, GeneKind::Real { .. }) {
                (g - t).abs() <= 0.05
            } else {
                g == t
            }
        });
        hits += usize::from(found);
        let first = r.history[0].mean;
        let last = r.history.last().expect("history").mean;
        improvement += (last - first) / first.abs() / 20.0;
    }
    let detail = format!("optimum in {hits}/20 runs; mean pool fitness +{:.0}%", improvement * 100.0);
    if hits >= 18 && improvement >= 0.2 {
        within(t, Duration::from_secs(60), detail)
    } else {
        Err(detail)
    }
}

// 9 ------------------------------------------------------------------------

fn ridge_predictor() -> Verdict {
    let x: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0]];
    let beta = fit_ridge(&x, &[2.0, 4.0, 6.0], 1.0, false).map_err(|e| e.to_string())?.coefficients[0];
    if (beta - 28.0 / 15.0).abs() > 1e-9 {
        return Err(format!("beta {beta} != 28/15"));
    }
    let encoder = FeatureEncoder;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w: Vec<f64> = (0..encoder.width()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let noise = Normal::new(0.0, 0.01).expect("valid sd");
    let oracle = |v: &PolicyVector| -> f64 {
        let x = encoder.encode(v).expect("in-domain");
        x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + noise.sample(&mut rng)
    };
    let out = train_predictor_incremental(oracle, FitnessDataset::new(0.25), &TrainParams::default())
        .map_err(|e| e.to_string())?;
    let detail = format!("beta = 28/15; test MAE {:.4} after {} samples", out.test_mae, out.dataset.rows.len());
    if out.test_mae <= 0.05 && !out.warning {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 10 -----------------------------------------------------------------------

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_scarce");
    let write = |name: &str, body: &str| -> Result<std::path::PathBuf, String> {
        let p = dir.path().join(name);
        std::fs::write(&p, body).map_err(|e| e.to_string())?;
        Ok(p)
    };
    let serial = write("serial.json", r#"{"preset": "opt_fairness", "engine": {"social": {"parallel": false}}}"#)?;
    let parallel = write("parallel.json", r#"{"preset": "opt_fairness", "engine": {"social": {"parallel": true}}}"#)?;
    let run = |cfg: &std::path::Path, out: &str| -> Result<std::path::PathBuf, String> {
        let out = dir.path().join(out);
        let status = Command::new(bin)
            .args(["simulate", "--config"])
            .arg(cfg)
            .args(["--seed", "7", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("simulate failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        Ok(out)
    };
    let read = |p: std::path::PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
    let a = run(&serial, "a")?;
    let b = run(&serial, "b")?;
    let p = run(&parallel, "p")?;
    if read(a.join("metrics.json"))? != read(b.join("metrics.json"))? {
        return Err("metrics.json differs between identical runs".into());
    }
    let trace = read(a.join("trace.jsonl"))?;
    if trace != read(p.join("trace.jsonl"))? {
        return Err("serial and parallel messaging traces differ".into());
    }
    let messages = String::from_utf8_lossy(&trace).matches("\"speaker\"").count();
    Ok(format!("metrics.json byte-identical; serial == parallel trace ({} bytes, {messages} utterances)", trace.len()))
}

// 11 -----------------------------------------------------------------------

fn fixtures() -> Vec<(TemplateId, &'static str)> {
    vec![
        (
            TemplateId::UtteranceGeneration,
            "Thought: Bo should know\nAcquaintance: Bo\nOutput: House 4 is noisy.\nThought: Cy too\nAcquaintance: Cy\nOutput: Try queue 2.",
        ),
        (TemplateId::CommunicationPlan, "Intent: Deceptive\nAudience: Bo\nGoal: keep house 4 for myself"),
        (TemplateId::Decision, "Thought: best value\nAction: Choose\nAction Input: House 12"),
        (TemplateId::Broadcasting, "Thought: warn others\nAction: Publish\nCommunity: 2\nInfo: community 2 floods"),
        (TemplateId::RelationEvaluation, "My Relation with Bo: enemy (friend/enemy)\nBo lied about house 4."),
        (TemplateId::MemoryReflection, "Updated summary: house 4 is noisy; queue 2 is short."),
        (TemplateId::MemoryAssessment, "Trusted: house 4 is noisy\nSuspicious: house 9 is quiet\nReason: Bo lied before"),
    ]
}

fn parse_fixture(id: TemplateId, text: &str) -> Result<String, String> {
    let e = |e: PromptError| e.to_string();
    Ok(match id {
        TemplateId::UtteranceGeneration => {
            let b = parse_utterances(text, 5).map_err(e)?;
            if b.len() != 2 || b[0].acquaintance != "Bo" || b[1].output != "Try queue 2." {
                return Err(format!("utterances {b:?}"));
            }
            "2 utterance blocks".into()
        }
        TemplateId::CommunicationPlan => {
            let p = parse_plan(text).map_err(e)?;
            if p.intent != "deceptive" || p.audience != "Bo" {
                return Err(format!("plan {p:?}"));
            }
            "plan".into()
        }
        TemplateId::Decision => {
            let d = parse_decision(text).map_err(e)?;
            if d.action != DecisionAction::Choose("House 12".into()) {
                return Err(format!("decision {d:?}"));
            }
            "choose".into()
        }
        TemplateId::Broadcasting => {
            let b = parse_broadcast(text, &[1, 2, 3]).map_err(e)?;
            if !matches!(&b, BroadcastReply::Publish { community: 2, .. }) {
                return Err(format!("broadcast {b:?}"));
            }
            "publish".into()
        }
        TemplateId::RelationEvaluation => {
            let r = parse_relation(text).map_err(e)?;
            if r.relation != Relation::Enemy || r.acquaintance != "Bo" {
                return Err(format!("relation {r:?}"));
            }
            "relation".into()
        }
        TemplateId::MemoryReflection => {
            let s = parse_reflection(text).map_err(e)?;
            if !s.starts_with("house 4 is noisy") {
                return Err(format!("reflection {s:?}"));
            }
            "reflection".into()
        }
        TemplateId::MemoryAssessment => {
            let a = parse_assessment(text).map_err(e)?;
            if a.suspicious.as_deref() != Some("house 9 is quiet") {
                return Err(format!("assessment {a:?}"));
            }
            "assessment".into()
        }
    })
}

fn prompt_layer() -> Verdict {
    for id in TemplateId::ALL {
        let ctx: BTreeMap<String, String> = id.placeholders().into_iter().map(|p| (p.to_string(), format!("[{p}]"))).collect();
        let text = render_prompt(id, &ctx).map_err(|e| format!("{id:?}: {e}"))?;
        for p in id.placeholders() {
            if text.contains(&format!("{{{p}}}")) || !text.contains(&format!("[{p}]")) {
                return Err(format!("{id:?}: slot {p} not bound"));
            }
        }
        if render_prompt(id, &BTreeMap::new()).is_ok() {
            return Err(format!("{id:?} rendered without bindings"));
        }
    }
    for (id, text) in fixtures() {
        parse_fixture(id, text).map_err(|e| format!("{id:?}: {e}"))?;
    }

    // Malformed replies: the decision call retries then gives up the turn,
    // the plan call falls back to withholding.
    let transport = Arc::new(ScriptedTransport::new(vec![Ok("???".to_string()); 6]));
    let backend = LlmBackend::new(transport.clone(), AgentParams::default()).with_retry(3, Duration::ZERO);
    let profile = ParticipantProfile {
        id: 1,
        name: "Ann".into(),
        family_size: 2,
        monthly_income: 6000.0,
        rent_budget: 1800.0,
        feature_weights: FeatureWeights::new(0.25, 0.25, 0.25, 0.25),
        personality: Personality::Neutral,
        honesty: 0.5,
        entry_round: 0,
    };
    let s = generate_scenario(&ScenarioSpec::sized(2, 2), 0).map_err(|e| e.to_string())?;
    let visible: Vec<&HouseResource> = s.resources.iter().collect();
    let memory = AgentMemory::default();
    let view = AgentView { profile: &profile, memory: &memory, rating_table: &s.rating_table, visible: &visible, round: 0 };
    let ed = CompetitivenessReport::default();
    match backend.decide(&view, &ed) {
        Err(BackendError::Exhausted { attempts: 3, .. }) => {}
        other => return Err(format!("decision after malformed replies: {other:?}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let plan = backend.plan(&view, Some((2, Relation::Friend)), &ed, &mut rng).map_err(|e| e.to_string())?;
    if plan.intent != Intent::Withhold {
        return Err(format!("plan fallback {plan:?}"));
    }
    let calls = transport.prompts().len();
    if calls != 6 {
        return Err(format!("expected 6 attempts, saw {calls}"));
    }
    Ok("7 templates bound, 7 fixtures parsed, retry x3 then fallback".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Rop oracle", rop_oracle),
        ("Gini analytic", gini_analytic),
        ("KM correctness", km_correctness),
        ("KM upper bound", km_upper_bound),
        ("Conservation suite", conservation),
        ("Waitlist trend", waitlist_trend),
        ("VFA priority structure", vfa_priority),
        ("POA convergence", poa_convergence),
        ("Ridge predictor", ridge_predictor),
        ("Determinism", determinism),
        ("Prompt layer", prompt_layer),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
