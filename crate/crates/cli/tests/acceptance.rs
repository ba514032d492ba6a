//! Acceptance harness: one PASS/FAIL line per headline criterion.
//!
//! Runs without the libtest harness so each criterion reports on its own
//! line with its elapsed time; the process exits non-zero if any fails.
//! Every check recomputes its expectation independently (brute-force
//! oracles, published lists read from disk, the CLI binary versus the HTTP
//! router) rather than trusting the engine's own bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdg_core::analytics::Bucket;
use sdg_core::survey::*;
use sdg_core::*;
use sdg_service::{router, App, MemoryRepository, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn t(s: &str) -> TargetId {
    TargetId::parse(s).unwrap()
}

fn ids(xs: &[&str]) -> BTreeSet<TargetId> {
    xs.iter().map(|s| t(s)).collect()
}

fn expert_store() -> EvaluationStore {
    let text = std::fs::read(fixture("expert_answers.csv")).unwrap();
    let answers = read_expert_answers(&text[..]).unwrap();
    EvaluationStore::expert(answers.iter().map(|a| (a.pair, a.score)))
}

fn indicator_store() -> EvaluationStore {
    let file = std::fs::File::open(fixture("indicator_results.csv")).unwrap();
    let (results, _) = IndicatorResults::read_csv(file, Catalog::bundled()).unwrap();
    EvaluationStore::indicator(&results)
}

/// Rows of a two-column published list, header skipped.
fn list_rows(name: &str) -> Vec<(String, String)> {
    std::fs::read_to_string(fixture(&format!("lists/{name}")))
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.trim().to_string(), b.trim().to_string())
        })
        .collect()
}

fn pair_list(name: &str) -> BTreeSet<TargetPair> {
    list_rows(name)
        .iter()
        .map(|(a, b)| TargetPair::parse(a, b).unwrap())
        .collect()
}

fn count_list(name: &str) -> BTreeMap<TargetId, usize> {
    list_rows(name)
        .iter()
        .map(|(a, n)| (t(a), n.parse().unwrap()))
        .collect()
}

// ---------------------------------------------------------------------------
// criteria

fn pair_arithmetic() -> Outcome {
    let start = Instant::now();
    let catalog = Catalog::bundled();
    let pairs = catalog.all_pairs();
    let n = catalog.targets().len();
    ensure(n == 169, || format!("{n} targets"))?;
    ensure(
        pairs.len() == n * (n - 1) / 2 && pairs.len() == 14196,
        || format!("{} pairs", pairs.len()),
    )?;
    let unique: BTreeSet<_> = pairs.iter().collect();
    ensure(unique.len() == pairs.len(), || "duplicate pairs".into())?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("{} pairs", pairs.len()))
}

/// Textbook Spearman: average ranks by counting, then the Pearson formula
/// written out from its definition.
fn oracle_rho(x: &[f64], y: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let below = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

fn spearman_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut defined = 0;
    for case in 0..1000 {
        let n = rng.random_range(5..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(1..=5) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(1..=5) as f64).collect();
        let got = spearman(&x, &y).value();
        let want = oracle_rho(&x, &y);
        match (got, want) {
            (Some(g), Some(w)) => {
                ensure((g - w).abs() <= 1e-12, || {
                    format!("case {case}: {g} vs oracle {w}")
                })?;
                defined += 1;
            }
            (None, None) => {}
            _ => {
                return Err(format!(
                    "case {case}: definedness differs, {got:?} vs {want:?}"
                ))
            }
        }
        // strictly increasing transform of each side
        let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 7.0).collect();
        let fy: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        let moved = spearman(&fx, &fy).value();
        let same = match (got, moved) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
            (None, None) => true,
            _ => false,
        };
        ensure(same, || {
            format!("case {case}: not invariant, {got:?} vs {moved:?}")
        })?;
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("1000 samples, {defined} defined"))
}

fn classification_boundaries() -> Outcome {
    use InteractionClass::*;
    let d = Coefficient::Defined;
    let cases = [
        (d(-0.61), TradeOff),
        (d(-0.6), TradeOff),
        (d(-0.59), Nonclassified),
        (d(0.0), Nonclassified),
        (d(0.59), Nonclassified),
        (d(0.6), Synergy),
        (d(0.61), Synergy),
        (Coefficient::Undefined, Nonclassified),
    ];
    for (rho, want) in cases {
        let got = classify(rho);
        ensure(got == want, || {
            format!("{rho:?} -> {got:?}, expected {want:?}")
        })?;
    }
    Ok(format!("{} boundary values", cases.len()))
}

fn percentage_reproduction() -> Outcome {
    let catalog = Catalog::bundled();
    let pairs = catalog.all_pairs();
    // synthetic stores built only from the published counts
    let score = |v| ExpertScore::new(v).unwrap();
    let expert = EvaluationStore::expert(pairs.iter().take(1256).enumerate().map(|(i, &p)| {
        let s = match i {
            0..36 => score(-2),
            36..1017 => score(2),
            _ => score(0),
        };
        (p, s)
    }));
    let e = summary_stats(&expert, catalog);
    let shown = |s: &SummaryStats, c: &str| {
        s.class(c)
            .map(|x| x.percent.to_string())
            .unwrap_or_default()
    };
    let got = [
        shown(&e, "negative"),
        shown(&e, "positive"),
        shown(&e, "zero"),
    ];
    ensure(got == ["2.87", "78.11", "19.03"], || {
        format!("expert {got:?}")
    })?;
    ensure(e.evaluated == 1256, || {
        format!("expert evaluated {}", e.evaluated)
    })?;

    let mut csv = String::from("target_a,target_b,class,synergies,tradeoffs,nonclassified\n");
    for (i, p) in pairs.iter().take(292 + 236).enumerate() {
        let (class, syn, tr) = if i < 292 {
            ("synergy", 1, 0)
        } else {
            ("tradeoff", 0, 1)
        };
        csv.push_str(&format!("{},{},{class},{syn},{tr},0\n", p.a(), p.b()));
    }
    let (results, _) =
        IndicatorResults::read_csv(csv.as_bytes(), catalog).map_err(|e| e.to_string())?;
    let i = summary_stats(&EvaluationStore::indicator(&results), catalog);
    let got = [shown(&i, "synergy"), shown(&i, "tradeoff")];
    ensure(got == ["2.06", "1.66"], || format!("indicator {got:?}"))?;
    Ok("2.87/78.11/19.03 of 1256, 2.06/1.66 of 14196".into())
}

fn fixture_reproduction() -> Outcome {
    let catalog = Catalog::bundled();
    let (e, i) = (expert_store(), indicator_store());
    let g = |n| GoalId::new(n).unwrap();

    let re = intra_goal_report(&e, catalog);
    ensure(
        re.negative_pairs() == pair_list("list1_expert_negative_intra.csv"),
        || "List 1 differs".into(),
    )?;
    ensure(
        re.positive_pairs() == pair_list("list2_expert_positive_intra.csv"),
        || "List 2 differs".into(),
    )?;
    let (n16, n3) = (re.goal(g(16)).negative_count, re.goal(g(3)).negative_count);
    ensure((n16, n3) == (4, 3), || {
        format!("expert SDG16={n16} SDG3={n3}")
    })?;

    let ri = intra_goal_report(&i, catalog);
    ensure(
        ri.negative_pairs() == pair_list("list5_indicator_tradeoff_intra.csv"),
        || "List 5 differs".into(),
    )?;
    ensure(
        ri.positive_pairs() == pair_list("list6_indicator_synergy_intra.csv"),
        || "List 6 differs".into(),
    )?;
    let (n3, n17) = (ri.goal(g(3)).negative_count, ri.goal(g(17)).negative_count);
    ensure((n3, n17) == (10, 4), || {
        format!("indicator SDG3={n3} SDG17={n17}")
    })?;

    let ve = verdicts(&e, catalog);
    let multi: BTreeMap<_, _> = ve
        .iter()
        .filter(|v| v.negatives >= 2)
        .map(|v| (v.target, v.negatives))
        .collect();
    ensure(
        multi == count_list("list3_expert_multi_negative.csv"),
        || "List 3 differs".into(),
    )?;
    let ugly = ugliness_ranking(&ve);
    ensure(
        (ugly[0].target, ugly[0].negatives) == (t("13.1"), 4) && ugly[1].negatives < 4,
        || {
            format!(
                "expert ugliest {} with {}",
                ugly[0].target, ugly[0].negatives
            )
        },
    )?;
    let beautiful: BTreeMap<_, _> = ve
        .iter()
        .filter(|v| v.bucket == Bucket::Beautiful && v.positives >= 2)
        .map(|v| (v.target, v.positives))
        .collect();
    ensure(
        beautiful == count_list("list4_expert_multi_positive_beautiful.csv"),
        || "List 4 differs".into(),
    )?;
    let bucket = |b| ve.iter().filter(|v| v.bucket == b).count();
    let buckets = (
        bucket(Bucket::Beautiful),
        bucket(Bucket::Ugly),
        bucket(Bucket::Unevaluated),
    );
    ensure(buckets == (116, 51, 2), || format!("buckets {buckets:?}"))?;

    let vi = verdicts(&i, catalog);
    let top: Vec<_> = ugliness_ranking(&vi)
        .iter()
        .take(4)
        .map(|v| (v.target, v.negatives))
        .collect();
    ensure(
        top[..3] == [(t("3.4"), 27), (t("10.6"), 26), (t("16.8"), 26)] && top[3].1 < 26,
        || format!("indicator ugliest {top:?}"),
    )?;
    for (target, n) in count_list("list7_indicator_ugly.csv") {
        let got = vi
            .iter()
            .find(|v| v.target == target)
            .map_or(0, |v| v.negatives);
        ensure(got == n, || format!("List 7 {target}: {got} vs {n}"))?;
    }
    Ok("Lists 1-7, buckets 116/51/2".into())
}

fn synthesis_reproduction() -> Outcome {
    let catalog = Catalog::bundled();
    let (e, i) = (expert_store(), indicator_store());
    let start = Instant::now();
    let r = synthesize(&e, &i, catalog, &SynthesisConfig::default()).map_err(|e| e.to_string())?;
    within(Duration::from_secs(1), start)?;

    let ugly: BTreeSet<_> = r.negative.common_ugly.iter().map(|u| u.target).collect();
    ensure(ugly == ids(&["3.6", "3.7", "8.2"]), || {
        format!("negative answer {ugly:?}")
    })?;
    let focus: BTreeSet<_> = r.negative.focus_targets.iter().map(|f| f.target).collect();
    ensure(focus == ids(&["3.1", "3.6", "3.7"]), || {
        format!("focus {focus:?}")
    })?;
    let pairs: BTreeSet<_> = r.positive.common_pairs.iter().copied().collect();
    let want: BTreeSet<_> = [
        ("1.1", "1.2"),
        ("3.7", "3.1"),
        ("3.7", "3.2"),
        ("4.2", "4.B"),
        ("6.2", "6.6"),
        ("8.1", "8.5"),
        ("9.4", "9.5"),
    ]
    .iter()
    .map(|(a, b)| TargetPair::parse(a, b).unwrap())
    .collect();
    ensure(pairs == want, || format!("positive pairs {pairs:?}"))?;
    let beautiful: BTreeSet<_> = r
        .positive
        .common_beautiful
        .iter()
        .map(|b| b.target)
        .collect();
    ensure(beautiful == ids(&["8.5", "17.5"]), || {
        format!("common beautiful {beautiful:?}")
    })?;

    let prioritized: BTreeSet<_> = r.positive.prioritized_targets.iter().copied().collect();
    let negative: BTreeSet<_> = r.negative.targets.iter().copied().collect();
    ensure(prioritized.is_disjoint(&negative), || {
        "prioritized list touches the negative answer".into()
    })?;
    for p in &r.positive.common_pairs {
        if p.contains(t("3.7")) {
            let gone = r
                .positive
                .excluded
                .iter()
                .any(|x| x.item == format!("{}-{}", p.a(), p.b()));
            ensure(gone, || format!("{p} not excluded"))?;
        }
    }
    ensure(!prioritized.contains(&t("3.7")), || {
        "3.7 prioritized".into()
    })?;
    let swapped =
        synthesize(&i, &e, catalog, &SynthesisConfig::default()).map_err(|e| e.to_string())?;
    ensure(swapped == r, || "argument order changes the result".into())?;
    Ok(format!(
        "{} prioritized, {} excluded",
        prioritized.len(),
        r.positive.excluded.len()
    ))
}

// ---------------------------------------------------------------------------
// survey state machine

fn profile(name: String, curator: RespondentId) -> Profile {
    Profile {
        name,
        primary_affiliation: "institute".into(),
        secondary_affiliation: None,
        education_level: "MSc".into(),
        experience: Some(Experience::OverTen),
        curator: Some(curator),
        consent: true,
    }
}

fn survey_run(seed: u64, ops: usize) -> Result<(SurveySnapshot, usize), String> {
    const GOALS: [&[u32]; 3] = [&[7, 13], &[13, 14], &[7, 13, 14]];
    let mut e = SurveyEngine::new(SurveyConfig {
        seed,
        ..SurveyConfig::default()
    });
    let admin = e.add_admin(Profile::default());
    let people: Vec<RespondentId> = (0..3)
        .map(|i| {
            let id = e.register(profile(format!("r{i}"), admin)).unwrap().id;
            e.approve(admin, id).unwrap();
            id
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut before = e.snapshot();
    let mut finalized_seen: BTreeMap<TargetPair, AssignmentState> = BTreeMap::new();
    for step in 0..ops {
        let who = *people.choose(&mut rng).unwrap();
        let all: Vec<TargetPair> = e.assignments().map(|a| a.pair).collect();
        let pair = all.choose(&mut rng).copied();
        let result = match rng.random_range(0..16) {
            0 => {
                let goals = GOALS
                    .choose(&mut rng)
                    .unwrap()
                    .iter()
                    .map(|&n| GoalId::new(n).unwrap())
                    .collect();
                e.select_goals(who, goals).map(|_| ())
            }
            1 | 2 => e.generate_batch(who, rng.random_range(1..25)).map(|_| ()),
            3..=10 => match pair {
                Some(p) => {
                    let score = rng.random_range(-4..=4);
                    let text = rng.random_bool(0.5).then_some("because");
                    e.submit_score(who, p, score, text).map(|_| ())
                }
                None => Ok(()),
            },
            11..=13 => match pair {
                Some(p) => e.skip(who, p).map(|_| ()),
                None => Ok(()),
            },
            _ => e.finalize(who).map(|_| ()),
        };
        let after = e.snapshot();
        if result.is_err() {
            ensure(before == after, || {
                format!("step {step}: failed op changed state")
            })?;
        }
        let mut seen = BTreeSet::new();
        let old: BTreeMap<_, _> = before
            .assignments
            .iter()
            .map(|a| (a.pair, (a.respondent, a.state)))
            .collect();
        for a in &after.assignments {
            ensure(seen.insert(a.pair), || {
                format!("step {step}: {} assigned twice", a.pair)
            })?;
            if let Some(&(owner, state)) = old.get(&a.pair) {
                ensure(owner == a.respondent, || {
                    format!("step {step}: {} changed hands", a.pair)
                })?;
                ensure(state == a.state || state.can_become(a.state), || {
                    format!("step {step}: {} went {state:?} -> {:?}", a.pair, a.state)
                })?;
            }
            match a.state {
                AssignmentState::Answered(s) | AssignmentState::Finalized(s) if s.is_negative() => {
                    let ok = a
                        .explanation
                        .as_deref()
                        .is_some_and(|x| !x.trim().is_empty());
                    ensure(ok, || {
                        format!("step {step}: negative {} without explanation", a.pair)
                    })?;
                }
                _ => {}
            }
            if let AssignmentState::Finalized(_) = a.state {
                let first = *finalized_seen.entry(a.pair).or_insert(a.state);
                ensure(first == a.state, || {
                    format!("step {step}: finalized {} changed", a.pair)
                })?;
            }
        }
        for p in finalized_seen.keys() {
            ensure(seen.contains(p), || {
                format!("step {step}: finalized {p} vanished")
            })?;
        }
        before = after;
    }
    Ok((before, finalized_seen.len()))
}

async fn http(
    app: &Router,
    method: &str,
    uri: &str,
    token: Option<&str>,
    body: Option<Value>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = req
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

async fn http_json(
    app: &Router,
    method: &str,
    uri: &str,
    token: Option<&str>,
    body: Option<Value>,
) -> Result<Value, String> {
    let (status, bytes) = http(app, method, uri, token, body).await;
    let v: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    ensure(status.is_success(), || {
        format!("{method} {uri}: {status} {v}")
    })?;
    Ok(v)
}

/// Eight clients drain goals 3 and 6 through the HTTP router concurrently.
async fn concurrent_clients() -> Result<usize, String> {
    let config = ServiceConfig {
        admins: vec!["root:rootpw".parse().unwrap()],
        seed: 11,
        ..ServiceConfig::default()
    };
    let app = App::open(config, Box::new(MemoryRepository::default())).map_err(|e| e.message)?;
    let app = router(Arc::new(Mutex::new(app)));
    let login = |u: &'static str, p: &'static str| {
        let app = app.clone();
        async move {
            let v = http_json(
                &app,
                "POST",
                "/api/login",
                None,
                Some(json!({"username": u, "password": p})),
            )
            .await?;
            Ok::<String, String>(v["token"].as_str().unwrap_or_default().to_string())
        }
    };
    let admin = login("root", "rootpw").await?;
    const USERS: [&str; 8] = ["c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7"];
    let mut tokens = Vec::new();
    for u in USERS {
        let body = json!({
            "username": u, "password": "pw", "name": u, "primary_affiliation": "lab",
            "education_level": "PhD", "experience": "5-10", "curator": "root", "consent": true
        });
        let v = http_json(&app, "POST", "/api/signup", None, Some(body)).await?;
        let id = v["id"].as_u64().unwrap_or_default();
        http_json(
            &app,
            "POST",
            &format!("/api/users/{id}/approve"),
            Some(&admin),
            None,
        )
        .await?;
        let tok = login(u, "pw").await?;
        http_json(
            &app,
            "POST",
            "/api/goals/select",
            Some(&tok),
            Some(json!({"goals": [3, 6]})),
        )
        .await?;
        tokens.push(tok);
    }
    let tasks: Vec<_> = tokens
        .into_iter()
        .map(|tok| {
            let app = app.clone();
            tokio::spawn(async move {
                let mut got = Vec::new();
                loop {
                    let v = http_json(
                        &app,
                        "POST",
                        "/api/batch",
                        Some(&tok),
                        Some(json!({"size": 20})),
                    )
                    .await?;
                    let batch = v["assignments"].as_array().cloned().unwrap_or_default();
                    if batch.is_empty() {
                        return Ok::<_, String>(got);
                    }
                    for a in batch {
                        let (x, y) = (a["pair"]["a"].clone(), a["pair"]["b"].clone());
                        let body = json!({"a": x, "b": y, "score": 2});
                        http_json(&app, "POST", "/api/answers", Some(&tok), Some(body)).await?;
                        got.push(format!("{x}-{y}"));
                    }
                    http_json(&app, "POST", "/api/answers/finalize", Some(&tok), None).await?;
                }
            })
        })
        .collect();
    let mut all = Vec::new();
    for task in tasks {
        all.extend(task.await.map_err(|e| e.to_string())??);
    }
    let unique: BTreeSet<_> = all.iter().collect();
    ensure(unique.len() == all.len(), || {
        format!("{} duplicate assignments", all.len() - unique.len())
    })?;
    // 13 + 8 targets in goals 3 and 6
    ensure(all.len() == 210, || {
        format!("{} pairs drained, expected 210", all.len())
    })?;
    Ok(all.len())
}

fn survey_state_machine(rt: &tokio::runtime::Runtime) -> Outcome {
    let start = Instant::now();
    let mut ops = 0;
    let mut finalized = 0;
    for seed in 0..20u64 {
        let (snap, f) = survey_run(seed, 600)?;
        let (again, _) = survey_run(seed, 600)?;
        ensure(snap == again, || format!("seed {seed}: replay differs"))?;
        ops += 600;
        finalized += f;
    }
    ensure(ops >= 10_000, || format!("only {ops} operations"))?;
    ensure(finalized > 0, || "no assignment ever finalized".into())?;
    let drained = rt.block_on(concurrent_clients())?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{ops} random ops, {finalized} finalized, 8 clients drained {drained} disjoint pairs"
    ))
}

// ---------------------------------------------------------------------------
// service versus CLI

fn cli(args: &[&str], stores: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sdg"))
        .args(args)
        .args(stores)
        .args(["--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("sdg {args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn service_cli_equivalence(rt: &tokio::runtime::Runtime) -> Outcome {
    let (expert, indicator) = (
        fixture("expert_answers.csv"),
        fixture("indicator_results.csv"),
    );
    let path = |p: &Path| p.to_str().unwrap().to_string();
    let (ep, ip) = (path(&expert), path(&indicator));
    let stores = ["--expert", ep.as_str(), "--indicator", ip.as_str()];

    let config = ServiceConfig {
        expert_seed: Some(expert.clone()),
        indicator_seed: Some(indicator.clone()),
        ..ServiceConfig::default()
    };
    let app = App::open(config, Box::new(MemoryRepository::default())).map_err(|e| e.message)?;
    let app = router(Arc::new(Mutex::new(app)));

    let mut cases: Vec<(String, Vec<String>)> = Vec::new();
    let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    for m in ["expert", "indicator"] {
        for sign in ["positive", "negative"] {
            cases.push((
                format!("/api/results/{sign}?method={m}"),
                owned(&["results", sign, "--method", m]),
            ));
        }
        cases.push((
            format!("/api/stats?method={m}"),
            owned(&["stats", "--method", m]),
        ));
        for (a, b) in [(3, 6), (3, 3), (17, 1)] {
            cases.push((
                format!("/api/graph?method={m}&a={a}&b={b}"),
                owned(&[
                    "export-graph",
                    "--method",
                    m,
                    "--a",
                    &a.to_string(),
                    "--b",
                    &b.to_string(),
                ]),
            ));
        }
    }
    cases.push((
        "/api/results/targets".into(),
        owned(&["results", "targets"]),
    ));
    cases.push((
        "/api/results/synthesis".into(),
        owned(&["results", "synthesis"]),
    ));

    for (uri, args) in &cases {
        let (status, body) = rt.block_on(http(&app, "GET", uri, None, None));
        ensure(status == StatusCode::OK, || format!("GET {uri}: {status}"))?;
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let exported = cli(&args, &stores)?;
        ensure(body == exported, || {
            format!(
                "GET {uri}: {} bytes vs CLI {} bytes",
                body.len(),
                exported.len()
            )
        })?;
    }
    Ok(format!("{} endpoints byte-identical", cases.len()))
}

fn main() {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let criteria: Vec<Criterion> = vec![
        ("pair arithmetic", Box::new(pair_arithmetic)),
        ("spearman oracle equivalence", Box::new(spearman_oracle)),
        (
            "classification boundaries",
            Box::new(classification_boundaries),
        ),
        ("percentage reproduction", Box::new(percentage_reproduction)),
        (
            "published list reproduction",
            Box::new(fixture_reproduction),
        ),
        ("synthesis reproduction", Box::new(synthesis_reproduction)),
        (
            "survey state machine",
            Box::new(|| survey_state_machine(&rt)),
        ),
        (
            "service/cli equivalence",
            Box::new(|| service_cli_equivalence(&rt)),
        ),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {name:<32} {ms:>6} ms  {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<32} {ms:>6} ms  {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
