//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any of them fails.

use std::net::SocketAddr;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use a4f_core::challenge::{execute_on_view, merge, split, Access, Verdict};
use a4f_core::finder::{brute_force, enumerate, enumerate_all, evaluate_formula, Env, ResourceBudget, SolveOutcome};
use a4f_core::lang::{parse, resolve, ResolvedModel};
use a4f_mine::synth::{challenge_model, synthetic_tree};
use a4f_mine::{compute_stats, parse_tree};
use a4f_repo::Repository;
use a4f_server::{serve, AppState, ServiceConfig};
use a4f_testkit::{canary_model, corpus, DUELS};
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn model(src: &str) -> ResolvedModel {
    resolve(&parse(src).unwrap()).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let budget = ResourceBudget::default();
    let models = corpus(220, 2024);
    let (mut sat, mut unsat) = (0, 0);
    for (i, src) in models.iter().enumerate() {
        let m = model(src);
        for cmd in &m.commands {
            let oracle = brute_force(&m, cmd, budget.max_scope).map_err(|e| format!("model {i}: {e}"))?;
            let got = enumerate(&m, cmd, 0, &budget).map_err(|e| format!("model {i}: {e}"))?;
            ensure!(
                matches!(got, SolveOutcome::Sat(_) | SolveOutcome::Unsat),
                "model {i}: solver gave {got:?}"
            );
            ensure!(got.is_sat() == oracle.sat, "model {i} `{}`: solver {} oracle {}", cmd.name, got.is_sat(), oracle.sat);
            if oracle.sat {
                sat += 1;
            } else {
                unsat += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("{} models, {sat} sat / {unsat} unsat commands agree, {elapsed:.1?}", models.len()))
}

fn enumeration_counts() -> Outcome {
    let cases = [
        ("sig A { r: set A }\nrun {} for exactly 1", 2),
        ("sig A { f: one A }\nrun {} for exactly 2", 4),
        ("sig A { r: set A }\nrun { some a: A | a in a.^r } for exactly 2", 13),
    ];
    let mut seen = Vec::new();
    for (src, expected) in cases {
        let m = model(src);
        let cmd = &m.commands[0];
        let oracle = brute_force(&m, cmd, 8).map_err(|e| e.to_string())?;
        let (got, end) = enumerate_all(&m, cmd, 1000, &ResourceBudget::default()).map_err(|e| e.to_string())?;
        ensure!(end == Some(SolveOutcome::Unsat), "{src:?}: enumeration ended with {end:?}");
        ensure!(oracle.count == expected, "{src:?}: oracle counts {}", oracle.count);
        ensure!(got.len() == expected, "{src:?}: enumerated {}", got.len());
        seen.push(got.len().to_string());
    }
    Ok(format!("counts {}", seen.join(" / ")))
}

fn duel_grading() -> Outcome {
    let budget = ResourceBudget::default();
    for duel in DUELS {
        let view = split(&parse(&duel.model()).unwrap());
        let good = duel.submission(&view.public_text, duel.equivalent);
        let r = execute_on_view(&view, Access::Public, &good, &duel.check_name(), 0, &budget).unwrap();
        ensure!(r.verdict == Verdict::Solved, "{}: equivalent candidate graded {:?}", duel.name, r.verdict);

        let bad = duel.submission(&view.public_text, duel.inequivalent);
        let r = execute_on_view(&view, Access::Public, &bad, &duel.check_name(), 0, &budget).unwrap();
        let Verdict::Counterexample(inst) = r.verdict else {
            return Err(format!("{}: inequivalent candidate graded {:?}", duel.name, r.verdict));
        };
        let both = format!(
            "{}\npred Spec {{ {} }}\npred Cand {{ {} }}\nrun Spec",
            duel.decls, duel.spec, duel.inequivalent
        );
        let m = model(&both);
        let spec = evaluate_formula(&m, m.pred("Spec").unwrap(), &inst, &Env::new());
        let cand = evaluate_formula(&m, m.pred("Cand").unwrap(), &inst, &Env::new());
        ensure!(spec != cand, "{}: counter-example does not separate the predicates", duel.name);
    }
    Ok(format!("{} triples", DUELS.len()))
}

/// Marks every other top-level paragraph that starts a line as secret.
fn with_secrets(src: &str, phase: usize) -> String {
    let parsed = parse(src).unwrap();
    let mut out = String::new();
    let mut last = 0;
    for (i, p) in parsed.paragraphs.iter().enumerate() {
        let start = p.span.start;
        out.push_str(&src[last..start]);
        if (i + phase) % 2 == 0 && (start == 0 || src[..start].ends_with('\n')) {
            out.push_str("//SECRET\n");
        }
        last = start;
    }
    out.push_str(&src[last..]);
    out
}

fn split_merge_round_trip() -> Outcome {
    let budget = ResourceBudget::default();
    let mut compared = 0;
    let mut with_secret = 0;
    for (i, src) in corpus(200, 99).iter().enumerate() {
        let text = with_secrets(src, i % 2);
        let original_src = parse(&text).map_err(|e| format!("model {i}: {e}"))?;
        let view = split(&original_src);
        if view.has_secrets() {
            with_secret += 1;
        }
        let original = resolve(&original_src).map_err(|e| format!("model {i}: {e}"))?;
        let merged = merge(&view.secret_paragraphs, &view.public_text).map_err(|e| format!("model {i}: {e}"))?;
        let merged = resolve(&merged.model).map_err(|e| format!("model {i}: {e}"))?;
        for cmd in &original.commands {
            let Some(other) = merged.command(&cmd.name) else {
                return Err(format!("model {i}: `{}` lost in merge", cmd.name));
            };
            for skip in 0..=2 {
                let a = enumerate(&original, cmd, skip, &budget).map_err(|e| e.to_string())?;
                let b = enumerate(&merged, other, skip, &budget).map_err(|e| e.to_string())?;
                ensure!(a == b, "model {i} `{}` skip {skip}: {a:?} vs {b:?}\n{text}", cmd.name);
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} outcomes equal, {with_secret} models with secrets"))
}

fn mining() -> Outcome {
    let started = Instant::now();
    let mut sessions = 0;
    for seed in 0..50 {
        let syn = synthetic_tree(seed);
        let tree = parse_tree(&syn.document).map_err(|e| format!("seed {seed}: {e}"))?;
        let stats = compute_stats(&tree, "synthetic", &syn.challenges).map_err(|e| e.to_string())?;
        let got = (stats.all_solved, stats.some_solved, stats.none_solved);
        let want = (syn.truth.all, syn.truth.some, syn.truth.none);
        ensure!(got == want, "seed {seed}: all/some/none {got:?}, expected {want:?}");
        sessions += stats.session_count;
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("50 trees, {sessions} sessions exact, {elapsed:.1?}"))
}

struct Client {
    agent: ureq::Agent,
    base: String,
}

impl Client {
    fn new(addr: SocketAddr) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Client {
            agent,
            base: format!("http://{addr}"),
        }
    }

    fn read(mut resp: ureq::http::Response<ureq::Body>) -> (u16, String) {
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().unwrap_or_default();
        (status, body)
    }

    fn get(&self, path: &str) -> (u16, String) {
        Self::read(self.agent.get(format!("{}{path}", self.base)).call().expect("transport"))
    }

    fn post(&self, path: &str, body: Value) -> (u16, String) {
        let resp = self
            .agent
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .send(body.to_string())
            .expect("transport");
        Self::read(resp)
    }
}

fn parse_json(body: &str) -> Value {
    serde_json::from_str(body).unwrap_or(Value::Null)
}

fn start_server(rt: &tokio::runtime::Runtime, config: ServiceConfig) -> SocketAddr {
    let state = AppState::new(Repository::in_memory(), config);
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move {
            serve(listener, state).await.unwrap();
        });
        addr
    })
}

fn secrecy_fuzz(client: &Client) -> Outcome {
    let mut responses = 0;
    for seed in 0..100 {
        let m = canary_model(seed);
        let (s, body) = client.post("/api/models", json!({ "code": m.text }));
        ensure!(s == 201, "seed {seed}: share returned {s}: {body}");
        let public = parse_json(&body)["public"].as_str().unwrap().to_string();

        let mut seen: Vec<(String, String)> = Vec::new();
        let (_, view) = client.get(&format!("/api/models/{public}"));
        seen.push(("view".into(), view.clone()));
        let public_code = parse_json(&view)["code"].as_str().unwrap_or_default().to_string();
        let empty = format!("pred {} {{\n}}", m.candidate);
        let filled = public_code.replacen(&empty, &format!("pred {} {{\n  some univ\n}}", m.candidate), 1);
        let attempts = [
            (public_code.clone(), m.checks[0].clone(), 0),
            (filled.clone(), m.checks[0].clone(), 1),
            (public_code.clone(), m.checks[m.checks.len() - 1].clone(), 2),
            (format!("{public_code}\nfact {{ all x: univ | x in univ }}"), m.checks[0].clone(), 0),
            (format!("{public_code}\npred broken {{ no_such_relation }}"), m.checks[0].clone(), 0),
            (format!("{public_code}\npred {{"), m.checks[0].clone(), 0),
            (format!("{public_code}\npred {} {{}}", m.checks[0]), m.checks[0].clone(), 0),
            (public_code.clone(), "NoSuchCommand".to_string(), 0),
        ];
        let mut parent: Option<String> = None;
        for (code, command, skip) in attempts {
            let (_, body) = client.post(
                &format!("/api/models/{public}/execute"),
                json!({ "code": code, "command": command, "skip": skip, "parent": parent }),
            );
            let v = parse_json(&body);
            if let Some(id) = v["modelId"].as_str() {
                if v["instance"].is_object() {
                    let (_, shared) = client.post(
                        "/api/instances",
                        json!({ "modelId": id, "command": command, "skip": skip, "instance": v["instance"] }),
                    );
                    if let Some(tok) = parse_json(&shared)["token"].as_str() {
                        seen.push(("instance".into(), client.get(&format!("/api/instances/{tok}")).1));
                    }
                    seen.push(("share".into(), shared));
                }
                parent = Some(id.to_string());
            }
            seen.push((format!("execute {command}"), body));
        }
        let (s, body) = client.get(&format!("/api/models/{public}/tree"));
        ensure!(s == 403, "seed {seed}: public tree download returned {s}");
        seen.push(("tree".into(), body));

        for (what, body) in &seen {
            for c in &m.canaries {
                ensure!(!body.contains(c.as_str()), "seed {seed}: canary {c} leaked by {what}: {body}");
            }
        }
        responses += seen.len();
    }
    Ok(format!("100 models, {responses} public responses, 0 leaks"))
}

fn end_to_end(client: &Client) -> Outcome {
    let started = Instant::now();
    let code = challenge_model(4);
    let (s, body) = client.post("/api/models", json!({ "code": code }));
    ensure!(s == 201, "share returned {s}: {body}");
    let links = parse_json(&body);
    let public = links["public"].as_str().unwrap().to_string();
    let private = links["private"].as_str().ok_or("no private link")?.to_string();

    let (s, body) = client.get(&format!("/api/models/{public}"));
    ensure!(s == 200, "open returned {s}");
    let view = parse_json(&body);
    let public_code = view["code"].as_str().unwrap().to_string();
    ensure!(!public_code.contains("//SECRET"), "public view shows secrets");
    let challenges: Vec<&str> = view["commandIndex"]
        .as_array()
        .map(|a| a.iter().filter(|c| c["secret"] == true).filter_map(|c| c["name"].as_str()).collect())
        .unwrap_or_default();
    ensure!(challenges.len() == 4, "public view lists {} challenges", challenges.len());

    let execute = |code: &str, skip: u64, parent: Option<&str>| -> Result<Value, String> {
        let (s, body) = client.post(
            &format!("/api/models/{public}/execute"),
            json!({ "code": code, "command": "Inv1OK", "skip": skip, "parent": parent }),
        );
        ensure!(s == 200, "execute returned {s}: {body}");
        Ok(parse_json(&body))
    };
    // Wrong: the empty predicate accepts graphs with self loops.
    let mut counterexamples = Vec::new();
    let mut parent: Option<String> = None;
    for skip in 0..3 {
        let v = execute(&public_code, skip, parent.as_deref())?;
        ensure!(v["result"] == "sat", "wrong answer at skip {skip} gave {}", v["result"]);
        counterexamples.push(v["instance"].clone());
        parent = Some(v["modelId"].as_str().unwrap().to_string());
    }
    ensure!(
        counterexamples[0] != counterexamples[1] && counterexamples[1] != counterexamples[2],
        "iteration repeated a counter-example"
    );
    let (s, body) = client.post(
        "/api/instances",
        json!({
            "modelId": parent,
            "command": "Inv1OK",
            "skip": 2,
            "instance": counterexamples[2],
            "layout": {"Node$0": {"x": 10.0, "y": 20.0}},
        }),
    );
    ensure!(s == 201, "instance share returned {s}: {body}");
    let token = parse_json(&body)["token"].as_str().unwrap().to_string();
    let (s, body) = client.get(&format!("/api/instances/{token}"));
    ensure!(s == 200 && parse_json(&body)["instance"] == counterexamples[2], "instance did not round trip");

    let right = public_code.replacen("pred Inv1 {\n}", "pred Inv1 {\n  no n: Node | n in n.adj\n}", 1);
    let v = execute(&right, 0, parent.as_deref())?;
    ensure!(v["result"] == "unsat", "right answer gave {}", v["result"]);

    let (s, body) = client.get(&format!("/api/models/{private}/tree"));
    ensure!(s == 200, "tree download returned {s}");
    let tree = parse_tree(&body).map_err(|e| format!("tree invalid: {e}"))?;
    ensure!(tree.len() == 5, "tree has {} nodes", tree.len());
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(15), "took {elapsed:?}");
    Ok(format!("share, 3 counter-examples, instance, solve, 5-node tree, {elapsed:.1?}"))
}

const PATHOLOGICAL: &str = "sig A { r: B -> C }\nsig B { s: C -> A }\nsig C { t: A -> B }\npred P {\n  all a1, a2: A | all b1, b2: B | all c1, c2: C |\n    (c1 in b1.(a1.r) and c2 in b2.(a2.r)) implies (a1 in c1.(b1.s) iff a2 in c2.(b2.s))\n  some t\n}\nrun P for 8\n";

fn budget(client: &Client, timeout: Duration) -> Outcome {
    let (s, body) = client.post("/api/models", json!({ "code": PATHOLOGICAL }));
    ensure!(s == 201, "share returned {s}: {body}");
    let public = parse_json(&body)["public"].as_str().unwrap().to_string();
    let started = Instant::now();
    let (s, body) = client.post(
        &format!("/api/models/{public}/execute"),
        json!({ "code": PATHOLOGICAL, "command": "P" }),
    );
    let elapsed = started.elapsed();
    ensure!(s == 200, "execute returned {s}: {body}");
    let result = parse_json(&body)["result"].clone();
    ensure!(result == "limit", "result was {result}");
    ensure!(elapsed <= timeout + Duration::from_secs(1), "answered after {elapsed:?}");
    Ok(format!("limit after {elapsed:.2?} with a {timeout:?} timeout"))
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let timeout = Duration::from_secs(2);
    let addr = start_server(
        &rt,
        ServiceConfig {
            solve_timeout_ms: timeout.as_millis() as u64,
            executes_per_minute: 100_000,
            ..ServiceConfig::default()
        },
    );
    let client = Client::new(addr);

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("solver-oracle equivalence", Box::new(oracle_equivalence)),
        ("enumeration counts", Box::new(enumeration_counts)),
        ("duel grading soundness", Box::new(duel_grading)),
        ("secrecy fuzz", Box::new(|| secrecy_fuzz(&client))),
        ("split/merge round trip", Box::new(split_merge_round_trip)),
        ("derivation-tree mining", Box::new(mining)),
        ("end-to-end API", Box::new(|| end_to_end(&client))),
        ("budget", Box::new(|| budget(&client, timeout))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
