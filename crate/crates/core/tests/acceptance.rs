//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the summary is always printed.
//!
//! Set UPDATE_GOLDEN=1 to rewrite the golden report digests.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use genai_linddun::cam::{self, Actor, CamId};
use genai_linddun::domain::{DomainHierarchy, DomainId};
use genai_linddun::elicit::{
    self, ApplicabilityMapping, InstanceLocus, Provenance, ThreatInstance,
};
use genai_linddun::fixtures;
use genai_linddun::kb::{KnowledgeBase, ThreatCode};
use genai_linddun::model::SystemModel;
use genai_linddun::report::{
    content_digest, render_tree, ReportFormat, ReportMeta, ThreatReport, TreeFormat,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn d(name: &str) -> DomainId {
    DomainId::new(name).unwrap()
}

fn hierarchy_fidelity() -> Outcome {
    let load = || {
        let start = Instant::now();
        let h = DomainHierarchy::from_json(fixtures::HIERARCHY_JSON.as_bytes(), true)
            .map_err(|e| e.to_string());
        (h, start.elapsed())
    };
    // Best of three so a cold first call does not decide the timing.
    let (h, elapsed) = (0..3).map(|_| load()).min_by_key(|(_, t)| *t).unwrap();
    let h = h?;
    let edges: BTreeSet<(String, String)> = h
        .edges()
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let expected: BTreeSet<(String, String)> = [
        ("General", "AI"),
        ("AI", "GenAI"),
        ("AI", "ML"),
        ("GenAI", "Chatbot"),
        ("GenAI", "Agentic"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    check!(h.len() == 6, "{} nodes", h.len());
    check!(h.root().as_str() == "General", "root {}", h.root());
    check!(edges == expected, "edges {edges:?}");
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("6 nodes, 5 edges in {elapsed:?}"))
}

fn new_characteristics() -> Outcome {
    let kb = fixtures::knowledge_base();
    let h = kb.hierarchy();
    let ai = d("AI");
    let tagged: BTreeSet<String> = kb
        .characteristics()
        .filter(|c| h.is_ancestor_or_self(&ai, &c.domain).unwrap())
        .map(|c| c.id.to_string())
        .collect();
    let expected: BTreeSet<String> = [
        "DD.1.3", "DD.3.5", "U.2.2.1", "U.2.2.2", "U.2.3.1", "U.2.3.2", "U.3", "Nc.1.3", "Nc.4.2",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    check!(tagged == expected, "AI-or-below characteristics {tagged:?}");
    for (id, title) in [
        ("DD.1.3", "Data Type Structure"),
        ("DD.3.5", "Fabrication"),
        ("U.3", "Interference with personal decision making"),
    ] {
        let c = kb.lookup(id).unwrap().ok_or(format!("{id} missing"))?;
        check!(c.title == title, "{id} title {:?}", c.title);
    }
    Ok("9 AI-or-below characteristics, titles match".into())
}

fn cam_fidelity() -> Outcome {
    let expected = [
        (
            CamId::CAM1,
            Actor::System,
            "System",
            "Access to system input",
        ),
        (CamId::CAM2, Actor::User, "User", "Access to system output"),
        (
            CamId::CAM3,
            Actor::FtParty,
            "FT Party",
            "Access to system output",
        ),
        (CamId::CAM4, Actor::System, "System", "Agent permissions"),
        (CamId::CAM5, Actor::Agent, "Agent", "System permissions"),
        (
            CamId::CAM6,
            Actor::Client,
            "Client",
            "Access to intermediate computations",
        ),
    ];
    let profiles = cam::cam_profiles();
    for ((id, actor, label, condition), p) in expected.iter().zip(&profiles) {
        check!(p.id == *id, "profile order at {id}");
        check!(
            p.actor == *actor && p.actor.label() == *label,
            "{id} actor {:?}",
            p.actor
        );
        check!(
            p.condition == *condition,
            "{id} condition {:?}",
            p.condition
        );
    }
    let matrix = cam::cam_matrix();
    check!(matrix.len() == 42, "{} cells", matrix.len());
    check!(
        matrix.iter().all(|c| !c.description.trim().is_empty()),
        "empty cell"
    );
    let spot = [
        (CamId::CAM1, ThreatCode::L, "Inputs contain linkable attributes that allow associating information to the user or other data subjects."),
        (CamId::CAM2, ThreatCode::L, "System outputs to a specific user contain linkable information pertaining to other data subjects."),
        (CamId::CAM3, ThreatCode::L, "Outputs to the fine-tuning party include linkable information of the data subjects in the PT dataset."),
        (CamId::CAM5, ThreatCode::L, "Uploaded files reveal stylistic or contextual signals that allow linking multiple user sessions or sensitive information."),
        (CamId::CAM6, ThreatCode::L, "Intermediate computations reveal patterns that link additional data to individuals or groups."),
        (CamId::CAM1, ThreatCode::I, "The system receives explicit PII or QIDs from inputs."),
        (CamId::CAM5, ThreatCode::I, "Agent leaks PII or QIDs from accessed information."),
        (CamId::CAM6, ThreatCode::I, "Intermediate computations manifest identifying indicators."),
        (CamId::CAM1, ThreatCode::Nr, "Stored logs prevent users from denying disclosure of sensitive data."),
        (CamId::CAM5, ThreatCode::Nr, "Exposed file contents reveal actions or claims that agent cannot deny."),
        (CamId::CAM3, ThreatCode::D, "Service providers detect whether a record or a data subject's information was used in training."),
        (CamId::CAM6, ThreatCode::D, "Observing intermediate computations allows inference of participation or record membership."),
        (CamId::CAM1, ThreatCode::DD, "User inputs contain sensitive information that providers can store or repurpose."),
        (CamId::CAM4, ThreatCode::DD, "The agent may extract targeted application data through pre-planted triggers."),
    ];
    for (cam_id, code, text) in spot {
        let cell = cam::cam_cell(cam_id, code);
        check!(
            cell.description == text,
            "{cam_id}/{code}: {:?}",
            cell.description
        );
    }
    Ok(format!("6 profiles, 42 cells, {} spot checks", spot.len()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11dd);
    let mapping = ApplicabilityMapping::default();
    let cases = 1000;
    let mut nonzero = 0;
    for case in 0..cases {
        let kb_json = common::random_kb_json(&mut rng, 20);
        let model_json = common::random_model_json(&mut rng, 6, 8);
        let query = common::DOMAINS[case % common::DOMAINS.len()];
        let kb = KnowledgeBase::from_json(kb_json.as_bytes(), fixtures::hierarchy(), true)
            .map_err(|e| format!("case {case}: {e}"))?;
        let model = SystemModel::from_json(model_json.as_bytes(), true)
            .map_err(|e| format!("case {case}: {e}"))?;
        let got = elicit::elicit(&model, &kb, &mapping, &d(query))
            .map_err(|e| e.to_string())?
            .len();
        let want = common::oracle_count(&model_json, &kb_json, query);
        check!(
            got == want,
            "case {case} ({query}): elicit {got}, oracle {want}\nkb {kb_json}\nmodel {model_json}"
        );
        nonzero += usize::from(want > 0);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "{cases} pairs, {nonzero} non-empty, 0 mismatches in {elapsed:?}"
    ))
}

fn filter_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xf11e);
    let h = fixtures::hierarchy();
    let kbs = 1000;
    for case in 0..kbs {
        let kb_json = common::random_kb_json(&mut rng, 20);
        let kb = KnowledgeBase::from_json(kb_json.as_bytes(), h.clone(), true)
            .map_err(|e| e.to_string())?;
        let mut ids = std::collections::BTreeMap::new();
        for name in common::DOMAINS {
            let once = kb.filter(&d(name)).unwrap();
            let twice = once.filter(&d(name)).unwrap();
            check!(
                once == twice,
                "case {case}: filter({name}) not idempotent\n{kb_json}"
            );
            let set: BTreeSet<String> = once.characteristics().map(|c| c.id.to_string()).collect();
            check!(
                set == common::oracle_filter_ids(&kb_json, name),
                "case {case}: filter({name}) differs from oracle\n{kb_json}"
            );
            ids.insert(name, set);
        }
        for (parent, child) in h.edges() {
            let (p, c) = (&ids[parent.as_str()], &ids[child.as_str()]);
            check!(
                p.is_subset(c),
                "case {case}: filter({parent}) not within filter({child})\n{kb_json}"
            );
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("{kbs} KBs x 6 domains in {elapsed:?}"))
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.sha256"))
}

fn determinism() -> Outcome {
    let fixtures_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut notes = Vec::new();
    for (name, domain) in [
        ("chatbot", "Chatbot"),
        ("agentic", "Agentic"),
        ("minimal", "GenAI"),
    ] {
        let model_path = fixtures_dir.join(format!("{name}.json"));
        let mut outputs = Vec::new();
        for _ in 0..3 {
            let start = Instant::now();
            let out = Command::new(env!("CARGO_BIN_EXE_genai-linddun"))
                .arg("analyze")
                .arg("--kb")
                .arg(fixtures_dir.join("kb.json"))
                .arg("--model")
                .arg(&model_path)
                .args(["--domain", domain, "--with-cams", "--format", "json"])
                .output()
                .map_err(|e| e.to_string())?;
            let elapsed = start.elapsed();
            check!(
                out.status.success(),
                "{name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            within(elapsed, Duration::from_secs(1)).map_err(|e| format!("{name}: {e}"))?;
            outputs.push(out.stdout);
        }
        check!(
            outputs.iter().all(|o| *o == outputs[0]),
            "{name}: runs differ"
        );

        // Tree instance count must agree with the oracle before a digest is trusted.
        let report = ThreatReport::from_json(&outputs[0]).map_err(|e| e.to_string())?;
        let tree = report
            .instances
            .iter()
            .filter(|i| i.provenance == Provenance::Tree)
            .count();
        let model_json = std::fs::read_to_string(&model_path).unwrap();
        let want = common::oracle_count(&model_json, fixtures::KB_JSON, domain);
        check!(tree == want, "{name}: {tree} tree threats, oracle {want}");

        let digest = content_digest(&outputs[0]);
        let path = golden_path(name);
        if update {
            std::fs::write(&path, format!("{digest}\n")).map_err(|e| e.to_string())?;
        }
        let golden =
            std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        check!(
            golden.trim() == digest,
            "{name}: digest {digest}, golden {}",
            golden.trim()
        );
        notes.push(format!("{name}={}", report.instances.len()));
    }
    Ok(format!(
        "3 fixtures stable and golden ({})",
        notes.join(", ")
    ))
}

fn stats_semantics() -> Outcome {
    let mut instances = Vec::new();
    for n in 0..98 {
        let domain = if n % 11 == 0 {
            ["AI", "GenAI", "ML", "Chatbot", "Agentic"][n % 5]
        } else {
            "General"
        };
        instances.push(ThreatInstance {
            id: format!("synthetic/e{n}/L.1"),
            locus: InstanceLocus::System,
            type_code: ThreatCode::L,
            characteristic_id: "L.1".into(),
            characteristic_domain: d(domain),
            examples: Vec::new(),
            provenance: Provenance::Tree,
            cam_id: None,
            note: String::new(),
        });
    }
    let ai = instances
        .iter()
        .filter(|i| i.characteristic_domain.as_str() != "General")
        .count();
    check!(ai == 9, "{ai} AI-tagged instances");
    let meta = ReportMeta {
        model_name: "synthetic".into(),
        query_domain: d("GenAI"),
        kb_digest: content_digest(b""),
        model_digest: content_digest(b""),
    };
    let report = ThreatReport::build(instances, meta, &fixtures::hierarchy());
    let f = report.stats.genai_fraction;
    let close = (f - 0.0918).abs() <= 0.0001;
    check!(close, "genai_fraction {f}");
    Ok(format!("98 instances, 9 AI-tagged, fraction {f}"))
}

fn classification() -> Outcome {
    let cams = |ids: &[CamId]| ids.iter().copied().collect::<BTreeSet<_>>();
    let minimal = fixtures::minimal();
    let p = cam::classify_paradigm(&minimal).map_err(|e| e.to_string())?;
    check!(p.get() == 1, "minimal paradigm {p}");
    let got = cam::detect_cams(&minimal).map_err(|e| e.to_string())?;
    check!(
        got == cams(&[CamId::CAM1, CamId::CAM2]),
        "minimal CAMs {got:?}"
    );

    let agentic = fixtures::agentic();
    let p = cam::classify_paradigm(&agentic).map_err(|e| e.to_string())?;
    check!(p.get() == 4, "agentic paradigm {p}");
    let got = cam::detect_cams(&agentic).map_err(|e| e.to_string())?;
    check!(got.contains(&CamId::CAM5), "agentic CAMs {got:?}");

    let chatbot = fixtures::chatbot();
    let p = cam::classify_paradigm(&chatbot).map_err(|e| e.to_string())?;
    check!(p.get() == 4, "chatbot paradigm {p}");
    Ok("minimal=1 {CAM1,CAM2}, agentic=4 with CAM5, chatbot=4".into())
}

/// Minimal DOT acceptor: `digraph ID { stmt* }` where each statement is a
/// node, edge or attribute assignment terminated by `;`.
fn dot_smoke(dot: &str) -> Result<usize, String> {
    #[derive(Debug, PartialEq)]
    enum Tok {
        Id(String),
        Sym(char),
        Arrow,
    }
    let mut toks = Vec::new();
    let mut chars = dot.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('\\') => s.push(chars.next().ok_or("dangling escape")?),
                    Some('"') => break,
                    Some(ch) => s.push(ch),
                    None => return Err("unterminated string".into()),
                }
            }
            toks.push(Tok::Id(s));
        } else if c == '-' {
            chars.next();
            check!(chars.next() == Some('>'), "stray '-'");
            toks.push(Tok::Arrow);
        } else if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
            let mut s = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_ascii_alphanumeric() || ch == '_' || ch == '.' {
                    s.push(ch);
                    chars.next();
                } else {
                    break;
                }
            }
            toks.push(Tok::Id(s));
        } else if "{}[]=;,".contains(c) {
            chars.next();
            toks.push(Tok::Sym(c));
        } else {
            return Err(format!("unexpected {c:?}"));
        }
    }
    let mut it = toks.into_iter().peekable();
    check!(
        it.next() == Some(Tok::Id("digraph".into())),
        "missing digraph"
    );
    check!(matches!(it.next(), Some(Tok::Id(_))), "missing graph id");
    check!(it.next() == Some(Tok::Sym('{')), "missing '{{'");
    let mut stmts = 0;
    loop {
        match it.next() {
            Some(Tok::Sym('}')) => break,
            Some(Tok::Id(_)) => {}
            other => return Err(format!("statement starts with {other:?}")),
        }
        if it.peek() == Some(&Tok::Arrow) {
            it.next();
            check!(matches!(it.next(), Some(Tok::Id(_))), "edge without target");
        }
        if it.peek() == Some(&Tok::Sym('=')) {
            it.next();
            check!(
                matches!(it.next(), Some(Tok::Id(_))),
                "assignment without value"
            );
        }
        if it.peek() == Some(&Tok::Sym('[')) {
            it.next();
            loop {
                match it.next() {
                    Some(Tok::Sym(']')) => break,
                    Some(Tok::Id(_)) => {}
                    other => return Err(format!("attribute list: {other:?}")),
                }
                check!(it.next() == Some(Tok::Sym('=')), "attribute without '='");
                check!(
                    matches!(it.next(), Some(Tok::Id(_))),
                    "attribute without value"
                );
                if it.peek() == Some(&Tok::Sym(',')) {
                    it.next();
                }
            }
        }
        check!(it.next() == Some(Tok::Sym(';')), "statement without ';'");
        stmts += 1;
    }
    check!(it.next().is_none(), "trailing tokens");
    Ok(stmts)
}

fn round_trips() -> Outcome {
    let kb = fixtures::knowledge_base();
    let text = kb.to_json();
    let again = KnowledgeBase::from_json(text.as_bytes(), fixtures::hierarchy(), true)
        .map_err(|e| e.to_string())?;
    check!(again == kb && again.to_json() == text, "KB round trip");

    for model in [
        fixtures::chatbot(),
        fixtures::agentic(),
        fixtures::minimal(),
    ] {
        let text = model.to_json();
        let again = SystemModel::from_json(text.as_bytes(), true).map_err(|e| e.to_string())?;
        check!(
            again == model && again.to_json() == text,
            "{} round trip",
            model.name
        );
    }

    let report = genai_linddun::analysis::analyze(
        &fixtures::chatbot(),
        &kb,
        &d("Chatbot"),
        &genai_linddun::analysis::AnalysisOptions {
            cams: Some(Default::default()),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let json = report.serialize(ReportFormat::Json);
    let back = ThreatReport::from_json(json.as_bytes()).map_err(|e| e.to_string())?;
    check!(
        back == report && back.serialize(ReportFormat::Json) == json,
        "report fixpoint"
    );

    let mut statements = 0;
    for name in common::DOMAINS {
        let filtered = kb.filter(&d(name)).unwrap();
        for code in ThreatCode::ALL {
            let dot = render_tree(&filtered, code, TreeFormat::Dot);
            statements += dot_smoke(&dot).map_err(|e| format!("{code}@{name}: {e}\n{dot}"))?;
        }
    }
    Ok(format!(
        "KB, 3 models, report fixpoints; 42 DOT graphs, {statements} statements"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("domain hierarchy fidelity", hierarchy_fidelity),
        ("new-characteristic fidelity", new_characteristics),
        ("CAM fidelity", cam_fidelity),
        ("oracle equivalence", oracle_equivalence),
        ("filter laws", filter_laws),
        ("determinism", determinism),
        ("stats semantics", stats_semantics),
        ("paradigm/CAM classification", classification),
        ("round-trips", round_trips),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
