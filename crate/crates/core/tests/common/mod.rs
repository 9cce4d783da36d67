//! Random input generators and a brute-force oracle that works on raw JSON,
//! without going through the library's types.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use genai_linddun::fixtures;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const CODES: [&str; 7] = ["L", "I", "Nr", "D", "DD", "U", "Nc"];
pub const DOMAINS: [&str; 6] = ["General", "AI", "GenAI", "ML", "Chatbot", "Agentic"];
const KINDS: [&str; 3] = ["external_entity", "process", "data_store"];
const ROLES: [&str; 12] = [
    "user",
    "genai_model",
    "pretraining_party",
    "finetuning_party",
    "agent",
    "external_tool",
    "external_agent",
    "rag_store",
    "log_store",
    "system_prompt_store",
    "application",
    "client",
];
const CATEGORIES: [&str; 8] = [
    "user_inputs",
    "system_prompts",
    "derived_attributes",
    "pt_data",
    "ft_data",
    "operation_data",
    "user_data",
    "intermediate_computations",
];

/// Random KB with at most `max_chars` characteristics over the bundled
/// hierarchy. Children are only ever attached to existing ids, so every
/// generated KB is valid.
pub fn random_kb_json(rng: &mut ChaCha8Rng, max_chars: usize) -> String {
    let bundled: Value = serde_json::from_str(fixtures::KB_JSON).unwrap();
    let n = rng.gen_range(0..=max_chars);
    let mut ids: Vec<String> = Vec::new();
    let mut next_child: BTreeMap<String, u32> = BTreeMap::new();
    let mut chars = Vec::new();
    for _ in 0..n {
        let parent = if ids.is_empty() || rng.gen_bool(0.3) {
            CODES.choose(rng).unwrap().to_string()
        } else {
            ids.choose(rng).unwrap().clone()
        };
        let slot = next_child.entry(parent.clone()).or_insert(0);
        *slot += 1;
        let id = format!("{parent}.{slot}");
        let mut c = json!({"id": id, "title": format!("t {id}"), "description": "d"});
        if rng.gen_bool(0.6) {
            c["domain"] = json!(DOMAINS.choose(rng).unwrap());
        }
        chars.push(c);
        ids.push(id);
    }
    chars.shuffle(rng);
    let mut examples = Vec::new();
    if !ids.is_empty() {
        for i in 0..rng.gen_range(0..5) {
            examples.push(json!({
                "id": format!("x{i}"),
                "characteristic_id": ids.choose(rng).unwrap(),
                "text": "e",
                "domain": DOMAINS.choose(rng).unwrap(),
            }));
        }
    }
    json!({"types": bundled["types"], "characteristics": chars, "examples": examples}).to_string()
}

/// Random valid model with 1..=`max_elements` elements and up to
/// `max_flows` flows.
pub fn random_model_json(rng: &mut ChaCha8Rng, max_elements: usize, max_flows: usize) -> String {
    let boundaries = ["b0", "b1"];
    let n = rng.gen_range(1..=max_elements);
    let mut elements = Vec::new();
    for i in 0..n {
        let kind = *KINDS.choose(rng).unwrap();
        let mut roles: BTreeSet<&str> = BTreeSet::new();
        for _ in 0..rng.gen_range(0..3) {
            roles.insert(ROLES.choose(rng).unwrap());
        }
        if kind == "data_store" {
            roles.remove("agent");
        }
        let mut e =
            json!({"id": format!("e{i}"), "kind": kind, "name": format!("E{i}"), "roles": roles});
        if rng.gen_bool(0.5) {
            e["boundary"] = json!(boundaries.choose(rng).unwrap());
        }
        elements.push(e);
    }
    let mut flows = Vec::new();
    if n > 1 {
        for i in 0..rng.gen_range(0..=max_flows) {
            let s = rng.gen_range(0..n);
            let t = (s + rng.gen_range(1..n)) % n;
            let cats: BTreeSet<&str> = (0..rng.gen_range(0..3))
                .map(|_| *CATEGORIES.choose(rng).unwrap())
                .collect();
            flows.push(json!({
                "id": format!("f{i}"),
                "source": format!("e{s}"),
                "target": format!("e{t}"),
                "name": format!("F{i}"),
                "categories": cats,
            }));
        }
    }
    json!({
        "name": "rand",
        "boundaries": boundaries.iter().map(|b| json!({"id": b, "name": b})).collect::<Vec<_>>(),
        "elements": elements,
        "flows": flows,
    })
    .to_string()
}

/// Ancestor-or-self set of `query` computed from the raw hierarchy edges.
pub fn oracle_ancestry(query: &str) -> BTreeSet<String> {
    let h: Value = serde_json::from_str(fixtures::HIERARCHY_JSON).unwrap();
    let parent: BTreeMap<String, String> = h["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e[1].as_str().unwrap().to_string(),
                e[0].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut cur = Some(query.to_string());
    while let Some(d) = cur {
        cur = parent.get(&d).cloned();
        out.insert(d);
    }
    out
}

/// Characteristic ids surviving a filter to `query`: matching tags, plus
/// every dotted prefix of a matching id.
pub fn oracle_filter_ids(kb_json: &str, query: &str) -> BTreeSet<String> {
    let kb: Value = serde_json::from_str(kb_json).unwrap();
    let relevant = oracle_ancestry(query);
    let mut keep = BTreeSet::new();
    for c in kb["characteristics"].as_array().unwrap() {
        let domain = c["domain"].as_str().unwrap_or("General");
        if relevant.contains(domain) {
            let id = c["id"].as_str().unwrap();
            let parts: Vec<&str> = id.split('.').collect();
            for k in 2..=parts.len() {
                keep.insert(parts[..k].join("."));
            }
        }
    }
    keep
}

pub fn oracle_applies(code: &str, kind: &str) -> bool {
    match code {
        "U" => kind == "external_entity",
        "Nc" => kind == "process" || kind == "data_store",
        _ => kind != "external_entity",
    }
}

/// Threat count by enumerating every (locus, type, characteristic) triple
/// and keeping applicable leaves.
pub fn oracle_count(model_json: &str, kb_json: &str, query: &str) -> usize {
    let model: Value = serde_json::from_str(model_json).unwrap();
    let kept = oracle_filter_ids(kb_json, query);
    let is_leaf = |id: &str| {
        let prefix = format!("{id}.");
        !kept.iter().any(|other| other.starts_with(&prefix))
    };
    let mut loci: Vec<&str> = model["elements"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    loci.extend(model["flows"].as_array().unwrap().iter().map(|_| "flow"));

    let mut count = 0;
    for kind in &loci {
        for code in CODES {
            for id in &kept {
                if id.split('.').next() == Some(code) && oracle_applies(code, kind) && is_leaf(id) {
                    count += 1;
                }
            }
        }
    }
    count
}
