//! Threat reports and threat-tree rendering.

mod tree;

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use tree::{render_tree, TreeFormat};

use crate::domain::{DomainHierarchy, DomainId};
use crate::elicit::{Provenance, ThreatInstance};
use crate::json;
use crate::kb::ThreatCode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("unsupported format {0:?}")]
    UnsupportedFormat(String),
    #[error("malformed report: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// `sha256:<hex>` over the given bytes.
pub fn content_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenances {
    pub kb_digest: String,
    pub model_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsBlock {
    pub total: usize,
    pub per_type: BTreeMap<ThreatCode, usize>,
    pub per_provenance: BTreeMap<String, usize>,
    /// Share of instances whose characteristic domain is AI or below,
    /// rounded to four decimals. Zero for an empty report.
    pub genai_fraction: f64,
}

impl StatsBlock {
    pub fn compute(instances: &[ThreatInstance], hierarchy: &DomainHierarchy) -> Self {
        let mut per_type: BTreeMap<ThreatCode, usize> =
            ThreatCode::ALL.into_iter().map(|c| (c, 0)).collect();
        let mut per_provenance: BTreeMap<String, usize> =
            [("cam".to_string(), 0), ("tree".to_string(), 0)].into();
        let ai = hierarchy.get("AI").ok();
        let mut genai = 0usize;
        for inst in instances {
            *per_type.entry(inst.type_code).or_default() += 1;
            let key = match inst.provenance {
                Provenance::Tree => "tree",
                Provenance::Cam => "cam",
            };
            *per_provenance.entry(key.to_string()).or_default() += 1;
            if let Some(ai) = &ai {
                if hierarchy
                    .is_ancestor_or_self(ai, &inst.characteristic_domain)
                    .unwrap_or(false)
                {
                    genai += 1;
                }
            }
        }
        let total = instances.len();
        let genai_fraction = if total == 0 {
            0.0
        } else {
            (genai as f64 / total as f64 * 10_000.0).round() / 10_000.0
        };
        StatsBlock {
            total,
            per_type,
            per_provenance,
            genai_fraction,
        }
    }
}

/// Inputs describing one analysis run.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub model_name: String,
    pub query_domain: DomainId,
    pub kb_digest: String,
    pub model_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatReport {
    pub model_name: String,
    pub query_domain: DomainId,
    pub generated_from: Provenances,
    pub instances: Vec<ThreatInstance>,
    pub stats: StatsBlock,
}

impl ThreatReport {
    pub fn build(
        instances: Vec<ThreatInstance>,
        meta: ReportMeta,
        hierarchy: &DomainHierarchy,
    ) -> Self {
        let stats = StatsBlock::compute(&instances, hierarchy);
        ThreatReport {
            model_name: meta.model_name,
            query_domain: meta.query_domain,
            generated_from: Provenances {
                kb_digest: meta.kb_digest,
                model_digest: meta.model_digest,
            },
            instances,
            stats,
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ReportError> {
        serde_json::from_slice(bytes).map_err(|e| ReportError::Parse(e.to_string()))
    }

    pub fn serialize(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => json::to_canonical(self),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }

    fn to_markdown(&self) -> String {
        let mut out = String::new();
        let s = &self.stats;
        writeln!(out, "# Privacy threat report: {}\n", self.model_name).unwrap();
        writeln!(out, "- Domain: {}", self.query_domain).unwrap();
        writeln!(out, "- Knowledge base: `{}`", self.generated_from.kb_digest).unwrap();
        writeln!(
            out,
            "- System model: `{}`",
            self.generated_from.model_digest
        )
        .unwrap();
        writeln!(out, "\n## Summary\n").unwrap();
        writeln!(out, "| Metric | Value |\n| --- | --- |").unwrap();
        writeln!(out, "| Total threats | {} |", s.total).unwrap();
        for (code, n) in &s.per_type {
            writeln!(out, "| {code} | {n} |").unwrap();
        }
        for (p, n) in &s.per_provenance {
            writeln!(out, "| provenance: {p} | {n} |").unwrap();
        }
        writeln!(out, "| AI-specific fraction | {:.4} |", s.genai_fraction).unwrap();

        for code in ThreatCode::ALL {
            let of_type: Vec<&ThreatInstance> = self
                .instances
                .iter()
                .filter(|i| i.type_code == code)
                .collect();
            if of_type.is_empty() {
                continue;
            }
            writeln!(out, "\n## {code}: {}\n", code.name()).unwrap();
            // Loci keep their first-seen order, which follows elicitation order.
            let mut loci: Vec<&str> = Vec::new();
            for inst in &of_type {
                if !loci.contains(&inst.locus.id()) {
                    loci.push(inst.locus.id());
                }
            }
            for locus in loci {
                let group: Vec<&&ThreatInstance> =
                    of_type.iter().filter(|i| i.locus.id() == locus).collect();
                writeln!(out, "### {}\n", group[0].locus.describe()).unwrap();
                writeln!(
                    out,
                    "| Threat | Characteristic | Domain | Source | Examples | Notes |"
                )
                .unwrap();
                writeln!(out, "| --- | --- | --- | --- | --- | --- |").unwrap();
                for inst in group {
                    let source = match (inst.provenance, inst.cam_id) {
                        (Provenance::Cam, Some(cam)) => cam.to_string(),
                        _ => "tree".to_string(),
                    };
                    writeln!(
                        out,
                        "| `{}` | {} | {} | {} | {} | {} |",
                        inst.id,
                        inst.characteristic_id,
                        inst.characteristic_domain,
                        source,
                        inst.examples.join(", "),
                        inst.note.replace('|', "\\|"),
                    )
                    .unwrap();
                }
                out.push('\n');
            }
        }
        out
    }
}
