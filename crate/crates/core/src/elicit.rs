//! Interaction-based threat elicitation: every locus of the system model is
//! crossed with the applicable threat types and the leaf characteristics of
//! the domain-filtered knowledge base.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cam::CamId;
use crate::domain::{DomainId, UnknownDomain};
use crate::json;
use crate::kb::{KnowledgeBase, ThreatCode};
use crate::model::{Locus, LocusKind, SystemModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElicitError {
    #[error(transparent)]
    UnknownDomain(#[from] UnknownDomain),
    #[error("applicability mapping has no entry for ({code}, {kind})")]
    MappingIncomplete { code: ThreatCode, kind: LocusKind },
    #[error("malformed mapping file: {0}")]
    MappingParse(String),
}

/// Which threat types are examined at which kind of locus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplicabilityMapping {
    entries: BTreeMap<(ThreatCode, LocusKind), bool>,
}

impl ApplicabilityMapping {
    /// The built-in table: L, I, Nr, D and DD at processes, stores and
    /// flows; U at external entities; Nc at processes and stores.
    pub fn default_mapping() -> Self {
        use LocusKind::*;
        let applicable = |code: ThreatCode| -> &'static [LocusKind] {
            match code {
                ThreatCode::U => &[ExternalEntity],
                ThreatCode::Nc => &[Process, DataStore],
                _ => &[Process, DataStore, Flow],
            }
        };
        let entries = ThreatCode::ALL
            .into_iter()
            .flat_map(|code| {
                LocusKind::ALL
                    .into_iter()
                    .map(move |kind| ((code, kind), applicable(code).contains(&kind)))
            })
            .collect();
        ApplicabilityMapping { entries }
    }

    /// Possibly partial mapping; [`elicit`] rejects incomplete ones.
    pub fn from_entries(
        entries: impl IntoIterator<Item = ((ThreatCode, LocusKind), bool)>,
    ) -> Self {
        ApplicabilityMapping {
            entries: entries.into_iter().collect(),
        }
    }

    /// Parses `{"entries": {"L": {"process": true, ...}, ...}}`. The file
    /// must cover all 28 (type, locus kind) pairs.
    pub fn from_json(bytes: &[u8], strict: bool) -> Result<Self, ElicitError> {
        #[derive(Deserialize)]
        struct Raw {
            entries: BTreeMap<ThreatCode, BTreeMap<LocusKind, bool>>,
        }
        let value =
            json::parse_object(bytes, strict, &["entries"]).map_err(ElicitError::MappingParse)?;
        let raw: Raw =
            serde_json::from_value(value).map_err(|e| ElicitError::MappingParse(e.to_string()))?;
        let mapping =
            Self::from_entries(raw.entries.into_iter().flat_map(|(code, kinds)| {
                kinds.into_iter().map(move |(kind, on)| ((code, kind), on))
            }));
        mapping.check_total()?;
        Ok(mapping)
    }

    pub fn check_total(&self) -> Result<(), ElicitError> {
        for code in ThreatCode::ALL {
            for kind in LocusKind::ALL {
                if !self.entries.contains_key(&(code, kind)) {
                    return Err(ElicitError::MappingIncomplete { code, kind });
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, code: ThreatCode, kind: LocusKind) -> Option<bool> {
        self.entries.get(&(code, kind)).copied()
    }

    pub fn applies(&self, code: ThreatCode, kind: LocusKind) -> bool {
        self.get(code, kind).unwrap_or(false)
    }

    pub fn to_json(&self) -> String {
        let mut nested: BTreeMap<ThreatCode, BTreeMap<LocusKind, bool>> = BTreeMap::new();
        for ((code, kind), on) in &self.entries {
            nested.entry(*code).or_default().insert(*kind, *on);
        }
        json::to_pretty(&serde_json::json!({ "entries": nested }))
    }
}

impl Default for ApplicabilityMapping {
    fn default() -> Self {
        Self::default_mapping()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Tree,
    Cam,
}

/// Where a threat was found. Flow loci carry their endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum InstanceLocus {
    Element {
        id: String,
        kind: LocusKind,
    },
    Flow {
        id: String,
        source: String,
        target: String,
    },
    System,
}

impl InstanceLocus {
    pub fn id(&self) -> &str {
        match self {
            InstanceLocus::Element { id, .. } | InstanceLocus::Flow { id, .. } => id,
            InstanceLocus::System => "system",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            InstanceLocus::Element { id, kind } => format!("{kind} `{id}`"),
            InstanceLocus::Flow { id, source, target } => {
                format!("flow `{id}` ({source} -> {target})")
            }
            InstanceLocus::System => "system".to_string(),
        }
    }
}

impl From<Locus<'_>> for InstanceLocus {
    fn from(locus: Locus<'_>) -> Self {
        match locus {
            Locus::Element(_) => InstanceLocus::Element {
                id: locus.id().to_string(),
                kind: locus.kind(),
            },
            Locus::Flow(f) => InstanceLocus::Flow {
                id: f.id.clone(),
                source: f.source.clone(),
                target: f.target.clone(),
            },
        }
    }
}

/// One elicited threat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatInstance {
    pub id: String,
    pub locus: InstanceLocus,
    pub type_code: ThreatCode,
    /// A characteristic id for tree threats; the bare type code for CAM
    /// threats, which anchor at the type root.
    pub characteristic_id: String,
    pub characteristic_domain: DomainId,
    pub examples: Vec<String>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cam_id: Option<CamId>,
    pub note: String,
}

/// Elicits tree threats for `model` against `kb` filtered to `query`.
///
/// Output order is loci order, then threat type in acronym order, then leaf
/// characteristic id. Instance ids are `<model>/<locus>/<characteristic>`.
/// The `examples` field is left empty; see [`annotate_examples`].
pub fn elicit(
    model: &SystemModel,
    kb: &KnowledgeBase,
    mapping: &ApplicabilityMapping,
    query: &DomainId,
) -> Result<Vec<ThreatInstance>, ElicitError> {
    mapping.check_total()?;
    let filtered = kb.filter(query)?;

    let leaves: Vec<Vec<_>> = ThreatCode::ALL
        .iter()
        .map(|&code| filtered.leaves(code).collect())
        .collect();

    let mut out = Vec::new();
    for locus in model.loci() {
        let kind = locus.kind();
        for code in ThreatCode::ALL {
            if !mapping.applies(code, kind) {
                continue;
            }
            for c in &leaves[code.index()] {
                out.push(ThreatInstance {
                    id: format!("{}/{}/{}", model.name, locus.id(), c.id),
                    locus: locus.into(),
                    type_code: code,
                    characteristic_id: c.id.to_string(),
                    characteristic_domain: c.domain.clone(),
                    examples: Vec::new(),
                    provenance: Provenance::Tree,
                    cam_id: None,
                    note: c.title.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Fills each tree instance's `examples` with the ids of the examples `kb`
/// holds for its characteristic, in id order. Pass the same filtered KB the
/// instances were elicited against so only surviving examples attach.
pub fn annotate_examples(
    mut instances: Vec<ThreatInstance>,
    kb: &KnowledgeBase,
) -> Vec<ThreatInstance> {
    for inst in &mut instances {
        inst.examples = match inst.characteristic_id.parse() {
            Ok(id) if inst.provenance == Provenance::Tree => {
                kb.examples_for(&id).map(|e| e.id.clone()).collect()
            }
            _ => Vec::new(),
        };
    }
    instances
}
