//! Data-flow-diagram model of a GenAI-based application.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed system model: {0}")]
    Parse(String),
    #[error("invalid id {0:?}: expected letters, digits, '_', '-' or '.'")]
    InvalidId(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("flow {flow} references unknown {endpoint} element {target:?}")]
    DanglingEndpoint {
        flow: String,
        endpoint: &'static str,
        target: String,
    },
    #[error("element {element} references unknown boundary {boundary:?}")]
    DanglingBoundary { element: String, boundary: String },
    #[error("flow {0} has the same source and target")]
    SelfFlow(String),
    #[error("element {element}: role {role} is not allowed on a {kind}")]
    Role {
        element: String,
        role: GenAiRole,
        kind: ElementKind,
    },
    #[error("system model has no elements")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    ExternalEntity,
    Process,
    DataStore,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::ExternalEntity => "external_entity",
            ElementKind::Process => "process",
            ElementKind::DataStore => "data_store",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Role an element plays in a GenAI interaction paradigm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenAiRole {
    User,
    GenaiModel,
    PretrainingParty,
    FinetuningParty,
    Agent,
    ExternalTool,
    ExternalAgent,
    RagStore,
    LogStore,
    SystemPromptStore,
    Application,
    Client,
}

impl fmt::Display for GenAiRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataCategory {
    UserInputs,
    SystemPrompts,
    DerivedAttributes,
    PtData,
    FtData,
    OperationData,
    UserData,
    IntermediateComputations,
}

impl DataCategory {
    pub fn label(self) -> &'static str {
        match self {
            DataCategory::UserInputs => "User Inputs",
            DataCategory::SystemPrompts => "System Prompts",
            DataCategory::DerivedAttributes => "Derived Attributes",
            DataCategory::PtData => "PT Data",
            DataCategory::FtData => "FT Data",
            DataCategory::OperationData => "Operation Data",
            DataCategory::UserData => "User Data",
            DataCategory::IntermediateComputations => "Intermediate Computations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustBoundary {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub roles: BTreeSet<GenAiRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
}

impl Element {
    pub fn has_role(&self, role: GenAiRole) -> bool {
        self.roles.contains(&role)
    }

    pub fn has_any_role(&self, roles: &[GenAiRole]) -> bool {
        roles.iter().any(|r| self.roles.contains(r))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub id: String,
    pub source: String,
    pub target: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub categories: BTreeSet<DataCategory>,
}

/// A validated DFD. Fields are public so callers can build models in code;
/// [`SystemModel::validate`] checks the same invariants the loader enforces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(default)]
    pub boundaries: Vec<TrustBoundary>,
    pub elements: Vec<Element>,
    #[serde(default)]
    pub flows: Vec<Flow>,
}

/// Unit of elicitation: a DFD element or a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locus<'a> {
    Element(&'a Element),
    Flow(&'a Flow),
}

impl<'a> Locus<'a> {
    pub fn id(&self) -> &'a str {
        match self {
            Locus::Element(e) => &e.id,
            Locus::Flow(f) => &f.id,
        }
    }

    pub fn kind(&self) -> LocusKind {
        match self {
            Locus::Element(e) => match e.kind {
                ElementKind::ExternalEntity => LocusKind::ExternalEntity,
                ElementKind::Process => LocusKind::Process,
                ElementKind::DataStore => LocusKind::DataStore,
            },
            Locus::Flow(_) => LocusKind::Flow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocusKind {
    ExternalEntity,
    Process,
    DataStore,
    Flow,
}

impl LocusKind {
    pub const ALL: [LocusKind; 4] = [
        LocusKind::ExternalEntity,
        LocusKind::Process,
        LocusKind::DataStore,
        LocusKind::Flow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LocusKind::ExternalEntity => "external_entity",
            LocusKind::Process => "process",
            LocusKind::DataStore => "data_store",
            LocusKind::Flow => "flow",
        }
    }
}

impl fmt::Display for LocusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A flow whose endpoints sit in different trust zones. `None` is the
/// implicit zone outside every boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingFlow<'a> {
    pub flow: &'a Flow,
    pub source_zone: Option<&'a str>,
    pub target_zone: Option<&'a str>,
}

fn valid_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl SystemModel {
    pub fn from_json(bytes: &[u8], strict: bool) -> Result<Self, ModelError> {
        let value = json::parse_object(
            bytes,
            strict,
            &["name", "metadata", "boundaries", "elements", "flows"],
        )
        .map_err(ModelError::Parse)?;
        let model: SystemModel =
            serde_json::from_value(value).map_err(|e| ModelError::Parse(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.elements.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut boundaries = BTreeSet::new();
        for b in &self.boundaries {
            if !valid_token(&b.id) {
                return Err(ModelError::InvalidId(b.id.clone()));
            }
            if !boundaries.insert(b.id.as_str()) {
                return Err(ModelError::DuplicateId(b.id.clone()));
            }
        }
        // Element and flow ids share one namespace: both become locus ids.
        let mut loci = BTreeSet::new();
        for e in &self.elements {
            if !valid_token(&e.id) {
                return Err(ModelError::InvalidId(e.id.clone()));
            }
            if !loci.insert(e.id.as_str()) {
                return Err(ModelError::DuplicateId(e.id.clone()));
            }
            if let Some(b) = &e.boundary {
                if !boundaries.contains(b.as_str()) {
                    return Err(ModelError::DanglingBoundary {
                        element: e.id.clone(),
                        boundary: b.clone(),
                    });
                }
            }
            if e.kind == ElementKind::DataStore && e.has_role(GenAiRole::Agent) {
                return Err(ModelError::Role {
                    element: e.id.clone(),
                    role: GenAiRole::Agent,
                    kind: e.kind,
                });
            }
        }
        let elements: BTreeSet<&str> = self.elements.iter().map(|e| e.id.as_str()).collect();
        for f in &self.flows {
            if !valid_token(&f.id) {
                return Err(ModelError::InvalidId(f.id.clone()));
            }
            if !loci.insert(f.id.as_str()) {
                return Err(ModelError::DuplicateId(f.id.clone()));
            }
            for (endpoint, target) in [("source", &f.source), ("target", &f.target)] {
                if !elements.contains(target.as_str()) {
                    return Err(ModelError::DanglingEndpoint {
                        flow: f.id.clone(),
                        endpoint,
                        target: target.clone(),
                    });
                }
            }
            if f.source == f.target {
                return Err(ModelError::SelfFlow(f.id.clone()));
            }
        }
        Ok(())
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn zone_of(&self, element_id: &str) -> Option<&str> {
        self.element(element_id).and_then(|e| e.boundary.as_deref())
    }

    pub fn endpoints<'a>(&'a self, flow: &Flow) -> Option<(&'a Element, &'a Element)> {
        Some((self.element(&flow.source)?, self.element(&flow.target)?))
    }

    /// Flows whose endpoints lie in different zones, ordered by flow id.
    pub fn crossing_flows(&self) -> Vec<CrossingFlow<'_>> {
        let mut out: Vec<_> = self
            .flows
            .iter()
            .map(|flow| CrossingFlow {
                flow,
                source_zone: self.zone_of(&flow.source),
                target_zone: self.zone_of(&flow.target),
            })
            .filter(|c| c.source_zone != c.target_zone)
            .collect();
        out.sort_by(|a, b| a.flow.id.cmp(&b.flow.id));
        out
    }

    /// One locus per element then one per flow, each group ordered by id.
    pub fn loci(&self) -> Vec<Locus<'_>> {
        let mut elements: Vec<&Element> = self.elements.iter().collect();
        elements.sort_by(|a, b| a.id.cmp(&b.id));
        let mut flows: Vec<&Flow> = self.flows.iter().collect();
        flows.sort_by(|a, b| a.id.cmp(&b.id));
        elements
            .into_iter()
            .map(Locus::Element)
            .chain(flows.into_iter().map(Locus::Flow))
            .collect()
    }

    pub fn has_role(&self, role: GenAiRole) -> bool {
        self.elements.iter().any(|e| e.has_role(role))
    }

    pub fn to_json(&self) -> String {
        json::to_pretty(self)
    }
}
