//! Common Attacker Models (CAMs) for GenAI-based systems, their LINDDUN
//! consequences, paradigm classification and CAM detection over a DFD.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::DomainId;
use crate::elicit::{InstanceLocus, Provenance, ThreatInstance};
use crate::json;
use crate::kb::ThreatCode;
use crate::model::{DataCategory, ElementKind, GenAiRole, SystemModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CamError {
    #[error("model {0:?} has no element with role genai_model")]
    NotGenAiModel(String),
    #[error("malformed CAM rules: {0}")]
    RulesParse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CamId {
    CAM1,
    CAM2,
    CAM3,
    CAM4,
    CAM5,
    CAM6,
}

impl CamId {
    pub const ALL: [CamId; 6] = [
        CamId::CAM1,
        CamId::CAM2,
        CamId::CAM3,
        CamId::CAM4,
        CamId::CAM5,
        CamId::CAM6,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CAM{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Actor {
    System,
    User,
    #[serde(rename = "FT_Party")]
    FtParty,
    Agent,
    Client,
}

impl Actor {
    pub fn label(self) -> &'static str {
        match self {
            Actor::System => "System",
            Actor::User => "User",
            Actor::FtParty => "FT Party",
            Actor::Agent => "Agent",
            Actor::Client => "Client",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CamGroup {
    UserSystem,
    CrossBoundary,
    WithinSystem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CamProfile {
    pub id: CamId,
    pub name: &'static str,
    pub actor: Actor,
    pub condition: &'static str,
    pub impacted: Vec<DataCategory>,
    pub group: CamGroup,
    /// Share of the surveyed literature, descriptive only.
    pub literature_share_pct: u8,
}

/// The six attacker models, in id order.
pub fn cam_profiles() -> [CamProfile; 6] {
    use DataCategory::*;
    [
        CamProfile {
            id: CamId::CAM1,
            name: "User-to-System Leakage",
            actor: Actor::System,
            condition: "Access to system input",
            impacted: vec![UserInputs, DerivedAttributes],
            group: CamGroup::UserSystem,
            literature_share_pct: 13,
        },
        CamProfile {
            id: CamId::CAM2,
            name: "System-to-User Leakage",
            actor: Actor::User,
            condition: "Access to system output",
            impacted: vec![SystemPrompts, PtData, FtData],
            group: CamGroup::UserSystem,
            literature_share_pct: 45,
        },
        CamProfile {
            id: CamId::CAM3,
            name: "PT-to-FT Leakage",
            actor: Actor::FtParty,
            condition: "Access to system output",
            impacted: vec![PtData],
            group: CamGroup::CrossBoundary,
            literature_share_pct: 3,
        },
        CamProfile {
            id: CamId::CAM4,
            name: "System-to-Agent Leakage",
            actor: Actor::System,
            condition: "Agent permissions",
            impacted: vec![FtData, OperationData],
            group: CamGroup::CrossBoundary,
            literature_share_pct: 4,
        },
        CamProfile {
            id: CamId::CAM5,
            name: "Agent-to-System Leakage",
            actor: Actor::Agent,
            condition: "System permissions",
            impacted: vec![UserData, OperationData],
            group: CamGroup::CrossBoundary,
            literature_share_pct: 13,
        },
        CamProfile {
            id: CamId::CAM6,
            name: "Residual Privacy Leakage",
            actor: Actor::Client,
            condition: "Access to intermediate computations",
            impacted: vec![PtData, FtData, UserInputs],
            group: CamGroup::WithinSystem,
            literature_share_pct: 24,
        },
    ]
}

pub fn cam_profile(id: CamId) -> CamProfile {
    cam_profiles()[id.index()].clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CamLinddunCell {
    pub cam_id: CamId,
    pub type_code: ThreatCode,
    pub description: &'static str,
}

// Rows follow the LINDDUN acronym, columns CAM1..CAM6.
const MATRIX: [[&str; 6]; 7] = [
    [
        "Inputs contain linkable attributes that allow associating information to the user or other data subjects.",
        "System outputs to a specific user contain linkable information pertaining to other data subjects.",
        "Outputs to the fine-tuning party include linkable information of the data subjects in the PT dataset.",
        "Outputs to agent include linkable information about data subjects from the application context.",
        "Uploaded files reveal stylistic or contextual signals that allow linking multiple user sessions or sensitive information.",
        "Intermediate computations reveal patterns that link additional data to individuals or groups.",
    ],
    [
        "The system receives explicit PII or QIDs from inputs.",
        "System outputs leak PII or QIDs from logs or metadata.",
        "System outputs leak PII or QIDs from pre-training records.",
        "System outputs leak PII or QIDs from application context.",
        "Agent leaks PII or QIDs from accessed information.",
        "Intermediate computations manifest identifying indicators.",
    ],
    [
        "Stored logs prevent users from denying disclosure of sensitive data.",
        "Stored logs prevent the system from denying disclosure of sensitive data.",
        "Stored logs prevent the system from denying disclosure of sensitive data.",
        "Stored logs prevent the system from denying disclosure of sensitive data.",
        "Exposed file contents reveal actions or claims that agent cannot deny.",
        "Intermediate computations disclose traces of user information or actions.",
    ],
    [
        "The system detects activities or user intent based on inputs.",
        "User detect whether private information is included or excluded based on system output.",
        "Service providers detect whether a record or a data subject's information was used in training.",
        "Agent detects whether data subject's information was used in the application.",
        "User actions can be detected from file access patterns or agent logs.",
        "Observing intermediate computations allows inference of participation or record membership.",
    ],
    [
        "User inputs contain sensitive information that providers can store or repurpose.",
        "System outputs reveal stored logs, system prompts, or cross-modal information.",
        "The fine-tuning party may extract targeted pre-training data using curated triggers.",
        "The agent may extract targeted application data through pre-planted triggers.",
        "Agents may disclose raw file contents or summaries to external parties.",
        "Intermediate computations may enable partial or full reconstruction of sensitive information.",
    ],
    [
        "Users lack control over system logging of their inputs and outputs.",
        "Users lack knowledge of or control over system log retention, usage, or system outputs.",
        "Users cannot observe or prevent the inclusion of their data in training.",
        "Users cannot observe or prevent the exposure of their data to agent.",
        "Users do not understand how agents store, forward, or process their files.",
        "Data subjects are unaware their data persists in intermediate computations & cannot access/correct.",
    ],
    [
        "Illegitimate harvesting of sensitive query information violates consent and lawful basis requirements.",
        "Data retention without consent or leakage of other users\u{2019} data violates regulations.",
        "Unauthorized dataset extraction violates privacy regulations.",
        "Unauthorized dataset extraction violates privacy regulations.",
        "Forwarding data to external parties can violate confidentiality and purpose-limited rules.",
        "Leakage through derived representations may conflict with data minimization requirements.",
    ],
];

pub fn cam_cell(cam: CamId, code: ThreatCode) -> CamLinddunCell {
    CamLinddunCell {
        cam_id: cam,
        type_code: code,
        description: MATRIX[code.index()][cam.index()],
    }
}

/// All 42 cells, CAM-major then acronym order.
pub fn cam_matrix() -> Vec<CamLinddunCell> {
    CamId::ALL
        .into_iter()
        .flat_map(|cam| {
            ThreatCode::ALL
                .into_iter()
                .map(move |code| cam_cell(cam, code))
        })
        .collect()
}

/// GenAI interaction paradigm, 1 (pre-trained model) to 4 (agent systems
/// with external tools).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ParadigmLevel(u8);

impl ParadigmLevel {
    pub fn new(level: u8) -> Option<Self> {
        (1..=4).contains(&level).then_some(ParadigmLevel(level))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "direct use of a pre-trained model",
            2 => "fine-tuned model",
            3 => "GenAI-based application",
            _ => "agent system integrated with external tools",
        }
    }
}

impl fmt::Display for ParadigmLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn require_genai(model: &SystemModel) -> Result<(), CamError> {
    if model.has_role(GenAiRole::GenaiModel) {
        Ok(())
    } else {
        Err(CamError::NotGenAiModel(model.name.clone()))
    }
}

pub fn classify_paradigm(model: &SystemModel) -> Result<ParadigmLevel, CamError> {
    use GenAiRole::*;
    require_genai(model)?;
    let rag_into_model = model.flows.iter().any(|f| {
        model
            .endpoints(f)
            .is_some_and(|(s, t)| s.has_role(RagStore) && t.has_role(GenaiModel))
    });
    let level = if model.has_role(Agent)
        || model.has_role(ExternalTool)
        || model.has_role(ExternalAgent)
        || rag_into_model
    {
        4
    } else if model.has_role(SystemPromptStore) || model.has_role(Application) {
        3
    } else if model.has_role(FinetuningParty) {
        2
    } else {
        1
    };
    Ok(ParadigmLevel(level))
}

/// A flow predicate. A flow matches when its target has one of
/// `target_roles` and either its source qualifies (a role in `source_roles`
/// or a kind in `source_kinds`) or it carries one of `categories`. With
/// `cross_boundary`, a qualifying source sending into another trust zone
/// matches as well.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRule {
    #[serde(default)]
    pub source_roles: Vec<GenAiRole>,
    #[serde(default)]
    pub source_kinds: Vec<ElementKind>,
    #[serde(default)]
    pub target_roles: Vec<GenAiRole>,
    /// Also match when the target sits in a different trust zone than the source.
    #[serde(default)]
    pub cross_boundary: bool,
    #[serde(default)]
    pub categories: Vec<DataCategory>,
}

/// Detection parameters for each CAM. The defaults encode the built-in
/// predicates; a rules file may replace any subset of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CamRules {
    /// CAM1: user input reaching a model.
    #[serde(rename = "CAM1")]
    pub cam1: FlowRule,
    /// CAM2: model output reaching a user.
    #[serde(rename = "CAM2")]
    pub cam2: FlowRule,
    #[serde(rename = "CAM3")]
    pub cam3: PartyRule,
    /// CAM4: application or store data flowing into an embedded model.
    #[serde(rename = "CAM4")]
    pub cam4: FlowRule,
    /// CAM5: an agent sending data to tools, other agents, or across its boundary.
    #[serde(rename = "CAM5")]
    pub cam5: FlowRule,
    #[serde(rename = "CAM6")]
    pub cam6: ResidualRule,
}

/// CAM3: a fine-tuning party next to a pre-training party, or next to a
/// model in another trust zone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyRule {
    pub party_roles: Vec<GenAiRole>,
    pub counterpart_roles: Vec<GenAiRole>,
    pub model_roles: Vec<GenAiRole>,
}

/// CAM6: flows carrying intermediate computations, or several clients
/// connected to the same model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualRule {
    pub categories: Vec<DataCategory>,
    pub client_roles: Vec<GenAiRole>,
    pub model_roles: Vec<GenAiRole>,
    pub min_clients: usize,
}

impl Default for CamRules {
    fn default() -> Self {
        use GenAiRole::*;
        CamRules {
            cam1: FlowRule {
                source_roles: vec![User],
                target_roles: vec![GenaiModel],
                ..Default::default()
            },
            cam2: FlowRule {
                source_roles: vec![GenaiModel],
                target_roles: vec![User],
                ..Default::default()
            },
            cam3: PartyRule {
                party_roles: vec![FinetuningParty],
                counterpart_roles: vec![PretrainingParty],
                model_roles: vec![GenaiModel],
            },
            cam4: FlowRule {
                source_roles: vec![Application],
                source_kinds: vec![ElementKind::DataStore],
                target_roles: vec![GenaiModel],
                categories: vec![DataCategory::OperationData],
                ..Default::default()
            },
            cam5: FlowRule {
                source_roles: vec![Agent],
                target_roles: vec![ExternalTool, ExternalAgent],
                cross_boundary: true,
                ..Default::default()
            },
            cam6: ResidualRule {
                categories: vec![DataCategory::IntermediateComputations],
                client_roles: vec![Client],
                model_roles: vec![GenaiModel],
                min_clients: 2,
            },
        }
    }
}

impl CamRules {
    pub fn from_json(bytes: &[u8]) -> Result<Self, CamError> {
        serde_json::from_slice(bytes).map_err(|e| CamError::RulesParse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        json::to_pretty(self)
    }
}

impl FlowRule {
    fn any_flow(&self, model: &SystemModel) -> bool {
        model.flows.iter().any(|f| {
            let Some((src, dst)) = model.endpoints(f) else {
                return false;
            };
            let from =
                src.has_any_role(&self.source_roles) || self.source_kinds.contains(&src.kind);
            let carries = self.categories.iter().any(|c| f.categories.contains(c));
            let into = dst.has_any_role(&self.target_roles);
            (into && (from || carries))
                || (from && self.cross_boundary && src.boundary != dst.boundary)
        })
    }
}

impl PartyRule {
    fn matches(&self, model: &SystemModel) -> bool {
        model
            .elements
            .iter()
            .filter(|e| e.has_any_role(&self.party_roles))
            .any(|party| {
                model.elements.iter().any(|other| {
                    other.id != party.id
                        && (other.has_any_role(&self.counterpart_roles)
                            || (other.has_any_role(&self.model_roles)
                                && other.boundary != party.boundary))
                })
            })
    }
}

impl ResidualRule {
    fn matches(&self, model: &SystemModel) -> bool {
        if model
            .flows
            .iter()
            .any(|f| self.categories.iter().any(|c| f.categories.contains(c)))
        {
            return true;
        }
        // Clients attached (in either direction) to each model element.
        let mut clients: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for f in &model.flows {
            let Some((s, t)) = model.endpoints(f) else {
                continue;
            };
            for (client, m) in [(s, t), (t, s)] {
                if client.has_any_role(&self.client_roles) && m.has_any_role(&self.model_roles) {
                    clients
                        .entry(m.id.as_str())
                        .or_default()
                        .insert(client.id.as_str());
                }
            }
        }
        clients.values().any(|c| c.len() >= self.min_clients.max(1))
    }
}

/// Applicable CAMs for `model` under the built-in rules.
pub fn detect_cams(model: &SystemModel) -> Result<BTreeSet<CamId>, CamError> {
    detect_cams_with(model, &CamRules::default())
}

pub fn detect_cams_with(
    model: &SystemModel,
    rules: &CamRules,
) -> Result<BTreeSet<CamId>, CamError> {
    require_genai(model)?;
    let hits = [
        (CamId::CAM1, rules.cam1.any_flow(model)),
        (CamId::CAM2, rules.cam2.any_flow(model)),
        (CamId::CAM3, rules.cam3.matches(model)),
        (CamId::CAM4, rules.cam4.any_flow(model)),
        (CamId::CAM5, rules.cam5.any_flow(model)),
        (CamId::CAM6, rules.cam6.matches(model)),
    ];
    Ok(hits
        .into_iter()
        .filter(|(_, hit)| *hit)
        .map(|(id, _)| id)
        .collect())
}

/// One system-scoped threat per (CAM, threat type), anchored at the type
/// root and annotated with the matrix cell text.
pub fn cam_threats(
    model: &SystemModel,
    cams: &BTreeSet<CamId>,
    domain: &DomainId,
) -> Vec<ThreatInstance> {
    cams.iter()
        .flat_map(|&cam| {
            ThreatCode::ALL.into_iter().map(move |code| ThreatInstance {
                id: format!("{}/cam/{cam}/{code}", model.name),
                locus: InstanceLocus::System,
                type_code: code,
                characteristic_id: code.to_string(),
                characteristic_domain: domain.clone(),
                examples: Vec::new(),
                provenance: Provenance::Cam,
                cam_id: Some(cam),
                note: cam_cell(cam, code).description.to_string(),
            })
        })
        .collect()
}
