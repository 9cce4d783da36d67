//! Bundled fixture data: the default domain hierarchy, a representative
//! GenAI-extended knowledge base, and three system models.

use crate::domain::DomainHierarchy;
use crate::kb::KnowledgeBase;
use crate::model::SystemModel;

pub const HIERARCHY_JSON: &str = include_str!("../fixtures/hierarchy.json");
pub const KB_JSON: &str = include_str!("../fixtures/kb.json");
pub const CHATBOT_JSON: &str = include_str!("../fixtures/chatbot.json");
pub const AGENTIC_JSON: &str = include_str!("../fixtures/agentic.json");
pub const MINIMAL_JSON: &str = include_str!("../fixtures/minimal.json");

pub fn hierarchy() -> DomainHierarchy {
    DomainHierarchy::from_json(HIERARCHY_JSON.as_bytes(), true).expect("bundled hierarchy is valid")
}

pub fn knowledge_base() -> KnowledgeBase {
    KnowledgeBase::from_json(KB_JSON.as_bytes(), hierarchy(), true).expect("bundled KB is valid")
}

pub fn chatbot() -> SystemModel {
    SystemModel::from_json(CHATBOT_JSON.as_bytes(), true).expect("bundled model is valid")
}

pub fn agentic() -> SystemModel {
    SystemModel::from_json(AGENTIC_JSON.as_bytes(), true).expect("bundled model is valid")
}

pub fn minimal() -> SystemModel {
    SystemModel::from_json(MINIMAL_JSON.as_bytes(), true).expect("bundled model is valid")
}
