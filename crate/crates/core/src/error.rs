use thiserror::Error;

use crate::cam::CamError;
use crate::domain::{HierarchyError, UnknownDomain};
use crate::elicit::ElicitError;
use crate::kb::{IdError, KbError};
use crate::model::ModelError;
use crate::report::ReportError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    UnknownDomain(#[from] UnknownDomain),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Elicit(#[from] ElicitError),
    #[error(transparent)]
    Cam(#[from] CamError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable diagnostic code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Hierarchy(HierarchyError::Parse(_)) => "parse_error",
            Error::Hierarchy(_) => "structure_error",
            Error::UnknownDomain(_) | Error::Elicit(ElicitError::UnknownDomain(_)) => {
                "unknown_domain"
            }
            Error::Kb(KbError::Parse(_)) => "parse_error",
            Error::Kb(KbError::Id(_) | KbError::DuplicateId(_)) | Error::Id(_) => "id_error",
            Error::Kb(KbError::Types(_)) => "type_error",
            Error::Kb(KbError::Reference { .. }) => "reference_error",
            Error::Kb(KbError::Domain { .. }) => "domain_error",
            Error::Model(ModelError::Parse(_)) => "parse_error",
            Error::Model(ModelError::Role { .. }) => "role_error",
            Error::Model(ModelError::Empty) => "empty_model",
            Error::Model(
                ModelError::DanglingEndpoint { .. } | ModelError::DanglingBoundary { .. },
            ) => "reference_error",
            Error::Model(_) => "model_error",
            Error::Elicit(ElicitError::MappingIncomplete { .. }) => "mapping_incomplete",
            Error::Elicit(ElicitError::MappingParse(_)) => "parse_error",
            Error::Cam(CamError::NotGenAiModel(_)) => "not_genai_model",
            Error::Cam(CamError::RulesParse(_)) => "parse_error",
            Error::Report(ReportError::UnsupportedFormat(_)) => "unsupported_format",
            Error::Report(ReportError::Parse(_)) => "parse_error",
            Error::Io { .. } => "io_error",
        }
    }
}
