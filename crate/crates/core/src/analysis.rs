//! End-to-end analysis: elicitation, example annotation, optional CAM
//! threats, and the resulting report.

use crate::cam::{self, CamRules};
use crate::domain::DomainId;
use crate::elicit::{self, ApplicabilityMapping};
use crate::kb::KnowledgeBase;
use crate::model::SystemModel;
use crate::report::{content_digest, ReportMeta, ThreatReport};
use crate::Error;

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub mapping: ApplicabilityMapping,
    /// Append CAM-derived threats for the CAMs detected with these rules.
    pub cams: Option<CamRules>,
}

pub fn analyze(
    model: &SystemModel,
    kb: &KnowledgeBase,
    query: &DomainId,
    options: &AnalysisOptions,
) -> Result<ThreatReport, Error> {
    let filtered = kb.filter(query)?;
    let mut instances = elicit::annotate_examples(
        elicit::elicit(model, kb, &options.mapping, query)?,
        &filtered,
    );
    if let Some(rules) = &options.cams {
        let detected = cam::detect_cams_with(model, rules)?;
        instances.extend(cam::cam_threats(model, &detected, kb.hierarchy().root()));
    }
    let meta = ReportMeta {
        model_name: model.name.clone(),
        query_domain: query.clone(),
        kb_digest: content_digest(kb.to_json().as_bytes()),
        model_digest: content_digest(model.to_json().as_bytes()),
    };
    Ok(ThreatReport::build(instances, meta, kb.hierarchy()))
}
