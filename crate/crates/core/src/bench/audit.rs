//! Checks on the fixture's evidence annotations and on which questions the
//! bundled lexicons can answer from the graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dataset::{Question, TemporalDataset};
use crate::extract::Extractor;
use crate::label::Label;

fn labels(extractor: &Extractor, text: &str) -> BTreeSet<Label> {
    extractor.extract_concepts(text).concepts.into_keys().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub question_id: String,
    pub annotated: Vec<usize>,
    /// Latest statement sharing the most concepts with question + reference.
    pub derived: Option<usize>,
    pub agrees: bool,
}

/// Recomputes an evidence timestep per question by concept overlap and
/// compares it with the annotation.
pub fn audit_evidence(dataset: &TemporalDataset, extractor: &Extractor) -> Vec<AuditRow> {
    let statements: Vec<BTreeSet<Label>> = (1..=dataset.initial.len() + dataset.loop_statements.len())
        .map(|t| labels(extractor, dataset.statement(t).unwrap_or_default()))
        .collect();
    dataset
        .questions()
        .map(|q| {
            let target = labels(extractor, &format!("{} {}", q.question, q.reference));
            let mut best: Option<(usize, usize)> = None;
            for (i, s) in statements.iter().enumerate() {
                let overlap = s.intersection(&target).count();
                if overlap > 0 && best.is_none_or(|(_, o)| overlap >= o) {
                    best = Some((i + 1, overlap));
                }
            }
            let derived = best.map(|(t, _)| t);
            AuditRow {
                question_id: q.id.clone(),
                annotated: q.evidence.clone(),
                derived,
                agrees: derived.is_some_and(|t| q.evidence.contains(&t)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub question_id: String,
    pub essentials: Vec<Label>,
    pub covered: bool,
}

/// A question is covered when it has essential concepts and every evidence
/// statement shares at least one concept with them, so the graph can route
/// from the question to the evidence.
pub fn lexicon_coverage(dataset: &TemporalDataset, extractor: &Extractor, questions: &[Question]) -> Vec<CoverageRow> {
    questions
        .iter()
        .map(|q| {
            let essentials = extractor.essential_labels(&q.question);
            let set: BTreeSet<&Label> = essentials.iter().collect();
            let covered = !essentials.is_empty()
                && dataset
                    .evidence_texts(q)
                    .iter()
                    .all(|s| labels(extractor, s).iter().any(|l| set.contains(l)));
            CoverageRow { question_id: q.id.clone(), essentials, covered }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_question_is_covered_and_agrees() {
        let d = TemporalDataset::bundled();
        let ex = Extractor::bundled();
        let cov = lexicon_coverage(&d, ex, &d.standard);
        let s18 = cov.iter().find(|r| r.question_id == "S18").unwrap();
        assert!(s18.covered);
        let audit = audit_evidence(&d, ex);
        assert!(audit.iter().find(|r| r.question_id == "S18").unwrap().agrees);
    }
}
