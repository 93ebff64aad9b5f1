//! Three-point automatic grading: 0 wrong, 1 partially correct, 2 correct
//! and succinct.

use serde::{Deserialize, Serialize};

use crate::num::Scalar;
use crate::provider::{ChatProvider, ChatRequest, ProviderError};

pub const RUBRIC_TEMPLATE: &str = include_str!("../../assets/autograde_rubric.txt");

pub fn rubric_prompt(question: &str, reference: &str, response: &str) -> String {
    RUBRIC_TEMPLATE
        .replace("{question}", question.trim())
        .replace("{reference}", reference.trim())
        .replace("{response}", response.trim())
}

/// The first standalone `0`, `1` or `2` in `output`.
pub fn parse_score(output: &str) -> Option<u8> {
    output
        .split(|c: char| !c.is_ascii_alphanumeric())
        .find_map(|t| match t {
            "0" => Some(0),
            "1" => Some(1),
            "2" => Some(2),
            _ => None,
        })
}

/// Grades one response. `Ok(None)` means the grader's output did not parse.
pub fn autograde_3pt(
    question: &str,
    reference: &str,
    response: &str,
    provider: &dyn ChatProvider,
) -> Result<Option<u8>, ProviderError> {
    let mut req = ChatRequest::single("", rubric_prompt(question, reference, response));
    req.max_tokens = 4;
    let out = provider.complete(&req)?;
    let score = parse_score(&out);
    if score.is_none() {
        log::warn!("ungradable grader output {:?}", out.trim());
    }
    Ok(score)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct AutogradeSummary<F> {
    pub total: u64,
    pub graded: usize,
    pub ungraded: usize,
    /// `total / (2·graded)`; absent when nothing was graded.
    pub accuracy: Option<F>,
}

pub fn summarize<F: Scalar>(scores: &[Option<u8>]) -> AutogradeSummary<F> {
    let graded: Vec<u8> = scores.iter().flatten().copied().collect();
    let total: u64 = graded.iter().map(|s| u64::from(*s)).sum();
    let accuracy =
        (!graded.is_empty()).then(|| F::from_count(total) / F::from_count(2 * graded.len() as u64));
    AutogradeSummary { total, graded: graded.len(), ungraded: scores.len() - graded.len(), accuracy }
}

/// Offline grader that applies the rubric mechanically: identical to the
/// reference (ignoring case, surrounding whitespace and final punctuation)
/// scores 2, containing the reference scores 1, anything else 0.
#[derive(Debug, Default, Clone, Copy)]
pub struct RubricGrader;

fn field<'a>(prompt: &'a str, name: &str) -> Option<&'a str> {
    prompt.lines().rev().find_map(|l| l.strip_prefix(name)).map(str::trim)
}

fn norm(s: &str) -> String {
    s.trim().trim_end_matches(['.', '!', '?']).trim().to_lowercase()
}

impl ChatProvider for RubricGrader {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        let prompt = request.last_user().ok_or(ProviderError::EmptyInput)?;
        let (Some(reference), Some(response)) = (field(prompt, "Reference answer:"), field(prompt, "Response:")) else {
            return Ok("?".into());
        };
        let (r, a) = (norm(reference), norm(response));
        let score = if reference == response || r == a {
            2
        } else if !r.is_empty() && a.contains(&r) {
            1
        } else {
            0
        };
        Ok(score.to_string())
    }
}
