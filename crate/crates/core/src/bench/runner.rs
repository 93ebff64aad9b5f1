use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dataset::{Question, TemporalDataset};
use crate::engine::{AskMode, AskTrace, Engine};
use crate::error::{Error, Result};
use crate::kgraph::TemporalWindow;
use crate::num::Scalar;
use crate::provider::{ChatProvider, ChatRequest};
use crate::recall::CHRONOLOGY_PREFIX;
use crate::update::RevisionPolicy;

pub const DEFAULT_CHECKPOINTS: [usize; 6] = [1, 5, 10, 15, 20, 25];
pub const DEFAULT_RAW_BUDGET: usize = 16_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Recallm,
    Vectordb,
    Hybrid,
    Raw,
}

impl SystemId {
    pub const ALL: [SystemId; 4] = [SystemId::Recallm, SystemId::Vectordb, SystemId::Hybrid, SystemId::Raw];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemId::Recallm => "recallm",
            SystemId::Vectordb => "vectordb",
            SystemId::Hybrid => "hybrid",
            SystemId::Raw => "raw",
        }
    }
}

impl std::str::FromStr for SystemId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SystemId::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown system {s:?} (recallm, vectordb, hybrid, raw)"))
    }
}

impl std::fmt::Display for SystemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub repetitions: usize,
    pub checkpoints: Vec<usize>,
    pub systems: Vec<SystemId>,
    /// Character budget of the raw baseline's prompt.
    pub raw_budget_chars: usize,
    pub include_long_range: bool,
    /// Free-form label stored in every record, e.g. `scripted` or `remote`.
    pub provider_mode: String,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repetitions: 25,
            checkpoints: DEFAULT_CHECKPOINTS.to_vec(),
            systems: SystemId::ALL.to_vec(),
            raw_budget_chars: DEFAULT_RAW_BUDGET,
            include_long_range: true,
            provider_mode: "scripted".into(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if let Some(c) = self.checkpoints.iter().find(|c| **c == 0 || **c > self.repetitions) {
            return Err(Error::InvalidArgument(format!("checkpoint {c} is outside 1..={}", self.repetitions)));
        }
        Ok(())
    }

    /// The default schedule restricted to `1..=repetitions`, plus the final
    /// repetition.
    pub fn default_checkpoints(repetitions: usize) -> Vec<usize> {
        let mut set: BTreeSet<usize> = DEFAULT_CHECKPOINTS.iter().copied().filter(|c| *c <= repetitions).collect();
        set.insert(repetitions);
        set.into_iter().collect()
    }
}

/// Hyperparameters a record was produced under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ConfigSnapshot<F> {
    pub max_prompt_concepts: usize,
    pub max_distance: usize,
    pub alpha: F,
    pub window: TemporalWindow,
    pub revision: RevisionPolicy,
    pub k: usize,
    pub raw_budget_chars: usize,
    pub provider_mode: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTrace {
    pub prompt_chars: usize,
    pub context_exceeded: bool,
    pub answer: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase", bound = "F: Scalar")]
pub enum SystemTrace<F> {
    Ask(AskTrace<F>),
    Raw(RawTrace),
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct QuestionRecord<F> {
    pub question_id: String,
    pub question: String,
    pub reference: String,
    pub answer: Option<String>,
    pub evidence_hit: bool,
    pub error: Option<String>,
    pub trace: SystemTrace<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RunRecord<F> {
    pub system: SystemId,
    pub checkpoint: usize,
    pub global_counter: u64,
    pub context_exceeded: bool,
    pub failed: bool,
    pub config: ConfigSnapshot<F>,
    pub questions: Vec<QuestionRecord<F>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct BenchReport<F> {
    pub records: Vec<RunRecord<F>>,
    pub final_counter: u64,
    /// First repetition after which the raw baseline's prompt exceeds its
    /// budget, checked after every repetition.
    pub raw_exceeded_at: Option<usize>,
}

impl<F: Scalar> BenchReport<F> {
    /// One JSON record per line.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(text: &str) -> Result<Vec<RunRecord<F>>> {
        text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
    }
}

/// True iff every evidence statement of `q` occurs verbatim in `context`.
pub fn evidence_recall(dataset: &TemporalDataset, q: &Question, context: &str) -> bool {
    let texts = dataset.evidence_texts(q);
    !context.is_empty() && !texts.is_empty() && texts.iter().all(|t| context.contains(t))
}

/// The raw baseline's prompt: every statement so far after the chronology
/// prefix, then the question.
pub fn raw_prompt(history: &str, question: &str) -> String {
    format!("{CHRONOLOGY_PREFIX}\n\n{history}\n\n{}", question.trim())
}

fn raw_answer(history: &str, question: &str, budget: usize, provider: Option<&dyn ChatProvider>) -> (RawTrace, String) {
    let prompt = raw_prompt(history, question);
    let prompt_chars = prompt.chars().count();
    let mut trace = RawTrace { prompt_chars, context_exceeded: prompt_chars > budget, answer: None, error: None };
    if trace.context_exceeded {
        trace.error = Some(format!("prompt of {prompt_chars} characters exceeds the {budget} character budget"));
        return (trace, String::new());
    }
    if let Some(p) = provider {
        match p.complete(&ChatRequest::single("", prompt.clone())) {
            Ok(a) => trace.answer = Some(a.trim().to_string()),
            Err(e) => trace.error = Some(e.to_string()),
        }
    }
    (trace, prompt)
}

fn feed<F: Scalar>(engine: &mut Engine<F>, history: &mut String, statement: &str) -> Result<()> {
    engine.ingest(statement)?;
    if !history.is_empty() {
        history.push(' ');
    }
    history.push_str(statement);
    Ok(())
}

fn mode_for(system: SystemId, has_provider: bool) -> AskMode {
    match system {
        SystemId::Recallm if has_provider => AskMode::Graph,
        SystemId::Recallm => AskMode::RetrievalOnly,
        SystemId::Vectordb => AskMode::Vector,
        SystemId::Hybrid => AskMode::Hybrid,
        SystemId::Raw => unreachable!("raw is not an engine mode"),
    }
}

/// Ingests the initial block once and the loop `repetitions` times through
/// `engine`, questioning every system at each checkpoint.
pub fn run_temporal_bench<F: Scalar>(
    dataset: &TemporalDataset,
    engine: &mut Engine<F>,
    cfg: &BenchConfig,
) -> Result<BenchReport<F>> {
    cfg.validate()?;
    let checkpoints: BTreeSet<usize> = cfg.checkpoints.iter().copied().collect();
    let questions: Vec<&Question> = if cfg.include_long_range {
        dataset.questions().collect()
    } else {
        dataset.standard.iter().collect()
    };
    let longest_question = questions.iter().map(|q| q.question.trim().chars().count()).max().unwrap_or(0);
    let ec = *engine.config();
    let snapshot = ConfigSnapshot {
        max_prompt_concepts: ec.retrieval.max_prompt_concepts,
        max_distance: ec.retrieval.max_distance,
        alpha: ec.retrieval.alpha,
        window: ec.retrieval.window,
        revision: ec.revision,
        k: ec.k,
        raw_budget_chars: cfg.raw_budget_chars,
        provider_mode: cfg.provider_mode.clone(),
    };

    let mut history = String::new();
    for s in &dataset.initial {
        feed(engine, &mut history, s)?;
    }

    let mut records = Vec::new();
    let mut raw_exceeded_at = None;
    for rep in 1..=cfg.repetitions {
        for s in &dataset.loop_statements {
            feed(engine, &mut history, s)?;
        }
        if raw_exceeded_at.is_none() {
            let worst = raw_prompt(&history, "").chars().count() + longest_question;
            if worst > cfg.raw_budget_chars {
                raw_exceeded_at = Some(rep);
            }
        }
        if !checkpoints.contains(&rep) {
            continue;
        }
        log::info!("checkpoint {rep}: counter {}", engine.graph().global_counter());
        for system in &cfg.systems {
            let mut qrecs = Vec::with_capacity(questions.len());
            for q in &questions {
                let (trace, context, answer, error) = if *system == SystemId::Raw {
                    let (t, prompt) = raw_answer(&history, &q.question, cfg.raw_budget_chars, engine.provider());
                    let (a, e) = (t.answer.clone(), t.error.clone());
                    (SystemTrace::Raw(t), prompt, a, e)
                } else {
                    match engine.ask(&q.question, mode_for(*system, engine.provider().is_some())) {
                        Ok(t) => {
                            let (c, a, e) = (t.context(), t.answer().map(str::to_string), t.error().map(str::to_string));
                            (SystemTrace::Ask(t), c, a, e)
                        }
                        Err(e) => (SystemTrace::Failed { error: e.to_string() }, String::new(), None, Some(e.to_string())),
                    }
                };
                qrecs.push(QuestionRecord {
                    question_id: q.id.clone(),
                    question: q.question.clone(),
                    reference: q.reference.clone(),
                    answer,
                    evidence_hit: evidence_recall(dataset, q, &context),
                    error,
                    trace,
                });
            }
            let context_exceeded = *system == SystemId::Raw
                && (raw_exceeded_at.is_some_and(|r| r <= rep)
                    || qrecs.iter().any(|q| matches!(&q.trace, SystemTrace::Raw(t) if t.context_exceeded)));
            records.push(RunRecord {
                system: *system,
                checkpoint: rep,
                global_counter: engine.graph().global_counter(),
                context_exceeded,
                failed: qrecs.iter().any(|q| q.error.is_some()) && !context_exceeded,
                config: snapshot.clone(),
                questions: qrecs,
            });
        }
    }
    Ok(BenchReport { records, final_counter: engine.graph().global_counter(), raw_exceeded_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineConfig;
    use crate::update::RevisionPolicy;

    fn offline_engine() -> Engine<f64> {
        Engine::new(EngineConfig { revision: RevisionPolicy::disabled(), ..Default::default() })
    }

    #[test]
    fn one_repetition_one_checkpoint() {
        let d = TemporalDataset::bundled();
        let cfg = BenchConfig { repetitions: 1, checkpoints: vec![1], ..Default::default() };
        let mut e = offline_engine();
        let r = run_temporal_bench(&d, &mut e, &cfg).unwrap();
        assert_eq!(r.final_counter, 72);
        assert_eq!(r.records.len(), 4);
        assert!(r.records.iter().all(|rec| rec.questions.len() == 32));
        let color = r.records[0].questions.iter().find(|q| q.question_id == "S18").unwrap();
        assert!(color.evidence_hit);
    }

    #[test]
    fn bad_schedule_rejected() {
        let cfg = BenchConfig { repetitions: 2, checkpoints: vec![3], ..Default::default() };
        assert!(cfg.validate().is_err());
        assert_eq!(BenchConfig::default_checkpoints(12), vec![1, 5, 10, 12]);
    }

    #[test]
    fn evidence_rule() {
        let d = TemporalDataset::bundled();
        let q = &d.standard[17];
        assert!(!evidence_recall(&d, q, ""));
        assert!(evidence_recall(&d, q, "x Brandon's favorite color is green. y"));
        let multi = &d.long_range[2];
        assert!(!evidence_recall(&d, multi, d.statement(5).unwrap()));
    }

    #[test]
    fn system_ids_round_trip() {
        for s in SystemId::ALL {
            assert_eq!(s.as_str().parse::<SystemId>().unwrap(), s);
        }
    }
}
