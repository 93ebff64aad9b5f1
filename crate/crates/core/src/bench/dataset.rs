use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BUNDLED_FIXTURE: &str = include_str!("../../fixtures/temporal.txt");

pub const INITIAL_LEN: usize = 10;
pub const LOOP_LEN: usize = 62;
pub const STANDARD_LEN: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    Standard,
    LongRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    /// `S01`.. for standard questions, `L01`.. for long-range ones.
    pub id: String,
    pub kind: QuestionKind,
    pub question: String,
    pub reference: String,
    /// First-pass timesteps (1-based) of the statements holding the latest truth.
    pub evidence: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalDataset {
    pub initial: Vec<String>,
    pub loop_statements: Vec<String>,
    pub standard: Vec<Question>,
    pub long_range: Vec<Question>,
}

/// Section, declared count, and (line number, text) entries.
type RawSection<'a> = (Section, usize, Vec<(usize, &'a str)>);

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Initial,
    Loop,
    Standard,
    LongRange,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Initial => "INITIAL",
            Section::Loop => "LOOP",
            Section::Standard => "STANDARD",
            Section::LongRange => "LONG_RANGE",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "INITIAL" => Section::Initial,
            "LOOP" => Section::Loop,
            "STANDARD" => Section::Standard,
            "LONG_RANGE" => Section::LongRange,
            _ => return None,
        })
    }
}

impl TemporalDataset {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_FIXTURE).expect("bundled fixture is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses the fixture format: `#` comments, blank lines ignored,
    /// `[SECTION] count` headers, one statement or tab-separated question per
    /// line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<RawSection> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let (name, count) = rest
                    .split_once(']')
                    .ok_or_else(|| Error::dataset("header", format!("line {}: unterminated header", i + 1)))?;
                let section = Section::parse(name.trim())
                    .ok_or_else(|| Error::dataset(name.trim(), format!("line {}: unknown section", i + 1)))?;
                if sections.iter().any(|(s, _, _)| *s == section) {
                    return Err(Error::dataset(section.name(), "section appears twice"));
                }
                let count = count.trim().parse().map_err(|_| {
                    Error::dataset(section.name(), format!("line {}: header needs a declared row count", i + 1))
                })?;
                sections.push((section, count, Vec::new()));
                continue;
            }
            let Some((_, _, rows)) = sections.last_mut() else {
                return Err(Error::dataset("header", format!("line {}: content before the first section", i + 1)));
            };
            rows.push((i + 1, line));
        }

        let mut take = |section: Section| -> Result<Vec<(usize, &str)>> {
            let idx = sections
                .iter()
                .position(|(s, _, _)| *s == section)
                .ok_or_else(|| Error::dataset(section.name(), "section missing"))?;
            let (_, declared, rows) = sections.swap_remove(idx);
            if rows.len() != declared {
                return Err(Error::dataset(
                    section.name(),
                    format!("declares {declared} rows but has {}", rows.len()),
                ));
            }
            Ok(rows)
        };

        let statements = |rows: Vec<(usize, &str)>| rows.into_iter().map(|(_, s)| s.trim().to_string()).collect();
        let initial: Vec<String> = statements(take(Section::Initial)?);
        let loop_statements: Vec<String> = statements(take(Section::Loop)?);
        let total = initial.len() + loop_statements.len();
        let standard = questions(take(Section::Standard)?, QuestionKind::Standard, total)?;
        let long_range = questions(take(Section::LongRange)?, QuestionKind::LongRange, total)?;

        let ds = Self { initial, loop_statements, standard, long_range };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        for (section, got, want) in [
            ("INITIAL", self.initial.len(), INITIAL_LEN),
            ("LOOP", self.loop_statements.len(), LOOP_LEN),
            ("STANDARD", self.standard.len(), STANDARD_LEN),
        ] {
            if got != want {
                return Err(Error::dataset(section, format!("expected {want} rows, found {got}")));
            }
        }
        Ok(())
    }

    /// The statement at first-pass timestep `t` (1-based).
    pub fn statement(&self, t: usize) -> Option<&str> {
        let i = t.checked_sub(1)?;
        self.initial
            .get(i)
            .or_else(|| self.loop_statements.get(i.checked_sub(self.initial.len())?))
            .map(String::as_str)
    }

    pub fn questions(&self) -> impl Iterator<Item = &Question> {
        self.standard.iter().chain(&self.long_range)
    }

    pub fn evidence_texts(&self, q: &Question) -> Vec<&str> {
        q.evidence.iter().filter_map(|t| self.statement(*t)).collect()
    }

    /// Knowledge updates performed by a run of `repetitions` loop passes.
    pub fn total_updates(&self, repetitions: usize) -> u64 {
        (self.initial.len() + repetitions * self.loop_statements.len()) as u64
    }
}

fn questions(rows: Vec<(usize, &str)>, kind: QuestionKind, total: usize) -> Result<Vec<Question>> {
    let section = match kind {
        QuestionKind::Standard => "STANDARD",
        QuestionKind::LongRange => "LONG_RANGE",
    };
    let prefix = match kind {
        QuestionKind::Standard => 'S',
        QuestionKind::LongRange => 'L',
    };
    rows.into_iter()
        .enumerate()
        .map(|(n, (line, row))| {
            let cols: Vec<&str> = row.split('\t').collect();
            let [question, reference, evidence] = cols[..] else {
                return Err(Error::dataset(section, format!("line {line}: expected 3 tab-separated columns")));
            };
            let evidence = evidence
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(t) if (1..=total).contains(&t) => Ok(t),
                    _ => Err(Error::dataset(section, format!("line {line}: bad evidence timestep {t:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if question.trim().is_empty() || reference.trim().is_empty() {
                return Err(Error::dataset(section, format!("line {line}: empty question or answer")));
            }
            Ok(Question {
                id: format!("{prefix}{:02}", n + 1),
                kind,
                question: question.trim().to_string(),
                reference: reference.trim().to_string(),
                evidence,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shape() {
        let d = TemporalDataset::bundled();
        assert_eq!((d.initial.len(), d.loop_statements.len(), d.standard.len()), (10, 62, 21));
        assert_eq!(d.long_range.len(), 11);
        assert_eq!(d.total_updates(25), 1560);
        assert_eq!(d.statement(72), Some("Brandon's favorite color is green."));
        assert_eq!(d.statement(1), Some("Brandon is South African."));
        assert_eq!(d.statement(73), None);
        assert_eq!(d.standard[17].id, "S18");
    }

    #[test]
    fn deleted_loop_row_names_section() {
        let broken = BUNDLED_FIXTURE.replacen("Brandon now works for Cisco.\n", "", 1);
        match TemporalDataset::parse(&broken) {
            Err(Error::Dataset { section, .. }) => assert_eq!(section, "LOOP"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_garbage_rejected() {
        assert!(TemporalDataset::parse("").is_err());
        assert!(TemporalDataset::parse("hello\n").is_err());
        assert!(TemporalDataset::parse("[NOPE] 1\nx\n").is_err());
    }

    #[test]
    fn declared_shape_enforced() {
        let small = "[INITIAL] 1\na.\n[LOOP] 1\nb.\n[STANDARD] 0\n[LONG_RANGE] 0\n";
        match TemporalDataset::parse(small) {
            Err(Error::Dataset { section, .. }) => assert_eq!(section, "INITIAL"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
