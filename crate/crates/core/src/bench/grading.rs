//! Blind grading: shuffled sheets with opaque row ids, and a separate key
//! file mapping rows back to systems.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::runner::{RunRecord, SystemId};
use crate::error::{Error, Result};
use crate::num::Scalar;

/// Percentage `100·correct/total` rounded half-up to two decimals.
pub fn format_percent(correct: u64, total: u64) -> String {
    assert!(total > 0, "percentage of an empty set");
    let hundredths = (correct * 10_000 * 2 + total) / (2 * total);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetRow {
    pub row_id: String,
    pub question: String,
    pub reference: String,
    pub response: String,
    /// Filled in by the grader: `correct` or `incorrect`.
    pub grade: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRow {
    pub row_id: String,
    pub system: SystemId,
    pub checkpoint: usize,
    pub question_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub system: SystemId,
    pub checkpoint: usize,
    pub correct: u64,
    pub total: u64,
    /// Two-decimal percentage.
    pub percent: String,
}

/// Writes the grading sheet (CSV) and its key (JSON lines). Rows without an
/// answer are skipped. Returns the number of rows written.
pub fn export_blind_grading<F: Scalar>(
    records: &[RunRecord<F>],
    sheet_path: &Path,
    key_path: &Path,
    seed: u64,
) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = HashSet::new();
    let mut rows: Vec<(SheetRow, KeyRow)> = Vec::new();
    for rec in records {
        for q in &rec.questions {
            let Some(answer) = &q.answer else { continue };
            let row_id = loop {
                let id = format!("{:016x}", rng.random::<u64>());
                if used.insert(id.clone()) {
                    break id;
                }
            };
            rows.push((
                SheetRow {
                    row_id: row_id.clone(),
                    question: q.question.clone(),
                    reference: q.reference.clone(),
                    response: answer.clone(),
                    grade: String::new(),
                },
                KeyRow { row_id, system: rec.system, checkpoint: rec.checkpoint, question_id: q.question_id.clone() },
            ));
        }
    }
    rows.shuffle(&mut rng);

    let mut w = csv::Writer::from_path(sheet_path)?;
    for (sheet, _) in &rows {
        w.serialize(sheet)?;
    }
    w.flush().map_err(|e| Error::io(sheet_path, e))?;

    let mut key = String::new();
    let mut sorted: Vec<&KeyRow> = rows.iter().map(|(_, k)| k).collect();
    sorted.sort_by(|a, b| a.row_id.cmp(&b.row_id));
    for k in sorted {
        key.push_str(&serde_json::to_string(k)?);
        key.push('\n');
    }
    std::fs::write(key_path, key).map_err(|e| Error::io(key_path, e))?;
    Ok(rows.len())
}

fn parse_grade(row_id: &str, g: &str) -> Result<bool> {
    match g.trim().to_ascii_lowercase().as_str() {
        "correct" | "c" | "1" | "y" | "yes" | "true" => Ok(true),
        "incorrect" | "i" | "0" | "n" | "no" | "false" => Ok(false),
        other => Err(Error::Grading(format!("row {row_id}: unrecognized grade {other:?}"))),
    }
}

#[derive(Deserialize)]
struct GradeLine {
    row_id: String,
    grade: String,
}

/// Reads graded rows: a CSV sheet as exported, or JSON lines of
/// `{row_id, grade}` when the path ends in `.jsonl`.
pub fn read_grades(path: &Path) -> Result<Vec<(String, bool)>> {
    let is_jsonl = path.extension().is_some_and(|e| e == "jsonl");
    let mut out = Vec::new();
    if is_jsonl {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let g: GradeLine = serde_json::from_str(line)?;
            let ok = parse_grade(&g.row_id, &g.grade)?;
            out.push((g.row_id, ok));
        }
    } else {
        let mut r = csv::Reader::from_path(path)?;
        for row in r.deserialize() {
            let row: SheetRow = row?;
            let ok = parse_grade(&row.row_id, &row.grade)?;
            out.push((row.row_id, ok));
        }
    }
    Ok(out)
}

/// Joins grades with the key and reports accuracy per system and checkpoint.
pub fn import_grades(grades_path: &Path, key_path: &Path) -> Result<Vec<AccuracyRow>> {
    let key_text = std::fs::read_to_string(key_path).map_err(|e| Error::io(key_path, e))?;
    let mut key: BTreeMap<String, KeyRow> = BTreeMap::new();
    for line in key_text.lines().filter(|l| !l.trim().is_empty()) {
        let k: KeyRow = serde_json::from_str(line)?;
        key.insert(k.row_id.clone(), k);
    }
    let mut tally: BTreeMap<(SystemId, usize), (u64, u64)> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (row_id, ok) in read_grades(grades_path)? {
        let k = key.get(&row_id).ok_or_else(|| Error::Grading(format!("unknown row id {row_id}")))?;
        if !seen.insert(row_id.clone()) {
            return Err(Error::Grading(format!("row id {row_id} graded twice")));
        }
        let t = tally.entry((k.system, k.checkpoint)).or_default();
        t.0 += u64::from(ok);
        t.1 += 1;
    }
    Ok(tally
        .into_iter()
        .map(|((system, checkpoint), (correct, total))| AccuracyRow {
            system,
            checkpoint,
            correct,
            total,
            percent: format_percent(correct, total),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_rounding() {
        assert_eq!(format_percent(20, 21), "95.24");
        assert_eq!(format_percent(21, 21), "100.00");
        assert_eq!(format_percent(0, 21), "0.00");
        assert_eq!(format_percent(1, 8), "12.50");
        assert_eq!(format_percent(1, 3), "33.33");
        assert_eq!(format_percent(2, 3), "66.67");
    }

    #[test]
    fn grade_words() {
        assert!(parse_grade("x", " Correct ").unwrap());
        assert!(!parse_grade("x", "0").unwrap());
        assert!(parse_grade("x", "").is_err());
    }
}
