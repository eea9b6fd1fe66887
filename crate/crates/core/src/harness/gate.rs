use std::path::Path;

use super::create_dir;
use crate::error::{Error, Result};
use crate::losses::{gate_unlabeled_pool, PoolPartition};

#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    pub ids: Vec<String>,
    pub scores: Vec<f64>,
    pub partition: PoolPartition,
}

impl GateOutcome {
    pub fn labeled(&self) -> Vec<&str> {
        self.partition.high.iter().map(|&i| self.ids[i].as_str()).collect()
    }

    pub fn unlabeled(&self) -> Vec<&str> {
        self.partition.low.iter().map(|&i| self.ids[i].as_str()).collect()
    }
}

/// Parses `id,score` rows. A leading `id,score` header is skipped; scores
/// must be finite and within [0, 1].
pub fn read_scores(text: &str) -> Result<(Vec<String>, Vec<f64>)> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut ids = Vec::new();
    let mut scores = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.len() != 2 {
            return Err(Error::MalformedScores(format!(
                "line {line}: expected `id,score`, got {} fields",
                record.len()
            )));
        }
        if i == 0 && &record[0] == "id" && &record[1] == "score" {
            continue;
        }
        let score: f64 = record[1]
            .parse()
            .map_err(|_| Error::MalformedScores(format!("line {line}: `{}` is not a number", &record[1])))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::MalformedScores(format!("line {line}: score {score} outside [0, 1]")));
        }
        ids.push(record[0].to_string());
        scores.push(score);
    }
    Ok((ids, scores))
}

/// Splits a scored pool at `threshold` and writes `labeled.txt` and
/// `unlabeled.txt` (one id per line) into `out`.
pub fn run_gate_pool(scores_csv: &Path, threshold: f64, out: &Path) -> Result<GateOutcome> {
    if !threshold.is_finite() {
        return Err(Error::InvalidConfig("gate threshold must be finite".into()));
    }
    let text = std::fs::read_to_string(scores_csv).map_err(Error::io(scores_csv))?;
    let (ids, scores) = read_scores(&text)?;
    let partition = gate_unlabeled_pool(&scores, threshold);
    let outcome = GateOutcome { ids, scores, partition };

    create_dir(out)?;
    for (name, list) in [("labeled.txt", outcome.labeled()), ("unlabeled.txt", outcome.unlabeled())] {
        let path = out.join(name);
        let body: String = list.iter().map(|id| format!("{id}\n")).collect();
        std::fs::write(&path, body).map_err(Error::io(&path))?;
    }
    Ok(outcome)
}
