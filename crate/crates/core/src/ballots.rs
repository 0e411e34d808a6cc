//! Complete-ranking ballot files.
//!
//! ```text
//! # comment
//! n=3
//! 2 1 3,5
//! 1 2 3,2
//! ```
//!
//! Each data line lists the candidates from first to last place, then a comma and
//! a nonnegative count. Repeated rankings accumulate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::combinatorics::Permutation;
use crate::error::{Error, Result};
use crate::frame::Signal;
use crate::schreier::MAX_SIGNAL_N;

/// Parsed ballots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallotFile {
    pub n: usize,
    pub records: Vec<(Permutation, u64)>,
    pub label: Option<String>,
}

impl BallotFile {
    pub fn total(&self) -> u64 {
        self.records.iter().map(|r| r.1).sum()
    }
}

/// Parses ballot text.
pub fn parse_ballots(text: &str) -> Result<BallotFile> {
    let mut n: Option<usize> = None;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(size) = n else {
            let value = line
                .strip_prefix("n=")
                .or_else(|| line.strip_prefix("n ="))
                .ok_or_else(|| err(format!("expected header 'n=<N>', found '{line}'")))?;
            let size = value
                .trim()
                .parse::<usize>()
                .map_err(|_| err(format!("bad candidate count '{value}'")))?;
            if size == 0 || size > MAX_SIGNAL_N {
                return Err(err(format!("n must be between 1 and {MAX_SIGNAL_N}")));
            }
            n = Some(size);
            continue;
        };
        let (ranking, count) = line
            .rsplit_once(',')
            .ok_or_else(|| err(format!("expected '<ranking>,<count>', found '{line}'")))?;
        let count: i64 = count
            .trim()
            .parse()
            .map_err(|_| err(format!("bad count '{}'", count.trim())))?;
        if count < 0 {
            return Err(err(format!("negative count {count}")));
        }
        let word = ranking
            .split_whitespace()
            .map(|c| {
                c.parse::<u8>()
                    .map_err(|_| err(format!("bad candidate '{c}'")))
            })
            .collect::<Result<Vec<u8>>>()?;
        if word.len() != size {
            return Err(err(format!(
                "ranking has {} candidates but n = {size}; only complete rankings are supported",
                word.len()
            )));
        }
        let perm = Permutation::new(word).map_err(|e| err(e.to_string()))?;
        records.push((perm, count as u64));
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing header 'n=<N>'".into(),
    })?;
    Ok(BallotFile {
        n,
        records,
        label: None,
    })
}

/// Writes the text format read by [`parse_ballots`].
pub fn serialize_ballots(b: &BallotFile) -> String {
    let mut out = String::new();
    if let Some(label) = &b.label {
        let _ = writeln!(out, "# {label}");
    }
    let _ = writeln!(out, "n={}", b.n);
    for (p, c) in &b.records {
        let cands: Vec<String> = p.word().iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "{},{}", cands.join(" "), c);
    }
    out
}

/// `f(σ)` = number of ballots ranking exactly `σ`.
pub fn tally(b: &BallotFile) -> Signal {
    let mut f = Signal::zeros(b.n);
    for (p, c) in &b.records {
        f.values_mut()[p.lex_rank() as usize] += *c as f64;
    }
    f
}

/// Candidate display names from a JSON object such as `{"1": "Shrimp"}`.
pub fn parse_names(json: &str) -> Result<BTreeMap<usize, String>> {
    let raw: BTreeMap<String, String> = serde_json::from_str(json)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<usize>()
                .map(|k| (k, v))
                .map_err(|_| Error::Parse {
                    line: 0,
                    msg: format!("candidate key '{k}' is not an integer"),
                })
        })
        .collect()
}
