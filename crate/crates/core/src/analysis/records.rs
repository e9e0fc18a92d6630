//! Judgment records and the CSV they are read from.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HEADER: [&str; 4] = ["subject_id", "stimulus_id", "kind", "payload"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("TIPI item {index} is {value}, expected an integer in 1..=7")]
    ItemRange { index: usize, value: String },
    #[error("TIPI needs 10 items, got {0}")]
    ItemCount(usize),
    #[error("unknown why category `{0}`")]
    UnknownCategory(String),
    #[error("unknown preference `{0}`, expected A or NA")]
    UnknownChoice(String),
    #[error("unknown record kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: {source}")]
    Domain { line: u64, source: DomainError },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("header must be `{}`", HEADER.join(","))]
    Header,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Choice {
    #[serde(rename = "A")]
    Adapted,
    #[serde(rename = "NA")]
    NonAdapted,
}

impl FromStr for Choice {
    type Err = DomainError;
    fn from_str(s: &str) -> Result<Self, DomainError> {
        match s.trim() {
            "A" => Ok(Choice::Adapted),
            "NA" => Ok(Choice::NonAdapted),
            other => Err(DomainError::UnknownChoice(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhyCategory {
    AdaptedGoodGestures,
    NonadaptedGoodGestures,
    AdaptedAnimated,
    NonadaptedRealistic,
    Other,
}

impl WhyCategory {
    pub const ALL: [WhyCategory; 5] = [
        WhyCategory::AdaptedGoodGestures,
        WhyCategory::NonadaptedGoodGestures,
        WhyCategory::AdaptedAnimated,
        WhyCategory::NonadaptedRealistic,
        WhyCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WhyCategory::AdaptedGoodGestures => "adapted_good_gestures",
            WhyCategory::NonadaptedGoodGestures => "nonadapted_good_gestures",
            WhyCategory::AdaptedAnimated => "adapted_animated",
            WhyCategory::NonadaptedRealistic => "nonadapted_realistic",
            WhyCategory::Other => "other",
        }
    }
}

impl fmt::Display for WhyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WhyCategory {
    type Err = DomainError;
    fn from_str(s: &str) -> Result<Self, DomainError> {
        let s = s.trim();
        WhyCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| DomainError::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Judgment {
    Tipi([u8; 10]),
    Preference(Choice),
    Why(BTreeSet<WhyCategory>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JudgmentRecord {
    pub subject_id: String,
    pub stimulus_id: String,
    #[serde(flatten)]
    pub judgment: Judgment,
}

/// Parses `;`-separated TIPI items.
pub fn parse_tipi_items(payload: &str) -> Result<[u8; 10], DomainError> {
    let parts: Vec<&str> = payload.split(';').map(str::trim).collect();
    if parts.len() != 10 {
        return Err(DomainError::ItemCount(parts.len()));
    }
    let mut items = [0u8; 10];
    for (i, p) in parts.iter().enumerate() {
        items[i] = match p.parse::<u8>() {
            Ok(v @ 1..=7) => v,
            _ => {
                return Err(DomainError::ItemRange {
                    index: i + 1,
                    value: p.to_string(),
                })
            }
        };
    }
    Ok(items)
}

/// Parses `;`-separated why categories. An empty payload is an empty set.
pub fn parse_categories(payload: &str) -> Result<BTreeSet<WhyCategory>, DomainError> {
    payload
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(WhyCategory::from_str)
        .collect()
}

pub fn parse_judgment(kind: &str, payload: &str) -> Result<Judgment, DomainError> {
    match kind.trim() {
        "tipi" => parse_tipi_items(payload).map(Judgment::Tipi),
        "preference" => payload.parse().map(Judgment::Preference),
        "why" => parse_categories(payload).map(Judgment::Why),
        other => Err(DomainError::UnknownKind(other.to_string())),
    }
}

pub fn payload_text(j: &Judgment) -> String {
    match j {
        Judgment::Tipi(items) => items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";"),
        Judgment::Preference(Choice::Adapted) => "A".into(),
        Judgment::Preference(Choice::NonAdapted) => "NA".into(),
        Judgment::Why(set) => set.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(";"),
    }
}

#[derive(Deserialize)]
struct Row {
    subject_id: String,
    stimulus_id: String,
    kind: String,
    payload: String,
}

pub fn read_judgments<R: Read>(source: R) -> Result<Vec<JudgmentRecord>, ReadError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| ReadError::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.iter().ne(HEADER) {
        return Err(ReadError::Header);
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let csv_err = |e: csv::Error| ReadError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        };
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec.deserialize(Some(&header)).map_err(|e| ReadError::Csv {
            line,
            message: e.to_string(),
        })?;
        let judgment = parse_judgment(&row.kind, &row.payload)
            .map_err(|source| ReadError::Domain { line, source })?;
        out.push(JudgmentRecord {
            subject_id: row.subject_id,
            stimulus_id: row.stimulus_id,
            judgment,
        });
    }
    Ok(out)
}

pub fn write_judgments(records: &[JudgmentRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.subject_id.as_str(),
            &r.stimulus_id,
            match r.judgment {
                Judgment::Tipi(_) => "tipi",
                Judgment::Preference(_) => "preference",
                Judgment::Why(_) => "why",
            },
            &payload_text(&r.judgment),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_all_kinds() {
        let src = "subject_id,stimulus_id,kind,payload\n\
                   s1,Garden ABA,preference,A\n\
                   s1,Garden ABA,why,adapted_animated;other\n\
                   s2,Garden ABA,why,\n\
                   s3,storm/introvert/male,tipi,1;2;3;4;5;6;7;1;2;3\n";
        let rs = read_judgments(src.as_bytes()).unwrap();
        assert_eq!(rs.len(), 4);
        assert_eq!(rs[0].judgment, Judgment::Preference(Choice::Adapted));
        assert_eq!(
            rs[1].judgment,
            Judgment::Why([WhyCategory::AdaptedAnimated, WhyCategory::Other].into())
        );
        assert_eq!(rs[2].judgment, Judgment::Why(BTreeSet::new()));
        assert_eq!(rs[3].judgment, Judgment::Tipi([1, 2, 3, 4, 5, 6, 7, 1, 2, 3]));
        assert_eq!(read_judgments(write_judgments(&rs).as_bytes()).unwrap(), rs);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = "subject_id,stimulus_id,kind,payload\ns1,x,preference,A\ns2,x,tipi,1;2;3;4;5;6;7;8;1;1\n";
        match read_judgments(bad.as_bytes()) {
            Err(ReadError::Domain { line: 3, source: DomainError::ItemRange { index: 8, .. } }) => {}
            other => panic!("{other:?}"),
        }
        let bad = "subject_id,stimulus_id,kind,payload\ns1,x,why,boring\n";
        assert!(matches!(
            read_judgments(bad.as_bytes()),
            Err(ReadError::Domain { line: 2, source: DomainError::UnknownCategory(_) })
        ));
        assert!(matches!(read_judgments("a,b,c,d\n".as_bytes()), Err(ReadError::Header)));
        let short = "subject_id,stimulus_id,kind,payload\ns1,x,why\n";
        assert!(matches!(read_judgments(short.as_bytes()), Err(ReadError::Csv { line: 2, .. })));
    }
}
