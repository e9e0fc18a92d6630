//! Per-version preference counts and why-category percentages.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::records::{Choice, Judgment, JudgmentRecord, WhyCategory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceRow {
    pub version: String,
    pub count_a: usize,
    pub count_na: usize,
    /// Unrounded.
    pub pct_a: f64,
    pub pct_na: f64,
}

impl PreferenceRow {
    fn new(version: String, count_a: usize, count_na: usize) -> PreferenceRow {
        let n = (count_a + count_na) as f64;
        PreferenceRow {
            version,
            count_a,
            count_na,
            pct_a: 100.0 * count_a as f64 / n,
            pct_na: 100.0 * count_na as f64 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceTable {
    pub rows: Vec<PreferenceRow>,
    pub total: Option<PreferenceRow>,
}

/// Rounds a percentage to one decimal place.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Counts preference records by stimulus. Other record kinds are ignored.
pub fn preference_table(records: &[JudgmentRecord]) -> PreferenceTable {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in records {
        if let Judgment::Preference(c) = r.judgment {
            let e = counts.entry(&r.stimulus_id).or_default();
            match c {
                Choice::Adapted => e.0 += 1,
                Choice::NonAdapted => e.1 += 1,
            }
        }
    }
    let rows: Vec<PreferenceRow> = counts
        .into_iter()
        .map(|(v, (a, na))| PreferenceRow::new(v.to_string(), a, na))
        .collect();
    let total = (!rows.is_empty()).then(|| {
        let a = rows.iter().map(|r| r.count_a).sum();
        let na = rows.iter().map(|r| r.count_na).sum();
        PreferenceRow::new("Total".into(), a, na)
    });
    PreferenceTable { rows, total }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhyRow {
    pub version: String,
    pub subjects: usize,
    /// Unrounded percentage of subjects mentioning each category.
    pub percent: BTreeMap<WhyCategory, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhyTable {
    pub rows: Vec<WhyRow>,
    pub total: Option<WhyRow>,
}

fn why_row(version: String, subjects: &[&BTreeSet<WhyCategory>]) -> WhyRow {
    let n = subjects.len() as f64;
    let percent = WhyCategory::ALL
        .into_iter()
        .map(|c| {
            let k = subjects.iter().filter(|s| s.contains(&c)).count();
            (c, 100.0 * k as f64 / n)
        })
        .collect();
    WhyRow {
        version,
        subjects: subjects.len(),
        percent,
    }
}

/// Share of subjects per stimulus whose answers fall in each category. A
/// subject's categories for one stimulus are the union of their why records.
pub fn why_category_table(records: &[JudgmentRecord]) -> WhyTable {
    let mut by_version: BTreeMap<&str, BTreeMap<&str, BTreeSet<WhyCategory>>> = BTreeMap::new();
    for r in records {
        if let Judgment::Why(set) = &r.judgment {
            by_version
                .entry(&r.stimulus_id)
                .or_default()
                .entry(&r.subject_id)
                .or_default()
                .extend(set.iter().copied());
        }
    }
    let mut all = Vec::new();
    let rows: Vec<WhyRow> = by_version
        .iter()
        .map(|(v, subjects)| {
            let sets: Vec<_> = subjects.values().collect();
            all.extend(sets.iter().copied());
            why_row(v.to_string(), &sets)
        })
        .collect();
    let total = (!rows.is_empty()).then(|| why_row("Total".into(), &all));
    WhyTable { rows, total }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(subject: &str, stimulus: &str, judgment: Judgment) -> JudgmentRecord {
        JudgmentRecord {
            subject_id: subject.into(),
            stimulus_id: stimulus.into(),
            judgment,
        }
    }

    #[test]
    fn empty_input_has_no_totals() {
        assert_eq!(preference_table(&[]).total, None);
        assert!(preference_table(&[]).rows.is_empty());
        assert_eq!(why_category_table(&[]).total, None);
    }

    #[test]
    fn subjects_count_once_per_category() {
        use WhyCategory::*;
        let rs = vec![
            rec("s1", "v", Judgment::Why([AdaptedAnimated, AdaptedGoodGestures].into())),
            rec("s2", "v", Judgment::Why(BTreeSet::new())),
            rec("s1", "v", Judgment::Why([AdaptedAnimated].into())),
            rec("s3", "v", Judgment::Preference(Choice::Adapted)),
        ];
        let t = why_category_table(&rs);
        let row = &t.rows[0];
        assert_eq!(row.subjects, 2);
        assert_eq!(row.percent[&AdaptedAnimated], 50.0);
        assert_eq!(row.percent[&AdaptedGoodGestures], 50.0);
        assert_eq!(row.percent[&Other], 0.0);
    }

    #[test]
    fn percentages_from_counts() {
        let mut rs = Vec::new();
        for i in 0..22 {
            let c = if i < 20 { Choice::Adapted } else { Choice::NonAdapted };
            rs.push(rec(&format!("s{i}"), "Garden ABAB", Judgment::Preference(c)));
        }
        let t = preference_table(&rs);
        assert_eq!((t.rows[0].count_a, t.rows[0].count_na), (20, 2));
        assert_eq!(round1(t.rows[0].pct_a), 90.9);
        assert_eq!(round1(t.rows[0].pct_na), 9.1);
    }
}
