//! Everything `analyze` computes from one judgments file, as text or JSON.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::anova::{anova, AnovaTable, Model, Observation};
use super::records::{Judgment, JudgmentRecord, WhyCategory};
use super::tables::{preference_table, round1, why_category_table, PreferenceTable, WhyTable};
use super::tipi::{tipi_score, Trait};
use super::ttest::{one_sample_ttest, StatResult};

/// A TIPI stimulus id of the form `story/personality/gender`, naming the
/// rated agent's intended personality and gender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatedAgent<'a> {
    pub story: &'a str,
    pub personality: &'a str,
    pub gender: &'a str,
}

impl<'a> RatedAgent<'a> {
    pub fn parse(id: &'a str) -> Option<RatedAgent<'a>> {
        let mut it = id.split('/').map(str::trim);
        let (story, personality, gender) = (it.next()?, it.next()?, it.next()?);
        if it.next().is_some() || [story, personality, gender].iter().any(|s| s.is_empty()) {
            return None;
        }
        Some(RatedAgent {
            story,
            personality,
            gender,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraitTest {
    #[serde(rename = "trait")]
    pub trait_name: Trait,
    pub table: Option<AnovaTable>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersonalitySection {
    pub ratings: usize,
    /// Mean perceived extraversion by story, then intended personality.
    pub extraversion_means: BTreeMap<String, BTreeMap<String, f64>>,
    /// Extraversion by personality, gender and story; the other traits by
    /// story and personality.
    pub tests: Vec<TraitTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub records: usize,
    pub preferences: Option<PreferenceTable>,
    /// Per-version percentage preferring the adapted stimulus against 50.
    pub preference_ttest: Option<StatResult>,
    pub preference_ttest_error: Option<String>,
    pub why: Option<WhyTable>,
    pub personality: Option<PersonalitySection>,
    /// Mean trait scores for TIPI stimuli whose ids carry no factors.
    pub tipi_means: BTreeMap<String, BTreeMap<Trait, f64>>,
}

fn trait_test(trait_name: Trait, obs: &[Observation], model: &Model) -> TraitTest {
    match anova(obs, model) {
        Ok(t) => TraitTest {
            trait_name,
            table: Some(t),
            error: None,
        },
        Err(e) => TraitTest {
            trait_name,
            table: None,
            error: Some(e.to_string()),
        },
    }
}

fn personality_section(rated: &[(RatedAgent<'_>, [f64; 5])]) -> PersonalitySection {
    let mut sums: BTreeMap<String, BTreeMap<String, (f64, usize)>> = BTreeMap::new();
    for (a, s) in rated {
        let e = sums
            .entry(a.story.to_string())
            .or_default()
            .entry(a.personality.to_string())
            .or_default();
        e.0 += s[0];
        e.1 += 1;
    }
    let extraversion_means = sums
        .into_iter()
        .map(|(story, m)| (story, m.into_iter().map(|(p, (s, n))| (p, s / n as f64)).collect()))
        .collect();
    let three = Model::full_factorial(&["personality", "gender", "story"]);
    let two = Model::full_factorial(&["story", "personality"]);
    let tests = Trait::ALL
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let obs: Vec<Observation> = rated
                .iter()
                .map(|(a, s)| Observation {
                    levels: if i == 0 {
                        vec![a.personality.into(), a.gender.into(), a.story.into()]
                    } else {
                        vec![a.story.into(), a.personality.into()]
                    },
                    response: s[i],
                })
                .collect();
            trait_test(t, &obs, if i == 0 { &three } else { &two })
        })
        .collect();
    PersonalitySection {
        ratings: rated.len(),
        extraversion_means,
        tests,
    }
}

pub fn analyze(records: &[JudgmentRecord]) -> Report {
    let prefs = preference_table(records);
    let (preference_ttest, preference_ttest_error) = if prefs.rows.is_empty() {
        (None, None)
    } else {
        let pct: Vec<f64> = prefs.rows.iter().map(|r| r.pct_a).collect();
        match one_sample_ttest(&pct, 50.0) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let why = why_category_table(records);

    let mut rated = Vec::new();
    let mut plain: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let Judgment::Tipi(items) = &r.judgment else {
            continue;
        };
        let s = tipi_score(items).expect("items validated on read");
        let scores = Trait::ALL.map(|t| s.get(t));
        match RatedAgent::parse(&r.stimulus_id) {
            Some(a) => rated.push((a, scores)),
            None => {
                let e = plain
                    .entry(r.stimulus_id.clone())
                    .or_insert((vec![0.0; 5], 0));
                e.0.iter_mut().zip(scores).for_each(|(acc, v)| *acc += v);
                e.1 += 1;
            }
        }
    }
    let tipi_means = plain
        .into_iter()
        .map(|(id, (sums, n))| {
            let means = Trait::ALL
                .into_iter()
                .zip(sums)
                .map(|(t, s)| (t, s / n as f64))
                .collect();
            (id, means)
        })
        .collect();

    Report {
        records: records.len(),
        preferences: (!prefs.rows.is_empty()).then_some(prefs),
        preference_ttest,
        preference_ttest_error,
        why: (!why.rows.is_empty()).then_some(why),
        personality: (!rated.is_empty()).then(|| personality_section(&rated)),
        tipi_means,
    }
}

fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "<.001".into()
    } else {
        format!("{p:.3}")
    }
}

fn fmt_stat(r: &StatResult) -> String {
    let df: Vec<String> = r.df.iter().map(|d| format!("{d}")).collect();
    format!("{}({}) = {:.3}, p = {}", r.statistic, df.join(", "), r.value, fmt_p(r.p_value))
}

/// Pads columns to a common width; the first column is left-aligned.
fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i == 0 {
                    format!("{s:<w$}", w = widths[i])
                } else {
                    format!("{s:>w$}", w = widths[i])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn anova_text(out: &mut String, t: &AnovaTable) {
    let mut rows = vec![["term", "df", "sum_sq", "mean_sq", "F", "p"].map(String::from).to_vec()];
    for r in &t.rows {
        rows.push(vec![
            r.result.name.clone(),
            format!("{}", r.result.df[0]),
            format!("{:.4}", r.sum_sq),
            format!("{:.4}", r.mean_sq),
            format!("{:.3}", r.result.value),
            fmt_p(r.result.p_value),
        ]);
    }
    rows.push(vec![
        "residual".into(),
        t.residual_df.to_string(),
        format!("{:.4}", t.residual_sum_sq),
        format!("{:.4}", t.residual_sum_sq / t.residual_df as f64),
    ]);
    out.push_str(&aligned(&rows));
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records: {}", self.records);
        if let Some(p) = &self.preferences {
            out.push_str("\npreferences\n");
            let mut rows = vec![["version", "#A", "#NA", "%A", "%NA"].map(String::from).to_vec()];
            for r in p.rows.iter().chain(&p.total) {
                rows.push(vec![
                    r.version.clone(),
                    r.count_a.to_string(),
                    r.count_na.to_string(),
                    format!("{:.1}", round1(r.pct_a)),
                    format!("{:.1}", round1(r.pct_na)),
                ]);
            }
            out.push_str(&aligned(&rows));
        }
        if let Some(t) = &self.preference_ttest {
            let _ = writeln!(out, "%A against 50: {}", fmt_stat(t));
        }
        if let Some(e) = &self.preference_ttest_error {
            let _ = writeln!(out, "%A against 50: {e}");
        }
        if let Some(w) = &self.why {
            out.push_str("\nwhy categories (% of subjects)\n");
            let mut header = vec!["version".to_string(), "n".to_string()];
            header.extend(WhyCategory::ALL.iter().map(|c| c.to_string()));
            let mut rows = vec![header];
            for r in w.rows.iter().chain(&w.total) {
                let mut row = vec![r.version.clone(), r.subjects.to_string()];
                row.extend(r.percent.values().map(|p| format!("{:.1}", round1(*p))));
                rows.push(row);
            }
            out.push_str(&aligned(&rows));
        }
        if let Some(p) = &self.personality {
            let _ = writeln!(out, "\nperceived extraversion ({} ratings)", p.ratings);
            let levels: Vec<&String> = p
                .extraversion_means
                .values()
                .flat_map(|m| m.keys())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let mut header = vec!["story".to_string()];
            header.extend(levels.iter().map(|l| l.to_string()));
            let mut rows = vec![header];
            for (story, m) in &p.extraversion_means {
                let mut row = vec![story.clone()];
                row.extend(levels.iter().map(|l| m.get(*l).map_or("-".into(), |v| format!("{v:.2}"))));
                rows.push(row);
            }
            out.push_str(&aligned(&rows));
            for t in &p.tests {
                let _ = writeln!(out, "\nANOVA: {}", t.trait_name.as_str());
                if let Some(table) = &t.table {
                    anova_text(&mut out, table);
                }
                if let Some(e) = &t.error {
                    let _ = writeln!(out, "not computed: {e}");
                }
            }
        }
        if !self.tipi_means.is_empty() {
            out.push_str("\nTIPI means\n");
            let mut header = vec!["stimulus".to_string()];
            header.extend(Trait::ALL.iter().map(|t| t.as_str().to_string()));
            let mut rows = vec![header];
            for (id, m) in &self.tipi_means {
                let mut row = vec![id.clone()];
                row.extend(m.values().map(|v| format!("{v:.2}")));
                rows.push(row);
            }
            out.push_str(&aligned(&rows));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::records::read_judgments;

    #[test]
    fn rated_agent_ids() {
        assert_eq!(
            RatedAgent::parse("storm/introvert/male"),
            Some(RatedAgent {
                story: "storm",
                personality: "introvert",
                gender: "male"
            })
        );
        assert_eq!(RatedAgent::parse("self"), None);
        assert_eq!(RatedAgent::parse("a/b/c/d"), None);
        assert_eq!(RatedAgent::parse("a//c"), None);
    }

    #[test]
    fn tipi_report() {
        let mut csv = String::from("subject_id,stimulus_id,kind,payload\n");
        let mut n = 0;
        for story in ["garden", "storm"] {
            for (p, e) in [("introvert", 2), ("extravert", 6)] {
                for g in ["female", "male"] {
                    for rep in 0..3 {
                        n += 1;
                        let items = format!("{};4;4;4;4;{};4;4;4;4", e + rep % 2, 8 - e);
                        csv.push_str(&format!("s{n},{story}/{p}/{g},tipi,{items}\n"));
                        csv.push_str(&format!("s{n},self,tipi,4;4;4;4;4;4;4;4;4;4\n"));
                    }
                }
            }
        }
        let report = analyze(&read_judgments(csv.as_bytes()).unwrap());
        let p = report.personality.as_ref().unwrap();
        assert_eq!(p.ratings, 24);
        let ex = p.tests[0].table.as_ref().unwrap();
        assert!(ex.row("personality").unwrap().result.p_value < 1e-6);
        assert_eq!(ex.row("gender").unwrap().result.value, 0.0);
        assert!((p.extraversion_means["garden"]["introvert"] - 13.0 / 6.0).abs() < 1e-12);
        // the other traits are constant
        assert_eq!(p.tests[1].table.as_ref().unwrap().rows[0].result.value, 0.0);
        assert_eq!(report.tipi_means["self"][&Trait::Openness], 4.0);
        assert!(report.preferences.is_none());
        let text = report.to_text();
        assert!(text.contains("ANOVA: extraversion"), "{text}");
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["personality"]["ratings"], 24);
    }
}
