//! Between-subjects factorial ANOVA with sequential (Type I) sums of
//! squares. On balanced data every ordering of terms gives the same table;
//! on unbalanced data each term is adjusted only for the terms listed before
//! it.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::special::f_upper_tail;
use super::ttest::{StatError, StatResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// One level per model factor, in factor order.
    pub levels: Vec<String>,
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub factors: Vec<String>,
    /// Each term is a sorted set of factor indices; one index is a main
    /// effect, more are an interaction.
    pub terms: Vec<Vec<usize>>,
}

impl Model {
    /// Every main effect and interaction, lower orders first.
    pub fn full_factorial(factors: &[&str]) -> Model {
        let k = factors.len();
        let mut terms: Vec<Vec<usize>> = (1u32..(1 << k))
            .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        terms.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        Model {
            factors: factors.iter().map(|f| f.to_string()).collect(),
            terms,
        }
    }

    pub fn term_name(&self, term: &[usize]) -> String {
        term.iter()
            .map(|&i| self.factors[i].as_str())
            .collect::<Vec<_>>()
            .join(":")
    }

    fn check(&self) -> Result<(), StatError> {
        let mut seen = HashSet::new();
        for t in &self.terms {
            if t.is_empty() || t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(StatError::Model(format!("term {t:?} is not a sorted set")));
            }
            if t.iter().any(|&i| i >= self.factors.len()) {
                return Err(StatError::Model(format!("term {t:?} names an unknown factor")));
            }
            if !seen.insert(t) {
                return Err(StatError::Model(format!("term {t:?} repeated")));
            }
        }
        if self.terms.is_empty() {
            return Err(StatError::Model("no terms".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub sum_sq: f64,
    pub mean_sq: f64,
    pub result: StatResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub residual_sum_sq: f64,
    pub residual_df: usize,
}

impl AnovaTable {
    pub fn results(&self) -> Vec<StatResult> {
        self.rows.iter().map(|r| r.result.clone()).collect()
    }

    pub fn row(&self, name: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.result.name == name)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthonormal basis grown by modified Gram-Schmidt.
struct Basis(Vec<Vec<f64>>);

impl Basis {
    /// Adds `v` if it is not in the span; returns the new unit vector.
    fn push(&mut self, mut v: Vec<f64>) -> Option<&[f64]> {
        let norm0 = dot(&v, &v).sqrt();
        if norm0 == 0.0 {
            return None;
        }
        for _ in 0..2 {
            for q in &self.0 {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-10 * norm0 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        self.0.push(v);
        self.0.last().map(|v| v.as_slice())
    }
}

fn check_cells(obs: &[Observation], levels: &[Vec<&str>]) -> Result<(), StatError> {
    let present: HashSet<Vec<&str>> = obs
        .iter()
        .map(|o| o.levels.iter().map(String::as_str).collect())
        .collect();
    let mut idx = vec![0usize; levels.len()];
    loop {
        let cell: Vec<&str> = idx.iter().zip(levels).map(|(&i, l)| l[i]).collect();
        if !present.contains(&cell) {
            return Err(StatError::EmptyCell(cell.join(", ")));
        }
        let mut f = 0;
        loop {
            if f == levels.len() {
                return Ok(());
            }
            idx[f] += 1;
            if idx[f] < levels[f].len() {
                break;
            }
            idx[f] = 0;
            f += 1;
        }
    }
}

pub fn anova(obs: &[Observation], model: &Model) -> Result<AnovaTable, StatError> {
    model.check()?;
    let k = model.factors.len();
    if let Some(o) = obs.iter().find(|o| o.levels.len() != k) {
        return Err(StatError::Model(format!(
            "observation has {} levels for {k} factors",
            o.levels.len()
        )));
    }
    if let Some(o) = obs.iter().find(|o| !o.response.is_finite()) {
        return Err(StatError::NonFinite(o.response));
    }
    let levels: Vec<Vec<&str>> = (0..k)
        .map(|f| {
            obs.iter()
                .map(|o| o.levels[f].as_str())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();
    for (f, l) in levels.iter().enumerate() {
        if l.len() < 2 {
            return Err(StatError::Levels(model.factors[f].clone()));
        }
    }
    check_cells(obs, &levels)?;

    let n = obs.len();
    let y: Vec<f64> = obs.iter().map(|o| o.response).collect();
    let yy = dot(&y, &y);
    let mut basis = Basis(Vec::new());
    let mut r = y.clone();
    {
        let q = basis.push(vec![1.0; n]).expect("non-empty data");
        let c = dot(q, &r);
        axpy(-c, q, &mut r);
    }
    let centered = dot(&r, &r);
    let constant = centered <= 1e-24 * yy;
    let negligible = |ss: f64| constant || ss <= 1e-12 * centered;

    let mut raw = Vec::with_capacity(model.terms.len());
    for term in &model.terms {
        // treatment coding: the first level of each factor is the reference
        let mut combos: Vec<Vec<&str>> = vec![Vec::new()];
        for &f in term {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    levels[f][1..].iter().map(move |l| {
                        let mut c = c.clone();
                        c.push(*l);
                        c
                    })
                })
                .collect();
        }
        let mut ss = 0.0;
        let mut df = 0usize;
        for combo in combos {
            let col: Vec<f64> = obs
                .iter()
                .map(|o| {
                    let hit = term.iter().zip(&combo).all(|(&f, l)| o.levels[f] == *l);
                    if hit { 1.0 } else { 0.0 }
                })
                .collect();
            if let Some(q) = basis.push(col) {
                let c = dot(q, &r);
                axpy(-c, q, &mut r);
                ss += c * c;
                df += 1;
            }
        }
        if df == 0 {
            return Err(StatError::Model(format!(
                "term {} is aliased with earlier terms",
                model.term_name(term)
            )));
        }
        raw.push((model.term_name(term), if negligible(ss) { 0.0 } else { ss }, df));
    }
    let residual_df = n - basis.0.len();
    if residual_df == 0 {
        return Err(StatError::NoResidual);
    }
    let res = dot(&r, &r);
    let residual_sum_sq = if negligible(res) { 0.0 } else { res };
    let ms_res = residual_sum_sq / residual_df as f64;
    let rows = raw
        .into_iter()
        .map(|(name, sum_sq, df)| {
            let mean_sq = sum_sq / df as f64;
            let f = if sum_sq == 0.0 {
                0.0
            } else if ms_res == 0.0 {
                f64::INFINITY
            } else {
                mean_sq / ms_res
            };
            AnovaRow {
                sum_sq,
                mean_sq,
                result: StatResult {
                    name,
                    statistic: "F".into(),
                    value: f,
                    df: vec![df as f64, residual_df as f64],
                    p_value: f_upper_tail(f, df as f64, residual_df as f64),
                },
            }
        })
        .collect();
    Ok(AnovaTable {
        rows,
        residual_sum_sq,
        residual_df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(levels: &[&str], response: f64) -> Observation {
        Observation {
            levels: levels.iter().map(|s| s.to_string()).collect(),
            response,
        }
    }

    fn two_by_two(f: impl Fn(usize, usize, usize) -> f64) -> Vec<Observation> {
        let mut v = Vec::new();
        for (i, a) in ["a1", "a2"].iter().enumerate() {
            for (j, b) in ["b1", "b2"].iter().enumerate() {
                for rep in 0..3 {
                    v.push(obs(&[a, b], f(i, j, rep)));
                }
            }
        }
        v
    }

    #[test]
    fn pure_main_effect() {
        let m = Model::full_factorial(&["a", "b"]);
        let t = anova(&two_by_two(|i, _, _| 3.0 * i as f64 + 0.1), &m).unwrap();
        assert_eq!(t.row("b").unwrap().result.value, 0.0);
        assert_eq!(t.row("a:b").unwrap().result.value, 0.0);
        assert_eq!(t.row("b").unwrap().result.p_value, 1.0);
        assert!(t.row("a").unwrap().result.value.is_infinite());
        assert_eq!(t.residual_df, 8);
    }

    #[test]
    fn constant_response() {
        let m = Model::full_factorial(&["a", "b"]);
        let t = anova(&two_by_two(|_, _, _| 0.1 * 3.0), &m).unwrap();
        for r in &t.rows {
            assert_eq!(r.result.value, 0.0, "{}", r.result.name);
        }
    }

    #[test]
    fn model_errors() {
        let m = Model::full_factorial(&["a", "b"]);
        let mut data = two_by_two(|i, j, k| (i + j + k) as f64);
        data.retain(|o| o.levels != ["a2", "b2"]);
        assert_eq!(anova(&data, &m).unwrap_err(), StatError::EmptyCell("a2, b2".into()));
        let one = vec![obs(&["x", "y"], 1.0), obs(&["x", "z"], 2.0)];
        assert_eq!(anova(&one, &m).unwrap_err(), StatError::Levels("a".into()));
        let bad = Model {
            factors: vec!["a".into()],
            terms: vec![vec![1]],
        };
        assert!(matches!(anova(&[], &bad), Err(StatError::Model(_))));
        let unrep = two_by_two(|i, j, k| if k == 0 { (i * 2 + j) as f64 } else { f64::NAN });
        let unrep: Vec<_> = unrep.into_iter().filter(|o| o.response.is_finite()).collect();
        assert_eq!(anova(&unrep, &m).unwrap_err(), StatError::NoResidual);
    }

    #[test]
    fn term_order() {
        let m = Model::full_factorial(&["p", "g", "s"]);
        let names: Vec<_> = m.terms.iter().map(|t| m.term_name(t)).collect();
        assert_eq!(names, ["p", "g", "s", "p:g", "p:s", "g:s", "p:g:s"]);
    }
}
