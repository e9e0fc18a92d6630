use std::path::Path;

use gesturec_core::analysis::special::{f_upper_tail, student_t_two_tailed};
use gesturec_core::analysis::tables::round1;
use gesturec_core::analysis::*;
use proptest::prelude::*;

fn fixture() -> Vec<JudgmentRecord> {
    let p = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/judgments/adaptation.csv"));
    read_judgments(std::fs::File::open(p).unwrap()).unwrap()
}

/// Composite Simpson over [a, b].
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Two-tailed t tail by integrating the density after s = sqrt(df) tan(theta),
/// normalized by the same integral over the whole range.
fn t_oracle(t: f64, df: f64) -> f64 {
    let g = |th: f64| th.cos().powf(df - 1.0);
    let half = std::f64::consts::FRAC_PI_2;
    let th0 = (t.abs() / df.sqrt()).atan();
    simpson(g, th0, half, 40_000) / simpson(g, 0.0, half, 40_000)
}

/// F upper tail through the beta variable x = sin^2(phi).
fn f_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let g = |ph: f64| ph.sin().powf(d1 - 1.0) * ph.cos().powf(d2 - 1.0);
    let half = std::f64::consts::FRAC_PI_2;
    let x0 = d1 * f / (d1 * f + d2);
    let ph0 = x0.sqrt().asin();
    simpson(g, ph0, half, 40_000) / simpson(g, 0.0, half, 40_000)
}

#[test]
fn tails_match_quadrature() {
    for &df in &[1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 30.0, 60.0, 120.0, 200.0] {
        for &t in &[0.0, 0.3, 1.0, 2.147, 3.5, 6.0] {
            let (got, want) = (student_t_two_tailed(t, df), t_oracle(t, df));
            assert!((got - want).abs() < 1e-8, "t={t} df={df}: {got} vs {want}");
        }
    }
    for &(d1, d2) in &[(1.0, 1.0), (1.0, 7.0), (2.0, 10.0), (3.0, 64.0), (1.0, 200.0), (7.0, 150.0), (3.0, 3.0)] {
        for &f in &[0.1, 0.9, 2.3, 7.5, 20.0] {
            let (got, want) = (f_upper_tail(f, d1, d2), f_oracle(f, d1, d2));
            assert!((got - want).abs() < 1e-8, "F={f} d=({d1},{d2}): {got} vs {want}");
        }
    }
}

/// Published key: (1-based item, reverse-scored) per trait, in the order
/// extraversion, agreeableness, conscientiousness, emotional stability,
/// openness.
const KEY: [[(usize, bool); 2]; 5] = [
    [(1, false), (6, true)],
    [(2, true), (7, false)],
    [(3, false), (8, true)],
    [(4, true), (9, false)],
    [(5, false), (10, true)],
];

fn tipi_oracle(items: &[u8; 10]) -> [f64; 5] {
    KEY.map(|pair| {
        pair.iter()
            .map(|&(i, rev)| {
                let v = items[i - 1] as f64;
                if rev { 8.0 - v } else { v }
            })
            .sum::<f64>()
            / 2.0
    })
}

proptest! {
    #[test]
    fn tipi_matches_key(items in prop::array::uniform10(1u8..=7)) {
        let s = tipi_score(&items).unwrap();
        let want = tipi_oracle(&items);
        for (t, w) in Trait::ALL.into_iter().zip(want) {
            prop_assert_eq!(s.get(t), w);
            prop_assert!((1.0..=7.0).contains(&s.get(t)));
        }
    }

    #[test]
    fn tipi_complement(items in prop::array::uniform10(1u8..=7)) {
        let comp = items.map(|v| 8 - v);
        let e = tipi_score(&items).unwrap().extraversion;
        prop_assert_eq!(tipi_score(&comp).unwrap().extraversion, 8.0 - e);
    }

    #[test]
    fn ttest_sign_symmetry(
        values in prop::collection::vec(-100.0f64..100.0, 2..30),
        mu in -50.0f64..50.0,
    ) {
        let Ok(a) = one_sample_ttest(&values, mu) else { return Ok(()) };
        let mirrored: Vec<f64> = values.iter().map(|v| 2.0 * mu - v).collect();
        let b = one_sample_ttest(&mirrored, mu).unwrap();
        prop_assert!((a.value + b.value).abs() <= 1e-9 * a.value.abs().max(1.0));
        prop_assert!((a.p_value - b.p_value).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn ttest_scale_invariance(
        values in prop::collection::vec(-100.0f64..100.0, 2..30),
        mu in -50.0f64..50.0,
        c in 0.01f64..100.0,
    ) {
        let Ok(a) = one_sample_ttest(&values, mu) else { return Ok(()) };
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let b = one_sample_ttest(&scaled, mu * c).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-8 * a.value.abs().max(1.0));
        prop_assert!((a.p_value - b.p_value).abs() < 1e-9);
        prop_assert_eq!(a.df, b.df);
    }

    #[test]
    fn anova_label_permutation(
        ys in prop::collection::vec(-10.0f64..10.0, 48),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        let levels = ["s0", "s1", "s2"];
        let build = |relabel: &dyn Fn(usize) -> usize| -> Vec<Observation> {
            ys.iter().enumerate().map(|(i, &y)| Observation {
                levels: vec![
                    ["p0", "p1"][i % 2].into(),
                    ["g0", "g1"][(i / 2) % 2].into(),
                    levels[relabel((i / 4) % 3)].into(),
                ],
                response: y,
            }).collect()
        };
        let model = Model::full_factorial(&["p", "g", "s"]);
        let a = anova(&build(&|s| s), &model).unwrap();
        let b = anova(&build(&|s| perm[s]), &model).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let (fa, fb) = (ra.result.value, rb.result.value);
            prop_assert!((fa - fb).abs() <= 1e-9 * fa.abs().max(1e-12), "{} {} {}", ra.result.name, fa, fb);
        }
    }
}

#[test]
fn preference_fixture() {
    let t = preference_table(&fixture());
    let got: Vec<(&str, usize, usize)> =
        t.rows.iter().map(|r| (r.version.as_str(), r.count_a, r.count_na)).collect();
    assert_eq!(
        got,
        [
            ("Garden ABA", 11, 9),
            ("Garden ABAB", 20, 2),
            ("Pet ABABA", 10, 13),
            ("Pet ABABAB", 19, 5),
            ("Protest ABAB", 8, 11),
            ("Protest ABABA", 11, 11),
            ("Storm ABABA", 16, 4),
            ("Storm ABABAB", 14, 5),
        ]
    );
    let total = t.total.unwrap();
    assert_eq!((total.count_a, total.count_na), (109, 60));
    assert_eq!(round1(total.pct_a), 64.5);
    assert_eq!((total.pct_a.round(), total.pct_na.round()), (64.0, 36.0));
    assert_eq!((round1(t.rows[1].pct_a), round1(t.rows[1].pct_na)), (90.9, 9.1));
}

#[test]
fn preference_ttest_fixture() {
    let t = preference_table(&fixture());
    let pct: Vec<f64> = t.rows.iter().map(|r| r.pct_a).collect();
    let r = one_sample_ttest(&pct, 50.0).unwrap();
    assert!((r.value - 2.147).abs() < 5e-4, "{}", r.value);
    assert_eq!(r.df, vec![7.0]);
    assert!((r.p_value - 0.069).abs() < 1e-3, "{}", r.p_value);
}

#[test]
fn why_fixture() {
    use WhyCategory::*;
    let table = why_category_table(&fixture());
    // %A good, %NA good, %A animated, %NA realistic
    let want: [(&str, [f64; 4]); 9] = [
        ("Garden ABA", [30.0, 30.0, 20.0, 30.0]),
        ("Garden ABAB", [41.0, 9.0, 59.0, 0.0]),
        ("Pet ABABA", [22.0, 43.0, 13.0, 9.0]),
        ("Pet ABABAB", [54.0, 13.0, 33.0, 0.0]),
        ("Protest ABAB", [21.0, 32.0, 26.0, 0.0]),
        ("Protest ABABA", [27.0, 32.0, 23.0, 9.0]),
        ("Storm ABABA", [20.0, 15.0, 45.0, 0.0]),
        ("Storm ABABAB", [32.0, 21.0, 47.0, 0.0]),
        ("Total", [31.0, 24.0, 33.0, 6.0]),
    ];
    let rows: Vec<&WhyRow> = table.rows.iter().chain(&table.total).collect();
    assert_eq!(rows.len(), want.len());
    for (row, (version, pcts)) in rows.iter().zip(want) {
        assert_eq!(row.version, version);
        let cats = [AdaptedGoodGestures, NonadaptedGoodGestures, AdaptedAnimated, NonadaptedRealistic];
        for (c, w) in cats.into_iter().zip(pcts) {
            let got = row.percent[&c];
            assert!((got - w).abs() <= 1.0, "{version} {c}: {got} vs {w}");
        }
    }
}
