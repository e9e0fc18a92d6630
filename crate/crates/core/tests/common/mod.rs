//! Generators shared by the property and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gesturec_core::align::{WordTiming, WordTimingTrack};
use gesturec_core::catalog::{fixture_catalog, Hand, HandUsage};
use gesturec_core::dsl::{AnnotatedDialog, GestureAnnotation, Speaker, Turn, Variant};
use gesturec_core::features::FeatureModulation;
use gesturec_core::time::Millis;
use proptest::prelude::*;

pub fn data() -> PathBuf {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")).to_path_buf()
}

const HANDS: [Hand; 3] = [Hand::Left, Hand::Right, Hand::Both];

/// (name, hands the catalog permits)
pub fn gestures() -> Vec<(String, Vec<Hand>)> {
    fixture_catalog()
        .entries
        .values()
        .map(|g| {
            let hands = match g.hands {
                HandUsage::Any => HANDS.to_vec(),
                HandUsage::Only(h) => vec![h],
            };
            (g.name.clone(), hands)
        })
        .collect()
}

pub fn word() -> impl Strategy<Value = String> {
    "[A-Za-z][a-z']{0,6}[,.?!]?"
}

pub fn gesture_name() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,10}"
}

fn hand() -> impl Strategy<Value = Hand> {
    prop::sample::select(HANDS.to_vec())
}

fn variant() -> impl Strategy<Value = Variant> {
    (gesture_name(), hand(), 1i64..2500).prop_map(|(gesture, hand, ms)| Variant {
        gesture,
        hand,
        stroke_duration: Millis(ms),
    })
}

#[derive(Debug, Clone)]
struct RawAnnotation {
    slot: usize,
    gap: i64,
    primary: Variant,
    rate_added: bool,
    form_copied: bool,
    alternative: Option<Variant>,
}

fn raw_annotation() -> impl Strategy<Value = RawAnnotation> {
    (
        any::<usize>(),
        1i64..4000,
        variant(),
        any::<bool>(),
        any::<bool>(),
        prop::option::of(variant()),
    )
        .prop_map(|(slot, gap, primary, rate_added, form_copied, alternative)| RawAnnotation {
            slot,
            gap,
            primary,
            rate_added,
            form_copied,
            alternative,
        })
}

fn raw_turn() -> impl Strategy<Value = (Vec<String>, Vec<RawAnnotation>, i64)> {
    (
        prop::collection::vec(word(), 0..10),
        prop::collection::vec(raw_annotation(), 0..5),
        0i64..20_000,
    )
}

/// Any dialog the annotation format can express.
pub fn dialog() -> impl Strategy<Value = AnnotatedDialog> {
    (
        prop::option::of("[a-z][a-z0-9_-]{0,8}"),
        any::<bool>(),
        prop::collection::vec(raw_turn(), 1..6),
        prop::option::of(0i64..5000),
    )
        .prop_map(|(story, b_first, raw_turns, extra)| {
            let mut speaker = if b_first { Speaker::B } else { Speaker::A };
            let mut turns = Vec::new();
            let mut latest = Millis::ZERO;
            for (i, (words, mut raw, base)) in raw_turns.into_iter().enumerate() {
                for r in &mut raw {
                    r.slot %= words.len() + 1;
                }
                raw.sort_by_key(|r| r.slot);
                let mut t = Millis(base);
                let annotations = raw
                    .into_iter()
                    .map(|r| {
                        t = t + Millis(r.gap);
                        let ann = GestureAnnotation {
                            stroke_begin: t,
                            gesture: r.primary.gesture,
                            hand: r.primary.hand,
                            stroke_duration: r.primary.stroke_duration,
                            rate_added: r.rate_added,
                            form_copied: r.form_copied,
                            alternative: r.alternative,
                            word_index: r.slot,
                            modulation: FeatureModulation::default(),
                        };
                        let alt_end = ann
                            .alternative
                            .as_ref()
                            .map_or(Millis::ZERO, |v| ann.stroke_begin + v.stroke_duration);
                        latest = latest.max(ann.stroke_end()).max(alt_end);
                        ann
                    })
                    .collect();
                turns.push(Turn {
                    speaker,
                    index: i + 1,
                    words,
                    annotations,
                });
                speaker = speaker.other();
            }
            AnnotatedDialog {
                story_id: story.unwrap_or_default(),
                turns,
                audio_duration: extra.map(|e| latest + Millis(e)),
            }
        })
}

/// A dialog with one annotation per chosen word and a timing track that
/// covers every word.
pub fn aligned_pair() -> impl Strategy<Value = (AnnotatedDialog, WordTimingTrack)> {
    let turn = (
        prop::collection::vec((word(), 1i64..900, any::<bool>(), any::<bool>()), 1..12),
        0usize..4,
    );
    (prop::collection::vec(turn, 1..5), 0i64..400).prop_map(|(turns, start)| {
        let catalog = gestures();
        let mut clock = Millis(start);
        let mut entries = Vec::new();
        let mut out = Vec::new();
        let mut speaker = Speaker::A;
        for (ti, (words, pick)) in turns.into_iter().enumerate() {
            let mut annotations = Vec::new();
            for (wi, (w, gap, annotate, strip)) in words.iter().enumerate() {
                if wi > 0 || ti > 0 {
                    clock = clock + Millis(*gap);
                }
                let track_word = if *strip {
                    w.trim_end_matches([',', '.', '?', '!']).to_string()
                } else {
                    w.clone()
                };
                entries.push(WordTiming {
                    turn: ti + 1,
                    word: track_word,
                    onset: clock,
                });
                if *annotate {
                    let (name, hands) = &catalog[(wi + pick) % catalog.len()];
                    annotations.push(GestureAnnotation {
                        // placeholder times; alignment overwrites them
                        stroke_begin: Millis(annotations.len() as i64 * 10 + 1),
                        gesture: name.clone(),
                        hand: hands[pick % hands.len()],
                        stroke_duration: Millis(300),
                        rate_added: false,
                        form_copied: false,
                        alternative: None,
                        word_index: wi,
                        modulation: FeatureModulation::default(),
                    });
                }
            }
            out.push(Turn {
                speaker,
                index: ti + 1,
                words: words.into_iter().map(|w| w.0).collect(),
                annotations,
            });
            speaker = speaker.other();
        }
        let dialog = AnnotatedDialog {
            story_id: "gen".into(),
            turns: out,
            audio_duration: None,
        };
        (dialog, WordTimingTrack::new(entries).expect("generated track is ordered"))
    })
}

/// Gaps concentrated around the prep length and the hold threshold.
fn gap() -> impl Strategy<Value = i64> {
    prop_oneof![
        0i64..700,
        2300i64..2700,
        Just(300i64),
        Just(2499i64),
        Just(2500i64),
        0i64..6000,
    ]
}

/// A dialog whose strokes use catalog gestures with permitted hands.
pub fn schedulable_dialog() -> impl Strategy<Value = AnnotatedDialog> {
    let ann = (any::<prop::sample::Index>(), any::<usize>(), gap(), 50i64..1500);
    (
        prop::collection::vec(prop::collection::vec(ann, 1..7), 1..5),
        1i64..1000,
    )
        .prop_map(|(turns, start)| {
            let catalog = gestures();
            let mut clock = Millis(start);
            let mut speaker = Speaker::A;
            let mut out = Vec::new();
            for (ti, anns) in turns.into_iter().enumerate() {
                let mut annotations = Vec::new();
                for (k, (g, h, gap, dur)) in anns.into_iter().enumerate() {
                    if k > 0 || ti > 0 {
                        clock = clock + Millis(gap);
                    }
                    let (name, hands) = g.get(&catalog);
                    annotations.push(GestureAnnotation {
                        stroke_begin: clock,
                        gesture: name.clone(),
                        hand: hands[h % hands.len()],
                        stroke_duration: Millis(dur),
                        rate_added: false,
                        form_copied: false,
                        alternative: None,
                        word_index: k,
                        modulation: FeatureModulation::default(),
                    });
                    clock = clock + Millis(dur);
                }
                let words = (0..annotations.len()).map(|i| format!("w{i}")).collect();
                out.push(Turn {
                    speaker,
                    index: ti + 1,
                    words,
                    annotations,
                });
                speaker = speaker.other();
            }
            AnnotatedDialog {
                story_id: "gen".into(),
                turns: out,
                audio_duration: None,
            }
        })
}

fn catalog_variant(catalog: &[(String, Vec<Hand>)], g: &prop::sample::Index, h: usize, dur: i64) -> Variant {
    let (name, hands) = g.get(catalog);
    Variant {
        gesture: name.clone(),
        hand: hands[h % hands.len()],
        stroke_duration: Millis(dur),
    }
}

/// Dialogs over catalog gestures with copy, addition and alternative marks
/// and multi-sentence turns, ready for the personality and adaptation
/// transforms.
pub fn marked_dialog() -> impl Strategy<Value = AnnotatedDialog> {
    let word = ("[a-z]{1,6}", prop::sample::select(vec!["", "", "", ",", ".", "?", "!"]))
        .prop_map(|(w, p)| format!("{w}{p}"));
    let ann = (
        any::<usize>(),
        (any::<prop::sample::Index>(), any::<usize>(), 100i64..1200),
        prop::option::of((any::<prop::sample::Index>(), any::<usize>(), 100i64..1200)),
        any::<bool>(),
        any::<bool>(),
        200i64..3000,
    );
    let turn = (prop::collection::vec(word, 1..14), prop::collection::vec(ann, 0..6));
    (prop::collection::vec(turn, 1..6), any::<bool>()).prop_map(|(turns, b_first)| {
        let catalog = gestures();
        let mut clock = Millis(500);
        let mut speaker = if b_first { Speaker::B } else { Speaker::A };
        let mut out = Vec::new();
        for (ti, (words, mut anns)) in turns.into_iter().enumerate() {
            for a in &mut anns {
                a.0 %= words.len();
            }
            anns.sort_by_key(|a| a.0);
            let annotations = anns
                .into_iter()
                .map(|(slot, (g, h, d), alt, added, copied, gap)| {
                    clock = clock + Millis(gap);
                    let primary = catalog_variant(&catalog, &g, h, d);
                    GestureAnnotation {
                        stroke_begin: clock,
                        gesture: primary.gesture,
                        hand: primary.hand,
                        stroke_duration: primary.stroke_duration,
                        rate_added: added,
                        form_copied: copied,
                        alternative: alt.map(|(g, h, d)| catalog_variant(&catalog, &g, h, d)),
                        word_index: slot,
                        modulation: FeatureModulation::default(),
                    }
                })
                .collect();
            clock = clock + Millis(1500);
            out.push(Turn {
                speaker,
                index: ti + 1,
                words,
                annotations,
            });
            speaker = speaker.other();
        }
        AnnotatedDialog {
            story_id: "gen".into(),
            turns: out,
            audio_duration: None,
        }
    })
}

/// Largest count of annotations, other than additions, in any sentence.
pub fn max_per_sentence(d: &AnnotatedDialog) -> usize {
    d.turns
        .iter()
        .flat_map(|t| {
            gesturec_core::dsl::segment_sentences(t)
                .into_iter()
                .map(move |s| s.annotations.iter().filter(|&&i| !t.annotations[i].rate_added).count())
        })
        .max()
        .unwrap_or(0)
}
