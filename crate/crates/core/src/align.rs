//! Word timing tracks and the stroke-lead rule.
//!
//! A track lists one tab-separated entry per word token of every turn:
//!
//! ```text
//! 1   Hey   2.10
//! 1   do    2.42
//! ```
//!
//! Alignment moves each stroke to `lead` seconds before the onset of the
//! word the annotation precedes in the text.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{bucket_by_position, AnnotatedDialog, Sentence, Turn};
use crate::time::Millis;

pub const DEFAULT_LEAD: Millis = Millis(200);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordTiming {
    pub turn: usize,
    pub word: String,
    pub onset: Millis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordTimingTrack {
    entries: Vec<WordTiming>,
    turns: BTreeMap<usize, Range<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimingError {
    #[error("timing track has no entries")]
    Empty,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: onset {onset} is not after the previous word")]
    Order { line: usize, onset: Millis },
}

impl WordTimingTrack {
    pub fn new(entries: Vec<WordTiming>) -> Result<Self, TimingError> {
        if entries.is_empty() {
            return Err(TimingError::Empty);
        }
        let mut turns: BTreeMap<usize, Range<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.turn == 0 {
                return Err(TimingError::Format {
                    line: i + 1,
                    message: "turn index must be at least 1".into(),
                });
            }
            if let Some(prev) = i.checked_sub(1).map(|j| &entries[j]) {
                let same_turn = prev.turn == e.turn;
                if e.turn < prev.turn
                    || (same_turn && e.onset <= prev.onset)
                    || e.onset < prev.onset
                {
                    return Err(TimingError::Order {
                        line: i + 1,
                        onset: e.onset,
                    });
                }
                if !same_turn && turns.contains_key(&e.turn) {
                    return Err(TimingError::Order {
                        line: i + 1,
                        onset: e.onset,
                    });
                }
            }
            turns.entry(e.turn).or_insert(i..i).end = i + 1;
        }
        Ok(WordTimingTrack { entries, turns })
    }

    pub fn entries(&self) -> &[WordTiming] {
        &self.entries
    }

    pub fn turn(&self, index: usize) -> Option<&[WordTiming]> {
        self.turns.get(&index).map(|r| &self.entries[r.clone()])
    }

    /// Onset of the first word of `index`, if the track covers that turn.
    pub fn turn_start(&self, index: usize) -> Option<Millis> {
        self.turn(index).and_then(|w| w.first()).map(|w| w.onset)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.turn, e.word, e.onset.to_compact_secs()));
        }
        out
    }
}

pub fn parse_word_timings(source: &str) -> Result<WordTimingTrack, TimingError> {
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
        let err = |message: &str| TimingError::Format {
            line,
            message: message.to_string(),
        };
        if fields.len() != 3 {
            return Err(err("expected turn, word and onset separated by tabs"));
        }
        let turn = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| err("bad turn index"))?;
        let word = fields[1].trim();
        if word.is_empty() {
            return Err(err("empty word"));
        }
        let onset = Millis::parse_secs(fields[2].trim()).ok_or_else(|| err("bad onset"))?;
        entries.push(WordTiming {
            turn,
            word: word.to_string(),
            onset,
        });
        lines.push(line);
    }
    // Report source line numbers rather than entry positions.
    WordTimingTrack::new(entries).map_err(|e| match e {
        TimingError::Order { line, onset } => TimingError::Order {
            line: lines[line - 1],
            onset,
        },
        TimingError::Format { line, message } => TimingError::Format {
            line: lines[line - 1],
            message,
        },
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("timing track has no words for turn {0}")]
    MissingTurn(usize),
    #[error("turn {turn} has {words} words but the track lists {entries}")]
    WordCount {
        turn: usize,
        words: usize,
        entries: usize,
    },
    #[error("turn {turn}, word {position}: text `{text}` does not match track word `{track}`")]
    WordMismatch {
        turn: usize,
        position: usize,
        text: String,
        track: String,
    },
    #[error("turn {turn}: annotation {annotation} closes the turn and has no following word")]
    NoFollowingWord { turn: usize, annotation: usize },
    #[error("turn {turn}: annotations {first} and {second} align to the same time or out of order")]
    Collision {
        turn: usize,
        first: usize,
        second: usize,
    },
}

/// Strips leading and trailing punctuation from a word token.
pub fn normalize_word(word: &str) -> &str {
    let core = word.trim_matches(|c: char| !(c.is_alphanumeric() || c == '_'));
    if core.is_empty() {
        word
    } else {
        core
    }
}

/// Returns a dialog whose stroke times sit exactly `lead` before the onset
/// of their following word, clamped at zero.
pub fn align_strokes(
    dialog: &AnnotatedDialog,
    track: &WordTimingTrack,
    lead: Millis,
) -> Result<AnnotatedDialog, AlignError> {
    let mut out = dialog.clone();
    for turn in &mut out.turns {
        let words = match track.turn(turn.index) {
            Some(w) => w,
            None if turn.annotations.is_empty() => continue,
            None => return Err(AlignError::MissingTurn(turn.index)),
        };
        if words.len() != turn.words.len() {
            return Err(AlignError::WordCount {
                turn: turn.index,
                words: turn.words.len(),
                entries: words.len(),
            });
        }
        for (position, (text, timing)) in turn.words.iter().zip(words).enumerate() {
            if normalize_word(text) != normalize_word(&timing.word) {
                return Err(AlignError::WordMismatch {
                    turn: turn.index,
                    position,
                    text: text.clone(),
                    track: timing.word.clone(),
                });
            }
        }
        for (i, ann) in turn.annotations.iter_mut().enumerate() {
            let following = words.get(ann.word_index).ok_or(AlignError::NoFollowingWord {
                turn: turn.index,
                annotation: i,
            })?;
            ann.stroke_begin = (following.onset - lead).max(Millis::ZERO);
        }
        for (i, pair) in turn.annotations.windows(2).enumerate() {
            if pair[1].stroke_begin <= pair[0].stroke_begin {
                return Err(AlignError::Collision {
                    turn: turn.index,
                    first: i,
                    second: i + 1,
                });
            }
        }
    }
    Ok(out)
}

/// Sentence split of a turn where each annotation belongs to the sentence of
/// the first word whose onset is after its stroke time.
pub fn segment_sentences_timed(turn: &Turn, track: &WordTimingTrack) -> Vec<Sentence> {
    let words = track.turn(turn.index).unwrap_or(&[]);
    bucket_by_position(turn, |_, ann| {
        words
            .iter()
            .position(|w| w.onset > ann.stroke_begin)
            .unwrap_or(turn.words.len())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_dialog;

    fn track(src: &str) -> WordTimingTrack {
        parse_word_timings(src).unwrap()
    }

    #[test]
    fn parses_entries() {
        let t = track("1\tHey\t2.10\n1\tdo\t2.42\n2\tYeah\t9.00\n");
        assert_eq!(
            t.entries()[0],
            WordTiming {
                turn: 1,
                word: "Hey".into(),
                onset: Millis(2100)
            }
        );
        assert_eq!(t.turn(1).unwrap().len(), 2);
        assert_eq!(t.turn_start(2), Some(Millis(9000)));
        assert_eq!(t.turn(3), None);
        assert_eq!(parse_word_timings(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_tracks() {
        assert_eq!(parse_word_timings(""), Err(TimingError::Empty));
        assert!(matches!(
            parse_word_timings("1 Hey 2.10"),
            Err(TimingError::Format { line: 1, .. })
        ));
        assert!(matches!(
            parse_word_timings("1\ta\t2.0\n1\tb\t2.0\n"),
            Err(TimingError::Order { line: 2, .. })
        ));
        assert!(matches!(
            parse_word_timings("1\ta\t2.0\n2\tb\t3.0\n1\tc\t2.5\n"),
            Err(TimingError::Order { line: 3, .. })
        ));
        assert!(matches!(
            parse_word_timings("1\ta\t5.0\n2\tb\t3.0\n"),
            Err(TimingError::Order { line: 2, .. })
        ));
    }

    #[test]
    fn aligns_to_following_word() {
        let d = parse_dialog("A1: [1.50s](Cup, RH 0.46s) Hey, do you").unwrap();
        let t = track("1\tHey\t2.10\n1\tdo\t2.42\n1\tyou\t2.74\n");
        let a = align_strokes(&d, &t, DEFAULT_LEAD).unwrap();
        assert_eq!(a.turns[0].annotations[0].stroke_begin, Millis(1900));
        assert_eq!(align_strokes(&a, &t, DEFAULT_LEAD).unwrap(), a);
    }

    #[test]
    fn clamps_at_zero() {
        let d = parse_dialog("A1: [0.00s](Cup, RH 0.46s) Hey").unwrap();
        let t = track("1\tHey\t0.10\n");
        let a = align_strokes(&d, &t, DEFAULT_LEAD).unwrap();
        assert_eq!(a.turns[0].annotations[0].stroke_begin, Millis::ZERO);
    }

    #[test]
    fn collision_when_two_strokes_share_a_time() {
        // Both words start before the lead, so both clamp to zero.
        let d = parse_dialog("A1: [0.01s](Cup, RH 0.46s) a [0.02s](Away, 2H 0.40s) b").unwrap();
        let t = track("1\ta\t0.05\n1\tb\t0.15\n");
        assert_eq!(
            align_strokes(&d, &t, DEFAULT_LEAD),
            Err(AlignError::Collision {
                turn: 1,
                first: 0,
                second: 1
            })
        );
    }

    #[test]
    fn alignment_errors() {
        let d = parse_dialog("A1: go [1.00s](Cup, RH 0.46s)").unwrap();
        let t = track("1\tgo\t0.50\n");
        assert_eq!(
            align_strokes(&d, &t, DEFAULT_LEAD),
            Err(AlignError::NoFollowingWord {
                turn: 1,
                annotation: 0
            })
        );
        let d = parse_dialog("A1: [1.00s](Cup, RH 0.46s) go now").unwrap();
        assert!(matches!(
            align_strokes(&d, &t, DEFAULT_LEAD),
            Err(AlignError::WordCount { .. })
        ));
        let t2 = track("1\tgo\t0.50\n1\tlater\t0.90\n");
        assert!(matches!(
            align_strokes(&d, &t2, DEFAULT_LEAD),
            Err(AlignError::WordMismatch { position: 1, .. })
        ));
        let t3 = track("2\tgo\t0.50\n");
        assert_eq!(
            align_strokes(&d, &t3, DEFAULT_LEAD),
            Err(AlignError::MissingTurn(1))
        );
    }

    #[test]
    fn timed_segmentation_matches_document_order_after_alignment() {
        let d = parse_dialog(
            "A1: [1.0s](Cup, RH 0.4s) one two. [2.0s](Away, 2H 0.4s) three [3.0s](Cup, RH 0.4s) four.",
        )
        .unwrap();
        let t = track("1\tone\t1.2\n1\ttwo\t1.5\n1\tthree\t2.2\n1\tfour\t3.2\n");
        let a = align_strokes(&d, &t, DEFAULT_LEAD).unwrap();
        let timed: Vec<_> = segment_sentences_timed(&a.turns[0], &t)
            .into_iter()
            .map(|s| s.annotations)
            .collect();
        assert_eq!(timed, vec![vec![0], vec![1, 2]]);
        let plain: Vec<_> = crate::dsl::segment_sentences(&a.turns[0])
            .into_iter()
            .map(|s| s.annotations)
            .collect();
        assert_eq!(plain, timed);
    }
}
