//! Gesture-annotated dialog format.
//!
//! ```text
//! @story protest
//! @duration 44.58s
//! A1: [1.90s](Cup, RH 0.46s) Hey, do you remember ...
//! B2: ... [29.13s]*(!Cup, RH 0.46s / ShortProgressive, RH 0.38s) run a government.
//! ```
//!
//! An annotation sits immediately before the word it accompanies. `*` after
//! the time bracket marks a gesture added for adaptation, a `!` name prefix
//! marks a copied gesture form, and the variant after ` / ` is the
//! non-adapted alternative. Header lines (`@story`, `@duration`) are
//! optional; lines starting with `#` are comments. Words may not begin
//! with `[`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Hand;
use crate::features::FeatureModulation;
use crate::time::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Speaker {
    A,
    B,
}

impl Speaker {
    pub fn other(self) -> Speaker {
        match self {
            Speaker::A => Speaker::B,
            Speaker::B => Speaker::A,
        }
    }

    pub fn from_letter(c: char) -> Option<Speaker> {
        match c {
            'A' => Some(Speaker::A),
            'B' => Some(Speaker::B),
            _ => None,
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Speaker::A => "A",
            Speaker::B => "B",
        })
    }
}

/// One concrete choice of gesture for an annotation slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub gesture: String,
    pub hand: Hand,
    pub stroke_duration: Millis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureAnnotation {
    pub stroke_begin: Millis,
    pub gesture: String,
    pub hand: Hand,
    pub stroke_duration: Millis,
    /// Present only in the adapted rendition.
    pub rate_added: bool,
    /// Copies a gesture form the other speaker used earlier.
    pub form_copied: bool,
    /// Gesture used instead in the non-adapted rendition.
    pub alternative: Option<Variant>,
    /// Index of the word this annotation precedes; equal to the word count
    /// when the annotation closes the turn.
    pub word_index: usize,
    /// Not part of the text form; filled in by the personality and
    /// adaptation transforms.
    #[serde(default)]
    pub modulation: FeatureModulation,
}

impl GestureAnnotation {
    pub fn primary(&self) -> Variant {
        Variant {
            gesture: self.gesture.clone(),
            hand: self.hand,
            stroke_duration: self.stroke_duration,
        }
    }

    pub fn stroke_end(&self) -> Millis {
        self.stroke_begin + self.stroke_duration
    }

    pub fn set_variant(&mut self, v: Variant) {
        self.gesture = v.gesture;
        self.hand = v.hand;
        self.stroke_duration = v.stroke_duration;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    /// 1-based position of the turn in the dialog.
    pub index: usize,
    pub words: Vec<String>,
    pub annotations: Vec<GestureAnnotation>,
}

impl Turn {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDialog {
    pub story_id: String,
    pub turns: Vec<Turn>,
    pub audio_duration: Option<Millis>,
}

impl AnnotatedDialog {
    pub fn turn(&self, index: usize) -> Option<&Turn> {
        index.checked_sub(1).and_then(|i| self.turns.get(i))
    }

    pub fn last_turn(&self) -> Option<&Turn> {
        self.turns.last()
    }

    pub fn annotation_count(&self) -> usize {
        self.turns.iter().map(|t| t.annotations.len()).sum()
    }

    /// Keeps the first `turns` turns.
    pub fn truncated(&self, turns: usize, audio_duration: Option<Millis>) -> AnnotatedDialog {
        AnnotatedDialog {
            story_id: self.story_id.clone(),
            turns: self.turns.iter().take(turns).cloned().collect(),
            audio_duration,
        }
    }

    /// Speaker sequence as letters, e.g. `ABAB`.
    pub fn structure(&self) -> String {
        self.turns.iter().map(|t| t.speaker.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    MalformedLabel,
    UnknownSpeaker(String),
    TurnNumber { expected: usize, found: usize },
    Alternation,
    Header(String),
    MalformedAnnotation(String),
    BadTime(String),
    UnknownHand(String),
    NonPositiveDuration,
    CopiedAlternative,
    Order,
    BeyondAudio,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "dialog has no turns"),
            ParseErrorKind::MalformedLabel => write!(f, "expected a turn label like `A1:`"),
            ParseErrorKind::UnknownSpeaker(s) => write!(f, "unknown speaker `{s}`"),
            ParseErrorKind::TurnNumber { expected, found } => {
                write!(f, "turn number {found} out of sequence, expected {expected}")
            }
            ParseErrorKind::Alternation => write!(f, "speakers must alternate"),
            ParseErrorKind::Header(h) => write!(f, "bad header: {h}"),
            ParseErrorKind::MalformedAnnotation(m) => write!(f, "malformed annotation: {m}"),
            ParseErrorKind::BadTime(t) => write!(f, "bad time `{t}`"),
            ParseErrorKind::UnknownHand(h) => write!(f, "unknown hand `{h}`"),
            ParseErrorKind::NonPositiveDuration => write!(f, "stroke duration must be positive"),
            ParseErrorKind::CopiedAlternative => {
                write!(f, "the non-adapted alternative cannot be a copy")
            }
            ParseErrorKind::Order => write!(f, "stroke times must strictly increase within a turn"),
            ParseErrorKind::BeyondAudio => write!(f, "stroke ends after the audio"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor {
            chars: src.char_indices().collect(),
            pos: 0,
            src,
            line,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn skip_spaces(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.byte_pos();
        while matches!(self.peek(), Some(c) if f(c)) {
            self.pos += 1;
        }
        &self.src[start..self.byte_pos()]
    }

    fn byte_pos(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(b, _)| b)
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error_at(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(self.column(), kind)
    }

    fn expect(&mut self, c: char, what: &str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::MalformedAnnotation(format!(
                "expected {what}"
            ))))
        }
    }

    fn seconds(&mut self) -> Result<Millis, ParseError> {
        let col = self.column();
        let lit = self.take_while(|c| !matches!(c, 's' | ']' | ')' | '/') && !c.is_whitespace());
        let value = Millis::parse_secs(lit)
            .ok_or_else(|| self.error_at(col, ParseErrorKind::BadTime(lit.to_string())))?;
        if !self.eat('s') {
            return Err(self.error(ParseErrorKind::MalformedAnnotation(
                "expected `s` after seconds".into(),
            )));
        }
        Ok(value)
    }

    fn variant(&mut self) -> Result<(bool, Variant), ParseError> {
        let copied = self.eat('!');
        let col = self.column();
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(self.error_at(
                col,
                ParseErrorKind::MalformedAnnotation("expected gesture name".into()),
            ));
        }
        self.skip_spaces();
        self.expect(',', "`,` after gesture name")?;
        self.skip_spaces();
        let col = self.column();
        let hand_lit = self.take_while(|c| c.is_ascii_alphanumeric());
        let hand = hand_lit
            .parse::<Hand>()
            .map_err(|_| self.error_at(col, ParseErrorKind::UnknownHand(hand_lit.to_string())))?;
        if self.skip_spaces() == 0 {
            return Err(self.error(ParseErrorKind::MalformedAnnotation(
                "expected space before stroke duration".into(),
            )));
        }
        let col = self.column();
        let duration = self.seconds()?;
        if duration == Millis::ZERO {
            return Err(self.error_at(col, ParseErrorKind::NonPositiveDuration));
        }
        Ok((
            copied,
            Variant {
                gesture: name.to_string(),
                hand,
                stroke_duration: duration,
            },
        ))
    }

    fn annotation(&mut self, word_index: usize) -> Result<GestureAnnotation, ParseError> {
        self.expect('[', "`[`")?;
        let stroke_begin = self.seconds()?;
        self.expect(']', "`]`")?;
        let rate_added = self.eat('*');
        self.expect('(', "`(`")?;
        self.skip_spaces();
        let (form_copied, primary) = self.variant()?;
        self.skip_spaces();
        let alternative = if self.eat('/') {
            self.skip_spaces();
            let col = self.column();
            let (copied, alt) = self.variant()?;
            if copied {
                return Err(self.error_at(col, ParseErrorKind::CopiedAlternative));
            }
            self.skip_spaces();
            Some(alt)
        } else {
            None
        };
        self.expect(')', "`)`")?;
        if matches!(self.peek(), Some(c) if !c.is_whitespace()) {
            return Err(self.error(ParseErrorKind::MalformedAnnotation(
                "expected whitespace after `)`".into(),
            )));
        }
        Ok(GestureAnnotation {
            stroke_begin,
            gesture: primary.gesture,
            hand: primary.hand,
            stroke_duration: primary.stroke_duration,
            rate_added,
            form_copied,
            alternative,
            word_index,
            modulation: FeatureModulation::default(),
        })
    }
}

fn parse_label(cur: &mut Cursor<'_>) -> Result<(Speaker, usize), ParseError> {
    let letters = cur.take_while(|c| c.is_ascii_alphabetic());
    let digits = cur.take_while(|c| c.is_ascii_digit());
    if letters.is_empty() || digits.is_empty() || !cur.eat(':') {
        return Err(cur.error_at(1, ParseErrorKind::MalformedLabel));
    }
    let speaker = match letters {
        "A" => Speaker::A,
        "B" => Speaker::B,
        other => return Err(cur.error_at(1, ParseErrorKind::UnknownSpeaker(other.to_string()))),
    };
    let number = digits
        .parse()
        .map_err(|_| cur.error_at(1, ParseErrorKind::MalformedLabel))?;
    Ok((speaker, number))
}

pub fn parse_dialog(source: &str) -> Result<AnnotatedDialog, ParseError> {
    let mut story_id = String::new();
    let mut audio_duration = None;
    let mut turns: Vec<Turn> = Vec::new();
    let mut per_speaker = [0usize; 2];
    // (line, column) of each annotation's time, for the audio-bound check.
    let mut positions: Vec<(usize, usize)> = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim_end();
        if text.trim().is_empty() || text.trim_start().starts_with('#') {
            continue;
        }
        if let Some(header) = text.strip_prefix('@') {
            let err = |m: &str| ParseError {
                line,
                column: 1,
                kind: ParseErrorKind::Header(m.to_string()),
            };
            if !turns.is_empty() {
                return Err(err("headers must precede the first turn"));
            }
            let (key, value) = header.split_once(char::is_whitespace).unwrap_or((header, ""));
            let value = value.trim();
            match key {
                "story" if !value.is_empty() && !value.contains(char::is_whitespace) => {
                    story_id = value.to_string()
                }
                "duration" => {
                    let secs = value.strip_suffix('s').unwrap_or(value);
                    audio_duration =
                        Some(Millis::parse_secs(secs).ok_or_else(|| err("bad @duration"))?);
                }
                _ => return Err(err(&format!("unrecognized `@{key}`"))),
            }
            continue;
        }

        let mut cur = Cursor::new(text, line);
        let (speaker, number) = parse_label(&mut cur)?;
        if let Some(prev) = turns.last() {
            if prev.speaker == speaker {
                return Err(cur.error_at(1, ParseErrorKind::Alternation));
            }
        }
        let slot = &mut per_speaker[speaker as usize];
        *slot += 1;
        if number != *slot {
            return Err(cur.error_at(
                1,
                ParseErrorKind::TurnNumber {
                    expected: *slot,
                    found: number,
                },
            ));
        }

        let mut words = Vec::new();
        let mut annotations: Vec<GestureAnnotation> = Vec::new();
        loop {
            cur.skip_spaces();
            match cur.peek() {
                None => break,
                Some('[') => {
                    let col = cur.column();
                    let ann = cur.annotation(words.len())?;
                    if let Some(prev) = annotations.last() {
                        if ann.stroke_begin <= prev.stroke_begin {
                            return Err(cur.error_at(col, ParseErrorKind::Order));
                        }
                    }
                    positions.push((line, col));
                    annotations.push(ann);
                }
                Some(_) => {
                    let word = cur.take_while(|c| !c.is_whitespace());
                    words.push(word.to_string());
                }
            }
        }
        // Keeps the borrow checker away from `cur` while we push.
        let _ = cur.bump();
        turns.push(Turn {
            speaker,
            index: turns.len() + 1,
            words,
            annotations,
        });
    }

    if turns.is_empty() {
        return Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::Empty,
        });
    }

    if let Some(limit) = audio_duration {
        let anns = turns.iter().flat_map(|t| t.annotations.iter());
        for (ann, &(line, column)) in anns.zip(&positions) {
            let alt_end = ann
                .alternative
                .as_ref()
                .map_or(Millis::ZERO, |v| ann.stroke_begin + v.stroke_duration);
            if ann.stroke_end() > limit || alt_end > limit {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::BeyondAudio,
                });
            }
        }
    }

    Ok(AnnotatedDialog {
        story_id,
        turns,
        audio_duration,
    })
}

fn format_variant(out: &mut String, copied: bool, v: &Variant) {
    if copied {
        out.push('!');
    }
    out.push_str(&format!(
        "{}, {} {}s",
        v.gesture,
        v.hand,
        v.stroke_duration.to_compact_secs()
    ));
}

pub fn format_annotation(ann: &GestureAnnotation) -> String {
    let mut out = format!("[{}s]", ann.stroke_begin.to_compact_secs());
    if ann.rate_added {
        out.push('*');
    }
    out.push('(');
    format_variant(&mut out, ann.form_copied, &ann.primary());
    if let Some(alt) = &ann.alternative {
        out.push_str(" / ");
        format_variant(&mut out, false, alt);
    }
    out.push(')');
    out
}

pub fn format_turn(turn: &Turn, number: usize) -> String {
    let mut out = format!("{}{}:", turn.speaker, number);
    let mut anns = turn.annotations.iter().peekable();
    for i in 0..=turn.words.len() {
        while let Some(ann) = anns.next_if(|a| a.word_index <= i) {
            out.push(' ');
            out.push_str(&format_annotation(ann));
        }
        if let Some(w) = turn.words.get(i) {
            out.push(' ');
            out.push_str(w);
        }
    }
    for ann in anns {
        out.push(' ');
        out.push_str(&format_annotation(ann));
    }
    out
}

/// Canonical serialization: headers, then one line per turn.
pub fn format_dialog(dialog: &AnnotatedDialog) -> String {
    let mut out = String::new();
    if !dialog.story_id.is_empty() {
        out.push_str(&format!("@story {}\n", dialog.story_id));
    }
    if let Some(d) = dialog.audio_duration {
        out.push_str(&format!("@duration {}s\n", d.to_compact_secs()));
    }
    let mut per_speaker = [0usize; 2];
    for turn in &dialog.turns {
        let n = &mut per_speaker[turn.speaker as usize];
        *n += 1;
        out.push_str(&format_turn(turn, *n));
        out.push('\n');
    }
    out
}

/// A sentence of a turn with the annotations that accompany it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub words: std::ops::Range<usize>,
    /// Indices into the turn's annotation list.
    pub annotations: Vec<usize>,
}

fn ends_sentence(word: &str) -> bool {
    let core = word.trim_end_matches(['"', '\'', '”', '’', ')', ']']);
    core.ends_with(['.', '!', '?', '…'])
}

/// Word ranges of the sentences in `words`, split after terminal punctuation.
pub fn sentence_ranges(words: &[String]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, w) in words.iter().enumerate() {
        if ends_sentence(w) {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < words.len() {
        out.push(start..words.len());
    }
    out
}

/// Buckets annotations into sentences given the word position each one
/// precedes. Annotations closing the turn go to the last sentence.
pub(crate) fn bucket_by_position(
    turn: &Turn,
    position_of: impl Fn(usize, &GestureAnnotation) -> usize,
) -> Vec<Sentence> {
    let ranges = sentence_ranges(&turn.words);
    let mut sentences: Vec<Sentence> = ranges
        .into_iter()
        .map(|r| Sentence {
            text: turn.words[r.clone()].join(" "),
            words: r,
            annotations: Vec::new(),
        })
        .collect();
    if sentences.is_empty() {
        return sentences;
    }
    let last = sentences.len() - 1;
    for (i, ann) in turn.annotations.iter().enumerate() {
        let pos = position_of(i, ann);
        let s = sentences
            .iter()
            .position(|s| s.words.contains(&pos))
            .unwrap_or(last);
        sentences[s].annotations.push(i);
    }
    sentences
}

/// Splits a turn into sentences by document order.
pub fn segment_sentences(turn: &Turn) -> Vec<Sentence> {
    bucket_by_position(turn, |_, a| a.word_index)
}
