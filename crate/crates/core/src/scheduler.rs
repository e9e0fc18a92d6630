//! Per-arm phase timelines (prep, stroke, hold, retract).
//!
//! Consecutive strokes on one arm closer than the hold threshold are bridged
//! by a hold and a connecting prep; farther apart, the arm retracts to rest
//! and prepares again before the next stroke.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{CatalogError, GestureCatalog, Hand};
use crate::dsl::{AnnotatedDialog, Speaker};
use crate::features::Features;
use crate::time::Millis;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub hold_threshold: Millis,
    pub prep_duration: Millis,
    pub retract_duration: Millis,
    /// Retract at every turn change when the gap leaves room for it.
    pub retract_on_turn_end: bool,
    /// Conflicting strokes are an error instead of being dropped.
    pub strict: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            hold_threshold: Millis(2500),
            prep_duration: Millis(300),
            retract_duration: Millis(500),
            retract_on_turn_end: false,
            strict: false,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let bad = |m: &str| Err(ScheduleError::Config(m.to_string()));
        if self.prep_duration <= Millis::ZERO || self.retract_duration <= Millis::ZERO {
            return bad("prep and retract durations must be positive");
        }
        if self.hold_threshold < self.prep_duration + self.retract_duration {
            return bad("hold threshold must leave room for a retract and a prep");
        }
        Ok(())
    }

    /// Short digest of the settings that shape a timeline.
    pub fn fingerprint(&self) -> String {
        let canon = format!(
            "hold_threshold={};prep={};retract={};retract_on_turn_end={}",
            self.hold_threshold.0,
            self.prep_duration.0,
            self.retract_duration.0,
            self.retract_on_turn_end
        );
        let digest = Sha256::digest(canon.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Prep,
    Stroke,
    Hold,
    Retract,
}

impl PhaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Prep => "prep",
            PhaseKind::Stroke => "stroke",
            PhaseKind::Hold => "hold",
            PhaseKind::Retract => "retract",
        }
    }

    pub fn parse(s: &str) -> Option<PhaseKind> {
        Some(match s {
            "prep" => PhaseKind::Prep,
            "stroke" => PhaseKind::Stroke,
            "hold" => PhaseKind::Hold,
            "retract" => PhaseKind::Retract,
            _ => return None,
        })
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Arm> {
        match s {
            "left" => Some(Arm::Left),
            "right" => Some(Arm::Right),
            _ => None,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }

    pub fn used_by(hand: Hand) -> &'static [Arm] {
        match hand {
            Hand::Left => &[Arm::Left],
            Hand::Right => &[Arm::Right],
            Hand::Both => &[Arm::Left, Arm::Right],
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GestureRef {
    pub name: String,
    pub hand: Hand,
}

impl fmt::Display for GestureRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.hand)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GesturePhase {
    pub kind: PhaseKind,
    pub start: Millis,
    pub end: Millis,
    /// Turn the phase belongs to: a prep belongs to the stroke it leads
    /// into, a hold or retract to the stroke it follows.
    pub turn: usize,
    /// The gesture being prepared, performed or held. Absent on retracts.
    pub gesture: Option<GestureRef>,
    /// Effective features, on strokes only.
    pub features: Option<Features>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmTrack {
    pub arm: Arm,
    pub phases: Vec<GesturePhase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub speaker: Speaker,
    pub left: ArmTrack,
    pub right: ArmTrack,
    pub audio_duration: Millis,
}

impl Timeline {
    pub fn empty(speaker: Speaker, audio_duration: Millis) -> Timeline {
        Timeline {
            speaker,
            left: ArmTrack {
                arm: Arm::Left,
                phases: Vec::new(),
            },
            right: ArmTrack {
                arm: Arm::Right,
                phases: Vec::new(),
            },
            audio_duration,
        }
    }

    pub fn track(&self, arm: Arm) -> &ArmTrack {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    pub fn track_mut(&mut self, arm: Arm) -> &mut ArmTrack {
        match arm {
            Arm::Left => &mut self.left,
            Arm::Right => &mut self.right,
        }
    }

    pub fn tracks(&self) -> [&ArmTrack; 2] {
        [&self.left, &self.right]
    }

    /// Distinct strokes in time order; a two-handed stroke counts once.
    pub fn strokes(&self) -> Vec<&GesturePhase> {
        let mut out: Vec<&GesturePhase> = self
            .tracks()
            .into_iter()
            .flat_map(|t| {
                t.phases.iter().filter(move |p| {
                    p.kind == PhaseKind::Stroke
                        && !(t.arm == Arm::Right
                            && p.gesture.as_ref().is_some_and(|g| g.hand == Hand::Both))
                })
            })
            .collect();
        out.sort_by_key(|p| p.start);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("invalid scheduler config: {0}")]
    Config(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("speaker {speaker}, {arm} arm: stroke {second} (turn {second_turn}) overlaps {first} (turn {first_turn})")]
    Overlap {
        speaker: Speaker,
        arm: Arm,
        first: GestureRef,
        first_turn: usize,
        second: GestureRef,
        second_turn: usize,
    },
    #[error("speaker {speaker}: stroke {gesture} (turn {turn}) ends at {end}, audio ends at {audio}")]
    Overrun {
        speaker: Speaker,
        gesture: GestureRef,
        turn: usize,
        end: Millis,
        audio: Millis,
    },
    #[error("speaker {speaker}: stroke {gesture} (turn {turn}) starts at 0 with no time to prepare")]
    NoRoomForPrep {
        speaker: Speaker,
        gesture: GestureRef,
        turn: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub speaker: Speaker,
    pub arm: Option<Arm>,
    /// Phase indices within the arm track.
    pub phases: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "speaker {}", self.speaker)?;
        if let Some(arm) = self.arm {
            write!(f, ", {arm} arm")?;
        }
        if !self.phases.is_empty() {
            let list: Vec<String> = self.phases.iter().map(|i| i.to_string()).collect();
            write!(f, ", phase {}", list.join("/"))?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub a: Timeline,
    pub b: Timeline,
    /// Strokes dropped in lenient mode.
    pub diagnostics: Vec<Diagnostic>,
}

impl Schedule {
    pub fn timeline(&self, speaker: Speaker) -> &Timeline {
        match speaker {
            Speaker::A => &self.a,
            Speaker::B => &self.b,
        }
    }
}

#[derive(Debug, Clone)]
struct Stroke {
    start: Millis,
    end: Millis,
    turn: usize,
    gesture: GestureRef,
    features: Features,
}

impl Stroke {
    fn phase(&self, kind: PhaseKind, start: Millis, end: Millis) -> GesturePhase {
        let (turn, gesture, features) = match kind {
            PhaseKind::Stroke => (self.turn, Some(self.gesture.clone()), Some(self.features)),
            PhaseKind::Retract => (self.turn, None, None),
            _ => (self.turn, Some(self.gesture.clone()), None),
        };
        GesturePhase {
            kind,
            start,
            end,
            turn,
            gesture,
            features,
        }
    }
}

fn collect_strokes(
    dialog: &AnnotatedDialog,
    speaker: Speaker,
    catalog: &GestureCatalog,
) -> Result<Vec<Stroke>, CatalogError> {
    let mut strokes = Vec::new();
    for turn in dialog.turns.iter().filter(|t| t.speaker == speaker) {
        for ann in &turn.annotations {
            let def = catalog.lookup_for(&ann.gesture, ann.hand)?;
            strokes.push(Stroke {
                start: ann.stroke_begin,
                end: ann.stroke_begin + ann.modulation.effective_duration(ann.stroke_duration),
                turn: turn.index,
                gesture: GestureRef {
                    name: ann.gesture.clone(),
                    hand: ann.hand,
                },
                features: Features::effective(def, &ann.modulation),
            });
        }
    }
    strokes.sort_by_key(|s| s.start);
    Ok(strokes)
}

/// Audio length used when the dialog does not declare one: enough for the
/// last stroke of either speaker to retract.
fn implied_duration(dialog: &AnnotatedDialog, config: &SchedulerConfig) -> Millis {
    dialog
        .turns
        .iter()
        .flat_map(|t| &t.annotations)
        .map(|a| a.stroke_begin + a.modulation.effective_duration(a.stroke_duration))
        .max()
        .map_or(Millis::ZERO, |end| end + config.retract_duration)
}

fn arm_phases(strokes: &[&Stroke], config: &SchedulerConfig, audio: Millis) -> Vec<GesturePhase> {
    let mut phases = Vec::new();
    let p = config.prep_duration;
    for (i, s) in strokes.iter().enumerate() {
        match i.checked_sub(1).map(|j| strokes[j]) {
            None => {
                phases.push(s.phase(PhaseKind::Prep, (s.start - p).max(Millis::ZERO), s.start))
            }
            Some(prev) => {
                let gap = s.start - prev.end;
                let turn_change = config.retract_on_turn_end
                    && prev.turn != s.turn
                    && gap >= p + config.retract_duration;
                if gap >= config.hold_threshold || turn_change {
                    phases.push(prev.phase(
                        PhaseKind::Retract,
                        prev.end,
                        prev.end + config.retract_duration,
                    ));
                    phases.push(s.phase(PhaseKind::Prep, s.start - p, s.start));
                } else if gap > p {
                    phases.push(prev.phase(PhaseKind::Hold, prev.end, s.start - p));
                    phases.push(s.phase(PhaseKind::Prep, s.start - p, s.start));
                } else {
                    phases.push(s.phase(PhaseKind::Prep, prev.end, s.start));
                }
            }
        }
        phases.push(s.phase(PhaseKind::Stroke, s.start, s.end));
    }
    if let Some(last) = strokes.last() {
        let end = (last.end + config.retract_duration).min(audio);
        phases.push(last.phase(PhaseKind::Retract, last.end, end));
    }
    phases
}

fn schedule_speaker(
    dialog: &AnnotatedDialog,
    speaker: Speaker,
    catalog: &GestureCatalog,
    config: &SchedulerConfig,
    audio: Millis,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Timeline, ScheduleError> {
    let strokes = collect_strokes(dialog, speaker, catalog)?;
    let mut accepted: Vec<&Stroke> = Vec::new();
    let mut last_on: [Option<&Stroke>; 2] = [None, None];
    for s in &strokes {
        if s.end >= audio {
            return Err(ScheduleError::Overrun {
                speaker,
                gesture: s.gesture.clone(),
                turn: s.turn,
                end: s.end,
                audio,
            });
        }
        let arms = Arm::used_by(s.gesture.hand);
        let clash = arms
            .iter()
            .find_map(|&arm| last_on[arm as usize].filter(|prev| s.start <= prev.end).map(|prev| (arm, prev)));
        if let Some((arm, prev)) = clash {
            if config.strict {
                return Err(ScheduleError::Overlap {
                    speaker,
                    arm,
                    first: prev.gesture.clone(),
                    first_turn: prev.turn,
                    second: s.gesture.clone(),
                    second_turn: s.turn,
                });
            }
            diagnostics.push(Diagnostic {
                speaker,
                arm: Some(arm),
                phases: Vec::new(),
                message: format!(
                    "dropped stroke {} at {} (turn {}): it overlaps {} (turn {})",
                    s.gesture, s.start, s.turn, prev.gesture, prev.turn
                ),
            });
            continue;
        }
        // Only a first stroke can start at zero, and its prep needs room.
        if s.start == Millis::ZERO {
            return Err(ScheduleError::NoRoomForPrep {
                speaker,
                gesture: s.gesture.clone(),
                turn: s.turn,
            });
        }
        for &arm in arms {
            last_on[arm as usize] = Some(s);
        }
        accepted.push(s);
    }

    let mut timeline = Timeline::empty(speaker, audio);
    for arm in [Arm::Left, Arm::Right] {
        let on_arm: Vec<&Stroke> = accepted
            .iter()
            .copied()
            .filter(|s| Arm::used_by(s.gesture.hand).contains(&arm))
            .collect();
        timeline.track_mut(arm).phases = arm_phases(&on_arm, config, audio);
    }
    Ok(timeline)
}

/// Schedules both speakers. Stroke times are taken as given; durations
/// follow each annotation's speed modulation.
pub fn schedule(
    dialog: &AnnotatedDialog,
    catalog: &GestureCatalog,
    config: &SchedulerConfig,
) -> Result<Schedule, ScheduleError> {
    config.validate()?;
    let audio = dialog
        .audio_duration
        .unwrap_or_else(|| implied_duration(dialog, config));
    let mut diagnostics = Vec::new();
    let a = schedule_speaker(dialog, Speaker::A, catalog, config, audio, &mut diagnostics)?;
    let b = schedule_speaker(dialog, Speaker::B, catalog, config, audio, &mut diagnostics)?;
    Ok(Schedule { a, b, diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArmState {
    Rest,
    Prepared,
    Stroked,
    Held,
}

impl ArmState {
    fn after(kind: PhaseKind) -> ArmState {
        match kind {
            PhaseKind::Prep => ArmState::Prepared,
            PhaseKind::Stroke => ArmState::Stroked,
            PhaseKind::Hold => ArmState::Held,
            PhaseKind::Retract => ArmState::Rest,
        }
    }

    fn accepts(self, kind: PhaseKind) -> bool {
        matches!(
            (self, kind),
            (ArmState::Rest, PhaseKind::Prep)
                | (ArmState::Prepared, PhaseKind::Stroke)
                | (ArmState::Stroked, PhaseKind::Hold)
                | (ArmState::Stroked, PhaseKind::Prep)
                | (ArmState::Stroked, PhaseKind::Retract)
                | (ArmState::Held, PhaseKind::Prep)
        )
    }
}

fn validate_track(t: &Timeline, track: &ArmTrack, out: &mut Vec<Diagnostic>) {
    let diag = |phases: Vec<usize>, message: String| Diagnostic {
        speaker: t.speaker,
        arm: Some(track.arm),
        phases,
        message,
    };
    let phases = &track.phases;
    let mut state = ArmState::Rest;
    for (i, p) in phases.iter().enumerate() {
        if p.start >= p.end {
            out.push(diag(vec![i], format!("{} has start {} not before end {}", p.kind, p.start, p.end)));
        }
        if p.start < Millis::ZERO || p.end > t.audio_duration {
            out.push(diag(
                vec![i],
                format!("{} [{}, {}] lies outside the audio [0, {}]", p.kind, p.start, p.end, t.audio_duration),
            ));
        }
        match (p.kind, &p.gesture) {
            (PhaseKind::Stroke, None) => out.push(diag(vec![i], "stroke has no gesture".into())),
            (PhaseKind::Retract, Some(_)) => {
                out.push(diag(vec![i], "retract carries a gesture".into()))
            }
            (PhaseKind::Stroke, Some(g)) if !Arm::used_by(g.hand).contains(&track.arm) => {
                out.push(diag(vec![i], format!("stroke {g} is on the wrong arm")))
            }
            _ => {}
        }
        if (p.kind == PhaseKind::Stroke) != p.features.is_some() {
            out.push(diag(vec![i], "features belong on strokes only".into()));
        }
        if let Some(next) = phases.get(i + 1) {
            if next.start < p.end {
                out.push(diag(
                    vec![i, i + 1],
                    format!("{} [{}, {}] overlaps {} [{}, {}]", p.kind, p.start, p.end, next.kind, next.start, next.end),
                ));
            }
            let joined = match (p.kind, next.kind) {
                (PhaseKind::Prep, PhaseKind::Stroke)
                | (PhaseKind::Stroke, PhaseKind::Hold)
                | (PhaseKind::Stroke, PhaseKind::Prep)
                | (PhaseKind::Stroke, PhaseKind::Retract)
                | (PhaseKind::Hold, PhaseKind::Prep) => p.end == next.start,
                _ => true,
            };
            if !joined && next.start > p.end {
                out.push(diag(
                    vec![i, i + 1],
                    format!("{} ends at {} but {} starts at {}", p.kind, p.end, next.kind, next.start),
                ));
            }
        }
        if !state.accepts(p.kind) {
            out.push(diag(vec![i], format!("{} cannot follow {:?}", p.kind, state)));
        }
        state = ArmState::after(p.kind);
    }
    if state != ArmState::Rest {
        out.push(diag(
            vec![phases.len().saturating_sub(1)],
            "track does not end with a retract".into(),
        ));
    }
}

/// Checks ordering, the phase automaton, audio bounds, gesture references
/// and two-handed synchronization. Returns one diagnostic per violation.
pub fn validate_timeline(t: &Timeline) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for track in t.tracks() {
        validate_track(t, track, &mut out);
    }
    for track in t.tracks() {
        let other = t.track(track.arm.other());
        for (i, p) in track.phases.iter().enumerate() {
            let two_handed = p.kind == PhaseKind::Stroke
                && p.gesture.as_ref().is_some_and(|g| g.hand == Hand::Both);
            if !two_handed {
                continue;
            }
            let mirrored = other.phases.iter().any(|q| {
                q.kind == PhaseKind::Stroke
                    && q.start == p.start
                    && q.end == p.end
                    && q.gesture == p.gesture
                    && q.features == p.features
            });
            // Report each missing mirror once, from the arm that has it.
            if !mirrored {
                out.push(Diagnostic {
                    speaker: t.speaker,
                    arm: Some(track.arm),
                    phases: vec![i],
                    message: format!(
                        "two-handed stroke at {} has no matching stroke on the {} arm",
                        p.start,
                        other.arm
                    ),
                });
            }
        }
    }
    out
}
