//! Adapted and non-adapted renditions of a dialog's final turn.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{segment_sentences, AnnotatedDialog, Speaker, Turn};
use crate::features::Modulation;
use crate::personality::{cap_sentence, RateBand};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationSpec {
    pub rate_band: RateBand,
    pub expanse_delta_cm: f64,
    pub height_delta_cm: f64,
    pub outwardness_delta_cm: f64,
    pub speed_factor: f64,
    pub scale_factor: f64,
}

impl Default for AdaptationSpec {
    fn default() -> Self {
        AdaptationSpec {
            rate_band: RateBand { min: 1.0, max: 3.0 },
            expanse_delta_cm: 18.0,
            height_delta_cm: 10.0,
            outwardness_delta_cm: 10.0,
            speed_factor: 1.25,
            scale_factor: 1.5,
        }
    }
}

impl AdaptationSpec {
    pub fn validate(&self) -> Result<(), PlanError> {
        let deltas = [
            self.expanse_delta_cm,
            self.height_delta_cm,
            self.outwardness_delta_cm,
        ];
        if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(PlanError::InvalidSpec("deltas must be finite and >= 0".into()));
        }
        if [self.speed_factor, self.scale_factor]
            .iter()
            .any(|f| !(f.is_finite() && *f >= 1.0))
        {
            return Err(PlanError::InvalidSpec("factors must be finite and >= 1".into()));
        }
        let RateBand { min, max } = self.rate_band;
        if !(min.is_finite() && max.is_finite() && 0.0 <= min && min <= max) {
            return Err(PlanError::InvalidSpec("rate band must satisfy 0 <= min <= max".into()));
        }
        Ok(())
    }

    pub fn modulation(&self) -> Modulation {
        Modulation {
            expanse_cm: self.expanse_delta_cm,
            height_cm: self.height_delta_cm,
            outwardness_cm: self.outwardness_delta_cm,
            speed: self.speed_factor,
            scale: self.scale_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantPlan {
    pub responder: Speaker,
    pub response_turn: usize,
    pub adapted: bool,
}

impl VariantPlan {
    /// Plan whose response is the dialog's final turn.
    pub fn for_dialog(dialog: &AnnotatedDialog, adapted: bool) -> Result<VariantPlan, PlanError> {
        let last = dialog.last_turn().ok_or(PlanError::EmptyDialog)?;
        Ok(VariantPlan {
            responder: last.speaker,
            response_turn: last.index,
            adapted,
        })
    }

    pub fn check(&self, dialog: &AnnotatedDialog) -> Result<(), PlanError> {
        let last = dialog.last_turn().ok_or(PlanError::EmptyDialog)?;
        if self.response_turn != last.index {
            return Err(PlanError::NotLastTurn {
                turn: self.response_turn,
                last: last.index,
            });
        }
        if self.responder != last.speaker {
            return Err(PlanError::ResponderMismatch {
                expected: last.speaker,
                found: self.responder,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("dialog has no turns")]
    EmptyDialog,
    #[error("response turn {turn} is not the final turn {last}")]
    NotLastTurn { turn: usize, last: usize },
    #[error("final turn is spoken by {expected}, not {found}")]
    ResponderMismatch { expected: Speaker, found: Speaker },
    #[error("turn structure `{structure}` does not match the dialog's turns `{actual}`")]
    Structure { structure: String, actual: String },
    #[error("invalid adaptation spec: {0}")]
    InvalidSpec(String),
}

/// Non-adapted rendition of one turn: additions removed, alternatives
/// selected, copy marks cleared and no adaptation modulation.
fn strip_turn(turn: &mut Turn) {
    turn.annotations.retain(|a| !a.rate_added);
    for ann in &mut turn.annotations {
        if let Some(alt) = ann.alternative.take() {
            ann.set_variant(alt);
        }
        ann.form_copied = false;
        ann.modulation.adaptation = Modulation::IDENTITY;
    }
}

fn adapt_turn(turn: &mut Turn, spec: &AdaptationSpec) {
    let cap = spec.rate_band.cap();
    let mut dropped: Vec<usize> = segment_sentences(turn)
        .iter()
        .flat_map(|s| cap_sentence(&turn.annotations, &s.annotations, cap, |_| false))
        .collect();
    dropped.sort_unstable();
    for i in dropped.into_iter().rev() {
        turn.annotations.remove(i);
    }
    let modulation = spec.modulation();
    for ann in &mut turn.annotations {
        ann.alternative = None;
        ann.modulation.adaptation = modulation;
    }
}

/// Non-adapted rendition of every turn.
pub fn strip_adaptation(dialog: &AnnotatedDialog) -> AnnotatedDialog {
    let mut out = dialog.clone();
    out.turns.iter_mut().for_each(strip_turn);
    out
}

/// Resolves the dialog for one side of an adaptation pair. Turns before the
/// response are rendered non-adapted in both cases, so the two sides differ
/// only in the response turn.
pub fn resolve_variant(
    dialog: &AnnotatedDialog,
    plan: &VariantPlan,
    spec: &AdaptationSpec,
) -> Result<AnnotatedDialog, PlanError> {
    plan.check(dialog)?;
    spec.validate()?;
    let mut out = dialog.clone();
    for turn in &mut out.turns {
        if turn.index == plan.response_turn && plan.adapted {
            adapt_turn(turn, spec);
        } else {
            strip_turn(turn);
        }
    }
    Ok(out)
}

/// Position of an annotation: 1-based turn index and index within the turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotationRef {
    pub turn: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CopyReport {
    pub pairs: Vec<(AnnotationRef, AnnotationRef)>,
    pub unmatched: Vec<AnnotationRef>,
}

/// Pairs every copied annotation with the most recent earlier annotation of
/// the same gesture by the other speaker.
pub fn check_copy_provenance(dialog: &AnnotatedDialog) -> CopyReport {
    let mut report = CopyReport::default();
    for (ti, turn) in dialog.turns.iter().enumerate() {
        for (ai, ann) in turn.annotations.iter().enumerate() {
            if !ann.form_copied {
                continue;
            }
            let copy = AnnotationRef {
                turn: turn.index,
                index: ai,
            };
            let source = dialog.turns[..ti]
                .iter()
                .rev()
                .filter(|t| t.speaker != turn.speaker)
                .find_map(|t| {
                    t.annotations
                        .iter()
                        .rposition(|a| a.gesture == ann.gesture)
                        .map(|index| AnnotationRef {
                            turn: t.index,
                            index,
                        })
                });
            match source {
                Some(src) => report.pairs.push((copy, src)),
                None => report.unmatched.push(copy),
            }
        }
    }
    report
}
