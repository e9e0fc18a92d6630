//! Extraversion to gesture parameters, and rate reduction for introverted
//! speakers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, GestureCatalog};
use crate::dsl::{segment_sentences, AnnotatedDialog, GestureAnnotation, Speaker};
use crate::features::Modulation;

pub const EXTRAVERSION_MIN: f64 = 1.0;
pub const EXTRAVERSION_MAX: f64 = 7.0;

/// Gestures per sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBand {
    pub min: f64,
    pub max: f64,
}

impl RateBand {
    /// Largest gesture count a sentence may keep: `max` rounded half away
    /// from zero.
    pub fn cap(&self) -> usize {
        self.max.round().max(0.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub rate_band: RateBand,
    pub expanse_offset_cm: f64,
    pub height_offset_cm: f64,
    pub outwardness_offset_cm: f64,
    pub speed_multiplier: f64,
    pub scale_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersonalityError {
    #[error("extraversion {0} outside [1, 7]")]
    Domain(f64),
    #[error("invalid parameter set: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("anchor file must define both `introvert` and `extravert`")]
    MissingAnchor,
}

impl ParameterSet {
    pub const EXTRAVERT: ParameterSet = ParameterSet {
        rate_band: RateBand { min: 1.0, max: 2.0 },
        expanse_offset_cm: 0.0,
        height_offset_cm: 0.0,
        outwardness_offset_cm: 0.0,
        speed_multiplier: 1.0,
        scale_multiplier: 1.0,
    };

    pub const INTROVERT: ParameterSet = ParameterSet {
        rate_band: RateBand { min: 0.0, max: 1.0 },
        expanse_offset_cm: -10.0,
        height_offset_cm: -5.0,
        outwardness_offset_cm: -10.0,
        speed_multiplier: 0.8,
        scale_multiplier: 0.8,
    };

    pub fn validate(&self) -> Result<(), PersonalityError> {
        let all = [
            self.rate_band.min,
            self.rate_band.max,
            self.expanse_offset_cm,
            self.height_offset_cm,
            self.outwardness_offset_cm,
            self.speed_multiplier,
            self.scale_multiplier,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(PersonalityError::Invalid("non-finite value".into()));
        }
        if !(0.0 <= self.rate_band.min && self.rate_band.min <= self.rate_band.max) {
            return Err(PersonalityError::Invalid(format!(
                "rate band ({}, {}) must satisfy 0 <= min <= max",
                self.rate_band.min, self.rate_band.max
            )));
        }
        for (name, v) in [
            ("speed", self.speed_multiplier),
            ("scale", self.scale_multiplier),
        ] {
            if !(v > 0.0 && v <= 4.0) {
                return Err(PersonalityError::Invalid(format!(
                    "{name} multiplier {v} outside (0, 4]"
                )));
            }
        }
        Ok(())
    }

    pub fn modulation(&self) -> Modulation {
        Modulation {
            expanse_cm: self.expanse_offset_cm,
            height_cm: self.height_offset_cm,
            outwardness_cm: self.outwardness_offset_cm,
            speed: self.speed_multiplier,
            scale: self.scale_multiplier,
        }
    }
}

/// The two endpoint parameter sets of the extraversion scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub introvert: ParameterSet,
    pub extravert: ParameterSet,
}

impl Default for Anchors {
    fn default() -> Self {
        Anchors {
            introvert: ParameterSet::INTROVERT,
            extravert: ParameterSet::EXTRAVERT,
        }
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t >= 1.0 {
        return b;
    }
    (a + (b - a) * t).clamp(a.min(b), a.max(b))
}

impl Anchors {
    /// Parses lines of
    /// `anchor, rate_min, rate_max, expanse_cm, height_cm, outwardness_cm, speed, scale`.
    pub fn parse(source: &str) -> Result<Anchors, PersonalityError> {
        let mut introvert = None;
        let mut extravert = None;
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let err = |message: String| PersonalityError::Format { line, message };
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if fields.len() != 8 {
                return Err(err(format!("expected 8 fields, found {}", fields.len())));
            }
            let mut nums = [0.0; 7];
            for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|_| err(format!("`{f}` is not a number")))?;
            }
            let set = ParameterSet {
                rate_band: RateBand {
                    min: nums[0],
                    max: nums[1],
                },
                expanse_offset_cm: nums[2],
                height_offset_cm: nums[3],
                outwardness_offset_cm: nums[4],
                speed_multiplier: nums[5],
                scale_multiplier: nums[6],
            };
            set.validate()
                .map_err(|e| err(e.to_string()))?;
            let slot = match fields[0] {
                "introvert" => &mut introvert,
                "extravert" => &mut extravert,
                other => return Err(err(format!("unknown anchor `{other}`"))),
            };
            if slot.replace(set).is_some() {
                return Err(err(format!("anchor `{}` defined twice", fields[0])));
            }
        }
        match (introvert, extravert) {
            (Some(introvert), Some(extravert)) => Ok(Anchors {
                introvert,
                extravert,
            }),
            _ => Err(PersonalityError::MissingAnchor),
        }
    }

    pub fn to_text(&self) -> String {
        let row = |name: &str, p: &ParameterSet| {
            format!(
                "{name}, {}, {}, {}, {}, {}, {}, {}\n",
                p.rate_band.min,
                p.rate_band.max,
                p.expanse_offset_cm,
                p.height_offset_cm,
                p.outwardness_offset_cm,
                p.speed_multiplier,
                p.scale_multiplier
            )
        };
        let mut out = String::from(
            "# anchor, rate_min, rate_max, expanse_cm, height_cm, outwardness_cm, speed, scale\n",
        );
        out.push_str(&row("introvert", &self.introvert));
        out.push_str(&row("extravert", &self.extravert));
        out
    }

    /// Linear interpolation from the introvert anchor at 1 to the extravert
    /// anchor at 7.
    pub fn at(&self, extraversion: f64) -> Result<ParameterSet, PersonalityError> {
        if !(EXTRAVERSION_MIN..=EXTRAVERSION_MAX).contains(&extraversion) {
            return Err(PersonalityError::Domain(extraversion));
        }
        let t = (extraversion - EXTRAVERSION_MIN) / (EXTRAVERSION_MAX - EXTRAVERSION_MIN);
        let (i, e) = (&self.introvert, &self.extravert);
        Ok(ParameterSet {
            rate_band: RateBand {
                min: lerp(i.rate_band.min, e.rate_band.min, t),
                max: lerp(i.rate_band.max, e.rate_band.max, t),
            },
            expanse_offset_cm: lerp(i.expanse_offset_cm, e.expanse_offset_cm, t),
            height_offset_cm: lerp(i.height_offset_cm, e.height_offset_cm, t),
            outwardness_offset_cm: lerp(i.outwardness_offset_cm, e.outwardness_offset_cm, t),
            speed_multiplier: lerp(i.speed_multiplier, e.speed_multiplier, t),
            scale_multiplier: lerp(i.scale_multiplier, e.scale_multiplier, t),
        })
    }
}

/// Parameters for an extraversion score using the built-in anchors.
pub fn profile_from_extraversion(extraversion: f64) -> Result<ParameterSet, PersonalityError> {
    Anchors::default().at(extraversion)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonalityProfile {
    extraversion: f64,
    derived: ParameterSet,
}

impl PersonalityProfile {
    pub fn new(extraversion: f64, anchors: &Anchors) -> Result<Self, PersonalityError> {
        Ok(PersonalityProfile {
            extraversion,
            derived: anchors.at(extraversion)?,
        })
    }

    pub fn extraversion(&self) -> f64 {
        self.extraversion
    }

    pub fn params(&self) -> &ParameterSet {
        &self.derived
    }
}

/// Drops annotations from a sentence until at most `cap` of the countable
/// ones remain. Later non-copied annotations go first, then later copies.
/// `exempt` annotations neither count nor get dropped.
pub(crate) fn cap_sentence(
    anns: &[GestureAnnotation],
    members: &[usize],
    cap: usize,
    exempt: impl Fn(&GestureAnnotation) -> bool,
) -> Vec<usize> {
    let mut counted: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&i| !exempt(&anns[i]))
        .collect();
    let mut dropped = Vec::new();
    while counted.len() > cap {
        let victim = counted
            .iter()
            .rposition(|&i| !anns[i].form_copied)
            .unwrap_or(counted.len() - 1);
        dropped.push(counted.remove(victim));
    }
    dropped
}

/// Caps the speaker's gestures per sentence and records the personality
/// modulation on every surviving annotation of that speaker. Annotations
/// marked as adaptation additions are left to the adaptation stage.
pub fn apply_personality(
    dialog: &AnnotatedDialog,
    speaker: Speaker,
    params: &ParameterSet,
    catalog: &GestureCatalog,
) -> Result<AnnotatedDialog, CatalogError> {
    let mut out = dialog.clone();
    let cap = params.rate_band.cap();
    let modulation = params.modulation();
    for turn in out.turns.iter_mut().filter(|t| t.speaker == speaker) {
        for ann in &turn.annotations {
            catalog.lookup_for(&ann.gesture, ann.hand)?;
            if let Some(alt) = &ann.alternative {
                catalog.lookup_for(&alt.gesture, alt.hand)?;
            }
        }
        let mut dropped: Vec<usize> = segment_sentences(turn)
            .iter()
            .flat_map(|s| cap_sentence(&turn.annotations, &s.annotations, cap, |a| a.rate_added))
            .collect();
        dropped.sort_unstable();
        for i in dropped.into_iter().rev() {
            turn.annotations.remove(i);
        }
        for ann in &mut turn.annotations {
            ann.modulation.personality = modulation;
        }
    }
    Ok(out)
}
