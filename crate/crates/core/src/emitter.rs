//! Gesture scripts: a flat, sorted list of phase events per speaker.
//!
//! Two encodings carry the same content. JSON (schema in
//! `docs/script.schema.json`):
//!
//! ```text
//! {
//!   "format": "gesture-script/1",
//!   "story_id": "protest",
//!   "speaker": "A",
//!   "audio_duration": 44.580,
//!   "config": "3f2a...",
//!   "events": [
//!     {"start": 1.600, "end": 1.900, "kind": "prep", "arm": "right", "turn": 1, "gesture": "Cup", "hand": "RH"},
//!     ...
//!   ]
//! }
//! ```
//!
//! and a line format with `#` header lines and one event per line:
//!
//! ```text
//! start end kind arm gesture expanse height outward speed scale turn
//! 1.900 2.360 stroke right Cup:RH 25.000 0.000 20.000 1.000 1.000 1
//! ```
//!
//! Every number is printed with exactly three decimals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::catalog::Hand;
use crate::dsl::Speaker;
use crate::features::Features;
use crate::scheduler::{
    validate_timeline, Arm, ArmTrack, Diagnostic, GesturePhase, GestureRef, PhaseKind, Timeline,
};
use crate::time::{round3, Millis};

pub const FORMAT_TAG: &str = "gesture-script/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptFormat {
    Json,
    Text,
}

impl ScriptFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ScriptFormat::Json => "json",
            ScriptFormat::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptHeader {
    pub story_id: String,
    pub speaker: Speaker,
    pub audio_duration: Millis,
    pub config_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEvent {
    pub start: Millis,
    pub end: Millis,
    pub kind: PhaseKind,
    pub arm: Arm,
    pub turn: usize,
    pub gesture: Option<GestureRef>,
    pub features: Option<Features>,
}

impl ScriptEvent {
    fn sort_key(&self) -> (Millis, Arm, PhaseKind) {
        (self.start, self.arm, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptDocument {
    pub header: ScriptHeader,
    pub events: Vec<ScriptEvent>,
}

impl ScriptDocument {
    pub fn from_timeline(t: &Timeline, story_id: &str, config_fingerprint: &str) -> Self {
        let mut events: Vec<ScriptEvent> = t
            .tracks()
            .into_iter()
            .flat_map(|track| {
                track.phases.iter().map(move |p| ScriptEvent {
                    start: p.start,
                    end: p.end,
                    kind: p.kind,
                    arm: track.arm,
                    turn: p.turn,
                    gesture: p.gesture.clone(),
                    features: p.features.map(Features::quantized),
                })
            })
            .collect();
        events.sort_by_key(ScriptEvent::sort_key);
        ScriptDocument {
            header: ScriptHeader {
                story_id: story_id.to_string(),
                speaker: t.speaker,
                audio_duration: t.audio_duration,
                config_fingerprint: config_fingerprint.to_string(),
            },
            events,
        }
    }

    pub fn to_timeline(&self) -> Timeline {
        let mut t = Timeline::empty(self.header.speaker, self.header.audio_duration);
        for arm in [Arm::Left, Arm::Right] {
            let mut phases: Vec<GesturePhase> = self
                .events
                .iter()
                .filter(|e| e.arm == arm)
                .map(|e| GesturePhase {
                    kind: e.kind,
                    start: e.start,
                    end: e.end,
                    turn: e.turn,
                    gesture: e.gesture.clone(),
                    features: e.features,
                })
                .collect();
            phases.sort_by_key(|p| (p.start, p.end));
            *t.track_mut(arm) = ArmTrack { arm, phases };
        }
        t
    }

    /// Events with `turn < before`.
    pub fn events_before_turn(&self, before: usize) -> Vec<&ScriptEvent> {
        self.events.iter().filter(|e| e.turn < before).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmitError {
    #[error("timeline is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// Validates the timeline and serializes it.
pub fn emit_script(
    t: &Timeline,
    story_id: &str,
    config_fingerprint: &str,
    format: ScriptFormat,
) -> Result<Vec<u8>, EmitError> {
    let diagnostics = validate_timeline(t);
    if !diagnostics.is_empty() {
        return Err(EmitError::Invalid(diagnostics));
    }
    Ok(emit_document(
        &ScriptDocument::from_timeline(t, story_id, config_fingerprint),
        format,
    ))
}

fn num(x: f64) -> String {
    format!("{:.3}", round3(x))
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Canonical serialization of a document; events are written in
/// (start, arm, kind) order.
pub fn emit_document(doc: &ScriptDocument, format: ScriptFormat) -> Vec<u8> {
    let mut events: Vec<&ScriptEvent> = doc.events.iter().collect();
    events.sort_by_key(|e| e.sort_key());
    let h = &doc.header;
    let mut out = String::new();
    match format {
        ScriptFormat::Json => {
            out.push_str("{\n");
            let _ = writeln!(out, "  \"format\": {},", json_str(FORMAT_TAG));
            let _ = writeln!(out, "  \"story_id\": {},", json_str(&h.story_id));
            let _ = writeln!(out, "  \"speaker\": \"{}\",", h.speaker);
            let _ = writeln!(out, "  \"audio_duration\": {},", h.audio_duration);
            let _ = writeln!(out, "  \"config\": {},", json_str(&h.config_fingerprint));
            if events.is_empty() {
                out.push_str("  \"events\": []\n}\n");
                return out.into_bytes();
            }
            out.push_str("  \"events\": [\n");
            for (i, e) in events.iter().enumerate() {
                let _ = write!(
                    out,
                    "    {{\"start\": {}, \"end\": {}, \"duration\": {}, \"kind\": \"{}\", \"arm\": \"{}\", \"turn\": {}",
                    e.start,
                    e.end,
                    e.end - e.start,
                    e.kind,
                    e.arm,
                    e.turn
                );
                if let Some(g) = &e.gesture {
                    let _ = write!(out, ", \"gesture\": {}, \"hand\": \"{}\"", json_str(&g.name), g.hand);
                }
                if let Some(f) = &e.features {
                    let _ = write!(
                        out,
                        ", \"features\": {{\"expanse_cm\": {}, \"height_cm\": {}, \"outwardness_cm\": {}, \"speed\": {}, \"scale\": {}}}",
                        num(f.expanse_cm),
                        num(f.height_cm),
                        num(f.outwardness_cm),
                        num(f.speed),
                        num(f.scale)
                    );
                }
                out.push('}');
                out.push_str(if i + 1 < events.len() { ",\n" } else { "\n" });
            }
            out.push_str("  ]\n}\n");
        }
        ScriptFormat::Text => {
            let _ = writeln!(out, "# {FORMAT_TAG}");
            let _ = writeln!(out, "# story_id {}", h.story_id);
            let _ = writeln!(out, "# speaker {}", h.speaker);
            let _ = writeln!(out, "# audio_duration {}", h.audio_duration);
            let _ = writeln!(out, "# config {}", h.config_fingerprint);
            out.push_str("# start end kind arm gesture expanse height outward speed scale turn\n");
            for e in events {
                let gesture = e.gesture.as_ref().map_or("-".to_string(), |g| g.to_string());
                let feats = match &e.features {
                    Some(f) => [f.expanse_cm, f.height_cm, f.outwardness_cm, f.speed, f.scale]
                        .map(num)
                        .join(" "),
                    None => "- - - - -".to_string(),
                };
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {} {}",
                    e.start, e.end, e.kind, e.arm, gesture, feats, e.turn
                );
            }
        }
    }
    out.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ScriptError {
    /// Location of the offending field, e.g. `events[3].end` or `line 9`.
    pub path: String,
    pub message: String,
}

fn err(path: impl Into<String>, message: impl Into<String>) -> ScriptError {
    ScriptError {
        path: path.into(),
        message: message.into(),
    }
}

fn millis(v: &Value, path: &str) -> Result<Millis, ScriptError> {
    let x = v.as_f64().ok_or_else(|| err(path, "expected a number"))?;
    if x < 0.0 {
        return Err(err(path, "must not be negative"));
    }
    Millis::from_secs_f64(x).ok_or_else(|| err(path, "out of range"))
}

fn finite(v: &Value, path: &str) -> Result<f64, ScriptError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .map(round3)
        .ok_or_else(|| err(path, "expected a number"))
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, ScriptError> {
    obj.get(key)
        .ok_or_else(|| err(format!("{path}.{key}"), "missing field"))
}

fn string<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, ScriptError> {
    get(obj, key, path)?
        .as_str()
        .ok_or_else(|| err(format!("{path}.{key}"), "expected a string"))
}

fn no_extra(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), ScriptError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(format!("{path}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn speaker(s: &str, path: &str) -> Result<Speaker, ScriptError> {
    let mut chars = s.chars();
    match (chars.next().and_then(Speaker::from_letter), chars.next()) {
        (Some(sp), None) => Ok(sp),
        _ => Err(err(path, format!("unknown speaker `{s}`"))),
    }
}

/// Checks the per-event rules shared by both encodings.
fn check_event(e: &ScriptEvent, path: &str, sep: &str) -> Result<(), ScriptError> {
    let at = |field: &str| format!("{path}{sep}{field}");
    if e.end <= e.start {
        return Err(err(
            at("end"),
            format!("end {} is not after start {}", e.end, e.start),
        ));
    }
    if e.turn == 0 {
        return Err(err(at("turn"), "turns count from 1"));
    }
    match (e.kind, e.gesture.is_some(), e.features.is_some()) {
        (PhaseKind::Stroke, true, true) => Ok(()),
        (PhaseKind::Stroke, false, _) => Err(err(at("gesture"), "stroke needs a gesture")),
        (PhaseKind::Stroke, true, false) => {
            Err(err(at("features"), "stroke needs features"))
        }
        (PhaseKind::Retract, true, _) => {
            Err(err(at("gesture"), "retract carries no gesture"))
        }
        (_, _, true) => Err(err(at("features"), "features belong on strokes only")),
        _ => Ok(()),
    }
}

fn read_json(text: &str) -> Result<ScriptDocument, ScriptError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| err(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| err("$", "expected an object"))?;
    no_extra(
        obj,
        &["format", "story_id", "speaker", "audio_duration", "config", "events"],
        "$",
    )?;
    let tag = string(obj, "format", "$")?;
    if tag != FORMAT_TAG {
        return Err(err("$.format", format!("unsupported format `{tag}`")));
    }
    let header = ScriptHeader {
        story_id: string(obj, "story_id", "$")?.to_string(),
        speaker: speaker(string(obj, "speaker", "$")?, "$.speaker")?,
        audio_duration: millis(get(obj, "audio_duration", "$")?, "$.audio_duration")?,
        config_fingerprint: string(obj, "config", "$")?.to_string(),
    };
    let list = get(obj, "events", "$")?
        .as_array()
        .ok_or_else(|| err("$.events", "expected an array"))?;
    let mut events = Vec::with_capacity(list.len());
    for (i, v) in list.iter().enumerate() {
        let path = format!("$.events[{i}]");
        let e = v.as_object().ok_or_else(|| err(&path, "expected an object"))?;
        no_extra(
            e,
            &["start", "end", "duration", "kind", "arm", "turn", "gesture", "hand", "features"],
            &path,
        )?;
        let start = millis(get(e, "start", &path)?, &format!("{path}.start"))?;
        let end = millis(get(e, "end", &path)?, &format!("{path}.end"))?;
        if let Some(d) = e.get("duration") {
            let d = millis(d, &format!("{path}.duration"))?;
            if end > start && d != end - start {
                return Err(err(format!("{path}.duration"), "does not equal end - start"));
            }
        }
        let kind_s = string(e, "kind", &path)?;
        let kind = PhaseKind::parse(kind_s)
            .ok_or_else(|| err(format!("{path}.kind"), format!("unknown kind `{kind_s}`")))?;
        let arm_s = string(e, "arm", &path)?;
        let arm = Arm::parse(arm_s)
            .ok_or_else(|| err(format!("{path}.arm"), format!("unknown arm `{arm_s}`")))?;
        let turn = get(e, "turn", &path)?
            .as_u64()
            .ok_or_else(|| err(format!("{path}.turn"), "expected a positive integer"))?
            as usize;
        let gesture = match (e.get("gesture"), e.get("hand")) {
            (None, None) => None,
            (Some(g), Some(h)) => {
                let name = g
                    .as_str()
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| err(format!("{path}.gesture"), "expected a gesture name"))?;
                let hand = h
                    .as_str()
                    .and_then(|s| s.parse::<Hand>().ok())
                    .ok_or_else(|| err(format!("{path}.hand"), "expected LH, RH or 2H"))?;
                Some(GestureRef {
                    name: name.to_string(),
                    hand,
                })
            }
            (Some(_), None) => return Err(err(format!("{path}.hand"), "missing field")),
            (None, Some(_)) => return Err(err(format!("{path}.gesture"), "missing field")),
        };
        let features = match e.get("features") {
            None => None,
            Some(f) => {
                let fp = format!("{path}.features");
                let f = f.as_object().ok_or_else(|| err(&fp, "expected an object"))?;
                no_extra(
                    f,
                    &["expanse_cm", "height_cm", "outwardness_cm", "speed", "scale"],
                    &fp,
                )?;
                let field = |k: &str| -> Result<f64, ScriptError> {
                    finite(get(f, k, &fp)?, &format!("{fp}.{k}"))
                };
                Some(Features {
                    expanse_cm: field("expanse_cm")?,
                    height_cm: field("height_cm")?,
                    outwardness_cm: field("outwardness_cm")?,
                    speed: field("speed")?,
                    scale: field("scale")?,
                })
            }
        };
        let event = ScriptEvent {
            start,
            end,
            kind,
            arm,
            turn,
            gesture,
            features,
        };
        check_event(&event, &path, ".")?;
        events.push(event);
    }
    Ok(ScriptDocument { header, events })
}

fn read_text(text: &str) -> Result<ScriptDocument, ScriptError> {
    let mut tag = None;
    let mut story_id = None;
    let mut speaker_v = None;
    let mut audio = None;
    let mut config = None;
    let mut events = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let path = format!("line {line}");
        if let Some(rest) = raw.strip_prefix('#') {
            let rest = rest.trim();
            if rest == FORMAT_TAG {
                tag = Some(());
                continue;
            }
            let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
            match key {
                "story_id" => story_id = Some(value.to_string()),
                "speaker" => speaker_v = Some(speaker(value, &path)?),
                "audio_duration" => {
                    audio = Some(
                        Millis::parse_secs(value).ok_or_else(|| err(&path, "bad audio_duration"))?,
                    )
                }
                "config" => config = Some(value.to_string()),
                _ => {}
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(' ').collect();
        if cols.len() != 11 {
            return Err(err(&path, format!("expected 11 columns, found {}", cols.len())));
        }
        let col = |i: usize, name: &str| (cols[i], format!("{path}, {name}"));
        let time = |i: usize, name: &str| {
            let (v, p) = col(i, name);
            Millis::parse_secs(v).ok_or_else(|| err(p, format!("bad time `{v}`")))
        };
        let start = time(0, "start")?;
        let end = time(1, "end")?;
        let (kind_s, p) = col(2, "kind");
        let kind = PhaseKind::parse(kind_s).ok_or_else(|| err(p, format!("unknown kind `{kind_s}`")))?;
        let (arm_s, p) = col(3, "arm");
        let arm = Arm::parse(arm_s).ok_or_else(|| err(p, format!("unknown arm `{arm_s}`")))?;
        let (g, p) = col(4, "gesture");
        let gesture = if g == "-" {
            None
        } else {
            let (name, hand) = g
                .rsplit_once(':')
                .ok_or_else(|| err(&p, "expected Name:HAND"))?;
            let hand = hand.parse::<Hand>().map_err(|_| err(&p, "expected LH, RH or 2H"))?;
            if name.is_empty() {
                return Err(err(&p, "empty gesture name"));
            }
            Some(GestureRef {
                name: name.to_string(),
                hand,
            })
        };
        let names = ["expanse", "height", "outward", "speed", "scale"];
        let raw_feats = &cols[5..10];
        let features = if raw_feats.iter().all(|c| *c == "-") {
            None
        } else {
            let mut vals = [0.0; 5];
            for (k, (v, name)) in raw_feats.iter().zip(names).enumerate() {
                vals[k] = v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(round3)
                    .ok_or_else(|| err(format!("{path}, {name}"), format!("bad number `{v}`")))?;
            }
            Some(Features {
                expanse_cm: vals[0],
                height_cm: vals[1],
                outwardness_cm: vals[2],
                speed: vals[3],
                scale: vals[4],
            })
        };
        let (t, p) = col(10, "turn");
        let turn = t.parse::<usize>().map_err(|_| err(p, format!("bad turn `{t}`")))?;
        let event = ScriptEvent {
            start,
            end,
            kind,
            arm,
            turn,
            gesture,
            features,
        };
        check_event(&event, &path, ", ")?;
        events.push(event);
    }
    let missing = |what: &str| err(format!("line {}", last_line + 1), format!("missing `# {what}` header"));
    tag.ok_or_else(|| missing(FORMAT_TAG))?;
    Ok(ScriptDocument {
        header: ScriptHeader {
            story_id: story_id.ok_or_else(|| missing("story_id"))?,
            speaker: speaker_v.ok_or_else(|| missing("speaker"))?,
            audio_duration: audio.ok_or_else(|| missing("audio_duration"))?,
            config_fingerprint: config.ok_or_else(|| missing("config"))?,
        },
        events,
    })
}

/// Reads either encoding; JSON is recognized by a leading `{`.
pub fn read_script(bytes: &[u8]) -> Result<ScriptDocument, ScriptError> {
    let text = std::str::from_utf8(bytes).map_err(|e| err("$", format!("not UTF-8: {e}")))?;
    if text.trim_start().starts_with('{') {
        read_json(text)
    } else {
        read_text(text)
    }
}
