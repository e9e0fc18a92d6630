//! Browser bindings. Each export takes plain text and returns a JSON string;
//! errors come back as a thrown string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use gesturec_core::align::parse_word_timings;
use gesturec_core::catalog::fixture_catalog;
use gesturec_core::config::PipelineConfig;
use gesturec_core::dsl::{parse_dialog, Speaker};
use gesturec_core::emitter::{emit_script, ScriptFormat};
use gesturec_core::personality::Anchors;
use gesturec_core::pipeline::{compile, CompileOptions, Rendition};

pub const PROTEST_DIALOG: &str = include_str!("../../../data/stories/protest.gdl");
pub const PROTEST_TIMINGS: &str = include_str!("../../../data/timings/protest.tsv");

fn compile_json(
    dialog: &str,
    timings: &str,
    extraversion_a: f64,
    extraversion_b: f64,
    rendition: Rendition,
) -> Result<Value, String> {
    let dialog = parse_dialog(dialog).map_err(|e| e.to_string())?;
    let track = if timings.trim().is_empty() {
        None
    } else {
        Some(parse_word_timings(timings).map_err(|e| e.to_string())?)
    };
    let config = PipelineConfig::default();
    let anchors = Anchors::default();
    let options = CompileOptions {
        personality_a: anchors.at(extraversion_a).map_err(|e| e.to_string())?,
        personality_b: anchors.at(extraversion_b).map_err(|e| e.to_string())?,
        rendition,
        ..CompileOptions::default()
    };
    let catalog = fixture_catalog();
    let compiled = compile(&dialog, track.as_ref(), &catalog, &options).map_err(|e| e.to_string())?;
    let fingerprint = config.fingerprint(&anchors);
    let mut scripts = serde_json::Map::new();
    for speaker in [Speaker::A, Speaker::B] {
        let bytes = emit_script(
            compiled.schedule.timeline(speaker),
            &dialog.story_id,
            &fingerprint,
            ScriptFormat::Json,
        )
        .map_err(|e| e.to_string())?;
        let doc: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
        scripts.insert(speaker.to_string(), doc);
    }
    let diagnostics: Vec<String> = compiled
        .schedule
        .diagnostics
        .iter()
        .map(ToString::to_string)
        .collect();
    Ok(json!({ "scripts": scripts, "diagnostics": diagnostics }))
}

/// Compiles a dialog with every turn non-adapted. Empty `timings` keeps the
/// stroke times written in the dialog.
pub fn compile_timeline_json(
    dialog: &str,
    timings: &str,
    extraversion_a: f64,
    extraversion_b: f64,
) -> Result<String, String> {
    compile_json(dialog, timings, extraversion_a, extraversion_b, Rendition::Plain)
        .map(|v| v.to_string())
}

/// Both renditions of the final turn, side by side.
pub fn preview_adaptation_json(dialog: &str, timings: &str) -> Result<String, String> {
    let side = |adapted| {
        compile_json(
            dialog,
            timings,
            7.0,
            7.0,
            Rendition::Adaptation {
                adapted,
                responder: None,
            },
        )
    };
    Ok(json!({ "adapted": side(true)?, "nonadapted": side(false)? }).to_string())
}

/// Parameter sets sampled evenly over the extraversion scale.
pub fn personality_curve_json(steps: u32) -> Result<String, String> {
    if steps < 2 {
        return Err("need at least 2 steps".into());
    }
    let anchors = Anchors::default();
    let points = (0..steps)
        .map(|i| {
            let e = 1.0 + 6.0 * f64::from(i) / f64::from(steps - 1);
            let p = anchors.at(e).map_err(|e| e.to_string())?;
            Ok(json!({ "extraversion": e, "cap": p.rate_band.cap(), "params": p }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Value::Array(points).to_string())
}

#[wasm_bindgen]
pub fn compile_timeline(
    dialog: &str,
    timings: &str,
    extraversion_a: f64,
    extraversion_b: f64,
) -> Result<String, JsValue> {
    compile_timeline_json(dialog, timings, extraversion_a, extraversion_b)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn preview_adaptation(dialog: &str, timings: &str) -> Result<String, JsValue> {
    preview_adaptation_json(dialog, timings).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn personality_curve(steps: u32) -> Result<String, JsValue> {
    personality_curve_json(steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bundled_dialog() -> String {
    PROTEST_DIALOG.to_string()
}

#[wasm_bindgen]
pub fn bundled_timings() -> String {
    PROTEST_TIMINGS.to_string()
}
