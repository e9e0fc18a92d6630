//! The published JSON schema agrees with what the emitter writes.

use std::collections::BTreeSet;
use std::path::Path;

use gesturec_core::catalog::fixture_catalog;
use gesturec_core::stimuli::{build_batch, load_stories, BatchSettings, Experiment};
use serde_json::Value;

fn schema() -> Value {
    let p = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/script.schema.json");
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn strings(v: &Value) -> BTreeSet<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}

#[test]
fn emitted_scripts_fit_the_schema() {
    let schema = schema();
    let root_props = keys(&schema["properties"]);
    let event = &schema["$defs"]["event"];
    let event_props = keys(&event["properties"]);
    let event_required = strings(&event["required"]);
    let feature_props = keys(&schema["$defs"]["features"]["properties"]);
    let kinds = strings(&event["properties"]["kind"]["enum"]);
    let arms = strings(&event["properties"]["arm"]["enum"]);
    let hands = strings(&event["properties"]["hand"]["enum"]);
    assert_eq!(strings(&schema["required"]), root_props);

    let data = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"));
    let stories = load_stories(&data.join("stories"), &data.join("timings")).unwrap();
    let batch = build_batch(Experiment::Personality, &stories, &[], &fixture_catalog(), &BatchSettings::default()).unwrap();
    let mut seen_kinds = BTreeSet::new();
    for b in &batch.bundles {
        for name in ["A.json", "B.json"] {
            let v: Value = serde_json::from_slice(&b.file(name).unwrap().bytes).unwrap();
            assert_eq!(keys(&v), root_props);
            assert_eq!(v["format"], schema["properties"]["format"]["const"]);
            for e in v["events"].as_array().unwrap() {
                let k = keys(e);
                assert!(event_required.is_subset(&k), "{e}");
                assert!(k.is_subset(&event_props), "{e}");
                let kind = e["kind"].as_str().unwrap();
                seen_kinds.insert(kind.to_string());
                assert!(kinds.contains(kind));
                assert!(arms.contains(e["arm"].as_str().unwrap()));
                if let Some(h) = e.get("hand") {
                    assert!(hands.contains(h.as_str().unwrap()));
                }
                assert_eq!(kind == "stroke", e.get("features").is_some());
                assert_eq!(kind == "retract", e.get("gesture").is_none());
                if let Some(f) = e.get("features") {
                    assert_eq!(keys(f), feature_props);
                }
            }
        }
    }
    assert_eq!(seen_kinds, kinds);
}
