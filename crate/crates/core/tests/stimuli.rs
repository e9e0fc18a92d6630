use std::path::Path;

use gesturec_core::catalog::fixture_catalog;
use gesturec_core::dsl::Speaker;
use gesturec_core::scheduler::PhaseKind;
use gesturec_core::stimuli::{
    build_adaptation_pair, build_batch, build_personality_pair, load_stories, parse_versions,
    write_batch, BatchSettings, Experiment, StimulusPlan, StoryInput,
};

fn data() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn stories() -> Vec<StoryInput> {
    load_stories(&data().join("stories"), &data().join("timings")).unwrap()
}

fn versions() -> Vec<(String, String)> {
    parse_versions(&std::fs::read_to_string(data().join("stories/versions.txt")).unwrap()).unwrap()
}

fn strict() -> BatchSettings {
    BatchSettings {
        strict: true,
        ..BatchSettings::default()
    }
}

#[test]
fn personality_batch() {
    let batch = build_batch(Experiment::Personality, &stories(), &[], &fixture_catalog(), &strict())
        .unwrap();
    assert_eq!(batch.bundles.len(), 8);
    assert!(batch.passed(), "{:?}", batch.checks);
    let mut labels: Vec<_> = batch.bundles.iter().map(|b| b.label.clone()).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels.len(), 8);
}

#[test]
fn adaptation_batch() {
    let batch = build_batch(
        Experiment::Adaptation,
        &stories(),
        &versions(),
        &fixture_catalog(),
        &strict(),
    )
    .unwrap();
    assert_eq!(batch.bundles.len(), 16);
    assert!(batch.passed(), "{:?}", batch.checks);
}

#[test]
fn gender_swap_is_an_involution() {
    let s = stories();
    let pair = build_personality_pair(&s[0], &fixture_catalog(), &strict()).unwrap();
    assert_eq!(pair[0].with_swapped_genders(), pair[1]);
    assert_eq!(pair[0].with_swapped_genders().with_swapped_genders(), pair[0]);
    assert_eq!(pair[0].files, pair[1].files);
    assert_ne!(pair[0].agents, pair[1].agents);
}

#[test]
fn identical_profiles_differ_only_in_metadata() {
    let settings = BatchSettings {
        extraversion: Some((4.0, 4.0)),
        ..strict()
    };
    let s = stories();
    let pair = build_personality_pair(&s[1], &fixture_catalog(), &settings).unwrap();
    assert_eq!(pair[0].files, pair[1].files);
    assert_eq!(pair[0].documents, pair[1].documents);
}

#[test]
fn garden_aba_truncates_to_three_turns() {
    let s = stories();
    let garden = s.iter().find(|s| s.id == "garden").unwrap();
    let pair = build_adaptation_pair(garden, "ABA", &fixture_catalog(), &strict()).unwrap();
    match &pair[0].plan {
        StimulusPlan::Adaptation {
            responder,
            adapted,
            ..
        } => {
            assert_eq!(*responder, Speaker::A);
            assert!(*adapted);
        }
        other => panic!("{other:?}"),
    }
    let max_turn = pair[0]
        .documents
        .iter()
        .flat_map(|d| &d.events)
        .map(|e| e.turn)
        .max()
        .unwrap();
    assert!(max_turn <= 3);
    let audio = garden.track.turn_start(4).unwrap();
    assert_eq!(pair[0].document(Speaker::A).header.audio_duration, audio);
    assert_eq!(pair[1].document(Speaker::B).header.audio_duration, audio);
    assert!(build_adaptation_pair(garden, "BAB", &fixture_catalog(), &strict()).is_err());
}

#[test]
fn adapted_response_has_at_least_as_many_strokes() {
    for story in stories() {
        for (id, structure) in versions() {
            if id != story.id {
                continue;
            }
            let pair = build_adaptation_pair(&story, &structure, &fixture_catalog(), &strict()).unwrap();
            let n = structure.len();
            let count = |i: usize| {
                pair[i]
                    .documents
                    .iter()
                    .flat_map(|d| &d.events)
                    .filter(|e| e.kind == PhaseKind::Stroke && e.turn == n)
                    .count()
            };
            assert!(count(0) >= count(1), "{id} {structure}");
        }
    }
}

#[test]
fn written_tree() {
    let dir = tempfile::tempdir().unwrap();
    let batch = build_batch(Experiment::Personality, &stories(), &[], &fixture_catalog(), &strict())
        .unwrap();
    write_batch(&batch, dir.path()).unwrap();
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["bundles"].as_array().unwrap().len(), 8);
    for b in &batch.bundles {
        for f in ["dialog.gdl", "A.json", "A.txt", "B.json", "B.txt"] {
            assert!(dir.path().join(&b.id).join(f).is_file(), "{}/{f}", b.id);
        }
    }
}
