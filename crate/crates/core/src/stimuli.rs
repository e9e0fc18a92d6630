//! Stimulus batches for the two experiments.
//!
//! Personality: every story is compiled once with the role extraversions,
//! then packaged twice with the agent genders swapped. Adaptation: every
//! listed version (story plus turn structure) is truncated to its
//! structure and compiled as an adapted / non-adapted pair that shares the
//! context turns and the audio.
//!
//! Output tree:
//!
//! ```text
//! <out>/manifest.json
//! <out>/<bundle-id>/dialog.gdl
//! <out>/<bundle-id>/{A,B}.{json,txt}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adaptation::PlanError;
use crate::align::{parse_word_timings, WordTimingTrack};
use crate::catalog::GestureCatalog;
use crate::config::PipelineConfig;
use crate::dsl::{format_dialog, parse_dialog, AnnotatedDialog, Speaker};
use crate::emitter::{emit_document, emit_script, ScriptDocument, ScriptFormat};
use crate::personality::Anchors;
use crate::pipeline::{compile, CompileOptions, PipelineError, Rendition};
use crate::scheduler::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Personality,
    Adaptation,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Personality => "personality",
            Experiment::Adaptation => "adaptation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn other(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }

    fn voice(self) -> &'static str {
        match self {
            Gender::Female => "Crystal",
            Gender::Male => "Mike",
        }
    }

    fn model(self) -> &'static str {
        match self {
            Gender::Female => "female_agent",
            Gender::Male => "male_agent",
        }
    }
}

/// Which gender the extraverted role is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenderAssignment {
    #[serde(rename = "F-extravert")]
    FemaleExtravert,
    #[serde(rename = "M-extravert")]
    MaleExtravert,
}

impl GenderAssignment {
    pub fn swapped(self) -> GenderAssignment {
        match self {
            GenderAssignment::FemaleExtravert => GenderAssignment::MaleExtravert,
            GenderAssignment::MaleExtravert => GenderAssignment::FemaleExtravert,
        }
    }

    fn slug(self) -> &'static str {
        match self {
            GenderAssignment::FemaleExtravert => "f-extravert",
            GenderAssignment::MaleExtravert => "m-extravert",
        }
    }

    fn extravert_gender(self) -> Gender {
        match self {
            GenderAssignment::FemaleExtravert => Gender::Female,
            GenderAssignment::MaleExtravert => Gender::Male,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMeta {
    pub role: Speaker,
    pub gender: Gender,
    pub model: String,
    pub voice: String,
    pub extraversion: f64,
}

fn agent(role: Speaker, gender: Gender, extraversion: f64) -> AgentMeta {
    AgentMeta {
        role,
        gender,
        model: gender.model().to_string(),
        voice: gender.voice().to_string(),
        extraversion,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
pub enum StimulusPlan {
    Personality {
        story_id: String,
        extraverted_role: Speaker,
        genders: GenderAssignment,
    },
    Adaptation {
        story_id: String,
        structure: String,
        responder: Speaker,
        adapted: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptFile {
    pub name: String,
    pub sha256: String,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

impl ScriptFile {
    fn new(name: String, bytes: Vec<u8>) -> ScriptFile {
        ScriptFile {
            name,
            sha256: hex_digest(&bytes),
            bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bundle {
    pub id: String,
    /// Letter shown to survey participants.
    pub label: String,
    /// Version name used in judgment data, e.g. `Garden ABA`.
    pub version: String,
    pub plan: StimulusPlan,
    pub agents: [AgentMeta; 2],
    pub audio_duration: String,
    pub files: Vec<ScriptFile>,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub documents: [ScriptDocument; 2],
}

impl Bundle {
    pub fn file(&self, name: &str) -> Option<&ScriptFile> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn document(&self, speaker: Speaker) -> &ScriptDocument {
        &self.documents[speaker as usize]
    }

    /// The same bundle with the agents' genders exchanged.
    pub fn with_swapped_genders(&self) -> Bundle {
        let mut out = self.clone();
        for a in &mut out.agents {
            *a = agent(a.role, a.gender.other(), a.extraversion);
        }
        if let StimulusPlan::Personality {
            story_id, genders, ..
        } = &mut out.plan
        {
            *genders = genders.swapped();
            out.id = format!("personality-{story_id}-{}", genders.slug());
        }
        out
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A story with its timing track.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryInput {
    pub id: String,
    pub dialog: AnnotatedDialog,
    pub track: WordTimingTrack,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchSettings {
    pub config: PipelineConfig,
    pub anchors: Anchors,
    /// Role extraversions; the experiment default when absent.
    pub extraversion: Option<(f64, f64)>,
    pub strict: bool,
}

impl BatchSettings {
    /// Extraversion of A and B, falling back to the experiment defaults.
    pub fn extraversion(&self, experiment: Experiment) -> (f64, f64) {
        self.extraversion.unwrap_or(match experiment {
            Experiment::Personality => (7.0, 1.0),
            Experiment::Adaptation => (7.0, 7.0),
        })
    }

    fn options(&self, experiment: Experiment) -> Result<CompileOptions, PipelineError> {
        let (ea, eb) = self.extraversion(experiment);
        Ok(CompileOptions {
            personality_a: self.anchors.at(ea)?,
            personality_b: self.anchors.at(eb)?,
            rendition: Rendition::Plain,
            adaptation: self.config.adaptation(),
            scheduler: self.config.scheduler(self.strict)?,
            lead: self.config.lead()?,
        })
    }

    pub fn fingerprint(&self) -> String {
        self.config.fingerprint(&self.anchors)
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::Io { context, source }
}

/// Loads every `<id>.gdl` in `stories` with its `<id>.tsv` track from
/// `timings`, sorted by id.
pub fn load_stories(stories: &Path, timings: &Path) -> Result<Vec<StoryInput>, PipelineError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(stories)
        .map_err(io_err(format!("reading {}", stories.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "gdl"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| PipelineError::Input(format!("bad story file name {}", path.display())))?
            .to_string();
        let text = fs::read_to_string(&path).map_err(io_err(format!("reading {}", path.display())))?;
        let mut dialog = parse_dialog(&text).map_err(|e| {
            PipelineError::Input(format!("{}:{e}", path.display()))
        })?;
        if dialog.story_id.is_empty() {
            dialog.story_id = id.clone();
        } else if dialog.story_id != id {
            return Err(PipelineError::Input(format!(
                "{} declares story `{}`",
                path.display(),
                dialog.story_id
            )));
        }
        let tpath = timings.join(format!("{id}.tsv"));
        let ttext = fs::read_to_string(&tpath).map_err(io_err(format!("reading {}", tpath.display())))?;
        let track = parse_word_timings(&ttext)
            .map_err(|e| PipelineError::Input(format!("{}: {e}", tpath.display())))?;
        out.push(StoryInput { id, dialog, track });
    }
    if out.is_empty() {
        return Err(PipelineError::Input(format!(
            "no .gdl stories in {}",
            stories.display()
        )));
    }
    Ok(out)
}

/// Reads `versions.txt`: one `story STRUCTURE` pair per line.
pub fn parse_versions(source: &str) -> Result<Vec<(String, String)>, PipelineError> {
    let mut out = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(story), Some(structure), None)
                if structure.chars().all(|c| c == 'A' || c == 'B') =>
            {
                out.push((story.to_string(), structure.to_string()))
            }
            _ => {
                return Err(PipelineError::Input(format!(
                    "versions line {}: expected `story STRUCTURE`",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn version_name(story_id: &str, structure: &str) -> String {
    let mut chars = story_id.chars();
    let cap: String = chars
        .next()
        .map(|c| c.to_uppercase().chain(chars).collect())
        .unwrap_or_default();
    format!("{cap} {structure}")
}

struct Compiled {
    documents: [ScriptDocument; 2],
    files: Vec<ScriptFile>,
    diagnostics: Vec<String>,
}

fn compile_bundle(
    dialog: &AnnotatedDialog,
    track: &WordTimingTrack,
    catalog: &GestureCatalog,
    options: &CompileOptions,
    fingerprint: &str,
) -> Result<Compiled, PipelineError> {
    let c = compile(dialog, Some(track), catalog, options)?;
    let dialog_text = format_dialog(&c.dialog);
    let mut files = vec![ScriptFile::new("dialog.gdl".into(), dialog_text.into_bytes())];
    let mut documents = Vec::new();
    for speaker in [Speaker::A, Speaker::B] {
        let t = c.schedule.timeline(speaker);
        for format in [ScriptFormat::Json, ScriptFormat::Text] {
            let bytes = emit_script(t, &dialog.story_id, fingerprint, format)?;
            files.push(ScriptFile::new(format!("{speaker}.{}", format.extension()), bytes));
        }
        documents.push(ScriptDocument::from_timeline(t, &dialog.story_id, fingerprint));
    }
    let documents: [ScriptDocument; 2] = documents.try_into().expect("two speakers");
    Ok(Compiled {
        documents,
        files,
        diagnostics: c.schedule.diagnostics.iter().map(Diagnostic::to_string).collect(),
    })
}

/// Two bundles with identical scripts, differing in which gender plays the
/// extraverted role.
pub fn build_personality_pair(
    story: &StoryInput,
    catalog: &GestureCatalog,
    settings: &BatchSettings,
) -> Result<[Bundle; 2], PipelineError> {
    let (ea, eb) = settings.extraversion(Experiment::Personality);
    let options = settings.options(Experiment::Personality)?;
    let compiled = compile_bundle(&story.dialog, &story.track, catalog, &options, &settings.fingerprint())?;
    let extraverted_role = if eb > ea { Speaker::B } else { Speaker::A };
    let make = |genders: GenderAssignment| {
        let g_extra = genders.extravert_gender();
        let gender_of = |role: Speaker| {
            if role == extraverted_role {
                g_extra
            } else {
                g_extra.other()
            }
        };
        Bundle {
            id: format!("personality-{}-{}", story.id, genders.slug()),
            label: String::new(),
            version: version_name(&story.id, &story.dialog.structure()),
            plan: StimulusPlan::Personality {
                story_id: story.id.clone(),
                extraverted_role,
                genders,
            },
            agents: [
                agent(Speaker::A, gender_of(Speaker::A), ea),
                agent(Speaker::B, gender_of(Speaker::B), eb),
            ],
            audio_duration: compiled.documents[0].header.audio_duration.to_string(),
            files: compiled.files.clone(),
            diagnostics: compiled.diagnostics.clone(),
            documents: compiled.documents.clone(),
        }
    };
    Ok([
        make(GenderAssignment::FemaleExtravert),
        make(GenderAssignment::MaleExtravert),
    ])
}

/// Adapted and non-adapted bundles for one version of a story.
pub fn build_adaptation_pair(
    story: &StoryInput,
    structure: &str,
    catalog: &GestureCatalog,
    settings: &BatchSettings,
) -> Result<[Bundle; 2], PipelineError> {
    let actual = story.dialog.structure();
    if structure.is_empty() || !actual.starts_with(structure) {
        return Err(PlanError::Structure {
            structure: structure.to_string(),
            actual,
        }
        .into());
    }
    let turns = structure.len();
    // The clip ends where the next turn's speech begins.
    let audio = story
        .track
        .turn_start(turns + 1)
        .or(story.dialog.audio_duration);
    let dialog = story.dialog.truncated(turns, audio);
    let responder = dialog.last_turn().expect("non-empty structure").speaker;
    let (ea, eb) = settings.extraversion(Experiment::Adaptation);
    let base = settings.options(Experiment::Adaptation)?;
    let mut out = Vec::new();
    for adapted in [true, false] {
        let options = CompileOptions {
            rendition: Rendition::Adaptation {
                adapted,
                responder: Some(responder),
            },
            ..base.clone()
        };
        let compiled = compile_bundle(&dialog, &story.track, catalog, &options, &settings.fingerprint())?;
        let kind = if adapted { "adapted" } else { "nonadapted" };
        out.push(Bundle {
            id: format!("adaptation-{}-{}-{kind}", story.id, structure.to_lowercase()),
            label: String::new(),
            version: version_name(&story.id, structure),
            plan: StimulusPlan::Adaptation {
                story_id: story.id.clone(),
                structure: structure.to_string(),
                responder,
                adapted,
            },
            agents: [
                agent(Speaker::A, Gender::Female, ea),
                agent(Speaker::B, Gender::Male, eb),
            ],
            audio_duration: compiled.documents[0].header.audio_duration.to_string(),
            files: compiled.files,
            diagnostics: compiled.diagnostics,
            documents: compiled.documents,
        });
    }
    Ok(out.try_into().expect("two renditions"))
}

/// Context events (turns before the response) of both speakers, serialized.
pub fn context_bytes(bundle: &Bundle, response_turn: usize) -> Vec<u8> {
    let mut out = Vec::new();
    for doc in &bundle.documents {
        let context = ScriptDocument {
            header: doc.header.clone(),
            events: doc.events_before_turn(response_turn).into_iter().cloned().collect(),
        };
        out.extend(emit_document(&context, ScriptFormat::Text));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Batch {
    pub experiment: Experiment,
    pub catalog_version: String,
    pub config: String,
    pub bundles: Vec<Bundle>,
    pub checks: Vec<Check>,
}

impl Batch {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn manifest_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("batch serializes");
        s.push('\n');
        s
    }
}

/// Spreadsheet-style letters: 0 is `A`, 25 is `Z`, 26 is `AA`.
fn letters(rank: usize) -> String {
    let mut n = rank;
    let mut label = String::new();
    loop {
        label.insert(0, (b'A' + (n % 26) as u8) as char);
        if n < 26 {
            return label;
        }
        n = n / 26 - 1;
    }
}

/// Survey letters: bundles ordered by the hash of their id get A, B, C, ...
fn assign_labels(bundles: &mut [Bundle]) {
    let mut order: Vec<usize> = (0..bundles.len()).collect();
    order.sort_by_key(|&i| hex_digest(bundles[i].id.as_bytes()));
    for (rank, i) in order.into_iter().enumerate() {
        bundles[i].label = letters(rank);
    }
}

pub fn build_batch(
    experiment: Experiment,
    stories: &[StoryInput],
    versions: &[(String, String)],
    catalog: &GestureCatalog,
    settings: &BatchSettings,
) -> Result<Batch, PipelineError> {
    let mut bundles = Vec::new();
    let mut checks = Vec::new();
    match experiment {
        Experiment::Personality => {
            for story in stories {
                let pair = build_personality_pair(story, catalog, settings)?;
                let same = pair[0].files == pair[1].files;
                checks.push(Check {
                    name: format!("identical-scripts:{}", story.id),
                    passed: same,
                    detail: "gender-swapped bundles carry the same scripts".into(),
                });
                bundles.extend(pair);
            }
            let expected = 2 * stories.len();
            checks.push(Check {
                name: "bundle-count".into(),
                passed: bundles.len() == expected,
                detail: format!("{} bundles for {} stories", bundles.len(), stories.len()),
            });
        }
        Experiment::Adaptation => {
            let by_id: BTreeMap<&str, &StoryInput> =
                stories.iter().map(|s| (s.id.as_str(), s)).collect();
            for (story_id, structure) in versions {
                let story = by_id.get(story_id.as_str()).ok_or_else(|| {
                    PipelineError::Input(format!("version names unknown story `{story_id}`"))
                })?;
                let pair = build_adaptation_pair(story, structure, catalog, settings)?;
                let response = structure.len();
                let same = context_bytes(&pair[0], response) == context_bytes(&pair[1], response);
                checks.push(Check {
                    name: format!("context-invariance:{}", pair[0].version),
                    passed: same,
                    detail: format!("events of turns 1..{} match across the pair", response - 1),
                });
                bundles.extend(pair);
            }
            checks.push(Check {
                name: "bundle-count".into(),
                passed: bundles.len() == 2 * versions.len(),
                detail: format!("{} bundles for {} versions", bundles.len(), versions.len()),
            });
        }
    }
    assign_labels(&mut bundles);
    Ok(Batch {
        experiment,
        catalog_version: catalog.version.clone(),
        config: settings.fingerprint(),
        bundles,
        checks,
    })
}

/// Writes every bundle directory and `manifest.json` under `out`.
pub fn write_batch(batch: &Batch, out: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(out).map_err(io_err(format!("creating {}", out.display())))?;
    for bundle in &batch.bundles {
        let dir = out.join(&bundle.id);
        fs::create_dir_all(&dir).map_err(io_err(format!("creating {}", dir.display())))?;
        for f in &bundle.files {
            let path = dir.join(&f.name);
            fs::write(&path, &f.bytes).map_err(io_err(format!("writing {}", path.display())))?;
        }
    }
    let path = out.join("manifest.json");
    fs::write(&path, batch.manifest_json()).map_err(io_err(format!("writing {}", path.display())))
}
