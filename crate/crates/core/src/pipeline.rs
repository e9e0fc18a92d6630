//! End-to-end compilation of one dialog: align, resolve the adaptation
//! rendition, apply personality, schedule and validate.

use thiserror::Error;

use crate::adaptation::{resolve_variant, strip_adaptation, AdaptationSpec, PlanError, VariantPlan};
use crate::align::{align_strokes, AlignError, TimingError, WordTimingTrack};
use crate::catalog::{CatalogError, GestureCatalog};
use crate::config::ConfigError;
use crate::dsl::{AnnotatedDialog, ParseError, Speaker};
use crate::emitter::{EmitError, ScriptError};
use crate::personality::{apply_personality, ParameterSet, PersonalityError};
use crate::scheduler::{schedule, validate_timeline, Diagnostic, Schedule, ScheduleError, SchedulerConfig};
use crate::time::Millis;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Personality(#[from] PersonalityError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("validation failed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Input(String),
}

/// Which adaptation rendition to compile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rendition {
    /// Every turn non-adapted.
    Plain,
    /// One side of an adaptation pair; the final turn is the response.
    Adaptation {
        adapted: bool,
        responder: Option<Speaker>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    pub personality_a: ParameterSet,
    pub personality_b: ParameterSet,
    pub rendition: Rendition,
    pub adaptation: AdaptationSpec,
    pub scheduler: SchedulerConfig,
    pub lead: Millis,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            personality_a: ParameterSet::EXTRAVERT,
            personality_b: ParameterSet::EXTRAVERT,
            rendition: Rendition::Plain,
            adaptation: AdaptationSpec::default(),
            scheduler: SchedulerConfig::default(),
            lead: Millis(200),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    /// The dialog after alignment, rendition and personality.
    pub dialog: AnnotatedDialog,
    pub schedule: Schedule,
}

/// Resolves a rendition into a dialog ready for personality.
pub fn render(
    dialog: &AnnotatedDialog,
    rendition: Rendition,
    spec: &AdaptationSpec,
) -> Result<AnnotatedDialog, PipelineError> {
    match rendition {
        Rendition::Plain => Ok(strip_adaptation(dialog)),
        Rendition::Adaptation { adapted, responder } => {
            let mut plan = VariantPlan::for_dialog(dialog, adapted)?;
            if let Some(r) = responder {
                plan.responder = r;
            }
            Ok(resolve_variant(dialog, &plan, spec)?)
        }
    }
}

pub fn compile(
    dialog: &AnnotatedDialog,
    track: Option<&WordTimingTrack>,
    catalog: &GestureCatalog,
    options: &CompileOptions,
) -> Result<Compiled, PipelineError> {
    let aligned = match track {
        Some(t) => align_strokes(dialog, t, options.lead)?,
        None => dialog.clone(),
    };
    let rendered = render(&aligned, options.rendition, &options.adaptation)?;
    let with_a = apply_personality(&rendered, Speaker::A, &options.personality_a, catalog)?;
    let personal = apply_personality(&with_a, Speaker::B, &options.personality_b, catalog)?;
    let schedule = schedule(&personal, catalog, &options.scheduler)?;
    let mut diagnostics = validate_timeline(&schedule.a);
    diagnostics.extend(validate_timeline(&schedule.b));
    if options.scheduler.strict {
        diagnostics.extend(schedule.diagnostics.iter().cloned());
    }
    if !diagnostics.is_empty() {
        return Err(PipelineError::Invalid(diagnostics));
    }
    Ok(Compiled {
        dialog: personal,
        schedule,
    })
}
