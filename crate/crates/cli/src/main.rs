use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use gesturec_core::align::parse_word_timings;
use gesturec_core::analysis::{analyze, read_judgments};
use gesturec_core::catalog::{load_catalog, GestureCatalog};
use gesturec_core::config::PipelineConfig;
use gesturec_core::dsl::{parse_dialog, Speaker};
use gesturec_core::emitter::{emit_script, read_script, ScriptFormat};
use gesturec_core::personality::Anchors;
use gesturec_core::pipeline::{compile, CompileOptions, Rendition};
use gesturec_core::scheduler::validate_timeline;
use gesturec_core::stimuli::{
    build_batch, load_stories, parse_versions, write_batch, BatchSettings, Experiment,
};

#[derive(Parser)]
#[command(name = "gesturec", version, about = "Compile gesture-annotated dialogs into timed gesture scripts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Personality,
    Adaptation,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Adapted,
    Nonadapted,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
    Both,
}

#[derive(clap::Args)]
struct Settings {
    /// Pipeline settings (TOML). Unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extraversion anchor file.
    #[arg(long)]
    anchors: Option<PathBuf>,
    /// Per-speaker extraversion on the 1-7 scale, e.g. `A=7,B=1`.
    #[arg(long, value_parser = parse_extraversion)]
    extraversion: Option<(Option<f64>, Option<f64>)>,
    /// Treat dropped overlapping strokes as errors.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build every stimulus bundle of one experiment.
    Build {
        #[arg(long, value_enum)]
        experiment: ExperimentArg,
        /// Directory of `.gdl` dialogs.
        #[arg(long)]
        stories: PathBuf,
        /// Directory of `.tsv` word timings, one per story.
        #[arg(long)]
        timings: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        /// Story versions for the adaptation experiment. Defaults to
        /// `versions.txt` in the stories directory.
        #[arg(long)]
        versions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Compile one dialog into a script per speaker.
    Compile {
        #[arg(long)]
        dialog: PathBuf,
        /// Word timings; without them stroke times are used as written.
        #[arg(long)]
        timings: Option<PathBuf>,
        #[arg(long)]
        catalog: PathBuf,
        /// Render the final turn as one side of an adaptation pair.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Expected speaker of the final turn.
        #[arg(long, requires = "variant", value_parser = parse_speaker)]
        responder: Option<Speaker>,
        #[arg(long, value_enum, default_value = "both")]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Check a script file against the phase rules.
    Check { script: PathBuf },
    /// Tables and tests over a judgments CSV.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        /// Report path; `.json` writes JSON, anything else text.
        #[arg(long)]
        report: PathBuf,
    },
}

fn parse_speaker(s: &str) -> Result<Speaker, String> {
    match s {
        "A" | "a" => Ok(Speaker::A),
        "B" | "b" => Ok(Speaker::B),
        _ => Err(format!("`{s}` is not A or B")),
    }
}

fn parse_extraversion(s: &str) -> Result<(Option<f64>, Option<f64>), String> {
    let mut out = (None, None);
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (who, value) = part
            .split_once('=')
            .ok_or_else(|| format!("`{part}` should look like A=7"))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("`{value}` is not a number"))?;
        if !(1.0..=7.0).contains(&v) {
            return Err(format!("extraversion {v} is outside 1-7"));
        }
        match parse_speaker(who.trim())? {
            Speaker::A => out.0 = Some(v),
            Speaker::B => out.1 = Some(v),
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn catalog(path: &Path) -> Result<GestureCatalog> {
    load_catalog(&read(path)?).with_context(|| format!("loading catalog {}", path.display()))
}

impl Settings {
    fn batch(&self, experiment: Experiment) -> Result<BatchSettings> {
        let config = match &self.config {
            Some(p) => PipelineConfig::from_toml(&read(p)?)
                .with_context(|| format!("loading {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        let anchors = match &self.anchors {
            Some(p) => {
                Anchors::parse(&read(p)?).with_context(|| format!("loading {}", p.display()))?
            }
            None => Anchors::default(),
        };
        let mut settings = BatchSettings {
            config,
            anchors,
            extraversion: None,
            strict: self.strict,
        };
        if let Some((a, b)) = self.extraversion {
            let (da, db) = settings.extraversion(experiment);
            settings.extraversion = Some((a.unwrap_or(da), b.unwrap_or(db)));
        }
        Ok(settings)
    }
}

fn build(
    experiment: ExperimentArg,
    stories: &Path,
    timings: &Path,
    catalog_path: &Path,
    versions: Option<&Path>,
    out: &Path,
    settings: &Settings,
) -> Result<bool> {
    let experiment = match experiment {
        ExperimentArg::Personality => Experiment::Personality,
        ExperimentArg::Adaptation => Experiment::Adaptation,
    };
    let batch_settings = settings.batch(experiment)?;
    let catalog = catalog(catalog_path)?;
    let inputs = load_stories(stories, timings)?;
    let versions = match experiment {
        Experiment::Personality => Vec::new(),
        Experiment::Adaptation => {
            let path = versions.map_or_else(|| stories.join("versions.txt"), Path::to_path_buf);
            parse_versions(&read(&path)?).with_context(|| format!("loading {}", path.display()))?
        }
    };
    let batch = build_batch(experiment, &inputs, &versions, &catalog, &batch_settings)?;
    write_batch(&batch, out)?;
    for b in &batch.bundles {
        println!("{}  {}", b.label, b.id);
        for d in &b.diagnostics {
            eprintln!("  warning: {d}");
        }
    }
    for c in batch.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    println!(
        "{} bundles written to {}",
        batch.bundles.len(),
        out.join("manifest.json").display()
    );
    Ok(batch.passed())
}

#[allow(clippy::too_many_arguments)]
fn compile_one(
    dialog_path: &Path,
    timings: Option<&Path>,
    catalog_path: &Path,
    variant: Option<VariantArg>,
    responder: Option<Speaker>,
    format: FormatArg,
    out: &Path,
    settings: &Settings,
) -> Result<bool> {
    let experiment = if variant.is_some() {
        Experiment::Adaptation
    } else {
        Experiment::Personality
    };
    let s = settings.batch(experiment)?;
    // A plain compile keeps both speakers at the annotation default unless told otherwise.
    let (ea, eb) = match (variant, s.extraversion) {
        (_, Some(pair)) => pair,
        (None, None) => (7.0, 7.0),
        (Some(_), None) => s.extraversion(experiment),
    };
    let dialog = parse_dialog(&read(dialog_path)?)
        .with_context(|| format!("parsing {}", dialog_path.display()))?;
    let track = match timings {
        Some(p) => Some(
            parse_word_timings(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        ),
        None => None,
    };
    let catalog = catalog(catalog_path)?;
    let options = CompileOptions {
        personality_a: s.anchors.at(ea)?,
        personality_b: s.anchors.at(eb)?,
        rendition: match variant {
            None => Rendition::Plain,
            Some(v) => Rendition::Adaptation {
                adapted: matches!(v, VariantArg::Adapted),
                responder,
            },
        },
        adaptation: s.config.adaptation(),
        scheduler: s.config.scheduler(s.strict)?,
        lead: s.config.lead()?,
    };
    let compiled = compile(&dialog, track.as_ref(), &catalog, &options)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let formats: &[ScriptFormat] = match format {
        FormatArg::Json => &[ScriptFormat::Json],
        FormatArg::Text => &[ScriptFormat::Text],
        FormatArg::Both => &[ScriptFormat::Json, ScriptFormat::Text],
    };
    let fingerprint = s.fingerprint();
    for speaker in [Speaker::A, Speaker::B] {
        let t = compiled.schedule.timeline(speaker);
        for &f in formats {
            let bytes = emit_script(t, &dialog.story_id, &fingerprint, f)?;
            let path = out.join(format!("{speaker}.{}", f.extension()));
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
    }
    for d in &compiled.schedule.diagnostics {
        eprintln!("warning: {d}");
    }
    Ok(true)
}

fn check(path: &Path) -> Result<bool> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = read_script(&bytes).with_context(|| format!("reading {}", path.display()))?;
    let diagnostics = validate_timeline(&doc.to_timeline());
    for d in &diagnostics {
        println!("{d}");
    }
    if diagnostics.is_empty() {
        println!("{}: {} events, valid", path.display(), doc.events.len());
    }
    Ok(diagnostics.is_empty())
}

fn analyze_file(input: &Path, report: &Path) -> Result<bool> {
    let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let records = read_judgments(file).with_context(|| format!("reading {}", input.display()))?;
    if records.is_empty() {
        bail!("{} has no records", input.display());
    }
    let r = analyze(&records);
    let text = r.to_text();
    let body = if report.extension().is_some_and(|e| e == "json") {
        r.to_json()
    } else {
        text.clone()
    };
    if let Some(dir) = report.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(report, body).with_context(|| format!("writing {}", report.display()))?;
    print!("{text}");
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build {
            experiment,
            stories,
            timings,
            catalog,
            versions,
            out,
            settings,
        } => build(
            experiment,
            &stories,
            &timings,
            &catalog,
            versions.as_deref(),
            &out,
            &settings,
        ),
        Command::Compile {
            dialog,
            timings,
            catalog,
            variant,
            responder,
            format,
            out,
            settings,
        } => compile_one(
            &dialog,
            timings.as_deref(),
            &catalog,
            variant,
            responder,
            format,
            &out,
            &settings,
        ),
        Command::Check { script } => check(&script),
        Command::Analyze { input, report } => analyze_file(&input, &report),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
