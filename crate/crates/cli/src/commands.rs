use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde_json::json;
use simcheck_core::calibration::{
    calibrate, export_scatter, score_samples, write_scatter_csv, LabeledSample, SampleInput,
    ThresholdGrid,
};
use simcheck_core::evaluation::{ablation, evaluate};
use simcheck_core::holistic::{Assessor, AssessorConfig, AssessorTransport, MockTransport};
use simcheck_core::manifest::Manifest;
use simcheck_core::render::Colormap;
use simcheck_core::synth::{generate_corpus, preset_items, CorpusItem, Preset};
use simcheck_core::{ResponseMap, ScoringConfig, Thresholds, Verifier};

use crate::cli::{
    AssessorArgs, CalibrateArgs, Cli, Command, EvaluateArgs, GenCorpusArgs, ScoringArgs, ServeArgs,
    VerifyArgs,
};

pub const EXIT_PRESENT: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ABSENT: i32 = 3;

/// Runs a parsed command, writing its JSON report to `out`, and returns the
/// process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Verify(args) => cmd_verify(args, out),
        Command::Calibrate(args) => cmd_calibrate(args, out),
        Command::GenCorpus(args) => cmd_gen_corpus(args, out),
        Command::Evaluate(args) => cmd_evaluate(args, out),
        Command::Serve(args) => cmd_serve(args),
    }
}

fn load_config(path: Option<&Path>) -> Result<ScoringConfig> {
    match path {
        Some(p) => Ok(ScoringConfig::load(p)?),
        None => Ok(ScoringConfig::default()),
    }
}

/// `s,c,p`, or a JSON file with either bare thresholds or a `thresholds` key.
fn parse_thresholds(arg: Option<&str>) -> Result<Thresholds> {
    let Some(arg) = arg else {
        return Ok(Thresholds::default());
    };
    if let Ok(t) = arg.parse::<Thresholds>() {
        return Ok(t);
    }
    let text = fs::read_to_string(arg)
        .with_context(|| format!("`{arg}` is neither `s,c,p` nor a readable thresholds file"))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{arg}: malformed JSON"))?;
    let inner = value.get("thresholds").cloned().unwrap_or(value);
    let t: Thresholds =
        serde_json::from_value(inner).with_context(|| format!("{arg}: no thresholds found"))?;
    t.validate()?;
    Ok(t)
}

fn build_assessor(args: &AssessorArgs) -> Result<Option<Assessor>> {
    if !args.with_assessor {
        return Ok(None);
    }
    let config = match &args.assessor_config {
        Some(p) => AssessorConfig::load(p)?,
        None => AssessorConfig::default(),
    };
    let transport: Arc<dyn AssessorTransport> = match &args.assessor_transcript {
        Some(p) => Arc::new(MockTransport::from_transcript(p)?),
        None => Arc::new(simcheck_core::holistic::HttpTransport::new(&config)?),
    };
    Ok(Some(Assessor::new(config, transport)?))
}

fn build_verifier(scoring: &ScoringArgs, assessor: &AssessorArgs) -> Result<Verifier> {
    let config = load_config(scoring.config.as_deref())?;
    let thresholds = parse_thresholds(scoring.thresholds.as_deref())?;
    Ok(Verifier::new(config, thresholds)?
        .with_mask(scoring.mask)?
        .with_assessor(build_assessor(assessor)?))
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load_manifest(path: &Path, split: Option<&str>) -> Result<Manifest> {
    let manifest = Manifest::load(path)?;
    Ok(match split {
        Some(s) => manifest.with_split(s),
        None => manifest,
    })
}

pub fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let mut verifier = build_verifier(&args.scoring, &args.assessor)?;
    verifier.colormap = args.colormap.parse::<Colormap>()?;
    verifier.scale = args.scale;
    let map = ResponseMap::load(&args.map)?;
    let (verdict, heatmap) = verifier.verify_with_heatmap(&map, args.emit_heatmap.is_some())?;
    if let (Some(path), Some(image)) = (&args.emit_heatmap, &heatmap) {
        image.write_png(path)?;
    }
    write_json(out, &verdict)?;
    Ok(if verdict.final_decision {
        EXIT_PRESENT
    } else {
        EXIT_ABSENT
    })
}

pub fn cmd_calibrate(args: CalibrateArgs, out: &mut dyn Write) -> Result<i32> {
    let config = load_config(args.config.as_deref())?;
    let grid = match &args.grid {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("{}: malformed grid", p.display()))?
        }
        None => ThresholdGrid::uniform(args.grid_points)?,
    };
    let manifest = load_manifest(&args.manifest, args.split.as_deref())?;
    let samples: Vec<LabeledSample> = manifest
        .load_samples()?
        .into_iter()
        .map(|s| LabeledSample {
            input: SampleInput::Map(s.map),
            label: s.label,
        })
        .collect();
    let scored = score_samples(&samples, &config)?;
    let result = calibrate(&scored, &grid)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let result_path = args.out.join("calibration.json");
    let scatter_path = args.out.join("scatter.csv");
    fs::write(&result_path, serde_json::to_vec_pretty(&result)?)
        .with_context(|| format!("writing {}", result_path.display()))?;
    let mut csv = Vec::new();
    write_scatter_csv(&export_scatter(&scored), &mut csv)?;
    fs::write(&scatter_path, csv).with_context(|| format!("writing {}", scatter_path.display()))?;

    write_json(
        out,
        &json!({
            "thresholds": result.thresholds,
            "objective_value": result.objective_value,
            "positive_total": result.positive_total,
            "negative_total": result.negative_total,
            "grid_points": grid.len(),
            "calibration": result_path,
            "scatter": scatter_path,
        }),
    )?;
    Ok(0)
}

pub fn cmd_gen_corpus(args: GenCorpusArgs, out: &mut dyn Write) -> Result<i32> {
    let items: Vec<CorpusItem> = match (&args.preset, &args.spec) {
        (Some(name), _) => preset_items(name.parse::<Preset>()?, args.seed),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("{}: malformed spec list", path.display()))?
        }
        (None, None) => bail!("either --preset or --spec is required"),
    };
    let summary = generate_corpus(&items, &args.out)?;
    let mut splits = std::collections::BTreeMap::<String, [usize; 2]>::new();
    for e in &summary.manifest.entries {
        let slot = splits
            .entry(e.split.clone().unwrap_or_else(|| "all".into()))
            .or_default();
        slot[usize::from(!e.label.is_present())] += 1;
    }
    let splits: serde_json::Map<String, serde_json::Value> = splits
        .into_iter()
        .map(|(k, [p, a])| (k, json!({"present": p, "absent": a})))
        .collect();
    write_json(
        out,
        &json!({
            "manifest": summary.manifest_path,
            "entries": summary.manifest.entries.len(),
            "splits": splits,
            "manifest_sha256": summary.manifest_sha256,
            "generator": simcheck_core::synth::GENERATOR,
            "rng": simcheck_core::synth::RNG_ALGORITHM,
        }),
    )?;
    Ok(0)
}

pub fn cmd_evaluate(args: EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    if args.all_masks && args.assessor.with_assessor {
        bail!("--all-masks tabulates the quantitative decision only; drop --with-assessor");
    }
    let verifier = build_verifier(&args.scoring, &args.assessor)?;
    let manifest = load_manifest(&args.manifest, args.split.as_deref())?;
    let samples = manifest.load_samples()?;

    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(&mut *out),
    };

    if args.all_masks {
        let rows = ablation(&samples, &verifier.config, &verifier.thresholds)?;
        for r in &rows {
            eprintln!(
                "{:<3}  positive {:.3}  negative {:.3}  overall {:.3}",
                r.mask.to_string(),
                r.positive_acc,
                r.negative_acc,
                r.overall_acc
            );
        }
        write_json(&mut *sink, &rows)?;
    } else {
        let report = evaluate(&samples, &verifier)?;
        eprintln!(
            "{:<3}  positive {:.3}  negative {:.3}  overall {:.3}",
            report.mask.to_string(),
            report.positive_acc,
            report.negative_acc,
            report.overall_acc
        );
        write_json(&mut *sink, &report)?;
    }
    Ok(0)
}

pub fn cmd_serve(args: ServeArgs) -> Result<i32> {
    // built outside the runtime: the HTTP assessor transport is blocking
    let verifier = build_verifier(&args.scoring, &args.assessor)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.bind)
            .await
            .with_context(|| format!("binding {}", args.bind))?;
        tracing::info!(addr = %listener.local_addr()?, "listening");
        crate::server::serve(listener, verifier).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(0)
}
