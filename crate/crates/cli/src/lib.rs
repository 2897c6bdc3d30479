//! Subcommands of the `deadair` executable. Data goes to stdout or files;
//! the resolved configuration and all diagnostics go to stderr.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use deadair_core::audio::{clip_from_mulaw, read_wav};
use deadair_core::dataset::{dataset_from_records, read_feature_csv, write_feature_csv};
use deadair_core::dsp::stft;
use deadair_core::eval::{
    confusion, cross_validate, metrics, ConfusionCounts, CvConfig, Metrics, ModelKind, Sweep,
};
use deadair_core::learn::{load_model, save_model};
use deadair_core::synth::{write_corpus, CorpusConfig, CorpusManifest, MANIFEST_FILE};
use deadair_core::{
    AudioClip, Detector, FeatureRecord, Featurizer, ForestParams, Label, LinearParams, Loss,
    SilencePolicy, StftConfig,
};
use rayon::prelude::*;
use serde::Serialize;

const AUDIO_EXTENSIONS: &[&str] = &["wav", "ul", "mulaw", "mu", "raw"];

#[derive(Debug, Parser)]
#[command(name = "deadair", version, about = "Dead-air telephony SPAM detection")]
pub struct Cli {
    /// Global PRNG seed.
    #[arg(long, global = true, env = "DEADAIR_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic corpus (WAV files plus manifest.json).
    Synth(SynthArgs),
    /// Extract SVD features from audio into a feature CSV.
    Featurize(FeaturizeArgs),
    /// Train a classifier from a feature CSV.
    Train(TrainArgs),
    /// Classify audio files or feature rows; writes JSON lines.
    Predict(PredictArgs),
    /// Stratified shuffle-split cross-validation over a parameter sweep.
    Crossval(CrossvalArgs),
    /// Dump the magnitude spectrogram of one clip as CSV.
    Spec(SpecArgs),
    /// Run the HTTP classification service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeatureArgs {
    /// STFT window length in samples (power of two).
    #[arg(long, default_value_t = 256)]
    pub window_size: usize,
    /// STFT hop in samples.
    #[arg(long, default_value_t = 128)]
    pub hop: usize,
    /// Number of leading basis spectra kept as features.
    #[arg(long, default_value_t = 3)]
    pub top_bases: usize,
}

impl FeatureArgs {
    fn featurizer(&self) -> Result<Featurizer> {
        Ok(Featurizer::new(
            StftConfig::new(self.window_size, self.hop)?,
            self.top_bases,
        )?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1500)]
    pub ham: usize,
    #[arg(long, default_value_t = 256)]
    pub deadair: usize,
    /// Number of all-zero clips.
    #[arg(long, default_value_t = 0)]
    pub silence: usize,
    #[arg(long, value_enum, default_value_t = LabelArg::Spam)]
    pub silence_label: LabelArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LabelArg {
    Ham,
    Spam,
}

impl From<LabelArg> for Label {
    fn from(l: LabelArg) -> Label {
        match l {
            LabelArg::Ham => Label::Ham,
            LabelArg::Spam => Label::Spam,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    /// Audio files or directories (.wav, or raw μ-law .ul/.mulaw/.mu/.raw).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Feature CSV to write.
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Forest,
    Sgd,
    LinearSvc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Forest)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    /// Split candidates per node (default ⌊√dim⌋).
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    /// Regularization strength for the linear models.
    #[arg(long, default_value_t = 1e-4)]
    pub alpha: f64,
    /// Penalty C for linear-svc; overrides alpha with 1/(C·n).
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
}

impl ModelArgs {
    /// The model configuration for a training set of `n` examples.
    pub fn kind(&self, seed: u64, n: usize) -> Result<ModelKind> {
        let linear = |alpha: f64| LinearParams {
            loss: Loss::Hinge,
            alpha,
            epochs: self.epochs,
            seed,
        };
        Ok(match self.kind {
            KindArg::Forest => {
                if self.c.is_some() {
                    bail!("--c applies only to --kind linear-svc");
                }
                ModelKind::forest(ForestParams {
                    n_trees: self.n_trees,
                    max_features: self.max_features,
                    min_samples_leaf: self.min_samples_leaf,
                    seed,
                })
            }
            KindArg::Sgd => {
                if self.c.is_some() {
                    bail!("--c applies only to --kind linear-svc");
                }
                ModelKind::sgd(linear(self.alpha))
            }
            KindArg::LinearSvc => {
                let alpha = match self.c {
                    Some(c) if c > 0.0 => 1.0 / (c * n as f64),
                    Some(c) => bail!("--c must be positive, got {c}"),
                    None => self.alpha,
                };
                ModelKind::linear_svc(linear(alpha))
            }
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Labeled feature CSV.
    #[arg(long, short)]
    pub features: PathBuf,
    /// Model file to write.
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Audio files, directories, or a single feature CSV.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = SilencePolicy::Spam)]
    pub silence_policy: SilencePolicy,
    #[command(flatten)]
    pub features: FeatureArgs,
}

fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    Sweep::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[arg(long, short)]
    pub features: PathBuf,
    /// Grid as `key=v1,v2,...`; key is n_trees, alpha or c.
    #[arg(long, value_parser = parse_sweep)]
    pub sweep: Sweep,
    #[arg(long, default_value_t = 10)]
    pub splits: usize,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Directory for report.json and report.csv.
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    pub input: PathBuf,
    /// Wide CSV (one row per bin); stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Long-format CSV (one row per bin and frame).
    #[arg(long)]
    pub long_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub window_size: usize,
    #[arg(long, default_value_t = 128)]
    pub hop: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Model file; without it the service runs degraded.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value_t = SilencePolicy::Spam)]
    pub silence_policy: SilencePolicy,
}

fn log_config<T: Serialize>(config: &T) -> Result<serde_json::Value> {
    let value = serde_json::to_value(config)?;
    eprintln!("config: {value}");
    Ok(value)
}

fn write_json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, seed, out),
        Command::Featurize(a) => cmd_featurize(&a, out),
        Command::Train(a) => cmd_train(&a, seed, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Crossval(a) => cmd_crossval(&a, seed, out),
        Command::Spec(a) => cmd_spec(&a, out),
        Command::Serve(a) => cmd_serve(&a),
    }
}

pub fn cmd_synth(a: &SynthArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let cfg = CorpusConfig {
        seed,
        ham_count: a.ham,
        deadair_count: a.deadair,
        silence_count: a.silence,
        silence_label: a.silence_label.into(),
        ..CorpusConfig::default()
    };
    deadair_core::synth::validate_counts(&cfg)?;
    let config = log_config(&cfg)?;
    let manifest = write_corpus(&a.out, &cfg)
        .with_context(|| format!("writing corpus to {}", a.out.display()))?;
    write_json_line(
        out,
        &serde_json::json!({
            "command": "synth",
            "config": config,
            "out": a.out,
            "files": manifest.files.len(),
        }),
    )
}

/// Loads `.wav` or raw μ-law audio as a two-second clip.
pub fn load_audio(path: &Path) -> Result<AudioClip> {
    let ext = extension(path);
    let clip = if ext == "wav" {
        read_wav(BufReader::new(File::open(path)?))?
    } else if AUDIO_EXTENSIONS.contains(&ext.as_str()) {
        clip_from_mulaw(&fs::read(path)?)?
    } else {
        bail!("unrecognized audio extension {ext:?}");
    };
    Ok(clip)
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

fn call_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Expands directories into their audio files, sorted by name.
pub fn collect_audio(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && AUDIO_EXTENSIONS.contains(&extension(p).as_str()))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no audio files found");
    }
    Ok(files)
}

/// Label from a `manifest.json` next to the file, when present.
fn manifest_label(
    path: &Path,
    cache: &mut Vec<(PathBuf, Option<CorpusManifest>)>,
) -> Option<Label> {
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let pos = match cache.iter().position(|(d, _)| *d == dir) {
        Some(p) => p,
        None => {
            let m = dir.join(MANIFEST_FILE);
            let manifest = if m.is_file() {
                match CorpusManifest::read(&m) {
                    Ok(man) => Some(man),
                    Err(e) => {
                        eprintln!("warning: ignoring {}: {e}", m.display());
                        None
                    }
                }
            } else {
                None
            };
            cache.push((dir, manifest));
            cache.len() - 1
        }
    };
    cache[pos]
        .1
        .as_ref()
        .and_then(|m| m.label_of(&call_id(path)))
}

pub fn cmd_featurize(a: &FeaturizeArgs, out: &mut dyn Write) -> Result<()> {
    let config = log_config(&a.features)?;
    let featurizer = a.features.featurizer()?;
    let files = collect_audio(&a.inputs)?;
    let mut manifests = Vec::new();
    let labels: Vec<Option<Label>> = files
        .iter()
        .map(|f| manifest_label(f, &mut manifests))
        .collect();

    let results: Vec<(PathBuf, Result<FeatureRecord>)> = files
        .par_iter()
        .zip(labels)
        .map(|(path, label)| {
            let record = load_audio(path).and_then(|clip| {
                Ok(FeatureRecord {
                    call_id: call_id(path),
                    label,
                    features: featurizer.features(&clip)?,
                })
            });
            (path.clone(), record)
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut skipped = 0usize;
    for (path, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                skipped += 1;
                eprintln!("warning: skipping {}: {e:#}", path.display());
            }
        }
    }
    if records.is_empty() {
        bail!("every input failed to featurize");
    }
    records.sort_by(|x, y| x.call_id.cmp(&y.call_id));
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_feature_csv(BufWriter::new(file), &records)?;
    write_json_line(
        out,
        &serde_json::json!({
            "command": "featurize",
            "config": config,
            "out": a.out,
            "rows": records.len(),
            "skipped": skipped,
            "degenerate": records.iter().filter(|r| r.features.degenerate).count(),
        }),
    )
}

fn read_records(path: &Path) -> Result<Vec<FeatureRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_feature_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct TrainingReport {
    confusion: ConfusionCounts,
    metrics: Metrics,
}

pub fn cmd_train(a: &TrainArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let records = read_records(&a.features)?;
    let (data, _) = dataset_from_records(&records)?;
    let kind = a.model.kind(seed, data.len())?;
    let config = log_config(&serde_json::json!({ "seed": seed, "model": kind, "args": a.model }))?;
    let model = kind.train(&data)?;
    save_model(&model, &a.out).with_context(|| format!("writing {}", a.out.display()))?;

    let predicted = (0..data.len())
        .map(|i| Ok(model.predict(data.row(i))?.label))
        .collect::<Result<Vec<_>>>()?;
    let counts = confusion(&predicted, data.labels())?;
    let training = TrainingReport {
        confusion: counts,
        metrics: metrics(&counts)?,
    };
    eprintln!(
        "training set: tp={} fp={} tn={} fn={}",
        counts.tp, counts.fp, counts.tn, counts.fn_
    );
    write_json_line(
        out,
        &serde_json::json!({
            "command": "train",
            "config": config,
            "out": a.out,
            "examples": data.len(),
            "training": training,
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PredictLine {
    pub call_id: String,
    pub label: Label,
    pub score: f64,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub digital_silence: Option<bool>,
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    log_config(&serde_json::json!({
        "model": a.model,
        "silence_policy": a.silence_policy,
        "features": a.features,
    }))?;
    let model = load_model(&a.model).with_context(|| format!("loading {}", a.model.display()))?;

    let mut lines = if a.inputs.len() == 1 && extension(&a.inputs[0]) == "csv" {
        read_records(&a.inputs[0])?
            .par_iter()
            .map(|r| {
                let p = model.predict(&r.features.values)?;
                Ok(PredictLine {
                    call_id: r.call_id.clone(),
                    label: p.label,
                    score: p.score,
                    degenerate: r.features.degenerate,
                    digital_silence: None,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let detector = Detector::new(a.features.featurizer()?, model, a.silence_policy)?;
        let files = collect_audio(&a.inputs)?;
        let results: Vec<(PathBuf, Result<PredictLine>)> = files
            .par_iter()
            .map(|path| {
                let line = load_audio(path).and_then(|clip| {
                    let c = detector.classify(&clip)?;
                    Ok(PredictLine {
                        call_id: call_id(path),
                        label: c.label,
                        score: c.score,
                        degenerate: c.degenerate,
                        digital_silence: Some(c.digital_silence),
                    })
                });
                (path.clone(), line)
            })
            .collect();
        let total = results.len();
        let mut lines = Vec::with_capacity(total);
        for (path, r) in results {
            match r {
                Ok(l) => lines.push(l),
                Err(e) => eprintln!("warning: skipping {}: {e:#}", path.display()),
            }
        }
        if lines.len() < total {
            bail_after_write(out, &mut lines, total)?;
        }
        lines
    };
    lines.sort_by(|x, y| x.call_id.cmp(&y.call_id));
    for l in &lines {
        write_json_line(out, l)?;
    }
    Ok(())
}

/// Emits the verdicts that did succeed, then fails the run.
fn bail_after_write(out: &mut dyn Write, lines: &mut [PredictLine], total: usize) -> Result<()> {
    lines.sort_by(|x, y| x.call_id.cmp(&y.call_id));
    for l in lines.iter() {
        write_json_line(out, l)?;
    }
    bail!(
        "{} of {total} inputs could not be classified",
        total - lines.len()
    );
}

pub fn cmd_crossval(a: &CrossvalArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let records = read_records(&a.features)?;
    let (data, _) = dataset_from_records(&records)?;
    let base = a.model.kind(seed, data.len())?;
    let cv = CvConfig {
        n_splits: a.splits,
        test_fraction: a.test_fraction,
        seed,
    };
    let config = log_config(&serde_json::json!({
        "seed": seed,
        "base": base,
        "sweep": a.sweep,
        "cv": cv,
    }))?;
    let report = cross_validate(&data, &base, &a.sweep, &cv)?;
    fs::create_dir_all(&a.out_dir)?;
    let json = serde_json::json!({ "config": config, "report": report });
    fs::write(
        a.out_dir.join("report.json"),
        serde_json::to_vec_pretty(&json)?,
    )?;
    report.write_csv(BufWriter::new(File::create(a.out_dir.join("report.csv"))?))?;
    out.write_all(report.render_table().as_bytes())?;
    Ok(())
}

pub fn cmd_spec(a: &SpecArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = StftConfig::new(a.window_size, a.hop)?;
    log_config(&cfg)?;
    let clip = load_audio(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    let spec = stft(&clip, cfg)?;
    match &a.csv {
        Some(path) => spec.write_csv(BufWriter::new(File::create(path)?))?,
        None => spec.write_csv(&mut *out)?,
    }
    if let Some(path) = &a.long_csv {
        spec.write_long_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

pub fn cmd_serve(a: &ServeArgs) -> Result<()> {
    log_config(&serde_json::json!({
        "model": a.model,
        "host": a.host,
        "port": a.port,
        "silence_policy": a.silence_policy,
    }))?;
    let state = match &a.model {
        Some(path) => deadair_service::AppState::from_model_file(path, a.silence_policy)
            .with_context(|| format!("loading {}", path.display()))?,
        None => {
            eprintln!("warning: no --model given; classify will return 503");
            deadair_service::AppState::degraded()
        }
    };
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .context("invalid --host/--port")?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        deadair_service::serve(listener, Arc::new(state), shutdown).await?;
        Ok(())
    })
}
