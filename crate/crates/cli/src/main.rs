use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, LazyLock};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tollgate_metrics::{evaluate, metrics_table, read_boxes_json, read_series_csv, smoothing_table, SmoothedRow};
use tollgate_plate::corpus::{generate_corpus, image_id, read_manifest, split_dataset, CorpusConfig};
use tollgate_plate::vision::{append_csv, recognize_with, RecognizeParams, Whitelist};
use tollgate_plate::{pgm, FONT_VERSION};
use tollgate_service::{serve, spawn_background, AdminCredentials, HasherKind, Service, ServiceConfig};
use tollgate_sim::{run, run_with, EngineTarget, EventRow, HttpSettings, HttpTarget, SimConfig, SimReport};

static VERSION: LazyLock<String> =
    LazyLock::new(|| format!("{} (font v{FONT_VERSION})", env!("CARGO_PKG_VERSION")));

/// Toll plaza toolkit: synthetic plate corpus, plate reader, detection
/// metrics, traffic simulation and the central service.
#[derive(Debug, Parser)]
#[command(name = "tollgate", version = VERSION.as_str())]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthetic plate scenes with VOC annotations.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Plate recognition on PGM scenes.
    #[command(subcommand)]
    Vision(VisionCmd),
    /// Detection metrics and training-log smoothing.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Traffic simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Run the central service until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Small corpus plus a 50-vehicle simulation against an in-process service.
    Demo {
        #[arg(long, default_value_t = 50)]
        vehicles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    /// Write scenes, VOC files and a manifest into a directory.
    Generate {
        #[arg(long, default_value_t = 433)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Salt-and-pepper rate, at most 0.2.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded train/test split of a corpus's image ids.
    Split {
        /// Corpus directory; without it the ids of a default-size corpus are split.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 22)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the split as JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ReaderArgs {
    /// Characters the reader may output.
    #[arg(long, default_value = "0123456789")]
    whitelist: String,
}

impl ReaderArgs {
    fn params(&self) -> RecognizeParams {
        RecognizeParams {
            whitelist: Whitelist::from_chars(self.whitelist.chars()),
            ..RecognizeParams::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum VisionCmd {
    /// Read the plate in one PGM image.
    Recognize {
        image: PathBuf,
        /// Append the reading to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        reader: ReaderArgs,
    },
    /// Read every PGM image in a directory, in file-name order.
    Batch {
        dir: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        reader: ReaderArgs,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCmd {
    /// AP and AR@1 over the COCO IoU thresholds and area buckets.
    Detections {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        truths: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Final debiased-EMA value of one or more `step,value` CSV series.
    Smooth {
        #[arg(long, required = true, num_args = 1..)]
        series: Vec<PathBuf>,
        #[arg(long, default_value_t = tollgate_metrics::DEFAULT_EMA_WEIGHT)]
        weight: f64,
    },
}

#[derive(Debug, Subcommand)]
enum SimCmd {
    /// Run a simulation from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `engine` for in-process, or a service base URL.
        #[arg(long, default_value = "engine")]
        target: String,
        /// Write one CSV line per passage here.
        #[arg(long)]
        events: Option<PathBuf>,
    },
}

fn emit<T: Serialize>(json: bool, value: &T, human: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", human());
    }
    Ok(())
}

#[derive(Serialize)]
struct CorpusSummary<'a> {
    out: &'a Path,
    count: usize,
    seed: u64,
    noise: f64,
    font_version: u32,
}

fn corpus(cmd: CorpusCmd, json: bool) -> Result<()> {
    match cmd {
        CorpusCmd::Generate { count, seed, noise, out } => {
            let cfg = CorpusConfig {
                count,
                seed,
                noise_rate: noise,
                ..CorpusConfig::default()
            };
            let scenes = generate_corpus(&cfg, &out)?;
            let summary = CorpusSummary {
                out: &out,
                count: scenes.len(),
                seed,
                noise,
                font_version: FONT_VERSION,
            };
            emit(json, &summary, || format!("wrote {} scenes to {}\n", scenes.len(), out.display()))
        }
        CorpusCmd::Split { dir, test, seed, out } => {
            let ids: Vec<String> = match &dir {
                Some(d) => read_manifest(d)?.into_iter().map(|e| e.image_id).collect(),
                None => (0..CorpusConfig::default().count).map(image_id).collect(),
            };
            let split = split_dataset(&ids, test, seed)?;
            let text = serde_json::to_string_pretty(&split)?;
            match out {
                Some(path) => {
                    fs::write(&path, text + "\n")?;
                    emit(json, &serde_json::json!({"train": split.train.len(), "test": split.test.len(), "out": path}), || {
                        format!("train {} / test {} -> {}\n", split.train.len(), split.test.len(), path.display())
                    })
                }
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn vision(cmd: VisionCmd, json: bool) -> Result<()> {
    match cmd {
        VisionCmd::Recognize { image, csv, reader } => {
            let img = pgm::read(&image).with_context(|| format!("reading {}", image.display()))?;
            let id = image.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
            let reading = recognize_with(&img, id, &reader.params())?;
            if let Some(path) = csv {
                append_csv(&reading, &path)?;
            }
            emit(json, &reading, || {
                format!("{} {:.4} {}\n", reading.filtered_text, reading.mean_char_score, reading.detection.bbox)
            })
        }
        VisionCmd::Batch { dir, csv, reader } => {
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            files.retain(|p| p.extension().is_some_and(|e| e == "pgm"));
            files.sort();
            let truth: std::collections::BTreeMap<String, String> = read_manifest(&dir)
                .map(|m| m.into_iter().map(|e| (e.image_id, e.plate_text.normalized().to_string())).collect())
                .unwrap_or_default();
            let params = reader.params();
            let (mut read, mut failed, mut exact) = (0usize, 0usize, 0usize);
            for path in &files {
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                match pgm::read(path).map_err(anyhow::Error::from).and_then(|img| Ok(recognize_with(&img, &id, &params)?)) {
                    Ok(r) => {
                        append_csv(&r, &csv)?;
                        read += 1;
                        exact += usize::from(truth.get(&id) == Some(&r.filtered_text));
                    }
                    Err(e) => {
                        log::warn!("{}: {e}", path.display());
                        failed += 1;
                    }
                }
            }
            let summary = serde_json::json!({
                "images": files.len(),
                "read": read,
                "failed": failed,
                "exact_matches": if truth.is_empty() { None } else { Some(exact) },
                "csv": csv,
            });
            emit(json, &summary, || {
                let mut s = format!("{} images, {read} read, {failed} failed\n", files.len());
                if !truth.is_empty() {
                    s.push_str(&format!("{exact} exact matches against the manifest\n"));
                }
                s
            })
        }
    }
}

fn eval(cmd: EvalCmd, json: bool) -> Result<()> {
    match cmd {
        EvalCmd::Detections { dets, truths, report } => {
            let open = |p: &Path| -> Result<_> {
                Ok(BufReader::new(fs::File::open(p).with_context(|| format!("opening {}", p.display()))?))
            };
            let (truth_set, _) = read_boxes_json(open(&truths)?)?;
            let (_, det_set) = read_boxes_json(open(&dets)?)?;
            let r = evaluate(&det_set, &truth_set)?;
            if let Some(path) = report {
                let body = if json { serde_json::to_string_pretty(&r)? + "\n" } else { metrics_table(&r) };
                fs::write(path, body)?;
            }
            emit(json, &r, || metrics_table(&r))
        }
        EvalCmd::Smooth { series, weight } => {
            let rows = series
                .iter()
                .map(|p| {
                    let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
                    let s = read_series_csv(name, BufReader::new(fs::File::open(p)?))?;
                    let value = tollgate_metrics::final_smoothed(&s, weight)?;
                    let last_step = s.points.last().map(|p| p.0).unwrap_or_default();
                    Ok(SmoothedRow {
                        name: name.to_string(),
                        last_step,
                        value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(json, &rows, || smoothing_table(&rows))
        }
    }
}

fn sim(cmd: SimCmd, json: bool) -> Result<()> {
    let SimCmd::Run { config, target, events } = cmd;
    let cfg = SimConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    let mut log = String::new();
    let mut record = |row: &EventRow| {
        if events.is_some() {
            log.push_str(&row.to_csv());
            log.push('\n');
        }
    };
    let report = if target == "engine" {
        run_with(&cfg, &mut EngineTarget::new(cfg.engine.clone()), &mut record)?
    } else if target.starts_with("http://") || target.starts_with("https://") {
        run_with(&cfg, &mut HttpTarget::connect(&target, cfg.http.clone())?, &mut record)?
    } else {
        bail!("--target must be `engine` or an http(s) URL, got {target:?}");
    };
    if let Some(path) = events {
        fs::write(path, format!("{}\n{log}", EventRow::CSV_HEADER))?;
    }
    emit(json, &report, || report.to_table())
}

#[derive(Serialize)]
struct DemoReport {
    corpus_scenes: usize,
    corpus_exact_reads: usize,
    simulation: SimReport,
}

fn demo(vehicles: usize, seed: u64, json: bool) -> Result<()> {
    let work = tempfile::tempdir()?;
    let corpus_dir = work.path().join("corpus");
    let scenes = generate_corpus(
        &CorpusConfig {
            count: 12,
            seed,
            ..CorpusConfig::default()
        },
        &corpus_dir,
    )?;
    let exact = scenes
        .iter()
        .filter(|s| {
            tollgate_plate::vision::recognize(&s.image, &s.image_id).is_ok_and(|r| r.filtered_text == s.plate_text.normalized())
        })
        .count();
    log::info!("corpus: {exact}/{} scenes read exactly", scenes.len());

    let http = HttpSettings {
        admin_email: "admin@demo.invalid".into(),
        admin_password: "demo-admin".into(),
        plaza_keys: [("north", "north-demo"), ("south", "south-demo")]
            .into_iter()
            .map(|(p, k)| (p.to_string(), k.to_string()))
            .collect(),
    };
    let service = Service::open(ServiceConfig {
        data_dir: work.path().join("service"),
        plaza_keys: http.plaza_keys.clone(),
        admin: Some(AdminCredentials {
            email: http.admin_email.clone(),
            password: http.admin_password.clone(),
        }),
        password_hasher: HasherKind::Stub,
        ..ServiceConfig::default()
    })?;
    let server = spawn_background(Arc::new(service))?;
    log::info!("service listening on {}", server.base_url());
    let cfg = SimConfig {
        seed,
        n_vehicles: vehicles,
        http: http.clone(),
        ..SimConfig::default()
    };
    let mut target = HttpTarget::connect(&server.base_url(), http)?;
    let report = run(&cfg, &mut target)?;
    let out = DemoReport {
        corpus_scenes: scenes.len(),
        corpus_exact_reads: exact,
        simulation: report,
    };
    emit(json, &out, || {
        format!(
            "corpus: {}/{} scenes read exactly\n{}",
            out.corpus_exact_reads,
            out.corpus_scenes,
            out.simulation.to_table()
        )
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.command {
        Command::Corpus(c) => corpus(c, json),
        Command::Vision(c) => vision(c, json),
        Command::Eval(c) => eval(c, json),
        Command::Sim(c) => sim(c, json),
        Command::Serve { config } => Ok(serve(ServiceConfig::load(&config)?)?),
        Command::Demo { vehicles, seed } => demo(vehicles, seed, json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // clap exits 2 on usage errors and 0 for --help / --version
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
