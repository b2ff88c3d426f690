//! `dart`: command-line driver for filtering, descriptor extraction,
//! classification, tracking, matching, evaluation and rendering of event
//! streams.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dart_core::bench::extract_throughput;
use dart_core::classify::io::{read_multiclass, write_multiclass};
use dart_core::classify::{collect_descriptors, ClassifyError, Encoder, MulticlassModel};
use dart_core::dart::io::{read_dump, write_csv, write_dump};
use dart_core::elot::{elot_run, parse_track_csv, write_track_csv, TrackMode};
use dart_core::encoding::io::{read_codebook, write_codebook};
use dart_core::encoding::kmeans_train;
use dart_core::eval::{accuracy, evaluate_track, synth_generate, DEFAULT_OVERLAP_THRESHOLD};
use dart_core::events::{
    parse_aer5, parse_annotations, parse_text_events, write_aer5, write_annotations,
    write_text_events,
};
use dart_core::filter::cascade;
use dart_core::matching::{match_sets, write_match_csv, FeatureSet};
use dart_core::render::{render_matches, render_overlay};
use dart_core::{BoundingBox, DartEngine, EventStream, LogPolarGrid, Timestamp};

use config::{PipelineConfig, SensorConfig};

#[derive(Parser)]
#[command(
    name = "dart",
    version,
    about = "Event-camera descriptors, classification, tracking and matching"
)]
struct Cli {
    /// TOML configuration file; absent keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set elot.tracker.tau_h=12`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the fully resolved configuration to this path before running.
    #[arg(long, global = true, value_name = "PATH")]
    emit_effective_config: Option<PathBuf>,
    /// Sensor width for formats that do not record it.
    #[arg(long, global = true)]
    width: Option<u16>,
    #[arg(long, global = true)]
    height: Option<u16>,
    #[arg(long, global = true)]
    theta_ref_us: Option<Timestamp>,
    #[arg(long, global = true)]
    theta_noise_us: Option<Timestamp>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-encode an event file; the format follows the extension (`.txt` text, otherwise AER).
    Convert(InOut),
    /// Refractory then noise filtering.
    Filter(InOut),
    /// Descriptors for every filtered event; `.csv` output is text, otherwise a binary dump.
    Extract {
        #[command(flatten)]
        io: InOut,
        /// Skip the noise filters.
        #[arg(long)]
        raw: bool,
    },
    /// k-means codebook over descriptors of event files, descriptor dumps (`.dart`) or a labelled dataset.
    TrainCodebook {
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// One-vs-rest SVMs over encoded streams of a labelled dataset.
    TrainClassifier {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Predicted label of each input stream.
    Classify {
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Accuracy over a labelled dataset, optionally at several time prefixes.
    EvalClassify {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated prefix lengths in microseconds.
        #[arg(long, value_delimiter = ',')]
        prefixes_us: Vec<Timestamp>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Long-term tracking from the first box of an annotation file.
    Track {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        roi: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Ratio-test matches between two time slices of one stream.
    Match {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_window)]
        slice_a: (Timestamp, Timestamp),
        #[arg(long, value_parser = parse_window)]
        slice_b: (Timestamp, Timestamp),
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        ratio: Option<f64>,
        /// Skip the noise filters.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        output: PathBuf,
    },
    /// OS, IoU and CLE of a track CSV against annotations.
    EvalTrack {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        track: PathBuf,
        #[arg(long, default_value_t = DEFAULT_OVERLAP_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Synthetic polygon scene with exact annotations.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
    },
    /// PPM raster of a window with optional track boxes or match lines.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: (Timestamp, Timestamp),
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long, requires = "window_b")]
        matches: Option<PathBuf>,
        #[arg(long, value_parser = parse_window)]
        window_b: Option<(Timestamp, Timestamp)>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Single-threaded descriptor throughput on an event file or generator output.
    Bench {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Args)]
struct InOut {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// Directory of numbered label subdirectories holding event files.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Files per label, first in name order.
    #[arg(long)]
    max_per_class: Option<usize>,
}

fn parse_window(s: &str) -> Result<(Timestamp, Timestamp), String> {
    let (a, b) = s.split_once(',').ok_or("expected t0,t1")?;
    let a: Timestamp = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: Timestamp = b.trim().parse().map_err(|e| format!("{e}"))?;
    if b <= a {
        return Err("window end must follow its start".into());
    }
    Ok((a, b))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = PipelineConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(w) = cli.width {
        cfg.sensor.width = w;
    }
    if let Some(h) = cli.height {
        cfg.sensor.height = h;
    }
    if let Some(t) = cli.theta_ref_us {
        cfg.encoder.filter.theta_ref_us = t;
        cfg.elot.filter.theta_ref_us = t;
    }
    if let Some(t) = cli.theta_noise_us {
        cfg.encoder.filter.theta_noise_us = t;
        cfg.elot.filter.theta_noise_us = t;
    }
    if let Some(p) = &cli.emit_effective_config {
        fs::write(p, cfg.to_toml()?).with_context(|| format!("writing {}", p.display()))?;
    }
    run(cli.command, &cfg)
}

fn run(command: Command, cfg: &PipelineConfig) -> Result<()> {
    let sensor = &cfg.sensor;
    match command {
        Command::Convert(io) => {
            let s = read_stream(&io.input, sensor)?;
            write_stream(&io.output, &s)?;
            println!("{} events", s.len());
        }
        Command::Filter(io) => {
            let s = read_stream(&io.input, sensor)?;
            let out = cascade(&s, cfg.encoder.filter);
            write_stream(&io.output, &out)?;
            println!("kept {} of {} events", out.len(), s.len());
        }
        Command::Extract { io, raw } => {
            let s = read_stream(&io.input, sensor)?;
            let s = if raw {
                s
            } else {
                cascade(&s, cfg.encoder.filter)
            };
            let grid = Arc::new(LogPolarGrid::new(cfg.encoder.grid)?);
            let mut engine =
                DartEngine::new(grid, s.width(), s.height(), cfg.encoder.fifo_capacity)?;
            let descriptors: Vec<_> = s.events().iter().map(|e| engine.process(e)).collect();
            let bytes = if has_ext(&io.output, "csv") {
                write_csv(&descriptors).into_bytes()
            } else {
                let g = cfg.encoder.grid;
                write_dump(
                    g.n_rings,
                    g.n_wedges,
                    descriptors.iter().map(|d| d.values()),
                )
            };
            write_file(&io.output, &bytes)?;
            println!("{} descriptors", descriptors.len());
        }
        Command::TrainCodebook {
            input,
            data,
            output,
        } => {
            let grid = Arc::new(LogPolarGrid::new(cfg.encoder.grid)?);
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut streams: Vec<PathBuf> = Vec::new();
            for p in input {
                if has_ext(&p, "dart") {
                    let dump = read_dump(&read_file(&p)?)?;
                    if dump.dim() != grid.dim() {
                        bail!(
                            "{}: dump dimension {} does not match the grid ({})",
                            p.display(),
                            dump.dim(),
                            grid.dim()
                        );
                    }
                    rows.extend(dump.rows_f64());
                } else {
                    streams.push(p);
                }
            }
            if let Some(dir) = &data.data {
                streams.extend(
                    list_dataset(dir, data.max_per_class)?
                        .into_iter()
                        .map(|(p, _)| p),
                );
            }
            for p in &streams {
                let s = read_stream(p, sensor)?;
                let enc = &cfg.encoder;
                rows.extend(collect_descriptors(
                    &s,
                    &grid,
                    enc.filter,
                    enc.fifo_capacity,
                    cfg.descriptor_stride,
                )?);
            }
            let rows = stride_cap(rows, cfg.max_codebook_descriptors);
            let fit = kmeans_train(&rows, &cfg.kmeans)?;
            write_file(&output, &write_codebook(&fit.codebook, Some(&cfg.forest)))?;
            println!(
                "k = {} from {} descriptors, {} iterations, inertia {:.6}",
                fit.codebook.k(),
                rows.len(),
                fit.iterations,
                fit.inertia.last().copied().unwrap_or(0.0)
            );
        }
        Command::TrainClassifier {
            data,
            codebook,
            output,
        } => {
            let encoder = load_encoder(&codebook, cfg)?;
            let set = load_dataset(&data, sensor)?;
            let mut samples = Vec::with_capacity(set.len());
            let mut labels = Vec::with_capacity(set.len());
            for (p, s, label) in &set {
                samples.push(
                    encoder
                        .encode(s)
                        .with_context(|| format!("encoding {}", p.display()))?,
                );
                labels.push(*label);
            }
            let model = MulticlassModel::train(&samples, &labels, &cfg.svm)?;
            write_file(&output, &write_multiclass(&model))?;
            println!(
                "{} classes from {} streams",
                model.labels().len(),
                samples.len()
            );
        }
        Command::Classify {
            input,
            codebook,
            model,
        } => {
            let encoder = load_encoder(&codebook, cfg)?;
            let model = read_multiclass(&read_file(&model)?)?;
            for p in input {
                let s = read_stream(&p, sensor)?;
                let label = encoder
                    .classify(&s, &model)
                    .with_context(|| format!("classifying {}", p.display()))?;
                println!("{}\t{label}", p.display());
            }
        }
        Command::EvalClassify {
            data,
            codebook,
            model,
            prefixes_us,
            output,
        } => {
            let encoder = load_encoder(&codebook, cfg)?;
            let model = read_multiclass(&read_file(&model)?)?;
            let set = load_dataset(&data, sensor)?;
            // a stream without evidence counts as wrong under this label
            let none = u32::MAX;
            let mut report = String::from("prefix_us,overall,class_averaged\n");
            let truth: Vec<u32> = set.iter().map(|(_, _, l)| *l).collect();
            let full: Vec<u32> = set
                .iter()
                .map(|(_, s, _)| {
                    encoder
                        .classify(s, &model)
                        .or_else(|e| no_evidence(e, none))
                })
                .collect::<Result<_>>()?;
            let acc = accuracy(&full, &truth)?;
            report.push_str(&format!("all,{},{}\n", acc.overall, acc.class_averaged));
            println!(
                "accuracy {:.4} (class-averaged {:.4}) on {} streams",
                acc.overall,
                acc.class_averaged,
                truth.len()
            );
            if !prefixes_us.is_empty() {
                let mut per_prefix = vec![Vec::with_capacity(set.len()); prefixes_us.len()];
                for (_, s, _) in &set {
                    for (i, l) in encoder
                        .classify_prefixes(s, &model, &prefixes_us)?
                        .into_iter()
                        .enumerate()
                    {
                        per_prefix[i].push(l.unwrap_or(none));
                    }
                }
                for (d, pred) in prefixes_us.iter().zip(&per_prefix) {
                    let a = accuracy(pred, &truth)?;
                    report.push_str(&format!("{d},{},{}\n", a.overall, a.class_averaged));
                    println!("prefix {d} us: accuracy {:.4}", a.overall);
                }
            }
            if let Some(o) = output {
                write_file(&o, report.as_bytes())?;
            }
        }
        Command::Track { input, roi, output } => {
            let s = read_stream(&input, sensor)?;
            let ann = parse_annotations(&read_text(&roi)?)?;
            let roi0 = ann
                .intervals()
                .iter()
                .find_map(|iv| iv.bbox)
                .ok_or_else(|| anyhow!("{} holds no box", roi.display()))?;
            let out = elot_run(&s, roi0, &cfg.elot)?;
            write_file(&output, write_track_csv(&out.results).as_bytes())?;
            let lost = out
                .results
                .iter()
                .filter(|r| r.mode == TrackMode::Lost)
                .count();
            println!(
                "{} decisions, {} losses, {} detector activations, {} detector words",
                out.results.len(),
                lost,
                out.detector_activations,
                out.model.detector.len()
            );
        }
        Command::Match {
            input,
            slice_a,
            slice_b,
            stride,
            ratio,
            raw,
            output,
        } => {
            let s = read_stream(&input, sensor)?;
            let grid = Arc::new(LogPolarGrid::new(cfg.encoder.grid)?);
            let f = (!raw).then_some(cfg.encoder.filter);
            let fifo = cfg.encoder.fifo_capacity;
            let a = FeatureSet::from_stream(&s, &grid, fifo, f, slice_a.0, slice_a.1, stride)?;
            let b = FeatureSet::from_stream(&s, &grid, fifo, f, slice_b.0, slice_b.1, stride)?;
            let mut params = cfg.matching;
            if let Some(r) = ratio {
                params.ratio = r;
            }
            let pairs = match_sets(&a, &b, &params, None)?;
            write_file(&output, write_match_csv(&a, &b, &pairs).as_bytes())?;
            println!(
                "{} matches from {} and {} features",
                pairs.len(),
                a.len(),
                b.len()
            );
        }
        Command::EvalTrack {
            input,
            annotations,
            track,
            threshold,
            output,
        } => {
            let s = read_stream(&input, sensor)?;
            let ann = parse_annotations(&read_text(&annotations)?)?;
            let results = parse_track_csv(&read_text(&track)?)
                .map_err(|e| anyhow!("{}: {e}", track.display()))?;
            let ev = evaluate_track(&s, &ann, &results, threshold)?;
            if let Some(o) = output {
                write_file(&o, ev.to_csv().as_bytes())?;
            }
            println!("{}", ev.summary());
        }
        Command::Synth {
            seed,
            events,
            annotations,
        } => {
            let scene = synth_generate(&cfg.synth, seed)?;
            write_stream(&events, &scene.stream)?;
            write_file(&annotations, write_annotations(&scene.track).as_bytes())?;
            println!(
                "{} events, {} intervals",
                scene.stream.len(),
                scene.track.len()
            );
        }
        Command::Render {
            input,
            window,
            track,
            matches,
            window_b,
            output,
        } => {
            let s = read_stream(&input, sensor)?;
            let a = s.slice(window.0, window.1);
            if a.is_empty() {
                eprintln!("warning: no events in [{}, {})", window.0, window.1);
            }
            let raster = match (matches, window_b) {
                (Some(m), Some(wb)) => {
                    let b = s.slice(wb.0, wb.1);
                    let pairs = parse_match_csv(&read_text(&m)?)?;
                    render_matches(a.events(), b.events(), s.width(), s.height(), &pairs)
                }
                _ => {
                    let boxes = match track {
                        Some(t) => boxes_in_window(&read_text(&t)?, window)?,
                        None => Vec::new(),
                    };
                    render_overlay(a.events(), s.width(), s.height(), &boxes)
                }
            };
            write_file(&output, &raster.to_ppm())?;
        }
        Command::Bench {
            input,
            seed,
            repeats,
        } => {
            let s = match input {
                Some(p) => read_stream(&p, sensor)?,
                None => synth_generate(&cfg.synth, seed)?.stream,
            };
            let grid = Arc::new(LogPolarGrid::new(cfg.encoder.grid)?);
            let r = extract_throughput(&s, &grid, cfg.encoder.fifo_capacity, repeats)?;
            println!(
                "events {} seconds {:.6} events_per_sec {:.1} checksum {:.9}",
                r.events, r.seconds, r.events_per_sec, r.checksum
            );
        }
    }
    Ok(())
}

fn no_evidence(e: ClassifyError, none: u32) -> Result<u32> {
    match e {
        ClassifyError::NoEvidence => Ok(none),
        other => Err(other.into()),
    }
}

fn has_ext(p: &Path, ext: &str) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn read_file(p: &Path) -> Result<Vec<u8>> {
    fs::read(p).with_context(|| format!("reading {}", p.display()))
}

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn write_file(p: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
}

fn read_stream(p: &Path, sensor: &SensorConfig) -> Result<EventStream> {
    let s = if has_ext(p, "txt") {
        parse_text_events(&read_text(p)?, sensor.width, sensor.height)
    } else {
        parse_aer5(&read_file(p)?, sensor.width, sensor.height)
    };
    s.with_context(|| format!("parsing {}", p.display()))
}

fn write_stream(p: &Path, s: &EventStream) -> Result<()> {
    if has_ext(p, "txt") {
        write_file(p, write_text_events(s).as_bytes())
    } else {
        write_file(p, &write_aer5(s))
    }
}

fn load_encoder(codebook: &Path, cfg: &PipelineConfig) -> Result<Encoder> {
    let (cb, forest) = read_codebook(&read_file(codebook)?)
        .with_context(|| format!("reading {}", codebook.display()))?;
    Ok(Encoder::new(cfg.encoder.clone(), cb, forest)?)
}

/// `(path, label)` for every file under numbered subdirectories, in label
/// then name order.
fn list_dataset(dir: &Path, max_per_class: Option<usize>) -> Result<Vec<(PathBuf, u32)>> {
    let mut classes: Vec<(u32, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if let Some(label) = path
            .is_dir()
            .then(|| path.file_name()?.to_str()?.parse::<u32>().ok())
            .flatten()
        {
            classes.push((label, path));
        }
    }
    if classes.is_empty() {
        bail!("{} has no numbered label directories", dir.display());
    }
    classes.sort();
    let mut out = Vec::new();
    for (label, path) in classes {
        let mut files: Vec<PathBuf> = fs::read_dir(&path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|f| f.is_file());
        files.sort();
        files.truncate(max_per_class.unwrap_or(usize::MAX));
        out.extend(files.into_iter().map(|f| (f, label)));
    }
    Ok(out)
}

fn load_dataset(
    data: &DataArgs,
    sensor: &SensorConfig,
) -> Result<Vec<(PathBuf, EventStream, u32)>> {
    let dir = data
        .data
        .as_deref()
        .ok_or_else(|| anyhow!("--data is required"))?;
    list_dataset(dir, data.max_per_class)?
        .into_iter()
        .map(|(p, l)| Ok((p.clone(), read_stream(&p, sensor)?, l)))
        .collect()
}

fn stride_cap(v: Vec<Vec<f64>>, cap: usize) -> Vec<Vec<f64>> {
    if v.len() <= cap || cap == 0 {
        return v;
    }
    let n = v.len();
    (0..cap).map(|i| v[i * n / cap].clone()).collect()
}

/// Coordinate pairs from a match CSV.
fn parse_match_csv(text: &str) -> Result<Vec<((u16, u16), (u16, u16))>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            bail!("match line {}: expected 7 fields", n + 1);
        }
        let v = |i: usize| {
            f[i].trim()
                .parse::<u16>()
                .with_context(|| format!("match line {}", n + 1))
        };
        out.push(((v(0)?, v(1)?), (v(3)?, v(4)?)));
    }
    Ok(out)
}

/// The box in force at the end of the window, when it is a prediction.
fn boxes_in_window(text: &str, window: (Timestamp, Timestamp)) -> Result<Vec<BoundingBox>> {
    let results = parse_track_csv(text).map_err(|e| anyhow!(e))?;
    Ok(results
        .iter()
        .filter(|r| r.t_us < window.1)
        .max_by_key(|r| r.t_us)
        .filter(|r| r.mode.is_prediction())
        .map(|r| vec![r.bbox])
        .unwrap_or_default())
}
