use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use figground::forest::{load_model, save_model, ImportanceReport};
use figground::geodata::parse_footprints;
use figground::geodata::FootprintIndex;
use figground::geometry::{Point, Rect};
use figground::pipeline::{
    self, accuracy_table, export_tiles, files, grid_points, importance_summary, rows_by_split, run_pipeline,
    sample_records, tables, AtStage, PipelineConfig, PipelineError, SampleRecord, Stage, TileFormat, TileSink,
};
use figground::sampler::SamplePoint;
use figground::synth::{synthesize_region, RegionParams, SyntheticSpec};

#[derive(Parser)]
#[command(name = "figground", version, about = "Figure-ground morphology features and income classification")]
struct Cli {
    /// Run configuration (key = value file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pgm,
    Png,
}

impl From<Format> for TileFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Pgm => TileFormat::Pgm,
            Format::Png => TileFormat::Png,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the inputs, print a summary.
    Ingest,
    /// Draw sample points in residential zones and label them.
    Sample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Balance categories and assign train/val/test splits.
    Split {
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render tile images plus a sidecar tiles.csv.
    Rasterize {
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        tiles_out: PathBuf,
        #[arg(long, value_enum, default_value = "pgm")]
        format: Format,
        /// Include points without a split.
        #[arg(long)]
        all: bool,
    },
    /// Compute the 40-dimensional feature vector of every tile.
    Featurize {
        /// Samples CSV, or a tiles.csv sidecar whose ids are looked up in --samples.
        #[arg(long)]
        tiles: PathBuf,
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the random forest on the train split.
    TrainRf {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Out-of-bag permutation importance of a trained model.
    Importance {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Evaluate on the test split and write the accuracy report.
    Report {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Predict categories on a grid of query points.
    PredictRegion {
        #[arg(long)]
        model: Option<PathBuf>,
        /// min_lon,min_lat,max_lon,max_lat
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "points")]
        bbox: Option<Vec<f64>>,
        /// Grid spacing, metres.
        #[arg(long, default_value_t = 200.0)]
        step: f64,
        /// Samples CSV of query points instead of a grid.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic region (inputs and config) for end-to-end runs.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Side of each synthetic zip area, metres.
        #[arg(long, default_value_t = 1200.0)]
        zip_side: f64,
        /// Sample count written into the generated config.
        #[arg(long, default_value_t = 2000)]
        n_samples: usize,
    },
    /// Every stage, end to end.
    Run,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_ref().context("[config] --config FILE is required for this command")?;
    let mut cfg = PipelineConfig::load(path).at(Stage::Config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.forest.seed = seed;
    }
    cfg.validate().at(Stage::Config)?;
    fs::create_dir_all(&cfg.output_dir).at(Stage::Config)?;
    Ok(cfg)
}

fn or_default(p: &Option<PathBuf>, cfg: &PipelineConfig, name: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| cfg.output_dir.join(name))
}

fn open(path: &Path, stage: Stage) -> Result<fs::File, PipelineError> {
    fs::File::open(path).map_err(|e| PipelineError::new(stage, format!("{}: {e}", path.display())))
}

fn read_samples(path: &Path, stage: Stage) -> Result<Vec<SampleRecord>> {
    Ok(tables::read_samples(open(path, stage)?).at(stage)?)
}

fn read_features(path: &Path, stage: Stage) -> Result<Vec<pipeline::FeatureRow>> {
    Ok(tables::read_features(open(path, stage)?).at(stage)?)
}

fn read_model(path: &Path, stage: Stage) -> Result<figground::forest::ForestModel> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::new(stage, format!("{}: {e}", path.display())))?;
    Ok(load_model(&text).at(stage)?)
}

fn footprint_index(cfg: &PipelineConfig, stage: Stage) -> Result<FootprintIndex> {
    let bytes = fs::read(&cfg.footprints).map_err(|e| PipelineError::new(stage, format!("{}: {e}", cfg.footprints.display())))?;
    let (footprints, stats) = parse_footprints(&bytes).at(stage)?;
    info!("{} footprints ({} rejected)", footprints.len(), stats.rejected);
    Ok(FootprintIndex::new(footprints))
}

fn write_table(path: &Path, stage: Stage, f: impl FnOnce(&mut Vec<u8>) -> Result<(), tables::TableError>) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).at(stage)?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy().into_owned();
    pipeline::write_artifact(dir, &name, stage, f)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn train_matrix<'a>(
    features: &'a [pipeline::FeatureRow],
    samples: &[SampleRecord],
) -> Result<[Vec<&'a pipeline::FeatureRow>; 3]> {
    let parts = rows_by_split(features, samples);
    if parts[0].is_empty() {
        bail!("[train] no feature rows belong to the train split");
    }
    Ok(parts)
}

fn execute(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest => {
            let cfg = load_config(&cli)?;
            let inputs = pipeline::ingest(&cfg)?;
            let summary = inputs.summary();
            print!("{summary}");
            fs::write(cfg.output_dir.join("ingest.txt"), summary).at(Stage::Ingest)?;
        }
        Command::Sample { out } => {
            let cfg = load_config(&cli)?;
            let inputs = pipeline::ingest(&cfg)?;
            let sampled = pipeline::sample(&cfg, &inputs.zones, &inputs.income)?;
            let records: Vec<SampleRecord> =
                sampled.points.into_iter().map(|point| SampleRecord { point, split: None }).collect();
            let labeled = records.iter().filter(|r| r.point.category.is_some()).count();
            write_table(&or_default(out, &cfg, files::SAMPLES), Stage::Sample, |b| tables::write_samples(b, &records))?;
            println!("{} points, {labeled} labeled{}", records.len(), if sampled.saturated { ", saturated" } else { "" });
        }
        Command::Split { samples, out } => {
            let cfg = load_config(&cli)?;
            let input = or_default(samples, &cfg, files::SAMPLES);
            let points: Vec<SamplePoint> = read_samples(&input, Stage::Split)?.into_iter().map(|r| r.point).collect();
            let splits = pipeline::split(&cfg, &points)?;
            let records = sample_records(&points, &splits);
            let dest = out.clone().unwrap_or(input);
            write_table(&dest, Stage::Split, |b| tables::write_samples(b, &records))?;
            println!("train {} val {} test {}", splits.train.len(), splits.val.len(), splits.test.len());
        }
        Command::Rasterize { samples, tiles_out, format, all } => {
            let cfg = load_config(&cli)?;
            let records: Vec<SampleRecord> = read_samples(&or_default(samples, &cfg, files::SAMPLES), Stage::Rasterize)?
                .into_iter()
                .filter(|r| *all || r.split.is_some())
                .collect();
            if records.is_empty() {
                bail!("[rasterize] no points to render (run `split`, or pass --all)");
            }
            let index = footprint_index(&cfg, Stage::Rasterize)?;
            let sink = TileSink { dir: tiles_out.clone(), format: (*format).into() };
            let rows = export_tiles(&index, &records, cfg.tile_extent, cfg.resolution, &sink)?;
            println!("{} tiles written to {}", rows.len(), tiles_out.display());
        }
        Command::Featurize { tiles, samples, out } => {
            let cfg = load_config(&cli)?;
            let head = fs::read_to_string(tiles).at(Stage::Featurize)?;
            let points: Vec<SamplePoint> = if head.starts_with("#schema=tiles/") {
                let sidecar = tables::read_tiles(head.as_bytes()).at(Stage::Featurize)?;
                let all = read_samples(&or_default(samples, &cfg, files::SAMPLES), Stage::Featurize)?;
                let by_id: std::collections::HashMap<&str, &SamplePoint> =
                    all.iter().map(|r| (r.point.id.as_str(), &r.point)).collect();
                sidecar
                    .iter()
                    .map(|t| {
                        by_id.get(t.id.as_str()).map(|p| (*p).clone()).with_context(|| {
                            format!("[featurize] tile {} has no sample point", t.id)
                        })
                    })
                    .collect::<Result<_>>()?
            } else {
                tables::read_samples(head.as_bytes()).at(Stage::Featurize)?.into_iter().map(|r| r.point).collect()
            };
            let index = footprint_index(&cfg, Stage::Featurize)?;
            let outcomes = pipeline::featurize_points(&index, &points, cfg.tile_extent, cfg.resolution, None)?;
            let rows: Vec<_> = outcomes.into_iter().map(|o| o.features).collect();
            write_table(out, Stage::Featurize, |b| tables::write_features(b, &rows))?;
            println!("{} feature rows", rows.len());
        }
        Command::TrainRf { features, samples, model_out } => {
            let cfg = load_config(&cli)?;
            let feats = read_features(&or_default(features, &cfg, files::FEATURES), Stage::Train)?;
            let samples = read_samples(&or_default(samples, &cfg, files::SAMPLES), Stage::Train)?;
            let [train, _, _] = train_matrix(&feats, &samples)?;
            let (model, oob) = pipeline::train_forest(&train, &pipeline::forest_params(&cfg))?;
            let path = or_default(model_out, &cfg, files::MODEL);
            fs::write(&path, save_model(&model).at(Stage::Train)?).at(Stage::Train)?;
            println!("{} trees on {} rows, OOB error {oob:.4}, model {}", model.trees.len(), train.len(), path.display());
        }
        Command::Importance { model, features, samples } => {
            let cfg = load_config(&cli)?;
            let model = read_model(&or_default(model, &cfg, files::MODEL), Stage::Importance)?;
            let feats = read_features(&or_default(features, &cfg, files::FEATURES), Stage::Importance)?;
            let samples = read_samples(&or_default(samples, &cfg, files::SAMPLES), Stage::Importance)?;
            let [train, _, _] = train_matrix(&feats, &samples)?;
            let report = pipeline::importance(&model, &train, cfg.seed)?;
            write_table(&cfg.output_dir.join(files::IMPORTANCE), Stage::Importance, |b| {
                tables::write_importance(b, &report.per_dimension)
            })?;
            print!("{}", importance_summary(&report));
        }
        Command::Report { model, features, samples } => {
            let cfg = load_config(&cli)?;
            let model = read_model(&or_default(model, &cfg, files::MODEL), Stage::Report)?;
            let feats = read_features(&or_default(features, &cfg, files::FEATURES), Stage::Report)?;
            let samples = read_samples(&or_default(samples, &cfg, files::SAMPLES), Stage::Report)?;
            let [_, _, test] = rows_by_split(&feats, &samples);
            let eval = pipeline::evaluate(&model, &test)?;
            let out = &cfg.output_dir;
            write_table(&out.join(files::ACCURACY), Stage::Report, |b| tables::write_accuracy(b, &eval.per_category))?;
            write_table(&out.join(files::CONFUSION), Stage::Report, |b| tables::write_confusion(b, &eval.confusion))?;
            let mut text = accuracy_table(&eval);
            let imp_path = out.join(files::IMPORTANCE);
            if imp_path.is_file() {
                let dims = tables::read_importance(open(&imp_path, Stage::Report)?).at(Stage::Report)?;
                text.push('\n');
                text.push_str(&importance_summary(&ImportanceReport::from_dimensions(dims)));
            }
            fs::write(out.join(files::REPORT), &text).at(Stage::Report)?;
            print!("{text}");
        }
        Command::PredictRegion { model, bbox, step, points, out } => {
            let cfg = load_config(&cli)?;
            let model = read_model(&or_default(model, &cfg, files::MODEL), Stage::Predict)?;
            let queries: Vec<SamplePoint> = match (bbox, points) {
                (Some(b), None) => {
                    if b.len() != 4 {
                        bail!("[predict] --bbox takes four values");
                    }
                    let rect = Rect::new(Point::new(b[0], b[1]), Point::new(b[2], b[3]));
                    if !(rect.min.x < rect.max.x && rect.min.y < rect.max.y) {
                        bail!("[predict] --bbox must be min_lon,min_lat,max_lon,max_lat");
                    }
                    grid_points(&rect, *step)?
                }
                (None, Some(p)) => read_samples(p, Stage::Predict)?.into_iter().map(|r| r.point).collect(),
                _ => bail!("[predict] pass either --bbox or --points"),
            };
            let index = footprint_index(&cfg, Stage::Predict)?;
            let preds = pipeline::predict_region(&model, &index, &queries, cfg.tile_extent, cfg.resolution)?;
            let flagged = preds.iter().filter(|p| p.low_confidence).count();
            write_table(&or_default(out, &cfg, files::PREDICTIONS), Stage::Predict, |b| tables::write_predictions(b, &preds))?;
            println!("{} predictions, {flagged} low-confidence", preds.len());
        }
        Command::Synth { out, zip_side, n_samples } => {
            let seed = cli.seed.unwrap_or(0);
            let params = RegionParams { zip_side_m: *zip_side, ..RegionParams::default() };
            let region = synthesize_region(&SyntheticSpec::default(), &params, seed).context("[synth] generation failed")?;
            fs::create_dir_all(out).context("[synth] creating output directory")?;
            let write = |name: &str, text: &str| {
                fs::write(out.join(name), text).with_context(|| format!("[synth] writing {name}"))
            };
            write("footprints.geojson", &region.footprints_geojson)?;
            write("landuse.geojson", &region.landuse_geojson)?;
            write("zips.geojson", &region.zips_geojson)?;
            write("income.csv", &region.income_csv)?;
            let abs = fs::canonicalize(out).context("[synth] resolving output directory")?;
            let mut cfg = PipelineConfig::new(
                abs.join("footprints.geojson"),
                abs.join("landuse.geojson"),
                abs.join("zips.geojson"),
                abs.join("income.csv"),
                abs.join("out"),
            );
            cfg.n_samples = *n_samples;
            cfg.seed = seed;
            write("config.txt", &cfg.to_text())?;
            println!("synthetic region written to {}; run with --config {}", out.display(), out.join("config.txt").display());
        }
        Command::Run => {
            let cfg = load_config(&cli)?;
            let summary = run_pipeline(&cfg)?;
            print!("{}", accuracy_table(&summary.evaluation));
            print!("{}", importance_summary(&summary.importance));
            println!("artifacts in {}", cfg.output_dir.display());
        }
    }
    Ok(())
}
