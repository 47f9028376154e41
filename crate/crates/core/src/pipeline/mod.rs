//! Stage functions and the end-to-end run.
//!
//! Each stage is a plain function over in-memory values; [`run_pipeline`]
//! chains them and writes the CSV artifacts of [`tables`]. All randomness
//! derives from the configured master seed through [`stage_seed`], and
//! parallel maps collect in input order, so two runs with the same
//! configuration write byte-identical files.

pub mod config;
pub mod tables;

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use thiserror::Error;

pub use config::{ConfigError, PipelineConfig, TileFormat};
pub use tables::{CategoryAccuracy, FeatureRow, RegionPrediction, SampleRecord, TableError, TileRecord};

use crate::forest::{self, ForestModel, ForestParams, ImportanceReport, Matrix};
use crate::geodata::{parse_footprints, parse_income, parse_landuse, FootprintIndex, IncomeIndex, LocalProjection, ParseStats, ResidentialZone};
use crate::geometry::{Point, Rect};
use crate::morpho::{feature_names, featurize, FeatureFamily};
use crate::raster::{clip_tile, rasterize};
use crate::sampler::{balance_and_split, label_point, sample_points, IncomeCategory, SamplePoint, SamplerParams, Split, SplitSet, NUM_CATEGORIES};
use crate::seeds::stage_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Sample,
    Split,
    Rasterize,
    Featurize,
    Train,
    Evaluate,
    Importance,
    Predict,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Sample => "sample",
            Stage::Split => "split",
            Stage::Rasterize => "rasterize",
            Stage::Featurize => "featurize",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Importance => "importance",
            Stage::Predict => "predict",
            Stage::Report => "report",
        })
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug, Error)]
#[error("[{stage}] {cause}")]
pub struct PipelineError {
    pub stage: Stage,
    pub cause: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: Stage, cause: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        Self { stage, cause: cause.into() }
    }
}

/// Attaches a stage to any error.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<Box<dyn std::error::Error + Send + Sync>>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}

fn read_file(path: &Path, stage: Stage) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|e| PipelineError::new(stage, format!("{}: {e}", path.display())))
}

/// Parsed inputs.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub footprints: FootprintIndex,
    pub zones: Vec<ResidentialZone>,
    pub income: IncomeIndex,
    pub stats: IngestStats,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestStats {
    pub footprints: ParseStats,
    pub landuse: ParseStats,
    pub income: ParseStats,
}

impl Inputs {
    pub fn summary(&self) -> String {
        let s = &self.stats;
        let labeled = self.income.entries().iter().filter(|e| e.income.is_some()).count();
        format!(
            "footprints {} (rejected {}, skipped {})\nresidential zones {} (rejected {}, skipped {})\nzip areas {} with income {} (rejected rows {}, warnings {})\n",
            self.footprints.footprints().len(),
            s.footprints.rejected,
            s.footprints.skipped,
            self.zones.len(),
            s.landuse.rejected,
            s.landuse.skipped,
            self.income.entries().len(),
            labeled,
            s.income.rejected,
            s.income.warnings.len(),
        )
    }
}

pub fn ingest(cfg: &PipelineConfig) -> Result<Inputs, PipelineError> {
    cfg.validate().at(Stage::Config)?;
    let (footprints, fp_stats) = parse_footprints(&read_file(&cfg.footprints, Stage::Ingest)?).at(Stage::Ingest)?;
    let (zones, lu_stats) = parse_landuse(&read_file(&cfg.landuse, Stage::Ingest)?, &cfg.residential_codes, &cfg.landuse_code_field)
        .at(Stage::Ingest)?;
    let (income, inc_stats) = parse_income(
        &read_file(&cfg.income, Stage::Ingest)?,
        &read_file(&cfg.zip_boundaries, Stage::Ingest)?,
        &cfg.zip_field,
    )
    .at(Stage::Ingest)?;
    if zones.is_empty() {
        warn!("no land-use polygon carries a residential code");
    }
    Ok(Inputs {
        footprints: FootprintIndex::new(footprints),
        zones,
        income,
        stats: IngestStats { footprints: fp_stats, landuse: lu_stats, income: inc_stats },
    })
}

/// Projection about the centre of the zones' lon/lat bounding box.
pub fn region_projection(zones: &[ResidentialZone]) -> Result<LocalProjection, PipelineError> {
    let bbox = Rect::of_points(zones.iter().flat_map(|z| z.polygon.exterior.iter()))
        .ok_or_else(|| PipelineError::new(Stage::Sample, "no residential zones to sample"))?;
    LocalProjection::new(Point::new((bbox.min.x + bbox.max.x) / 2.0, (bbox.min.y + bbox.max.y) / 2.0)).at(Stage::Sample)
}

/// Sample points, labeled where they fall in a zip with income.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub points: Vec<SamplePoint>,
    pub saturated: bool,
}

/// Minimum-distance sampling over the residential zones projected about
/// the region centre, followed by income labeling.
pub fn sample(cfg: &PipelineConfig, zones: &[ResidentialZone], income: &IncomeIndex) -> Result<Sampled, PipelineError> {
    let proj = region_projection(zones)?;
    let metric: Vec<ResidentialZone> = zones
        .iter()
        .map(|z| ResidentialZone { polygon: proj.project_polygon(&z.polygon), zone_code: z.zone_code.clone() })
        .collect();
    let params = SamplerParams::new(cfg.n_samples, cfg.min_dist, stage_seed(cfg.seed, "sample"));
    let outcome = sample_points(&metric, &params).at(Stage::Sample)?;
    let width = outcome.points.len().max(1).to_string().len();
    let points = outcome
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| label_point(SamplePoint::unlabeled(format!("p{i:0width$}"), *p, proj.unproject(p)), income))
        .collect();
    Ok(Sampled { points, saturated: outcome.saturated })
}

pub fn split(cfg: &PipelineConfig, points: &[SamplePoint]) -> Result<SplitSet, PipelineError> {
    balance_and_split(points, cfg.cap, cfg.split_ratios, stage_seed(cfg.seed, "split")).at(Stage::Split)
}

/// Sample records in split order, unassigned points last.
pub fn sample_records(points: &[SamplePoint], splits: &SplitSet) -> Vec<SampleRecord> {
    let assigned: std::collections::HashSet<&str> = splits.iter().map(|(_, p)| p.id.as_str()).collect();
    splits
        .iter()
        .map(|(s, p)| SampleRecord { point: p.clone(), split: Some(s) })
        .chain(
            points
                .iter()
                .filter(|p| !assigned.contains(p.id.as_str()))
                .map(|p| SampleRecord { point: p.clone(), split: None }),
        )
        .collect()
}

/// Where to write tile images while featurizing.
#[derive(Debug, Clone)]
pub struct TileSink {
    pub dir: PathBuf,
    pub format: TileFormat,
}

/// Output of [`featurize_points`] for one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TileOutcome {
    pub features: FeatureRow,
    /// No footprint reaches the tile.
    pub empty: bool,
    pub image: Option<String>,
}

/// Clips, rasterizes and featurizes the tile around every point, in
/// parallel, optionally exporting each raster. Rasters are dropped once
/// featurized.
pub fn featurize_points(
    index: &FootprintIndex,
    points: &[SamplePoint],
    extent_m: f64,
    resolution: usize,
    sink: Option<&TileSink>,
) -> Result<Vec<TileOutcome>, PipelineError> {
    if let Some(s) = sink {
        fs::create_dir_all(&s.dir).at(Stage::Rasterize)?;
    }
    points
        .par_iter()
        .map(|p| {
            let tile = clip_tile(index, p, extent_m).at(Stage::Rasterize)?;
            let raster = rasterize(&tile, resolution);
            let image = match sink {
                Some(s) => {
                    let name = format!("{}.{}", sanitize(&p.id), s.format.extension());
                    let file = BufWriter::new(fs::File::create(s.dir.join(&name)).at(Stage::Rasterize)?);
                    match s.format {
                        TileFormat::Pgm => raster.write_pgm(file),
                        TileFormat::Png => raster.write_png(file),
                    }
                    .at(Stage::Rasterize)?;
                    Some(name)
                }
                None => None,
            };
            let fv = featurize(&tile, &raster).at(Stage::Featurize)?;
            Ok(TileOutcome {
                features: FeatureRow { id: p.id.clone(), category: p.category, values: fv.to_array() },
                empty: tile.is_empty(),
                image,
            })
        })
        .collect()
}

/// Renders and writes the tile image of every record, plus the sidecar
/// `tiles.csv` in the same directory. Image paths in the sidecar are
/// relative to it.
pub fn export_tiles(
    index: &FootprintIndex,
    records: &[SampleRecord],
    extent_m: f64,
    resolution: usize,
    sink: &TileSink,
) -> Result<Vec<TileRecord>, PipelineError> {
    fs::create_dir_all(&sink.dir).at(Stage::Rasterize)?;
    let rows = records
        .par_iter()
        .map(|r| {
            let tile = clip_tile(index, &r.point, extent_m).at(Stage::Rasterize)?;
            let raster = rasterize(&tile, resolution);
            let name = format!("{}.{}", sanitize(&r.point.id), sink.format.extension());
            let file = BufWriter::new(fs::File::create(sink.dir.join(&name)).at(Stage::Rasterize)?);
            match sink.format {
                TileFormat::Pgm => raster.write_pgm(file),
                TileFormat::Png => raster.write_png(file),
            }
            .at(Stage::Rasterize)?;
            Ok(TileRecord { id: r.point.id.clone(), file: name, category: r.point.category, split: r.split })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    write_artifact(&sink.dir, files::TILES, Stage::Rasterize, |b| tables::write_tiles(b, &rows))?;
    Ok(rows)
}

/// Keeps ids usable as file names.
fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Labeled rows as a training matrix.
pub fn to_matrix(rows: &[&FeatureRow]) -> Result<(Matrix, Vec<u8>), PipelineError> {
    let mut data = Vec::with_capacity(rows.len() * crate::morpho::FEATURE_DIM);
    let mut y = Vec::with_capacity(rows.len());
    for r in rows {
        let c = r.category.ok_or_else(|| PipelineError::new(Stage::Train, format!("row {} has no category", r.id)))?;
        data.extend_from_slice(&r.values);
        y.push(c.value());
    }
    Ok((Matrix::new(data, crate::morpho::FEATURE_DIM), y))
}

pub fn forest_params(cfg: &PipelineConfig) -> ForestParams {
    ForestParams { seed: stage_seed(cfg.seed, "forest"), ..cfg.forest.clone() }
}

pub fn train_forest(rows: &[&FeatureRow], params: &ForestParams) -> Result<(ForestModel, f64), PipelineError> {
    let (x, y) = to_matrix(rows)?;
    let model = forest::train(&x, &y, params, feature_names()).at(Stage::Train)?;
    let oob = model.oob_error(&x, &y).at(Stage::Train)?;
    Ok((model, oob))
}

pub fn importance(model: &ForestModel, train_rows: &[&FeatureRow], seed: u64) -> Result<ImportanceReport, PipelineError> {
    let (x, y) = to_matrix(train_rows)?;
    forest::permutation_importance(model, &x, &y, stage_seed(seed, "importance")).at(Stage::Importance)
}

/// Held-out results.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `confusion[true][predicted]`.
    pub confusion: [[usize; NUM_CATEGORIES]; NUM_CATEGORIES],
    pub per_category: Vec<CategoryAccuracy>,
    pub correct: usize,
    pub total: usize,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

pub fn evaluate(model: &ForestModel, rows: &[&FeatureRow]) -> Result<Evaluation, PipelineError> {
    if rows.is_empty() {
        return Err(PipelineError::new(Stage::Evaluate, "test split is empty"));
    }
    let (x, y) = to_matrix(rows).map_err(|e| PipelineError::new(Stage::Evaluate, e.cause))?;
    let predictions = model.predict_matrix(&x).at(Stage::Evaluate)?;
    let mut confusion = [[0usize; NUM_CATEGORIES]; NUM_CATEGORIES];
    for (p, &t) in predictions.iter().zip(&y) {
        confusion[t as usize][p.category] += 1;
    }
    let per_category = (0..NUM_CATEGORIES)
        .map(|c| CategoryAccuracy {
            category: IncomeCategory::new(c as u8).unwrap(),
            n: confusion[c].iter().sum(),
            correct: confusion[c][c],
        })
        .collect();
    let correct = (0..NUM_CATEGORIES).map(|c| confusion[c][c]).sum();
    Ok(Evaluation { confusion, per_category, correct, total: rows.len() })
}

/// Family order of the importance summary table.
pub const REPORT_FAMILY_ORDER: [FeatureFamily; 4] = [
    FeatureFamily::Density,
    FeatureFamily::BuildingSize,
    FeatureFamily::ContourComplexity,
    FeatureFamily::Directionality,
];

pub fn importance_summary(report: &ImportanceReport) -> String {
    let mut s = String::from("Feature family importance\n");
    for f in REPORT_FAMILY_ORDER {
        writeln!(s, "  {:<20} {:.4}", f.to_string(), report.family(f)).unwrap();
    }
    let names = feature_names();
    s.push_str("Top dimensions\n");
    for &d in report.ranking().iter().take(10) {
        writeln!(s, "  {:<14} {:.6}", names[d], report.per_dimension[d]).unwrap();
    }
    s
}

pub fn accuracy_table(eval: &Evaluation) -> String {
    let mut s = String::from("Prediction accuracy per category\n");
    writeln!(s, "  {:<3} {:<22} {:>6} {:>9}", "cat", "income", "n", "accuracy").unwrap();
    for r in &eval.per_category {
        let acc = r.accuracy().map_or("-".to_string(), |a| format!("{a:.4}"));
        writeln!(s, "  {:<3} {:<22} {:>6} {:>9}", r.category.value(), r.category.label(), r.n, acc).unwrap();
    }
    writeln!(s, "  overall accuracy {:.4} ({}/{})", eval.accuracy(), eval.correct, eval.total).unwrap();
    s
}

/// Everything an end-to-end run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub n_points: usize,
    pub saturated: bool,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub empty_tiles: usize,
    pub oob_error: f64,
    pub evaluation: Evaluation,
    pub importance: ImportanceReport,
    pub model: ForestModel,
}

pub const STALE_MARKER: &str = "STALE";

pub mod files {
    pub const SAMPLES: &str = "samples.csv";
    pub const FEATURES: &str = "features.csv";
    pub const TILES: &str = "tiles.csv";
    pub const TILE_DIR: &str = "tiles";
    pub const MODEL: &str = "model.rf";
    pub const ACCURACY: &str = "accuracy.csv";
    pub const CONFUSION: &str = "confusion.csv";
    pub const IMPORTANCE: &str = "importance.csv";
    pub const REPORT: &str = "report.txt";
    pub const PREDICTIONS: &str = "predictions.csv";
}

/// Writes `bytes` to `dir/name` through a temporary file.
pub fn write_artifact(dir: &Path, name: &str, stage: Stage, f: impl FnOnce(&mut Vec<u8>) -> Result<(), TableError>) -> Result<PathBuf, PipelineError> {
    let mut buf = Vec::new();
    f(&mut buf).at(stage)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, &buf).and_then(|_| fs::rename(&tmp, &path)).at(stage)?;
    Ok(path)
}

/// Runs every stage and writes the artifacts into `cfg.output_dir`. A
/// `STALE` marker sits in the directory until the run succeeds; on failure
/// it names the failing stage.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate().at(Stage::Config)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).at(Stage::Config)?;
    let marker = out.join(STALE_MARKER);
    fs::write(&marker, "run in progress\n").at(Stage::Config)?;
    let result = run_stages(cfg);
    match &result {
        Ok(_) => fs::remove_file(&marker).at(Stage::Report)?,
        Err(e) => {
            let _ = fs::write(&marker, format!("run failed: {e}\n"));
        }
    }
    result
}

fn run_stages(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    let out = &cfg.output_dir;
    let inputs = ingest(cfg)?;
    info!("ingest: {}", inputs.summary().replace('\n', "; "));

    let sampled = sample(cfg, &inputs.zones, &inputs.income)?;
    let splits = split(cfg, &sampled.points)?;
    info!("sample: {} points, {} train / {} val / {} test", sampled.points.len(), splits.train.len(), splits.val.len(), splits.test.len());
    let records = sample_records(&sampled.points, &splits);
    write_artifact(out, files::SAMPLES, Stage::Split, |b| tables::write_samples(b, &records))?;

    let assigned: Vec<SamplePoint> = splits.iter().map(|(_, p)| p.clone()).collect();
    let sink = cfg.tile_format.map(|format| TileSink { dir: out.join(files::TILE_DIR), format });
    let tiles = featurize_points(&inputs.footprints, &assigned, cfg.tile_extent, cfg.resolution, sink.as_ref())?;
    let empty_tiles = tiles.iter().filter(|t| t.empty).count();
    if empty_tiles > 0 {
        warn!("{empty_tiles} tiles contain no footprints");
    }
    if let Some(sink) = &sink {
        let sidecar: Vec<TileRecord> = splits
            .iter()
            .zip(&tiles)
            .map(|((s, p), t)| TileRecord {
                id: p.id.clone(),
                file: t.image.clone().unwrap_or_default(),
                category: p.category,
                split: Some(s),
            })
            .collect();
        write_artifact(&sink.dir, files::TILES, Stage::Rasterize, |b| tables::write_tiles(b, &sidecar))?;
    }
    let rows: Vec<FeatureRow> = tiles.into_iter().map(|t| t.features).collect();
    write_artifact(out, files::FEATURES, Stage::Featurize, |b| tables::write_features(b, &rows))?;

    let n_train = splits.train.len();
    let n_val = splits.val.len();
    let train_rows: Vec<&FeatureRow> = rows[..n_train].iter().collect();
    let test_rows: Vec<&FeatureRow> = rows[n_train + n_val..].iter().collect();
    let (model, oob_error) = train_forest(&train_rows, &forest_params(cfg))?;
    let text = forest::save_model(&model).at(Stage::Train)?;
    fs::write(out.join(files::MODEL), text).at(Stage::Train)?;

    let evaluation = evaluate(&model, &test_rows)?;
    write_artifact(out, files::ACCURACY, Stage::Evaluate, |b| tables::write_accuracy(b, &evaluation.per_category))?;
    write_artifact(out, files::CONFUSION, Stage::Evaluate, |b| tables::write_confusion(b, &evaluation.confusion))?;

    let report = importance(&model, &train_rows, cfg.seed)?;
    write_artifact(out, files::IMPORTANCE, Stage::Importance, |b| tables::write_importance(b, &report.per_dimension))?;

    let summary = RunSummary {
        n_points: sampled.points.len(),
        saturated: sampled.saturated,
        n_train,
        n_val,
        n_test: test_rows.len(),
        empty_tiles,
        oob_error,
        evaluation,
        importance: report,
        model,
    };
    let text = render_report(cfg, &inputs, &summary);
    fs::write(out.join(files::REPORT), text).at(Stage::Report)?;
    Ok(summary)
}

pub fn render_report(cfg: &PipelineConfig, inputs: &Inputs, run: &RunSummary) -> String {
    let mut s = String::from("figground run report\n\n");
    writeln!(s, "seed {}", cfg.seed).unwrap();
    s.push_str(&inputs.summary());
    writeln!(
        s,
        "sample points {} (requested {}, min distance {} m{})",
        run.n_points,
        cfg.n_samples,
        cfg.min_dist,
        if run.saturated { ", saturated" } else { "" }
    )
    .unwrap();
    writeln!(s, "split train {} val {} test {}", run.n_train, run.n_val, run.n_test).unwrap();
    writeln!(s, "tiles {} m at {} px, {} empty", cfg.tile_extent, cfg.resolution, run.empty_tiles).unwrap();
    writeln!(
        s,
        "forest {} trees, {} features per split, OOB error {:.4}\n",
        run.model.trees.len(),
        run.model.params.resolved_features_per_split(run.model.n_features),
        run.oob_error
    )
    .unwrap();
    s.push_str(&accuracy_table(&run.evaluation));
    s.push('\n');
    s.push_str(&importance_summary(&run.importance));
    s
}

/// Query points on a regular metric grid covering a lon/lat box, at least
/// one point for any non-empty box.
pub fn grid_points(bbox: &Rect, step_m: f64) -> Result<Vec<SamplePoint>, PipelineError> {
    if !(step_m > 0.0) {
        return Err(PipelineError::new(Stage::Predict, "grid step must be positive"));
    }
    let center = Point::new((bbox.min.x + bbox.max.x) / 2.0, (bbox.min.y + bbox.max.y) / 2.0);
    let proj = LocalProjection::new(center).at(Stage::Predict)?;
    let (lo, hi) = (proj.project(&bbox.min), proj.project(&bbox.max));
    let nx = ((hi.x - lo.x) / step_m).floor() as usize + 1;
    let ny = ((hi.y - lo.y) / step_m).floor() as usize + 1;
    // Centre the lattice in the box.
    let ox = lo.x + ((hi.x - lo.x) - (nx - 1) as f64 * step_m) / 2.0;
    let oy = lo.y + ((hi.y - lo.y) - (ny - 1) as f64 * step_m) / 2.0;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let m = Point::new(ox + i as f64 * step_m, oy + j as f64 * step_m);
            out.push(SamplePoint::unlabeled(format!("g{j}_{i}"), m, proj.unproject(&m)));
        }
    }
    Ok(out)
}

/// Classifies the tile around every query point.
pub fn predict_region(
    model: &ForestModel,
    index: &FootprintIndex,
    points: &[SamplePoint],
    extent_m: f64,
    resolution: usize,
) -> Result<Vec<RegionPrediction>, PipelineError> {
    let tiles = featurize_points(index, points, extent_m, resolution, None)?;
    tiles
        .par_iter()
        .zip(points)
        .map(|(t, p)| {
            let pred = model.predict(&t.features.values).at(Stage::Predict)?;
            Ok(RegionPrediction {
                id: p.id.clone(),
                lonlat: p.lonlat,
                category: IncomeCategory::new(pred.category as u8).at(Stage::Predict)?,
                margin: pred.margin(),
                low_confidence: t.empty,
            })
        })
        .collect()
}

/// Partitions feature rows by the split recorded for their id, keeping
/// row order. Rows without a split are left out.
pub fn rows_by_split<'a>(rows: &'a [FeatureRow], samples: &[SampleRecord]) -> [Vec<&'a FeatureRow>; 3] {
    let split_of: std::collections::HashMap<&str, Split> =
        samples.iter().filter_map(|r| r.split.map(|s| (r.point.id.as_str(), s))).collect();
    let mut out: [Vec<&FeatureRow>; 3] = Default::default();
    for row in rows {
        match split_of.get(row.id.as_str()) {
            Some(Split::Train) => out[0].push(row),
            Some(Split::Val) => out[1].push(row),
            Some(Split::Test) => out[2].push(row),
            None => {}
        }
    }
    out
}
