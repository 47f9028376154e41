//! `key = value` run configuration.
//!
//! ```text
//! # inputs, relative to this file
//! footprints = footprints.geojson
//! landuse = landuse.geojson
//! zip_boundaries = zips.geojson
//! income = income.csv
//! residential_codes = R1, R2
//! output_dir = out
//! seed = 7
//! ```
//!
//! Every other key has a default; unknown keys are an error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::forest::ForestParams;
use crate::raster::{DEFAULT_EXTENT_M, DEFAULT_RESOLUTION};
use crate::sampler::{DEFAULT_CAP, DEFAULT_RATIOS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("input `{key}` not found: {path}")]
    MissingInput { key: &'static str, path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileFormat {
    Pgm,
    Png,
}

impl TileFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TileFormat::Pgm => "pgm",
            TileFormat::Png => "png",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgm" => Some(TileFormat::Pgm),
            "png" => Some(TileFormat::Png),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub footprints: PathBuf,
    pub landuse: PathBuf,
    pub zip_boundaries: PathBuf,
    pub income: PathBuf,
    pub residential_codes: BTreeSet<String>,
    pub landuse_code_field: String,
    pub zip_field: String,
    pub n_samples: usize,
    pub min_dist: f64,
    pub seed: u64,
    pub tile_extent: f64,
    pub resolution: usize,
    pub cap: usize,
    pub split_ratios: [f64; 3],
    pub forest: ForestParams,
    pub output_dir: PathBuf,
    /// Write tile images during `run` as well.
    pub tile_format: Option<TileFormat>,
}

impl PipelineConfig {
    /// Configuration with default parameters for the given inputs.
    pub fn new(
        footprints: PathBuf,
        landuse: PathBuf,
        zip_boundaries: PathBuf,
        income: PathBuf,
        output_dir: PathBuf,
    ) -> Self {
        Self {
            footprints,
            landuse,
            zip_boundaries,
            income,
            residential_codes: ["R1".to_string()].into(),
            landuse_code_field: "code".into(),
            zip_field: "zip".into(),
            n_samples: 500_000,
            min_dist: 80.0,
            seed: 0,
            tile_extent: DEFAULT_EXTENT_M,
            resolution: DEFAULT_RESOLUTION,
            cap: DEFAULT_CAP,
            split_ratios: DEFAULT_RATIOS,
            forest: ForestParams::default(),
            output_dir,
            tile_format: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut footprints = None;
        let mut landuse = None;
        let mut zip_boundaries = None;
        let mut income = None;
        let mut output_dir = None;
        let mut cfg = Self::new(PathBuf::new(), PathBuf::new(), PathBuf::new(), PathBuf::new(), PathBuf::new());
        let mut seen = BTreeSet::new();

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, message: "expected `key = value`".into() });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Syntax { line: i + 1, message: format!("duplicate key `{key}`") });
            }
            let path = || base.join(value);
            match key {
                "footprints" => footprints = Some(path()),
                "landuse" => landuse = Some(path()),
                "zip_boundaries" => zip_boundaries = Some(path()),
                "income" => income = Some(path()),
                "output_dir" => output_dir = Some(path()),
                "residential_codes" => {
                    cfg.residential_codes =
                        value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
                }
                "landuse_code_field" => cfg.landuse_code_field = value.into(),
                "zip_field" => cfg.zip_field = value.into(),
                "n_samples" => cfg.n_samples = num("n_samples", value)?,
                "min_dist" => cfg.min_dist = num("min_dist", value)?,
                "seed" => cfg.seed = num("seed", value)?,
                "tile_extent" => cfg.tile_extent = num("tile_extent", value)?,
                "resolution" => cfg.resolution = num("resolution", value)?,
                "cap" => cfg.cap = num("cap", value)?,
                "split_ratios" => {
                    let parts: Vec<f64> =
                        value.split(',').map(|v| num("split_ratios", v.trim())).collect::<Result<_, _>>()?;
                    cfg.split_ratios = parts.try_into().map_err(|_| ConfigError::Invalid {
                        key: "split_ratios",
                        message: "expected three comma-separated values".into(),
                    })?;
                }
                "n_trees" => cfg.forest.n_trees = num("n_trees", value)?,
                "features_per_split" => cfg.forest.features_per_split = opt_num("features_per_split", value)?,
                "max_depth" => cfg.forest.max_depth = opt_num("max_depth", value)?,
                "min_samples_leaf" => cfg.forest.min_samples_leaf = num("min_samples_leaf", value)?,
                "tile_format" => {
                    cfg.tile_format = match value {
                        "none" => None,
                        v => Some(TileFormat::parse(v).ok_or_else(|| ConfigError::Invalid {
                            key: "tile_format",
                            message: format!("expected none, pgm or png, got `{v}`"),
                        })?),
                    }
                }
                other => return Err(ConfigError::UnknownKey(other.into())),
            }
        }
        cfg.footprints = footprints.ok_or(ConfigError::Missing("footprints"))?;
        cfg.landuse = landuse.ok_or(ConfigError::Missing("landuse"))?;
        cfg.zip_boundaries = zip_boundaries.ok_or(ConfigError::Missing("zip_boundaries"))?;
        cfg.income = income.ok_or(ConfigError::Missing("income"))?;
        cfg.output_dir = output_dir.ok_or(ConfigError::Missing("output_dir"))?;
        cfg.forest.seed = cfg.seed;
        Ok(cfg)
    }

    /// Parameter checks plus existence of every input file.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, message: &str| Err(ConfigError::Invalid { key, message: message.into() });
        if self.n_samples == 0 {
            return invalid("n_samples", "must be positive");
        }
        if !(self.min_dist > 0.0) {
            return invalid("min_dist", "must be positive");
        }
        if !(self.tile_extent > 0.0) {
            return invalid("tile_extent", "must be positive");
        }
        if self.resolution == 0 || self.resolution % 16 != 0 {
            return invalid("resolution", "must be a positive multiple of 16");
        }
        if self.cap == 0 {
            return invalid("cap", "must be positive");
        }
        if self.split_ratios.iter().any(|r| !(*r >= 0.0)) || (self.split_ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return invalid("split_ratios", "must be non-negative and sum to 1");
        }
        if self.forest.n_trees == 0 {
            return invalid("n_trees", "must be positive");
        }
        if self.forest.features_per_split == Some(0) {
            return invalid("features_per_split", "must be positive");
        }
        if self.forest.min_samples_leaf == 0 {
            return invalid("min_samples_leaf", "must be positive");
        }
        if self.residential_codes.is_empty() {
            return invalid("residential_codes", "at least one code is required");
        }
        for (key, path) in [
            ("footprints", &self.footprints),
            ("landuse", &self.landuse),
            ("zip_boundaries", &self.zip_boundaries),
            ("income", &self.income),
        ] {
            if !path.is_file() {
                return Err(ConfigError::MissingInput { key, path: path.clone() });
            }
        }
        Ok(())
    }

    /// Serializes back to config text with absolute paths.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<usize>| v.map_or("none".into(), |v| v.to_string());
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("footprints", self.footprints.display().to_string());
        kv("landuse", self.landuse.display().to_string());
        kv("zip_boundaries", self.zip_boundaries.display().to_string());
        kv("income", self.income.display().to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv("residential_codes", self.residential_codes.iter().cloned().collect::<Vec<_>>().join(", "));
        kv("landuse_code_field", self.landuse_code_field.clone());
        kv("zip_field", self.zip_field.clone());
        kv("n_samples", self.n_samples.to_string());
        kv("min_dist", self.min_dist.to_string());
        kv("seed", self.seed.to_string());
        kv("tile_extent", self.tile_extent.to_string());
        kv("resolution", self.resolution.to_string());
        kv("cap", self.cap.to_string());
        kv("split_ratios", self.split_ratios.map(|r| r.to_string()).join(", "));
        kv("n_trees", self.forest.n_trees.to_string());
        kv("features_per_split", opt(self.forest.features_per_split));
        kv("max_depth", opt(self.forest.max_depth));
        kv("min_samples_leaf", self.forest.min_samples_leaf.to_string());
        kv("tile_format", self.tile_format.map_or("none", TileFormat::extension).to_string());
        s
    }
}

fn num<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Invalid { key, message: format!("cannot parse `{value}`") })
}

fn opt_num(key: &'static str, value: &str) -> Result<Option<usize>, ConfigError> {
    if value == "none" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}
