//! CSV artifacts passed between stages.
//!
//! Every file starts with a `#schema=<name>/<version>` line followed by a
//! fixed header. Readers refuse any other schema or header, so a stage
//! never consumes an artifact written by an incompatible version.
//! Floats use Rust's shortest round-trip formatting.

use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::geometry::Point;
use crate::morpho::{feature_names, FEATURE_DIM};
use crate::sampler::{IncomeCategory, SamplePoint, Split};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected schema `{expected}`, found `{found}`")]
    Schema { expected: String, found: String },
    #[error("unexpected header for {schema}: {found}")]
    Header { schema: &'static str, found: String },
    #[error("{schema} row {row}: {message}")]
    Row { schema: &'static str, row: usize, message: String },
}

pub const SAMPLES: &str = "samples";
pub const FEATURES: &str = "features";
pub const TILES: &str = "tiles";
pub const IMPORTANCE: &str = "importance";
pub const ACCURACY: &str = "accuracy";
pub const CONFUSION: &str = "confusion";
pub const PREDICTIONS: &str = "predictions";
pub const SCHEMA_VERSION: u32 = 1;

fn schema_line(name: &str) -> String {
    format!("#schema={name}/{SCHEMA_VERSION}")
}

/// Writes the schema line and header, returning a CSV writer for the rows.
fn writer<W: Write>(mut out: W, name: &str, header: &[String]) -> Result<csv::Writer<W>, TableError> {
    writeln!(out, "{}", schema_line(name))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// Checks the schema line and header, returning the data records.
fn records<R: Read>(input: R, name: &'static str, header: &[String]) -> Result<Vec<csv::StringRecord>, TableError> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let first = first.trim_end_matches(['\n', '\r']);
    if first != schema_line(name) {
        return Err(TableError::Schema { expected: schema_line(name), found: first.to_string() });
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().map(String::as_str)) {
        return Err(TableError::Header { schema: name, found: found.iter().collect::<Vec<_>>().join(",") });
    }
    r.records().map(|rec| rec.map_err(TableError::from)).collect()
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn row_err(schema: &'static str, row: usize, message: impl Into<String>) -> TableError {
    TableError::Row { schema, row: row + 1, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(schema: &'static str, row: usize, col: &str, v: &str) -> Result<T, TableError> {
    v.parse().map_err(|_| row_err(schema, row, format!("bad {col} `{v}`")))
}

fn parse_category(schema: &'static str, row: usize, v: &str) -> Result<Option<IncomeCategory>, TableError> {
    if v.is_empty() {
        return Ok(None);
    }
    let c: u8 = parse_num(schema, row, "category", v)?;
    IncomeCategory::new(c).map(Some).map_err(|e| row_err(schema, row, e.to_string()))
}

fn category_str(c: Option<IncomeCategory>) -> String {
    c.map_or(String::new(), |c| c.to_string())
}

/// A sample point with its split, if assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub point: SamplePoint,
    pub split: Option<Split>,
}

fn samples_header() -> Vec<String> {
    strings(&["id", "lon", "lat", "x", "y", "zip", "category", "split"])
}

pub fn write_samples<W: Write>(out: W, rows: &[SampleRecord]) -> Result<(), TableError> {
    let mut w = writer(out, SAMPLES, &samples_header())?;
    for r in rows {
        let p = &r.point;
        w.write_record([
            p.id.clone(),
            p.lonlat.x.to_string(),
            p.lonlat.y.to_string(),
            p.location.x.to_string(),
            p.location.y.to_string(),
            p.zip.clone().unwrap_or_default(),
            category_str(p.category),
            r.split.map_or("", Split::as_str).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(input: R) -> Result<Vec<SampleRecord>, TableError> {
    records(input, SAMPLES, &samples_header())?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let f = |k: usize| rec.get(k).unwrap_or("");
            let num = |k: usize, name: &str| parse_num::<f64>(SAMPLES, i, name, f(k));
            let split = match f(7) {
                "" => None,
                s => Some(Split::parse(s).ok_or_else(|| row_err(SAMPLES, i, format!("bad split `{s}`")))?),
            };
            Ok(SampleRecord {
                point: SamplePoint {
                    id: f(0).to_string(),
                    lonlat: Point::new(num(1, "lon")?, num(2, "lat")?),
                    location: Point::new(num(3, "x")?, num(4, "y")?),
                    zip: Some(f(5).to_string()).filter(|z| !z.is_empty()),
                    category: parse_category(SAMPLES, i, f(6))?,
                },
                split,
            })
        })
        .collect()
}

/// Feature vector of one tile.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub category: Option<IncomeCategory>,
    pub values: [f64; FEATURE_DIM],
}

fn features_header() -> Vec<String> {
    let mut h = strings(&["id", "category"]);
    h.extend(feature_names());
    h
}

pub fn write_features<W: Write>(out: W, rows: &[FeatureRow]) -> Result<(), TableError> {
    let mut w = writer(out, FEATURES, &features_header())?;
    for r in rows {
        let mut rec = vec![r.id.clone(), category_str(r.category)];
        rec.extend(r.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(input: R) -> Result<Vec<FeatureRow>, TableError> {
    records(input, FEATURES, &features_header())?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut values = [0.0; FEATURE_DIM];
            for (k, v) in values.iter_mut().enumerate() {
                *v = parse_num::<f64>(FEATURES, i, "feature", rec.get(k + 2).unwrap_or(""))?;
                if !v.is_finite() {
                    return Err(row_err(FEATURES, i, "non-finite feature"));
                }
            }
            Ok(FeatureRow {
                id: rec.get(0).unwrap_or("").to_string(),
                category: parse_category(FEATURES, i, rec.get(1).unwrap_or(""))?,
                values,
            })
        })
        .collect()
}

/// Sidecar entry for one exported tile image.
#[derive(Debug, Clone, PartialEq)]
pub struct TileRecord {
    pub id: String,
    /// Image path relative to the sidecar.
    pub file: String,
    pub category: Option<IncomeCategory>,
    pub split: Option<Split>,
}

fn tiles_header() -> Vec<String> {
    strings(&["id", "file", "category", "split"])
}

pub fn write_tiles<W: Write>(out: W, rows: &[TileRecord]) -> Result<(), TableError> {
    let mut w = writer(out, TILES, &tiles_header())?;
    for r in rows {
        w.write_record([
            r.id.as_str(),
            r.file.as_str(),
            &category_str(r.category),
            r.split.map_or("", Split::as_str),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tiles<R: Read>(input: R) -> Result<Vec<TileRecord>, TableError> {
    records(input, TILES, &tiles_header())?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let f = |k: usize| rec.get(k).unwrap_or("");
            Ok(TileRecord {
                id: f(0).into(),
                file: f(1).into(),
                category: parse_category(TILES, i, f(2))?,
                split: match f(3) {
                    "" => None,
                    s => Some(Split::parse(s).ok_or_else(|| row_err(TILES, i, format!("bad split `{s}`")))?),
                },
            })
        })
        .collect()
}

pub fn write_importance<W: Write>(out: W, per_dimension: &[f64]) -> Result<(), TableError> {
    let mut w = writer(out, IMPORTANCE, &strings(&["dimension", "feature", "family", "importance"]))?;
    for (dim, (name, v)) in feature_names().iter().zip(per_dimension).enumerate() {
        let family = crate::morpho::FeatureFamily::of_dimension(dim).map_or(String::new(), |f| f.to_string());
        w.write_record([dim.to_string(), name.clone(), family, v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_importance<R: Read>(input: R) -> Result<Vec<f64>, TableError> {
    records(input, IMPORTANCE, &strings(&["dimension", "feature", "family", "importance"]))?
        .iter()
        .enumerate()
        .map(|(i, rec)| parse_num(IMPORTANCE, i, "importance", rec.get(3).unwrap_or("")))
        .collect()
}

/// Held-out accuracy of one true category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryAccuracy {
    pub category: IncomeCategory,
    pub n: usize,
    pub correct: usize,
}

impl CategoryAccuracy {
    /// `None` when the category has no test tiles.
    pub fn accuracy(&self) -> Option<f64> {
        (self.n > 0).then(|| self.correct as f64 / self.n as f64)
    }
}

pub fn write_accuracy<W: Write>(out: W, rows: &[CategoryAccuracy]) -> Result<(), TableError> {
    let mut w = writer(out, ACCURACY, &strings(&["category", "label", "n", "correct", "accuracy"]))?;
    for r in rows {
        w.write_record([
            r.category.to_string(),
            r.category.label().to_string(),
            r.n.to_string(),
            r.correct.to_string(),
            r.accuracy().map_or(String::new(), |a| a.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows are true categories, columns predicted categories.
pub fn write_confusion<W: Write>(out: W, matrix: &[[usize; 8]; 8]) -> Result<(), TableError> {
    let mut header = strings(&["true"]);
    header.extend((0..8).map(|c| format!("pred{c}")));
    let mut w = writer(out, CONFUSION, &header)?;
    for (t, row) in matrix.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(usize::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Prediction for one query point of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPrediction {
    pub id: String,
    pub lonlat: Point,
    pub category: IncomeCategory,
    /// Vote share of the winner minus that of the runner-up.
    pub margin: f64,
    /// Set when the tile holds no footprints, so the prediction reflects
    /// only what the forest does with an empty histogram.
    pub low_confidence: bool,
}

pub fn write_predictions<W: Write>(out: W, rows: &[RegionPrediction]) -> Result<(), TableError> {
    let header = strings(&["id", "lon", "lat", "category", "label", "margin", "low_confidence"]);
    let mut w = writer(out, PREDICTIONS, &header)?;
    for r in rows {
        w.write_record([
            r.id.clone(),
            r.lonlat.x.to_string(),
            r.lonlat.y.to_string(),
            r.category.to_string(),
            r.category.label().to_string(),
            r.margin.to_string(),
            r.low_confidence.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, cat: Option<u8>) -> SampleRecord {
        let mut p = SamplePoint::unlabeled(id, Point::new(1.5, -2.25), Point::new(-71.05, 42.1 + 1e-13));
        p.category = cat.map(|c| IncomeCategory::new(c).unwrap());
        p.zip = cat.map(|_| "02139".into());
        SampleRecord { point: p, split: cat.map(|_| Split::Val) }
    }

    #[test]
    fn samples_round_trip() {
        let rows = vec![sample("a", Some(3)), sample("b,with comma", None)];
        let mut buf = Vec::new();
        write_samples(&mut buf, &rows).unwrap();
        assert!(buf.starts_with(b"#schema=samples/1\nid,lon,lat,x,y,zip,category,split\n"));
        assert_eq!(read_samples(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn features_round_trip_bitwise() {
        let mut values = [0.0; FEATURE_DIM];
        values[0] = 1.0 / 3.0;
        values[39] = 0.1 + 0.2;
        let rows = vec![FeatureRow { id: "t1".into(), category: IncomeCategory::new(7).ok(), values }];
        let mut buf = Vec::new();
        write_features(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("id,category,direction0,"));
        assert!(text.lines().nth(1).unwrap().ends_with(",complexity9"));
        assert_eq!(read_features(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn wrong_schema_is_refused() {
        let mut buf = Vec::new();
        write_samples(&mut buf, &[sample("a", Some(1))]).unwrap();
        assert!(matches!(read_features(&buf[..]), Err(TableError::Schema { .. })));
        let bumped = String::from_utf8(buf).unwrap().replace("samples/1", "samples/2");
        assert!(matches!(read_samples(bumped.as_bytes()), Err(TableError::Schema { .. })));
        let bad_header = "#schema=samples/1\nid,lon\n";
        assert!(matches!(read_samples(bad_header.as_bytes()), Err(TableError::Header { .. })));
    }

    #[test]
    fn tiles_round_trip() {
        let rows = vec![TileRecord {
            id: "p1".into(),
            file: "p1.pgm".into(),
            category: IncomeCategory::new(0).ok(),
            split: Some(Split::Train),
        }];
        let mut buf = Vec::new();
        write_tiles(&mut buf, &rows).unwrap();
        assert_eq!(read_tiles(&buf[..]).unwrap(), rows);
    }
}
