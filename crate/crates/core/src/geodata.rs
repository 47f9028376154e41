//! Input parsing (GeoJSON footprints, land use, zip boundaries; CSV income)
//! and the local equirectangular projection.
//!
//! All parsers return geometry in WGS84 degrees (`x` = longitude,
//! `y` = latitude), validated and normalized. Metric geometry is obtained
//! per tile with [`LocalProjection`], which is affine, so containment,
//! simplicity and winding are the same in both frames.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::warn;
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{ring_is_simple, signed_area, Point, Polygon, Rect};

/// Equatorial radius; fixes the metres-per-degree factor at ~111 319.49.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("expected a GeoJSON FeatureCollection")]
    NotFeatureCollection,
    #[error("income CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("income CSV is missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("projection origin latitude {0} outside (-85, 85)")]
    LatitudeOutOfRange(f64),
}

/// Counters accumulated while parsing a feature collection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Geometries that were polygonal but failed validation.
    pub rejected: usize,
    /// Features skipped for a non-polygon geometry or a missing attribute.
    pub skipped: usize,
    pub warnings: Vec<String>,
}

impl ParseStats {
    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// One building outline.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintPolygon {
    pub id: String,
    pub polygon: Polygon,
}

impl FootprintPolygon {
    pub fn project(&self, proj: &LocalProjection) -> FootprintPolygon {
        FootprintPolygon {
            id: self.id.clone(),
            polygon: proj.project_polygon(&self.polygon),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidentialZone {
    pub polygon: Polygon,
    pub zone_code: String,
}

/// Equirectangular projection about an origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalProjection {
    pub origin: Point,
    pub k_x: f64,
    pub k_y: f64,
}

impl LocalProjection {
    pub fn new(origin_lonlat: Point) -> Result<Self, GeoError> {
        if !(origin_lonlat.y.abs() < 85.0) {
            return Err(GeoError::LatitudeOutOfRange(origin_lonlat.y));
        }
        let k_y = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        Ok(Self {
            origin: origin_lonlat,
            k_x: k_y * origin_lonlat.y.to_radians().cos(),
            k_y,
        })
    }

    pub fn project(&self, lonlat: &Point) -> Point {
        Point::new(
            (lonlat.x - self.origin.x) * self.k_x,
            (lonlat.y - self.origin.y) * self.k_y,
        )
    }

    pub fn unproject(&self, metric: &Point) -> Point {
        Point::new(
            self.origin.x + metric.x / self.k_x,
            self.origin.y + metric.y / self.k_y,
        )
    }

    pub fn project_polygon(&self, polygon: &Polygon) -> Polygon {
        polygon.map_points(|p| self.project(p))
    }

    pub fn unproject_polygon(&self, polygon: &Polygon) -> Polygon {
        polygon.map_points(|p| self.unproject(p))
    }

    /// Lon/lat box covering a metric box around the origin.
    pub fn unproject_rect(&self, rect: &Rect) -> Rect {
        Rect::new(self.unproject(&rect.min), self.unproject(&rect.max))
    }
}

/// Project a single point; see [`LocalProjection::project`].
pub fn project(lonlat: &Point, proj: &LocalProjection) -> Point {
    proj.project(lonlat)
}

fn json_error(bytes: &[u8], err: &serde_json::Error) -> GeoError {
    // serde_json reports 1-based line/column; convert to a byte offset.
    let mut offset = 0;
    if err.line() > 0 {
        let mut line = 1;
        for (i, b) in bytes.iter().enumerate() {
            if line == err.line() {
                offset = i;
                break;
            }
            if *b == b'\n' {
                line += 1;
            }
        }
        offset += err.column().saturating_sub(1);
    }
    GeoError::Json {
        offset: offset.min(bytes.len()),
        message: err.to_string(),
    }
}

fn parse_collection(bytes: &[u8]) -> Result<Vec<Value>, GeoError> {
    let root: Value = serde_json::from_slice(bytes).map_err(|e| json_error(bytes, &e))?;
    match (root.get("type").and_then(Value::as_str), root.get("features")) {
        (Some("FeatureCollection"), Some(Value::Array(features))) => Ok(features.clone()),
        _ => Err(GeoError::NotFeatureCollection),
    }
}

fn parse_position(v: &Value) -> Option<Point> {
    let arr = v.as_array()?;
    if arr.len() < 2 {
        return None;
    }
    let x = arr[0].as_f64()?;
    let y = arr[1].as_f64()?;
    (x.is_finite() && y.is_finite()).then_some(Point::new(x, y))
}

fn parse_ring(v: &Value) -> Option<Vec<Point>> {
    v.as_array()?.iter().map(parse_position).collect()
}

/// Raw polygon rings (exterior first) for every part of a Polygon or
/// MultiPolygon geometry; `None` for any other geometry type.
fn polygon_parts(geometry: &Value) -> Option<Vec<Option<Vec<Vec<Point>>>>> {
    let coords = geometry.get("coordinates")?;
    let rings_of = |poly: &Value| -> Option<Vec<Vec<Point>>> {
        poly.as_array()?.iter().map(parse_ring).collect()
    };
    match geometry.get("type")?.as_str()? {
        "Polygon" => Some(vec![rings_of(coords)]),
        "MultiPolygon" => Some(coords.as_array()?.iter().map(rings_of).collect()),
        _ => None,
    }
}

/// Ring checks: closed (closing it when the input omitted the repeat), at
/// least three distinct vertices, simple, and non-degenerate.
fn validate_ring(mut ring: Vec<Point>) -> Result<Vec<Point>, &'static str> {
    if ring.first() != ring.last() {
        if let Some(first) = ring.first().copied() {
            ring.push(first);
        }
    }
    if ring.len() < 4 {
        return Err("ring has fewer than 4 positions");
    }
    ring.pop();
    if !ring_is_simple(&ring) {
        return Err("ring is self-intersecting");
    }
    if signed_area(&ring) == 0.0 {
        return Err("ring has zero area");
    }
    Ok(ring)
}

/// Validates and normalizes the rings of one polygon part.
pub fn validate_polygon(rings: Vec<Vec<Point>>) -> Result<Polygon, &'static str> {
    let mut it = rings.into_iter();
    let exterior = validate_ring(it.next().ok_or("polygon has no rings")?)?;
    let holes = it.map(validate_ring).collect::<Result<Vec<_>, _>>()?;
    Ok(Polygon::new(exterior, holes).normalize())
}

fn feature_id(feature: &Value, index: usize) -> String {
    let from = |v: Option<&Value>| match v {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Number(n)) => Some(n.to_string()),
        _ => None,
    };
    from(feature.get("id"))
        .or_else(|| from(feature.get("properties").and_then(|p| p.get("id"))))
        .unwrap_or_else(|| format!("f{index}"))
}

fn property_string(feature: &Value, key: &str) -> Option<String> {
    match feature.get("properties")?.get(key)? {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Each valid polygon part of every feature, in input order, tagged with
/// the index of the feature it came from.
fn collect_polygons(
    features: &[Value],
    mut keep: impl FnMut(usize, &Value, &mut ParseStats) -> bool,
    stats: &mut ParseStats,
) -> Vec<(usize, usize, Polygon)> {
    let mut out = Vec::new();
    for (fi, feature) in features.iter().enumerate() {
        let Some(parts) = feature.get("geometry").and_then(polygon_parts) else {
            stats.skipped += 1;
            stats.warn(format!("feature {fi}: not a Polygon/MultiPolygon, skipped"));
            continue;
        };
        if !keep(fi, feature, stats) {
            continue;
        }
        for (pi, part) in parts.into_iter().enumerate() {
            match part.ok_or("unreadable coordinates").and_then(validate_polygon) {
                Ok(poly) => out.push((fi, pi, poly)),
                Err(why) => {
                    stats.rejected += 1;
                    stats.warn(format!("feature {fi} part {pi}: {why}, rejected"));
                }
            }
        }
    }
    out
}

/// Parses a footprint FeatureCollection. MultiPolygon parts become separate
/// buildings with `-{part}` appended to the feature id.
pub fn parse_footprints(bytes: &[u8]) -> Result<(Vec<FootprintPolygon>, ParseStats), GeoError> {
    let features = parse_collection(bytes)?;
    let mut stats = ParseStats::default();
    let multi: Vec<bool> = features
        .iter()
        .map(|f| {
            f.get("geometry")
                .and_then(|g| g.get("type"))
                .and_then(Value::as_str)
                == Some("MultiPolygon")
        })
        .collect();
    let polygons = collect_polygons(&features, |_, _, _| true, &mut stats)
        .into_iter()
        .map(|(fi, pi, polygon)| {
            let base = feature_id(&features[fi], fi);
            let id = if multi[fi] { format!("{base}-{pi}") } else { base };
            FootprintPolygon { id, polygon }
        })
        .collect();
    Ok((polygons, stats))
}

/// Parses a land-use FeatureCollection, keeping only features whose
/// `code_field` property is in `residential_codes`.
pub fn parse_landuse(
    bytes: &[u8],
    residential_codes: &BTreeSet<String>,
    code_field: &str,
) -> Result<(Vec<ResidentialZone>, ParseStats), GeoError> {
    let features = parse_collection(bytes)?;
    let mut stats = ParseStats::default();
    let mut codes: HashMap<usize, String> = HashMap::new();
    let polys = collect_polygons(
        &features,
        |fi, feature, stats| match property_string(feature, code_field) {
            None => {
                stats.skipped += 1;
                stats.warn(format!("feature {fi}: missing `{code_field}` attribute, skipped"));
                false
            }
            Some(code) if residential_codes.contains(&code) => {
                codes.insert(fi, code);
                true
            }
            Some(_) => false,
        },
        &mut stats,
    );
    let zones = polys
        .into_iter()
        .map(|(fi, _, polygon)| ResidentialZone {
            polygon,
            zone_code: codes[&fi].clone(),
        })
        .collect();
    Ok((zones, stats))
}

/// A zip polygon joined with its income, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipEntry {
    pub zip: String,
    pub polygon: Polygon,
    pub bbox: Rect,
    /// Area in square metres, used for the overlap tie-break.
    pub area_m2: f64,
    pub income: Option<f64>,
}

/// Point lookup result.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipHit<'a> {
    pub zip: &'a str,
    pub income: Option<f64>,
}

/// Zip boundaries joined with median household income.
#[derive(Debug, Clone, Default)]
pub struct IncomeIndex {
    /// Sorted by ascending area, then zip, so the first hit wins ties.
    entries: Vec<ZipEntry>,
}

impl IncomeIndex {
    pub fn from_entries(mut entries: Vec<ZipEntry>) -> Self {
        entries.sort_by(|a, b| a.area_m2.total_cmp(&b.area_m2).then_with(|| a.zip.cmp(&b.zip)));
        Self { entries }
    }

    pub fn entries(&self) -> &[ZipEntry] {
        &self.entries
    }

    pub fn income(&self, zip: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.zip == zip).and_then(|e| e.income)
    }

    /// Zip containing `lonlat`. Overlaps resolve to the smallest-area polygon.
    pub fn lookup(&self, lonlat: &Point) -> Option<ZipHit<'_>> {
        self.entries
            .iter()
            .find(|e| {
                lonlat.x >= e.bbox.min.x
                    && lonlat.x <= e.bbox.max.x
                    && lonlat.y >= e.bbox.min.y
                    && lonlat.y <= e.bbox.max.y
                    && e.polygon.contains(lonlat)
            })
            .map(|e| ZipHit {
                zip: &e.zip,
                income: e.income,
            })
    }
}

fn parse_income_value(raw: &str) -> Option<f64> {
    let cleaned: String = raw.trim().chars().filter(|c| *c != '$' && *c != ',').collect();
    let v: f64 = cleaned.parse().ok()?;
    (v.is_finite() && v >= 0.0).then_some(v)
}

/// Metric area of a lon/lat polygon, projected about its own first vertex.
pub fn geodesic_area_m2(polygon: &Polygon) -> f64 {
    match polygon.exterior.first().and_then(|o| LocalProjection::new(*o).ok()) {
        Some(proj) => proj.project_polygon(polygon).area(),
        None => 0.0,
    }
}

/// Joins an income CSV (`zip`, `median_income`) with zip boundary polygons
/// whose zip code is stored in the `zip_field` property.
pub fn parse_income(
    csv_bytes: &[u8],
    zip_geojson: &[u8],
    zip_field: &str,
) -> Result<(IncomeIndex, ParseStats), GeoError> {
    let mut stats = ParseStats::default();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_bytes);
    let headers = reader.headers()?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or(GeoError::MissingColumn(name))
    };
    let (zip_col, income_col) = (col("zip")?, col("median_income")?);

    let mut incomes: BTreeMap<String, f64> = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let zip = record.get(zip_col).unwrap_or("").to_string();
        let raw = record.get(income_col).unwrap_or("");
        match parse_income_value(raw) {
            Some(v) if !zip.is_empty() => {
                if incomes.insert(zip.clone(), v).is_some() {
                    stats.warn(format!("duplicate zip {zip} at row {}, last value wins", row + 2));
                }
            }
            _ => {
                stats.rejected += 1;
                stats.warn(format!("row {}: invalid zip or income `{raw}`, rejected", row + 2));
            }
        }
    }

    let features = parse_collection(zip_geojson)?;
    let mut zips: HashMap<usize, String> = HashMap::new();
    let polys = collect_polygons(
        &features,
        |fi, feature, stats| match property_string(feature, zip_field) {
            Some(zip) => {
                zips.insert(fi, zip);
                true
            }
            None => {
                stats.skipped += 1;
                stats.warn(format!("zip feature {fi}: missing `{zip_field}` attribute, skipped"));
                false
            }
        },
        &mut stats,
    );

    let mut with_polygon = BTreeSet::new();
    let mut entries = Vec::with_capacity(polys.len());
    for (fi, _, polygon) in polys {
        let zip = zips[&fi].clone();
        let income = incomes.get(&zip).copied();
        if income.is_none() {
            stats.warn(format!("zip {zip} has a boundary but no income, unlabeled"));
        }
        with_polygon.insert(zip.clone());
        let bbox = polygon.bbox().expect("validated polygon has vertices");
        entries.push(ZipEntry {
            area_m2: geodesic_area_m2(&polygon),
            zip,
            polygon,
            bbox,
            income,
        });
    }
    for zip in incomes.keys().filter(|z| !with_polygon.contains(*z)) {
        stats.warn(format!("zip {zip} has income but no boundary, dropped"));
    }
    Ok((IncomeIndex::from_entries(entries), stats))
}

/// Uniform-grid bucket index over bounding boxes. Queries return ids in
/// ascending order.
#[derive(Debug, Clone)]
pub struct BBoxIndex {
    cell: f64,
    boxes: Vec<Rect>,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl BBoxIndex {
    pub fn new(cell: f64, boxes: Vec<Rect>) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (id, b) in boxes.iter().enumerate() {
            let (x0, y0) = Self::key(cell, &b.min);
            let (x1, y1) = Self::key(cell, &b.max);
            for cx in x0..=x1 {
                for cy in y0..=y1 {
                    cells.entry((cx, cy)).or_default().push(id as u32);
                }
            }
        }
        Self { cell, boxes, cells }
    }

    fn key(cell: f64, p: &Point) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn query(&self, rect: &Rect) -> Vec<usize> {
        let (x0, y0) = Self::key(self.cell, &rect.min);
        let (x1, y1) = Self::key(self.cell, &rect.max);
        let mut out = Vec::new();
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                if let Some(ids) = self.cells.get(&(cx, cy)) {
                    out.extend(ids.iter().map(|&i| i as usize));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&i| self.boxes[i].intersects(rect));
        out
    }
}

/// Footprints with a bounding-box index for tile range queries.
#[derive(Debug, Clone)]
pub struct FootprintIndex {
    footprints: Vec<FootprintPolygon>,
    index: BBoxIndex,
}

impl FootprintIndex {
    /// Grid cell in degrees, roughly one tile wide at mid latitudes.
    pub const CELL_DEG: f64 = 0.002;

    pub fn new(footprints: Vec<FootprintPolygon>) -> Self {
        Self::with_cell(footprints, Self::CELL_DEG)
    }

    pub fn with_cell(footprints: Vec<FootprintPolygon>, cell: f64) -> Self {
        let boxes = footprints
            .iter()
            .map(|f| f.polygon.bbox().expect("validated polygon has vertices"))
            .collect();
        Self {
            index: BBoxIndex::new(cell, boxes),
            footprints,
        }
    }

    pub fn footprints(&self) -> &[FootprintPolygon] {
        &self.footprints
    }

    pub fn query(&self, rect: &Rect) -> impl Iterator<Item = &FootprintPolygon> {
        self.index.query(rect).into_iter().map(|i| &self.footprints[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fc(features: &str) -> String {
        format!(r#"{{"type":"FeatureCollection","features":[{features}]}}"#)
    }

    const SQUARE: &str = r#"{"type":"Feature","properties":{"code":"R1"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[0,0.001],[0.001,0.001],[0.001,0],[0,0]]]}}"#;

    #[test]
    fn single_square_parses_and_is_ccw() {
        let (polys, stats) = parse_footprints(fc(SQUARE).as_bytes()).unwrap();
        assert_eq!(polys.len(), 1);
        assert_eq!(stats.rejected, 0);
        assert!(signed_area(&polys[0].polygon.exterior) > 0.0);
        assert_eq!(polys[0].polygon.closed_exterior().len(), 5);
    }

    #[test]
    fn multipolygon_splits_into_parts() {
        let f = r#"{"type":"Feature","id":"b7","geometry":{"type":"MultiPolygon","coordinates":[
            [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
            [[[2,0],[3,0],[3,1],[2,1],[2,0]]]]}}"#;
        let (polys, _) = parse_footprints(fc(f).as_bytes()).unwrap();
        let ids: Vec<_> = polys.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["b7-0", "b7-1"]);
    }

    #[test]
    fn bow_tie_rejected() {
        let f = r#"{"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]}}"#;
        let (polys, stats) = parse_footprints(fc(f).as_bytes()).unwrap();
        assert!(polys.is_empty());
        assert_eq!(stats.rejected, 1);
    }

    #[test]
    fn non_polygon_skipped_with_count() {
        let f = r#"{"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]}}"#;
        let (polys, stats) = parse_footprints(fc(f).as_bytes()).unwrap();
        assert!(polys.is_empty());
        assert_eq!(stats.skipped, 1);
    }

    #[test]
    fn malformed_json_reports_offset() {
        let bytes = b"{\"type\": \"FeatureCollection\",\n \"features\": [ oops ]}";
        match parse_footprints(bytes) {
            Err(GeoError::Json { offset, .. }) => assert_eq!(bytes[offset], b'o'),
            other => panic!("expected JSON error, got {other:?}"),
        }
    }

    #[test]
    fn landuse_filters_codes() {
        let feats = ["R1", "C1", "R2"]
            .iter()
            .map(|c| SQUARE.replace("R1", c))
            .collect::<Vec<_>>()
            .join(",");
        let codes: BTreeSet<String> = ["R1", "R2"].iter().map(|s| s.to_string()).collect();
        let (zones, _) = parse_landuse(fc(&feats).as_bytes(), &codes, "code").unwrap();
        assert_eq!(zones.len(), 2);
        assert_eq!(zones[1].zone_code, "R2");
        let (none, _) = parse_landuse(fc(&feats).as_bytes(), &BTreeSet::new(), "code").unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn landuse_missing_code_and_invalid_polygon() {
        let missing = SQUARE.replace(r#""code":"R1""#, r#""other":"x""#);
        let bow = r#"{"type":"Feature","properties":{"code":"R1"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]}}"#;
        let codes: BTreeSet<String> = ["R1".to_string()].into();
        let (zones, stats) =
            parse_landuse(fc(&format!("{missing},{bow}")).as_bytes(), &codes, "code").unwrap();
        assert!(zones.is_empty());
        assert_eq!(stats.skipped, 1);
        assert_eq!(stats.rejected, 1);
    }

    fn zip_fc(zips: &[(&str, f64, f64, f64)]) -> String {
        let feats: Vec<String> = zips
            .iter()
            .map(|(z, x, y, s)| {
                format!(
                    r#"{{"type":"Feature","properties":{{"zip":"{z}"}},"geometry":{{"type":"Polygon","coordinates":[[[{x},{y}],[{},{y}],[{},{}],[{x},{}],[{x},{y}]]]}}}}"#,
                    x + s,
                    x + s,
                    y + s,
                    y + s
                )
            })
            .collect();
        fc(&feats.join(","))
    }

    #[test]
    fn income_join_lookup_and_miss() {
        let csv = b"zip,median_income\n02139,103000\n";
        let (idx, _) = parse_income(csv, zip_fc(&[("02139", -71.1, 42.36, 0.01)]).as_bytes(), "zip").unwrap();
        let hit = idx.lookup(&Point::new(-71.095, 42.365)).unwrap();
        assert_eq!(hit.zip, "02139");
        assert_eq!(hit.income, Some(103000.0));
        assert!(idx.lookup(&Point::new(-70.0, 42.0)).is_none());
    }

    #[test]
    fn overlapping_zips_smallest_wins() {
        let csv = b"zip,median_income\nBIG,50000\nSMALL,200000\n";
        let geo = zip_fc(&[("BIG", 0.0, 0.0, 0.1), ("SMALL", 0.04, 0.04, 0.02)]);
        let (idx, _) = parse_income(csv, geo.as_bytes(), "zip").unwrap();
        assert_eq!(idx.lookup(&Point::new(0.05, 0.05)).unwrap().zip, "SMALL");
        assert_eq!(idx.lookup(&Point::new(0.01, 0.01)).unwrap().zip, "BIG");
    }

    #[test]
    fn income_rows_rejected_duplicated_and_unmatched() {
        let csv = b"zip,median_income\nA,abc\nA,10\nA,20\nB,5\n";
        let (idx, stats) = parse_income(csv, zip_fc(&[("A", 0.0, 0.0, 1.0), ("C", 2.0, 0.0, 1.0)]).as_bytes(), "zip").unwrap();
        assert_eq!(stats.rejected, 1);
        assert_eq!(idx.income("A"), Some(20.0));
        assert_eq!(idx.entries().len(), 2);
        assert_eq!(idx.lookup(&Point::new(2.5, 0.5)).unwrap().income, None);
        assert!(stats.warnings.iter().any(|w| w.contains("zip B")));
    }

    #[test]
    fn projection_origin_and_axes() {
        let proj = LocalProjection::new(Point::new(-71.0, 42.0)).unwrap();
        assert_eq!(proj.project(&Point::new(-71.0, 42.0)), Point::new(0.0, 0.0));
        let north = proj.project(&Point::new(-71.0, 42.001));
        assert!((north.y - 111.32).abs() < 0.01 && north.x == 0.0);
        let east = proj.project(&Point::new(-70.999, 42.0));
        assert!((east.x - 82.73).abs() < 0.01);
        assert!(LocalProjection::new(Point::new(0.0, 85.0)).is_err());
    }

    #[test]
    fn bbox_index_query_is_sorted_and_exact() {
        let boxes = vec![
            Rect::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            Rect::new(Point::new(5.0, 5.0), Point::new(6.0, 6.0)),
            Rect::new(Point::new(0.5, 0.5), Point::new(5.5, 5.5)),
        ];
        let idx = BBoxIndex::new(2.0, boxes);
        let q = Rect::new(Point::new(0.9, 0.9), Point::new(1.1, 1.1));
        assert_eq!(idx.query(&q), vec![0, 2]);
    }
}
