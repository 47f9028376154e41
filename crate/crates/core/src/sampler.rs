//! Minimum-distance sampling inside residential zones, income labeling and
//! class-balanced train/val/test splitting.

use std::collections::HashMap;
use std::fmt;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geodata::{IncomeIndex, ResidentialZone};
use crate::geometry::{Point, Rect};

pub const NUM_CATEGORIES: usize = 8;

/// Lower income bound (dollars) of each category; the last is open-ended.
pub const CATEGORY_LOWER_BOUNDS: [f64; NUM_CATEGORIES] =
    [0.0, 15_000.0, 25_000.0, 35_000.0, 50_000.0, 75_000.0, 100_000.0, 150_000.0];

/// Default number of consecutive failed darts, per requested point, before
/// sampling gives up.
pub const DEFAULT_REJECTION_FACTOR: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("income must be a non-negative number, got {0}")]
    NegativeIncome(f64),
    #[error("category {0} out of range 0..8")]
    CategoryOutOfRange(u8),
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("minimum distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
}

/// One of the eight ordinal household-income classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IncomeCategory(u8);

impl IncomeCategory {
    pub fn new(value: u8) -> Result<Self, SampleError> {
        if (value as usize) < NUM_CATEGORIES {
            Ok(Self(value))
        } else {
            Err(SampleError::CategoryOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Human-readable income range, e.g. `$15,000 - $24,999`.
    pub fn label(self) -> &'static str {
        [
            "Less than $15,000",
            "$15,000 - $24,999",
            "$25,000 - $34,999",
            "$35,000 - $49,999",
            "$50,000 - $74,999",
            "$75,000 - $99,999",
            "$100,000 - $149,999",
            "Higher than $150,000",
        ][self.index()]
    }
}

impl fmt::Display for IncomeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Maps a median household income to its category. The $150k-$200k and
/// $200k+ census rows share category 7.
pub fn income_to_category(income: f64) -> Result<IncomeCategory, SampleError> {
    if !(income >= 0.0) {
        return Err(SampleError::NegativeIncome(income));
    }
    let idx = CATEGORY_LOWER_BOUNDS.partition_point(|&lo| lo <= income) - 1;
    Ok(IncomeCategory(idx as u8))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub id: String,
    /// Position in the sampling frame, metres.
    pub location: Point,
    pub lonlat: Point,
    pub zip: Option<String>,
    pub category: Option<IncomeCategory>,
}

impl SamplePoint {
    pub fn unlabeled(id: impl Into<String>, location: Point, lonlat: Point) -> Self {
        Self {
            id: id.into(),
            location,
            lonlat,
            zip: None,
            category: None,
        }
    }
}

/// Result of [`sample_points`].
#[derive(Debug, Clone, Default)]
pub struct SampleOutcome {
    pub points: Vec<Point>,
    /// Index into the zone slice for each accepted point.
    pub zone_of: Vec<usize>,
    /// Whether sampling stopped on the rejection budget rather than on `n`.
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerParams {
    pub n: usize,
    pub min_dist: f64,
    pub seed: u64,
    /// Consecutive failures tolerated, as a multiple of `n`.
    pub rejection_factor: usize,
}

impl SamplerParams {
    pub fn new(n: usize, min_dist: f64, seed: u64) -> Self {
        Self {
            n,
            min_dist,
            seed,
            rejection_factor: DEFAULT_REJECTION_FACTOR,
        }
    }
}

/// Background grid with cell side `min_dist / sqrt(2)`: at most one
/// accepted point per cell, and every conflict lies within two cells.
struct SeparationGrid {
    cell: f64,
    min_dist_sq: f64,
    cells: HashMap<(i64, i64), Point>,
}

impl SeparationGrid {
    fn new(min_dist: f64) -> Self {
        Self {
            cell: min_dist / std::f64::consts::SQRT_2,
            min_dist_sq: min_dist * min_dist,
            cells: HashMap::new(),
        }
    }

    fn key(&self, p: &Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn admits(&self, p: &Point) -> bool {
        let (cx, cy) = self.key(p);
        for dx in -2..=2 {
            for dy in -2..=2 {
                if let Some(q) = self.cells.get(&(cx + dx, cy + dy)) {
                    let (ex, ey) = (p.x - q.x, p.y - q.y);
                    if ex * ex + ey * ey < self.min_dist_sq {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: Point) {
        let k = self.key(&p);
        self.cells.insert(k, p);
    }
}

/// Dart throwing over metric zones: pick a zone weighted by area, a uniform
/// point in its bounding box, keep it if strictly inside the zone and at
/// least `min_dist` from every accepted point. Stops after `n` acceptances
/// or `rejection_factor * n` consecutive failures.
pub fn sample_points(
    zones: &[ResidentialZone],
    params: &SamplerParams,
) -> Result<SampleOutcome, SampleError> {
    if params.n == 0 {
        return Err(SampleError::ZeroCount);
    }
    if !(params.min_dist > 0.0) {
        return Err(SampleError::NonPositiveDistance(params.min_dist));
    }
    let areas: Vec<f64> = zones.iter().map(|z| z.polygon.area().max(0.0)).collect();
    let Ok(zone_pick) = WeightedIndex::new(&areas) else {
        warn!("no residential zone with positive area, nothing sampled");
        return Ok(SampleOutcome::default());
    };
    let bboxes: Vec<Rect> = zones
        .iter()
        .map(|z| z.polygon.bbox().expect("zone has vertices"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut grid = SeparationGrid::new(params.min_dist);
    let mut out = SampleOutcome::default();
    let budget = params.rejection_factor.max(1).saturating_mul(params.n);
    let mut failures = 0usize;
    while out.points.len() < params.n {
        if failures >= budget {
            out.saturated = true;
            warn!(
                "sampling stopped after {budget} consecutive rejections with {} of {} points",
                out.points.len(),
                params.n
            );
            break;
        }
        let zi = zone_pick.sample(&mut rng);
        let b = &bboxes[zi];
        let p = Point::new(
            rng.gen_range(b.min.x..=b.max.x),
            rng.gen_range(b.min.y..=b.max.y),
        );
        if zones[zi].polygon.contains_strict(&p) && grid.admits(&p) {
            grid.insert(p);
            out.points.push(p);
            out.zone_of.push(zi);
            failures = 0;
        } else {
            failures += 1;
        }
    }
    Ok(out)
}

/// Fills zip and category from the income index; points outside every zip,
/// or in a zip without income, stay unlabeled.
pub fn label_point(mut point: SamplePoint, index: &IncomeIndex) -> SamplePoint {
    point.zip = None;
    point.category = None;
    if let Some(hit) = index.lookup(&point.lonlat) {
        point.zip = Some(hit.zip.to_string());
        point.category = hit.income.and_then(|v| income_to_category(v).ok());
    }
    point
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitSet {
    pub train: Vec<SamplePoint>,
    pub val: Vec<SamplePoint>,
    pub test: Vec<SamplePoint>,
}

impl SplitSet {
    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every point with its split, train first.
    pub fn iter(&self) -> impl Iterator<Item = (Split, &SamplePoint)> {
        self.train
            .iter()
            .map(|p| (Split::Train, p))
            .chain(self.val.iter().map(|p| (Split::Val, p)))
            .chain(self.test.iter().map(|p| (Split::Test, p)))
    }
}

pub const DEFAULT_RATIOS: [f64; 3] = [0.7, 0.15, 0.15];

/// Default per-category cap: 50 000 tiles shared by eight categories.
pub const DEFAULT_CAP: usize = 50_000 / NUM_CATEGORIES;

/// Caps each category at `per_class_cap` points (random subset), then
/// splits each category by `ratios` (train, val, test). Unlabeled points
/// are dropped. Within a category the train and val counts are the ratios
/// rounded to the nearest integer and test takes the rest.
pub fn balance_and_split(
    points: &[SamplePoint],
    per_class_cap: usize,
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitSet, SampleError> {
    if ratios.iter().any(|r| !(*r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SampleError::BadRatios(ratios));
    }
    let mut by_class: Vec<Vec<&SamplePoint>> = vec![Vec::new(); NUM_CATEGORIES];
    for p in points {
        if let Some(c) = p.category {
            by_class[c.index()].push(p);
        }
    }
    let mut out = SplitSet::default();
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            warn!("category {class} has no labeled points");
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((class as u64 + 1) << 32));
        members.shuffle(&mut rng);
        members.truncate(per_class_cap);
        let n = members.len();
        let n_train = (((n as f64) * ratios[0]).round() as usize).min(n);
        let n_val = (((n as f64) * ratios[1]).round() as usize).min(n - n_train);
        for (i, p) in members.into_iter().enumerate() {
            let dst = if i < n_train {
                &mut out.train
            } else if i < n_train + n_val {
                &mut out.val
            } else {
                &mut out.test
            };
            dst.push(p.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    fn square_zone(x0: f64, y0: f64, s: f64) -> ResidentialZone {
        ResidentialZone {
            polygon: Rect::new(Point::new(x0, y0), Point::new(x0 + s, y0 + s)).to_polygon(),
            zone_code: "R".into(),
        }
    }

    fn brute_min_distance(points: &[Point]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                best = best.min(points[i].distance(&points[j]));
            }
        }
        best
    }

    #[test]
    fn categories_follow_income_table() {
        let cases = [
            (0.0, 0),
            (12_000.0, 0),
            (14_999.99, 0),
            (15_000.0, 1),
            (24_999.0, 1),
            (25_000.0, 2),
            (35_000.0, 3),
            (55_000.0, 4),
            (75_000.0, 5),
            (100_000.0, 6),
            (103_000.0, 6),
            (149_999.0, 6),
            (150_000.0, 7),
            (199_999.0, 7),
            (250_000.0, 7),
        ];
        for (income, cat) in cases {
            assert_eq!(income_to_category(income).unwrap().value(), cat, "{income}");
        }
        assert_eq!(income_to_category(-1.0), Err(SampleError::NegativeIncome(-1.0)));
        assert!(income_to_category(f64::NAN).is_err());
    }

    #[test]
    fn small_zone_holds_few_points() {
        let zones = [square_zone(0.0, 0.0, 100.0)];
        for seed in 0..20 {
            let out = sample_points(&zones, &SamplerParams::new(10, 80.0, seed)).unwrap();
            assert!(!out.points.is_empty() && out.points.len() <= 4);
            assert!(brute_min_distance(&out.points) >= 80.0);
            assert!(out.saturated);
        }
    }

    #[test]
    fn single_dart() {
        let zones = [square_zone(0.0, 0.0, 500.0)];
        let out = sample_points(&zones, &SamplerParams::new(1, 80.0, 7)).unwrap();
        assert_eq!(out.points.len(), 1);
        assert!(zones[0].polygon.contains_strict(&out.points[0]));
    }

    #[test]
    fn empty_zones_and_bad_params() {
        let out = sample_points(&[], &SamplerParams::new(5, 80.0, 1)).unwrap();
        assert!(out.points.is_empty());
        let zones = [square_zone(0.0, 0.0, 100.0)];
        assert_eq!(
            sample_points(&zones, &SamplerParams::new(0, 80.0, 1)).unwrap_err(),
            SampleError::ZeroCount
        );
        assert!(sample_points(&zones, &SamplerParams::new(3, 0.0, 1)).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let zones = [square_zone(0.0, 0.0, 2000.0), square_zone(3000.0, 0.0, 1000.0)];
        let a = sample_points(&zones, &SamplerParams::new(200, 80.0, 42)).unwrap();
        let b = sample_points(&zones, &SamplerParams::new(200, 80.0, 42)).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_points(&zones, &SamplerParams::new(200, 80.0, 43)).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn concave_zone_containment() {
        // U shape: the notch must never receive points.
        let u = Polygon::from_exterior(vec![
            Point::new(0.0, 0.0),
            Point::new(900.0, 0.0),
            Point::new(900.0, 900.0),
            Point::new(600.0, 900.0),
            Point::new(600.0, 300.0),
            Point::new(300.0, 300.0),
            Point::new(300.0, 900.0),
            Point::new(0.0, 900.0),
        ]);
        let zones = [ResidentialZone {
            polygon: u.clone(),
            zone_code: "R".into(),
        }];
        let out = sample_points(&zones, &SamplerParams::new(60, 80.0, 3)).unwrap();
        for p in &out.points {
            assert!(u.contains_strict(p));
            assert!(!(p.x > 300.0 && p.x < 600.0 && p.y > 300.0));
        }
    }

    fn labeled(n_per: usize) -> Vec<SamplePoint> {
        let mut v = Vec::new();
        for c in 0..NUM_CATEGORIES as u8 {
            for i in 0..n_per {
                let mut p = SamplePoint::unlabeled(format!("c{c}-{i}"), Point::default(), Point::default());
                p.category = Some(IncomeCategory::new(c).unwrap());
                v.push(p);
            }
        }
        v
    }

    #[test]
    fn cap_and_ratios() {
        let split = balance_and_split(&labeled(100), 50, DEFAULT_RATIOS, 9).unwrap();
        for c in 0..NUM_CATEGORIES as u8 {
            let count = |v: &[SamplePoint]| v.iter().filter(|p| p.category.unwrap().value() == c).count();
            assert_eq!(count(&split.train), 35);
            assert!((7..=8).contains(&count(&split.val)));
            assert!((7..=8).contains(&count(&split.test)));
            assert_eq!(count(&split.val) + count(&split.test), 15);
        }
    }

    #[test]
    fn cap_larger_than_population_keeps_all() {
        let pts = labeled(20);
        let split = balance_and_split(&pts, 1000, DEFAULT_RATIOS, 1).unwrap();
        assert_eq!(split.len(), pts.len());
    }

    #[test]
    fn unlabeled_dropped_and_bad_ratios_rejected() {
        let mut pts = labeled(3);
        pts.push(SamplePoint::unlabeled("u", Point::default(), Point::default()));
        let split = balance_and_split(&pts, 10, DEFAULT_RATIOS, 1).unwrap();
        assert!(split.iter().all(|(_, p)| p.category.is_some()));
        assert!(balance_and_split(&pts, 10, [0.5, 0.5, 0.5], 1).is_err());
    }

    #[test]
    fn split_is_deterministic() {
        let pts = labeled(40);
        let a = balance_and_split(&pts, 30, DEFAULT_RATIOS, 5).unwrap();
        let b = balance_and_split(&pts, 30, DEFAULT_RATIOS, 5).unwrap();
        assert_eq!(a, b);
    }
}
