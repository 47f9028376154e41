//! Synthetic neighbourhoods with known labels.
//!
//! Each class recipe fixes a footprint size range, a shape family, a
//! spacing and a layout regime. Two built-in recipes contrast dense,
//! street-aligned small rectangles with sparse, freely oriented large L
//! and cross shapes. Generated data feeds both the tile-level acceptance
//! runs and a full set of GeoJSON/CSV inputs for end-to-end pipeline runs.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::geodata::{GeoError, LocalProjection};
use crate::geometry::{Point, Polygon, Rect};
use crate::raster::{TileGeometry, DEFAULT_EXTENT_M};
use crate::sampler::{IncomeCategory, SamplePoint};
use crate::seeds::derive_seed;

/// Arm width of L and cross templates as a fraction of their outer side.
pub const ARM_FRACTION: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("recipe for class {label}: spacing {spacing} m cannot fit footprints needing {needed:.2} m")]
    InfeasibleSpacing { label: u8, spacing: f64, needed: f64 },
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("projection: {0}")]
    Projection(String),
}

impl From<GeoError> for SynthError {
    fn from(e: GeoError) -> Self {
        SynthError::Projection(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeFamily {
    Rectangle,
    L,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Grid rows following one street direction per neighbourhood.
    StreetAligned,
    /// Independent positions and orientations.
    Scattered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRecipe {
    pub label: IncomeCategory,
    /// Footprint area range, square metres.
    pub area: (f64, f64),
    /// Long-side over short-side range for rectangles.
    pub aspect: (f64, f64),
    pub shapes: Vec<ShapeFamily>,
    /// Grid pitch (street-aligned) or minimum centre distance (scattered), metres.
    pub spacing: f64,
    /// Uniform positional jitter of grid buildings, metres.
    pub jitter: f64,
    /// Fraction of grid cells that receive a building.
    pub occupancy: f64,
    pub layout: Layout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub recipes: Vec<ClassRecipe>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            recipes: vec![
                ClassRecipe {
                    label: IncomeCategory::new(1).unwrap(),
                    area: (40.0, 60.0),
                    aspect: (1.0, 1.5),
                    shapes: vec![ShapeFamily::Rectangle],
                    spacing: 14.0,
                    jitter: 0.5,
                    occupancy: 0.9,
                    layout: Layout::StreetAligned,
                },
                ClassRecipe {
                    label: IncomeCategory::new(7).unwrap(),
                    area: (200.0, 400.0),
                    aspect: (1.0, 1.0),
                    shapes: vec![ShapeFamily::L, ShapeFamily::Cross],
                    spacing: 50.0,
                    jitter: 0.0,
                    occupancy: 1.0,
                    layout: Layout::Scattered,
                },
            ],
        }
    }
}

/// Outer side of an L or cross template with the given area.
pub fn arm_shape_side(area: f64) -> f64 {
    (area / (2.0 * ARM_FRACTION - ARM_FRACTION * ARM_FRACTION)).sqrt()
}

/// Footprint centred on the origin, unrotated.
pub fn shape_template(shape: ShapeFamily, area: f64, aspect: f64) -> Polygon {
    let pts = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>();
    match shape {
        ShapeFamily::Rectangle => {
            let w = (area * aspect).sqrt();
            let h = area / w;
            Rect::centered(Point::default(), w, h).to_polygon()
        }
        ShapeFamily::L => {
            let a = arm_shape_side(area);
            let w = a * ARM_FRACTION;
            let h = a / 2.0;
            Polygon::from_exterior(pts(&[
                (-h, -h),
                (h, -h),
                (h, -h + w),
                (-h + w, -h + w),
                (-h + w, h),
                (-h, h),
            ]))
        }
        ShapeFamily::Cross => {
            let a = arm_shape_side(area);
            let (h, w) = (a / 2.0, a * ARM_FRACTION / 2.0);
            Polygon::from_exterior(pts(&[
                (-w, -h),
                (w, -h),
                (w, -w),
                (h, -w),
                (h, w),
                (w, w),
                (w, h),
                (-w, h),
                (-w, w),
                (-h, w),
                (-h, -w),
                (-w, -w),
            ]))
        }
    }
}

fn circumradius(shape: ShapeFamily, area: f64, aspect: f64) -> f64 {
    match shape {
        ShapeFamily::Rectangle => 0.5 * (area * (aspect + 1.0 / aspect)).sqrt(),
        ShapeFamily::L | ShapeFamily::Cross => arm_shape_side(area) * std::f64::consts::SQRT_2 / 2.0,
    }
}

impl ClassRecipe {
    /// Checks the recipe and that no two footprints can overlap.
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidRecipe(format!("class {}: {m}", self.label)));
        if !(self.area.0 > 0.0 && self.area.1 >= self.area.0) {
            return bad("area range must be positive and ordered");
        }
        if !(self.aspect.0 >= 1.0 && self.aspect.1 >= self.aspect.0) {
            return bad("aspect range must be >= 1 and ordered");
        }
        if self.shapes.is_empty() {
            return bad("no shape families");
        }
        if !(self.spacing > 0.0) || !(self.jitter >= 0.0) || !(self.occupancy > 0.0 && self.occupancy <= 1.0) {
            return bad("spacing, jitter and occupancy out of range");
        }
        let radius = self
            .shapes
            .iter()
            .map(|&s| circumradius(s, self.area.1, self.aspect.1))
            .fold(0.0, f64::max);
        let needed = 2.0 * radius + if self.layout == Layout::StreetAligned { 2.0 * self.jitter } else { 0.0 };
        if needed > self.spacing {
            return Err(SynthError::InfeasibleSpacing { label: self.label.value(), spacing: self.spacing, needed });
        }
        Ok(())
    }

    fn footprint<R: Rng>(&self, center: Point, angle: f64, rng: &mut R) -> Polygon {
        let shape = *self.shapes.choose(rng).unwrap();
        let area = rng.gen_range(self.area.0..=self.area.1);
        let aspect = rng.gen_range(self.aspect.0..=self.aspect.1);
        shape_template(shape, area, aspect)
            .rotate(angle)
            .translate(center.x, center.y)
    }

    /// Footprints filling `region` (metric).
    pub fn generate<R: Rng>(&self, region: &Rect, rng: &mut R) -> Vec<Polygon> {
        let mut out = Vec::new();
        match self.layout {
            Layout::StreetAligned => {
                let street = rng.gen_range(0.0..FRAC_PI_2);
                let offset = (rng.gen_range(0.0..self.spacing), rng.gen_range(0.0..self.spacing));
                let c = Point::new((region.min.x + region.max.x) / 2.0, (region.min.y + region.max.y) / 2.0);
                let reach = (region.width().hypot(region.height()) / 2.0 / self.spacing).ceil() as i64 + 1;
                for i in -reach..=reach {
                    for j in -reach..=reach {
                        let local = Point::new(i as f64 * self.spacing + offset.0, j as f64 * self.spacing + offset.1);
                        let mut p = local.rotate(street).translate(c.x, c.y);
                        let occupied = rng.gen_bool(self.occupancy);
                        p.x += rng.gen_range(-self.jitter..=self.jitter);
                        p.y += rng.gen_range(-self.jitter..=self.jitter);
                        let turn = if rng.gen_bool(0.5) { 0.0 } else { FRAC_PI_2 };
                        let building = self.footprint(p, street + turn, rng);
                        if occupied && region.contains_half_open(&p) {
                            out.push(building);
                        }
                    }
                }
            }
            Layout::Scattered => {
                let target = (region.area() / (self.spacing * self.spacing)).ceil() as usize * 4;
                let mut centers: Vec<Point> = Vec::new();
                for _ in 0..target * 8 {
                    if centers.len() >= target {
                        break;
                    }
                    let p = Point::new(
                        rng.gen_range(region.min.x..region.max.x),
                        rng.gen_range(region.min.y..region.max.y),
                    );
                    if centers.iter().all(|q| q.distance(&p) >= self.spacing) {
                        centers.push(p);
                    }
                }
                for p in centers {
                    let angle = rng.gen_range(0.0..TAU);
                    out.push(self.footprint(p, angle, rng));
                }
            }
        }
        out
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.recipes.len() < 2 {
            return Err(SynthError::InvalidRecipe("need recipes for at least two classes".into()));
        }
        self.recipes.iter().try_for_each(ClassRecipe::validate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTile {
    pub geometry: TileGeometry,
    pub label: IncomeCategory,
}

/// Margin of surrounding neighbourhood generated around each tile, metres.
const TILE_MARGIN_M: f64 = 60.0;

/// `n_tiles` independent tiles, recipes assigned round-robin. Tile `k`
/// depends only on `(seed, k)`.
pub fn generate_synthetic(spec: &SyntheticSpec, n_tiles: usize, seed: u64) -> Result<Vec<SyntheticTile>, SynthError> {
    spec.validate()?;
    let extent = Rect::centered(Point::default(), DEFAULT_EXTENT_M, DEFAULT_EXTENT_M);
    let region = Rect::centered(Point::default(), DEFAULT_EXTENT_M + 2.0 * TILE_MARGIN_M, DEFAULT_EXTENT_M + 2.0 * TILE_MARGIN_M);
    Ok((0..n_tiles)
        .into_par_iter()
        .map(|k| {
            let recipe = &spec.recipes[k % spec.recipes.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[k as u64]));
            let buildings = recipe.generate(&region, &mut rng);
            let mut center = SamplePoint::unlabeled(format!("syn{k:06}"), Point::default(), Point::default());
            center.category = Some(recipe.label);
            SyntheticTile {
                geometry: TileGeometry::from_polygons(center, extent, &buildings),
                label: recipe.label,
            }
        })
        .collect())
}

/// Representative median income for each category, used for synthetic zips.
pub const CATEGORY_INCOME: [f64; 8] = [10_000.0, 20_000.0, 30_000.0, 42_000.0, 62_000.0, 87_000.0, 125_000.0, 180_000.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    /// South-west corner of the region.
    pub origin: Point,
    /// Side of each square zip area, metres.
    pub zip_side_m: f64,
    /// Inset of the residential zone inside each zip, metres.
    pub residential_inset_m: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            origin: Point::new(-71.1, 42.3),
            zip_side_m: 1200.0,
            residential_inset_m: 100.0,
        }
    }
}

/// Input files for an end-to-end run, as text.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRegion {
    pub footprints_geojson: String,
    pub landuse_geojson: String,
    pub zips_geojson: String,
    pub income_csv: String,
}

fn ring_coords(poly: &Polygon) -> Value {
    let mut ring: Vec<Value> = poly.exterior.iter().map(|p| json!([p.x, p.y])).collect();
    ring.push(json!([poly.exterior[0].x, poly.exterior[0].y]));
    json!([ring])
}

fn feature(geometry: &Polygon, properties: Value) -> Value {
    json!({"type": "Feature", "properties": properties, "geometry": {"type": "Polygon", "coordinates": ring_coords(geometry)}})
}

fn collection(features: Vec<Value>) -> String {
    serde_json::to_string(&json!({"type": "FeatureCollection", "features": features})).unwrap()
}

/// One square zip per recipe, laid west to east. Each zip holds a
/// residential zone (code `R1`) and a thin commercial strip (code `C1`)
/// along its southern edge; footprints cover the whole zip.
pub fn synthesize_region(spec: &SyntheticSpec, params: &RegionParams, seed: u64) -> Result<SyntheticRegion, SynthError> {
    spec.validate()?;
    let proj = LocalProjection::new(params.origin)?;
    let side = params.zip_side_m;
    let inset = params.residential_inset_m;
    let mut footprints = Vec::new();
    let mut landuse = Vec::new();
    let mut zips = Vec::new();
    let mut income = String::from("zip,median_income\n");
    for (z, recipe) in spec.recipes.iter().enumerate() {
        let zip_rect = Rect::new(Point::new(z as f64 * side, 0.0), Point::new((z + 1) as f64 * side, side));
        let zip = format!("{:05}", 1000 + z);
        zips.push(feature(&proj.unproject_polygon(&zip_rect.to_polygon()), json!({"zip": zip})));
        income.push_str(&format!("{zip},{}\n", CATEGORY_INCOME[recipe.label.index()]));

        let residential = Rect::new(
            Point::new(zip_rect.min.x + inset, zip_rect.min.y + inset),
            Point::new(zip_rect.max.x - inset, zip_rect.max.y - inset),
        );
        let commercial = Rect::new(
            Point::new(zip_rect.min.x + inset, zip_rect.min.y),
            Point::new(zip_rect.max.x - inset, zip_rect.min.y + inset / 2.0),
        );
        landuse.push(feature(&proj.unproject_polygon(&residential.to_polygon()), json!({"code": "R1"})));
        landuse.push(feature(&proj.unproject_polygon(&commercial.to_polygon()), json!({"code": "C1"})));

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[z as u64]));
        // Street grids re-draw their direction every 300 m block.
        let block = 300.0;
        let per_side = (side / block).ceil() as usize;
        for bx in 0..per_side {
            for by in 0..per_side {
                let min = Point::new(zip_rect.min.x + bx as f64 * block, by as f64 * block);
                let cell = Rect::new(min, Point::new((min.x + block).min(zip_rect.max.x), (min.y + block).min(side)));
                for (i, poly) in recipe.generate(&cell, &mut rng).into_iter().enumerate() {
                    let id = format!("z{z}-b{bx}-{by}-{i}");
                    footprints.push(feature(&proj.unproject_polygon(&poly), json!({"id": id})));
                }
            }
        }
    }
    Ok(SyntheticRegion {
        footprints_geojson: collection(footprints),
        landuse_geojson: collection(landuse),
        zips_geojson: collection(zips),
        income_csv: income,
    })
}
