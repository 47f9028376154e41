//! Tile clipping and anti-aliased figure-ground rasterization.

use std::io::{self, Write};

use crate::geodata::{FootprintIndex, GeoError, LocalProjection};
use crate::geometry::{Point, Polygon, Rect};
use crate::sampler::SamplePoint;

pub const DEFAULT_EXTENT_M: f64 = 200.0;
pub const DEFAULT_RESOLUTION: usize = 224;
/// Subsamples per pixel side.
pub const SUBSAMPLES: usize = 4;

/// Footprint geometry of one tile in the tile's local metric frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGeometry {
    pub center: SamplePoint,
    pub extent: Rect,
    /// Footprints intersected with the extent, for rendering.
    pub clipped: Vec<Polygon>,
    /// Whole footprints whose centroid lies in the extent, for per-building
    /// features.
    pub members: Vec<Polygon>,
}

impl TileGeometry {
    /// Assembles a tile from metric footprints. Membership uses the
    /// half-open extent so a building on a shared tile border belongs to
    /// exactly one of two abutting tiles.
    pub fn from_polygons<'a>(
        center: SamplePoint,
        extent: Rect,
        polygons: impl IntoIterator<Item = &'a Polygon>,
    ) -> Self {
        let mut clipped = Vec::new();
        let mut members = Vec::new();
        for poly in polygons {
            let Some(bbox) = poly.bbox() else { continue };
            if !bbox.intersects(&extent) {
                continue;
            }
            if let Some(c) = poly.clip_to_rect(&extent) {
                clipped.push(c);
            }
            if extent.contains_half_open(&poly.centroid()) {
                members.push(poly.clone());
            }
        }
        Self {
            center,
            extent,
            clipped,
            members,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.clipped.is_empty() && self.members.is_empty()
    }
}

/// Cuts the `extent_m` square centred on `center` out of the indexed
/// footprints, projected about the sample point.
pub fn clip_tile(
    index: &FootprintIndex,
    center: &SamplePoint,
    extent_m: f64,
) -> Result<TileGeometry, GeoError> {
    let proj = LocalProjection::new(center.lonlat)?;
    let extent = Rect::centered(Point::default(), extent_m, extent_m);
    let query = proj.unproject_rect(&extent);
    let projected: Vec<Polygon> = index
        .query(&query)
        .map(|f| proj.project_polygon(&f.polygon))
        .collect();
    Ok(TileGeometry::from_polygons(center.clone(), extent, &projected))
}

/// Square raster, row 0 at the top (max y) of the extent.
#[derive(Debug, Clone, PartialEq)]
pub struct TileRaster {
    pub size: usize,
    /// Building coverage fraction per pixel, multiples of 1/16.
    pub coverage: Vec<f64>,
    /// 1 where coverage >= 0.5 (building, black).
    pub binary: Vec<u8>,
}

impl TileRaster {
    pub fn from_coverage(size: usize, coverage: Vec<f64>) -> Self {
        assert_eq!(coverage.len(), size * size, "coverage length");
        let binary = coverage.iter().map(|&c| u8::from(c >= 0.5)).collect();
        Self {
            size,
            coverage,
            binary,
        }
    }

    pub fn empty(size: usize) -> Self {
        Self::from_coverage(size, vec![0.0; size * size])
    }

    pub fn black_count(&self) -> usize {
        self.binary.iter().map(|&b| b as usize).sum()
    }

    /// Grayscale export: 0 = fully built, 255 = open ground.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.coverage
            .iter()
            .map(|c| (255.0 * (1.0 - c)).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.size, self.size)?;
        out.write_all(&self.to_gray8())
    }

    pub fn write_png<W: Write>(&self, out: W) -> io::Result<()> {
        let mut enc = png::Encoder::new(out, self.size as u32, self.size as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(io::Error::other)?;
        writer.write_image_data(&self.to_gray8()).map_err(io::Error::other)?;
        writer.finish().map_err(io::Error::other)
    }
}

/// Renders the clipped footprints at `size` x `size` pixels by 4x4
/// subsample point sampling. Overlapping buildings saturate at full
/// coverage.
pub fn rasterize(tile: &TileGeometry, size: usize) -> TileRaster {
    let sub = size * SUBSAMPLES;
    let mut mask = vec![false; sub * sub];
    let scale_x = tile.extent.width() / size as f64;
    let scale_y = tile.extent.height() / size as f64;
    let to_px = |p: &Point| {
        Point::new(
            (p.x - tile.extent.min.x) / scale_x,
            (tile.extent.max.y - p.y) / scale_y,
        )
    };
    let k = SUBSAMPLES as f64;
    let mut crossings: Vec<f64> = Vec::new();
    for poly in &tile.clipped {
        let rings: Vec<Vec<Point>> = std::iter::once(&poly.exterior)
            .chain(poly.holes.iter())
            .map(|r| r.iter().map(to_px).collect())
            .collect();
        let Some(bb) = Rect::of_points(rings.iter().flatten()) else { continue };
        // Subsample centre of row j sits at (j + 0.5) / k pixels.
        let j0 = ((bb.min.y * k - 0.5).ceil().max(0.0)) as usize;
        let j1 = ((bb.max.y * k - 0.5).floor()).min(sub as f64 - 1.0);
        if j1 < 0.0 {
            continue;
        }
        for j in j0..=(j1 as usize) {
            let v = (j as f64 + 0.5) / k;
            crossings.clear();
            for ring in &rings {
                let n = ring.len();
                for e in 0..n {
                    let (a, b) = (ring[e], ring[(e + 1) % n]);
                    if (a.y > v) != (b.y > v) {
                        crossings.push(a.x + (v - a.y) * (b.x - a.x) / (b.y - a.y));
                    }
                }
            }
            crossings.sort_by(f64::total_cmp);
            let row = &mut mask[j * sub..(j + 1) * sub];
            for span in crossings.chunks_exact(2) {
                let i0 = (span[0] * k - 0.5).ceil().max(0.0);
                let i1 = (span[1] * k - 0.5).ceil().min(sub as f64);
                if i1 <= i0 {
                    continue;
                }
                for cell in &mut row[i0 as usize..i1 as usize] {
                    *cell = true;
                }
            }
        }
    }

    let per_pixel = (SUBSAMPLES * SUBSAMPLES) as f64;
    let mut coverage = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let mut hits = 0usize;
            for j in 0..SUBSAMPLES {
                let row = (r * SUBSAMPLES + j) * sub + c * SUBSAMPLES;
                hits += mask[row..row + SUBSAMPLES].iter().filter(|&&b| b).count();
            }
            coverage[r * size + c] = hits as f64 / per_pixel;
        }
    }
    TileRaster::from_coverage(size, coverage)
}
