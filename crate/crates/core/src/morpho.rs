//! The four 10-bin morphology histograms and the 40-dimensional feature
//! vector built from them.
//!
//! Layout, in order: `direction0..9`, `density0..9`, `area0..9`,
//! `complexity0..9`. Each block is a frequency distribution over its
//! buckets, or all zeros when the tile has nothing to measure.

use std::fmt;

use thiserror::Error;

use crate::geometry::Polygon;
use crate::raster::{TileGeometry, TileRaster};

pub const BINS: usize = 10;
pub const FEATURE_DIM: usize = 4 * BINS;

/// Gradient magnitudes at or below this are not building edges.
pub const EDGE_EPSILON: f64 = 1e-12;

/// Orientations within this many bin-widths of a bin edge snap onto it,
/// so axis-aligned gradients land in their nominal bin despite `atan2`
/// rounding.
pub const ORIENTATION_SNAP: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("raster side {0} is not a positive multiple of 16")]
    RasterSize(usize),
    #[error("raster buffer has {got} pixels, expected {expected}")]
    RasterBuffer { got: usize, expected: usize },
}

/// How the last bucket of a table is bounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    /// `[lo, hi]`
    Closed(f64),
    /// `[lo, hi)`
    Open(f64),
    /// `[lo, +inf)`
    Unbounded,
}

/// Ten half-open buckets `[lower[i], lower[i+1])` plus a last bucket
/// bounded by `upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketTable {
    pub lower: [f64; BINS],
    pub upper: UpperBound,
}

impl BucketTable {
    pub const DENSITY: BucketTable = BucketTable {
        lower: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        upper: UpperBound::Closed(1.0),
    };
    /// Footprint area, square metres.
    pub const AREA: BucketTable = BucketTable {
        lower: [0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 1000.0],
        upper: UpperBound::Unbounded,
    };
    /// Perimeter over square root of area.
    pub const COMPLEXITY: BucketTable = BucketTable {
        lower: [3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0, 24.0, 27.0, 30.0],
        upper: UpperBound::Unbounded,
    };
    /// Unsigned gradient orientation, degrees.
    pub const DIRECTION: BucketTable = BucketTable {
        lower: [0.0, 18.0, 36.0, 54.0, 72.0, 90.0, 108.0, 126.0, 144.0, 162.0],
        upper: UpperBound::Open(180.0),
    };

    /// Bucket index of `value`, or `None` outside the table's domain.
    pub fn bucket(&self, value: f64) -> Option<usize> {
        if !(value >= self.lower[0]) {
            return None;
        }
        match self.upper {
            UpperBound::Closed(hi) if value > hi => return None,
            UpperBound::Open(hi) if value >= hi => return None,
            _ => {}
        }
        Some(self.lower.partition_point(|&lo| lo <= value) - 1)
    }
}

fn normalize(counts: [usize; BINS]) -> [f64; BINS] {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return [0.0; BINS];
    }
    counts.map(|c| c as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub direction: [f64; BINS],
    pub density: [f64; BINS],
    pub area: [f64; BINS],
    pub complexity: [f64; BINS],
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for (i, block) in self.blocks().iter().enumerate() {
            out[i * BINS..(i + 1) * BINS].copy_from_slice(*block);
        }
        out
    }

    pub fn from_slice(values: &[f64]) -> Option<Self> {
        if values.len() != FEATURE_DIM {
            return None;
        }
        let block = |i: usize| -> [f64; BINS] { values[i * BINS..(i + 1) * BINS].try_into().unwrap() };
        Some(Self {
            direction: block(0),
            density: block(1),
            area: block(2),
            complexity: block(3),
        })
    }

    pub fn blocks(&self) -> [&[f64; BINS]; 4] {
        [&self.direction, &self.density, &self.area, &self.complexity]
    }
}

/// Feature family of each 10-wide block, in vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureFamily {
    Directionality,
    Density,
    BuildingSize,
    ContourComplexity,
}

impl FeatureFamily {
    /// Vector order.
    pub const ALL: [FeatureFamily; 4] = [
        FeatureFamily::Directionality,
        FeatureFamily::Density,
        FeatureFamily::BuildingSize,
        FeatureFamily::ContourComplexity,
    ];

    /// Column-name prefix of the family's block.
    pub fn prefix(self) -> &'static str {
        match self {
            FeatureFamily::Directionality => "direction",
            FeatureFamily::Density => "density",
            FeatureFamily::BuildingSize => "area",
            FeatureFamily::ContourComplexity => "complexity",
        }
    }

    pub fn of_dimension(dim: usize) -> Option<FeatureFamily> {
        Self::ALL.get(dim / BINS).copied()
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureFamily::Directionality => "Directionality",
            FeatureFamily::Density => "Density",
            FeatureFamily::BuildingSize => "Building size",
            FeatureFamily::ContourComplexity => "Contour complexity",
        })
    }
}

/// `direction0`, ..., `complexity9`.
pub fn feature_names() -> Vec<String> {
    FeatureFamily::ALL
        .iter()
        .flat_map(|f| (0..BINS).map(move |i| format!("{}{i}", f.prefix())))
        .collect()
}

/// A sliding-window scale: window side, stride and reflective pad, pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowScale {
    pub window: usize,
    pub stride: usize,
    pub pad: usize,
}

/// The three density scales for a raster of side `size`: the whole image,
/// half-size windows (4x4 placements) and quarter-size windows (8x8
/// placements), each smaller scale strided by half its side over a
/// reflect-padded image.
pub fn density_scales(size: usize) -> Result<[WindowScale; 3], FeatureError> {
    if size == 0 || size % 16 != 0 {
        return Err(FeatureError::RasterSize(size));
    }
    let half = size / 2;
    let quarter = size / 4;
    Ok([
        WindowScale { window: size, stride: size, pad: 0 },
        WindowScale { window: half, stride: half / 2, pad: half / 4 },
        WindowScale { window: quarter, stride: quarter / 2, pad: quarter / 4 },
    ])
}

/// Mirror index without repeating the edge pixel (`-1 -> 1`, `n -> n-2`).
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

fn check_raster(raster: &TileRaster) -> Result<(), FeatureError> {
    let expected = raster.size * raster.size;
    if raster.binary.len() != expected || raster.coverage.len() != expected {
        return Err(FeatureError::RasterBuffer {
            got: raster.binary.len().min(raster.coverage.len()),
            expected,
        });
    }
    Ok(())
}

/// Distribution of black-pixel density over every window of every scale.
pub fn density_histogram(raster: &TileRaster) -> Result<[f64; BINS], FeatureError> {
    check_raster(raster)?;
    let n = raster.size;
    let mut counts = [0usize; BINS];
    for scale in density_scales(n)? {
        let padded = n + 2 * scale.pad;
        // Summed-area table over the padded image, one extra row/column of zeros.
        let w = padded + 1;
        let mut sat = vec![0u32; w * w];
        for y in 0..padded {
            let sy = reflect(y as isize - scale.pad as isize, n);
            let mut row_sum = 0u32;
            for x in 0..padded {
                let sx = reflect(x as isize - scale.pad as isize, n);
                row_sum += raster.binary[sy * n + sx] as u32;
                sat[(y + 1) * w + (x + 1)] = sat[y * w + (x + 1)] + row_sum;
            }
        }
        let placements = (padded - scale.window) / scale.stride + 1;
        let pixels = (scale.window * scale.window) as f64;
        for wy in 0..placements {
            for wx in 0..placements {
                let (y0, x0) = (wy * scale.stride, wx * scale.stride);
                let (y1, x1) = (y0 + scale.window, x0 + scale.window);
                let black = sat[y1 * w + x1] + sat[y0 * w + x0] - sat[y0 * w + x1] - sat[y1 * w + x0];
                let bucket = BucketTable::DENSITY
                    .bucket(black as f64 / pixels)
                    .expect("density lies in [0, 1]");
                counts[bucket] += 1;
            }
        }
    }
    Ok(normalize(counts))
}

/// Unsigned orientation bin of a non-zero gradient, measured
/// counter-clockwise from the +x axis with y pointing up the map.
pub fn orientation_bin(gx: f64, gy: f64) -> usize {
    // Fold the gradient into the upper half-plane so that g and -g are the
    // same orientation bit for bit.
    let (gx, gy) = if gy < 0.0 || (gy == 0.0 && gx < 0.0) {
        (-gx, -gy)
    } else {
        (gx, gy)
    };
    let degrees = gy.atan2(gx).to_degrees();
    let mut pos = degrees / 18.0;
    let nearest = pos.round();
    if (pos - nearest).abs() < ORIENTATION_SNAP {
        pos = nearest;
    }
    (pos.floor() as usize) % BINS
}

/// Histogram of gradient orientations over building edges. Gradients are
/// centred differences on interior pixels; the one-pixel border is
/// skipped. Each edge pixel counts once.
pub fn direction_histogram(raster: &TileRaster) -> Result<[f64; BINS], FeatureError> {
    check_raster(raster)?;
    let n = raster.size;
    let c = &raster.coverage;
    let mut counts = [0usize; BINS];
    for r in 1..n.saturating_sub(1) {
        for col in 1..n - 1 {
            let gx = c[r * n + col + 1] - c[r * n + col - 1];
            // Rows run top to bottom; north minus south keeps y up.
            let gy = c[(r - 1) * n + col] - c[(r + 1) * n + col];
            if (gx * gx + gy * gy).sqrt() > EDGE_EPSILON {
                counts[orientation_bin(gx, gy)] += 1;
            }
        }
    }
    Ok(normalize(counts))
}

/// Perimeter of the exterior ring divided by the square root of the net
/// area. At least `2 * sqrt(pi)` for any simple polygon.
pub fn contour_complexity(polygon: &Polygon) -> f64 {
    polygon.exterior_perimeter() / polygon.area().sqrt()
}

/// Frequency of building footprint areas per area bucket.
pub fn area_histogram(members: &[Polygon]) -> [f64; BINS] {
    let mut counts = [0usize; BINS];
    for p in members {
        if let Some(b) = BucketTable::AREA.bucket(p.area()) {
            counts[b] += 1;
        }
    }
    normalize(counts)
}

/// Frequency of contour complexity per complexity bucket.
pub fn complexity_histogram(members: &[Polygon]) -> [f64; BINS] {
    let mut counts = [0usize; BINS];
    for p in members {
        let value = contour_complexity(p);
        let bucket = BucketTable::COMPLEXITY.bucket(value);
        assert!(
            bucket.is_some(),
            "contour complexity {value} below the circle bound for a simple polygon"
        );
        counts[bucket.unwrap()] += 1;
    }
    normalize(counts)
}

/// The 40-dimensional description of one tile.
pub fn featurize(tile: &TileGeometry, raster: &TileRaster) -> Result<FeatureVector, FeatureError> {
    Ok(FeatureVector {
        direction: direction_histogram(raster)?,
        density: density_histogram(raster)?,
        area: area_histogram(&tile.members),
        complexity: complexity_histogram(&tile.members),
    })
}
