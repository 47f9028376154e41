//! Brute-force oracles and fixture generators shared by integration tests.
//! Nothing here calls the library code it checks.

#![allow(dead_code)]

use figground::geometry::{Point, Polygon, Rect};
use figground::raster::TileRaster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mirror padding that does not repeat the edge pixel, by walking.
fn mirror(mut i: i64, n: i64) -> usize {
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Enumerates every density window explicitly: the whole image, windows of
/// half the side at quarter-side stride on an image padded by an eighth of
/// the side, and windows of a quarter side at eighth-side stride padded by
/// a sixteenth. Buckets by integer arithmetic `floor(10 * black / pixels)`.
pub fn density_oracle(binary: &[u8], n: usize) -> ([f64; 10], usize) {
    let mut counts = [0usize; 10];
    let mut windows = 0;
    for (w, stride, pad) in [(n, n, 0), (n / 2, n / 4, n / 8), (n / 4, n / 8, n / 16)] {
        let padded = n + 2 * pad;
        let img: Vec<Vec<u8>> = (0..padded)
            .map(|y| {
                (0..padded)
                    .map(|x| {
                        let sy = mirror(y as i64 - pad as i64, n as i64);
                        let sx = mirror(x as i64 - pad as i64, n as i64);
                        binary[sy * n + sx]
                    })
                    .collect()
            })
            .collect();
        let mut y0 = 0;
        while y0 + w <= padded {
            let mut x0 = 0;
            while x0 + w <= padded {
                let mut black = 0usize;
                for row in &img[y0..y0 + w] {
                    black += row[x0..x0 + w].iter().filter(|&&b| b == 1).count();
                }
                let bucket = ((10 * black) / (w * w)).min(9);
                counts[bucket] += 1;
                windows += 1;
                x0 += stride;
            }
            y0 += stride;
        }
    }
    let total: usize = counts.iter().sum();
    (counts.map(|c| c as f64 / total as f64), windows)
}

/// Per-pixel gradient enumeration on a coverage raster whose values are
/// multiples of 1/16. The orientation bin is found by comparing the folded
/// integer gradient against each 18 degree boundary ray with cross
/// products instead of an arctangent.
pub fn hog_oracle(coverage: &[f64], n: usize) -> ([f64; 10], usize) {
    let q = |r: usize, c: usize| -> i64 {
        let v = coverage[r * n + c] * 16.0;
        assert_eq!(v, v.round(), "coverage must be a multiple of 1/16");
        v as i64
    };
    let mut counts = [0usize; 10];
    for r in 1..n - 1 {
        for c in 1..n - 1 {
            let mut gx = q(r, c + 1) - q(r, c - 1);
            let mut gy = q(r - 1, c) - q(r + 1, c);
            if gx == 0 && gy == 0 {
                continue;
            }
            if gy < 0 || (gy == 0 && gx < 0) {
                gx = -gx;
                gy = -gy;
            }
            // Largest k with boundary ray k at or before the gradient.
            let mut bin = 0;
            for k in 1..10 {
                let (s, co) = ((18.0 * k as f64).to_radians().sin(), (18.0 * k as f64).to_radians().cos());
                let cross = co * gy as f64 - s * gx as f64;
                let at_or_after = if k == 5 { gx <= 0 } else { cross >= 0.0 };
                if at_or_after {
                    bin = k;
                }
            }
            counts[bin] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return ([0.0; 10], 0);
    }
    (counts.map(|c| c as f64 / total as f64), total)
}

/// Crossing-number containment with boundary points excluded.
pub fn inside_strictly(ring: &[Point], p: &Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        // On-segment check.
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y) {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

pub fn inside_polygon(poly: &Polygon, p: &Point) -> bool {
    inside_strictly(&poly.exterior, p) && poly.holes.iter().all(|h| !inside_strictly(h, p) && !on_ring(h, p))
}

fn on_ring(ring: &[Point], p: &Point) -> bool {
    let n = ring.len();
    (0..n).any(|i| {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        cross == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    })
}

pub fn min_pairwise_distance(points: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(((points[i].x - points[j].x).powi(2) + (points[i].y - points[j].y).powi(2)).sqrt());
        }
    }
    best
}

/// Great-circle distance on a sphere of radius 6378137 m.
pub fn haversine(a: &Point, b: &Point) -> f64 {
    let (la1, la2) = (a.y.to_radians(), b.y.to_radians());
    let dlat = la2 - la1;
    let dlon = (b.x - a.x).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * 6_378_137.0 * h.sqrt().asin()
}

/// Shoelace area and perimeter from first principles.
pub fn shoelace(ring: &[Point]) -> (f64, f64) {
    let n = ring.len();
    let mut a = 0.0;
    let mut per = 0.0;
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        a += p.x * q.y - q.x * p.y;
        per += ((q.x - p.x).powi(2) + (q.y - p.y).powi(2)).sqrt();
    }
    (a.abs() / 2.0, per)
}

/// Coverage raster mixing flat regions, blocky shapes and per-pixel noise.
pub fn random_coverage_raster(n: usize, r: &mut ChaCha8Rng) -> TileRaster {
    let mut cov = vec![0.0; n * n];
    let blocks = r.gen_range(0..12);
    for _ in 0..blocks {
        let (y0, x0) = (r.gen_range(0..n), r.gen_range(0..n));
        let (h, w) = (r.gen_range(1..n / 2), r.gen_range(1..n / 2));
        let v = r.gen_range(0..=16) as f64 / 16.0;
        for y in y0..(y0 + h).min(n) {
            for x in x0..(x0 + w).min(n) {
                cov[y * n + x] = v;
            }
        }
    }
    let noise = r.gen_range(0.0..0.3);
    for c in cov.iter_mut() {
        if r.gen_bool(noise) {
            *c = r.gen_range(0..=16) as f64 / 16.0;
        }
    }
    TileRaster::from_coverage(n, cov)
}

/// Binary-heavy raster with a random target density, for the density oracle.
pub fn random_binary_raster(n: usize, r: &mut ChaCha8Rng) -> TileRaster {
    let p: f64 = r.gen_range(0.0..1.0);
    let mut cov: Vec<f64> = (0..n * n).map(|_| if r.gen_bool(p) { 1.0 } else { 0.0 }).collect();
    // Some solid blocks so windows reach the extreme buckets.
    for _ in 0..r.gen_range(0..6) {
        let (y0, x0, s) = (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(8..n / 2));
        let v = if r.gen_bool(0.5) { 1.0 } else { 0.0 };
        for y in y0..(y0 + s).min(n) {
            for x in x0..(x0 + s).min(n) {
                cov[y * n + x] = v;
            }
        }
    }
    TileRaster::from_coverage(n, cov)
}

/// Random simple footprints inside `extent`: rotated rectangles and convex
/// polygons.
pub fn random_footprints(extent: &Rect, count: usize, r: &mut ChaCha8Rng) -> Vec<Polygon> {
    (0..count)
        .map(|_| {
            let c = Point::new(r.gen_range(extent.min.x..extent.max.x), r.gen_range(extent.min.y..extent.max.y));
            let k = r.gen_range(3..9);
            let radius = r.gen_range(2.0..25.0);
            let angle0: f64 = r.gen_range(0.0..std::f64::consts::TAU);
            let pts = (0..k)
                .map(|i| {
                    let a = angle0 + std::f64::consts::TAU * i as f64 / k as f64;
                    Point::new(c.x + radius * a.cos(), c.y + radius * a.sin())
                })
                .collect();
            Polygon::from_exterior(pts)
        })
        .collect()
}
