mod common;

use figground::geometry::{Point, Polygon, Rect};
use figground::morpho::{area_histogram, complexity_histogram, direction_histogram, featurize};
use figground::raster::{rasterize, TileGeometry, TileRaster, DEFAULT_RESOLUTION};
use figground::sampler::SamplePoint;
use figground::synth::{generate_synthetic, SyntheticSpec};

fn tile(extent: Rect, polys: &[Polygon]) -> TileGeometry {
    TileGeometry::from_polygons(SamplePoint::unlabeled("t", Point::default(), Point::default()), extent, polys)
}

fn rotate_180(r: &TileRaster) -> TileRaster {
    TileRaster::from_coverage(r.size, r.coverage.iter().rev().copied().collect())
}

/// Quarter turn counter-clockwise.
fn rotate_90(r: &TileRaster) -> TileRaster {
    let n = r.size;
    let mut cov = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            cov[(n - 1 - col) * n + row] = r.coverage[row * n + col];
        }
    }
    TileRaster::from_coverage(n, cov)
}

#[test]
fn direction_invariant_under_half_turn() {
    let mut r = common::rng(31);
    for _ in 0..10 {
        let raster = common::random_coverage_raster(96, &mut r);
        assert_eq!(direction_histogram(&raster).unwrap(), direction_histogram(&rotate_180(&raster)).unwrap());
    }
}

#[test]
fn quarter_turn_permutes_axis_aligned_bins() {
    let extent = Rect::centered(Point::default(), 128.0, 128.0);
    let fixtures = [
        vec![Rect::new(Point::new(-20.0, -40.0), Point::new(20.0, 40.0)).to_polygon()],
        vec![
            Rect::new(Point::new(-50.0, -50.0), Point::new(-10.0, -30.0)).to_polygon(),
            Rect::new(Point::new(5.0, 0.0), Point::new(45.0, 55.0)).to_polygon(),
        ],
        vec![Rect::new(Point::new(-70.0, -5.0), Point::new(70.0, 5.0)).to_polygon()],
    ];
    for polys in &fixtures {
        let raster = rasterize(&tile(extent, polys), 128);
        let h = direction_histogram(&raster).unwrap();
        let turned = direction_histogram(&rotate_90(&raster)).unwrap();
        for b in 0..10 {
            assert_eq!(turned[(b + 5) % 10], h[b], "bin {b}");
        }
    }
}

#[test]
fn rectangle_masses_match_edge_counts() {
    // Pixel-aligned 20 x 40 px block. Centred differences give two-pixel
    // edge bands: 156 pixels along the long sides with horizontal gradient,
    // 76 along the short sides, and 4 diagonal corners.
    let extent = Rect::centered(Point::default(), 64.0, 64.0);
    let block = Rect::new(Point::new(-10.0, -20.0), Point::new(10.0, 20.0)).to_polygon();
    let raster = rasterize(&tile(extent, &[block]), 64);
    let (oracle, edges) = common::hog_oracle(&raster.coverage, 64);
    let h = direction_histogram(&raster).unwrap();
    assert_eq!(h, oracle);
    assert_eq!(edges, 236);
    assert_eq!(h[0], 156.0 / 236.0);
    assert_eq!(h[5], 76.0 / 236.0);
}

#[test]
fn diagonal_rectangle_peaks_at_45_and_135() {
    let extent = Rect::centered(Point::default(), 200.0, 200.0);
    let rect = Rect::centered(Point::default(), 90.0, 50.0).to_polygon().rotate(std::f64::consts::FRAC_PI_4);
    let raster = rasterize(&tile(extent, &[rect]), 224);
    let h = direction_histogram(&raster).unwrap();
    assert_eq!(h, common::hog_oracle(&raster.coverage, 224).0);
    let peak = h[2] + h[7];
    let others = h.iter().enumerate().filter(|(i, _)| *i != 2 && *i != 7).map(|(_, v)| *v).fold(0.0, f64::max);
    assert!(h[2] > others && h[7] > others, "{h:?}");
    assert!(peak > 0.5, "{h:?}");
}

#[test]
fn size_and_complexity_invariant_under_rigid_motion() {
    let extent = Rect::centered(Point::default(), 400.0, 400.0);
    let mut r = common::rng(8);
    let polys = common::random_footprints(&extent, 40, &mut r);
    let (area, cx) = (area_histogram(&polys), complexity_histogram(&polys));
    for (dx, dy, angle) in [(13.5, -7.25, 0.0), (0.0, 0.0, 0.7), (-40.0, 22.0, 2.1)] {
        let moved: Vec<Polygon> = polys.iter().map(|p| p.rotate(angle).translate(dx, dy)).collect();
        assert_eq!(area_histogram(&moved), area);
        assert_eq!(complexity_histogram(&moved), cx);
    }
}

#[test]
fn featurize_is_pure() {
    let tiles = generate_synthetic(&SyntheticSpec::default(), 4, 12).unwrap();
    for t in &tiles {
        let a = featurize(&t.geometry, &rasterize(&t.geometry, DEFAULT_RESOLUTION)).unwrap();
        let b = featurize(&t.geometry, &rasterize(&t.geometry, DEFAULT_RESOLUTION)).unwrap();
        assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
    }
}

#[test]
fn synthetic_recipes_show_their_morphology() {
    let tiles = generate_synthetic(&SyntheticSpec::default(), 20, 77).unwrap();
    for t in &tiles {
        let fv = featurize(&t.geometry, &rasterize(&t.geometry, DEFAULT_RESOLUTION)).unwrap();
        if t.label.value() == 1 {
            // Small rectangles on one street grid. The grid angle is arbitrary,
            // so each edge orientation may straddle two neighbouring bins.
            assert_eq!(fv.area[0] + fv.area[1], 1.0, "{:?}", fv.area);
            let window = |b: usize| (9..12).map(|k| fv.direction[(b + k) % 10]).sum::<f64>();
            let best = (0..5).max_by(|&a, &b| (window(a) + window(a + 5)).total_cmp(&(window(b) + window(b + 5)))).unwrap();
            assert!(window(best) + window(best + 5) > 0.6, "{:?}", fv.direction);
            assert!(window(best) > 0.2 && window(best + 5) > 0.2, "{:?}", fv.direction);
        } else {
            assert_eq!(fv.complexity[0], 0.0, "{:?}", fv.complexity);
            assert!((fv.complexity[1..].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
