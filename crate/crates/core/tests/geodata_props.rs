mod common;

use figground::geodata::{parse_footprints, LocalProjection};
use figground::geometry::{signed_area, Point};
use proptest::prelude::*;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b
}

#[test]
fn offsets_of_a_thousandth_degree() {
    let origin = Point::new(-71.0, 42.0);
    let proj = LocalProjection::new(origin).unwrap();
    let north = proj.project(&Point::new(-71.0, 42.001));
    let east = proj.project(&Point::new(-70.999, 42.0));
    assert!((north.y - 111.32).abs() < 0.01, "{north:?}");
    assert!((east.x - 82.73).abs() < 0.01, "{east:?}");
    assert!(rel_err(north.y, common::haversine(&origin, &Point::new(-71.0, 42.001))) < 1e-3);
    assert!(rel_err(east.x, common::haversine(&origin, &Point::new(-70.999, 42.0))) < 1e-3);
}

proptest! {
    #[test]
    fn round_trip_within_a_millimetre(lat in -80.0f64..80.0, lon in -180.0f64..180.0, dx in -200.0f64..200.0, dy in -200.0f64..200.0) {
        let proj = LocalProjection::new(Point::new(lon, lat)).unwrap();
        let m = Point::new(dx, dy);
        let back = proj.project(&proj.unproject(&m));
        prop_assert!(back.distance(&m) < 1e-3);
    }

    #[test]
    fn projected_distance_tracks_haversine(
        lat in 41.0f64..43.0,
        lon in -73.0f64..-70.0,
        bearing in 0.0f64..std::f64::consts::TAU,
        len in 1.0f64..300.0,
        start in 0.0f64..100.0,
    ) {
        // A segment near, but not necessarily through, the projection origin.
        let origin = Point::new(lon, lat);
        let proj = LocalProjection::new(origin).unwrap();
        let a_m = Point::new(start * bearing.sin(), start * bearing.cos());
        let b_m = Point::new(a_m.x + len * bearing.cos(), a_m.y + len * bearing.sin());
        let (a, b) = (proj.unproject(&a_m), proj.unproject(&b_m));
        let planar = a_m.distance(&b_m);
        prop_assert!(rel_err(planar, common::haversine(&a, &b)) < 1e-3);
    }
}

const FIXTURE: &str = r#"{"type":"FeatureCollection","features":[
 {"type":"Feature","properties":{"id":"a"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[0,1e-4],[1e-4,1e-4],[1e-4,0],[0,0]],[[2e-5,2e-5],[6e-5,2e-5],[6e-5,6e-5],[2e-5,6e-5],[2e-5,2e-5]]]}},
 {"type":"Feature","properties":{"id":"b"},"geometry":{"type":"MultiPolygon","coordinates":[[[[1,1],[1.0001,1],[1.0001,1.0001],[1,1.0001],[1,1]]],[[[2,2],[2,2.0001],[2.0001,2.0001],[2,2]]]]}},
 {"type":"Feature","properties":{"id":"bow"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]}}
]}"#;

#[test]
fn parsed_rings_are_oriented_and_deterministic() {
    let (first, stats) = parse_footprints(FIXTURE.as_bytes()).unwrap();
    let (second, _) = parse_footprints(FIXTURE.as_bytes()).unwrap();
    assert_eq!(first, second);
    assert_eq!(stats.rejected, 1);
    let ids: Vec<&str> = first.iter().map(|f| f.id.as_str()).collect();
    assert_eq!(ids, ["a", "b-0", "b-1"]);
    for f in &first {
        assert!(signed_area(&f.polygon.exterior) > 0.0);
        for h in &f.polygon.holes {
            assert!(signed_area(h) < 0.0);
        }
    }
    assert_eq!(first[0].polygon.holes.len(), 1);
}
