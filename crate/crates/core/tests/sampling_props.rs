mod common;

use std::collections::BTreeSet;

use figground::geodata::ResidentialZone;
use figground::geometry::{Point, Polygon};
use figground::sampler::{balance_and_split, income_to_category, sample_points, IncomeCategory, SamplePoint, SamplerParams};
use proptest::prelude::*;

#[test]
fn table_examples() {
    assert_eq!(income_to_category(12_000.0).unwrap().value(), 0);
    assert_eq!(income_to_category(55_000.0).unwrap().value(), 4);
    assert_eq!(income_to_category(250_000.0).unwrap().value(), 7);
    assert!(income_to_category(-1.0).is_err());
}

fn triangle_zone(size: f64) -> ResidentialZone {
    ResidentialZone {
        polygon: Polygon::from_exterior(vec![Point::new(0.0, 0.0), Point::new(size, 0.0), Point::new(0.0, size)]),
        zone_code: "R1".into(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn category_is_monotone(a in 0.0f64..400_000.0, b in 0.0f64..400_000.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(income_to_category(lo).unwrap() <= income_to_category(hi).unwrap());
    }

    #[test]
    fn samples_are_separated_and_inside(seed in any::<u64>(), n in 1usize..120, min_dist in 20.0f64..120.0) {
        let zones = vec![triangle_zone(1500.0)];
        let out = sample_points(&zones, &SamplerParams::new(n, min_dist, seed)).unwrap();
        prop_assert!(!out.points.is_empty());
        prop_assert!(common::min_pairwise_distance(&out.points) >= min_dist);
        for p in &out.points {
            prop_assert!(common::inside_polygon(&zones[0].polygon, p));
        }
    }

    #[test]
    fn splits_partition_the_capped_set(seed in any::<u64>(), cap in 1usize..40, sizes in proptest::collection::vec(0usize..60, 8)) {
        let mut points = Vec::new();
        for (c, &k) in sizes.iter().enumerate() {
            for i in 0..k {
                let mut p = SamplePoint::unlabeled(format!("c{c}-{i}"), Point::default(), Point::default());
                p.category = Some(IncomeCategory::new(c as u8).unwrap());
                points.push(p);
            }
        }
        let s = balance_and_split(&points, cap, [0.7, 0.15, 0.15], seed).unwrap();
        let ids = |v: &[SamplePoint]| v.iter().map(|p| p.id.clone()).collect::<BTreeSet<_>>();
        let (tr, va, te) = (ids(&s.train), ids(&s.val), ids(&s.test));
        prop_assert!(tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te));
        prop_assert_eq!(tr.len() + va.len() + te.len(), s.len());
        let expected: usize = sizes.iter().map(|&k| k.min(cap)).sum();
        prop_assert_eq!(s.len(), expected);
        for (c, &k) in sizes.iter().enumerate() {
            let in_class = s.iter().filter(|(_, p)| p.category.unwrap().index() == c).count();
            prop_assert_eq!(in_class, k.min(cap));
        }
    }
}
