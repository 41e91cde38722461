//! Property tests for invariants of the geometry, the file formats, and the diagrams of
//! random complexes.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::{betti_gf2, euler, extended_persistence, Kind};
use risc::cli::{diagram_of, gen, ComplexFile};
use risc::exact_geometry::{
    alpha_raw, format_rational, parse_rational, reflect, t_apply, t_inverse, t_pow, tile_index, Coord, ExtRational,
    Region, ShiftVector, StripPoint, Q,
};
use risc::plc::{LevelGrid, DEFAULT_SIMPLEX_CAP};

fn arb_q() -> impl Strategy<Value = Q> {
    (-200i64..=200, 1i64..=24).prop_map(|(p, q)| Q::new(p.into(), q.into()))
}

fn arb_coord() -> impl Strategy<Value = Coord> {
    (-3i64..=3, prop::option::weighted(0.9, arb_q())).prop_map(|(k, v)| Coord {
        k,
        v: v.map_or(ExtRational::PosInf, ExtRational::Fin),
    })
}

fn arb_strip_point() -> impl Strategy<Value = StripPoint> {
    (arb_coord(), arb_coord()).prop_map(|(x, y)| StripPoint::new(x, y)).prop_filter("in strip", |p| p.in_strip())
}

fn arb_shift() -> impl Strategy<Value = ShiftVector> {
    (arb_q(), arb_q()).prop_map(|(a, b)| ShiftVector::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn t_is_invertible_and_stays_in_strip(p in arb_strip_point()) {
        let tp = t_apply(&p).unwrap();
        prop_assert!(tp.in_strip());
        prop_assert_eq!(t_inverse(&tp).unwrap(), p.clone());
        prop_assert_eq!(t_pow(&p, 3), t_apply(&t_apply(&tp).unwrap()).unwrap());
    }

    #[test]
    fn t_is_monotone(p in arb_strip_point(), q in arb_strip_point()) {
        if p.leq(&q) {
            prop_assert!(t_apply(&p).unwrap().leq(&t_apply(&q).unwrap()));
        }
    }

    #[test]
    fn t_lowers_tile_index(p in arb_strip_point()) {
        if let Ok(n) = tile_index(&p) {
            prop_assert_eq!(tile_index(&t_apply(&p).unwrap()).unwrap(), n - 1);
        }
    }

    #[test]
    fn reflection_reverses_order(p in arb_strip_point(), q in arb_strip_point()) {
        prop_assert_eq!(reflect(&reflect(&p)), p.clone());
        prop_assert_eq!(p.leq(&q), reflect(&q).leq(&reflect(&p)));
    }

    #[test]
    fn meet_and_join_are_bounds(p in arb_strip_point(), q in arb_strip_point()) {
        let (m, j) = (p.meet(&q), p.join(&q));
        prop_assert!(m.leq(&p) && m.leq(&q) && p.leq(&j) && q.leq(&j));
    }

    #[test]
    fn alpha_is_a_monotone_group_action(p in arb_strip_point(), a in arb_shift(), b in arb_shift()) {
        let ap = alpha_raw(&a, &p);
        prop_assert!(ap.in_strip());
        prop_assert_eq!(alpha_raw(&b, &ap), alpha_raw(&a.add(&b), &p));
        prop_assert_eq!(alpha_raw(&ShiftVector::zero(), &p), p.clone());
        prop_assert_eq!(alpha_raw(&a.neg(), &ap), p.clone());
        if a.leq(&b) {
            prop_assert!(ap.leq(&alpha_raw(&b, &p)));
        }
    }

    #[test]
    fn rationals_round_trip(x in arb_q()) {
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn decimals_parse_exactly(whole in -999i64..=999, frac in 0u32..1000) {
        let s = format!("{whole}.{frac:03}");
        let sign: i64 = if s.starts_with('-') { -1 } else { 1 };
        let want = Q::from_integer(whole.into()) + Q::new((sign * i64::from(frac)).into(), 1000.into());
        prop_assert_eq!(parse_rational(&s).unwrap(), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn complex_files_round_trip(seed in any::<u64>()) {
        let f = gen::random(seed);
        let text = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<ComplexFile>(&text).unwrap(), f);
    }

    #[test]
    fn splitting_preserves_topology(seed in any::<u64>()) {
        let k = gen::random(seed).to_complex().unwrap();
        let s = k.split_all(1, &LevelGrid::for_function(&k, 1), DEFAULT_SIMPLEX_CAP).unwrap();
        prop_assert_eq!(euler(&k.simplices), euler(&s.simplices));
        prop_assert_eq!(betti_gf2(&k.simplices), betti_gf2(&s.simplices));
    }

    #[test]
    fn diagrams_match_extended_persistence(seed in any::<u64>()) {
        let file = gen::random(seed);
        let k = file.to_complex().unwrap();
        let d = diagram_of(&file, Some(2)).unwrap();
        let mut ours = BTreeMap::new();
        for p in &d.points {
            let kind = match p.region.unwrap() {
                Region::Ord => Kind::Ord,
                Region::Rel => Kind::Rel,
                Region::Ext => Kind::Ext,
            };
            let (b, e) = p.pair.clone().unwrap();
            let key = (p.degree.unwrap() as usize, kind, b.fin().unwrap().clone(), e.fin().unwrap().clone());
            *ours.entry(key).or_insert(0) += p.multiplicity;
        }
        prop_assert_eq!(ours, extended_persistence(&k.values[0], &k.simplices));
        // The Ext classes in degree 0 are the connected components.
        let components: usize = d.points.iter()
            .filter(|p| p.degree == Some(0) && p.region == Some(Region::Ext))
            .map(|p| p.multiplicity)
            .sum();
        prop_assert_eq!(components, betti_gf2(&k.simplices)[0]);
    }
}
