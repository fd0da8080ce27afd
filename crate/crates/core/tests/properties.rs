use commproto::bits::{Mask, Pattern};
use commproto::harness::format::{parse_bundle, parse_transcript, serialize_bundle, serialize_transcript, Payload};
use commproto::harness::gen::{gen_instance, random_tree, GenParams, Kind};
use commproto::hitting::find_hitting_set;
use commproto::partition::tree_to_partition;
use commproto::patterns::{pattern_family_of_decomposition, CellPatterns, PatternFamily, PruneMeaningless};
use commproto::psi::{check_psi, PsiPlan};
use commproto::rect::Rectangle;
use commproto::transcript::{Party, Session};
use commproto::xi::{check_xi, XiPlan};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

fn mask(len: usize) -> impl Strategy<Value = Mask> {
    prop::collection::vec(any::<bool>(), len).prop_map(Mask::from_bools)
}

fn rect(rows: usize, cols: usize) -> impl Strategy<Value = Rectangle> {
    (mask(rows), mask(cols)).prop_map(|(r, c)| Rectangle::new(r, c))
}

fn family() -> impl Strategy<Value = (PatternFamily, usize)> {
    (2usize..=10).prop_flat_map(|m| {
        (1..=m.div_ceil(2)).prop_flat_map(move |t| {
            let max = (2 * t).min(m);
            let pattern = prop::collection::btree_set(0..m, 0..=max).prop_map(Pattern::from_indices);
            prop::collection::vec(pattern, 1..24).prop_map(move |ps| (PatternFamily::new(m, ps).unwrap(), t))
        })
    })
}

fn decomposition(seed: u64, rows: usize, cols: usize, m: usize) -> commproto::patterns::Decomposition {
    let bundle = gen_instance(seed, &GenParams::new(Kind::Decomposition, rows, cols, m, 3)).unwrap();
    match bundle.payload {
        Payload::Decomposition(d) => d,
        _ => unreachable!(),
    }
}

proptest! {
    #[test]
    fn intersection_is_a_meet(a in rect(5, 6), b in rect(5, 6), c in rect(5, 6)) {
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
        prop_assert_eq!(a.intersect(&a), a.clone());
        for (x, y) in a.intersect(&b).cells() {
            prop_assert!(a.contains(x, y) && b.contains(x, y));
        }
        prop_assert_eq!(a.intersect(&b).area(), a.cells().filter(|&(x, y)| b.contains(x, y)).count());
    }

    #[test]
    fn trees_become_valid_partitions(seed in any::<u64>(), rows in 1usize..9, cols in 1usize..9, depth in 0u32..5) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let tree = random_tree(&mut rng, rows, cols, depth);
        let f = tree.induced_instance();
        let p = tree_to_partition(&tree, &f).unwrap();
        prop_assert!(p.check().is_ok());
        prop_assert_eq!(p.declared_cost(), tree.depth());
        prop_assert!(p.leaves().len() <= 1 << tree.depth());
        for (x, y) in f.cells_iter() {
            let holding: Vec<_> = p.leaves().iter().filter(|l| l.rect.contains(x, y)).collect();
            prop_assert_eq!(holding.len(), 1);
            prop_assert_eq!(holding[0].label, f.value(x, y));
        }
    }

    #[test]
    fn restriction_gives_a_subfamily(seed in 0u64..400, rows in mask(6), cols in mask(6)) {
        let d = decomposition(seed, 6, 6, 3);
        let full = pattern_family_of_decomposition(&d, None).unwrap();
        let sub = pattern_family_of_decomposition(&d, Some((&rows, &cols))).unwrap();
        prop_assert!(sub.is_subfamily_of(&full));
        let cells = CellPatterns::of_decomposition(&d).unwrap();
        for x in rows.iter_ones() {
            for y in cols.iter_ones() {
                prop_assert!(sub.contains(cells.at(x, y)));
            }
        }
    }

    #[test]
    fn pruning_preserves_the_function(seed in 0u64..400, m in 1usize..6) {
        let d = decomposition(seed, 6, 5, m);
        let pruned = d.prune_meaningless().unwrap();
        prop_assert!(pruned.kept.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(pruned.value.m() <= CellPatterns::of_decomposition(&d).unwrap().family().len());
        for x in 0..d.rows() {
            for y in 0..d.cols() {
                prop_assert_eq!(pruned.value.value(x, y), d.value(x, y));
            }
        }
    }

    #[test]
    fn hitting_sets_are_deterministic_and_certified((fam, t) in family()) {
        let a = find_hitting_set(&fam, t).unwrap();
        prop_assert!(a.verify(&fam).is_ok());
        prop_assert_eq!(&a, &find_hitting_set(&fam, t).unwrap());
        prop_assert!(2 * a.hit_count >= a.large_count);
        prop_assert!(a.max_intersection as f64 <= a.threshold);
    }

    #[test]
    fn psi_and_xi_match_the_table(seed in 0u64..2000, m in 1usize..5) {
        let d = decomposition(seed, 5, 6, m);
        let (psi, xi) = (PsiPlan::new(&d).unwrap(), XiPlan::new(&d).unwrap());
        for x in 0..d.rows() {
            for y in 0..d.cols() {
                let run = psi.run(x, y).unwrap();
                prop_assert!(check_psi(&psi, &d, &run, x, y).is_ok());
                prop_assert_eq!(run.verdict, d.value(x, y));
                let run = xi.run(x, y).unwrap();
                prop_assert!(check_xi(&xi, &run, x, y).is_ok());
                prop_assert_eq!(run.answer, d.witnesses(x, y));
            }
        }
    }

    #[test]
    fn bundles_round_trip(seed in any::<u64>(), kind in prop::sample::select(vec![Kind::Cover, Kind::Decomposition, Kind::Tripartite])) {
        let b = gen_instance(seed, &GenParams::new(kind, 5, 4, 3, 3)).unwrap();
        let text = serialize_bundle(&b);
        let back = parse_bundle(&text).unwrap();
        prop_assert_eq!(serialize_bundle(&back), text);
        prop_assert_eq!(back, b);
    }

    #[test]
    fn words_travel_most_significant_bit_first(value in 0usize..256, x in 0usize..4) {
        let mut s = Session::live(x, 0);
        s.begin(1, "w");
        prop_assert_eq!(s.word(Party::Alice, 8, |_| value).unwrap(), value);
        let t = s.finish().unwrap();
        let bits: Vec<bool> = t.bits().map(|b| b.value).collect();
        let expect: Vec<bool> = (0..8).rev().map(|k| value >> k & 1 == 1).collect();
        prop_assert_eq!(bits, expect);
        prop_assert_eq!(parse_transcript(&serialize_transcript(&t)).unwrap(), t);
    }
}
