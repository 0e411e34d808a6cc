//! Randomized invariants over permutations, partitions, ballots and the transform.

use std::sync::OnceLock;

use proptest::prelude::*;
use rankframe::ballots::{parse_ballots, serialize_ballots, tally, BallotFile};
use rankframe::combinatorics::{
    enumerate_ordered_set_partitions, factorial, multiset_rank, multiset_unrank, IntegerPartition,
    OrderedSetPartition, Permutation,
};
use rankframe::frame::{AnalysisFilter, ExecMode, SetupOptions, ShapeSelection, Signal, Transform};

fn full_transform(n: usize) -> &'static Transform {
    static CELLS: [OnceLock<Transform>; 6] = [const { OnceLock::new() }; 6];
    CELLS[n].get_or_init(|| {
        Transform::setup(
            n,
            &SetupOptions {
                selection: ShapeSelection::All,
                hook_fastpath: false,
            },
        )
        .unwrap()
        .0
    })
}

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    (0..factorial(n)).prop_map(move |r| Permutation::lex_unrank(r, n))
}

fn signal(n: usize) -> impl Strategy<Value = Signal> {
    prop::collection::vec(-10.0f64..10.0, factorial(n) as usize)
        .prop_map(move |v| Signal::new(n, v).unwrap())
}

fn partition_of(n: usize) -> impl Strategy<Value = IntegerPartition> {
    let all = IntegerPartition::all(n);
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn set_partition(n: usize) -> impl Strategy<Value = OrderedSetPartition> {
    partition_of(n).prop_flat_map(|shape| {
        let verts = enumerate_ordered_set_partitions(&shape);
        (0..verts.len()).prop_map(move |i| verts[i].clone())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_unrank_round_trip(n in 1usize..=10, seed in any::<u64>()) {
        let r = seed % factorial(n);
        let p = Permutation::lex_unrank(r, n);
        prop_assert_eq!(p.lex_rank(), r);
        prop_assert_eq!(Permutation::new(p.word().to_vec()).unwrap(), p);
    }

    #[test]
    fn inverse_and_sign((a, b) in (perm(6), perm(6))) {
        prop_assert_eq!(a.compose(&a.inverse()), Permutation::identity(6));
        prop_assert_eq!(a.compose(&b).sign(), a.sign() * b.sign());
    }

    #[test]
    fn action_is_a_left_action(pi in set_partition(6), (a, b) in (perm(6), perm(6))) {
        let lhs = pi.act(&a.compose(&b)).unwrap();
        let rhs = pi.act(&b).unwrap().act(&a).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(pi.act(&Permutation::identity(6)).unwrap(), pi);
    }

    #[test]
    fn multiset_rank_round_trip(pi in set_partition(7)) {
        let r = multiset_rank(pi.row_word(), pi.sizes());
        prop_assert_eq!(r, pi.index());
        prop_assert_eq!(multiset_unrank(r, pi.sizes()), pi.row_word().to_vec());
    }

    #[test]
    fn label_round_trip(pi in set_partition(7)) {
        prop_assert_eq!(OrderedSetPartition::parse_label(&pi.label(), 7).unwrap(), pi);
    }

    #[test]
    fn transpose_reverses_dominance(a in partition_of(8), b in partition_of(8)) {
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        prop_assert_eq!(a.dominates(&b).unwrap(), b.transpose().dominates(&a.transpose()).unwrap());
    }

    #[test]
    fn ballots_round_trip(n in 2usize..=9, raw in prop::collection::vec((any::<u64>(), 0u64..1000), 0..20)) {
        let records: Vec<(Permutation, u64)> =
            raw.iter().map(|&(r, c)| (Permutation::lex_unrank(r % factorial(n), n), c)).collect();
        let b = BallotFile { n, records, label: None };
        let parsed = parse_ballots(&serialize_ballots(&b)).unwrap();
        prop_assert_eq!(&parsed, &b);
        prop_assert_eq!(tally(&parsed).sum(), b.total() as f64);
    }

    #[test]
    fn sign_flip_is_an_involution(f in signal(5)) {
        prop_assert_eq!(f.sign_flipped().sign_flipped(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_and_reconstruction(f in signal(5), streamed in any::<bool>()) {
        let t = full_transform(5);
        let mode = if streamed { ExecMode::Streamed } else { ExecMode::Cached };
        let table = t.analyze(&f, &AnalysisFilter::default(), mode).unwrap();
        prop_assert!((table.energy() / f.norm_sq() - 1.0).abs() < 1e-9);
        let g = t.synthesize(&table, mode).unwrap();
        let err: f64 = f.values().iter().zip(g.values()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(err / f.norm_sq().sqrt() < 1e-9);
    }

    #[test]
    fn analysis_is_linear(f in signal(4), g in signal(4), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let t = full_transform(4);
        let mix: Vec<f64> = f.values().iter().zip(g.values()).map(|(x, y)| a * x + b * y).collect();
        let h = Signal::new(4, mix).unwrap();
        let filter = AnalysisFilter::default();
        let tf = t.analyze(&f, &filter, ExecMode::Cached).unwrap();
        let tg = t.analyze(&g, &filter, ExecMode::Cached).unwrap();
        let th = t.analyze(&h, &filter, ExecMode::Cached).unwrap();
        for ((rf, rg), rh) in tf.rows.iter().zip(&tg.rows).zip(&th.rows) {
            prop_assert!((a * rf.alpha + b * rg.alpha - rh.alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn modes_agree_bitwise(f in signal(5)) {
        let t = full_transform(5);
        let filter = AnalysisFilter::default();
        let c = t.analyze(&f, &filter, ExecMode::Cached).unwrap();
        let s = t.analyze(&f, &filter, ExecMode::Streamed).unwrap();
        prop_assert_eq!(&c, &s);
        prop_assert_eq!(t.synthesize(&c, ExecMode::Cached).unwrap(), t.synthesize(&s, ExecMode::Streamed).unwrap());
    }

    #[test]
    fn left_translation_preserves_shape_energy(f in signal(4), sigma in perm(4)) {
        let t = full_transform(4);
        let mut moved = vec![0.0; 24];
        for (r, &v) in f.values().iter().enumerate() {
            let tau = Permutation::lex_unrank(r as u64, 4);
            moved[sigma.compose(&tau).lex_rank() as usize] = v;
        }
        let g = Signal::new(4, moved).unwrap();
        let ef = rankframe::frame::shape_energies(&rankframe::frame::energy_table(
            &t.analyze(&f, &AnalysisFilter::default(), ExecMode::Cached).unwrap(),
        ));
        let eg = rankframe::frame::shape_energies(&rankframe::frame::energy_table(
            &t.analyze(&g, &AnalysisFilter::default(), ExecMode::Cached).unwrap(),
        ));
        for ((_, a), (_, b)) in ef.iter().zip(&eg) {
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()));
        }
    }
}
