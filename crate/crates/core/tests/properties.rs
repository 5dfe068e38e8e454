//! Property tests for the structural invariants: transform algebra,
//! rearrangement equimeasurability, norm homogeneity, the tile order, and
//! the master identity on small random instances.

use proptest::prelude::*;

use walsh_carleson::dyadic::{
    decreasing_rearrangement, inverse_walsh_transform, partial_sum, walsh_eval, walsh_transform,
    weak_l1_norm, DyadicFunction, LacunarySequence,
};
use walsh_carleson::orlicz::{luxembourg_norm, OrliczGauge};
use walsh_carleson::phase::{carleson_apply, enumerate_bitiles};
use walsh_carleson::tiles::{bitile_leq, bitiles_intersect, BiTile, ChoiceFunction};

/// Strategy: a resolution and matching value vector.
fn function_strategy(max_k: u8) -> impl Strategy<Value = DyadicFunction> {
    (0..=max_k).prop_flat_map(|k| {
        proptest::collection::vec(-8.0f64..8.0, 1 << k)
            .prop_map(move |values| DyadicFunction::new(k, values).expect("finite values"))
    })
}

fn bitile_strategy(max_scale: u8) -> impl Strategy<Value = BiTile> {
    (0..=max_scale).prop_flat_map(|s| {
        (0..1u32 << s, 0u64..32).prop_map(move |(m, n)| BiTile::new(s, m, n).expect("in range"))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law(k in 1u8..=6, seed_m in 0u64..64, seed_n in 0u64..64) {
        let len = 1u64 << k;
        let m = seed_m % len;
        let n = seed_n % len;
        for cell in 0..len {
            let lhs = walsh_eval(m, cell, k).unwrap() * walsh_eval(n, cell, k).unwrap();
            prop_assert_eq!(lhs, walsh_eval(m ^ n, cell, k).unwrap());
        }
    }

    #[test]
    fn transform_round_trip_and_parseval(f in function_strategy(8)) {
        let coeffs = walsh_transform(&f);
        let back = inverse_walsh_transform(f.resolution(), &coeffs).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let energy: f64 = coeffs.iter().map(|c| c * c).sum();
        prop_assert!((energy - f.l2_norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn rearrangement_is_equimeasurable(f in function_strategy(8), s in 0.0f64..8.0) {
        let curve = decreasing_rearrangement(&f);
        let direct = f.values().iter().filter(|v| v.abs() > s).count() as f64
            / f.len() as f64;
        prop_assert_eq!(curve.distribution(s), direct);
        prop_assert!((curve.integral() - f.l1_norm()).abs() < 1e-12);
    }

    #[test]
    fn weak_l1_below_l1(f in function_strategy(8)) {
        prop_assert!(weak_l1_norm(&f) <= f.l1_norm() + 1e-12);
    }

    #[test]
    fn luxembourg_homogeneous_and_monotone(f in function_strategy(6), c in 0.1f64..8.0) {
        for gauge in [OrliczGauge::identity(), OrliczGauge::l_logl_half()] {
            let n1 = luxembourg_norm(&f, &gauge);
            let n2 = luxembourg_norm(&f.scale(c), &gauge);
            prop_assert!((n2 - c * n1).abs() <= 1e-8 * (1.0 + c * n1));
        }
    }

    #[test]
    fn bitile_order_iff_intersection(a in bitile_strategy(4), b in bitile_strategy(4)) {
        let comparable = bitile_leq(&a, &b) || bitile_leq(&b, &a);
        prop_assert_eq!(comparable, bitiles_intersect(&a, &b));
    }

    #[test]
    fn master_identity_small(
        k in 2u8..=6,
        cells in proptest::collection::vec(-4.0f64..4.0, 64),
        picks in proptest::collection::vec(0usize..8, 64),
    ) {
        let len = 1usize << k;
        let f = DyadicFunction::new(k, cells[..len].to_vec()).unwrap();
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let assignment: Vec<u64> = picks[..len]
            .iter()
            .map(|&p| seq.terms()[p % seq.len()])
            .collect();
        let choice = ChoiceFunction::new(k, assignment, &seq).unwrap();
        let tiles = enumerate_bitiles(k, &seq).unwrap();
        let out = carleson_apply(&f, &choice, &tiles).unwrap();
        for i in 0..len {
            let oracle = partial_sum(&f, choice.value(i)).unwrap().value(i);
            prop_assert!((out.value(i) - oracle).abs() < 1e-10);
        }
    }
}
