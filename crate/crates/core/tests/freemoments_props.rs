use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;

use freecov::freemoments::{
    classical_moment, free_cumulants_from_moments, free_moment, free_moments_up_to, CumulantSequence,
};
use freecov::partitions::{catalan_number, enumerate_noncrossing, enumerate_set_partitions};
use freecov::seeding;

fn brute_sum(parts: &[freecov::partitions::SetPartition], a: &[f64]) -> f64 {
    parts.iter().map(|pi| pi.block_sizes().iter().map(|&s| a[s - 1]).product::<f64>()).sum()
}

#[test]
fn all_ones_gives_catalan() {
    for p in 1..=12 {
        let ones = CumulantSequence::constant(1.0, p).unwrap();
        let want = catalan_number(p).unwrap().to_f64().unwrap();
        assert_eq!(free_moment(p, &ones).unwrap(), want, "p = {p}");
    }
}

#[test]
fn matches_explicit_partition_lists() {
    let a = [0.3, -1.1, 2.0, 0.7, 1.5, -0.4, 0.9];
    let seq = CumulantSequence::new(a.to_vec()).unwrap();
    for p in 1..=7 {
        let free = brute_sum(&enumerate_noncrossing(p).unwrap(), &a);
        let classical = brute_sum(&enumerate_set_partitions(p).unwrap(), &a);
        assert!((free_moment(p, &seq).unwrap() - free).abs() <= 1e-12 * free.abs().max(1.0));
        assert!((classical_moment(p, &seq).unwrap() - classical).abs() <= 1e-12 * classical.abs().max(1.0));
    }
}

#[test]
fn round_trip_on_random_sequences() {
    let mut rng = seeding::rng(2024);
    for case in 0..1000 {
        let order = rng.random_range(1..=8);
        let a: Vec<f64> = (0..order).map(|_| rng.random_range(-2.0..2.0)).collect();
        let seq = CumulantSequence::new(a.clone()).unwrap();
        let back = free_cumulants_from_moments(&free_moments_up_to(order, &seq).unwrap()).unwrap();
        let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (k, (x, y)) in a.iter().zip(back.values()).enumerate() {
            assert!((x - y).abs() <= 1e-9 * scale, "case {case}, k = {}: {x} vs {y}", k + 1);
        }
    }
}

proptest! {
    #[test]
    fn homogeneity(a in prop::collection::vec(-2.0f64..2.0, 6), c in -2.0f64..2.0) {
        let seq = CumulantSequence::new(a).unwrap();
        let scaled = seq.dilate(c);
        for p in 1..=6 {
            let lhs = free_moment(p, &scaled).unwrap();
            let rhs = c.powi(p as i32) * free_moment(p, &seq).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn free_at_most_classical_for_nonnegative(a in prop::collection::vec(0.0f64..3.0, 8)) {
        let seq = CumulantSequence::new(a).unwrap();
        for p in 1..=8 {
            let free = free_moment(p, &seq).unwrap();
            let classical = classical_moment(p, &seq).unwrap();
            prop_assert!(free <= classical * (1.0 + 1e-12));
            if p <= 3 {
                prop_assert!((free - classical).abs() <= 1e-12 * classical.max(1.0));
            }
        }
    }

    #[test]
    fn batch_matches_single(a in prop::collection::vec(-1.0f64..1.0, 7)) {
        let seq = CumulantSequence::new(a).unwrap();
        let batch = free_moments_up_to(7, &seq).unwrap();
        for p in 1..=7 {
            prop_assert_eq!(batch.get(p), free_moment(p, &seq).unwrap());
        }
    }
}
