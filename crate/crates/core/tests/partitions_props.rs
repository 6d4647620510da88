use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use proptest::prelude::*;

use freecov::partitions::{
    bell_number, catalan_number, enumerate_noncrossing, enumerate_set_partitions, has_interval_block,
    is_noncrossing, kernel, IndexWord, SetPartition,
};

/// Noncrossing iff some interval block exists and removing it leaves a
/// noncrossing partition: an independent characterization of `is_noncrossing`.
fn noncrossing_by_peeling(blocks: &[Vec<usize>]) -> bool {
    if blocks.len() <= 1 {
        return true;
    }
    let mut elements: Vec<usize> = blocks.iter().flatten().copied().collect();
    elements.sort_unstable();
    let rank = |x: usize| elements.binary_search(&x).unwrap();
    for (i, block) in blocks.iter().enumerate() {
        let first = rank(block[0]);
        let last = rank(*block.last().unwrap());
        if last - first + 1 == block.len() {
            let rest: Vec<Vec<usize>> =
                blocks.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect();
            return noncrossing_by_peeling(&rest);
        }
    }
    false
}

#[test]
fn counts_match_bell_and_catalan() {
    for p in 1..=10 {
        let all = enumerate_set_partitions(p).unwrap();
        let nc = enumerate_noncrossing(p).unwrap();
        assert_eq!(all.len(), bell_number(p).unwrap().to_usize().unwrap(), "p = {p}");
        assert_eq!(nc.len(), catalan_number(p).unwrap().to_usize().unwrap(), "p = {p}");
    }
}

#[test]
fn noncrossing_enumeration_equals_filtered_set_partitions() {
    for p in 1..=9 {
        let filtered: BTreeSet<SetPartition> =
            enumerate_set_partitions(p).unwrap().into_iter().filter(is_noncrossing).collect();
        let direct: BTreeSet<SetPartition> = enumerate_noncrossing(p).unwrap().into_iter().collect();
        assert_eq!(filtered, direct, "p = {p}");
    }
}

#[test]
fn noncrossing_agrees_with_peeling_oracle() {
    for p in 1..=8 {
        for pi in enumerate_set_partitions(p).unwrap() {
            assert_eq!(pi.is_noncrossing(), noncrossing_by_peeling(pi.blocks()), "{pi}");
        }
    }
}

#[test]
fn every_noncrossing_partition_has_an_interval_block() {
    for p in 1..=10 {
        assert!(enumerate_noncrossing(p).unwrap().iter().all(has_interval_block), "p = {p}");
    }
    let crossing = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
    assert!(!has_interval_block(&crossing));
}

#[test]
fn enumeration_is_distinct_and_canonical() {
    for p in 1..=7 {
        let all = enumerate_set_partitions(p).unwrap();
        let distinct: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), all.len());
        for pi in &all {
            assert_eq!(SetPartition::new(p, pi.blocks().to_vec()).unwrap(), *pi);
        }
    }
}

#[test]
fn kernel_is_onto_partitions_with_at_most_n_blocks() {
    let p = 4;
    let n = 3;
    let mut seen = BTreeSet::new();
    let mut values = vec![1usize; p];
    loop {
        seen.insert(kernel(&IndexWord::new(n, values.clone()).unwrap()));
        let mut i = 0;
        while i < p && values[i] == n {
            values[i] = 1;
            i += 1;
        }
        if i == p {
            break;
        }
        values[i] += 1;
    }
    let want: BTreeSet<_> =
        enumerate_set_partitions(p).unwrap().into_iter().filter(|pi| pi.num_blocks() <= n).collect();
    assert_eq!(seen, want);
}

#[test]
fn bell_and_catalan_known_values() {
    let bell: Vec<u64> = (1..=10).map(|p| bell_number(p).unwrap().to_u64().unwrap()).collect();
    assert_eq!(bell, vec![1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]);
    let catalan: Vec<u64> = (1..=10).map(|p| catalan_number(p).unwrap().to_u64().unwrap()).collect();
    assert_eq!(catalan, vec![1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796]);
}

proptest! {
    #[test]
    fn kernel_groups_equal_letters(values in prop::collection::vec(1usize..=5, 1..12)) {
        let pi = kernel(&IndexWord::new(5, values.clone()).unwrap());
        let labels = pi.block_labels();
        for i in 0..values.len() {
            for j in 0..values.len() {
                prop_assert_eq!(values[i] == values[j], labels[i] == labels[j]);
            }
        }
        prop_assert_eq!(SetPartition::from_labels(&values).unwrap(), pi);
    }

    #[test]
    fn random_partitions_match_peeling(labels in prop::collection::vec(0usize..4, 1..14)) {
        let pi = SetPartition::from_labels(&labels).unwrap();
        prop_assert_eq!(pi.is_noncrossing(), noncrossing_by_peeling(pi.blocks()));
        if pi.is_noncrossing() {
            prop_assert!(pi.has_interval_block());
        }
    }

    #[test]
    fn json_round_trip(labels in prop::collection::vec(0usize..4, 1..10)) {
        let pi = SetPartition::from_labels(&labels).unwrap();
        let json = serde_json::to_string(&pi).unwrap();
        prop_assert_eq!(serde_json::from_str::<SetPartition>(&json).unwrap(), pi);
    }
}
