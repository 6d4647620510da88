//! Set partitions of `{1, …, p}`, noncrossing partitions and word kernels.
//!
//! Partitions are kept in canonical form (blocks ordered by their smallest
//! element, elements ascending inside a block), so two partitions are equal
//! exactly when their block lists are equal. Enumeration walks restricted
//! growth strings in lexicographic order.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `p` for which all set partitions are materialized (Bell(14) ≈ 1.9e8).
pub const MAX_SET_PARTITION_ORDER: usize = 14;
/// Largest `p` for which noncrossing partitions are enumerated.
pub const MAX_NONCROSSING_ORDER: usize = 16;
/// Largest argument accepted by [`bell_number`] and [`catalan_number`].
pub const MAX_COUNT_ORDER: usize = 40;

/// A partition of `{1, …, p}` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct SetPartition {
    p: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition of `{1, …, p}` from arbitrary-order blocks.
    pub fn new(p: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if p == 0 {
            return Err(Error::validation("partition of an empty ground set"));
        }
        let mut seen = vec![false; p + 1];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::validation("empty block"));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x == 0 || x > p {
                    return Err(Error::validation(format!("element {x} outside 1..={p}")));
                }
                if seen[x] {
                    return Err(Error::validation(format!("element {x} appears twice")));
                }
                seen[x] = true;
            }
        }
        if let Some(missing) = (1..=p).find(|&x| !seen[x]) {
            return Err(Error::validation(format!("element {missing} is not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { p, blocks })
    }

    /// Partition whose blocks are the level sets of `labels` (position `i`
    /// is element `i + 1`). Any label alphabet works.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::validation("partition of an empty ground set"));
        }
        let mut reps: Vec<&T> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, label) in labels.iter().enumerate() {
            match reps.iter().position(|r| *r == label) {
                Some(b) => blocks[b].push(i + 1),
                None => {
                    reps.push(label);
                    blocks.push(vec![i + 1]);
                }
            }
        }
        // First-appearance order already is canonical order.
        Ok(SetPartition { p: labels.len(), blocks })
    }

    pub fn singletons(p: usize) -> Result<Self> {
        Self::new(p, (1..=p).map(|x| vec![x]).collect())
    }

    pub fn one_block(p: usize) -> Result<Self> {
        Self::new(p, vec![(1..=p).collect()])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Restricted growth string: entry `i` is the 0-based block index of element `i + 1`.
    pub fn block_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.p];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[x - 1] = b;
            }
        }
        labels
    }

    pub fn is_noncrossing(&self) -> bool {
        is_noncrossing(self)
    }

    pub fn has_interval_block(&self) -> bool {
        has_interval_block(self)
    }
}

impl TryFrom<Vec<Vec<usize>>> for SetPartition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let p = blocks.iter().flatten().copied().max().unwrap_or(0);
        SetPartition::new(p, blocks)
    }
}

impl From<SetPartition> for Vec<Vec<usize>> {
    fn from(pi: SetPartition) -> Self {
        pi.blocks
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// A word `j(1), …, j(p)` over the alphabet `{1, …, N}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexWord {
    universe: usize,
    values: Vec<usize>,
}

impl IndexWord {
    pub fn new(universe: usize, values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("index word must have length at least 1"));
        }
        if let Some(&bad) = values.iter().find(|&&v| v == 0 || v > universe) {
            return Err(Error::validation(format!("letter {bad} outside 1..={universe}")));
        }
        Ok(IndexWord { universe, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

/// `ker j`: positions `i` and `i'` share a block iff `j(i) = j(i')`.
pub fn kernel(word: &IndexWord) -> SetPartition {
    SetPartition::from_labels(word.values()).expect("index words are nonempty")
}

fn check_order(what: &'static str, p: usize, max: usize) -> Result<()> {
    if p == 0 || p > max {
        return Err(Error::SizeLimit { what, value: p, min: 1, max });
    }
    Ok(())
}

/// Calls `visit` with the restricted growth string of every partition of
/// `{1, …, p}`, in lexicographic order. No size guard; callers pick their own.
pub fn visit_set_partitions(p: usize, mut visit: impl FnMut(&[usize])) {
    if p == 0 {
        return;
    }
    let mut rgs = vec![0usize; p];
    fn go(i: usize, max: usize, rgs: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if i == rgs.len() {
            visit(rgs);
            return;
        }
        for b in 0..=max + 1 {
            rgs[i] = b;
            go(i + 1, max.max(b), rgs, visit);
        }
    }
    // rgs[0] = 0 is fixed; `max` is the largest label used so far.
    go(1, 0, &mut rgs, &mut visit);
}

/// Same as [`visit_set_partitions`] restricted to noncrossing partitions,
/// which are generated directly rather than filtered.
pub fn visit_noncrossing(p: usize, mut visit: impl FnMut(&[usize])) {
    if p == 0 {
        return;
    }
    let mut rgs = vec![0usize; p];
    // first[b], last[b]: smallest / largest position currently in block b.
    let mut first = vec![0usize; p];
    let mut last = vec![0usize; p];

    struct State<'a> {
        rgs: &'a mut [usize],
        first: &'a mut [usize],
        last: &'a mut [usize],
    }

    fn go(i: usize, nblocks: usize, st: &mut State<'_>, visit: &mut dyn FnMut(&[usize])) {
        if i == st.rgs.len() {
            visit(st.rgs);
            return;
        }
        for b in 0..=nblocks {
            if b < nblocks {
                // Joining block b is safe iff every position strictly between its
                // last element and i belongs to a block opened after that element.
                let l = st.last[b];
                if ((l + 1)..i).any(|x| st.first[st.rgs[x]] < l) {
                    continue;
                }
                st.rgs[i] = b;
                st.last[b] = i;
                go(i + 1, nblocks, st, visit);
                st.last[b] = l;
            } else {
                st.rgs[i] = b;
                st.first[b] = i;
                st.last[b] = i;
                go(i + 1, nblocks + 1, st, visit);
            }
        }
    }

    let mut st = State { rgs: &mut rgs, first: &mut first, last: &mut last };
    go(1, 1, &mut st, &mut visit);
}

/// All `Bell(p)` partitions of `{1, …, p}` in restricted-growth lexicographic order.
pub fn enumerate_set_partitions(p: usize) -> Result<Vec<SetPartition>> {
    check_order("p", p, MAX_SET_PARTITION_ORDER)?;
    let mut out = Vec::new();
    visit_set_partitions(p, |rgs| out.push(SetPartition::from_labels(rgs).expect("p >= 1")));
    Ok(out)
}

/// All `Catalan(p)` noncrossing partitions of `{1, …, p}`, in the same order
/// they appear in [`enumerate_set_partitions`].
pub fn enumerate_noncrossing(p: usize) -> Result<Vec<SetPartition>> {
    check_order("p", p, MAX_NONCROSSING_ORDER)?;
    let mut out = Vec::new();
    visit_noncrossing(p, |rgs| out.push(SetPartition::from_labels(rgs).expect("p >= 1")));
    Ok(out)
}

/// False iff some `a < b < c < d` has `a, c` in one block and `b, d` in another.
pub fn is_noncrossing(pi: &SetPartition) -> bool {
    let labels = pi.block_labels();
    let lo: Vec<usize> = pi.blocks.iter().map(|b| b[0]).collect();
    let hi: Vec<usize> = pi.blocks.iter().map(|b| b[b.len() - 1]).collect();
    // Noncrossing iff every element strictly between two consecutive elements
    // x < y of a block lies in a block contained in (x, y).
    for block in &pi.blocks {
        for w in block.windows(2) {
            let (x, y) = (w[0], w[1]);
            for z in (x + 1)..y {
                let c = labels[z - 1];
                if lo[c] < x || hi[c] > y {
                    return false;
                }
            }
        }
    }
    true
}

/// True iff some block is a run of consecutive integers.
pub fn has_interval_block(pi: &SetPartition) -> bool {
    pi.blocks.iter().any(|b| b[b.len() - 1] - b[0] + 1 == b.len())
}

/// Bell number via the Bell triangle.
pub fn bell_number(p: usize) -> Result<BigUint> {
    if p > MAX_COUNT_ORDER {
        return Err(Error::SizeLimit { what: "p", value: p, min: 0, max: MAX_COUNT_ORDER });
    }
    if p == 0 {
        return Ok(BigUint::one());
    }
    let mut row = vec![BigUint::one()];
    for _ in 1..p {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().expect("rows are nonempty").clone());
        for x in &row {
            let v = next.last().expect("just pushed") + x;
            next.push(v);
        }
        row = next;
    }
    Ok(row.pop().expect("rows are nonempty"))
}

/// Catalan number via `C_{k+1} = C_k · 2(2k+1) / (k+2)`.
pub fn catalan_number(p: usize) -> Result<BigUint> {
    if p > MAX_COUNT_ORDER {
        return Err(Error::SizeLimit { what: "p", value: p, min: 0, max: MAX_COUNT_ORDER });
    }
    let mut c = BigUint::one();
    for k in 0..p {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    debug_assert!(!c.is_zero());
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(blocks: &[&[usize]]) -> SetPartition {
        let p = blocks.iter().flat_map(|b| b.iter()).copied().max().unwrap();
        SetPartition::new(p, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn canonicalizes_on_construction() {
        let a = SetPartition::new(4, vec![vec![4, 2], vec![3, 1]]).unwrap();
        assert_eq!(a.blocks(), &[vec![1, 3], vec![2, 4]]);
        assert_eq!(a, part(&[&[1, 3], &[2, 4]]));
        assert_eq!(a.to_string(), "{{1,3},{2,4}}");
        assert_eq!(a.block_labels(), vec![0, 1, 0, 1]);
    }

    #[test]
    fn rejects_invalid_partitions() {
        assert!(SetPartition::new(0, vec![]).is_err());
        assert!(SetPartition::new(3, vec![vec![1, 2]]).is_err());
        assert!(SetPartition::new(3, vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(SetPartition::new(2, vec![vec![1, 2], vec![]]).is_err());
        assert!(SetPartition::new(2, vec![vec![1, 3]]).is_err());
    }

    #[test]
    fn json_is_a_sorted_block_list() {
        let pi = SetPartition::new(4, vec![vec![4, 2], vec![1, 3]]).unwrap();
        assert_eq!(serde_json::to_string(&pi).unwrap(), "[[1,3],[2,4]]");
        let back: SetPartition = serde_json::from_str("[[2,4],[3,1]]").unwrap();
        assert_eq!(back, pi);
        assert!(serde_json::from_str::<SetPartition>("[[1,1]]").is_err());
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_set_partitions(1).unwrap(), vec![part(&[&[1]])]);
        assert_eq!(enumerate_set_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_set_partitions(4).unwrap().len(), 15);
        assert_eq!(
            enumerate_noncrossing(2).unwrap(),
            vec![part(&[&[1, 2]]), part(&[&[1], &[2]])]
        );
        let nc4 = enumerate_noncrossing(4).unwrap();
        assert_eq!(nc4.len(), 14);
        assert!(!nc4.contains(&part(&[&[1, 3], &[2, 4]])));
        assert_eq!(enumerate_noncrossing(6).unwrap().len(), 132);
    }

    #[test]
    fn enumeration_limits() {
        assert!(matches!(enumerate_set_partitions(0), Err(Error::SizeLimit { .. })));
        assert!(matches!(enumerate_set_partitions(15), Err(Error::SizeLimit { .. })));
        assert!(matches!(enumerate_noncrossing(17), Err(Error::SizeLimit { .. })));
        assert!(bell_number(41).is_err());
        assert!(catalan_number(41).is_err());
    }

    #[test]
    fn crossing_and_interval_examples() {
        let crossing = part(&[&[1, 3], &[2, 4]]);
        let nested = part(&[&[1, 4], &[2, 3]]);
        assert!(!is_noncrossing(&crossing));
        assert!(is_noncrossing(&nested));
        assert!(!has_interval_block(&crossing));
        assert!(has_interval_block(&nested));
        for p in 1..=8 {
            assert!(is_noncrossing(&SetPartition::singletons(p).unwrap()));
            assert!(is_noncrossing(&SetPartition::one_block(p).unwrap()));
        }
    }

    #[test]
    fn kernel_examples() {
        let k = |n, v: &[usize]| kernel(&IndexWord::new(n, v.to_vec()).unwrap());
        assert_eq!(k(7, &[7, 3, 7]), part(&[&[1, 3], &[2]]));
        assert_eq!(k(5, &[5, 5, 5, 5]), part(&[&[1, 2, 3, 4]]));
        let crossing = k(2, &[1, 2, 1, 2]);
        assert_eq!(crossing, part(&[&[1, 3], &[2, 4]]));
        assert!(!crossing.is_noncrossing());
        assert!(IndexWord::new(3, vec![]).is_err());
        assert!(IndexWord::new(3, vec![4]).is_err());
        assert!(IndexWord::new(3, vec![0]).is_err());
    }

    #[test]
    fn counting_examples() {
        assert_eq!(bell_number(0).unwrap(), BigUint::from(1u32));
        assert_eq!(bell_number(1).unwrap(), BigUint::from(1u32));
        assert_eq!(bell_number(4).unwrap(), BigUint::from(15u32));
        assert_eq!(bell_number(10).unwrap(), BigUint::from(115_975u32));
        assert_eq!(catalan_number(0).unwrap(), BigUint::from(1u32));
        assert_eq!(catalan_number(1).unwrap(), BigUint::from(1u32));
        assert_eq!(catalan_number(4).unwrap(), BigUint::from(14u32));
        assert_eq!(catalan_number(8).unwrap(), BigUint::from(1430u32));
    }
}
