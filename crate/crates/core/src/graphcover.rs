//! Two-cover set systems and the counting inequalities about them.
//!
//! A two-cover system is a family `S_1, …, S_r` of subsets of a ground set `E`
//! in which every element lies in exactly two members. That is the same data
//! as a loopless multigraph on `{1, …, r}`: ground elements are edges and
//! `S_k` is the set of edges at vertex `k`.
//!
//! The checkers relabel the sets in ascending size order (stable on ties) and
//! work with the residuals `|S_k \ (S_1 ∪ … ∪ S_{k-1})|`. Index sets `Λ` and
//! the cutoff `k0` refer to positions in that sorted order, 1-based.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seeding::{self, stream};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoCoverSystem {
    ground_size: usize,
    /// `sets[k]` holds 0-based ground element ids.
    sets: Vec<BTreeSet<usize>>,
}

impl TwoCoverSystem {
    /// Builds a system from explicit sets over `{0, …, ground_size - 1}`,
    /// checking that every element is covered exactly twice.
    pub fn from_sets(ground_size: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        let mut cover = vec![0usize; ground_size];
        for set in &sets {
            for &e in set {
                if e >= ground_size {
                    return Err(Error::validation(format!(
                        "element {e} outside ground set of size {ground_size}"
                    )));
                }
                cover[e] += 1;
            }
        }
        if let Some(e) = cover.iter().position(|&c| c != 2) {
            return Err(Error::validation(format!(
                "element {e} lies in {} sets, expected exactly 2",
                cover[e]
            )));
        }
        Ok(TwoCoverSystem { ground_size, sets })
    }

    pub fn r(&self) -> usize {
        self.sets.len()
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn set_sizes(&self) -> Vec<usize> {
        self.sets.iter().map(BTreeSet::len).collect()
    }

    /// Edge list (1-based vertices) of the equivalent multigraph.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut ends = vec![Vec::with_capacity(2); self.ground_size];
        for (k, set) in self.sets.iter().enumerate() {
            for &e in set {
                ends[e].push(k + 1);
            }
        }
        ends.into_iter().map(|v| (v[0], v[1])).collect()
    }

    /// Set indices (0-based) in ascending size order, ties by original index.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.sets.len()).collect();
        order.sort_by_key(|&k| self.sets[k].len());
        order
    }

    /// Set sizes in sorted order.
    pub fn sorted_sizes(&self) -> Vec<usize> {
        self.sorted_order().into_iter().map(|k| self.sets[k].len()).collect()
    }
}

/// Loopless multigraph on vertices `{1, …, r}` as a two-cover system.
pub fn from_multigraph(r: usize, edges: &[(usize, usize)]) -> Result<TwoCoverSystem> {
    if r == 0 {
        return Err(Error::validation("a two-cover system needs at least one set"));
    }
    let mut sets = vec![BTreeSet::new(); r];
    for (e, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            return Err(Error::validation(format!("loop at vertex {u}")));
        }
        if u == 0 || v == 0 || u > r || v > r {
            return Err(Error::validation(format!("edge ({u},{v}) outside 1..={r}")));
        }
        sets[u - 1].insert(e);
        sets[v - 1].insert(e);
    }
    Ok(TwoCoverSystem { ground_size: edges.len(), sets })
}

/// `|S_k \ (S_1 ∪ … ∪ S_{k-1})|` for `k = 1, …, r` in sorted order.
pub fn sorted_residuals(sys: &TwoCoverSystem) -> Vec<usize> {
    let mut covered = vec![false; sys.ground_size];
    sys.sorted_order()
        .into_iter()
        .map(|k| {
            let mut fresh = 0;
            for &e in &sys.sets[k] {
                if !covered[e] {
                    covered[e] = true;
                    fresh += 1;
                }
            }
            fresh
        })
        .collect()
}

/// Outcome of checking one inequality (or identity) on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl LemmaReport {
    fn inequality(lhs: f64, rhs: f64) -> Self {
        LemmaReport { holds: lhs >= rhs, lhs, rhs, witness: None }
    }

    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

/// Sorted set sizes and residuals of one system, computed once and reused
/// across many `(t, Λ, k0)` checks. `Λ` is a bitmask here: bit `k - 1` set
/// means sorted position `k` is in `Λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedProfile {
    pub sizes: Vec<usize>,
    pub residuals: Vec<usize>,
}

impl SortedProfile {
    pub fn new(sys: &TwoCoverSystem) -> Self {
        SortedProfile { sizes: sys.sorted_sizes(), residuals: sorted_residuals(sys) }
    }

    pub fn r(&self) -> usize {
        self.sizes.len()
    }

    fn smallest(&self) -> f64 {
        self.sizes.first().copied().unwrap_or(0) as f64
    }

    fn residual_sum(&self, mask: u64) -> f64 {
        (0..self.r()).filter(|k| mask >> k & 1 == 1).map(|k| self.residuals[k]).sum::<usize>() as f64
    }

    pub fn lemma21(&self, t: f64) -> LemmaReport {
        let lhs: f64 = self.residuals.iter().map(|&x| t.min(x as f64)).sum();
        let rhs = t.min(self.smallest()) / 2.0 * self.r() as f64;
        LemmaReport::inequality(lhs, rhs)
    }

    pub fn lemma23(&self, mask: u64, k0: usize) -> LemmaReport {
        let mut balance = 0i64;
        for k in 0..k0 - 1 {
            let size = self.sizes[k] as i64;
            balance += if mask >> k & 1 == 1 { size } else { -size };
        }
        LemmaReport::inequality(self.residual_sum(mask), balance as f64 / 2.0)
    }

    pub fn lemma25(&self, mask: u64) -> LemmaReport {
        let inside = mask.count_ones() as f64;
        let balance = inside - (self.r() as f64 - inside);
        LemmaReport::inequality(self.residual_sum(mask), self.smallest() * balance / 2.0)
    }
}

/// `Σ_k min(t, residual_k) ≥ (min(t, |S_1|) / 2) · r`.
pub fn check_lemma21(sys: &TwoCoverSystem, t: f64) -> Result<LemmaReport> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::validation(format!("t must be a finite nonnegative number, got {t}")));
    }
    Ok(SortedProfile::new(sys).lemma21(t))
}

/// Handshake identity `|E| = ½ Σ_k |S_k|`.
pub fn check_lemma22(sys: &TwoCoverSystem) -> LemmaReport {
    let lhs = sys.ground_size as f64;
    let rhs = sys.set_sizes().iter().sum::<usize>() as f64 / 2.0;
    LemmaReport { holds: lhs == rhs, lhs, rhs, witness: None }
}

fn index_mask(lambda: &BTreeSet<usize>, r: usize) -> Result<u64> {
    if r > 63 {
        return Err(Error::SizeLimit { what: "r", value: r, min: 1, max: 63 });
    }
    lambda.iter().try_fold(0u64, |mask, &k| {
        if k == 0 || k > r {
            Err(Error::validation(format!("index {k} outside 1..={r}")))
        } else {
            Ok(mask | 1 << (k - 1))
        }
    })
}

fn check_index_set(lambda: &BTreeSet<usize>, r: usize) -> Result<()> {
    match lambda.iter().find(|&&k| k == 0 || k > r) {
        Some(k) => Err(Error::validation(format!("index {k} outside 1..={r}"))),
        None => Ok(()),
    }
}

/// `Σ_{k ∈ Λ} residual_k ≥ ½ (Σ_{k < k0, k ∈ Λ} |S_k| − Σ_{k < k0, k ∉ Λ} |S_k|)`.
pub fn check_lemma23(sys: &TwoCoverSystem, lambda: &BTreeSet<usize>, k0: usize) -> Result<LemmaReport> {
    let r = sys.r();
    let mask = index_mask(lambda, r)?;
    if k0 == 0 || k0 > r {
        return Err(Error::validation(format!("k0 = {k0} outside 1..={r}")));
    }
    Ok(SortedProfile::new(sys).lemma23(mask, k0))
}

/// `Σ_{k ∈ Λ} residual_k ≥ ½ |S_1| (|Λ| − |Λᶜ|)`.
pub fn check_lemma25(sys: &TwoCoverSystem, lambda: &BTreeSet<usize>) -> Result<LemmaReport> {
    let mask = index_mask(lambda, sys.r())?;
    Ok(SortedProfile::new(sys).lemma25(mask))
}

/// True iff `|[l, m] ∩ Λ1| ≤ |[l, m] ∩ Λ2|` for every `l ∈ {1, …, m}`.
pub fn matching_precondition(m: usize, from: &BTreeSet<usize>, to: &BTreeSet<usize>) -> bool {
    let (mut a, mut b) = (0usize, 0usize);
    for l in (1..=m).rev() {
        a += usize::from(from.contains(&l));
        b += usize::from(to.contains(&l));
        if a > b {
            return false;
        }
    }
    true
}

/// Sends the i-th largest element of `from` to the i-th largest element of
/// `to`. Refuses when the tail-count precondition fails.
pub fn build_matching_lemma24(
    m: usize,
    from: &BTreeSet<usize>,
    to: &BTreeSet<usize>,
) -> Result<BTreeMap<usize, usize>> {
    if m == 0 {
        return Err(Error::validation("m must be at least 1"));
    }
    for set in [from, to] {
        check_index_set(set, m)?;
    }
    if !matching_precondition(m, from, to) {
        let l = (1..=m)
            .rev()
            .find(|&l| from.range(l..).count() > to.range(l..).count())
            .expect("precondition failed somewhere");
        return Err(Error::Precondition(format!(
            "|[{l},{m}] ∩ Λ1| = {} > {} = |[{l},{m}] ∩ Λ2|",
            from.range(l..).count(),
            to.range(l..).count()
        )));
    }
    Ok(from.iter().rev().zip(to.iter().rev()).map(|(&k, &v)| (k, v)).collect())
}

/// Checks the matching on one `(m, Λ1, Λ2)` instance: when the precondition
/// holds the map must be strictly increasing with `f(k) ≥ k`; when it fails the
/// builder must refuse.
pub fn check_lemma24(m: usize, from: &BTreeSet<usize>, to: &BTreeSet<usize>) -> LemmaReport {
    let expected = matching_precondition(m, from, to);
    match build_matching_lemma24(m, from, to) {
        Ok(f) => {
            let increasing = f.values().zip(f.values().skip(1)).all(|(a, b)| a < b);
            let dominating = f.iter().all(|(k, v)| v >= k);
            let total = f.len() == from.len() && f.values().all(|v| to.contains(v));
            let min_gap = f.iter().map(|(k, v)| *v as f64 - *k as f64).fold(f64::INFINITY, f64::min);
            let min_gap = if min_gap.is_finite() { min_gap } else { 0.0 };
            LemmaReport {
                holds: expected && increasing && dominating && total,
                lhs: min_gap,
                rhs: 0.0,
                witness: None,
            }
        }
        Err(_) => LemmaReport { holds: !expected, lhs: 0.0, rhs: 0.0, witness: None },
    }
}

/// `m` edges, each uniform over unordered pairs of distinct vertices of `{1, …, r}`.
pub fn random_two_cover(r: usize, m: usize, seed: u64) -> Result<TwoCoverSystem> {
    if r < 2 || m == 0 {
        return Err(Error::validation(format!("need r >= 2 and m >= 1, got r = {r}, m = {m}")));
    }
    let mut rng = seeding::child_rng(seed, stream::GRAPH, 0);
    let edges: Vec<(usize, usize)> = (0..m)
        .map(|_| {
            let u = rng.random_range(1..=r);
            let mut v = rng.random_range(1..r);
            if v >= u {
                v += 1;
            }
            (u.min(v), u.max(v))
        })
        .collect();
    from_multigraph(r, &edges)
}

pub const MAX_SMALL_VERTICES: usize = 4;
pub const MAX_SMALL_EDGES: usize = 6;

/// Every loopless multigraph on exactly `r_max` labelled vertices with between
/// 1 and `m_max` edges (edge multisets, so parallel edges are allowed).
pub fn enumerate_small_multigraphs(r_max: usize, m_max: usize) -> Result<Vec<TwoCoverSystem>> {
    if !(2..=MAX_SMALL_VERTICES).contains(&r_max) {
        return Err(Error::SizeLimit { what: "r_max", value: r_max, min: 2, max: MAX_SMALL_VERTICES });
    }
    if !(1..=MAX_SMALL_EDGES).contains(&m_max) {
        return Err(Error::SizeLimit { what: "m_max", value: m_max, min: 1, max: MAX_SMALL_EDGES });
    }
    let pairs: Vec<(usize, usize)> = (1..=r_max)
        .flat_map(|u| ((u + 1)..=r_max).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    let mut edges = Vec::new();
    fn go(
        start: usize,
        pairs: &[(usize, usize)],
        m_max: usize,
        r: usize,
        edges: &mut Vec<(usize, usize)>,
        out: &mut Vec<TwoCoverSystem>,
    ) {
        if !edges.is_empty() {
            out.push(from_multigraph(r, edges).expect("pairs are loopless"));
        }
        if edges.len() == m_max {
            return;
        }
        // Nondecreasing pair index enumerates multisets once each.
        for i in start..pairs.len() {
            edges.push(pairs[i]);
            go(i, pairs, m_max, r, edges, out);
            edges.pop();
        }
    }
    go(0, &pairs, m_max, r_max, &mut edges, &mut out);
    Ok(out)
}

/// All subsets of `{1, …, r}`.
pub fn all_index_sets(r: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (0u64..(1u64 << r)).map(move |mask| (1..=r).filter(|&k| mask >> (k - 1) & 1 == 1).collect())
}
