//! Moment-cumulant sums over partition lattices.
//!
//! `free_moment(p, a) = Σ_{π ∈ NC(p)} Π_{B ∈ π} a_{|B|}` is the limit of the
//! normalized trace moments of a sample covariance matrix whose vectors have
//! cumulant data `a`. Summing over all partitions instead gives the classical
//! analogue, which is what the canonical-basis ensemble converges to.

use std::fmt::Debug;

use num_complex::Complex64;
use num_traits::Num;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{
    visit_noncrossing, visit_set_partitions, MAX_NONCROSSING_ORDER, MAX_SET_PARTITION_ORDER,
};

/// Field of coefficients accepted by the transforms.
pub trait Scalar: Copy + Num + Debug + Send + Sync {
    fn is_finite(&self) -> bool;
    fn from_f64(x: f64) -> Self;
    fn modulus(&self) -> f64;
}

impl Scalar for f64 {
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
}

fn check_finite<T: Scalar>(values: &[T], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::validation(format!("{what} must have at least one entry")));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!("{what} entry {} is not finite", k + 1)));
    }
    Ok(())
}

/// Free cumulants `a_1, …, a_K` (1-based in the accessors).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CumulantSequence<T = f64> {
    values: Vec<T>,
}

impl<T: Scalar> CumulantSequence<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_finite(&values, "cumulant sequence")?;
        Ok(CumulantSequence { values })
    }

    /// `a_k = value` for `k = 1, …, max_order`.
    pub fn constant(value: T, max_order: usize) -> Result<Self> {
        Self::new(vec![value; max_order])
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }

    /// `a_k`, 1-based.
    pub fn get(&self, k: usize) -> T {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `a_k ↦ c^k a_k`.
    pub fn dilate(&self, c: T) -> Self {
        let mut pow = T::one();
        let values = self
            .values
            .iter()
            .map(|&a| {
                pow = pow * c;
                pow * a
            })
            .collect();
        CumulantSequence { values }
    }
}

/// Moments `m_1, …, m_P` (1-based in the accessors).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MomentSequence<T = f64> {
    values: Vec<T>,
}

impl<T: Scalar> MomentSequence<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_finite(&values, "moment sequence")?;
        Ok(MomentSequence { values })
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, p: usize) -> T {
        self.values[p - 1]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

fn check_arity<T>(p: usize, a: &CumulantSequence<T>, cap: usize) -> Result<()> {
    if p == 0 || p > cap {
        return Err(Error::SizeLimit { what: "p", value: p, min: 1, max: cap });
    }
    if a.values.len() < p {
        return Err(Error::Arity { order: p, available: a.values.len() });
    }
    Ok(())
}

/// Σ_π Π_{B ∈ π} a_{|B|} with the sum over whatever `visit` enumerates.
fn partition_sum<T: Scalar>(
    p: usize,
    a: &[T],
    visit: impl FnOnce(usize, &mut dyn FnMut(&[usize])),
) -> T {
    let mut total = T::zero();
    let mut sizes = vec![0usize; p];
    visit(p, &mut |rgs: &[usize]| {
        sizes.iter_mut().for_each(|s| *s = 0);
        let mut nblocks = 0;
        for &b in rgs {
            sizes[b] += 1;
            nblocks = nblocks.max(b + 1);
        }
        let term = sizes[..nblocks].iter().fold(T::one(), |acc, &s| acc * a[s - 1]);
        total = total + term;
    });
    total
}

fn free_sum<T: Scalar>(p: usize, a: &[T]) -> T {
    partition_sum(p, a, |p, f| visit_noncrossing(p, f))
}

fn classical_sum<T: Scalar>(p: usize, a: &[T]) -> T {
    partition_sum(p, a, |p, f| visit_set_partitions(p, f))
}

/// `Σ_{π ∈ NC(p)} Π_{B ∈ π} a_{|B|}`, by direct enumeration.
pub fn free_moment<T: Scalar>(p: usize, a: &CumulantSequence<T>) -> Result<T> {
    check_arity(p, a, MAX_NONCROSSING_ORDER)?;
    Ok(free_sum(p, &a.values))
}

/// `free_moment(p, a)` for `p = 1, …, max_order`.
pub fn free_moments_up_to<T: Scalar>(
    max_order: usize,
    a: &CumulantSequence<T>,
) -> Result<MomentSequence<T>> {
    check_arity(max_order, a, MAX_NONCROSSING_ORDER)?;
    let values = (1..=max_order).map(|p| free_sum(p, &a.values)).collect();
    MomentSequence::new(values)
}

/// `Σ_{π ∈ P(p)} Π_{B ∈ π} a_{|B|}`: the classical moment-cumulant sum.
pub fn classical_moment<T: Scalar>(p: usize, a: &CumulantSequence<T>) -> Result<T> {
    check_arity(p, a, MAX_SET_PARTITION_ORDER)?;
    Ok(classical_sum(p, &a.values))
}

/// Inverts the free moment-cumulant relation.
///
/// The one-block partition is the only term of `m_p` involving `a_p`, and it
/// enters with coefficient 1, so `a_p = m_p − free_moment(p, a with a_p = 0)`.
pub fn free_cumulants_from_moments<T: Scalar>(m: &MomentSequence<T>) -> Result<CumulantSequence<T>> {
    let order = m.max_order();
    if order > MAX_NONCROSSING_ORDER {
        return Err(Error::SizeLimit {
            what: "moment order",
            value: order,
            min: 1,
            max: MAX_NONCROSSING_ORDER,
        });
    }
    let mut a = vec![T::zero(); order];
    for p in 1..=order {
        a[p - 1] = T::zero();
        let rest = free_sum(p, &a[..p]);
        a[p - 1] = m.get(p) - rest;
    }
    CumulantSequence::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> CumulantSequence {
        CumulantSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn free_moment_examples() {
        assert_eq!(free_moment(2, &seq(&[1.0, 1.0])).unwrap(), 2.0);
        assert_eq!(free_moment(4, &seq(&[1.0; 4])).unwrap(), 14.0);
        assert_eq!(free_moment(4, &seq(&[1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
    }

    #[test]
    fn batch_examples() {
        let m = free_moments_up_to(3, &seq(&[1.0; 3])).unwrap();
        assert_eq!(m.values(), &[1.0, 2.0, 5.0]);
        let c = 1.7;
        let m = free_moments_up_to(3, &seq(&[c, 0.0, 0.0])).unwrap();
        assert_eq!(m.values(), &[c, c * c, c * c * c]);
        let m = free_moments_up_to(4, &seq(&[2.0, 4.0, 8.0, 16.0])).unwrap();
        assert_eq!(m.values(), &[2.0, 8.0, 40.0, 224.0]);
    }

    #[test]
    fn classical_examples() {
        assert_eq!(classical_moment(4, &seq(&[1.0; 4])).unwrap(), 15.0);
        assert_eq!(classical_moment(2, &seq(&[1.0, 1.0])).unwrap(), 2.0);
        // 3 + 3·(2·1) + 1
        assert_eq!(classical_moment(3, &seq(&[1.0, 2.0, 3.0])).unwrap(), 10.0);
    }

    #[test]
    fn arity_and_range_errors() {
        assert!(matches!(
            free_moment(3, &seq(&[1.0, 1.0])),
            Err(Error::Arity { order: 3, available: 2 })
        ));
        assert!(matches!(classical_moment(2, &seq(&[1.0])), Err(Error::Arity { .. })));
        assert!(matches!(free_moment(0, &seq(&[1.0])), Err(Error::SizeLimit { .. })));
        assert!(matches!(free_moment(17, &seq(&[1.0; 17])), Err(Error::SizeLimit { .. })));
        assert!(matches!(classical_moment(15, &seq(&[1.0; 15])), Err(Error::SizeLimit { .. })));
        assert!(CumulantSequence::<f64>::new(vec![]).is_err());
        assert!(CumulantSequence::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn inverse_examples() {
        let m = MomentSequence::new(vec![1.0, 2.0, 5.0, 14.0]).unwrap();
        assert_eq!(free_cumulants_from_moments(&m).unwrap().values(), &[1.0; 4]);
        let c = -0.6;
        let m = MomentSequence::new(vec![c, c * c, c * c * c]).unwrap();
        let a = free_cumulants_from_moments(&m).unwrap();
        for (k, want) in [c, 0.0, 0.0].into_iter().enumerate() {
            assert!((a.values()[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn complex_cumulants() {
        let i = Complex64::new(0.0, 1.0);
        let a = CumulantSequence::new(vec![i, Complex64::new(1.0, 0.0)]).unwrap();
        // NC(2): {{1,2}} -> a_2 = 1, {{1},{2}} -> a_1^2 = -1.
        assert_eq!(free_moment(2, &a).unwrap(), Complex64::new(0.0, 0.0));
        let m = free_moments_up_to(2, &a).unwrap();
        let back = free_cumulants_from_moments(&m).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn dilation_multiplies_by_powers() {
        let a = seq(&[1.0, 2.0, 3.0]);
        assert_eq!(a.dilate(2.0).values(), &[2.0, 8.0, 24.0]);
    }
}
