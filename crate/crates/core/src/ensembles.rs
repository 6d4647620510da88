//! Random vector ensembles and estimators for the convergence hypotheses.
//!
//! The hypotheses are, for vectors `f_1, …, f_N` in `ℂ^n`:
//!
//! * marginal fourth moments `sup_{x ∈ S^{n-1}} E|⟨f, x⟩|⁴ ≤ L / n²`,
//! * bounded norm moments `E‖f‖^k ≤ L_k`,
//! * `‖Σ_j E‖f_j‖^{2(k-1)} f_j f_j* − a_k I‖ ≤ C n^{-ε}`, which pins down the
//!   cumulants `a_k` of the limit.
//!
//! Every shipped ensemble is i.i.d. across `j` and rotation invariant in
//! distribution except [`EnsembleKind::CanonicalBasis`], which satisfies the
//! last two hypotheses but not the first.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freemoments::CumulantSequence;
use crate::linalg::{self, CVector};
use crate::seeding::{self, stream, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::validation(format!("unknown field {other:?}"))),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// Uniform on the unit sphere.
    UnitSphere,
    /// Uniform on the standard basis `e_1, …, e_n`.
    CanonicalBasis,
    /// `g / √n` with i.i.d. standard Gaussian entries.
    GaussianScaled,
    /// `r · u` with `u` uniform on the sphere and `r` drawn from a finite law.
    RadialMixture { radii: Vec<f64>, probabilities: Vec<f64> },
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::UnitSphere => "unit-sphere",
            EnsembleKind::CanonicalBasis => "canonical-basis",
            EnsembleKind::GaussianScaled => "gaussian-scaled",
            EnsembleKind::RadialMixture { .. } => "radial-mixture",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    #[serde(default)]
    pub field: Field,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, field: Field) -> Result<Self> {
        let spec = EnsembleSpec { kind, field };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit_sphere(field: Field) -> Self {
        EnsembleSpec { kind: EnsembleKind::UnitSphere, field }
    }

    pub fn canonical_basis(field: Field) -> Self {
        EnsembleSpec { kind: EnsembleKind::CanonicalBasis, field }
    }

    pub fn gaussian_scaled(field: Field) -> Self {
        EnsembleSpec { kind: EnsembleKind::GaussianScaled, field }
    }

    pub fn radial_mixture(radii: Vec<f64>, probabilities: Vec<f64>, field: Field) -> Result<Self> {
        Self::new(EnsembleKind::RadialMixture { radii, probabilities }, field)
    }

    pub fn validate(&self) -> Result<()> {
        if let EnsembleKind::RadialMixture { radii, probabilities } = &self.kind {
            if radii.is_empty() || radii.len() != probabilities.len() {
                return Err(Error::validation(format!(
                    "radial mixture needs matching nonempty radii and probabilities, got {} and {}",
                    radii.len(),
                    probabilities.len()
                )));
            }
            if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                return Err(Error::validation(format!("radius {r} is not positive")));
            }
            if let Some(q) = probabilities.iter().find(|q| !(q.is_finite() && **q >= 0.0)) {
                return Err(Error::validation(format!("probability {q} is negative")));
            }
            let total: f64 = probabilities.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::validation(format!("probabilities sum to {total}, not 1")));
            }
        }
        Ok(())
    }

    /// `E r^{2k}` of the radial law (`1` for the unit-norm ensembles).
    fn radial_moment(&self, k: usize) -> f64 {
        match &self.kind {
            EnsembleKind::RadialMixture { radii, probabilities } => radii
                .iter()
                .zip(probabilities)
                .map(|(r, q)| q * r.powi(2 * k as i32))
                .sum(),
            _ => 1.0,
        }
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.kind.name(), self.field)
    }
}

fn gaussian_entry(field: Field, rng: &mut Rng) -> Complex64 {
    match field {
        Field::Real => Complex64::new(StandardNormal.sample(rng), 0.0),
        Field::Complex => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

pub(crate) fn gaussian_vector(n: usize, field: Field, rng: &mut Rng) -> CVector {
    DVector::from_fn(n, |_, _| gaussian_entry(field, rng))
}

pub(crate) fn sphere_vector(n: usize, field: Field, rng: &mut Rng) -> CVector {
    loop {
        let g = gaussian_vector(n, field, rng);
        let norm = g.norm();
        if norm > 0.0 {
            return g.unscale(norm);
        }
    }
}

fn sample_one(spec: &EnsembleSpec, n: usize, rng: &mut Rng) -> CVector {
    match &spec.kind {
        EnsembleKind::UnitSphere => sphere_vector(n, spec.field, rng),
        EnsembleKind::CanonicalBasis => {
            let i = rng.random_range(0..n);
            let mut e = CVector::zeros(n);
            e[i] = Complex64::new(1.0, 0.0);
            e
        }
        EnsembleKind::GaussianScaled => gaussian_vector(n, spec.field, rng).unscale((n as f64).sqrt()),
        EnsembleKind::RadialMixture { radii, probabilities } => {
            // Direction first so a single-radius mixture reproduces the sphere draw.
            let u = sphere_vector(n, spec.field, rng);
            let x: f64 = rng.random();
            let mut acc = 0.0;
            let mut radius = radii[radii.len() - 1];
            for (r, q) in radii.iter().zip(probabilities) {
                acc += q;
                if x < acc {
                    radius = *r;
                    break;
                }
            }
            u.scale(radius)
        }
    }
}

/// `count` independent vectors in dimension `n`; vector `j` depends only on `(seed, j)`.
pub fn sample_vectors(spec: &EnsembleSpec, n: usize, count: usize, seed: u64) -> Result<Vec<CVector>> {
    spec.validate()?;
    if n == 0 || count == 0 {
        return Err(Error::validation(format!("need n >= 1 and N >= 1, got n = {n}, N = {count}")));
    }
    Ok((0..count)
        .map(|j| {
            let mut rng = seeding::child_rng(seed, stream::VECTOR, j as u64);
            sample_one(spec, n, &mut rng)
        })
        .collect())
}

/// Limit cumulants `a_1, …, a_{k_max}` at aspect ratio `λ = lim n / N`.
pub fn predicted_cumulants(spec: &EnsembleSpec, lambda: f64, k_max: usize) -> Result<CumulantSequence> {
    spec.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::validation(format!("λ must be positive, got {lambda}")));
    }
    if k_max == 0 {
        return Err(Error::validation("k_max must be at least 1"));
    }
    if spec.kind == EnsembleKind::CanonicalBasis && lambda != 1.0 {
        return Err(Error::Unsupported(format!(
            "canonical-basis ensemble is only modelled at λ = 1, got {lambda}"
        )));
    }
    // E‖f‖^{2(k-1)} f f* = E r^{2k} · I / n, summed over N = n / λ vectors.
    CumulantSequence::new((1..=k_max).map(|k| spec.radial_moment(k) / lambda).collect())
}

fn check_samples(samples: usize, min: usize) -> Result<()> {
    if samples < min {
        return Err(Error::validation(format!("need at least {min} samples, got {samples}")));
    }
    Ok(())
}

/// `n² · max_x mean |⟨f, x⟩|⁴` over the canonical directions plus
/// `n_directions` uniform random unit vectors of `ℂ^n`.
///
/// This is a lower bound on `n² sup_x E|⟨f, x⟩|⁴`: the supremum over the whole
/// sphere is not computed.
pub fn estimate_l4_constant(
    spec: &EnsembleSpec,
    n: usize,
    n_directions: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_samples(samples, 100)?;
    let vectors = sample_vectors(spec, n, samples, seed)?;
    let directions: Vec<CVector> = (0..n_directions)
        .map(|d| {
            let mut rng = seeding::child_rng(seed, stream::DIRECTION, d as u64);
            sphere_vector(n, Field::Complex, &mut rng)
        })
        .collect();
    let mut canonical = vec![0.0; n];
    let mut random = vec![0.0; n_directions];
    for f in &vectors {
        for (acc, z) in canonical.iter_mut().zip(f.iter()) {
            *acc += z.norm_sqr().powi(2);
        }
        for (acc, x) in random.iter_mut().zip(&directions) {
            *acc += linalg::inner(f, x).norm_sqr().powi(2);
        }
    }
    let best = canonical.iter().chain(&random).fold(0.0f64, |a, &b| a.max(b));
    Ok((n * n) as f64 * best / samples as f64)
}

/// Sample means of `‖f‖^k` for `k = 1, …, k_max`.
pub fn estimate_norm_moments(
    spec: &EnsembleSpec,
    n: usize,
    k_max: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_samples(samples, 100)?;
    let vectors = sample_vectors(spec, n, samples, seed)?;
    let mut sums = vec![0.0; k_max];
    for f in &vectors {
        let norm = f.norm();
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            pow *= norm;
            *s += pow;
        }
    }
    Ok(sums.into_iter().map(|s| s / samples as f64).collect())
}

/// Operator norm of `mean_trials[Σ_j ‖f_j‖^{2(k-1)} f_j f_j*] − a_k I`, with
/// `a_k` the predicted cumulant at `λ = n / N`.
pub fn estimate_cumulant_deviation(
    spec: &EnsembleSpec,
    n: usize,
    count: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_samples(samples, 50)?;
    if k == 0 {
        return Err(Error::validation("cumulant order k must be at least 1"));
    }
    let a_k = predicted_cumulants(spec, n as f64 / count as f64, k)?.get(k);
    let mut total = linalg::CMatrix::zeros(n, n);
    for s in 0..samples {
        let vectors = sample_vectors(spec, n, count, seeding::derive(seed, stream::TRIAL, s as u64))?;
        let weights: Vec<f64> = vectors.iter().map(|f| f.norm_squared().powi(k as i32 - 1)).collect();
        total += linalg::weighted_gram(n, &vectors, Some(&weights));
    }
    total.unscale_mut(samples as f64);
    for i in 0..n {
        total[(i, i)] -= a_k;
    }
    let eig = linalg::hermitian_eigenvalues(&total)?;
    Ok(eig.iter().fold(0.0f64, |a, x| a.max(x.abs())))
}

/// Sample sizes used by [`hypothesis_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisBudget {
    pub l4_samples: usize,
    pub l4_directions: usize,
    pub norm_samples: usize,
    pub deviation_samples: usize,
}

impl Default for HypothesisBudget {
    fn default() -> Self {
        HypothesisBudget { l4_samples: 4000, l4_directions: 32, norm_samples: 4000, deviation_samples: 50 }
    }
}

/// Estimates of the hypothesis constants for one `(n, N)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub ensemble: EnsembleSpec,
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub l4_constant: f64,
    pub norm_moment_bounds: Vec<f64>,
    pub cumulant_deviations: Vec<f64>,
    pub budget: HypothesisBudget,
    pub seed: u64,
}

/// Runs all three hypothesis estimators for orders `k = 1, …, k_max`.
pub fn hypothesis_report(
    spec: &EnsembleSpec,
    n: usize,
    count: usize,
    k_max: usize,
    budget: HypothesisBudget,
    seed: u64,
) -> Result<HypothesisReport> {
    let l4_constant = estimate_l4_constant(
        spec,
        n,
        budget.l4_directions,
        budget.l4_samples,
        seeding::derive(seed, stream::GRID, 1),
    )?;
    let norm_moment_bounds =
        estimate_norm_moments(spec, n, k_max, budget.norm_samples, seeding::derive(seed, stream::GRID, 2))?;
    let cumulant_deviations = (1..=k_max)
        .map(|k| {
            estimate_cumulant_deviation(
                spec,
                n,
                count,
                k,
                budget.deviation_samples,
                seeding::derive(seed, stream::GRID, 2 + k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HypothesisReport {
        ensemble: spec.clone(),
        n,
        count,
        l4_constant,
        norm_moment_bounds,
        cumulant_deviations,
        budget,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_vectors_are_basis_vectors() {
        let spec = EnsembleSpec::canonical_basis(Field::Complex);
        for f in sample_vectors(&spec, 4, 3, 11).unwrap() {
            let ones: Vec<_> = f.iter().filter(|z| **z == Complex64::new(1.0, 0.0)).collect();
            let zeros = f.iter().filter(|z| **z == Complex64::new(0.0, 0.0)).count();
            assert_eq!((ones.len(), zeros), (1, 3));
        }
    }

    #[test]
    fn sphere_vectors_have_unit_norm() {
        for field in [Field::Real, Field::Complex] {
            for f in sample_vectors(&EnsembleSpec::unit_sphere(field), 100, 10, 5).unwrap() {
                assert!((f.norm() - 1.0).abs() <= 1e-12);
                if field == Field::Real {
                    assert!(f.iter().all(|z| z.im == 0.0));
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable() {
        let spec = EnsembleSpec::gaussian_scaled(Field::Complex);
        let a = sample_vectors(&spec, 16, 5, 42).unwrap();
        assert_eq!(a, sample_vectors(&spec, 16, 5, 42).unwrap());
        assert_eq!(a[..3], sample_vectors(&spec, 16, 3, 42).unwrap()[..]);
        assert_ne!(a, sample_vectors(&spec, 16, 5, 43).unwrap());
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::radial_mixture(vec![1.0, 2.0], vec![0.5, 0.5], Field::Real).is_ok());
        assert!(EnsembleSpec::radial_mixture(vec![1.0, 2.0], vec![0.5, 0.6], Field::Real).is_err());
        assert!(EnsembleSpec::radial_mixture(vec![1.0, -2.0], vec![0.5, 0.5], Field::Real).is_err());
        assert!(EnsembleSpec::radial_mixture(vec![1.0], vec![0.5, 0.5], Field::Real).is_err());
        assert!(EnsembleSpec::radial_mixture(vec![1.0, 2.0], vec![1.5, -0.5], Field::Real).is_err());
        assert!(sample_vectors(&EnsembleSpec::unit_sphere(Field::Real), 0, 3, 1).is_err());
    }

    #[test]
    fn predicted_cumulant_examples() {
        let sphere = EnsembleSpec::unit_sphere(Field::Complex);
        assert_eq!(predicted_cumulants(&sphere, 1.0, 4).unwrap().values(), &[1.0; 4]);
        assert_eq!(predicted_cumulants(&sphere, 4.0, 2).unwrap().values(), &[0.25; 2]);
        let basis = EnsembleSpec::canonical_basis(Field::Complex);
        assert_eq!(predicted_cumulants(&basis, 1.0, 6).unwrap().values(), &[1.0; 6]);
        assert!(matches!(predicted_cumulants(&basis, 2.0, 3), Err(Error::Unsupported(_))));
        let radial =
            EnsembleSpec::radial_mixture(vec![1.0, 2f64.sqrt()], vec![0.5, 0.5], Field::Complex).unwrap();
        let a = predicted_cumulants(&radial, 1.0, 5).unwrap();
        for k in 1..=5 {
            let want = (1.0 + 2f64.powi(k as i32)) / 2.0;
            assert!((a.get(k) - want).abs() < 1e-12, "k = {k}");
        }
        assert!(predicted_cumulants(&sphere, 0.0, 2).is_err());
    }

    #[test]
    fn norm_moments() {
        for spec in [EnsembleSpec::unit_sphere(Field::Complex), EnsembleSpec::canonical_basis(Field::Real)] {
            for v in estimate_norm_moments(&spec, 32, 4, 200, 9).unwrap() {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
        let radial =
            EnsembleSpec::radial_mixture(vec![1.0, 2f64.sqrt()], vec![0.5, 0.5], Field::Complex).unwrap();
        let l = estimate_norm_moments(&radial, 8, 2, 20_000, 3).unwrap();
        // ‖f‖² ∈ {1, 2}: mean 1.5, sd 0.5.
        assert!((l[1] - 1.5).abs() < 5.0 * 0.5 / (20_000f64).sqrt());
        assert!(estimate_norm_moments(&radial, 8, 2, 99, 3).is_err());
    }

    #[test]
    fn deviation_vanishes_for_exact_ensembles() {
        // UnitSphere with N = n: Σ_j E f f* = N I / n = I exactly, for every k.
        let sphere = EnsembleSpec::unit_sphere(Field::Complex);
        let d1 = estimate_cumulant_deviation(&sphere, 16, 16, 1, 400, 1).unwrap();
        let d2 = estimate_cumulant_deviation(&sphere, 16, 16, 2, 400, 1).unwrap();
        assert!((d1 - d2).abs() < 1e-12, "‖f‖ = 1 makes k irrelevant");
        let basis = EnsembleSpec::canonical_basis(Field::Complex);
        let small = estimate_cumulant_deviation(&basis, 16, 16, 3, 50, 2).unwrap();
        let large = estimate_cumulant_deviation(&basis, 16, 16, 3, 3200, 2).unwrap();
        assert!(large < small, "{large} should shrink from {small}");
        assert!(large < 0.15);
    }

    #[test]
    fn serde_shape() {
        let spec = EnsembleSpec::radial_mixture(vec![1.0], vec![1.0], Field::Real).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"radial-mixture","radii":[1.0],"probabilities":[1.0],"field":"real"}"#);
        let back: EnsembleSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
