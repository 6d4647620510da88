//! Sample covariance matrices, their spectra and Monte Carlo trace moments.
//!
//! Conventions: `u ⊗ v` acts as `x ↦ ⟨x, v⟩ u`, so `f ⊗ f = f f*` with
//! `⟨u, v⟩ = Σ_i u_i conj(v_i)`, and `tr` is the trace divided by `n`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{sample_vectors, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::partitions::SetPartition;
use crate::seeding::{self, stream};

/// `S = Σ_j f_j f_j*`, Hermitian and positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    entries: CMatrix,
}

impl CovarianceMatrix {
    /// Wraps an explicit matrix after checking it is square and Hermitian to
    /// `1e-12` relative to its largest entry.
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::validation(format!(
                "covariance matrix must be square and nonempty, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        let scale = entries.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        for b in 0..n {
            for a in 0..=b {
                if (entries[(a, b)] - entries[(b, a)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::validation(format!("matrix is not Hermitian at ({a},{b})")));
                }
            }
        }
        Ok(CovarianceMatrix { entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.entries[(i, i)].re).sum()
    }
}

/// `Σ_j f_j f_j*`.
pub fn assemble(vectors: &[CVector]) -> Result<CovarianceMatrix> {
    let n = vectors
        .first()
        .map(|f| f.len())
        .ok_or_else(|| Error::validation("no vectors to assemble"))?;
    if n == 0 {
        return Err(Error::validation("vectors have dimension 0"));
    }
    if let Some((j, f)) = vectors.iter().enumerate().find(|(_, f)| f.len() != n) {
        return Err(Error::validation(format!("vector {j} has dimension {}, expected {n}", f.len())));
    }
    Ok(CovarianceMatrix { entries: linalg::weighted_gram(n, vectors, None) })
}

/// Eigenvalues in ascending order. Fails if the matrix is not positive
/// semidefinite to `-1e-10 · λ_max`.
pub fn spectrum(s: &CovarianceMatrix) -> Result<Vec<f64>> {
    let eig = linalg::hermitian_eigenvalues(&s.entries)?;
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    if lo < -1e-10 * hi.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "matrix is not positive semidefinite: smallest eigenvalue {lo:e}, largest {hi:e}"
        )));
    }
    Ok(eig)
}

/// `m̂_p = (1/n) Σ_i λ_i^p` for `p = 1, …, p_max`, from one eigendecomposition.
pub fn trace_moments(s: &CovarianceMatrix, p_max: usize) -> Result<Vec<f64>> {
    if p_max == 0 {
        return Err(Error::validation("p_max must be at least 1"));
    }
    let eig = spectrum(s)?;
    Ok(power_means(&eig, p_max))
}

fn power_means(eig: &[f64], p_max: usize) -> Vec<f64> {
    let n = eig.len() as f64;
    let mut sums = vec![0.0; p_max];
    for &x in eig {
        // Negative eigenvalues here are rounding noise below the PSD tolerance.
        let x = x.max(0.0);
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            pow *= x;
            *s += pow;
        }
    }
    sums.into_iter().map(|s| s / n).collect()
}

/// `tr S^p` by repeated multiplication; an eigensolver-free reference for
/// [`trace_moments`].
pub fn trace_moments_oracle(s: &CovarianceMatrix, p_max: usize) -> Vec<f64> {
    let n = s.n() as f64;
    let mut power = s.entries.clone();
    let mut out = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        if p > 1 {
            power = &power * &s.entries;
        }
        out.push(power.trace().re / n);
    }
    out
}

/// Monte Carlo estimate of `E tr S^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: usize,
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Mean and standard error of each coordinate over the rows, in row order.
fn summarize(rows: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let t = rows.len() as f64;
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|c| {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / t;
            let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
            (mean, (var / t).sqrt())
        })
        .collect()
}

/// Runs `trial(seed_t)` for every trial with its own derived seed. Trials that
/// fail are dropped; more than 1% failures abort the experiment.
fn run_trials<F>(trials: usize, seed: u64, trial: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    if trials < 2 {
        return Err(Error::validation(format!("need at least 2 trials, got {trials}")));
    }
    let results: Vec<Result<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| trial(seeding::derive(seed, stream::TRIAL, t as u64)))
        .collect();
    let mut rows = Vec::with_capacity(trials);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(e),
        }
    }
    if failures.len() * 100 > trials || rows.len() < 2 {
        return Err(Error::Experiment(format!(
            "{} of {trials} trials failed; first error: {}",
            failures.len(),
            failures.first().map_or_else(String::new, ToString::to_string)
        )));
    }
    Ok(rows)
}

/// Monte Carlo estimates of `E tr (Σ_j f_j f_j*)^p`, `p = 1, …, p_max`.
pub fn mc_moments(
    spec: &EnsembleSpec,
    n: usize,
    count: usize,
    p_max: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    spec.validate()?;
    if p_max == 0 {
        return Err(Error::validation("p_max must be at least 1"));
    }
    let rows = run_trials(trials, seed, |s| {
        let vectors = sample_vectors(spec, n, count, s)?;
        trace_moments(&assemble(&vectors)?, p_max)
    })?;
    let used = rows.len();
    Ok(summarize(&rows)
        .into_iter()
        .enumerate()
        .map(|(i, (mean, std_error))| MomentEstimate { p: i + 1, mean, std_error, trials: used })
        .collect())
}

/// Estimated contribution of the words `j` with `ker j = π` to `E tr S^p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionContribution {
    pub partition: SetPartition,
    pub estimate: f64,
    pub std_error: f64,
    pub imag_estimate: f64,
    pub imag_std_error: f64,
    pub crossing: bool,
    pub trials: usize,
}

/// `(N)_k = N (N - 1) ⋯ (N - k + 1)`.
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| n.saturating_sub(i) as f64).product()
}

/// `tr (g_{b(1)} g_{b(1)}*) ⋯ (g_{b(p)} g_{b(p)}*) = Π_i ⟨g_{b(i+1)}, g_{b(i)}⟩`
/// (indices cyclic), divided by `n`.
pub(crate) fn trace_chain(pi: &SetPartition, vectors: &[CVector]) -> Complex64 {
    let labels = pi.block_labels();
    let k = pi.num_blocks();
    let n = vectors[0].len() as f64;
    let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
    for a in 0..k {
        for b in a..k {
            let z = linalg::inner(&vectors[a], &vectors[b]);
            gram[a * k + b] = z;
            gram[b * k + a] = z.conj();
        }
    }
    let p = labels.len();
    let product: Complex64 = (0..p)
        .map(|i| gram[labels[(i + 1) % p] * k + labels[i]])
        .product();
    product / n
}

/// Estimates `Σ_{j : ker j = π} E tr Π_i f_{j(i)} f_{j(i)}*` for an i.i.d.
/// ensemble. Every such word has the same expectation, and there are `(N)_{|π|}`
/// of them, so each trial evaluates one trace chain on `|π|` fresh vectors.
pub fn partition_contribution(
    spec: &EnsembleSpec,
    pi: &SetPartition,
    n: usize,
    count: usize,
    trials: usize,
    seed: u64,
) -> Result<PartitionContribution> {
    spec.validate()?;
    let k = pi.num_blocks();
    if k > count {
        return Err(Error::validation(format!("partition has {k} blocks but only N = {count} vectors")));
    }
    let rows = run_trials(trials, seed, |s| {
        let vectors = sample_vectors(spec, n, k, s)?;
        let z = trace_chain(pi, &vectors);
        Ok(vec![z.re, z.im])
    })?;
    let words = falling_factorial(count, k);
    let stats = summarize(&rows);
    Ok(PartitionContribution {
        partition: pi.clone(),
        estimate: words * stats[0].0,
        std_error: words * stats[0].1,
        imag_estimate: words * stats[1].0,
        imag_std_error: words * stats[1].1,
        crossing: !pi.is_noncrossing(),
        trials: rows.len(),
    })
}

/// Counts of `values` in `bins` equal-width bins over `[lo, hi]`; the last bin
/// is closed on the right and values outside the range are dropped.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<u64>> {
    if bins == 0 {
        return Err(Error::validation("need at least one bin"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::validation(format!("degenerate histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in values {
        if x < lo || x > hi {
            continue;
        }
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Histogram of the eigenvalues of `s`.
pub fn esd_histogram(s: &CovarianceMatrix, bins: usize, lo: f64, hi: f64) -> Result<Vec<u64>> {
    histogram(&spectrum(s)?, bins, lo, hi)
}
