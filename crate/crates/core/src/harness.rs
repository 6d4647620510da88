//! Experiment configuration, runners and report writers behind the CLI.
//!
//! Config files are flat `key = value` text:
//!
//! ```text
//! # comments start with '#'
//! ensemble      = unit-sphere      # unit-sphere | canonical-basis | gaussian-scaled | radial-mixture
//! field         = complex          # complex | real
//! radii         = 1, 1.4142135623730951   # radial-mixture only
//! probabilities = 0.5, 0.5                 # radial-mixture only
//! lambda        = 1
//! n_grid        = 128, 256, 512
//! p_max         = 5
//! trials        = 200
//! seed          = 1
//! output_dir    = runs/mp
//! ```
//!
//! Unknown keys are rejected. Every report embeds the resolved configuration.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng as _;
use serde::Serialize;

use crate::ensembles::{
    estimate_l4_constant, predicted_cumulants, EnsembleKind, EnsembleSpec, Field,
};
use crate::error::{Error, Result};
use crate::freemoments::{classical_moment, free_moment, free_moments_up_to, CumulantSequence};
use crate::graphcover::{
    build_matching_lemma24, check_lemma22, check_lemma24, enumerate_small_multigraphs,
    matching_precondition, random_two_cover, SortedProfile, TwoCoverSystem, MAX_SMALL_EDGES,
    MAX_SMALL_VERTICES,
};
use crate::partitions::{bell_number, SetPartition};
use crate::seeding::{self, stream};
use crate::spectra::{mc_moments, partition_contribution};

/// Largest moment order simulated by the harness.
pub const MAX_SIMULATED_ORDER: usize = 8;
/// Largest moment order for prediction-only tables.
pub const MAX_PREDICTED_ORDER: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    pub lambda: f64,
    pub n_grid: Vec<usize>,
    pub p_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ensemble: EnsembleSpec::unit_sphere(Field::Complex),
            lambda: 1.0,
            n_grid: vec![128, 256, 512],
            p_max: 5,
            trials: 200,
            seed: 1,
            output_dir: None,
        }
    }
}

/// Raw settings before they are resolved into an [`ExperimentConfig`]. Config
/// files and CLI flags both produce one of these; later layers override
/// earlier ones field by field.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub ensemble: Option<String>,
    pub field: Option<Field>,
    pub radii: Option<Vec<f64>>,
    pub probabilities: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub n_grid: Option<Vec<usize>>,
    pub p_max: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::validation(format!("cannot parse {key} = {raw:?}")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl ConfigOverrides {
    /// Parses the flat `key = value` format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigOverrides::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "ensemble" => out.ensemble = Some(value.to_string()),
                "field" => out.field = Some(value.parse()?),
                "radii" => out.radii = Some(parse_list(key, value)?),
                "probabilities" => out.probabilities = Some(parse_list(key, value)?),
                "lambda" => out.lambda = Some(parse_value(key, value)?),
                "n_grid" => out.n_grid = Some(parse_list(key, value)?),
                "p_max" => out.p_max = Some(parse_value(key, value)?),
                "trials" => out.trials = Some(parse_value(key, value)?),
                "seed" => out.seed = Some(parse_value(key, value)?),
                "output_dir" => out.output_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::validation(format!("line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// `self` with every field that `other` sets replaced.
    pub fn merge(self, other: ConfigOverrides) -> Self {
        ConfigOverrides {
            ensemble: other.ensemble.or(self.ensemble),
            field: other.field.or(self.field),
            radii: other.radii.or(self.radii),
            probabilities: other.probabilities.or(self.probabilities),
            lambda: other.lambda.or(self.lambda),
            n_grid: other.n_grid.or(self.n_grid),
            p_max: other.p_max.or(self.p_max),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            output_dir: other.output_dir.or(self.output_dir),
        }
    }

    /// The ensemble these settings describe (unit sphere if none is named).
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        let field = self.field.unwrap_or_default();
        let name = self.ensemble.as_deref().unwrap_or("unit-sphere");
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "unit-sphere" | "sphere" => EnsembleKind::UnitSphere,
            "canonical-basis" | "basis" => EnsembleKind::CanonicalBasis,
            "gaussian-scaled" | "gaussian" => EnsembleKind::GaussianScaled,
            "radial-mixture" | "radial" => EnsembleKind::RadialMixture {
                radii: self
                    .radii
                    .clone()
                    .ok_or_else(|| Error::validation("radial-mixture needs radii"))?,
                probabilities: self
                    .probabilities
                    .clone()
                    .ok_or_else(|| Error::validation("radial-mixture needs probabilities"))?,
            },
            other => return Err(Error::validation(format!("unknown ensemble {other:?}"))),
        };
        EnsembleSpec::new(kind, field)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let config = ExperimentConfig {
            ensemble: self.ensemble_spec()?,
            lambda: self.lambda.unwrap_or(d.lambda),
            n_grid: self.n_grid.clone().unwrap_or(d.n_grid),
            p_max: self.p_max.unwrap_or(d.p_max),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
            output_dir: self.output_dir.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::validation(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.n_grid.is_empty() {
            return Err(Error::validation("n_grid is empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid[0] == 0 {
            return Err(Error::validation(format!("n_grid must be strictly ascending and positive: {:?}", self.n_grid)));
        }
        if !(1..=MAX_SIMULATED_ORDER).contains(&self.p_max) {
            return Err(Error::SizeLimit { what: "p_max", value: self.p_max, min: 1, max: MAX_SIMULATED_ORDER });
        }
        if self.trials < 2 {
            return Err(Error::validation(format!("trials must be at least 2, got {}", self.trials)));
        }
        for &n in &self.n_grid {
            let count = self.vector_count(n);
            if count < self.p_max {
                return Err(Error::validation(format!(
                    "n = {n} pairs with N = {count} < p_max = {}",
                    self.p_max
                )));
            }
        }
        Ok(())
    }

    /// `N = round(n / λ)`.
    pub fn vector_count(&self, n: usize) -> usize {
        (n as f64 / self.lambda).round() as usize
    }

    fn grid_seed(&self, n: usize) -> u64 {
        seeding::derive(self.seed, stream::GRID, n as u64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportMetadata {
    pub command: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub wall_time_seconds: f64,
}

impl ReportMetadata {
    fn new(command: &'static str, config: &ExperimentConfig, started: Instant) -> Self {
        ReportMetadata {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: config.clone(),
            wall_time_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

/// `|estimate − predicted| ≤ max(3·std_error, 0.05·|predicted|)`.
pub fn within_tolerance(estimate: f64, std_error: f64, predicted: f64) -> bool {
    (estimate - predicted).abs() <= (3.0 * std_error).max(0.05 * predicted.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub p: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub predicted: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub metadata: ReportMetadata,
    pub cumulants: CumulantSequence,
    pub rows: Vec<ConvergenceRow>,
    /// Every row at the largest `n` is within tolerance.
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn rows_at(&self, n: usize) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    pub fn row(&self, n: usize, p: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n == n && r.p == p)
    }
}

/// Sizes used by the marginal fourth-moment gate in [`run_convergence`].
pub const GATE_DIMENSIONS: (usize, usize) = (64, 256);
const GATE_SAMPLES: usize = 2000;
const GATE_DIRECTIONS: usize = 16;
/// Growth of the L⁴ estimate between the gate dimensions that counts as a violation.
pub const GATE_GROWTH: f64 = 3.0;

/// `estimate_l4_constant` at the two gate dimensions.
pub fn l4_gate(spec: &EnsembleSpec, seed: u64) -> Result<(f64, f64)> {
    let (small, large) = GATE_DIMENSIONS;
    let s = seeding::derive(seed, stream::DIRECTION, 0x4741_5445);
    Ok((
        estimate_l4_constant(spec, small, GATE_DIRECTIONS, GATE_SAMPLES, s)?,
        estimate_l4_constant(spec, large, GATE_DIRECTIONS, GATE_SAMPLES, s)?,
    ))
}

fn check_l4_hypothesis(spec: &EnsembleSpec, seed: u64) -> Result<()> {
    let (l4_small, l4_large) = l4_gate(spec, seed)?;
    if spec.kind == EnsembleKind::CanonicalBasis || l4_large >= GATE_GROWTH * l4_small {
        return Err(Error::HypothesisViolated {
            ensemble: spec.to_string(),
            n_small: GATE_DIMENSIONS.0,
            l4_small,
            n_large: GATE_DIMENSIONS.1,
            l4_large,
        });
    }
    Ok(())
}

/// Monte Carlo `E tr S^p` across `n_grid` against the free moment limit.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    config.validate()?;
    check_l4_hypothesis(&config.ensemble, config.seed)?;
    let cumulants = predicted_cumulants(&config.ensemble, config.lambda, config.p_max)?;
    let predicted = free_moments_up_to(config.p_max, &cumulants)?;
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        let count = config.vector_count(n);
        let estimates = mc_moments(&config.ensemble, n, count, config.p_max, config.trials, config.grid_seed(n))?;
        for est in estimates {
            let want = predicted.get(est.p);
            let abs_gap = (est.mean - want).abs();
            rows.push(ConvergenceRow {
                n,
                count,
                p: est.p,
                estimate: est.mean,
                std_error: est.std_error,
                trials: est.trials,
                predicted: want,
                abs_gap,
                rel_gap: abs_gap / want.abs(),
                within_tolerance: within_tolerance(est.mean, est.std_error, want),
            });
        }
    }
    let largest = *config.n_grid.last().expect("validated nonempty");
    let passed = rows.iter().filter(|r| r.n == largest).all(|r| r.within_tolerance);
    let report = ConvergenceReport {
        metadata: ReportMetadata::new("simulate", config, started),
        cumulants,
        rows,
        passed,
    };
    if let Some(dir) = &config.output_dir {
        write_report(dir, "convergence", &report.rows, &report)?;
    }
    Ok(report)
}

/// Stirling numbers of the second kind `S(p, k)`, `0 ≤ k ≤ p`.
pub fn stirling2_row(p: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::from(1u32)];
    for i in 1..=p {
        let mut next = vec![BigUint::from(0u32); i + 1];
        for k in 1..=i {
            let keep = if k < i { &row[k] * BigUint::from(k) } else { BigUint::from(0u32) };
            next[k] = keep + &row[k - 1];
        }
        row = next;
    }
    row
}

/// `E[K^p]` for `K ~ Binomial(n, q)`, via `E[K^p] = Σ_k S(p, k) (n)_k q^k`.
pub fn binomial_power_moment(n: usize, q: f64, p: usize) -> f64 {
    let stirling = stirling2_row(p);
    let mut falling = 1.0;
    let mut qk = 1.0;
    let mut total = 0.0;
    for (k, s) in stirling.iter().enumerate() {
        if k > 0 {
            falling *= n.saturating_sub(k - 1) as f64;
            qk *= q;
        }
        total += s.to_f64().unwrap_or(f64::INFINITY) * falling * qk;
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub p: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub predicted_free: f64,
    pub predicted_classical: f64,
    pub binomial_oracle: f64,
    pub z_vs_oracle: f64,
    pub z_vs_free: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<CounterexampleRow>,
    /// Every estimate is within three standard errors of the binomial oracle.
    pub passed: bool,
}

impl CounterexampleReport {
    pub fn row(&self, n: usize, p: usize) -> Option<&CounterexampleRow> {
        self.rows.iter().find(|r| r.n == n && r.p == p)
    }
}

fn z_score(estimate: f64, std_error: f64, reference: f64) -> f64 {
    let diff = estimate - reference;
    if std_error > 0.0 {
        diff / std_error
    } else if diff.abs() <= 1e-12 * reference.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Canonical-basis vectors at `N = n`: estimates against the free limit, the
/// classical (Bell-number) limit and the exact finite-`n` value
/// `E[K^p]`, `K ~ Binomial(n, 1/n)`.
///
/// Per trial `S` is diagonal with the basis hit counts `K_i` on the diagonal,
/// so `tr S^p = (1/n) Σ_i K_i^p` and each `K_i` is `Binomial(n, 1/n)`.
pub fn run_counterexample(config: &ExperimentConfig) -> Result<CounterexampleReport> {
    let started = Instant::now();
    config.validate()?;
    if config.ensemble.kind != EnsembleKind::CanonicalBasis {
        return Err(Error::validation(format!(
            "counterexample runs need the canonical-basis ensemble, got {}",
            config.ensemble
        )));
    }
    if config.lambda != 1.0 {
        return Err(Error::validation(format!("counterexample runs need lambda = 1, got {}", config.lambda)));
    }
    let ones = CumulantSequence::constant(1.0, config.p_max)?;
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        let count = config.vector_count(n);
        let estimates = mc_moments(&config.ensemble, n, count, config.p_max, config.trials, config.grid_seed(n))?;
        for est in estimates {
            let oracle = binomial_power_moment(n, 1.0 / n as f64, est.p);
            let free = free_moment(est.p, &ones)?;
            let z_vs_oracle = z_score(est.mean, est.std_error, oracle);
            rows.push(CounterexampleRow {
                n,
                count,
                p: est.p,
                estimate: est.mean,
                std_error: est.std_error,
                trials: est.trials,
                predicted_free: free,
                predicted_classical: classical_moment(est.p, &ones)?,
                binomial_oracle: oracle,
                z_vs_oracle,
                z_vs_free: z_score(est.mean, est.std_error, free),
                within_tolerance: z_vs_oracle.abs() <= 3.0,
            });
        }
    }
    let passed = rows.iter().all(|r| r.within_tolerance);
    let report = CounterexampleReport {
        metadata: ReportMetadata::new("counterexample", config, started),
        rows,
        passed,
    };
    if let Some(dir) = &config.output_dir {
        write_report(dir, "counterexample", &report.rows, &report)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub imag_estimate: f64,
    pub imag_std_error: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingReport {
    pub metadata: ReportMetadata,
    pub partition: SetPartition,
    pub rows: Vec<CrossingRow>,
    /// Weighted least-squares slope of `ln |estimate|` against `ln n`.
    pub slope: f64,
    pub slope_std_error: f64,
    /// The fitted slope is at most `-1/2`.
    pub passed: bool,
}

/// Weighted least-squares fit `y ≈ a + b x`; returns `(b, se(b))` given the
/// standard errors of the `y` values.
pub fn weighted_slope(x: &[f64], y: &[f64], y_err: &[f64]) -> (f64, f64) {
    let w: Vec<f64> = y_err
        .iter()
        .map(|e| if *e > 0.0 { 1.0 / (e * e) } else { 1.0 })
        .collect();
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    (sxy / sxx, (1.0 / sxx).sqrt())
}

/// Contribution of the words with kernel `π` across `n_grid`, for a crossing `π`.
pub fn run_crossing_decay(config: &ExperimentConfig, pi: &SetPartition) -> Result<CrossingReport> {
    let started = Instant::now();
    config.validate()?;
    if pi.is_noncrossing() {
        return Err(Error::validation(format!("{pi} is noncrossing; crossing decay needs a crossing partition")));
    }
    if config.n_grid.len() < 2 {
        return Err(Error::validation("crossing decay needs at least two grid points"));
    }
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        let count = config.vector_count(n);
        let c = partition_contribution(&config.ensemble, pi, n, count, config.trials, config.grid_seed(n))?;
        rows.push(CrossingRow {
            n,
            count,
            estimate: c.estimate,
            std_error: c.std_error,
            imag_estimate: c.imag_estimate,
            imag_std_error: c.imag_std_error,
            trials: c.trials,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.estimate.abs().ln()).collect();
    let y_err: Vec<f64> = rows.iter().map(|r| r.std_error / r.estimate.abs()).collect();
    let (slope, slope_std_error) = weighted_slope(&x, &y, &y_err);
    let report = CrossingReport {
        metadata: ReportMetadata::new("crossing", config, started),
        partition: pi.clone(),
        rows,
        slope,
        slope_std_error,
        passed: slope <= -0.5,
    };
    if let Some(dir) = &config.output_dir {
        write_report(dir, "crossing", &report.rows, &report)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaTally {
    pub lemma: &'static str,
    pub instances: u64,
    pub violations: u64,
    pub min_slack: f64,
}

impl LemmaTally {
    fn new(lemma: &'static str) -> Self {
        LemmaTally { lemma, instances: 0, violations: 0, min_slack: f64::INFINITY }
    }

    fn record(&mut self, holds: bool, slack: f64) -> bool {
        self.instances += 1;
        self.min_slack = self.min_slack.min(slack);
        if !holds {
            self.violations += 1;
        }
        holds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSuiteSummary {
    pub seed: u64,
    pub exhaustive: bool,
    pub random_count: usize,
    pub tallies: Vec<LemmaTally>,
    /// JSON description of the first failing instance, if any.
    pub first_violation: Option<String>,
}

impl LemmaSuiteSummary {
    pub fn passed(&self) -> bool {
        self.tallies.iter().all(|t| t.violations == 0)
    }

    pub fn tally(&self, lemma: &str) -> Option<&LemmaTally> {
        self.tallies.iter().find(|t| t.lemma == lemma)
    }

    /// `Err` carrying the serialized counterexample if anything failed.
    pub fn into_result(self) -> Result<Self> {
        match &self.first_violation {
            Some(instance) => Err(Error::Experiment(format!("lemma violation: {instance}"))),
            None => Ok(self),
        }
    }
}

/// t values `0, ½, 1, …, t_max`.
pub fn half_integer_grid(t_max: usize) -> impl Iterator<Item = f64> {
    (0..=2 * t_max).map(|i| i as f64 / 2.0)
}

/// Exhaustive `m` range for the matching construction.
pub const MATCHING_MAX_M: usize = 8;
/// Exhaustive t-grid upper end.
pub const EXHAUSTIVE_T_MAX: usize = 7;
/// Random systems draw `r ∈ [2, RANDOM_MAX_R]`, `m ∈ [1, RANDOM_MAX_M]`.
pub const RANDOM_MAX_R: usize = 8;
pub const RANDOM_MAX_M: usize = 16;

struct LemmaSuite {
    t21: LemmaTally,
    t22: LemmaTally,
    t23: LemmaTally,
    t24: LemmaTally,
    t25: LemmaTally,
    first_violation: Option<String>,
}

impl LemmaSuite {
    fn new() -> Self {
        LemmaSuite {
            t21: LemmaTally::new("2.1"),
            t22: LemmaTally::new("2.2"),
            t23: LemmaTally::new("2.3"),
            t24: LemmaTally::new("2.4"),
            t25: LemmaTally::new("2.5"),
            first_violation: None,
        }
    }

    fn violation(&mut self, lemma: &str, sys: Option<&TwoCoverSystem>, detail: serde_json::Value) {
        if self.first_violation.is_none() {
            let instance = serde_json::json!({
                "lemma": lemma,
                "edges": sys.map(TwoCoverSystem::edges),
                "r": sys.map(TwoCoverSystem::r),
                "detail": detail,
            });
            self.first_violation = Some(instance.to_string());
        }
    }

    fn check_system(&mut self, sys: &TwoCoverSystem, t_grid: &[f64]) {
        let rep = check_lemma22(sys);
        if !self.t22.record(rep.holds, 0.0 - (rep.lhs - rep.rhs).abs()) {
            self.violation("2.2", Some(sys), serde_json::json!({ "lhs": rep.lhs, "rhs": rep.rhs }));
        }
        let profile = SortedProfile::new(sys);
        for &t in t_grid {
            let rep = profile.lemma21(t);
            if !self.t21.record(rep.holds, rep.slack()) {
                self.violation("2.1", Some(sys), serde_json::json!({ "t": t, "lhs": rep.lhs, "rhs": rep.rhs }));
            }
        }
        let r = sys.r();
        for mask in 0u64..(1 << r) {
            let rep = profile.lemma25(mask);
            if !self.t25.record(rep.holds, rep.slack()) {
                self.violation("2.5", Some(sys), serde_json::json!({ "lambda_mask": mask, "lhs": rep.lhs, "rhs": rep.rhs }));
            }
            for k0 in 1..=r {
                let rep = profile.lemma23(mask, k0);
                if !self.t23.record(rep.holds, rep.slack()) {
                    self.violation(
                        "2.3",
                        Some(sys),
                        serde_json::json!({ "lambda_mask": mask, "k0": k0, "lhs": rep.lhs, "rhs": rep.rhs }),
                    );
                }
            }
        }
    }

    fn check_matchings(&mut self) {
        for m in 1..=MATCHING_MAX_M {
            let subsets: Vec<BTreeSet<usize>> = crate::graphcover::all_index_sets(m).collect();
            for from in &subsets {
                for to in &subsets {
                    let rep = check_lemma24(m, from, to);
                    let slack = if matching_precondition(m, from, to) { rep.lhs } else { 0.0 };
                    if !self.t24.record(rep.holds, slack) {
                        let built = build_matching_lemma24(m, from, to).map_err(|e| e.to_string());
                        self.violation(
                            "2.4",
                            None,
                            serde_json::json!({ "m": m, "from": from, "to": to, "result": format!("{built:?}") }),
                        );
                    }
                }
            }
        }
    }
}

/// Checks the two-cover inequalities exhaustively on small multigraphs and on
/// `random_count` random ones, plus the matching construction on every pair
/// of subsets of `{1, …, m}`, `m ≤ 8`.
pub fn run_lemma_suite(seed: u64, random_count: usize, exhaustive: bool) -> Result<LemmaSuiteSummary> {
    let mut suite = LemmaSuite::new();
    if exhaustive {
        let t_grid: Vec<f64> = half_integer_grid(EXHAUSTIVE_T_MAX).collect();
        for r in 2..=MAX_SMALL_VERTICES {
            for sys in enumerate_small_multigraphs(r, MAX_SMALL_EDGES)? {
                suite.check_system(&sys, &t_grid);
            }
        }
        suite.check_matchings();
    }
    for i in 0..random_count {
        let mut rng = seeding::child_rng(seed, stream::GRAPH, i as u64);
        let r = rng.random_range(2..=RANDOM_MAX_R);
        let m = rng.random_range(1..=RANDOM_MAX_M);
        let sys = random_two_cover(r, m, seeding::derive(seed, stream::GRAPH, i as u64))?;
        let t_grid: Vec<f64> = half_integer_grid(m + 1).collect();
        suite.check_system(&sys, &t_grid);
    }
    let LemmaSuite { t21, t22, t23, t24, t25, first_violation } = suite;
    Ok(LemmaSuiteSummary {
        seed,
        exhaustive,
        random_count,
        tallies: vec![t21, t22, t23, t24, t25],
        first_violation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionRow {
    pub p: usize,
    pub predicted_free: f64,
    pub predicted_classical: f64,
}

/// Free and classical moment tables for `p = 1, …, p_max`.
pub fn predict(p_max: usize, cumulants: &CumulantSequence) -> Result<Vec<PredictionRow>> {
    if !(1..=MAX_PREDICTED_ORDER).contains(&p_max) {
        return Err(Error::SizeLimit { what: "p_max", value: p_max, min: 1, max: MAX_PREDICTED_ORDER });
    }
    (1..=p_max)
        .map(|p| {
            Ok(PredictionRow {
                p,
                predicted_free: free_moment(p, cumulants)?,
                predicted_classical: classical_moment(p, cumulants)?,
            })
        })
        .collect()
}

/// Cumulants for `predict` from an ensemble at aspect ratio `λ`.
pub fn predict_for_ensemble(p_max: usize, spec: &EnsembleSpec, lambda: f64) -> Result<Vec<PredictionRow>> {
    predict(p_max, &predicted_cumulants(spec, lambda, p_max)?)
}

/// Bell number as `f64`, for reports.
pub fn bell_f64(p: usize) -> Result<f64> {
    Ok(bell_number(p)?.to_f64().unwrap_or(f64::INFINITY))
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Experiment(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `<stem>.csv` (rows only) and `<stem>.json` (full report) into `dir`.
pub fn write_report<R: Serialize, T: Serialize>(dir: &Path, stem: &str, rows: &[R], report: &T) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    write_file(&dir.join(format!("{stem}.csv")), &csv_string(rows)?)?;
    write_file(&dir.join(format!("{stem}.json")), &serde_json::to_string_pretty(report)?)?;
    Ok(())
}
