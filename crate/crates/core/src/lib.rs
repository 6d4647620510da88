//! Compound free Poisson limits of sample covariance matrices.
//!
//! The crate evaluates the limiting moments `Σ_{π ∈ NC(p)} Π_{B ∈ π} a_{|B|}` of
//! `E tr (f_1 f_1* + … + f_N f_N*)^p` exactly through noncrossing-partition
//! enumeration, simulates the sample covariance matrices of several random
//! vector ensembles, and checks the convergence, its hypotheses and the
//! canonical-basis counterexample numerically. It also brute-forces the
//! inequalities about two-cover set systems (loopless multigraphs) that the
//! convergence argument relies on.
//!
//! Module map:
//!
//! * [`partitions`]: set partitions, noncrossing partitions, word kernels, Bell and Catalan numbers.
//! * [`freemoments`]: free and classical moment-cumulant sums and the inverse transform.
//! * [`graphcover`]: two-cover systems and the graph-lemma checkers.
//! * [`ensembles`]: random vector generators, predicted cumulants, hypothesis estimators.
//! * [`spectra`]: covariance assembly, spectra, trace moments, Monte Carlo estimators.
//! * [`harness`]: experiment configuration, runners and report writers used by the CLI.

pub mod ensembles;
pub mod error;
pub mod freemoments;
pub mod graphcover;
pub mod harness;
mod linalg;
pub mod partitions;
pub mod seeding;
pub mod spectra;

pub use error::{Error, Result};
