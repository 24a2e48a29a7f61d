//! The approximation pipeline: shrinking, lens and parabolic perturbations,
//! contact-zero removal, and their assembly over disc chains and their
//! conformal images.
//!
//! Every step is a precomposition (or, for contact removal, an added lens map)
//! whose parameter is found by a dyadic search against a measured sup-norm
//! budget. Each search records the trial parameters and the measured
//! differences so runs can be audited afterwards.

mod chain;
mod contact;
mod steps;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::funcs::NormEstimate;
use crate::zerocheck::{CertifyOptions, ZeroCertificate};
use crate::scalar::Real;

pub use chain::{disc_chain_pipeline, jordan_chain_pipeline};
pub use contact::{
    choose_pie_parameters, choose_pie_parameters_on, remove_contact_zero, remove_contact_zero_between,
    ContactBranch, ContactRemoval, PieChoice,
};
pub use steps::{
    lens_step, lens_with_ratio, parabolic_step, parabolic_with_delta, shrink_toward, shrink_with_ratio,
};

/// Smallest admissible `1 - r` in the shrink and lens searches.
pub const MIN_GAP: f64 = 1e-9;

/// Maximum number of halvings in any parameter search.
pub const MAX_HALVINGS: usize = 40;

/// Relative cross-product threshold for "on the line through 0 and w".
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Values below this modulus at a contact point count as a zero there.
pub const CONTACT_ZERO_TOL: f64 = 1e-12;

/// Largest allowed disagreement between glued pieces at their contact point.
pub const GLUE_CONTINUITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepTag {
    Shrink,
    Lens,
    Parabolic,
    ContactRemoval,
    Glue,
    Pullback,
}

impl fmt::Display for StepTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepTag::Shrink => "shrink",
            StepTag::Lens => "lens",
            StepTag::Parabolic => "parabolic",
            StepTag::ContactRemoval => "contact_removal",
            StepTag::Glue => "glue",
            StepTag::Pullback => "pullback",
        };
        f.write_str(s)
    }
}

/// One trial of a parameter search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub parameter: T,
    pub sup_diff: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub tag: StepTag,
    /// Where the step acted, e.g. "disc 2 toward 1".
    pub location: String,
    pub parameters: Vec<(String, T)>,
    /// Sub-budget assigned to the step.
    pub budget: T,
    pub error_budget_spent: T,
    pub trace: Vec<TracePoint<T>>,
    pub certificate: Option<ZeroCertificate<T>>,
    pub note: Option<String>,
}

impl<T: Real> StepRecord<T> {
    pub(crate) fn new(tag: StepTag, location: impl Into<String>, budget: T) -> Self {
        Self {
            tag,
            location: location.into(),
            parameters: Vec::new(),
            budget,
            error_budget_spent: T::zero(),
            trace: Vec::new(),
            certificate: None,
            note: None,
        }
    }

    pub(crate) fn with_param(mut self, name: &str, value: T) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub fn param(&self, name: &str) -> Option<T> {
        self.parameters
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport<T> {
    pub input: String,
    pub output: String,
    pub epsilon: T,
    pub steps: Vec<StepRecord<T>>,
    pub total_sup_diff: NormEstimate<T>,
    pub final_certificate: ZeroCertificate<T>,
    /// Certificate of the disc-chain result before pushing forward (Jordan runs).
    pub pullback_certificate: Option<ZeroCertificate<T>>,
    pub notes: Vec<String>,
}

impl<T: Real> ApproxReport<T> {
    /// Sum of the per-step spent budgets.
    pub fn budget_spent(&self) -> T {
        self.steps
            .iter()
            .fold(T::zero(), |acc, s| acc + s.error_budget_spent)
    }
}

/// A failed run together with the steps completed before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError<T> {
    pub error: Error,
    pub steps: Vec<StepRecord<T>>,
}

impl<T> PipelineError<T> {
    pub(crate) fn new(error: Error, steps: Vec<StepRecord<T>>) -> Self {
        Self { error, steps }
    }
}

impl<T> From<Error> for PipelineError<T> {
    fn from(error: Error) -> Self {
        Self {
            error,
            steps: Vec::new(),
        }
    }
}

impl<T: fmt::Debug> fmt::Display for PipelineError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} completed steps)", self.error, self.steps.len())
    }
}

impl<T: fmt::Debug> std::error::Error for PipelineError<T> {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions<T> {
    /// Boundary density of the grids used inside parameter searches.
    pub density: T,
    /// Boundary density of the final verification grid.
    pub verify_density: T,
    pub certify: CertifyOptions<T>,
    /// Attach a zero-freeness certificate to each main step record.
    pub certify_steps: bool,
}

impl<T: Real> Default for PipelineOptions<T> {
    fn default() -> Self {
        Self {
            density: T::lit(64.0),
            verify_density: T::lit(64.0),
            certify: CertifyOptions::default(),
            certify_steps: true,
        }
    }
}
