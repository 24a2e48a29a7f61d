use serde::{Deserialize, Serialize};
use zerofree::{ComplexF64, NormEstimate, PolyApproximantF64, StepRecord, ZeroCertificateF64};

use crate::{ExitClass, JobConfig};

/// `p(z) = sum_k coefficients[k] * ((z - center) / scale)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSection {
    pub degree: usize,
    pub center: ComplexF64,
    pub scale: f64,
    /// Ascending degree.
    pub coefficients: Vec<ComplexF64>,
    pub fit_error: NormEstimate<f64>,
    pub rouche_margin: f64,
    /// The degree search did not reach its target; this is the best fit found.
    pub best_effort: bool,
}

impl PolynomialSection {
    pub fn new(p: &PolyApproximantF64, best_effort: bool) -> Self {
        Self {
            degree: p.degree,
            center: p.center,
            scale: p.scale,
            coefficients: p.coefficients.clone(),
            fit_error: p.fit_error,
            rouche_margin: p.rouche_margin,
            best_effort,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    /// The piecewise approximation from the pipeline.
    pub pipeline: Option<ZeroCertificateF64>,
    /// Jordan runs: the disc-chain result before pushing forward.
    pub pullback: Option<ZeroCertificateF64>,
    pub polynomial: Option<ZeroCertificateF64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub epsilon: f64,
    pub pipeline_budget: f64,
    pub polynomial_budget: f64,
    pub pipeline_sup_diff: Option<NormEstimate<f64>>,
    /// Sum of the per-step spent budgets.
    pub budget_spent: Option<f64>,
    pub polynomial_fit_error: Option<NormEstimate<f64>>,
    /// `sup |f - p|` on the verification grid.
    pub combined_sup_diff: Option<NormEstimate<f64>>,
}

/// Body of `approximate` and `demo` output. Contains no timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: JobConfig,
    /// The parsed function, printed.
    pub function: Option<String>,
    pub region: Option<String>,
    pub steps: Vec<StepRecord<f64>>,
    pub notes: Vec<String>,
    pub polynomial: Option<PolynomialSection>,
    pub certificates: Certificates,
    pub totals: Totals,
    pub exit_class: ExitClass,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub expression: String,
    pub region: String,
    pub epsilon: f64,
    pub certificate: ZeroCertificateF64,
    /// `min |f| - epsilon`; positive means every function within `epsilon` is zero-free too.
    pub margin: Option<f64>,
    pub exit_class: ExitClass,
}
