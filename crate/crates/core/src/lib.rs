//! Zero-free polynomial approximation on chains of tangent discs and their
//! conformal images.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below name the double precision instances used by the CLI.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod funcs;
pub mod geometry;
pub mod pipeline;
pub mod polyfit;
pub mod scalar;
pub mod zerocheck;

pub use conformal::{EtaParams, MapExpr, PiePiece};
pub use error::{Error, Result};
pub use funcs::{FuncExpr, GluePiece, GlueRegion, NormEstimate};
pub use geometry::{Contour, Disc, DiscChain, JordanChain, Region, SampleGrid};
pub use pipeline::{disc_chain_pipeline, jordan_chain_pipeline, ApproxReport, PipelineOptions, StepRecord, StepTag};
pub use polyfit::{fit_polynomial, zero_free_polynomial, FitFailure, FitOptions, PolyApproximant};
pub use scalar::{Complex, Real};
pub use zerocheck::{certify_zero_free, winding_number, CertifyOptions, Verdict, ZeroCertificate};

pub type ComplexF64 = Complex<f64>;
pub type DiscF64 = Disc<f64>;
pub type DiscChainF64 = DiscChain<f64>;
pub type JordanChainF64 = JordanChain<f64>;
pub type RegionF64 = Region<f64>;
pub type MapExprF64 = MapExpr<f64>;
pub type FuncExprF64 = FuncExpr<f64>;
pub type ApproxReportF64 = ApproxReport<f64>;
pub type PolyApproximantF64 = PolyApproximant<f64>;
pub type ZeroCertificateF64 = ZeroCertificate<f64>;
