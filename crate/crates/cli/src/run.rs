use std::fs;
use std::path::Path;

use zerofree::funcs::sup_diff;
use zerofree::geometry::boundary_grid;
use zerofree::pipeline::PipelineError;
use zerofree::{
    certify_zero_free, disc_chain_pipeline, jordan_chain_pipeline, zero_free_polynomial, CertifyOptions,
    FitOptions, FuncExprF64, PipelineOptions, RegionF64, Verdict,
};

use crate::config::{build_region, RegionSpec};
use crate::output::write_grid_csv;
use crate::report::{Certificates, PolynomialSection, Report, Totals, VerifyReport};
use crate::{parse_function, CliError, ExitClass, JobConfig};

/// A finished job: the report plus the functions needed to write grids.
pub struct JobOutcome {
    pub report: Report,
    pub region: Option<RegionF64>,
    /// Input, pipeline output and polynomial, as far as they were produced.
    pub functions: Vec<(&'static str, FuncExprF64)>,
}

impl JobOutcome {
    pub fn exit_class(&self) -> ExitClass {
        self.report.exit_class
    }

    /// One CSV per produced function, on the verification grid.
    pub fn write_grids(&self, dir: &Path) -> Result<(), CliError> {
        let Some(region) = &self.region else {
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let grid = boundary_grid(region, self.report.config.verify_density)?;
        for (name, f) in &self.functions {
            let file = fs::File::create(dir.join(format!("{name}.csv")))?;
            write_grid_csv(f, &grid, std::io::BufWriter::new(file))?;
        }
        Ok(())
    }
}

fn empty_report(config: &JobConfig) -> Report {
    let half = config.epsilon / 2.0;
    Report {
        config: config.clone(),
        function: None,
        region: None,
        steps: Vec::new(),
        notes: Vec::new(),
        polynomial: None,
        certificates: Certificates::default(),
        totals: Totals {
            epsilon: config.epsilon,
            pipeline_budget: half,
            polynomial_budget: half,
            pipeline_sup_diff: None,
            budget_spent: None,
            polynomial_fit_error: None,
            combined_sup_diff: None,
        },
        exit_class: ExitClass::Ok,
        error: None,
    }
}

fn failed(mut out: JobOutcome, class: ExitClass, message: String) -> JobOutcome {
    out.report.exit_class = class;
    out.report.error = Some(message);
    out
}

/// Runs the pipeline with half of `epsilon`, then fits a polynomial with the
/// other half. Exit class `Ok` iff the polynomial is certified zero-free and
/// within `epsilon` of the input on the verification grid.
pub fn run_job(config: &JobConfig) -> JobOutcome {
    let mut out = JobOutcome {
        report: empty_report(config),
        region: None,
        functions: Vec::new(),
    };
    if let Err(e) = config.validate() {
        return failed(out, e.exit_class(), e.to_string());
    }
    let f = match parse_function(&config.function) {
        Ok(f) => f,
        Err(e) => return failed(out, e.exit_class(), e.to_string()),
    };
    out.report.function = Some(f.to_string());
    let region = match config.build_region() {
        Ok(r) => r,
        Err(e) => return failed(out, e.exit_class(), e.to_string()),
    };
    out.report.region = Some(region.describe());
    out.region = Some(region.clone());
    out.functions.push(("input", f.clone()));

    let half = config.epsilon / 2.0;
    let popts = PipelineOptions {
        density: config.fit_density,
        verify_density: config.verify_density,
        ..PipelineOptions::default()
    };
    let ran = match &region {
        RegionF64::Jordan(chain) => jordan_chain_pipeline(&f, chain, half, &popts),
        RegionF64::Chain(chain) => disc_chain_pipeline(&f, chain.len(), half, &popts),
        RegionF64::Disc(_) => unreachable!("jobs are built on chains"),
    };
    let (g, rep) = match ran {
        Ok(v) => v,
        Err(PipelineError { error, steps }) => {
            out.report.steps = steps;
            return failed(out, ExitClass::of(&error), error.to_string());
        }
    };
    out.report.steps = rep.steps.clone();
    out.report.notes = rep.notes.clone();
    out.report.totals.pipeline_sup_diff = Some(rep.total_sup_diff);
    out.report.totals.budget_spent = Some(rep.budget_spent());
    out.report.certificates.pipeline = Some(rep.final_certificate.clone());
    out.report.certificates.pullback = rep.pullback_certificate.clone();
    out.functions.push(("approximation", g.clone()));

    let fopts = FitOptions {
        fit_density: config.fit_density,
        verify_density: config.verify_density,
        certify: CertifyOptions::default(),
    };
    let p = match zero_free_polynomial(&g, &region, half, config.max_degree, &fopts) {
        Ok(p) => p,
        Err(fail) => {
            if let Some(best) = &fail.best {
                out.report.polynomial = Some(PolynomialSection::new(best, true));
                out.report.totals.polynomial_fit_error = Some(best.fit_error);
                out.report.certificates.polynomial = best.certificate.clone();
            }
            return failed(out, ExitClass::of(&fail.error), fail.error.to_string());
        }
    };
    out.report.polynomial = Some(PolynomialSection::new(&p, false));
    out.report.totals.polynomial_fit_error = Some(p.fit_error);
    out.report.certificates.polynomial = p.certificate.clone();
    let pf = p.to_func();
    out.functions.push(("polynomial", pf.clone()));

    let combined = boundary_grid(&region, config.verify_density).and_then(|grid| sup_diff(&f, &pf, &grid));
    let combined = match combined {
        Ok(c) => c,
        Err(e) => return failed(out, ExitClass::of(&e), e.to_string()),
    };
    out.report.totals.combined_sup_diff = Some(combined);
    let zero_free = p.certificate.as_ref().is_some_and(|c| c.is_zero_free());
    if !zero_free {
        return failed(out, ExitClass::Other, "polynomial certificate is not zero_free".into());
    }
    if combined.value > config.epsilon {
        return failed(
            out,
            ExitClass::Other,
            format!("combined error {} exceeds epsilon {}", combined.value, config.epsilon),
        );
    }
    out
}

/// Certifies `expr` on the region. Exit class `Ok` iff it is certified
/// zero-free with minimum modulus above `epsilon`.
pub fn verify_expr(expr: &str, spec: &RegionSpec, epsilon: f64, density: f64) -> Result<VerifyReport, CliError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(CliError::Config(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let f = parse_function(expr)?;
    let region = build_region(spec, density)?;
    let opts = CertifyOptions {
        density,
        ..CertifyOptions::default()
    };
    let cert = certify_zero_free(&f, &region, &[], &opts);
    let margin = cert.min_modulus.map(|m| m.value - epsilon);
    let exit_class = match &cert.verdict {
        _ if cert.has_interior_zeros() => ExitClass::Precondition,
        Verdict::ZerosPossibleAt(_) => ExitClass::Precondition,
        Verdict::Failed(_) => ExitClass::Nonconvergence,
        Verdict::ZeroFree if margin.is_some_and(|m| m > 0.0) => ExitClass::Ok,
        Verdict::ZeroFree => ExitClass::Other,
    };
    Ok(VerifyReport {
        expression: f.to_string(),
        region: region.describe(),
        epsilon,
        certificate: cert,
        margin,
        exit_class,
    })
}

const DEMOS: [(&str, &str); 7] = [
    ("z-1", "linear function vanishing at the tangency of two discs"),
    ("square", "z^2 on two discs; both shrinks agree at the tangency"),
    ("sine", "sin(pi z) on two discs"),
    ("quadratic", "(z-1)(z-2) on three discs"),
    ("exp", "exp(z) on two discs; no zeros anywhere"),
    ("jordan", "z-2 on the images of two discs under affine maps with radii 1 and 2"),
    ("interior-zero", "z^2 - 1/4, which vanishes inside the first disc"),
];

/// Names and one-line descriptions of the built-in demos.
pub fn demo_names() -> impl Iterator<Item = (&'static str, &'static str)> {
    DEMOS.iter().copied()
}

pub fn demo_config(name: &str) -> Option<JobConfig> {
    let cfg = match name {
        "z-1" => JobConfig::new(RegionSpec::Chain(2), "z-1", 0.1),
        "square" => JobConfig::new(RegionSpec::Chain(2), "z^2", 0.1),
        "sine" => JobConfig::new(RegionSpec::Chain(2), "sin(pi*z)", 0.1),
        "quadratic" => JobConfig::new(RegionSpec::Chain(3), "(z-1)*(z-2)", 0.1),
        "exp" => JobConfig::new(RegionSpec::Chain(2), "exp(z)", 0.1),
        "jordan" => JobConfig::new(
            RegionSpec::Jordan(vec!["affine(2, 0)".into(), "affine(4, -2)".into()]),
            "z-2",
            0.1,
        ),
        "interior-zero" => JobConfig::new(RegionSpec::Chain(2), "z*z-0.25", 0.1),
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_has_a_config() {
        for (name, _) in demo_names() {
            let cfg = demo_config(name).unwrap();
            cfg.validate().unwrap();
        }
        assert!(demo_config("nope").is_none());
    }

    #[test]
    fn parse_failure_is_exit_two() {
        let out = run_job(&JobConfig::new(RegionSpec::Chain(2), "sin((z", 0.1));
        assert_eq!(out.exit_class(), ExitClass::Parse);
        assert!(out.report.error.unwrap().contains("      ^"));
    }

    #[test]
    fn interior_zero_is_exit_three() {
        let out = run_job(&demo_config("interior-zero").unwrap());
        assert_eq!(out.exit_class(), ExitClass::Precondition);
        assert!(out.report.steps.is_empty());
    }

    #[test]
    fn exp_job_succeeds() {
        let out = run_job(&demo_config("exp").unwrap());
        assert_eq!(out.exit_class(), ExitClass::Ok, "{:?}", out.report.error);
        let t = &out.report.totals;
        assert!(t.combined_sup_diff.unwrap().value <= 0.1);
        assert!(out.report.polynomial.as_ref().unwrap().rouche_margin > 0.0);
        assert_eq!(out.functions.len(), 3);
    }

    #[test]
    fn verify_classes() {
        let chain = RegionSpec::Chain(2);
        assert_eq!(verify_expr("exp(z)", &chain, 0.5, 64.0).unwrap().exit_class, ExitClass::Ok);
        assert_eq!(verify_expr("exp(z)", &chain, 2.0, 64.0).unwrap().exit_class, ExitClass::Other);
        assert_eq!(verify_expr("z-0.5", &chain, 0.1, 64.0).unwrap().exit_class, ExitClass::Precondition);
        assert_eq!(verify_expr("z-1", &chain, 0.1, 64.0).unwrap().exit_class, ExitClass::Precondition);
        assert!(matches!(verify_expr("z-", &chain, 0.1, 64.0), Err(CliError::Parse { .. })));
    }
}
