use crate::conformal::{fmt_complex, MapExpr};
use crate::error::{Error, Result};
use crate::funcs::{restrict, sup_diff, FuncExpr, GluePiece, GlueRegion};
use crate::geometry::{boundary_grid, chain_discs, JordanChain, Region};
use crate::scalar::{Complex, Real};
use crate::zerocheck::certify_zero_free;

use super::contact::remove_contact_zero_between;
use super::steps::{lens_step, require_boundary_zeros_only, shrink_toward};
use super::{ApproxReport, PipelineError, PipelineOptions, StepRecord, StepTag};

fn check_input<T: Real>(f: &FuncExpr<T>, region: &Region<T>, epsilon: T, opts: &PipelineOptions<T>) -> Result<()> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if let Some(c) = f.as_constant() {
        if c.norm() == T::zero() {
            return Err(Error::Precondition("the zero function has interior zeros".into()));
        }
    }
    for (k, disc) in region.discs().iter().enumerate() {
        require_boundary_zeros_only(&restrict(f, disc), disc, opts).map_err(|e| match e {
            Error::Precondition(msg) => Error::Precondition(format!("disc {}: {msg}", k + 1)),
            other => other,
        })?;
    }
    Ok(())
}

/// Approximates `f` on the closed canonical chain of `n` discs by a function
/// without zeros on the closed chain, within `epsilon` on the verification grid.
pub fn disc_chain_pipeline<T: Real>(
    f: &FuncExpr<T>,
    n: usize,
    epsilon: T,
    opts: &PipelineOptions<T>,
) -> Result<(FuncExpr<T>, ApproxReport<T>), PipelineError<T>> {
    let chain = chain_discs::<T>(n)?;
    let region = Region::Chain(chain.clone());
    check_input(f, &region, epsilon, opts)?;
    if certify_zero_free(f, &region, &[], &opts.certify).is_zero_free() {
        let mut report = finish(f, f, &region, epsilon, Vec::new(), opts)?;
        report.output = "input unchanged".into();
        report.notes.push("input is already zero-free on the closed chain".into());
        return Ok((f.clone(), report));
    }

    let mut steps: Vec<StepRecord<T>> = Vec::new();
    let fail = |e: Error, steps: &Vec<StepRecord<T>>| PipelineError::new(e, steps.clone());
    let discs = &chain.discs;
    let mut pieces: Vec<FuncExpr<T>> = discs.iter().map(|d| restrict(f, d)).collect();

    if n == 1 {
        let grid = boundary_grid(&region, opts.density).map_err(|e| fail(e, &steps))?;
        let mut best: Option<(T, Complex<T>)> = None;
        for s in &grid.boundary {
            let v = pieces[0].eval(s.z).map_err(|e| fail(e, &steps))?.norm();
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, s.z));
            }
        }
        let q = best.map(|(_, z)| z).expect("boundary grid is never empty");
        let (g, rec) = shrink_toward(&pieces[0], &discs[0], q, epsilon, opts).map_err(|e| fail(e, &steps))?;
        steps.push(rec);
        pieces[0] = g;
    } else {
        let per = epsilon / T::from_usize(2 * n - 1).unwrap();
        let t = &chain.tangencies;

        let (g, rec) = shrink_toward(&pieces[0], &discs[0], t[0], per, opts).map_err(|e| fail(e, &steps))?;
        steps.push(rec);
        pieces[0] = g;
        let (g, rec) =
            shrink_toward(&pieces[n - 1], &discs[n - 1], t[n - 2], per, opts).map_err(|e| fail(e, &steps))?;
        steps.push(rec);
        pieces[n - 1] = g;

        for k in 1..n - 1 {
            let (g, rec) =
                lens_step(&pieces[k], &discs[k], (t[k - 1], t[k]), per, opts).map_err(|e| fail(e, &steps))?;
            steps.push(rec);
            pieces[k] = g;
        }

        for j in 0..n - 1 {
            let out = remove_contact_zero_between(
                &pieces[j],
                &pieces[j + 1],
                &discs[j],
                &discs[j + 1],
                t[j],
                per,
                opts,
            )
            .map_err(|mut e| {
                let mut all = steps.clone();
                all.append(&mut e.steps);
                PipelineError::new(e.error, all)
            })?;
            steps.extend(out.records);
            pieces[j] = out.left;
            pieces[j + 1] = out.right;
        }
    }

    let out = FuncExpr::glue_discs(discs.iter().copied().zip(pieces).collect());
    let report = finish(f, &out, &region, epsilon, steps, opts)?;
    Ok((out, report))
}

fn finish<T: Real>(
    f: &FuncExpr<T>,
    out: &FuncExpr<T>,
    region: &Region<T>,
    epsilon: T,
    steps: Vec<StepRecord<T>>,
    opts: &PipelineOptions<T>,
) -> Result<ApproxReport<T>, PipelineError<T>> {
    let grid = match boundary_grid(region, opts.verify_density) {
        Ok(g) => g,
        Err(e) => return Err(PipelineError::new(e, steps)),
    };
    let total = match sup_diff(f, out, &grid) {
        Ok(t) => t,
        Err(e) => return Err(PipelineError::new(e, steps)),
    };
    let final_certificate = certify_zero_free(out, region, &[], &opts.certify);
    let mut notes = Vec::new();
    if steps.iter().any(|s| s.tag == StepTag::ContactRemoval) {
        notes.push(
            "contact removals work with half of their assigned budget, since the construction \
             bounds its error by twice the working budget"
                .to_string(),
        );
    }
    Ok(ApproxReport {
        input: f.to_string(),
        output: format!("glue of {} pieces over {}", region.discs().len(), region.describe()),
        epsilon,
        steps,
        total_sup_diff: total,
        final_certificate,
        pullback_certificate: None,
        notes,
    })
}

/// Pulls `f` back to the canonical chain through the chain maps, runs the
/// disc pipeline there and pushes the result forward piece by piece through
/// numerically inverted maps.
pub fn jordan_chain_pipeline<T: Real>(
    f: &FuncExpr<T>,
    chain: &JordanChain<T>,
    epsilon: T,
    opts: &PipelineOptions<T>,
) -> Result<(FuncExpr<T>, ApproxReport<T>), PipelineError<T>> {
    let discs = &chain.chain.discs;
    let g = FuncExpr::glue_discs(
        discs
            .iter()
            .zip(&chain.maps)
            .map(|(d, m)| (*d, f.clone().compose_map(m.clone())))
            .collect(),
    );
    let mut pull = StepRecord::new(StepTag::Pullback, format!("{} domains", chain.len()), epsilon);
    pull.note = Some(format!(
        "pulled back through [{}]; contacts at [{}]",
        chain.maps.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("; "),
        chain
            .tangency_images
            .iter()
            .map(|&z| fmt_complex(z))
            .collect::<Vec<_>>()
            .join(", ")
    ));

    let (g_eps, inner) = disc_chain_pipeline(&g, chain.len(), epsilon, opts).map_err(|mut e| {
        e.steps.insert(0, pull.clone());
        e
    })?;

    let pieces = discs
        .iter()
        .zip(&chain.maps)
        .map(|(d, m)| GluePiece {
            region: GlueRegion::Image {
                disc: *d,
                map: m.clone(),
            },
            f: restrict(&g_eps, d).compose_map(MapExpr::Inverse {
                map: Box::new(m.clone()),
                domain: *d,
            }),
        })
        .collect();
    let out = FuncExpr::glue(pieces);

    let mut steps = vec![pull];
    steps.extend(inner.steps);
    let region = Region::Jordan(chain.clone());
    let mut report = finish(f, &out, &region, epsilon, steps, opts)?;
    report.pullback_certificate = Some(inner.final_certificate);
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zerocheck::Verdict;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn single_disc_boundary_zero() {
        let f = FuncExpr::Poly(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let (_, rep) = disc_chain_pipeline(&f, 1, 0.1, &PipelineOptions::default()).unwrap();
        assert_eq!(rep.steps.len(), 1);
        assert_eq!(rep.steps[0].tag, StepTag::Shrink);
        assert!(rep.total_sup_diff.value <= 0.1);
        assert_eq!(rep.final_certificate.verdict, Verdict::ZeroFree);
    }

    #[test]
    fn interior_zero_rejected() {
        let f = FuncExpr::Poly(vec![c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let e = disc_chain_pipeline(&f, 2, 0.1, &PipelineOptions::default()).unwrap_err();
        assert!(matches!(e.error, Error::Precondition(_)));
    }

    #[test]
    fn zero_constant_rejected() {
        let e = disc_chain_pipeline(&FuncExpr::Const(c(0.0, 0.0)), 2, 0.1, &PipelineOptions::default())
            .unwrap_err();
        assert!(matches!(e.error, Error::Precondition(_)));
    }

    #[test]
    fn two_discs_linear() {
        let f = FuncExpr::Poly(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let eps = 0.1;
        let (_, rep) = disc_chain_pipeline(&f, 2, eps, &PipelineOptions::default()).unwrap();
        assert!(rep.total_sup_diff.value <= eps);
        assert!(rep.budget_spent() <= eps);
        assert_eq!(rep.final_certificate.verdict, Verdict::ZeroFree, "{:?}", rep.final_certificate);
    }
}
