use crate::conformal::{conjugate_to_disc, fmt_complex, MapExpr};
use crate::error::{Error, Result};
use crate::funcs::{sup_diff, sup_diff_with, Effort, FuncExpr, NormEstimate};
use crate::geometry::{boundary_grid, Contour, Disc, Region, SampleGrid};
use crate::scalar::{Complex, Real};
use crate::zerocheck::{certify_zero_free, winding_number};

use super::{PipelineOptions, StepRecord, StepTag, TracePoint, MAX_HALVINGS, MIN_GAP};

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `f(p + r (z - p))`.
pub fn shrink_with_ratio<T: Real>(f: &FuncExpr<T>, disc: &Disc<T>, p: Complex<T>, r: T) -> Result<FuncExpr<T>> {
    let m = conjugate_to_disc(
        &MapExpr::homothety(zero(), r),
        &Disc::canonical_right(),
        disc,
        zero(),
        p,
    )?;
    Ok(f.clone().compose_map(m))
}

/// `f ∘ L_r` conjugated so the lens corners sit at `a` and `b`.
pub fn lens_with_ratio<T: Real>(
    f: &FuncExpr<T>,
    disc: &Disc<T>,
    (a, b): (Complex<T>, Complex<T>),
    r: T,
) -> Result<FuncExpr<T>> {
    if ((a + b) / T::lit(2.0) - disc.center).norm() > T::lit(1e-10) * (T::one() + disc.radius) {
        return Err(Error::InvalidArgument(format!(
            "lens endpoints {a} and {b} are not diametrically opposite on the disc"
        )));
    }
    let m = conjugate_to_disc(&MapExpr::lens(r)?, &Disc::canonical_right(), disc, zero(), a)?;
    Ok(f.clone().compose_map(m))
}

/// `f ∘ w_delta` conjugated so the parabolic fixed point is `p`.
pub fn parabolic_with_delta<T: Real>(
    f: &FuncExpr<T>,
    disc: &Disc<T>,
    p: Complex<T>,
    delta: T,
) -> Result<FuncExpr<T>> {
    let m = conjugate_to_disc(&MapExpr::parabolic(delta)?, &Disc::canonical_right(), disc, zero(), p)?;
    Ok(f.clone().compose_map(m))
}

/// Fails when `f` winds around zero just inside the disc boundary.
pub(crate) fn require_boundary_zeros_only<T: Real>(
    f: &FuncExpr<T>,
    disc: &Disc<T>,
    opts: &PipelineOptions<T>,
) -> Result<()> {
    let c = Contour::circle(
        disc.center,
        disc.radius * (T::one() - opts.certify.shrink),
        opts.certify.contour_step,
    );
    match winding_number(f, &c, opts.certify.modulus_floor) {
        Ok(0) => Ok(()),
        Ok(w) => Err(Error::Precondition(format!(
            "function has {w} zero(s) inside the disc centered at {}",
            disc.center
        ))),
        Err(Error::ZeroOnContour { point }) => Err(Error::Precondition(format!(
            "function vanishes inside the disc near ({}, {})",
            point.0, point.1
        ))),
        Err(e) => Err(e),
    }
}

pub(crate) struct SearchOutcome<T> {
    pub parameter: T,
    pub result: FuncExpr<T>,
    pub estimate: NormEstimate<T>,
}

/// Tries `params` in order; the first candidate whose quick estimate, then
/// refined estimate, is within budget and which `accept`s wins.
pub(crate) fn dyadic_search<T: Real>(
    f: &FuncExpr<T>,
    grid: &SampleGrid<T>,
    budget: T,
    params: impl IntoIterator<Item = T>,
    make: impl Fn(T) -> Result<FuncExpr<T>>,
    accept: &dyn Fn(&FuncExpr<T>) -> bool,
    trace: &mut Vec<TracePoint<T>>,
) -> Result<Option<SearchOutcome<T>>> {
    for parameter in params {
        let g = make(parameter)?;
        let quick = sup_diff_with(f, &g, grid, Effort::Quick)?;
        trace.push(TracePoint {
            parameter,
            sup_diff: quick.value,
        });
        if quick.value <= budget && accept(&g) {
            let estimate = sup_diff(f, &g, grid)?;
            if estimate.value <= budget {
                return Ok(Some(SearchOutcome {
                    parameter,
                    result: g,
                    estimate,
                }));
            }
        }
    }
    Ok(None)
}

/// `1 - 2^-k` for `k = 1, 2, ...` while the gap stays above `MIN_GAP`.
fn ratios<T: Real>() -> impl Iterator<Item = T> {
    (1..=MAX_HALVINGS)
        .map(|k| T::lit(0.5f64.powi(k as i32)))
        .take_while(|gap| *gap >= T::lit(MIN_GAP))
        .map(|gap| T::one() - gap)
}

fn check_budget<T: Real>(budget: T) -> Result<()> {
    if !(budget > T::zero()) {
        return Err(Error::InvalidArgument(format!("budget must be positive, got {budget}")));
    }
    Ok(())
}

/// Precomposes with the contraction of `disc` toward the boundary point `p`,
/// choosing the strongest dyadic contraction within `budget`.
pub fn shrink_toward<T: Real>(
    f: &FuncExpr<T>,
    disc: &Disc<T>,
    p: Complex<T>,
    budget: T,
    opts: &PipelineOptions<T>,
) -> Result<(FuncExpr<T>, StepRecord<T>)> {
    check_budget(budget)?;
    if !disc.on_boundary(p, T::lit(1e-10)) {
        return Err(Error::InvalidArgument(format!("shrink anchor {p} is not on the disc boundary")));
    }
    require_boundary_zeros_only(f, disc, opts)?;
    let grid = boundary_grid(&Region::Disc(*disc), opts.density)?;
    let mut rec = StepRecord::new(
        StepTag::Shrink,
        format!("disc {} toward {}", fmt_complex(disc.center), fmt_complex(p)),
        budget,
    );
    let found = dyadic_search(
        f,
        &grid,
        budget,
        ratios(),
        |r| shrink_with_ratio(f, disc, p, r),
        &|_| true,
        &mut rec.trace,
    )?;
    let Some(out) = found else {
        return Err(Error::Nonconvergence(format!(
            "shrinking toward {p} stays above budget {budget} up to 1 - r = {MIN_GAP:e}"
        )));
    };
    rec = rec.with_param("r", out.parameter);
    rec.error_budget_spent = out.estimate.value;
    if opts.certify_steps {
        rec.certificate = Some(certify_zero_free(&out.result, &Region::Disc(*disc), &[p], &opts.certify));
    }
    Ok((out.result, rec))
}

/// Precomposes with a lens map of the disc with corners at `endpoints`,
/// choosing the thinnest dyadic lens within `budget`.
pub fn lens_step<T: Real>(
    f: &FuncExpr<T>,
    disc: &Disc<T>,
    endpoints: (Complex<T>, Complex<T>),
    budget: T,
    opts: &PipelineOptions<T>,
) -> Result<(FuncExpr<T>, StepRecord<T>)> {
    check_budget(budget)?;
    lens_with_ratio(f, disc, endpoints, T::one())?;
    require_boundary_zeros_only(f, disc, opts)?;
    let grid = boundary_grid(&Region::Disc(*disc), opts.density)?;
    let mut rec = StepRecord::new(
        StepTag::Lens,
        format!(
            "disc {} between {} and {}",
            fmt_complex(disc.center),
            fmt_complex(endpoints.0),
            fmt_complex(endpoints.1)
        ),
        budget,
    );
    let found = dyadic_search(
        f,
        &grid,
        budget,
        ratios(),
        |r| lens_with_ratio(f, disc, endpoints, r),
        &|_| true,
        &mut rec.trace,
    )?;
    let Some(out) = found else {
        return Err(Error::Nonconvergence(format!(
            "lens step stays above budget {budget} up to 1 - r = {MIN_GAP:e}"
        )));
    };
    rec = rec.with_param("r", out.parameter);
    rec.error_budget_spent = out.estimate.value;
    if opts.certify_steps {
        rec.certificate = Some(certify_zero_free(
            &out.result,
            &Region::Disc(*disc),
            &[endpoints.0, endpoints.1],
            &opts.certify,
        ));
    }
    Ok((out.result, rec))
}

/// Precomposes with the parabolic map fixing `p`, for the largest `delta` in
/// `1, 1/2, 1/4, ...` within `budget` whose result satisfies `accept`.
pub fn parabolic_step<T: Real>(
    f: &FuncExpr<T>,
    disc: &Disc<T>,
    p: Complex<T>,
    budget: T,
    accept: &dyn Fn(&FuncExpr<T>) -> bool,
    opts: &PipelineOptions<T>,
) -> Result<(FuncExpr<T>, StepRecord<T>)> {
    check_budget(budget)?;
    let grid = boundary_grid(&Region::Disc(*disc), opts.density)?;
    let mut rec = StepRecord::new(
        StepTag::Parabolic,
        format!("disc {} at {}", fmt_complex(disc.center), fmt_complex(p)),
        budget,
    );
    let deltas = (0..=MAX_HALVINGS).map(|k| T::lit(0.5f64.powi(k as i32)));
    let found = dyadic_search(
        f,
        &grid,
        budget,
        deltas,
        |d| parabolic_with_delta(f, disc, p, d),
        accept,
        &mut rec.trace,
    )?;
    let Some(out) = found else {
        return Err(Error::DegenerateGeometry(format!(
            "no parabolic perturbation at {p} within budget {budget} passed the acceptance test \
             after {} trials",
            rec.trace.len()
        )));
    };
    rec = rec.with_param("delta", out.parameter);
    rec.error_budget_spent = out.estimate.value;
    Ok((out.result, rec))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn opts() -> PipelineOptions<f64> {
        PipelineOptions::default()
    }

    #[test]
    fn ratio_one_is_identity() {
        let d2 = Disc::canonical_right();
        let f = FuncExpr::Exp;
        let g = shrink_with_ratio(&f, &d2, c(0.0, 0.0), 1.0).unwrap();
        let grid = boundary_grid(&Region::Disc(d2), 32.0).unwrap();
        assert_eq!(sup_diff(&f, &g, &grid).unwrap().value, 0.0);
    }

    #[test]
    fn shrink_identity_on_d2() {
        let d2 = Disc::canonical_right();
        let eps = 0.01;
        let (g, rec) = shrink_toward(&FuncExpr::identity(), &d2, c(0.0, 0.0), eps, &opts()).unwrap();
        let r = rec.param("r").unwrap();
        assert!(1.0 - r <= eps);
        assert!((rec.error_budget_spent - (1.0 - r)).abs() < 1e-12);
        assert_eq!(g.eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let cert = rec.certificate.unwrap();
        assert!(cert.winding_numbers.iter().all(|&(_, w)| w == 0));
    }

    #[test]
    fn shrink_preserves_anchor_value() {
        let d = Disc::new(c(1.5, 0.0), 0.5).unwrap();
        let f = FuncExpr::Poly(vec![c(5.0 - 2.0, 0.0), c(1.0, 0.0)]);
        let p = c(2.0, 0.0);
        let (g, _) = shrink_toward(&f, &d, p, 0.05, &opts()).unwrap();
        assert_eq!(g.eval(p).unwrap(), c(5.0, 0.0));
    }

    #[test]
    fn shrink_rejects_interior_zero() {
        let d2 = Disc::canonical_right();
        let f = FuncExpr::Poly(vec![c(-0.5, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            shrink_toward(&f, &d2, c(0.0, 0.0), 0.1, &opts()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lens_moves_boundary_zero() {
        let d2 = Disc::canonical_right();
        let f = FuncExpr::Poly(vec![c(-0.5, -0.5), c(1.0, 0.0)]);
        let (g, rec) = lens_step(&f, &d2, (c(0.0, 0.0), c(1.0, 0.0)), 0.05, &opts()).unwrap();
        assert!(rec.param("r").unwrap() < 1.0);
        let cert = rec.certificate.unwrap();
        assert!(cert.min_modulus.unwrap().value > 0.0);
        assert!(cert.is_zero_free(), "{:?}", cert.verdict);
        assert_eq!(g.eval(c(0.0, 0.0)).unwrap(), f.eval(c(0.0, 0.0)).unwrap());
        assert!((g.eval(c(1.0, 0.0)).unwrap() - f.eval(c(1.0, 0.0)).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn parabolic_closed_form_at_one() {
        let d2 = Disc::canonical_right();
        let f = FuncExpr::identity();
        let budget = 0.01;
        let (g, rec) = parabolic_step(&f, &d2, c(0.0, 0.0), budget, &|_| true, &opts()).unwrap();
        let delta = rec.param("delta").unwrap();
        let v = g.eval(c(1.0, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0) / c(1.0, -delta)).norm() < 1e-14);
        assert!((v - c(1.0, 0.0)).norm() <= budget);
        assert_eq!(g.eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn parabolic_rejects_everything() {
        let d2 = Disc::canonical_right();
        let r = parabolic_step(&FuncExpr::Exp, &d2, c(0.0, 0.0), 0.1, &|_| false, &opts());
        assert!(matches!(r, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn traces_decrease_for_exp() {
        let d2 = Disc::canonical_right();
        let o = opts();
        let (_, s) = shrink_toward(&FuncExpr::Exp, &d2, c(0.0, 0.0), 1e-3, &o).unwrap();
        let (_, l) = lens_step(&FuncExpr::Exp, &d2, (c(0.0, 0.0), c(1.0, 0.0)), 1e-3, &o).unwrap();
        let (_, p) = parabolic_step(&FuncExpr::Exp, &d2, c(0.0, 0.0), 1e-3, &|_| true, &o).unwrap();
        for rec in [s, l, p] {
            assert!(rec.trace.len() > 2);
            for w in rec.trace.windows(2) {
                assert!(w[1].sup_diff < w[0].sup_diff, "{:?}", rec.trace);
            }
        }
    }
}
