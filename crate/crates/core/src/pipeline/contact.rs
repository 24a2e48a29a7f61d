use crate::conformal::{eval_eta, fmt_complex, segment_distance, EtaParams, MapExpr, PiePiece};
use crate::error::{Error, Result};
use crate::funcs::{min_modulus, restrict, sup_modulus, Effort, FuncExpr};
use crate::geometry::{boundary_grid, Disc, DiscChain, Region};
use crate::scalar::{cross, Complex, Real};
use crate::zerocheck::certify_zero_free;

use super::steps::{parabolic_step, shrink_toward};
use super::{
    PipelineError, PipelineOptions, StepRecord, StepTag, COLLINEAR_TOL, CONTACT_ZERO_TOL,
    GLUE_CONTINUITY_TOL, MAX_HALVINGS,
};

/// Pie geometry chosen before the lens contraction is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieChoice<T> {
    pub alpha: T,
    pub r: T,
    pub delta1: T,
    pub delta2: T,
    /// Distance from 0 to the segment `[h(0), g2(0)]`.
    pub segment_distance: T,
}

impl<T: Real> PieChoice<T> {
    pub fn pie(&self, apex: Complex<T>) -> PiePiece<T> {
        PiePiece {
            apex,
            alpha: self.alpha,
            r: self.r,
            delta1: self.delta1,
        }
    }

    pub fn eta(&self, delta3: T) -> Result<EtaParams<T>> {
        EtaParams::new(self.alpha, self.r, self.delta1, delta3)
    }
}

/// Points of the closed canonical left disc with `|u| <= delta2`: grid points
/// plus a polar mesh around the contact point 0 with geometrically spaced radii.
fn near_contact_points<T: Real>(grid: &[Complex<T>], delta2: T) -> Vec<Complex<T>> {
    let mut pts: Vec<Complex<T>> = grid.iter().copied().filter(|u| u.norm() <= delta2).collect();
    pts.push(Complex::new(T::zero(), T::zero()));
    for i in 0..=NEAR_CONTACT_RINGS {
        let rho = delta2 * T::lit(2f64.powf(-(i as f64) / 4.0));
        let lo = (-rho).max(-T::one()).acos();
        let hi = T::TAU() - lo;
        for j in 0..=32 {
            let theta = lo + (hi - lo) * T::from_usize(j).unwrap() / T::lit(32.0);
            pts.push(Complex::from_polar(rho, theta));
        }
    }
    pts
}

/// Rings in the near-contact mesh; the innermost has radius `delta2 / 2^20`.
const NEAR_CONTACT_RINGS: usize = 80;

/// Pie parameters in canonical coordinates: `h` lives on the closed left disc
/// `|u + 1/2| <= 1/2` with contact point 0.
pub fn choose_pie_parameters<T: Real>(
    h0: Complex<T>,
    g20: Complex<T>,
    h: &FuncExpr<T>,
    opts: &PipelineOptions<T>,
) -> Result<PieChoice<T>> {
    choose_pie_parameters_on(h0, g20, h, &Disc::canonical_left(), Complex::new(T::zero(), T::zero()), opts)
}

/// Maps the left disc onto the canonical left disc, `contact` to 0.
fn to_canonical<T: Real>(left: &Disc<T>, contact: Complex<T>) -> MapExpr<T> {
    MapExpr::Similarity {
        from: contact,
        to: Complex::new(T::zero(), T::zero()),
        scale: Complex::new(T::lit(0.5), T::zero()) / (contact - left.center),
    }
}

/// As [`choose_pie_parameters`], with `h` defined on `left` whose boundary
/// touches its neighbour at `contact`.
pub fn choose_pie_parameters_on<T: Real>(
    h0: Complex<T>,
    g20: Complex<T>,
    h: &FuncExpr<T>,
    left: &Disc<T>,
    contact: Complex<T>,
    opts: &PipelineOptions<T>,
) -> Result<PieChoice<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    if g20.norm() == T::zero() {
        return Err(Error::Precondition("g2(0) must be nonzero".into()));
    }
    if cross(h0, g20).abs() <= T::lit(COLLINEAR_TOL) * h0.norm() * g20.norm() {
        return Err(Error::Precondition(format!(
            "h(0) = {h0} lies on the line through 0 and g2(0) = {g20}"
        )));
    }
    let d = g20 - h0;
    let alpha = d.arg();
    let r = d.norm();
    let seg = segment_distance(zero, h0, g20);

    let mut delta1 = None;
    for k in 3..3 + MAX_HALVINGS {
        let candidate = T::PI() / T::lit(2f64.powi(k as i32));
        let pie = PiePiece {
            apex: h0,
            alpha,
            r,
            delta1: candidate,
        };
        if pie.distance(zero) >= seg / T::lit(2.0) {
            delta1 = Some(candidate);
            break;
        }
    }
    let delta1 = delta1.ok_or_else(|| {
        Error::DegenerateGeometry("no pie half-angle keeps the translated pie away from 0".into())
    })?;

    let back = to_canonical(left, contact).inverse()?;
    let canon = boundary_grid(&Region::Disc(Disc::canonical_left()), opts.density)?;
    let grid: Vec<Complex<T>> = canon.points().collect();
    for k in 0..MAX_HALVINGS {
        let delta2 = T::lit(0.5f64.powi(k as i32));
        if delta2 < T::lit(1e-9) {
            break;
        }
        let mut ok = true;
        for u in near_contact_points(&grid, delta2) {
            let hz = h.eval(back.eval(u)?)?;
            let pie = PiePiece {
                apex: hz,
                alpha,
                r,
                delta1,
            };
            if pie.distance(zero) < seg / T::lit(4.0) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(PieChoice {
                alpha,
                r,
                delta1,
                delta2,
                segment_distance: seg,
            });
        }
    }
    Err(Error::DegenerateGeometry(
        "no radius delta2 >= 1e-9 keeps h + P away from 0 near the contact".into(),
    ))
}

/// Which case of the construction produced the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactBranch {
    /// Nonzero value at the contact; unchanged.
    Unchanged,
    /// Both shrinks agree at the contact; glued directly.
    EqualShrinks,
    /// Parabolic perturbation plus lens correction.
    Eta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactRemoval<T> {
    pub left: FuncExpr<T>,
    pub right: FuncExpr<T>,
    pub branch: ContactBranch,
    pub records: Vec<StepRecord<T>>,
}

/// Removes a zero at the tangency of the canonical discs `|z + 1/2| <= 1/2`
/// and `|z - 1/2| <= 1/2`. Returns a glue over the two discs.
pub fn remove_contact_zero<T: Real>(
    f: &FuncExpr<T>,
    budget: T,
    opts: &PipelineOptions<T>,
) -> Result<(FuncExpr<T>, Vec<StepRecord<T>>), PipelineError<T>> {
    let d1 = Disc::canonical_left();
    let d2 = Disc::canonical_right();
    let out = remove_contact_zero_between(
        &restrict(f, &d1),
        &restrict(f, &d2),
        &d1,
        &d2,
        Complex::new(T::zero(), T::zero()),
        budget,
        opts,
    )?;
    Ok((FuncExpr::glue_discs(vec![(d1, out.left), (d2, out.right)]), out.records))
}

/// Contact removal between two tangent discs. The result differs from the
/// input by at most `budget`, vanishes at most at the far end of `right`,
/// and keeps the values at both far ends.
pub fn remove_contact_zero_between<T: Real>(
    f_left: &FuncExpr<T>,
    f_right: &FuncExpr<T>,
    left: &Disc<T>,
    right: &Disc<T>,
    contact: Complex<T>,
    budget: T,
    opts: &PipelineOptions<T>,
) -> Result<ContactRemoval<T>, PipelineError<T>> {
    let mut records: Vec<StepRecord<T>> = Vec::new();
    let fail = |e: Error, recs: &Vec<StepRecord<T>>| PipelineError::new(e, recs.clone());
    let where_ = format!("contact {}", fmt_complex(contact));
    let left_end = left.center * T::lit(2.0) - contact;
    let right_end = right.center * T::lit(2.0) - contact;

    let at_contact = f_left.eval(contact).map_err(|e| fail(e, &records))?;
    if at_contact.norm() > T::lit(CONTACT_ZERO_TOL) {
        let mut rec = StepRecord::new(StepTag::Glue, where_, budget);
        rec.note = Some("value at the contact point is nonzero; pieces kept unchanged".into());
        records.push(rec);
        return Ok(ContactRemoval {
            left: f_left.clone(),
            right: f_right.clone(),
            branch: ContactBranch::Unchanged,
            records,
        });
    }
    if f_left.as_constant().is_some() || f_right.as_constant().is_some() {
        return Err(fail(
            Error::Precondition("a constant piece vanishing at the contact vanishes everywhere".into()),
            &records,
        ));
    }

    // the construction overshoots its budget by a factor two
    let inner = budget / T::lit(2.0);
    let third = inner / T::lit(3.0);

    let (g1, rec) = shrink_toward(f_left, left, left_end, third, opts).map_err(|e| fail(e, &records))?;
    records.push(rec);
    let (g2, rec) = shrink_toward(f_right, right, right_end, third, opts).map_err(|e| fail(e, &records))?;
    records.push(rec);

    let g1c = g1.eval(contact).map_err(|e| fail(e, &records))?;
    let g2c = g2.eval(contact).map_err(|e| fail(e, &records))?;
    if (g1c - g2c).norm() <= T::lit(CONTACT_ZERO_TOL) {
        let mut rec = StepRecord::new(StepTag::Glue, where_, budget);
        rec.note = Some("shrunk pieces agree at the contact point; glued directly".into());
        rec.certificate = certify_pair(&g1, &g2, left, right, contact, right_end, opts);
        records.push(rec);
        return Ok(ContactRemoval {
            left: g1,
            right: g2,
            branch: ContactBranch::EqualShrinks,
            records,
        });
    }
    if g2c.norm() == T::zero() {
        return Err(fail(
            Error::DegenerateGeometry("right piece still vanishes at the contact after shrinking".into()),
            &records,
        ));
    }

    let off_line = move |h: &FuncExpr<T>| match h.eval(contact) {
        Ok(h0) => cross(h0, g2c).abs() > T::lit(COLLINEAR_TOL) * h0.norm() * g2c.norm(),
        Err(_) => false,
    };
    let (h, rec) =
        parabolic_step(&g1, left, left_end, third, &off_line, opts).map_err(|e| fail(e, &records))?;
    records.push(rec);
    let h0 = h.eval(contact).map_err(|e| fail(e, &records))?;

    let pie = choose_pie_parameters_on(h0, g2c, &h, left, contact, opts).map_err(|e| fail(e, &records))?;

    let left_grid = boundary_grid(&Region::Disc(*left), opts.density).map_err(|e| fail(e, &records))?;
    let m = min_modulus(&h, &left_grid, &[]).map_err(|e| fail(e, &records))?.value;
    if !(m > T::zero()) {
        return Err(fail(
            Error::DegenerateGeometry("perturbed left piece has zero minimum modulus".into()),
            &records,
        ));
    }

    let (params, sup_eta) = choose_delta3(&pie, m, opts).map_err(|e| fail(e, &records))?;
    let to_canon = to_canonical(left, contact);
    let eta_term = FuncExpr::identity().compose_map(MapExpr::compose(MapExpr::Eta(params), to_canon));
    let new_left = FuncExpr::sum(h, eta_term);

    let joined = new_left.eval(contact).map_err(|e| fail(e, &records))?;
    if (joined - g2c).norm() > T::lit(GLUE_CONTINUITY_TOL) {
        return Err(fail(
            Error::Consistency(format!("glued pieces differ by {} at the contact", (joined - g2c).norm())),
            &records,
        ));
    }

    let mut rec = StepRecord::new(StepTag::ContactRemoval, where_, budget)
        .with_param("alpha", params.alpha)
        .with_param("r", params.r)
        .with_param("delta1", params.delta1)
        .with_param("delta2", pie.delta2)
        .with_param("delta3", params.delta3)
        .with_param("m", m)
        .with_param("sup_eta", sup_eta);
    rec.error_budget_spent = sup_eta;
    rec.note = Some("the construction bounds the error by twice its working budget; half the budget is used".into());
    rec.certificate = certify_pair(&new_left, &g2, left, right, contact, right_end, opts);
    records.push(rec);

    Ok(ContactRemoval {
        left: new_left,
        right: g2,
        branch: ContactBranch::Eta,
        records,
    })
}

/// Largest dyadic contraction with `sup |eta| < m/2` away from the contact.
fn choose_delta3<T: Real>(
    pie: &PieChoice<T>,
    m: T,
    opts: &PipelineOptions<T>,
) -> Result<(EtaParams<T>, T)> {
    let d1 = Disc::canonical_left();
    let grid = boundary_grid(&Region::Disc(d1), opts.density)?;
    let lo = (-pie.delta2).max(-T::one()).acos();
    let hi = T::TAU() - lo;
    let arc: Vec<Complex<T>> = (0..=64)
        .map(|j| Complex::from_polar(pie.delta2, lo + (hi - lo) * T::from_usize(j).unwrap() / T::lit(64.0)))
        .collect();
    for k in 0..MAX_HALVINGS {
        let params = pie.eta(T::lit(0.5f64.powi(k as i32)))?;
        let eta = FuncExpr::identity().compose_map(MapExpr::Eta(params));
        let on_grid = sup_modulus(&eta, &grid, &[(Complex::new(T::zero(), T::zero()), pie.delta2)], Effort::Quick)?;
        let mut sup = on_grid.value;
        for &u in &arc {
            sup = sup.max(eval_eta(&params, u)?.norm());
        }
        if sup < m / T::lit(2.0) {
            return Ok((params, sup));
        }
    }
    Err(Error::DegenerateGeometry(
        "no sector contraction keeps the lens correction below half the minimum modulus".into(),
    ))
}

fn certify_pair<T: Real>(
    l: &FuncExpr<T>,
    r: &FuncExpr<T>,
    left: &Disc<T>,
    right: &Disc<T>,
    contact: Complex<T>,
    right_end: Complex<T>,
    opts: &PipelineOptions<T>,
) -> Option<crate::zerocheck::ZeroCertificate<T>> {
    if !opts.certify_steps {
        return None;
    }
    let region = Region::Chain(DiscChain {
        discs: vec![*left, *right],
        tangencies: vec![contact],
    });
    let f = FuncExpr::glue_discs(vec![(*left, l.clone()), (*right, r.clone())]);
    Some(certify_zero_free(&f, &region, &[right_end], &opts.certify))
}

/// `sup |f - g|` on the two-disc union.
#[cfg(test)]
pub(crate) fn pair_sup_diff<T: Real>(
    f: &FuncExpr<T>,
    g: &FuncExpr<T>,
    left: &Disc<T>,
    right: &Disc<T>,
    contact: Complex<T>,
    density: T,
) -> Result<crate::funcs::NormEstimate<T>> {
    let region = Region::Chain(DiscChain {
        discs: vec![*left, *right],
        tangencies: vec![contact],
    });
    crate::funcs::sup_diff(f, g, &boundary_grid(&region, density)?)
}
