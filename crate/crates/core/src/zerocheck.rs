//! Winding numbers by phase tracking and zero-freeness certificates.

use std::f64::consts::{FRAC_PI_4, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{min_modulus, Exclusion, FuncExpr, NormEstimate};
use crate::geometry::{boundary_grid, Contour, Region, Segment};
use crate::scalar::{point, Complex, Real};

/// Maximum bisection depth per contour piece.
pub const MAX_SUBDIVISION_DEPTH: usize = 24;

/// Values at allowed points below this modulus are reported as possible zeros.
pub const ALLOWED_ZERO_TOL: f64 = 1e-12;

/// Number of zeros of `f` enclosed by the closed contour `c`, from the total
/// continuous change of `arg f` along it.
pub fn winding_number<T: Real>(f: &FuncExpr<T>, c: &Contour<T>, modulus_floor: T) -> Result<i64> {
    let phases: Vec<T> = c
        .pieces
        .par_iter()
        .map(|p| {
            let seg = &c.segments[p.segment];
            let fa = sample(f, seg, p.t0, modulus_floor)?;
            let fb = sample(f, seg, p.t1, modulus_floor)?;
            phase_change(f, seg, p.t0, fa, p.t1, fb, 0, modulus_floor)
        })
        .collect::<Result<_>>()?;
    let total = phases.into_iter().fold(T::zero(), |a, b| a + b).as_f64();
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.05 {
        return Err(Error::Nonconvergence(format!(
            "phase change {total} is not a whole number of turns"
        )));
    }
    Ok(rounded as i64)
}

fn sample<T: Real>(f: &FuncExpr<T>, seg: &Segment<T>, t: T, floor: T) -> Result<Complex<T>> {
    let z = seg.point(t)?;
    let v = f.eval(z)?;
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Evaluation {
            point: point(z),
            reason: "non-finite value on contour".into(),
        });
    }
    if v.norm() <= floor {
        return Err(Error::ZeroOnContour { point: point(z) });
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn phase_change<T: Real>(
    f: &FuncExpr<T>,
    seg: &Segment<T>,
    ta: T,
    fa: Complex<T>,
    tb: T,
    fb: Complex<T>,
    depth: usize,
    floor: T,
) -> Result<T> {
    let limit = T::lit(FRAC_PI_4);
    let tm = (ta + tb) / T::lit(2.0);
    let fm = sample(f, seg, tm, floor)?;
    let d1 = (fm / fa).arg();
    let d2 = (fb / fm).arg();
    if d1.abs() < limit && d2.abs() < limit {
        return Ok(d1 + d2);
    }
    if depth >= MAX_SUBDIVISION_DEPTH {
        let z = seg.point(tm)?;
        return Err(Error::Nonconvergence(format!(
            "phase step not resolved after {MAX_SUBDIVISION_DEPTH} subdivisions near {z}"
        )));
    }
    Ok(phase_change(f, seg, ta, fa, tm, fm, depth + 1, floor)?
        + phase_change(f, seg, tm, fm, tb, fb, depth + 1, floor)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict<T> {
    ZeroFree,
    ZerosPossibleAt(Vec<Complex<T>>),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCertificate<T> {
    pub region: String,
    /// `(contour index, winding number)` for each sub-contour.
    pub winding_numbers: Vec<(usize, i64)>,
    pub min_modulus: Option<NormEstimate<T>>,
    pub exclusions_used: Vec<Exclusion<T>>,
    pub verdict: Verdict<T>,
}

impl<T: Real> ZeroCertificate<T> {
    pub fn is_zero_free(&self) -> bool {
        matches!(self.verdict, Verdict::ZeroFree)
    }

    /// Some sub-contour encloses zeros.
    pub fn has_interior_zeros(&self) -> bool {
        self.winding_numbers.iter().any(|&(_, w)| w != 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions<T> {
    /// Boundary density of the min-modulus grid.
    pub density: T,
    /// Relative radius reduction of the winding contours.
    pub shrink: T,
    pub exclusion_radius: T,
    pub modulus_floor: T,
    /// Arc step of the winding contours before adaptive subdivision.
    pub contour_step: T,
}

impl<T: Real> Default for CertifyOptions<T> {
    fn default() -> Self {
        Self {
            density: T::lit(64.0),
            shrink: T::lit(1e-6),
            exclusion_radius: T::lit(1e-3),
            modulus_floor: T::zero(),
            contour_step: T::lit(1.0 / 64.0),
        }
    }
}

/// Winding numbers on slightly shrunk sub-contours plus the minimum modulus
/// outside small discs around `allowed_zero_points`.
pub fn certify_zero_free<T: Real>(
    f: &FuncExpr<T>,
    region: &Region<T>,
    allowed_zero_points: &[Complex<T>],
    opts: &CertifyOptions<T>,
) -> ZeroCertificate<T> {
    let exclusions: Vec<Exclusion<T>> = allowed_zero_points
        .iter()
        .map(|&p| (p, opts.exclusion_radius))
        .collect();
    let mut cert = ZeroCertificate {
        region: region.describe(),
        winding_numbers: Vec::new(),
        min_modulus: None,
        exclusions_used: exclusions.clone(),
        verdict: Verdict::ZeroFree,
    };

    if let Region::Disc(_) | Region::Chain(_) = region {
        let tol = T::lit(1e-9);
        if let Some(p) = allowed_zero_points
            .iter()
            .find(|&&p| !region.discs().iter().any(|d| d.on_boundary(p, tol)))
        {
            cert.verdict = Verdict::Failed(format!("allowed zero {p} is not on the region boundary"));
            return cert;
        }
    }

    for (k, c) in region
        .shrunk_contours(opts.shrink, opts.contour_step)
        .iter()
        .enumerate()
    {
        match winding_number(f, c, opts.modulus_floor) {
            Ok(w) => {
                cert.winding_numbers.push((k, w));
                if w != 0 {
                    cert.verdict = Verdict::Failed(format!("winding number {w} on sub-contour {k}"));
                }
            }
            Err(e) => {
                cert.verdict = Verdict::Failed(format!("winding on sub-contour {k}: {e}"));
                return cert;
            }
        }
    }
    if matches!(cert.verdict, Verdict::Failed(_)) {
        return cert;
    }

    let grid = match boundary_grid(region, opts.density) {
        Ok(g) => g,
        Err(e) => {
            cert.verdict = Verdict::Failed(e.to_string());
            return cert;
        }
    };
    let mm = match min_modulus(f, &grid, &exclusions) {
        Ok(m) => m,
        Err(e) => {
            cert.verdict = Verdict::Failed(format!("min modulus: {e}"));
            return cert;
        }
    };
    cert.min_modulus = Some(mm);

    let mut possible = Vec::new();
    for &p in allowed_zero_points {
        match f.eval(p) {
            Ok(v) if v.norm() > T::lit(ALLOWED_ZERO_TOL) => {}
            Ok(_) => possible.push(p),
            Err(e) => {
                cert.verdict = Verdict::Failed(format!("evaluation at allowed point {p}: {e}"));
                return cert;
            }
        }
    }
    if mm.value <= opts.modulus_floor || !mm.refined {
        possible.push(mm.at);
    }
    if !possible.is_empty() {
        cert.verdict = Verdict::ZerosPossibleAt(possible);
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chain_boundary_contour, chain_discs, Disc};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn circle(center: C, r: f64) -> Contour<f64> {
        Contour::circle(center, r, 0.05)
    }

    #[test]
    fn winding_examples() {
        let z = FuncExpr::<f64>::identity();
        assert_eq!(winding_number(&z, &circle(c(0.0, 0.0), 1.0), 0.5).unwrap(), 1);
        let q = FuncExpr::Poly(vec![c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(winding_number(&q, &circle(c(0.0, 0.0), 1.0), 0.0).unwrap(), 2);
        let r = 3.0;
        assert_eq!(
            winding_number(&FuncExpr::Exp, &circle(c(0.5, 0.5), r), (-r - 1.0f64).exp()).unwrap(),
            0
        );
    }

    #[test]
    fn winding_reports_zero_on_contour() {
        let z = FuncExpr::<f64>::identity();
        let c0 = Contour::circle(c(1.0, 0.0), 1.0, 0.05);
        assert!(matches!(
            winding_number(&z, &c0, 1e-3),
            Err(Error::ZeroOnContour { .. }) | Err(Error::Nonconvergence(_))
        ));
    }

    #[test]
    fn chain_contour_winds_once_around_centers() {
        let chain = chain_discs::<f64>(2).unwrap();
        let contour = chain_boundary_contour(&chain);
        for center in [0.5, 1.5] {
            let f = FuncExpr::Poly(vec![c(-center, 0.0), c(1.0, 0.0)]);
            assert_eq!(winding_number(&f, &contour, 0.0).unwrap(), 1);
        }
    }

    #[test]
    fn winding_invariant_under_shift() {
        let f = FuncExpr::Poly(vec![c(0.1, 0.2), c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let cont = circle(c(0.0, 0.0), 1.5);
        let w = winding_number(&f, &cont, 0.0).unwrap();
        assert_eq!(w, 3);
        assert_eq!(winding_number(&f, &cont.shifted(37), 0.0).unwrap(), w);
    }

    #[test]
    fn certificate_examples() {
        let opts = CertifyOptions::default();
        let chain3 = Region::Chain(chain_discs::<f64>(3).unwrap());
        let one = certify_zero_free(&FuncExpr::Const(c(1.0, 0.0)), &chain3, &[], &opts);
        assert_eq!(one.verdict, Verdict::ZeroFree);
        assert_eq!(one.winding_numbers, vec![(0, 0), (1, 0), (2, 0)]);

        let chain2 = Region::Chain(chain_discs::<f64>(2).unwrap());
        let f = FuncExpr::Poly(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let cert = certify_zero_free(&f, &chain2, &[c(1.0, 0.0)], &opts);
        assert_eq!(cert.verdict, Verdict::ZerosPossibleAt(vec![c(1.0, 0.0)]));
        assert!(cert.winding_numbers.iter().all(|&(_, w)| w == 0));
        assert!(cert.min_modulus.unwrap().value > 0.0);

        let d2 = Region::Disc(Disc::canonical_right());
        let z = certify_zero_free(&FuncExpr::identity(), &d2, &[], &opts);
        assert!(!z.is_zero_free());
    }

    #[test]
    fn certificate_flags_interior_zero() {
        let chain2 = Region::Chain(chain_discs::<f64>(2).unwrap());
        let f = FuncExpr::Poly(vec![c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let cert = certify_zero_free(&f, &chain2, &[], &CertifyOptions::default());
        assert!(cert.has_interior_zeros());
        assert!(matches!(cert.verdict, Verdict::Failed(_)));
    }
}
