//! Functions on compact regions as expression trees, plus grid-based sup-norm
//! and min-modulus estimates.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{fmt_complex, invert_on_disc, principal_power, MapExpr};
use crate::error::{Error, Result};
use crate::geometry::{Disc, SampleGrid};
use crate::polyfit::OrthoPoly;
use crate::scalar::{point, Complex, Real};

/// Slack for deciding which glue piece contains a point.
pub const GLUE_TOL: f64 = 1e-9;

/// `GLUE_TOL`, widened for scalars whose rounding exceeds it.
fn glue_tol<T: Real>() -> T {
    T::lit(GLUE_TOL).max(T::epsilon() * T::lit(64.0))
}

/// Relative agreement between successive refinements that marks an estimate
/// as refined.
pub const REFINE_REL_TOL: f64 = 1e-3;

/// Maximum number of density doublings in a refined estimate.
pub const MAX_REFINEMENTS: usize = 3;

const POLISH_CANDIDATES: usize = 3;
const GOLDEN_STEPS: usize = 28;

/// Domain of one glue piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GlueRegion<T> {
    Disc(Disc<T>),
    /// `map(disc)`.
    Image { disc: Disc<T>, map: MapExpr<T> },
}

impl<T: Real> GlueRegion<T> {
    /// Signed distance of `z` to the piece, measured in parameter coordinates
    /// for images. Points whose preimage cannot be found are infinitely far.
    pub fn signed_distance(&self, z: Complex<T>) -> T {
        match self {
            GlueRegion::Disc(d) => d.signed_distance(z),
            GlueRegion::Image { disc, map } => {
                let analytic = map.inverse().and_then(|inv| inv.eval(z)).ok();
                let w = match analytic {
                    Some(w) if w.re.is_finite() && w.im.is_finite() => Some(w),
                    _ => invert_on_disc(map, disc, z).ok(),
                };
                w.map_or(T::infinity(), |w| disc.signed_distance(w))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluePiece<T> {
    pub region: GlueRegion<T>,
    pub f: FuncExpr<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FuncExpr<T> {
    /// Coefficients in ascending degree.
    Poly(Vec<Complex<T>>),
    Exp,
    Sin,
    Cos,
    Const(Complex<T>),
    Sum(Box<FuncExpr<T>>, Box<FuncExpr<T>>),
    Product(Box<FuncExpr<T>>, Box<FuncExpr<T>>),
    Quotient(Box<FuncExpr<T>>, Box<FuncExpr<T>>),
    /// Integer exponents use repeated multiplication, others the principal branch.
    Pow { base: Box<FuncExpr<T>>, exponent: T },
    /// `outer(inner(z))`
    Compose {
        outer: Box<FuncExpr<T>>,
        inner: Box<FuncExpr<T>>,
    },
    /// `f(map(z))`
    ComposedWithMap { f: Box<FuncExpr<T>>, map: MapExpr<T> },
    /// Piecewise definition; pieces agree where their closures meet.
    RestrictedGlue(Vec<GluePiece<T>>),
    /// Polynomial stored in an orthonormal basis with its recurrence.
    Orthogonal(Box<OrthoPoly<T>>),
}

impl<T: Real> FuncExpr<T> {
    pub fn identity() -> Self {
        FuncExpr::Poly(vec![Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())])
    }

    pub fn constant(c: Complex<T>) -> Self {
        FuncExpr::Const(c)
    }

    pub fn sum(a: Self, b: Self) -> Self {
        FuncExpr::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: Self, b: Self) -> Self {
        FuncExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn compose_map(self, map: MapExpr<T>) -> Self {
        match map {
            MapExpr::Identity => self,
            map => FuncExpr::ComposedWithMap {
                f: Box::new(self),
                map,
            },
        }
    }

    pub fn glue(pieces: Vec<GluePiece<T>>) -> Self {
        FuncExpr::RestrictedGlue(pieces)
    }

    /// Glue over closed discs.
    pub fn glue_discs(pieces: Vec<(Disc<T>, FuncExpr<T>)>) -> Self {
        FuncExpr::RestrictedGlue(
            pieces
                .into_iter()
                .map(|(d, f)| GluePiece {
                    region: GlueRegion::Disc(d),
                    f,
                })
                .collect(),
        )
    }

    /// The constant value if the expression is syntactically constant.
    pub fn as_constant(&self) -> Option<Complex<T>> {
        match self {
            FuncExpr::Const(c) => Some(*c),
            FuncExpr::Poly(cs) if cs.iter().skip(1).all(|c| c.norm() == T::zero()) => {
                Some(cs.first().copied().unwrap_or(Complex::new(T::zero(), T::zero())))
            }
            _ => None,
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        match self {
            FuncExpr::Poly(cs) => Ok(horner(cs, z)),
            FuncExpr::Exp => Ok(z.exp()),
            FuncExpr::Sin => Ok(z.sin()),
            FuncExpr::Cos => Ok(z.cos()),
            FuncExpr::Const(c) => Ok(*c),
            FuncExpr::Sum(a, b) => Ok(a.eval(z)? + b.eval(z)?),
            FuncExpr::Product(a, b) => Ok(a.eval(z)? * b.eval(z)?),
            FuncExpr::Quotient(a, b) => {
                let den = b.eval(z)?;
                if den.norm() == T::zero() {
                    return Err(Error::Evaluation {
                        point: point(z),
                        reason: "division by zero".into(),
                    });
                }
                Ok(a.eval(z)? / den)
            }
            FuncExpr::Pow { base, exponent } => {
                let b = base.eval(z)?;
                let e = *exponent;
                if e.fract() == T::zero() && e.abs() <= T::lit(1024.0) {
                    let k = e.abs().to_i32().unwrap_or(0);
                    let p = int_power(b, k);
                    if e < T::zero() {
                        if p.norm() == T::zero() {
                            return Err(Error::Evaluation {
                                point: point(z),
                                reason: "negative power of zero".into(),
                            });
                        }
                        return Ok(Complex::new(T::one(), T::zero()) / p);
                    }
                    Ok(p)
                } else {
                    principal_power(b, e)
                }
            }
            FuncExpr::Compose { outer, inner } => outer.eval(inner.eval(z)?),
            FuncExpr::Orthogonal(p) => Ok(p.eval(z)),
            FuncExpr::ComposedWithMap { f, map } => f.eval(map.eval(z)?),
            FuncExpr::RestrictedGlue(pieces) => {
                let mut best: Option<(T, &GluePiece<T>)> = None;
                for p in pieces {
                    let d = p.region.signed_distance(z);
                    if best.is_none_or(|(b, _)| d < b) {
                        best = Some((d, p));
                    }
                }
                match best {
                    Some((d, p)) if d <= glue_tol::<T>() => p.f.eval(z),
                    _ => Err(Error::InvalidArgument(format!(
                        "point {z} lies outside every glue piece"
                    ))),
                }
            }
        }
    }
}

fn horner<T: Real>(cs: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    cs.iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
}

fn int_power<T: Real>(mut b: Complex<T>, mut k: i32) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * b;
        }
        b = b * b;
        k >>= 1;
    }
    acc
}

pub fn eval_func<T: Real>(f: &FuncExpr<T>, z: Complex<T>) -> Result<Complex<T>> {
    f.eval(z)
}

/// Values at many points, evaluated in parallel, in input order.
pub fn eval_many<T: Real>(f: &FuncExpr<T>, points: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    points.par_iter().map(|&z| f.eval(z)).collect()
}

/// The piece of a glue whose domain is `disc`, or `f` itself when it is not
/// a glue over that disc.
pub fn restrict<T: Real>(f: &FuncExpr<T>, disc: &Disc<T>) -> FuncExpr<T> {
    if let FuncExpr::RestrictedGlue(pieces) = f {
        for p in pieces {
            if let GlueRegion::Disc(d) = &p.region {
                if d == disc {
                    return p.f.clone();
                }
            }
        }
    }
    f.clone()
}

/// Largest disagreement between glue pieces at `z`, over pieces whose closed
/// domains contain it.
pub fn glue_mismatch<T: Real>(pieces: &[GluePiece<T>], z: Complex<T>) -> Result<T> {
    let vals = pieces
        .iter()
        .filter(|p| p.region.signed_distance(z) <= glue_tol::<T>())
        .map(|p| p.f.eval(z))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = T::zero();
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            worst = worst.max((vals[i] - vals[j]).norm());
        }
    }
    Ok(worst)
}

impl<T: Real> fmt::Display for FuncExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncExpr::Poly(cs) => {
                let terms: Vec<String> = cs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() != T::zero())
                    .map(|(k, c)| match k {
                        0 => fmt_complex(*c),
                        1 => format!("{}*z", fmt_complex(*c)),
                        _ => format!("{}*z^{}", fmt_complex(*c), k),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "({})", terms.join(" + "))
                }
            }
            FuncExpr::Exp => write!(f, "exp(z)"),
            FuncExpr::Sin => write!(f, "sin(z)"),
            FuncExpr::Cos => write!(f, "cos(z)"),
            FuncExpr::Const(c) => write!(f, "{}", fmt_complex(*c)),
            FuncExpr::Sum(a, b) => write!(f, "({a} + {b})"),
            FuncExpr::Product(a, b) => write!(f, "({a} * {b})"),
            FuncExpr::Quotient(a, b) => write!(f, "({a} / {b})"),
            FuncExpr::Pow { base, exponent } => write!(f, "({base})^{exponent}"),
            FuncExpr::Compose { outer, inner } => write!(f, "[{outer}]∘[{inner}]"),
            FuncExpr::ComposedWithMap { f: g, map } => write!(f, "[{g}]∘{map}"),
            FuncExpr::Orthogonal(p) => write!(
                f,
                "orthopoly(degree {}, center {}, scale {})",
                p.degree(),
                fmt_complex(p.center),
                p.scale
            ),
            FuncExpr::RestrictedGlue(pieces) => {
                write!(f, "glue{{")?;
                for (k, p) in pieces.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    match &p.region {
                        GlueRegion::Disc(d) => write!(f, "disc({}, {})", fmt_complex(d.center), d.radius)?,
                        GlueRegion::Image { disc, map } => {
                            write!(f, "{map}(disc({}, {}))", fmt_complex(disc.center), disc.radius)?
                        }
                    }
                    write!(f, ": {}", p.f)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A grid-based estimate of a sup-norm or a minimum modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate<T> {
    pub value: T,
    /// Boundary density of the finest grid used.
    pub grid_density: T,
    /// Two successive refinements agreed within `REFINE_REL_TOL`.
    pub refined: bool,
    /// Where the extremum was found.
    pub at: Complex<T>,
}

/// Closed disc `|z - center| < radius` removed from a minimum search.
pub type Exclusion<T> = (Complex<T>, T);

/// How much work an estimate does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    /// Given grid plus local polishing.
    Quick,
    /// Density doubling until two levels agree, at most `MAX_REFINEMENTS` times.
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    Max,
    Min,
}

impl Goal {
    fn better<T: Real>(self, a: T, b: T) -> bool {
        match self {
            Goal::Max => a > b,
            Goal::Min => a < b,
        }
    }

    fn worst<T: Real>(self) -> T {
        match self {
            Goal::Max => T::neg_infinity(),
            Goal::Min => T::infinity(),
        }
    }
}

fn excluded<T: Real>(z: Complex<T>, exclusions: &[Exclusion<T>]) -> bool {
    exclusions.iter().any(|(c, r)| (z - *c).norm() < *r)
}

fn with_point<T: Real>(z: Complex<T>, e: Error) -> Error {
    match e {
        e @ (Error::Evaluation { .. } | Error::MapInversion { .. }) => e,
        other => Error::Evaluation {
            point: point(z),
            reason: other.to_string(),
        },
    }
}

/// Extremum of `objective` over one grid, then golden-section polishing along
/// the boundary around the best few boundary samples.
fn grid_extremum<T: Real, F>(
    grid: &SampleGrid<T>,
    objective: &F,
    goal: Goal,
    exclusions: &[Exclusion<T>],
) -> Result<(T, Complex<T>)>
where
    F: Fn(Complex<T>) -> Result<T> + Sync,
{
    let points: Vec<Complex<T>> = grid.points().collect();
    let values: Vec<Option<T>> = points
        .par_iter()
        .map(|&z| {
            if excluded(z, exclusions) {
                Ok(None)
            } else {
                objective(z).map(Some).map_err(|e| with_point(z, e))
            }
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(T, Complex<T>)> = None;
    for (z, v) in points.iter().zip(&values) {
        if let Some(v) = v {
            if best.is_none_or(|(b, _)| goal.better(*v, b)) {
                best = Some((*v, *z));
            }
        }
    }
    let Some(mut best) = best else {
        return Err(Error::InvalidArgument("every grid sample is excluded".into()));
    };

    let nb = grid.boundary.len();
    let mut order: Vec<usize> = (0..nb).filter(|&i| values[i].is_some()).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (values[a].unwrap(), values[b].unwrap());
        let ord = va.partial_cmp(&vb).unwrap_or(std::cmp::Ordering::Equal);
        match goal {
            Goal::Max => ord.reverse(),
            Goal::Min => ord,
        }
        .then(a.cmp(&b))
    });
    order.truncate(POLISH_CANDIDATES);

    let polished: Vec<Option<(T, Complex<T>)>> = order
        .par_iter()
        .map(|&i| polish(grid, i, objective, goal, exclusions))
        .collect();
    for (v, z) in polished.into_iter().flatten() {
        if goal.better(v, best.0) {
            best = (v, z);
        }
    }
    Ok(best)
}

fn polish<T: Real, F>(
    grid: &SampleGrid<T>,
    index: usize,
    objective: &F,
    goal: Goal,
    exclusions: &[Exclusion<T>],
) -> Option<(T, Complex<T>)>
where
    F: Fn(Complex<T>) -> Result<T> + Sync,
{
    let s = grid.boundary[index];
    let h = grid.angular_step(s.piece);
    let eval = |theta: T| -> (T, Complex<T>) {
        match grid.region.boundary_point(s.piece, theta) {
            Ok(z) if !excluded(z, exclusions) => match objective(z) {
                Ok(v) if !v.is_nan() => (v, z),
                _ => (goal.worst(), z),
            },
            Ok(z) => (goal.worst(), z),
            Err(_) => (goal.worst(), s.z),
        }
    };
    // golden section on the sign-adjusted objective so that we always minimize
    let key = |v: T| match goal {
        Goal::Max => -v,
        Goal::Min => v,
    };
    let phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (s.theta - h, s.theta + h);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let mut best = if goal.better(f1.0, f2.0) { f1 } else { f2 };
    for _ in 0..GOLDEN_STEPS {
        if key(f1.0) <= key(f2.0) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1);
            if goal.better(f1.0, best.0) {
                best = f1;
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2);
            if goal.better(f2.0, best.0) {
                best = f2;
            }
        }
    }
    if best.0.is_infinite() {
        None
    } else {
        Some(best)
    }
}

fn estimate<T: Real, F>(
    grid: &SampleGrid<T>,
    objective: &F,
    goal: Goal,
    exclusions: &[Exclusion<T>],
    effort: Effort,
) -> Result<NormEstimate<T>>
where
    F: Fn(Complex<T>) -> Result<T> + Sync,
{
    let (mut value, mut at) = grid_extremum(grid, objective, goal, exclusions)?;
    let mut density = grid.density;
    let mut refined = false;
    if effort == Effort::Refined {
        let mut current = grid.clone();
        let mut previous = value;
        for _ in 0..MAX_REFINEMENTS {
            current = current.refined()?;
            let (v, z) = grid_extremum(&current, objective, goal, exclusions)?;
            density = current.density;
            if goal.better(v, value) {
                value = v;
                at = z;
            }
            if agree(previous, v) {
                refined = true;
                break;
            }
            previous = v;
        }
    }
    Ok(NormEstimate {
        value,
        grid_density: density,
        refined,
        at,
    })
}

fn agree<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(REFINE_REL_TOL) * a.abs().max(b.abs())
}

/// Refined estimate of `sup |f - g|` over boundary and interior samples.
pub fn sup_diff<T: Real>(f: &FuncExpr<T>, g: &FuncExpr<T>, grid: &SampleGrid<T>) -> Result<NormEstimate<T>> {
    sup_diff_with(f, g, grid, Effort::Refined)
}

pub fn sup_diff_with<T: Real>(
    f: &FuncExpr<T>,
    g: &FuncExpr<T>,
    grid: &SampleGrid<T>,
    effort: Effort,
) -> Result<NormEstimate<T>> {
    let obj = |z: Complex<T>| -> Result<T> { Ok((f.eval(z)? - g.eval(z)?).norm()) };
    estimate(grid, &obj, Goal::Max, &[], effort)
}

/// `sup |f|` over samples outside `exclusions`.
pub fn sup_modulus<T: Real>(
    f: &FuncExpr<T>,
    grid: &SampleGrid<T>,
    exclusions: &[Exclusion<T>],
    effort: Effort,
) -> Result<NormEstimate<T>> {
    let obj = |z: Complex<T>| -> Result<T> { Ok(f.eval(z)?.norm()) };
    estimate(grid, &obj, Goal::Max, exclusions, effort)
}

/// Refined estimate of `min |f|` over samples outside `exclusions`.
pub fn min_modulus<T: Real>(
    f: &FuncExpr<T>,
    grid: &SampleGrid<T>,
    exclusions: &[Exclusion<T>],
) -> Result<NormEstimate<T>> {
    min_modulus_with(f, grid, exclusions, Effort::Refined)
}

pub fn min_modulus_with<T: Real>(
    f: &FuncExpr<T>,
    grid: &SampleGrid<T>,
    exclusions: &[Exclusion<T>],
    effort: Effort,
) -> Result<NormEstimate<T>> {
    if exclusions.iter().any(|(_, r)| !(*r >= T::zero())) {
        return Err(Error::InvalidArgument("exclusion radii must be nonnegative".into()));
    }
    let obj = |z: Complex<T>| -> Result<T> { Ok(f.eval(z)?.norm()) };
    estimate(grid, &obj, Goal::Min, exclusions, effort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_grid, chain_discs, Region};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn d2_grid(density: f64) -> SampleGrid<f64> {
        boundary_grid(&Region::Disc(Disc::canonical_right()), density).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(FuncExpr::<f64>::identity().eval(c(0.0, 1.0)).unwrap(), c(0.0, 1.0));
        let f = FuncExpr::sum(FuncExpr::Sin, FuncExpr::Const(c(2.0, 0.0)));
        assert_eq!(f.eval(c(0.0, 0.0)).unwrap(), c(2.0, 0.0));
        let g = FuncExpr::identity().compose_map(MapExpr::lens(1.0).unwrap());
        for z in [c(0.3, 0.2), c(0.5, -0.4), c(1.0, 0.0)] {
            assert!((g.eval(z).unwrap() - z).norm() < 1e-12);
        }
    }

    #[test]
    fn glue_lookup_and_outside() {
        let d1 = Disc::canonical_left();
        let d2 = Disc::canonical_right();
        let f = FuncExpr::glue_discs(vec![
            (d1, FuncExpr::Const(c(1.0, 0.0))),
            (d2, FuncExpr::Const(c(2.0, 0.0))),
        ]);
        assert_eq!(f.eval(c(-0.5, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(f.eval(c(0.5, 0.1)).unwrap(), c(2.0, 0.0));
        assert!(matches!(f.eval(c(3.0, 0.0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pow_integer_and_fractional() {
        let sq = FuncExpr::Pow {
            base: Box::new(FuncExpr::<f64>::identity()),
            exponent: 2.0,
        };
        assert_eq!(sq.eval(c(-3.0, 0.0)).unwrap(), c(9.0, 0.0));
        let root = FuncExpr::Pow {
            base: Box::new(FuncExpr::<f64>::identity()),
            exponent: 0.5,
        };
        assert!((root.eval(c(4.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!(root.eval(c(-4.0, 0.0)).is_err());
    }

    #[test]
    fn sup_diff_self_is_zero() {
        let f = FuncExpr::sum(FuncExpr::Exp, FuncExpr::Sin);
        let est = sup_diff(&f, &f, &d2_grid(32.0)).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.refined);
    }

    #[test]
    fn sup_diff_of_scaling() {
        let r = 0.9;
        let f = FuncExpr::<f64>::identity();
        let g = FuncExpr::Poly(vec![c(0.0, 0.0), c(r, 0.0)]);
        let est = sup_diff(&f, &g, &d2_grid(32.0)).unwrap();
        assert!((est.value - (1.0 - r)).abs() < 1e-12);
        assert!((est.at - c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn sin_taylor_on_d2() {
        let mut cs = vec![c(0.0, 0.0); 12];
        let mut fact = 1.0;
        for k in 1..12 {
            fact *= k as f64;
            if k % 2 == 1 {
                cs[k] = c(if k % 4 == 1 { 1.0 } else { -1.0 } / fact, 0.0);
            }
        }
        let est = sup_diff(&FuncExpr::Sin, &FuncExpr::Poly(cs), &d2_grid(32.0)).unwrap();
        assert!(est.value <= 1e-7, "{}", est.value);
    }

    #[test]
    fn min_modulus_examples() {
        let g = d2_grid(32.0);
        let three = min_modulus(&FuncExpr::Const(c(3.0, 0.0)), &g, &[]).unwrap();
        assert_eq!(three.value, 3.0);
        let e = min_modulus(&FuncExpr::Exp, &g, &[]).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);

        let chain = Region::Chain(chain_discs::<f64>(2).unwrap());
        let grid = boundary_grid(&chain, 64.0).unwrap();
        let f = FuncExpr::Poly(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let m = min_modulus(&f, &grid, &[(c(1.0, 0.0), 0.1)]).unwrap();
        assert!(m.value >= 0.1 - 1e-12);
    }

    #[test]
    fn min_modulus_all_excluded() {
        let g = d2_grid(8.0);
        let r = min_modulus(&FuncExpr::Exp, &g, &[(c(0.5, 0.0), 10.0)]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn evaluation_error_carries_point() {
        let f = FuncExpr::Quotient(Box::new(FuncExpr::Const(c(1.0, 0.0))), Box::new(FuncExpr::identity()));
        match sup_diff(&f, &f, &d2_grid(16.0)) {
            Err(Error::Evaluation { point, .. }) => assert_eq!(point, (0.0, 0.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn restrict_picks_piece() {
        let d1 = Disc::canonical_left();
        let d2 = Disc::canonical_right();
        let f = FuncExpr::glue_discs(vec![(d1, FuncExpr::Exp), (d2, FuncExpr::Sin)]);
        assert_eq!(restrict(&f, &d2), FuncExpr::Sin);
        assert_eq!(restrict(&FuncExpr::<f64>::Cos, &d2), FuncExpr::Cos);
    }
}
