//! Conformal building blocks as an evaluable expression tree.
//!
//! Every variant evaluates in closed form. Fractional powers use the principal
//! branch with `1^q = 1`; inputs on the negative real axis are rejected instead
//! of silently picking a side of the cut.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Disc;
use crate::scalar::{cross, point, real, Complex, Real};

/// Below this modulus `eta` returns its analytic limit at the pole of the
/// first stage.
pub const ETA_POLE_GUARD: f64 = 1e-14;

/// Slack allowed when checking that `eta` inputs lie in the closed left disc.
pub const ETA_DOMAIN_TOL: f64 = 1e-9;

/// Parameters of the five-stage lens map from the closed left disc onto a thin
/// lens joining `0` and `r e^{i alpha}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaParams<T> {
    /// Direction of the lens axis.
    pub alpha: T,
    /// Length of the lens axis.
    pub r: T,
    /// Half opening angle; the fractional power is `2 delta1 / pi`.
    pub delta1: T,
    /// Contraction applied to the sector before it is bent into the lens.
    pub delta3: T,
}

impl<T: Real> EtaParams<T> {
    pub fn new(alpha: T, r: T, delta1: T, delta3: T) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::InvalidArgument(format!("eta: r must be positive, got {r}")));
        }
        if !(delta1 > T::zero() && delta1 <= T::FRAC_PI_2()) {
            return Err(Error::InvalidArgument(format!(
                "eta: delta1 must lie in (0, pi/2], got {delta1}"
            )));
        }
        if !(delta3 > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "eta: delta3 must be positive, got {delta3}"
            )));
        }
        Ok(Self {
            alpha,
            r,
            delta1,
            delta3,
        })
    }

    /// The pie piece with apex 0 that contains the image of the closed left disc.
    pub fn pie(&self) -> PiePiece<T> {
        PiePiece {
            apex: Complex::new(T::zero(), T::zero()),
            alpha: self.alpha,
            r: self.r,
            delta1: self.delta1,
        }
    }
}

/// `{apex + t e^{i(alpha + phi)} : 0 <= t <= r, |phi| <= delta1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiePiece<T> {
    pub apex: Complex<T>,
    pub alpha: T,
    pub r: T,
    pub delta1: T,
}

impl<T: Real> PiePiece<T> {
    /// Euclidean distance from `w` to the closed piece (0 inside). Assumes
    /// `delta1 <= pi/2`, where the piece is convex.
    pub fn distance(&self, w: Complex<T>) -> T {
        let q = (w - self.apex) * Complex::from_polar(T::one(), -self.alpha);
        let t = q.norm();
        if t == T::zero() {
            return T::zero();
        }
        let phi = q.arg();
        if phi.abs() <= self.delta1 {
            return (t - self.r).max(T::zero());
        }
        let upper = Complex::from_polar(self.r, self.delta1);
        let lower = Complex::from_polar(self.r, -self.delta1);
        segment_distance(q, Complex::new(T::zero(), T::zero()), upper)
            .min(segment_distance(q, Complex::new(T::zero(), T::zero()), lower))
    }

    pub fn translated(&self, apex: Complex<T>) -> Self {
        Self { apex, ..*self }
    }
}

/// Whether `w` lies in the closed piece inflated by `margin`.
pub fn pie_contains<T: Real>(p: &PiePiece<T>, w: Complex<T>, margin: T) -> bool {
    p.distance(w) <= margin
}

/// Distance from `q` to the closed segment `[a, b]`.
pub fn segment_distance<T: Real>(q: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (q - a).norm();
    }
    let t = ((q - a).re * d.re + (q - a).im * d.im) / len2;
    let t = t.max(T::zero()).min(T::one());
    (q - (a + d * t)).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MapExpr<T> {
    Identity,
    /// `z -> a z + b`
    Affine { a: Complex<T>, b: Complex<T> },
    /// `z -> to + scale (z - from)`; maps `from` to `to` exactly.
    Similarity {
        from: Complex<T>,
        to: Complex<T>,
        scale: Complex<T>,
    },
    /// `z -> (a z + b) / (c z + d)`
    Moebius {
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
    },
    /// Principal `z^q`.
    Power { q: T },
    /// Self-map of the right disc onto a lens with corners 0 and 1 of angle `pi r`.
    Lens { r: T },
    /// `z -> z / (1 - i delta z)`: fixes 0 and preserves the right disc.
    Parabolic { delta: T },
    Eta(EtaParams<T>),
    /// Numerical inverse of `map` restricted to the closed disc `domain`.
    Inverse { map: Box<MapExpr<T>>, domain: Disc<T> },
    /// `outer(inner(z))`
    Compose {
        outer: Box<MapExpr<T>>,
        inner: Box<MapExpr<T>>,
    },
}

impl<T: Real> MapExpr<T> {
    pub fn affine(a: Complex<T>, b: Complex<T>) -> Result<Self> {
        if a == Complex::new(T::zero(), T::zero()) {
            return Err(Error::InvalidArgument("affine map with zero slope".into()));
        }
        Ok(MapExpr::Affine { a, b })
    }

    pub fn moebius(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Result<Self> {
        if (a * d - b * c).norm() == T::zero() {
            return Err(Error::InvalidArgument(
                "moebius coefficients satisfy ad - bc = 0".into(),
            ));
        }
        Ok(MapExpr::Moebius { a, b, c, d })
    }

    pub fn lens(r: T) -> Result<Self> {
        if !(r > T::zero() && r <= T::one()) {
            return Err(Error::InvalidArgument(format!("lens: r must lie in (0, 1], got {r}")));
        }
        Ok(MapExpr::Lens { r })
    }

    pub fn parabolic(delta: T) -> Result<Self> {
        if !(delta >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "parabolic: delta must be >= 0, got {delta}"
            )));
        }
        Ok(MapExpr::Parabolic { delta })
    }

    /// `z -> center + ratio (z - center)`, exact at `center`.
    pub fn homothety(center: Complex<T>, ratio: T) -> Self {
        MapExpr::Similarity {
            from: center,
            to: center,
            scale: real(ratio),
        }
    }

    /// `outer ∘ inner`, folding identities and pairs of plain affine maps.
    pub fn compose(outer: Self, inner: Self) -> Self {
        match (outer, inner) {
            (MapExpr::Identity, m) | (m, MapExpr::Identity) => m,
            (MapExpr::Affine { a: a1, b: b1 }, MapExpr::Affine { a: a2, b: b2 }) => {
                affine_or_identity(a1 * a2, a1 * b2 + b1)
            }
            (o, i) => MapExpr::Compose {
                outer: Box::new(o),
                inner: Box::new(i),
            },
        }
    }

    /// `(a, b)` when the map is `z -> a z + b`.
    pub fn as_affine(&self) -> Option<(Complex<T>, Complex<T>)> {
        match self {
            MapExpr::Identity => Some((Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))),
            MapExpr::Affine { a, b } => Some((*a, *b)),
            MapExpr::Similarity { from, to, scale } => Some((*scale, *to - *scale * *from)),
            _ => None,
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        match self {
            MapExpr::Identity => Ok(z),
            MapExpr::Affine { a, b } => Ok(*a * z + *b),
            MapExpr::Similarity { from, to, scale } => Ok(*to + *scale * (z - *from)),
            MapExpr::Moebius { a, b, c, d } => {
                let den = *c * z + *d;
                if den.norm() == T::zero() {
                    return Err(eval_err(z, "pole of moebius map"));
                }
                Ok((*a * z + *b) / den)
            }
            MapExpr::Power { q } => principal_power(z, *q),
            MapExpr::Lens { r } => eval_lens(*r, z),
            MapExpr::Parabolic { delta } => parabolic_point(*delta, z),
            MapExpr::Eta(p) => eval_eta(p, z),
            MapExpr::Inverse { map, domain } => invert_on_disc(map, domain, z),
            MapExpr::Compose { outer, inner } => outer.eval(inner.eval(z)?),
        }
    }

    /// Complex derivative at `z`.
    pub fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        let one = Complex::new(T::one(), T::zero());
        match self {
            MapExpr::Identity => Ok(one),
            MapExpr::Affine { a, .. } => Ok(*a),
            MapExpr::Similarity { scale, .. } => Ok(*scale),
            MapExpr::Moebius { a, b, c, d } => {
                let den = *c * z + *d;
                if den.norm() == T::zero() {
                    return Err(eval_err(z, "pole of moebius map"));
                }
                Ok((*a * *d - *b * *c) / (den * den))
            }
            MapExpr::Power { q } => {
                if z.norm() == T::zero() {
                    return Err(eval_err(z, "power derivative at the origin"));
                }
                Ok(principal_power(z, *q)? * *q / z)
            }
            MapExpr::Lens { r } => {
                let v = lens_ratio_power(*r, z)?;
                let den = (one + v) * (one + v) * z * (one - z);
                if den.norm() == T::zero() {
                    return Err(eval_err(z, "lens derivative at a corner"));
                }
                Ok(v * *r / den)
            }
            MapExpr::Parabolic { delta } => {
                let den = one - Complex::new(T::zero(), *delta) * z;
                if den.norm() == T::zero() {
                    return Err(eval_err(z, "pole of parabolic map"));
                }
                Ok(one / (den * den))
            }
            MapExpr::Eta(p) => eta_derivative(p, z),
            MapExpr::Inverse { map, domain } => {
                let w = invert_on_disc(map, domain, z)?;
                let d = map.derivative(w)?;
                if d.norm() == T::zero() {
                    return Err(eval_err(z, "critical point of inverted map"));
                }
                Ok(one / d)
            }
            MapExpr::Compose { outer, inner } => {
                let w = inner.eval(z)?;
                Ok(outer.derivative(w)? * inner.derivative(z)?)
            }
        }
    }

    /// Closed-form inverse, valid on the image of the variant's admissible domain.
    pub fn inverse(&self) -> Result<Self> {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Ok(match self {
            MapExpr::Identity => MapExpr::Identity,
            MapExpr::Affine { a, b } => MapExpr::affine(one / *a, -*b / *a)?,
            MapExpr::Similarity { from, to, scale } => {
                if scale.norm() == T::zero() {
                    return Err(Error::InvalidArgument("similarity with zero scale".into()));
                }
                MapExpr::Similarity {
                    from: *to,
                    to: *from,
                    scale: one / *scale,
                }
            }
            MapExpr::Moebius { a, b, c, d } => MapExpr::moebius(*d, -*b, -*c, *a)?,
            MapExpr::Power { q } => {
                if *q == T::zero() {
                    return Err(Error::InvalidArgument("power 0 is not invertible".into()));
                }
                MapExpr::Power { q: T::one() / *q }
            }
            MapExpr::Lens { r } => chain_of(vec![
                MapExpr::Moebius { a: one, b: zero, c: -one, d: one },
                MapExpr::Power { q: T::one() / *r },
                MapExpr::Moebius { a: one, b: zero, c: one, d: one },
            ]),
            MapExpr::Parabolic { delta } => MapExpr::Moebius {
                a: one,
                b: zero,
                c: Complex::new(T::zero(), *delta),
                d: one,
            },
            MapExpr::Eta(p) => chain_of(vec![
                MapExpr::Affine {
                    a: Complex::from_polar(T::one(), -p.alpha),
                    b: zero,
                },
                MapExpr::Moebius { a: one, b: zero, c: -one, d: real(p.r) },
                MapExpr::Affine { a: real(T::one() / p.delta3), b: zero },
                MapExpr::Power { q: T::FRAC_PI_2() / p.delta1 },
                MapExpr::Moebius { a: zero, b: -one, c: one, d: one },
            ]),
            MapExpr::Inverse { map, .. } => (**map).clone(),
            MapExpr::Compose { outer, inner } => MapExpr::Compose {
                outer: Box::new(inner.inverse()?),
                inner: Box::new(outer.inverse()?),
            },
        })
    }
}

/// Applies `maps` in order: the first element acts first.
fn chain_of<T: Real>(maps: Vec<MapExpr<T>>) -> MapExpr<T> {
    maps.into_iter()
        .fold(MapExpr::Identity, |acc, m| MapExpr::Compose {
            outer: Box::new(m),
            inner: Box::new(acc),
        })
}

fn affine_or_identity<T: Real>(a: Complex<T>, b: Complex<T>) -> MapExpr<T> {
    if a == Complex::new(T::one(), T::zero()) && b == Complex::new(T::zero(), T::zero()) {
        MapExpr::Identity
    } else {
        MapExpr::Affine { a, b }
    }
}

fn eval_err<T: Real>(z: Complex<T>, reason: &str) -> Error {
    Error::Evaluation {
        point: point(z),
        reason: reason.to_string(),
    }
}

/// Principal branch `z^q` with `0^q = 0` for `q > 0`; the negative real axis
/// is an evaluation error.
pub fn principal_power<T: Real>(z: Complex<T>, q: T) -> Result<Complex<T>> {
    let m = z.norm();
    if m == T::zero() {
        if q > T::zero() {
            return Ok(z * T::zero());
        }
        return Err(eval_err(z, "non-positive power of zero"));
    }
    if z.re < T::zero() && z.im.abs() <= T::epsilon() * z.re.abs() {
        return Err(eval_err(z, "argument on the branch cut of the principal power"));
    }
    if z.im == T::zero() && z.re > T::zero() {
        return Ok(real(z.re.powf(q)));
    }
    Ok(Complex::from_polar(m.powf(q), q * z.arg()))
}

/// `(z / (1 - z))^r` or its reciprocal, whichever has modulus at most one,
/// together with a flag telling which one was formed.
fn lens_ratio<T: Real>(r: T, z: Complex<T>) -> Result<(Complex<T>, bool)> {
    let one = Complex::new(T::one(), T::zero());
    if z.norm() <= (one - z).norm() {
        Ok((principal_power(z / (one - z), r)?, false))
    } else {
        Ok((principal_power((one - z) / z, r)?, true))
    }
}

fn lens_ratio_power<T: Real>(r: T, z: Complex<T>) -> Result<Complex<T>> {
    lens_ratio(r, z).map(|(v, _)| v)
}

fn eval_lens<T: Real>(r: T, z: Complex<T>) -> Result<Complex<T>> {
    let one = Complex::new(T::one(), T::zero());
    let (v, flipped) = lens_ratio(r, z)?;
    if flipped {
        Ok(one / (one + v))
    } else {
        Ok(v / (one + v))
    }
}

/// `w = (1 - (z - 1)/z - i delta)^{-1}`, evaluated as `z / (1 - i delta z)`.
pub fn parabolic_point<T: Real>(delta: T, z: Complex<T>) -> Result<Complex<T>> {
    let den = Complex::new(T::one(), T::zero()) - Complex::new(T::zero(), delta) * z;
    if den.norm() == T::zero() {
        return Err(eval_err(z, "pole of parabolic map"));
    }
    Ok(z / den)
}

fn check_eta_domain<T: Real>(z: Complex<T>) -> Result<()> {
    let d = Disc::<T>::canonical_left();
    if !d.contains(z, T::lit(ETA_DOMAIN_TOL)) {
        return Err(Error::InvalidArgument(format!(
            "eta is defined on the closed disc |z + 1/2| <= 1/2, got {z}"
        )));
    }
    Ok(())
}

/// Five stages: half plane, sector, contraction, lens, rotation.
pub fn eval_eta<T: Real>(p: &EtaParams<T>, z: Complex<T>) -> Result<Complex<T>> {
    check_eta_domain(z)?;
    let rotation = Complex::from_polar(T::one(), p.alpha);
    if z.norm() < T::lit(ETA_POLE_GUARD) {
        return Ok(rotation * p.r);
    }
    let one = Complex::new(T::one(), T::zero());
    let z1 = -(z + one) / z;
    let z2 = principal_power(z1, T::lit(2.0) * p.delta1 / T::PI())?;
    let z3 = z2 * p.delta3;
    let z4 = if z3.norm() <= T::one() {
        z3 * p.r / (z3 + one)
    } else {
        real(p.r) / (one + one / z3)
    };
    Ok(rotation * z4)
}

fn eta_derivative<T: Real>(p: &EtaParams<T>, z: Complex<T>) -> Result<Complex<T>> {
    check_eta_domain(z)?;
    let one = Complex::new(T::one(), T::zero());
    if z.norm() < T::lit(ETA_POLE_GUARD) {
        return Err(eval_err(z, "eta derivative at the pole of its first stage"));
    }
    let q = T::lit(2.0) * p.delta1 / T::PI();
    let z1 = -(z + one) / z;
    if z1.norm() == T::zero() {
        return Err(eval_err(z, "eta derivative at its base point"));
    }
    let z2 = principal_power(z1, q)?;
    let z3 = z2 * p.delta3;
    let dz1 = one / (z * z);
    let dz2 = z2 * q / z1;
    let dz4 = real(p.r) / ((z3 + one) * (z3 + one));
    Ok(Complex::from_polar(T::one(), p.alpha) * dz4 * p.delta3 * dz2 * dz1)
}

/// Preimage of `z` under `map` inside the closed disc `domain`, polished by
/// Newton's method to residual `1e-12 (1 + |z|)`.
pub fn invert_on_disc<T: Real>(map: &MapExpr<T>, domain: &Disc<T>, z: Complex<T>) -> Result<Complex<T>> {
    let tol = T::lit(1e-12) * (T::one() + z.norm());
    let guess = map
        .inverse()
        .and_then(|inv| inv.eval(z))
        .ok()
        .filter(|w| w.re.is_finite() && w.im.is_finite() && domain.contains(*w, domain.radius));
    let mut w = match guess {
        Some(w) => w,
        None => coarse_preimage(map, domain, z)?,
    };
    for _ in 0..60 {
        let fw = map.eval(w).map_err(|e| inversion_err(z, &e.to_string()))?;
        let residual = fw - z;
        if residual.norm() <= tol {
            return Ok(w);
        }
        let d = map
            .derivative(w)
            .map_err(|e| inversion_err(z, &e.to_string()))?;
        if d.norm() == T::zero() {
            return Err(inversion_err(z, "vanishing derivative"));
        }
        let mut next = w - residual / d;
        let off = next - domain.center;
        if off.norm() > domain.radius {
            next = domain.center + off * (domain.radius / off.norm());
        }
        w = next;
    }
    Err(inversion_err(z, "Newton iteration did not reach the residual tolerance"))
}

fn inversion_err<T: Real>(z: Complex<T>, reason: &str) -> Error {
    Error::MapInversion {
        point: point(z),
        reason: reason.to_string(),
    }
}

fn coarse_preimage<T: Real>(map: &MapExpr<T>, domain: &Disc<T>, z: Complex<T>) -> Result<Complex<T>> {
    let mut best: Option<(T, Complex<T>)> = None;
    let rings = 24usize;
    let spokes = 96usize;
    for i in 0..=rings {
        let rho = domain.radius * T::from_usize(i).unwrap() / T::from_usize(rings).unwrap();
        let count = if i == 0 { 1 } else { spokes };
        for j in 0..count {
            let theta = T::TAU() * T::from_usize(j).unwrap() / T::from_usize(count).unwrap();
            let w = domain.center + Complex::from_polar(rho, theta);
            if let Ok(fw) = map.eval(w) {
                let d = (fw - z).norm();
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, w));
                }
            }
        }
    }
    best.map(|(_, w)| w)
        .ok_or_else(|| inversion_err(z, "map undefined on the whole domain"))
}

/// `A^{-1} ∘ m ∘ A`, where `A` is the orientation-preserving affine map taking
/// `target` onto `source` and `anchor_target` to `anchor_source`. Both affine
/// factors are anchored similarities, so a map fixing `anchor_source` yields
/// one fixing `anchor_target` bit for bit.
pub fn conjugate_to_disc<T: Real>(
    m: &MapExpr<T>,
    source: &Disc<T>,
    target: &Disc<T>,
    anchor_source: Complex<T>,
    anchor_target: Complex<T>,
) -> Result<MapExpr<T>> {
    let tol = T::lit(1e-10);
    if !source.on_boundary(anchor_source, tol) || !target.on_boundary(anchor_target, tol) {
        return Err(Error::InvalidArgument(
            "conjugation anchors must lie on the boundaries of their discs".into(),
        ));
    }
    let a = (anchor_source - source.center) / (anchor_target - target.center);
    let b = anchor_source - a * anchor_target;
    let one = Complex::new(T::one(), T::zero());
    let to_target = |w: Complex<T>| (w - b) / a;
    Ok(match m {
        MapExpr::Identity => MapExpr::Identity,
        MapExpr::Similarity { from, to, scale } => {
            let moved = |w: Complex<T>| if w == anchor_source { anchor_target } else { to_target(w) };
            MapExpr::Similarity {
                from: moved(*from),
                to: moved(*to),
                scale: *scale,
            }
        }
        MapExpr::Affine { a: alpha, b: beta } => affine_or_identity(*alpha, (*alpha * b + *beta - b) / a),
        _ if a == one && anchor_source == anchor_target => m.clone(),
        _ => MapExpr::Compose {
            outer: Box::new(MapExpr::Similarity {
                from: anchor_source,
                to: anchor_target,
                scale: one / a,
            }),
            inner: Box::new(MapExpr::Compose {
                outer: Box::new(m.clone()),
                inner: Box::new(MapExpr::Similarity {
                    from: anchor_target,
                    to: anchor_source,
                    scale: a,
                }),
            }),
        },
    })
}

/// Whether `0`, `a` and `b` lie on one line, with relative tolerance on the
/// cross product.
pub fn collinear_with_origin<T: Real>(a: Complex<T>, b: Complex<T>, rel_tol: T) -> bool {
    cross(a, b).abs() <= rel_tol * a.norm() * b.norm()
}

pub(crate) fn fmt_complex<T: Real>(z: Complex<T>) -> String {
    let (re, im) = (z.re, z.im);
    if im == T::zero() {
        format!("{}", re)
    } else if re == T::zero() {
        format!("{}i", im)
    } else if im < T::zero() {
        format!("({}-{}i)", re, -im)
    } else {
        format!("({}+{}i)", re, im)
    }
}

impl<T: Real> fmt::Display for MapExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapExpr::Identity => write!(f, "identity"),
            MapExpr::Affine { a, b } => write!(f, "affine({}, {})", fmt_complex(*a), fmt_complex(*b)),
            MapExpr::Similarity { from, to, scale } => write!(
                f,
                "similarity({}, {}, {})",
                fmt_complex(*from),
                fmt_complex(*to),
                fmt_complex(*scale)
            ),
            MapExpr::Moebius { a, b, c, d } => write!(
                f,
                "moebius({}, {}, {}, {})",
                fmt_complex(*a),
                fmt_complex(*b),
                fmt_complex(*c),
                fmt_complex(*d)
            ),
            MapExpr::Power { q } => write!(f, "power({q})"),
            MapExpr::Lens { r } => write!(f, "lens({r})"),
            MapExpr::Parabolic { delta } => write!(f, "parabolic({delta})"),
            MapExpr::Eta(p) => write!(f, "eta({}, {}, {}, {})", p.alpha, p.r, p.delta1, p.delta3),
            MapExpr::Inverse { map, domain } => write!(
                f,
                "inverse({}, {}, {})",
                map,
                fmt_complex(domain.center),
                domain.radius
            ),
            MapExpr::Compose { outer, inner } => write!(f, "compose({inner}, {outer})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn lens_one_is_identity() {
        let l = MapExpr::lens(1.0).unwrap();
        for z in [c(0.5, 0.0), c(0.5, 0.5), c(0.1, 0.2), c(0.9, -0.1), c(1.0, 0.0), c(0.0, 0.0)] {
            assert!(close(l.eval(z).unwrap(), z, 1e-12), "{z}");
        }
    }

    #[test]
    fn lens_fixes_center() {
        for r in [0.1, 0.5, 0.99] {
            let l = MapExpr::lens(r).unwrap();
            assert_eq!(l.eval(c(0.5, 0.0)).unwrap(), c(0.5, 0.0));
        }
    }

    #[test]
    fn lens_half_hand_value() {
        // z/(1-z) = i, i^{1/2} = e^{i pi/4}, then e^{i pi/4}/(1+e^{i pi/4})
        let e = C::from_polar(1.0, FRAC_PI_4);
        let expected = e / (c(1.0, 0.0) + e);
        let got = MapExpr::lens(0.5).unwrap().eval(c(0.5, 0.5)).unwrap();
        assert!(close(got, expected, 1e-14));
        assert!(close(got, c(0.5, 0.20711), 1e-5));
    }

    #[test]
    fn lens_corners() {
        for r in [0.05, 0.3, 0.75, 1.0] {
            let l = MapExpr::lens(r).unwrap();
            assert_eq!(l.eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
            assert_eq!(l.eval(c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn lens_rejects_cut() {
        assert!(matches!(
            MapExpr::lens(0.5).unwrap().eval(c(2.0, 0.0)),
            Err(Error::Evaluation { .. })
        ));
    }

    #[test]
    fn parabolic_examples() {
        for z in [c(0.3, 0.1), c(1.0, 0.0), c(0.5, -0.5)] {
            assert_eq!(parabolic_point(0.0, z).unwrap(), z);
        }
        assert_eq!(parabolic_point(0.7, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let w = parabolic_point(1.0, c(1.0, 0.0)).unwrap();
        assert!(close(w, c(0.5, 0.5), 1e-15));
        assert!(((w - c(0.5, 0.0)).norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parabolic_matches_original_display() {
        let delta = 0.3;
        for z in [c(0.2, 0.1), c(0.9, 0.3), c(0.5, -0.4)] {
            let one = c(1.0, 0.0);
            let original = one / (one - (z - one) / z - c(0.0, delta));
            assert!(close(parabolic_point(delta, z).unwrap(), original, 1e-14));
        }
    }

    #[test]
    fn eta_examples() {
        let p = EtaParams::new(0.4, 0.2, 0.3, 0.05).unwrap();
        assert_eq!(eval_eta(&p, c(-1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(close(eval_eta(&p, c(0.0, 0.0)).unwrap(), C::from_polar(0.2, 0.4), 1e-15));
        let q = EtaParams::new(0.0, 1.0, FRAC_PI_2, 1.0).unwrap();
        assert!(close(eval_eta(&q, c(-0.5, 0.0)).unwrap(), c(0.5, 0.0), 1e-15));
    }

    #[test]
    fn eta_rejects_outside() {
        let p = EtaParams::new(0.0, 1.0, 0.2, 1.0).unwrap();
        assert!(matches!(eval_eta(&p, c(0.5, 0.0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn eta_params_validated() {
        assert!(EtaParams::new(0.0, 0.0, 0.1, 1.0).is_err());
        assert!(EtaParams::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(EtaParams::new(0.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn eta_near_pole_uses_limit() {
        let p = EtaParams::new(1.0, 0.3, 0.2, 0.5).unwrap();
        let near = eval_eta(&p, c(-1e-15, 0.0)).unwrap();
        assert!(close(near, C::from_polar(0.3, 1.0), 1e-15));
    }

    #[test]
    fn pie_examples() {
        let p = PiePiece {
            apex: c(0.0, 0.0),
            alpha: 0.0,
            r: 1.0,
            delta1: FRAC_PI_4,
        };
        assert!(pie_contains(&p, c(0.5, 0.0), 0.0));
        assert!(!pie_contains(&p, c(-0.5, 0.0), 0.0));
        assert!(pie_contains(&p, C::from_polar(1.0, FRAC_PI_4), 1e-15));
        assert!((p.distance(c(2.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((p.distance(c(-0.5, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conjugate_identity() {
        let d2 = Disc::<f64>::canonical_right();
        let m = conjugate_to_disc(&MapExpr::Identity, &d2, &d2, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(m, MapExpr::Identity);
    }

    #[test]
    fn conjugate_shrink_is_anchored() {
        let d1 = Disc::<f64>::canonical_left();
        let d2 = Disc::<f64>::canonical_right();
        let r = 0.75;
        let shrink = MapExpr::homothety(c(0.0, 0.0), r);
        let m = conjugate_to_disc(&shrink, &d2, &d1, c(0.0, 0.0), c(-1.0, 0.0)).unwrap();
        for z in [c(-1.0, 0.0), c(-0.5, 0.3), c(0.0, 0.0)] {
            let expected = c(-1.0, 0.0) + (z + c(1.0, 0.0)) * r;
            assert!(close(m.eval(z).unwrap(), expected, 1e-15));
        }
        assert_eq!(m.eval(c(-1.0, 0.0)).unwrap(), c(-1.0, 0.0));
    }

    #[test]
    fn conjugate_parabolic_to_left_disc() {
        let d1 = Disc::<f64>::canonical_left();
        let d2 = Disc::<f64>::canonical_right();
        let m = conjugate_to_disc(&MapExpr::parabolic(0.4).unwrap(), &d2, &d1, c(0.0, 0.0), c(-1.0, 0.0))
            .unwrap();
        assert_eq!(m.eval(c(-1.0, 0.0)).unwrap(), c(-1.0, 0.0));
        for k in 0..1000 {
            let theta = 2.0 * PI * k as f64 / 1000.0;
            let z = d1.point_at(theta);
            assert!(d1.contains(m.eval(z).unwrap(), 1e-12));
        }
    }

    #[test]
    fn conjugate_rejects_off_boundary_anchor() {
        let d1 = Disc::<f64>::canonical_left();
        let d2 = Disc::<f64>::canonical_right();
        assert!(conjugate_to_disc(&MapExpr::Identity, &d2, &d1, c(0.5, 0.0), c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn moebius_pole_and_degenerate() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        assert!(MapExpr::moebius(one, one, one, one).is_err());
        let m = MapExpr::moebius(one, zero, one, -one).unwrap();
        assert!(matches!(m.eval(one), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn power_branch() {
        assert_eq!(principal_power(c(1.0, 0.0), 0.37).unwrap(), c(1.0, 0.0));
        assert!(principal_power(c(-2.0, 0.0), 0.5).is_err());
        let w = principal_power(c(0.0, 4.0), 0.5).unwrap();
        assert!(close(w, C::from_polar(2.0, FRAC_PI_4), 1e-15));
    }

    #[test]
    fn analytic_inverses_roundtrip() {
        let maps = vec![
            MapExpr::affine(c(2.0, 1.0), c(-1.0, 0.5)).unwrap(),
            MapExpr::homothety(c(1.0, 0.0), 0.25),
            MapExpr::moebius(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)).unwrap(),
            MapExpr::lens(0.6).unwrap(),
            MapExpr::parabolic(0.3).unwrap(),
        ];
        let d2 = Disc::<f64>::canonical_right();
        for m in maps {
            let inv = m.inverse().unwrap();
            for k in 1..40 {
                let theta = 2.0 * PI * k as f64 / 40.0;
                let z = d2.center + C::from_polar(0.3, theta);
                let back = inv.eval(m.eval(z).unwrap()).unwrap();
                assert!(close(back, z, 1e-12), "{m} at {z}");
            }
        }
        let p = EtaParams::new(0.3, 0.1, 0.25, 0.2).unwrap();
        let eta = MapExpr::Eta(p);
        let inv = eta.inverse().unwrap();
        let z = c(-0.4, 0.2);
        assert!(close(inv.eval(eta.eval(z).unwrap()).unwrap(), z, 1e-10));
    }

    #[test]
    fn newton_inversion_on_disc() {
        let d1 = Disc::<f64>::canonical_left();
        let p = EtaParams::new(0.3, 0.1, 0.25, 0.2).unwrap();
        let eta = MapExpr::Eta(p);
        for z in [c(-0.3, 0.1), c(-0.9, -0.2), c(-0.5, 0.49)] {
            let w = eta.eval(z).unwrap();
            let back = invert_on_disc(&eta, &d1, w).unwrap();
            assert!(close(eta.eval(back).unwrap(), w, 1e-12));
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let maps = vec![
            MapExpr::lens(0.6).unwrap(),
            MapExpr::parabolic(0.3).unwrap(),
            MapExpr::Power { q: 0.7 },
            MapExpr::compose(MapExpr::lens(0.4).unwrap(), MapExpr::parabolic(0.2).unwrap()),
        ];
        let z = c(0.4, 0.2);
        let h = 1e-6;
        for m in maps {
            let fd = (m.eval(z + c(h, 0.0)).unwrap() - m.eval(z - c(h, 0.0)).unwrap()) / (2.0 * h);
            assert!(close(m.derivative(z).unwrap(), fd, 1e-7), "{m}");
        }
        let eta = MapExpr::Eta(EtaParams::new(0.3, 0.1, 0.25, 0.2).unwrap());
        let z = c(-0.4, 0.1);
        let fd = (eta.eval(z + c(h, 0.0)).unwrap() - eta.eval(z - c(h, 0.0)).unwrap()) / (2.0 * h);
        assert!(close(eta.derivative(z).unwrap(), fd, 1e-7));
    }

    #[test]
    fn compose_folds_affines() {
        let a = MapExpr::affine(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        let b = MapExpr::affine(c(0.5, 0.0), c(-0.5, 0.0)).unwrap();
        assert_eq!(MapExpr::compose(a, b), MapExpr::Identity);
    }

    #[test]
    fn f32_maps_evaluate() {
        let l = MapExpr::<f32>::lens(0.5).unwrap();
        let w = l.eval(Complex::new(0.5f32, 0.5)).unwrap();
        assert!((w - Complex::new(0.5f32, 0.20711)).norm() < 1e-4);
        let p = EtaParams::<f32>::new(0.0, 1.0, std::f32::consts::FRAC_PI_2, 1.0).unwrap();
        assert!((eval_eta(&p, Complex::new(-0.5f32, 0.0)).unwrap() - Complex::new(0.5f32, 0.0)).norm() < 1e-6);
    }
}
