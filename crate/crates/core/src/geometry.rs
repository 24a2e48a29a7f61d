//! Discs, the canonical tangent-disc chain, conformal images of that chain,
//! sample grids and closed contours.

use serde::{Deserialize, Serialize};

use crate::conformal::MapExpr;
use crate::error::{Error, Result};
use crate::scalar::{real, Complex, Real};

/// Absolute tolerance for boundary and tangency membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc<T> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Real> Disc<T> {
    pub fn new(center: Complex<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "disc radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// `{z : |z + 1/2| < 1/2}`.
    pub fn canonical_left() -> Self {
        Self {
            center: real(T::lit(-0.5)),
            radius: T::lit(0.5),
        }
    }

    /// `{z : |z - 1/2| < 1/2}`.
    pub fn canonical_right() -> Self {
        Self {
            center: real(T::lit(0.5)),
            radius: T::lit(0.5),
        }
    }

    /// `|z - center| - radius`; negative inside.
    #[inline]
    pub fn signed_distance(&self, z: Complex<T>) -> T {
        (z - self.center).norm() - self.radius
    }

    #[inline]
    pub fn contains(&self, z: Complex<T>, tol: T) -> bool {
        self.signed_distance(z) <= tol
    }

    pub fn on_boundary(&self, z: Complex<T>, tol: T) -> bool {
        self.signed_distance(z).abs() <= tol
    }

    /// Boundary point at polar angle `theta` about the center. The leftmost and
    /// rightmost points are produced exactly.
    pub fn point_at(&self, theta: T) -> Complex<T> {
        if theta == T::PI() {
            return self.center - real(self.radius);
        }
        if theta == T::zero() || theta == T::TAU() {
            return self.center + real(self.radius);
        }
        self.center + Complex::from_polar(self.radius, theta)
    }

    pub fn circumference(&self) -> T {
        T::TAU() * self.radius
    }

    /// Disc with the same center and radius scaled by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            center: self.center,
            radius: self.radius * factor,
        }
    }
}

/// Discs of radius 1/2 centered at `(2k-1)/2`, tangent at the integers `1..n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscChain<T> {
    pub discs: Vec<Disc<T>>,
    pub tangencies: Vec<Complex<T>>,
}

pub fn chain_discs<T: Real>(n: usize) -> Result<DiscChain<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("a disc chain needs n >= 1".into()));
    }
    let half = T::lit(0.5);
    let discs = (1..=n)
        .map(|k| Disc {
            center: real(T::from_usize(k).unwrap() - half),
            radius: half,
        })
        .collect();
    let tangencies = (1..n).map(|j| real(T::from_usize(j).unwrap())).collect();
    Ok(DiscChain { discs, tangencies })
}

impl<T: Real> DiscChain<T> {
    pub fn len(&self) -> usize {
        self.discs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discs.is_empty()
    }

    /// Index of the disc whose interior is deepest at `z`, if any disc contains
    /// `z` within `tol`.
    pub fn locate(&self, z: Complex<T>, tol: T) -> Option<usize> {
        locate_in(&self.discs, z, tol)
    }
}

pub(crate) fn locate_in<T: Real>(discs: &[Disc<T>], z: Complex<T>, tol: T) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (k, d) in discs.iter().enumerate() {
        let s = d.signed_distance(z);
        if s <= tol && best.is_none_or(|(_, b)| s < b) {
            best = Some((k, s));
        }
    }
    best.map(|(k, _)| k)
}

/// Conformal images `phi_j(D_j)` of the canonical chain discs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanChain<T> {
    pub chain: DiscChain<T>,
    pub maps: Vec<MapExpr<T>>,
    pub tangency_images: Vec<Complex<T>>,
}

impl<T: Real> JordanChain<T> {
    /// Validates the chain conditions on a verification grid of the given
    /// boundary density: consecutive images meet at the image of the shared
    /// tangency (to 1e-10) and each map is injective on the grid.
    pub fn new(maps: Vec<MapExpr<T>>, density: T) -> Result<Self> {
        let chain = chain_discs(maps.len())?;
        let tol = T::lit(1e-10);
        let mut tangency_images = Vec::with_capacity(chain.tangencies.len());
        for (j, &t) in chain.tangencies.iter().enumerate() {
            let left = maps[j].eval(t)?;
            let right = maps[j + 1].eval(t)?;
            if (left - right).norm() > tol {
                return Err(Error::InvalidArgument(format!(
                    "images of domains {} and {} do not meet at the tangency image ({} vs {})",
                    j + 1,
                    j + 2,
                    left,
                    right
                )));
            }
            tangency_images.push(left);
        }
        for (k, (disc, map)) in chain.discs.iter().zip(&maps).enumerate() {
            let grid = SampleGrid::new(Region::Disc(*disc), density, density / T::lit(4.0))?;
            let mut images = grid
                .points()
                .map(|z| map.eval(z))
                .collect::<Result<Vec<_>>>()?;
            if let Some((a, b)) = nearly_coincident(&mut images, tol) {
                return Err(Error::InvalidArgument(format!(
                    "map {} is not injective on the verification grid: {} and {} coincide",
                    k + 1,
                    a,
                    b
                )));
            }
        }
        Ok(Self {
            chain,
            maps,
            tangency_images,
        })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

fn nearly_coincident<T: Real>(
    pts: &mut [Complex<T>],
    tol: T,
) -> Option<(Complex<T>, Complex<T>)> {
    pts.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[j].re - pts[i].re > tol {
                break;
            }
            if (pts[j] - pts[i]).norm() <= tol {
                return Some((pts[i], pts[j]));
            }
        }
    }
    None
}

/// A compact set on which functions are sampled and certified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region<T> {
    Disc(Disc<T>),
    Chain(DiscChain<T>),
    Jordan(JordanChain<T>),
}

impl<T: Real> Region<T> {
    /// Parameter discs: the region itself, the chain discs, or the preimage
    /// discs of a Jordan chain.
    pub fn discs(&self) -> &[Disc<T>] {
        match self {
            Region::Disc(d) => std::slice::from_ref(d),
            Region::Chain(c) => &c.discs,
            Region::Jordan(j) => &j.chain.discs,
        }
    }

    pub fn map(&self, piece: usize) -> Option<&MapExpr<T>> {
        match self {
            Region::Jordan(j) => j.maps.get(piece),
            _ => None,
        }
    }

    /// Image of a parameter-disc point in the region's own coordinates.
    pub fn to_region(&self, piece: usize, w: Complex<T>) -> Result<Complex<T>> {
        match self.map(piece) {
            Some(m) => m.eval(w),
            None => Ok(w),
        }
    }

    pub fn boundary_point(&self, piece: usize, theta: T) -> Result<Complex<T>> {
        self.to_region(piece, self.discs()[piece].point_at(theta))
    }

    /// Points shared by consecutive pieces, in region coordinates.
    pub fn contact_points(&self) -> Vec<Complex<T>> {
        match self {
            Region::Disc(_) => Vec::new(),
            Region::Chain(c) => c.tangencies.clone(),
            Region::Jordan(j) => j.tangency_images.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Region::Disc(d) => format!("closed disc |z - ({})| <= {}", d.center, d.radius),
            Region::Chain(c) => format!("canonical disc chain, n = {}", c.len()),
            Region::Jordan(j) => {
                let maps: Vec<String> = j.maps.iter().map(|m| m.to_string()).collect();
                format!("Jordan chain, n = {}, maps [{}]", j.len(), maps.join("; "))
            }
        }
    }

    /// Closed contours slightly inside each piece (radius scaled by
    /// `1 - shrink` about each parameter-disc center), mapped into the region.
    pub fn shrunk_contours(&self, shrink: T, max_step: T) -> Vec<Contour<T>> {
        self.discs()
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let c = Contour::circle(d.center, d.radius * (T::one() - shrink), max_step);
                match self.map(k) {
                    Some(m) => c.mapped(m.clone()),
                    None => c,
                }
            })
            .collect()
    }

    /// Positively oriented outer boundary contour.
    pub fn boundary_contour(&self, max_step: T) -> Contour<T> {
        match self {
            Region::Disc(d) => Contour::circle(d.center, d.radius, max_step),
            Region::Chain(c) => chain_boundary_contour_with_step(c, max_step),
            Region::Jordan(j) => {
                let segs = chain_boundary_segments(&j.chain)
                    .into_iter()
                    .map(|(k, s)| Segment::Mapped {
                        inner: Box::new(s),
                        map: j.maps[k].clone(),
                    })
                    .collect();
                Contour::from_segments(segs, max_step)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample<T> {
    pub z: Complex<T>,
    /// Index of the parameter disc the sample belongs to.
    pub piece: usize,
    /// Polar angle on that disc.
    pub theta: T,
}

/// Deterministic boundary and interior samples of a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid<T> {
    pub region: Region<T>,
    /// Boundary samples per unit arclength (of the parameter discs).
    pub density: T,
    pub interior_density: T,
    pub boundary: Vec<BoundarySample<T>>,
    pub interior: Vec<Complex<T>>,
    /// Number of equally spaced angles used on each parameter disc.
    pub angular_counts: Vec<usize>,
}

/// Grid with boundary spacing `1/density` and an interior mesh at a quarter of
/// that density.
pub fn boundary_grid<T: Real>(region: &Region<T>, density: T) -> Result<SampleGrid<T>> {
    SampleGrid::new(region.clone(), density, (density / T::lit(4.0)).max(T::lit(4.0)))
}

impl<T: Real> SampleGrid<T> {
    pub fn new(region: Region<T>, density: T, interior_density: T) -> Result<Self> {
        if !(density > T::zero()) || !(interior_density > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "grid densities must be positive, got {density} and {interior_density}"
            )));
        }
        let discs = region.discs().to_vec();
        let multi = discs.len() > 1 || matches!(region, Region::Chain(_) | Region::Jordan(_));
        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        let mut angular_counts = Vec::with_capacity(discs.len());
        for (k, d) in discs.iter().enumerate() {
            let mut m = (d.circumference() * density).ceil().to_usize().unwrap_or(1).max(1);
            if multi && m % 2 == 1 {
                // even counts put both tangency points on the grid
                m += 1;
            }
            angular_counts.push(m);
            for i in 0..m {
                if multi && k > 0 && i == 0 {
                    continue; // left tangency already emitted by the previous disc
                }
                let theta = angle(i, m);
                let w = d.point_at(theta);
                boundary.push(BoundarySample {
                    z: region.to_region(k, w)?,
                    piece: k,
                    theta,
                });
            }
            let rings = (d.radius * interior_density).ceil().to_usize().unwrap_or(1).max(1);
            for i in 0..rings {
                let rho = d.radius * T::from_usize(i).unwrap() / T::from_usize(rings).unwrap();
                let count = (T::TAU() * rho * interior_density)
                    .ceil()
                    .to_usize()
                    .unwrap_or(1)
                    .max(1);
                for j in 0..count {
                    let w = if i == 0 {
                        d.center
                    } else {
                        d.center + Complex::from_polar(rho, angle(j, count))
                    };
                    interior.push(region.to_region(k, w)?);
                }
            }
        }
        Ok(Self {
            region,
            density,
            interior_density,
            boundary,
            interior,
            angular_counts,
        })
    }

    /// Same region at twice both densities.
    pub fn refined(&self) -> Result<Self> {
        Self::new(
            self.region.clone(),
            self.density * T::lit(2.0),
            self.interior_density * T::lit(2.0),
        )
    }

    pub fn boundary_points(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.boundary.iter().map(|b| b.z)
    }

    /// Boundary samples followed by interior samples.
    pub fn points(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.boundary_points().chain(self.interior.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.boundary.len() + self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angular spacing on parameter disc `piece`.
    pub fn angular_step(&self, piece: usize) -> T {
        T::TAU() / T::from_usize(self.angular_counts[piece]).unwrap()
    }
}

/// `pi + 2 pi i / m`, starting at the leftmost point, counterclockwise.
fn angle<T: Real>(i: usize, m: usize) -> T {
    if i == 0 {
        return T::PI();
    }
    if 2 * i == m {
        return T::zero();
    }
    let t = T::PI() + T::TAU() * T::from_usize(i).unwrap() / T::from_usize(m).unwrap();
    if t >= T::TAU() {
        t - T::TAU()
    } else {
        t
    }
}

/// A parameterized curve piece, `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Segment<T> {
    Arc {
        center: Complex<T>,
        radius: T,
        theta0: T,
        theta1: T,
    },
    Line {
        from: Complex<T>,
        to: Complex<T>,
    },
    Mapped {
        inner: Box<Segment<T>>,
        map: MapExpr<T>,
    },
}

impl<T: Real> Segment<T> {
    pub fn point(&self, t: T) -> Result<Complex<T>> {
        match self {
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let theta = *theta0 + (*theta1 - *theta0) * t;
                Ok(Disc {
                    center: *center,
                    radius: *radius,
                }
                .point_at(theta))
            }
            Segment::Line { from, to } => Ok(*from + (*to - *from) * t),
            Segment::Mapped { inner, map } => map.eval(inner.point(t)?),
        }
    }

    /// Length of the unmapped parameter curve.
    fn nominal_length(&self) -> T {
        match self {
            Segment::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => *radius * (*theta1 - *theta0).abs(),
            Segment::Line { from, to } => (*to - *from).norm(),
            Segment::Mapped { inner, .. } => inner.nominal_length(),
        }
    }
}

/// One parameter interval of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPiece<T> {
    pub segment: usize,
    pub t0: T,
    pub t1: T,
}

/// Closed piecewise-smooth path. `samples` holds the piece endpoints in order;
/// the first sample is repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour<T> {
    pub segments: Vec<Segment<T>>,
    pub pieces: Vec<ContourPiece<T>>,
    pub samples: Vec<Complex<T>>,
    pub max_step: T,
}

impl<T: Real> Contour<T> {
    /// Splits each segment into pieces no longer than `max_step` (measured on
    /// the unmapped curve).
    pub fn from_segments(segments: Vec<Segment<T>>, max_step: T) -> Self {
        let mut pieces = Vec::new();
        for (s, seg) in segments.iter().enumerate() {
            let k = (seg.nominal_length() / max_step)
                .ceil()
                .to_usize()
                .unwrap_or(1)
                .max(1);
            let kt = T::from_usize(k).unwrap();
            for i in 0..k {
                pieces.push(ContourPiece {
                    segment: s,
                    t0: T::from_usize(i).unwrap() / kt,
                    t1: T::from_usize(i + 1).unwrap() / kt,
                });
            }
        }
        let mut c = Self {
            segments,
            pieces,
            samples: Vec::new(),
            max_step,
        };
        c.resample();
        c
    }

    pub fn circle(center: Complex<T>, radius: T, max_step: T) -> Self {
        Self::from_segments(
            vec![Segment::Arc {
                center,
                radius,
                theta0: T::zero(),
                theta1: T::TAU(),
            }],
            max_step,
        )
    }

    /// Same contour with every segment passed through `map`.
    pub fn mapped(self, map: MapExpr<T>) -> Self {
        let segments = self
            .segments
            .into_iter()
            .map(|s| Segment::Mapped {
                inner: Box::new(s),
                map: map.clone(),
            })
            .collect();
        let mut c = Self {
            segments,
            pieces: self.pieces,
            samples: Vec::new(),
            max_step: self.max_step,
        };
        c.resample();
        c
    }

    /// Same path traversed from piece `k` onward.
    pub fn shifted(&self, k: usize) -> Self {
        let mut c = self.clone();
        if !c.pieces.is_empty() {
            let k = k % c.pieces.len();
            c.pieces.rotate_left(k);
            c.resample();
        }
        c
    }

    fn resample(&mut self) {
        let mut samples = Vec::with_capacity(self.pieces.len() + 1);
        for p in &self.pieces {
            // failures surface again during traversal; keep a NaN placeholder
            let z = self.segments[p.segment]
                .point(p.t0)
                .unwrap_or(Complex::new(T::nan(), T::nan()));
            samples.push(z);
        }
        if let Some(&first) = samples.first() {
            samples.push(first);
        }
        self.samples = samples;
    }

    pub fn is_closed(&self) -> bool {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Polygonal length through `refine` equally spaced points per piece.
    pub fn length(&self, refine: usize) -> Result<T> {
        let refine = refine.max(1);
        let mut total = T::zero();
        let mut prev: Option<Complex<T>> = None;
        for p in &self.pieces {
            for i in 0..refine {
                let t = p.t0
                    + (p.t1 - p.t0) * T::from_usize(i).unwrap() / T::from_usize(refine).unwrap();
                let z = self.segments[p.segment].point(t)?;
                if let Some(q) = prev {
                    total = total + (z - q).norm();
                }
                prev = Some(z);
            }
        }
        if let (Some(q), Some(&first)) = (prev, self.samples.first()) {
            total = total + (first - q).norm();
        }
        Ok(total)
    }
}

/// Lower arcs left to right, then upper arcs right to left.
fn chain_boundary_segments<T: Real>(chain: &DiscChain<T>) -> Vec<(usize, Segment<T>)> {
    let arc = |d: &Disc<T>, a: T, b: T| Segment::Arc {
        center: d.center,
        radius: d.radius,
        theta0: a,
        theta1: b,
    };
    if chain.len() == 1 {
        let d = &chain.discs[0];
        return vec![(0, arc(d, T::PI(), T::PI() + T::TAU()))];
    }
    let mut segs = Vec::with_capacity(2 * chain.len());
    for (k, d) in chain.discs.iter().enumerate() {
        segs.push((k, arc(d, T::PI(), T::TAU())));
    }
    for (k, d) in chain.discs.iter().enumerate().rev() {
        segs.push((k, arc(d, T::zero(), T::PI())));
    }
    segs
}

pub fn chain_boundary_contour<T: Real>(chain: &DiscChain<T>) -> Contour<T> {
    chain_boundary_contour_with_step(chain, T::lit(1.0 / 64.0))
}

pub fn chain_boundary_contour_with_step<T: Real>(chain: &DiscChain<T>, max_step: T) -> Contour<T> {
    let segs = chain_boundary_segments(chain)
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    Contour::from_segments(segs, max_step)
}
