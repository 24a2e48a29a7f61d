//! Polynomial approximation on chains: a weighted least-squares fit in an
//! Arnoldi-orthogonalized basis, and a degree search that keeps the fit
//! inside the minimum modulus of the target so the polynomial inherits its
//! zero-freeness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{eval_many, sup_diff, FuncExpr, NormEstimate};
use crate::geometry::{boundary_grid, Region, SampleGrid};
use crate::scalar::{Complex, Real};
use crate::zerocheck::{certify_zero_free, CertifyOptions, ZeroCertificate};

/// Relative size of a new Arnoldi column below which the basis is rank deficient.
pub const RANK_TOL: f64 = 1e-13;

/// Fit samples per basis function, at least.
const OVERSAMPLING: usize = 4;

/// Polynomial in `t = (z - center) / scale` kept as combination of the
/// Arnoldi basis, evaluated by its recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthoPoly<T> {
    pub center: Complex<T>,
    pub scale: T,
    /// `hessenberg[k]` produces basis polynomial `k + 1` from `0..=k`.
    pub hessenberg: Vec<Vec<Complex<T>>>,
    /// Weights of the basis polynomials, normalized so the first one is `1`.
    pub weights: Vec<Complex<T>>,
}

impl<T: Real> OrthoPoly<T> {
    pub fn degree(&self) -> usize {
        self.hessenberg.len()
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let t = (z - self.center) / self.scale;
        let mut q = Vec::with_capacity(self.weights.len());
        q.push(Complex::new(T::one(), T::zero()));
        let mut acc = self.weights[0];
        for (k, hk) in self.hessenberg.iter().enumerate() {
            let mut v = t * q[k];
            for (i, &qi) in q.iter().enumerate() {
                v = v - hk[i] * qi;
            }
            v = v / hk[k + 1];
            acc = acc + self.weights[k + 1] * v;
            q.push(v);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyApproximant<T> {
    /// Ascending degree, in the normalized variable `(z - center) / scale`.
    /// For export; evaluation goes through `basis`.
    pub coefficients: Vec<Complex<T>>,
    pub degree: usize,
    pub center: Complex<T>,
    pub scale: T,
    pub basis: OrthoPoly<T>,
    /// `sup |f - p|` on the verification grid.
    pub fit_error: NormEstimate<T>,
    /// `min |f| - fit_error`; zero when no minimum modulus was supplied.
    pub rouche_margin: T,
    pub certificate: Option<ZeroCertificate<T>>,
}

impl<T: Real> PolyApproximant<T> {
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.basis.eval(z)
    }

    pub fn to_func(&self) -> FuncExpr<T> {
        FuncExpr::Orthogonal(Box::new(self.basis.clone()))
    }

    /// Coefficients in powers of `z` itself. Loses accuracy at high degree
    /// when the region sits far from the origin.
    pub fn monomial_coefficients(&self) -> Vec<Complex<T>> {
        // p(z) = sum c_k s^-k (z - center)^k, expanded by repeated multiplication
        let inv = T::one() / self.scale;
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.coefficients.len()];
        let mut power = vec![Complex::new(T::one(), T::zero())];
        for (k, &c) in self.coefficients.iter().enumerate() {
            for (j, &p) in power.iter().enumerate() {
                out[j] = out[j] + c * p;
            }
            if k + 1 < self.coefficients.len() {
                let mut next = vec![Complex::new(T::zero(), T::zero()); power.len() + 1];
                for (j, &p) in power.iter().enumerate() {
                    next[j + 1] = next[j + 1] + p * inv;
                    next[j] = next[j] - p * self.center * inv;
                }
                power = next;
            }
        }
        out
    }
}

/// Orthonormal basis of polynomials up to a fixed degree with respect to a
/// weighted discrete inner product, stored as its Arnoldi recurrence.
struct ArnoldiBasis<T> {
    /// `q_k` at the samples, one column per degree.
    columns: Vec<Vec<Complex<T>>>,
    /// `h[k]` holds the coefficients producing column `k + 1`:
    /// `t q_k = sum_{i <= k} h[k][i] q_i + h[k][k + 1] q_{k+1}`.
    h: Vec<Vec<Complex<T>>>,
    q0: T,
}

/// Chunked so the summation order does not depend on the thread count.
fn inner<T: Real>(w: &[T], u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    const CHUNK: usize = 512;
    let zero = Complex::new(T::zero(), T::zero());
    let partial: Vec<Complex<T>> = u
        .par_chunks(CHUNK)
        .zip(v.par_chunks(CHUNK))
        .zip(w.par_chunks(CHUNK))
        .map(|((a, b), wt)| {
            a.iter()
                .zip(b)
                .zip(wt)
                .fold(zero, |acc, ((x, y), &k)| acc + x.conj() * y * k)
        })
        .collect();
    partial.into_iter().fold(zero, |a, b| a + b)
}

fn norm<T: Real>(w: &[T], u: &[Complex<T>]) -> T {
    inner(w, u, u).re.max(T::zero()).sqrt()
}

impl<T: Real> ArnoldiBasis<T> {
    fn build(t: &[Complex<T>], w: &[T], degree: usize) -> Result<Self> {
        let total: T = w.iter().fold(T::zero(), |a, &b| a + b);
        if !(total > T::zero()) {
            return Err(Error::Conditioning("sample weights sum to zero".into()));
        }
        let q0 = T::one() / total.sqrt();
        let mut columns = vec![vec![Complex::new(q0, T::zero()); t.len()]];
        let mut h = Vec::with_capacity(degree);
        for k in 0..degree {
            let mut v: Vec<Complex<T>> = t.iter().zip(&columns[k]).map(|(&ti, &q)| ti * q).collect();
            let start = norm(w, &v);
            let mut hk = vec![Complex::new(T::zero(), T::zero()); k + 2];
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for (i, q) in columns.iter().enumerate() {
                    let c = inner(w, q, &v);
                    hk[i] = hk[i] + c;
                    v.iter_mut().zip(q).for_each(|(vi, &qi)| *vi = *vi - qi * c);
                }
            }
            let len = norm(w, &v);
            if !(len > T::lit(RANK_TOL) * start) {
                return Err(Error::Conditioning(format!(
                    "basis column {} collapsed: residual {:e} against {:e} on {} samples",
                    k + 1,
                    len.as_f64(),
                    start.as_f64(),
                    t.len()
                )));
            }
            hk[k + 1] = Complex::new(len, T::zero());
            let inv = T::one() / len;
            v.iter_mut().for_each(|vi| *vi = *vi * inv);
            columns.push(v);
            h.push(hk);
        }
        Ok(Self { columns, h, q0 })
    }

    /// Monomial coefficients of each basis polynomial, in the fit variable.
    fn monomials(&self) -> Vec<Vec<Complex<T>>> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out: Vec<Vec<Complex<T>>> = vec![vec![Complex::new(self.q0, T::zero())]];
        for (k, hk) in self.h.iter().enumerate() {
            let mut next = vec![zero; k + 2];
            for (j, &c) in out[k].iter().enumerate() {
                next[j + 1] = next[j + 1] + c;
            }
            for (i, q) in out.iter().enumerate() {
                for (j, &c) in q.iter().enumerate() {
                    next[j] = next[j] - hk[i] * c;
                }
            }
            let inv = T::one() / hk[k + 1].re;
            next.iter_mut().for_each(|c| *c = *c * inv);
            out.push(next);
        }
        out
    }

    /// Maximum deviation of the sample Gram matrix from the identity.
    fn gram_deviation(&self, w: &[T]) -> T {
        let mut worst = T::zero();
        for (i, a) in self.columns.iter().enumerate() {
            for (j, b) in self.columns.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((inner(w, a, b) - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

/// Fit samples: boundary points in the normalized variable and arclength weights.
struct FitData<T> {
    t: Vec<Complex<T>>,
    w: Vec<T>,
    values: Vec<Complex<T>>,
    center: Complex<T>,
    scale: T,
}

fn fit_data<T: Real>(f: &FuncExpr<T>, grid: &SampleGrid<T>) -> Result<FitData<T>> {
    if grid.boundary.is_empty() {
        return Err(Error::InvalidArgument("fit grid has no boundary samples".into()));
    }
    let region = &grid.region;
    let discs = region.discs();
    let n = discs.len();
    let mut w = Vec::with_capacity(grid.boundary.len());
    for s in &grid.boundary {
        let mut weight = arc_weight(grid, s.piece, s.theta)?;
        // a tangency sample also stands for the skipped first sample of the next disc
        if n > 1 && s.piece + 1 < n && s.theta == T::zero() {
            weight = weight + arc_weight(grid, s.piece + 1, T::PI())?;
        }
        w.push(weight);
    }
    let z: Vec<Complex<T>> = grid.boundary_points().collect();
    let count = T::from_usize(z.len()).unwrap();
    let center = z.iter().fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b) / count;
    let scale = z.iter().map(|&p| (p - center).norm()).fold(T::zero(), T::max);
    let scale = if scale > T::zero() { scale } else { T::one() };
    let t = z.iter().map(|&p| (p - center) / scale).collect();
    let values = eval_many(f, &z)?;
    Ok(FitData {
        t,
        w,
        values,
        center,
        scale,
    })
}

/// Arclength carried by one boundary sample, measured in the region.
fn arc_weight<T: Real>(grid: &SampleGrid<T>, piece: usize, theta: T) -> Result<T> {
    let d = grid.region.discs()[piece];
    let base = d.radius * grid.angular_step(piece);
    match grid.region.map(piece) {
        None => Ok(base),
        Some(m) => Ok(base * m.derivative(d.point_at(theta))?.norm()),
    }
}

/// Weighted least-squares polynomial of the given degree on the boundary
/// samples of `grid`, with its error measured on `verify`.
pub fn fit_polynomial<T: Real>(
    f: &FuncExpr<T>,
    degree: usize,
    grid: &SampleGrid<T>,
    verify: &SampleGrid<T>,
) -> Result<PolyApproximant<T>> {
    let data = fit_data(f, grid)?;
    if data.t.len() <= degree {
        return Err(Error::Conditioning(format!(
            "degree {degree} needs more than {} boundary samples",
            data.t.len()
        )));
    }
    let basis = ArnoldiBasis::build(&data.t, &data.w, degree)?;
    let zero = Complex::new(T::zero(), T::zero());
    let weights: Vec<Complex<T>> = match f.as_constant() {
        // the projection reproduces a constant only up to rounding
        Some(k) => (0..=degree).map(|j| if j == 0 { k } else { zero }).collect(),
        None => basis
            .columns
            .iter()
            .map(|q| inner(&data.w, q, &data.values) * basis.q0)
            .collect(),
    };
    let mono = basis.monomials();
    let mut coefficients = vec![zero; degree + 1];
    for (c, q) in weights.iter().zip(&mono) {
        for (j, &qj) in q.iter().enumerate() {
            coefficients[j] = coefficients[j] + *c * qj / basis.q0;
        }
    }
    let ortho = OrthoPoly {
        center: data.center,
        scale: data.scale,
        hessenberg: basis.h,
        weights,
    };
    let mut p = PolyApproximant {
        coefficients,
        degree,
        center: data.center,
        scale: data.scale,
        basis: ortho,
        fit_error: NormEstimate {
            value: T::zero(),
            grid_density: verify.density,
            refined: false,
            at: data.center,
        },
        rouche_margin: T::zero(),
        certificate: None,
    };
    p.fit_error = sup_diff(f, &p.to_func(), verify)?;
    Ok(p)
}

/// Largest deviation from the identity of the Gram matrix of the fit basis.
pub fn basis_gram_deviation<T: Real>(grid: &SampleGrid<T>, degree: usize) -> Result<T> {
    let data = fit_data(&FuncExpr::Const(Complex::new(T::one(), T::zero())), grid)?;
    let basis = ArnoldiBasis::build(&data.t, &data.w, degree)?;
    Ok(basis.gram_deviation(&data.w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions<T> {
    /// Boundary density of the fit samples; raised with the degree.
    pub fit_density: T,
    pub verify_density: T,
    pub certify: CertifyOptions<T>,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            fit_density: T::lit(64.0),
            verify_density: T::lit(64.0),
            certify: CertifyOptions::default(),
        }
    }
}

/// A failed polynomial search with the best approximant found, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct FitFailure<T> {
    pub error: Error,
    pub best: Option<Box<PolyApproximant<T>>>,
}

impl<T> From<Error> for FitFailure<T> {
    fn from(error: Error) -> Self {
        Self { error, best: None }
    }
}

impl<T: std::fmt::Debug> std::fmt::Display for FitFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl<T: std::fmt::Debug> std::error::Error for FitFailure<T> {}

fn fit_grid<T: Real>(region: &Region<T>, degree: usize, opts: &FitOptions<T>) -> Result<SampleGrid<T>> {
    let perimeter = region
        .discs()
        .iter()
        .fold(T::zero(), |a, d| a + d.circumference());
    let needed = T::from_usize(OVERSAMPLING * (degree + 1)).unwrap() / perimeter;
    boundary_grid(region, opts.fit_density.max(needed))
}

/// Polynomial within `min(budget, m/2)` of `f`, where `m` is the minimum
/// modulus of `f` on the region, so that `|p| >= m - fit_error > 0` on the
/// verification grid. Degrees are tried as 0, 1, 2, 4, ... up to
/// `max_degree`, then bisected.
pub fn zero_free_polynomial<T: Real>(
    f: &FuncExpr<T>,
    region: &Region<T>,
    budget: T,
    max_degree: usize,
    opts: &FitOptions<T>,
) -> Result<PolyApproximant<T>, FitFailure<T>> {
    if !(budget > T::zero()) {
        return Err(Error::InvalidArgument(format!("budget must be positive, got {budget}")).into());
    }
    let cert = certify_zero_free(f, region, &[], &opts.certify);
    if !cert.is_zero_free() {
        return Err(Error::Precondition(format!(
            "target is not certified zero-free: {:?}",
            cert.verdict
        ))
        .into());
    }
    let m = cert.min_modulus.map(|e| e.value).unwrap_or(T::zero());
    if !(m > T::zero()) {
        return Err(Error::Precondition("target has zero minimum modulus".into()).into());
    }
    let target = budget.min(m / T::lit(2.0));
    let verify = boundary_grid(region, opts.verify_density)?;

    let mut best: Option<PolyApproximant<T>> = None;
    let try_degree = |d: usize, best: &mut Option<PolyApproximant<T>>| -> Result<Option<PolyApproximant<T>>> {
        let grid = fit_grid(region, d, opts)?;
        let p = match fit_polynomial(f, d, &grid, &verify) {
            Ok(p) => p,
            // a collapsed basis at high degree counts as a failed degree
            Err(Error::Conditioning(_)) if d > 0 => return Ok(None),
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|b| p.fit_error.value < b.fit_error.value) {
            *best = Some(p.clone());
        }
        Ok((p.fit_error.value < target).then_some(p))
    };

    let mut lo: Option<usize> = None;
    let mut found: Option<(usize, PolyApproximant<T>)> = None;
    let mut d = 0;
    loop {
        if let Some(p) = try_degree(d, &mut best)? {
            found = Some((d, p));
            break;
        }
        lo = Some(d);
        if d >= max_degree {
            break;
        }
        d = if d == 0 { 1 } else { (2 * d).min(max_degree) };
    }
    let Some((mut hi, mut p)) = found else {
        let best_error = best.as_ref().map_or(f64::INFINITY, |b| b.fit_error.value.as_f64());
        return Err(FitFailure {
            error: Error::DegreeExceeded {
                max_degree,
                best_error,
                target: target.as_f64(),
            },
            best: best.map(|b| Box::new(finish(b, m, region, opts))),
        });
    };
    if let Some(mut lo) = lo {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match try_degree(mid, &mut best)? {
                Some(q) => {
                    hi = mid;
                    p = q;
                }
                None => lo = mid,
            }
        }
    }
    Ok(finish(p, m, region, opts))
}

fn finish<T: Real>(
    mut p: PolyApproximant<T>,
    m: T,
    region: &Region<T>,
    opts: &FitOptions<T>,
) -> PolyApproximant<T> {
    p.rouche_margin = m - p.fit_error.value;
    p.certificate = Some(certify_zero_free(&p.to_func(), region, &[], &opts.certify));
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chain_discs, Disc};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn chain(n: usize) -> Region<f64> {
        Region::Chain(chain_discs(n).unwrap())
    }

    #[test]
    fn recovers_polynomial() {
        let f = FuncExpr::Poly(vec![c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]);
        let r = chain(2);
        let p = fit_polynomial(&f, 2, &boundary_grid(&r, 64.0).unwrap(), &boundary_grid(&r, 64.0).unwrap()).unwrap();
        assert!(p.fit_error.value <= 1e-10, "{}", p.fit_error.value);
        let m = p.monomial_coefficients();
        for (a, b) in m.iter().zip([c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_degree_zero_is_exact() {
        let k = c(0.3, -1.7);
        let r = Region::Disc(Disc::canonical_right());
        let g = boundary_grid(&r, 32.0).unwrap();
        let p = fit_polynomial(&FuncExpr::Const(k), 0, &g, &g).unwrap();
        assert_eq!(p.degree, 0);
        assert!((p.coefficients[0] - k).norm() < 1e-15);
        assert!(p.fit_error.value < 1e-15);
    }

    #[test]
    fn gram_matrix_is_identity() {
        let g = boundary_grid(&chain(3), 64.0).unwrap();
        for d in [1, 8, 30] {
            assert!(basis_gram_deviation(&g, d).unwrap() < 1e-8);
        }
    }

    #[test]
    fn too_few_samples_is_conditioning_error() {
        let g = boundary_grid(&Region::Disc(Disc::canonical_right()), 1.0).unwrap();
        let r = fit_polynomial(&FuncExpr::Exp, 40, &g, &g);
        assert!(matches!(r, Err(Error::Conditioning(_))));
    }

    #[test]
    fn constant_one_needs_degree_zero() {
        let p = zero_free_polynomial(
            &FuncExpr::Const(c(1.0, 0.0)),
            &chain(2),
            0.1,
            10,
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(p.degree, 0);
        assert!((p.rouche_margin - 1.0).abs() < 1e-12);
        assert!(p.certificate.unwrap().is_zero_free());
    }

    #[test]
    fn exp_on_two_discs() {
        let p = zero_free_polynomial(&FuncExpr::Exp, &chain(2), 0.1, 40, &FitOptions::default()).unwrap();
        assert!(p.fit_error.value < 0.1);
        assert!(p.rouche_margin > 0.0);
        assert!(p.certificate.as_ref().unwrap().is_zero_free());
    }

    #[test]
    fn interior_zero_is_rejected() {
        let f = FuncExpr::Poly(vec![c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let e = zero_free_polynomial(&f, &chain(2), 0.1, 10, &FitOptions::default()).unwrap_err();
        assert!(matches!(e.error, Error::Precondition(_)));
    }

    #[test]
    fn degree_cap_reports_best() {
        let e = zero_free_polynomial(&FuncExpr::Exp, &chain(2), 1e-14, 3, &FitOptions::default()).unwrap_err();
        assert!(matches!(e.error, Error::DegreeExceeded { max_degree: 3, .. }));
        assert_eq!(e.best.unwrap().degree, 3);
    }
}
