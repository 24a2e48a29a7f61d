use std::f64::consts::PI;

use proptest::prelude::*;
use zerofree::conformal::{eval_eta, pie_contains};
use zerofree::geometry::{boundary_grid, chain_discs};
use zerofree::pipeline::{lens_with_ratio, parabolic_with_delta, shrink_toward, shrink_with_ratio};
use zerofree::polyfit::basis_gram_deviation;
use zerofree::*;

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Point of the closed disc from polar coordinates in [0,1] x [0,2pi).
fn in_disc(d: &Disc<f64>, s: f64, t: f64) -> C {
    d.center + C::from_polar(d.radius * s.sqrt(), t)
}

fn poly_from_roots(roots: &[C], scale: C) -> FuncExpr<f64> {
    let mut coeffs = vec![scale];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
        for (k, &a) in coeffs.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        coeffs = next;
    }
    FuncExpr::Poly(coeffs)
}

fn complex_in(lo: f64, hi: f64) -> impl Strategy<Value = C> {
    (lo..hi, lo..hi).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lens_maps_right_disc_into_itself(r in 0.05f64..=1.0, s in 0.0f64..=1.0, t in 0.0..2.0 * PI) {
        let d2 = Disc::canonical_right();
        let z = in_disc(&d2, s, t);
        let w = MapExpr::lens(r).unwrap().eval(z).unwrap();
        prop_assert!(d2.contains(w, 1e-10), "{z} -> {w}");
    }

    #[test]
    fn parabolic_keeps_real_part_of_reciprocal(delta in 0.0f64..2.0, s in 1e-6f64..=1.0, t in 0.0..2.0 * PI) {
        let z = in_disc(&Disc::canonical_right(), s, t);
        prop_assume!(z.norm() > 1e-6);
        let w = MapExpr::parabolic(delta).unwrap().eval(z).unwrap();
        prop_assert!((w.inv().re - z.inv().re).abs() <= 1e-10 * (1.0 + z.inv().re.abs()));
    }

    #[test]
    fn eta_image_in_pie(
        alpha in -PI..PI,
        r in 1e-3f64..2.0,
        delta1 in 1e-3f64..(PI / 2.0),
        delta3 in 1e-3f64..1.0,
        s in 0.0f64..=1.0,
        t in 0.0..2.0 * PI,
    ) {
        let p = EtaParams::new(alpha, r, delta1, delta3).unwrap();
        let z = in_disc(&Disc::canonical_left(), s, t);
        let w = eval_eta(&p, z).unwrap();
        prop_assert!(pie_contains(&p.pie(), w, 1e-10), "{z} -> {w}");
    }

    #[test]
    fn moebius_inverse_round_trips(a in complex_in(-2.0, 2.0), b in complex_in(-2.0, 2.0), z in complex_in(-1.0, 1.0)) {
        let m = MapExpr::moebius(a, b, c(0.3, -0.1), c(1.0, 0.0));
        prop_assume!(m.is_ok());
        let m = m.unwrap();
        let w = m.eval(z);
        prop_assume!(w.is_ok());
        let back = m.inverse().unwrap().eval(w.unwrap());
        prop_assume!(back.is_ok());
        prop_assert!((back.unwrap() - z).norm() < 1e-8 * (1.0 + z.norm()));
    }

    #[test]
    fn anchors_are_preserved(coeffs in prop::collection::vec(complex_in(-2.0, 2.0), 1..5), r in 0.1f64..1.0, delta in 0.0f64..1.0) {
        let f = FuncExpr::Poly(coeffs);
        let d2 = Disc::canonical_right();
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let at = |g: &FuncExpr<f64>, z: C| g.eval(z).unwrap();
        prop_assert_eq!(at(&shrink_with_ratio(&f, &d2, zero, r).unwrap(), zero), at(&f, zero));
        prop_assert_eq!(at(&parabolic_with_delta(&f, &d2, zero, delta).unwrap(), zero), at(&f, zero));
        let lensed = lens_with_ratio(&f, &d2, (zero, one), r).unwrap();
        prop_assert!((at(&lensed, zero) - at(&f, zero)).norm() < 1e-10);
        prop_assert!((at(&lensed, one) - at(&f, one)).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn winding_counts_enclosed_roots(
        roots in prop::collection::vec(complex_in(-2.0, 2.0), 0..7),
        center in complex_in(-1.0, 1.0),
        radius in 0.2f64..2.0,
    ) {
        prop_assume!(roots.iter().all(|r| ((*r - center).norm() - radius).abs() >= 0.05));
        let f = poly_from_roots(&roots, c(1.0, 0.0));
        let expected = roots.iter().filter(|r| (**r - center).norm() < radius).count() as i64;
        let contour = Contour::circle(center, radius, 0.05);
        prop_assert_eq!(winding_number(&f, &contour, 0.0).unwrap(), expected);
    }

    #[test]
    fn winding_ignores_scaling_and_start(
        roots in prop::collection::vec(complex_in(-1.5, 1.5), 1..5),
        scale in complex_in(-3.0, 3.0),
        shift in 0usize..200,
    ) {
        prop_assume!(scale.norm() > 1e-2);
        prop_assume!(roots.iter().all(|r| (r.norm() - 1.0).abs() >= 0.05));
        let contour = Contour::circle(c(0.0, 0.0), 1.0, 0.05);
        let base = winding_number(&poly_from_roots(&roots, c(1.0, 0.0)), &contour, 0.0).unwrap();
        let scaled = winding_number(&poly_from_roots(&roots, scale), &contour, 0.0).unwrap();
        let shifted = contour.shifted(shift % contour.samples.len());
        let moved = winding_number(&poly_from_roots(&roots, c(1.0, 0.0)), &shifted, 0.0).unwrap();
        prop_assert_eq!(base, scaled);
        prop_assert_eq!(base, moved);
    }

    #[test]
    fn winding_of_product_is_sum(
        a in prop::collection::vec(complex_in(-1.5, 1.5), 1..4),
        b in prop::collection::vec(complex_in(-1.5, 1.5), 1..4),
    ) {
        prop_assume!(a.iter().chain(&b).all(|r| (r.norm() - 1.0).abs() >= 0.05));
        let contour = Contour::circle(c(0.0, 0.0), 1.0, 0.05);
        let fa = poly_from_roots(&a, c(1.0, 0.0));
        let fb = poly_from_roots(&b, c(1.0, 0.0));
        let w = |f: &FuncExpr<f64>| winding_number(f, &contour, 0.0).unwrap();
        prop_assert_eq!(w(&FuncExpr::product(fa.clone(), fb.clone())), w(&fa) + w(&fb));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn shrink_spends_at_most_its_budget(k in 1u32..8, a in complex_in(-1.0, 1.0)) {
        // f(0) = 0 is the only zero on the closed right disc when |a| is small.
        let f = FuncExpr::Poly(vec![c(0.0, 0.0), c(1.0, 0.0), a * 0.3]);
        let budget = 2f64.powi(-(k as i32));
        let opts = PipelineOptions::default();
        let (_, rec) = shrink_toward(&f, &Disc::canonical_right(), c(0.0, 0.0), budget, &opts).unwrap();
        prop_assert!(rec.error_budget_spent >= 0.0 && rec.error_budget_spent <= budget);
    }
}

#[test]
fn smaller_budgets_shrink_less() {
    let opts = PipelineOptions::default();
    let d2 = Disc::canonical_right();
    let mut last = 0.0;
    for k in 1..10 {
        let (_, rec) = shrink_toward(&FuncExpr::identity(), &d2, c(0.0, 0.0), 2f64.powi(-k), &opts).unwrap();
        let r = rec.param("r").unwrap();
        assert!(r >= last, "r = {r} after {last}");
        last = r;
    }
}

#[test]
fn arnoldi_basis_is_orthonormal_on_chains() {
    for n in 1..=3 {
        let grid = boundary_grid(&Region::Chain(chain_discs(n).unwrap()), 64.0).unwrap();
        for degree in [1, 10, 40] {
            let dev = basis_gram_deviation(&grid, degree).unwrap();
            assert!(dev < 1e-8, "n = {n}, degree {degree}: {dev}");
        }
    }
}

#[test]
fn rouche_margin_transfers_zero_freeness() {
    // exp(z) + 2 has no zeros near the chain; any certified fit must stay zero-free.
    let f = FuncExpr::sum(FuncExpr::Exp, FuncExpr::constant(c(2.0, 0.0)));
    let region = Region::Chain(chain_discs(2).unwrap());
    let p = zero_free_polynomial(&f, &region, 1e-4, 60, &FitOptions::default()).unwrap();
    assert!(p.rouche_margin > 0.0);
    assert!(p.fit_error.value < 1e-4);
    assert!(p.certificate.as_ref().unwrap().is_zero_free());
    let independent = certify_zero_free(&p.to_func(), &region, &[], &CertifyOptions::default());
    assert!(independent.is_zero_free());
}
