//! Jet partials against finite-difference oracles.

use meanfol::{catalog, SurfaceDef};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Five-point central stencils for derivatives of order 0..=4.
fn stencil(order: usize) -> ([f64; 5], f64) {
    match order {
        0 => ([0.0, 0.0, 1.0, 0.0, 0.0], 1.0),
        1 => ([1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        2 => ([-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        3 => ([-1.0, 2.0, 0.0, -2.0, 1.0], 2.0),
        4 => ([1.0, -4.0, 6.0, -4.0, 1.0], 1.0),
        _ => unreachable!(),
    }
}

fn fd_raw(s: &SurfaceDef, p: [f64; 2], i: usize, j: usize, h: f64) -> [f64; 4] {
    let (cu, du) = stencil(i);
    let (cv, dv) = stencil(j);
    let mut out = [0.0; 4];
    for a in 0..5 {
        for b in 0..5 {
            let w = cu[a] * cv[b];
            if w == 0.0 {
                continue;
            }
            let x = s.eval_jets([p[0] + (a as f64 - 2.0) * h, p[1] + (b as f64 - 2.0) * h], 0);
            for k in 0..4 {
                out[k] += w * x[k].value();
            }
        }
    }
    let scale = du * dv * h.powi((i + j) as i32);
    out.map(|x| x / scale)
}

/// Richardson-extrapolated finite difference of `∂^{i+j}/∂u^i∂v^j`.
fn fd(s: &SurfaceDef, p: [f64; 2], i: usize, j: usize, h: f64) -> [f64; 4] {
    let a = fd_raw(s, p, i, j, h);
    let b = fd_raw(s, p, i, j, 0.5 * h);
    std::array::from_fn(|k| (4.0 * b[k] - a[k]) / 3.0)
}

fn random_poly(rng: &mut ChaCha8Rng) -> String {
    let mut terms = Vec::new();
    for d in 0..=4 {
        for j in 0..=d {
            let c: f64 = rng.gen_range(-1.0..1.0);
            terms.push(format!("({c:?})*u^{}*v^{j}", d - j));
        }
    }
    terms.join(" + ")
}

fn random_surface(rng: &mut ChaCha8Rng) -> SurfaceDef {
    let src = format!(
        "x1 = u + 0.1*({}); x2 = v + 0.1*({}); x3 = {}; x4 = {}; domain u in [-1, 1], v in [-1, 1]",
        random_poly(rng),
        random_poly(rng),
        random_poly(rng),
        random_poly(rng)
    );
    SurfaceDef::parse(&src).unwrap()
}

fn check(s: &SurfaceDef, p: [f64; 2], h: f64, rel: f64) {
    let jet = s.jet_at(p).unwrap();
    for d in 1..=4 {
        for j in 0..=d {
            let i = d - j;
            let exact = jet.partial(i, j);
            let approx = fd(s, p, i, j, h);
            for k in 0..4 {
                let err = (exact[k] - approx[k]).abs();
                assert!(err <= rel * exact[k].abs().max(1.0), "∂({i},{j}) x{} at {p:?}: {} vs {}", k + 1, exact[k], approx[k]);
            }
        }
    }
}

#[test]
fn random_quartic_surfaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let s = random_surface(&mut rng);
        for _ in 0..20 {
            let p = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
            check(&s, p, 0.05, 1e-7);
        }
    }
}

#[test]
fn catalog_surfaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let surfaces = [
        catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap(),
        catalog::product_torus(1.0, 0.5).unwrap(),
        catalog::twisted_band(1.0, 2, 2.0, 0.3, 0.4, 0.3, 0.3).unwrap(),
        catalog::lifted_elliptic_band(1.0, 1.3, 2.5, 0.2, 0.3, 0.2).unwrap(),
        catalog::by_name("graph_monge(r1=1, t1=-1, a1=0.5, s2=0.3, c2=0.7)").unwrap(),
    ];
    for s in &surfaces {
        let d = *s.domain();
        for _ in 0..100 {
            let p = [
                d.u.lo + d.u.len() * rng.gen_range(0.1..0.9),
                d.v.lo + d.v.len() * rng.gen_range(0.1..0.9),
            ];
            check(s, p, 0.01, 1e-5);
        }
    }
}

#[test]
fn lift_lands_on_the_unit_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap();
    for _ in 0..100 {
        let p = [rng.gen_range(0.0..6.28), rng.gen_range(-1.3..1.3)];
        let x = s.eval(p).unwrap();
        let r2: f64 = x.iter().map(|c| c * c).sum();
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn jets_of_polynomials_are_exact(c in prop::collection::vec(-2.0f64..2.0, 6), u in -1.0f64..1.0, v in -1.0f64..1.0) {
        // x3 = c0 u³ + c1 u²v + c2 v⁴ + c3 uv + c4 u + c5: every partial is a
        // closed-form polynomial.
        let src = format!(
            "x1=u; x2=v; x3=({})*u^3 + ({})*u^2*v + ({})*v^4 + ({})*u*v + ({})*u + ({}); x4=0; domain u in [-2,2], v in [-2,2]",
            c[0], c[1], c[2], c[3], c[4], c[5]
        );
        let s = SurfaceDef::parse(&src).unwrap();
        let j = s.jet_at([u, v]).unwrap();
        let f = |i: usize, k: usize| j.partial(i, k)[2];
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
        prop_assert!(close(f(1, 0), 3.0 * c[0] * u * u + 2.0 * c[1] * u * v + c[3] * v + c[4]));
        prop_assert!(close(f(0, 1), c[1] * u * u + 4.0 * c[2] * v.powi(3) + c[3] * u));
        prop_assert!(close(f(1, 1), 2.0 * c[1] * u + c[3]));
        prop_assert!(close(f(2, 1), 2.0 * c[1]));
        prop_assert!(close(f(3, 0), 6.0 * c[0]));
        prop_assert!(close(f(0, 4), 24.0 * c[2]));
        prop_assert!(close(f(0, 3), 24.0 * c[2] * v));
        prop_assert!(close(f(2, 2), 0.0));
    }

    #[test]
    fn jet_products_follow_leibniz(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let s = SurfaceDef::parse("x1=u; x2=v; x3=sin(u)*exp(v); x4=cos(u*v); domain u in [-2,2], v in [-2,2]").unwrap();
        let j = s.jet_at([a, b]).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
        prop_assert!(close(j.partial(1, 1)[2], a.cos() * b.exp()));
        prop_assert!(close(j.partial(3, 1)[2], -a.cos() * b.exp()));
        prop_assert!(close(j.partial(1, 0)[3], -b * (a * b).sin()));
        prop_assert!(close(j.partial(1, 1)[3], -(a * b).sin() - a * b * (a * b).cos()));
    }
}
