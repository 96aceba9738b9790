//! Singularity location and classification on surfaces with known answers.

use meanfol::expr::{Expr, Func};
use meanfol::singularities::{
    analyze, classify_linear, classify_normal, classify_umbilic, constructed_coeffs, constructed_target, find_singularities, monge_adapt,
    rotate_linear, DType, Kind,
};
use meanfol::{catalog, SurfaceDef, Tolerances};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Umbilics of the triaxial ellipsoid `a < b < c` in the catalog chart: on
/// `v = 0` with `cos² u = (b² − a²)/(c² − a²)`.
fn ellipsoid_umbilics(a: f64, b: f64, c: f64) -> Vec<f64> {
    let u0 = ((b * b - a * a) / (c * c - a * a)).sqrt().acos();
    vec![u0, PI - u0, PI + u0, 2.0 * PI - u0]
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 4]; 4] {
    // Gram–Schmidt on a random matrix.
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        let mut r: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        for j in 0..i {
            let d: f64 = (0..4).map(|k| r[k] * m[j][k]).sum();
            for k in 0..4 {
                r[k] -= d * m[j][k];
            }
        }
        let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        m[i] = r.map(|x| x / n);
    }
    m
}

fn constructed(kind: Kind, t: DType) -> SurfaceDef {
    let (a, b, c) = constructed_target(t);
    catalog::graph_monge(&constructed_coeffs(kind, a, b, c), 0.5, None)
}

#[test]
fn lifted_ellipsoid_umbilics_match_the_analytic_positions() {
    let tol = Tolerances::default();
    for (a, b, c) in [(1.0, 2.0, 3.0), (1.0, 1.2, 1.5), (0.8, 1.5, 2.0)] {
        let s = catalog::lifted_ellipsoid(a, b, c).unwrap();
        let scan = find_singularities(&s, 64, &tol);
        assert!(scan.suspects.is_empty());
        let mut found: Vec<&_> = scan.singularities.iter().collect();
        found.sort_by(|x, y| x.location[0].total_cmp(&y.location[0]));
        let want = ellipsoid_umbilics(a, b, c);
        assert_eq!(found.len(), 4, "({a}, {b}, {c})");
        for (s, u) in found.iter().zip(&want) {
            assert_eq!(s.kind, Kind::Umbilic);
            assert_eq!(s.dtype(), Some(DType::D1));
            assert!((s.location[0] - u).abs() < 1e-7 && s.location[1].abs() < 1e-7, "{:?} vs {u}", s.location);
        }
    }
}

#[test]
fn lift_scale_does_not_move_umbilics() {
    let tol = Tolerances::default();
    let want = ellipsoid_umbilics(1.0, 2.0, 3.0);
    for scale in [0.1, 0.25, 0.4] {
        let s = catalog::lifted_ellipsoid_scaled(1.0, 2.0, 3.0, scale).unwrap();
        for u in &want {
            let sg = analyze(&s, [*u, 0.0], Kind::Umbilic, &tol);
            assert!(sg.residual < 1e-10, "scale {scale}: {}", sg.residual);
            assert_eq!(sg.dtype(), Some(DType::D1));
        }
    }
}

#[test]
fn constructed_singularities_are_found_and_typed() {
    let tol = Tolerances::default();
    for kind in [Kind::Normal, Kind::Umbilic] {
        for t in [DType::D1, DType::D2, DType::D3] {
            let scan = find_singularities(&constructed(kind, t), 32, &tol);
            let at0: Vec<_> = scan.singularities.iter().filter(|s| s.location[0].hypot(s.location[1]) < 1e-8).collect();
            assert_eq!(at0.len(), 1, "{kind:?} {t:?}");
            assert_eq!(at0[0].kind, kind);
            assert_eq!(at0[0].dtype(), Some(t));
        }
    }
}

#[test]
fn classification_ignores_tangent_rotations() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases: Vec<(SurfaceDef, [f64; 2], Kind, DType)> = Vec::new();
    for kind in [Kind::Normal, Kind::Umbilic] {
        for t in [DType::D1, DType::D2, DType::D3] {
            cases.push((constructed(kind, t), [0.0, 0.0], kind, t));
        }
    }
    let u0 = ellipsoid_umbilics(1.0, 2.0, 3.0)[0];
    cases.push((catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap(), [u0, 0.0], Kind::Umbilic, DType::D1));
    for (s, p, kind, t) in &cases {
        let jet = s.jet_at(*p).unwrap();
        for _ in 0..100 {
            let angle = rng.gen_range(0.0..2.0 * PI);
            let m = monge_adapt(&jet, *kind == Kind::Umbilic, angle).unwrap();
            let c = match kind {
                Kind::Umbilic => classify_umbilic(&m, &tol),
                _ => classify_normal(&m, &tol),
            };
            assert_eq!(c.dtype, Some(*t), "{kind:?} angle {angle}");
        }
        for _ in 0..20 {
            let r = s.mapped(&random_rotation(&mut rng)).unwrap();
            assert_eq!(analyze(&r, *p, *kind, &tol).dtype(), Some(*t));
        }
    }
}

fn bump(rng: &mut ChaCha8Rng, eps: f64) -> Expr {
    let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let sin = |e: Expr| Expr::call(Func::Sin, vec![e]);
    let cos = |e: Expr| Expr::call(Func::Cos, vec![e]);
    Expr::num(eps)
        * (Expr::num(c[0]) * sin(Expr::u()) * Expr::v()
            + Expr::num(c[1]) * cos(Expr::num(2.0) * Expr::u())
            + Expr::num(c[2]) * Expr::v() * Expr::v()
            + Expr::num(c[3]) * sin(Expr::u() + Expr::v()))
}

#[test]
fn perturbed_lifted_ellipsoid_keeps_its_umbilics() {
    let tol = Tolerances::default();
    let base = catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap();
    let want = ellipsoid_umbilics(1.0, 2.0, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..3 {
        let extra: Vec<Expr> = (0..4).map(|_| bump(&mut rng, 1e-3)).collect();
        let s = base.perturbed(&extra).unwrap();
        let scan = find_singularities(&s, 64, &tol);
        let umbilics: Vec<_> = scan.singularities.iter().filter(|s| s.kind == Kind::Umbilic).collect();
        assert_eq!(umbilics.len(), 4);
        for u in &want {
            let near = umbilics.iter().find(|s| (s.location[0] - u).abs() < 0.05 && s.location[1].abs() < 0.05);
            assert_eq!(near.and_then(|s| s.dtype()), Some(DType::D1));
        }
    }
}

#[test]
fn totally_umbilic_surfaces_are_degenerate() {
    let tol = Tolerances::default();
    assert!(find_singularities(&catalog::clifford_torus(), 16, &tol).globally_degenerate);
    assert!(find_singularities(&catalog::plane(), 16, &tol).globally_degenerate);
}

proptest! {
    #[test]
    fn linear_type_is_rotation_invariant(k in prop::array::uniform4(-3.0f64..3.0), w in 0.0f64..(2.0 * PI)) {
        let tol = Tolerances::default();
        let base = classify_linear(k, &tol);
        let rot = classify_linear(rotate_linear(k, w), &tol);
        // Away from the type boundaries the type cannot change.
        let margin = base.transversality.abs() > 1e-3 && base.discriminant.abs() > 1e-3 && (base.ratio + 2.0).abs() > 1e-3 && base.rotated[1].abs() > 1e-3;
        prop_assume!(margin && base.dtype.is_some());
        prop_assert_eq!(base.dtype, rot.dtype);
        prop_assert!((base.transversality - rot.transversality).abs() < 1e-9 * (1.0 + base.transversality.abs()));
    }
}
