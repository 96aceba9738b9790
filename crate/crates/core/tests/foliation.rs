//! Cycles, holonomy and configurations on catalog surfaces.

use meanfol::foliation::*;
use meanfol::geometry::Foliation;
use meanfol::singularities::{DType, Kind};
use meanfol::{catalog, SurfaceDef, Tolerances};

fn cycle_through(s: &SurfaceDef, seed: [f64; 2], fol: Foliation) -> Cycle {
    let tol = Tolerances::default();
    let tr = trace_leaf(s, seed, fol, 1.0, &tol, &[]);
    let mut c = detect_cycle(s, &tr, &tol, &[]).unwrap();
    compute_holonomy(s, &mut c, &tol);
    c
}

fn assert_methods_agree(c: &Cycle) -> f64 {
    let h = c.holonomy.as_ref().unwrap();
    let (num, err) = h.numeric.unwrap();
    let scale = num.abs().max(1.0);
    assert!(err < 1e-5 * scale);
    assert!((num - h.frame).abs() < 1e-6 * scale, "numeric {num} vs frame {}", h.frame);
    if let Some(e24) = h.darboux {
        assert!((e24 - h.frame).abs() < 1e-8 * scale, "darboux {e24} vs frame {}", h.frame);
    }
    assert!(h.quadrature_ok);
    assert!(c.gap < Tolerances::default().tol_cycle * c.length);
    num
}

fn assert_identities(c: &Cycle) {
    let id = c.identities();
    assert!(id.max_tau_n < 1e-6 && id.max_kb_plus_kbar < 1e-6, "{id:?}");
    assert!(id.min_gap > 0.0 && id.max_skew < 1e-8, "{id:?}");
}

#[test]
fn lifted_ellipsoid_cycles_are_not_hyperbolic() {
    let s = catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap();
    for (seed, fol) in [([1.0, -0.9], Foliation::Minimal), ([3.0, 0.9], Foliation::Minimal), ([1.0, 0.9], Foliation::Maximal)] {
        let c = cycle_through(&s, seed, fol);
        let ln = assert_methods_agree(&c);
        assert!(ln.abs() < 1e-4);
        assert!(!c.holonomy.as_ref().unwrap().hyperbolic);
        assert!(c.samples.iter().all(|f| f.tau.abs() < 1e-6));
        if fol == Foliation::Minimal {
            assert_identities(&c);
        }
    }
}

#[test]
fn lifted_band_cycle_is_hyperbolic_and_untwisted() {
    let s = catalog::lifted_elliptic_band(1.0, 1.3, 2.5, 0.2, 0.3, 0.2).unwrap();
    let c = cycle_through(&s, [0.3, 0.0], Foliation::Minimal);
    let ln = assert_methods_agree(&c);
    assert!(ln.abs() > 0.1);
    assert_identities(&c);
    let [_, _, third] = darboux_terms(&c).unwrap();
    assert!(third.abs() < 1e-9);
    assert!(perturbation_derivative(&c, &auto_delta(&c)).abs() < 1e-9);
}

#[test]
fn twisted_band_cycles() {
    for (r, n, k0, k1, a, b) in [(1.0, 2, 2.5, 0.4, 0.5, 0.2), (1.2, 1, 2.0, 0.2, -0.4, 0.5)] {
        let s = catalog::twisted_band(r, n, k0, k1, a, b, 0.3).unwrap();
        let c = cycle_through(&s, [0.3, 0.0], Foliation::Minimal);
        assert_methods_agree(&c);
        assert_identities(&c);
        assert!((c.length - 2.0 * std::f64::consts::PI * r).abs() < 1e-8);
        for f in &c.samples {
            assert!((f.tau - f64::from(n) / r).abs() < 1e-8);
        }
    }
}

#[test]
fn deformation_derivative_matches_differences() {
    let (r, k0, k1, a, b) = (1.2, 2.0, 0.2, -0.4, 0.5);
    let tol = Tolerances::default();
    let c = cycle_through(&catalog::twisted_band(r, 1, k0, k1, a, b, 0.3).unwrap(), [0.3, 0.0], Foliation::Minimal);
    let delta = auto_delta(&c);
    let predicted = deformation_derivative(&c, &delta);
    // δ = −τ H̃₁ with τ = 1/R and 2H̃₁ = 1/R + K(u) along the core circle.
    let profile = |eps: f64| format!("{b:?} + ({eps:?})*(-(1/R + K0 + K1*cos(u))/(2*R))");
    let ln = |eps: f64| {
        let s = catalog::twisted_band_profile(r, 1, k0, k1, a, &profile(eps), 0.3).unwrap();
        let tr = trace_leaf(&s, [0.3, 0.0], Foliation::Minimal, 1.0, &tol, &[]);
        let cy = detect_cycle(&s, &tr, &tol, &[]).unwrap();
        holonomy_numeric(&s, &cy, &tol, default_offset(&cy)).unwrap().0
    };
    let eps = 1e-4;
    let fd = (ln(eps) - ln(-eps)) / (2.0 * eps);
    assert!((fd - predicted).abs() < 1e-3 * predicted.abs(), "fd {fd} vs {predicted}");
    assert!(predicted < 0.0);
}

#[test]
fn lifted_ellipsoid_configuration() {
    let s = catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap();
    let c = build_configuration(&s, &ConfigOptions { grid: 48, seeding: Seeding::Grid(2), cycles: true }, &Tolerances::default()).unwrap();
    assert_eq!(c.scan.singularities.len(), 4);
    assert!(c.scan.singularities.iter().all(|s| s.kind == Kind::Umbilic && s.dtype() == Some(DType::D1)));
    // One saddle per D1 umbilic, one separatrix per foliation.
    assert_eq!(c.separatrices.len(), 8);
    assert!(!c.cycles.is_empty());
    assert!(c.cycles.iter().all(|cy| !cy.holonomy.as_ref().unwrap().hyperbolic));
    assert!(c.checklist.all_darbouxian);
    assert!(!c.checklist.all_hyperbolic);
    // Umbilic separatrices of the triaxial ellipsoid join in pairs.
    assert!(!c.checklist.no_connections);
}
