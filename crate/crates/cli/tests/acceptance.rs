//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line to stdout
//! (bypassing the test harness capture) and fails when its criterion does.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use meanfol::expr::{Axis, Domain, Expr, Func};
use meanfol::foliation::{
    auto_delta, compute_holonomy, default_offset, deformation_derivative, detect_cycle, holonomy_numeric, perturbation_derivative, trace_leaf, Cycle,
};
use meanfol::geometry::{form_jets, normal_frame_jets, partials, Foliation};
use meanfol::jet::{dot4, Jet};
use meanfol::liecartan::{fiber_equilibria, trace_separatrix, EqClass};
use meanfol::singularities::{analyze, constructed_coeffs, constructed_target, find_singularities, DType, Kind};
use meanfol::{catalog, SurfaceDef, Tolerances};
use meanfol_cli::run::{to_json, SurfaceSource};
use meanfol_cli::{execute, Command, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: usize, what: &str, pass: bool, detail: &str, secs: f64, limit: Option<f64>) {
    let time = match limit {
        Some(l) => format!("{secs:.2} s, limit {l} s"),
        None => format!("{secs:.2} s"),
    };
    let line = format!("{} criterion {n}: {what}: {detail} ({time})\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

// ---------------------------------------------------------------- 1

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
            if w != 0.0 {
                let x = s.eval([p[0] + (a as f64 - 2.0) * h, p[1] + (b as f64 - 2.0) * h]).unwrap();
                for k in 0..4 {
                    out[k] += w * x[k];
                }
            }
        }
    }
    let scale = du * dv * h.powi((i + j) as i32);
    out.map(|x| x / scale)
}

/// Richardson-extrapolated central difference of `∂^{i+j}/∂u^i∂v^j`.
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

#[test]
fn c1_jet_partials_match_finite_differences() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..20 {
        let src = format!(
            "x1 = u + 0.1*({}); x2 = v + 0.1*({}); x3 = {}; x4 = {}; domain u in [-1, 1], v in [-1, 1]",
            random_poly(&mut rng),
            random_poly(&mut rng),
            random_poly(&mut rng),
            random_poly(&mut rng)
        );
        let s = SurfaceDef::parse(&src).unwrap();
        for _ in 0..20 {
            let p = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
            let jet = s.jet_at(p).unwrap();
            for d in 0..=4 {
                for j in 0..=d {
                    let i = d - j;
                    let exact = jet.partial(i, j);
                    let approx = fd(&s, p, i, j, 0.05);
                    for k in 0..4 {
                        worst = worst.max((exact[k] - approx[k]).abs() / exact[k].abs().max(1.0));
                        checked += 1;
                    }
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        1,
        "jet partials to order 4 vs central differences",
        worst < 1e-5 && secs < 10.0,
        &format!("{checked} partials on 20 surfaces x 20 points, worst relative error {worst:.2e} (< 1e-5)"),
        secs,
        Some(10.0),
    );
}

// ---------------------------------------------------------------- 2

struct Monge {
    r: [f64; 2],
    s: [f64; 2],
    t: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    d: [f64; 2],
}

impl Monge {
    fn random(rng: &mut ChaCha8Rng) -> Monge {
        let mut g = || [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        Monge {
            r: g(),
            s: g(),
            t: g(),
            a: g(),
            b: g(),
            c: g(),
            d: g(),
        }
    }

    fn coeffs(&self) -> [f64; 14] {
        let mut k = [0.0; 14];
        for i in 0..2 {
            k[7 * i..7 * i + 7].copy_from_slice(&[self.r[i], self.s[i], self.t[i], self.a[i], self.b[i], self.c[i], self.d[i]]);
        }
        k
    }

    fn surface(&self) -> SurfaceDef {
        catalog::graph_monge(&self.coeffs(), 0.5, None)
    }
}

/// `(value, ∂u, ∂v)` of a jet at the origin.
fn lin(j: &Jet) -> [f64; 3] {
    [j.value(), j.partial(1, 0), j.partial(0, 1)]
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Linear coefficients `(d, b, a, c)` read from the machine BDE
/// `L dv² + M du dv + N du²` of `s` at the origin, after checking `L = −N`
/// to linear order.
fn machine_linear(s: &SurfaceDef) -> ([f64; 4], f64) {
    let [l, m, n] = form_jets(&s.jet_at([0.0, 0.0]).unwrap()).bde();
    let skew = (l.partial(1, 0) + n.partial(1, 0)).abs().max((l.partial(0, 1) + n.partial(0, 1)).abs());
    ([n.partial(1, 0), n.partial(0, 1), m.partial(1, 0), m.partial(0, 1)], skew)
}

#[test]
fn c2_monge_chart_coefficients_match_closed_forms() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 6];
    for _ in 0..50 {
        let g = Monge::random(&mut rng);
        let s = g.surface();
        let jet = s.jet_at([0.0, 0.0]).unwrap();
        let fj = form_jets(&jet);

        // First fundamental form: 1 + O(2), O(2), 1 + O(2).
        let first = [lin(&fj.e), lin(&fj.f), lin(&fj.g)].concat();
        worst[0] = worst[0].max(max_diff(&first, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]));

        // Second forms relative to the graph normal frame.
        let p = partials(&jet);
        let (n1, n2) = normal_frame_jets(&jet).unwrap();
        for (i, n) in [n1, n2].iter().enumerate() {
            let got = [lin(&dot4(&p.auu, n)), lin(&dot4(&p.auv, n)), lin(&dot4(&p.avv, n))].concat();
            let want = [
                g.r[i], g.a[i], g.d[i], //
                g.s[i], g.d[i], g.b[i], //
                g.t[i], g.b[i], g.c[i],
            ];
            worst[0] = worst[0].max(max_diff(&got, &want));
        }

        // Mean curvature components.
        for (i, n) in [n1, n2].iter().enumerate() {
            let got = lin(&dot4(&fj.h, n));
            let want = [(g.t[i] + g.r[i]) / 2.0, (g.a[i] + g.b[i]) / 2.0, (g.c[i] + g.d[i]) / 2.0];
            worst[1] = worst[1].max(max_diff(&got, &want));
        }

        // Mean curvature vector in R⁴.
        let (r, sv, tv, a, b, c, d) = (g.r, g.s, g.t, g.a, g.b, g.c, g.d);
        let x = -(r[0] * tv[0] + r[0] * r[0] + r[1] * tv[1] + r[1] * r[1]) / 2.0;
        let y = -(sv[0] * tv[0] + sv[0] * r[0] + sv[1] * tv[1] + r[1] * sv[1]) / 2.0;
        let z = -(tv[0] * tv[0] + r[0] * tv[0] + tv[1] * tv[1] + r[1] * tv[1]) / 2.0;
        let want_h = [
            [0.0, x, y],
            [0.0, y, z],
            [(tv[0] + r[0]) / 2.0, (a[0] + b[0]) / 2.0, (c[0] + d[0]) / 2.0],
            [(tv[1] + r[1]) / 2.0, (a[1] + b[1]) / 2.0, (c[1] + d[1]) / 2.0],
        ];
        for k in 0..4 {
            worst[2] = worst[2].max(max_diff(&lin(&fj.h[k]), &want_h[k]));
        }

        // Normal singularity: t_i = −r_i.
        let mut gn = Monge { ..g };
        gn.t = [-gn.r[0], -gn.r[1]];
        let (got, skew) = machine_linear(&gn.surface());
        let (aa, cc) = ([gn.a[0] + gn.b[0], gn.a[1] + gn.b[1]], [gn.c[0] + gn.d[0], gn.c[1] + gn.d[1]]);
        let want = [
            0.5 * (gn.s[0] * aa[0] + gn.s[1] * aa[1]),
            0.5 * (gn.s[0] * cc[0] + gn.s[1] * cc[1]),
            -(gn.r[0] * aa[0] + gn.r[1] * aa[1]),
            -(gn.r[0] * cc[0] + gn.r[1] * cc[1]),
        ];
        worst[3] = worst[3].max(max_diff(&got, &want)).max(skew);

        // Umbilic singularity with the mean normal first: s₁ = 0, t₁ = r₁,
        // t₂ = −r₂.
        let mut gu = Monge { ..gn };
        gu.s[0] = 0.0;
        gu.t = [gu.r[0], -gu.r[1]];
        let (got, skew) = machine_linear(&gu.surface());
        let (r1, r2, s2) = (gu.r[0], gu.r[1], gu.s[1]);
        let (a1, b1, c1, d1) = (gu.a[0], gu.b[0], gu.c[0], gu.d[0]);
        let (a2, b2, c2, d2) = (gu.a[1], gu.b[1], gu.c[1], gu.d[1]);
        let want = [
            (2.0 * r1 * d1 + s2 * (a2 + b2)) / 2.0,
            (2.0 * r1 * b1 + s2 * (c2 + d2)) / 2.0,
            r1 * (b1 - a1) - r2 * (a2 + b2),
            r1 * (c1 - d1) - r2 * (c2 + d2),
        ];
        worst[4] = worst[4].max(max_diff(&got, &want)).max(skew);
        // Expanded umbilic transversality.
        let det = got[2] * got[1] - got[3] * got[0];
        let expanded = (b1 * (b1 - a1) + d1 * (d1 - c1)) * r1 * r1
            + (d1 * (c2 + d2) - b1 * (a2 + b2)) * r1 * r2
            + 0.5 * ((a2 + b2) * (d1 - c1) + (b1 - a1) * (c2 + d2)) * r1 * s2;
        worst[5] = worst[5].max((det - expanded).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst.iter().all(|w| *w < 1e-9) && secs < 10.0;
    report(
        2,
        "Monge-chart coefficient formulas on 50 random sets",
        pass,
        &format!(
            "max deviation: forms {:.1e}, H components {:.1e}, H vector {:.1e}, normal BDE {:.1e}, umbilic BDE {:.1e}, umbilic transversality {:.1e} (< 1e-9)",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
        secs,
        Some(10.0),
    );
}

// ---------------------------------------------------------------- 3

fn constructed(kind: Kind, t: DType) -> SurfaceDef {
    let (a, b, c) = constructed_target(t);
    catalog::graph_monge(&constructed_coeffs(kind, a, b, c), 0.5, None)
}

#[test]
fn c3_darbouxian_equilibria_and_separatrix_counts() {
    let t = Instant::now();
    let tol = Tolerances::default();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for kind in [Kind::Normal, Kind::Umbilic] {
        for dt in [DType::D1, DType::D2, DType::D3] {
            let s = constructed(kind, dt);
            let eqs = fiber_equilibria(&s, [0.0, 0.0], &tol).unwrap();
            let saddles = eqs.iter().filter(|e| e.class == EqClass::Saddle).count();
            let nodes = eqs.iter().filter(|e| e.class == EqClass::Node).count();
            let want = match dt {
                DType::D1 => (1, 0),
                DType::D2 => (2, 1),
                DType::D3 => (3, 0),
            };
            let mut count = [0usize; 2];
            for (j, e) in eqs.iter().enumerate().filter(|(_, e)| e.class == EqClass::Saddle) {
                for branch in [-1, 1] {
                    match trace_separatrix(&s, e, branch, &[[0.0, 0.0]], 0, j, &tol) {
                        Ok(tr) => count[tr.foliation as usize] += 1,
                        Err(err) => failures.push(format!("{kind:?} {dt:?}: {err}")),
                    }
                }
            }
            let n = dt.separatrices();
            if (saddles, nodes) != want || eqs.len() != want.0 + want.1 || count != [n, n] {
                failures.push(format!(
                    "{} {}: {saddles} saddles, {nodes} nodes, separatrices {count:?}",
                    kind.name(),
                    dt.name()
                ));
            }
            summary.push(format!("{} {} {}s+{}n/{}", kind.name(), dt.name(), saddles, nodes, count[0]));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = if failures.is_empty() {
        format!("all 6 surfaces as expected [{}]", summary.join(", "))
    } else {
        failures.join("; ")
    };
    report(3, "D1/D2/D3 fiber equilibria and separatrices", failures.is_empty() && secs < 60.0, &detail, secs, Some(60.0));
}

// ---------------------------------------------------------------- 4

fn random_rotation4(rng: &mut ChaCha8Rng) -> [[f64; 4]; 4] {
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

fn ellipsoid_umbilic_u(a: f64, b: f64, c: f64) -> f64 {
    ((b * b - a * a) / (c * c - a * a)).sqrt().acos()
}

#[test]
fn c4_classification_is_rotation_independent() {
    let t = Instant::now();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases: Vec<(String, SurfaceDef, [f64; 2], Kind)> = Vec::new();
    for kind in [Kind::Normal, Kind::Umbilic] {
        for dt in [DType::D1, DType::D2, DType::D3] {
            cases.push((format!("{} {}", kind.name(), dt.name()), constructed(kind, dt), [0.0, 0.0], kind));
        }
    }
    let u0 = ellipsoid_umbilic_u(1.0, 2.0, 3.0);
    cases.push(("lifted ellipsoid umbilic".into(), catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap(), [u0, 0.0], Kind::Umbilic));
    let local = Domain {
        u: Axis::new(-0.3, 0.3, false).unwrap(),
        v: Axis::new(-0.3, 0.3, false).unwrap(),
    };
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for (name, s, p, kind) in &cases {
        let base = analyze(s, *p, *kind, &tol);
        let want = (base.kind, base.dtype());
        if want.1.is_none() {
            mismatches.push(format!("{name}: unclassified"));
            continue;
        }
        for _ in 0..100 {
            let w: f64 = rng.gen_range(0.0..2.0 * PI);
            let m = [[w.cos(), -w.sin()], [w.sin(), w.cos()]];
            let r = s.affine_reparametrized(*p, m, local).unwrap();
            let got = analyze(&r, [0.0, 0.0], *kind, &tol);
            runs += 1;
            if (got.kind, got.dtype()) != want {
                mismatches.push(format!("{name}: angle {w:.4} gives {:?}", got.dtype()));
            }
        }
        for _ in 0..20 {
            let r = s.mapped(&random_rotation4(&mut rng)).unwrap();
            let got = analyze(&r, *p, *kind, &tol);
            runs += 1;
            if (got.kind, got.dtype()) != want {
                mismatches.push(format!("{name}: R4 rotation gives {:?}", got.dtype()));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = if mismatches.is_empty() {
        format!("{} singularities x (100 in-plane + 20 R4 rotations), {runs} classifications identical", cases.len())
    } else {
        mismatches.join("; ")
    };
    report(4, "classification under rotations", mismatches.is_empty() && secs < 120.0, &detail, secs, Some(120.0));
}

// ---------------------------------------------------------------- 5, 6

struct Case {
    name: &'static str,
    cycle: Cycle,
    /// Lifted from R³, so ln π′ vanishes by integrability.
    integrable: bool,
}

fn cycle_through(s: &SurfaceDef, seed: [f64; 2], fol: Foliation) -> Cycle {
    let tol = Tolerances::default();
    // Repelling cycles are found by tracing backward.
    let found = [1.0, -1.0].into_iter().find_map(|dir| detect_cycle(s, &trace_leaf(s, seed, fol, dir, &tol, &[]), &tol, &[]).ok());
    let mut c = found.unwrap_or_else(|| panic!("no cycle near {seed:?}"));
    compute_holonomy(s, &mut c, &tol);
    c
}

fn perturbed_twisted_band() -> SurfaceDef {
    let base = catalog::twisted_band(1.0, 1, 2.0, 0.3, 0.0, 0.3, 0.3).unwrap();
    let sin = |e: Expr| Expr::call(Func::Sin, vec![e]);
    let cos = |e: Expr| Expr::call(Func::Cos, vec![e]);
    let (u, v) = (Expr::u, Expr::v);
    let eps = Expr::num(0.02);
    base.perturbed(&[
        eps.clone() * sin(u()) * v() * v(),
        eps.clone() * cos(Expr::num(2.0) * u()) * v() * v(),
        eps.clone() * sin(u() + Expr::num(0.5)) * v() * v() * v(),
        eps * cos(u()) * v() * v(),
    ])
    .unwrap()
}

fn cases() -> Vec<Case> {
    let ell = catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap();
    let band = catalog::lifted_elliptic_band(1.0, 1.3, 2.5, 0.2, 0.3, 0.2).unwrap();
    vec![
        Case {
            name: "lifted ellipsoid minimal",
            cycle: cycle_through(&ell, [1.0, -0.9], Foliation::Minimal),
            integrable: true,
        },
        Case {
            name: "lifted ellipsoid minimal (2)",
            cycle: cycle_through(&ell, [3.0, 0.9], Foliation::Minimal),
            integrable: true,
        },
        Case {
            name: "lifted ellipsoid maximal",
            cycle: cycle_through(&ell, [1.0, 0.9], Foliation::Maximal),
            integrable: true,
        },
        Case {
            name: "lifted elliptic band",
            cycle: cycle_through(&band, [0.3, 0.0], Foliation::Minimal),
            integrable: false,
        },
        Case {
            name: "twisted band",
            cycle: cycle_through(&catalog::twisted_band(1.0, 1, 2.0, 0.3, 0.0, 0.3, 0.3).unwrap(), [0.3, 0.0], Foliation::Minimal),
            integrable: false,
        },
        Case {
            name: "perturbed twisted band",
            cycle: cycle_through(&perturbed_twisted_band(), [0.3, 0.0], Foliation::Minimal),
            integrable: false,
        },
    ]
}

#[test]
fn c5_holonomy_methods_agree() {
    let t = Instant::now();
    let cases = cases();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for c in &cases {
        let h = c.cycle.holonomy.as_ref().unwrap();
        let Some((num, _)) = h.numeric else {
            failures.push(format!("{}: return map failed", c.name));
            continue;
        };
        let mut vals = vec![num, h.frame];
        if c.cycle.foliation == Foliation::Minimal {
            match h.darboux {
                Some(v) => vals.push(v),
                None => failures.push(format!("{}: minimal-cycle formula unavailable", c.name)),
            }
        }
        let scale = num.abs().max(1.0);
        let spread = vals.iter().flat_map(|a| vals.iter().map(move |b| (a - b).abs())).fold(0.0, f64::max);
        if spread > 1e-3 * scale {
            failures.push(format!("{}: methods {vals:?} spread {spread:.2e}", c.name));
        }
        if c.integrable && vals.iter().any(|v| v.abs() >= 1e-4) {
            failures.push(format!("{}: ln pi' {vals:?} not < 1e-4", c.name));
        }
        summary.push(format!("{} ln pi' {num:.6} spread {spread:.1e}", c.name));
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = if failures.is_empty() { summary.join("; ") } else { failures.join("; ") };
    report(5, "holonomy by return map, frame integral and minimal-cycle formula", failures.is_empty() && secs < 300.0, &detail, secs, Some(300.0));
}

#[test]
fn c6_minimal_cycle_frame_identities() {
    let t = Instant::now();
    let cases = cases();
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 2];
    let mut min_gap = f64::INFINITY;
    let mut n = 0;
    for c in cases.iter().filter(|c| c.cycle.foliation == Foliation::Minimal) {
        n += 1;
        let id = c.cycle.identities();
        worst[0] = worst[0].max(id.max_tau_n);
        worst[1] = worst[1].max(id.max_kb_plus_kbar);
        min_gap = min_gap.min(id.min_gap);
        if id.max_tau_n.max(id.max_kb_plus_kbar) >= 1e-6 || !(id.min_gap > 0.0) {
            failures.push(format!("{}: {id:?}", c.name));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = if failures.is_empty() {
        format!("{n} minimal cycles: max |tau_N| {:.1e}, max |k_B + Kbar| {:.1e}, min (K - k) {min_gap:.4}", worst[0], worst[1])
    } else {
        failures.join("; ")
    };
    report(6, "minimal-cycle Darboux frame identities", failures.is_empty(), &detail, secs, None);
}

// ---------------------------------------------------------------- 7

#[test]
fn c7_deformation_derivative_closed_form() {
    let t = Instant::now();
    let tol = Tolerances::default();
    let (r, k0, k1, a, b, w) = (1.0, 2.0, 0.3, 0.0, 0.3, 0.3);
    let band = catalog::twisted_band(r, 1, k0, k1, a, b, w).unwrap();
    let c = cycle_through(&band, [0.3, 0.0], Foliation::Minimal);
    let tau2 = c.integrate(|f| f.tau * f.tau);
    let closed = perturbation_derivative(&c, &auto_delta(&c));
    let corrected = deformation_derivative(&c, &auto_delta(&c));
    // δ = −τ H̃₁ along the core circle, with τ = 1/R and 2H̃₁ = 1/R + K(u).
    let ln = |eps: f64| {
        let profile = format!("{b:?} + ({eps:?})*(-(1/R + K0 + K1*cos(u))/(2*R))");
        let s = catalog::twisted_band_profile(r, 1, k0, k1, a, &profile, w).unwrap();
        let tr = trace_leaf(&s, [0.3, 0.0], Foliation::Minimal, 1.0, &tol, &[]);
        let cy = detect_cycle(&s, &tr, &tol, &[]).unwrap();
        holonomy_numeric(&s, &cy, &tol, default_offset(&cy)).unwrap().0
    };
    let eps = 1e-4;
    let fd = (ln(eps) - ln(-eps)) / (2.0 * eps);
    let rel = (closed - fd).abs() / fd.abs();
    let mut lifted = 0.0f64;
    for case in cases().iter().filter(|c| c.integrable || c.name == "lifted elliptic band") {
        lifted = lifted.max(perturbation_derivative(&case.cycle, &auto_delta(&case.cycle)).abs());
    }
    let pass = tau2 > 0.0 && closed > 0.0 && rel <= 5e-2 && lifted < 1e-6;
    let secs = t.elapsed().as_secs_f64();
    report(
        7,
        "closed-form holonomy derivative under the torsion deformation",
        pass,
        &format!(
            "twisted band: integral of tau^2 {tau2:.6}, closed form {closed:.6}, finite difference (eps 1e-4) {fd:.6}, relative error {rel:.3} (<= 5e-2), ratio fd/closed {:.6}, corrected derivative {corrected:.6} (relative error {:.1e}); R3-lifted cycles: max |closed form| {lifted:.1e} (< 1e-6)",
            fd / closed,
            (corrected - fd).abs() / fd.abs()
        ),
        secs,
        None,
    );
}

// ---------------------------------------------------------------- 8

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
fn c8_perturbed_lifted_ellipsoid_keeps_its_umbilics() {
    let t = Instant::now();
    let tol = Tolerances::default();
    let base = catalog::lifted_ellipsoid(1.0, 2.0, 3.0).unwrap();
    let u0 = ellipsoid_umbilic_u(1.0, 2.0, 3.0);
    let want = [u0, PI - u0, PI + u0, 2.0 * PI - u0];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut shift = 0.0f64;
    for k in 0..10 {
        let extra: Vec<Expr> = (0..4).map(|_| bump(&mut rng, 1e-3)).collect();
        let s = base.perturbed(&extra).unwrap();
        let scan = find_singularities(&s, 64, &tol);
        let umb: Vec<_> = scan.singularities.iter().filter(|s| s.kind == Kind::Umbilic).collect();
        if umb.len() != 4 || scan.singularities.len() != 4 {
            failures.push(format!("perturbation {k}: {} singularities, {} umbilic", scan.singularities.len(), umb.len()));
            continue;
        }
        for u in &want {
            let near = umb.iter().min_by(|a, b| {
                let da = (a.location[0] - u).hypot(a.location[1]);
                let db = (b.location[0] - u).hypot(b.location[1]);
                da.total_cmp(&db)
            });
            let near = near.unwrap();
            shift = shift.max((near.location[0] - u).hypot(near.location[1]));
            if near.dtype() != Some(DType::D1) {
                failures.push(format!("perturbation {k}: umbilic near u={u:.3} is {:?}", near.dtype()));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = if failures.is_empty() {
        format!("10 perturbations of size 1e-3: 4 D1 umbilics each, max displacement {shift:.2e}")
    } else {
        failures.join("; ")
    };
    report(8, "openness under small perturbations", failures.is_empty(), &detail, secs, None);
}

// ---------------------------------------------------------------- 9

#[test]
fn c9_single_worker_classify_is_deterministic() {
    let t = Instant::now();
    let surface = "lifted_ellipsoid(1, 1.2, 1.5)";
    let mut cfg = RunConfig::new(SurfaceSource::from_arg(surface));
    cfg.workers = Some(1);
    let a = to_json(&execute(Command::Classify, &cfg).unwrap().report);
    let b = to_json(&execute(Command::Classify, &cfg).unwrap().report);
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_meanfol"))
            .args(["classify", "--surface", surface, "--workers", "1"])
            .output()
            .unwrap()
    };
    let (p, q) = (run(), run());
    let same = a == b && p.status.success() && p.stdout == q.stdout && p.stdout == a.as_bytes();
    let secs = t.elapsed().as_secs_f64();
    report(
        9,
        "single-worker classify reports",
        same,
        &format!("two in-process and two binary runs, {} bytes each, identical: {same}", a.len()),
        secs,
        None,
    );
}
