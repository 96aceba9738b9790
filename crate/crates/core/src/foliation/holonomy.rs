//! Darboux frames along cycles and the three holonomy computations.

use super::cycle::{refine_closure, sample_cycle, CycleError, ReturnMap};
use super::trace::{LeafTrace, Tracer};
use crate::config::Tolerances;
use crate::expr::SurfaceDef;
use crate::geometry::{self, Foliation};
use crate::jet::{self, dot4, Jet, JetVec4};
use crate::linalg::{self, composite_gauss, Vec4};
use crate::singularities::monge_adapt_frame;
use crate::Jet4;

/// Darboux frame data at one point of a principal line.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSample {
    /// Arc length from the cycle basepoint.
    pub s: f64,
    pub uv: [f64; 2],
    /// Quadrature weight.
    pub weight: f64,
    pub t: Vec4,
    pub big_t: Vec4,
    pub n: Vec4,
    pub b: Vec4,
    pub k_g: f64,
    pub k: f64,
    pub k_b: f64,
    pub tau_n: f64,
    pub tau: f64,
    pub tau_b: f64,
    /// `k′` and `τ′` along the line.
    pub dk: f64,
    pub dtau: f64,
    /// Normal curvatures of `T` along `N` and `B`.
    pub big_k: f64,
    pub big_k_bar: f64,
    /// Third-order `v` coefficients of the slice chart along `N` and `B`.
    pub a: f64,
    pub b_coef: f64,
    /// `⟨H, N⟩` and `⟨H, B⟩`.
    pub h1: f64,
    pub h2: f64,
    /// `⟨D_T H, B⟩`, the `v` derivative of the `B` component of `H`.
    pub h2_v: f64,
    /// Largest entry of `C + Cᵀ` for `C_ij = ⟨e_i′, e_j⟩`.
    pub skew_residual: f64,
    /// Integrand of the variational equation of the line field.
    pub variational: f64,
}

impl FrameSample {
    /// `(H̃₂)_v` from the frame functions and the slice coefficient `b`.
    pub fn h2_v_formula(&self) -> f64 {
        0.5 * (self.b_coef - 2.0 * self.k_g * self.big_k_bar - self.tau_n * self.tau_b - self.dtau)
    }
}

fn along(x: &JetVec4, d: &[Jet; 2]) -> JetVec4 {
    std::array::from_fn(|i| x[i].d_du() * d[0] + x[i].d_dv() * d[1])
}

fn second_form(p: &geometry::Partials, nu: &JetVec4, x: &[Jet; 2]) -> Jet {
    let (e, f, g) = (dot4(&p.auu, nu), dot4(&p.auv, nu), dot4(&p.avv, nu));
    e * x[0] * x[0] + f * x[0] * x[1] * 2.0 + g * x[1] * x[1]
}

/// Frame data at `uv` for the line of `fol` oriented along `hint`.
pub fn frame_at(jet: &Jet4, fol: Foliation, hint: [f64; 2], tol: &Tolerances) -> Result<FrameSample, String> {
    let dj = geometry::direction_jets(jet, fol, tol.tol_transv).ok_or("no principal direction")?;
    let (mut d, mut m) = (dj.d, dj.m);
    if d[0].value() * hint[0] + d[1].value() * hint[1] < 0.0 {
        d = [-d[0], -d[1]];
        m = [-m[0], -m[1]];
    }
    let p = geometry::partials(jet);
    let push = |x: &[Jet; 2]| -> JetVec4 { std::array::from_fn(|i| p.au[i] * x[0] + p.av[i] * x[1]) };
    let t = push(&d);
    let big_t = push(&m);
    let h = dj.forms.h;
    let h_norm = dot4(&h, &h).sqrt();
    if h_norm.value() <= tol.tol_h {
        return Err("mean curvature vanishes on the line".into());
    }
    let n: JetVec4 = h.map(|c| c * h_norm.recip());
    let b = jet::wedge3(&t, &big_t, &n);
    let frame = [t, big_t, n, b];
    let dframe = frame.map(|e| along(&e, &d));
    let c = |i: usize, j: usize| dot4(&dframe[i], &frame[j]);
    let mut skew: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            skew = skew.max((c(i, j) + c(j, i)).value().abs());
        }
    }
    let k = c(0, 2);
    let tau = -c(1, 3);
    let d0 = [d[0].value(), d[1].value()];
    let m0 = [m[0].value(), m[1].value()];

    // Slice chart: graph over the tangent plane in the frame (t, T, N, B).
    let rows = frame.map(|e| jet::values4(&e));
    let slice = monge_adapt_frame(jet, &rows).ok_or("slice chart is singular")?;
    let [_, _, big_k_s, _, _, a, _, _, _, big_k_bar_s, _, _, b_coef, _] = slice.coeffs;
    let big_k = second_form(&p, &n, &m).value();
    let big_k_bar = second_form(&p, &b, &m).value();
    debug_assert!((big_k - big_k_s).abs() <= 1e-6 * (1.0 + big_k.abs()));
    debug_assert!((big_k_bar - big_k_bar_s).abs() <= 1e-6 * (1.0 + big_k_bar.abs()));

    let h2_v = dot4(&along(&h, &m), &b).value();

    let [l, mm, nn] = dj.forms.bde();
    let q = l * (d0[1] * d0[1]) + mm * (d0[0] * d0[1]) + nn * (d0[0] * d0[0]);
    let dn_q = q.directional(m0).value();
    let n_prime = [m[0].directional(d0).value(), m[1].directional(d0).value()];
    let bilinear = |x: [f64; 2], y: [f64; 2]| {
        l.value() * x[1] * y[1] + 0.5 * mm.value() * (x[0] * y[1] + x[1] * y[0]) + nn.value() * x[0] * y[0]
    };
    let variational = -(dn_q + 2.0 * bilinear(d0, n_prime)) / (2.0 * bilinear(d0, m0));

    let hv = jet::values4(&h);
    Ok(FrameSample {
        s: 0.0,
        uv: jet.base,
        weight: 0.0,
        t: rows[0],
        big_t: rows[1],
        n: rows[2],
        b: rows[3],
        k_g: c(0, 1).value(),
        k: k.value(),
        k_b: c(0, 3).value(),
        tau_n: -c(1, 2).value(),
        tau: tau.value(),
        tau_b: c(2, 3).value(),
        dk: k.directional(d0).value(),
        dtau: tau.directional(d0).value(),
        big_k,
        big_k_bar,
        a,
        b_coef,
        h1: linalg::dot(&hv, &rows[2]),
        h2: linalg::dot(&hv, &rows[3]),
        h2_v,
        skew_residual: skew,
        variational,
    })
}

/// `ln π′(0)` by the three methods.
#[derive(Clone, Debug, PartialEq)]
pub struct Holonomy {
    /// Richardson-extrapolated return-map derivative and its error estimate.
    pub numeric: Option<(f64, f64)>,
    /// Integral of the variational equation.
    pub frame: f64,
    /// Same integral on the doubled quadrature rule.
    pub frame_doubled: f64,
    /// Darboux-frame integral (minimal cycles only), signs as derived from
    /// the variational equation.
    pub darboux: Option<f64>,
    /// Darboux-frame integral with the alternative signs of the second and
    /// third terms.
    pub darboux_alt: Option<f64>,
    pub hyperbolic: bool,
    /// The doubled rule agrees with the base rule to 1e-8.
    pub quadrature_ok: bool,
}

/// Identities that hold along every principal mean cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleIdentities {
    pub max_tau_n: f64,
    pub max_kb_plus_kbar: f64,
    pub min_gap: f64,
    pub max_h2: f64,
    pub max_skew: f64,
}

/// A closed principal mean line.
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    pub foliation: Foliation,
    /// Point of the section where the leaf closes.
    pub basepoint: [f64; 2],
    pub section_base: [f64; 2],
    pub section_reference: [f64; 2],
    pub sigma: f64,
    pub length: f64,
    pub gap: f64,
    pub samples: Vec<FrameSample>,
    pub doubled: Vec<FrameSample>,
    pub holonomy: Option<Holonomy>,
}

impl Cycle {
    pub fn identities(&self) -> CycleIdentities {
        let mut id = CycleIdentities {
            max_tau_n: 0.0,
            max_kb_plus_kbar: 0.0,
            min_gap: f64::INFINITY,
            max_h2: 0.0,
            max_skew: 0.0,
        };
        for f in &self.samples {
            id.max_tau_n = id.max_tau_n.max(f.tau_n.abs());
            id.max_kb_plus_kbar = id.max_kb_plus_kbar.max((f.k_b + f.big_k_bar).abs());
            let gap = match self.foliation {
                Foliation::Minimal => f.big_k - f.k,
                Foliation::Maximal => f.k - f.big_k,
            };
            id.min_gap = id.min_gap.min(gap);
            id.max_h2 = id.max_h2.max(f.h2.abs());
            id.max_skew = id.max_skew.max(f.skew_residual);
        }
        id
    }

    pub fn integrate(&self, f: impl Fn(&FrameSample) -> f64) -> f64 {
        self.samples.iter().map(|x| x.weight * f(x)).sum()
    }

    pub fn return_map<'a>(&self, tracer: Tracer<'a>) -> Result<ReturnMap<'a>, CycleError> {
        ReturnMap::new(tracer.precise(), self.foliation, self.section_base, self.section_reference, self.length)
    }
}

fn frames_on_rule(map: &ReturnMap<'_>, start: [f64; 2], length: f64, n: usize, tol: &Tolerances) -> Result<Vec<FrameSample>, CycleError> {
    let per = 8;
    let panels = (n / per).max(1);
    let (nodes, weights) = composite_gauss(0.0, length, panels, per);
    let pts = sample_cycle(map, start, &nodes)?;
    pts.iter()
        .zip(&weights)
        .map(|(pt, w)| {
            let jet = map.tracer.surface.jet_at(pt.uv).map_err(|e| CycleError::Sampling(e.to_string()))?;
            let mut f = frame_at(&jet, map.foliation, pt.tangent, tol).map_err(CycleError::Sampling)?;
            f.s = pt.s;
            f.uv = pt.uv;
            f.weight = *w;
            Ok(f)
        })
        .collect()
}

/// Refines a closure candidate into a cycle and samples its Darboux frame at
/// the quadrature nodes.
pub fn detect_cycle(surface: &SurfaceDef, trace: &LeafTrace, tol: &Tolerances, singular: &[[f64; 2]]) -> Result<Cycle, CycleError> {
    let tracer = Tracer::new(surface, tol, singular);
    let (map, sigma, length, gap) = refine_closure(&tracer, trace)?;
    cycle_from_map(&map, sigma, length, gap, tol)
}

/// Cycle through the section point `σ` of a return map, known to close.
pub fn cycle_from_map(map: &ReturnMap<'_>, sigma: f64, length: f64, gap: f64, tol: &Tolerances) -> Result<Cycle, CycleError> {
    let start = map.point(sigma);
    let samples = frames_on_rule(map, start, length, tol.n_quad, tol)?;
    let doubled = frames_on_rule(map, start, length, 2 * tol.n_quad, tol)?;
    Ok(Cycle {
        foliation: map.foliation,
        basepoint: start,
        section_base: map.base,
        section_reference: map.tangent,
        sigma,
        length,
        gap,
        samples,
        doubled,
        holonomy: None,
    })
}

/// `ln π′(0)` from the return map, by Richardson-extrapolated central
/// differences at section offsets `h`, `h/2` and `h/4`.
pub fn holonomy_numeric(surface: &SurfaceDef, cycle: &Cycle, tol: &Tolerances, h: f64) -> Result<(f64, f64), CycleError> {
    let tracer = Tracer::new(surface, tol, &[]);
    let map = cycle.return_map(tracer)?;
    map.log_derivative(cycle.sigma, h)
}

/// Default section offset for [`holonomy_numeric`].
pub fn default_offset(cycle: &Cycle) -> f64 {
    1e-3 * cycle.length
}

/// `ln π′(0)` as the integral of the variational equation of the line field
/// along the cycle.
pub fn holonomy_frame(cycle: &Cycle) -> f64 {
    cycle.integrate(|f| f.variational)
}

fn frame_doubled(cycle: &Cycle) -> f64 {
    cycle.doubled.iter().map(|f| f.weight * f.variational).sum()
}

/// The three Darboux-frame integrals `(∫k′/(K−k), ∫k_Bτ_B/(K−k),
/// ∫(H̃₂)_v τ/(H̃₁(K−k)))`, with `(H̃₂)_v` from the frame functions and the
/// slice coefficient `b`.
pub fn darboux_terms(cycle: &Cycle) -> Option<[f64; 3]> {
    if cycle.foliation != Foliation::Minimal {
        return None;
    }
    if cycle.samples.iter().any(|f| f.big_k - f.k <= 0.0) {
        return None;
    }
    Some([
        cycle.integrate(|f| f.dk / (f.big_k - f.k)),
        cycle.integrate(|f| f.k_b * f.tau_b / (f.big_k - f.k)),
        cycle.integrate(|f| f.h2_v_formula() * f.tau / (f.h1 * (f.big_k - f.k))),
    ])
}

/// `ln π′(0) = −∫k′/(K−k) − ∫k_Bτ_B/(K−k) + ∫(H̃₂)_v τ/(H̃₁(K−k))` on a
/// minimal cycle.
pub fn holonomy_darboux(cycle: &Cycle) -> Option<f64> {
    darboux_terms(cycle).map(|[a, b, c]| -a - b + c)
}

/// The same three integrals combined as `−∫k′/(K−k) + ∫k_Bτ_B/(K−k) −
/// ∫(H̃₂)_v τ/(H̃₁(K−k))`.
pub fn holonomy_darboux_alt(cycle: &Cycle) -> Option<f64> {
    darboux_terms(cycle).map(|[a, b, c]| -a + b - c)
}

/// Fills in all holonomy values.
pub fn compute_holonomy(surface: &SurfaceDef, cycle: &mut Cycle, tol: &Tolerances) {
    let numeric = holonomy_numeric(surface, cycle, tol, default_offset(cycle)).ok();
    let frame = holonomy_frame(cycle);
    let value = numeric.map(|n| n.0).unwrap_or(frame);
    let doubled = frame_doubled(cycle);
    cycle.holonomy = Some(Holonomy {
        numeric,
        frame,
        frame_doubled: doubled,
        quadrature_ok: (frame - doubled).abs() <= 1e-8 * frame.abs().max(1.0),
        darboux: holonomy_darboux(cycle),
        darboux_alt: holonomy_darboux_alt(cycle),
        hyperbolic: value.abs() > tol.tol_hyp,
    });
}

/// `−∮ τ δ / (H̃₁ (K − k)) du` for a deformation profile `δ` sampled at the
/// quadrature nodes.
pub fn perturbation_derivative(cycle: &Cycle, delta: &[f64]) -> f64 {
    -cycle
        .samples
        .iter()
        .zip(delta)
        .map(|(f, d)| f.weight * f.tau * d / (f.h1 * (f.big_k - f.k)))
        .sum::<f64>()
}

/// Derivative of `ln π′(0)` under the deformation `α + ε δ v³/6 B` of the
/// slice chart, `½ ∮ τ δ / (H̃₁ (K − k)) du`: the `B` coefficient `b` moves
/// by `εδ` and `(H̃₂)_v` by `εδ/2`.
pub fn deformation_derivative(cycle: &Cycle, delta: &[f64]) -> f64 {
    -0.5 * perturbation_derivative(cycle, delta)
}

/// The profile `δ = −τ H̃₁`, for which the derivative is `∮ τ²/(K − k)`.
pub fn auto_delta(cycle: &Cycle) -> Vec<f64> {
    cycle.samples.iter().map(|f| -f.tau * f.h1).collect()
}
