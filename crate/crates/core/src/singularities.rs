//! Normal and umbilic singularities: location, Monge adaptation and
//! Darbouxian classification.

use rayon::prelude::*;

use crate::config::Tolerances;
use crate::expr::{Jet4, SurfaceDef};
use crate::geometry::{self, form_jets};
use crate::jet::{self, Jet, JetVec4};
use crate::linalg::{self, Mat4, Vec4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `H = 0`.
    Normal,
    /// `k = K` with `H ≠ 0`.
    Umbilic,
    /// `H = 0` and the whole second fundamental form vanishes.
    Degenerate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Normal => "normal",
            Kind::Umbilic => "umbilic",
            Kind::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DType {
    D1,
    D2,
    D3,
}

impl DType {
    pub fn name(self) -> &'static str {
        match self {
            DType::D1 => "D1",
            DType::D2 => "D2",
            DType::D3 => "D3",
        }
    }

    /// Number of separatrices per foliation.
    pub fn separatrices(self) -> usize {
        match self {
            DType::D1 => 1,
            DType::D2 => 2,
            DType::D3 => 3,
        }
    }
}

/// The fourteen Monge coefficients in the order `r s t a b c d` for `h₁`
/// then `h₂`, together with the adapted frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MongeData {
    pub coeffs: [f64; 14],
    /// Rows: the two tangent axes, then the two normal axes, in R⁴.
    pub frame: Mat4,
    /// The Monge graph `(x, y, h₁, h₂)` as jets in the adapted coordinates.
    pub graph: JetVec4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coeffs {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MongeData {
    /// Coefficients of `h₁` (`i = 0`) or `h₂` (`i = 1`).
    pub fn h(&self, i: usize) -> Coeffs {
        let k = &self.coeffs[7 * i..7 * i + 7];
        Coeffs {
            r: k[0],
            s: k[1],
            t: k[2],
            a: k[3],
            b: k[4],
            c: k[5],
            d: k[6],
        }
    }

    /// Residuals `(r₁ + t₁, r₂ + t₂)` that vanish at a normal singularity.
    pub fn normal_residual(&self) -> [f64; 2] {
        let (h1, h2) = (self.h(0), self.h(1));
        [h1.r + h1.t, h2.r + h2.t]
    }

    /// Residuals `(t₁² + t₂² − r₁² − r₂², s₁(t₁ + r₁) + s₂(t₂ + r₂))` that
    /// vanish at an umbilic singularity.
    pub fn umbilic_residual(&self) -> [f64; 2] {
        let (h1, h2) = (self.h(0), self.h(1));
        [
            h1.t * h1.t + h2.t * h2.t - h1.r * h1.r - h2.r * h2.r,
            h1.s * (h1.t + h1.r) + h2.s * (h2.t + h2.r),
        ]
    }

    /// Linear coefficients `(d, b, a, c)` of the BDE at a normal singularity:
    /// `−(du + bv) dv² + (au + cv) du dv + (du + bv) du² = 0`.
    pub fn normal_linear(&self) -> [f64; 4] {
        let (h1, h2) = (self.h(0), self.h(1));
        let (a1, c1) = (h1.a + h1.b, h1.c + h1.d);
        let (a2, c2) = (h2.a + h2.b, h2.c + h2.d);
        [
            0.5 * (h1.s * a1 + h2.s * a2),
            0.5 * (h1.s * c1 + h2.s * c2),
            -(h1.r * a1 + h2.r * a2),
            -(h1.r * c1 + h2.r * c2),
        ]
    }

    /// Same at an umbilic singularity, for a frame whose first normal is the
    /// unit mean normal (so `s₁ = 0`, `t₁ = r₁`, `t₂ = −r₂`).
    pub fn umbilic_linear(&self) -> [f64; 4] {
        let (h1, h2) = (self.h(0), self.h(1));
        let (a2, c2) = (h2.a + h2.b, h2.c + h2.d);
        [
            h1.r * h1.d + 0.5 * h2.s * a2,
            h1.r * h1.b + 0.5 * h2.s * c2,
            h1.r * (h1.b - h1.a) - h2.r * a2,
            h1.r * (h1.c - h1.d) - h2.r * c2,
        ]
    }

    /// Linear coefficients read off the BDE of the Monge graph itself.
    pub fn jet_linear(&self) -> [f64; 4] {
        let j = Jet4 {
            base: [0.0, 0.0],
            comps: self.graph,
        };
        let [_, m, n] = form_jets(&j.truncated(3)).bde();
        [n.partial(1, 0), n.partial(0, 1), m.partial(1, 0), m.partial(0, 1)]
    }
}

fn frame_rows(e1: Vec4, e2: Vec4, n1: Vec4, n2: Vec4) -> Mat4 {
    [e1, e2, n1, n2]
}

/// Inverts a planar jet map `(x, y) = (f(u, v), g(u, v))` with zero constant
/// terms: returns `(u, v)` as jets in `(x, y)`.
pub fn invert_planar(f: &Jet, g: &Jet) -> Option<(Jet, Jet)> {
    let order = f.order().min(g.order());
    let (a, b, c, d) = (f.coeff(1, 0), f.coeff(0, 1), g.coeff(1, 0), g.coeff(0, 1));
    let det = a * d - b * c;
    if det.abs() < 1e-14 * (a.abs() + b.abs() + c.abs() + d.abs()).powi(2) {
        return None;
    }
    let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
    let x = Jet::var_u(0.0).truncate(order);
    let y = Jet::var_v(0.0).truncate(order);
    let lin = |j: &Jet| j.coeff(1, 0) * Jet::var_u(0.0) + j.coeff(0, 1) * Jet::var_v(0.0);
    let (fn_, gn) = (*f - lin(f), *g - lin(g));
    let mut u = x * ia + y * ib;
    let mut v = x * ic + y * id;
    for _ in 0..order {
        let rf = x - fn_.compose(&u, &v);
        let rg = y - gn.compose(&u, &v);
        u = rf * ia + rg * ib;
        v = rf * ic + rg * id;
    }
    Some((u.truncate(order), v.truncate(order)))
}

/// Reads Monge coefficients in a given orthonormal frame whose first two rows
/// span the tangent plane at the jet's base point.
pub fn monge_adapt_frame(jet: &Jet4, frame: &Mat4) -> Option<MongeData> {
    let p0 = jet.point();
    let shifted: JetVec4 = std::array::from_fn(|i| jet.comps[i] - p0[i]);
    let beta: JetVec4 = std::array::from_fn(|r| {
        (0..4).fold(Jet::constant(0.0), |acc, k| acc + shifted[k] * frame[r][k])
    });
    let (u, v) = invert_planar(&beta[0], &beta[1])?;
    let h1 = beta[2].compose(&u, &v);
    let h2 = beta[3].compose(&u, &v);
    let mut coeffs = [0.0; 14];
    for (i, h) in [h1, h2].iter().enumerate() {
        let k = &mut coeffs[7 * i..7 * i + 7];
        k[0] = 2.0 * h.coeff(2, 0);
        k[1] = h.coeff(1, 1);
        k[2] = 2.0 * h.coeff(0, 2);
        k[3] = 6.0 * h.coeff(3, 0);
        k[4] = 2.0 * h.coeff(1, 2);
        k[5] = 6.0 * h.coeff(0, 3);
        k[6] = 2.0 * h.coeff(2, 1);
    }
    let order = h1.order();
    let graph = [
        Jet::var_u(0.0).truncate(order),
        Jet::var_v(0.0).truncate(order),
        h1,
        h2,
    ];
    Some(MongeData {
        coeffs,
        frame: *frame,
        graph,
    })
}

/// Orthonormal tangent pair from `α_u`, `α_v` by Gram–Schmidt.
fn tangent_pair(jet: &Jet4) -> (Vec4, Vec4) {
    let au = jet.partial(1, 0);
    let av = jet.partial(0, 1);
    let e1 = linalg::normalize(&au);
    let e2 = linalg::normalize(&linalg::sub(&av, &linalg::scale(&e1, linalg::dot(&av, &e1))));
    (e1, e2)
}

/// Monge adaptation with the standard normal frame (normal singularities) or,
/// when `mean_normal` is set, with `N₁ = H/|H|` (umbilic singularities).
/// `angle` rotates the tangent pair before adapting.
pub fn monge_adapt(jet: &Jet4, mean_normal: bool, angle: f64) -> Option<MongeData> {
    let (t1, t2) = tangent_pair(jet);
    let (c, s) = (angle.cos(), angle.sin());
    let e1 = linalg::add(&linalg::scale(&t1, c), &linalg::scale(&t2, s));
    let e2 = linalg::add(&linalg::scale(&t1, -s), &linalg::scale(&t2, c));
    let (n1, n2) = if mean_normal {
        let h = jet::values4(&form_jets(&jet.truncated(2)).h);
        let hn = linalg::norm(&h);
        if !(hn > 0.0) {
            return None;
        }
        let n1 = linalg::scale(&h, 1.0 / hn);
        (n1, linalg::wedge3(&e1, &e2, &n1))
    } else {
        geometry::normal_frame(jet).ok()?
    };
    monge_adapt_frame(jet, &frame_rows(e1, e2, n1, n2))
}

/// Linear BDE coefficients after the rotation `u = cos ω u₁ + sin ω v₁`,
/// `v = −sin ω u₁ + cos ω v₁`. Input and output are `(d, b, a, c)`.
pub fn rotate_linear(k: [f64; 4], omega: f64) -> [f64; 4] {
    let [d, b, a, c] = k;
    let (co, si) = (omega.cos(), omega.sin());
    // Trace-free form [[n, m/2], [m/2, −n]] with n = du + bv, m = au + cv.
    let rotated = |x1: [f64; 2]| {
        let u = co * x1[0] + si * x1[1];
        let v = -si * x1[0] + co * x1[1];
        let n = d * u + b * v;
        let m = a * u + c * v;
        let r0 = [co, -si];
        let r1 = [si, co];
        let q = |x: [f64; 2], y: [f64; 2]| {
            n * x[0] * y[0] + 0.5 * m * (x[0] * y[1] + x[1] * y[0]) - n * x[1] * y[1]
        };
        (q(r0, r0), 2.0 * q(r0, r1))
    };
    let (n_u, m_u) = rotated([1.0, 0.0]);
    let (n_v, m_v) = rotated([0.0, 1.0]);
    [n_u, n_v, m_u, m_v]
}

/// Rotation killing the `d` coefficient: the root `tan ω` of
/// `b t³ + (c − d) t² − (a + b) t + d` with the smallest `|ω|` (or `ω = π/2`
/// when `b` vanishes and that is smaller). Returns `(ω, rotated)`.
pub fn rotate_kill_d(k: [f64; 4]) -> Option<(f64, [f64; 4])> {
    let [d, b, a, c] = k;
    let scale = k.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut candidates: Vec<f64> = linalg::real_roots_cubic(b, c - d, -(a + b), d)
        .into_iter()
        .map(f64::atan)
        .collect();
    if b.abs() <= 1e-12 * scale {
        candidates.push(std::f64::consts::FRAC_PI_2);
    }
    let mut best: Option<(f64, [f64; 4])> = None;
    for w in candidates {
        let r = rotate_linear(k, w);
        let better = match &best {
            None => true,
            Some((bw, br)) => {
                // Prefer a genuinely better residual, then the smaller angle.
                r[0].abs() < 0.5 * br[0].abs() || (r[0].abs() <= 2.0 * br[0].abs() && w.abs() < bw.abs())
            }
        };
        if better {
            best = Some((w, r));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    /// `(d, b, a, c)` before rotation.
    pub linear: [f64; 4],
    pub omega: f64,
    /// `(d₁, b₁, a₁, c₁)` after rotation.
    pub rotated: [f64; 4],
    /// `ab − cd`, invariant under the rotation.
    pub transversality: f64,
    /// `c₁² + 4b₁(a₁ + b₁)`.
    pub discriminant: f64,
    /// `a₁ / b₁`.
    pub ratio: f64,
    pub dtype: Option<DType>,
    /// Why the singularity is not Darbouxian.
    pub reason: Option<String>,
}

/// Darbouxian trichotomy on linear coefficients `(d, b, a, c)`.
pub fn classify_linear(k: [f64; 4], tol: &Tolerances) -> Classification {
    let [d, b, a, c] = k;
    let scale = k.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let transversality = a * b - c * d;
    let mut out = Classification {
        linear: k,
        omega: 0.0,
        rotated: k,
        transversality,
        discriminant: f64::NAN,
        ratio: f64::NAN,
        dtype: None,
        reason: None,
    };
    if scale == 0.0 || transversality.abs() <= tol.tol_transv * scale * scale {
        out.reason = Some(format!("transversality fails: ab - cd = {transversality:e}"));
        return out;
    }
    let Some((omega, r)) = rotate_kill_d(k) else {
        out.reason = Some("all linear coefficients vanish".into());
        return out;
    };
    out.omega = omega;
    out.rotated = r;
    let [d1, b1, a1, c1] = r;
    if d1.abs() > tol.tol_rot * scale.max(1.0) {
        out.reason = Some(format!("rotation left d = {d1:e}"));
        return out;
    }
    let disc = c1 * c1 + 4.0 * b1 * (a1 + b1);
    let ratio = a1 / b1;
    out.discriminant = disc;
    out.ratio = ratio;
    let band = tol.tol_transv.sqrt();
    let s2 = scale * scale;
    if disc.abs() <= band * s2 {
        out.reason = Some(format!("near boundary: c^2 + 4b(a + b) = {disc:e}"));
    } else if ratio.abs() <= band || (ratio + 1.0).abs() <= band {
        out.reason = Some(format!("near boundary: a/b = {ratio}"));
    } else if disc < 0.0 {
        out.dtype = Some(DType::D1);
    } else if ratio > 0.0 {
        out.dtype = Some(DType::D3);
    } else {
        out.dtype = Some(DType::D2);
    }
    out
}

pub fn classify_normal(m: &MongeData, tol: &Tolerances) -> Classification {
    classify_linear(m.normal_linear(), tol)
}

pub fn classify_umbilic(m: &MongeData, tol: &Tolerances) -> Classification {
    classify_linear(m.umbilic_linear(), tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Singularity {
    pub location: [f64; 2],
    pub kind: Kind,
    /// `|H|` at the point.
    pub h_norm: f64,
    /// Residual of the defining equations at the point.
    pub residual: f64,
    pub monge: Option<MongeData>,
    pub classification: Option<Classification>,
}

impl Singularity {
    pub fn dtype(&self) -> Option<DType> {
        self.classification.as_ref().and_then(|c| c.dtype)
    }
}

/// Monge adaptation plus classification of a located singularity.
pub fn analyze(surface: &SurfaceDef, location: [f64; 2], kind: Kind, tol: &Tolerances) -> Singularity {
    let mut s = Singularity {
        location,
        kind,
        h_norm: f64::NAN,
        residual: f64::NAN,
        monge: None,
        classification: None,
    };
    let Ok(jet) = surface.jet_at(location) else {
        return s;
    };
    s.h_norm = linalg::norm(&jet::values4(&form_jets(&jet.truncated(2)).h));
    s.residual = match kind {
        Kind::Umbilic => umbilic_residual(&jet).0.iter().map(|x| x.abs()).fold(0.0, f64::max),
        _ => s.h_norm,
    };
    if kind == Kind::Degenerate {
        return s;
    }
    s.monge = monge_adapt(&jet, kind == Kind::Umbilic, 0.0);
    s.classification = s.monge.as_ref().map(|m| match kind {
        Kind::Umbilic => classify_umbilic(m, tol),
        _ => classify_normal(m, tol),
    });
    s
}

/// Relative umbilic residual `(e_H G − g_H E, f_H G − g_H F) / scale` and its
/// Jacobian.
fn umbilic_residual(jet: &Jet4) -> ([f64; 2], [[f64; 2]; 2]) {
    let fj = form_jets(&jet.truncated(3));
    let r1 = fj.eh * fj.g - fj.gh * fj.e;
    let r2 = fj.fh * fj.g - fj.gh * fj.f;
    let scale = (fj.eh.value().abs() + fj.fh.value().abs() + fj.gh.value().abs()) * (fj.e.value() + fj.g.value());
    let scale = if scale > 0.0 { scale } else { 1.0 };
    (
        [r1.value() / scale, r2.value() / scale],
        [
            [r1.partial(1, 0) / scale, r1.partial(0, 1) / scale],
            [r2.partial(1, 0) / scale, r2.partial(0, 1) / scale],
        ],
    )
}

/// `H` in R⁴ and its two partials.
fn h_residual(jet: &Jet4) -> (Vec4, [Vec4; 2]) {
    let h = form_jets(&jet.truncated(3)).h;
    (
        jet::values4(&h),
        [h.map(|c| c.partial(1, 0)), h.map(|c| c.partial(0, 1))],
    )
}

/// Damped Gauss–Newton on a residual of any length.
fn newton(
    surface: &SurfaceDef,
    start: [f64; 2],
    residual: &dyn Fn(&Jet4) -> (Vec<f64>, Vec<[f64; 2]>),
    tol: f64,
) -> Option<[f64; 2]> {
    let dom = surface.domain();
    let mut x = dom.wrap(start)?;
    let eval = |p: [f64; 2]| -> Option<(Vec<f64>, Vec<[f64; 2]>)> {
        let j = surface.jet_at_order(p, 3).ok()?;
        Some(residual(&j))
    };
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (mut r, mut jac) = eval(x)?;
    for _ in 0..60 {
        let rn = norm(&r);
        if rn <= tol {
            return Some(x);
        }
        // Normal equations of the 2-column least-squares problem.
        let mut ata = [[0.0; 2]; 2];
        let mut atb = [0.0; 2];
        for (ri, ji) in r.iter().zip(&jac) {
            for a in 0..2 {
                atb[a] -= ji[a] * ri;
                for b in 0..2 {
                    ata[a][b] += ji[a] * ji[b];
                }
            }
        }
        let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
        if !(det.abs() > 1e-300) {
            return None;
        }
        let step = [
            (ata[1][1] * atb[0] - ata[0][1] * atb[1]) / det,
            (ata[0][0] * atb[1] - ata[1][0] * atb[0]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if let Some(t) = dom.wrap(trial) {
                if let Some((rt, jt)) = eval(t) {
                    if norm(&rt) < rn || lambda < 1e-3 && norm(&rt) <= rn * (1.0 + 1e-12) {
                        let moved = lambda * step[0].hypot(step[1]);
                        x = t;
                        r = rt;
                        jac = jt;
                        if moved < 1e-15 * dom.diameter() {
                            return (norm(&r) <= tol.sqrt()).then_some(x);
                        }
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return (norm(&r) <= tol).then_some(x);
            }
        }
    }
    (norm(&r) <= tol).then_some(x)
}

fn newton_normal(surface: &SurfaceDef, start: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let f = |j: &Jet4| {
        let (h, dh) = h_residual(j);
        (h.to_vec(), (0..4).map(|i| [dh[0][i], dh[1][i]]).collect())
    };
    newton(surface, start, &f, tol)
}

fn newton_umbilic(surface: &SurfaceDef, start: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let f = |j: &Jet4| {
        let (r, jac) = umbilic_residual(j);
        (r.to_vec(), jac.to_vec())
    };
    newton(surface, start, &f, tol)
}

/// Root of the bilinear interpolant of two fields given at the corners
/// `(0,0), (1,0), (0,1), (1,1)` of the unit square, if one lies inside.
fn bilinear_root(c: &[[f64; 2]; 4]) -> Option<[f64; 2]> {
    for k in 0..2 {
        let v = [c[0][k], c[1][k], c[2][k], c[3][k]];
        if v.iter().all(|x| *x > 0.0) || v.iter().all(|x| *x < 0.0) {
            return None;
        }
    }
    let eval = |s: f64, t: f64| -> ([f64; 2], [[f64; 2]; 2]) {
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
        let ws = [-(1.0 - t), 1.0 - t, -t, t];
        let wt = [-(1.0 - s), -s, 1.0 - s, s];
        let mut f = [0.0; 2];
        let mut j = [[0.0; 2]; 2];
        for k in 0..2 {
            for q in 0..4 {
                f[k] += w[q] * c[q][k];
                j[k][0] += ws[q] * c[q][k];
                j[k][1] += wt[q] * c[q][k];
            }
        }
        (f, j)
    };
    for start in [[0.5, 0.5], [0.2, 0.2], [0.8, 0.2], [0.2, 0.8], [0.8, 0.8]] {
        let [mut s, mut t] = start;
        for _ in 0..30 {
            let (f, j) = eval(s, t);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 {
                break;
            }
            let ds = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
            let dt = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
            s -= ds;
            t -= dt;
            if !(s.abs() < 10.0 && t.abs() < 10.0) {
                break;
            }
            if ds.abs() + dt.abs() < 1e-12 {
                if (-1e-9..=1.0 + 1e-9).contains(&s) && (-1e-9..=1.0 + 1e-9).contains(&t) {
                    return Some([s, t]);
                }
                break;
            }
        }
    }
    None
}

/// Outcome of a singularity search.
#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    pub singularities: Vec<Singularity>,
    /// Centers of cells whose residual changed sign but where Newton failed.
    pub suspects: Vec<[f64; 2]>,
    /// Every sampled point is singular (for instance a plane or a round
    /// sphere): there is nothing to classify.
    pub globally_degenerate: bool,
}

/// Grid search for singularities on an `n × n` grid of cells, refined by
/// Newton, deduplicated and classified.
pub fn find_singularities(surface: &SurfaceDef, n: usize, tol: &Tolerances) -> Scan {
    let n = n.max(16);
    let dom = *surface.domain();
    let node = |i: usize, j: usize| {
        [
            dom.u.lo + dom.u.len() * i as f64 / n as f64,
            dom.v.lo + dom.v.len() * j as f64 / n as f64,
        ]
    };
    // Residual samples at nodes: H in the seeded frame and the umbilic pair.
    struct Sample {
        h: [f64; 2],
        um: [f64; 2],
        h_rel: f64,
    }
    let sample = |p: [f64; 2]| -> Option<Sample> {
        let j = surface.jet_at_order(p, 3).ok()?;
        let g = geometry::mean_curvature(&j, tol.tol_h).ok()?;
        let (um, _) = umbilic_residual(&j);
        Some(Sample {
            h: [g.h1, g.h2],
            um,
            h_rel: g.h_norm,
        })
    };
    let nodes: Vec<Option<Sample>> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| (0..=n).map(move |j| (i, j)).collect::<Vec<_>>())
        .map(|(i, j)| sample(node(i, j)))
        .collect();
    let at = |i: usize, j: usize| nodes[i * (n + 1) + j].as_ref();

    let valid: Vec<&Sample> = nodes.iter().flatten().collect();
    let all_normal = !valid.is_empty() && valid.iter().all(|s| s.h_rel <= tol.tol_h);
    let all_umbilic = !valid.is_empty() && valid.iter().all(|s| s.um[0].hypot(s.um[1]) <= tol.tol_sing);
    if all_normal || all_umbilic {
        return Scan {
            singularities: Vec::new(),
            suspects: Vec::new(),
            globally_degenerate: true,
        };
    }

    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let cell_starts: Vec<(Option<[f64; 2]>, Option<[f64; 2]>)> = cells
        .iter()
        .map(|&(i, j)| {
            let corners: Vec<&Sample> = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                .iter()
                .filter_map(|&(a, b)| at(a, b))
                .collect();
            if corners.len() < 4 {
                return (None, None);
            }
            let to_param = |st: [f64; 2]| {
                let a = node(i, j);
                let b = node(i + 1, j + 1);
                [a[0] + st[0] * (b[0] - a[0]), a[1] + st[1] * (b[1] - a[1])]
            };
            // A frame flip inside the cell also changes signs; keep roots
            // where the residual actually drops.
            let pick = |f: &dyn Fn(&Sample) -> [f64; 2]| {
                let c = [f(corners[0]), f(corners[1]), f(corners[2]), f(corners[3])];
                let p = to_param(bilinear_root(&c)?);
                let top = c.iter().map(|x| x[0].hypot(x[1])).fold(0.0, f64::max);
                let r = f(&sample(p)?);
                (r[0].hypot(r[1]) <= 0.25 * top).then_some(p)
            };
            (pick(&|s| s.h), pick(&|s| s.um))
        })
        .collect();
    // Local minima of the residual magnitudes over the node grid.
    let local_min = |f: &dyn Fn(&Sample) -> f64, i: usize, j: usize| -> bool {
        let Some(s) = at(i, j) else { return false };
        let v = f(s);
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if (di, dj) == (0, 0) || a < 0 || b < 0 || a > n as i64 || b > n as i64 {
                    continue;
                }
                if let Some(t) = at(a as usize, b as usize) {
                    if f(t) < v {
                        return false;
                    }
                }
            }
        }
        true
    };
    // (start, try normal, try umbilic, from a sign-change cell)
    let mut starts: Vec<([f64; 2], bool, bool, bool)> = Vec::new();
    for (ns, us) in &cell_starts {
        if let Some(p) = ns {
            starts.push((*p, true, false, true));
        }
        if let Some(p) = us {
            starts.push((*p, false, true, true));
        }
    }
    for i in 0..=n {
        for j in 0..=n {
            let hn = local_min(&|s: &Sample| s.h_rel, i, j);
            let un = local_min(&|s: &Sample| s.um[0].hypot(s.um[1]), i, j);
            if hn || un {
                starts.push((node(i, j), hn, un, false));
            }
        }
    }

    let found: Vec<(Option<[f64; 2]>, Option<[f64; 2]>, [f64; 2], bool)> = starts
        .par_iter()
        .map(|&(p, nf, uf, cell)| {
            let a = if nf { newton_normal(surface, p, tol.tol_sing * 1e-3) } else { None };
            let b = if uf { newton_umbilic(surface, p, tol.tol_sing * 1e-3) } else { None };
            (a, b, p, cell && a.is_none() && b.is_none())
        })
        .collect();

    let mut roots: Vec<([f64; 2], Kind)> = Vec::new();
    let mut suspects = Vec::new();
    let cell_size = dom.u.len().max(dom.v.len()) / n as f64;
    for (a, b, p, failed) in found.iter() {
        for (root, hint) in [(a, Kind::Normal), (b, Kind::Umbilic)] {
            let Some(x) = root else { continue };
            let Ok(j) = surface.jet_at(*x) else { continue };
            let Ok(g) = geometry::mean_curvature(&j, tol.tol_h) else { continue };
            let size = g.second.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
            let kind = if g.h_norm <= tol.tol_sing.sqrt() * size.max(1.0) {
                if size <= tol.tol_sing.sqrt() {
                    Kind::Degenerate
                } else {
                    Kind::Normal
                }
            } else if hint == Kind::Normal {
                continue;
            } else {
                Kind::Umbilic
            };
            if let Some(existing) = roots.iter_mut().find(|(y, _)| dom.distance(*x, *y) < tol.tol_merge) {
                if kind == Kind::Degenerate {
                    existing.1 = Kind::Degenerate;
                }
                continue;
            }
            roots.push((*x, kind));
        }
        // Cells whose residual changed sign but produced nothing nearby.
        if *failed {
            let near = roots.iter().any(|(y, _)| dom.distance(*p, *y) < 2.0 * cell_size);
            if !near {
                suspects.push(*p);
            }
        }
    }
    // A suspect cell might have been resolved by a later start.
    suspects.retain(|p| !roots.iter().any(|(y, _)| dom.distance(*p, *y) < 2.0 * cell_size));
    roots.sort_by(|a, b| {
        a.0[0]
            .partial_cmp(&b.0[0])
            .unwrap()
            .then(a.0[1].partial_cmp(&b.0[1]).unwrap())
    });
    let singularities = roots
        .par_iter()
        .map(|&(x, kind)| analyze(surface, x, kind, tol))
        .collect();
    Scan {
        singularities,
        suspects,
        globally_degenerate: false,
    }
}

/// Monge coefficients of a constructed singularity at the origin with given
/// rotated linear coefficients `(a, b, c)` (and `d = 0`).
///
/// For the normal kind: `r₁ = −t₁ = 1`, `r₂ = −t₂ = 1`, `s₁ = 1`, `s₂ = 0`;
/// for the umbilic kind: `r₁ = t₁ = 1` and a cubic `h₁` only.
pub fn constructed_coeffs(kind: Kind, a: f64, b: f64, c: f64) -> [f64; 14] {
    let mut k = [0.0; 14];
    match kind {
        Kind::Umbilic => {
            // h₁: r s t a b c d
            k[0] = 1.0;
            k[2] = 1.0;
            k[3] = b - a;
            k[4] = b;
            k[5] = c;
        }
        _ => {
            k[0] = 1.0;
            k[1] = 1.0;
            k[2] = -1.0;
            // a₁ = b₁ = d₁ = 0, c₁ + d₁ = 2b
            k[5] = 2.0 * b;
            k[7] = 1.0;
            k[9] = -1.0;
            // a₂ + b₂ = −a, c₂ + d₂ = −c − 2b
            k[10] = -a;
            k[12] = -c - 2.0 * b;
        }
    }
    k
}

/// Linear coefficients `(a, b, c)` used for the constructed examples.
pub fn constructed_target(t: DType) -> (f64, f64, f64) {
    match t {
        DType::D1 => (-3.0, 1.0, 0.3),
        DType::D2 => (-0.5, 1.0, 0.3),
        DType::D3 => (1.0, 1.0, 0.3),
    }
}
