//! Fundamental forms, mean curvature vector and the quadratic differential
//! equation of the principal mean lines.
//!
//! Everything here is a function of a [`Jet4`]. The scalar routines read
//! values at the base point; the `*_jets` variants keep the Taylor expansion so
//! callers can differentiate the results once or twice more.

use thiserror::Error;

use crate::expr::Jet4;
use crate::jet::{self, dot4, scale4, sub4, Jet, JetVec4};
use crate::linalg::{self, Vec4};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("tangent vectors are dependent")]
    NonImmersion,
    #[error("no reference normal candidate is transverse to the tangent plane")]
    FrameSeed,
}

/// Which principal mean foliation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Foliation {
    Minimal,
    Maximal,
}

impl Foliation {
    pub fn other(self) -> Foliation {
        match self {
            Foliation::Minimal => Foliation::Maximal,
            Foliation::Maximal => Foliation::Minimal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Foliation::Minimal => "minimal",
            Foliation::Maximal => "maximal",
        }
    }
}

/// First and second partials of the immersion, as jets.
#[derive(Clone, Copy, Debug)]
pub struct Partials {
    pub au: JetVec4,
    pub av: JetVec4,
    pub auu: JetVec4,
    pub auv: JetVec4,
    pub avv: JetVec4,
}

pub fn partials(jet: &Jet4) -> Partials {
    let au = jet.comps.map(|c| c.d_du());
    let av = jet.comps.map(|c| c.d_dv());
    Partials {
        au,
        av,
        auu: au.map(|c| c.d_du()),
        auv: au.map(|c| c.d_dv()),
        avv: av.map(|c| c.d_dv()),
    }
}

/// `E, F, G` with their first partials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// `[∂u, ∂v]` of `E`, `F`, `G`.
    pub de: [f64; 2],
    pub df: [f64; 2],
    pub dg: [f64; 2],
}

impl FirstForm {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// `I(a, b)` for parameter-space vectors.
    pub fn inner(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.e * a[0] * b[0] + self.f * (a[0] * b[1] + a[1] * b[0]) + self.g * a[1] * b[1]
    }
}

pub fn first_form(jet: &Jet4) -> Result<FirstForm, GeometryError> {
    let p = partials(jet);
    let e = dot4(&p.au, &p.au);
    let f = dot4(&p.au, &p.av);
    let g = dot4(&p.av, &p.av);
    let ff = FirstForm {
        e: e.value(),
        f: f.value(),
        g: g.value(),
        de: e.gradient(),
        df: f.gradient(),
        dg: g.gradient(),
    };
    if !(ff.det() > 1e-24 * ff.e * ff.g) {
        return Err(GeometryError::NonImmersion);
    }
    Ok(ff)
}

fn unit_axis(k: usize) -> JetVec4 {
    let mut v = [Jet::constant(0.0); 4];
    v[k] = Jet::constant(1.0);
    v
}

/// Normal projection of a vector field, given the tangent partials.
fn normal_part(x: &JetVec4, au: &JetVec4, av: &JetVec4) -> JetVec4 {
    let e = dot4(au, au);
    let f = dot4(au, av);
    let g = dot4(av, av);
    let xu = dot4(x, au);
    let xv = dot4(x, av);
    let w = (e * g - f * f).recip();
    let a = (g * xu - f * xv) * w;
    let b = (e * xv - f * xu) * w;
    sub4(x, &jet::add4(&scale4(au, a), &scale4(av, b)))
}

/// Orthonormal normal frame `(N₁, N₂)` as jets: `B₁` is `(0, 0, 1, 0)` with
/// the tangent part removed (falling back to `(0, 0, 0, 1)`), and
/// `B₂ = α_u ∧ α_v ∧ B₁`, so `(α_u, α_v, N₁, N₂)` is positively oriented.
pub fn normal_frame_jets(jet: &Jet4) -> Result<(JetVec4, JetVec4), GeometryError> {
    let p = partials(jet);
    for axis in [2, 3] {
        let b1 = normal_part(&unit_axis(axis), &p.au, &p.av);
        let len2 = dot4(&b1, &b1);
        if !(len2.value() >= 1e-6) {
            continue;
        }
        let len = len2.sqrt();
        let n1 = scale4(&b1, len.recip());
        let b2 = jet::wedge3(&p.au, &p.av, &n1);
        let n2 = scale4(&b2, dot4(&b2, &b2).sqrt().recip());
        return Ok((n1, n2));
    }
    Err(GeometryError::FrameSeed)
}

pub fn normal_frame(jet: &Jet4) -> Result<(Vec4, Vec4), GeometryError> {
    first_form(jet)?;
    let (n1, n2) = normal_frame_jets(jet)?;
    Ok((jet::values4(&n1), jet::values4(&n2)))
}

/// Mean curvature vector and the second form along it, as jets.
#[derive(Clone, Copy, Debug)]
pub struct FormJets {
    pub e: Jet,
    pub f: Jet,
    pub g: Jet,
    pub h: JetVec4,
    pub eh: Jet,
    pub fh: Jet,
    pub gh: Jet,
}

impl FormJets {
    /// Coefficients `(L, M, N)` of `L dv² + M du dv + N du² = 0`.
    pub fn bde(&self) -> [Jet; 3] {
        [
            self.f * self.gh - self.fh * self.g,
            self.e * self.gh - self.eh * self.g,
            self.e * self.fh - self.f * self.eh,
        ]
    }
}

/// `H` is the normal part of `(Gα_uu − 2Fα_uv + Eα_vv) / (2(EG − F²))`, which
/// does not depend on the choice of normal frame.
pub fn form_jets(jet: &Jet4) -> FormJets {
    let p = partials(jet);
    let e = dot4(&p.au, &p.au);
    let f = dot4(&p.au, &p.av);
    let g = dot4(&p.av, &p.av);
    let w2 = (e * g - f * f) * 2.0;
    let num = jet::add4(
        &sub4(&scale4(&p.auu, g), &scale4(&p.auv, f * 2.0)),
        &scale4(&p.avv, e),
    );
    let h = normal_part(&scale4(&num, w2.recip()), &p.au, &p.av);
    FormJets {
        e,
        f,
        g,
        h,
        eh: dot4(&p.auu, &h),
        fh: dot4(&p.auv, &h),
        gh: dot4(&p.avv, &h),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryData {
    pub first: FirstForm,
    pub n1: Vec4,
    pub n2: Vec4,
    /// `(e_i, f_i, g_i)` relative to `N_i`.
    pub second: [[f64; 3]; 2],
    pub h1: f64,
    pub h2: f64,
    pub h: Vec4,
    pub h_norm: f64,
    /// `(e_H, f_H, g_H) = ⟨α_uu, H⟩, ⟨α_uv, H⟩, ⟨α_vv, H⟩`.
    pub second_h: [f64; 3],
    /// Principal mean curvatures `k ≤ K`, meaningful when `curvatures_valid`.
    pub k: f64,
    pub big_k: f64,
    pub curvatures_valid: bool,
}

pub fn mean_curvature(jet: &Jet4, tol_h: f64) -> Result<GeometryData, GeometryError> {
    let first = first_form(jet)?;
    let (n1, n2) = normal_frame(jet)?;
    let p = partials(jet);
    let [auu, auv, avv] = [p.auu, p.auv, p.avv].map(|x| jet::values4(&x));
    let sec = |n: &Vec4| [linalg::dot(&auu, n), linalg::dot(&auv, n), linalg::dot(&avv, n)];
    let second = [sec(&n1), sec(&n2)];
    let w = first.det();
    let hi = |s: &[f64; 3]| (first.g * s[0] - 2.0 * first.f * s[1] + first.e * s[2]) / (2.0 * w);
    let (h1, h2) = (hi(&second[0]), hi(&second[1]));
    let h = linalg::add(&linalg::scale(&n1, h1), &linalg::scale(&n2, h2));
    let h_norm = h1.hypot(h2);
    let second_h = sec(&h);
    let mut data = GeometryData {
        first,
        n1,
        n2,
        second,
        h1,
        h2,
        h,
        h_norm,
        second_h,
        k: f64::NAN,
        big_k: f64::NAN,
        curvatures_valid: false,
    };
    if h_norm > tol_h {
        // Eigenvalues of I⁻¹ II_N with N = H/|H|; their mean is |H|.
        let [eh, fh, gh] = second_h.map(|x| x / h_norm);
        let det = (eh * gh - fh * fh) / w;
        let mean = h_norm;
        let r = (mean * mean - det).max(0.0).sqrt();
        data.k = mean - r;
        data.big_k = mean + r;
        data.curvatures_valid = true;
    }
    Ok(data)
}

/// Coefficients of the quadratic differential equation at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bde {
    /// `dv²` coefficient `F g_H − f_H G`.
    pub l: f64,
    /// `du dv` coefficient `E g_H − e_H G`.
    pub m: f64,
    /// `du²` coefficient `E f_H − F e_H`.
    pub n: f64,
}

impl Bde {
    /// `J(p) = L p² + M p + N` with `p = dv/du`.
    pub fn j(&self, p: f64) -> f64 {
        (self.l * p + self.m) * p + self.n
    }

    /// Same polynomial in `q = du/dv`.
    pub fn j_reversed(&self, q: f64) -> f64 {
        (self.n * q + self.m) * q + self.l
    }

    pub fn discriminant(&self) -> f64 {
        self.m * self.m - 4.0 * self.l * self.n
    }

    /// `Q(ξ) = L ξ_v² + M ξ_u ξ_v + N ξ_u²` on a direction.
    pub fn eval_dir(&self, d: [f64; 2]) -> f64 {
        self.l * d[1] * d[1] + self.m * d[0] * d[1] + self.n * d[0] * d[0]
    }

    pub fn scale(&self) -> f64 {
        self.l.abs().max(self.m.abs()).max(self.n.abs())
    }
}

pub fn bde_at(jet: &Jet4) -> Bde {
    let [l, m, n] = form_jets(&jet.truncated(2)).bde();
    Bde {
        l: l.value(),
        m: m.value(),
        n: n.value(),
    }
}

/// The two root directions of the BDE at a regular point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalDirections {
    /// Unit (for `I`) parameter-space direction of the minimal foliation.
    pub minimal: [f64; 2],
    pub maximal: [f64; 2],
    /// Normal curvatures `II_H(d, d) / I(d, d)` along each.
    pub kappa_h: [f64; 2],
}

impl PrincipalDirections {
    pub fn get(&self, fol: Foliation) -> [f64; 2] {
        match fol {
            Foliation::Minimal => self.minimal,
            Foliation::Maximal => self.maximal,
        }
    }

    /// Slope `dv/du` of a direction; infinite for vertical directions.
    pub fn slope(d: [f64; 2]) -> f64 {
        d[1] / d[0]
    }
}

/// Root directions in the numerically stable form
/// `(2L, −M − σs)` and `(−M − σs, 2N)` with `s = √(M² − 4LN)`, `σ = sign M`.
/// Returns `None` when the discriminant is not positive relative to `tol`.
pub fn principal_directions(data: &GeometryData, bde: &Bde, tol: f64) -> Option<PrincipalDirections> {
    root_directions(&data.first, bde, data.second_h, tol)
}

fn root_directions(first: &FirstForm, bde: &Bde, second_h: [f64; 3], tol: f64) -> Option<PrincipalDirections> {
    let disc = bde.discriminant();
    let scale = bde.scale();
    if !(disc > (tol * scale).powi(2)) || scale == 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let sigma = if bde.m >= 0.0 { 1.0 } else { -1.0 };
    let w = -bde.m - sigma * s;
    let a = [2.0 * bde.l, w];
    let b = [w, 2.0 * bde.n];
    let unit = |d: [f64; 2]| {
        let n = first.inner(d, d).sqrt();
        [d[0] / n, d[1] / n]
    };
    let (a, b) = (unit(a), unit(b));
    let kappa = |d: [f64; 2]| {
        second_h[0] * d[0] * d[0] + 2.0 * second_h[1] * d[0] * d[1] + second_h[2] * d[1] * d[1]
    };
    let (ka, kb) = (kappa(a), kappa(b));
    Some(if ka <= kb {
        PrincipalDirections {
            minimal: a,
            maximal: b,
            kappa_h: [ka, kb],
        }
    } else {
        PrincipalDirections {
            minimal: b,
            maximal: a,
            kappa_h: [kb, ka],
        }
    })
}

/// Principal directions straight from a jet of order ≥ 2.
pub fn directions_at(jet: &Jet4, tol: f64) -> Option<PrincipalDirections> {
    let fj = form_jets(&jet.truncated(2));
    let first = FirstForm {
        e: fj.e.value(),
        f: fj.f.value(),
        g: fj.g.value(),
        de: [0.0; 2],
        df: [0.0; 2],
        dg: [0.0; 2],
    };
    let [l, m, n] = fj.bde();
    let bde = Bde {
        l: l.value(),
        m: m.value(),
        n: n.value(),
    };
    root_directions(&first, &bde, [fj.eh.value(), fj.fh.value(), fj.gh.value()], tol)
}

/// Positive unit complement `m` of a unit direction `d`: `I(d, m) = 0`,
/// `I(m, m) = 1`, `det[d, m] > 0`.
pub fn complement(first: &FirstForm, d: [f64; 2]) -> [f64; 2] {
    let s = first.det().sqrt();
    [
        -(first.f * d[0] + first.g * d[1]) / s,
        (first.e * d[0] + first.f * d[1]) / s,
    ]
}

/// Jet-valued principal direction field and its complement, for
/// differentiating along curves. `choose` picks the same root as the scalar
/// routine at the base point (`true` for the `(2L, −M − σs)` root).
pub struct DirectionJets {
    pub d: [Jet; 2],
    pub m: [Jet; 2],
    pub forms: FormJets,
}

pub fn direction_jets(jet: &Jet4, fol: Foliation, tol: f64) -> Option<DirectionJets> {
    let forms = form_jets(jet);
    let [l, m, n] = forms.bde();
    let bde = Bde {
        l: l.value(),
        m: m.value(),
        n: n.value(),
    };
    let scalar = directions_at(jet, tol)?;
    let target = scalar.get(fol);
    let s = (m * m - l * n * 4.0).sqrt();
    let sigma = if bde.m >= 0.0 { 1.0 } else { -1.0 };
    let w = -m - s * sigma;
    let cand_a = [l * 2.0, w];
    let cand_b = [w, n * 2.0];
    let ie = |d: &[Jet; 2]| {
        forms.e * d[0] * d[0] + forms.f * d[0] * d[1] * 2.0 + forms.g * d[1] * d[1]
    };
    let normed = |d: [Jet; 2]| {
        let r = ie(&d).sqrt().recip();
        [d[0] * r, d[1] * r]
    };
    let (a, b) = (normed(cand_a), normed(cand_b));
    let (e0, f0, g0) = (forms.e.value(), forms.f.value(), forms.g.value());
    let pick = |d: &[Jet; 2]| {
        let (x, y) = (d[0].value(), d[1].value());
        e0 * x * target[0] + f0 * (x * target[1] + y * target[0]) + g0 * y * target[1]
    };
    let (pa, pb) = (pick(&a), pick(&b));
    let mut d = if pa.abs() >= pb.abs() { a } else { b };
    if pick(&d) < 0.0 {
        d = [-d[0], -d[1]];
    }
    let det = (forms.e * forms.g - forms.f * forms.f).sqrt().recip();
    let mm = [
        -(forms.f * d[0] + forms.g * d[1]) * det,
        (forms.e * d[0] + forms.f * d[1]) * det,
    ];
    Some(DirectionJets { d, m: mm, forms })
}
