//! The Lie-Cartan lift `X = (J_p, p J_p, −(J_u + p J_v))` of the quadratic
//! differential equation to the projectivized tangent bundle, its equilibria
//! over singular points, and separatrix germs.
//!
//! Near the vertical direction the slope `q = du/dv` is used instead, with
//! `J*(q) = N q² + M q + L` and the mirrored field.

use crate::config::Tolerances;
use crate::expr::{ExprError, SurfaceDef};
use crate::foliation::{LeafTrace, Origin, Tracer};
use crate::geometry::{self, form_jets, Foliation};
use crate::jet::Jet;
use crate::ode::{adaptive_step, Step, StepControl};
use crate::Jet4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// `p = dv/du`
    P,
    /// `q = du/dv`
    Q,
}

/// A point of the projectivized tangent bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPoint {
    pub uv: [f64; 2],
    pub slope: f64,
    pub chart: Chart,
}

impl ProjPoint {
    pub fn new(uv: [f64; 2], slope: f64, chart: Chart) -> Self {
        ProjPoint { uv, slope, chart }
    }

    /// Tangent direction `(1, p)` or `(q, 1)`.
    pub fn direction(&self) -> [f64; 2] {
        match self.chart {
            Chart::P => [1.0, self.slope],
            Chart::Q => [self.slope, 1.0],
        }
    }

    /// Same point in the chart where `|slope| ≤ 1`.
    pub fn normalized(self) -> Self {
        if self.slope.abs() <= 1.0 || self.slope == 0.0 {
            return self;
        }
        let chart = match self.chart {
            Chart::P => Chart::Q,
            Chart::Q => Chart::P,
        };
        ProjPoint {
            uv: self.uv,
            slope: 1.0 / self.slope,
            chart,
        }
    }
}

/// `(L, M, N)` as jets, mirrored for the `q` chart so that one formula
/// serves both charts in swapped coordinates.
fn chart_bde(jet: &Jet4, chart: Chart) -> [Jet; 3] {
    let [l, m, n] = form_jets(jet).bde();
    match chart {
        Chart::P => [l, m, n],
        Chart::Q => [n.swap_uv(), m.swap_uv(), l.swap_uv()],
    }
}

/// Field and Jacobian in chart coordinates `(x, y, p)` for the BDE
/// `L dy² + M dx dy + N dx² = 0`.
fn field_and_jacobian(bde: &[Jet; 3], p: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let [l, m, n] = bde;
    let d = |j: &Jet, a: usize, b: usize| j.partial(a, b);
    let x1 = 2.0 * l.value() * p + m.value();
    let ju = d(l, 1, 0) * p * p + d(m, 1, 0) * p + d(n, 1, 0);
    let jv = d(l, 0, 1) * p * p + d(m, 0, 1) * p + d(n, 0, 1);
    let x3 = -(ju + p * jv);
    let jp_u = 2.0 * d(l, 1, 0) * p + d(m, 1, 0);
    let jp_v = 2.0 * d(l, 0, 1) * p + d(m, 0, 1);
    let second = |a: usize, b: usize| {
        let (i, j) = (1 + a, b);
        let (k, o) = (a, 1 + b);
        let ju_ = d(l, i, j) * p * p + d(m, i, j) * p + d(n, i, j);
        let jv_ = d(l, k, o) * p * p + d(m, k, o) * p + d(n, k, o);
        -(ju_ + p * jv_)
    };
    let x3_p = -(jp_u + jv + p * jp_v);
    let jac = [
        [jp_u, jp_v, 2.0 * l.value()],
        [p * jp_u, p * jp_v, x1 + 2.0 * l.value() * p],
        [second(1, 0), second(0, 1), x3_p],
    ];
    ([x1, p * x1, x3], jac)
}

/// Back from chart coordinates to `(u, v, slope)`.
fn to_surface(chart: Chart, x: [f64; 3], a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    match chart {
        Chart::P => (x, a),
        Chart::Q => {
            let perm = [1, 0, 2];
            let mut b = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    b[i][j] = a[perm[i]][perm[j]];
                }
            }
            ([x[1], x[0], x[2]], b)
        }
    }
}

/// `X` at a point, as `(u̇, v̇, slope˙)`.
pub fn field_at(surface: &SurfaceDef, pt: &ProjPoint) -> Result<[f64; 3], ExprError> {
    Ok(linearize(surface, pt)?.0)
}

/// `X` and its exact Jacobian with respect to `(u, v, slope)`.
pub fn linearize(surface: &SurfaceDef, pt: &ProjPoint) -> Result<([f64; 3], [[f64; 3]; 3]), ExprError> {
    let jet = surface.jet_at(pt.uv)?;
    Ok(linearize_jet(&jet, pt.chart, pt.slope))
}

fn linearize_jet(jet: &Jet4, chart: Chart, slope: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let (x, a) = field_and_jacobian(&chart_bde(jet, chart), slope);
    to_surface(chart, x, a)
}

/// `J` and its gradient `(J_u, J_v, J_slope)` at a point.
pub fn j_gradient(surface: &SurfaceDef, pt: &ProjPoint) -> Result<(f64, [f64; 3]), ExprError> {
    let jet = surface.jet_at_order(pt.uv, 3)?;
    let [l, m, n] = chart_bde(&jet, pt.chart);
    let p = pt.slope;
    let poly = |a: usize, b: usize| l.partial(a, b) * p * p + m.partial(a, b) * p + n.partial(a, b);
    let g = [poly(1, 0), poly(0, 1), 2.0 * l.value() * p + m.value()];
    let g = match pt.chart {
        Chart::P => g,
        Chart::Q => [g[1], g[0], g[2]],
    };
    Ok((poly(0, 0), g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqClass {
    Saddle,
    Node,
    NonHyperbolic,
}

impl EqClass {
    pub fn name(self) -> &'static str {
        match self {
            EqClass::Saddle => "saddle",
            EqClass::Node => "node",
            EqClass::NonHyperbolic => "non-hyperbolic",
        }
    }
}

/// Equilibrium of `X` on the fiber over a singular point.
#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    pub point: ProjPoint,
    /// Jacobian with respect to `(u, v, slope)`.
    pub jacobian: [[f64; 3]; 3],
    /// Eigenvalues: along the fiber, along the surface (inside `J = 0`), and
    /// the remaining one.
    pub eigenvalues: [f64; 3],
    /// Eigenvector of the surface eigenvalue, `(u, v, slope)` components.
    pub transverse: [f64; 3],
    pub class: EqClass,
    /// `|X|` at the point.
    pub residual: f64,
}

/// Equilibria of `X` over a singular point: real roots of the fiber cubic
/// `L_v p³ + (L_u + M_v) p² + (M_u + N_v) p + N_u` with `|p| ≤ 1`, plus those
/// of the mirrored cubic with `|q| < 1`.
pub fn fiber_equilibria(surface: &SurfaceDef, location: [f64; 2], tol: &Tolerances) -> Result<Vec<Equilibrium>, ExprError> {
    let jet = surface.jet_at(location)?;
    let mut out = Vec::new();
    for chart in [Chart::P, Chart::Q] {
        let [l, m, n] = chart_bde(&jet, chart);
        let d = |j: &Jet, a: usize, b: usize| j.partial(a, b);
        let roots = crate::linalg::real_roots_cubic(
            d(&l, 0, 1),
            d(&l, 1, 0) + d(&m, 0, 1),
            d(&m, 1, 0) + d(&n, 0, 1),
            d(&n, 1, 0),
        );
        for p in roots {
            let keep = match chart {
                Chart::P => p.abs() <= 1.0,
                Chart::Q => p.abs() < 1.0,
            };
            if keep {
                out.push(equilibrium_at(&jet, ProjPoint::new(location, p, chart), tol));
            }
        }
    }
    Ok(out)
}

fn equilibrium_at(jet: &Jet4, point: ProjPoint, tol: &Tolerances) -> Equilibrium {
    let (x, a) = field_and_jacobian(&chart_bde(jet, point.chart), point.slope);
    let p = point.slope;
    // Inside ker ∇J = span{(0,0,1), (1,p,0)} the Jacobian is triangular.
    let lf = a[2][2];
    let lt = a[0][0] + p * a[0][1];
    let mu = a[2][0] + p * a[2][1];
    let trace = a[0][0] + a[1][1] + a[2][2];
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    let class = if lf.abs() <= tol.tol_eig * scale || lt.abs() <= tol.tol_eig * scale {
        EqClass::NonHyperbolic
    } else if lf * lt < 0.0 {
        EqClass::Saddle
    } else {
        EqClass::Node
    };
    let ev = [1.0, p, mu / (lt - lf)];
    let (x, a) = to_surface(point.chart, x, a);
    let ev = match point.chart {
        Chart::P => ev,
        Chart::Q => [ev[1], ev[0], ev[2]],
    };
    Equilibrium {
        point,
        jacobian: a,
        eigenvalues: [lf, lt, trace - lf - lt],
        transverse: ev,
        class,
        residual: x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Smallest `|(J_u, J_v)|` over `samples` points of the fiber, relative to
/// the size of the linear coefficients. Positive means `dJ ≠ 0` on the fiber.
pub fn fiber_gradient_min(surface: &SurfaceDef, location: [f64; 2], samples: usize) -> Result<f64, ExprError> {
    let mut best = f64::INFINITY;
    for k in 0..samples {
        let theta = std::f64::consts::PI * k as f64 / samples as f64;
        let (s, c) = theta.sin_cos();
        let pt = if c.abs() >= s.abs() {
            ProjPoint::new(location, s / c, Chart::P)
        } else {
            ProjPoint::new(location, c / s, Chart::Q)
        };
        let (_, g) = j_gradient(surface, &pt)?;
        let d = pt.direction();
        let w = d[0].hypot(d[1]).powi(2);
        best = best.min(g[0].hypot(g[1]) / w);
    }
    Ok(best)
}

/// Where a separatrix germ leaves the blow-up neighborhood.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GermExit {
    pub uv: [f64; 2],
    /// Unit (for `I`) direction pointing away from the singularity.
    pub direction: [f64; 2],
    pub foliation: Foliation,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GermError {
    #[error("equilibrium is not a saddle")]
    NotSaddle,
    #[error("surface evaluation failed: {0}")]
    Surface(String),
    #[error("germ did not leave the blow-up neighborhood")]
    Stuck,
    #[error("no principal direction at the exit point")]
    NoDirection,
}

/// Follows one branch (`branch = ±1`) of the surface-transverse invariant
/// manifold of a saddle from the fiber out to distance `r_exit`, then labels
/// the foliation the leaf belongs to.
pub fn separatrix_germ(surface: &SurfaceDef, eq: &Equilibrium, branch: f64, tol: &Tolerances) -> Result<GermExit, GermError> {
    if eq.class != EqClass::Saddle {
        return Err(GermError::NotSaddle);
    }
    let origin = eq.point.uv;
    let r_exit = tol.r_exit();
    let delta = tol.separatrix_offset.min(0.1 * r_exit);
    let v = eq.transverse;
    let nv = v[0].hypot(v[1]);
    let mut chart = eq.point.chart;
    let mut y = [
        origin[0] + branch * delta * v[0] / nv,
        origin[1] + branch * delta * v[1] / nv,
        eq.point.slope + branch * delta * v[2] / nv,
    ];
    // Unstable along the surface: forward time; stable: backward.
    let mut sign = eq.eigenvalues[1].signum();
    let rate = eq.eigenvalues[1].abs();
    let ctl = StepControl {
        atol: tol.rk_atol * delta,
        rtol: tol.rk_rtol,
        h_min: 1e-14 / rate,
        h_max: 0.25 / rate,
    };
    let mut h = 0.05 / rate;
    for _ in 0..10_000 {
        let dist = (y[0] - origin[0]).hypot(y[1] - origin[1]);
        if dist >= r_exit {
            let pt = ProjPoint::new([y[0], y[1]], y[2], chart);
            return label_exit(surface, pt, origin, tol);
        }
        if y[2].abs() > 1.0 {
            // Switch charts, keeping the time direction of the projected flow.
            let q = 1.0 / y[2];
            chart = match chart {
                Chart::P => Chart::Q,
                Chart::Q => Chart::P,
            };
            y[2] = q;
            sign *= -q.signum();
        }
        let c = chart;
        let mut f = |s: &[f64; 3]| -> Result<[f64; 3], String> {
            let x = field_at(surface, &ProjPoint::new([s[0], s[1]], s[2], c)).map_err(|e| e.to_string())?;
            Ok([sign * x[0], sign * x[1], sign * x[2]])
        };
        match adaptive_step(&mut f, &y, h, f64::INFINITY, &ctl) {
            Step::Accepted { y: yn, h_next, .. } => {
                y = yn;
                h = h_next;
            }
            Step::Failed(e) => return Err(GermError::Surface(e)),
        }
    }
    Err(GermError::Stuck)
}

fn label_exit(surface: &SurfaceDef, pt: ProjPoint, origin: [f64; 2], tol: &Tolerances) -> Result<GermExit, GermError> {
    let jet = surface.jet_at_order(pt.uv, 2).map_err(|e| GermError::Surface(e.to_string()))?;
    let dirs = geometry::directions_at(&jet, tol.tol_transv).ok_or(GermError::NoDirection)?;
    let t = pt.direction();
    let away = [pt.uv[0] - origin[0], pt.uv[1] - origin[1]];
    let cos = |d: [f64; 2]| (d[0] * t[1] - d[1] * t[0]).abs() / (d[0].hypot(d[1]) * t[0].hypot(t[1]));
    let foliation = if cos(dirs.minimal) <= cos(dirs.maximal) {
        Foliation::Minimal
    } else {
        Foliation::Maximal
    };
    let mut d = dirs.get(foliation);
    if d[0] * away[0] + d[1] * away[1] < 0.0 {
        d = [-d[0], -d[1]];
    }
    Ok(GermExit {
        uv: pt.uv,
        direction: d,
        foliation,
    })
}

/// Traces the separatrix leaving saddle `equilibrium` of the singularity at
/// `singular[singularity]` on side `branch` (±1): the germ out of the
/// blow-up neighborhood, then the leaf. The polyline starts at the
/// singularity.
pub fn trace_separatrix(
    surface: &SurfaceDef,
    eq: &Equilibrium,
    branch: i8,
    singular: &[[f64; 2]],
    singularity: usize,
    equilibrium: usize,
    tol: &Tolerances,
) -> Result<LeafTrace, GermError> {
    let germ = separatrix_germ(surface, eq, f64::from(branch), tol)?;
    let tracer = Tracer::new(surface, tol, singular);
    let origin = Origin::Separatrix {
        singularity,
        equilibrium,
        branch,
    };
    let mut trace = tracer.trace(germ.uv, germ.foliation, germ.direction, origin);
    let start = eq.point.uv;
    let d = surface.domain().delta(start, germ.uv);
    let head = tracer.first_form(start).map(|i| i.inner(d, d).sqrt()).unwrap_or(d[0].hypot(d[1]));
    trace.points.insert(0, start);
    for s in trace.arclength.iter_mut() {
        *s += head;
    }
    trace.arclength.insert(0, 0.0);
    Ok(trace)
}

/// Whether a leaf that reached the singularity at `location` arrived along
/// the direction of one of the saddles in `eqs` (a separatrix connection)
/// rather than through a parabolic sector. `arrival` is the last tangent.
pub fn arrives_on_separatrix(eqs: &[Equilibrium], arrival: [f64; 2]) -> bool {
    let n = arrival[0].hypot(arrival[1]);
    if n == 0.0 {
        return false;
    }
    let sin = |e: &Equilibrium| {
        let d = e.point.direction();
        (d[0] * arrival[1] - d[1] * arrival[0]).abs() / (n * d[0].hypot(d[1]))
    };
    let best = eqs.iter().min_by(|a, b| sin(a).total_cmp(&sin(b)));
    best.is_some_and(|e| e.class == EqClass::Saddle)
}
