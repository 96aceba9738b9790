//! Arc-length tracing of principal mean lines in parameter space.

use crate::config::Tolerances;
use crate::expr::SurfaceDef;
use crate::geometry::{self, FirstForm, Foliation};
use crate::ode::{adaptive_step, dp_step, Step, StepControl};

/// Why a trace stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    /// Came within `r_exit` of the singularity with this index.
    HitSingularity(usize),
    LeftDomain,
    /// Returned to its seed within the closure tolerance.
    Closed,
    /// Crossed the section through its seed repeatedly without closing:
    /// a candidate for a limit cycle.
    Recurrent,
    /// Step or arc-length budget exhausted.
    StepLimit,
    /// The direction field degenerated away from known singularities.
    Aborted(String),
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::HitSingularity(_) => "hit-singularity",
            Termination::LeftDomain => "left-domain",
            Termination::Closed => "closed",
            Termination::Recurrent => "recurrent",
            Termination::StepLimit => "step-limit",
            Termination::Aborted(_) => "aborted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Origin {
    Seed,
    Separatrix { singularity: usize, equilibrium: usize, branch: i8 },
}

/// A crossing of the section through the seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Return {
    /// Unwrapped parameter point on the section.
    pub point: [f64; 2],
    /// Arc length from the seed.
    pub length: f64,
    /// Signed section coordinate (I-length along the section direction).
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafTrace {
    pub foliation: Foliation,
    pub origin: Origin,
    /// Unwrapped parameter points; wrap with the domain before evaluating.
    pub points: Vec<[f64; 2]>,
    /// I-unit tangents at `points`.
    pub tangents: Vec<[f64; 2]>,
    pub arclength: Vec<f64>,
    pub termination: Termination,
    /// Returns to the seed section, in order.
    pub returns: Vec<Return>,
}

impl LeafTrace {
    pub fn length(&self) -> f64 {
        self.arclength.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Stop {
    LeftDomain,
    Degenerate(String),
}

/// Integration settings shared by all leaves of one surface.
#[derive(Clone, Debug)]
pub struct Tracer<'a> {
    pub surface: &'a SurfaceDef,
    pub tol: &'a Tolerances,
    pub singular: &'a [[f64; 2]],
    pub ctl: StepControl,
    pub max_length: f64,
    /// Returns to the seed section before giving up on closure.
    pub max_returns: usize,
}

/// Rough R⁴ size of the surface: the length of the image of the parameter
/// diagonal, sampled at 64 points.
pub fn surface_scale(surface: &SurfaceDef) -> f64 {
    let d = surface.domain();
    let mut last: Option<Vec<f64>> = None;
    let mut len = 0.0;
    for k in 0..=64 {
        let t = k as f64 / 64.0;
        let p = [d.u.lo + t * d.u.len(), d.v.lo + t * d.v.len()];
        if let Ok(x) = surface.eval(p) {
            if let Some(y) = &last {
                len += x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            }
            last = Some(x);
        }
    }
    len.max(1e-6)
}

impl<'a> Tracer<'a> {
    pub fn new(surface: &'a SurfaceDef, tol: &'a Tolerances, singular: &'a [[f64; 2]]) -> Self {
        let scale = surface_scale(surface);
        Tracer {
            surface,
            tol,
            singular,
            ctl: StepControl {
                atol: tol.rk_atol,
                rtol: tol.rk_rtol,
                h_min: 1e-12 * scale,
                h_max: 0.02 * scale,
            },
            max_length: tol.max_length_factor * scale,
            max_returns: 4,
        }
    }

    /// Tighter integration for return maps and cycle sampling.
    pub fn precise(mut self) -> Self {
        self.ctl.atol = self.ctl.atol.min(1e-13);
        self.ctl.rtol = self.ctl.rtol.min(1e-12);
        self
    }

    pub(crate) fn first_form(&self, p: [f64; 2]) -> Option<FirstForm> {
        let jet = self.surface.jet_at_order(p, 2).ok()?;
        geometry::first_form(&jet).ok()
    }

    /// I-unit principal direction at `p` with positive component along
    /// `reference`.
    pub(crate) fn direction(&self, p: [f64; 2], fol: Foliation, reference: [f64; 2]) -> Result<[f64; 2], Stop> {
        let jet = self.surface.jet_at_order(p, 2).map_err(|e| match e {
            crate::expr::ExprError::OutOfDomain { .. } => Stop::LeftDomain,
            e => Stop::Degenerate(e.to_string()),
        })?;
        let dirs = geometry::directions_at(&jet, self.tol.tol_transv)
            .ok_or_else(|| Stop::Degenerate(format!("no principal directions at ({:.6}, {:.6})", p[0], p[1])))?;
        let d = dirs.get(fol);
        Ok(if d[0] * reference[0] + d[1] * reference[1] < 0.0 { [-d[0], -d[1]] } else { d })
    }

    /// Traces a leaf from `seed` starting along `reference`.
    pub fn trace(&self, seed: [f64; 2], fol: Foliation, reference: [f64; 2], origin: Origin) -> LeafTrace {
        let mut out = LeafTrace {
            foliation: fol,
            origin,
            points: vec![seed],
            tangents: vec![reference],
            arclength: vec![0.0],
            termination: Termination::StepLimit,
            returns: Vec::new(),
        };
        let dom = *self.surface.domain();
        let t0 = match self.direction(seed, fol, reference) {
            Ok(d) => d,
            Err(s) => {
                out.termination = stop_termination(s);
                return out;
            }
        };
        out.tangents[0] = t0;
        let Some(i0) = self.first_form(seed) else {
            out.termination = Termination::Aborted("seed is not an immersion point".into());
            return out;
        };
        let m0 = geometry::complement(&i0, t0);
        let section = |y: [f64; 2]| i0.inner(dom.delta(seed, y), t0);
        let r_stop = self.tol.r_exit();
        let own = match origin {
            Origin::Separatrix { singularity, .. } => Some(singularity),
            Origin::Seed => None,
        };
        let rho = 0.1 * dom.diameter();
        let close_tol = 1e-6 * dom.diameter();
        let mut left_own = false;
        let mut far = false;
        let mut y = seed;
        let mut s = 0.0;
        let mut reference = t0;
        let mut h = 0.1 * self.ctl.h_max;
        for _ in 0..self.tol.max_steps {
            if s >= self.max_length {
                return out;
            }
            let r = reference;
            let mut f = |p: &[f64; 2]| self.direction(*p, fol, r);
            let (yn, used) = match adaptive_step(&mut f, &y, h, f64::INFINITY, &self.ctl) {
                Step::Accepted { y: yn, h: used, h_next } => {
                    h = h_next;
                    (yn, used)
                }
                Step::Failed(e) => {
                    out.termination = stop_termination(e);
                    return out;
                }
            };
            let tn = match self.direction(yn, fol, r) {
                Ok(t) => t,
                Err(e) => {
                    out.termination = stop_termination(e);
                    return out;
                }
            };
            for (i, q) in self.singular.iter().enumerate() {
                let (dist, at) = segment_distance(&dom, y, yn, *q);
                if Some(i) == own && !left_own {
                    if dom.distance(yn, *q) > 2.0 * r_stop {
                        left_own = true;
                    }
                    continue;
                }
                if dist < r_stop {
                    out.points.push([y[0] + at * (yn[0] - y[0]), y[1] + at * (yn[1] - y[1])]);
                    out.tangents.push(tn);
                    out.arclength.push(s + at * used);
                    out.termination = Termination::HitSingularity(i);
                    return out;
                }
            }
            if own.is_none() {
                if dom.distance(seed, yn) > rho {
                    far = true;
                }
                if far && section(y) < 0.0 && section(yn) >= 0.0 && dom.distance(seed, yn) < rho {
                    let (hit, dh) = refine_crossing(&mut f, &y, used, &self.ctl, &section);
                    let delta = dom.delta(seed, hit);
                    let ret = Return {
                        point: hit,
                        length: s + dh,
                        sigma: i0.inner(delta, m0),
                    };
                    out.returns.push(ret);
                    if delta[0].hypot(delta[1]) < close_tol {
                        out.points.push(hit);
                        out.tangents.push(t0);
                        out.arclength.push(s + dh);
                        out.termination = Termination::Closed;
                        return out;
                    }
                    if out.returns.len() >= self.max_returns {
                        out.points.push(yn);
                        out.tangents.push(tn);
                        out.arclength.push(s + used);
                        out.termination = Termination::Recurrent;
                        return out;
                    }
                    far = false;
                }
            }
            reference = tn;
            y = yn;
            s += used;
            out.points.push(y);
            out.tangents.push(tn);
            out.arclength.push(s);
        }
        out
    }
}

/// Parameter distance from `q` to the segment `a → b`, and the fraction of
/// the segment at the closest point.
fn segment_distance(dom: &crate::expr::Domain, a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> (f64, f64) {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = dom.delta(a, q);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((aq[0] * ab[0] + aq[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((aq[0] - t * ab[0]).hypot(aq[1] - t * ab[1]), t)
}

pub(crate) fn stop_termination(s: Stop) -> Termination {
    match s {
        Stop::LeftDomain => Termination::LeftDomain,
        Stop::Degenerate(m) => Termination::Aborted(m),
    }
}

/// Step length in `(0, h]` at which a single Dormand–Prince step from `y`
/// lands on the zero of `section`, by safeguarded secant iteration.
pub(crate) fn refine_crossing<E>(
    f: &mut impl FnMut(&[f64; 2]) -> Result<[f64; 2], E>,
    y: &[f64; 2],
    h: f64,
    ctl: &StepControl,
    section: &impl Fn([f64; 2]) -> f64,
) -> ([f64; 2], f64) {
    let mut eval = |t: f64| -> Option<([f64; 2], f64)> {
        let (p, _) = dp_step(f, y, t, ctl).ok()?;
        Some((p, section(p)))
    };
    let (mut a, mut fa) = (0.0, section(*y));
    let Some((mut pb, mut fb)) = eval(h) else {
        return (*y, 0.0);
    };
    let mut b = h;
    for _ in 0..60 {
        if (b - a).abs() <= 1e-15 * h.abs().max(1.0) || fb == 0.0 {
            break;
        }
        // Illinois variant of regula falsi.
        let c = b - fb * (b - a) / (fb - fa);
        let Some((pc, fc)) = eval(c) else { break };
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
        pb = pc;
        if fc.abs() <= 1e-15 {
            break;
        }
    }
    (pb, b)
}

/// Traces a leaf from `seed` along the labeled direction, oriented by
/// `orient` (±1).
pub fn trace_leaf(
    surface: &SurfaceDef,
    seed: [f64; 2],
    fol: Foliation,
    orient: f64,
    tol: &Tolerances,
    singular: &[[f64; 2]],
) -> LeafTrace {
    let tracer = Tracer::new(surface, tol, singular);
    let reference = match surface
        .jet_at_order(seed, 2)
        .ok()
        .and_then(|j| geometry::directions_at(&j, tol.tol_transv))
    {
        Some(d) => {
            let d = d.get(fol);
            [orient * d[0], orient * d[1]]
        }
        None => [orient, 0.0],
    };
    tracer.trace(seed, fol, reference, Origin::Seed)
}
