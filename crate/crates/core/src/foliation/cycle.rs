//! Return maps on a section through a leaf, cycle refinement and sampling.

use super::trace::{refine_crossing, stop_termination, LeafTrace, Origin, Stop, Tracer};
use crate::geometry::{self, FirstForm, Foliation};
use crate::ode::{adaptive_step, Step};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CycleError {
    #[error("leaf did not return to the section: {0}")]
    NoReturn(String),
    #[error("closure gap did not contract (last gap {0:e})")]
    NoContraction(f64),
    #[error("trace is not a closure candidate")]
    NotCandidate,
    #[error("cycle sampling failed: {0}")]
    Sampling(String),
}

/// First-return map on the straight section `x₀ + σ m₀` (parameter space),
/// with `m₀` the I-unit complement of the leaf tangent `t₀` at `x₀`.
#[derive(Clone, Debug)]
pub struct ReturnMap<'a> {
    pub tracer: Tracer<'a>,
    pub foliation: Foliation,
    pub base: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub first: FirstForm,
    /// Expected return length, used to bound the search.
    pub length_hint: f64,
}

impl<'a> ReturnMap<'a> {
    pub fn new(tracer: Tracer<'a>, foliation: Foliation, base: [f64; 2], reference: [f64; 2], length_hint: f64) -> Result<Self, CycleError> {
        let tangent = tracer
            .direction(base, foliation, reference)
            .map_err(|e| CycleError::NoReturn(stop_termination(e).name().into()))?;
        let first = tracer
            .first_form(base)
            .ok_or_else(|| CycleError::NoReturn("base point is not an immersion point".into()))?;
        let normal = geometry::complement(&first, tangent);
        Ok(ReturnMap {
            tracer,
            foliation,
            base,
            tangent,
            normal,
            first,
            length_hint,
        })
    }

    pub fn point(&self, sigma: f64) -> [f64; 2] {
        [self.base[0] + sigma * self.normal[0], self.base[1] + sigma * self.normal[1]]
    }

    fn section(&self, y: [f64; 2]) -> f64 {
        let d = self.tracer.surface.domain().delta(self.base, y);
        self.first.inner(d, self.tangent)
    }

    fn coordinate(&self, y: [f64; 2]) -> f64 {
        let d = self.tracer.surface.domain().delta(self.base, y);
        self.first.inner(d, self.normal)
    }

    /// `(π(σ), return length)`.
    pub fn eval(&self, sigma: f64) -> Result<(f64, f64), CycleError> {
        let start = self.point(sigma);
        let fol = self.foliation;
        let ctl = self.tracer.ctl;
        let mut y = start;
        let mut reference = self.tangent;
        let mut s = 0.0;
        let mut h = 0.1 * ctl.h_max;
        let min_len = 0.5 * self.length_hint;
        let max_len = 2.0 * self.length_hint;
        while s < max_len {
            let r = reference;
            let mut f = |p: &[f64; 2]| self.tracer.direction(*p, fol, r);
            let (yn, used) = match adaptive_step(&mut f, &y, h, f64::INFINITY, &ctl) {
                Step::Accepted { y: yn, h: used, h_next } => {
                    h = h_next;
                    (yn, used)
                }
                Step::Failed(e) => return Err(stop_error(e)),
            };
            if s + used > min_len && self.section(y) < 0.0 && self.section(yn) >= 0.0 {
                let (hit, dh) = refine_crossing(&mut f, &y, used, &ctl, &|p| self.section(p));
                return Ok((self.coordinate(hit), s + dh));
            }
            reference = [yn[0] - y[0], yn[1] - y[1]];
            y = yn;
            s += used;
        }
        Err(CycleError::NoReturn(format!("no return within arc length {max_len:.4}")))
    }

    /// Fixed point of the return map by secant iteration from `sigma0`.
    /// Returns `(σ*, length, gap)`.
    pub fn fixed_point(&self, sigma0: f64, tol_cycle: f64) -> Result<(f64, f64, f64), CycleError> {
        let (p0, l0) = self.eval(sigma0)?;
        let mut a = (sigma0, p0 - sigma0);
        if a.1.abs() <= tol_cycle * l0 {
            return Ok((sigma0, l0, a.1.abs()));
        }
        let (p1, l1) = self.eval(p0)?;
        let mut b = (p0, p1 - p0);
        let mut len = l1;
        for _ in 0..40 {
            if b.1.abs() <= tol_cycle * len {
                return Ok((b.0, len, b.1.abs()));
            }
            let denom = b.1 - a.1;
            if denom == 0.0 {
                break;
            }
            let next = b.0 - b.1 * (b.0 - a.0) / denom;
            let (pn, ln) = self.eval(next)?;
            a = b;
            b = (next, pn - next);
            len = ln;
        }
        Err(CycleError::NoContraction(b.1.abs()))
    }

    /// `ln π′(σ)` by central differences at offsets `h`, `h/2` and `h/4`,
    /// combined by Richardson extrapolation. Returns the estimate and the
    /// spread between the two extrapolants.
    pub fn log_derivative(&self, sigma: f64, h: f64) -> Result<(f64, f64), CycleError> {
        let diff = |k: f64| -> Result<f64, CycleError> {
            let (a, _) = self.eval(sigma + k)?;
            let (b, _) = self.eval(sigma - k)?;
            Ok((a - b) / (2.0 * k))
        };
        let mut h = h;
        for _ in 0..8 {
            match (diff(h), diff(0.5 * h), diff(0.25 * h)) {
                (Ok(d1), Ok(d2), Ok(d4)) => {
                    let r1 = (4.0 * d2 - d1) / 3.0;
                    let r2 = (4.0 * d4 - d2) / 3.0;
                    if r1 > 0.0 && r2 > 0.0 {
                        return Ok((r2.ln(), (r2.ln() - r1.ln()).abs()));
                    }
                    return Err(CycleError::NoReturn(format!("return map derivative {r2} is not positive")));
                }
                _ => h *= 0.25,
            }
        }
        Err(CycleError::NoReturn("offset leaves did not return".into()))
    }
}

fn stop_error(s: Stop) -> CycleError {
    CycleError::NoReturn(match s {
        Stop::LeftDomain => "left the domain".into(),
        Stop::Degenerate(m) => m,
    })
}

/// Refines a closure candidate into a cycle basepoint: `(map, σ*, length, gap)`.
pub fn refine_closure<'a>(tracer: &Tracer<'a>, trace: &LeafTrace) -> Result<(ReturnMap<'a>, f64, f64, f64), CycleError> {
    if trace.origin != Origin::Seed || trace.points.len() < 2 {
        return Err(CycleError::NotCandidate);
    }
    let Some(first) = trace.returns.first() else {
        return Err(CycleError::NotCandidate);
    };
    let seed = trace.points[0];
    let reference = linalg_sub2(trace.points[1], seed);
    let map = ReturnMap::new(tracer.clone().precise(), trace.foliation, seed, reference, first.length)?;
    // Start from the latest return: for attracting cycles it is the closest.
    let sigma0 = trace.returns.last().map(|r| r.sigma).unwrap_or(0.0);
    let (sigma, length, gap) = map.fixed_point(sigma0, tracer.tol.tol_cycle)?;
    Ok((map, sigma, length, gap))
}

fn linalg_sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// A point of a cycle at arc length `s`, with its oriented unit tangent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CyclePoint {
    pub s: f64,
    pub uv: [f64; 2],
    pub tangent: [f64; 2],
}

/// Integrates once around the cycle from `start`, landing exactly on the
/// arc lengths `stops` (ascending, within `[0, length]`).
pub fn sample_cycle(map: &ReturnMap<'_>, start: [f64; 2], stops: &[f64]) -> Result<Vec<CyclePoint>, CycleError> {
    let tracer = &map.tracer;
    let fol = map.foliation;
    let ctl = tracer.ctl;
    let mut y = start;
    let mut s = 0.0;
    let mut reference = map.tangent;
    let mut h = 0.1 * ctl.h_max;
    let mut out = Vec::with_capacity(stops.len());
    for &target in stops {
        while target - s > 1e-14 * (1.0 + target) {
            let r = reference;
            let mut f = |p: &[f64; 2]| tracer.direction(*p, fol, r);
            match adaptive_step(&mut f, &y, h, target - s, &ctl) {
                Step::Accepted { y: yn, h: used, h_next } => {
                    reference = [yn[0] - y[0], yn[1] - y[1]];
                    y = yn;
                    s += used;
                    h = h_next;
                }
                Step::Failed(e) => return Err(CycleError::Sampling(stop_termination(e).name().into())),
            }
        }
        let t = tracer
            .direction(y, fol, reference)
            .map_err(|e| CycleError::Sampling(stop_termination(e).name().into()))?;
        reference = t;
        out.push(CyclePoint { s: target, uv: y, tangent: t });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::expr::catalog;
    use crate::foliation::trace_leaf;

    #[test]
    fn torus_return_map_is_the_identity() {
        let s = catalog::product_torus(1.0, 0.5).unwrap();
        let tol = Tolerances::default();
        let tracer = Tracer::new(&s, &tol, &[]);
        let map = ReturnMap::new(tracer.precise(), Foliation::Minimal, [0.3, 0.7], [1.0, 0.0], 2.0 * std::f64::consts::PI).unwrap();
        for sigma in [-0.05, 0.0, 0.02] {
            let (p, len) = map.eval(sigma).unwrap();
            assert!((p - sigma).abs() < 1e-9, "{p} vs {sigma}");
            assert!((len - 2.0 * std::f64::consts::PI).abs() < 1e-8);
        }
        let (ln, err) = map.log_derivative(0.0, 1e-3).unwrap();
        assert!(ln.abs() < 1e-8 && err < 1e-8);
    }

    #[test]
    fn closure_needs_a_seed_with_returns() {
        let s = catalog::by_name("graph_monge(r1=1, t1=-1, w=0.5)").unwrap();
        let tol = Tolerances::default();
        let tracer = Tracer::new(&s, &tol, &[]);
        let tr = trace_leaf(&s, [0.1, 0.1], Foliation::Minimal, 1.0, &tol, &[]);
        assert!(tr.returns.is_empty());
        assert_eq!(refine_closure(&tracer, &tr).unwrap_err(), CycleError::NotCandidate);
    }

    #[test]
    fn samples_land_on_requested_arc_lengths() {
        let s = catalog::product_torus(1.0, 0.5).unwrap();
        let tol = Tolerances::default();
        let tracer = Tracer::new(&s, &tol, &[]);
        let map = ReturnMap::new(tracer, Foliation::Maximal, [0.3, 0.7], [0.0, 1.0], std::f64::consts::PI).unwrap();
        let pts = sample_cycle(&map, [0.3, 0.7], &[0.0, 0.25, 1.0]).unwrap();
        for p in &pts {
            // Maximal leaves are the v-circles of radius 0.5.
            assert!((p.uv[1] - (0.7 + 2.0 * p.s)).abs() < 1e-9);
            assert!((p.uv[0] - 0.3).abs() < 1e-12);
        }
    }
}
