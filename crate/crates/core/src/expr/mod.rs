//! Immersion definitions and their order-4 jets.

mod ast;
pub mod catalog;
mod parser;

use std::fmt::Write as _;

use thiserror::Error;

pub use ast::{BinOp, Expr, Func, Param};
pub use parser::{parse, ParsedDomain, ParsedSurface};

use crate::jet::{Jet, JetVec4, MAX_ORDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("`{func}` takes {expected} argument(s), found {found} at {line}:{col}")]
    Arity {
        func: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid surface: {0}")]
    Surface(String),
    #[error("point ({u}, {v}) lies outside the parameter domain")]
    OutOfDomain { u: f64, v: f64 },
    #[error("not an immersion at ({u}, {v}): tangent vectors are dependent")]
    NonImmersion { u: f64, v: f64 },
    #[error("unknown catalog surface `{0}`")]
    UnknownCatalog(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, periodic: bool) -> Result<Axis, ExprError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(ExprError::Domain("interval bounds must be finite".into()));
        }
        if lo >= hi {
            return Err(ExprError::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Axis { lo, hi, periodic })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn wrap(&self, x: f64) -> Option<f64> {
        if self.periodic {
            Some(self.lo + (x - self.lo).rem_euclid(self.len()))
        } else {
            let slack = 1e-12 * self.len();
            (x >= self.lo - slack && x <= self.hi + slack).then_some(x)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub u: Axis,
    pub v: Axis,
}

impl Domain {
    /// Periodic wrapping; `None` outside a non-periodic axis.
    pub fn wrap(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        Some([self.u.wrap(p[0])?, self.v.wrap(p[1])?])
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.wrap(p).is_some()
    }

    /// Shortest parameter displacement from `a` to `b`, accounting for
    /// periodic axes.
    pub fn delta(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let d = |ax: &Axis, x: f64| {
            if ax.periodic {
                let l = ax.len();
                (x + 0.5 * l).rem_euclid(l) - 0.5 * l
            } else {
                x
            }
        };
        [d(&self.u, b[0] - a[0]), d(&self.v, b[1] - a[1])]
    }

    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = self.delta(a, b);
        d[0].hypot(d[1])
    }

    pub fn diameter(&self) -> f64 {
        self.u.len().hypot(self.v.len())
    }
}

/// Taylor jets of the four components of an immersion at a parameter point.
#[derive(Clone, Copy, Debug)]
pub struct Jet4 {
    pub base: [f64; 2],
    pub comps: JetVec4,
}

impl Jet4 {
    pub fn point(&self) -> [f64; 4] {
        self.comps.map(|c| c.value())
    }

    /// `∂^{i+j} α / ∂u^i ∂v^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> [f64; 4] {
        self.comps.map(|c| c.partial(i, j))
    }

    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    /// Copy truncated at `order`.
    pub fn truncated(&self, order: usize) -> Jet4 {
        Jet4 {
            base: self.base,
            comps: self.comps.map(|c| c.truncate(order)),
        }
    }
}

/// A parametrized surface `(u, v) ↦ (x1, .., xn)` with `n` = 3 or 4.
#[derive(Clone, Debug)]
pub struct SurfaceDef {
    consts: Vec<(String, f64)>,
    lets: Vec<(String, Expr)>,
    components: Vec<Expr>,
    domain: Domain,
    compiled_lets: Vec<Expr>,
    compiled: Vec<Expr>,
}

impl SurfaceDef {
    /// Builds a surface from unresolved expression trees. Every name must be a
    /// constant or a previously defined local.
    pub fn new(
        consts: Vec<(String, f64)>,
        lets: Vec<(String, Expr)>,
        components: Vec<Expr>,
        domain: Domain,
    ) -> Result<SurfaceDef, ExprError> {
        Self::build(consts, lets, components, domain, &[])
    }

    fn build(
        consts: Vec<(String, f64)>,
        lets: Vec<(String, Expr)>,
        components: Vec<Expr>,
        domain: Domain,
        positions: &[(String, usize, usize)],
    ) -> Result<SurfaceDef, ExprError> {
        if components.len() != 3 && components.len() != 4 {
            return Err(ExprError::Surface(format!(
                "expected 3 or 4 components, found {}",
                components.len()
            )));
        }
        let unknown = |name: &str| {
            let (line, col) = positions
                .iter()
                .find(|(n, _, _)| n == name)
                .map(|(_, l, c)| (*l, *c))
                .unwrap_or((0, 0));
            ExprError::UnknownIdentifier {
                name: name.to_string(),
                line,
                col,
            }
        };
        let mut compiled_lets = Vec::with_capacity(lets.len());
        for (k, (_, e)) in lets.iter().enumerate() {
            let lookup = |n: &str| {
                if let Some((_, x)) = consts.iter().find(|(c, _)| c == n) {
                    return Some(Expr::Num(*x));
                }
                lets[..k].iter().rposition(|(l, _)| l == n).map(Expr::Slot)
            };
            let r = e.resolve(&lookup);
            check_resolved(&r, &unknown)?;
            compiled_lets.push(r);
        }
        let lookup = |n: &str| {
            if let Some(k) = lets.iter().rposition(|(l, _)| l == n) {
                return Some(Expr::Slot(k));
            }
            consts.iter().find(|(c, _)| c == n).map(|(_, x)| Expr::Num(*x))
        };
        let mut compiled = Vec::with_capacity(components.len());
        for e in &components {
            let r = e.resolve(&lookup);
            check_resolved(&r, &unknown)?;
            compiled.push(r);
        }
        Ok(SurfaceDef {
            consts,
            lets,
            components,
            domain,
            compiled_lets,
            compiled,
        })
    }

    /// Parses the text format described in [`parser`].
    pub fn parse(src: &str) -> Result<SurfaceDef, ExprError> {
        let p = parse(src)?;
        Self::from_parsed(p)
    }

    pub fn from_parsed(p: ParsedSurface) -> Result<SurfaceDef, ExprError> {
        let unknown = |name: &str| {
            let (line, col) = p
                .name_positions
                .iter()
                .find(|(n, _, _)| n == name)
                .map(|(_, l, c)| (*l, *c))
                .unwrap_or((0, 0));
            ExprError::UnknownIdentifier {
                name: name.to_string(),
                line,
                col,
            }
        };
        let mut consts: Vec<(String, f64)> = Vec::new();
        for (name, e) in &p.consts {
            let r = e.resolve(&|n: &str| consts.iter().find(|(c, _)| c == n).map(|(_, x)| Expr::Num(*x)));
            check_resolved(&r, &unknown)?;
            let value = r
                .eval_const()
                .ok_or_else(|| ExprError::Surface(format!("constant `{name}` depends on u or v")))?;
            consts.push((name.clone(), value));
        }
        let const_value = |e: &Expr| -> Result<f64, ExprError> {
            let r = e.resolve(&|n: &str| consts.iter().find(|(c, _)| c == n).map(|(_, x)| Expr::Num(*x)));
            check_resolved(&r, &unknown)?;
            r.eval_const()
                .ok_or_else(|| ExprError::Domain("interval bounds must be constant".into()))
        };
        let dom = p
            .domain
            .as_ref()
            .ok_or_else(|| ExprError::Domain("missing `domain` statement".into()))?;
        let domain = Domain {
            u: Axis::new(const_value(&dom.u.0)?, const_value(&dom.u.1)?, dom.u.2)?,
            v: Axis::new(const_value(&dom.v.0)?, const_value(&dom.v.1)?, dom.v.2)?,
        };
        let mut comps = p.components.clone();
        comps.sort_by_key(|(k, _)| *k);
        let n = comps.len();
        if !(3..=4).contains(&n) || comps.iter().enumerate().any(|(i, (k, _))| *k != i + 1) {
            return Err(ExprError::Surface(
                "components must be x1, x2, x3 and optionally x4".into(),
            ));
        }
        Self::build(
            consts,
            p.lets.clone(),
            comps.into_iter().map(|(_, e)| e).collect(),
            domain,
            &p.name_positions,
        )
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn lets(&self) -> &[(String, Expr)] {
        &self.lets
    }

    pub fn consts(&self) -> &[(String, f64)] {
        &self.consts
    }

    /// Same surface with a different parameter domain.
    pub fn with_domain(&self, domain: Domain) -> SurfaceDef {
        let mut s = self.clone();
        s.domain = domain;
        s
    }

    /// Image under the linear map `m` of R⁴.
    pub fn mapped(&self, m: &[[f64; 4]; 4]) -> Result<SurfaceDef, ExprError> {
        if self.dim() != 4 {
            return Err(ExprError::Surface("linear maps act on surfaces in R^4".into()));
        }
        let mut lets = self.lets.clone();
        let names: Vec<String> = (0..4).map(|i| format!("map{}_x{}", self.lets.len(), i + 1)).collect();
        for (n, e) in names.iter().zip(&self.components) {
            lets.push((n.clone(), e.clone()));
        }
        let comps = m
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&names)
                    .map(|(c, n)| Expr::num(*c) * Expr::name(n))
                    .reduce(|a, b| a + b)
                    .expect("four terms")
            })
            .collect();
        SurfaceDef::new(self.consts.clone(), lets, comps, self.domain)
    }

    /// Same immersion in new parameters `(s, t)` with
    /// `(u, v) = origin + m (s, t)`, on `domain`.
    pub fn affine_reparametrized(&self, origin: [f64; 2], m: [[f64; 2]; 2], domain: Domain) -> Result<SurfaceDef, ExprError> {
        let row = |k: usize| Expr::num(origin[k]) + Expr::num(m[k][0]) * Expr::u() + Expr::num(m[k][1]) * Expr::v();
        let (nu, nv) = (row(0), row(1));
        let lets = self.lets.iter().map(|(n, e)| (n.clone(), e.substitute_params(&nu, &nv))).collect();
        let comps = self.components.iter().map(|e| e.substitute_params(&nu, &nv)).collect();
        SurfaceDef::new(self.consts.clone(), lets, comps, domain)
    }

    /// Adds `extra[i]` (in `u`, `v` and the surface's names) to component `i`.
    pub fn perturbed(&self, extra: &[Expr]) -> Result<SurfaceDef, ExprError> {
        if extra.len() != self.dim() {
            return Err(ExprError::Surface(format!("expected {} perturbation terms", self.dim())));
        }
        let comps = self.components.iter().zip(extra).map(|(a, b)| a.clone() + b.clone()).collect();
        SurfaceDef::new(self.consts.clone(), self.lets.clone(), comps, self.domain)
    }

    /// Evaluates all components on jets of the given order. No domain checks.
    pub fn eval_jets(&self, p: [f64; 2], order: usize) -> Vec<Jet> {
        let u = Jet::var_u(p[0]).truncate(order);
        let v = Jet::var_v(p[1]).truncate(order);
        let mut slots = Vec::with_capacity(self.compiled_lets.len());
        for e in &self.compiled_lets {
            let j = e.eval_jet(&u, &v, &slots);
            slots.push(j);
        }
        self.compiled.iter().map(|e| e.eval_jet(&u, &v, &slots)).collect()
    }

    /// Image point of a parameter point (after wrapping).
    pub fn eval(&self, p: [f64; 2]) -> Result<Vec<f64>, ExprError> {
        let q = self
            .domain
            .wrap(p)
            .ok_or(ExprError::OutOfDomain { u: p[0], v: p[1] })?;
        Ok(self.eval_jets(q, 0).iter().map(Jet::value).collect())
    }

    /// Order-4 jet of an immersion into R⁴.
    pub fn jet_at(&self, p: [f64; 2]) -> Result<Jet4, ExprError> {
        self.jet_at_order(p, MAX_ORDER)
    }

    /// Jet truncated at `order` (≥ 1). Lower orders are cheaper; order 2 is
    /// enough for the line fields, order 4 for their linearization.
    pub fn jet_at_order(&self, p: [f64; 2], order: usize) -> Result<Jet4, ExprError> {
        if self.dim() != 4 {
            return Err(ExprError::Surface("jets require an immersion into R^4".into()));
        }
        let q = self
            .domain
            .wrap(p)
            .ok_or(ExprError::OutOfDomain { u: p[0], v: p[1] })?;
        let c = self.eval_jets(q, order.clamp(1, MAX_ORDER));
        let jet = Jet4 {
            base: q,
            comps: [c[0], c[1], c[2], c[3]],
        };
        let au = jet.partial(1, 0);
        let av = jet.partial(0, 1);
        let e: f64 = au.iter().map(|x| x * x).sum();
        let g: f64 = av.iter().map(|x| x * x).sum();
        let f: f64 = au.iter().zip(&av).map(|(a, b)| a * b).sum();
        let det = e * g - f * f;
        if !(det > 1e-24 * (e * g).max(f64::MIN_POSITIVE)) || !det.is_finite() {
            return Err(ExprError::NonImmersion { u: q[0], v: q[1] });
        }
        Ok(jet)
    }

    /// Text form accepted by [`SurfaceDef::parse`].
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        for (n, x) in &self.consts {
            let _ = writeln!(s, "const {n} = {x:?};");
        }
        for (n, e) in &self.lets {
            let _ = writeln!(s, "let {n} = {e};");
        }
        for (k, e) in self.components.iter().enumerate() {
            let _ = writeln!(s, "x{} = {e};", k + 1);
        }
        let axis = |name: &str, a: &Axis| {
            format!(
                "{name} in [{:?}, {:?}]{}",
                a.lo,
                a.hi,
                if a.periodic { " periodic" } else { "" }
            )
        };
        let _ = writeln!(s, "domain {}, {}", axis("u", &self.domain.u), axis("v", &self.domain.v));
        s
    }
}

fn check_resolved(e: &Expr, unknown: &impl Fn(&str) -> ExprError) -> Result<(), ExprError> {
    let mut first: Option<&str> = None;
    e.for_each_name(&mut |n| {
        if first.is_none() {
            first = Some(n);
        }
    });
    match first {
        Some(n) => Err(unknown(n)),
        None => Ok(()),
    }
}

/// Composes a surface in R³ with inverse stereographic projection onto the
/// unit sphere `S³ ⊂ R⁴`, projecting from the pole `(0, 0, 0, 1)`:
/// `x ↦ (2x, |x|² − 1) / (|x|² + 1)`. The origin goes to `(0, 0, 0, −1)`.
pub fn lift_stereographic(surface3: &SurfaceDef) -> Result<SurfaceDef, ExprError> {
    if surface3.dim() != 3 {
        return Err(ExprError::Surface(
            "stereographic lift expects a surface in R^3".into(),
        ));
    }
    let mut lets = surface3.lets.clone();
    let names = ["lift_x1", "lift_x2", "lift_x3"];
    for (n, e) in names.iter().zip(&surface3.components) {
        lets.push((n.to_string(), e.clone()));
    }
    let sq = |n: &str| Expr::name(n) * Expr::name(n);
    lets.push(("lift_s".into(), sq(names[0]) + sq(names[1]) + sq(names[2])));
    let denom = || Expr::num(1.0) + Expr::name("lift_s");
    let mut comps: Vec<Expr> = names
        .iter()
        .map(|n| Expr::num(2.0) * Expr::name(n) / denom())
        .collect();
    comps.push((Expr::name("lift_s") - Expr::num(1.0)) / denom());
    SurfaceDef::new(surface3.consts.clone(), lets, comps, surface3.domain)
}
