//! Reference surfaces addressable by name.
//!
//! | name | arguments |
//! |------|-----------|
//! | `plane` | |
//! | `clifford_torus` | |
//! | `product_torus` | `a, b` radii |
//! | `graph_monge` | `r1 s1 t1 a1 b1 c1 d1 r2 s2 t2 a2 b2 c2 d2` (keyword, default 0), `w` half-width |
//! | `ellipsoid` (R³) | `a, b, c` semi-axes |
//! | `lifted_ellipsoid` | `a, b, c` semi-axes, `scale` homothety before lifting (default 0.25) |
//! | `lifted_plane` | `w` half-width |
//! | `twisted_band` | `R, n, K0, K1, a, b, w` |
//! | `elliptic_band` (R³) / `lifted_elliptic_band` | `A, B, K0, K1, a, w` |

use super::{lift_stereographic, parse, ExprError, SurfaceDef};

/// Names of the Monge coefficients, in the order used by `graph_monge`.
pub const MONGE_KEYS: [&str; 14] = [
    "r1", "s1", "t1", "a1", "b1", "c1", "d1", "r2", "s2", "t2", "a2", "b2", "c2", "d2",
];

pub fn plane() -> SurfaceDef {
    SurfaceDef::parse("x1=u; x2=v; x3=0; x4=0; domain u in [-1,1], v in [-1,1]").unwrap()
}

pub fn clifford_torus() -> SurfaceDef {
    SurfaceDef::parse(
        "const s2=sqrt(2)\n\
         x1=cos(u)/s2; x2=sin(u)/s2; x3=cos(v)/s2; x4=sin(v)/s2\n\
         domain periodic u in [0,2*pi], v in [0,2*pi]",
    )
    .unwrap()
}

/// `(a cos u, a sin u, b cos v, b sin v)`. With `a = b` it is the Clifford
/// torus, on which every point is umbilic.
pub fn product_torus(a: f64, b: f64) -> Result<SurfaceDef, ExprError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(ExprError::Surface("product_torus radii must be positive".into()));
    }
    SurfaceDef::parse(&format!(
        "const a={a:?}; const b={b:?}\n\
         x1=a*cos(u); x2=a*sin(u); x3=b*cos(v); x4=b*sin(v)\n\
         domain periodic u in [0,2*pi], v in [0,2*pi]"
    ))
}

fn monge_poly(c: &[f64]) -> String {
    let [r, s, t, a, b, cc, d] = [c[0], c[1], c[2], c[3], c[4], c[5], c[6]];
    format!(
        "{r:?}/2*u^2 + {s:?}*u*v + {t:?}/2*v^2 + {a:?}/6*u^3 + {d:?}/2*u^2*v + {b:?}/2*u*v^2 + {cc:?}/6*v^3"
    )
}

/// Graph `(u, v, h1, h2)` with the cubic Monge polynomials
/// `h = r/2 u² + s uv + t/2 v² + a/6 u³ + d/2 u²v + b/2 uv² + c/6 v³`.
/// `coeffs` follows [`MONGE_KEYS`]. Optional `quartic` terms are added to
/// `h1` and `h2` verbatim (in `u`, `v`).
pub fn graph_monge(coeffs: &[f64; 14], half_width: f64, quartic: Option<(&str, &str)>) -> SurfaceDef {
    let h1 = monge_poly(&coeffs[..7]);
    let h2 = monge_poly(&coeffs[7..]);
    let (q1, q2) = quartic.unwrap_or(("0", "0"));
    let src = format!(
        "x1 = u; x2 = v\nx3 = {h1} + {q1}\nx4 = {h2} + {q2}\ndomain u in [{w:?}, {hw:?}], v in [{w:?}, {hw:?}]",
        w = -half_width,
        hw = half_width
    );
    SurfaceDef::parse(&src).expect("generated Monge source parses")
}

/// Triaxial ellipsoid in R³, chart with poles on the `y` axis:
/// `(a cos v cos u, b sin v, c cos v sin u)`, `u` periodic.
pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<SurfaceDef, ExprError> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(ExprError::Surface("ellipsoid semi-axes must be positive".into()));
    }
    SurfaceDef::parse(&format!(
        "const a={a:?}; const b={b:?}; const c={c:?}\n\
         x1 = a*cos(v)*cos(u); x2 = b*sin(v); x3 = c*cos(v)*sin(u)\n\
         domain u in [0, 2*pi] periodic, v in [-1.35, 1.35]"
    ))
}

/// Default homothety applied before lifting an ellipsoid.
pub const LIFT_SCALE: f64 = 0.25;

/// Stereographic lift of the ellipsoid with semi-axes `a, b, c` shrunk by
/// `scale`. The homothety changes nothing in R³, but it keeps the lifted
/// surface away from the curve where its mean curvature inside `S³` vanishes;
/// every point of that curve would be an umbilic singularity of the lift.
pub fn lifted_ellipsoid_scaled(a: f64, b: f64, c: f64, scale: f64) -> Result<SurfaceDef, ExprError> {
    if !(scale > 0.0) {
        return Err(ExprError::Surface("lift scale must be positive".into()));
    }
    lift_stereographic(&ellipsoid(a * scale, b * scale, c * scale)?)
}

pub fn lifted_ellipsoid(a: f64, b: f64, c: f64) -> Result<SurfaceDef, ExprError> {
    lifted_ellipsoid_scaled(a, b, c, LIFT_SCALE)
}

/// Lift of a plane patch: a piece of a round 2-sphere inside `S³`, where every
/// point is umbilic.
pub fn lifted_plane(half_width: f64) -> Result<SurfaceDef, ExprError> {
    let s3 = SurfaceDef::parse(&format!(
        "x1=u; x2=v; x3=0; domain u in [{:?},{:?}], v in [{:?},{:?}]",
        -half_width, half_width, -half_width, half_width
    ))?;
    lift_stereographic(&s3)
}

/// Band around the circle of radius `R` in the `x1 x2` plane, swept by a
/// transversal that turns `n` times in the `x3 x4` plane:
///
/// `c(u) + v T(u) + (K(u) v²/2 + a v³/6) N(u) + (b v³/6) B(u)` with
/// `T = (0, 0, cos nu, sin nu)`, `N = −(cos u, sin u, 0, 0)`,
/// `B = (0, 0, −sin nu, cos nu)` and `K(u) = K0 + K1 cos u`.
///
/// The core circle `v = 0` is a minimal principal mean cycle when
/// `K(u) > 1/R`, with mean-normal torsion `τ = n/R`.
pub fn twisted_band(r: f64, n: i32, k0: f64, k1: f64, a: f64, b: f64, w: f64) -> Result<SurfaceDef, ExprError> {
    twisted_band_profile(r, n, k0, k1, a, &format!("{b:?}"), w)
}

/// [`twisted_band`] with the `B` coefficient given as an expression in `u`.
pub fn twisted_band_profile(r: f64, n: i32, k0: f64, k1: f64, a: f64, b: &str, w: f64) -> Result<SurfaceDef, ExprError> {
    if !(r > 0.0) || !(k0 - k1.abs() > 1.0 / r) {
        return Err(ExprError::Surface(
            "twisted_band needs R > 0 and K0 - |K1| > 1/R".into(),
        ));
    }
    SurfaceDef::parse(&format!(
        "const R={r:?}; const n={n}; const K0={k0:?}; const K1={k1:?}; const a={a:?}\n\
         let K = K0 + K1*cos(u)\n\
         let pn = K*v^2/2 + a*v^3/6\n\
         let pb = ({b})*v^3/6\n\
         x1 = (R - pn)*cos(u)\n\
         x2 = (R - pn)*sin(u)\n\
         x3 = v*cos(n*u) - pb*sin(n*u)\n\
         x4 = v*sin(n*u) + pb*cos(n*u)\n\
         domain u in [0, 2*pi] periodic, v in [{:?}, {:?}]",
        -w, w
    ))
}

/// Band in R³ around the ellipse `(A cos u, B sin u, 0)`:
/// `c(u) + v e3 + (K(u) v²/2 + a v³/6) N(u)` with `N` the inward unit normal of
/// the ellipse and `K(u) = K0 + K1 sin 2u`. The ellipse is a principal line
/// with varying curvature.
pub fn elliptic_band(big_a: f64, big_b: f64, k0: f64, k1: f64, a: f64, w: f64) -> Result<SurfaceDef, ExprError> {
    if !(big_a > 0.0 && big_b > 0.0) {
        return Err(ExprError::Surface("elliptic_band needs positive semi-axes".into()));
    }
    let kmax = (big_a / (big_b * big_b)).max(big_b / (big_a * big_a));
    if !(k0 - k1.abs() > kmax) {
        return Err(ExprError::Surface(
            "elliptic_band needs K0 - |K1| above the ellipse curvature".into(),
        ));
    }
    SurfaceDef::parse(&format!(
        "const A={big_a:?}; const B={big_b:?}; const K0={k0:?}; const K1={k1:?}; const a={a:?}\n\
         let K = K0 + K1*sin(2*u)\n\
         let wn = sqrt(B^2*cos(u)^2 + A^2*sin(u)^2)\n\
         let pn = (K*v^2/2 + a*v^3/6)/wn\n\
         x1 = A*cos(u) - pn*B*cos(u)\n\
         x2 = B*sin(u) - pn*A*sin(u)\n\
         x3 = v\n\
         domain u in [0, 2*pi] periodic, v in [{:?}, {:?}]",
        -w, w
    ))
}

pub fn lifted_elliptic_band(big_a: f64, big_b: f64, k0: f64, k1: f64, a: f64, w: f64) -> Result<SurfaceDef, ExprError> {
    lift_stereographic(&elliptic_band(big_a, big_b, k0, k1, a, w)?)
}

fn eval_arg(text: &str) -> Result<f64, ExprError> {
    let p = parse(&format!("const arg = {text}"))?;
    let e = &p.consts[0].1;
    e.eval_const()
        .ok_or_else(|| ExprError::Surface(format!("catalog argument `{text}` is not a number")))
}

struct Args {
    positional: Vec<f64>,
    named: Vec<(String, f64)>,
}

impl Args {
    fn get(&self, pos: usize, name: &str, default: f64) -> f64 {
        self.named
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, x)| *x)
            .or_else(|| self.positional.get(pos).copied())
            .unwrap_or(default)
    }
}

fn parse_args(s: &str) -> Result<Args, ExprError> {
    let mut args = Args {
        positional: Vec::new(),
        named: Vec::new(),
    };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) => args.named.push((k.trim().to_string(), eval_arg(v)?)),
            None => args.positional.push(eval_arg(part)?),
        }
    }
    Ok(args)
}

/// Looks up a catalog entry such as `lifted_ellipsoid(1, 1.2, 1.5)` or
/// `graph_monge(r1=1, t1=-1, s1=0.5)`.
pub fn by_name(spec: &str) -> Result<SurfaceDef, ExprError> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(i) => {
            let inner = spec[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| ExprError::UnknownCatalog(spec.to_string()))?;
            (&spec[..i], parse_args(inner)?)
        }
        None => (spec, parse_args("")?),
    };
    match name.trim() {
        "plane" => Ok(plane()),
        "clifford_torus" => Ok(clifford_torus()),
        "product_torus" => product_torus(args.get(0, "a", 1.0), args.get(1, "b", 0.5)),
        "graph_monge" => {
            let mut c = [0.0; 14];
            for (k, key) in MONGE_KEYS.iter().enumerate() {
                c[k] = args.get(usize::MAX, key, 0.0);
            }
            Ok(graph_monge(&c, args.get(usize::MAX, "w", 1.0), None))
        }
        "ellipsoid" => ellipsoid(args.get(0, "a", 1.0), args.get(1, "b", 1.2), args.get(2, "c", 1.5)),
        "lifted_ellipsoid" => lifted_ellipsoid_scaled(
            args.get(0, "a", 1.0),
            args.get(1, "b", 1.2),
            args.get(2, "c", 1.5),
            args.get(3, "scale", LIFT_SCALE),
        ),
        "lifted_plane" => lifted_plane(args.get(0, "w", 0.5)),
        "twisted_band" => twisted_band(
            args.get(0, "R", 1.0),
            args.get(1, "n", 1.0).round() as i32,
            args.get(2, "K0", 2.0),
            args.get(3, "K1", 0.0),
            args.get(4, "a", 0.0),
            args.get(5, "b", 0.3),
            args.get(6, "w", 0.3),
        ),
        "elliptic_band" => elliptic_band(
            args.get(0, "A", 1.2),
            args.get(1, "B", 1.0),
            args.get(2, "K0", 2.5),
            args.get(3, "K1", 0.5),
            args.get(4, "a", 0.0),
            args.get(5, "w", 0.25),
        ),
        "lifted_elliptic_band" => lifted_elliptic_band(
            args.get(0, "A", 1.2),
            args.get(1, "B", 1.0),
            args.get(2, "K0", 2.5),
            args.get(3, "K1", 0.5),
            args.get(4, "a", 0.0),
            args.get(5, "w", 0.25),
        ),
        _ => Err(ExprError::UnknownCatalog(spec.to_string())),
    }
}
