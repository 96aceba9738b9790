//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a scalar function of the chart
//! parameters `(u, v)` around a base point, up to total degree 4. Arithmetic on
//! jets is exact polynomial arithmetic modulo monomials of degree > `order`, so
//! evaluating an expression tree on the two coordinate jets yields every
//! partial derivative up to order 4 without differencing.
//!
//! The coefficient of `du^i dv^j` equals `∂^{i+j} f / ∂u^i ∂v^j` divided by
//! `i! j!`.
//!
//! Each jet records the highest degree whose coefficients are valid. Taking a
//! partial derivative lowers it by one, and every binary operation keeps the
//! smaller of its operands' orders, so coefficients above `order()` are never
//! read by accident.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Maximum total degree carried by a jet.
pub const MAX_ORDER: usize = 4;
/// Number of monomials of total degree ≤ [`MAX_ORDER`].
pub const NCOEF: usize = 15;

/// Flat index of the monomial `du^i dv^j`.
#[inline]
pub const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Inverse of [`index`]: exponents `(i, j)` of the `k`-th monomial.
pub const MONOMIALS: [(usize, usize); NCOEF] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[inline]
const fn first_of_degree(d: usize) -> usize {
    d * (d + 1) / 2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; NCOEF],
    order: u8,
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl Jet {
    /// A constant. Constants are exact at every order.
    pub fn constant(value: f64) -> Self {
        let mut c = [0.0; NCOEF];
        c[0] = value;
        Jet {
            c,
            order: MAX_ORDER as u8,
        }
    }

    /// The coordinate function `u` around `u0`.
    pub fn var_u(u0: f64) -> Self {
        let mut j = Jet::constant(u0);
        j.c[1] = 1.0;
        j
    }

    /// The coordinate function `v` around `v0`.
    pub fn var_v(v0: f64) -> Self {
        let mut j = Jet::constant(v0);
        j.c[2] = 1.0;
        j
    }

    /// Builds a jet from raw coefficients in [`MONOMIALS`] order.
    pub fn from_coeffs(c: [f64; NCOEF], order: usize) -> Self {
        let mut j = Jet {
            c,
            order: order.min(MAX_ORDER) as u8,
        };
        j.clear_above_order();
        j
    }

    fn clear_above_order(&mut self) {
        for k in first_of_degree(self.order as usize + 1).min(NCOEF)..NCOEF {
            self.c[k] = 0.0;
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64; NCOEF] {
        &self.c
    }

    /// Taylor coefficient of `du^i dv^j`.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i + j <= self.order(), "coefficient above jet order");
        self.c[index(i, j)]
    }

    /// Partial derivative `∂^{i+j} / ∂u^i ∂v^j` at the base point.
    #[inline]
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * FACT[i] * FACT[j]
    }

    /// First partials `(f_u, f_v)` at the base point.
    #[inline]
    pub fn gradient(&self) -> [f64; 2] {
        [self.c[1], self.c[2]]
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut j = *self;
        j.order = j.order.min(order as u8);
        j.clear_above_order();
        j
    }

    /// The jet of `∂f/∂u`, valid to one order less.
    pub fn d_du(&self) -> Self {
        let order = self.order().saturating_sub(1);
        let mut c = [0.0; NCOEF];
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            if i + j > order {
                break;
            }
            c[k] = (i + 1) as f64 * self.c[index(i + 1, j)];
        }
        Jet {
            c,
            order: order as u8,
        }
    }

    /// The jet of `∂f/∂v`, valid to one order less.
    pub fn d_dv(&self) -> Self {
        let order = self.order().saturating_sub(1);
        let mut c = [0.0; NCOEF];
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            if i + j > order {
                break;
            }
            c[k] = (j + 1) as f64 * self.c[index(i, j + 1)];
        }
        Jet {
            c,
            order: order as u8,
        }
    }

    /// The same function with the roles of `u` and `v` exchanged.
    pub fn swap_uv(&self) -> Self {
        let mut c = [0.0; NCOEF];
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            c[index(j, i)] = self.c[k];
        }
        Jet { c, order: self.order }
    }

    /// Derivative along the parameter-space direction `(du, dv)`.
    pub fn directional(&self, dir: [f64; 2]) -> Self {
        self.d_du() * dir[0] + self.d_dv() * dir[1]
    }

    /// Evaluates the Taylor polynomial at an offset from the base point.
    pub fn eval(&self, du: f64, dv: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            if i + j > self.order() {
                break;
            }
            acc += self.c[k] * du.powi(i as i32) * dv.powi(j as i32);
        }
        acc
    }

    /// Substitutes `du := s_u`, `dv := s_v`, where both substitutes have zero
    /// constant term. The result is the Taylor jet of the composition.
    pub fn compose(&self, s_u: &Jet, s_v: &Jet) -> Jet {
        debug_assert!(s_u.value().abs() < 1e-300 && s_v.value().abs() < 1e-300);
        let order = self.order().min(s_u.order()).min(s_v.order());
        let mut pu = [Jet::constant(1.0); MAX_ORDER + 1];
        let mut pv = [Jet::constant(1.0); MAX_ORDER + 1];
        for k in 1..=order {
            pu[k] = (pu[k - 1] * *s_u).truncate(order);
            pv[k] = (pv[k - 1] * *s_v).truncate(order);
        }
        let mut acc = Jet::constant(0.0).truncate(order);
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            if i + j > order {
                break;
            }
            if self.c[k] != 0.0 {
                acc += (pu[i] * pv[j]) * self.c[k];
            }
        }
        acc.truncate(order)
    }

    /// Applies a univariate function given its derivatives `[f, f', .., f'''']`
    /// at the jet's value.
    fn apply(&self, derivs: [f64; 5]) -> Jet {
        let order = self.order();
        let mut h = *self;
        h.c[0] = 0.0;
        let mut acc = Jet::constant(derivs[order] / FACT[order]).truncate(order);
        for k in (0..order).rev() {
            acc = acc * h;
            acc.c[0] += derivs[k] / FACT[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let x = self.value();
        let r = 1.0 / x;
        let r2 = r * r;
        self.apply([r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2, 24.0 * r2 * r2 * r])
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    /// `self^p` for a real exponent. The base must be positive unless `p` is
    /// an integer.
    pub fn powf(&self, p: f64) -> Jet {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let x = self.value();
        let mut d = [0.0; 5];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef * x.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.apply(d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Jet::constant(1.0).truncate(self.order());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    /// `self^exponent` for a jet-valued exponent.
    pub fn pow(&self, exponent: &Jet) -> Jet {
        if exponent.is_constant() {
            self.powf(exponent.value()).truncate(exponent.order())
        } else {
            (*exponent * self.ln()).exp()
        }
    }

    /// True when every non-constant coefficient is zero.
    pub fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&x| x == 0.0)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.apply([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.apply([c, -s, -c, s, c])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.apply([e; 5])
    }

    pub fn ln(&self) -> Jet {
        let x = self.value();
        let r = 1.0 / x;
        self.apply([x.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn atan(&self) -> Jet {
        let x = self.value();
        let w = 1.0 / (1.0 + x * x);
        self.apply([
            x.atan(),
            w,
            -2.0 * x * w * w,
            (6.0 * x * x - 2.0) * w * w * w,
            24.0 * x * (1.0 - x * x) * w * w * w * w,
        ])
    }

    /// Largest coefficient magnitude, used for scale-aware tolerances.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; NCOEF];
        for k in 0..first_of_degree(order as usize + 1) {
            c[k] = self.c[k] + rhs.c[k];
        }
        Jet { c, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; NCOEF];
        for k in 0..first_of_degree(order as usize + 1) {
            c[k] = self.c[k] - rhs.c[k];
        }
        Jet { c, order }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order) as usize;
        let mut c = [0.0; NCOEF];
        for da in 0..=order {
            for a in first_of_degree(da)..first_of_degree(da + 1) {
                let xa = self.c[a];
                if xa == 0.0 {
                    continue;
                }
                let (ia, ja) = MONOMIALS[a];
                for db in 0..=(order - da) {
                    for b in first_of_degree(db)..first_of_degree(db + 1) {
                        let (ib, jb) = MONOMIALS[b];
                        c[index(ia + ib, ja + jb)] += xa * rhs.c[b];
                    }
                }
            }
        }
        Jet {
            c,
            order: order as u8,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for x in self.c.iter_mut() {
            *x = -*x;
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for x in self.c.iter_mut() {
            *x *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

/// A point of R⁴ whose coordinates are jets.
pub type JetVec4 = [Jet; 4];

pub fn dot4(a: &JetVec4, b: &JetVec4) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn scale4(a: &JetVec4, s: Jet) -> JetVec4 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn sub4(a: &JetVec4, b: &JetVec4) -> JetVec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn add4(a: &JetVec4, b: &JetVec4) -> JetVec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn values4(a: &JetVec4) -> [f64; 4] {
    [a[0].value(), a[1].value(), a[2].value(), a[3].value()]
}

/// Generalized cross product `a ∧ b ∧ c` in R⁴: the vector `x` with
/// `⟨x, w⟩ = det[a, b, c, w]` for all `w`.
pub fn wedge3(a: &JetVec4, b: &JetVec4, c: &JetVec4) -> JetVec4 {
    let m3 = |r0: usize, r1: usize, r2: usize| -> Jet {
        a[r0] * (b[r1] * c[r2] - b[r2] * c[r1]) - b[r0] * (a[r1] * c[r2] - a[r2] * c[r1])
            + c[r0] * (a[r1] * b[r2] - a[r2] * b[r1])
    };
    // Cofactor expansion of det[a, b, c, e_i] along the last column.
    [-m3(1, 2, 3), m3(0, 2, 3), -m3(0, 1, 3), m3(0, 1, 2)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_table_matches_index() {
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            assert_eq!(index(i, j), k);
        }
    }

    #[test]
    fn polynomial_coefficients_are_exact() {
        // f = 3 u^2 v - u v^3 + 2 around (0.5, -1)
        let u = Jet::var_u(0.5);
        let v = Jet::var_v(-1.0);
        let f = u * u * v * 3.0 - u * v * v * v + 2.0;
        let (u0, v0) = (0.5_f64, -1.0_f64);
        assert!(close(f.value(), 3.0 * u0 * u0 * v0 - u0 * v0.powi(3) + 2.0, 1e-15));
        assert!(close(f.partial(1, 0), 6.0 * u0 * v0 - v0.powi(3), 1e-15));
        assert!(close(f.partial(0, 1), 3.0 * u0 * u0 - 3.0 * u0 * v0 * v0, 1e-15));
        assert!(close(f.partial(1, 1), 6.0 * u0 - 3.0 * v0 * v0, 1e-15));
        assert!(close(f.partial(0, 3), -6.0 * u0, 1e-15));
        assert!(close(f.partial(1, 2), -6.0 * v0, 1e-15));
        assert!(close(f.partial(2, 1), 6.0, 1e-15));
        assert_eq!(f.partial(4, 0), 0.0);
    }

    #[test]
    fn transcendental_round_trip() {
        let u = Jet::var_u(0.3);
        let v = Jet::var_v(0.2);
        let x = (u * v + 1.0).ln().exp();
        let y = u * v + 1.0;
        for k in 0..NCOEF {
            assert!((x.coeffs()[k] - y.coeffs()[k]).abs() < 1e-14);
        }
        let s = u.sin();
        let c = u.cos();
        let one = s * s + c * c;
        assert!((one.value() - 1.0).abs() < 1e-15);
        for k in 1..NCOEF {
            assert!(one.coeffs()[k].abs() < 1e-14);
        }
        let t = (u.sin() / u.cos()).atan();
        for k in 0..NCOEF {
            assert!((t.coeffs()[k] - u.coeffs()[k]).abs() < 1e-13);
        }
        let r = (u * u + 2.0).sqrt();
        let r2 = r * r;
        assert!((r2.coeff(2, 0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_lowers_order() {
        let u = Jet::var_u(1.0);
        let f = u.powi(4);
        let g = f.d_du();
        assert_eq!(g.order(), 3);
        assert!(close(g.partial(0, 0), 4.0, 1e-15));
        assert!(close(g.partial(3, 0), 24.0, 1e-15));
        let h = g * Jet::constant(2.0);
        assert_eq!(h.order(), 3);
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // f(x, y) = x^2 + x y, with x = a + b, y = a b as jets in (a, b).
        let x = Jet::var_u(0.0);
        let y = Jet::var_v(0.0);
        let f = x * x + x * y;
        let a = Jet::var_u(0.0);
        let b = Jet::var_v(0.0);
        let sx = a + b;
        let sy = a * b;
        let lhs = f.compose(&sx, &sy);
        let rhs = sx * sx + sx * sy;
        for k in 0..NCOEF {
            assert!((lhs.coeffs()[k] - rhs.coeffs()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn wedge_is_orthogonal_and_oriented() {
        let mk = |x: [f64; 4]| x.map(Jet::constant);
        let a = mk([1.0, 0.2, -0.3, 0.5]);
        let b = mk([0.1, 1.0, 0.7, -0.2]);
        let c = mk([0.4, -0.6, 1.0, 0.3]);
        let w = wedge3(&a, &b, &c);
        for x in [&a, &b, &c] {
            assert!(dot4(&w, x).value().abs() < 1e-14);
        }
        let e4 = wedge3(&mk([1.0, 0.0, 0.0, 0.0]), &mk([0.0, 1.0, 0.0, 0.0]), &mk([0.0, 0.0, 1.0, 0.0]));
        assert_eq!(values4(&e4), [0.0, 0.0, 0.0, 1.0]);
    }
}
