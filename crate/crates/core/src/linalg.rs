//! Small fixed-size vector helpers and polynomial roots.

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

#[inline]
pub fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm(a: &Vec4) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn add(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn scale(a: &Vec4, s: f64) -> Vec4 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn normalize(a: &Vec4) -> Vec4 {
    scale(a, 1.0 / norm(a))
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1])
}

/// `a ∧ b ∧ c`: the vector with `⟨x, w⟩ = det[a, b, c, w]`.
pub fn wedge3(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let pick = |v: &Vec4, r: [usize; 3]| [v[r[0]], v[r[1]], v[r[2]]];
    let m = |r: [usize; 3]| det3(pick(a, r), pick(b, r), pick(c, r));
    [-m([1, 2, 3]), m([0, 2, 3]), -m([0, 1, 3]), m([0, 1, 2])]
}

/// Determinant of the matrix with columns `a, b, c, d`.
pub fn det4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    dot(&wedge3(a, b, c), d)
}

pub fn mat_vec(m: &Mat4, x: &Vec4) -> Vec4 {
    [dot(&m[0], x), dot(&m[1], x), dot(&m[2], x), dot(&m[3], x)]
}

pub fn transpose(m: &Mat4) -> Mat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Real roots of `c3 x³ + c2 x² + c1 x + c0`, ascending and Newton-polished.
/// Lower-degree polynomials are handled when leading coefficients vanish
/// relative to the others.
pub fn real_roots_cubic(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let eps = 1e-14 * scale;
    let mut roots = if c3.abs() <= eps {
        real_roots_quadratic(c2, c1, c0)
    } else {
        let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
        // Depressed cubic t³ + p t + q with x = t − a/3.
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let shift = -a / 3.0;
        if disc > 0.0 {
            let s = disc.sqrt();
            let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
            vec![t + shift]
        } else if p == 0.0 {
            vec![shift]
        } else {
            let r = (-p / 3.0).sqrt();
            let phi = ((-q / 2.0) / (r * r * r)).clamp(-1.0, 1.0).acos();
            (0..3)
                .map(|k| 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
                .collect()
        }
    };
    for x in roots.iter_mut() {
        for _ in 0..4 {
            let f = ((c3 * *x + c2) * *x + c1) * *x + c0;
            let df = (3.0 * c3 * *x + 2.0 * c2) * *x + c1;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    roots
}

/// Real roots of `a x² + b x + c`, ascending.
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + if b >= 0.0 { s } else { -s });
    let mut r = if q == 0.0 { vec![0.0] } else { vec![q / a, c / q] };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r.dedup();
    r
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of `per`
/// points each. Returns `(nodes, weights)`.
pub fn composite_gauss(a: f64, b: f64, panels: usize, per: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(per);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per);
    let mut weights = Vec::with_capacity(panels * per);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for k in 0..per {
            nodes.push(lo + 0.5 * h * (x[k] + 1.0));
            weights.push(0.5 * h * w[k]);
        }
    }
    (nodes, weights)
}
