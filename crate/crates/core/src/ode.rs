//! Adaptive Dormand–Prince 5(4) integration for small autonomous systems.
//!
//! The right-hand side may fail (for instance when a trajectory leaves the
//! chart or reaches a singularity); failures are handed back to the caller
//! instead of being stepped over.

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub atol: f64,
    pub rtol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

/// One Dormand–Prince step of size `h`. Returns the fifth-order solution and
/// the scaled error norm (≤ 1 means accepted), or the right-hand side error.
pub fn dp_step<const N: usize, E>(
    f: &mut impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
    y: &[f64; N],
    h: f64,
    ctl: &StepControl,
) -> Result<([f64; N], f64), E> {
    let mut k = [[0.0; N]; 7];
    k[0] = f(y)?;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(&ys)?;
    }
    let mut y5 = *y;
    let mut err = 0.0_f64;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let sc = ctl.atol + ctl.rtol * y[i].abs().max(y5[i].abs());
        err = err.max((h * (d5 - d4) / sc).abs());
    }
    Ok((y5, err))
}

/// Result of an attempted adaptive step.
pub enum Step<const N: usize, E> {
    /// Accepted step: new state, size used, suggested next size.
    Accepted { y: [f64; N], h: f64, h_next: f64 },
    /// The right-hand side failed even at the smallest allowed step.
    Failed(E),
}

/// Takes one accepted step, shrinking `h` on error-test failure or on
/// right-hand-side failure. Never exceeds `h_cap` in magnitude (use it to land
/// exactly on output points); the sign of `h` sets the direction.
pub fn adaptive_step<const N: usize, E>(
    f: &mut impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
    y: &[f64; N],
    h: f64,
    h_cap: f64,
    ctl: &StepControl,
) -> Step<N, E> {
    let dir = h.signum();
    let mut h_abs = h.abs().min(h_cap.abs()).min(ctl.h_max).max(ctl.h_min);
    loop {
        match dp_step(f, y, dir * h_abs, ctl) {
            Ok((y_new, err)) if err <= 1.0 || h_abs <= ctl.h_min => {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let h_next = (h_abs * fac).clamp(ctl.h_min, ctl.h_max);
                return Step::Accepted {
                    y: y_new,
                    h: dir * h_abs,
                    h_next: dir * h_next,
                };
            }
            Ok((_, err)) => {
                h_abs = (h_abs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.5)).max(ctl.h_min);
            }
            Err(e) => {
                if h_abs <= ctl.h_min {
                    return Step::Failed(e);
                }
                h_abs = (h_abs * 0.25).max(ctl.h_min);
            }
        }
    }
}

/// Integrates from `t = 0` to `t_end`, returning the final state.
pub fn integrate<const N: usize, E>(
    f: &mut impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
    y0: [f64; N],
    t_end: f64,
    ctl: &StepControl,
) -> Result<[f64; N], E> {
    let mut y = y0;
    let mut t = 0.0;
    let dir = t_end.signum();
    let mut h = dir * (t_end.abs() / 16.0).min(ctl.h_max);
    while (t_end - t) * dir > 1e-15 * t_end.abs().max(1.0) {
        match adaptive_step(f, &y, h, t_end - t, ctl) {
            Step::Accepted { y: yn, h: used, h_next } => {
                y = yn;
                t += used;
                h = h_next;
            }
            Step::Failed(e) => return Err(e),
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> StepControl {
        StepControl {
            atol: 1e-12,
            rtol: 1e-12,
            h_min: 1e-12,
            h_max: 1.0,
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let mut f = |y: &[f64; 2]| -> Result<[f64; 2], ()> { Ok([y[1], -y[0]]) };
        let y = integrate(&mut f, [1.0, 0.0], 2.0 * std::f64::consts::PI, &ctl()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
        let back = integrate(&mut f, y, -2.0 * std::f64::consts::PI, &ctl()).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fifth_order_convergence() {
        let mut f = |y: &[f64; 1]| -> Result<[f64; 1], ()> { Ok([y[0]]) };
        let e1 = (dp_step(&mut f, &[1.0], 0.1, &ctl()).unwrap().0[0] - 0.1f64.exp()).abs();
        let e2 = (dp_step(&mut f, &[1.0], 0.05, &ctl()).unwrap().0[0] - 0.05f64.exp()).abs();
        let rate = (e1 / e2).log2();
        assert!(rate > 5.5, "local error order {rate}");
    }

    #[test]
    fn failing_rhs_is_reported() {
        let mut f = |y: &[f64; 1]| if y[0] < 1.5 { Ok([1.0]) } else { Err("wall") };
        let r = integrate(&mut f, [0.0], 3.0, &ctl());
        assert_eq!(r.unwrap_err(), "wall");
    }
}
