//! Adaptive Dormand–Prince 5(4) integration for autonomous systems with a
//! single scalar stop event.
//!
//! The event function is negative while integration should continue. It is
//! only armed once it has been seen strictly negative, so trajectories that
//! start on the event surface (geodesics leaving the boundary, Jacobi fields
//! with `j(0) = 0`) are handled. Crossings are located by re-stepping from the
//! last accepted state with the Illinois variant of regula falsi, so the
//! located state carries full integrator accuracy.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    /// Event location tolerance in `t`.
    pub event: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-10, event: 1e-10, h_init: 1e-3, h_min: 1e-13, h_max: 0.1 }
    }
}

impl Tolerances {
    pub fn scaled(&self, factor: f64) -> Self {
        Self { abs: self.abs * factor, rel: self.rel * factor, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Horizon,
    Event,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub stop: Stop,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn y_end(&self) -> &[f64; N] {
        self.ys.last().unwrap()
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: 5th-order solution and the embedded error vector.
pub fn dp_step<const N: usize, F>(rhs: &F, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let _ = C;
    let mut k = [[0.0; N]; 7];
    k[0] = rhs(y);
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
        k[s] = rhs(&ys);
    }
    let mut out = *y;
    let mut err = [0.0; N];
    for i in 0..N {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for s in 0..7 {
            hi += B[s] * k[s][i];
            lo += B_LOW[s] * k[s][i];
        }
        out[i] += h * hi;
        err[i] = h * (hi - lo);
    }
    (out, err)
}

/// Integrates from `t = 0` to `t_max` or the first armed event crossing.
pub fn integrate<const N: usize, F, E>(
    rhs: F,
    y0: [f64; N],
    t_max: f64,
    tol: &Tolerances,
    mut event: E,
    record: bool,
) -> Result<Trajectory<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
    E: FnMut(&[f64; N]) -> f64,
{
    let mut t = 0.0;
    let mut y = y0;
    let mut ts = vec![0.0];
    let mut ys = vec![y0];
    let mut armed = event(&y0) < 0.0;
    let unarmed_cap = 1e-3;
    let mut h = tol.h_init.min(t_max);
    loop {
        if t >= t_max {
            return Ok(finish(ts, ys, t, y, Stop::Horizon, record));
        }
        let cap = if armed { tol.h_max } else { tol.h_max.min(unarmed_cap) };
        h = h.min(cap).min(t_max - t);
        let (y_new, err) = dp_step(&rhs, &y, h);
        let mut e_norm: f64 = 0.0;
        for i in 0..N {
            let sc = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            e_norm = e_norm.max((err[i] / sc).abs());
        }
        if !e_norm.is_finite() || e_norm > 1.0 {
            let fac = if e_norm.is_finite() { (0.9 * e_norm.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= fac;
            if h < tol.h_min {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }
        let e_new = event(&y_new);
        if e_new > 0.0 {
            let lo = if armed {
                Some(0.0)
            } else {
                // started on the event surface: find a strictly negative point inside the step
                let mut f = 0.5;
                let mut found = None;
                for _ in 0..50 {
                    let (yt, _) = dp_step(&rhs, &y, f * h);
                    if event(&yt) < 0.0 {
                        found = Some(f * h);
                        break;
                    }
                    f *= 0.5;
                }
                found
            };
            match lo {
                Some(a) => {
                    let (tau, y_root) = locate(&rhs, &y, a, h, tol.event, &mut event);
                    return Ok(finish(ts, ys, t + tau, y_root, Stop::Event, record));
                }
                None => {
                    // leaves immediately
                    return Ok(finish(ts, ys, t, y, Stop::Event, record));
                }
            }
        }
        if e_new < 0.0 {
            armed = true;
        }
        t += h;
        y = y_new;
        if record {
            ts.push(t);
            ys.push(y);
        }
        let fac = if e_norm == 0.0 { 5.0 } else { (0.9 * e_norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
}

fn finish<const N: usize>(
    mut ts: Vec<f64>,
    mut ys: Vec<[f64; N]>,
    t: f64,
    y: [f64; N],
    stop: Stop,
    record: bool,
) -> Trajectory<N> {
    if !record {
        ts.clear();
        ys.clear();
        ts.push(0.0);
        ys.push(y);
    }
    if *ts.last().unwrap() != t || !record {
        if record {
            ts.push(t);
            ys.push(y);
        } else {
            ts[0] = t;
        }
    }
    Trajectory { ts, ys, stop }
}

fn locate<const N: usize, F, E>(
    rhs: &F,
    y: &[f64; N],
    mut a: f64,
    mut b: f64,
    tol: f64,
    event: &mut E,
) -> (f64, [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
    E: FnMut(&[f64; N]) -> f64,
{
    let eval = |tau: f64, event: &mut E| {
        let yt = if tau == 0.0 { *y } else { dp_step(rhs, y, tau).0 };
        (event(&yt), yt)
    };
    let (mut fa, _) = eval(a, event);
    let (mut fb, mut yb) = eval(b, event);
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (fc, yc) = eval(c, event);
        if fc > 0.0 {
            b = c;
            fb = fc;
            yb = yc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if fc == 0.0 {
            return (c, yc);
        }
    }
    (b, yb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_accuracy() {
        let rhs = |y: &[f64; 2]| [y[1], -y[0]];
        let tr = integrate(rhs, [0.0, 1.0], 10.0, &Tolerances::default(), |_| -1.0, true).unwrap();
        assert_eq!(tr.stop, Stop::Horizon);
        assert!((tr.t_end() - 10.0).abs() < 1e-15);
        assert!((tr.y_end()[0] - 10f64.sin()).abs() < 1e-8);
        assert!(tr.ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn event_from_surface_finds_first_zero() {
        // y = sin t starts at the zero; the event -y arms once y > 0 and fires at π
        let rhs = |y: &[f64; 2]| [y[1], -y[0]];
        let tr = integrate(rhs, [0.0, 1.0], 10.0, &Tolerances::default(), |y| -y[0], false).unwrap();
        assert_eq!(tr.stop, Stop::Event);
        assert!((tr.t_end() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn short_excursion_from_surface_is_resolved() {
        // y(t) = t - t²/ε² ... parabola y = v t - t², zero again at t = v
        let v = 1e-5;
        let rhs = |y: &[f64; 2]| [y[1], -2.0];
        let tr = integrate(rhs, [0.0, v], 1.0, &Tolerances::default(), |y| -y[0], false).unwrap();
        assert_eq!(tr.stop, Stop::Event);
        assert!((tr.t_end() - v).abs() < 1e-10, "{}", tr.t_end());
    }
}
