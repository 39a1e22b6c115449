//! Dormand–Prince 5(4) with embedded error control and event location by
//! bisection.

/// Tableau of the Dormand–Prince 5(4) pair.
mod dp {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    /// Fifth-order weights minus embedded fourth-order weights.
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

pub type Rhs<'a, const N: usize> = dyn Fn(f64, &[f64; N]) -> Option<[f64; N]> + 'a;
pub type EventFn<'a, const N: usize> = dyn Fn(f64, &[f64; N]) -> f64 + 'a;

#[derive(Clone, Debug)]
pub struct Tolerances<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
    /// Reached `x_end`.
    End,
    /// Event `i` located; the state is the last point before the crossing.
    Event(usize),
    /// Step size fell below resolution.
    Underflow,
    /// Step budget exhausted.
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct Outcome<const N: usize> {
    pub stop: Stop,
    /// Accepted states, starting with the initial one.
    pub path: Vec<(f64, [f64; N])>,
    /// For [`Stop::Event`], the bracketing upper state (past the crossing).
    pub crossing: Option<(f64, [f64; N])>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[[f64; N]; 7], row: &[f64; 6]) -> [f64; N] {
    let mut out = *y;
    for (j, a) in row.iter().enumerate() {
        if *a != 0.0 {
            for i in 0..N {
                out[i] += h * a * k[j][i];
            }
        }
    }
    out
}

/// One Dormand–Prince step from `(x, y)` with slope `k1`; returns the
/// fifth-order state, error estimate and the FSAL slope.
fn step<const N: usize>(
    f: &Rhs<N>,
    x: f64,
    y: &[f64; N],
    k1: [f64; N],
    h: f64,
) -> Option<([f64; N], [f64; N], [f64; N])> {
    let mut k = [[0.0; N]; 7];
    k[0] = k1;
    for s in 1..7 {
        let ys = axpy(y, h, &k, &dp::A[s]);
        k[s] = f(x + dp::C[s] * h, &ys)?;
    }
    let y_new = axpy(y, h, &k, &dp::A[6]);
    if y_new.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut err = [0.0; N];
    for (s, e) in dp::E.iter().enumerate() {
        for i in 0..N {
            err[i] += h * e * k[s][i];
        }
    }
    Some((y_new, err, k[6]))
}

fn error_norm<const N: usize>(tol: &Tolerances<N>, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = tol.atol[i] + tol.rtol * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Initial step guess (Hairer–Nørsett–Wanner).
fn initial_step<const N: usize>(
    f: &Rhs<N>,
    tol: &Tolerances<N>,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    dir: f64,
    span: f64,
) -> f64 {
    let sc = |i: usize| tol.atol[i] + tol.rtol * y[i].abs();
    let rms = |v: &[f64; N]| ((0..N).map(|i| (v[i] / sc(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = rms(y);
    let d1 = rms(k1);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let mut y1 = *y;
    for i in 0..N {
        y1[i] += dir * h0 * k1[i];
    }
    let Some(k2) = f(x + dir * h0, &y1) else {
        return h0 * 1e-3;
    };
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = k2[i] - k1[i];
    }
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate from `x0` towards `x_end` (either direction). Integration
/// stops at the first event whose function changes sign across an accepted
/// step; the crossing is bracketed until `time_of` differs by less than
/// `event_resolution` between the bracket ends.
#[allow(clippy::too_many_arguments)]
pub fn integrate<const N: usize>(
    f: &Rhs<N>,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    tol: &Tolerances<N>,
    events: &[&EventFn<N>],
    time_of: &dyn Fn(f64, &[f64; N]) -> f64,
    event_resolution: f64,
) -> Outcome<N> {
    let mut path = vec![(x0, y0)];
    if x_end == x0 {
        return Outcome {
            stop: Stop::End,
            path,
            crossing: None,
        };
    }
    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();
    let Some(mut k1) = f(x0, &y0) else {
        return Outcome {
            stop: Stop::Underflow,
            path,
            crossing: None,
        };
    };
    let (mut x, mut y) = (x0, y0);
    let mut h = initial_step(f, tol, x, &y, &k1, dir, span);
    let mut g_prev: Vec<f64> = events.iter().map(|g| g(x, &y)).collect();

    for _ in 0..tol.max_steps {
        let remaining = (x_end - x).abs();
        if h >= remaining {
            h = remaining;
        }
        if h <= 1e-14 * x.abs().max(1.0) && h < remaining {
            return Outcome {
                stop: Stop::Underflow,
                path,
                crossing: None,
            };
        }
        let Some((y_new, err, k_last)) = step(f, x, &y, k1, dir * h) else {
            h *= 0.25;
            continue;
        };
        let e = error_norm(tol, &y, &y_new, &err);
        if e > 1.0 || !e.is_finite() {
            h *= (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
            continue;
        }
        let x_new = if h == remaining { x_end } else { x + dir * h };

        let g_new: Vec<f64> = events.iter().map(|g| g(x_new, &y_new)).collect();
        if let Some(idx) = (0..events.len()).find(|i| g_prev[*i] != 0.0 && g_prev[*i].signum() != g_new[*i].signum()) {
            let (lo, hi) = locate(
                f,
                events[idx],
                x,
                &y,
                k1,
                dir * h,
                (x_new, y_new),
                time_of,
                event_resolution,
            );
            if lo.0 != x {
                path.push(lo);
            }
            return Outcome {
                stop: Stop::Event(idx),
                path,
                crossing: Some(hi),
            };
        }

        x = x_new;
        y = y_new;
        k1 = k_last;
        g_prev = g_new;
        path.push((x, y));
        if x == x_end {
            return Outcome {
                stop: Stop::End,
                path,
                crossing: None,
            };
        }
        h *= (0.9 * e.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    Outcome {
        stop: Stop::MaxSteps,
        path,
        crossing: None,
    }
}

/// Bisection on the step length from `(x, y)`; each trial point is a fresh
/// fifth-order step, so the located states carry full step accuracy.
#[allow(clippy::too_many_arguments)]
fn locate<const N: usize>(
    f: &Rhs<N>,
    g: &EventFn<N>,
    x: f64,
    y: &[f64; N],
    k1: [f64; N],
    h_full: f64,
    full: (f64, [f64; N]),
    time_of: &dyn Fn(f64, &[f64; N]) -> f64,
    resolution: f64,
) -> ((f64, [f64; N]), (f64, [f64; N])) {
    let g0 = g(x, y);
    let mut lo = (0.0, (x, *y));
    let mut hi = (1.0, full);
    for _ in 0..200 {
        if (time_of(hi.1 .0, &hi.1 .1) - time_of(lo.1 .0, &lo.1 .1)).abs() < resolution {
            break;
        }
        let mid = 0.5 * (lo.0 + hi.0);
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let Some((ym, _, _)) = step(f, x, y, k1, h_full * mid) else {
            hi = (mid, hi.1);
            continue;
        };
        let xm = x + h_full * mid;
        if g(xm, &ym).signum() == g0.signum() && g(xm, &ym) != 0.0 {
            lo = (mid, (xm, ym));
        } else {
            hi = (mid, (xm, ym));
        }
    }
    (lo.1, hi.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(rtol: f64) -> Tolerances<2> {
        Tolerances {
            rtol,
            atol: [1e-14; 2],
            max_steps: 100_000,
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let f = |_: f64, y: &[f64; 2]| Some([y[1], -y[0]]);
        let out = integrate(&f, 0.0, [1.0, 0.0], 10.0, &tol(1e-10), &[], &|x, _| x, 1e-12);
        assert_eq!(out.stop, Stop::End);
        let (x, y) = *out.path.last().unwrap();
        assert_eq!(x, 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn backward_exponential() {
        let f = |_: f64, y: &[f64; 2]| Some([y[0], -y[1]]);
        let out = integrate(&f, 0.0, [1.0, 1.0], -3.0, &tol(1e-11), &[], &|x, _| x, 1e-12);
        let (_, y) = *out.path.last().unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-10);
        assert!((y[1] - 3f64.exp()).abs() / 3f64.exp() < 1e-9);
    }

    #[test]
    fn event_located_to_resolution() {
        // y' = -1 from 1: crosses 0.25 at x = 0.75.
        let f = |_: f64, _: &[f64; 2]| Some([-1.0, 0.0]);
        let g = |_: f64, y: &[f64; 2]| y[0] - 0.25;
        let out = integrate(&f, 0.0, [1.0, 0.0], 5.0, &tol(1e-10), &[&g], &|x, _| x, 1e-12);
        assert_eq!(out.stop, Stop::Event(0));
        let (x, y) = *out.path.last().unwrap();
        assert!(y[0] > 0.25);
        assert!((x - 0.75).abs() < 1e-12);
        let (xh, _) = out.crossing.unwrap();
        assert!((xh - x).abs() < 1e-12);
    }
}
