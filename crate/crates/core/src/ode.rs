//! Adaptive Dormand–Prince 5(4) integrator with exact landing on requested
//! output times, optional manifold projection and sign-change event location.

use crate::error::{Error, Result};

/// A first-order autonomous-or-not system `y' = f(t, y)`.
pub trait System {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Pulls an accepted state back onto an invariant manifold. Returns the
    /// size of the defect that was removed. The default leaves `y` untouched.
    fn project(&self, _y: &mut [f64]) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Used as both absolute and relative local error tolerance.
    pub tol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Floor below which a step counts as a failure.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            h_init: None,
            h_max: 0.1,
            h_min: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

/// Accepted steps of one integration run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
    /// Largest defect removed by [`System::project`].
    pub max_projection: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
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
/// Fifth-order weights (equal to the last row of `A`, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a, S: System> {
    sys: &'a S,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<'a, S: System> Stepper<'a, S> {
    fn new(sys: &'a S) -> Self {
        let d = sys.dim();
        Stepper {
            sys,
            k: vec![vec![0.0; d]; 7],
            tmp: vec![0.0; d],
        }
    }

    /// One trial step from `(t, y)` with `k[0] = f(t, y)` already filled.
    /// Writes the fifth-order solution into `out` and returns the scaled
    /// error norm.
    fn step(&mut self, t: f64, y: &[f64], h: f64, tol: f64, out: &mut [f64]) -> f64 {
        let d = y.len();
        for s in 1..7 {
            for m in 0..d {
                let mut acc = 0.0;
                for (r, a) in A[s][..s].iter().enumerate() {
                    acc += a * self.k[r][m];
                }
                self.tmp[m] = y[m] + h * acc;
            }
            self.sys.rhs(t + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        let mut err = 0.0;
        for m in 0..d {
            let mut acc = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                acc += B[s] * self.k[s][m];
                e += E[s] * self.k[s][m];
            }
            out[m] = y[m] + h * acc;
            let sc = tol + tol * y[m].abs().max(out[m].abs());
            err += (h * e / sc).powi(2);
        }
        (err / d as f64).sqrt()
    }
}

fn initial_step(y: &[f64], f0: &[f64], opts: &OdeOptions) -> f64 {
    if let Some(h) = opts.h_init {
        return h.min(opts.h_max);
    }
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-4 } else { 0.01 * d0 / d1 };
    h.min(opts.h_max).max(opts.h_min * 10.0)
}

/// Integrates from `t0` to `t_end > t0`. Every accepted step is recorded; each
/// time in `stops` (strictly inside `(t0, t_end]`) is hit exactly.
pub fn integrate<S: System>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<Solution> {
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t_end).collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    targets.push(t_end);
    run(sys, t0, y0, &targets, opts, None::<&fn(f64, &[f64]) -> f64>).map(|(sol, _)| sol)
}

/// A located sign change of an event function.
#[derive(Debug, Clone)]
pub struct Event {
    pub t: f64,
    pub y: Vec<f64>,
}

/// Integrates until `g(t, y)` changes from positive to non-positive, or until
/// `t_max`. Returns the solution up to the event and the event itself.
pub fn integrate_until<S: System, G: Fn(f64, &[f64]) -> f64>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_max: f64,
    g: G,
    opts: &OdeOptions,
) -> Result<(Solution, Option<Event>)> {
    run(sys, t0, y0, &[t_max], opts, Some(&g))
}

fn run<S: System, G: Fn(f64, &[f64]) -> f64>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    targets: &[f64],
    opts: &OdeOptions,
    event: Option<&G>,
) -> Result<(Solution, Option<Event>)> {
    let d = sys.dim();
    assert_eq!(y0.len(), d, "state dimension mismatch");
    let t_end = *targets.last().expect("at least one target");
    if !(t_end > t0) {
        return Err(Error::Invalid(format!(
            "integration end {t_end} must exceed start {t0}"
        )));
    }
    let mut st = Stepper::new(sys);
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut sol = Solution {
        t: vec![t0],
        y: vec![y.clone()],
        accepted: 0,
        rejected: 0,
        max_projection: 0.0,
    };
    sys.rhs(t, &y, &mut st.k[0]);
    let mut h = initial_step(&y, &st.k[0], opts);
    let mut next = 0;
    let mut y_new = vec![0.0; d];

    while next < targets.len() {
        if sol.accepted + sol.rejected >= opts.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: opts.max_steps,
                t_end,
            });
        }
        let target = targets[next];
        let remaining = target - t;
        let landing = h >= remaining * (1.0 - 1e-12) || remaining - h < opts.h_min;
        let h_try = if landing { remaining } else { h };
        let err = st.step(t, &y, h_try, opts.tol, &mut y_new);
        if !err.is_finite() || err > 1.0 {
            sol.rejected += 1;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h = h_try * fac;
            if h < opts.h_min {
                return Err(Error::StepSizeUnderflow { t, h_min: opts.h_min });
            }
            continue;
        }
        let t_new = if landing { target } else { t + h_try };
        let defect = sys.project(&mut y_new);
        sol.max_projection = sol.max_projection.max(defect);

        if let Some(g) = event {
            let g_old = g(t, &y);
            let g_new = g(t_new, &y_new);
            if g_old > 0.0 && g_new <= 0.0 {
                let ev = locate_event(&mut st, t, &y, h_try, opts.tol, g);
                sol.accepted += 1;
                sol.t.push(ev.t);
                sol.y.push(ev.y.clone());
                return Ok((sol, Some(ev)));
            }
        }

        sol.accepted += 1;
        t = t_new;
        y.copy_from_slice(&y_new);
        sol.t.push(t);
        sol.y.push(y.clone());
        sys.rhs(t, &y, &mut st.k[0]);
        if landing {
            next += 1;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        // Do not let a short landing step shrink the next one.
        let base = if landing { h.max(h_try) } else { h_try };
        h = (base * fac).min(opts.h_max);
    }
    Ok((sol, None))
}

/// Illinois-style regula falsi on the step length, re-stepping from the
/// start of the bracketing step.
fn locate_event<S: System, G: Fn(f64, &[f64]) -> f64>(
    st: &mut Stepper<'_, S>,
    t: f64,
    y: &[f64],
    h: f64,
    tol: f64,
    g: &G,
) -> Event {
    let d = y.len();
    let mut out = vec![0.0; d];
    let k0 = st.k[0].clone();
    let eval = |st: &mut Stepper<'_, S>, s: f64, out: &mut Vec<f64>| -> f64 {
        if s == 0.0 {
            out.copy_from_slice(y);
            return g(t, y);
        }
        st.k[0].copy_from_slice(&k0);
        st.step(t, y, s, tol, out);
        st.sys.project(out);
        g(t + s, out)
    };
    let (mut a, mut b) = (0.0, h);
    let mut ga = eval(st, a, &mut out);
    let mut gb = eval(st, b, &mut out);
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * (t.abs() + h) {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = eval(st, c, &mut out);
        if gc > 0.0 {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if gc == 0.0 {
            break;
        }
    }
    eval(st, b, &mut out);
    st.k[0].copy_from_slice(&k0);
    Event { t: t + b, y: out }
}
