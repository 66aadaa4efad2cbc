//! Dormand-Prince 5(4) pair with the continuous extension of Hairer, Norsett
//! and Wanner (contd5). State vectors are fixed-size arrays.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Tolerances and limits for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Hard cap on |h| independent of the position-dependent cap.
    pub h_max: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 20_000_000,
            h_max: f64::INFINITY,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        OdeOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }
}

/// One accepted step together with its interpolant.
pub struct DenseStep<'a, const N: usize> {
    t_old: f64,
    h: f64,
    rc: &'a [[f64; N]; 5],
}

impl<'a, const N: usize> DenseStep<'a, N> {
    pub fn t_start(&self) -> f64 {
        self.t_old
    }

    pub fn t_end(&self) -> f64 {
        self.t_old + self.h
    }

    /// Is `t` inside the closed step interval?
    pub fn covers(&self, t: f64) -> bool {
        let (lo, hi) = if self.h > 0.0 {
            (self.t_old, self.t_old + self.h)
        } else {
            (self.t_old + self.h, self.t_old)
        };
        t >= lo && t <= hi
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t_old) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let rc = |k: usize| self.rc[k][i];
            y[i] = rc(0) + th * (rc(1) + th1 * (rc(2) + th * (rc(3) + th1 * rc(4))));
        }
        y
    }
}

/// What an observer wants after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub rejected: usize,
}

fn rms_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        let e = err[i] / sc;
        s += e * e;
    }
    (s / N as f64).sqrt()
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `max_step(t)` caps |h| at the current position (used to stay clear of
/// singular endpoints). The observer sees every accepted step and may stop
/// the integration early.
pub fn integrate<const N: usize, F, S, O>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    max_step: S,
    mut observer: O,
) -> Result<Outcome<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: Fn(f64) -> f64,
    O: FnMut(&DenseStep<N>) -> Control,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(Outcome {
            t: t0,
            y: y0,
            steps: 0,
            rejected: 0,
        });
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let first_cap = span.abs().min(max_step(t0));
    let mut habs = initial_step(f, t, &y, &k1, dir, opts, first_cap);
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut last_rejected = false;
    let mut rc = [[0.0; N]; 5];

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if steps + rejected > opts.max_steps {
            return Err(Error::ToleranceFailure { tau: t, h: habs });
        }
        let cap = max_step(t).min(opts.h_max);
        habs = habs.min(cap);
        let mut last = false;
        if habs >= remaining {
            habs = remaining;
            last = true;
        } else if habs > 0.5 * remaining && cap >= remaining {
            // avoid a sliver step at the end
            habs = 0.5 * remaining;
        }
        let hmin = 8.0 * f64::EPSILON * t.abs();
        if habs <= hmin || !habs.is_finite() {
            return Err(Error::ToleranceFailure { tau: t, h: habs });
        }
        let h = dir * habs;

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let t_new = if last { t1 } else { t + h };
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t_new, &y_new);

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = rms_norm(&err, &y, &y_new, opts);
        let finite = y_new.iter().all(|v| v.is_finite()) && en.is_finite();

        if finite && en <= 1.0 {
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rc[0][i] = y[i];
                rc[1][i] = ydiff;
                rc[2][i] = bspl;
                rc[3][i] = ydiff - h * k7[i] - bspl;
                rc[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            steps += 1;
            let ctl = observer(&DenseStep { t_old: t, h, rc: &rc });
            t = t_new;
            y = y_new;
            k1 = k7;
            if ctl == Control::Stop {
                break;
            }
            let mut fac = if en == 0.0 { 10.0 } else { 0.9 * en.powf(-0.2) };
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            habs *= fac;
            last_rejected = false;
        } else {
            rejected += 1;
            let fac = if finite { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            habs *= fac;
            last_rejected = true;
        }
    }
    Ok(Outcome {
        t,
        y,
        steps,
        rejected,
    })
}

fn initial_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    dir: f64,
    o: &OdeOptions,
    cap: f64,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (k1[i] / sc).powi(2);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(o.h_max).min(cap);
    let y1 = axpy(y, dir * h0, &[(1.0, k1)]);
    let k2 = f(t + dir * h0, &y1);
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs();
        d2 += ((k2[i] - k1[i]) / sc).powi(2);
    }
    d2 = (d2 / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(o.h_max).min(cap)
}

/// Convenience wrapper without a cap or observer.
pub fn solve<const N: usize, F>(f: &F, t0: f64, y0: [f64; N], t1: f64, opts: &OdeOptions) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    integrate(f, t0, y0, t1, opts, |_| f64::INFINITY, |_| Control::Continue).map(|o| o.y)
}

/// Integrate and record the solution at the given sample times, which must be
/// ordered in the direction of integration and lie within [t0, t1].
pub fn solve_sampled<const N: usize, F, S>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    samples: &[f64],
    opts: &OdeOptions,
    max_step: S,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: Fn(f64) -> f64,
{
    let mut out = Vec::with_capacity(samples.len());
    let Some(&t_last) = samples.last() else {
        return Ok(out);
    };
    let mut next = 0;
    while next < samples.len() && samples[next] == t0 {
        out.push(y0);
        next += 1;
    }
    let res = integrate(f, t0, y0, t_last, opts, max_step, |step| {
        while next < samples.len() && step.covers(samples[next]) {
            out.push(step.eval(samples[next]));
            next += 1;
        }
        Control::Continue
    })?;
    while out.len() < samples.len() {
        out.push(res.y);
    }
    Ok(out)
}
