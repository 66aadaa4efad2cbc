//! Scattering data in rotating frames.
//!
//! Frozen frame (constant omega = sqrt(mu + V_lim)):
//!   psi = (2 omega)^{-1/2} (alpha e^{i omega tau} + beta e^{-i omega tau}).
//! Adiabatic frame (omega(tau) = sqrt(mu + V(tau)), Theta' = omega):
//!   psi  = (2 omega)^{-1/2} (alpha e^{i Theta} + beta e^{-i Theta}),
//!   psi' = i (omega/2)^{1/2} (alpha e^{i Theta} - beta e^{-i Theta}),
//!   alpha' = omega'/(2 omega) e^{-2 i Theta} beta,  beta' = omega'/(2 omega) e^{2 i Theta} alpha.
//! Both keep |alpha|^2 - |beta|^2 fixed, and the second keeps small beta
//! small instead of producing it by cancellation.

use std::cell::Cell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::background::Background;
use super::limits::tau_near;
use super::mode::{ModeSolver, ModeState};
use crate::cosmology::{ConformalChart, Side, Tau};
use crate::error::{Error, Result};
use crate::numerics::fit::aitken_c;
use crate::potential::CouplingSpec;

/// Horizons |tau| used toward infinite ends.
pub const HORIZONS: [f64; 4] = [1e2, 1e3, 1e4, 1e5];
/// Convergence threshold between successive extrapolations.
pub const SCATTERING_TOL: f64 = 1e-6;
/// Closest approach to a finite end when reading frame data.
pub const END_DEPTH: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Frozen-frame coefficients of a state at absolute time `tau`.
pub fn frozen_coefficients(psi: Complex64, dpsi: Complex64, omega: f64, tau: f64) -> (Complex64, Complex64) {
    let s = (0.5 * omega).sqrt();
    let a = s * (-I * omega * tau).exp() * (psi - I * dpsi / omega);
    let b = s * (I * omega * tau).exp() * (psi + I * dpsi / omega);
    (a, b)
}

/// The state with frozen-frame coefficients (alpha, beta) at absolute time `tau`.
pub fn frozen_state(alpha: Complex64, beta: Complex64, omega: f64, tau: f64) -> (Complex64, Complex64) {
    let ep = (I * omega * tau).exp();
    let em = ep.conj();
    let psi = (alpha * ep + beta * em) / (2.0 * omega).sqrt();
    let dpsi = I * (0.5 * omega).sqrt() * (alpha * ep - beta * em);
    (psi, dpsi)
}

fn base_time(bg: &Background<'_>, side: Side) -> f64 {
    bg.endpoint(side.other()).finite().unwrap_or(0.0)
}

/// Absolute times of the horizons toward the infinite end on `side`,
/// measured from the other end (or 0).
pub fn horizon_times(bg: &Background<'_>, side: Side) -> Vec<f64> {
    let base = base_time(bg, side);
    let sign = match side {
        Side::Future => 1.0,
        Side::Past => -1.0,
    };
    HORIZONS.iter().map(|h| base + sign * h).collect()
}

fn extrapolate(v: &[Complex64]) -> (Complex64, f64) {
    let n = v.len();
    match n {
        0 => (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY),
        1 => (v[0], 0.0),
        2 | 3 => (v[n - 1], (v[n - 1] - v[n - 2]).norm()),
        _ => {
            let a1 = aitken_c(v[n - 3], v[n - 2], v[n - 1]);
            let a0 = aitken_c(v[n - 4], v[n - 3], v[n - 2]);
            (a1, (a1 - a0).norm())
        }
    }
}

/// Frozen-frame (alpha, beta) of a mode toward the infinite end on `side`,
/// extrapolated over the horizons.
pub fn scattering_on(solver: &ModeSolver<'_>, state: &ModeState, v_limit: f64, side: Side) -> Result<(Complex64, Complex64)> {
    let bg = &solver.bg;
    if bg.endpoint(side).is_finite() {
        return Err(Error::PreconditionViolated(format!("{side:?} end is at finite conformal time")));
    }
    let mu = state.mu;
    let w2 = mu + v_limit;
    if !(w2 > 0.0) {
        return Err(Error::NegativeFrequency(w2));
    }
    let omega = w2.sqrt();
    let t0 = bg.absolute(state.tau)?;
    let hs: Vec<f64> = horizon_times(bg, side).into_iter().filter(|h| (h - t0) * (h - base_time(bg, side)) > 0.0 && (h - t0).abs() > 1.0).collect();
    if hs.len() < 4 {
        return Err(Error::InvalidArgument(format!("start time {t0} leaves fewer than four horizons")));
    }
    let (a0, b0) = frozen_coefficients(state.psi, state.dpsi, omega, t0);
    let y0 = [a0.re, a0.im, b0.re, b0.im, t0];
    let samples: Vec<Tau> = hs.iter().map(|&h| Tau::at(h)).collect();
    let ys = solver.run(state.tau, *samples.last().unwrap(), &samples, y0, false, |p, y| {
        let g = 0.5 * (p.v - v_limit) / omega;
        let a = Complex64::new(y[0], y[1]);
        let b = Complex64::new(y[2], y[3]);
        let e = (2.0 * I * omega * y[4]).exp();
        let da = I * g * (a + b * e.conj());
        let db = -I * g * (a * e + b);
        [da.re, da.im, db.re, db.im, 1.0]
    })?;
    let al: Vec<Complex64> = ys.iter().map(|y| Complex64::new(y[0], y[1])).collect();
    let be: Vec<Complex64> = ys.iter().map(|y| Complex64::new(y[2], y[3])).collect();
    let (a, ea) = extrapolate(&al);
    let (b, eb) = extrapolate(&be);
    if ea > SCATTERING_TOL * (1.0 + a.norm()) || eb > SCATTERING_TOL * (1.0 + b.norm()) {
        return Err(Error::NoConvergence(format!("horizon extrapolation errors {ea:e}, {eb:e}")));
    }
    Ok((a, b))
}

/// Scattering data at the infinite end of a chart (the future end if both are infinite).
pub fn scattering_data_infinite_tau(chart: &ConformalChart, coupling: &CouplingSpec, mu: f64, state: &ModeState, v_limit: f64) -> Result<(Complex64, Complex64)> {
    let side = if !chart.tau_plus.is_finite() {
        Side::Future
    } else if !chart.tau_minus.is_finite() {
        Side::Past
    } else {
        return Err(Error::PreconditionViolated("both ends at finite conformal time".into()));
    };
    let solver = ModeSolver::on_chart(chart, *coupling);
    scattering_on(&solver, &ModeState { mu, ..*state }, v_limit, side)
}

/// Bogoliubov coefficients of one mode between in and out frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScattering {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// | |alpha|^2 - |beta|^2 - 1 |
    pub wronskian_residual: f64,
    /// disagreement between the last two extrapolations (0 for finite ends)
    pub error: f64,
}

/// Start and end probes of the adiabatic sweep, outermost first.
fn sweep_probes(bg: &Background<'_>, side: Side) -> Vec<Tau> {
    if bg.endpoint(side).is_finite() {
        vec![tau_near(side, END_DEPTH)]
    } else {
        horizon_times(bg, side).into_iter().map(Tau::at).collect()
    }
}

fn omega_of(mu: f64, v: f64) -> Result<f64> {
    let w2 = mu + v;
    if !(w2 > 0.0) {
        return Err(Error::NegativeFrequency(w2));
    }
    Ok(w2.sqrt())
}

type Mat = [[Complex64; 2]; 2];

fn mat_of(y: &[f64; 9]) -> Mat {
    let c = |k: usize| Complex64::new(y[k], y[k + 1]);
    // columns are the images of (1,0) and (0,1)
    [[c(0), c(4)], [c(2), c(6)]]
}

fn solve2(m: &Mat, rhs: [Complex64; 2]) -> [Complex64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [(rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det, (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det]
}

fn apply(m: &Mat, v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Adiabatic-frame scattering from the in-vacuum at tau- to the out frame at
/// tau+. Infinite ends are handled by horizon extrapolation on both sides.
pub fn adiabatic_scattering(solver: &ModeSolver<'_>, mu: f64) -> Result<FrameScattering> {
    let bg = &solver.bg;
    let starts = sweep_probes(bg, Side::Past);
    let ends = sweep_probes(bg, Side::Future);
    // integrate once from the deepest start through the shallower starts to the ends
    let from = *starts.last().unwrap();
    let mut samples: Vec<Tau> = starts.iter().rev().copied().collect();
    samples.extend(ends.iter().copied());
    let bad = Cell::new(None);
    let y0 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let ys = solver.run(from, *samples.last().unwrap(), &samples, y0, true, |p, y| {
        let w2 = mu + p.v;
        if !(w2 > 0.0) {
            bad.set(Some(w2));
            return [f64::NAN; 9];
        }
        let w = w2.sqrt();
        let g = 0.25 * p.dv / w2;
        let e = Complex64::new(0.0, 2.0 * y[8]).exp();
        let mut d = [0.0; 9];
        for col in 0..2 {
            let k = 4 * col;
            let a = Complex64::new(y[k], y[k + 1]);
            let b = Complex64::new(y[k + 2], y[k + 3]);
            let da = g * e.conj() * b;
            let db = g * e * a;
            d[k] = da.re;
            d[k + 1] = da.im;
            d[k + 2] = db.re;
            d[k + 3] = db.im;
        }
        d[8] = w;
        d
    });
    let ys = match (ys, bad.get()) {
        (Err(_), Some(w2)) => return Err(Error::NegativeFrequency(w2)),
        (r, _) => r?,
    };
    let ns = starts.len();
    // transfer from the deepest start to start k (k = outermost..) and to end j
    let s_start: Vec<Mat> = (0..ns).map(|k| mat_of(&ys[ns - 1 - k])).collect();
    let s_end: Vec<Mat> = ys[ns..].iter().map(mat_of).collect();
    let one = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut per_end_a = Vec::new();
    let mut per_end_b = Vec::new();
    let mut err: f64 = 0.0;
    for se in &s_end {
        let mut av = Vec::new();
        let mut bv = Vec::new();
        for ss in &s_start {
            let seed = solve2(ss, one);
            let [a, b] = apply(se, seed);
            av.push(a.norm());
            bv.push(b.norm());
        }
        let (a, ea) = extrapolate(&av.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        let (b, eb) = extrapolate(&bv.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        err = err.max(ea).max(eb);
        per_end_a.push(a);
        per_end_b.push(b);
    }
    let (a, ea) = extrapolate(&per_end_a);
    let (b, eb) = extrapolate(&per_end_b);
    let error = err.max(ea).max(eb);
    if error > SCATTERING_TOL * (1.0 + a.norm()) {
        return Err(Error::NoConvergence(format!("horizon extrapolation error {error:e}")));
    }
    // phases are frame conventions; report the complex values at the last probes
    let last_seed = solve2(s_start.last().unwrap(), one);
    let [al, bl] = apply(s_end.last().unwrap(), last_seed);
    let alpha = if al.norm() > 0.0 { al * (a.re / al.norm()) } else { al };
    let beta = if bl.norm() > 0.0 { bl * (b.re / bl.norm()) } else { bl };
    Ok(FrameScattering {
        alpha,
        beta,
        wronskian_residual: (alpha.norm_sqr() - beta.norm_sqr() - 1.0).abs(),
        error,
    })
}

/// The in-vacuum state at a finite past end: psi = 2^{-1/2} w^{-1/2}, psi' = i 2^{-1/2} w^{1/2}
/// with w = sqrt(mu + V-).
pub fn vacuum_at(mu: f64, v_minus: f64) -> Result<(Complex64, Complex64)> {
    let w = omega_of(mu, v_minus)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok((Complex64::new(s / w.sqrt(), 0.0), Complex64::new(0.0, s * w.sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosmology::{ScaleFactorModel, SideParams};
    use crate::dynamics::background::AnalyticPotential;

    #[test]
    fn frozen_roundtrip() {
        let (p, dp) = frozen_state(Complex64::new(0.3, 0.2), Complex64::new(-1.0, 0.5), 1.7, 2.3);
        let (a, b) = frozen_coefficients(p, dp, 1.7, 2.3);
        assert!((a - Complex64::new(0.3, 0.2)).norm() < 1e-14 && (b - Complex64::new(-1.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn constant_potential_does_not_scatter() {
        let v = AnalyticPotential::constant(0.5);
        let s = ModeSolver::new(Background::Analytic(&v));
        let w = 1.5f64.sqrt();
        let (p, dp) = frozen_state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), w, -3.0);
        let st = ModeState::new(1.0, Tau::at(-3.0), p, dp);
        let (a, b) = scattering_on(&s, &st, 0.5, Side::Future).unwrap();
        assert!((a - 1.0).norm() < 1e-8 && b.norm() < 1e-8);
        let f = adiabatic_scattering(&s, 1.0).unwrap();
        assert!((f.alpha.norm() - 1.0).abs() < 1e-12 && f.beta.norm() < 1e-12);
    }

    fn step_beta(vm: f64, vp: f64, mu: f64) -> f64 {
        let (wm, wp) = ((mu + vm).sqrt(), (mu + vp).sqrt());
        (wp - wm).abs() / (2.0 * (wp * wm).sqrt())
    }

    #[test]
    fn steep_step_frames_agree() {
        // both frames at finite width, against direct psi integration
        let v = AnalyticPotential::tanh_step(0.0, 3.0, 0.05);
        let s = ModeSolver::new(Background::Analytic(&v));
        let mu = 1.0;
        let f = adiabatic_scattering(&s, mu).unwrap();
        let (p, dp) = frozen_state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0, -20.0);
        let st = ModeState::new(mu, Tau::at(-20.0), p, dp);
        let (a, b) = scattering_on(&s, &st, 3.0, Side::Future).unwrap();
        assert!((f.beta.norm() - b.norm()).abs() < 1e-7, "{} vs {}", f.beta.norm(), b.norm());
        assert!((f.alpha.norm() - a.norm()).abs() < 1e-7);
        assert!(f.wronskian_residual < 1e-8 && (a.norm_sqr() - b.norm_sqr() - 1.0).abs() < 1e-8);
        // direct route: integrate psi well past the step and convert
        let out = s.evolve(&st, Tau::at(20.0)).unwrap();
        let (_, bd) = frozen_coefficients(out.psi, out.dpsi, 2.0, 20.0);
        assert!((bd.norm() - b.norm()).abs() < 1e-7);
        // a sharp step is close to the matching formula
        assert!((b.norm() - step_beta(0.0, 3.0, mu)).abs() < 0.02);
    }

    #[test]
    fn chart_big_bang_to_crunch_normalised() {
        let model = ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::conformal(3, 1.0).unwrap();
        let s = ModeSolver::on_chart(&chart, cp);
        for mu in [1.0, 30.0] {
            let f = adiabatic_scattering(&s, mu).unwrap();
            assert!(f.wronskian_residual < 1e-8, "{f:?}");
            // direct route from the vacuum seed
            let (p, dp) = vacuum_at(mu, 0.0).unwrap();
            let st = ModeState::new(mu, tau_near(Side::Past, END_DEPTH), p, dp);
            let out = s.evolve(&st, tau_near(Side::Future, END_DEPTH)).unwrap();
            let w = mu.sqrt();
            let bd = (0.5 * w).sqrt() * (out.psi + I * out.dpsi / w);
            assert!((bd.norm() - f.beta.norm()).abs() < 1e-8, "{} vs {}", bd.norm(), f.beta.norm());
        }
    }

    #[test]
    fn infinite_chart_scattering() {
        // eta0 = 1 at both ends: V -> kappa c0^2 d(d-1) with kappa < 0
        let model = ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 1.0, 2.0, 1.0).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::new(0.0, 3, 0.0).unwrap();
        let s = ModeSolver::on_chart(&chart, cp);
        let f = adiabatic_scattering(&s, 9.0).unwrap();
        assert!(f.wronskian_residual < 1e-8, "{f:?}");
        let _ = SideParams::leading(1.0, 1.0);
    }
}
