//! The spatially constant mode of the cubic equation, phi'' + phi + phi^3 = 0,
//! and the exponent bookkeeping of the semilinear problem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, Control, OdeOptions};
use crate::specfun::{elliptic_k, jacobi_cn};

/// nu = (d + 3 - p(d - 1))/2 for 1 <= p <= d/(d-2).
pub fn subcritical_nu(d: u32, p: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("d = {d} must be at least 3")));
    }
    let df = d as f64;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be at least 1")));
    }
    if p > df / (df - 2.0) {
        return Err(Error::SupercriticalExponent { p, d });
    }
    let nu = 0.5 * (df + 3.0 - p * (df - 1.0));
    debug_assert!(nu >= (df - 3.0) / (df - 2.0) - 1e-12 && nu <= 2.0 + 1e-12);
    Ok(nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingState {
    pub phi: f64,
    pub dphi: f64,
}

impl DuffingState {
    pub fn energy(&self) -> f64 {
        let p2 = self.phi * self.phi;
        0.5 * self.dphi * self.dphi + 0.5 * p2 + 0.25 * p2 * p2
    }
}

fn check_amplitude(phi0: f64) -> Result<()> {
    if phi0 == 0.0 || !phi0.is_finite() {
        return Err(Error::DomainError(format!("amplitude must be finite and nonzero, got {phi0}")));
    }
    Ok(())
}

/// (omega, k) with phi = phi0 cn(omega tau, k): omega^2 = 1 + phi0^2 and
/// k^2 = phi0^2 / (2 (1 + phi0^2)).
pub fn duffing_parameters(phi0: f64) -> Result<(f64, f64)> {
    check_amplitude(phi0)?;
    let p2 = phi0 * phi0;
    Ok(((1.0 + p2).sqrt(), (p2 / (2.0 * (1.0 + p2))).sqrt()))
}

/// T = 4 K(k) / omega.
pub fn duffing_period(phi0: f64) -> Result<f64> {
    let (omega, k) = duffing_parameters(phi0)?;
    Ok(4.0 * elliptic_k(k)? / omega)
}

/// Upper bound on the period from K(k) <= (pi/2)(1 + ln(1 + k^2/k'^2)/pi).
pub fn duffing_period_bound(phi0: f64) -> Result<f64> {
    let (omega, _) = duffing_parameters(phi0)?;
    let p2 = phi0 * phi0;
    Ok(2.0 * PI / omega * (1.0 + (p2 / (p2 + 2.0)).ln_1p() / PI))
}

pub fn duffing_closed_form(phi0: f64, tau: f64) -> Result<f64> {
    let (omega, k) = duffing_parameters(phi0)?;
    Ok(phi0 * jacobi_cn(omega * tau, k)?)
}

fn duffing_rhs(_: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], -y[0] - y[0] * y[0] * y[0]]
}

fn duffing_opts() -> OdeOptions {
    OdeOptions::with_tol(1e-13, 1e-15)
}

/// Period from direct integration: the fourth sign change of phi' after
/// tau = 0 sits at two periods; each crossing is polished by bisection on the
/// step interpolant.
pub fn duffing_period_numeric(phi0: f64) -> Result<f64> {
    let (omega, _) = duffing_parameters(phi0)?;
    let horizon = 4.0 * 2.0 * PI / omega + 10.0;
    let mut crossings = Vec::new();
    integrate(&duffing_rhs, 0.0, [phi0, 0.0], horizon, &duffing_opts(), |_| f64::INFINITY, |step| {
        let (t0, t1) = (step.t_start(), step.t_end());
        let (d0, d1) = (step.eval(t0)[1], step.eval(t1)[1]);
        if t0 > 0.0 && d0 != 0.0 && d0.signum() != d1.signum() {
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if step.eval(mid)[1].signum() == d0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(0.5 * (lo + hi));
        } else if t0 > 0.0 && d0 == 0.0 {
            crossings.push(t0);
        }
        if crossings.len() >= 4 {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if crossings.len() < 4 {
        return Err(Error::NoConvergence(format!("only {} turning points within {horizon}", crossings.len())));
    }
    Ok(0.5 * crossings[3])
}

/// Trajectory from (phi0, 0) at the given increasing times.
pub fn duffing_trajectory(phi0: f64, taus: &[f64]) -> Result<Vec<DuffingState>> {
    check_amplitude(phi0)?;
    let ys = crate::numerics::ode::solve_sampled(&duffing_rhs, 0.0, [phi0, 0.0], taus, &duffing_opts(), |_| f64::INFINITY)?;
    Ok(ys.into_iter().map(|y| DuffingState { phi: y[0], dphi: y[1] }).collect())
}

/// One row of the period table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingRow {
    pub phi0: f64,
    pub period: f64,
    pub period_numeric: f64,
    pub bound: f64,
    pub rel_diff: f64,
}

pub fn duffing_table(phis: &[f64]) -> Result<Vec<DuffingRow>> {
    phis.iter()
        .map(|&p| {
            let period = duffing_period(p)?;
            let period_numeric = duffing_period_numeric(p)?;
            Ok(DuffingRow {
                phi0: p,
                period,
                period_numeric,
                bound: duffing_period_bound(p)?,
                rel_diff: (period - period_numeric).abs() / period,
            })
        })
        .collect()
}
