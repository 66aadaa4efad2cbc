//! Riccati solvers, the modified energy and the Riemann functions of the
//! inverse-square oscillator.
//!
//! Every object here lives on a finite interval [tau0, tau+) and is
//! parametrised by the distance u = tau+ - tau. Grids are geometric panels
//! toward u = 0 with Chebyshev nodes on each panel.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cosmology::{ConformalChart, Endpoint, Side, Tau};
use crate::dynamics::{tau_near, AnalyticPotential, Background, ModeSolver, ModeState, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::numerics::cheb::PanelGrid;
use crate::numerics::fit::linear_fit;
use crate::potential::CouplingSpec;

const NODES_PER_PANEL: usize = 16;
/// Innermost panel edge, relative to the starting distance.
const GRID_DEPTH: f64 = 1e-24;
const PICARD_MAX: usize = 200;
const PICARD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiccatiSign {
    /// A' - A^2 = V with V >= 0
    PositiveRHS,
    /// A' - A^2 = -W with W >= 0
    NegativeRHS,
}

impl RiccatiSign {
    fn s(self) -> f64 {
        match self {
            RiccatiSign::PositiveRHS => 1.0,
            RiccatiSign::NegativeRHS => -1.0,
        }
    }

    /// Bound on the double integral that makes the iteration contract.
    pub fn threshold(self, m: f64) -> f64 {
        match self {
            RiccatiSign::PositiveRHS => 0.25 / (m * m),
            RiccatiSign::NegativeRHS => 0.5 / m,
        }
    }
}

/// Converged solution of the Riccati equation with A(tau0) = 0.
///
/// Node arrays are ordered by increasing distance to tau+, so the last entry
/// sits at tau0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSolution {
    pub tau_plus: f64,
    pub tau0: f64,
    pub sign: RiccatiSign,
    pub m: f64,
    pub iterations_used: usize,
    pub breaks: Vec<f64>,
    pub distance: Vec<f64>,
    pub a: Vec<f64>,
    /// integral of the (nonnegative) input from tau0 to each node
    pub int_v: Vec<f64>,
    /// double integral of the input over [tau0, tau+)
    pub double_integral: f64,
    /// integral of |A| over [tau0, tau+)
    pub int_abs_a: f64,
    /// sup |A - (+-int V + int A^2)| / (1 + |A|) on the grid
    pub residual: f64,
    /// every iterate dominated the previous one at every node
    pub monotone: bool,
}

impl RiccatiSolution {
    pub fn d0(&self) -> f64 {
        self.tau_plus - self.tau0
    }

    pub fn grid(&self) -> PanelGrid {
        PanelGrid::new(self.breaks.clone(), NODES_PER_PANEL)
    }

    /// A at distance u from tau+; zero outside the solved span.
    pub fn a_at(&self, u: f64) -> f64 {
        if u >= self.d0() {
            return 0.0;
        }
        self.grid().interpolate(&self.a, u.max(self.breaks[0]))
    }

    /// (lower, upper) sandwich at node i.
    pub fn sandwich(&self, i: usize) -> (f64, f64) {
        let iv = self.int_v[i];
        match self.sign {
            RiccatiSign::PositiveRHS => (iv, 2.0 * self.m * iv),
            RiccatiSign::NegativeRHS => (-iv, -(1.0 - 0.5 / self.m) * iv),
        }
    }

    /// Sandwich at every node, the integral bound on |A| and the residual.
    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.a.len() {
            let (lo, hi) = self.sandwich(i);
            let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            if self.a[i] < lo - slack || self.a[i] > hi + slack {
                return Err(Error::BoundViolated(format!(
                    "A = {} outside [{lo}, {hi}] at distance {}",
                    self.a[i], self.distance[i]
                )));
            }
        }
        if self.int_abs_a > 0.5 / self.m * (1.0 + 1e-9) {
            return Err(Error::BoundViolated(format!("int |A| = {} exceeds 1/(2M) = {}", self.int_abs_a, 0.5 / self.m)));
        }
        if self.residual > 1e-8 {
            return Err(Error::BoundViolated(format!("Riccati residual {}", self.residual)));
        }
        Ok(())
    }
}

/// Running values of F(d) = integral_0^d u v(u) du on geometric panels over
/// (0, d1]; F is the double integral of v over the last stretch of length d.
/// The part below the innermost panel is closed with a fitted power law.
struct DoubleIntegral {
    grid: PanelGrid,
    cum: Vec<f64>,
}

impl DoubleIntegral {
    fn new(v: &(dyn Fn(f64) -> f64 + Sync), d1: f64) -> Result<Self> {
        let mut breaks = vec![d1];
        while *breaks.last().unwrap() > d1 * 1e-30 {
            let b = *breaks.last().unwrap();
            breaks.push(0.5 * b);
        }
        breaks.reverse();
        let grid = PanelGrid::new(breaks, NODES_PER_PANEL);
        let f: Vec<f64> = grid.nodes().iter().map(|&u| u * v(u)).collect();
        if f.iter().any(|y| !y.is_finite()) {
            return Err(Error::NoAdmissibleTau0);
        }
        let (a, fa, fb) = (grid.nodes()[0], f[0], f[NODES_PER_PANEL - 1]);
        let tail = if fa == 0.0 {
            0.0
        } else {
            let p = (fb / fa).ln() / std::f64::consts::LN_2;
            if !(p > -1.0) {
                return Err(Error::NoAdmissibleTau0);
            }
            a * fa / (p + 1.0)
        };
        let cum = grid.cumulative(&f).into_iter().map(|c| c + tail).collect();
        Ok(DoubleIntegral { grid, cum })
    }

    fn at(&self, d: f64) -> f64 {
        self.grid.interpolate(&self.cum, d)
    }

    fn lowest(&self) -> f64 {
        self.grid.nodes()[0]
    }
}

/// Solves A' - A^2 = +-v on [tau0, tau+) with A(tau0) = 0, where tau0 is
/// moved toward tau+ until the double integral of v is small enough.
///
/// `v` is a nonnegative function of the distance to tau+, defined on (0, d1].
pub fn solve_riccati(
    v: &(dyn Fn(f64) -> f64 + Sync),
    tau_plus: f64,
    d1: f64,
    m: f64,
    sign: RiccatiSign,
) -> Result<RiccatiSolution> {
    if !(m > 1.0) || !(d1 > 0.0) {
        return Err(Error::InvalidArgument(format!("need M > 1 and d1 > 0, got M = {m}, d1 = {d1}")));
    }
    let thr = sign.threshold(m);
    let mut d0 = d1;
    let dint = DoubleIntegral::new(v, d1)?;
    let mut f0 = dint.at(d1);
    if f0 > thr {
        let (mut lo, mut hi) = (dint.lowest(), d1);
        if dint.at(lo) > thr {
            return Err(Error::NoAdmissibleTau0);
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if dint.at(mid) > thr {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi / lo - 1.0 < 1e-14 {
                break;
            }
        }
        d0 = lo;
        f0 = dint.at(d0);
    }

    let mut breaks = vec![d0];
    while *breaks.last().unwrap() > d0 * GRID_DEPTH {
        let b = *breaks.last().unwrap();
        breaks.push(0.5 * b);
    }
    breaks.reverse();
    let grid = PanelGrid::new(breaks.clone(), NODES_PER_PANEL);
    let x = grid.nodes();
    let vv: Vec<f64> = x.iter().map(|&u| v(u)).collect();
    if let Some(bad) = vv.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidArgument(format!("input must be finite and nonnegative, got {bad}")));
    }
    // integral from tau0 (distance d0) down to each node
    let from_tau0 = |f: &[f64]| grid.cumulative_to_end(f);
    let int_v = from_tau0(&vv);
    let s = sign.s();

    let mut a = vec![0.0; x.len()];
    let mut monotone = true;
    let mut iterations_used = 0;
    let mut converged = false;
    for it in 1..=PICARD_MAX {
        let sq: Vec<f64> = a.iter().map(|y| y * y).collect();
        let int_sq = from_tau0(&sq);
        let next: Vec<f64> = int_v.iter().zip(&int_sq).map(|(iv, q)| s * iv + q).collect();
        // pointwise relative change, A grows without bound toward tau+
        let mut change = 0.0f64;
        for (n, o) in next.iter().zip(&a) {
            change = change.max((n - o).abs() / (1.0 + n.abs()));
            // panel quadrature weights are not all positive, allow its error
            if sign == RiccatiSign::PositiveRHS && *n < o - 1e-10 * (1.0 + o.abs()) {
                monotone = false;
            }
        }
        a = next;
        iterations_used = it;
        if !a.iter().all(|y| y.is_finite()) {
            break;
        }
        if change <= PICARD_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations: iterations_used });
    }

    let sq: Vec<f64> = a.iter().map(|y| y * y).collect();
    let int_sq = from_tau0(&sq);
    let residual = a
        .iter()
        .zip(int_v.iter().zip(&int_sq))
        .map(|(y, (iv, q))| (y - (s * iv + q)).abs() / (1.0 + y.abs()))
        .fold(0.0, f64::max);
    let abs_a: Vec<f64> = a.iter().map(|y| y.abs()).collect();
    let int_abs_a = grid.integral(&abs_a);
    Ok(RiccatiSolution {
        tau_plus,
        tau0: tau_plus - d0,
        sign,
        m,
        iterations_used,
        breaks,
        distance: x,
        a,
        int_v,
        double_integral: f0,
        int_abs_a,
        residual,
        monotone,
    })
}

/// One point of a mode trajectory, located by its distance to tau+.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub distance: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedEnergy {
    pub theta: f64,
    pub b_squared: f64,
    pub g_bound: f64,
    pub distance: Vec<f64>,
    pub energy: Vec<f64>,
    /// E(first) exp(int (|A| + G)) at each sample
    pub bound: Vec<f64>,
    /// max of energy/bound
    pub max_ratio: f64,
    /// max |E/E(first) - 1|
    pub drift: f64,
}

/// Allowed excess of the energy over its Gronwall bound.
pub const ENERGY_SLACK: f64 = 0.05;

/// E = (B^{2(1-theta)} |psi|^2 + B^{-2 theta} |psi' + A psi|^2)^{1/2}.
pub fn modified_energy(s: &EnergySample, a: f64, b_squared: f64, theta: f64) -> f64 {
    let w0 = b_squared.powf(1.0 - theta);
    let w1 = b_squared.powf(-theta);
    (w0 * s.psi.norm_sqr() + w1 * (s.dpsi + a * s.psi).norm_sqr()).sqrt()
}

/// Evaluates the modified energy along `trajectory` (ordered toward tau+)
/// and compares it with the Gronwall bound started at the first sample.
pub fn modified_energy_check(
    trajectory: &[EnergySample],
    a: &RiccatiSolution,
    b_squared: f64,
    theta: f64,
    g_bound: f64,
) -> Result<ModifiedEnergy> {
    if !(b_squared >= 1.0) || !(0.0..=1.0).contains(&theta) || !(g_bound >= 0.0) {
        return Err(Error::InvalidArgument(format!("B^2 = {b_squared}, theta = {theta}, G = {g_bound}")));
    }
    let Some(first) = trajectory.first() else {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    };
    let grid = a.grid();
    let abs_a: Vec<f64> = a.a.iter().map(|y| y.abs()).collect();
    let cum = grid.cumulative(&abs_a);
    let lo = a.breaks[0];
    let int_abs_to = |u: f64| grid.interpolate(&cum, u.clamp(lo, a.d0()));
    let e0 = modified_energy(first, a.a_at(first.distance), b_squared, theta);
    let c0 = int_abs_to(first.distance);
    let mut out = ModifiedEnergy {
        theta,
        b_squared,
        g_bound,
        distance: Vec::new(),
        energy: Vec::new(),
        bound: Vec::new(),
        max_ratio: 0.0,
        drift: 0.0,
    };
    for s in trajectory {
        let e = modified_energy(s, a.a_at(s.distance), b_squared, theta);
        let growth = (c0 - int_abs_to(s.distance)).abs() + g_bound * (first.distance - s.distance).abs();
        let b = e0 * growth.exp();
        out.max_ratio = out.max_ratio.max(if b > 0.0 { e / b } else { 0.0 });
        out.drift = out.drift.max(if e0 > 0.0 { (e / e0 - 1.0).abs() } else { e });
        out.distance.push(s.distance);
        out.energy.push(e);
        out.bound.push(b);
    }
    if out.max_ratio > 1.0 + ENERGY_SLACK {
        return Err(Error::BoundViolated(format!("modified energy exceeds its bound by a factor {}", out.max_ratio)));
    }
    Ok(out)
}

/// Integrates a mode from tau0 of `a` toward tau+ on `bg` and samples it at
/// the Riccati nodes no closer than `stop` to tau+.
pub fn energy_trajectory(
    bg: Background<'_>,
    a: &RiccatiSolution,
    mu: f64,
    psi0: Complex64,
    dpsi0: Complex64,
    stop: f64,
) -> Result<Vec<EnergySample>> {
    let d0 = a.d0();
    let mut ds: Vec<f64> = a.distance.iter().rev().copied().filter(|&u| u >= stop && u < d0).collect();
    ds.dedup();
    let solver = ModeSolver::new(bg).with_tol(1e-11, 1e-14);
    let init = ModeState::new(mu, tau_near(Side::Future, d0), psi0, dpsi0);
    let taus: Vec<Tau> = ds.iter().map(|&u| tau_near(Side::Future, u)).collect();
    let states = solver.evolve_sampled(&init, &taus)?;
    let mut out = vec![EnergySample { distance: d0, psi: psi0, dpsi: dpsi0 }];
    out.extend(ds.iter().zip(states).map(|(&u, s)| EnergySample { distance: u, psi: s.psi, dpsi: s.dpsi }));
    Ok(out)
}

/// Modified-energy check for one mode of a chart near its future end.
///
/// The Riccati input is |V| on the last stretch `d1` before tau+, which must
/// keep one sign there; B^2 = mu + 1 and therefore G = 1.
pub fn chart_energy_check(
    chart: &ConformalChart,
    coupling: CouplingSpec,
    mu: f64,
    theta: f64,
    m: f64,
    d1: f64,
    stop: f64,
) -> Result<ModifiedEnergy> {
    let bg = Background::Chart { chart, coupling };
    let tau_plus = match bg.endpoint(Side::Future) {
        Endpoint::Finite(t) => t,
        Endpoint::Infinite => return Err(Error::PreconditionViolated("tau+ must be finite".into())),
    };
    let v = |u: f64| bg.potential(tau_near(Side::Future, u.max(DEFAULT_MARGIN))).unwrap_or(f64::NAN);
    let probe = v(d1 * 1e-3);
    let sign = if probe >= 0.0 { RiccatiSign::PositiveRHS } else { RiccatiSign::NegativeRHS };
    let s = sign.s();
    let w = |u: f64| {
        let x = s * v(u);
        // a sign change inside the stretch surfaces as a negative input
        if x >= 0.0 || x.is_nan() { x } else { -1.0 }
    };
    let a = solve_riccati(&w, tau_plus, d1, m, sign)
        .map_err(|e| if let Error::InvalidArgument(_) = e { Error::PreconditionViolated("V changes sign near tau+".into()) } else { e })?;
    let traj = energy_trajectory(bg, &a, mu, Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), stop)?;
    modified_energy_check(&traj, &a, mu + 1.0, theta, 1.0)
}

/// (R0, R1, R0', R1') at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannValues {
    pub tau: f64,
    pub r0: f64,
    pub r1: f64,
    pub dr0: f64,
    pub dr1: f64,
}

impl RiemannValues {
    pub fn wronskian(&self) -> f64 {
        self.r0 * self.dr1 - self.r1 * self.dr0
    }
}

fn riemann_potential(q: f64, tau_plus: f64) -> AnalyticPotential {
    AnalyticPotential::power_to_plus(-1.0, tau_plus, q, -2.0)
}

/// R0 and R1 solve psi'' + lambda^2 psi + q (tau+ - tau)^{-2} psi = 0 with
/// data (1, 0) and (0, 1) at tau = 0. Samples must increase.
pub fn riemann_sampled(lambda: f64, q: f64, tau_plus: f64, taus: &[f64]) -> Result<Vec<RiemannValues>> {
    if !(q > 0.25) || !(lambda > 0.0) || !(tau_plus > 0.0) {
        return Err(Error::InvalidArgument(format!("need q > 1/4, lambda > 0, tau+ > 0 (q = {q}, lambda = {lambda})")));
    }
    if let Some(t) = taus.iter().find(|t| !(**t >= 0.0 && **t < tau_plus)) {
        return Err(Error::OutOfChart(*t));
    }
    let pot = riemann_potential(q, tau_plus);
    let solver = ModeSolver::new(Background::Analytic(&pot)).with_tol(1e-12, 1e-15);
    // R0 rides in the real part and R1 in the imaginary part
    let init = ModeState::new(lambda * lambda, Tau::at(0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    let mut out = Vec::with_capacity(taus.len());
    let rest: Vec<f64> = taus.iter().copied().filter(|&t| t > 0.0).collect();
    let n0 = taus.len() - rest.len();
    for _ in 0..n0 {
        out.push(RiemannValues { tau: 0.0, r0: 1.0, r1: 0.0, dr0: 0.0, dr1: 1.0 });
    }
    let samples: Vec<Tau> = rest.iter().map(|&t| Tau::before_plus(tau_plus - t)).collect();
    let states = solver.evolve_sampled(&init, &samples)?;
    out.extend(rest.iter().zip(states).map(|(&t, s)| RiemannValues {
        tau: t,
        r0: s.psi.re,
        r1: s.psi.im,
        dr0: s.dpsi.re,
        dr1: s.dpsi.im,
    }));
    Ok(out)
}

pub fn riemann_functions(lambda: f64, q: f64, tau: f64, tau_plus: f64) -> Result<RiemannValues> {
    Ok(riemann_sampled(lambda, q, tau_plus, &[tau])?.pop().expect("one sample"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannLambda {
    pub lambda: f64,
    /// tau_lambda = (1 - M/lambda) tau+
    pub tau_lambda: f64,
    pub c_inner: f64,
    pub c_outer: f64,
    pub c: f64,
    pub r1_inner_sup: f64,
    pub wronskian_drift: f64,
    /// |R_k| (tau+ - tau)^{-1/2} at the innermost sample, max over k
    pub end_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannBoundReport {
    pub q: f64,
    pub m: f64,
    pub tau_plus: f64,
    pub per_lambda: Vec<RiemannLambda>,
    /// max C over min C
    pub spread: f64,
    /// log-log slope of sup |R1| on the inner region against lambda
    pub r1_slope: f64,
    pub max_wronskian_drift: f64,
}

/// Largest accepted max/min of the empirical constant.
pub const RIEMANN_SPREAD: f64 = 3.0;
/// Innermost sample distance, relative to tau+.
const RIEMANN_DEPTH: f64 = 1e-10;

fn riemann_lambda(lambda: f64, q: f64, m: f64, tau_plus: f64) -> Result<RiemannLambda> {
    let tau_lambda = (1.0 - m / lambda) * tau_plus;
    let n_inner = (20.0 * lambda * tau_plus).ceil() as usize + 200;
    let mut taus: Vec<f64> = (0..=n_inner).map(|i| tau_lambda * i as f64 / n_inner as f64).collect();
    let d_lambda = tau_plus - tau_lambda;
    let decades = (d_lambda / (tau_plus * RIEMANN_DEPTH)).log10();
    let n_outer = (200.0 * decades).ceil() as usize;
    for i in 1..=n_outer {
        let u = d_lambda * 10f64.powf(-decades * i as f64 / n_outer as f64);
        taus.push(tau_plus - u);
    }
    let vals = riemann_sampled(lambda, q, tau_plus, &taus)?;
    let mut out = RiemannLambda {
        lambda,
        tau_lambda,
        c_inner: 0.0,
        c_outer: 0.0,
        c: 0.0,
        r1_inner_sup: 0.0,
        wronskian_drift: 0.0,
        end_ratio: 0.0,
    };
    for (i, r) in vals.iter().enumerate() {
        out.wronskian_drift = out.wronskian_drift.max((r.wronskian() - 1.0).abs());
        if i <= n_inner {
            let k0 = r.r0.abs() + r.dr0.abs() / lambda;
            let k1 = (r.r1.abs() + r.dr1.abs() / lambda) * lambda;
            out.c_inner = out.c_inner.max(k0).max(k1);
            out.r1_inner_sup = out.r1_inner_sup.max(r.r1.abs());
        } else {
            let u = tau_plus - r.tau;
            let k0 = (r.r0.abs() + u * r.dr0.abs()) / (lambda.sqrt() * u.sqrt());
            let k1 = (r.r1.abs() + u * r.dr1.abs()) / (u.sqrt() / lambda.sqrt());
            out.c_outer = out.c_outer.max(k0).max(k1);
        }
    }
    let last = vals.last().expect("nonempty");
    let u = tau_plus - last.tau;
    out.end_ratio = last.r0.abs().max(last.r1.abs()) / u.sqrt();
    out.c = out.c_inner.max(out.c_outer);
    Ok(out)
}

/// Empirical constants of the two Riemann-function bounds on a lambda grid.
/// Does not fail on a wide spread; use [`RiemannBoundReport::check`].
pub fn verify_riemann_bounds(q: f64, m: f64, lambdas: &[f64], tau_plus: f64) -> Result<RiemannBoundReport> {
    if !(q > 0.25) {
        return Err(Error::InvalidArgument(format!("q = {q} must exceed 1/4")));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > m)) {
        return Err(Error::InvalidArgument(format!("lambda = {l} must exceed M = {m}")));
    }
    let per_lambda: Vec<RiemannLambda> =
        lambdas.par_iter().map(|&l| riemann_lambda(l, q, m, tau_plus)).collect::<Result<_>>()?;
    let cmax = per_lambda.iter().map(|r| r.c).fold(0.0, f64::max);
    let cmin = per_lambda.iter().map(|r| r.c).fold(f64::INFINITY, f64::min);
    let lx: Vec<f64> = per_lambda.iter().map(|r| r.lambda.ln()).collect();
    let ly: Vec<f64> = per_lambda.iter().map(|r| r.r1_inner_sup.ln()).collect();
    let r1_slope = if lx.len() >= 2 { linear_fit(&lx, &ly).0 } else { f64::NAN };
    Ok(RiemannBoundReport {
        q,
        m,
        tau_plus,
        max_wronskian_drift: per_lambda.iter().map(|r| r.wronskian_drift).fold(0.0, f64::max),
        spread: cmax / cmin,
        r1_slope,
        per_lambda,
    })
}

impl RiemannBoundReport {
    pub fn check(&self) -> Result<()> {
        if !(self.spread <= RIEMANN_SPREAD) {
            return Err(Error::BoundViolated(format!("empirical constant spread {} over the lambda grid", self.spread)));
        }
        Ok(())
    }
}
