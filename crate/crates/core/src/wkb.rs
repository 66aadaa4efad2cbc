//! Liouville-Green approximations of psi'' + (mu + V) psi = 0 for large mu:
//! the A_k series and the phase-integral form, with error studies against
//! direct integration.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cosmology::{Endpoint, Tau};
use crate::dynamics::{AnalyticPotential, Background, ModeSolver, ModeState};
use crate::error::{Error, Result};
use crate::numerics::cheb::PanelGrid;
use crate::numerics::fit::linear_fit;

const NODES_PER_PANEL: usize = 16;
const PANEL_WIDTH: f64 = 0.5;

/// A potential with derivatives up to `order`.
#[derive(Clone)]
pub struct SmoothPotential {
    pub order: usize,
    f: Arc<dyn Fn(f64, usize) -> Vec<f64> + Send + Sync>,
}

impl std::fmt::Debug for SmoothPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothPotential").field("order", &self.order).finish()
    }
}

impl SmoothPotential {
    /// `f(tau, n)` returns V, V', ..., V^(n) for n <= order.
    pub fn new(order: usize, f: impl Fn(f64, usize) -> Vec<f64> + Send + Sync + 'static) -> Self {
        SmoothPotential { order, f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(usize::MAX, move |_, n| {
            let mut v = vec![0.0; n + 1];
            v[0] = c;
            v
        })
    }

    /// c exp(-(tau/w)^2), derivatives through Hermite polynomials.
    pub fn gaussian(c: f64, w: f64) -> Self {
        Self::new(usize::MAX, move |t, n| {
            let x = t / w;
            let g = c * (-x * x).exp();
            let (mut h0, mut h1) = (1.0, 2.0 * x);
            let mut out = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let hk = if k == 0 { h0 } else { h1 };
                let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                out.push(sgn * hk * g / w.powi(k as i32));
                if k >= 1 {
                    let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
            }
            out
        })
    }

    pub fn derivatives(&self, tau: f64, n: usize) -> Result<Vec<f64>> {
        if n > self.order {
            return Err(Error::InsufficientSmoothness { needed: n, available: self.order });
        }
        Ok((self.f)(tau, n))
    }

    /// The same V for the mode integrator, on the whole line.
    pub fn to_analytic(&self) -> AnalyticPotential {
        let f = self.f.clone();
        AnalyticPotential::new(Endpoint::Infinite, Endpoint::Infinite, move |p| {
            let v = f(p.tau, 1);
            [v[0], v[1]]
        })
    }
}

fn panel_grid(span: (f64, f64)) -> Result<PanelGrid> {
    let (a, b) = span;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("bad span [{a}, {b}]")));
    }
    let panels = (((b - a) / PANEL_WIDTH).ceil() as usize).max(8);
    Ok(PanelGrid::uniform(a, b, panels, NODES_PER_PANEL))
}

/// 0 if the span contains it, otherwise its left end.
fn base_point(span: (f64, f64)) -> f64 {
    if span.0 <= 0.0 && 0.0 <= span.1 {
        0.0
    } else {
        span.0
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tables of A_0 .. A_{order+1} and their derivatives on a panel grid.
///
/// A_0 = 1 and A_{k+1} = -A_k'/2 - (1/2) int_base^tau V A_k, where base is 0
/// when the span contains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlverSeries {
    pub order: usize,
    pub span: (f64, f64),
    pub base: f64,
    pub nodes: Vec<f64>,
    /// tables[k][j][i] = j-th derivative of A_k at node i
    pub tables: Vec<Vec<Vec<f64>>>,
    pub v: Vec<f64>,
    /// integral of |A'_{order+1}| over the span
    pub a_prime_l1: f64,
}

pub fn build_olver_series(v: &SmoothPotential, order: usize, span: (f64, f64)) -> Result<OlverSeries> {
    if v.order < order {
        return Err(Error::InsufficientSmoothness { needed: order, available: v.order });
    }
    let grid = panel_grid(span)?;
    let nodes = grid.nodes();
    let base = base_point(span);
    let vd: Vec<Vec<f64>> = nodes.iter().map(|&t| v.derivatives(t, order)).collect::<Result<_>>()?;
    // vj[r][i] = V^(r) at node i
    let vj: Vec<Vec<f64>> = (0..=order).map(|r| vd.iter().map(|d| d[r]).collect()).collect();
    let n = nodes.len();
    let depth = |k: usize| order + 2 - k;
    let mut tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(order + 2);
    let mut a0 = vec![vec![0.0; n]; depth(0) + 1];
    a0[0] = vec![1.0; n];
    tables.push(a0);
    for k in 0..=order {
        let ak = &tables[k];
        let jn = depth(k + 1);
        // derivatives of V A_k up to order jn - 1
        let prod: Vec<Vec<f64>> = (0..jn)
            .map(|m| {
                (0..n)
                    .map(|i| (0..=m).map(|r| binomial(m, r) * vj[r][i] * ak[m - r][i]).sum())
                    .collect()
            })
            .collect();
        let cum = grid.cumulative(&prod[0]);
        let at_base = grid.interpolate(&cum, base);
        let mut next = Vec::with_capacity(jn + 1);
        next.push((0..n).map(|i| -0.5 * ak[1][i] - 0.5 * (cum[i] - at_base)).collect::<Vec<f64>>());
        for j in 1..=jn {
            next.push((0..n).map(|i| -0.5 * ak[j + 1][i] - 0.5 * prod[j - 1][i]).collect());
        }
        tables.push(next);
    }
    let abs_d: Vec<f64> = tables[order + 1][1].iter().map(|x| x.abs()).collect();
    let a_prime_l1 = grid.integral(&abs_d);
    Ok(OlverSeries { order, span, base, nodes, tables, v: vj[0].clone(), a_prime_l1 })
}

impl OlverSeries {
    fn grid(&self) -> PanelGrid {
        panel_grid(self.span).expect("validated at build")
    }

    /// j-th derivative of A_k at tau.
    pub fn a(&self, k: usize, j: usize, tau: f64) -> f64 {
        self.grid().interpolate(&self.tables[k][j], tau)
    }

    /// A_k at both ends of the span, used as the horizon estimate of its
    /// limits at +-infinity.
    pub fn end_values(&self, k: usize) -> (f64, f64) {
        let t = &self.tables[k][0];
        (t[0], *t.last().unwrap())
    }

    /// max |A_{k+1} + A_k'/2 + (1/2) int V A_k| over the nodes, with the
    /// integral recomputed by adaptive quadrature on the interpolants.
    pub fn recursion_residual(&self, k: usize, probes: &[f64]) -> Result<f64> {
        let g = self.grid();
        let mut worst = 0.0f64;
        for &t in probes {
            let (iv, _) = crate::numerics::quad::integrate(
                |s| g.interpolate(&self.v, s) * g.interpolate(&self.tables[k][0], s),
                self.base,
                t,
                1e-12,
                1e-14,
            )?;
            let r = self.a(k + 1, 0, t) + 0.5 * self.a(k, 1, t) + 0.5 * iv;
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }
}

/// Truncated series e^{i k tau} sum_{j<=order} A_j/(ik)^j, k = sqrt(mu), and
/// its derivative.
pub fn wkb_solution(series: &OlverSeries, mu: f64, tau: f64) -> (Complex64, Complex64) {
    let ik = Complex64::new(0.0, mu.sqrt());
    let mut s = Complex64::new(0.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for k in 0..=series.order {
        s += series.a(k, 0, tau) * p;
        ds += series.a(k, 1, tau) * p;
        p /= ik;
    }
    let e = (ik * tau).exp();
    (e * s, e * (ik * s + ds))
}

/// |w'' + (mu + V) w| for the truncated series; equals 2|A'_{order+1}| mu^{-order/2}
/// up to the table accuracy.
pub fn wkb_residual(series: &OlverSeries, mu: f64, tau: f64) -> f64 {
    let ik = Complex64::new(0.0, mu.sqrt());
    let mut s = Complex64::new(0.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);
    let mut dds = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for k in 0..=series.order {
        s += series.a(k, 0, tau) * p;
        ds += series.a(k, 1, tau) * p;
        dds += series.a(k, 2, tau) * p;
        p /= ik;
    }
    let v = series.grid().interpolate(&series.v, tau);
    (dds + 2.0 * ik * ds + v * s).norm()
}

/// omega = sqrt(mu + V), its phase and Olver's error-control integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseIntegralForm {
    pub mu: f64,
    pub span: (f64, f64),
    pub base: f64,
    pub nodes: Vec<f64>,
    pub omega: Vec<f64>,
    pub domega: Vec<f64>,
    /// int_base^tau omega
    pub phase: Vec<f64>,
    /// int over the span of (mu+V)^{-1/4} |((mu+V)^{-1/4})''|
    pub budget: f64,
}

pub fn build_phase_integral(v: &SmoothPotential, mu: f64, span: (f64, f64)) -> Result<PhaseIntegralForm> {
    let grid = panel_grid(span)?;
    let nodes = grid.nodes();
    let base = base_point(span);
    let mut omega = Vec::with_capacity(nodes.len());
    let mut domega = Vec::with_capacity(nodes.len());
    let mut density = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        let d = v.derivatives(t, 2)?;
        let f = mu + d[0];
        if !(f >= 1.0) {
            return Err(Error::PreconditionViolated(format!("mu + V = {f} < 1 at tau = {t}")));
        }
        omega.push(f.sqrt());
        domega.push(0.5 * d[1] / f.sqrt());
        // ((f)^{-1/4})'' = -f''/(4 f^{5/4}) + 5 f'^2/(16 f^{9/4})
        let dd = -0.25 * d[2] * f.powf(-1.25) + 5.0 / 16.0 * d[1] * d[1] * f.powf(-2.25);
        density.push(f.powf(-0.25) * dd.abs());
    }
    let cum = grid.cumulative(&omega);
    let at_base = grid.interpolate(&cum, base);
    let phase = cum.iter().map(|c| c - at_base).collect();
    Ok(PhaseIntegralForm { mu, span, base, nodes, omega, domega, phase, budget: grid.integral(&density) })
}

impl PhaseIntegralForm {
    /// w = 2^{-1/2} omega^{-1/2} exp(i phase) and w'.
    pub fn solution(&self, tau: f64) -> (Complex64, Complex64) {
        let g = panel_grid(self.span).expect("validated at build");
        let om = g.interpolate(&self.omega, tau);
        let dom = g.interpolate(&self.domega, tau);
        let ph = g.interpolate(&self.phase, tau);
        let w = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2 / om.sqrt(), ph);
        (w, w * Complex64::new(-0.5 * dom / om, om))
    }

    /// exp(budget) - 1, the bound on |epsilon| over the span.
    pub fn error_bound(&self) -> f64 {
        self.budget.exp_m1()
    }
}

pub fn phase_integral_solution(v: &SmoothPotential, mu: f64, span: (f64, f64), tau: f64) -> Result<(Complex64, Complex64)> {
    Ok(build_phase_integral(v, mu, span)?.solution(tau))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbErrorPoint {
    pub mu: f64,
    /// sup |psi - w| for the series, psi seeded from w at the left end
    pub olver_error: f64,
    /// sup |psi/w - 1| for the phase-integral form
    pub phase_error: f64,
    pub olver_residual: f64,
    pub phase_budget: f64,
    /// sup |w_series - c w_phase| / |w_series|, c matching the two at the base point
    pub lg_difference: f64,
    /// |[psi, psi*] - [w, w*]| for the phase-seeded solution at the right end
    pub wronskian_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbComparison {
    pub order: usize,
    pub span: (f64, f64),
    pub points: Vec<WkbErrorPoint>,
    pub olver_slope: f64,
    pub phase_slope: f64,
}

fn compare_one(v: &SmoothPotential, series: &OlverSeries, mu: f64, samples: usize) -> Result<WkbErrorPoint> {
    let (a, b) = series.span;
    let pot = v.to_analytic();
    let solver = ModeSolver::new(Background::Analytic(&pot)).with_tol(1e-12, 1e-15);
    let taus: Vec<f64> = (1..=samples).map(|i| a + (b - a) * i as f64 / samples as f64).collect();
    let marks: Vec<Tau> = taus.iter().map(|&t| Tau::at(t)).collect();

    let (w0, dw0) = wkb_solution(series, mu, a);
    let exact = solver.evolve_sampled(&ModeState::new(mu, Tau::at(a), w0, dw0), &marks)?;
    let mut olver_error = 0.0f64;
    let mut olver_residual = 0.0f64;
    for (t, s) in taus.iter().zip(&exact) {
        olver_error = olver_error.max((s.psi - wkb_solution(series, mu, *t).0).norm());
        olver_residual = olver_residual.max(wkb_residual(series, mu, *t));
    }

    let pi = build_phase_integral(v, mu, series.span)?;
    let (p0, dp0) = pi.solution(a);
    let exact = solver.evolve_sampled(&ModeState::new(mu, Tau::at(a), p0, dp0), &marks)?;
    let mut phase_error = 0.0f64;
    for (t, s) in taus.iter().zip(&exact) {
        phase_error = phase_error.max((s.psi / pi.solution(*t).0 - 1.0).norm());
    }
    let last = exact.last().expect("samples > 0");
    let wr = |p: Complex64, dp: Complex64| p * dp.conj() - dp * p.conj();
    let wronskian_drift = (wr(last.psi, last.dpsi) - wr(p0, dp0)).norm();

    let c = wkb_solution(series, mu, series.base).0 / pi.solution(series.base).0;
    let mut lg_difference = 0.0f64;
    for &t in &taus {
        let ws = wkb_solution(series, mu, t).0;
        lg_difference = lg_difference.max((ws - c * pi.solution(t).0).norm() / ws.norm());
    }
    Ok(WkbErrorPoint {
        mu,
        olver_error,
        phase_error,
        olver_residual,
        phase_budget: pi.budget,
        lg_difference,
        wronskian_drift,
    })
}

/// Errors of both forms against direct integration on a mu grid, with the
/// log-log slopes of the errors against mu.
pub fn wkb_compare(v: &SmoothPotential, order: usize, span: (f64, f64), mus: &[f64], samples: usize) -> Result<WkbComparison> {
    if mus.len() < 2 || samples == 0 {
        return Err(Error::InvalidArgument("need at least two mu values and one sample".into()));
    }
    let series = build_olver_series(v, order, span)?;
    let points: Vec<WkbErrorPoint> = mus.par_iter().map(|&mu| compare_one(v, &series, mu, samples)).collect::<Result<_>>()?;
    let lx: Vec<f64> = points.iter().map(|p| p.mu.ln()).collect();
    let slope = |f: &dyn Fn(&WkbErrorPoint) -> f64| {
        let ly: Vec<f64> = points.iter().map(|p| f(p).ln()).collect();
        linear_fit(&lx, &ly).0
    };
    let olver_slope = slope(&|p| p.olver_error);
    let phase_slope = slope(&|p| p.phase_error);
    Ok(WkbComparison { order, span, points, olver_slope, phase_slope })
}
