//! The conformal chart tau(t) = int_{t0}^t ds / a(s).
//!
//! Each singular end gets a patch parametrised by l = ln sigma. Within a
//! patch tau = base - Q(l) (future end) or base + Q(l) (past end), with
//!
//!   Q(l) = g0 (u(l) - u_base) + R(l),   dQ/dl = sigma / a,
//!
//! where g0 u is the exact integral of the leading power and R integrates the
//! bounded remainder 1/h - g0 against du. For a finite end (eta0 < 1),
//! u_base = 0 and Q is the conformal distance to the endpoint itself, so
//! distances like 1e-12 keep full relative precision.

use serde::{Deserialize, Serialize};

use super::shape::Shape;
use super::{Endpoint, ModelKind, ScaleFactorModel, Side};
use crate::error::{Error, Result};
use crate::numerics::quad;

/// Which origin a conformal time is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Anchor {
    Minus,
    Origin,
    Plus,
}

/// A conformal time as an offset from an anchor. Anchoring at a finite
/// endpoint keeps the distance to that endpoint exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau {
    pub anchor: Anchor,
    pub s: f64,
}

impl Tau {
    pub fn at(tau: f64) -> Tau {
        Tau { anchor: Anchor::Origin, s: tau }
    }

    /// tau+ - d
    pub fn before_plus(d: f64) -> Tau {
        Tau { anchor: Anchor::Plus, s: -d }
    }

    /// tau- + d
    pub fn after_minus(d: f64) -> Tau {
        Tau { anchor: Anchor::Minus, s: d }
    }
}

/// A point of the chart: the patch (named by its end) and l = ln sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loc {
    pub side: Side,
    pub l: f64,
}

const TABLE_STEP: f64 = 0.25;
const DEPTH: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Patch {
    side: Side,
    shape: Shape,
    finite: bool,
    g0: f64,
    l_edge: f64,
    u_base: f64,
    base: f64,
    tl: Vec<f64>,
    tr: Vec<f64>,
    tq: Vec<f64>,
}

fn rem_integrand(shape: &Shape, l: f64) -> f64 {
    shape.remainder(l) * shape.s_over_a_lead(l)
}

impl Shape {
    /// s^(1-e0): du/dl
    fn s_over_a_lead(&self, l: f64) -> f64 {
        ((1.0 - self.e0()) * l).exp()
    }
}

fn gk(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    // integrands here are smooth on these ranges; failure means non-finite input
    quad::integrate(f, a, b, 1e-14, 1e-300).map(|v| v.0).unwrap_or(f64::NAN)
}

impl Patch {
    fn build(side: Side, shape: Shape, sigma_edge: f64, len: f64) -> Patch {
        let e0 = shape.e0();
        let finite = e0 < 1.0;
        let g0 = shape.g0();
        let l_edge = sigma_edge.ln();
        let l_min = (len * DEPTH).ln().min(l_edge - 1.0);
        let n = ((l_edge - l_min) / TABLE_STEP).ceil() as usize;
        let tl: Vec<f64> = (0..=n).map(|i| l_min + (l_edge - l_min) * i as f64 / n as f64).collect();
        let mut p = Patch {
            side,
            shape,
            finite,
            g0,
            l_edge,
            u_base: if finite { 0.0 } else { shape.u(l_edge) },
            base: 0.0,
            tl,
            tr: vec![0.0; n + 1],
            tq: vec![0.0; n + 1],
        };
        let f = |l: f64| rem_integrand(&shape, l);
        if finite {
            p.tr[0] = p.rem_from_zero(p.tl[0]);
            for i in 0..n {
                p.tr[i + 1] = p.tr[i] + gk(f, p.tl[i], p.tl[i + 1]);
            }
        } else {
            for i in (0..n).rev() {
                p.tr[i] = p.tr[i + 1] - gk(f, p.tl[i], p.tl[i + 1]);
            }
        }
        for i in 0..=n {
            p.tq[i] = p.g0 * (p.shape.u(p.tl[i]) - p.u_base) + p.tr[i];
        }
        p
    }

    /// R(l) for a finite end: int_0^{u(l)} r du by tanh-sinh (r is bounded
    /// but only Holder continuous at u = 0).
    fn rem_from_zero(&self, l: f64) -> f64 {
        let sh = self.shape;
        if sh.remainder(l) == 0.0 {
            return 0.0;
        }
        let u = sh.u(l);
        quad::tanh_sinh(|_, du, _| if du > 0.0 { sh.remainder(sh.l_of_u(du)) } else { 0.0 }, 0.0, u, 1e-15)
            .map(|v| v.0)
            .unwrap_or(f64::NAN)
    }

    fn rem(&self, l: f64) -> f64 {
        let f = |x: f64| rem_integrand(&self.shape, x);
        let l0 = self.tl[0];
        if l < l0 {
            return if self.finite {
                self.rem_from_zero(l)
            } else {
                self.tr[0] - gk(f, l, l0)
            };
        }
        let i = self.tl.partition_point(|&x| x <= l).clamp(1, self.tl.len()) - 1;
        let j = if i + 1 < self.tl.len() && (self.tl[i + 1] - l) < (l - self.tl[i]) { i + 1 } else { i };
        self.tr[j] + gk(f, self.tl[j], l)
    }

    fn q(&self, l: f64) -> f64 {
        self.g0 * (self.shape.u(l) - self.u_base) + self.rem(l)
    }

    fn tau(&self, l: f64) -> f64 {
        match self.side {
            Side::Future => self.base - self.q(l),
            Side::Past => self.base + self.q(l),
        }
    }

    fn q_target(&self, tau: f64) -> f64 {
        match self.side {
            Side::Future => self.base - tau,
            Side::Past => tau - self.base,
        }
    }

    /// Solve Q(l) = qt by safeguarded Newton.
    fn invert(&self, qt: f64) -> Result<f64> {
        if self.finite && qt <= 0.0 {
            return Err(Error::OutOfChart(qt));
        }
        let n = self.tl.len();
        if qt > self.tq[n - 1] {
            // numerically on the wrong side of the patch edge
            if qt <= self.tq[n - 1] * (1.0 + 1e-12) + 1e-300 {
                return Ok(self.l_edge);
            }
            return Err(Error::OutOfChart(qt));
        }
        let resid = |l: f64| -> (f64, f64) {
            let q = self.q(l);
            let dq = self.shape.s_over_a(l);
            if self.finite {
                (q.ln() - qt.ln(), dq / q)
            } else {
                (q - qt, dq)
            }
        };
        let (mut lo, mut hi, mut x);
        if qt >= self.tq[0] {
            let k = self.tq.partition_point(|&v| v < qt).clamp(1, n - 1);
            lo = self.tl[k - 1];
            hi = self.tl[k];
            let w = (qt - self.tq[k - 1]) / (self.tq[k] - self.tq[k - 1]);
            x = lo + w * (hi - lo);
        } else {
            hi = self.tl[0];
            let u = if self.finite {
                qt / self.g0
            } else {
                self.u_base + (qt - self.tr[0]) / self.g0
            };
            let seed = if self.shape.e0() == 1.0 || u * (1.0 - self.shape.e0()) > 0.0 {
                self.shape.l_of_u(u).min(hi)
            } else {
                hi - 1.0
            };
            let mut step = 1.0 + 0.01 * seed.abs();
            lo = seed - step;
            let mut tries = 0;
            while resid(lo).0 > 0.0 {
                hi = lo;
                step *= 2.0;
                lo -= step;
                tries += 1;
                if tries > 200 || !lo.is_finite() {
                    return Err(Error::OutOfChart(qt));
                }
            }
            x = seed.clamp(lo, hi);
        }
        for _ in 0..200 {
            let (f, df) = resid(x);
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut nx = x - f / df;
            if !(nx > lo && nx < hi) || !nx.is_finite() {
                nx = 0.5 * (lo + hi);
            }
            let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
            if (nx - x).abs() <= tol || hi - lo <= tol {
                return Ok(nx);
            }
            x = nx;
        }
        Err(Error::NoConvergence(format!("chart inversion for Q = {qt}")))
    }
}

/// The bijection t <-> tau with tau(t0) = 0.
#[derive(Debug, Clone)]
pub struct ConformalChart {
    pub model: ScaleFactorModel,
    pub t0: f64,
    pub tau_minus: Endpoint,
    pub tau_plus: Endpoint,
    patches: Vec<Patch>,
    tau_mid: f64,
}

impl ConformalChart {
    /// Chart anchored at the middle of the interval.
    pub fn new(model: ScaleFactorModel) -> Result<Self> {
        Self::with_origin(model, 0.5 * (model.t_minus + model.t_plus))
    }

    pub fn with_origin(model: ScaleFactorModel, t0: f64) -> Result<Self> {
        model.validate()?;
        let len = model.len();
        if !(t0 > model.t_minus && t0 < model.t_plus) {
            return Err(Error::InvalidArgument(format!("t0 = {t0} outside ({}, {})", model.t_minus, model.t_plus)));
        }
        let mut patches = Vec::new();
        match model.kind {
            ModelKind::TwoSidedProduct => {
                let half = 0.5 * len;
                let mut fut = Patch::build(Side::Future, model.shape(Side::Future), half, len);
                let mut past = Patch::build(Side::Past, model.shape(Side::Past), half, len);
                fut.base = fut.q(fut.l_edge);
                past.base = -past.q(past.l_edge);
                patches.push(past);
                patches.push(fut);
            }
            ModelKind::SingleEndedPast => patches.push(Patch::build(Side::Past, model.shape(Side::Past), len, len)),
            _ => patches.push(Patch::build(Side::Future, model.shape(Side::Future), len, len)),
        }
        let mut chart = ConformalChart {
            model,
            t0,
            tau_minus: Endpoint::Infinite,
            tau_plus: Endpoint::Infinite,
            patches,
            tau_mid: 0.0,
        };
        let raw = chart.raw_tau(t0);
        for p in chart.patches.iter_mut() {
            p.base -= raw;
        }
        chart.tau_mid = -raw;
        for p in &chart.patches {
            if p.tq.iter().chain(p.tr.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NoConvergence("conformal-time table has non-finite entries".into()));
            }
        }
        let (tm, tp) = chart.compute_endpoints();
        chart.tau_minus = tm;
        chart.tau_plus = tp;
        Ok(chart)
    }

    fn compute_endpoints(&self) -> (Endpoint, Endpoint) {
        let end_of = |p: &Patch| {
            if p.finite {
                Endpoint::Finite(p.base)
            } else {
                Endpoint::Infinite
            }
        };
        match self.patches.as_slice() {
            [p, f] => (end_of(p), end_of(f)),
            [p] => {
                let regular = Endpoint::Finite(p.tau(p.l_edge));
                match p.side {
                    Side::Future => (regular, end_of(p)),
                    Side::Past => (end_of(p), regular),
                }
            }
            _ => unreachable!(),
        }
    }

    fn patch(&self, side: Side) -> &Patch {
        self.patches.iter().find(|p| p.side == side).unwrap_or(&self.patches[0])
    }

    fn raw_tau(&self, t: f64) -> f64 {
        let (side, s) = self.model.side_of(t);
        self.patch(side).tau(s.ln())
    }

    pub fn endpoint(&self, side: Side) -> Endpoint {
        match side {
            Side::Past => self.tau_minus,
            Side::Future => self.tau_plus,
        }
    }

    /// Is the end on this side singular (not a regular cut of the model)?
    pub fn is_singular(&self, side: Side) -> bool {
        self.model.has_singular_end(side)
    }

    /// Refusal margin around t- and t+.
    pub fn t_margin(&self) -> f64 {
        1e-13 * self.model.len()
    }

    /// tau(t), refused within the t margin of either end.
    pub fn conformal_time(&self, t: f64) -> Result<f64> {
        let m = &self.model;
        if !(t - m.t_minus >= self.t_margin() && m.t_plus - t >= self.t_margin()) {
            return Err(Error::OutOfChart(t));
        }
        Ok(self.raw_tau(t))
    }

    /// tau(t) as an offset from the nearer finite singular end when there is
    /// one. Near such an end dt/dtau = a is large, and an absolute tau loses
    /// the digits that the distance keeps.
    pub fn conformal_time_anchored(&self, t: f64) -> Result<Tau> {
        self.conformal_time(t)?;
        let (side, s) = self.model.side_of(t);
        let loc = Loc { side, l: s.ln() };
        Ok(match (self.distance_to_end(loc), side) {
            (Some(q), Side::Future) => Tau::before_plus(q),
            (Some(q), Side::Past) => Tau::after_minus(q),
            (None, _) => Tau::at(self.tau_of(loc)),
        })
    }

    /// Value of tau at t = t- or t+ for finite ends, otherwise the
    /// `NonIntegrableEndpoint` error.
    pub fn endpoint_value(&self, side: Side) -> Result<f64> {
        self.endpoint(side).finite().ok_or(Error::NonIntegrableEndpoint(side))
    }

    pub fn absolute(&self, tau: Tau) -> Result<f64> {
        Ok(match tau.anchor {
            Anchor::Origin => tau.s,
            Anchor::Plus => self.endpoint_value(Side::Future)? + tau.s,
            Anchor::Minus => self.endpoint_value(Side::Past)? + tau.s,
        })
    }

    /// Express a time relative to another anchor.
    pub fn reanchor(&self, tau: Tau, anchor: Anchor) -> Result<Tau> {
        if tau.anchor == anchor {
            return Ok(tau);
        }
        let abs = self.absolute(tau)?;
        let origin = self.absolute(Tau { anchor, s: 0.0 })?;
        Ok(Tau { anchor, s: abs - origin })
    }

    /// Locate a conformal time in the chart.
    pub fn locate(&self, tau: Tau) -> Result<Loc> {
        // exact distance to a finite singular end
        let direct = match tau.anchor {
            Anchor::Plus if self.is_singular(Side::Future) => Some((Side::Future, -tau.s)),
            Anchor::Minus if self.is_singular(Side::Past) => Some((Side::Past, tau.s)),
            _ => None,
        };
        if let Some((side, d)) = direct {
            if !(d > 0.0) {
                return Err(Error::OutOfChart(tau.s));
            }
            let p = self.patch(side);
            if p.finite && d <= p.tq[p.tq.len() - 1] {
                let l = p.invert(d)?;
                return Ok(Loc { side, l });
            }
        }
        let t = self.absolute(tau)?;
        let inside_minus = self.tau_minus.finite().map_or(true, |v| t > v);
        let inside_plus = self.tau_plus.finite().map_or(true, |v| t < v);
        if !(inside_minus && inside_plus && t.is_finite()) {
            return Err(Error::OutOfChart(t));
        }
        let p = if self.patches.len() == 2 {
            if t >= self.tau_mid {
                &self.patches[1]
            } else {
                &self.patches[0]
            }
        } else {
            &self.patches[0]
        };
        let l = p.invert(p.q_target(t))?;
        Ok(Loc { side: p.side, l })
    }

    /// t(tau).
    pub fn invert_chart(&self, tau: f64) -> Result<f64> {
        let loc = self.locate(Tau::at(tau))?;
        Ok(self.t_of(loc))
    }

    pub fn t_of(&self, loc: Loc) -> f64 {
        match loc.side {
            Side::Future => self.model.t_plus - loc.l.exp(),
            Side::Past => self.model.t_minus + loc.l.exp(),
        }
    }

    pub fn tau_of(&self, loc: Loc) -> f64 {
        self.patch(loc.side).tau(loc.l)
    }

    /// Conformal distance from a location to the finite end of its patch.
    pub fn distance_to_end(&self, loc: Loc) -> Option<f64> {
        let p = self.patch(loc.side);
        if p.finite && self.is_singular(loc.side) {
            Some(p.q(loc.l))
        } else {
            None
        }
    }

    /// d^k a/dt^k (k = 0..=4) at a chart location.
    pub fn a_derivatives(&self, loc: Loc) -> [f64; 5] {
        self.patch(loc.side).shape.t_derivatives(loc.side, loc.l)
    }

    pub fn ln_alpha(&self, loc: Loc) -> f64 {
        self.patch(loc.side).shape.ln_a(loc.l)
    }

    /// d l / d tau at a location (l = ln of the patch coordinate).
    pub fn dl_dtau(&self, loc: Loc) -> f64 {
        let r = self.patch(loc.side).shape.a_over_s(loc.l);
        match loc.side {
            Side::Future => -r,
            Side::Past => r,
        }
    }

    /// (alpha, alpha', alpha'') with primes in tau, via dt/dtau = a.
    pub fn alpha_at(&self, loc: Loc) -> [f64; 3] {
        let d = self.a_derivatives(loc);
        let a = d[0];
        [a, d[1] * a, (d[2] * a + d[1] * d[1]) * a]
    }

    /// (alpha, alpha', alpha'') at a conformal time; `order` limits which
    /// entries are filled (the rest are zero).
    pub fn alpha_and_derivatives(&self, tau: Tau, order: usize) -> Result<[f64; 3]> {
        let loc = self.locate(tau)?;
        let mut v = self.alpha_at(loc);
        for x in v.iter_mut().skip(order.min(2) + 1) {
            *x = 0.0;
        }
        Ok(v)
    }

    /// Does the chart have a patch for this side?
    pub fn has_patch(&self, side: Side) -> bool {
        self.patches.iter().any(|p| p.side == side)
    }

    /// l at the outer edge of a patch: the midpoint for two-sided models,
    /// the regular end otherwise.
    pub fn patch_edge(&self, side: Side) -> f64 {
        self.patch(side).l_edge
    }

    /// Leading exponent eta0 of the patch for `side`.
    pub fn leading_exponent(&self, side: Side) -> f64 {
        self.patch(side).shape.e0()
    }

    /// Conformal times where the patch representation changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        if self.patches.len() == 2 {
            vec![self.tau_mid]
        } else {
            vec![]
        }
    }

    /// Sample grid (t_i, tau_i) used to seed inversions, in increasing t.
    pub fn forward_table(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in &self.patches {
            for (l, _) in p.tl.iter().zip(&p.tq) {
                let loc = Loc { side: p.side, l: *l };
                out.push((self.t_of(loc), p.tau(*l)));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    /// k0 = lim (tau +- ln(sigma)/c0) at an eta0 = 1 end, so that
    /// alpha ~ c0 exp(-+c0 (tau - k0)).
    pub fn k0(&self, side: Side) -> Result<f64> {
        let p = self.patch(side);
        if p.side != side || p.shape.e0() != 1.0 {
            return Err(Error::InvalidArgument("k0 is defined only at an eta0 = 1 end".into()));
        }
        let sh = p.shape;
        let l0 = p.tl[0];
        // R(-inf) = R(l0) - int_0^{sigma0} r(sigma)/sigma d sigma
        let tail = quad::tanh_sinh(
            |_, s, _| if s > 0.0 { sh.remainder(s.ln()) / s } else { 0.0 },
            0.0,
            l0.exp(),
            1e-15,
        )?
        .0;
        let r_inf = p.tr[0] - tail;
        Ok(match side {
            Side::Future => p.base + p.l_edge * p.g0 - r_inf,
            Side::Past => p.base - p.l_edge * p.g0 + r_inf,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosmology::SideParams;

    fn sqrt_model() -> ConformalChart {
        // a = (1 - t)^(1/2) on (-1, 1), t0 = 0
        let m = ScaleFactorModel::single_future(-1.0, 1.0, SideParams::leading(1.0, 0.5)).unwrap();
        ConformalChart::with_origin(m, 0.0).unwrap()
    }

    #[test]
    fn sqrt_scale_factor_closed_form() {
        let c = sqrt_model();
        assert!((c.conformal_time(0.75).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(c.tau_plus, Endpoint::Finite(2.0));
        assert!((c.invert_chart(1.0).unwrap() - 0.75).abs() < 1e-13);
        assert!(c.invert_chart(0.0).unwrap().abs() < 1e-15);
        // deep distance keeps relative precision
        let loc = c.locate(Tau::before_plus(1e-12)).unwrap();
        // tau+ - tau = 2 sqrt(sigma)
        assert!((loc.l.exp() / 0.25e-24 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn big_rip_one_chart() {
        let m = ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap();
        let c = ConformalChart::new(m).unwrap();
        let tp = c.tau_plus.finite().unwrap();
        let t = c.invert_chart(tp - 0.01).unwrap();
        assert!((t - 0.8).abs() < 1e-12);
        let al = c.alpha_and_derivatives(Tau::before_plus(0.25), 2).unwrap();
        assert!((al[0] - 2.0).abs() < 1e-13);
        // alpha = d^-1/2: alpha' = d^-3/2 / 2
        assert!((al[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn eta_one_end_is_infinite() {
        let m = ScaleFactorModel::single_future(0.0, 1.0, SideParams::new(1.0, 1.0, 0.5, 2.0)).unwrap();
        let c = ConformalChart::new(m).unwrap();
        assert_eq!(c.tau_plus, Endpoint::Infinite);
        assert!(matches!(c.endpoint_value(Side::Future), Err(Error::NonIntegrableEndpoint(Side::Future))));
        // tau = 1e4 sits at sigma ~ e^-1e4, far below double precision
        let loc = c.locate(Tau::at(1e4)).unwrap();
        assert!(loc.l < -9000.0);
        assert!((c.tau_of(loc) - 1e4).abs() < 1e-8);
    }

    #[test]
    fn two_sided_continuity_and_roundtrip() {
        let m = ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap();
        let c = ConformalChart::with_origin(m, 0.3).unwrap();
        let l = m.len();
        for i in 1..1000 {
            let t = m.t_minus + l * i as f64 / 1000.0;
            let tau = c.conformal_time(t).unwrap();
            let back = c.invert_chart(tau).unwrap();
            assert!((back - t).abs() <= 1e-10 * l, "t={t} back={back}");
        }
        let a = c.conformal_time(0.5 - 1e-12).unwrap();
        let b = c.conformal_time(0.5 + 1e-12).unwrap();
        assert!((b - a).abs() < 1e-10);
    }

    #[test]
    fn product_with_eta_half_closed_form() {
        // a = sqrt(t (1 - t)): tau = int dt / sqrt(t(1-t)) = 2 asin(sqrt t) - pi/2 about t0 = 1/2
        let m = ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap();
        let c = ConformalChart::new(m).unwrap();
        // powers of two keep sigma = 1 - t exact
        for &t in &[2f64.powi(-30), 0.1, 0.37, 0.5, 0.8, 1.0 - 2f64.powi(-30)] {
            let want = 2.0 * t.sqrt().asin() - std::f64::consts::FRAC_PI_2;
            assert!((c.conformal_time(t).unwrap() - want).abs() < 1e-13, "t={t}");
        }
        assert!((c.tau_plus.finite().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn k0_matches_probe_limit() {
        let m = ScaleFactorModel::single_future(0.0, 1.0, SideParams::new(2.0, 1.0, 1.0, 1.5)).unwrap();
        let c = ConformalChart::new(m).unwrap();
        let k0 = c.k0(Side::Future).unwrap();
        for &s in &[2f64.powi(-20), 2f64.powi(-30), 2f64.powi(-40)] {
            let tau = c.conformal_time(1.0 - s).unwrap();
            let v = tau + s.ln() / 2.0;
            // correction ~ s^(eta1 - 1)
            assert!((v - k0).abs() < 5.0 * s.sqrt(), "{v} {k0}");
        }
    }

    #[test]
    fn margin_is_enforced() {
        let c = sqrt_model();
        assert!(c.conformal_time(1.0 - 1e-14).is_err());
        assert!(c.invert_chart(2.5).is_err());
    }
}
