//! What the mode equation sees: a potential V along the conformal line,
//! parametrised so that distances to finite ends stay exact.
//!
//! Chart backgrounds are integrated in l = ln sigma on each patch (tau and
//! V are closed-form functions of l there), analytic ones in an offset from
//! an anchor.

use std::sync::Arc;

use crate::cosmology::{Anchor, ConformalChart, Endpoint, Side, Tau};
use crate::error::{Error, Result};
use crate::potential::{potential_at, potential_jet_at, CouplingSpec};

/// A point handed to an analytic potential: absolute tau and the exact
/// distances to both ends (infinite for infinite ends).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPoint {
    pub tau: f64,
    pub to_plus: f64,
    pub from_minus: f64,
}

type VFn = dyn Fn(&TauPoint) -> [f64; 2] + Send + Sync;

/// V(tau) given in closed form, returning (V, dV/dtau).
#[derive(Clone)]
pub struct AnalyticPotential {
    pub tau_minus: Endpoint,
    pub tau_plus: Endpoint,
    v: Arc<VFn>,
}

impl std::fmt::Debug for AnalyticPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticPotential")
            .field("tau_minus", &self.tau_minus)
            .field("tau_plus", &self.tau_plus)
            .finish_non_exhaustive()
    }
}

impl AnalyticPotential {
    pub fn new(tau_minus: Endpoint, tau_plus: Endpoint, v: impl Fn(&TauPoint) -> [f64; 2] + Send + Sync + 'static) -> Self {
        AnalyticPotential { tau_minus, tau_plus, v: Arc::new(v) }
    }

    /// V = c on the whole line.
    pub fn constant(c: f64) -> Self {
        Self::new(Endpoint::Infinite, Endpoint::Infinite, move |_| [c, 0.0])
    }

    /// V = v_minus + (v_plus - v_minus)(1 + tanh(tau/width))/2 on the whole line.
    pub fn tanh_step(v_minus: f64, v_plus: f64, width: f64) -> Self {
        Self::new(Endpoint::Infinite, Endpoint::Infinite, move |p| {
            let th = (p.tau / width).tanh();
            let jump = v_plus - v_minus;
            [v_minus + 0.5 * jump * (1.0 + th), 0.5 * jump * (1.0 - th * th) / width]
        })
    }

    /// V = coef (tau+ - tau)^power on (tau_minus, tau_plus).
    pub fn power_to_plus(tau_minus: f64, tau_plus: f64, coef: f64, power: f64) -> Self {
        Self::new(Endpoint::Finite(tau_minus), Endpoint::Finite(tau_plus), move |p| {
            let d = p.to_plus;
            [coef * d.powf(power), -coef * power * d.powf(power - 1.0)]
        })
    }

    pub fn eval(&self, p: &TauPoint) -> [f64; 2] {
        (self.v)(p)
    }

    fn endpoint(&self, anchor: Anchor) -> Result<f64> {
        match anchor {
            Anchor::Origin => Ok(0.0),
            Anchor::Plus => self.tau_plus.finite().ok_or(Error::NonIntegrableEndpoint(Side::Future)),
            Anchor::Minus => self.tau_minus.finite().ok_or(Error::NonIntegrableEndpoint(Side::Past)),
        }
    }

    fn point(&self, anchor: Anchor, s: f64) -> TauPoint {
        let tm = self.tau_minus.finite();
        let tp = self.tau_plus.finite();
        let base = match anchor {
            Anchor::Origin => 0.0,
            Anchor::Plus => tp.unwrap_or(0.0),
            Anchor::Minus => tm.unwrap_or(0.0),
        };
        let tau = base + s;
        let to_plus = match (anchor, tp) {
            (Anchor::Plus, _) => -s,
            (_, Some(tp)) => tp - tau,
            (_, None) => f64::INFINITY,
        };
        let from_minus = match (anchor, tm) {
            (Anchor::Minus, _) => s,
            (_, Some(tm)) => tau - tm,
            (_, None) => f64::INFINITY,
        };
        TauPoint { tau, to_plus, from_minus }
    }
}

/// The potential a mode evolves in.
#[derive(Debug, Clone, Copy)]
pub enum Background<'a> {
    Chart { chart: &'a ConformalChart, coupling: CouplingSpec },
    Analytic(&'a AnalyticPotential),
}

/// One piece of an integration path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Segment {
    /// x = l on the patch of `side`
    Patch { side: Side, x0: f64, x1: f64, cap: f64 },
    /// x = offset s from `anchor`; `cap_near_zero` when the anchor is a finite end
    Offset { anchor: Anchor, x0: f64, x1: f64, cap_near_zero: bool },
}

impl Segment {
    pub fn x0(&self) -> f64 {
        match *self {
            Segment::Patch { x0, .. } | Segment::Offset { x0, .. } => x0,
        }
    }

    pub fn x1(&self) -> f64 {
        match *self {
            Segment::Patch { x1, .. } | Segment::Offset { x1, .. } => x1,
        }
    }

    /// Largest step allowed at x: half the distance to a finite end.
    pub fn max_step(&self, x: f64) -> f64 {
        match *self {
            Segment::Patch { cap, .. } => cap,
            Segment::Offset { cap_near_zero: true, .. } => (0.5 * x.abs()).max(f64::MIN_POSITIVE),
            Segment::Offset { .. } => f64::INFINITY,
        }
    }
}

/// Background data at one path point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PathPoint {
    pub dtau_dx: f64,
    pub v: f64,
    /// dV/dtau, filled only on request
    pub dv: f64,
}

impl<'a> Background<'a> {
    pub fn tau_minus(&self) -> Endpoint {
        match self {
            Background::Chart { chart, .. } => chart.tau_minus,
            Background::Analytic(p) => p.tau_minus,
        }
    }

    pub fn tau_plus(&self) -> Endpoint {
        match self {
            Background::Chart { chart, .. } => chart.tau_plus,
            Background::Analytic(p) => p.tau_plus,
        }
    }

    pub fn endpoint(&self, side: Side) -> Endpoint {
        match side {
            Side::Past => self.tau_minus(),
            Side::Future => self.tau_plus(),
        }
    }

    /// Is the end on this side a singular one (as opposed to a regular cut of a chart)?
    pub fn is_singular(&self, side: Side) -> bool {
        match self {
            Background::Chart { chart, .. } => chart.is_singular(side),
            Background::Analytic(_) => true,
        }
    }

    /// Absolute conformal time of an anchored time.
    pub fn absolute(&self, tau: Tau) -> Result<f64> {
        match self {
            Background::Chart { chart, .. } => chart.absolute(tau),
            Background::Analytic(p) => Ok(p.endpoint(tau.anchor)? + tau.s),
        }
    }

    pub fn reanchor(&self, tau: Tau, anchor: Anchor) -> Result<Tau> {
        if tau.anchor == anchor {
            return Ok(tau);
        }
        let abs = self.absolute(tau)?;
        let origin = self.absolute(Tau { anchor, s: 0.0 })?;
        Ok(Tau { anchor, s: abs - origin })
    }

    /// Exact conformal distance from `tau` to the end on `side`, if finite.
    pub fn distance_to(&self, tau: Tau, side: Side) -> Result<Option<f64>> {
        let (anchor, sign) = match side {
            Side::Future => (Anchor::Plus, -1.0),
            Side::Past => (Anchor::Minus, 1.0),
        };
        if !self.endpoint(side).is_finite() {
            return Ok(None);
        }
        Ok(Some(sign * self.reanchor(tau, anchor)?.s))
    }

    /// V at a conformal time.
    pub fn potential(&self, tau: Tau) -> Result<f64> {
        match self {
            Background::Chart { chart, coupling } => Ok(potential_at(chart, coupling, chart.locate(tau)?)),
            Background::Analytic(p) => {
                let t = self.checked(tau)?;
                Ok(p.eval(&p.point(t.anchor, t.s))[0])
            }
        }
    }

    /// (V, dV/dtau) at a conformal time.
    pub fn potential_jet(&self, tau: Tau) -> Result<[f64; 2]> {
        match self {
            Background::Chart { chart, coupling } => {
                let j = potential_jet_at(chart, coupling, chart.locate(tau)?);
                Ok([j[0], j[1]])
            }
            Background::Analytic(p) => {
                let t = self.checked(tau)?;
                Ok(p.eval(&p.point(t.anchor, t.s)))
            }
        }
    }

    fn checked(&self, tau: Tau) -> Result<Tau> {
        let inside_plus = self.distance_to(tau, Side::Future)?.map_or(true, |d| d > 0.0);
        let inside_minus = self.distance_to(tau, Side::Past)?.map_or(true, |d| d > 0.0);
        if !(inside_plus && inside_minus && tau.s.is_finite()) {
            return Err(Error::OutOfChart(tau.s));
        }
        Ok(tau)
    }

    /// Reject points closer than `margin` to a finite end.
    pub fn check_margin(&self, tau: Tau, margin: f64) -> Result<()> {
        for side in [Side::Past, Side::Future] {
            if let Some(d) = self.distance_to(tau, side)? {
                if d <= 0.0 {
                    return Err(Error::OutOfChart(tau.s));
                }
                if d < margin {
                    return Err(Error::EndpointReached { tau: tau.s, margin });
                }
            }
        }
        Ok(())
    }

    /// Path position (segment kind, x) of a time, for a path using `segs`.
    pub(crate) fn position(&self, segs: &[Segment], tau: Tau) -> Result<(usize, f64)> {
        match self {
            Background::Chart { chart, .. } => {
                let loc = chart.locate(tau)?;
                let i = segs
                    .iter()
                    .position(|s| matches!(s, Segment::Patch { side, .. } if *side == loc.side))
                    .ok_or(Error::OutOfChart(tau.s))?;
                Ok((i, loc.l))
            }
            Background::Analytic(_) => {
                let abs = self.absolute(tau)?;
                for (i, s) in segs.iter().enumerate() {
                    let Segment::Offset { anchor, x0, x1, .. } = *s else { unreachable!() };
                    let origin = self.absolute(Tau { anchor, s: 0.0 })?;
                    let (lo, hi) = (x0.min(x1), x0.max(x1));
                    let x = if tau.anchor == anchor { tau.s } else { abs - origin };
                    if x >= lo && x <= hi {
                        return Ok((i, x));
                    }
                }
                Err(Error::OutOfChart(tau.s))
            }
        }
    }

    /// Segments of the path from `from` to `to`.
    pub(crate) fn plan(&self, from: Tau, to: Tau) -> Result<Vec<Segment>> {
        match self {
            Background::Chart { chart, .. } => {
                let a = chart.locate(from)?;
                let b = chart.locate(to)?;
                let cap = |side: Side| {
                    let e0 = chart.leading_exponent(side);
                    if chart.is_singular(side) && e0 < 1.0 {
                        std::f64::consts::LN_2 / (1.0 - e0)
                    } else {
                        f64::INFINITY
                    }
                };
                if a.side == b.side {
                    Ok(vec![Segment::Patch { side: a.side, x0: a.l, x1: b.l, cap: cap(a.side) }])
                } else {
                    let ea = chart.patch_edge(a.side);
                    let eb = chart.patch_edge(b.side);
                    Ok(vec![
                        Segment::Patch { side: a.side, x0: a.l, x1: ea, cap: cap(a.side) },
                        Segment::Patch { side: b.side, x0: eb, x1: b.l, cap: cap(b.side) },
                    ])
                }
            }
            Background::Analytic(_) => {
                let from = self.checked(from)?;
                let to = self.checked(to)?;
                let is_end = |a: Anchor| a != Anchor::Origin;
                let seg = |anchor: Anchor, x0: f64, x1: f64| Segment::Offset { anchor, x0, x1, cap_near_zero: is_end(anchor) };
                if is_end(from.anchor) && is_end(to.anchor) && from.anchor != to.anchor {
                    // split halfway so both deep ends keep exact distances
                    let a = self.absolute(from)?;
                    let b = self.absolute(to)?;
                    let mid = Tau::at(0.5 * (a + b));
                    let m1 = self.reanchor(mid, from.anchor)?.s;
                    let m2 = self.reanchor(mid, to.anchor)?.s;
                    return Ok(vec![seg(from.anchor, from.s, m1), seg(to.anchor, m2, to.s)]);
                }
                let anchor = if is_end(to.anchor) { to.anchor } else { from.anchor };
                let x0 = self.reanchor(from, anchor)?.s;
                let x1 = self.reanchor(to, anchor)?.s;
                Ok(vec![seg(anchor, x0, x1)])
            }
        }
    }

    pub(crate) fn path_point(&self, seg: &Segment, x: f64, with_dv: bool) -> PathPoint {
        match (self, seg) {
            (Background::Chart { chart, coupling }, Segment::Patch { side, .. }) => {
                let loc = crate::cosmology::Loc { side: *side, l: x };
                let dtau_dx = 1.0 / chart.dl_dtau(loc);
                if with_dv {
                    let j = potential_jet_at(chart, coupling, loc);
                    PathPoint { dtau_dx, v: j[0], dv: j[1] }
                } else {
                    PathPoint { dtau_dx, v: potential_at(chart, coupling, loc), dv: 0.0 }
                }
            }
            (Background::Analytic(p), Segment::Offset { anchor, .. }) => {
                let [v, dv] = p.eval(&p.point(*anchor, x));
                PathPoint { dtau_dx: 1.0, v, dv }
            }
            _ => unreachable!("segment does not belong to this background"),
        }
    }
}
