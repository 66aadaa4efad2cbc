//! Scale factors with power-law singular endpoints and the conformal chart.
//!
//! Every model is stored in closed form, so all t-derivatives of a(t) up to
//! order four are exact. Internally each end of the interval is described in
//! its own side coordinate sigma (the distance in t to that end) through
//! [`shape::Shape`].

mod asymptotic;
mod chart;
pub(crate) mod shape;

pub use asymptotic::{appendix_asymptotics, AsymptoticForm, AsymptoticVariable};
pub use chart::{Anchor, ConformalChart, Loc, Tau};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use shape::Shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Past,
    Future,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Past => Side::Future,
            Side::Future => Side::Past,
        }
    }
}

/// A conformal-time endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    Finite(f64),
    Infinite,
}

impl Endpoint {
    pub fn finite(self) -> Option<f64> {
        match self {
            Endpoint::Finite(v) => Some(v),
            Endpoint::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }
}

/// Two-term asymptotics c0 s^eta0 + c1 s^eta1 of a(t) at one end, s = |t - t_end|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideParams {
    pub c0: f64,
    pub eta0: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub eta1: f64,
}

impl SideParams {
    pub fn new(c0: f64, eta0: f64, c1: f64, eta1: f64) -> Self {
        SideParams { c0, eta0, c1, eta1 }
    }

    pub fn leading(c0: f64, eta0: f64) -> Self {
        SideParams { c0, eta0, c1: 0.0, eta1: eta0 + 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    SingleEndedFuture,
    SingleEndedPast,
    TwoSidedProduct,
    ExplicitBigRip1,
    ExplicitBigRip2,
    ExplicitBigRip3,
}

/// a(t) on (t_minus, t_plus).
///
/// * `SingleEndedFuture`: a = c0 (t+ - t)^eta0 + c1 (t+ - t)^eta1 (the past end is regular)
/// * `SingleEndedPast`: same with t - t-
/// * `TwoSidedProduct`: a = c0- (t - t-)^eta0- c0+ (t+ - t)^eta0+
/// * `ExplicitBigRipN`: a = N'(t+ - t)^-N with N' = 2, 9, 64
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactorModel {
    pub kind: ModelKind,
    pub t_minus: f64,
    pub t_plus: f64,
    pub minus: SideParams,
    pub plus: SideParams,
}

const UNUSED: SideParams = SideParams { c0: 1.0, eta0: 0.0, c1: 0.0, eta1: 1.0 };

impl ScaleFactorModel {
    pub fn single_future(t_minus: f64, t_plus: f64, p: SideParams) -> Result<Self> {
        let m = ScaleFactorModel { kind: ModelKind::SingleEndedFuture, t_minus, t_plus, minus: UNUSED, plus: p };
        m.validate()?;
        Ok(m)
    }

    pub fn single_past(t_minus: f64, t_plus: f64, p: SideParams) -> Result<Self> {
        let m = ScaleFactorModel { kind: ModelKind::SingleEndedPast, t_minus, t_plus, minus: p, plus: UNUSED };
        m.validate()?;
        Ok(m)
    }

    pub fn two_sided(t_minus: f64, t_plus: f64, c0m: f64, eta0m: f64, c0p: f64, eta0p: f64) -> Result<Self> {
        let m = ScaleFactorModel {
            kind: ModelKind::TwoSidedProduct,
            t_minus,
            t_plus,
            minus: SideParams::leading(c0m, eta0m),
            plus: SideParams::leading(c0p, eta0p),
        };
        m.validate()?;
        Ok(m)
    }

    /// a = 2/(t+ - t), 9/(t+ - t)^2 or 64/(t+ - t)^3.
    pub fn big_rip(n: u32, t_minus: f64, t_plus: f64) -> Result<Self> {
        let kind = match n {
            1 => ModelKind::ExplicitBigRip1,
            2 => ModelKind::ExplicitBigRip2,
            3 => ModelKind::ExplicitBigRip3,
            _ => return Err(Error::InvalidModel(format!("no explicit Big Rip model of order {n}"))),
        };
        let mut m = ScaleFactorModel { kind, t_minus, t_plus, minus: UNUSED, plus: UNUSED };
        m.plus = m.effective_plus();
        m.validate()?;
        Ok(m)
    }

    /// Static universe a = c.
    pub fn constant(c: f64, t_minus: f64, t_plus: f64) -> Result<Self> {
        Self::single_future(t_minus, t_plus, SideParams::leading(c, 0.0))
    }

    fn effective_plus(&self) -> SideParams {
        match self.kind {
            ModelKind::ExplicitBigRip1 => SideParams::leading(2.0, -1.0),
            ModelKind::ExplicitBigRip2 => SideParams::leading(9.0, -2.0),
            ModelKind::ExplicitBigRip3 => SideParams::leading(64.0, -3.0),
            _ => self.plus,
        }
    }

    pub fn len(&self) -> f64 {
        self.t_plus - self.t_minus
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidModel(s));
        if !(self.t_minus.is_finite() && self.t_plus.is_finite() && self.t_minus < self.t_plus) {
            return bad(format!("need t_minus < t_plus, got {} and {}", self.t_minus, self.t_plus));
        }
        let check_side = |name: &str, p: &SideParams, two_term: bool| -> Result<()> {
            if !(p.c0 > 0.0 && p.c0.is_finite() && p.eta0.is_finite()) {
                return Err(Error::InvalidModel(format!("{name}: c0 must be positive and eta0 finite")));
            }
            if two_term && p.c1 != 0.0 {
                if !(p.eta1 > p.eta0 && p.c1.is_finite()) {
                    return Err(Error::InvalidModel(format!("{name}: need eta1 > eta0 when c1 != 0")));
                }
                // c1/c0 s^(eta1-eta0) is monotone in s, so positivity on (0, L] is decided at s = L
                if p.c0 + p.c1 * self.len().powf(p.eta1 - p.eta0) <= 0.0 {
                    return Err(Error::InvalidModel(format!("{name}: a(t) vanishes inside the interval")));
                }
            }
            Ok(())
        };
        match self.kind {
            ModelKind::SingleEndedFuture => check_side("plus", &self.plus, true),
            ModelKind::SingleEndedPast => check_side("minus", &self.minus, true),
            ModelKind::TwoSidedProduct => {
                check_side("minus", &self.minus, false)?;
                check_side("plus", &self.plus, false)
            }
            _ => Ok(()),
        }
    }

    /// Is the end on `side` a singular one (as opposed to a regular cut)?
    pub fn has_singular_end(&self, side: Side) -> bool {
        match self.kind {
            ModelKind::SingleEndedPast => side == Side::Past,
            ModelKind::TwoSidedProduct => true,
            _ => side == Side::Future,
        }
    }

    /// Two-term form c0 s^eta0 + c1 s^eta1 + ... of a near the given end, or
    /// `None` for a regular end.
    ///
    /// For the product model near t+: a = c0+ s^eta0+ c0- (L - s)^eta0-
    /// = c0eff s^eta0+ (1 - eta0- s/L + ...), so
    /// c0eff = c0+ c0- L^eta0-, eta1 = eta0+ + 1, c1 = -eta0- c0eff / L.
    pub fn side_form(&self, side: Side) -> Option<SideParams> {
        if !self.has_singular_end(side) {
            return None;
        }
        match self.kind {
            ModelKind::TwoSidedProduct => {
                let (near, far) = match side {
                    Side::Future => (self.plus, self.minus),
                    Side::Past => (self.minus, self.plus),
                };
                let l = self.len();
                let c0 = near.c0 * far.c0 * l.powf(far.eta0);
                Some(SideParams::new(c0, near.eta0, -far.eta0 * c0 / l, near.eta0 + 1.0))
            }
            ModelKind::SingleEndedPast => Some(self.minus),
            _ => Some(self.effective_plus()),
        }
    }

    pub(crate) fn shape(&self, side: Side) -> Shape {
        match self.kind {
            ModelKind::TwoSidedProduct => {
                let (near, far) = match side {
                    Side::Future => (self.plus, self.minus),
                    Side::Past => (self.minus, self.plus),
                };
                Shape::Product { c: near.c0 * far.c0, e_near: near.eta0, e_far: far.eta0, len: self.len() }
            }
            ModelKind::SingleEndedPast => {
                let p = self.minus;
                Shape::TwoTerm { c0: p.c0, e0: p.eta0, c1: p.c1, e1: p.eta1 }
            }
            _ => {
                let p = self.effective_plus();
                Shape::TwoTerm { c0: p.c0, e0: p.eta0, c1: p.c1, e1: p.eta1 }
            }
        }
    }

    /// Time reversal t -> t- + t+ - t.
    pub fn reversed(&self) -> ScaleFactorModel {
        match self.kind {
            ModelKind::SingleEndedFuture | ModelKind::ExplicitBigRip1 | ModelKind::ExplicitBigRip2 | ModelKind::ExplicitBigRip3 => {
                ScaleFactorModel { kind: ModelKind::SingleEndedPast, minus: self.effective_plus(), plus: UNUSED, ..*self }
            }
            ModelKind::SingleEndedPast => ScaleFactorModel { kind: ModelKind::SingleEndedFuture, minus: UNUSED, plus: self.minus, ..*self },
            ModelKind::TwoSidedProduct => ScaleFactorModel { minus: self.plus, plus: self.minus, ..*self },
        }
    }

    /// Which side coordinate describes t, and its value.
    pub(crate) fn side_of(&self, t: f64) -> (Side, f64) {
        match self.kind {
            ModelKind::SingleEndedPast => (Side::Past, t - self.t_minus),
            ModelKind::TwoSidedProduct => {
                if t >= 0.5 * (self.t_minus + self.t_plus) {
                    (Side::Future, self.t_plus - t)
                } else {
                    (Side::Past, t - self.t_minus)
                }
            }
            _ => (Side::Future, self.t_plus - t),
        }
    }

    /// d^k a / dt^k for k = 0..=4 at t, from the closed form.
    pub fn derivatives(&self, t: f64) -> Result<[f64; 5]> {
        if !(t > self.t_minus && t < self.t_plus) {
            return Err(Error::OutOfChart(t));
        }
        let (side, s) = self.side_of(t);
        Ok(self.shape(side).t_derivatives(side, s.ln()))
    }

    pub fn a(&self, t: f64) -> Result<f64> {
        self.derivatives(t).map(|d| d[0])
    }
}
