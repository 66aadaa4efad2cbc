//! Leading-order behaviour of alpha(tau) near a singular end.

use serde::{Deserialize, Serialize};

use super::{ConformalChart, ScaleFactorModel, Side};
use crate::error::{Error, Result};

/// What the leading power is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AsymptoticVariable {
    /// conformal distance to a finite end
    Distance,
    /// |tau| toward an infinite end
    Tau,
    /// exp(-+c0 tau) toward an infinite end (eta0 = 1)
    Exponential,
}

/// alpha ~ coefficient * X^exponent, X per `variable`.
///
/// For eta0 = 0 the leading term is the constant c0 and `correction_*`
/// give the first correction c1 c0^eta1 d^eta1. For eta0 = 1 the
/// coefficient includes exp(+-c0 k0) and `exponent` is 1 (in exp(-+c0 tau)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticForm {
    pub side: Side,
    pub variable: AsymptoticVariable,
    pub coefficient: f64,
    pub exponent: f64,
    /// exponent of the relative (or, for eta0 = 0, additive) correction
    pub correction_exponent: f64,
    pub correction_coefficient: f64,
    /// rate c0 of the exponential form
    pub rate: f64,
}

impl AsymptoticForm {
    /// Leading-order alpha at `x` (distance, |tau| or tau depending on variable).
    pub fn eval(&self, x: f64) -> f64 {
        match self.variable {
            AsymptoticVariable::Distance if self.exponent == 0.0 => {
                self.coefficient + self.correction_coefficient * x.powf(self.correction_exponent)
            }
            AsymptoticVariable::Distance | AsymptoticVariable::Tau => self.coefficient * x.abs().powf(self.exponent),
            AsymptoticVariable::Exponential => {
                let sign = if self.side == Side::Future { -1.0 } else { 1.0 };
                self.coefficient * (sign * self.rate * x).exp()
            }
        }
    }

    /// ln of the leading-order alpha, safe when alpha underflows.
    pub fn ln_eval(&self, x: f64) -> f64 {
        match self.variable {
            AsymptoticVariable::Exponential => {
                let sign = if self.side == Side::Future { -1.0 } else { 1.0 };
                self.coefficient.ln() + sign * self.rate * x
            }
            _ => self.eval(x).ln(),
        }
    }
}

/// Closed-form leading asymptotics of alpha at a singular end. The eta0 = 1
/// case needs the chart for k0.
pub fn appendix_asymptotics(model: &ScaleFactorModel, side: Side, chart: Option<&ConformalChart>) -> Result<AsymptoticForm> {
    let p = model
        .side_form(side)
        .ok_or_else(|| Error::InvalidArgument(format!("the {side:?} end is regular")))?;
    let (c0, e0, c1, e1) = (p.c0, p.eta0, p.c1, p.eta1);
    let mut f = AsymptoticForm {
        side,
        variable: AsymptoticVariable::Distance,
        coefficient: 0.0,
        exponent: 0.0,
        correction_exponent: 0.0,
        correction_coefficient: 0.0,
        rate: 0.0,
    };
    if e0 == 0.0 {
        f.coefficient = c0;
        f.correction_exponent = e1;
        f.correction_coefficient = c1 * c0.powf(e1);
    } else if e0 < 1.0 {
        f.coefficient = (c0 * (1.0 - e0).powf(e0)).powf(1.0 / (1.0 - e0));
        f.exponent = e0 / (1.0 - e0);
        f.correction_exponent = (e1 - e0) / (1.0 - e0);
    } else if e0 == 1.0 {
        let chart = chart.ok_or_else(|| Error::InvalidArgument("eta0 = 1 needs the chart for k0".into()))?;
        let k0 = chart.k0(side)?;
        f.variable = AsymptoticVariable::Exponential;
        let sign = if side == Side::Future { 1.0 } else { -1.0 };
        f.coefficient = c0 * (sign * c0 * k0).exp();
        f.exponent = 1.0;
        f.rate = c0;
        f.correction_exponent = e1 - 1.0;
    } else {
        f.variable = AsymptoticVariable::Tau;
        f.coefficient = c0.powf(1.0 / (1.0 - e0)) * (e0 - 1.0).powf(e0 / (1.0 - e0));
        f.exponent = e0 / (1.0 - e0);
        f.correction_exponent = -(e1 - e0) / (e0 - 1.0);
    }
    Ok(f)
}
