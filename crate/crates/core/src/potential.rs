//! The conformal-frame potential V(tau), the spacetime Ricci scalar, and
//! the table-driven classification of singular ends.
//!
//! With primes in tau and subscripts in t (alpha' = a a_t):
//!
//!   V = m^2 alpha^2 + kappa Q,  Q = d(d-3) alpha'^2/alpha^2 + 2d alpha''/alpha
//!     = m^2 a^2 + kappa (d(d-1) a_t^2 + 2d a a_tt),
//!
//! kappa = xi - (d-1)/(4d). The t-form is what gets evaluated: it has no
//! division by alpha and stays finite where alpha underflows.

use serde::{Deserialize, Serialize};

use crate::cosmology::{appendix_asymptotics, ConformalChart, Loc, ScaleFactorModel, Side, SideParams, Tau};
use crate::error::{Error, Result};
use crate::numerics::fit::linear_fit;

/// Curvature coupling: either the conformal value, chosen symbolically, or a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Xi {
    Conformal,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub xi: Xi,
    pub d: u32,
    pub m: f64,
}

impl CouplingSpec {
    pub fn new(xi: f64, d: u32, m: f64) -> Result<Self> {
        Self::build(Xi::Value(xi), d, m)
    }

    pub fn conformal(d: u32, m: f64) -> Result<Self> {
        Self::build(Xi::Conformal, d, m)
    }

    fn build(xi: Xi, d: u32, m: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidArgument(format!("need d >= 3, got {d}")));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be a nonnegative number, got {m}")));
        }
        if let Xi::Value(x) = xi {
            if !x.is_finite() {
                return Err(Error::InvalidArgument("xi must be finite".into()));
            }
        }
        Ok(CouplingSpec { xi, d, m })
    }

    /// (d-1)/(4d)
    pub fn conformal_value(d: u32) -> f64 {
        (d as f64 - 1.0) / (4.0 * d as f64)
    }

    pub fn xi_value(&self) -> f64 {
        match self.xi {
            Xi::Conformal => Self::conformal_value(self.d),
            Xi::Value(x) => x,
        }
    }

    pub fn is_conformal(&self) -> bool {
        matches!(self.xi, Xi::Conformal)
    }

    /// xi - (d-1)/(4d); exactly zero for conformal coupling.
    pub fn kappa(&self) -> f64 {
        match self.xi {
            Xi::Conformal => 0.0,
            Xi::Value(x) => x - Self::conformal_value(self.d),
        }
    }
}

/// V from t-derivatives of a.
pub fn potential_from_derivatives(c: &CouplingSpec, a: &[f64; 5]) -> f64 {
    let d = c.d as f64;
    let mass = c.m * c.m * a[0] * a[0];
    let k = c.kappa();
    if k == 0.0 {
        mass
    } else {
        mass + k * (d * (d - 1.0) * a[1] * a[1] + 2.0 * d * a[0] * a[2])
    }
}

/// (V, dV/dtau, d^2V/dtau^2) from t-derivatives of a.
pub fn potential_jet_from_derivatives(c: &CouplingSpec, a: &[f64; 5]) -> [f64; 3] {
    let d = c.d as f64;
    let m2 = c.m * c.m;
    let k = c.kappa();
    let [a0, a1, a2, a3, a4] = *a;
    let v = potential_from_derivatives(c, a);
    let vt = 2.0 * m2 * a0 * a1 + k * (2.0 * d * (d - 1.0) * a1 * a2 + 2.0 * d * (a1 * a2 + a0 * a3));
    let vtt = 2.0 * m2 * (a1 * a1 + a0 * a2)
        + k * (2.0 * d * (d - 1.0) * (a2 * a2 + a1 * a3) + 2.0 * d * (a2 * a2 + 2.0 * a1 * a3 + a0 * a4));
    [v, a0 * vt, a0 * (a1 * vt + a0 * vtt)]
}

pub fn potential_at(chart: &ConformalChart, c: &CouplingSpec, loc: Loc) -> f64 {
    potential_from_derivatives(c, &chart.a_derivatives(loc))
}

pub fn potential_jet_at(chart: &ConformalChart, c: &CouplingSpec, loc: Loc) -> [f64; 3] {
    potential_jet_from_derivatives(c, &chart.a_derivatives(loc))
}

/// V at a conformal time.
pub fn potential(chart: &ConformalChart, c: &CouplingSpec, tau: Tau) -> Result<f64> {
    Ok(potential_at(chart, c, chart.locate(tau)?))
}

/// R_g = R_gamma/a^2 + 2d a_tt/a + d(d-1) a_t^2/a^2.
pub fn ricci_from_derivatives(d: u32, r_gamma: f64, a: f64, a_t: f64, a_tt: f64) -> f64 {
    let d = d as f64;
    r_gamma / (a * a) + 2.0 * d * a_tt / a + d * (d - 1.0) * a_t * a_t / (a * a)
}

pub fn ricci_scalar(chart: &ConformalChart, d: u32, r_gamma: f64, tau: Tau) -> Result<f64> {
    let a = chart.a_derivatives(chart.locate(tau)?);
    Ok(ricci_from_derivatives(d, r_gamma, a[0], a[1], a[2]))
}

/// Coefficient q of the inverse-square singularity V ~ q (tau+ - tau)^-2 of
/// a non-conformally coupled field at an end with leading exponent eta0:
///
///   q = kappa d eta0 ((d+1) eta0 - 2) / (1 - eta0)^2.
///
/// Same q governs V ~ q tau^-2 at an infinite end with eta0 > 1.
pub fn q_coefficient(eta0: f64, xi: f64, d: u32) -> Result<f64> {
    if eta0 == 0.0 || eta0 == 1.0 {
        return Err(Error::DegenerateExponent(eta0));
    }
    let df = d as f64;
    let kappa = xi - CouplingSpec::conformal_value(d);
    Ok(kappa * df * eta0 * ((df + 1.0) * eta0 - 2.0) / ((1.0 - eta0) * (1.0 - eta0)))
}

fn q_of(c: &CouplingSpec, eta0: f64) -> Result<f64> {
    if c.is_conformal() {
        return Ok(0.0);
    }
    q_coefficient(eta0, c.xi_value(), c.d)
}

/// Inverse-square barrier strong enough to force decay.
pub fn condichi(q: f64) -> bool {
    q > 0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityClass {
    C1BigCrunch,
    C0BigCrunch,
    SuddenSingularity,
    BigBrake,
    SlowBigRip,
    StrongBigRip,
    /// a tends to a constant with vanishing correction: no singularity
    Regular,
}

/// Extended real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl ExtReal {
    fn infinite_with_sign(x: f64) -> ExtReal {
        if x > 0.0 {
            ExtReal::PlusInfinity
        } else {
            ExtReal::MinusInfinity
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    Yes,
    /// exists and equals zero
    YesZero,
    No,
}

impl Existence {
    pub fn exists(self) -> bool {
        !matches!(self, Existence::No)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Range {
    /// closed at lo when lo_closed, likewise at hi
    Interval { lo: f64, lo_closed: bool, hi: f64, hi_closed: bool },
    Point(f64),
    Any,
}

impl Range {
    fn contains(self, x: f64) -> bool {
        match self {
            Range::Any => true,
            Range::Point(p) => x == p,
            Range::Interval { lo, lo_closed, hi, hi_closed } => {
                (x > lo || (lo_closed && x == lo)) && (x < hi || (hi_closed && x == hi))
            }
        }
    }
}

const fn open(lo: f64, hi: f64) -> Range {
    Range::Interval { lo, lo_closed: false, hi, hi_closed: false }
}

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq)]
enum C1Sign {
    Positive,
    NonZero,
    Any,
}

/// One row of the existence tables.
#[derive(Debug, Clone, Copy)]
struct Row {
    label: &'static str,
    conformal: bool,
    class: SingularityClass,
    eta0: Range,
    eta1: Range,
    c1: C1Sign,
    needs_condichi: bool,
    cutoff: bool,
    phi0: Existence,
    phi1: Existence,
}

use Existence::{No, Yes, YesZero};
use SingularityClass::*;

#[rustfmt::skip]
const ROWS: &[Row] = &[
    // conformal coupling: rows depend on eta0 only
    Row { label: "conformal C1 crunch, eta0 >= 1", conformal: true, class: C1BigCrunch,
          eta0: Range::Interval { lo: 1.0, lo_closed: true, hi: INF, hi_closed: false }, eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: false, cutoff: true, phi0: Yes, phi1: Yes },
    Row { label: "conformal C0 crunch, 0 < eta0 < 1", conformal: true, class: C0BigCrunch,
          eta0: open(0.0, 1.0), eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: Yes },
    Row { label: "conformal big brake, eta0 = 0, eta1 > 1, c1 > 0", conformal: true, class: BigBrake,
          eta0: Range::Point(0.0), eta1: open(1.0, INF), c1: C1Sign::Positive,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: Yes },
    Row { label: "conformal sudden singularity, eta0 = 0", conformal: true, class: SuddenSingularity,
          eta0: Range::Point(0.0), eta1: Range::Any, c1: C1Sign::NonZero,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: Yes },
    Row { label: "conformal slow big rip, -1 < eta0 < 0", conformal: true, class: SlowBigRip,
          eta0: open(-1.0, 0.0), eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: Yes },
    Row { label: "conformal strong big rip, eta0 <= -1", conformal: true, class: StrongBigRip,
          eta0: Range::Interval { lo: -INF, lo_closed: false, hi: -1.0, hi_closed: true }, eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: No },
    // non-conformal coupling
    Row { label: "non-conformal C1 crunch, eta0 >= 1", conformal: false, class: C1BigCrunch,
          eta0: Range::Interval { lo: 1.0, lo_closed: true, hi: INF, hi_closed: false }, eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: false, cutoff: true, phi0: Yes, phi1: Yes },
    Row { label: "non-conformal C0 crunch with q > 1/4", conformal: false, class: C0BigCrunch,
          eta0: open(0.0, 1.0), eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: true, cutoff: false, phi0: YesZero, phi1: No },
    Row { label: "non-conformal big brake, eta0 = 0, eta1 > 1, c1 > 0", conformal: false, class: BigBrake,
          eta0: Range::Point(0.0), eta1: open(1.0, INF), c1: C1Sign::Positive,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: Yes },
    Row { label: "non-conformal sudden singularity, eta0 = 0, 0 < eta1 < 1", conformal: false, class: SuddenSingularity,
          eta0: Range::Point(0.0), eta1: open(0.0, 1.0), c1: C1Sign::NonZero,
          needs_condichi: false, cutoff: false, phi0: Yes, phi1: No },
    Row { label: "non-conformal slow big rip with q > 1/4", conformal: false, class: SlowBigRip,
          eta0: open(-1.0, 0.0), eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: true, cutoff: false, phi0: YesZero, phi1: No },
    Row { label: "non-conformal strong big rip with q > 1/4", conformal: false, class: StrongBigRip,
          eta0: Range::Interval { lo: -INF, lo_closed: false, hi: -1.0, hi_closed: true }, eta1: Range::Any, c1: C1Sign::Any,
          needs_condichi: true, cutoff: false, phi0: YesZero, phi1: No },
];

/// What the tables say about one end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub side: Side,
    pub singularity_class: SingularityClass,
    pub row: String,
    pub needs_infrared_cutoff: bool,
    pub phi0: Existence,
    pub phi1: Existence,
    pub phi0_exists: bool,
    pub phi1_exists: bool,
    pub w_isomorphism: bool,
    pub v_limit: ExtReal,
    pub v_singular_exponent: Option<f64>,
    pub q_coefficient: Option<f64>,
    pub condichi_holds: Option<bool>,
}

fn side_params(model: &ScaleFactorModel, side: Side) -> Result<SideParams> {
    model
        .side_form(side)
        .ok_or_else(|| Error::InvalidArgument(format!("the {side:?} end of this model is regular")))
}

/// Table lookup for one end of the model.
pub fn classify(model: &ScaleFactorModel, c: &CouplingSpec, side: Side) -> Result<RegimeReport> {
    let p = side_params(model, side)?;
    let report = |class, row: &str, cutoff, phi0: Existence, phi1: Existence, q: Option<f64>| -> Result<RegimeReport> {
        let v = predicted_v_asymptotics(model, c, side).ok();
        Ok(RegimeReport {
            side,
            singularity_class: class,
            row: row.to_string(),
            needs_infrared_cutoff: cutoff,
            phi0,
            phi1,
            phi0_exists: phi0.exists(),
            phi1_exists: phi1.exists(),
            w_isomorphism: phi0 == Yes && phi1 == Yes,
            v_limit: v.map_or(ExtReal::Finite(f64::NAN), |v| v.limit),
            v_singular_exponent: v.and_then(|v| v.exponent),
            condichi_holds: q.map(condichi),
            q_coefficient: q,
        })
    };
    if p.eta0 == 0.0 && p.c1 == 0.0 {
        return report(Regular, "eta0 = 0 without correction: a tends to a constant", false, Yes, Yes, None);
    }
    let q = if p.eta0 != 0.0 && p.eta0 != 1.0 && !c.is_conformal() { Some(q_of(c, p.eta0)?) } else { None };
    for row in ROWS.iter().filter(|r| r.conformal == c.is_conformal()) {
        let c1_ok = match row.c1 {
            C1Sign::Any => true,
            C1Sign::NonZero => p.c1 != 0.0,
            C1Sign::Positive => p.c1 > 0.0,
        };
        if !(row.eta0.contains(p.eta0) && row.eta1.contains(p.eta1) && c1_ok) {
            continue;
        }
        if row.needs_condichi && !q.map_or(false, condichi) {
            return Err(Error::UnclassifiedRegime(format!(
                "{}: q = {} does not exceed 1/4; for q <= 1/4 the behaviour of solutions is open (silent singularities)",
                row.label,
                q.unwrap_or(0.0)
            )));
        }
        return report(row.class, row.label, row.cutoff, row.phi0, row.phi1, q);
    }
    Err(Error::UnclassifiedRegime(format!(
        "eta0 = {}, eta1 = {}, c1 = {}, {} coupling matches no table row",
        p.eta0,
        p.eta1,
        p.c1,
        if c.is_conformal() { "conformal" } else { "non-conformal" }
    )))
}

/// Variable in which the approach of V to its limit is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VVariable {
    /// X = conformal distance to a finite end, V - V_lim ~ C X^p
    Distance,
    /// X = |tau|, V - V_lim ~ C X^p
    Tau,
    /// V - V_lim ~ C exp(p |tau|)
    Exponential,
}

/// Predicted behaviour of V near an end. If `limit` is infinite the form
/// describes V itself, otherwise V - limit. `exponent` is None when
/// V equals its limit identically near the end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VAsymptotics {
    pub side: Side,
    pub variable: VVariable,
    pub limit: ExtReal,
    pub exponent: Option<f64>,
    pub coefficient: Option<f64>,
}

/// Leading behaviour of V at a singular end, from the scale-factor
/// expansion. Coefficients use the two-term side form; for eta0 = 1 the
/// coefficient (which depends on the whole chart) is left out.
pub fn predicted_v_asymptotics(model: &ScaleFactorModel, c: &CouplingSpec, side: Side) -> Result<VAsymptotics> {
    let p = side_params(model, side)?;
    let (c0, e0, c1, e1) = (p.c0, p.eta0, p.c1, p.eta1);
    let d = c.d as f64;
    let m2 = c.m * c.m;
    let k = c.kappa();
    let mut out = VAsymptotics { side, variable: VVariable::Distance, limit: ExtReal::Finite(0.0), exponent: None, coefficient: None };
    let degenerate = |what: &str| Err(Error::UnclassifiedRegime(format!("{what}: the leading term of V vanishes")));

    if e0 == 1.0 {
        out.variable = VVariable::Exponential;
        out.limit = ExtReal::Finite(c0 * c0 * d * (d - 1.0) * k);
        // V - V_lim collects sigma^2 (mass) and sigma^(eta1-1) (coupling), sigma ~ exp(-c0 |tau|)
        let mut rate = if m2 > 0.0 { Some(2.0) } else { None };
        if k != 0.0 && c1 != 0.0 {
            rate = Some(rate.map_or(e1 - 1.0, |r: f64| r.min(e1 - 1.0)));
        }
        out.exponent = rate.map(|r| -c0 * r);
        return Ok(out);
    }
    if e0 == 0.0 {
        out.limit = ExtReal::Finite(m2 * c0 * c0);
        if c1 == 0.0 {
            return Ok(out);
        }
        if c.is_conformal() {
            if m2 > 0.0 {
                out.exponent = Some(e1);
                out.coefficient = Some(2.0 * m2 * c0 * c1 * c0.powf(e1));
            }
            return Ok(out);
        }
        if e1 == 2.0 {
            out.limit = ExtReal::Finite(m2 * c0 * c0 + 4.0 * d * k * c0 * c1);
            out.exponent = Some(2.0);
            out.coefficient = Some((2.0 * m2 * c0 * c1 + 4.0 * d * d * k * c1 * c1) * c0 * c0);
            return Ok(out);
        }
        let coef = k * 2.0 * d * e1 * (e1 - 1.0) * c1 * c0.powf(e1 - 1.0);
        if coef == 0.0 {
            return degenerate("eta0 = 0 with eta1 = 1");
        }
        if e1 < 2.0 {
            out.limit = ExtReal::infinite_with_sign(coef);
        }
        out.exponent = Some(e1 - 2.0);
        out.coefficient = Some(coef);
        return Ok(out);
    }
    if e0 > 1.0 {
        out.variable = VVariable::Tau;
    }
    if c.is_conformal() {
        // V = m^2 alpha^2 with alpha ~ A X^(eta0/(1-eta0))
        if m2 == 0.0 {
            return Ok(out);
        }
        let a = appendix_asymptotics(model, side, None)?;
        let ex = 2.0 * e0 / (1.0 - e0);
        out.limit = if ex < 0.0 { ExtReal::PlusInfinity } else { ExtReal::Finite(0.0) };
        out.exponent = Some(ex);
        out.coefficient = Some(m2 * a.coefficient * a.coefficient);
        return Ok(out);
    }
    let q = q_of(c, e0)?;
    if q == 0.0 {
        return degenerate("q = 0");
    }
    out.limit = if e0 > 1.0 { ExtReal::Finite(0.0) } else { ExtReal::infinite_with_sign(q) };
    out.exponent = Some(-2.0);
    out.coefficient = Some(q);
    Ok(out)
}

/// Least-squares fit of the approach of V to its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VFit {
    pub variable: VVariable,
    /// fitted exponent, comparable with `VAsymptotics::exponent`
    pub slope: f64,
    /// exp(intercept), with the sign of V - V_lim
    pub coefficient: f64,
    pub rms: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Fit ln|V - V_lim| against ln X (or |tau| for the exponential form) at
/// `n` points spread geometrically over `decades` decades ending at
/// `inner`. For finite ends X is the conformal distance; for infinite ends
/// X is |tau| and `inner` is the largest |tau| used; for the exponential
/// form the samples are spread over sigma in [inner 10^-decades, inner] L.
pub fn fit_v_exponent(
    chart: &ConformalChart,
    c: &CouplingSpec,
    side: Side,
    inner: f64,
    decades: f64,
    n: usize,
) -> Result<VFit> {
    let pred = predicted_v_asymptotics(&chart.model, c, side)?;
    let lim = pred.limit.finite().unwrap_or(0.0);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    let mut sign = 0.0;
    for i in 0..n {
        let f = i as f64 / (n - 1).max(1) as f64;
        let (x, loc) = match pred.variable {
            VVariable::Distance => {
                let dist = inner * 10f64.powf(decades * (1.0 - f));
                let tau = match side {
                    Side::Future => Tau::before_plus(dist),
                    Side::Past => Tau::after_minus(dist),
                };
                (dist, chart.locate(tau)?)
            }
            VVariable::Tau => {
                let t = inner * 10f64.powf(-decades * (1.0 - f));
                let tau = if side == Side::Future { t } else { -t };
                (t, chart.locate(Tau::at(tau))?)
            }
            VVariable::Exponential => {
                let l = (inner * chart.model.len()).ln() - decades * std::f64::consts::LN_10 * (1.0 - f);
                let loc = Loc { side, l };
                (chart.tau_of(loc).abs(), loc)
            }
        };
        let dv = potential_at(chart, c, loc) - lim;
        if dv == 0.0 || !dv.is_finite() {
            return Err(Error::NoConvergence(format!("V - V_lim = {dv} at X = {x}")));
        }
        sign = dv.signum();
        samples.push((x, dv));
        xs.push(if pred.variable == VVariable::Exponential { x } else { x.ln() });
        ys.push(dv.abs().ln());
    }
    let (slope, intercept, rms) = linear_fit(&xs, &ys);
    Ok(VFit { variable: pred.variable, slope, coefficient: sign * intercept.exp(), rms, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosmology::{Endpoint, ModelKind};

    fn bigrip1() -> ConformalChart {
        ConformalChart::new(ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn conformal_flag_is_symbolic() {
        let c = CouplingSpec::new(1.0 / 6.0, 3, 1.0).unwrap();
        assert!(!c.is_conformal());
        assert!(CouplingSpec::conformal(3, 1.0).unwrap().is_conformal());
        assert_eq!(CouplingSpec::conformal(3, 1.0).unwrap().xi_value(), 1.0 / 6.0);
    }

    #[test]
    fn big_rip_conformal_potential_is_inverse_distance() {
        let ch = bigrip1();
        let c = CouplingSpec::conformal(3, 1.0).unwrap();
        for &dist in &[0.2, 1e-3, 1e-9] {
            let v = potential(&ch, &c, Tau::before_plus(dist)).unwrap();
            assert!((v * dist - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn q_form_matches_t_form() {
        // V via alpha-derivatives against the t-derivative form
        let ch = bigrip1();
        let c = CouplingSpec::new(0.4, 4, 0.7).unwrap();
        let loc = ch.locate(Tau::before_plus(0.1)).unwrap();
        let [al, al1, al2] = ch.alpha_at(loc);
        let d = 4.0;
        let q = d * (d - 3.0) * al1 * al1 / (al * al) + 2.0 * d * al2 / al;
        let v = c.m * c.m * al * al + c.kappa() * q;
        assert!((potential_at(&ch, &c, loc) / v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let m = ScaleFactorModel::single_future(0.0, 1.0, SideParams::new(1.5, 0.5, 0.3, 1.7)).unwrap();
        let ch = ConformalChart::new(m).unwrap();
        let c = CouplingSpec::new(0.9, 3, 1.3).unwrap();
        let t0 = 0.3;
        let jet = potential_jet_at(&ch, &c, ch.locate(Tau::at(t0)).unwrap());
        let h = 1e-4;
        let v = |t: f64| potential(&ch, &c, Tau::at(t)).unwrap();
        let d1 = (v(t0 + h) - v(t0 - h)) / (2.0 * h);
        let d2 = (v(t0 + h) - 2.0 * v(t0) + v(t0 - h)) / (h * h);
        assert!((jet[1] - d1).abs() < 1e-6 * (1.0 + d1.abs()));
        assert!((jet[2] - d2).abs() < 1e-4 * (1.0 + d2.abs()));
    }

    #[test]
    fn static_potential_is_mass_term() {
        let m = ScaleFactorModel::constant(2.0, 0.0, 1.0).unwrap();
        let ch = ConformalChart::new(m).unwrap();
        let c = CouplingSpec::new(3.0, 3, 0.5).unwrap();
        assert!((potential(&ch, &c, Tau::at(0.1)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ricci_examples() {
        assert_eq!(ricci_from_derivatives(3, 0.0, 1.0, 0.0, 0.0), 0.0);
        assert_eq!(ricci_from_derivatives(3, 6.0, 1.0, 0.0, 0.0), 6.0);
        let h = 0.7;
        let a = (h * 1.3f64).exp();
        assert!((ricci_from_derivatives(3, 0.0, a, h * a, h * h * a) - 12.0 * h * h).abs() < 1e-13);
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_coefficient(0.5, 1.0, 3).unwrap(), 0.0);
        assert_eq!(q_coefficient(0.7, 1.0 / 6.0, 3).unwrap(), 0.0);
        assert!((q_coefficient(2.0 / 3.0, 1.0, 3).unwrap() - 10.0).abs() < 1e-13);
        assert_eq!(q_coefficient(1.0, 1.0, 3), Err(Error::DegenerateExponent(1.0)));
        assert_eq!(q_coefficient(0.0, 1.0, 3), Err(Error::DegenerateExponent(0.0)));
    }

    #[test]
    fn q_is_the_inverse_square_coefficient_of_v() {
        // independent check: D^2 V at a deep point of a pure power model
        for &(e0, xi, d) in &[(2.0 / 3.0, 1.0, 3u32), (0.3, -0.5, 4), (-0.5, 1.0, 3), (-2.0, 0.5, 5)] {
            let m = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, e0)).unwrap();
            let ch = ConformalChart::new(m).unwrap();
            let c = CouplingSpec::new(xi, d, 0.0).unwrap();
            let dist = 1e-10;
            let v = potential(&ch, &c, Tau::before_plus(dist)).unwrap();
            let q = q_coefficient(e0, xi, d).unwrap();
            assert!((v * dist * dist / q - 1.0).abs() < 1e-9, "eta0 {e0}: {} vs {q}", v * dist * dist);
        }
    }

    #[test]
    fn examples_of_classification() {
        let brake = ScaleFactorModel::single_future(0.0, 1.0, SideParams::new(1.0, 0.0, 0.5, 2.0)).unwrap();
        for c in [CouplingSpec::conformal(3, 1.0).unwrap(), CouplingSpec::new(0.0, 3, 1.0).unwrap()] {
            let r = classify(&brake, &c, Side::Future).unwrap();
            assert_eq!(r.singularity_class, BigBrake);
            assert!(r.phi0_exists && r.phi1_exists && !r.needs_infrared_cutoff);
        }
        let strong = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, -1.5)).unwrap();
        let r = classify(&strong, &CouplingSpec::conformal(3, 1.0).unwrap(), Side::Future).unwrap();
        assert_eq!(r.singularity_class, StrongBigRip);
        assert!(r.phi0_exists && !r.phi1_exists);
        let c0 = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, 0.5)).unwrap();
        let e = classify(&c0, &CouplingSpec::new(0.0, 3, 1.0).unwrap(), Side::Future).unwrap_err();
        assert!(matches!(e, Error::UnclassifiedRegime(ref s) if s.contains("open")));
    }

    #[test]
    fn cutoff_iff_infinite_end() {
        for &e0 in &[-2.0, -1.0, -0.5, 0.5, 1.0, 1.5, 3.0] {
            let m = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, e0)).unwrap();
            let ch = ConformalChart::new(m).unwrap();
            let r = classify(&m, &CouplingSpec::conformal(3, 1.0).unwrap(), Side::Future).unwrap();
            assert_eq!(r.needs_infrared_cutoff, ch.tau_plus == Endpoint::Infinite);
        }
    }

    #[test]
    fn predicted_examples() {
        let sudden = ScaleFactorModel::single_future(0.0, 1.0, SideParams::new(2.0, 0.0, 1.0, 0.5)).unwrap();
        let p = predicted_v_asymptotics(&sudden, &CouplingSpec::conformal(3, 1.0).unwrap(), Side::Future).unwrap();
        assert_eq!(p.limit, ExtReal::Finite(4.0));
        let half = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, 0.5)).unwrap();
        let p = predicted_v_asymptotics(&half, &CouplingSpec::conformal(3, 1.0).unwrap(), Side::Future).unwrap();
        assert_eq!(p.exponent, Some(2.0));
        let one = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, 1.0)).unwrap();
        let p = predicted_v_asymptotics(&one, &CouplingSpec::new(0.0, 3, 1.0).unwrap(), Side::Future).unwrap();
        assert!((p.limit.finite().unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eta_one_limit_matches_numerics() {
        // the kappa c0^2 d(d-1) limit, checked against V deep in the chart
        let one = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, 1.0)).unwrap();
        let ch = ConformalChart::new(one).unwrap();
        let c = CouplingSpec::new(0.0, 3, 1.0).unwrap();
        let v = potential(&ch, &c, Tau::at(40.0)).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        assert_eq!(one.kind, ModelKind::SingleEndedFuture);
    }

    #[test]
    fn fitted_exponents() {
        let half = ScaleFactorModel::single_future(0.0, 1.0, SideParams::leading(1.0, 0.5)).unwrap();
        let ch = ConformalChart::new(half).unwrap();
        let f = fit_v_exponent(&ch, &CouplingSpec::conformal(3, 1.0).unwrap(), Side::Future, 1e-5, 2.0, 9).unwrap();
        assert!((f.slope - 2.0).abs() < 0.05);
        let f = fit_v_exponent(&ch, &CouplingSpec::new(1.0, 3, 1.0).unwrap(), Side::Future, 1e-5, 2.0, 9);
        assert!(f.is_err(), "q = 0 at eta0 = 1/2, d = 3");
    }
}
