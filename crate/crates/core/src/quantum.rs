//! Bogoliubov coefficients between the in-vacuum at tau- and the out
//! frame at tau+, the pair-creation number and its summability.
//!
//! Positive frequency means psi' = +i omega psi; alpha is the coefficient of
//! the positive-frequency out solution, beta the negative one.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cosmology::{ConformalChart, Endpoint, ScaleFactorModel, Side, Tau};
use crate::dynamics::{adiabatic_scattering, frozen_state, horizon_times, vacuum_at, Background, ModeSolver, ModeState, END_DEPTH};
use crate::error::{Error, Result};
use crate::numerics::fit::linear_fit;
use crate::potential::{predicted_v_asymptotics, CouplingSpec, ExtReal};
use crate::spectrum::{l_of_d, zeta_partial, ShiftedSpectrum};

/// Tolerances for the adiabatic sweep: beta is small, so the absolute
/// tolerance sits far below the default.
pub const FRAME_RTOL: f64 = 1e-12;
pub const FRAME_ATOL: f64 = 1e-16;

/// Solver used for Bogoliubov coefficients on a chart.
pub fn frame_solver(chart: &ConformalChart, coupling: CouplingSpec) -> ModeSolver<'_> {
    ModeSolver::on_chart(chart, coupling).with_tol(FRAME_RTOL, FRAME_ATOL)
}

/// Asymptotic frame at one end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InOutBasis {
    pub side: Side,
    pub v_limit: f64,
    pub endpoint: Endpoint,
}

impl InOutBasis {
    pub fn new(side: Side, v_limit: f64, endpoint: Endpoint) -> Self {
        InOutBasis { side, v_limit, endpoint }
    }

    /// Frame at an end of a chart, with V± from the leading asymptotics.
    pub fn from_chart(chart: &ConformalChart, coupling: &CouplingSpec, side: Side) -> Result<Self> {
        let va = predicted_v_asymptotics(&chart.model, coupling, side)?;
        let ExtReal::Finite(v) = va.limit else {
            return Err(Error::UnsupportedRegime(format!("V has no finite limit at the {side:?} end")));
        };
        Ok(InOutBasis { side, v_limit: v, endpoint: chart.endpoint(side) })
    }

    pub fn omega(&self, mu: f64) -> Result<f64> {
        let w2 = mu + self.v_limit;
        if !(w2 > 0.0) {
            return Err(Error::NegativeFrequency(w2));
        }
        Ok(w2.sqrt())
    }
}

/// In-vacuum state: at tau- (up to the integration margin) when finite,
/// otherwise the oscillatory form at the first horizon.
pub fn in_vacuum_seed(basis: &InOutBasis, mu: f64) -> Result<ModeState> {
    let w = basis.omega(mu)?;
    match basis.endpoint {
        Endpoint::Finite(_) => {
            let (p, dp) = vacuum_at(mu, basis.v_limit)?;
            let tau = match basis.side {
                Side::Past => Tau::after_minus(END_DEPTH),
                Side::Future => Tau::before_plus(END_DEPTH),
            };
            Ok(ModeState::new(mu, tau, p, dp))
        }
        Endpoint::Infinite => {
            let sign = match basis.side {
                Side::Past => -1.0,
                Side::Future => 1.0,
            };
            let t = sign * crate::dynamics::HORIZONS[0];
            let (p, dp) = frozen_state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), w, t);
            Ok(ModeState::new(mu, Tau::at(t), p, dp))
        }
    }
}

/// Rows of the summability theorem this background falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisRow {
    /// conformal, Big Bang to Big Crunch, (l-1)/(l+1) <= eta0 at both ends
    ConformalCrunch,
    /// non-conformal, eta0 > 1 at both ends
    NonConformalC1,
    /// non-conformal, eta0 = 1 at both ends with equal c0
    NonConformalEqualC0,
    /// non-conformal, min eta0 = 1, d <= 5
    NonConformalMinOne,
    /// conformal, Big Bang eta0 > 1/3 to Big Brake eta1 > 1, d <= 5
    ConformalBrake,
    /// non-conformal, Big Bang eta0 >= 1 to Big Brake eta1 > 3, d <= 5
    NonConformalBrake,
}

/// Which hypothesis row (if any) a two-ended background satisfies.
pub fn hypothesis_row(model: &ScaleFactorModel, coupling: &CouplingSpec) -> Result<HypothesisRow> {
    let unsupported = || Error::UnsupportedRegime("background is outside the supported hypothesis rows".into());
    let pm = model.side_form(Side::Past).ok_or_else(unsupported)?;
    let pp = model.side_form(Side::Future).ok_or_else(unsupported)?;
    let d = coupling.d;
    let conf = coupling.is_conformal();
    if !(pm.eta0 > 0.0) || d < 3 {
        return Err(unsupported());
    }
    if pp.eta0 > 0.0 {
        if conf {
            let l = l_of_d(d) as f64;
            let lo = (l - 1.0) / (l + 1.0);
            if pm.eta0 >= lo && pp.eta0 >= lo {
                return Ok(HypothesisRow::ConformalCrunch);
            }
        } else if pm.eta0 > 1.0 && pp.eta0 > 1.0 {
            return Ok(HypothesisRow::NonConformalC1);
        } else if pm.eta0 == 1.0 && pp.eta0 == 1.0 && pm.c0 == pp.c0 {
            return Ok(HypothesisRow::NonConformalEqualC0);
        } else if pm.eta0.min(pp.eta0) == 1.0 && d <= 5 {
            return Ok(HypothesisRow::NonConformalMinOne);
        }
    } else if pp.eta0 == 0.0 && d <= 5 {
        if conf && pm.eta0 > 1.0 / 3.0 && pp.eta1 > 1.0 && pp.c1 > 0.0 {
            return Ok(HypothesisRow::ConformalBrake);
        }
        if !conf && pm.eta0 >= 1.0 && pp.eta1 > 3.0 && pp.c1 > 0.0 {
            return Ok(HypothesisRow::NonConformalBrake);
        }
    }
    Err(unsupported())
}

/// Smallest mu for which mu + V stays positive on the whole chart
/// (sampled), so the adiabatic frame is defined everywhere.
pub fn infrared_cutoff(chart: &ConformalChart, coupling: &CouplingSpec) -> Result<f64> {
    let bg = Background::Chart { chart, coupling: *coupling };
    let mut vmin = f64::INFINITY;
    for side in [Side::Past, Side::Future] {
        if let Ok(b) = InOutBasis::from_chart(chart, coupling, side) {
            vmin = vmin.min(b.v_limit);
        }
    }
    let (lo, hi) = (chart.tau_minus.finite(), chart.tau_plus.finite());
    let pts: Vec<Tau> = match (lo, hi) {
        (Some(a), Some(b)) => (1..2000).map(|k| Tau::at(a + (b - a) * k as f64 / 2000.0)).collect(),
        _ => {
            let mut v = Vec::new();
            for side in [Side::Past, Side::Future] {
                match chart.endpoint(side) {
                    Endpoint::Finite(_) => {
                        v.extend((1..1000).map(|k| crate::dynamics::tau_near(side, 10f64.powf(-12.0 * k as f64 / 1000.0) * 0.5 * chart.model.len().min(1.0))))
                    }
                    Endpoint::Infinite => {
                        let h = horizon_times(&bg, side)[1];
                        let base = chart.endpoint(side.other()).finite().unwrap_or(0.0);
                        v.extend((0..2000).map(|k| Tau::at(base + (h - base) * k as f64 / 2000.0)));
                    }
                }
            }
            v
        }
    };
    for t in pts {
        if let Ok(v) = bg.potential(t) {
            vmin = vmin.min(v);
        }
    }
    Ok(-vmin)
}

/// Per-mode Bogoliubov data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovMode {
    pub mu: f64,
    pub mult: u64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub wronskian_residual: f64,
}

/// (alpha, beta) of one mode on a chart.
pub fn bogoliubov_mode(chart: &ConformalChart, coupling: &CouplingSpec, mu: f64, in_basis: &InOutBasis, out_basis: &InOutBasis) -> Result<BogoliubovMode> {
    hypothesis_row(&chart.model, coupling)?;
    if in_basis.side != Side::Past || out_basis.side != Side::Future {
        return Err(Error::InvalidArgument("in frame must sit at tau-, out frame at tau+".into()));
    }
    in_basis.omega(mu)?;
    out_basis.omega(mu)?;
    bogoliubov_on(&frame_solver(chart, *coupling), mu, 1)
}

/// (alpha, beta) of one mode on any background (no hypothesis check).
pub fn bogoliubov_on(solver: &ModeSolver<'_>, mu: f64, mult: u64) -> Result<BogoliubovMode> {
    let f = adiabatic_scattering(solver, mu)?;
    Ok(BogoliubovMode { mu, mult, alpha: f.alpha, beta: f.beta, wronskian_residual: f.wronskian_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovData {
    pub modes: Vec<BogoliubovMode>,
    pub v_minus: f64,
    pub v_plus: f64,
    pub n_pairs: f64,
    pub tail_bound: f64,
}

/// Bogoliubov data for every retained mode of a shifted spectrum.
/// Modes are independent and run in parallel; order follows the ladder.
pub fn bogoliubov_spectrum(chart: &ConformalChart, coupling: &CouplingSpec, spec: &ShiftedSpectrum) -> Result<BogoliubovData> {
    hypothesis_row(&chart.model, coupling)?;
    let inb = InOutBasis::from_chart(chart, coupling, Side::Past)?;
    let outb = InOutBasis::from_chart(chart, coupling, Side::Future)?;
    let solver = frame_solver(chart, *coupling);
    let modes = spec
        .mu_ladder
        .par_iter()
        .map(|e| bogoliubov_on(&solver, e.mu, e.mult))
        .collect::<Result<Vec<_>>>()?;
    let n_pairs = modes.iter().map(|m| m.mult as f64 * m.beta.norm_sqr()).sum();
    let tail_bound = match pair_creation_number(spec, &modes, None) {
        Ok(p) => p.zeta_tail,
        Err(_) => f64::NAN,
    };
    Ok(BogoliubovData { modes, v_minus: inb.v_limit, v_plus: outb.v_limit, n_pairs, tail_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCreation {
    pub n_pairs: f64,
    pub decay_slope: f64,
    pub fit_window: (f64, f64),
    /// bound on the sum over modes beyond the computed ones
    pub zeta_tail: f64,
    /// (mu cutoff, partial sum of mult |beta|^2 up to it)
    pub partial_sums: Vec<(f64, f64)>,
    /// (mu cutoff, tail bound beyond it)
    pub tails: Vec<(f64, f64)>,
}

/// Top two decades of mu, without the largest half-decade.
pub fn default_fit_window(mus: &[f64]) -> (f64, f64) {
    let top = mus.iter().cloned().fold(0.0, f64::max) / 10f64.sqrt();
    (top / 100.0, top)
}

pub fn pair_creation_number(spec: &ShiftedSpectrum, modes: &[BogoliubovMode], fit_window: Option<(f64, f64)>) -> Result<PairCreation> {
    let mus: Vec<f64> = modes.iter().map(|m| m.mu).filter(|&m| m > 0.0).collect();
    let (mn, mx) = mus.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    if !(mx / mn >= 100.0) {
        return Err(Error::InsufficientDecades((mx / mn).log10()));
    }
    let n_pairs: f64 = modes.iter().map(|m| m.mult as f64 * m.beta.norm_sqr()).sum();
    let window = fit_window.unwrap_or_else(|| default_fit_window(&mus));
    let pts: Vec<(f64, f64)> = modes
        .iter()
        .filter(|m| m.mu >= window.0 && m.mu <= window.1 && m.beta.norm() > 0.0)
        .map(|m| (m.mu.ln(), m.beta.norm().ln()))
        .collect();
    let (slope, c_fit) = if pts.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().cloned().unzip();
        let (s, _, _) = linear_fit(&x, &y);
        // |beta|^2 <= C mu^{2 slope} over the window
        let c = pts.iter().map(|(x, y)| (2.0 * y - 2.0 * s * x).exp()).fold(0.0, f64::max);
        (s, c)
    } else {
        (f64::NEG_INFINITY, 0.0)
    };

    let mut sorted: Vec<&BogoliubovMode> = modes.iter().collect();
    sorted.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap());
    let s_exp = -2.0 * slope;
    let tail_at = |cut: f64| -> f64 {
        if c_fit == 0.0 {
            return 0.0;
        }
        let n_terms = spec.base.ladder.iter().filter(|e| e.0 <= cut - spec.xi * spec.base.r_gamma).count();
        match zeta_partial(&spec.base, s_exp, n_terms.max(1)) {
            Ok((_, t)) => c_fit * t,
            Err(_) => f64::INFINITY,
        }
    };
    let mut partial_sums = Vec::new();
    let mut tails = Vec::new();
    let mut cut = mn.max(1.0);
    let mut acc = 0.0;
    let mut i = 0;
    while cut <= mx * 1.0000001 {
        while i < sorted.len() && sorted[i].mu <= cut {
            acc += sorted[i].mult as f64 * sorted[i].beta.norm_sqr();
            i += 1;
        }
        partial_sums.push((cut, acc));
        tails.push((cut, tail_at(cut)));
        cut *= 10f64.sqrt();
    }
    Ok(PairCreation { n_pairs, decay_slope: slope, fit_window: window, zeta_tail: tail_at(mx), partial_sums, tails })
}

/// Does sum mult mu^{2 slope} converge? Compares -2 slope with d/2; the
/// margin is their difference.
pub fn hilbert_schmidt_certificate(d: u32, slope: f64) -> (bool, f64) {
    let margin = -2.0 * slope - d as f64 / 2.0;
    (margin > 0.0, margin)
}

/// mu,mult,re_alpha,im_alpha,re_beta,im_beta,abs_beta_sq,wronskian_residual rows.
pub fn spectrum_csv(modes: &[BogoliubovMode]) -> String {
    let mut s = String::from("mu,mult,re_alpha,im_alpha,re_beta,im_beta,abs_beta_sq,wronskian_residual\n");
    for m in modes {
        s.push_str(&format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            m.mu,
            m.mult,
            m.alpha.re,
            m.alpha.im,
            m.beta.re,
            m.beta.im,
            m.beta.norm_sqr(),
            m.wronskian_residual
        ));
    }
    s
}
