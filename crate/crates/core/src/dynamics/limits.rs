//! Data at finite ends: limits of (psi, psi') on a geometric probe sequence,
//! divergence models when psi' has no limit, and the decay check.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::background::Background;
use super::mode::{ModeSolver, ModeState};
use crate::cosmology::{ConformalChart, Side, Tau};
use crate::error::{Error, Result};
use crate::numerics::cheb::PanelGrid;
use crate::numerics::fit::{aitken_c, linear_fit};
use crate::potential::{classify, Existence, SingularityClass};
use crate::potential::CouplingSpec;

/// Probe schedule and acceptance constants for limit extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    /// distances to the end, decreasing
    pub distances: Vec<f64>,
    pub cauchy_tol: f64,
    /// distances used by the divergence fits, decreasing
    pub fit_distances: Vec<f64>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            distances: (2..=11).map(|k| 10f64.powi(-k)).collect(),
            cauchy_tol: 1e-7,
            fit_distances: (16..=44).map(|k| 10f64.powf(-k as f64 / 4.0)).collect(),
        }
    }
}

/// Time at distance d from the end on `side`.
pub fn tau_near(side: Side, d: f64) -> Tau {
    match side {
        Side::Future => Tau::before_plus(d),
        Side::Past => Tau::after_minus(d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
}

impl LimitEstimate {
    fn from_probes(v: &[Complex64], tol: f64) -> LimitEstimate {
        let n = v.len();
        if n < 4 {
            let value = v[n - 1];
            let error = if n > 1 { (v[n - 1] - v[n - 2]).norm() } else { f64::INFINITY };
            return LimitEstimate { value, error, converged: error <= tol * (1.0 + value.norm()) };
        }
        let a1 = aitken_c(v[n - 3], v[n - 2], v[n - 1]);
        let a0 = aitken_c(v[n - 4], v[n - 3], v[n - 2]);
        let error = (a1 - a0).norm();
        LimitEstimate { value: a1, error, converged: error <= tol * (1.0 + a1.norm()) }
    }
}

/// A limit at the end, or its absence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Value { value: Complex64, error: f64 },
    Divergent,
}

impl Limit {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            Limit::Value { value, .. } => Some(*value),
            Limit::Divergent => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceModel {
    None,
    /// psi' ~ C ln D
    Log { coefficient: Complex64 },
    /// psi' ~ C D^{-rate}
    Power { rate: f64, coefficient: Complex64 },
    /// neither model fits cleanly (oscillating divergence)
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRecord {
    pub mu: f64,
    pub phi0: Limit,
    pub phi1: Limit,
    pub divergence_model: DivergenceModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticData {
    pub side: Side,
    pub records: Vec<AsymptoticRecord>,
}

/// Initial data for a collection of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub tau0: Tau,
    pub coefficients: Vec<CauchyCoefficient>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyCoefficient {
    pub mu: f64,
    pub mult: u64,
    pub psi0: Complex64,
    pub dpsi0: Complex64,
}

/// Raw probe values of psi and psi' and their extrapolations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLimits {
    pub distances: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    pub phi0: LimitEstimate,
    pub phi1: LimitEstimate,
}

fn finite_end(bg: &Background<'_>, side: Side) -> Result<()> {
    if !bg.endpoint(side).is_finite() {
        return Err(Error::NonIntegrableEndpoint(side));
    }
    Ok(())
}

fn probes_below(state: &ModeState, bg: &Background<'_>, side: Side, ds: &[f64]) -> Result<Vec<f64>> {
    let d0 = bg.distance_to(state.tau, side)?.ok_or(Error::NonIntegrableEndpoint(side))?;
    let out: Vec<f64> = ds.iter().copied().filter(|&d| d <= d0).collect();
    if out.len() < 3 {
        return Err(Error::InvalidArgument(format!("start distance {d0} leaves fewer than three probes")));
    }
    Ok(out)
}

/// Evolve toward the end on `side` and extrapolate psi and psi' along the probes.
pub fn probe_limits(solver: &ModeSolver<'_>, state: &ModeState, side: Side, opts: &ProbeOptions) -> Result<ProbeLimits> {
    finite_end(&solver.bg, side)?;
    let distances = probes_below(state, &solver.bg, side, &opts.distances)?;
    let taus: Vec<Tau> = distances.iter().map(|&d| tau_near(side, d)).collect();
    let st = solver.evolve_sampled(state, &taus)?;
    let psi: Vec<Complex64> = st.iter().map(|s| s.psi).collect();
    let dpsi: Vec<Complex64> = st.iter().map(|s| s.dpsi).collect();
    let phi0 = LimitEstimate::from_probes(&psi, opts.cauchy_tol);
    let phi1 = LimitEstimate::from_probes(&dpsi, opts.cauchy_tol);
    Ok(ProbeLimits { distances, psi, dpsi, phi0, phi1 })
}

fn decreasing_tail(v: &[Complex64]) -> bool {
    let n = v.len();
    n >= 3 && v[n - 1].norm() < v[n - 2].norm() && v[n - 2].norm() < v[n - 3].norm()
}

/// Limits (phi0, phi1) at a finite end of a chart, guided by the regime.
pub fn extract_limit_data(chart: &ConformalChart, coupling: &CouplingSpec, mu: f64, state: &ModeState, side: Side) -> Result<AsymptoticRecord> {
    extract_limit_data_with(chart, coupling, mu, state, side, &ProbeOptions::default())
}

pub fn extract_limit_data_with(
    chart: &ConformalChart,
    coupling: &CouplingSpec,
    mu: f64,
    state: &ModeState,
    side: Side,
    opts: &ProbeOptions,
) -> Result<AsymptoticRecord> {
    let report = classify(&chart.model, coupling, side)?;
    let solver = ModeSolver::on_chart(chart, *coupling);
    let st = ModeState { mu, ..*state };
    if report.phi0 == Existence::No {
        return Err(Error::UnsupportedRegime(format!("{:?}: psi has no limit", report.singularity_class)));
    }
    let pl = probe_limits(&solver, &st, side, opts)?;
    let phi0 = match report.phi0 {
        Existence::YesZero => {
            if !decreasing_tail(&pl.psi) {
                return Err(Error::NoConvergence("psi does not decay toward the end".into()));
            }
            Limit::Value { value: Complex64::new(0.0, 0.0), error: pl.psi.last().unwrap().norm() }
        }
        _ => {
            if !pl.phi0.converged {
                return Err(Error::NoConvergence(format!("phi0 probes not Cauchy (error {:e})", pl.phi0.error)));
            }
            Limit::Value { value: pl.phi0.value, error: pl.phi0.error }
        }
    };
    let (phi1, divergence_model) = if report.phi1 == Existence::No {
        let model = match extract_divergence_rate_with(chart, coupling, mu, state, side, opts) {
            Ok(f) => f.model,
            Err(Error::ModelSelectionAmbiguous { .. }) => DivergenceModel::Unresolved,
            Err(e) => return Err(e),
        };
        (Limit::Divergent, model)
    } else {
        if !pl.phi1.converged {
            return Err(Error::NoConvergence(format!("phi1 probes not Cauchy (error {:e})", pl.phi1.error)));
        }
        (Limit::Value { value: pl.phi1.value, error: pl.phi1.error }, DivergenceModel::None)
    };
    Ok(AsymptoticRecord { mu, phi0, phi1, divergence_model })
}

/// Limit data for every mode of a Cauchy datum; modes run in parallel and
/// keep their input order.
pub fn extract_asymptotic_data(chart: &ConformalChart, coupling: &CouplingSpec, data: &CauchyData, side: Side) -> Result<AsymptoticData> {
    let records = data
        .coefficients
        .par_iter()
        .map(|c| {
            let st = ModeState::new(c.mu, data.tau0, c.psi0, c.dpsi0);
            extract_limit_data(chart, coupling, c.mu, &st, side)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AsymptoticData { side, records })
}

/// Outcome of fitting the divergence of psi'.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    pub model: DivergenceModel,
    pub log_coefficient: Complex64,
    pub log_residual: f64,
    pub power_rate: f64,
    pub power_coefficient: Complex64,
    pub power_residual: f64,
    /// max of weight(D)|psi'| over the fit window, if a weight applies
    pub weighted_max: Option<f64>,
    pub weighted_bounded: Option<bool>,
}

struct CFit {
    c: Complex64,
    rms: f64,
}

fn complex_affine(basis: &[f64], y: &[Complex64]) -> CFit {
    let re: Vec<f64> = y.iter().map(|z| z.re).collect();
    let im: Vec<f64> = y.iter().map(|z| z.im).collect();
    let (cr, _, rr) = linear_fit(basis, &re);
    let (ci, _, ri) = if im.iter().all(|v| *v == 0.0) { (0.0, 0.0, 0.0) } else { linear_fit(basis, &im) };
    CFit { c: Complex64::new(cr, ci), rms: rr.hypot(ri) }
}

fn power_fit(d: &[f64], y: &[Complex64], p: f64) -> CFit {
    let b: Vec<f64> = d.iter().map(|v| v.powf(-p)).collect();
    complex_affine(&b, y)
}

/// Fit psi' on the fit window against C ln D + E and C D^{-p} + E.
pub fn fit_divergence(
    solver: &ModeSolver<'_>,
    state: &ModeState,
    side: Side,
    opts: &ProbeOptions,
    weight: Option<&dyn Fn(f64) -> f64>,
) -> Result<DivergenceFit> {
    finite_end(&solver.bg, side)?;
    let d = probes_below(state, &solver.bg, side, &opts.fit_distances)?;
    let taus: Vec<Tau> = d.iter().map(|&x| tau_near(side, x)).collect();
    let y: Vec<Complex64> = solver.evolve_sampled(state, &taus)?.iter().map(|s| s.dpsi).collect();
    let scale = (y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64).sqrt().max(f64::MIN_POSITIVE);

    let lnd: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let lf = complex_affine(&lnd, &y);

    // coarse scan then golden section on the power
    let (lo, hi) = (0.05, 3.0);
    let n = 60;
    let mut best = (lo, f64::INFINITY);
    for k in 0..=n {
        let p = lo + (hi - lo) * k as f64 / n as f64;
        let r = power_fit(&d, &y, p).rms;
        if r < best.1 {
            best = (p, r);
        }
    }
    let h = (hi - lo) / n as f64;
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = power_fit(&d, &y, x1).rms;
    let mut f2 = power_fit(&d, &y, x2).rms;
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = power_fit(&d, &y, x1).rms;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = power_fit(&d, &y, x2).rms;
        }
    }
    let p = 0.5 * (a + b);
    let pf = power_fit(&d, &y, p);

    let (rl, rp) = (lf.rms / scale, pf.rms / scale);
    if (rl - rp).abs() <= 0.1 * rl.max(rp) {
        return Err(Error::ModelSelectionAmbiguous { log_residual: rl, power_residual: rp });
    }
    let model = if rl < rp {
        DivergenceModel::Log { coefficient: lf.c }
    } else {
        DivergenceModel::Power { rate: p, coefficient: pf.c }
    };

    let (weighted_max, weighted_bounded) = match weight {
        Some(w) => {
            let wv: Vec<f64> = d.iter().zip(&y).map(|(x, z)| w(*x) * z.norm()).collect();
            let half = wv.len() / 2;
            let first = wv[..half].iter().cloned().fold(0.0, f64::max);
            let last = wv[half..].iter().cloned().fold(0.0, f64::max);
            (Some(first.max(last)), Some(last <= 1.5 * first))
        }
        None => (None, None),
    };
    Ok(DivergenceFit {
        model,
        log_coefficient: lf.c,
        log_residual: rl,
        power_rate: p,
        power_coefficient: pf.c,
        power_residual: rp,
        weighted_max,
        weighted_bounded,
    })
}

/// The weight that keeps psi' bounded for the regime, if one applies.
pub fn divergence_weight(chart: &ConformalChart, side: Side, class: SingularityClass) -> Option<Box<dyn Fn(f64) -> f64>> {
    let p = chart.model.side_form(side)?;
    match class {
        SingularityClass::StrongBigRip if p.eta0 == -1.0 => Some(Box::new(|d: f64| 1.0 / (1.0 + d.ln().abs()))),
        SingularityClass::StrongBigRip => {
            let e = (p.eta0 + 1.0) / (p.eta0 - 1.0);
            Some(Box::new(move |d: f64| d.powf(e)))
        }
        SingularityClass::SuddenSingularity => {
            let e = 1.0 - p.eta1;
            Some(Box::new(move |d: f64| d.powf(e)))
        }
        _ => None,
    }
}

pub fn extract_divergence_rate(chart: &ConformalChart, coupling: &CouplingSpec, mu: f64, state: &ModeState, side: Side) -> Result<DivergenceFit> {
    extract_divergence_rate_with(chart, coupling, mu, state, side, &ProbeOptions::default())
}

pub fn extract_divergence_rate_with(
    chart: &ConformalChart,
    coupling: &CouplingSpec,
    mu: f64,
    state: &ModeState,
    side: Side,
    opts: &ProbeOptions,
) -> Result<DivergenceFit> {
    let report = classify(&chart.model, coupling, side)?;
    if report.phi1 != Existence::No {
        return Err(Error::PreconditionViolated(format!("{:?}: psi' has a limit", report.singularity_class)));
    }
    let solver = ModeSolver::on_chart(chart, *coupling);
    let st = ModeState { mu, ..*state };
    let w = divergence_weight(chart, side, report.singularity_class);
    fit_divergence(&solver, &st, side, opts, w.as_deref())
}

/// Solve the backward Cauchy problem from the end by Picard iteration on
///   psi(D) = phi0 + s phi1 D - D F1(D) + F2(D),  psi' = phi1 - s F1(D)
/// with F1 = int_0^D (mu+V) psi, F2 = int_0^D u (mu+V) psi and s = +1 at
/// the past end, -1 at the future end. Returns (psi, psi') at distance `d`.
pub fn picard_from_end(
    bg: &Background<'_>,
    mu: f64,
    side: Side,
    phi0: Complex64,
    phi1: Complex64,
    d: f64,
    iterations: usize,
) -> Result<(Complex64, Complex64)> {
    finite_end(bg, side)?;
    let s = match side {
        Side::Past => 1.0,
        Side::Future => -1.0,
    };
    // geometric panels toward the end, the innermost sliver is dropped
    let mut breaks = vec![d];
    while *breaks.last().unwrap() > d * 1e-24 {
        let b = *breaks.last().unwrap();
        breaks.push(0.5 * b);
    }
    breaks.reverse();
    let grid = PanelGrid::new(breaks, 16);
    let x = grid.nodes();
    let w: Vec<f64> = x.iter().map(|&u| bg.potential(tau_near(side, u)).map(|v| mu + v)).collect::<Result<_>>()?;
    let mut psi: Vec<Complex64> = x.iter().map(|&u| phi0 + s * phi1 * u).collect();
    let mut dpsi = vec![phi1; x.len()];
    for _ in 0..iterations {
        let f: Vec<Complex64> = w.iter().zip(&psi).map(|(a, p)| a * p).collect();
        let cum = |g: &dyn Fn(usize) -> Complex64| {
            let re: Vec<f64> = (0..x.len()).map(|i| g(i).re).collect();
            let im: Vec<f64> = (0..x.len()).map(|i| g(i).im).collect();
            let (r, i) = (grid.cumulative(&re), grid.cumulative(&im));
            r.into_iter().zip(i).map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()
        };
        let f1 = cum(&|i| f[i]);
        let f2 = cum(&|i| x[i] * f[i]);
        for i in 0..x.len() {
            psi[i] = phi0 + s * phi1 * x[i] - x[i] * f1[i] + f2[i];
            dpsi[i] = phi1 - s * f1[i];
        }
    }
    Ok((*psi.last().unwrap(), *dpsi.last().unwrap()))
}

/// One seed of the decay sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayMode {
    pub mu: f64,
    pub seed: usize,
    pub k: f64,
    pub k_refined: f64,
    /// |psi| at the innermost probe over N/sqrt(mu)
    pub last_ratio: f64,
    /// sup |psi| per decade window of distance, outermost first
    pub envelope: Vec<f64>,
    pub decays: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub epsilon: f64,
    pub q: f64,
    pub k: f64,
    pub k_refined: f64,
    pub grid_stable: bool,
    pub all_decay: bool,
    pub modes: Vec<DecayMode>,
}

/// Decay tolerance: |psi| at the innermost probe relative to N/sqrt(mu).
pub const DECAY_RATIO: f64 = 1e-3;

fn decay_samples(d0: f64, d_min: f64, mu: f64, refine: usize) -> Vec<f64> {
    let per_decade = 20 * refine;
    let mut out = Vec::new();
    let decades = (d0 / d_min).log10();
    let n = (decades * per_decade as f64).ceil() as usize;
    for k in 0..=n {
        out.push(d0 * (d_min / d0).powf(k as f64 / n as f64));
    }
    // resolve oscillations away from the end
    let step = std::f64::consts::PI / (8.0 * refine as f64 * mu.sqrt().max(1.0));
    let mut d = d0;
    while d > 0.0 {
        out.push(d);
        d -= step;
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out.dedup();
    out
}

/// Sweep the weighted sup over mu and two unit seeds, checking decay of psi.
pub fn verify_decay_theorem(chart: &ConformalChart, coupling: &CouplingSpec, mus: &[f64], epsilon: f64) -> Result<DecayReport> {
    verify_decay_theorem_on(chart, coupling, mus, epsilon, Side::Future)
}

pub fn verify_decay_theorem_on(chart: &ConformalChart, coupling: &CouplingSpec, mus: &[f64], epsilon: f64, side: Side) -> Result<DecayReport> {
    let report = classify(&chart.model, coupling, side).map_err(|e| Error::PreconditionViolated(e.to_string()))?;
    let q = report.q_coefficient.unwrap_or(0.0);
    if report.condichi_holds != Some(true) {
        return Err(Error::PreconditionViolated(format!("condichi fails (q = {q})")));
    }
    let eta0 = chart.leading_exponent(side);
    if !(eta0 < 1.0 && eta0 != 0.0) {
        return Err(Error::PreconditionViolated(format!("eta0 = {eta0} outside (-inf,0) u (0,1)")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} must lie in (0, 1/2)")));
    }
    let span = match (chart.tau_minus.finite(), chart.tau_plus.finite()) {
        (Some(a), Some(b)) => b - a,
        _ => 2.0,
    };
    let d0 = 0.5 * span;
    let d_min = 1e-11;
    let solver = ModeSolver::on_chart(chart, *coupling);

    let jobs: Vec<(f64, usize)> = mus.iter().flat_map(|&m| [(m, 0), (m, 1)]).collect();
    let modes = jobs
        .par_iter()
        .map(|&(mu, seed)| -> Result<DecayMode> {
            if !(mu > 0.0) {
                return Err(Error::InvalidArgument(format!("mu = {mu} must be positive")));
            }
            let sm = mu.sqrt();
            let (p0, p1) = if seed == 0 { (1.0, 0.0) } else { (0.0, sm) };
            let norm = sm * p0 + p1;
            let init = ModeState::real(mu, tau_near(side, d0), p0, p1);
            let sweep = |refine: usize| -> Result<(f64, Vec<(f64, ModeState)>)> {
                let ds = decay_samples(d0, d_min, mu, refine);
                let taus: Vec<Tau> = ds.iter().map(|&d| tau_near(side, d)).collect();
                let st = solver.evolve_sampled(&init, &taus)?;
                let k = ds
                    .iter()
                    .zip(&st)
                    .map(|(d, s)| (sm * s.psi.norm() + d.powf(1.0 - epsilon) * s.dpsi.norm()) / norm)
                    .fold(0.0, f64::max);
                Ok((k, ds.into_iter().zip(st).collect()))
            };
            let (k, pts) = sweep(1)?;
            let (k_refined, _) = sweep(2)?;
            let mut envelope = Vec::new();
            let mut hi = d0;
            while hi > d_min * 1.0001 {
                let lo = hi / 10.0;
                let m = pts.iter().filter(|(d, _)| *d <= hi && *d >= lo).map(|(_, s)| s.psi.norm()).fold(0.0, f64::max);
                envelope.push(m);
                hi = lo;
            }
            let last_ratio = pts.last().unwrap().1.psi.norm() * sm / norm;
            let n = envelope.len();
            let shrinking = n >= 3 && envelope[n - 1] < envelope[n - 2] && envelope[n - 2] < envelope[n - 3];
            Ok(DecayMode { mu, seed, k, k_refined, last_ratio, envelope, decays: shrinking && last_ratio <= DECAY_RATIO })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = modes.iter().map(|m| m.k).fold(0.0, f64::max);
    let k_refined = modes.iter().map(|m| m.k_refined).fold(0.0, f64::max);
    Ok(DecayReport {
        epsilon,
        q,
        k,
        k_refined,
        grid_stable: (k_refined - k).abs() <= 0.2 * k,
        all_decay: modes.iter().all(|m| m.decays),
        modes,
    })
}
