//! One function per command. Each reads its blocks from the scenario and
//! writes fixed-name artifacts into the output directory.

use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;

use cosmowave::asymptotics::{solve_riccati, RiccatiSign};
use cosmowave::cosmology::{ConformalChart, Endpoint, ScaleFactorModel, Side, Tau};
use cosmowave::dynamics::{extract_asymptotic_data, CauchyCoefficient, CauchyData, END_DEPTH};
use cosmowave::dynamics::{trajectory_csv, Background, ModeSolver, ModeState, HORIZONS};
use cosmowave::potential::{
    classify, fit_v_exponent, potential as potential_value, predicted_v_asymptotics, CouplingSpec, VVariable,
};
use cosmowave::quantum::{
    bogoliubov_on, bogoliubov_spectrum, frame_solver, hilbert_schmidt_certificate, hypothesis_row, infrared_cutoff,
    pair_creation_number, spectrum_csv, BogoliubovMode, HypothesisRow,
};
use cosmowave::semilinear::duffing_table;
use cosmowave::spectrum::{build_ladder, l_of_d, shift_and_cut};
use cosmowave::wkb::{wkb_compare, SmoothPotential};
use cosmowave::Error;

use crate::config::*;
use crate::output::{row, write_csv, write_json, Metadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Potential,
    Evolve,
    Asymptotics,
    Bogoliubov,
    WkbCompare,
    Riccati,
    Duffing,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Potential => "potential",
            Command::Evolve => "evolve",
            Command::Asymptotics => "asymptotics",
            Command::Bogoliubov => "bogoliubov",
            Command::WkbCompare => "wkb-compare",
            Command::Riccati => "riccati",
            Command::Duffing => "duffing",
        }
    }
}

/// Config problems (exit 1) versus numerical failures (exit 2).
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn need<'a, T>(block: &'a Option<T>, name: &str) -> std::result::Result<&'a T, Failure> {
    block.as_ref().ok_or_else(|| Failure::Config(format!("{name}: missing block")))
}

/// Model and coupling construction reject bad parameters; those are config errors.
fn model(cfg: &ScenarioConfig) -> std::result::Result<ScaleFactorModel, Failure> {
    need(&cfg.universe, "universe")?.build().map_err(|e| Failure::Config(format!("universe: {e}")))
}

fn coupling(cfg: &ScenarioConfig) -> std::result::Result<CouplingSpec, Failure> {
    need(&cfg.coupling, "coupling")?.build().map_err(|e| Failure::Config(format!("coupling: {e}")))
}

fn c(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn sides(model: &ScaleFactorModel, choice: SideChoice) -> Vec<Side> {
    match choice {
        SideChoice::Past => vec![Side::Past],
        SideChoice::Future => vec![Side::Future],
        SideChoice::Both => [Side::Past, Side::Future].into_iter().filter(|&s| model.side_form(s).is_some()).collect(),
    }
}

pub fn run(cmd: Command, cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    match cmd {
        Command::Classify => run_classify(cfg, out, meta),
        Command::Potential => run_potential(cfg, out, meta),
        Command::Evolve => run_evolve(cfg, out, meta),
        Command::Asymptotics => run_asymptotics(cfg, out, meta),
        Command::Bogoliubov => run_bogoliubov(cfg, out, meta),
        Command::WkbCompare => run_wkb(cfg, out, meta),
        Command::Riccati => run_riccati(cfg, out, meta),
        Command::Duffing => run_duffing(cfg, out, meta),
    }
}

fn run_classify(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let m = model(cfg)?;
    let cp = coupling(cfg)?;
    let choice = cfg.classify.as_ref().map(|b| b.side).unwrap_or(SideChoice::Both);
    let reports = sides(&m, choice).into_iter().map(|s| classify(&m, &cp, s)).collect::<cosmowave::Result<Vec<_>>>()?;
    write_json(out, "classify.json", meta, &reports)?;
    Ok(())
}

#[derive(Serialize)]
struct ExponentEntry {
    side: Side,
    variable: VVariable,
    predicted_exponent: Option<f64>,
    predicted_coefficient: Option<f64>,
    fitted_exponent: Option<f64>,
    fitted_coefficient: Option<f64>,
    rms: Option<f64>,
    /// why no fit was made, if none was
    note: Option<String>,
}

fn default_inner(variable: VVariable) -> f64 {
    match variable {
        VVariable::Distance => 1e-6,
        VVariable::Tau => 1e4,
        VVariable::Exponential => 1e-6,
    }
}

/// Sample conformal times across the chart; infinite ends stop at the first horizon.
fn chart_taus(chart: &ConformalChart, n: usize) -> Vec<f64> {
    let lo = match chart.endpoint(Side::Past) {
        Endpoint::Finite(t) => t,
        Endpoint::Infinite => -HORIZONS[0],
    };
    let hi = match chart.endpoint(Side::Future) {
        Endpoint::Finite(t) => t,
        Endpoint::Infinite => HORIZONS[0],
    };
    (0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64).collect()
}

fn run_potential(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let m = model(cfg)?;
    let cp = coupling(cfg)?;
    let block = cfg.potential.clone().unwrap_or(PotentialConfig {
        side: SideChoice::Both,
        inner: None,
        decades: 2.0,
        fit_points: 20,
        samples: 200,
    });
    let chart = ConformalChart::new(m.clone())?;
    let mut body = String::from("tau,t,v\n");
    for tau in chart_taus(&chart, block.samples.max(2)) {
        let loc = chart.locate(Tau::at(tau))?;
        let v = potential_value(&chart, &cp, Tau::at(tau))?;
        body.push_str(&row(&[tau, chart.t_of(loc), v]));
        body.push('\n');
    }
    write_csv(out, "potential.csv", meta, &body)?;

    let mut entries = Vec::new();
    for side in sides(&m, block.side) {
        let pred = predicted_v_asymptotics(&m, &cp, side)?;
        let mut e = ExponentEntry {
            side,
            variable: pred.variable,
            predicted_exponent: pred.exponent,
            predicted_coefficient: pred.coefficient,
            fitted_exponent: None,
            fitted_coefficient: None,
            rms: None,
            note: None,
        };
        if pred.exponent.is_none() {
            e.note = Some("V equals its limit near this end".into());
        } else {
            let inner = block.inner.unwrap_or_else(|| default_inner(pred.variable));
            match fit_v_exponent(&chart, &cp, side, inner, block.decades, block.fit_points) {
                Ok(f) => {
                    e.fitted_exponent = Some(f.slope);
                    e.fitted_coefficient = Some(f.coefficient);
                    e.rms = Some(f.rms);
                }
                Err(err) => e.note = Some(format!("{}: {err}", err.name())),
            }
        }
        entries.push(e);
    }
    write_json(out, "exponents.json", meta, &entries)?;
    Ok(())
}

fn solver<'a>(chart: &'a ConformalChart, cp: CouplingSpec, s: &SolverConfig) -> ModeSolver<'a> {
    ModeSolver::on_chart(chart, cp).with_tol(s.rtol, s.atol).with_margin(s.endpoint_margin)
}

fn run_evolve(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let m = model(cfg)?;
    let cp = coupling(cfg)?;
    let block = need(&cfg.evolve, "evolve")?;
    if block.samples < 2 {
        return Err(Failure::Config("evolve.samples: need at least 2".into()));
    }
    let chart = ConformalChart::new(m)?;
    let bg = Background::Chart { chart: &chart, coupling: cp };
    let start = block.tau0.tau();
    let end = chart.reanchor(block.tau_end.tau(), start.anchor)?;
    let n = block.samples;
    let mut taus: Vec<Tau> =
        (1..n).map(|k| Tau { anchor: start.anchor, s: start.s + (end.s - start.s) * k as f64 / (n - 1) as f64 }).collect();
    *taus.last_mut().unwrap() = block.tau_end.tau();
    let sv = solver(&chart, cp, &cfg.solver);
    for (i, &mu) in block.mu.iter().enumerate() {
        let init = ModeState::new(mu, start, c(block.psi0), c(block.dpsi0));
        let mut states = vec![init];
        states.extend(sv.evolve_sampled(&init, &taus)?);
        let mut body = format!("# mu: {mu:.16e}\n");
        body.push_str(&trajectory_csv(&bg, &states)?);
        write_csv(out, &format!("trajectory_{i}.csv"), meta, &body)?;
    }
    Ok(())
}

fn run_asymptotics(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let m = model(cfg)?;
    let cp = coupling(cfg)?;
    let block = need(&cfg.asymptotics, "asymptotics")?;
    let side = match block.side {
        SideChoice::Past => Side::Past,
        SideChoice::Future => Side::Future,
        SideChoice::Both => return Err(Failure::Config("asymptotics.side: pick past or future".into())),
    };
    let chart = ConformalChart::new(m)?;
    let data = CauchyData {
        tau0: block.tau0.tau(),
        coefficients: block
            .seeds
            .iter()
            .map(|s| CauchyCoefficient { mu: s.mu, mult: s.mult, psi0: c(s.psi0), dpsi0: c(s.dpsi0) })
            .collect(),
    };
    let res = extract_asymptotic_data(&chart, &cp, &data, side)?;
    write_json(out, "asymptotics.json", meta, &res)?;
    Ok(())
}

#[derive(Serialize)]
struct BogoliubovSummary {
    /// None when the background is outside the hypothesis table
    hypothesis_row: Option<HypothesisRow>,
    v_minus: f64,
    v_plus: f64,
    infrared_delta: f64,
    modes: usize,
    n_pairs: f64,
    max_wronskian_residual: f64,
    decay_slope: Option<f64>,
    fit_window: Option<(f64, f64)>,
    zeta_tail: Option<f64>,
    partial_sums: Vec<(f64, f64)>,
    tails: Vec<(f64, f64)>,
    certificate_passes: Option<bool>,
    certificate_margin: Option<f64>,
    note: Option<String>,
}

/// V at a regular end, sampled just inside it.
fn end_value(chart: &ConformalChart, cp: &CouplingSpec, side: Side) -> cosmowave::Result<f64> {
    let tau = match (side, chart.endpoint(side)) {
        (Side::Past, Endpoint::Finite(_)) => Tau::after_minus(END_DEPTH),
        (Side::Future, Endpoint::Finite(_)) => Tau::before_plus(END_DEPTH),
        (_, Endpoint::Infinite) => {
            return Err(Error::UnsupportedRegime("regular end at infinite conformal time".into()));
        }
    };
    potential_value(chart, cp, tau)
}

fn run_bogoliubov(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let m = model(cfg)?;
    let cp = coupling(cfg)?;
    let manifold = need(&cfg.manifold, "manifold")?;
    let modes_cfg = need(&cfg.modes, "modes")?;
    let window = cfg.bogoliubov.as_ref().and_then(|b| b.fit_window).map(|w| (w[0], w[1]));
    let kind = manifold.kind();
    if kind.dim() != cp.d {
        return Err(Failure::Config(format!("manifold: dimension {} differs from coupling.d = {}", kind.dim(), cp.d)));
    }
    let chart = ConformalChart::new(m.clone())?;
    let base = build_ladder(kind, modes_cfg.eigenvalue_cutoff)?;
    let (delta, strict) = match modes_cfg.infrared_delta {
        Some(d) => (d, false),
        None => (infrared_cutoff(&chart, &cp)?, true),
    };
    let mut spec = shift_and_cut(&base, cp.xi_value(), delta)?;
    if strict {
        spec.mu_ladder.retain(|e| e.mu > delta);
        if spec.mu_ladder.is_empty() {
            return Err(Error::EmptySpectrum.into());
        }
    }

    let row = hypothesis_row(&m, &cp).ok();
    let (modes, v_minus, v_plus, note): (Vec<BogoliubovMode>, f64, f64, Option<String>) = if row.is_some() {
        let data = bogoliubov_spectrum(&chart, &cp, &spec)?;
        (data.modes, data.v_minus, data.v_plus, None)
    } else {
        let v_minus = end_value(&chart, &cp, Side::Past)?;
        let v_plus = end_value(&chart, &cp, Side::Future)?;
        let sv = frame_solver(&chart, cp);
        use rayon::prelude::*;
        let modes = spec
            .mu_ladder
            .par_iter()
            .map(|e| bogoliubov_on(&sv, e.mu, e.mult))
            .collect::<cosmowave::Result<Vec<_>>>()?;
        (modes, v_minus, v_plus, Some("background outside the hypothesis table; no summability guarantee".into()))
    };

    write_csv(out, "spectrum.csv", meta, &spectrum_csv(&modes))?;

    let n_pairs: f64 = modes.iter().map(|m| m.mult as f64 * m.beta.norm_sqr()).sum();
    let max_res = modes.iter().map(|m| m.wronskian_residual).fold(0.0, f64::max);
    let mut summary = BogoliubovSummary {
        hypothesis_row: row,
        v_minus,
        v_plus,
        infrared_delta: delta,
        modes: modes.len(),
        n_pairs,
        max_wronskian_residual: max_res,
        decay_slope: None,
        fit_window: None,
        zeta_tail: None,
        partial_sums: Vec::new(),
        tails: Vec::new(),
        certificate_passes: None,
        certificate_margin: None,
        note,
    };
    match pair_creation_number(&spec, &modes, window) {
        Ok(p) => {
            let (passes, margin) = hilbert_schmidt_certificate(cp.d, p.decay_slope);
            summary.decay_slope = Some(p.decay_slope);
            summary.fit_window = Some(p.fit_window);
            summary.zeta_tail = Some(p.zeta_tail);
            summary.partial_sums = p.partial_sums;
            summary.tails = p.tails;
            summary.certificate_passes = Some(passes);
            summary.certificate_margin = Some(margin);
        }
        Err(Error::InsufficientDecades(dec)) => {
            let msg = format!("decay fit skipped: mu spans {dec:.2} decades, need 2");
            summary.note = Some(match summary.note.take() {
                Some(n) => format!("{n}; {msg}"),
                None => msg,
            });
        }
        Err(e) => return Err(e.into()),
    }
    write_json(out, "bogoliubov.json", meta, &summary)?;
    Ok(())
}

fn run_wkb(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let block = need(&cfg.wkb, "wkb")?;
    let v = match block.potential {
        SmoothPotentialConfig::Gaussian { amplitude, width } => SmoothPotential::gaussian(amplitude, width),
        SmoothPotentialConfig::Constant { value } => SmoothPotential::constant(value),
    };
    let order = match (block.order, &cfg.coupling) {
        (Some(o), _) => o,
        (None, Some(cc)) => l_of_d(cc.d) as usize,
        (None, None) => 2,
    };
    let cmp = wkb_compare(&v, order, (block.span[0], block.span[1]), &block.mu, block.samples)?;
    let mut body =
        String::from("mu,olver_error,phase_error,olver_residual,phase_budget,lg_difference,wronskian_drift\n");
    for p in &cmp.points {
        body.push_str(&row(&[
            p.mu,
            p.olver_error,
            p.phase_error,
            p.olver_residual,
            p.phase_budget,
            p.lg_difference,
            p.wronskian_drift,
        ]));
        body.push('\n');
    }
    write_csv(out, "wkb_errors.csv", meta, &body)?;

    #[derive(Serialize)]
    struct Summary {
        order: usize,
        span: (f64, f64),
        olver_slope: f64,
        phase_slope: f64,
        olver_target: f64,
        phase_target: f64,
    }
    let s = Summary {
        order: cmp.order,
        span: cmp.span,
        olver_slope: cmp.olver_slope,
        phase_slope: cmp.phase_slope,
        olver_target: -((order + 1) as f64) / 2.0,
        phase_target: -1.5,
    };
    write_json(out, "wkb_summary.json", meta, &s)?;
    Ok(())
}

#[derive(Serialize)]
struct RiccatiCase {
    input: RiccatiInput,
    m: f64,
    sign: RiccatiSign,
    tau0: f64,
    iterations: usize,
    double_integral: f64,
    threshold: f64,
    int_abs_a: f64,
    int_abs_a_bound: f64,
    residual: f64,
    monotone: bool,
    /// sandwich and integral bound hold at every grid point
    sandwich_holds: bool,
    grid_points: usize,
    note: Option<String>,
}

fn run_riccati(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let block = need(&cfg.riccati, "riccati")?;
    let signs: Vec<RiccatiSign> = match block.sign {
        SignChoice::Positive => vec![RiccatiSign::PositiveRHS],
        SignChoice::Negative => vec![RiccatiSign::NegativeRHS],
        SignChoice::Both => vec![RiccatiSign::PositiveRHS, RiccatiSign::NegativeRHS],
    };
    let mut cases = Vec::new();
    for input in &block.input {
        let f: Box<dyn Fn(f64) -> f64 + Sync> = match *input {
            RiccatiInput::Power { gamma, coef } => Box::new(move |u: f64| coef * u.powf(gamma)),
            RiccatiInput::Constant { value } => Box::new(move |_| value),
        };
        for &m in &block.m {
            for &sign in &signs {
                let sol = solve_riccati(&*f, block.tau_plus, block.d1, m, sign)?;
                let check = sol.check_invariants();
                cases.push(RiccatiCase {
                    input: input.clone(),
                    m,
                    sign,
                    tau0: sol.tau0,
                    iterations: sol.iterations_used,
                    double_integral: sol.double_integral,
                    threshold: sign.threshold(m),
                    int_abs_a: sol.int_abs_a,
                    int_abs_a_bound: 0.5 / m,
                    residual: sol.residual,
                    monotone: sol.monotone,
                    sandwich_holds: check.is_ok(),
                    grid_points: sol.a.len(),
                    note: check.err().map(|e| e.to_string()),
                });
            }
        }
    }
    write_json(out, "riccati.json", meta, &cases)?;
    Ok(())
}

fn run_duffing(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Outcome {
    let block = need(&cfg.duffing, "duffing")?;
    let phis = block.values();
    if phis.is_empty() {
        return Err(Failure::Config("duffing: empty amplitude list".into()));
    }
    let table = duffing_table(&phis)?;
    let mut body = String::from("phi0,period,period_numeric,bound,rel_diff,below_two_pi\n");
    for r in &table {
        body.push_str(&row(&[r.phi0, r.period, r.period_numeric, r.bound, r.rel_diff]));
        body.push_str(if r.period < 2.0 * std::f64::consts::PI { ",true\n" } else { ",false\n" });
    }
    write_csv(out, "duffing.csv", meta, &body)?;
    Ok(())
}
