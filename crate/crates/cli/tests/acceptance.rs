//! The sixteen acceptance criteria. Runs without the libtest harness so the
//! verdict table always reaches the terminal; exits non-zero on any FAIL.
//!
//! DEVIATION marks a criterion whose stated target disagrees with an
//! independent derivation; the measured numbers for both targets are printed.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use sha2::{Digest, Sha256};

use cosmowave::asymptotics::{chart_energy_check, solve_riccati, verify_riemann_bounds, RiccatiSign, ENERGY_SLACK, RIEMANN_SPREAD};
use cosmowave::cosmology::{appendix_asymptotics, AsymptoticVariable, ConformalChart, Endpoint, ScaleFactorModel, Side, SideParams, Tau};
use cosmowave::dynamics::{
    extract_divergence_rate, extract_limit_data, verify_decay_theorem, AnalyticPotential, Background, DivergenceModel, ModeSolver,
    ModeState, TauPoint,
};
use cosmowave::potential::{classify, fit_v_exponent, potential, potential_jet_from_derivatives, CouplingSpec, Existence, SingularityClass};
use cosmowave::quantum::{bogoliubov_on, bogoliubov_spectrum, hilbert_schmidt_certificate, hypothesis_row, pair_creation_number, HypothesisRow};
use cosmowave::semilinear::{duffing_closed_form, duffing_period, duffing_period_numeric, duffing_trajectory};
use cosmowave::specfun::bessel_jy;
use cosmowave::spectrum::{build_ladder, shift_and_cut, ManifoldKind};
use cosmowave::wkb::{wkb_compare, SmoothPotential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Deviation,
}

struct Verdict {
    status: Status,
    detail: String,
}

fn pass_if(ok: bool, detail: String) -> Verdict {
    Verdict { status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn fail(detail: impl Into<String>) -> Verdict {
    Verdict { status: Status::Fail, detail: detail.into() }
}

type Res<T> = Result<T, String>;

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn conformal(d: u32, m: f64) -> CouplingSpec {
    CouplingSpec::conformal(d, m).unwrap()
}

fn coupled(xi: f64, d: u32, m: f64) -> CouplingSpec {
    CouplingSpec::new(xi, d, m).unwrap()
}

fn future(p: SideParams) -> ScaleFactorModel {
    ScaleFactorModel::single_future(0.0, 1.0, p).unwrap()
}

// 1 ---------------------------------------------------------------------------

fn c01_roundtrip() -> Res<Verdict> {
    let models = vec![
        ("future eta0=1/2", future(SideParams::new(1.0, 0.5, 1.0, 1.5))),
        ("future sudden", future(SideParams::new(2.0, 0.0, 1.0, 0.5))),
        ("future brake", future(SideParams::new(1.0, 0.0, 0.5, 2.0))),
        ("future eta0=1", future(SideParams::new(1.0, 1.0, 0.5, 2.0))),
        ("future eta0=2", future(SideParams::leading(1.0, 2.0))),
        ("future strong rip", future(SideParams::leading(1.0, -1.5))),
        ("past eta0=2/3", ScaleFactorModel::single_past(-1.0, 2.0, SideParams::new(1.0, 2.0 / 3.0, 0.3, 1.5)).unwrap()),
        ("product 1/2,1/2", ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap()),
        ("product 1,2", ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 1.0, 2.0, 2.0).unwrap()),
        ("big rip 1", ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap()),
        ("big rip 2", ScaleFactorModel::big_rip(2, 0.0, 1.0).unwrap()),
        ("big rip 3", ScaleFactorModel::big_rip(3, -1.0, 1.0).unwrap()),
        ("static", ScaleFactorModel::constant(1.5, 0.0, 3.0).unwrap()),
    ];
    let mut worst: (f64, &str) = (0.0, "");
    let mut worst_plain = 0.0f64;
    for (name, m) in &models {
        let chart = ConformalChart::new(*m).map_err(e)?;
        let l = m.len();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=1000 {
            let t = m.t_minus + l * i as f64 / 1001.0;
            let tau = chart.conformal_time(t).map_err(e)?;
            if !(tau > prev) {
                return Ok(fail(format!("{name}: tau not increasing at t = {t}")));
            }
            prev = tau;
            let anchored = chart.conformal_time_anchored(t).map_err(e)?;
            let back = chart.t_of(chart.locate(anchored).map_err(e)?);
            let err = (back - t).abs() / l;
            if err > worst.0 {
                worst = (err, name);
            }
            worst_plain = worst_plain.max((chart.invert_chart(tau).map_err(e)? - t).abs() / l);
        }
    }
    // a plain f64 tau carries one ulp of tau times dt/dtau = a, which near a
    // phantom end exceeds the tolerance; reported, not asserted
    Ok(pass_if(
        worst.0 <= 1e-10,
        format!(
            "{} models, max |t(tau(t)) - t|/L = {:.2e} ({}), end-anchored tau; through a plain f64 tau {:.2e}",
            models.len(),
            worst.0,
            worst.1,
            worst_plain
        ),
    ))
}

// 2 ---------------------------------------------------------------------------

fn c02_appendix() -> Res<Verdict> {
    let cases = [
        ("eta0=1/2", SideParams::new(1.0, 0.5, 1.0, 1.5)),
        ("eta0=0", SideParams::new(2.0, 0.0, 1.0, 2.0)),
        ("eta0=1", SideParams::new(1.0, 1.0, 0.5, 2.0)),
        ("eta0=2", SideParams::new(1.0, 2.0, 0.5, 3.0)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, p) in cases {
        let m = future(p);
        let chart = ConformalChart::new(m).map_err(e)?;
        let f = appendix_asymptotics(&m, Side::Future, Some(&chart)).map_err(e)?;
        let finite = chart.endpoint(Side::Future).is_finite();
        let probes: [f64; 3] = if finite { [1e-2, 1e-3, 1e-4] } else { [10.0, 100.0, 1000.0] };
        let mut errs = Vec::new();
        for x in probes {
            let tau = if finite { Tau::before_plus(x) } else { Tau::at(x) };
            let loc = chart.locate(tau).map_err(e)?;
            let ln_num = chart.ln_alpha(loc);
            let rel = match f.variable {
                AsymptoticVariable::Exponential => (ln_num - f.ln_eval(x)).exp_m1().abs(),
                _ => (ln_num.exp() / f.eval(x) - 1.0).abs(),
            };
            errs.push(rel);
        }
        // strictly decreasing until the error reaches rounding level
        let dec = |a: f64, b: f64| b < a || b <= 1e-13;
        let good = errs[2] <= 0.02 && dec(errs[0], errs[1]) && dec(errs[1], errs[2]);
        ok &= good;
        parts.push(format!("{name}: {:.1e}>{:.1e}>{:.1e}", errs[0], errs[1], errs[2]));
    }
    Ok(pass_if(ok, parts.join("; ")))
}

// 3 ---------------------------------------------------------------------------

fn c03_bessel() -> Res<Verdict> {
    let (m, b, d0): (f64, f64, f64) = (1.0, 0.7, 0.2);
    let chart = ConformalChart::new(ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap()).map_err(e)?;
    let cp = conformal(3, m);
    // psi = b sqrt(D) Y1(2 m sqrt(D)), psi' = -d/dD = -b m Y0(2 m sqrt(D))
    let x = 2.0 * m * d0.sqrt();
    let (y1, y0) = (bessel_jy(1.0, x).map_err(e)?.y, bessel_jy(0.0, x).map_err(e)?.y);
    let st = ModeState::real(0.0, Tau::before_plus(d0), b * d0.sqrt() * y1, -b * m * y0);
    let r = extract_limit_data(&chart, &cp, 0.0, &st, Side::Future).map_err(e)?;
    let phi0 = r.phi0.value().ok_or("phi0 did not converge")?.re;
    let phi0_exact = -b / (m * PI);
    let phi0_err = ((phi0 - phi0_exact) / phi0_exact).abs();
    let DivergenceModel::Log { coefficient } = r.divergence_model else {
        return Ok(fail(format!("divergence model {:?}, expected a log", r.divergence_model)));
    };
    let stated = -m * b / (2.0 * PI);
    // small-argument Y1 expansion: psi = -b/(m pi) + (m b/pi) D ln D + O(D), so psi' ~ -(m b/pi) ln D
    let derived = -m * b / PI;
    let err_stated = ((coefficient.re - stated) / stated).abs();
    let err_derived = ((coefficient.re - derived) / derived).abs();
    let detail = format!(
        "phi0 rel err {phi0_err:.1e}; log coeff {:.6} vs stated -mb/(2pi) {:.6} (rel {err_stated:.2}), vs derived -mb/pi {:.6} (rel {err_derived:.1e})",
        coefficient.re, stated, derived
    );
    if phi0_err > 1e-6 || err_derived > 0.01 {
        return Ok(fail(detail));
    }
    if err_stated <= 0.01 {
        return Ok(pass_if(true, detail));
    }
    Ok(Verdict { status: Status::Deviation, detail })
}

// 4 ---------------------------------------------------------------------------

fn c04_bigrip2() -> Res<Verdict> {
    let m = 1.0;
    let chart = ConformalChart::new(ScaleFactorModel::big_rip(2, 0.0, 1.0).unwrap()).map_err(e)?;
    let cp = conformal(3, m);
    // a = b = 1/2 in the closed form: psi = cos s + s sin s, s = 3 m D^(1/3); a + b = 1
    let d0: f64 = 0.02;
    let s = 3.0 * m * d0.cbrt();
    let psi = s.cos() + s * s.sin();
    let dpsi = -3.0 * m * m * d0.powf(-1.0 / 3.0) * s.cos();
    let st = ModeState::real(0.0, Tau::before_plus(d0), psi, dpsi);
    let fit = extract_divergence_rate(&chart, &cp, 0.0, &st, Side::Future).map_err(e)?;
    let DivergenceModel::Power { rate, coefficient } = fit.model else {
        return Ok(fail(format!("divergence model {:?}, expected a power", fit.model)));
    };
    let want = -3.0 * m * m * 1.0;
    let rel = ((coefficient.re - want) / want).abs();
    Ok(pass_if(
        (rate - 1.0 / 3.0).abs() <= 0.02 && rel <= 0.02,
        format!("rate {rate:.4} (target 1/3 +- 0.02), coefficient {:.4} vs {want} (rel {rel:.1e})", coefficient.re),
    ))
}

// 5 ---------------------------------------------------------------------------

fn c05_exponents() -> Res<Verdict> {
    struct Case {
        name: &'static str,
        model: ScaleFactorModel,
        cp: CouplingSpec,
        table: f64,
        inner: f64,
    }
    let cases = [
        Case { name: "C1 crunch eta0=2", model: future(SideParams::leading(1.0, 2.0)), cp: coupled(0.0, 3, 1.0), table: -2.0, inner: 1e4 },
        Case { name: "C0 crunch conformal eta0=1/2", model: future(SideParams::leading(1.0, 0.5)), cp: conformal(3, 1.0), table: 2.0, inner: 1e-5 },
        Case { name: "C0 crunch conformal eta0=1/4", model: future(SideParams::leading(1.0, 0.25)), cp: conformal(3, 1.0), table: 2.0 / 3.0, inner: 1e-5 },
        Case { name: "C0 crunch xi=1 eta0=2/3", model: future(SideParams::leading(1.0, 2.0 / 3.0)), cp: coupled(1.0, 3, 1.0), table: -2.0, inner: 1e-5 },
        Case { name: "sudden xi=0 eta1=1/2", model: future(SideParams::new(2.0, 0.0, 1.0, 0.5)), cp: coupled(0.0, 3, 1.0), table: 0.5 - 2.0, inner: 1e-5 },
        Case { name: "big rip conformal eta0=-1", model: future(SideParams::leading(1.0, -1.0)), cp: conformal(3, 1.0), table: -1.0, inner: 1e-5 },
        Case { name: "big rip conformal eta0=-1/2", model: future(SideParams::leading(1.0, -0.5)), cp: conformal(3, 1.0), table: -2.0 / 3.0, inner: 1e-5 },
        Case { name: "big rip xi=1 eta0=-2", model: future(SideParams::leading(1.0, -2.0)), cp: coupled(1.0, 3, 1.0), table: -2.0, inner: 1e-5 },
    ];
    let mut worst = (0.0f64, "");
    for c in &cases {
        let chart = ConformalChart::new(c.model).map_err(e)?;
        let f = fit_v_exponent(&chart, &c.cp, Side::Future, c.inner, 2.0, 9).map_err(|err| format!("{}: {err}", c.name))?;
        let dev = (f.slope - c.table).abs();
        if dev >= worst.0 {
            worst = (dev, c.name);
        }
    }
    // rows with a limit but no exponent in the table: V tends to the tabulated constant
    let sudden = future(SideParams::new(2.0, 0.0, 1.0, 0.5));
    let chart = ConformalChart::new(sudden).map_err(e)?;
    let lim = 1.0 * 2.0f64.powi(2);
    let gaps: Vec<f64> = [1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&d| potential(&chart, &conformal(3, 1.0), Tau::before_plus(d)).map(|v| (v - lim).abs() / lim))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let one = future(SideParams::new(1.0, 1.0, 0.5, 2.0));
    let chart1 = ConformalChart::new(one).map_err(e)?;
    // eta0 = 1: V -> c0^2 d(d-1)(xi - (d-1)/(4d)) = 6 (0 - 1/6) = -1
    let v1 = potential(&chart1, &coupled(0.0, 3, 1.0), Tau::at(40.0)).map_err(e)?;
    let limits_ok = gaps[2] < gaps[1] && gaps[1] < gaps[0] && gaps[2] < 1e-3 && (v1 + 1.0).abs() < 1e-10;
    Ok(pass_if(
        worst.0 <= 0.05 && limits_ok,
        format!(
            "{} fitted rows, max |slope - table| = {:.1e} ({}); sudden conformal |V/4-1| -> {:.1e}; eta0=1 limit err {:.1e}",
            cases.len(),
            worst.0,
            worst.1,
            gaps[2],
            (v1 + 1.0).abs()
        ),
    ))
}

// 6 ---------------------------------------------------------------------------

fn c06_tables() -> Res<Verdict> {
    use Existence::{No, Yes, YesZero};
    use SingularityClass::*;
    // (label, side params, xi or None for conformal, class, cutoff, phi0, phi1), transcribed from the tables
    let grid: Vec<(&str, SideParams, Option<f64>, SingularityClass, bool, Existence, Existence)> = vec![
        ("conf eta0=1", SideParams::leading(1.0, 1.0), None, C1BigCrunch, true, Yes, Yes),
        ("conf eta0=2", SideParams::leading(1.0, 2.0), None, C1BigCrunch, true, Yes, Yes),
        ("conf eta0=1/2", SideParams::leading(1.0, 0.5), None, C0BigCrunch, false, Yes, Yes),
        ("conf eta0=0.2", SideParams::leading(1.0, 0.2), None, C0BigCrunch, false, Yes, Yes),
        ("conf brake", SideParams::new(1.0, 0.0, 1.0, 1.5), None, BigBrake, false, Yes, Yes),
        ("conf sudden", SideParams::new(1.0, 0.0, 1.0, 0.5), None, SuddenSingularity, false, Yes, Yes),
        ("conf eta0=-1/2", SideParams::leading(1.0, -0.5), None, SlowBigRip, false, Yes, Yes),
        ("conf eta0=-1", SideParams::leading(1.0, -1.0), None, StrongBigRip, false, Yes, No),
        ("conf eta0=-3/2", SideParams::leading(1.0, -1.5), None, StrongBigRip, false, Yes, No),
        ("conf eta0=-3", SideParams::leading(1.0, -3.0), None, StrongBigRip, false, Yes, No),
        ("xi=0 eta0=1", SideParams::leading(1.0, 1.0), Some(0.0), C1BigCrunch, true, Yes, Yes),
        ("xi=1 eta0=3", SideParams::leading(1.0, 3.0), Some(1.0), C1BigCrunch, true, Yes, Yes),
        ("xi=1 eta0=2/3", SideParams::leading(1.0, 2.0 / 3.0), Some(1.0), C0BigCrunch, false, YesZero, No),
        ("xi=1 eta0=0.8", SideParams::leading(1.0, 0.8), Some(1.0), C0BigCrunch, false, YesZero, No),
        ("xi=0 brake eta1=2", SideParams::new(1.0, 0.0, 0.5, 2.0), Some(0.0), BigBrake, false, Yes, Yes),
        ("xi=1 brake eta1=3/2", SideParams::new(1.0, 0.0, 1.0, 1.5), Some(1.0), BigBrake, false, Yes, Yes),
        ("xi=0 sudden eta1=1/2", SideParams::new(1.0, 0.0, 1.0, 0.5), Some(0.0), SuddenSingularity, false, Yes, No),
        ("xi=1 sudden eta1=0.3", SideParams::new(1.0, 0.0, -0.5, 0.3), Some(1.0), SuddenSingularity, false, Yes, No),
        ("xi=1 eta0=-1/2", SideParams::leading(1.0, -0.5), Some(1.0), SlowBigRip, false, YesZero, No),
        ("xi=1 eta0=-2", SideParams::leading(1.0, -2.0), Some(1.0), StrongBigRip, false, YesZero, No),
    ];
    let mut bad = Vec::new();
    for (label, p, xi, class, cutoff, phi0, phi1) in &grid {
        let cp = match xi {
            None => conformal(3, 1.0),
            Some(x) => coupled(*x, 3, 1.0),
        };
        let r = classify(&future(*p), &cp, Side::Future).map_err(|err| format!("{label}: {err}"))?;
        if r.singularity_class != *class || r.needs_infrared_cutoff != *cutoff || r.phi0 != *phi0 || r.phi1 != *phi1 {
            bad.push(format!("{label}: got {:?} {} {:?} {:?}", r.singularity_class, r.needs_infrared_cutoff, r.phi0, r.phi1));
        }
    }
    Ok(pass_if(bad.is_empty(), if bad.is_empty() { format!("{} grid points match", grid.len()) } else { bad.join("; ") }))
}

// 7 ---------------------------------------------------------------------------

fn c07_riccati() -> Res<Verdict> {
    let mut worst_violation = f64::NEG_INFINITY;
    let mut cases = 0;
    for g in [-0.5f64, -1.0, -1.5] {
        for m in [2.0, 10.0] {
            for sign in [RiccatiSign::PositiveRHS, RiccatiSign::NegativeRHS] {
                let v = move |u: f64| u.powf(g);
                let r = solve_riccati(&v, 0.0, 1.0, m, sign).map_err(e)?;
                let d0 = r.d0();
                for (u, a) in r.distance.iter().zip(&r.a) {
                    // integral of s^g over [u, d0], closed form
                    let iv = if g == -1.0 { (d0 / u).ln() } else { (d0.powf(g + 1.0) - u.powf(g + 1.0)) / (g + 1.0) };
                    let (lo, hi) = match sign {
                        RiccatiSign::PositiveRHS => (iv, 2.0 * m * iv),
                        RiccatiSign::NegativeRHS => (-iv, -(1.0 - 0.5 / m) * iv),
                    };
                    let scale = 1.0 + lo.abs().max(hi.abs());
                    worst_violation = worst_violation.max((lo - a) / scale).max((a - hi) / scale);
                }
                cases += 1;
            }
        }
    }
    let c = 3.0;
    let r = solve_riccati(&|_| c, 0.0, 1.0, 2.0, RiccatiSign::PositiveRHS).map_err(e)?;
    let sc = c.sqrt();
    let tan_err = r.distance.iter().zip(&r.a).map(|(u, a)| (a - sc * (sc * (r.d0() - u)).tan()).abs()).fold(0.0, f64::max);
    Ok(pass_if(
        worst_violation <= 1e-9 && tan_err <= 1e-8,
        format!("{cases} power cases, max sandwich excess {worst_violation:.1e} (<= 0 means inside); constant V vs sqrt(c) tan: {tan_err:.1e}"),
    ))
}

// 8 ---------------------------------------------------------------------------

fn c08_energy() -> Res<Verdict> {
    let rip = future(SideParams::leading(1.0, -2.0));
    let sudden = future(SideParams::new(1.0, 0.0, 0.7, 0.5));
    let cases = [("strong rip", rip, conformal(3, 1.0)), ("sudden", sudden, coupled(0.0, 3, 0.0))];
    let mut worst = 0.0f64;
    let mut n = 0;
    for (_, model, cp) in cases {
        let chart = ConformalChart::new(model).map_err(e)?;
        for mu in [1.0, 30.0] {
            for theta in [0.0, 1.0] {
                let r = chart_energy_check(&chart, cp, mu, theta, 2.0, 0.05, 1e-6).map_err(e)?;
                worst = worst.max(r.max_ratio);
                n += 1;
            }
        }
    }
    Ok(pass_if(worst <= 1.0 + ENERGY_SLACK, format!("{n} runs, max energy/bound = {worst:.4} (limit {:.2})", 1.0 + ENERGY_SLACK)))
}

// 9 ---------------------------------------------------------------------------

fn c09_riemann() -> Res<Verdict> {
    let mut parts = Vec::new();
    let mut ok = true;
    for q in [0.5, 1.0, 4.0] {
        let r = verify_riemann_bounds(q, 2.0, &[10.0, 30.0, 100.0, 300.0], 1.0).map_err(e)?;
        ok &= r.spread <= RIEMANN_SPREAD && r.max_wronskian_drift <= 1e-9;
        parts.push(format!("q={q}: spread {:.2}, drift {:.1e}", r.spread, r.max_wronskian_drift));
    }
    Ok(pass_if(ok, parts.join("; ")))
}

// 10 --------------------------------------------------------------------------

fn c10_decay() -> Res<Verdict> {
    let chart = ConformalChart::new(future(SideParams::leading(1.0, 2.0 / 3.0))).map_err(e)?;
    let r = verify_decay_theorem(&chart, &coupled(1.0, 3, 1.0), &[1.0, 10.0, 100.0, 1000.0], 0.1).map_err(e)?;
    let worst = r.modes.iter().map(|m| m.last_ratio).fold(0.0, f64::max);
    Ok(pass_if(
        r.all_decay && r.grid_stable && r.k.is_finite(),
        format!("{} runs, max |psi| ratio {worst:.1e} (limit 1e-3), K = {:.3}, refined {:.3}", r.modes.len(), r.k, r.k_refined),
    ))
}

// 11 --------------------------------------------------------------------------

/// V(tau) and V'(tau) from alpha = f(tau) (c0 + c1 h^eta1), h = y/(1 + y),
/// y = tau+ - tau, via the t-derivatives of a. f = x^p with x = tau - tau-
/// for a finite past, (1 + tau^2)^(p/2) for an infinite one. h keeps the
/// brake factor bounded away from tau+.
fn brake_potential(cp: CouplingSpec, p: f64, c0: f64, c1: f64, eta1: f64, infinite_past: bool) -> AnalyticPotential {
    let falling = |e: f64, k: usize| (0..k).fold(1.0, |acc, j| acc * (e - j as f64));
    let tau_minus = if infinite_past { Endpoint::Infinite } else { Endpoint::Finite(0.0) };
    AnalyticPotential::new(tau_minus, Endpoint::Finite(1.0), move |pt: &TauPoint| {
        let y = pt.to_plus;
        let f: [f64; 4] = if infinite_past {
            let t = pt.tau;
            let w = 1.0 + t * t;
            let h = p / 2.0;
            let f0 = w.powf(h);
            let f1 = 2.0 * h * t * w.powf(h - 1.0);
            let f2 = 2.0 * h * w.powf(h - 1.0) + 4.0 * h * (h - 1.0) * t * t * w.powf(h - 2.0);
            let f3 = 12.0 * h * (h - 1.0) * t * w.powf(h - 2.0) + 8.0 * h * (h - 1.0) * (h - 2.0) * t * t * t * w.powf(h - 3.0);
            [f0, f1, f2, f3]
        } else {
            let x = pt.from_minus;
            [0, 1, 2, 3].map(|k| falling(p, k) * x.powf(p - k as f64))
        };
        // G(y) = h(y)^eta1 and its y-derivatives (chain rule); d/dtau = -d/dy
        let q = 1.0 + y;
        let (h0, h1, h2, h3) = (y / q, q.powi(-2), -2.0 * q.powi(-3), 6.0 * q.powi(-4));
        let e = eta1;
        let pw = |k: f64| h0.powf(e - k);
        let gy = [
            pw(0.0),
            e * pw(1.0) * h1,
            e * (e - 1.0) * pw(2.0) * h1 * h1 + e * pw(1.0) * h2,
            e * (e - 1.0) * (e - 2.0) * pw(3.0) * h1.powi(3) + 3.0 * e * (e - 1.0) * pw(2.0) * h1 * h2 + e * pw(1.0) * h3,
        ];
        let g: [f64; 4] = [0usize, 1, 2, 3].map(|k| (if k == 0 { c0 } else { 0.0 }) + c1 * (-1f64).powi(k as i32) * gy[k]);
        let al = [
            f[0] * g[0],
            f[1] * g[0] + f[0] * g[1],
            f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
            f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
        ];
        let a = al[0];
        // d/dt = (1/alpha) d/dtau
        let a_t = al[1] / a;
        let a_tt = al[2] / (a * a) - al[1] * al[1] / (a * a * a);
        let a_ttt = al[3] / a.powi(3) - 4.0 * al[1] * al[2] / a.powi(4) + 3.0 * al[1].powi(3) / a.powi(5);
        let j = potential_jet_from_derivatives(&cp, &[a, a_t, a_tt, a_ttt, 0.0]);
        [j[0], j[1]]
    })
}

fn c11_normalisation() -> Res<Verdict> {
    let mus = [1.0, 10.0, 100.0];
    let mut worst = 0.0f64;
    let mut modes = 0;
    let mut rows = Vec::new();
    let chart_cases = [
        (HypothesisRow::ConformalCrunch, ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap(), conformal(3, 1.0)),
        (HypothesisRow::NonConformalC1, ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 1.5, 2.0, 2.0).unwrap(), coupled(0.0, 3, 1.0)),
        (HypothesisRow::NonConformalEqualC0, ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 1.0, 2.0, 1.0).unwrap(), coupled(0.0, 3, 1.0)),
        (HypothesisRow::NonConformalMinOne, ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 1.0, 1.0, 2.0).unwrap(), coupled(0.0, 3, 1.0)),
    ];
    for (row, model, cp) in chart_cases {
        let got = hypothesis_row(&model, &cp).map_err(e)?;
        if got != row {
            return Ok(fail(format!("expected {row:?}, classified as {got:?}")));
        }
        let chart = ConformalChart::new(model).map_err(e)?;
        let s = ModeSolver::on_chart(&chart, cp).with_tol(cosmowave::quantum::FRAME_RTOL, cosmowave::quantum::FRAME_ATOL);
        let mut n = 0;
        for mu in mus {
            if let Ok(b) = bogoliubov_on(&s, mu, 1).map_err(|err| eprintln!("{row:?} mu={mu}: {err}")) {
                worst = worst.max((b.alpha.norm_sqr() - b.beta.norm_sqr() - 1.0).abs());
                n += 1;
            }
        }
        modes += n;
        rows.push(format!("{row:?} {n}/{}", mus.len()));
    }
    // the Big Brake rows have no built-in two-ended model; build their conformal-frame potentials directly
    let brake_cases = [
        ("ConformalBrake", brake_potential(conformal(3, 1.0), 1.0, 1.0, 0.5, 1.5, false)),
        ("NonConformalBrake", brake_potential(coupled(0.0, 3, 1.0), -2.0, 1.0, 0.5, 3.5, true)),
    ];
    // independent check of the construction: d = 3, xi = 0 gives V = m^2 alpha^2 - alpha''/alpha;
    // at tau+ alpha = 1/2 and alpha'' = f'' = (6 tau^2 - 2)/(1 + tau^2)^3 = 1/2
    let at_end = brake_cases[1].1.eval(&TauPoint { tau: 1.0 - 1e-9, to_plus: 1e-9, from_minus: f64::INFINITY })[0];
    if (at_end - (0.25 - 1.0)).abs() > 1e-6 {
        return Ok(fail(format!("non-conformal brake potential at tau+ is {at_end}, expected -0.75")));
    }
    for (name, v) in &brake_cases {
        let s = ModeSolver::new(Background::Analytic(v)).with_tol(cosmowave::quantum::FRAME_RTOL, cosmowave::quantum::FRAME_ATOL);
        let mut n = 0;
        for mu in mus {
            match bogoliubov_on(&s, mu, 1) {
                Ok(b) => {
                    worst = worst.max((b.alpha.norm_sqr() - b.beta.norm_sqr() - 1.0).abs());
                    n += 1;
                }
                Err(err) => eprintln!("{name} mu={mu}: {err}"),
            }
        }
        modes += n;
        rows.push(format!("{name} {n}/{}", mus.len()));
    }
    Ok(pass_if(
        worst <= 1e-8 && modes >= 12,
        format!("{modes} converged modes ({}), max ||alpha|^2-|beta|^2-1| = {worst:.1e}", rows.join(", ")),
    ))
}

// 12 --------------------------------------------------------------------------

fn c12_step() -> Res<Verdict> {
    let (vm, vp, mu): (f64, f64, f64) = (0.0, 3.0, 1.0);
    let (wm, wp) = ((mu + vm).sqrt(), (mu + vp).sqrt());
    let sharp = (wp - wm) / (2.0 * (wp * wm).sqrt());
    let widths = [0.04, 0.02, 0.01];
    let mut betas = Vec::new();
    let mut tanh_err = 0.0f64;
    for w in widths {
        let v = AnalyticPotential::tanh_step(vm, vp, w);
        let s = ModeSolver::new(Background::Analytic(&v)).with_tol(1e-12, 1e-16);
        let b = bogoliubov_on(&s, mu, 1).map_err(e)?.beta.norm();
        // exact reflection for a tanh profile
        let exact = ((PI * w * (wp - wm) / 2.0).sinh().powi(2) / ((PI * w * wp).sinh() * (PI * w * wm).sinh())).sqrt();
        tanh_err = tanh_err.max((b - exact).abs());
        betas.push(b);
    }
    // widths halve and the error is even in w: eliminate w^2, then w^4
    let r1 = [(4.0 * betas[1] - betas[0]) / 3.0, (4.0 * betas[2] - betas[1]) / 3.0];
    let r2 = (16.0 * r1[1] - r1[0]) / 15.0;
    let err = (r2 - sharp).abs();
    Ok(pass_if(
        err <= 1e-6,
        format!("|beta| {:.8} {:.8} {:.8} -> {r2:.10} vs {sharp:.10} (err {err:.1e}); tanh closed form agreement {tanh_err:.1e}", betas[0], betas[1], betas[2]),
    ))
}

// 13 --------------------------------------------------------------------------

fn c13_keybeta() -> Res<Verdict> {
    let model = ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).map_err(e)?;
    let chart = ConformalChart::new(model).map_err(e)?;
    let cp = conformal(3, 1.0);
    let base = build_ladder(ManifoldKind::FlatTorusTd { lengths: vec![2.0 * PI; 3] }, 3.2e3).map_err(e)?;
    let spec = shift_and_cut(&base, cp.xi_value(), 0.5).map_err(e)?;
    let data = bogoliubov_spectrum(&chart, &cp, &spec).map_err(e)?;
    let p = pair_creation_number(&spec, &data.modes, None).map_err(e)?;
    // successive increments of the partial sums against the tail bound at the earlier cut
    let mut inc_ok = true;
    for k in 1..p.partial_sums.len() {
        let inc = p.partial_sums[k].1 - p.partial_sums[k - 1].1;
        if inc > p.tails[k - 1].1 {
            inc_ok = false;
        }
    }
    let (pass3, _) = hilbert_schmidt_certificate(3, p.decay_slope);
    let cert: Vec<bool> = [3u32, 4, 5, 7].iter().map(|&d| hilbert_schmidt_certificate(d, -1.5).0).collect();
    let cert_ok = cert == vec![true, true, true, false];
    Ok(pass_if(
        p.decay_slope <= -1.5 + 0.1 && inc_ok && cert_ok && pass3,
        format!(
            "{} modes, slope {:.3} over mu in [{:.0}, {:.0}], N = {:.3e}, tail {:.1e}, increments below tail: {inc_ok}, certificate d=3,4,5,7 at -3/2: {cert:?}",
            data.modes.len(),
            p.decay_slope,
            p.fit_window.0,
            p.fit_window.1,
            p.n_pairs,
            p.zeta_tail
        ),
    ))
}

// 14 --------------------------------------------------------------------------

fn c14_wkb() -> Res<Verdict> {
    let v = SmoothPotential::gaussian(1.0, 1.0);
    let mus: Vec<f64> = (0..=8).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
    let l = cosmowave::spectrum::l_of_d(3) as usize;
    let c = wkb_compare(&v, l, (-6.0, 6.0), &mus, 400).map_err(e)?;
    let target = -((l + 1) as f64) / 2.0 + 0.1;
    Ok(pass_if(
        c.olver_slope <= target && c.phase_slope <= -1.5 + 0.1,
        format!("l(3) = {l}: Olver slope {:.3} (<= {target}), phase-integral slope {:.3} (<= -1.4)", c.olver_slope, c.phase_slope),
    ))
}

// 15 --------------------------------------------------------------------------

fn c15_duffing() -> Res<Verdict> {
    let mut worst_period = 0.0f64;
    let mut worst_traj = 0.0f64;
    for phi0 in [0.1, 1.0, 10.0] {
        let t = duffing_period(phi0).map_err(e)?;
        let tn = duffing_period_numeric(phi0).map_err(e)?;
        worst_period = worst_period.max((t - tn).abs() / t);
        let taus: Vec<f64> = (1..=300).map(|i| 3.0 * t * i as f64 / 300.0).collect();
        let traj = duffing_trajectory(phi0, &taus).map_err(e)?;
        for (tau, s) in taus.iter().zip(&traj) {
            let cf = duffing_closed_form(phi0, *tau).map_err(e)?;
            worst_traj = worst_traj.max((s.phi - cf).abs() / phi0.abs().max(1.0));
        }
    }
    let mut max_t = 0.0f64;
    for i in 0..=40 {
        let p = 10f64.powf(-2.0 + 4.0 * i as f64 / 40.0);
        max_t = max_t.max(duffing_period(p).map_err(e)?);
    }
    Ok(pass_if(
        worst_period <= 1e-8 && worst_traj <= 1e-8 && max_t < 2.0 * PI,
        format!("closed vs numeric period {worst_period:.1e}; cn vs trajectory {worst_traj:.1e}; max T on grid {max_t:.6} < 2 pi"),
    ))
}

// 16 --------------------------------------------------------------------------

fn run_cli(cmd: &str, config: &Path, out: &Path) -> Res<()> {
    let status = Process::new(env!("CARGO_BIN_EXE_cosmowave"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", "2"])
        .status()
        .map_err(e)?;
    if !status.success() {
        return Err(format!("{cmd} exited with {status}"));
    }
    Ok(())
}

fn read_dir_sorted(dir: &Path) -> Res<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(e)?
        .map(|entry| {
            let p = entry.map_err(e)?.path();
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).map_err(e)?))
        })
        .collect::<Res<_>>()?;
    files.sort();
    Ok(files)
}

fn c16_determinism() -> Res<Verdict> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let scratch = std::env::temp_dir().join(format!("cosmowave-acceptance-{}", std::process::id()));
    let runs = [
        ("classify", "big_brake.json"),
        ("potential", "big_rip.json"),
        ("evolve", "big_rip.json"),
        ("asymptotics", "big_rip.json"),
        ("bogoliubov", "constant.json"),
        ("riccati", "riccati.json"),
        ("duffing", "duffing.json"),
    ];
    let mut files = 0;
    for (cmd, cfg) in runs {
        let config = root.join(cfg);
        let hash: String = Sha256::digest(std::fs::read(&config).map_err(e)?).iter().map(|b| format!("{b:02x}")).collect();
        let a = scratch.join(format!("{cmd}-a"));
        let b = scratch.join(format!("{cmd}-b"));
        run_cli(cmd, &config, &a)?;
        run_cli(cmd, &config, &b)?;
        let fa = read_dir_sorted(&a)?;
        let fb = read_dir_sorted(&b)?;
        if fa.is_empty() || fa != fb {
            return Ok(fail(format!("{cmd}: artifacts differ between runs")));
        }
        for (name, bytes) in &fa {
            if !String::from_utf8_lossy(bytes).contains(&hash) {
                return Ok(fail(format!("{cmd}/{name}: config hash missing")));
            }
        }
        files += fa.len();
    }
    let _ = std::fs::remove_dir_all(&scratch);
    Ok(pass_if(true, format!("{} commands, {files} artifacts byte-identical across two runs, config hash verified", runs.len())))
}

// -----------------------------------------------------------------------------

type Check = fn() -> Res<Verdict>;

fn main() {
    let criteria: [(&str, Check); 16] = [
        ("conformal-chart roundtrip", c01_roundtrip),
        ("end asymptotics of alpha", c02_appendix),
        ("big rip Bessel oracle", c03_bessel),
        ("big rip 2 power divergence", c04_bigrip2),
        ("potential exponents", c05_exponents),
        ("existence tables", c06_tables),
        ("Riccati sandwich", c07_riccati),
        ("modified-energy bound", c08_energy),
        ("Riemann-function bounds", c09_riemann),
        ("decay under the barrier condition", c10_decay),
        ("Bogoliubov normalisation", c11_normalisation),
        ("step-potential oracle", c12_step),
        ("key estimate on beta", c13_keybeta),
        ("WKB error slopes", c14_wkb),
        ("Duffing period", c15_duffing),
        ("CLI determinism", c16_determinism),
    ];
    // `cargo test --test acceptance -- 3 11` runs a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |i: usize| only.is_empty() || only.contains(&(i + 1));
    let results: Vec<(Verdict, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .map(|(i, (_, f))| {
                let f = *f;
                let run = selected(i);
                s.spawn(move || {
                    if !run {
                        return (Verdict { status: Status::Pass, detail: String::new() }, 0.0);
                    }
                    let t0 = Instant::now();
                    let v = match std::panic::catch_unwind(f) {
                        Ok(Ok(v)) => v,
                        Ok(Err(msg)) => fail(format!("error: {msg}")),
                        Err(_) => fail("panicked"),
                    };
                    (v, t0.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    println!("acceptance criteria");
    for (i, ((name, _), (v, secs))) in criteria.iter().zip(&results).enumerate() {
        if !selected(i) {
            continue;
        }
        let tag = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Deviation => "DEVIATION",
        };
        if v.status == Status::Fail {
            failed += 1;
        }
        println!("{:>2} {tag:<9} {name} [{secs:.1}s]: {}", i + 1, v.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
