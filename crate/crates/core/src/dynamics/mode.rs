//! Single-mode integration of psi'' + (mu + V) psi = 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::background::{Background, PathPoint, Segment};
use crate::cosmology::{ConformalChart, Tau};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, Control, OdeOptions};
use crate::potential::CouplingSpec;

/// Default forbidden margin (in conformal distance) around finite ends.
pub const DEFAULT_MARGIN: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub mu: f64,
    pub tau: Tau,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl ModeState {
    pub fn new(mu: f64, tau: Tau, psi: Complex64, dpsi: Complex64) -> Self {
        ModeState { mu, tau, psi, dpsi }
    }

    pub fn real(mu: f64, tau: Tau, psi: f64, dpsi: f64) -> Self {
        Self::new(mu, tau, Complex64::new(psi, 0.0), Complex64::new(dpsi, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.dpsi.is_finite()
    }
}

/// psi1 psi2' - psi2 psi1' for two states of the same mode.
pub fn wronskian(a: &ModeState, b: &ModeState) -> Complex64 {
    a.psi * b.dpsi - b.psi * a.dpsi
}

/// (u0, u1) -> (phi0, phi1) with phi = a^{(d-1)/2} u.
pub fn liouville_forward(u0: Complex64, u1: Complex64, a: f64, a_t: f64, d: u32) -> Result<(Complex64, Complex64)> {
    if !(a > 0.0) {
        return Err(Error::DomainError(format!("scale factor must be positive, got {a}")));
    }
    let h = 0.5 * (d as f64 - 1.0);
    let p = a.powf(h);
    Ok((p * u0, h * a_t * p * u0 + a * p * u1))
}

pub fn liouville_inverse(phi0: Complex64, phi1: Complex64, a: f64, a_t: f64, d: u32) -> Result<(Complex64, Complex64)> {
    if !(a > 0.0) {
        return Err(Error::DomainError(format!("scale factor must be positive, got {a}")));
    }
    let h = 0.5 * (d as f64 - 1.0);
    let p = a.powf(h);
    let u0 = phi0 / p;
    Ok((u0, (phi1 - h * a_t * p * u0) / (a * p)))
}

/// Integrates modes on one background.
#[derive(Debug, Clone, Copy)]
pub struct ModeSolver<'a> {
    pub bg: Background<'a>,
    pub opts: OdeOptions,
    pub margin: f64,
}

impl<'a> ModeSolver<'a> {
    pub fn new(bg: Background<'a>) -> Self {
        ModeSolver { bg, opts: OdeOptions::default(), margin: DEFAULT_MARGIN }
    }

    pub fn on_chart(chart: &'a ConformalChart, coupling: CouplingSpec) -> Self {
        Self::new(Background::Chart { chart, coupling })
    }

    pub fn with_tol(mut self, rtol: f64, atol: f64) -> Self {
        self.opts.rtol = rtol;
        self.opts.atol = atol;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    /// Evolve to a single target time.
    pub fn evolve(&self, init: &ModeState, to: Tau) -> Result<ModeState> {
        Ok(self.evolve_sampled(init, &[to])?.pop().expect("one sample"))
    }

    /// Evolve and report the state at each sample; samples must be ordered
    /// along the direction of integration.
    pub fn evolve_sampled(&self, init: &ModeState, samples: &[Tau]) -> Result<Vec<ModeState>> {
        let Some(&last) = samples.last() else {
            return Ok(Vec::new());
        };
        if !init.is_finite() {
            return Err(Error::InvalidArgument("non-finite seed".into()));
        }
        let mu = init.mu;
        let y0 = [init.psi.re, init.psi.im, init.dpsi.re, init.dpsi.im];
        let ys = self.run(init.tau, last, samples, y0, false, |p, y| {
            let w = -(mu + p.v);
            [y[2], y[3], w * y[0], w * y[1]]
        })?;
        Ok(samples
            .iter()
            .zip(ys)
            .map(|(t, y)| ModeState { mu, tau: *t, psi: Complex64::new(y[0], y[1]), dpsi: Complex64::new(y[2], y[3]) })
            .collect())
    }

    /// Integrate an arbitrary system written in tau along the path from
    /// `from` to `to`; returns the state at every sample.
    pub(crate) fn run<const N: usize, F>(
        &self,
        from: Tau,
        to: Tau,
        samples: &[Tau],
        y0: [f64; N],
        with_dv: bool,
        rhs: F,
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(&PathPoint, &[f64; N]) -> [f64; N],
    {
        let bg = &self.bg;
        bg.check_margin(from, self.margin)?;
        for s in samples {
            bg.check_margin(*s, self.margin)?;
        }
        bg.check_margin(to, self.margin)?;
        let segs = bg.plan(from, to)?;
        let mut pos = Vec::with_capacity(samples.len());
        let mut prev: Option<(usize, f64)> = None;
        for s in samples {
            let (i, x) = bg.position(&segs, *s)?;
            if let Some((pi, px)) = prev {
                let seg = &segs[i];
                let forward = seg.x1() >= seg.x0();
                let ordered = i > pi || (i == pi && if forward { x >= px } else { x <= px });
                if !ordered {
                    return Err(Error::InvalidArgument("samples are not ordered along the path".into()));
                }
            }
            prev = Some((i, x));
            pos.push((i, x));
        }

        let mut out = Vec::with_capacity(samples.len());
        let mut y = y0;
        let mut next = 0;
        for (i, seg) in segs.iter().enumerate() {
            let f = |x: f64, y: &[f64; N]| {
                let p = bg.path_point(seg, x, with_dv);
                let mut d = rhs(&p, y);
                for v in d.iter_mut() {
                    *v *= p.dtau_dx;
                }
                d
            };
            while next < pos.len() && pos[next].0 == i && pos[next].1 == seg.x0() {
                out.push(y);
                next += 1;
            }
            if seg.x0() == seg.x1() {
                continue;
            }
            let res = integrate(&f, seg.x0(), y, seg.x1(), &self.opts, |x| seg.max_step(x), |step| {
                while next < pos.len() && pos[next].0 == i && step.covers(pos[next].1) {
                    out.push(step.eval(pos[next].1));
                    next += 1;
                }
                Control::Continue
            });
            let res = res.map_err(|e| match e {
                Error::ToleranceFailure { h, .. } => Error::ToleranceFailure { tau: seg_tau(bg, seg), h },
                e => e,
            })?;
            y = res.y;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::ToleranceFailure { tau: seg_tau(bg, seg), h: 0.0 });
            }
            while next < pos.len() && pos[next].0 == i {
                out.push(y);
                next += 1;
            }
        }
        while out.len() < samples.len() {
            out.push(y);
        }
        Ok(out)
    }
}

fn seg_tau(bg: &Background<'_>, seg: &Segment) -> f64 {
    match (bg, seg) {
        (Background::Chart { chart, .. }, Segment::Patch { side, x1, .. }) => chart.tau_of(crate::cosmology::Loc { side: *side, l: *x1 }),
        (_, Segment::Offset { x1, .. }) => *x1,
        _ => f64::NAN,
    }
}

/// Spec-shaped wrapper around [`ModeSolver::evolve`].
pub fn evolve_mode(chart: &ConformalChart, coupling: &CouplingSpec, mu: f64, state: &ModeState, tau_target: Tau) -> Result<ModeState> {
    let s = ModeState { mu, ..*state };
    ModeSolver::on_chart(chart, *coupling).evolve(&s, tau_target)
}

/// tau,re_psi,im_psi,re_dpsi,im_dpsi rows; tau is absolute.
pub fn trajectory_csv(bg: &Background<'_>, states: &[ModeState]) -> Result<String> {
    let mut s = String::from("tau,re_psi,im_psi,re_dpsi,im_dpsi\n");
    for st in states {
        let t = bg.absolute(st.tau)?;
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            t, st.psi.re, st.psi.im, st.dpsi.re, st.dpsi.im
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosmology::{ScaleFactorModel, Side};
    use crate::dynamics::background::AnalyticPotential;
    use crate::specfun::bessel_jy;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn liouville_examples() {
        let (p0, p1) = liouville_forward(c(1.0, 0.0), c(0.0, 0.0), 2.0, 1.0, 3).unwrap();
        assert!((p0 - c(2.0, 0.0)).norm() < 1e-15 && (p1 - c(2.0, 0.0)).norm() < 1e-15);
        let (u0, u1) = liouville_inverse(p0, p1, 2.0, 1.0, 3).unwrap();
        assert!((u0 - c(1.0, 0.0)).norm() < 1e-15 && u1.norm() < 1e-15);
        let (p0, p1) = liouville_forward(c(0.3, 0.1), c(-2.0, 0.5), 1.0, 0.0, 5).unwrap();
        assert_eq!((p0, p1), (c(0.3, 0.1), c(-2.0, 0.5)));
        assert!(liouville_forward(c(1.0, 0.0), c(0.0, 0.0), 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn harmonic_oscillator() {
        let v = AnalyticPotential::constant(0.0);
        let s = ModeSolver::new(Background::Analytic(&v));
        let out = s.evolve(&ModeState::real(1.0, Tau::at(0.0), 1.0, 0.0), Tau::at(PI)).unwrap();
        assert!((out.psi.re + 1.0).abs() < 1e-9, "{}", out.psi);
        assert!(out.dpsi.norm() < 1e-9);
    }

    // sqrt(D) J1(2 m sqrt(D)) solves psi'' + m^2/D psi = 0 with D = tau+ - tau
    fn bessel_state(m: f64, d: f64) -> (f64, f64) {
        let x = 2.0 * m * d.sqrt();
        let j = bessel_jy(1.0, x).unwrap();
        let j0 = bessel_jy(0.0, x).unwrap();
        (d.sqrt() * j.j, -m * j0.j)
    }

    #[test]
    fn big_rip_bessel_solution() {
        let model = ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::conformal(3, 1.0).unwrap();
        let (p, dp) = bessel_state(1.0, 0.2);
        let init = ModeState::real(0.0, Tau::before_plus(0.2), p, dp);
        for d in [0.1, 1e-3, 1e-7] {
            let out = evolve_mode(&chart, &cp, 0.0, &init, Tau::before_plus(d)).unwrap();
            let (pe, dpe) = bessel_state(1.0, d);
            assert!((out.psi.re - pe).abs() < 1e-9, "d={d}: {} vs {pe}", out.psi.re);
            assert!((out.dpsi.re - dpe).abs() < 1e-8, "d={d}: {} vs {dpe}", out.dpsi.re);
        }
    }

    #[test]
    fn analytic_and_chart_agree() {
        let model = ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::conformal(3, 1.0).unwrap();
        let tp = chart.endpoint_value(Side::Future).unwrap();
        let an = AnalyticPotential::power_to_plus(tp - 0.25, tp, 1.0, -1.0);
        let init = ModeState::new(2.0, Tau::before_plus(0.2), c(1.0, 0.5), c(-0.3, 1.0));
        let a = ModeSolver::on_chart(&chart, cp).evolve(&init, Tau::before_plus(1e-6)).unwrap();
        let b = ModeSolver::new(Background::Analytic(&an)).evolve(&init, Tau::before_plus(1e-6)).unwrap();
        assert!((a.psi - b.psi).norm() < 1e-8 && (a.dpsi - b.dpsi).norm() < 1e-6 * (1.0 + b.dpsi.norm()));
    }

    #[test]
    fn crosses_the_midpoint_of_two_sided_charts() {
        let model = ScaleFactorModel::two_sided(0.0, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::conformal(3, 0.0).unwrap();
        // massless conformal: V = 0, so psi = cos(tau - tau0)
        let init = ModeState::real(4.0, Tau::after_minus(1e-3), 1.0, 0.0);
        let to = Tau::before_plus(1e-3);
        let out = ModeSolver::on_chart(&chart, cp).evolve(&init, to).unwrap();
        let span = chart.absolute(to).unwrap() - chart.absolute(init.tau).unwrap();
        assert!((out.psi.re - (2.0 * span).cos()).abs() < 1e-9);
    }

    #[test]
    fn margin_is_enforced() {
        let model = ScaleFactorModel::big_rip(1, 0.0, 1.0).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::conformal(3, 1.0).unwrap();
        let init = ModeState::real(0.0, Tau::before_plus(0.2), 1.0, 0.0);
        let r = evolve_mode(&chart, &cp, 0.0, &init, Tau::before_plus(1e-14));
        assert!(matches!(r, Err(Error::EndpointReached { .. })));
    }

    #[test]
    fn wronskian_and_reversal() {
        let model = ScaleFactorModel::single_future(0.0, 1.0, crate::cosmology::SideParams::leading(1.0, 0.5)).unwrap();
        let chart = ConformalChart::new(model).unwrap();
        let cp = CouplingSpec::new(0.0, 3, 1.0).unwrap();
        let s = ModeSolver::on_chart(&chart, cp);
        let t0 = Tau::before_plus(0.5);
        let t1 = Tau::before_plus(1e-3);
        let a = ModeState::real(5.0, t0, 1.0, 0.0);
        let b = ModeState::real(5.0, t0, 0.0, 1.0);
        let w0 = wronskian(&a, &b);
        let a1 = s.evolve(&a, t1).unwrap();
        let b1 = s.evolve(&b, t1).unwrap();
        assert!(((wronskian(&a1, &b1) - w0) / w0).norm() < 1e-9);
        let back = s.evolve(&a1, t0).unwrap();
        assert!((back.psi - a.psi).norm() < 1e-9 && (back.dpsi - a.dpsi).norm() < 1e-9);
    }

    #[test]
    fn sampled_matches_single() {
        let v = AnalyticPotential::tanh_step(1.0, 3.0, 0.3);
        let s = ModeSolver::new(Background::Analytic(&v));
        let init = ModeState::real(1.0, Tau::at(-3.0), 1.0, 0.0);
        let ts: Vec<Tau> = (0..7).map(|k| Tau::at(-3.0 + k as f64)).collect();
        let all = s.evolve_sampled(&init, &ts).unwrap();
        let one = s.evolve(&init, Tau::at(1.0)).unwrap();
        assert!((all[4].psi - one.psi).norm() < 1e-9);
        assert_eq!(all[0].psi, init.psi);
        assert!(trajectory_csv(&s.bg, &all).unwrap().lines().count() == 8);
    }
}
