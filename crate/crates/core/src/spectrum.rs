//! Laplacian spectra of round spheres and flat tori, the shifted operator
//! -Delta + xi R_gamma with an infrared cut, and partial zeta sums.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma;

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ManifoldKind {
    /// round sphere S^d of the given radius
    SphereSd { radius: f64, d: u32 },
    /// flat torus with the given side lengths (d = number of sides)
    FlatTorusTd { lengths: Vec<f64> },
}

impl ManifoldKind {
    pub fn dim(&self) -> u32 {
        match self {
            ManifoldKind::SphereSd { d, .. } => *d,
            ManifoldKind::FlatTorusTd { lengths } => lengths.len() as u32,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            ManifoldKind::SphereSd { radius, d } => {
                let n = *d as f64 + 1.0;
                2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0) * radius.powi(*d as i32)
            }
            ManifoldKind::FlatTorusTd { lengths } => lengths.iter().product(),
        }
    }

    /// Weyl constant C in N(lambda) ~ C lambda^(d/2).
    pub fn weyl_constant(&self) -> f64 {
        let d = self.dim() as f64;
        let ball = std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0);
        ball * self.volume() / (2.0 * std::f64::consts::PI).powf(d)
    }
}

/// Eigenvalues of -Delta_K with multiplicities, ascending, no duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpectrum {
    pub kind: ManifoldKind,
    pub d: u32,
    pub r_gamma: f64,
    pub cutoff: f64,
    pub ladder: Vec<(f64, u64)>,
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Dimension of degree-k spherical harmonics on S^d.
pub fn sphere_multiplicity(k: u64, d: u32) -> u64 {
    let d = d as u64;
    let hi = binom(k + d, d);
    let lo = if k >= 2 { binom(k + d - 2, d) } else { 0 };
    (hi - lo) as u64
}

/// Try to write every w_i / w_0 as p_i / q with a common small denominator.
fn commensurate(w: &[f64]) -> Option<(f64, Vec<u64>)> {
    let mut den = 1u64;
    let mut fracs = Vec::with_capacity(w.len());
    for &x in w {
        let r = x / w[0];
        let mut found = None;
        for q in 1..=1000u64 {
            let p = (r * q as f64).round();
            if p >= 1.0 && (p / q as f64 - r).abs() <= 1e-12 * r {
                found = Some((p as u64, q));
                break;
            }
        }
        let (p, q) = found?;
        fracs.push((p, q));
        den = num_lcm(den, q);
        if den > 1_000_000 {
            return None;
        }
    }
    let ints = fracs.iter().map(|&(p, q)| p * (den / q)).collect();
    Some((w[0] / den as f64, ints))
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn num_lcm(a: u64, b: u64) -> u64 {
    a / num_gcd(a, b) * b
}

/// Enumerate all eigenvalues <= cutoff.
pub fn build_ladder(kind: ManifoldKind, cutoff: f64) -> Result<ManifoldSpectrum> {
    build_ladder_with_budget(kind, cutoff, DEFAULT_BUDGET)
}

pub fn build_ladder_with_budget(kind: ManifoldKind, cutoff: f64, budget: usize) -> Result<ManifoldSpectrum> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff must be positive, got {cutoff}")));
    }
    match &kind {
        ManifoldKind::SphereSd { radius, d } => {
            if *d < 3 || !(*radius > 0.0) {
                return Err(Error::InvalidArgument("sphere needs d >= 3 and a positive radius".into()));
            }
            let r2 = radius * radius;
            let df = *d as f64;
            let mut ladder = Vec::new();
            let mut k = 0u64;
            loop {
                let kf = k as f64;
                let lam = kf * (kf + df - 1.0) / r2;
                if lam > cutoff {
                    break;
                }
                if ladder.len() >= budget {
                    return Err(Error::CutoffTooLarge { budget });
                }
                ladder.push((lam, sphere_multiplicity(k, *d)));
                k += 1;
            }
            Ok(ManifoldSpectrum { r_gamma: df * (df - 1.0) / r2, d: *d, cutoff, ladder, kind })
        }
        ManifoldKind::FlatTorusTd { lengths } => {
            let d = lengths.len();
            if d < 3 || lengths.iter().any(|l| !(*l > 0.0)) {
                return Err(Error::InvalidArgument("torus needs at least 3 positive lengths".into()));
            }
            let w: Vec<f64> = lengths.iter().map(|l| (2.0 * std::f64::consts::PI / l).powi(2)).collect();
            let points = kind.weyl_constant() * cutoff.powf(d as f64 / 2.0);
            if points > 1e3 * budget as f64 {
                return Err(Error::CutoffTooLarge { budget });
            }
            let nmax: Vec<i64> = w.iter().map(|wi| (cutoff / wi).sqrt().floor() as i64).collect();
            let ladder = match commensurate(&w) {
                Some((unit, ints)) => {
                    let kmax = (cutoff / unit * (1.0 + 1e-12)).floor() as u64;
                    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
                    enumerate_int(&ints, &nmax, 0, 0, kmax, &mut counts);
                    if counts.len() > budget {
                        return Err(Error::CutoffTooLarge { budget });
                    }
                    counts.into_iter().map(|(k, m)| (k as f64 * unit, m)).collect::<Vec<_>>()
                }
                None => {
                    let mut vals = Vec::new();
                    enumerate_real(&w, &nmax, 0, 0.0, cutoff, &mut vals);
                    vals.sort_by(|a, b| a.total_cmp(b));
                    let mut ladder: Vec<(f64, u64)> = Vec::new();
                    for v in vals {
                        match ladder.last_mut() {
                            Some(last) if (v - last.0).abs() <= 1e-12 => last.1 += 1,
                            _ => ladder.push((v, 1)),
                        }
                    }
                    if ladder.len() > budget {
                        return Err(Error::CutoffTooLarge { budget });
                    }
                    ladder
                }
            };
            Ok(ManifoldSpectrum { r_gamma: 0.0, d: d as u32, cutoff, ladder, kind })
        }
    }
}

fn enumerate_int(ints: &[u64], nmax: &[i64], dim: usize, acc: u64, kmax: u64, out: &mut BTreeMap<u64, u64>) {
    if dim == ints.len() {
        *out.entry(acc).or_insert(0) += 1;
        return;
    }
    for n in -nmax[dim]..=nmax[dim] {
        let v = acc + ints[dim] * (n * n) as u64;
        if v <= kmax {
            enumerate_int(ints, nmax, dim + 1, v, kmax, out);
        }
    }
}

fn enumerate_real(w: &[f64], nmax: &[i64], dim: usize, acc: f64, cutoff: f64, out: &mut Vec<f64>) {
    if dim == w.len() {
        out.push(acc);
        return;
    }
    for n in -nmax[dim]..=nmax[dim] {
        let v = acc + w[dim] * (n * n) as f64;
        if v <= cutoff * (1.0 + 1e-14) {
            enumerate_real(w, nmax, dim + 1, v, cutoff, out);
        }
    }
}

impl ManifoldSpectrum {
    /// N(lambda): eigenvalues <= lambda counted with multiplicity.
    pub fn counting(&self, lambda: f64) -> u64 {
        self.ladder.iter().take_while(|e| e.0 <= lambda).map(|e| e.1).sum()
    }
}

/// One retained entry of the shifted ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedEntry {
    pub lambda: f64,
    pub mu: f64,
    pub mult: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedSpectrum {
    pub base: ManifoldSpectrum,
    pub xi: f64,
    pub delta: f64,
    pub mu_ladder: Vec<ShiftedEntry>,
}

/// mu = lambda + xi R_gamma, dropping mu < delta.
pub fn shift_and_cut(base: &ManifoldSpectrum, xi: f64, delta: f64) -> Result<ShiftedSpectrum> {
    let shift = xi * base.r_gamma;
    let mu_ladder: Vec<ShiftedEntry> = base
        .ladder
        .iter()
        .map(|&(lambda, mult)| ShiftedEntry { lambda, mu: lambda + shift, mult })
        .filter(|e| e.mu >= delta)
        .collect();
    if mu_ladder.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    Ok(ShiftedSpectrum { base: base.clone(), xi, delta, mu_ladder })
}

/// Sum of mult * lambda^-s over the first `n_terms` positive ladder entries,
/// and a tail estimate from N(lambda) <= C lambda^(d/2):
/// tail <= s C L^(d/2 - s) / (s - d/2), L the last included eigenvalue.
pub fn zeta_partial(base: &ManifoldSpectrum, s: f64, n_terms: usize) -> Result<(f64, f64)> {
    let half_d = base.d as f64 / 2.0;
    if s <= half_d {
        return Err(Error::DivergentSeries { s, half_d });
    }
    let pos: Vec<(f64, u64)> = base.ladder.iter().copied().filter(|e| e.0 > 0.0).take(n_terms).collect();
    let sum: f64 = pos.iter().map(|&(l, m)| m as f64 * l.powf(-s)).sum();
    let Some(&(last, _)) = pos.last() else {
        return Ok((0.0, 0.0));
    };
    // C: Weyl constant, raised to cover the empirical counting function
    let mut c = 1.05 * base.kind.weyl_constant();
    let mut count = 0u64;
    for &(l, m) in &base.ladder {
        count += m;
        if l >= 0.25 * last && l > 0.0 {
            c = c.max(count as f64 / l.powf(half_d));
        }
    }
    let tail = s * c * last.powf(half_d - s) / (s - half_d);
    Ok((sum, tail))
}

/// max(2, floor(d/2)).
pub fn l_of_d(d: u32) -> u32 {
    (d / 2).max(2)
}
