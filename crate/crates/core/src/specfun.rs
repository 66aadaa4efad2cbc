//! Real-order Bessel functions, the complete elliptic integral K and the
//! Jacobi elliptic functions.
//!
//! Bessel: double-double power series below `X_SWITCH`, Hankel asymptotic
//! expansion above. The power series for J cancels badly for x of order
//! 10 (largest term ~1e7), which is why it is summed in double-double.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::numerics::dd::Dd;

/// Seam between the power series and the asymptotic expansion.
pub const X_SWITCH: f64 = 20.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: f64,
    pub x: f64,
    pub j: f64,
    pub y: f64,
    pub dj: f64,
    pub dy: f64,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

fn is_integer(nu: f64) -> bool {
    nu == nu.round()
}

/// Power series of J_{nu}(x), nu may be negative non-integer.
/// Returns (x/2)^nu / Gamma(nu+1) * sum, with the sum in double-double.
fn j_series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let h = x * 0.5;
    let z = Dd::new(h) * Dd::new(h);
    let mut term = Dd::new(1.0);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        let den = (Dd::new(k) + Dd::new(nu)).mul_f64(k);
        term = -(term * z).div(den);
        sum = sum + term;
        if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) && k > h {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    sum.to_f64() * h.powf(nu) / gamma(nu + 1.0)
}

/// Y_n for integer n >= 0 from the logarithmic series.
fn y_series_int(n: usize, x: f64) -> f64 {
    let h = x * 0.5;
    let jn = j_series(n as f64, x);
    // finite part: sum_{k<n} (n-k-1)!/k! h^{2k-n}
    let mut fin = 0.0;
    if n > 0 {
        let mut fact_nk1 = 1.0; // (n-1)!
        for i in 1..n {
            fact_nk1 *= i as f64;
        }
        let mut c = fact_nk1; // (n-k-1)!/k! at k=0
        let mut p = h.powi(-(n as i32));
        let h2 = h * h;
        for k in 0..n {
            fin += c * p;
            if k + 1 < n {
                c /= ((n - k - 1) as f64) * ((k + 1) as f64);
                p *= h2;
            }
        }
    }
    // sum_k (H_k + H_{n+k}) (-1)^k h^{2k+n} / (k!(n+k)!)
    let z = Dd::new(h) * Dd::new(h);
    let mut hk = Dd::ZERO;
    let mut hnk = Dd::ZERO;
    for i in 1..=n {
        hnk = hnk + Dd::new(1.0).div_f64(i as f64);
    }
    let mut t = Dd::new(1.0); // (-1)^k h^{2k} / (k!(n+k)!) * n!
    let mut sum = t * (hk + hnk);
    let mut k = 1.0;
    loop {
        let den = Dd::new(k).mul_f64(k + n as f64);
        t = -(t * z).div(den);
        hk = hk + Dd::new(1.0).div_f64(k);
        hnk = hnk + Dd::new(1.0).div_f64(k + n as f64);
        let add = t * (hk + hnk);
        sum = sum + add;
        if add.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) && k > h {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    let mut nfact = 1.0;
    for i in 2..=n {
        nfact *= i as f64;
    }
    let hsum = sum.to_f64() * h.powi(n as i32) / nfact;
    (2.0 / PI) * jn * (h.ln() + EULER_GAMMA) - fin / PI - hsum / PI
}

/// Hankel asymptotic expansion; returns (J, Y).
fn hankel(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0f64;
    let mut q = 0.0f64;
    let mut a = 1.0f64; // a_k(nu) / x^k
    let mut prev = f64::INFINITY;
    for k in 0..200usize {
        if a.abs() > prev {
            break;
        }
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        prev = a.abs();
        if a.abs() < 1e-18 * p.abs().max(1e-300) {
            break;
        }
        let odd = (2 * k + 1) as f64;
        a *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    let c = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sc, cc) = c.sin_cos();
    let cos_chi = cx * cc + sx * sc;
    let sin_chi = sx * cc - cx * sc;
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

fn jy_value(nu: f64, x: f64) -> (f64, f64) {
    if x > X_SWITCH {
        return hankel(nu, x);
    }
    let j = j_series(nu, x);
    let y = if is_integer(nu) {
        y_series_int(nu as usize, x)
    } else {
        let s = (nu * PI).sin();
        let c = (nu * PI).cos();
        (j * c - j_series(-nu, x)) / s
    };
    (j, y)
}

/// J_nu(x) for nu >= 0, x >= 0.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if nu < 0.0 || x < 0.0 || !x.is_finite() {
        return Err(Error::DomainError(format!("J_{nu}({x})")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(if x > X_SWITCH { hankel(nu, x).0 } else { j_series(nu, x) })
}

/// J, Y and their derivatives for nu >= 0, x > 0.
pub fn bessel_jy(nu: f64, x: f64) -> Result<BesselEval> {
    if nu < 0.0 || x <= 0.0 || !x.is_finite() {
        return Err(Error::DomainError(format!("Y_{nu}({x}) needs x > 0 and nu >= 0")));
    }
    let (j, y) = jy_value(nu, x);
    let (j1, y1) = jy_value(nu + 1.0, x);
    Ok(BesselEval {
        order: nu,
        x,
        j,
        y,
        dj: nu / x * j - j1,
        dy: nu / x * y - y1,
    })
}

/// Complete elliptic integral of the first kind, modulus k (not parameter).
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k.abs()) {
        return Err(Error::DomainError(format!("K({k}) needs |k| < 1")));
    }
    let mut a = 1.0;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(FRAC_PI_2 / a)
}

/// Jacobi (sn, cn, dn)(z, k) by descending Landen transformation, after
/// reducing z modulo the real period 4K.
pub fn jacobi_sn_cn_dn(z: f64, k: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0).contains(&k.abs()) {
        return Err(Error::DomainError(format!("Jacobi functions need |k| < 1, got {k}")));
    }
    if k == 0.0 {
        return Ok((z.sin(), z.cos(), 1.0));
    }
    let mut a = vec![1.0];
    let mut c = vec![k.abs()];
    let mut b = ((1.0 - k.abs()) * (1.0 + k.abs())).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 64 {
        let an = *a.last().unwrap();
        let cn = 0.5 * (an - b);
        let next = 0.5 * (an + b);
        b = (an * b).sqrt();
        a.push(next);
        c.push(cn);
    }
    let n = a.len() - 1;
    let kk = FRAC_PI_2 / a[n];
    let period = 4.0 * kk;
    let zr = z - period * (z / period).round();
    let mut phi = 2f64.powi(n as i32) * a[n] * zr;
    let mut phi_prev = phi;
    for i in (1..=n).rev() {
        phi_prev = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 { 1.0 } else { cn / (phi_prev - phi).cos() };
    Ok((sn, cn, dn))
}

pub fn jacobi_cn(z: f64, k: f64) -> Result<f64> {
    jacobi_sn_cn_dn(z, k).map(|t| t.1)
}
