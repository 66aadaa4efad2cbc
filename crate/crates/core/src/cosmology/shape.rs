//! a(t) written in a side coordinate sigma = |t - t_end| as
//! a = sigma^e0 h(sigma), evaluated through l = ln sigma so that deep
//! endpoint approaches never underflow.

use super::Side;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shape {
    /// a = c0 s^e0 + c1 s^e1
    TwoTerm { c0: f64, e0: f64, c1: f64, e1: f64 },
    /// a = c s^e_near (len - s)^e_far
    Product { c: f64, e_near: f64, e_far: f64, len: f64 },
}

/// p (p-1) ... (p-k+1)
pub(crate) fn falling(p: f64, k: usize) -> f64 {
    (0..k).map(|i| p - i as f64).product()
}

/// c * d^k/ds^k s^p at s = e^l, with exact zeros for vanishing factorials.
fn power_deriv(c: f64, p: f64, k: usize, l: f64) -> f64 {
    let f = falling(p, k);
    if f == 0.0 || c == 0.0 {
        0.0
    } else {
        c * f * ((p - k as f64) * l).exp()
    }
}

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

impl Shape {
    pub fn e0(&self) -> f64 {
        match *self {
            Shape::TwoTerm { e0, .. } => e0,
            Shape::Product { e_near, .. } => e_near,
        }
    }

    /// h(0), the effective leading coefficient.
    pub fn c0_eff(&self) -> f64 {
        match *self {
            Shape::TwoTerm { c0, .. } => c0,
            Shape::Product { c, e_far, len, .. } => c * len.powf(e_far),
        }
    }

    /// 1/h(0)
    pub fn g0(&self) -> f64 {
        1.0 / self.c0_eff()
    }

    /// h(s) = a / s^e0
    pub fn h(&self, l: f64) -> f64 {
        match *self {
            Shape::TwoTerm { c0, e0, c1, e1 } => {
                if c1 == 0.0 {
                    c0
                } else {
                    c0 + c1 * ((e1 - e0) * l).exp()
                }
            }
            Shape::Product { c, e_far, len, .. } => c * (len - l.exp()).powf(e_far),
        }
    }

    pub fn ln_a(&self, l: f64) -> f64 {
        match *self {
            Shape::Product { c, e_near, e_far, len } => c.ln() + e_near * l + e_far * (len - l.exp()).ln(),
            _ => self.e0() * l + self.h(l).ln(),
        }
    }

    /// a / s: the rate |dl/dtau|.
    pub fn a_over_s(&self, l: f64) -> f64 {
        ((self.e0() - 1.0) * l).exp() * self.h(l)
    }

    /// s / a = d(tau)/dl up to sign.
    pub fn s_over_a(&self, l: f64) -> f64 {
        ((1.0 - self.e0()) * l).exp() / self.h(l)
    }

    /// r = 1/h - 1/h(0), computed without cancellation.
    pub fn remainder(&self, l: f64) -> f64 {
        match *self {
            Shape::TwoTerm { c0, e0, c1, e1 } => {
                if c1 == 0.0 {
                    0.0
                } else {
                    let x = c1 * ((e1 - e0) * l).exp();
                    -x / (c0 * (c0 + x))
                }
            }
            Shape::Product { e_far, len, .. } => {
                let q = l.exp() / len;
                self.g0() * (-e_far * (-q).ln_1p()).exp_m1()
            }
        }
    }

    /// d^k a / ds^k, k = 0..=4.
    pub fn s_derivatives(&self, l: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        match *self {
            Shape::TwoTerm { c0, e0, c1, e1 } => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = power_deriv(c0, e0, k, l) + power_deriv(c1, e1, k, l);
                }
            }
            Shape::Product { c, e_near, e_far, len } => {
                let x = len - l.exp();
                let lx = x.ln();
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..=k {
                        let near = power_deriv(1.0, e_near, k - i, l);
                        // d^i/ds^i (len - s)^e_far = (-1)^i falling(e_far, i) x^(e_far - i)
                        let far = power_deriv(1.0, e_far, i, lx) * if i % 2 == 0 { 1.0 } else { -1.0 };
                        acc += BINOM[k][i] * near * far;
                    }
                    *o = c * acc;
                }
            }
        }
        out
    }

    /// d^k a / dt^k: s = t+ - t on the future side flips odd orders.
    pub fn t_derivatives(&self, side: Side, l: f64) -> [f64; 5] {
        let mut d = self.s_derivatives(l);
        if side == Side::Future {
            d[1] = -d[1];
            d[3] = -d[3];
        }
        d
    }

    /// Conformal-time coordinate of the leading part: s^(1-e0)/(1-e0), or ln s.
    pub fn u(&self, l: f64) -> f64 {
        let e0 = self.e0();
        if e0 == 1.0 {
            l
        } else {
            ((1.0 - e0) * l).exp() / (1.0 - e0)
        }
    }

    /// Inverse of `u` for e0 != 1 (u must have the sign of 1 - e0).
    pub fn l_of_u(&self, u: f64) -> f64 {
        let e0 = self.e0();
        if e0 == 1.0 {
            u
        } else {
            ((1.0 - e0) * u).ln() / (1.0 - e0)
        }
    }
}
