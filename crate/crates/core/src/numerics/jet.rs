//! Truncated Taylor series ("jets"). Coefficient k is f^(k)/k!.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize>(pub [f64; N]);

impl<const N: usize> Jet<N> {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; N];
        a[0] = c;
        Jet(a)
    }

    /// The identity series s (value 0, slope 1).
    pub fn variable() -> Self {
        let mut a = [0.0; N];
        if N > 1 {
            a[1] = 1.0;
        }
        Jet(a)
    }

    /// Build from derivatives f, f', f'', ...
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut a = [0.0; N];
        let mut fact = 1.0;
        for k in 0..N.min(d.len()) {
            if k > 0 {
                fact *= k as f64;
            }
            a[k] = d[k] / fact;
        }
        Jet(a)
    }

    pub fn derivatives(&self) -> [f64; N] {
        let mut out = [0.0; N];
        let mut fact = 1.0;
        for k in 0..N {
            if k > 0 {
                fact *= k as f64;
            }
            out[k] = self.0[k] * fact;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut a = self.0;
        a.iter_mut().for_each(|v| *v *= c);
        Jet(a)
    }

    /// d/ds; the top coefficient is lost.
    pub fn deriv(&self) -> Self {
        let mut a = [0.0; N];
        for k in 1..N {
            a[k - 1] = self.0[k] * k as f64;
        }
        Jet(a)
    }

    /// Antiderivative vanishing at s = 0 (truncated).
    pub fn integ(&self) -> Self {
        let mut a = [0.0; N];
        for k in 1..N {
            a[k] = self.0[k - 1] / k as f64;
        }
        Jet(a)
    }

    pub fn recip(&self) -> Self {
        let a0 = self.0[0];
        let mut r = [0.0; N];
        r[0] = 1.0 / a0;
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.0[j] * r[k - j];
            }
            r[k] = -s / a0;
        }
        Jet(r)
    }

    /// f(x0 + h) where `fd` holds f, f', f'', ... at x0 and h(0) = 0.
    pub fn compose(fd: &[f64], h: &Self) -> Self {
        debug_assert!(h.0[0] == 0.0);
        let inner = Self::from_derivatives(fd);
        let mut acc = Self::constant(inner.0[N.min(fd.len()) - 1]);
        for k in (0..N.min(fd.len()) - 1).rev() {
            acc = acc * *h + Self::constant(inner.0[k]);
        }
        acc
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut a = self.0;
        for k in 0..N {
            a[k] += o.0[k];
        }
        Jet(a)
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut a = self.0;
        for k in 0..N {
            a[k] -= o.0[k];
        }
        Jet(a)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut a = [0.0; N];
        for i in 0..N {
            for j in 0..N - i {
                a[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(a)
    }
}
