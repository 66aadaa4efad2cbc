//! Small least-squares and sequence-acceleration helpers.

/// Ordinary least-squares line y = slope*x + intercept.
/// Returns (slope, intercept, rms residual).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Fit y = c * f(x) + d for a fixed basis function f. Returns (c, d, rms).
pub fn affine_fit<F: Fn(f64) -> f64>(x: &[f64], y: &[f64], f: F) -> (f64, f64, f64) {
    let fx: Vec<f64> = x.iter().map(|&v| f(v)).collect();
    linear_fit(&fx, y)
}

/// One Aitken delta-squared step on three consecutive terms.
/// Falls back to the last term when the denominator is degenerate.
pub fn aitken(s0: f64, s1: f64, s2: f64) -> f64 {
    let d1 = s1 - s0;
    let d2 = s2 - s1;
    let den = d2 - d1;
    if den.abs() <= 1e-300 || !(d1 * d2 > 0.0) || d2.abs() >= d1.abs() {
        return s2;
    }
    s2 - d2 * d2 / den
}

/// Aitken on complex sequences, componentwise.
pub fn aitken_c(s0: num_complex::Complex64, s1: num_complex::Complex64, s2: num_complex::Complex64) -> num_complex::Complex64 {
    num_complex::Complex64::new(aitken(s0.re, s1.re, s2.re), aitken(s0.im, s1.im, s2.im))
}
