//! Piecewise Chebyshev-Lobatto grids with spectral cumulative integration,
//! differentiation and barycentric interpolation.

use std::f64::consts::PI;

/// Reference rule on [-1, 1] with `n + 1` ascending Lobatto nodes.
#[derive(Debug, Clone)]
pub struct ChebRule {
    pub n: usize,
    pub x: Vec<f64>,
    /// cumint[i][j]: weight of f(x_j) in the integral from -1 to x_i.
    cumint: Vec<Vec<f64>>,
    diff: Vec<Vec<f64>>,
    bary: Vec<f64>,
}

impl ChebRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let nf = n as f64;
        // descending cos nodes, then reversed to ascending
        let theta: Vec<f64> = (0..=n).map(|j| PI * (n - j) as f64 / nf).collect();
        let x: Vec<f64> = theta.iter().map(|t| t.cos()).collect();

        let mut cumint = vec![vec![0.0; n + 1]; n + 1];
        for j in 0..=n {
            // Chebyshev coefficients of the cardinal function at node j
            let mut c = vec![0.0; n + 1];
            for (k, ck) in c.iter_mut().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                *ck = 2.0 / nf * w * (k as f64 * theta[j]).cos();
            }
            c[0] *= 0.5;
            c[n] *= 0.5;
            // antiderivative coefficients (degree n + 1)
            let mut b = vec![0.0; n + 2];
            for k in 0..=n {
                match k {
                    0 => b[1] += c[0],
                    1 => b[2] += 0.25 * c[1],
                    _ => {
                        b[k + 1] += 0.5 * c[k] / (k + 1) as f64;
                        b[k - 1] -= 0.5 * c[k] / (k - 1) as f64;
                    }
                }
            }
            let at = |t: f64| -> f64 { b.iter().enumerate().map(|(k, bk)| bk * (k as f64 * t).cos()).sum() };
            let base = at(PI);
            for i in 0..=n {
                cumint[i][j] = at(theta[i]) - base;
            }
        }

        let mut bary: Vec<f64> = (0..=n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        bary[0] *= 0.5;
        bary[n] *= 0.5;

        let mut diff = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..=n {
            let mut row = 0.0;
            for j in 0..=n {
                if i != j {
                    let v = bary[j] / bary[i] / (x[i] - x[j]);
                    diff[i][j] = v;
                    row += v;
                }
            }
            diff[i][i] = -row;
        }
        ChebRule { n, x, cumint, diff, bary }
    }
}

/// A grid made of consecutive panels, each carrying its own Lobatto nodes
/// (panel endpoints are duplicated between neighbours).
#[derive(Debug, Clone)]
pub struct PanelGrid {
    pub rule: ChebRule,
    pub breaks: Vec<f64>,
}

impl PanelGrid {
    pub fn new(breaks: Vec<f64>, n: usize) -> Self {
        assert!(breaks.len() >= 2);
        assert!(breaks.windows(2).all(|w| w[1] > w[0]), "breaks must increase");
        PanelGrid {
            rule: ChebRule::new(n),
            breaks,
        }
    }

    pub fn uniform(a: f64, b: f64, panels: usize, n: usize) -> Self {
        let breaks = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
        Self::new(breaks, n)
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn per_panel(&self) -> usize {
        self.rule.n + 1
    }

    pub fn len(&self) -> usize {
        self.panels() * self.per_panel()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for p in 0..self.panels() {
            let (a, b) = (self.breaks[p], self.breaks[p + 1]);
            for (i, &x) in self.rule.x.iter().enumerate() {
                // pin the panel ends exactly
                let v = if i == 0 {
                    a
                } else if i == self.rule.n {
                    b
                } else {
                    0.5 * (a + b) + 0.5 * (b - a) * x
                };
                out.push(v);
            }
        }
        out
    }

    /// Running integral from the first break, evaluated at every node.
    pub fn cumulative(&self, vals: &[f64]) -> Vec<f64> {
        let m = self.per_panel();
        let mut out = vec![0.0; vals.len()];
        let mut offset = 0.0;
        for p in 0..self.panels() {
            let hl = 0.5 * (self.breaks[p + 1] - self.breaks[p]);
            let v = &vals[p * m..(p + 1) * m];
            for i in 0..m {
                let s: f64 = self.rule.cumint[i].iter().zip(v).map(|(w, f)| w * f).sum();
                out[p * m + i] = offset + hl * s;
            }
            offset = out[p * m + m - 1];
        }
        out
    }

    /// Running integral from each node up to the last break, summed from the
    /// top so large contributions near the first break do not cancel.
    pub fn cumulative_to_end(&self, vals: &[f64]) -> Vec<f64> {
        let m = self.per_panel();
        let mut out = vec![0.0; vals.len()];
        let mut above = 0.0;
        for p in (0..self.panels()).rev() {
            let hl = 0.5 * (self.breaks[p + 1] - self.breaks[p]);
            let v = &vals[p * m..(p + 1) * m];
            let part: Vec<f64> = (0..m).map(|i| hl * self.rule.cumint[i].iter().zip(v).map(|(w, f)| w * f).sum::<f64>()).collect();
            let total = part[m - 1];
            for i in 0..m {
                out[p * m + i] = above + (total - part[i]);
            }
            above += total;
        }
        out
    }

    pub fn integral(&self, vals: &[f64]) -> f64 {
        *self.cumulative(vals).last().unwrap()
    }

    pub fn derivative(&self, vals: &[f64]) -> Vec<f64> {
        let m = self.per_panel();
        let mut out = vec![0.0; vals.len()];
        for p in 0..self.panels() {
            let hl = 0.5 * (self.breaks[p + 1] - self.breaks[p]);
            let v = &vals[p * m..(p + 1) * m];
            for i in 0..m {
                let s: f64 = self.rule.diff[i].iter().zip(v).map(|(w, f)| w * f).sum();
                out[p * m + i] = s / hl;
            }
        }
        out
    }

    /// Panel index containing x (clamped to the grid).
    pub fn locate(&self, x: f64) -> usize {
        let p = self.breaks.partition_point(|&b| b <= x);
        p.clamp(1, self.panels()) - 1
    }

    pub fn interpolate(&self, vals: &[f64], x: f64) -> f64 {
        let p = self.locate(x);
        let m = self.per_panel();
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let s = (2.0 * x - a - b) / (b - a);
        let v = &vals[p * m..(p + 1) * m];
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..m {
            let d = s - self.rule.x[j];
            if d == 0.0 {
                return v[j];
            }
            let w = self.rule.bary[j] / d;
            num += w * v[j];
            den += w;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_of_cosine_is_sine() {
        let g = PanelGrid::uniform(0.0, 3.0, 4, 16);
        let x = g.nodes();
        let v: Vec<f64> = x.iter().map(|t| t.cos()).collect();
        let c = g.cumulative(&v);
        for (t, ci) in x.iter().zip(&c) {
            assert!((ci - t.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_integral_of_steep_power() {
        // x^(-3/2) on halving panels down to 2^-80: the head dwarfs the tail
        let breaks: Vec<f64> = (0..=80).rev().map(|k| 0.5f64.powi(k)).collect();
        let g = PanelGrid::new(breaks, 16);
        let x = g.nodes();
        let v: Vec<f64> = x.iter().map(|t| t.powf(-1.5)).collect();
        let c = g.cumulative_to_end(&v);
        for (t, ci) in x.iter().zip(&c) {
            let exact = 2.0 * (t.powf(-0.5) - 1.0);
            assert!((ci - exact).abs() <= 1e-13 * (1.0 + exact), "{t}: {ci} vs {exact}");
        }
    }

    #[test]
    fn derivative_and_interpolation() {
        let g = PanelGrid::uniform(-1.0, 2.0, 3, 16);
        let x = g.nodes();
        let v: Vec<f64> = x.iter().map(|t| (2.0 * t).exp()).collect();
        let d = g.derivative(&v);
        for (t, di) in x.iter().zip(&d) {
            assert!((di - 2.0 * (2.0 * t).exp()).abs() < 1e-10 * (2.0 * t).exp().max(1.0));
        }
        let y = g.interpolate(&v, 0.123);
        assert!((y - (0.246f64).exp()).abs() < 1e-13);
    }
}
