//! Periodic cubic splines on (possibly non-uniform) knots.

/// Interpolating periodic cubic spline `y(t)` with period `period`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
    period: f64,
}

/// Solves a cyclic tridiagonal system in place (Sherman–Morrison).
/// `a` is the sub-diagonal, `b` the diagonal, `c` the super-diagonal;
/// `a[0]` couples row 0 to the last unknown and `c[n-1]` the last row to
/// the first.
fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    if n == 1 {
        return vec![rhs[0] / (b[0] + a[0] + c[0])];
    }
    if n == 2 {
        let (a00, a01) = (b[0], c[0] + a[0]);
        let (a10, a11) = (a[1] + c[1], b[1]);
        let det = a00 * a11 - a01 * a10;
        return vec![(rhs[0] * a11 - a01 * rhs[1]) / det, (a00 * rhs[1] - a10 * rhs[0]) / det];
    }
    let alpha = c[n - 1];
    let beta = a[0];
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;
    let x = thomas(a, &bb, c, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(a, &bb, c, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

impl PeriodicSpline {
    /// `knots` must be strictly increasing with `knots[n-1] < knots[0] + period`.
    pub fn new(knots: Vec<f64>, values: Vec<f64>, period: f64) -> Self {
        let n = knots.len();
        assert!(n >= 3 && values.len() == n, "periodic spline needs >= 3 knots");
        let h: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 < n {
                    knots[i + 1] - knots[i]
                } else {
                    knots[0] + period - knots[n - 1]
                }
            })
            .collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 0..n {
            let hm = h[(i + n - 1) % n];
            let hp = h[i];
            let ym = values[(i + n - 1) % n];
            let yp = values[(i + 1) % n];
            a[i] = hm / 6.0;
            b[i] = (hm + hp) / 3.0;
            c[i] = hp / 6.0;
            r[i] = (yp - values[i]) / hp - (values[i] - ym) / hm;
        }
        let second = solve_cyclic(&a, &b, &c, &r);
        PeriodicSpline {
            knots,
            values,
            second,
            period,
        }
    }

    /// Uniform knots `t_k = k * period / n`.
    pub fn uniform(values: Vec<f64>, period: f64) -> Self {
        let n = values.len();
        let knots = (0..n).map(|k| k as f64 * period / n as f64).collect();
        Self::new(knots, values, period)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let t0 = self.knots[0];
        let mut tt = (t - t0).rem_euclid(self.period) + t0;
        if tt >= t0 + self.period {
            tt = t0;
        }
        let n = self.knots.len();
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&tt)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
        .min(n - 1);
        let next = if i + 1 < n {
            self.knots[i + 1]
        } else {
            t0 + self.period
        };
        (i, tt - self.knots[i], next - self.knots[i])
    }

    /// Value, first and second derivative at `t`.
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let n = self.knots.len();
        let (i, dt, h) = self.locate(t);
        let j = (i + 1) % n;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.second[i], self.second[j]);
        let a = (h - dt) / h;
        let b = dt / h;
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        (v, d1, d2)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_sine() {
        let n = 128;
        let vals: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).sin()).collect();
        let s = PeriodicSpline::uniform(vals, 2.0 * PI);
        for k in 0..200 {
            let t = -3.0 + k as f64 * 0.061;
            let (v, d, dd) = s.eval_all(t);
            assert!((v - t.sin()).abs() < 1e-7);
            assert!((d - t.cos()).abs() < 1e-4);
            assert!((dd + t.sin()).abs() < 3e-3);
        }
    }

    #[test]
    fn constant_is_exact() {
        let s = PeriodicSpline::new(vec![0.0, 0.3, 0.5, 0.9], vec![2.0; 4], 1.0);
        for k in 0..50 {
            let (v, d, dd) = s.eval_all(k as f64 * 0.037);
            assert!((v - 2.0).abs() < 1e-14 && d.abs() < 1e-13 && dd.abs() < 1e-12);
        }
    }

    #[test]
    fn interpolates_knots() {
        let knots = vec![0.0, 0.1, 0.35, 0.6, 0.8];
        let vals = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let s = PeriodicSpline::new(knots.clone(), vals.clone(), 1.0);
        for (k, v) in knots.iter().zip(&vals) {
            assert!((s.eval(*k) - v).abs() < 1e-13);
            assert!((s.eval(*k + 1.0) - v).abs() < 1e-12);
        }
    }
}
