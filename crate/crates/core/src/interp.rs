//! C¹ cubic Hermite interpolation of nodal samples on a uniform grid.
//!
//! Slopes are second-order finite differences (one-sided at segment ends),
//! so quadratics are reproduced exactly.

#[derive(Debug, Clone)]
pub struct Cubic {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    period: Option<f64>,
}

impl Cubic {
    /// Samples `values[i]` at `x0 + i h`. With `periodic`, the grid wraps
    /// with period `values.len() * h`.
    pub fn new(x0: f64, h: f64, values: Vec<f64>, periodic: bool) -> Self {
        let slopes = slopes(&values, h, periodic);
        let period = periodic.then_some(values.len() as f64 * h);
        Self {
            x0,
            h,
            values,
            slopes,
            period,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.values.len();
        let mut s = (x - self.x0) / self.h;
        if let Some(p) = self.period {
            s = ((x - self.x0).rem_euclid(p)) / self.h;
            let i = (s.floor() as usize).min(n - 1);
            return (i, (i + 1) % n, s - i as f64);
        }
        if n == 1 {
            return (0, 0, 0.0);
        }
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        (i, i + 1, s - i as f64)
    }

    /// Value, first and second derivative at `x`. Outside the sample range
    /// of a non-periodic grid the end cubic is extended.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        if self.values.len() == 1 {
            return (self.values[0], 0.0, 0.0);
        }
        let (i, j, t) = self.locate(x);
        let h = self.h;
        let (p0, p1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[j] * h);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
        let d = (6.0 * t2 - 6.0 * t) * p0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * p1
            + (3.0 * t2 - 2.0 * t) * m1;
        let dd = (12.0 * t - 6.0) * p0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * p1 + (6.0 * t - 2.0) * m1;
        (v, d / h, dd / (h * h))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval3(x).0
    }
}

fn slopes(v: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = v.len();
    if n < 2 {
        return vec![0.0; n];
    }
    if periodic {
        return (0..n)
            .map(|i| (v[(i + 1) % n] - v[(i + n - 1) % n]) / (2.0 * h))
            .collect();
    }
    if n == 2 {
        let s = (v[1] - v[0]) / h;
        return vec![s, s];
    }
    let mut s = vec![0.0; n];
    for i in 1..n - 1 {
        s[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    s[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    s[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quadratics_everywhere() {
        let f = |x: f64| 0.7 * x * x - 1.3 * x + 0.2;
        let h = 0.25;
        let vals: Vec<f64> = (0..9).map(|i| f(-1.0 + i as f64 * h)).collect();
        let c = Cubic::new(-1.0, h, vals, false);
        for k in 0..=100 {
            let x = -1.2 + 2.4 * k as f64 / 100.0;
            let (v, d, dd) = c.eval3(x);
            assert!((v - f(x)).abs() < 1e-12, "{x}");
            assert!((d - (1.4 * x - 1.3)).abs() < 1e-11);
            assert!((dd - 1.4).abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_wraps() {
        let n = 64;
        let h = std::f64::consts::TAU / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let c = Cubic::new(0.0, h, vals, true);
        for &x in &[-0.3, 6.2, 7.0, 100.0] {
            assert!((c.eval(x) - x.cos()).abs() < 1e-4);
        }
    }
}
