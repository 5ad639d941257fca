//! Cubic spline interpolation on uniform grids (natural and periodic ends),
//! used by arclength reparametrization.

/// Cubic spline through `y` at nodes `x_i = x0 + i*h`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// second derivatives at the nodes
    m: Vec<f64>,
    periodic: bool,
    /// period in x for periodic splines
    period: f64,
}

impl CubicSpline {
    /// Natural spline (zero second derivative at the ends).
    pub fn natural(x0: f64, h: f64, y: &[f64]) -> Self {
        let n = y.len();
        assert!(n >= 3);
        // tridiagonal system for interior second derivatives
        let mut d = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        }
        // Thomas algorithm on interior (diag 4, off-diag 1)
        let mut c = vec![0.0; n];
        let mut dp = vec![0.0; n];
        for i in 1..n - 1 {
            let denom = 4.0 - if i > 1 { c[i - 1] } else { 0.0 };
            c[i] = 1.0 / denom;
            dp[i] = (rhs[i] - if i > 1 { dp[i - 1] } else { 0.0 }) / denom;
        }
        for i in (1..n - 1).rev() {
            d[i] = dp[i] - c[i] * d[i + 1];
        }
        CubicSpline {
            x0,
            h,
            y: y.to_vec(),
            m: d,
            periodic: false,
            period: 0.0,
        }
    }

    /// Periodic spline; `y` holds one period (node n would repeat node 0).
    pub fn periodic(x0: f64, h: f64, y: &[f64]) -> Self {
        let n = y.len();
        assert!(n >= 3);
        // cyclic tridiagonal system: 1*m_{i-1} + 4*m_i + 1*m_{i+1} = rhs_i
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let ym = y[(i + n - 1) % n];
                let yp = y[(i + 1) % n];
                6.0 * (yp - 2.0 * y[i] + ym) / (h * h)
            })
            .collect();
        let m = solve_cyclic_tridiag(1.0, 4.0, 1.0, &rhs);
        CubicSpline {
            x0,
            h,
            y: y.to_vec(),
            m,
            periodic: true,
            period: h * n as f64,
        }
    }

    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.y.len();
        if self.periodic {
            let mut t = (x - self.x0).rem_euclid(self.period) / self.h;
            let mut i = t.floor() as usize;
            if i >= n {
                i = n - 1;
            }
            t -= i as f64;
            (i, (i + 1) % n, t)
        } else {
            let mut t = (x - self.x0) / self.h;
            let mut i = t.floor() as isize;
            i = i.clamp(0, n as isize - 2);
            t -= i as f64;
            (i as usize, i as usize + 1, t)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, j, t) = self.locate(x);
        let h2 = self.h * self.h;
        let a = 1.0 - t;
        a * self.y[i]
            + t * self.y[j]
            + h2 / 6.0 * ((a * a * a - a) * self.m[i] + (t * t * t - t) * self.m[j])
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let (i, j, t) = self.locate(x);
        let a = 1.0 - t;
        (self.y[j] - self.y[i]) / self.h
            + self.h / 6.0 * ((3.0 * t * t - 1.0) * self.m[j] - (3.0 * a * a - 1.0) * self.m[i])
    }
}

/// Solve a cyclic tridiagonal system with constant bands via the
/// Sherman-Morrison correction of the open Thomas solve.
fn solve_cyclic_tridiag(lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let gamma = -diag;
    // modified diagonal
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - lower * upper / gamma;
    let solve = |b: &[f64], r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = upper / b[0];
        d[0] = r[0] / b[0];
        for i in 1..n {
            let denom = b[i] - lower * c[i - 1];
            c[i] = upper / denom;
            d[i] = (r[i] - lower * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    };
    let x = solve(&b, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = lower;
    let z = solve(&b, &u);
    let fact = (x[0] + upper * x[n - 1] / gamma) / (1.0 + z[0] + upper * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn natural_spline_reproduces_smooth_function() {
        let n = 65;
        let h = 1.0 / (n - 1) as f64;
        let y: Vec<f64> = (0..n).map(|i| (2.0 * (i as f64) * h).exp()).collect();
        let sp = CubicSpline::natural(0.0, h, &y);
        // interior accuracy O(h^4); natural ends degrade near the boundary
        for k in 0..100 {
            let x = 0.2 + 0.006 * k as f64;
            assert!((sp.eval(x) - (2.0 * x).exp()).abs() < 1e-6, "x={x}");
            assert!((sp.eval_deriv(x) - 2.0 * (2.0 * x).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn periodic_spline_reproduces_sine() {
        let n = 64;
        let h = 2.0 * PI / n as f64;
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let sp = CubicSpline::periodic(0.0, h, &y);
        for k in 0..200 {
            let x = 0.031 * k as f64;
            assert!((sp.eval(x) - x.sin()).abs() < 5e-7, "x={x}");
            assert!((sp.eval_deriv(x) - x.cos()).abs() < 2e-5, "x={x}");
        }
        // wrap-around
        assert!((sp.eval(-0.3) - (-0.3f64).sin()).abs() < 5e-7);
        assert!((sp.eval(7.0) - (7.0f64).sin()).abs() < 5e-7);
    }
}
