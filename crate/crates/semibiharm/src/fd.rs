//! Finite-difference engine behind all residual evaluations.
//!
//! Stencil weights come from Fornberg's recurrence, which yields the exact
//! rational coefficients for any node arrangement, so interior central
//! stencils and one-sided boundary stencils share one code path.

use crate::error::{Error, Result};

/// Finite-difference weights for derivative order `m` at evaluation point `z`
/// given node locations `x` (Fornberg 1988).
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[k][j]: weight of node j for the k-th derivative
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.pop().unwrap()
}

/// Half-width of the central interior stencil for (`order`, `accuracy`).
pub fn central_half_width(order: usize, accuracy: usize) -> usize {
    order.div_ceil(2) + accuracy / 2 - 1
}

/// Node count of the one-sided boundary window (keeps the requested accuracy).
pub fn boundary_width(order: usize, accuracy: usize) -> usize {
    order + accuracy
}

fn validate(order: usize, accuracy: usize) -> Result<()> {
    if !(1..=4).contains(&order) {
        return Err(Error::BadOrder(order));
    }
    if accuracy != 2 && accuracy != 4 {
        return Err(Error::BadAccuracy(accuracy));
    }
    Ok(())
}

/// Precomputed stencil set for a uniform grid.
#[derive(Debug, Clone)]
pub struct Stencil {
    order: usize,
    /// central weights, offsets -half..=half, already divided by h^order
    central: Vec<f64>,
    half: usize,
    /// per-boundary-node (window_start, weights) for non-periodic grids
    bwidth: usize,
}

impl Stencil {
    pub fn new(order: usize, accuracy: usize, h: f64) -> Result<Self> {
        validate(order, accuracy)?;
        let half = central_half_width(order, accuracy);
        let offsets: Vec<f64> = (-(half as isize)..=half as isize)
            .map(|k| k as f64 * h)
            .collect();
        let central = fd_weights(0.0, &offsets, order);
        Ok(Stencil {
            order,
            central,
            half,
            bwidth: boundary_width(order, accuracy),
        })
    }

    pub fn min_nodes_periodic(&self) -> usize {
        2 * self.half + 1
    }

    pub fn min_nodes_interval(&self) -> usize {
        self.bwidth.max(2 * self.half + 1)
    }

    /// Differentiate a scalar sample set on a periodic uniform grid.
    pub fn apply_periodic(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = f.len();
        if n < self.min_nodes_periodic() {
            return Err(Error::GridTooSmall {
                need: self.min_nodes_periodic(),
                got: n,
            });
        }
        let half = self.half as isize;
        let mut out = vec![0.0; n];
        // wrap-around indexing: enumerate-style iteration hides the modular
        // center index
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            let mut acc = 0.0;
            for (j, w) in self.central.iter().enumerate() {
                let k = i as isize + j as isize - half;
                let idx = k.rem_euclid(n as isize) as usize;
                acc += w * f[idx];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Differentiate on an interval grid with spacing `h`; boundary nodes use
    /// shifted one-sided windows of matching accuracy.
    pub fn apply_interval(&self, f: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = f.len();
        if n < self.min_nodes_interval() {
            return Err(Error::GridTooSmall {
                need: self.min_nodes_interval(),
                got: n,
            });
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            if i >= self.half && i + self.half < n {
                let mut acc = 0.0;
                for (j, w) in self.central.iter().enumerate() {
                    acc += w * f[i + j - self.half];
                }
                out[i] = acc;
            } else {
                let w = self.bwidth;
                let start = if i < self.half { 0 } else { n - w };
                let xs: Vec<f64> = (0..w).map(|k| (start + k) as f64 * h).collect();
                let weights = fd_weights(i as f64 * h, &xs, self.order);
                let mut acc = 0.0;
                for (k, wt) in weights.iter().enumerate() {
                    acc += wt * f[start + k];
                }
                out[i] = acc;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, f: &[f64], h: f64, periodic: bool) -> Result<Vec<f64>> {
        if periodic {
            self.apply_periodic(f)
        } else {
            self.apply_interval(f, h)
        }
    }
}

/// One-shot derivative of a scalar field on a uniform grid.
pub fn derive_scalar(
    f: &[f64],
    h: f64,
    periodic: bool,
    order: usize,
    accuracy: usize,
) -> Result<Vec<f64>> {
    Stencil::new(order, accuracy, h)?.apply(f, h, periodic)
}
