//! Radially symmetric scalar functions on flat space: the radial Laplacian
//! `Δ = d²/dr² + ((n−1)/r) d/dr`, the fourth-order residual `δ2 Δ²f − δ1 Δf`,
//! the second-order ODE `Δf − (δ1/δ2) f = r^{2−n}` it reduces to, and the
//! classical fundamental solutions of `Δ` and `Δ²`.
//!
//! `r = 0` is never sampled; profiles live on `[r_min, r_max]` with
//! `r_min > 0`.

use crate::bessel::{bessel_j0, bessel_j1, bessel_y0, bessel_y1};
use crate::error::{Error, Result};
use crate::fd::derive_scalar;
use crate::geometry::Coupling;

/// Stencil accuracy of the radial operators.
const ACCURACY: usize = 4;
/// Nodes dropped per side by [`radial_residual`]: wide enough that the kept
/// nodes never touch the non-smooth one-sided boundary errors of the first
/// Laplacian pass.
pub const RADIAL_TRIM: usize = 8;

/// Scalar samples `f(r)` on a uniform grid over `[r_min, r_max]`, tagged with
/// the space dimension `n` the radial operators should use.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub r_min: f64,
    pub r_max: f64,
    pub values: Vec<f64>,
    pub dim: usize,
}

impl RadialProfile {
    pub fn new(r_min: f64, r_max: f64, values: Vec<f64>, dim: usize) -> Result<Self> {
        if r_min <= 0.0 {
            return Err(Error::Domain(format!(
                "radial profiles need r_min > 0, got {r_min}"
            )));
        }
        if r_max <= r_min {
            return Err(Error::Domain("need r_max > r_min".into()));
        }
        if dim < 2 {
            return Err(Error::ParameterConstraint(format!(
                "space dimension must be >= 2, got {dim}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::GridTooSmall {
                need: 2,
                got: values.len(),
            });
        }
        Ok(RadialProfile {
            r_min,
            r_max,
            values,
            dim,
        })
    }

    pub fn from_fn(
        r_min: f64,
        r_max: f64,
        n_nodes: usize,
        dim: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let h = (r_max - r_min) / (n_nodes - 1) as f64;
        let values = (0..n_nodes).map(|i| f(r_min + i as f64 * h)).collect();
        RadialProfile::new(r_min, r_max, values, dim)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.len() - 1) as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.h()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sup norm away from `trim` nodes per side.
    pub fn sup_inner(&self, trim: usize) -> f64 {
        let n = self.len();
        if n <= 2 * trim {
            return self.sup();
        }
        self.values[trim..n - trim]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sup norm over the fixed physical window `[r_lo, r_hi]`. Refinement
    /// studies need this rather than [`sup_inner`]: a node-count trim creeps
    /// toward the domain ends as the grid refines, so near-singular boundary
    /// behavior would dominate the sup at every resolution.
    pub fn sup_on(&self, r_lo: f64, r_hi: f64) -> f64 {
        (0..self.len())
            .filter(|&i| self.r(i) >= r_lo && self.r(i) <= r_hi)
            .map(|i| self.values[i].abs())
            .fold(0.0, f64::max)
    }
}

/// `Δf = f'' + ((n−1)/r) f'` on the full grid.
pub fn radial_laplacian(p: &RadialProfile) -> Result<RadialProfile> {
    if p.len() < 9 {
        return Err(Error::GridTooSmall {
            need: 9,
            got: p.len(),
        });
    }
    let h = p.h();
    let d1 = derive_scalar(&p.values, h, false, 1, ACCURACY)?;
    let d2 = derive_scalar(&p.values, h, false, 2, ACCURACY)?;
    let nm1 = (p.dim - 1) as f64;
    let values = (0..p.len())
        .map(|i| d2[i] + nm1 / p.r(i) * d1[i])
        .collect();
    RadialProfile::new(p.r_min, p.r_max, values, p.dim)
}

/// `δ2 Δ(Δf) − δ1 Δf` on the trimmed interior (the second Laplacian pass acts
/// on a derived field, so [`RADIAL_TRIM`] nodes per side are dropped).
pub fn radial_residual(p: &RadialProfile, c: &Coupling) -> Result<RadialProfile> {
    if p.len() < 3 * RADIAL_TRIM {
        return Err(Error::GridTooSmall {
            need: 3 * RADIAL_TRIM,
            got: p.len(),
        });
    }
    let l1 = radial_laplacian(p)?;
    let l2 = radial_laplacian(&l1)?;
    let n = p.len();
    let values = (RADIAL_TRIM..n - RADIAL_TRIM)
        .map(|i| c.delta2 * l2.values[i] - c.delta1 * l1.values[i])
        .collect();
    RadialProfile::new(
        p.r(RADIAL_TRIM),
        p.r(n - 1 - RADIAL_TRIM),
        values,
        p.dim,
    )
}

/// Dormand-Prince 5(4) step for `y' = f(r, y)`, `y ∈ R²`.
/// Returns (5th-order solution, embedded error estimate).
fn dopri_step(
    f: &impl Fn(f64, [f64; 2]) -> [f64; 2],
    r: f64,
    y: [f64; 2],
    h: f64,
) -> ([f64; 2], f64) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    // difference of the 5th- and embedded 4th-order weights
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k = [[0.0f64; 2]; 7];
    k[0] = f(r, y);
    for s in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        k[s + 1] = f(r + C[s] * h, ys);
    }
    // k[6] is f at the 5th-order solution (FSAL stage); A[5] are its weights
    let mut y5 = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        y5[0] += h * A[5][j] * kj[0];
        y5[1] += h * A[5][j] * kj[1];
    }
    let mut err = [0.0f64; 2];
    for (j, kj) in k.iter().enumerate() {
        err[0] += h * E[j] * kj[0];
        err[1] += h * E[j] * kj[1];
    }
    (y5, err[0].hypot(err[1]))
}

/// Adaptive integration of the paper-reduced radial ODE
/// `f'' + ((n−1)/r) f' − (δ1/δ2) f = r^{2−n}`
/// from `r_min` with data `(f0, f0')`, sampled on `n_nodes` uniform nodes.
pub fn solve_radial_ode(
    dim: usize,
    c: &Coupling,
    r_min: f64,
    r_max: f64,
    n_nodes: usize,
    f0: f64,
    df0: f64,
) -> Result<RadialProfile> {
    c.require_delta2()?;
    if r_min <= 0.0 {
        return Err(Error::Domain(format!("need r_min > 0, got {r_min}")));
    }
    let q = c.ratio()?;
    if q > 0.0 && q.sqrt() * r_max > 700.0 {
        return Err(Error::Range(format!(
            "e^(sqrt(delta1/delta2) r) overflows for r beyond about {:.1}; \
             shrink r_max or the coupling ratio",
            700.0 / q.sqrt()
        )));
    }
    if n_nodes < 2 {
        return Err(Error::GridTooSmall {
            need: 2,
            got: n_nodes,
        });
    }
    let nm1 = (dim - 1) as f64;
    let pow = 2.0 - dim as f64;
    let rhs = move |r: f64, y: [f64; 2]| -> [f64; 2] {
        [y[1], r.powf(pow) - nm1 / r * y[1] + q * y[0]]
    };
    // tighter than the 1e-10 contract: the fourth-order residual operator
    // amplifies node-to-node integration noise by 1/h^4, so the margin keeps
    // refinement oracles on ODE output truncation-dominated
    const TOL: f64 = 1e-12;
    let node_h = (r_max - r_min) / (n_nodes - 1) as f64;
    let mut values = Vec::with_capacity(n_nodes);
    values.push(f0);
    let mut y = [f0, df0];
    let mut r = r_min;
    let mut h = node_h.min(0.01);
    for i in 1..n_nodes {
        let target = r_min + i as f64 * node_h;
        while r < target {
            let step = h.min(target - r);
            let (y5, err) = dopri_step(&rhs, r, y, step);
            let scale = TOL * (1.0 + y[0].abs().max(y[1].abs()));
            if err <= scale || step < 1e-13 * target {
                r += step;
                y = y5;
                if !y[0].is_finite() || y[0].abs() > 1e300 {
                    return Err(Error::Range(format!(
                        "solution overflowed near r = {r:.3}"
                    )));
                }
            }
            // PI-free step controller with the usual safety factor
            let factor = if err > 0.0 {
                0.9 * (scale / err).powf(0.2)
            } else {
                5.0
            };
            h = (step * factor.clamp(0.2, 5.0)).min(node_h.max(0.05));
        }
        values.push(y[0]);
    }
    RadialProfile::new(r_min, r_max, values, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialOperator {
    Laplace,
    Bilaplace,
}

/// Unnormalized fundamental solution of the operator in dimension `n`,
/// as a callable.
pub fn fundamental_solution(
    op: RadialOperator,
    dim: usize,
) -> Result<impl Fn(f64) -> f64 + Clone> {
    // exponent `p` of r^p, or the log marker
    #[derive(Clone, Copy)]
    enum Shape {
        Power(f64),
        Log,
    }
    let shape = match (op, dim) {
        (RadialOperator::Laplace, 2) => Shape::Log,
        (RadialOperator::Laplace, n) if n >= 3 => Shape::Power(2.0 - n as f64),
        (RadialOperator::Bilaplace, 3) => Shape::Power(1.0),
        (RadialOperator::Bilaplace, 4) => Shape::Log,
        (RadialOperator::Bilaplace, n) if n >= 5 => Shape::Power(4.0 - n as f64),
        _ => {
            return Err(Error::Unsupported(format!(
                "no tabulated fundamental solution for {op:?} in dimension {dim}"
            )))
        }
    };
    Ok(move |r: f64| match shape {
        Shape::Power(p) => r.powf(p),
        Shape::Log => r.ln(),
    })
}

/// The paper's `n = 3` closed form
/// `f(r) = c1 e^{−λr}/r + c2 e^{λr}/(λ r) − (δ2/δ1)/r`, `λ = √(δ1/δ2)`.
pub fn radial_closed_form_3d(c: &Coupling, c1: f64, c2: f64) -> Result<impl Fn(f64) -> f64> {
    if c.delta1 * c.delta2 <= 0.0 {
        return Err(Error::FamilyInapplicable(
            "the exponential closed form needs delta1/delta2 > 0".into(),
        ));
    }
    let lam = (c.delta1 / c.delta2).sqrt();
    let amp = c.delta2 / c.delta1;
    Ok(move |r: f64| c1 * (-lam * r).exp() / r + c2 * (lam * r).exp() / (lam * r) - amp / r)
}

/// The `n = 4` closed form on the oscillatory branch `δ1/δ2 = −μ² < 0`:
/// `f(r) = c1 J1(μr)/r + c2 Y1(μr)/r + 1/(μ² r²)`.
///
/// The particular solution is the paper's Bessel cross-combination
/// `(π/(2μr))(J1 Y0 − J0 Y1)(μr)`, which the Wronskian identity collapses to
/// `1/(μ² r²)` exactly.
pub fn radial_closed_form_4d(c: &Coupling, c1: f64, c2: f64) -> Result<impl Fn(f64) -> f64> {
    let q = c.ratio()?;
    if q >= 0.0 {
        return Err(Error::FamilyInapplicable(
            "the Bessel closed form needs delta1/delta2 < 0".into(),
        ));
    }
    let mu = (-q).sqrt();
    Ok(move |r: f64| {
        let x = mu * r;
        c1 * bessel_j1(x) / r + c2 * bessel_y1(x) / r + 1.0 / (mu * mu * r * r)
    })
}

/// `d/dr` of [`radial_closed_form_4d`] (for seeding the ODE integrator).
pub fn radial_closed_form_4d_deriv(c: &Coupling, c1: f64, c2: f64) -> Result<impl Fn(f64) -> f64> {
    let q = c.ratio()?;
    if q >= 0.0 {
        return Err(Error::FamilyInapplicable(
            "the Bessel closed form needs delta1/delta2 < 0".into(),
        ));
    }
    let mu = (-q).sqrt();
    // (Z1(μr)/r)' = μ Z1'(μr)/r − Z1(μr)/r², with Z1'(x) = Z0(x) − Z1(x)/x
    Ok(move |r: f64| {
        let x = mu * r;
        let j1p = bessel_j0(x) - bessel_j1(x) / x;
        let y1p = bessel_y0(x) - bessel_y1(x) / x;
        c1 * (mu * j1p / r - bessel_j1(x) / (r * r))
            + c2 * (mu * y1p / r - bessel_y1(x) / (r * r))
            - 2.0 / (mu * mu * r * r * r)
    })
}
