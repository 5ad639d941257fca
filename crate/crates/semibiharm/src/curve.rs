//! Discrete differential operators on sampled curves: the semi-biharmonic
//! residual, the Frenet apparatus, and the pointwise identities solutions
//! must satisfy (conservation law, Bochner formula).
//!
//! All covariant derivatives along sphere curves use the extrinsic formula
//! `∇_{γ'} X = X' + ⟨γ', X⟩ γ`, iterated one order at a time so every
//! intermediate field stays tangent. Ambient derivatives are accuracy-4
//! stencils applied per coordinate; first derivatives are iterated (rather
//! than using wide single stencils) so the flat-target pipeline matches the
//! exact adjoint structure of the discrete energy on periodic grids.

use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::geometry::{
    curvature_op, sphere_project_point, AmbientVector, Coupling, ModelSpace, SPHERE_NORM_TOL,
    TANGENCY_TOL,
};
use crate::spline::CubicSpline;

/// Stencil accuracy used by all curve residuals.
pub const ACCURACY: usize = 4;
/// Nodes dropped from each end of interval grids when taking residual norms.
pub const INTERVAL_TRIM: usize = 4;
/// Geodesic classification threshold on `k_g`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Uniformly sampled curve from a 1-D domain into ambient coordinates.
#[derive(Debug, Clone)]
pub struct CurveGrid {
    pub points: Vec<AmbientVector>,
    pub ds: f64,
    pub periodic: bool,
    pub space: ModelSpace,
}

/// Scalar samples aligned with a curve grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub ds: f64,
    pub periodic: bool,
}

pub type VectorField = Vec<AmbientVector>;

impl ScalarField {
    pub fn derive(&self, order: usize, accuracy: usize) -> Result<ScalarField> {
        let st = Stencil::new(order, accuracy, self.ds)?;
        Ok(ScalarField {
            values: st.apply(&self.values, self.ds, self.periodic)?,
            ds: self.ds,
            periodic: self.periodic,
        })
    }

    /// Sup norm over the trimmed window (interval grids drop boundary nodes).
    pub fn sup_trimmed(&self) -> f64 {
        sup_scalar(&self.values, self.periodic)
    }
}

fn trim_range(n: usize, periodic: bool) -> std::ops::Range<usize> {
    if periodic || n <= 2 * INTERVAL_TRIM {
        0..n
    } else {
        INTERVAL_TRIM..n - INTERVAL_TRIM
    }
}

pub fn sup_scalar(values: &[f64], periodic: bool) -> f64 {
    trim_range(values.len(), periodic)
        .map(|i| values[i].abs())
        .fold(0.0, f64::max)
}

pub fn sup_vector(field: &[AmbientVector], periodic: bool) -> f64 {
    trim_range(field.len(), periodic)
        .map(|i| field[i].norm())
        .fold(0.0, f64::max)
}

impl CurveGrid {
    pub fn new(
        points: Vec<AmbientVector>,
        ds: f64,
        periodic: bool,
        space: ModelSpace,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::GridTooSmall { need: 1, got: 0 });
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::Domain("non-finite curve point".into()));
            }
        }
        if space.is_sphere() {
            for p in &points {
                let n = p.norm();
                if (n - 1.0).abs() > SPHERE_NORM_TOL {
                    return Err(Error::NotOnSphere { norm: n });
                }
            }
        }
        if let Some(ad) = space.ambient_dim() {
            if ad != dim {
                return Err(Error::DimensionMismatch {
                    expected: ad,
                    got: dim,
                });
            }
        }
        Ok(CurveGrid {
            points,
            ds,
            periodic,
            space,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Domain sample coordinates `s_i = i * ds`.
    pub fn params(&self) -> Vec<f64> {
        (0..self.len()).map(|i| i as f64 * self.ds).collect()
    }

    pub fn scalar_field(&self, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(ScalarField {
            values,
            ds: self.ds,
            periodic: self.periodic,
        })
    }

    /// Componentwise ambient derivative of a vector field along the grid.
    pub fn derive_field(
        &self,
        field: &[AmbientVector],
        order: usize,
        accuracy: usize,
    ) -> Result<VectorField> {
        let dim = field[0].dim();
        let st = Stencil::new(order, accuracy, self.ds)?;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for c in 0..dim {
            let col: Vec<f64> = field.iter().map(|p| p.0[c]).collect();
            cols.push(st.apply(&col, self.ds, self.periodic)?);
        }
        Ok((0..field.len())
            .map(|i| AmbientVector(cols.iter().map(|col| col[i]).collect()))
            .collect())
    }

    /// First derivative `γ'` of the curve itself.
    pub fn velocity(&self) -> Result<VectorField> {
        self.derive_field(&self.points, 1, ACCURACY)
    }

    pub fn speeds(&self) -> Result<Vec<f64>> {
        Ok(self.velocity()?.iter().map(|v| v.norm()).collect())
    }
}

/// `∇_{γ'} X` along the curve; for sphere targets uses the extrinsic
/// Levi-Civita formula, for flat targets the plain derivative.
/// Returns the derivative field and the number of nodes whose input had to be
/// re-projected onto the tangent space (drift beyond the tangency tolerance).
pub fn covariant_derivative_counted(
    grid: &CurveGrid,
    field: &[AmbientVector],
) -> Result<(VectorField, usize)> {
    if grid.len() < 5 {
        return Err(Error::GridTooSmall {
            need: 5,
            got: grid.len(),
        });
    }
    if field.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: field.len(),
        });
    }
    match grid.space {
        ModelSpace::Flat { .. } => Ok((grid.derive_field(field, 1, ACCURACY)?, 0)),
        ModelSpace::Sphere { .. } => {
            let vel = grid.velocity()?;
            for (i, v) in vel.iter().enumerate() {
                if v.norm() < 1e-10 {
                    return Err(Error::DegenerateCurve { node: i });
                }
            }
            // re-project drifting inputs instead of failing: long flows
            // accumulate tangency error
            let mut reprojected = 0usize;
            let tangent: Vec<AmbientVector> = field
                .iter()
                .zip(&grid.points)
                .map(|(x, p)| {
                    let off = x.dot(p);
                    if off.abs() > TANGENCY_TOL * (1.0 + x.norm()) {
                        reprojected += 1;
                        x.axpy(-off, p)
                    } else {
                        x.clone()
                    }
                })
                .collect();
            let deriv = grid.derive_field(&tangent, 1, ACCURACY)?;
            let out = deriv
                .iter()
                .zip(&vel)
                .zip(&tangent)
                .zip(&grid.points)
                .map(|(((xp, v), x), p)| xp.axpy(v.dot(x), p))
                .collect();
            Ok((out, reprojected))
        }
        ModelSpace::AbstractConstantCurvature { .. } => Err(Error::Unsupported(
            "covariant derivatives of sampled curves need an embedded target".into(),
        )),
    }
}

/// `∇_{γ'} X` (see [`covariant_derivative_counted`]).
pub fn sphere_covariant_derivative(
    grid: &CurveGrid,
    field: &[AmbientVector],
) -> Result<VectorField> {
    covariant_derivative_counted(grid, field).map(|(f, _)| f)
}

/// Tension field `τ(γ) = ∇_{γ'} γ'`: `γ''` for flat targets,
/// `γ'' + |γ'|² γ` on spheres.
///
/// Periodic grids iterate the first-derivative stencil (this keeps the
/// discrete operator skew-adjoint, which the variational layer relies on);
/// interval grids use a direct second-derivative stencil, because iterating
/// across the one-sided boundary windows degrades the convergence order of
/// everything computed downstream.
pub fn tension(grid: &CurveGrid) -> Result<VectorField> {
    let vel = grid.velocity()?;
    let acc = if grid.periodic {
        grid.derive_field(&vel, 1, ACCURACY)?
    } else {
        grid.derive_field(&grid.points, 2, ACCURACY)?
    };
    match grid.space {
        ModelSpace::Flat { .. } => Ok(acc),
        ModelSpace::Sphere { .. } => Ok(acc
            .iter()
            .zip(&vel)
            .zip(&grid.points)
            .map(|((a, v), p)| a.axpy(v.dot(v), p))
            .collect()),
        ModelSpace::AbstractConstantCurvature { .. } => Err(Error::Unsupported(
            "tension of sampled curves needs an embedded target".into(),
        )),
    }
}

/// `(γ', τ, ∇_{γ'}τ)` in one call; interval grids expand `∇τ` by the product
/// rule into direct ambient derivatives (see [`tension`] for the periodic /
/// interval split).
pub fn tension_with_derivative(
    grid: &CurveGrid,
) -> Result<(VectorField, VectorField, VectorField)> {
    if grid.periodic {
        let vel = grid.velocity()?;
        let tau = tension(grid)?;
        let dtau = sphere_covariant_derivative(grid, &tau)?;
        return Ok((vel, tau, dtau));
    }
    let d1 = grid.derive_field(&grid.points, 1, ACCURACY)?;
    let d2 = grid.derive_field(&grid.points, 2, ACCURACY)?;
    let d3 = grid.derive_field(&grid.points, 3, ACCURACY)?;
    match grid.space {
        ModelSpace::Flat { .. } => Ok((d1, d2, d3)),
        ModelSpace::Sphere { .. } => {
            let n = grid.len();
            let mut tau = Vec::with_capacity(n);
            let mut dtau = Vec::with_capacity(n);
            for i in 0..n {
                let g = &grid.points[i];
                let v2 = d1[i].dot(&d1[i]);
                let t = d2[i].axpy(v2, g);
                let t_p = d3[i].axpy(2.0 * d1[i].dot(&d2[i]), g).axpy(v2, &d1[i]);
                dtau.push(t_p.axpy(d1[i].dot(&t), g));
                tau.push(t);
            }
            Ok((d1, tau, dtau))
        }
        ModelSpace::AbstractConstantCurvature { .. } => Err(Error::Unsupported(
            "covariant derivatives of sampled curves need an embedded target".into(),
        )),
    }
}

/// Pointwise Euler-Lagrange defect
/// `δ2 ∇³_{γ'} γ' − δ2 R(γ', ∇_{γ'}γ') γ' − δ1 ∇_{γ'}γ'`;
/// the zero field characterizes semi-biharmonic curves.
pub fn semibiharmonic_residual(grid: &CurveGrid, c: &Coupling) -> Result<VectorField> {
    let (vel, t1, t3) = if grid.periodic {
        let t1 = tension(grid)?;
        let t2 = sphere_covariant_derivative(grid, &t1)?;
        let t3 = sphere_covariant_derivative(grid, &t2)?;
        (grid.velocity()?, t1, t3)
    } else {
        interval_tension_chain(grid)?
    };
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let r = curvature_op(&grid.space, &vel[i], &t1[i], &vel[i])?;
        let v = t3[i]
            .scale(c.delta2)
            .axpy(-c.delta2, &r)
            .axpy(-c.delta1, &t1[i]);
        out.push(v);
    }
    Ok(out)
}

/// `(γ', τ, ∇²_{γ'}τ)` on an interval grid.
///
/// One-sided boundary stencils have truncation errors that jump between the
/// boundary window and the interior stencil, so differentiating an already
/// differentiated field loses one convergence order per pass near the ends.
/// Instead everything is expanded by the product rule into direct ambient
/// derivatives `γ', γ'', γ''', γ''''` of the original samples, which keeps
/// clean fourth-order accuracy at every node.
fn interval_tension_chain(grid: &CurveGrid) -> Result<(VectorField, VectorField, VectorField)> {
    if grid.len() < 8 {
        return Err(Error::GridTooSmall {
            need: 8,
            got: grid.len(),
        });
    }
    let d1 = grid.derive_field(&grid.points, 1, ACCURACY)?;
    let d2 = grid.derive_field(&grid.points, 2, ACCURACY)?;
    match grid.space {
        ModelSpace::Flat { .. } => {
            let d4 = grid.derive_field(&grid.points, 4, ACCURACY)?;
            Ok((d1, d2, d4))
        }
        ModelSpace::Sphere { .. } => {
            let d3 = grid.derive_field(&grid.points, 3, ACCURACY)?;
            let d4 = grid.derive_field(&grid.points, 4, ACCURACY)?;
            for (i, v) in d1.iter().enumerate() {
                if v.norm() < 1e-10 {
                    return Err(Error::DegenerateCurve { node: i });
                }
            }
            let n = grid.len();
            let mut t1 = Vec::with_capacity(n);
            let mut t3 = Vec::with_capacity(n);
            for i in 0..n {
                let g = &grid.points[i];
                let v2 = d1[i].dot(&d1[i]);
                let a12 = d1[i].dot(&d2[i]);
                // τ = γ'' + |γ'|² γ and its ambient s-derivatives
                let tau = d2[i].axpy(v2, g);
                let tau_p = d3[i].axpy(2.0 * a12, g).axpy(v2, &d1[i]);
                let tau_pp = d4[i]
                    .axpy(2.0 * (d2[i].dot(&d2[i]) + d1[i].dot(&d3[i])), g)
                    .axpy(4.0 * a12, &d1[i])
                    .axpy(v2, &d2[i]);
                // ∇τ = τ' + ⟨γ', τ⟩ γ
                let b = d1[i].dot(&tau);
                let t2 = tau_p.axpy(b, g);
                // ∇²τ = (∇τ)' + ⟨γ', ∇τ⟩ γ
                let bp = d2[i].dot(&tau) + d1[i].dot(&tau_p);
                let t2_p = tau_pp.axpy(bp, g).axpy(b, &d1[i]);
                let t3i = t2_p.axpy(d1[i].dot(&t2), g);
                t1.push(tau);
                t3.push(t3i);
            }
            Ok((d1, t1, t3))
        }
        ModelSpace::AbstractConstantCurvature { .. } => Err(Error::Unsupported(
            "residuals of sampled curves need an embedded target".into(),
        )),
    }
}

/// Interpolating energy `δ1 ∫|γ'|² + δ2 ∫|τ(γ)|²` by rectangle rule
/// (periodic) or trapezoid rule (interval).
pub fn energy(grid: &CurveGrid, c: &Coupling) -> Result<f64> {
    let vel = grid.velocity()?;
    let tau = tension(grid)?;
    let density: Vec<f64> = vel
        .iter()
        .zip(&tau)
        .map(|(v, t)| c.delta1 * v.dot(v) + c.delta2 * t.dot(t))
        .collect();
    Ok(quadrature(&density, grid.ds, grid.periodic))
}

/// Sequential-sum quadrature convention shared by every integral in the crate.
pub fn quadrature(density: &[f64], ds: f64, periodic: bool) -> f64 {
    if periodic {
        density.iter().sum::<f64>() * ds
    } else {
        let n = density.len();
        let mut acc = 0.5 * (density[0] + density[n - 1]);
        for v in &density[1..n - 1] {
            acc += v;
        }
        acc * ds
    }
}

/// Frenet data of a curve in a 3-dimensional target.
#[derive(Debug, Clone)]
pub struct FrenetApparatus {
    pub k_g: ScalarField,
    pub tau_g: ScalarField,
    /// per-node (T, N, B); `None` where the node is geodesic-degenerate
    pub frames: Vec<Option<(AmbientVector, AmbientVector, AmbientVector)>>,
    pub degenerate: Vec<bool>,
}

impl FrenetApparatus {
    pub fn all_degenerate(&self) -> bool {
        self.degenerate.iter().all(|d| *d)
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|d| *d)
    }
}

/// Generalized cross product in R^4: returns `x` with `det[a, b, c, x] > 0`
/// and `|x| = 1` for orthonormal inputs.
fn cross4(a: &AmbientVector, b: &AmbientVector, c: &AmbientVector) -> AmbientVector {
    let det3 = |c0: usize, c1: usize, c2: usize| -> f64 {
        a.0[c0] * (b.0[c1] * c.0[c2] - b.0[c2] * c.0[c1])
            - a.0[c1] * (b.0[c0] * c.0[c2] - b.0[c2] * c.0[c0])
            + a.0[c2] * (b.0[c0] * c.0[c1] - b.0[c1] * c.0[c0])
    };
    // cofactor expansion along the omitted column
    AmbientVector(vec![
        -det3(1, 2, 3),
        det3(0, 2, 3),
        -det3(0, 1, 3),
        det3(0, 1, 2),
    ])
}

fn cross3(a: &AmbientVector, b: &AmbientVector) -> AmbientVector {
    AmbientVector(vec![
        a.0[1] * b.0[2] - a.0[2] * b.0[1],
        a.0[2] * b.0[0] - a.0[0] * b.0[2],
        a.0[0] * b.0[1] - a.0[1] * b.0[0],
    ])
}

/// Frenet apparatus `k_g = |∇_T T|`, `N = ∇_T T / k_g`, `B` completing the
/// oriented frame, `τ_g = ⟨∇_T N, B⟩`. Curves that are not unit-speed within
/// tolerance are arclength-reparametrized first.
pub fn frenet(grid: &CurveGrid) -> Result<FrenetApparatus> {
    let target_dim = match grid.space {
        ModelSpace::Flat { dim } => dim,
        ModelSpace::Sphere { dim } => dim,
        ModelSpace::AbstractConstantCurvature { .. } => {
            return Err(Error::Unsupported(
                "frenet needs an embedded target".into(),
            ))
        }
    };
    if target_dim != 3 {
        return Err(Error::Unsupported(format!(
            "frenet frame defined for 3-dimensional targets, got dim {target_dim}"
        )));
    }
    let speeds = grid.speeds()?;
    let off_unit = speeds
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0f64, f64::max);
    let work;
    let grid = if off_unit > 1e-6 {
        work = reparametrize_arclength(grid)?;
        &work
    } else {
        grid
    };

    let vel = grid.velocity()?;
    let t1 = tension(grid)?;
    let n = grid.len();
    let mut k_vals = vec![0.0; n];
    let mut degenerate = vec![false; n];
    let mut normals: VectorField = Vec::with_capacity(n);
    for i in 0..n {
        let k = t1[i].norm();
        k_vals[i] = k;
        if k < DEGENERACY_THRESHOLD {
            degenerate[i] = true;
            normals.push(AmbientVector::zeros(grid.dim()));
        } else {
            normals.push(t1[i].scale(1.0 / k));
        }
    }
    let any_degenerate = degenerate.iter().any(|d| *d);
    let mut frames = Vec::with_capacity(n);
    let mut tau_vals = vec![0.0; n];
    if !any_degenerate {
        let binormals: VectorField = (0..n)
            .map(|i| match grid.space {
                ModelSpace::Sphere { .. } => cross4(&grid.points[i], &vel[i], &normals[i]),
                _ => cross3(&vel[i], &normals[i]),
            })
            .collect();
        let dn = sphere_covariant_derivative(grid, &normals)?;
        for i in 0..n {
            tau_vals[i] = dn[i].dot(&binormals[i]);
            frames.push(Some((vel[i].clone(), normals[i].clone(), binormals[i].clone())));
        }
    } else {
        for _ in 0..n {
            frames.push(None);
        }
    }
    Ok(FrenetApparatus {
        k_g: grid.scalar_field(k_vals)?,
        tau_g: grid.scalar_field(tau_vals)?,
        frames,
        degenerate,
    })
}

/// Frame-component residuals of the intrinsic curve equation:
/// `T`: `−3 δ2 k_g k_g'`,
/// `N`: `δ2 (k_g'' − k_g³ − k_g τ_g² + k_g K) − δ1 k_g`,
/// `B`: `δ2 (2 k_g' τ_g + k_g τ_g')`.
pub fn frenet_residual(
    k_g: &ScalarField,
    tau_g: &ScalarField,
    curvature: f64,
    c: &Coupling,
) -> Result<(ScalarField, ScalarField, ScalarField)> {
    if k_g.values.len() != tau_g.values.len() {
        return Err(Error::LengthMismatch {
            expected: k_g.values.len(),
            got: tau_g.values.len(),
        });
    }
    let kp = k_g.derive(1, ACCURACY)?;
    let kpp = k_g.derive(2, ACCURACY)?;
    let tp = tau_g.derive(1, ACCURACY)?;
    let n = k_g.values.len();
    let mut t_comp = vec![0.0; n];
    let mut n_comp = vec![0.0; n];
    let mut b_comp = vec![0.0; n];
    for i in 0..n {
        let k = k_g.values[i];
        let tau = tau_g.values[i];
        t_comp[i] = -3.0 * c.delta2 * k * kp.values[i];
        n_comp[i] =
            c.delta2 * (kpp.values[i] - k * k * k - k * tau * tau + k * curvature) - c.delta1 * k;
        b_comp[i] = c.delta2 * (2.0 * kp.values[i] * tau + k * tp.values[i]);
    }
    let mk = |values| ScalarField {
        values,
        ds: k_g.ds,
        periodic: k_g.periodic,
    };
    Ok((mk(t_comp), mk(n_comp), mk(b_comp)))
}

/// Pointwise defect of the conservation-type law
/// `(δ2 d³/ds³ − δ1 d/ds) ½|γ'|² = δ2 (d/ds) (3/2) |∇_{γ'}γ'|²`.
pub fn conservation_identity(grid: &CurveGrid, c: &Coupling) -> Result<ScalarField> {
    // s-derivatives of ½|γ'|² and |τ|² are expanded by the product rule into
    // direct ambient derivatives of γ, so no stencil ever acts on a derived
    // field (see interval_tension_chain for why that matters)
    let d1 = grid.derive_field(&grid.points, 1, ACCURACY)?;
    let d2 = grid.derive_field(&grid.points, 2, ACCURACY)?;
    let d3 = grid.derive_field(&grid.points, 3, ACCURACY)?;
    let d4 = grid.derive_field(&grid.points, 4, ACCURACY)?;
    let mut values = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        // (½|γ'|²)' = ⟨γ',γ''⟩, (½|γ'|²)''' = ⟨γ',γ''''⟩ + 3⟨γ'',γ'''⟩
        let w1 = d1[i].dot(&d2[i]);
        let w3 = d1[i].dot(&d4[i]) + 3.0 * d2[i].dot(&d3[i]);
        let (tau, tau_p) = match grid.space {
            ModelSpace::Flat { .. } => (d2[i].clone(), d3[i].clone()),
            ModelSpace::Sphere { .. } => {
                let g = &grid.points[i];
                let v2 = d1[i].dot(&d1[i]);
                let a12 = d1[i].dot(&d2[i]);
                (
                    d2[i].axpy(v2, g),
                    d3[i].axpy(2.0 * a12, g).axpy(v2, &d1[i]),
                )
            }
            ModelSpace::AbstractConstantCurvature { .. } => {
                return Err(Error::Unsupported(
                    "conservation identity needs an embedded target".into(),
                ))
            }
        };
        values[i] = c.delta2 * w3 - c.delta1 * w1 - 3.0 * c.delta2 * tau.dot(&tau_p);
    }
    grid.scalar_field(values)
}

/// Pointwise defect of the Bochner formula
/// `Δ ½|τ|² = |∇τ|² + ⟨R(γ', τ)γ', τ⟩ + (δ1/δ2)|τ|²`.
pub fn bochner_residual(grid: &CurveGrid, c: &Coupling) -> Result<ScalarField> {
    let ratio = c.ratio()?;
    let tau = tension(grid)?;
    let dtau = sphere_covariant_derivative(grid, &tau)?;
    let vel = grid.velocity()?;
    let half_tau2 = grid.scalar_field(tau.iter().map(|t| 0.5 * t.dot(t)).collect())?;
    let lhs = half_tau2.derive(2, ACCURACY)?;
    let mut values = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let curv = curvature_op(&grid.space, &vel[i], &tau[i], &vel[i])?.dot(&tau[i]);
        values[i] = lhs.values[i] - dtau[i].dot(&dtau[i]) - curv - ratio * tau[i].dot(&tau[i]);
    }
    grid.scalar_field(values)
}

/// Resample the curve at uniform arclength. The geometric image is preserved
/// (spline interpolation through the original nodes); sphere outputs are
/// re-projected pointwise.
pub fn reparametrize_arclength(grid: &CurveGrid) -> Result<CurveGrid> {
    let n = grid.len();
    if n < 5 {
        return Err(Error::GridTooSmall { need: 5, got: n });
    }
    let dim = grid.dim();
    let splines: Vec<CubicSpline> = (0..dim)
        .map(|c| {
            let col: Vec<f64> = grid.points.iter().map(|p| p.0[c]).collect();
            if grid.periodic {
                CubicSpline::periodic(0.0, grid.ds, &col)
            } else {
                CubicSpline::natural(0.0, grid.ds, &col)
            }
        })
        .collect();
    let speed = |t: f64| -> f64 {
        splines
            .iter()
            .map(|sp| sp.eval_deriv(t).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let t_max = if grid.periodic {
        grid.ds * n as f64
    } else {
        grid.ds * (n - 1) as f64
    };
    // total arclength by composite Simpson on a refined grid
    let fine = 8 * n;
    let hf = t_max / fine as f64;
    let mut total = 0.0;
    for j in 0..fine {
        let a = j as f64 * hf;
        total += hf / 6.0 * (speed(a) + 4.0 * speed(a + 0.5 * hf) + speed(a + hf));
    }
    if total < 1e-12 {
        return Err(Error::DegenerateCurve { node: 0 });
    }
    // invert s -> t by integrating dt/ds = 1/speed with RK4 substeps
    let segments = if grid.periodic { n } else { n - 1 };
    let ds_new = total / segments as f64;
    let substeps = 4;
    let hs = ds_new / substeps as f64;
    let mut t = 0.0f64;
    let mut params = Vec::with_capacity(n);
    params.push(0.0);
    for _ in 0..segments {
        for _ in 0..substeps {
            let k1 = 1.0 / speed(t);
            let k2 = 1.0 / speed(t + 0.5 * hs * k1);
            let k3 = 1.0 / speed(t + 0.5 * hs * k2);
            let k4 = 1.0 / speed(t + hs * k3);
            t += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        params.push(t);
    }
    let count = if grid.periodic { segments } else { segments + 1 };
    let mut points = Vec::with_capacity(count);
    for &tp in params.iter().take(count) {
        let p = AmbientVector(splines.iter().map(|sp| sp.eval(tp)).collect());
        let p = if grid.space.is_sphere() {
            sphere_project_point(&p)?
        } else {
            p
        };
        points.push(p);
    }
    CurveGrid::new(points, ds_new, grid.periodic, grid.space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub fn great_circle(ambient: usize, n: usize) -> CurveGrid {
        let ds = 2.0 * PI / n as f64;
        let points = (0..n)
            .map(|i| {
                let s = i as f64 * ds;
                let mut v = vec![0.0; ambient];
                v[0] = s.cos();
                v[1] = s.sin();
                AmbientVector(v)
            })
            .collect();
        CurveGrid::new(points, ds, true, ModelSpace::sphere(ambient - 1)).unwrap()
    }

    #[test]
    fn great_circle_tension_vanishes() {
        let g = great_circle(4, 512);
        let t = tension(&g).unwrap();
        assert!(sup_vector(&t, true) < 1e-6);
    }

    #[test]
    fn flat_parabola_tension_constant() {
        // (s, s^2): second derivative (0, 2)
        let n = 64;
        let ds = 1.0 / (n - 1) as f64;
        let pts = (0..n)
            .map(|i| {
                let s = i as f64 * ds;
                AmbientVector(vec![s, s * s])
            })
            .collect();
        let g = CurveGrid::new(pts, ds, false, ModelSpace::flat(2)).unwrap();
        let t = tension(&g).unwrap();
        for v in &t[4..n - 4] {
            assert!(v.0[0].abs() < 1e-8);
            assert!((v.0[1] - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn geodesic_residual_zero_for_random_couplings() {
        let g = great_circle(4, 256);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let c = Coupling::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0));
            // include opposite-sign couplings
            let r = semibiharmonic_residual(&g, &c).unwrap();
            assert!(sup_vector(&r, true) < 1e-6, "coupling {c:?}");
        }
    }

    #[test]
    fn covariant_derivative_of_velocity_is_tension() {
        let g = great_circle(4, 128);
        let vel = g.velocity().unwrap();
        let dv = sphere_covariant_derivative(&g, &vel).unwrap();
        let t = tension(&g).unwrap();
        for (a, b) in dv.iter().zip(&t) {
            assert!(a.sub(b).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_curve_rejected() {
        let pts = (0..32)
            .map(|_| AmbientVector(vec![1.0, 0.0, 0.0, 0.0]))
            .collect();
        let g = CurveGrid::new(pts, 0.1, true, ModelSpace::sphere(3)).unwrap();
        let x = vec![AmbientVector(vec![0.0, 1.0, 0.0, 0.0]); 32];
        assert!(matches!(
            sphere_covariant_derivative(&g, &x),
            Err(Error::DegenerateCurve { .. })
        ));
    }

    #[test]
    fn too_few_nodes_rejected() {
        let g = great_circle(4, 128);
        let small = CurveGrid::new(g.points[..4].to_vec(), g.ds, false, g.space).unwrap();
        let x = vec![AmbientVector::zeros(4); 4];
        assert!(matches!(
            sphere_covariant_derivative(&small, &x),
            Err(Error::GridTooSmall { .. })
        ));
    }

    pub fn exp_curve(rate: f64, n: usize) -> CurveGrid {
        let ds = 1.0 / (n - 1) as f64;
        let pts = (0..n)
            .map(|i| {
                let x = i as f64 * ds;
                AmbientVector(vec![x, (rate * x).exp()])
            })
            .collect();
        CurveGrid::new(pts, ds, false, ModelSpace::flat(2)).unwrap()
    }

    // (x, e^{λx}) solves delta2 phi'''' = delta1 phi'' when λ² = delta1/delta2.
    // λ = 3 and coarse grids keep the h^4 truncation well above the eps/h^4
    // roundoff floor of the fourth-derivative stencils.
    #[test]
    fn flat_exponential_solution_residual_refines() {
        let c = Coupling::new(9.0, 1.0);
        let errs: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&n| {
                sup_vector(
                    &semibiharmonic_residual(&exp_curve(3.0, n), &c).unwrap(),
                    false,
                )
            })
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(order >= 2.0, "errs {errs:?} order {order}");
    }

    #[test]
    fn conservation_identity_refines_on_solution_not_on_noise() {
        let c = Coupling::new(9.0, 1.0);
        let errs: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&n| {
                conservation_identity(&exp_curve(3.0, n), &c)
                    .unwrap()
                    .sup_trimmed()
            })
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(order >= 2.0, "errs {errs:?}");

        // negative control: smooth non-solution curve
        let bad = |n: usize| {
            let ds = 1.0 / (n - 1) as f64;
            let pts = (0..n)
                .map(|i| {
                    let x = i as f64 * ds;
                    AmbientVector(vec![x, (3.0 * x).sin() + x * x])
                })
                .collect();
            CurveGrid::new(pts, ds, false, ModelSpace::flat(2)).unwrap()
        };
        let b: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&n| conservation_identity(&bad(n), &c).unwrap().sup_trimmed())
            .collect();
        let order = (b[0] / b[2]).log2() / 2.0;
        assert!(order < 1.0, "non-solution should not converge: {b:?}");
    }

    #[test]
    fn covariant_derivative_output_tangency_refines() {
        // non-parallel tangent field along the equator of S²
        let errs: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&n| {
                let g = great_circle(3, n);
                let x: Vec<AmbientVector> = g
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let s = i as f64 * g.ds;
                        // sin(s) e3 + P(e1)
                        let mut v = AmbientVector(vec![0.0, 0.0, s.sin()]);
                        v.0[0] += 1.0;
                        v.axpy(-(v.dot(p)), p)
                    })
                    .collect();
                let d = sphere_covariant_derivative(&g, &x).unwrap();
                d.iter()
                    .zip(&g.points)
                    .map(|(di, p)| di.dot(p).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order >= 2.0, "tangency errs {errs:?}");
    }

    #[test]
    fn bochner_trivial_on_geodesic() {
        let g = great_circle(4, 256);
        let r = bochner_residual(&g, &Coupling::new(0.3, 1.0)).unwrap();
        assert!(r.sup_trimmed() < 1e-6);
    }

    #[test]
    fn tension_normal_to_unit_speed_curves() {
        let g = great_circle(3, 256);
        let vel = g.velocity().unwrap();
        let t = tension(&g).unwrap();
        for (v, tau) in vel.iter().zip(&t) {
            assert!(v.dot(tau).abs() < 1e-8);
        }
    }

    #[test]
    fn energy_of_great_circle() {
        let g = great_circle(4, 256);
        // |γ'| carries the O(h^4) stencil truncation, so micro-level only
        let e = energy(&g, &Coupling::new(1.0, 1.0)).unwrap();
        assert!((e - 2.0 * PI).abs() < 1e-5);
        let e = energy(&g, &Coupling::new(1.0, 7.0)).unwrap();
        assert!((e - 2.0 * PI).abs() < 1e-5);
    }

    #[test]
    fn frenet_of_great_circle_degenerate() {
        let g = great_circle(4, 256);
        let f = frenet(&g).unwrap();
        assert!(f.all_degenerate());
        assert!(f.k_g.sup_trimmed() < 1e-6);
    }

    #[test]
    fn cross4_orientation() {
        let e = |i: usize| {
            let mut v = vec![0.0; 4];
            v[i] = 1.0;
            AmbientVector(v)
        };
        let x = cross4(&e(0), &e(1), &e(2));
        assert!(x.sub(&e(3)).norm() < 1e-15);
    }

    #[test]
    fn reparametrize_double_speed_circle() {
        // (cos 2t, sin 2t) over [0, pi) -> unit-speed circle over [0, 2 pi)
        let n = 128;
        let dt = PI / n as f64;
        let pts = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                AmbientVector(vec![(2.0 * t).cos(), (2.0 * t).sin(), 0.0, 0.0])
            })
            .collect();
        let g = CurveGrid::new(pts, dt, true, ModelSpace::sphere(3)).unwrap();
        let r = reparametrize_arclength(&g).unwrap();
        assert!((r.ds - 2.0 * PI / n as f64).abs() < 1e-6);
        let speeds = r.speeds().unwrap();
        for s in speeds {
            assert!((s - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn reparametrize_flat_parabola() {
        let n = 129;
        let ds = 1.0 / (n - 1) as f64;
        let pts = (0..n)
            .map(|i| {
                let t = i as f64 * ds;
                AmbientVector(vec![t, t * t])
            })
            .collect();
        let g = CurveGrid::new(pts, ds, false, ModelSpace::flat(2)).unwrap();
        let r = reparametrize_arclength(&g).unwrap();
        let speeds = r.speeds().unwrap();
        for s in &speeds[4..n - 4] {
            assert!((s - 1.0).abs() < 1e-6, "speed {s}");
        }
    }

    #[test]
    fn already_unit_speed_is_stable() {
        let g = great_circle(4, 256);
        let r = reparametrize_arclength(&g).unwrap();
        for (a, b) in g.points.iter().zip(&r.points) {
            assert!(a.sub(b).norm() < 1e-6);
        }
    }
}
