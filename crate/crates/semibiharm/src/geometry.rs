//! Constant-curvature target geometries.
//!
//! Sign conventions used throughout the crate (single source of truth):
//!
//! * Curvature tensor: `R(X,Y)Z = [∇_X, ∇_Y]Z − ∇_[X,Y] Z`, so that the
//!   sectional curvature is `K(X,Y) = ⟨R(X,Y)Y, X⟩` for orthonormal `X, Y`.
//! * On a space of constant sectional curvature `K` this closes to
//!   `R(X,Y)Z = K(⟨Y,Z⟩X − ⟨X,Z⟩Y)`.
//! * Laplacian on functions: `Δf = div grad f` (negative spectrum).
//! * The round sphere is always the unit sphere, `K = +1`. General radii are
//!   rejected rather than rescaled.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance for `|p| = 1` on sphere inputs.
pub const SPHERE_NORM_TOL: f64 = 1e-9;
/// Tangency tolerance on input vector fields; worse than this triggers
/// re-projection (counted, not fatal).
pub const TANGENCY_TOL: f64 = 1e-6;

/// The pair of interpolation weights `(delta1, delta2)` of the energy
/// `delta1 * ∫|dφ|² + delta2 * ∫|τ(φ)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub delta1: f64,
    pub delta2: f64,
}

impl Coupling {
    pub fn new(delta1: f64, delta2: f64) -> Self {
        Self { delta1, delta2 }
    }

    /// `delta1 / delta2`; errors when the fourth-order term is absent.
    pub fn ratio(&self) -> Result<f64> {
        if self.delta2 == 0.0 {
            return Err(Error::ZeroDelta2);
        }
        Ok(self.delta1 / self.delta2)
    }

    pub fn require_delta2(&self) -> Result<()> {
        if self.delta2 == 0.0 {
            return Err(Error::ZeroDelta2);
        }
        Ok(())
    }
}

/// Target geometry descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelSpace {
    /// Euclidean `ℝ^m`.
    Flat { dim: usize },
    /// Unit round sphere `S^m ⊂ ℝ^{m+1}`.
    Sphere { dim: usize },
    /// Abstract constant sectional curvature (intrinsic Frenet computations).
    AbstractConstantCurvature { curvature: f64 },
}

impl ModelSpace {
    pub fn flat(dim: usize) -> Self {
        ModelSpace::Flat { dim }
    }

    pub fn sphere(dim: usize) -> Self {
        ModelSpace::Sphere { dim }
    }

    /// Constant sectional curvature of the target.
    pub fn sectional_curvature(&self) -> f64 {
        match self {
            ModelSpace::Flat { .. } => 0.0,
            ModelSpace::Sphere { .. } => 1.0,
            ModelSpace::AbstractConstantCurvature { curvature } => *curvature,
        }
    }

    /// Number of ambient coordinates a point carries.
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            ModelSpace::Flat { dim } => Some(*dim),
            ModelSpace::Sphere { dim } => Some(dim + 1),
            ModelSpace::AbstractConstantCurvature { .. } => None,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, ModelSpace::Sphere { .. })
    }
}

/// Ordered sequence of ambient coordinates (carrier for `dφ`, `τ(φ)`, `X`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientVector(pub Vec<f64>);

impl AmbientVector {
    pub fn zeros(dim: usize) -> Self {
        AmbientVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &AmbientVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> AmbientVector {
        AmbientVector(self.0.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &AmbientVector) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &AmbientVector) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &AmbientVector) -> AmbientVector {
        AmbientVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }

    fn check_dims(&self, other: &AmbientVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// `R^N(X,Y)Z = K(⟨Y,Z⟩X − ⟨X,Z⟩Y)` for a constant-curvature target.
pub fn curvature_op(
    space: &ModelSpace,
    x: &AmbientVector,
    y: &AmbientVector,
    z: &AmbientVector,
) -> Result<AmbientVector> {
    x.check_dims(y)?;
    x.check_dims(z)?;
    let k = space.sectional_curvature();
    if k == 0.0 {
        return Ok(AmbientVector::zeros(x.dim()));
    }
    let yz = y.dot(z);
    let xz = x.dot(z);
    Ok(x.scale(k * yz).axpy(-k * xz, y))
}

/// Orthogonal projection `v − ⟨v,p⟩p` onto the tangent space at `p`.
/// Identity for flat targets.
pub fn tangent_project(space: &ModelSpace, p: &AmbientVector, v: &AmbientVector) -> Result<AmbientVector> {
    match space {
        ModelSpace::Flat { .. } => Ok(v.clone()),
        ModelSpace::Sphere { .. } => {
            p.check_dims(v)?;
            let norm = p.norm();
            if (norm - 1.0).abs() > SPHERE_NORM_TOL {
                return Err(Error::NotOnSphere { norm });
            }
            Ok(v.axpy(-v.dot(p), p))
        }
        ModelSpace::AbstractConstantCurvature { .. } => Err(Error::Unsupported(
            "tangent projection needs an embedded target".into(),
        )),
    }
}

/// Renormalize a point onto the unit sphere.
pub fn sphere_project_point(p: &AmbientVector) -> Result<AmbientVector> {
    let n = p.norm();
    if n == 0.0 {
        return Err(Error::Domain("cannot project the origin onto the sphere".into()));
    }
    Ok(p.scale(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: usize, dim: usize) -> AmbientVector {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        AmbientVector(v)
    }

    #[test]
    fn curvature_flat_is_zero() {
        let s = ModelSpace::flat(3);
        let r = curvature_op(&s, &e(0, 3), &e(1, 3), &e(2, 3)).unwrap();
        assert_eq!(r, AmbientVector::zeros(3));
    }

    #[test]
    fn curvature_sphere_orthonormal() {
        // R(e1,e2)e2 = e1 on the unit sphere
        let s = ModelSpace::sphere(2);
        let r = curvature_op(&s, &e(0, 3), &e(1, 3), &e(1, 3)).unwrap();
        assert_eq!(r, e(0, 3));
    }

    #[test]
    fn curvature_abstract_negative() {
        // K = -2, X=e1, Y=e2, Z=e1 -> -K ⟨X,Z⟩ Y = +2 e2
        let s = ModelSpace::AbstractConstantCurvature { curvature: -2.0 };
        let r = curvature_op(&s, &e(0, 3), &e(1, 3), &e(0, 3)).unwrap();
        assert_eq!(r, e(1, 3).scale(2.0));
    }

    #[test]
    fn curvature_dimension_mismatch() {
        let s = ModelSpace::sphere(2);
        let r = curvature_op(&s, &e(0, 3), &e(1, 4), &e(1, 4));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn project_examples() {
        let s = ModelSpace::sphere(2);
        let p = e(0, 3);
        assert_eq!(tangent_project(&s, &p, &e(0, 3)).unwrap(), AmbientVector::zeros(3));
        assert_eq!(tangent_project(&s, &p, &e(1, 3)).unwrap(), e(1, 3));
        let f = ModelSpace::flat(3);
        assert_eq!(tangent_project(&f, &p, &e(1, 3)).unwrap(), e(1, 3));
    }

    #[test]
    fn project_rejects_non_unit_point() {
        let s = ModelSpace::sphere(2);
        let p = e(0, 3).scale(1.5);
        assert!(matches!(
            tangent_project(&s, &p, &e(1, 3)),
            Err(Error::NotOnSphere { .. })
        ));
    }

    proptest! {
        #[test]
        fn curvature_antisymmetric(
            xs in prop::collection::vec(-5.0f64..5.0, 4),
            ys in prop::collection::vec(-5.0f64..5.0, 4),
            zs in prop::collection::vec(-5.0f64..5.0, 4),
            k in -3.0f64..3.0,
        ) {
            let s = ModelSpace::AbstractConstantCurvature { curvature: k };
            let x = AmbientVector(xs);
            let y = AmbientVector(ys);
            let z = AmbientVector(zs);
            let rxy = curvature_op(&s, &x, &y, &z).unwrap();
            let ryx = curvature_op(&s, &y, &x, &z).unwrap();
            let sum = rxy.add(&ryx);
            prop_assert!(sum.norm() < 1e-12 * (1.0 + rxy.norm() + ryx.norm()));
        }

        #[test]
        fn curvature_sectional_identity(
            xs in prop::collection::vec(-5.0f64..5.0, 4),
            ys in prop::collection::vec(-5.0f64..5.0, 4),
            k in -3.0f64..3.0,
        ) {
            let s = ModelSpace::AbstractConstantCurvature { curvature: k };
            let x = AmbientVector(xs);
            let y = AmbientVector(ys);
            let lhs = curvature_op(&s, &x, &y, &y).unwrap().dot(&x);
            let rhs = k * (x.dot(&x) * y.dot(&y) - x.dot(&y).powi(2));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs()));
        }

        #[test]
        fn tangent_project_idempotent(
            vs in prop::collection::vec(-5.0f64..5.0, 3),
            seed in 0u64..1000,
        ) {
            // random unit p
            let raw = [
                (seed as f64 * 0.17).sin() + 0.1,
                (seed as f64 * 0.31).cos(),
                (seed as f64 * 0.47).sin() * 0.7 + 0.2,
            ];
            let p = sphere_project_point(&AmbientVector(raw.to_vec())).unwrap();
            let s = ModelSpace::sphere(2);
            let v = AmbientVector(vs);
            let once = tangent_project(&s, &p, &v).unwrap();
            let twice = tangent_project(&s, &p, &once).unwrap();
            prop_assert!(once.sub(&twice).norm() <= 8.0 * f64::EPSILON * (1.0 + v.norm()));
            prop_assert!(once.dot(&p).abs() <= 1e-12 * (1.0 + v.norm()));
        }
    }
}
