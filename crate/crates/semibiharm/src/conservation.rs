//! Energy-momentum tensor (components, trace, divergence) on 1-D and 2-D
//! flat domains, Killing fields of round spheres, and the induced Noether
//! currents.

use crate::curve::{
    sphere_covariant_derivative, tension, tension_with_derivative, CurveGrid, ScalarField,
    ACCURACY,
};
use crate::error::{Error, Result};
use crate::geometry::{curvature_op, AmbientVector, Coupling, ModelSpace};
use crate::plane::PlaneField;

/// Per-node symmetric d×d energy-momentum matrix (d = domain dimension).
#[derive(Debug, Clone)]
pub struct EMTensorField {
    pub dim: usize,
    /// row-major d×d entries per node; symmetry holds exactly because the
    /// defining formula is symmetrized before assembly
    pub entries: Vec<Vec<f64>>,
}

impl EMTensorField {
    pub fn component(&self, node: usize, alpha: usize, beta: usize) -> f64 {
        self.entries[node][alpha * self.dim + beta]
    }

    pub fn matrix_trace(&self, node: usize) -> f64 {
        (0..self.dim).map(|a| self.component(node, a, a)).sum()
    }
}

/// Trace-formula coefficients `(δ1(1 − n/2), δ2 n/2, δ2(n − 2))` multiplying
/// `|dφ|²`, `|τ|²`, `⟨dφ, ∇τ⟩` on an n-dimensional domain. Kept symbolic so
/// the dimension-specific vanishing statements are inspectable: at n = 2 the
/// first and third coefficients drop, at n = 4 the first is `−δ1`.
pub fn trace_coefficients(n: usize, c: &Coupling) -> (f64, f64, f64) {
    (
        c.delta1 * (1.0 - n as f64 / 2.0),
        c.delta2 * n as f64 / 2.0,
        c.delta2 * (n as f64 - 2.0),
    )
}

/// Energy-momentum tensor of a curve (d = 1):
/// `T = δ1 ½|γ'|² + δ2(½|τ|² − ⟨γ', ∇_{γ'}τ⟩)`.
pub fn em_tensor(grid: &CurveGrid, c: &Coupling) -> Result<EMTensorField> {
    let (vel, tau, dtau) = tension_with_derivative(grid)?;
    let entries = (0..grid.len())
        .map(|i| {
            vec![
                c.delta1 * 0.5 * vel[i].dot(&vel[i])
                    + c.delta2 * (0.5 * tau[i].dot(&tau[i]) - vel[i].dot(&dtau[i])),
            ]
        })
        .collect();
    Ok(EMTensorField { dim: 1, entries })
}

/// Trace formula for a curve, `Tr T = ½δ1|dφ|² + ½δ2|τ|² − δ2⟨dφ, ∇τ⟩`
/// (the n = 1 coefficients of [`trace_coefficients`]).
pub fn em_trace(grid: &CurveGrid, c: &Coupling) -> Result<ScalarField> {
    let (c1, c2, c3) = trace_coefficients(1, c);
    let (vel, tau, dtau) = tension_with_derivative(grid)?;
    grid.scalar_field(
        (0..grid.len())
            .map(|i| {
                c1 * vel[i].dot(&vel[i]) + c2 * tau[i].dot(&tau[i]) + c3 * vel[i].dot(&dtau[i])
            })
            .collect(),
    )
}

/// Divergence of a 1-D energy-momentum field: `dT/ds`; near zero only along
/// solution curves.
pub fn em_divergence(field: &EMTensorField, grid: &CurveGrid) -> Result<ScalarField> {
    if field.dim != 1 || field.entries.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: field.entries.len(),
        });
    }
    grid.scalar_field(field.entries.iter().map(|e| e[0]).collect())?
        .derive(1, ACCURACY)
}

/// Shared first-derivative data of a 2-D scalar map, all restricted to the
/// two-ring interior so every field lives on one grid.
struct PlaneDerivatives {
    a: PlaneField,
    b: PlaneField,
    tau: PlaneField,
    tx: PlaneField,
    ty: PlaneField,
}

fn plane_derivatives(f: &PlaneField) -> Result<PlaneDerivatives> {
    let lap = f.laplacian()?;
    Ok(PlaneDerivatives {
        a: f.derivative(0)?.shrink(1)?,
        b: f.derivative(1)?.shrink(1)?,
        tau: lap.shrink(1)?,
        tx: lap.derivative(0)?,
        ty: lap.derivative(1)?,
    })
}

/// Energy-momentum tensor of a 2-D scalar map, on the two-ring interior grid;
/// also returns that grid's geometry (values = Tr T for convenience).
pub fn em_tensor_plane(f: &PlaneField, c: &Coupling) -> Result<(EMTensorField, PlaneField)> {
    let d = plane_derivatives(f)?;
    let n = d.tau.values.len();
    let mut entries = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (d.a.values[i], d.b.values[i]);
        let t = d.tau.values[i];
        let (tx, ty) = (d.tx.values[i], d.ty.values[i]);
        let grad2 = a * a + b * b;
        let mixed = a * tx + b * ty;
        let iso = c.delta2 * (0.5 * t * t + mixed);
        let t11 = c.delta1 * (a * a - 0.5 * grad2) + iso - 2.0 * c.delta2 * a * tx;
        let t22 = c.delta1 * (b * b - 0.5 * grad2) + iso - 2.0 * c.delta2 * b * ty;
        let t12 = c.delta1 * a * b - c.delta2 * (a * ty + b * tx);
        entries.push(vec![t11, t12, t12, t22]);
        trace.push(t11 + t22);
    }
    let grid = PlaneField {
        values: trace,
        ..d.tau
    };
    Ok((EMTensorField { dim: 2, entries }, grid))
}

/// Trace formula on a 2-D domain: the n = 2 coefficients collapse to
/// `δ2|τ|²`, so a vanishing trace forces harmonicity.
pub fn em_trace_plane(f: &PlaneField, c: &Coupling) -> Result<PlaneField> {
    let (_, c2, _) = trace_coefficients(2, c);
    let lap = f.laplacian()?.shrink(1)?;
    Ok(PlaneField {
        values: lap.values.iter().map(|t| c2 * t * t).collect(),
        ..lap
    })
}

/// Row divergence `(∂_x T_{1β} + ∂_y T_{2β})` of a 2-D energy-momentum field;
/// returns the two components on a one-ring-smaller grid.
pub fn em_divergence_plane(
    field: &EMTensorField,
    grid: &PlaneField,
) -> Result<(PlaneField, PlaneField)> {
    if field.dim != 2 || field.entries.len() != grid.values.len() {
        return Err(Error::LengthMismatch {
            expected: grid.values.len(),
            got: field.entries.len(),
        });
    }
    let comp = |k: usize| PlaneField {
        values: field.entries.iter().map(|e| e[k]).collect(),
        ..grid.clone()
    };
    let (t11, t12, t22) = (comp(0), comp(1), comp(3));
    let div1 = t11.derivative(0)?;
    let div1 = PlaneField {
        values: div1
            .values
            .iter()
            .zip(&t12.derivative(1)?.values)
            .map(|(x, y)| x + y)
            .collect(),
        ..div1
    };
    let div2 = t12.derivative(0)?;
    let div2 = PlaneField {
        values: div2
            .values
            .iter()
            .zip(&t22.derivative(1)?.values)
            .map(|(x, y)| x + y)
            .collect(),
        ..div2
    };
    Ok((div1, div2))
}

// ---------------------------------------------------------------------------
// Killing fields and Noether currents
// ---------------------------------------------------------------------------

/// Killing field of the round sphere `Sᵐ ⊂ ℝ^{m+1}` (or a rotation field of a
/// flat target): `X(p) = A·p` for an exactly antisymmetric generator `A`.
#[derive(Debug, Clone)]
pub struct KillingField {
    a: Vec<Vec<f64>>,
}

impl KillingField {
    /// `a` must be square and antisymmetric to `1e-14` entrywise.
    pub fn new(a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        for row in &a {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        // index pairs (i, j) and (j, i) are compared, so iterator forms
        // obscure rather than help here
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for j in 0..n {
                if (a[i][j] + a[j][i]).abs() > 1e-14 {
                    return Err(Error::ParameterConstraint(format!(
                        "generator not antisymmetric at ({i}, {j}): {} vs {}",
                        a[i][j], a[j][i]
                    )));
                }
            }
        }
        Ok(KillingField { a })
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.len()
    }

    /// Elementary rotation `e_i ∧ e_j`: maps `e_i ↦ e_j`.
    pub fn rotation(ambient: usize, i: usize, j: usize) -> Result<Self> {
        if i >= ambient || j >= ambient || i == j {
            return Err(Error::Domain(format!(
                "rotation plane ({i}, {j}) invalid in dimension {ambient}"
            )));
        }
        let mut a = vec![vec![0.0; ambient]; ambient];
        a[j][i] = 1.0;
        a[i][j] = -1.0;
        Ok(KillingField { a })
    }

    /// The full rotation basis (i < j); 6 generators for `S³`.
    pub fn so_basis(ambient: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for i in 0..ambient {
            for j in i + 1..ambient {
                out.push(Self::rotation(ambient, i, j).unwrap());
            }
        }
        out
    }

    /// `X(p) = A·p`.
    pub fn eval(&self, p: &AmbientVector) -> AmbientVector {
        AmbientVector(
            self.a
                .iter()
                .map(|row| row.iter().zip(&p.0).map(|(a, x)| a * x).sum())
                .collect(),
        )
    }

    /// Linear combination `αX + βY` of generators.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if other.a.len() != self.a.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.len(),
                got: other.a.len(),
            });
        }
        let a = self
            .a
            .iter()
            .zip(&other.a)
            .map(|(r, s)| {
                r.iter()
                    .zip(s)
                    .map(|(x, y)| alpha * x + beta * y)
                    .collect()
            })
            .collect();
        KillingField::new(a)
    }

    /// Covariant derivative `∇_V X` at `p`: ambient `A·V`, tangent-projected
    /// for sphere targets. Exact pointwise (no stencils).
    fn covariant(&self, space: &ModelSpace, p: &AmbientVector, v: &AmbientVector) -> AmbientVector {
        let av = self.eval(v);
        match space {
            ModelSpace::Sphere { .. } => av.axpy(-av.dot(p), p),
            _ => av,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KillingReport {
    /// sup of `⟨∇_{γ'}X, γ'⟩ / |γ'|²` — zero for genuine Killing fields
    pub killing_sup: f64,
    /// sup of `|∇²_{γ',γ'}X + R(X, γ')γ'|` — the Hessian identity defect
    pub hessian_sup: f64,
}

/// Verify the Killing equation and the Hessian identity
/// `∇²_{Y,Z}X = −R(X,Y)Z` (with `Y = Z = γ'`) along a sampled curve.
pub fn killing_checks(x: &KillingField, grid: &CurveGrid) -> Result<KillingReport> {
    if x.ambient_dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: x.ambient_dim(),
        });
    }
    let vel = grid.velocity()?;
    let tau = tension(grid)?;
    let nabla_x: Vec<AmbientVector> = vel
        .iter()
        .zip(&grid.points)
        .map(|(v, p)| x.covariant(&grid.space, p, v))
        .collect();
    let killing_sup = vel
        .iter()
        .zip(&nabla_x)
        .map(|(v, nx)| (nx.dot(v) / v.dot(v)).abs())
        .fold(0.0f64, f64::max);
    // ∇²_{γ',γ'}X = ∇_{γ'}(∇X(γ')) − ∇X(∇_{γ'}γ')
    let d_nabla_x = sphere_covariant_derivative(grid, &nabla_x)?;
    let mut hessian_sup = 0.0f64;
    for i in 0..grid.len() {
        let second = d_nabla_x[i].sub(&x.covariant(&grid.space, &grid.points[i], &tau[i]));
        let r = curvature_op(&grid.space, &x.eval(&grid.points[i]), &vel[i], &vel[i])?;
        hessian_sup = hessian_sup.max(second.add(&r).norm());
    }
    Ok(KillingReport {
        killing_sup,
        hessian_sup,
    })
}

/// Noether current of a Killing field along a curve:
/// `J = δ1⟨γ', X⟩ + δ2⟨τ, ∇_{γ'}X⟩ − δ2⟨∇_{γ'}τ, X⟩`; divergence-free
/// (constant in s) along solutions.
pub fn noether_current(
    grid: &CurveGrid,
    x: &KillingField,
    c: &Coupling,
) -> Result<ScalarField> {
    if x.ambient_dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: x.ambient_dim(),
        });
    }
    let (vel, tau, dtau) = tension_with_derivative(grid)?;
    grid.scalar_field(
        (0..grid.len())
            .map(|i| {
                let p = &grid.points[i];
                let xp = x.eval(p);
                let nx = x.covariant(&grid.space, p, &vel[i]);
                c.delta1 * vel[i].dot(&xp) + c.delta2 * tau[i].dot(&nx)
                    - c.delta2 * dtau[i].dot(&xp)
            })
            .collect(),
    )
}

/// Noether current of the `S¹ → S¹` angle model under the unit rotation:
/// `J = δ1 φ' − δ2 φ'''`.
pub fn noether_current_angle(phi: &ScalarField, c: &Coupling) -> Result<ScalarField> {
    let d1 = phi.derive(1, ACCURACY)?;
    let d3 = phi.derive(3, ACCURACY)?;
    Ok(ScalarField {
        values: d1
            .values
            .iter()
            .zip(&d3.values)
            .map(|(a, b)| c.delta1 * a - c.delta2 * b)
            .collect(),
        ds: phi.ds,
        periodic: phi.periodic,
    })
}
