//! Scalar fields on uniform 2-D grids and the fourth-order residual
//! `δ2 Δ²f − δ1 Δf` built from iterated 5-point Laplacians.

use crate::error::{Error, Result};
use crate::geometry::Coupling;

/// Row-major scalar samples `f(x0 + i*hx, y0 + j*hy)`, index `j*nx + i`.
#[derive(Debug, Clone)]
pub struct PlaneField {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub x0: f64,
    pub y0: f64,
}

impl PlaneField {
    pub fn from_fn(
        x0: f64,
        y0: f64,
        hx: f64,
        hy: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(x0 + i as f64 * hx, y0 + j as f64 * hy));
            }
        }
        PlaneField {
            values,
            nx,
            ny,
            hx,
            hy,
            x0,
            y0,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Central first derivative along `axis` (0 = x, 1 = y); the output lives
    /// on the interior grid (one full ring smaller, keeping it aligned with
    /// [`PlaneField::laplacian`]).
    pub fn derivative(&self, axis: usize) -> Result<PlaneField> {
        if axis > 1 {
            return Err(Error::Domain(format!("axis {axis} out of range")));
        }
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::GridTooSmall {
                need: 3,
                got: self.nx.min(self.ny),
            });
        }
        let (nx, ny) = (self.nx - 2, self.ny - 2);
        let mut values = Vec::with_capacity(nx * ny);
        for j in 1..self.ny - 1 {
            for i in 1..self.nx - 1 {
                values.push(if axis == 0 {
                    (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.hx)
                } else {
                    (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.hy)
                });
            }
        }
        Ok(PlaneField {
            values,
            nx,
            ny,
            hx: self.hx,
            hy: self.hy,
            x0: self.x0 + self.hx,
            y0: self.y0 + self.hy,
        })
    }

    /// Drop `rings` boundary rings.
    pub fn shrink(&self, rings: usize) -> Result<PlaneField> {
        if self.nx <= 2 * rings || self.ny <= 2 * rings {
            return Err(Error::GridTooSmall {
                need: 2 * rings + 1,
                got: self.nx.min(self.ny),
            });
        }
        let (nx, ny) = (self.nx - 2 * rings, self.ny - 2 * rings);
        let mut values = Vec::with_capacity(nx * ny);
        for j in rings..self.ny - rings {
            for i in rings..self.nx - rings {
                values.push(self.at(i, j));
            }
        }
        Ok(PlaneField {
            values,
            nx,
            ny,
            hx: self.hx,
            hy: self.hy,
            x0: self.x0 + rings as f64 * self.hx,
            y0: self.y0 + rings as f64 * self.hy,
        })
    }

    /// 5-point Laplacian; output lives on the interior grid (one ring smaller).
    pub fn laplacian(&self) -> Result<PlaneField> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::GridTooSmall {
                need: 3,
                got: self.nx.min(self.ny),
            });
        }
        let (nx, ny) = (self.nx - 2, self.ny - 2);
        let mut values = Vec::with_capacity(nx * ny);
        let ihx2 = 1.0 / (self.hx * self.hx);
        let ihy2 = 1.0 / (self.hy * self.hy);
        for j in 1..self.ny - 1 {
            for i in 1..self.nx - 1 {
                let c = self.at(i, j);
                values.push(
                    (self.at(i - 1, j) - 2.0 * c + self.at(i + 1, j)) * ihx2
                        + (self.at(i, j - 1) - 2.0 * c + self.at(i, j + 1)) * ihy2,
                );
            }
        }
        Ok(PlaneField {
            values,
            nx,
            ny,
            hx: self.hx,
            hy: self.hy,
            x0: self.x0 + self.hx,
            y0: self.y0 + self.hy,
        })
    }
}

/// `δ2 Δ²f − δ1 Δf` on the two-ring interior subgrid.
pub fn plane_residual(f: &PlaneField, c: &Coupling) -> Result<PlaneField> {
    if f.nx < 9 || f.ny < 9 {
        return Err(Error::GridTooSmall {
            need: 9,
            got: f.nx.min(f.ny),
        });
    }
    let lap = f.laplacian()?;
    let bilap = lap.laplacian()?;
    // inner ring of the first Laplacian, aligned with the bilaplacian grid
    let mut values = Vec::with_capacity(bilap.nx * bilap.ny);
    for j in 0..bilap.ny {
        for i in 0..bilap.nx {
            values.push(c.delta2 * bilap.at(i, j) - c.delta1 * lap.at(i + 1, j + 1));
        }
    }
    Ok(PlaneField { values, ..bilap })
}
