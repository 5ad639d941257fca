//! Great circles solve the interpolating equation for *every* coupling pair:
//! both the tension and its covariant derivatives vanish identically, so the
//! residual is zero no matter how the Dirichlet and bending terms are weighted.
//!
//! This example samples random couplings (including mixed-sign pairs) and
//! random great circles in S³ ⊂ R⁴, then prints the discrete sup-norm of the
//! equation residual on a 512-node grid. Everything reported should sit at
//! the roundoff floor of the fourth-order stencils.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semibiharm::curve::{semibiharmonic_residual, sup_vector, CurveGrid};
use semibiharm::families::great_circle;
use semibiharm::geometry::{AmbientVector, Coupling, ModelSpace};
use semibiharm::Result;

/// Rotate the standard great circle by a random orthogonal map so the grid
/// does not align with the coordinate axes.
fn random_great_circle(n: usize, rng: &mut impl Rng) -> Result<CurveGrid> {
    let base = great_circle(3, n)?;
    // Gram-Schmidt on four random Gaussian vectors
    let mut basis: Vec<AmbientVector> = Vec::new();
    while basis.len() < 4 {
        let mut v = AmbientVector(
            (0..4)
                .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                .collect::<Vec<f64>>(),
        );
        for b in &basis {
            let c = v.dot(b);
            v = v.sub(&b.scale(c));
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-3 {
            basis.push(v.scale(1.0 / norm));
        }
    }
    let points = base
        .points
        .iter()
        .map(|p| {
            let mut q = AmbientVector(vec![0.0; 4]);
            for (i, b) in basis.iter().enumerate() {
                q = q.add(&b.scale(p.0[i]));
            }
            q
        })
        .collect();
    CurveGrid::new(points, base.ds, true, ModelSpace::sphere(3))
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        std::env::var("SEMIBIHARM_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(11),
    );
    let n = 512;
    println!("{:>10} {:>10} {:>14}", "delta1", "delta2", "sup|residual|");
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let delta1 = rng.gen_range(-2.0..2.0);
        // keep delta2 away from zero: the equation degenerates there
        let delta2 = rng.gen_range(0.25..2.0) * if rng.gen() { 1.0 } else { -1.0 };
        let c = Coupling::new(delta1, delta2);
        let grid = random_great_circle(n, &mut rng)?;
        let sup = sup_vector(&semibiharmonic_residual(&grid, &c)?, true);
        worst = worst.max(sup);
        println!("{delta1:>10.4} {delta2:>10.4} {sup:>14.3e}");
    }
    println!("\nworst over all couplings: {worst:.3e} (expect roundoff, well below 1e-6)");
    Ok(())
}
