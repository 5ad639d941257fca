//! Planar circle modes `γ(s) = (cos s, sin s) + a k-th Fourier mode` solve
//! the equation exactly when the mode number satisfies `k² = −δ1/δ2`.
//!
//! The sign matters: admissible modes exist only when the two couplings have
//! *opposite* signs, i.e. when the Dirichlet and bending terms compete. This
//! example scans coupling pairs, reports which integer modes are admissible,
//! and confirms the analytic residual vanishes exactly on each hit.

use semibiharm::curve::ScalarField;
use semibiharm::families::{mode_condition_search, s1_mode_residual};
use semibiharm::geometry::Coupling;
use semibiharm::Result;

fn main() -> Result<()> {
    let couplings = [
        (-1.0, 1.0),
        (-4.0, 1.0),
        (-9.0, 1.0),
        (-8.0, 2.0),
        (1.0, 1.0),   // same sign: no admissible mode
        (4.0, -1.0),  // ratio -4: mode k = 2 again
        (-2.0, 1.0),  // ratio 2 is not a perfect square: no integer mode
    ];

    for (delta1, delta2) in couplings {
        let c = Coupling::new(delta1, delta2);
        let report = mode_condition_search(&c, 12)?;
        print!("delta1 = {delta1:>5.1}, delta2 = {delta2:>5.1}:");
        if report.admissible.is_empty() {
            println!(" no admissible integer mode with |k| <= 12");
            continue;
        }
        println!();
        for (k, condition) in &report.admissible {
            // the residual of the admissible mode is identically zero
            let r: ScalarField = s1_mode_residual(0.3, *k, &c, 256)?;
            println!(
                "  k = {k:>3}  condition {condition:?}  analytic residual sup = {:.1e}",
                r.sup_trimmed()
            );
        }
    }
    Ok(())
}
