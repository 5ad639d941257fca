//! Machine-readable diagnostic reports: refinement ladders, estimated
//! convergence orders, and paired positive/negative control runs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One identity or residual checked over a grid ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub grids: Vec<usize>,
    pub sup_norms: Vec<f64>,
    /// least-squares slope of log(sup) against log(h); `None` when a norm
    /// vanished exactly
    pub estimated_order: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub schema_version: u32,
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

impl DiagnosticReport {
    pub fn new(seed: u64) -> Self {
        DiagnosticReport {
            schema_version: SCHEMA_VERSION,
            seed,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: IdentityCheck) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    /// Deterministic merge order for concurrently produced checks.
    pub fn sort_checks(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Least-squares slope of `log2(sup)` against `log2(1/n)`; grid counts stand
/// in for `1/h` so doubling ladders need no step bookkeeping.
pub fn estimated_order(grids: &[usize], sup_norms: &[f64]) -> Option<f64> {
    if grids.len() != sup_norms.len() || grids.len() < 2 {
        return None;
    }
    if sup_norms.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = grids.iter().map(|&n| -(n as f64).log2()).collect();
    let ys: Vec<f64> = sup_norms.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx = xs.iter().map(|x| x * x).sum::<f64>();
    let sxy = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// A ladder passes when the measured order reaches `order_threshold`, or when
/// every norm already sits below `floor` (identities that hold to roundoff
/// leave nothing to refine).
pub fn ladder_passes(sup_norms: &[f64], order: Option<f64>, order_threshold: f64, floor: f64) -> bool {
    if sup_norms.iter().all(|&e| e < floor) {
        return true;
    }
    order.is_some_and(|o| o >= order_threshold)
}

/// Evaluate `sup(n)` over the ladder and grade the decay.
pub fn run_ladder(
    name: &str,
    grids: &[usize],
    order_threshold: f64,
    floor: f64,
    mut sup: impl FnMut(usize) -> Result<f64>,
) -> Result<IdentityCheck> {
    if grids.len() < 2 {
        return Err(Error::Domain(
            "a refinement ladder needs at least two grids".into(),
        ));
    }
    let sup_norms = grids.iter().map(|&n| sup(n)).collect::<Result<Vec<_>>>()?;
    let estimated_order = estimated_order(grids, &sup_norms);
    let pass = ladder_passes(&sup_norms, estimated_order, order_threshold, floor);
    Ok(IdentityCheck {
        name: name.to_string(),
        grids: grids.to_vec(),
        sup_norms,
        estimated_order,
        pass,
    })
}

/// Positive/negative control pair: the identity must refine on the solution
/// input and must *not* refine on the control input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedControl {
    pub positive: IdentityCheck,
    pub negative: IdentityCheck,
    pub pass: bool,
}

pub fn paired_control(
    name: &str,
    grids: &[usize],
    order_threshold: f64,
    floor: f64,
    sup_positive: impl FnMut(usize) -> Result<f64>,
    sup_negative: impl FnMut(usize) -> Result<f64>,
) -> Result<PairedControl> {
    let positive = run_ladder(
        &format!("{name} (solution)"),
        grids,
        order_threshold,
        floor,
        sup_positive,
    )?;
    let mut negative = run_ladder(
        &format!("{name} (control)"),
        grids,
        order_threshold,
        floor,
        sup_negative,
    )?;
    // the control passes by refusing to decay: visibly nonzero at the finest
    // grid and no measured order near the threshold
    negative.pass = *negative.sup_norms.last().unwrap() > floor
        && negative.estimated_order.is_none_or(|o| o < 1.0);
    let pass = positive.pass && negative.pass;
    Ok(PairedControl {
        positive,
        negative,
        pass,
    })
}

impl PairedControl {
    pub fn into_checks(self) -> [IdentityCheck; 2] {
        [self.positive, self.negative]
    }
}
