//! Velocity-moment interpolation monitor.
//!
//! The number density is controlled by sqrt(k σ-) pointwise, with k the
//! particle energy density and σ- the backward light-cone energy density.
//! The monitor reports the worst node ratio n / sqrt(k σ-); boundedness in
//! time is what the run-level check asserts.

use crate::particles::MomentGrid;

/// Max over occupied nodes of n / sqrt(k σ-). Nodes with n below
/// 1e-12 × max(n) are skipped to guard the 0/0 case; an empty grid
/// reports 0.
pub fn lemma_ratio(moments: &MomentGrid) -> f64 {
    let n_max = moments.number.iter().cloned().fold(0.0f64, f64::max);
    if n_max <= 0.0 {
        return 0.0;
    }
    let threshold = 1e-12 * n_max;
    let kinetic = moments.kinetic_array();
    let mut worst = 0.0f64;
    for k in 0..moments.number.len() {
        let n = moments.number[k];
        if n > threshold {
            let denom = (kinetic[k] * moments.sigma_minus[k]).sqrt();
            if denom > 0.0 {
                worst = worst.max(n / denom);
            }
        }
    }
    worst
}
