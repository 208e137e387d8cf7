//! Moving-window charge and energy monitors for the monocharge scenario.
//!
//! The window [x0 + t, C0 + t] travels at light speed; the charge mu(t) and
//! the (e - m) energy inside it are both nonincreasing, and mu(t) stays
//! above the analytic floor M/2 - sqrt(2 E(0) / (C0 - x0)) whenever the
//! setup conditions hold. The charge density is compactly supported inside
//! [-C0 - t, C0 + t], so the window integral carries everything to the
//! right of x0 + t; the tail beyond the window is returned for a zero
//! check.

use thiserror::Error;

use super::DensitiesRecord;
use crate::grid::Grid1d;
use crate::particles::MomentGrid;

#[derive(Debug, Error)]
pub enum NondecayError {
    #[error("window-outside-domain: [{lo}, {hi}] not contained in the grid")]
    WindowOutsideDomain { lo: f64, hi: f64 },
}

/// One sample of the moving-window monitors.
#[derive(Clone, Copy, Debug)]
pub struct NondecayRecord {
    pub t: f64,
    /// Charge in [x0 + t, C0 + t].
    pub mu: f64,
    /// ∫ (e - m) over the same window.
    pub window_energy: f64,
    /// Analytic floor carried from setup.
    pub mu_floor: f64,
    /// Charge found beyond the window's right edge (expected zero).
    pub tail_charge: f64,
    pub window: (f64, f64),
}

/// Evaluate the window monitors at time t.
pub fn compute_nondecay(
    moments: &MomentGrid,
    densities: &DensitiesRecord,
    grid: &Grid1d,
    t: f64,
    x0: f64,
    c0: f64,
    mu_floor: f64,
) -> Result<NondecayRecord, NondecayError> {
    let lo = x0 + t;
    let hi = c0 + t;
    if !grid.contains(lo) || !grid.contains(hi) {
        return Err(NondecayError::WindowOutsideDomain { lo, hi });
    }
    let mu = grid.integral_between(&moments.rho, lo, hi);
    let tail_charge = grid.integral_between(&moments.rho, hi, grid.x_max());
    let em: Vec<f64> = densities
        .e
        .iter()
        .zip(&densities.m)
        .map(|(e, m)| e - m)
        .collect();
    let window_energy = grid.integral_between(&em, lo, hi);
    Ok(NondecayRecord {
        t,
        mu,
        window_energy,
        mu_floor,
        tail_charge,
        window: (lo, hi),
    })
}
