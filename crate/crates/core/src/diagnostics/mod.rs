//! Diagnostics: energy/momentum/stress densities, discrete conservation
//! residuals, light-cone and segment balances, moving-window charge
//! monitors, velocity-moment inequalities, support radii, the dilation
//! functional, and power-law trend fits.

mod cones;
mod dilation;
mod fitting;
mod moments;
mod nondecay;
mod support;

pub use cones::{ConeAccumulator, ConeError, SegmentAccumulator};
pub use dilation::{dilation_identity, x_rho_e1_forms, DilationRecord};
pub use fitting::{fit_growth_exponent, FitError, PowerLawFit};
pub use moments::lemma_ratio;
pub use nondecay::{compute_nondecay, NondecayError, NondecayRecord};
pub use support::{support_radii, SupportRecord};

use crate::fields::FieldState;
use crate::particles::MomentGrid;

/// Energy density e, momentum density m, and stress density l on nodes,
/// particle and field contributions combined:
///   e = ∫ Σ f E dv + (E1² + E2² + B²)/2
///   m = ∫ Σ f v1 dv + E2 B
///   l = ∫ Σ f v1 v̂1 dv - E1²/2 + E2²/2 + B²/2
#[derive(Clone, Debug)]
pub struct DensitiesRecord {
    pub e: Vec<f64>,
    pub m: Vec<f64>,
    pub l: Vec<f64>,
}

impl DensitiesRecord {
    pub fn n_nodes(&self) -> usize {
        self.e.len()
    }
}

/// Assemble the densities from deposited moments and the field state.
pub fn compute_densities(moments: &MomentGrid, fields: &FieldState) -> DensitiesRecord {
    let n = moments.number.len();
    let kinetic = moments.kinetic_array();
    let momentum = moments.momentum_array();
    let mut e = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    for k in 0..n {
        let e1 = fields.e1[k];
        let e2 = fields.e2(k);
        let b = fields.b(k);
        e.push(kinetic[k] + 0.5 * (e1 * e1 + e2 * e2 + b * b));
        m.push(momentum[k] + e2 * b);
        l.push(moments.stress[k] + 0.5 * (-e1 * e1 + e2 * e2 + b * b));
    }
    DensitiesRecord { e, m, l }
}

/// Discrete residuals of the two local balance laws between consecutive
/// steps at unit CFL.
///
/// The time part uses the average of the two neighbor nodes, so the stencil
/// annihilates exact left- and right-moving node shifts; on smooth states
/// it converges to ∂_t e + ∂_x m (and ∂_t m + ∂_x l) at first order.
pub fn conservation_residuals(
    prev: &DensitiesRecord,
    next: &DensitiesRecord,
    dt: f64,
    dx: f64,
) -> (f64, f64) {
    let n = next.e.len();
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for k in 1..n - 1 {
        let a = (next.e[k] - 0.5 * (prev.e[k + 1] + prev.e[k - 1])) / dt
            + (prev.m[k + 1] - prev.m[k - 1]) / (2.0 * dx);
        let b = (next.m[k] - 0.5 * (prev.m[k + 1] + prev.m[k - 1])) / dt
            + (prev.l[k + 1] - prev.l[k - 1]) / (2.0 * dx);
        r1 = r1.max(a.abs());
        r2 = r2.max(b.abs());
    }
    (r1, r2)
}

/// Most negative value over the pointwise nonnegativity suite:
/// e, e ± m, e - 2m + l, e + 2m + l, σ±. Nonnegative up to roundoff on any
/// state assembled from deposits.
pub fn nonnegativity_worst(rec: &DensitiesRecord, moments: &MomentGrid) -> f64 {
    let mut worst = f64::INFINITY;
    for k in 0..rec.e.len() {
        let (e, m, l) = (rec.e[k], rec.m[k], rec.l[k]);
        for v in [
            e,
            e + m,
            e - m,
            e - 2.0 * m + l,
            e + 2.0 * m + l,
            moments.sigma_plus[k],
            moments.sigma_minus[k],
        ] {
            worst = worst.min(v);
        }
    }
    worst
}
