//! Dilation (virial) functional and its stated time derivative.
//!
//! D(t) = ∬ f x v1 dv dx + ∫ x E2 B dx evolves with
//! dD/dt = ∬ f v1 v̂1 dv dx + ∫ x ρ E1 dx + (1/2) ∫ (B² + E2²) dx.
//! In the monocharge case ∫ x ρ E1 dx = (1/2) ∫ ((M/2)² - E1²) dx ≥ 0 over
//! any interval bracketing the support, so the right side is positive
//! whenever particles exist; a steady compactly supported state would need
//! it to vanish.

use crate::fields::FieldState;
use crate::grid::Grid1d;
use crate::particles::{ordered_particle_sum, MomentGrid, ParticleArray};
use crate::species::{mass_shell_energy, SpeciesSpec};

/// One sample of the dilation functional and its predicted derivative.
#[derive(Clone, Copy, Debug)]
pub struct DilationRecord {
    pub d: f64,
    pub rhs: f64,
}

pub fn dilation_identity(
    particles: &[ParticleArray],
    species: &[SpeciesSpec],
    fields: &FieldState,
    moments: &MomentGrid,
    grid: &Grid1d,
) -> DilationRecord {
    let n = grid.n_nodes();
    let mut d_particles = 0.0;
    let mut rhs_particles = 0.0;
    for (s, arr) in species.iter().zip(particles) {
        let mass = s.mass;
        d_particles += ordered_particle_sum(arr, |a, i| a.w[i] * a.x[i] * a.v1[i]);
        rhs_particles += ordered_particle_sum(arr, |a, i| {
            let e = mass_shell_energy(a.v1[i], a.v2[i], mass);
            a.w[i] * a.v1[i] * (a.v1[i] / e)
        });
    }

    let mut x_e2b = vec![0.0; n];
    let mut x_rho_e1 = vec![0.0; n];
    let mut rad = vec![0.0; n];
    for k in 0..n {
        let x = grid.node_x(k);
        let e2 = fields.e2(k);
        let b = fields.b(k);
        x_e2b[k] = x * e2 * b;
        x_rho_e1[k] = x * moments.rho[k] * fields.e1[k];
        rad[k] = e2 * e2 + b * b;
    }
    DilationRecord {
        d: d_particles + grid.trapezoid(&x_e2b),
        rhs: rhs_particles + grid.trapezoid(&x_rho_e1) + 0.5 * grid.trapezoid(&rad),
    }
}

/// The two algebraically equal forms of ∫ x ρ E1 dx in the monocharge case:
/// the direct node quadrature and (1/2) ∫ ((M/2)² - E1²) dx.
pub fn x_rho_e1_forms(moments: &MomentGrid, fields: &FieldState, grid: &Grid1d, m_total: f64) -> (f64, f64) {
    let n = grid.n_nodes();
    let mut direct = vec![0.0; n];
    let mut bracket = vec![0.0; n];
    let half_m = 0.5 * m_total;
    for k in 0..n {
        let x = grid.node_x(k);
        direct[k] = x * moments.rho[k] * fields.e1[k];
        bracket[k] = half_m * half_m - fields.e1[k] * fields.e1[k];
    }
    (grid.trapezoid(&direct), 0.5 * grid.trapezoid(&bracket))
}
