//! Particle species and the relativistic momentum-to-velocity map.
//!
//! Momentum is two-dimensional, `v = (v1, v2)`, and the speed of light is
//! normalized to one, so the velocity of a particle with rest mass `m` is
//! `v̂ = v / sqrt(m² + |v|²)` with |v̂| < 1 always.

use serde::{Deserialize, Serialize};

/// One particle species: rest mass, signed charge, and a short label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpeciesSpec {
    pub label: String,
    /// Rest mass, strictly positive.
    pub mass: f64,
    /// Signed charge, nonzero.
    pub charge: f64,
}

impl SpeciesSpec {
    pub fn new(label: impl Into<String>, mass: f64, charge: f64) -> Self {
        Self {
            label: label.into(),
            mass,
            charge,
        }
    }

    /// Invariant violations, empty when the species is well-formed.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.mass > 0.0) {
            v.push(format!("species '{}': mass must be > 0", self.label));
        }
        if self.charge == 0.0 || !self.charge.is_finite() {
            v.push(format!("species '{}': charge must be nonzero", self.label));
        }
        v
    }
}

/// Mass-shell energy sqrt(mass² + v1² + v2²).
#[inline]
pub fn mass_shell_energy(v1: f64, v2: f64, mass: f64) -> f64 {
    (mass * mass + v1 * v1 + v2 * v2).sqrt()
}

/// Relativistic velocity v̂ = v / sqrt(mass² + |v|²) of momentum (v1, v2).
///
/// Total on all finite momenta; the returned pair has Euclidean norm < 1.
#[inline]
pub fn relativistic_velocity(v1: f64, v2: f64, mass: f64) -> (f64, f64) {
    let e = mass_shell_energy(v1, v2, mass);
    (v1 / e, v2 / e)
}

/// Light-cone energies (E + v1, E - v1) with E = sqrt(mass² + |v|²).
///
/// The small member is computed as (mass² + v2²) / (E + |v1|) so that no
/// cancellation occurs for |v1| >> mass.
#[inline]
pub fn light_cone_energies(v1: f64, v2: f64, mass: f64) -> (f64, f64) {
    let e = mass_shell_energy(v1, v2, mass);
    let transverse = mass * mass + v2 * v2;
    if v1 >= 0.0 {
        let plus = e + v1;
        (plus, transverse / plus)
    } else {
        let minus = e - v1;
        (transverse / minus, minus)
    }
}
