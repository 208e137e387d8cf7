//! Macro-particle handling: quiet-start quadrature sampling, the two-stage
//! momentum push along the characteristics, linear (cloud-in-cell) moment
//! deposition, and tracer recording.
//!
//! Deposition and reductions are chunked over fixed particle-index ranges
//! and merged in chunk order, so results are bit-identical for any worker
//! count.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::Grid1d;
use crate::scenario::InitialData;
use crate::species::{light_cone_energies, mass_shell_energy, SpeciesSpec};

/// Fixed chunk length for order-independent parallel reductions.
const CHUNK: usize = 8192;

/// Structure-of-arrays store for one species' macro-particles.
#[derive(Clone, Debug, Default)]
pub struct ParticleArray {
    pub x: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub w: Vec<f64>,
}

impl ParticleArray {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Rescale all weights so the total matches `target` exactly up to one
    /// rounding; used to pin the sampled net charge of a scenario.
    pub fn rescale_total_weight(&mut self, target: f64) {
        let current = self.total_weight();
        if current > 0.0 {
            let s = target / current;
            for w in &mut self.w {
                *w *= s;
            }
        }
    }
}

/// Node arrays of the fields a particle gathers: E1, E2, B at one time.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub b: Vec<f64>,
}

impl FieldSample {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            e1: vec![0.0; n_nodes],
            e2: vec![0.0; n_nodes],
            b: vec![0.0; n_nodes],
        }
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("zero-mass-density: species {0} has no mass to sample")]
    ZeroMassDensity(usize),
    #[error("count must be at least 1")]
    ZeroCount,
}

#[derive(Debug, Error)]
pub enum PushError {
    #[error("particle-out-of-domain: species {species} reached x = {x}")]
    OutOfDomain { species: usize, x: f64 },
}

/// Deterministic quiet-start sampling: tensor midpoint nodes over each
/// profile's support box, one macro-particle per node, weight = density
/// times node volume. Zero-weight nodes are dropped. The seed is part of
/// the interface for reproducibility bookkeeping; the quadrature placement
/// does not consume randomness.
pub fn sample_from_density(
    data: &InitialData,
    species: usize,
    count: usize,
    _seed: u64,
) -> Result<ParticleArray, SampleError> {
    if let Some(seeds) = &data.explicit_particles {
        let mut arr = ParticleArray::default();
        for s in seeds.iter().filter(|s| s.species == species) {
            arr.x.push(s.x);
            arr.v1.push(s.v1);
            arr.v2.push(s.v2);
            arr.w.push(s.weight);
        }
        return Ok(arr);
    }
    if count == 0 {
        return Err(SampleError::ZeroCount);
    }
    let profiles = &data.profiles[species];
    let total_mass: f64 = profiles.iter().map(|p| p.mass()).sum();
    if profiles.is_empty() || !(total_mass > 0.0) {
        return Err(SampleError::ZeroMassDensity(species));
    }

    let mut arr = ParticleArray::default();
    for p in profiles {
        let share = ((count as f64 * p.mass() / total_mass).round() as usize).max(1);
        // balance node spacing across the three axes
        let vol = 2.0 * p.radius_x * (2.0 * p.radius_v) * (2.0 * p.radius_v);
        let h = (vol / share as f64).cbrt();
        let nx = ((2.0 * p.radius_x / h).round() as usize).max(1);
        let nv = ((2.0 * p.radius_v / h).round() as usize).max(1);
        let hx = 2.0 * p.radius_x / nx as f64;
        let hv = 2.0 * p.radius_v / nv as f64;
        let node_vol = hx * hv * hv;
        for i in 0..nx {
            let x = p.center_x - p.radius_x + (i as f64 + 0.5) * hx;
            for j in 0..nv {
                let v1 = p.center_v1 - p.radius_v + (j as f64 + 0.5) * hv;
                for k in 0..nv {
                    let v2 = p.center_v2 - p.radius_v + (k as f64 + 0.5) * hv;
                    let w = p.density(x, v1, v2) * node_vol;
                    if w > 0.0 {
                        arr.x.push(x);
                        arr.v1.push(v1);
                        arr.v2.push(v2);
                        arr.w.push(w);
                    }
                }
            }
        }
    }
    Ok(arr)
}

/// Charge-weighted moments of one species.
#[derive(Clone, Debug)]
pub struct SpeciesMoments {
    pub rho: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
}

/// Deposited grid moments: charge density and current per species and
/// summed, plus the charge-free kinetic moments used by the diagnostics.
#[derive(Clone, Debug)]
pub struct MomentGrid {
    pub rho: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub per_species: Vec<SpeciesMoments>,
    /// ∫ Σ f dv
    pub number: Vec<f64>,
    /// ∫ Σ f (E + v1) dv with E the mass-shell energy
    pub sigma_plus: Vec<f64>,
    /// ∫ Σ f (E - v1) dv
    pub sigma_minus: Vec<f64>,
    /// ∫ Σ f v1 v̂1 dv
    pub stress: Vec<f64>,
}

impl MomentGrid {
    /// ∫ Σ f E dv, the particle energy density: (σ+ + σ-)/2.
    pub fn kinetic_array(&self) -> Vec<f64> {
        self.sigma_plus
            .iter()
            .zip(&self.sigma_minus)
            .map(|(p, m)| 0.5 * (p + m))
            .collect()
    }

    /// ∫ Σ f v1 dv, the particle momentum density: (σ+ - σ-)/2.
    pub fn momentum_array(&self) -> Vec<f64> {
        self.sigma_plus
            .iter()
            .zip(&self.sigma_minus)
            .map(|(p, m)| 0.5 * (p - m))
            .collect()
    }
}

struct DepositPartial {
    rho: Vec<f64>,
    j1: Vec<f64>,
    j2: Vec<f64>,
    number: Vec<f64>,
    sigma_plus: Vec<f64>,
    sigma_minus: Vec<f64>,
    stress: Vec<f64>,
}

fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
        .collect()
}

/// Deposit all moments of all species with linear (cloud-in-cell) shapes.
pub fn deposit_moments(
    particles: &[ParticleArray],
    species: &[SpeciesSpec],
    grid: &Grid1d,
) -> MomentGrid {
    let n_nodes = grid.n_nodes();
    let inv_dx = 1.0 / grid.dx();
    let mut out = MomentGrid {
        rho: vec![0.0; n_nodes],
        j1: vec![0.0; n_nodes],
        j2: vec![0.0; n_nodes],
        per_species: Vec::with_capacity(species.len()),
        number: vec![0.0; n_nodes],
        sigma_plus: vec![0.0; n_nodes],
        sigma_minus: vec![0.0; n_nodes],
        stress: vec![0.0; n_nodes],
    };

    for (s, arr) in species.iter().zip(particles) {
        let q = s.charge;
        let mass = s.mass;
        let partials: Vec<DepositPartial> = chunk_ranges(arr.len())
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut p = DepositPartial {
                    rho: vec![0.0; n_nodes],
                    j1: vec![0.0; n_nodes],
                    j2: vec![0.0; n_nodes],
                    number: vec![0.0; n_nodes],
                    sigma_plus: vec![0.0; n_nodes],
                    sigma_minus: vec![0.0; n_nodes],
                    stress: vec![0.0; n_nodes],
                };
                for i in lo..hi {
                    let (k, theta) = grid.locate(arr.x[i]);
                    let (v1, v2) = (arr.v1[i], arr.v2[i]);
                    let base = arr.w[i] * inv_dx;
                    let energy = mass_shell_energy(v1, v2, mass);
                    let (vh1, vh2) = (v1 / energy, v2 / energy);
                    let (lc_plus, lc_minus) = light_cone_energies(v1, v2, mass);
                    for (node, frac) in [(k, 1.0 - theta), (k + 1, theta)] {
                        let wn = base * frac;
                        p.rho[node] += q * wn;
                        p.j1[node] += q * wn * vh1;
                        p.j2[node] += q * wn * vh2;
                        p.number[node] += wn;
                        p.sigma_plus[node] += wn * lc_plus;
                        p.sigma_minus[node] += wn * lc_minus;
                        p.stress[node] += wn * v1 * vh1;
                    }
                }
                p
            })
            .collect();

        let mut sm = SpeciesMoments {
            rho: vec![0.0; n_nodes],
            j1: vec![0.0; n_nodes],
            j2: vec![0.0; n_nodes],
        };
        for p in partials {
            for k in 0..n_nodes {
                sm.rho[k] += p.rho[k];
                sm.j1[k] += p.j1[k];
                sm.j2[k] += p.j2[k];
                out.number[k] += p.number[k];
                out.sigma_plus[k] += p.sigma_plus[k];
                out.sigma_minus[k] += p.sigma_minus[k];
                out.stress[k] += p.stress[k];
            }
        }
        for k in 0..n_nodes {
            out.rho[k] += sm.rho[k];
            out.j1[k] += sm.j1[k];
            out.j2[k] += sm.j2[k];
        }
        out.per_species.push(sm);
    }
    out
}

#[inline]
fn gather(grid: &Grid1d, f: &FieldSample, x: f64) -> (f64, f64, f64) {
    let (k, theta) = grid.locate(x);
    let a = 1.0 - theta;
    (
        a * f.e1[k] + theta * f.e1[k + 1],
        a * f.e2[k] + theta * f.e2[k + 1],
        a * f.b[k] + theta * f.b[k + 1],
    )
}

/// Lorentz force on momentum: q (E1 + v̂2 B, E2 - v̂1 B).
#[inline]
fn force(q: f64, vh1: f64, vh2: f64, e1: f64, e2: f64, b: f64) -> (f64, f64) {
    (q * (e1 + vh2 * b), q * (e2 - vh1 * b))
}

/// Predictor deposit: charge density and transverse current of the
/// particles advanced half a step with frozen start-of-step fields.
/// Particles are not modified.
pub fn predictor_deposit(
    particles: &[ParticleArray],
    species: &[SpeciesSpec],
    start: &FieldSample,
    grid: &Grid1d,
    dt: f64,
    forces_enabled: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n_nodes = grid.n_nodes();
    let inv_dx = 1.0 / grid.dx();
    let half = 0.5 * dt;
    let mut rho = vec![0.0; n_nodes];
    let mut j2 = vec![0.0; n_nodes];

    for (s, arr) in species.iter().zip(particles) {
        let q = s.charge;
        let mass = s.mass;
        let partials: Vec<(Vec<f64>, Vec<f64>)> = chunk_ranges(arr.len())
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut pr = vec![0.0; n_nodes];
                let mut pj = vec![0.0; n_nodes];
                for i in lo..hi {
                    let (x, v1, v2) = (arr.x[i], arr.v1[i], arr.v2[i]);
                    let energy = mass_shell_energy(v1, v2, mass);
                    let (vh1, vh2) = (v1 / energy, v2 / energy);
                    let (mut u1, mut u2) = (v1, v2);
                    if forces_enabled {
                        let (e1, e2, b) = gather(grid, start, x);
                        let (f1, f2) = force(q, vh1, vh2, e1, e2, b);
                        u1 += half * f1;
                        u2 += half * f2;
                    }
                    let xh = x + half * vh1;
                    let eh = mass_shell_energy(u1, u2, mass);
                    let (k, theta) = grid.locate(xh);
                    let base = arr.w[i] * inv_dx;
                    let uh2 = u2 / eh;
                    pr[k] += q * base * (1.0 - theta);
                    pr[k + 1] += q * base * theta;
                    pj[k] += q * base * (1.0 - theta) * uh2;
                    pj[k + 1] += q * base * theta * uh2;
                }
                (pr, pj)
            })
            .collect();
        for (pr, pj) in partials {
            for k in 0..n_nodes {
                rho[k] += pr[k];
                j2[k] += pj[k];
            }
        }
    }
    (rho, j2)
}

/// Advance every particle one step of the explicit midpoint scheme.
///
/// Stage one takes a half step with start-of-step fields; stage two applies
/// the full step with the force evaluated at the half-step position and
/// momentum using the midpoint-time fields. The momentum formulation keeps
/// |v̂| < 1 regardless of step size.
pub fn push_step(
    particles: &mut [ParticleArray],
    species: &[SpeciesSpec],
    start: &FieldSample,
    mid: &FieldSample,
    grid: &Grid1d,
    dt: f64,
    forces_enabled: bool,
) -> Result<(), PushError> {
    let half = 0.5 * dt;
    let lo_bound = grid.x_min() + grid.dx();
    let hi_bound = grid.x_max() - grid.dx();

    for (si, (s, arr)) in species.iter().zip(particles.iter_mut()).enumerate() {
        let q = s.charge;
        let mass = s.mass;
        let n = arr.x.len();
        let xs = arr.x.par_chunks_mut(CHUNK);
        let v1s = arr.v1.par_chunks_mut(CHUNK);
        let v2s = arr.v2.par_chunks_mut(CHUNK);
        let bad = xs
            .zip(v1s)
            .zip(v2s)
            .map(|((xc, v1c), v2c)| {
                let mut worst: Option<f64> = None;
                for i in 0..xc.len() {
                    let (x, v1, v2) = (xc[i], v1c[i], v2c[i]);
                    let energy = mass_shell_energy(v1, v2, mass);
                    let (vh1, vh2) = (v1 / energy, v2 / energy);

                    let (mut u1, mut u2) = (v1, v2);
                    if forces_enabled {
                        let (e1, e2, b) = gather(grid, start, x);
                        let (f1, f2) = force(q, vh1, vh2, e1, e2, b);
                        u1 += half * f1;
                        u2 += half * f2;
                    }
                    let xh = x + half * vh1;

                    let eh = mass_shell_energy(u1, u2, mass);
                    let (uh1, uh2) = (u1 / eh, u2 / eh);
                    let (mut w1, mut w2) = (v1, v2);
                    if forces_enabled {
                        let (e1, e2, b) = gather(grid, mid, xh);
                        let (f1, f2) = force(q, uh1, uh2, e1, e2, b);
                        w1 += dt * f1;
                        w2 += dt * f2;
                    }
                    let xn = x + dt * uh1;
                    if xn < lo_bound || xn > hi_bound {
                        worst = Some(xn);
                    }
                    xc[i] = xn;
                    v1c[i] = w1;
                    v2c[i] = w2;
                }
                worst
            })
            .reduce(|| None, |a, b| a.or(b));
        let _ = n;
        if let Some(x) = bad {
            return Err(PushError::OutOfDomain { species: si, x });
        }
    }
    Ok(())
}

/// Maximum |v1| and |v2| over all particles.
pub fn momentum_extents(particles: &[ParticleArray]) -> (f64, f64) {
    let mut m1 = 0.0f64;
    let mut m2 = 0.0f64;
    for arr in particles {
        let (a, b) = chunk_ranges(arr.len())
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut a = 0.0f64;
                let mut b = 0.0f64;
                for i in lo..hi {
                    a = a.max(arr.v1[i].abs());
                    b = b.max(arr.v2[i].abs());
                }
                (a, b)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0f64, 0.0f64), |(a, b), (c, d)| (a.max(c), b.max(d)));
        m1 = m1.max(a);
        m2 = m2.max(b);
    }
    (m1, m2)
}

/// Chunk-ordered parallel sum of `f(i)` over one particle array; bitwise
/// independent of the worker count.
pub fn ordered_particle_sum(arr: &ParticleArray, f: impl Fn(&ParticleArray, usize) -> f64 + Sync) -> f64 {
    chunk_ranges(arr.len())
        .into_par_iter()
        .map(|(lo, hi)| (lo..hi).map(|i| f(arr, i)).sum::<f64>())
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}

/// Fixed subset of particles whose trajectories and transverse invariant
/// are recorded over the whole run.
#[derive(Clone, Debug)]
pub struct TracerSet {
    /// (species index, particle index) pairs, fixed at startup.
    pub members: Vec<(usize, usize)>,
}

impl TracerSet {
    /// Deterministically spread `count` tracers across all particles.
    pub fn select(particles: &[ParticleArray], count: usize) -> TracerSet {
        let total: usize = particles.iter().map(ParticleArray::len).sum();
        let count = count.min(total);
        let mut members = Vec::with_capacity(count);
        if count == 0 || total == 0 {
            return TracerSet { members };
        }
        for j in 0..count {
            let mut flat = j * total / count;
            for (si, arr) in particles.iter().enumerate() {
                if flat < arr.len() {
                    members.push((si, flat));
                    break;
                }
                flat -= arr.len();
            }
        }
        TracerSet { members }
    }
}

/// One recorded tracer sample: state plus the transverse invariant
/// I = v2 + q A(t, x).
#[derive(Clone, Debug)]
pub struct TracerRow {
    pub tracer: usize,
    pub species: usize,
    pub t: f64,
    pub x: f64,
    pub v1: f64,
    pub v2: f64,
    pub invariant: f64,
}

/// Sample every tracer against the current vector potential.
pub fn record_tracers(
    tracers: &TracerSet,
    particles: &[ParticleArray],
    species: &[SpeciesSpec],
    vector_potential: &[f64],
    grid: &Grid1d,
    t: f64,
) -> Vec<TracerRow> {
    tracers
        .members
        .iter()
        .enumerate()
        .map(|(id, &(si, pi))| {
            let arr = &particles[si];
            let a = grid.interp(vector_potential, arr.x[pi]);
            TracerRow {
                tracer: id,
                species: si,
                t,
                x: arr.x[pi],
                v1: arr.v1[pi],
                v2: arr.v2[pi],
                invariant: arr.v2[pi] + species[si].charge * a,
            }
        })
        .collect()
}
