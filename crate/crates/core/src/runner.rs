//! The main simulation loop and run-level bookkeeping.
//!
//! Per step: (1) predictor half-push deposit of charge and transverse
//! current; (2) light-cone field step sourced by the start/end current
//! trapezoid; (3) midpoint-field particle push; (4) fresh deposit, E1
//! solve, vector potential; (5) diagnostics. The longitudinal field is
//! recomputed from the cumulative charge integral every step, never time
//! integrated.
//!
//! Determinism: deposits and particle reductions are merged in fixed chunk
//! order, field scans are sequential, so output bytes do not depend on the
//! worker count.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::config::{validate_config, Checks, ConfigError, SimConfig};
use crate::diagnostics::{
    compute_densities, compute_nondecay, conservation_residuals, dilation_identity,
    fit_growth_exponent, lemma_ratio, nonnegativity_worst, support_radii, ConeAccumulator,
    ConeError, DensitiesRecord, FitError, NondecayError, SegmentAccumulator,
};
use crate::fields::{
    continuity_residual, solve_e1, step_light_cone, trapezoid_total, vector_potential, FieldError,
    FieldState,
};
use crate::grid::Grid1d;
use crate::ledger::{DiagnosticsLedger, LedgerRow};
use crate::particles::{
    deposit_moments, momentum_extents, predictor_deposit, push_step, record_tracers,
    sample_from_density, FieldSample, MomentGrid, ParticleArray, PushError, SampleError,
    TracerRow, TracerSet,
};
use crate::scenario::{
    build_free_stream, build_monocharge_nondecay, build_neutral, BumpProfile, InitialData,
    NondecayParams, NondecayReport, PulseProfile, QuadratureSpec, ScenarioError, SeedParticle,
};
use crate::species::SpeciesSpec;

/// Declarative scenario description as it appears in a config document.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesDef {
    pub label: String,
    pub mass: f64,
    pub charge: f64,
    pub profiles: Vec<BumpProfile>,
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutralSpec {
    pub species: Vec<SpeciesDef>,
    #[serde(default)]
    pub e20: Vec<PulseProfile>,
    #[serde(default)]
    pub b0: Vec<PulseProfile>,
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NondecaySpec {
    pub params: NondecayParams,
    /// Optional increasing boost candidates for the scan subcommand.
    #[serde(default)]
    pub w_candidates: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeStreamSpec {
    pub species: Vec<SpeciesSpec>,
    pub particles: Vec<SeedParticle>,
}

#[derive(Clone, Debug, Serialize)]
pub enum ScenarioSpec {
    Neutral(NeutralSpec),
    MonochargeNondecay(NondecaySpec),
    FreeStream(FreeStreamSpec),
}

impl ScenarioSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioSpec::Neutral(_) => "neutral",
            ScenarioSpec::MonochargeNondecay(_) => "monocharge_nondecay",
            ScenarioSpec::FreeStream(_) => "free_stream",
        }
    }
}

/// A full run description: numerical configuration plus scenario.
#[derive(Clone, Debug, Serialize)]
pub struct RunSpec {
    pub sim: SimConfig,
    pub scenario: ScenarioSpec,
}

/// Scenario assembled into initial data (plus certificates when present).
pub struct PreparedScenario {
    pub data: InitialData,
    pub nondecay: Option<NondecayReport>,
}

pub fn build_scenario(
    spec: &ScenarioSpec,
    quad: &QuadratureSpec,
) -> Result<PreparedScenario, ScenarioError> {
    match spec {
        ScenarioSpec::Neutral(n) => {
            if n.species.len() != 2 {
                return Err(ScenarioError::Invalid(vec![format!(
                    "neutral scenario needs exactly two species, got {}",
                    n.species.len()
                )]));
            }
            let sp = [
                SpeciesSpec::new(n.species[0].label.clone(), n.species[0].mass, n.species[0].charge),
                SpeciesSpec::new(n.species[1].label.clone(), n.species[1].mass, n.species[1].charge),
            ];
            let profiles = [n.species[0].profiles.clone(), n.species[1].profiles.clone()];
            let data = build_neutral(sp, profiles, n.e20.clone(), n.b0.clone(), quad)?;
            Ok(PreparedScenario {
                data,
                nondecay: None,
            })
        }
        ScenarioSpec::MonochargeNondecay(m) => {
            let (data, report) = build_monocharge_nondecay(&m.params, quad)?;
            Ok(PreparedScenario {
                data,
                nondecay: Some(report),
            })
        }
        ScenarioSpec::FreeStream(f) => Ok(PreparedScenario {
            data: build_free_stream(f.species.clone(), f.particles.clone()),
            nondecay: None,
        }),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("sampling failed: {0}")]
    Sample(#[from] SampleError),
    #[error("step {step}, phase {phase}: {source}")]
    Push {
        step: usize,
        phase: &'static str,
        source: PushError,
    },
    #[error("step {step}, phase {phase}: {source}")]
    Field {
        step: usize,
        phase: &'static str,
        source: FieldError,
    },
    #[error("diagnostic setup: {0}")]
    Cone(#[from] ConeError),
    #[error("step {step}: {source}")]
    Window { step: usize, source: NondecayError },
    #[error("free-stream seed at x = {0} is outside the usable domain")]
    SeedOutsideDomain(f64),
}

/// Fit outcome for one monitored series.
#[derive(Clone, Debug, Serialize)]
pub struct FitSummary {
    pub exponent: Option<f64>,
    pub amplitude: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// End-of-run summary: certificates, drifts, worst-case monitors, fitted
/// exponents, and the verdict of every enabled check.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario_kind: String,
    pub t_final: f64,
    pub steps: usize,
    pub particles_per_species: Vec<usize>,
    pub quadrature: QuadratureSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_min_observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions_4_1: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions_4_2: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondecay: Option<NondecayReport>,
    pub total_charge: f64,
    pub energy_drift_rel: f64,
    pub momentum_drift_rel: f64,
    pub cone_final_errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracer_max_drift_normalized: Option<f64>,
    pub max_abs_a: f64,
    pub plateau_worst_rel: f64,
    pub nonnegativity_worst: f64,
    pub continuity_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_forward_max_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_backward_max_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_worst_increase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_energy_worst_increase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_inf_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dilation_max_rel_mismatch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dilation_rhs_min: Option<f64>,
    pub fits: BTreeMap<String, FitSummary>,
    pub checks: BTreeMap<String, bool>,
    pub all_checks_passed: bool,
}

/// Run provenance: resolved configuration, versions, timings, verdicts,
/// and (once persisted) the emitted artifact paths.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub code_version: String,
    pub scenario_kind: String,
    pub workers: usize,
    pub steps: usize,
    pub config: SimConfig,
    pub timings_s: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub verdicts: BTreeMap<String, bool>,
}

/// A field snapshot captured mid-run.
pub struct FieldSnapshotData {
    pub step: usize,
    pub t: f64,
    pub fields: FieldState,
}

/// Everything a run produces, in memory; persistence is separate.
pub struct RunOutput {
    pub config: SimConfig,
    pub grid: Grid1d,
    pub species: Vec<SpeciesSpec>,
    pub scenario_kind: String,
    pub ledger: DiagnosticsLedger,
    pub tracer_rows: Vec<TracerRow>,
    /// Per-step samples (t, D, RHS) of the dilation functional.
    pub dilation_series: Vec<(f64, f64, f64)>,
    pub report: RunReport,
    pub manifest: RunManifest,
    pub final_particles: Vec<ParticleArray>,
    pub final_fields: FieldState,
    pub snapshots: Vec<FieldSnapshotData>,
}

struct Timings {
    map: BTreeMap<String, f64>,
}

impl Timings {
    fn new() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }
    fn add(&mut self, phase: &str, since: Instant) -> Instant {
        *self.map.entry(phase.to_string()).or_insert(0.0) += since.elapsed().as_secs_f64();
        Instant::now()
    }
}

/// Execute a run on a dedicated worker pool.
pub fn run(spec: &RunSpec, workers: usize) -> Result<RunOutput, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool");
    pool.install(|| run_inner(spec, workers))
}

fn quadrature_for(cfg: &SimConfig) -> QuadratureSpec {
    let per_unit = (4.0 * cfg.n_cells as f64 / (cfg.x_max - cfg.x_min)).ceil() as usize;
    QuadratureSpec {
        cells_x_per_unit: per_unit.max(64),
        cells_v: 192,
    }
}

fn run_inner(spec: &RunSpec, workers: usize) -> Result<RunOutput, RunError> {
    let mut timings = Timings::new();
    let t_start = Instant::now();
    let mut mark = Instant::now();

    let quad = quadrature_for(&spec.sim);
    let prepared = build_scenario(&spec.scenario, &quad)?;
    let data = &prepared.data;
    let cfg = validate_config(&spec.sim, data)?;
    let grid = cfg.grid();
    let dt = grid.dx();
    let steps = cfg.n_steps();
    let stride = cfg.diagnostic_stride;
    let species = data.species.clone();
    let c0 = cfg.support_radius_c0.expect("filled by validation");

    // --- particles ---
    let mut particles: Vec<ParticleArray> = (0..species.len())
        .map(|s| sample_from_density(data, s, cfg.particles_per_species, cfg.rng_seed))
        .collect::<Result<_, _>>()?;
    if data.explicit_particles.is_some() {
        let lo = grid.x_min() + 2.0 * grid.dx();
        let hi = grid.x_max() - 2.0 * grid.dx();
        for arr in &particles {
            for &x in &arr.x {
                if x < lo || x > hi {
                    return Err(RunError::SeedOutsideDomain(x));
                }
            }
        }
    }
    // Neutral scenarios: pin the sampled charges to exact cancellation so
    // the longitudinal plateaus sit at zero to rounding.
    if spec.scenario.kind() == "neutral" && species.len() == 2 {
        let w0 = particles[0].total_weight();
        let target = -species[0].charge * w0 / species[1].charge;
        particles[1].rescale_total_weight(target);
    }
    let total_charge: f64 = species
        .iter()
        .zip(&particles)
        .map(|(s, p)| s.charge * p.total_weight())
        .sum();
    let gross_charge: f64 = species
        .iter()
        .zip(&particles)
        .map(|(s, p)| s.charge.abs() * p.total_weight())
        .sum();
    let tracers = TracerSet::select(&particles, cfg.tracer_count);

    // --- initial fields and diagnostics state ---
    let mut moments = deposit_moments(&particles, &species, &grid);
    let mut fields = FieldState::from_initial(data, &grid);
    fields.e1 = solve_e1(&moments.rho, trapezoid_total(&moments.rho, dt), dt);
    fields.a = vector_potential(&fields.b_array(), dt);
    let mut densities = compute_densities(&moments, &fields);

    let mut cones: Vec<ConeAccumulator> = cfg
        .cone_anchors
        .iter()
        .map(|&(t_a, x_a)| ConeAccumulator::new(t_a, x_a, &grid, dt, &densities))
        .collect::<Result<_, _>>()?;
    let is_mono = prepared.nondecay.is_some();
    let mut segments = prepared
        .nondecay
        .as_ref()
        .map(|r| SegmentAccumulator::new(r.x0, r.c0, &grid, dt, &densities));

    let mut ledger = DiagnosticsLedger::new(cones.len());
    let mut tracer_rows: Vec<TracerRow> = Vec::new();
    let mut dilation_series: Vec<(f64, f64, f64)> = Vec::new();
    let mut snapshots: Vec<FieldSnapshotData> = Vec::new();

    let energy0 = grid.trapezoid(&densities.e);
    let momentum0 = grid.trapezoid(&densities.m);
    let mut energy_drift = 0.0f64;
    let mut momentum_drift = 0.0f64;
    let mut plateau_worst = 0.0f64;
    let mut nonneg_worst = f64::INFINITY;
    let mut continuity_max = 0.0f64;
    let mut max_abs_a = 0.0f64;
    let mut seg_fwd_max = 0.0f64;
    let mut seg_bwd_max = 0.0f64;
    let mut mu_min = f64::INFINITY;
    let mut mu_prev = f64::NAN;
    let mut we_prev = f64::NAN;
    let mut mu_worst_inc = f64::NEG_INFINITY;
    let mut we_worst_inc = f64::NEG_INFINITY;
    let mut rho_inf_min = f64::INFINITY;

    let plateau_error = |fields: &FieldState| -> f64 {
        let last = *fields.e1.last().unwrap();
        (last - 0.5 * total_charge).abs() / gross_charge.max(f64::MIN_POSITIVE)
    };

    mark = timings.add("setup", mark);

    // emit the initial diagnostics row (step 0)
    let mut emit_row = |step: usize,
                        t: f64,
                        moments: &MomentGrid,
                        densities: &DensitiesRecord,
                        prev_densities: Option<&DensitiesRecord>,
                        continuity: f64,
                        fields: &FieldState,
                        particles: &[ParticleArray],
                        cones: &[ConeAccumulator],
                        segments: &Option<SegmentAccumulator>,
                        ledger: &mut DiagnosticsLedger,
                        tracer_rows: &mut Vec<TracerRow>|
     -> Result<(), RunError> {
        let (r1, r2) = match prev_densities {
            Some(p) => conservation_residuals(p, densities, dt, grid.dx()),
            None => (0.0, 0.0),
        };
        let sup = support_radii(particles, t, c0);
        let lemma = lemma_ratio(moments);
        let dil = dilation_identity(particles, &species, fields, moments, &grid);
        let a_max = fields.a.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        max_abs_a = max_abs_a.max(a_max);

        let (mu, window_energy, floor) = if let Some(rep) = &prepared.nondecay {
            let rec = compute_nondecay(moments, densities, &grid, t, rep.x0, rep.c0, rep.mu_floor)
                .map_err(|source| RunError::Window { step, source })?;
            mu_min = mu_min.min(rec.mu);
            if mu_prev.is_finite() {
                mu_worst_inc = mu_worst_inc.max(rec.mu - mu_prev);
                we_worst_inc = we_worst_inc.max(rec.window_energy - we_prev);
            }
            mu_prev = rec.mu;
            we_prev = rec.window_energy;
            let rho_inf = moments.rho.iter().fold(0.0f64, |a, &v| a.max(v));
            rho_inf_min = rho_inf_min.min(rho_inf);
            (rec.mu, rec.window_energy, rec.mu_floor)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };

        let (seg_f, seg_b) = match segments {
            Some(acc) => {
                let (f, b) = acc.errors(densities, &grid, t);
                seg_fwd_max = seg_fwd_max.max(f);
                seg_bwd_max = seg_bwd_max.max(b);
                (f, b)
            }
            None => (f64::NAN, f64::NAN),
        };

        let te = grid.trapezoid(&densities.e);
        let tm = grid.trapezoid(&densities.m);
        energy_drift = energy_drift.max((te - energy0).abs() / energy0.abs().max(f64::MIN_POSITIVE));
        momentum_drift =
            momentum_drift.max((tm - momentum0).abs() / energy0.abs().max(f64::MIN_POSITIVE));
        nonneg_worst = nonneg_worst.min(nonnegativity_worst(densities, moments));
        continuity_max = continuity_max.max(continuity);

        tracer_rows.extend(record_tracers(
            &tracers, particles, &species, &fields.a, &grid, t,
        ));

        ledger.rows.push(LedgerRow {
            t,
            total_energy: te,
            total_momentum: tm,
            r1,
            r2,
            cone_balance: cones.iter().map(|c| c.running_balance(densities, &grid)).collect(),
            mu,
            window_energy,
            mu_floor: floor,
            max_v1: sup.max_v1,
            max_v2: sup.max_v2,
            v1_ratio: sup.v1_ratio,
            v2_ratio: sup.v2_ratio,
            lemma_ratio: lemma,
            dilation_d: dil.d,
            dilation_rhs: dil.rhs,
            continuity,
            seg_forward_err: seg_f,
            seg_backward_err: seg_b,
            max_abs_a: a_max,
        });
        Ok(())
    };

    emit_row(
        0,
        0.0,
        &moments,
        &densities,
        None,
        0.0,
        &fields,
        &particles,
        &cones,
        &segments,
        &mut ledger,
        &mut tracer_rows,
    )?;
    {
        let dil = dilation_identity(&particles, &species, &fields, &moments, &grid);
        dilation_series.push((0.0, dil.d, dil.rhs));
    }
    plateau_worst = plateau_worst.max(plateau_error(&fields));
    if cfg.snapshot_stride > 0 {
        snapshots.push(FieldSnapshotData {
            step: 0,
            t: 0.0,
            fields: fields.clone(),
        });
    }
    mark = timings.add("diagnostics", mark);

    // --- main loop ---
    for n in 0..steps {
        let step = n + 1;
        let t_new = step as f64 * dt;

        // predictor deposit at the half step
        let start_sample = FieldSample {
            e1: fields.e1.clone(),
            e2: fields.e2_array(),
            b: fields.b_array(),
        };
        let (rho_half, j2_half) = predictor_deposit(
            &particles,
            &species,
            &start_sample,
            &grid,
            dt,
            data.forces_enabled,
        );
        mark = timings.add("deposit", mark);

        // transverse field step with the trapezoid of start/end currents
        let j2_end: Vec<f64> = j2_half
            .iter()
            .zip(&moments.j2)
            .map(|(h, s)| 2.0 * h - s)
            .collect();
        step_light_cone(&mut fields.gp, &mut fields.gm, &moments.j2, &j2_end, dt, grid.dx())
            .map_err(|source| RunError::Field {
                step,
                phase: "light-cone",
                source,
            })?;
        let e1_mid = solve_e1(&rho_half, trapezoid_total(&rho_half, dt), dt);
        let mid_sample = FieldSample {
            e1: e1_mid,
            e2: fields
                .e2_array()
                .iter()
                .zip(&start_sample.e2)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
            b: fields
                .b_array()
                .iter()
                .zip(&start_sample.b)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        };
        mark = timings.add("fields", mark);

        push_step(
            &mut particles,
            &species,
            &start_sample,
            &mid_sample,
            &grid,
            dt,
            data.forces_enabled,
        )
        .map_err(|source| RunError::Push {
            step,
            phase: "push",
            source,
        })?;
        mark = timings.add("push", mark);

        // fresh moments and fields at the new time
        let prev_e1 = std::mem::take(&mut fields.e1);
        let prev_j1 = std::mem::replace(&mut moments.j1, Vec::new());
        let prev_densities = densities;
        moments = deposit_moments(&particles, &species, &grid);
        fields.e1 = solve_e1(&moments.rho, trapezoid_total(&moments.rho, dt), dt);
        fields.a = vector_potential(&fields.b_array(), dt);
        densities = compute_densities(&moments, &fields);
        mark = timings.add("deposit", mark);

        for cone in &mut cones {
            cone.update(&densities, &grid);
        }
        if let Some(seg) = &mut segments {
            seg.update(&densities, &grid);
        }
        {
            let dil = dilation_identity(&particles, &species, &fields, &moments, &grid);
            dilation_series.push((t_new, dil.d, dil.rhs));
        }
        plateau_worst = plateau_worst.max(plateau_error(&fields));

        if step % stride == 0 || step == steps {
            let continuity = continuity_residual(&fields.e1, &prev_e1, &moments.j1, &prev_j1, dt);
            emit_row(
                step,
                t_new,
                &moments,
                &densities,
                Some(&prev_densities),
                continuity,
                &fields,
                &particles,
                &cones,
                &segments,
                &mut ledger,
                &mut tracer_rows,
            )?;
        }
        if cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0 {
            snapshots.push(FieldSnapshotData {
                step,
                t: t_new,
                fields: fields.clone(),
            });
        }
        mark = timings.add("diagnostics", mark);
    }

    // --- end-of-run summary ---
    let is_neutral = spec.scenario.kind() == "neutral";
    let _ = is_neutral;
    let (fit_lo, fit_hi) = cfg.checks.fit_window.unwrap_or_else(|| {
        // final 80% of the run in log time
        let t_first = ledger
            .rows
            .iter()
            .map(|r| r.t)
            .find(|&t| t > 0.0)
            .unwrap_or(dt);
        let hi = cfg.t_final.max(t_first * 2.0);
        let lo = (t_first.ln() + 0.2 * (hi.ln() - t_first.ln())).exp();
        (lo, hi)
    });

    let mut fits = BTreeMap::new();
    for name in ["max_v1", "max_v2", "v1_ratio", "v2_ratio", "lemma_ratio"] {
        let series = ledger.series(name).unwrap_or_default();
        let fit = fit_growth_exponent(&series, fit_lo, fit_hi);
        fits.insert(
            name.to_string(),
            match fit {
                Ok(f) => FitSummary {
                    exponent: Some(f.exponent),
                    amplitude: Some(f.amplitude),
                    samples: f.samples,
                    error: None,
                },
                Err(FitError::WindowTooSmall { found }) => FitSummary {
                    exponent: None,
                    amplitude: None,
                    samples: found,
                    error: Some("window-too-small".into()),
                },
                Err(FitError::NonpositiveValues) => FitSummary {
                    exponent: None,
                    amplitude: None,
                    samples: 0,
                    error: Some("nonpositive-values".into()),
                },
            },
        );
    }

    // dilation mismatch: centered differences against the recorded RHS
    let (dilation_mismatch, dilation_rhs_min) = if dilation_series.len() >= 3 {
        let rhs_max = dilation_series
            .iter()
            .map(|&(_, _, r)| r.abs())
            .fold(0.0f64, f64::max);
        let mut worst = 0.0f64;
        for i in 1..dilation_series.len() - 1 {
            let (t0, d0, _) = dilation_series[i - 1];
            let (_, _, rhs) = dilation_series[i];
            let (t2, d2, _) = dilation_series[i + 1];
            if rhs.abs() > 0.01 * rhs_max {
                let deriv = (d2 - d0) / (t2 - t0);
                worst = worst.max((deriv - rhs).abs() / rhs.abs());
            }
        }
        let rhs_min = dilation_series
            .iter()
            .map(|&(_, _, r)| r)
            .fold(f64::INFINITY, f64::min);
        (Some(worst), Some(rhs_min))
    } else {
        (None, None)
    };

    let tracer_drift = if tracer_rows.is_empty() {
        None
    } else {
        let mut firsts: BTreeMap<usize, f64> = BTreeMap::new();
        let mut worst = 0.0f64;
        for row in &tracer_rows {
            let base = *firsts.entry(row.tracer).or_insert(row.invariant);
            worst = worst.max((row.invariant - base).abs());
        }
        Some(worst / (1.0 + max_abs_a))
    };

    let cone_final_errors: Vec<f64> = cones
        .iter()
        .map(|c| c.closure_error().unwrap_or(f64::NAN))
        .collect();

    // --- checks ---
    let mut checks = BTreeMap::new();
    let ck = &cfg.checks;
    let mut add = |name: &str, pass: bool| {
        checks.insert(name.to_string(), pass);
    };
    if let Some(tol) = ck.energy_drift_tol {
        add("energy_drift", energy_drift <= tol);
    }
    if let Some(tol) = ck.momentum_drift_tol {
        add("momentum_drift", momentum_drift <= tol);
    }
    if let Some(tol) = ck.cone_identity_tol {
        add(
            "cone_identity",
            !cone_final_errors.is_empty() && cone_final_errors.iter().all(|e| e.is_finite() && *e <= tol),
        );
    }
    if let Some(tol) = ck.tracer_invariant_tol {
        add(
            "tracer_invariant",
            tracer_drift.map(|d| d <= tol).unwrap_or(false),
        );
    }
    if let Some(tol) = ck.plateau_rel_tol {
        add("e1_plateau", plateau_worst <= tol);
    }
    if ck.nonnegativity == Some(true) {
        let scale = ledger
            .rows
            .iter()
            .map(|r| r.total_energy.abs())
            .fold(1.0f64, f64::max);
        add("nonnegativity", nonneg_worst >= -1e-12 * scale);
    }
    if is_mono {
        let rep = prepared.nondecay.as_ref().unwrap();
        let m = rep.total_mass;
        if let Some(slack) = ck.mu_floor_slack {
            add("mu_floor", mu_min >= rep.mu_floor - slack * m);
        }
        if let Some(tol) = ck.mu_monotonic_tol {
            add(
                "mu_monotonic",
                mu_worst_inc <= tol * m && we_worst_inc <= tol * m,
            );
        }
        if let Some(tol) = ck.segment_identity_tol {
            add("segment_identity", seg_fwd_max <= tol);
        }
        if let Some(slack) = ck.rho_inf_slack {
            let bound = rep.mu_floor / (rep.c0 - rep.x0) * (1.0 - slack);
            add("rho_inf_floor", rho_inf_min >= bound);
        }
        if let Some(tol) = ck.dilation_rel_tol {
            add(
                "dilation_identity",
                dilation_mismatch.map(|w| w <= tol).unwrap_or(false),
            );
        }
        if ck.dilation_rhs_positive == Some(true) {
            add(
                "dilation_rhs_positive",
                dilation_rhs_min.map(|r| r > 0.0).unwrap_or(false),
            );
        }
    }
    let exponent_check = |fits: &BTreeMap<String, FitSummary>, name: &str, bound: f64| -> bool {
        fits.get(name)
            .and_then(|f| f.exponent)
            .map(|e| e <= bound)
            .unwrap_or(false)
    };
    if let Some(b) = ck.max_v1_exponent {
        add("max_v1_exponent", exponent_check(&fits, "max_v1", b));
    }
    if let Some(b) = ck.max_v2_exponent {
        add("max_v2_exponent", exponent_check(&fits, "max_v2", b));
    }
    if let Some(b) = ck.ratio_exponent_max {
        add(
            "ratio_exponents",
            exponent_check(&fits, "v1_ratio", b) && exponent_check(&fits, "v2_ratio", b),
        );
    }
    if let Some(b) = ck.lemma_ratio_exponent_max {
        add("lemma_ratio_exponent", exponent_check(&fits, "lemma_ratio", b));
    }
    let all_checks_passed = checks.values().all(|&v| v);

    let report = RunReport {
        scenario_kind: spec.scenario.kind().to_string(),
        t_final: cfg.t_final,
        steps,
        particles_per_species: particles.iter().map(ParticleArray::len).collect(),
        quadrature: quad,
        mu_floor: prepared.nondecay.as_ref().map(|r| r.mu_floor),
        mu_min_observed: if mu_min.is_finite() { Some(mu_min) } else { None },
        conditions_4_1: prepared.nondecay.as_ref().map(|r| r.conditions_4_1),
        conditions_4_2: prepared.nondecay.as_ref().map(|r| r.conditions_4_2),
        nondecay: prepared.nondecay.clone(),
        total_charge,
        energy_drift_rel: energy_drift,
        momentum_drift_rel: momentum_drift,
        cone_final_errors,
        tracer_max_drift_normalized: tracer_drift,
        max_abs_a,
        plateau_worst_rel: plateau_worst,
        nonnegativity_worst: nonneg_worst,
        continuity_max,
        segment_forward_max_err: segments.as_ref().map(|_| seg_fwd_max),
        segment_backward_max_err: segments.as_ref().map(|_| seg_bwd_max),
        mu_worst_increase: if mu_worst_inc.is_finite() && is_mono {
            Some(mu_worst_inc)
        } else {
            None
        },
        window_energy_worst_increase: if we_worst_inc.is_finite() && is_mono {
            Some(we_worst_inc)
        } else {
            None
        },
        rho_inf_min: if is_mono { Some(rho_inf_min) } else { None },
        dilation_max_rel_mismatch: dilation_mismatch,
        dilation_rhs_min,
        fits,
        checks: checks.clone(),
        all_checks_passed,
    };

    timings.add("total", t_start);
    let manifest = RunManifest {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_kind: spec.scenario.kind().to_string(),
        workers,
        steps,
        config: cfg.clone(),
        timings_s: timings.map,
        artifacts: Vec::new(),
        verdicts: checks,
    };

    Ok(RunOutput {
        config: cfg,
        grid,
        species,
        scenario_kind: spec.scenario.kind().to_string(),
        ledger,
        tracer_rows,
        dilation_series,
        report,
        manifest,
        final_particles: particles,
        final_fields: fields,
        snapshots,
    })
}
