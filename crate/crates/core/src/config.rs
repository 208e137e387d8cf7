//! Run configuration and its validation.
//!
//! The time step is pinned to the cell width (unit CFL) so the transverse
//! field transport is an exact node shift; `validate` enforces this together
//! with the domain-sizing rule that keeps compactly supported data away from
//! the boundary for the whole run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid1d;
use crate::scenario::InitialData;

fn default_stride() -> usize {
    1
}

/// Numerical configuration of one run: domain, resolution, duration,
/// sampling, and diagnostic layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    /// Time step; when omitted it is set to the cell width. A value that
    /// differs from the cell width is rejected.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_final: f64,
    pub particles_per_species: usize,
    #[serde(default)]
    pub rng_seed: u64,
    /// Steps between full diagnostic rows.
    #[serde(default = "default_stride")]
    pub diagnostic_stride: usize,
    /// Steps between field snapshot files; 0 writes only the final state.
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Light-cone balance anchors as (T, x) pairs.
    #[serde(default)]
    pub cone_anchors: Vec<(f64, f64)>,
    #[serde(default)]
    pub tracer_count: usize,
    /// Initial support radius; filled from the scenario when omitted.
    #[serde(default)]
    pub support_radius_c0: Option<f64>,
    /// Pass/fail checks evaluated at the end of the run.
    #[serde(default)]
    pub checks: Checks,
}

/// Optional run-level checks; a verdict is recorded only for fields that are
/// set. Tolerances that scale with a problem quantity say so in their name.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    /// Relative drift bound on the total energy integral.
    #[serde(default)]
    pub energy_drift_tol: Option<f64>,
    /// Drift bound on total momentum, relative to the initial total energy.
    #[serde(default)]
    pub momentum_drift_tol: Option<f64>,
    /// Relative closure error bound for each cone anchor.
    #[serde(default)]
    pub cone_identity_tol: Option<f64>,
    /// Tracer invariant drift bound, in units of (1 + max|A|).
    #[serde(default)]
    pub tracer_invariant_tol: Option<f64>,
    /// Allowed dip of mu below its analytic floor, in units of M.
    #[serde(default)]
    pub mu_floor_slack: Option<f64>,
    /// Per-stride monotonicity tolerance for mu and the window energy,
    /// in units of M.
    #[serde(default)]
    pub mu_monotonic_tol: Option<f64>,
    /// Relative error bound on the forward segment balance.
    #[serde(default)]
    pub segment_identity_tol: Option<f64>,
    /// Allowed relative shortfall of max|rho| below floor/(C0-x0).
    #[serde(default)]
    pub rho_inf_slack: Option<f64>,
    /// Relative mismatch bound between dD/dt and the dilation right side.
    #[serde(default)]
    pub dilation_rel_tol: Option<f64>,
    /// Require the dilation right side to stay positive.
    #[serde(default)]
    pub dilation_rhs_positive: Option<bool>,
    /// Relative bound on |E1(x_max) - M/2| against the gross charge scale.
    #[serde(default)]
    pub plateau_rel_tol: Option<f64>,
    /// Enable the pointwise nonnegativity suite (e, e±m, e∓2m+l, sigma±).
    #[serde(default)]
    pub nonnegativity: Option<bool>,
    /// Upper bounds on fitted growth exponents of the named series.
    #[serde(default)]
    pub max_v1_exponent: Option<f64>,
    #[serde(default)]
    pub max_v2_exponent: Option<f64>,
    #[serde(default)]
    pub ratio_exponent_max: Option<f64>,
    #[serde(default)]
    pub lemma_ratio_exponent_max: Option<f64>,
    /// Time window for the exponent fits; defaults to the final 80% of the
    /// run in log time.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

impl SimConfig {
    pub fn grid(&self) -> Grid1d {
        Grid1d::new(self.x_min, self.x_max, self.n_cells)
    }

    /// Effective time step: the cell width.
    pub fn step(&self) -> f64 {
        self.grid().dx()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.step()).round() as usize
    }
}

/// Validate the configuration against the scenario it will run.
///
/// Collects every violated invariant instead of stopping at the first, and
/// fills `support_radius_c0` from the initial data when absent.
pub fn validate_config(cfg: &SimConfig, data: &InitialData) -> Result<SimConfig, ConfigError> {
    let mut errs = Vec::new();
    let mut out = cfg.clone();

    if !(cfg.x_max > cfg.x_min) {
        errs.push(format!("x_max ({}) must exceed x_min ({})", cfg.x_max, cfg.x_min));
    }
    if cfg.n_cells == 0 {
        errs.push("n_cells must be positive".into());
    }
    if !(cfg.t_final >= 0.0) {
        errs.push(format!("t_final ({}) must be >= 0", cfg.t_final));
    }
    if cfg.particles_per_species == 0 && data.explicit_particles.is_none() {
        errs.push("particles_per_species must be positive".into());
    }
    if cfg.diagnostic_stride == 0 {
        errs.push("diagnostic_stride must be positive".into());
    }
    if data.species.is_empty() {
        errs.push("empty-species: scenario defines no species".into());
    }
    for s in &data.species {
        errs.extend(s.violations());
    }

    if errs.is_empty() {
        let grid = cfg.grid();
        let dx = grid.dx();
        if let Some(dt) = cfg.dt {
            if !((dt - dx).abs() <= 1e-12 * dx) {
                errs.push(format!(
                    "dt-neq-dx: dt ({dt}) must equal the cell width ({dx}); omit dt to take the default"
                ));
            }
        }
        out.dt = Some(dx);

        let c0 = cfg.support_radius_c0.unwrap_or(data.support_radius);
        if c0 < data.support_radius {
            errs.push(format!(
                "support_radius_c0 ({c0}) is smaller than the scenario support radius ({})",
                data.support_radius
            ));
        }
        out.support_radius_c0 = Some(c0);

        // Compact supports propagate at most at speed one; the domain must
        // hold the full light cone of the data plus a deposition margin.
        let reach = c0 + cfg.t_final + 2.0 * dx;
        if cfg.x_min > -reach || cfg.x_max < reach {
            errs.push(format!(
                "domain-too-small: need [-{reach}, {reach}] inside [{}, {}]",
                cfg.x_min, cfg.x_max
            ));
        }

        for &(t_anchor, x_anchor) in &cfg.cone_anchors {
            if t_anchor <= 0.0 || t_anchor > cfg.t_final {
                errs.push(format!(
                    "cone anchor (T={t_anchor}, x={x_anchor}): T must lie in (0, t_final]"
                ));
            }
            if x_anchor - t_anchor < cfg.x_min || x_anchor + t_anchor > cfg.x_max {
                errs.push(format!(
                    "cone-foot-outside-domain: anchor (T={t_anchor}, x={x_anchor})"
                ));
            }
        }
    }

    if errs.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}
