//! Field state and updates: the longitudinal field from the cumulative
//! charge integral, exact unit-CFL transport of the light-cone scalars
//! G± = E2 ± B with a trapezoidal current source, and the vector potential
//! A as the cumulative integral of B.

use thiserror::Error;

use crate::grid::Grid1d;
use crate::scenario::InitialData;

/// Grid fields: E1, the light-cone scalars, and the vector potential.
/// E2 and B are reconstructed views: E2 = (G+ + G-)/2, B = (G+ - G-)/2.
#[derive(Clone, Debug)]
pub struct FieldState {
    pub e1: Vec<f64>,
    pub gp: Vec<f64>,
    pub gm: Vec<f64>,
    pub a: Vec<f64>,
}

impl FieldState {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            e1: vec![0.0; n_nodes],
            gp: vec![0.0; n_nodes],
            gm: vec![0.0; n_nodes],
            a: vec![0.0; n_nodes],
        }
    }

    /// Light-cone scalars from the initial transverse fields; E1 and A are
    /// filled once the first deposit is available.
    pub fn from_initial(data: &InitialData, grid: &Grid1d) -> Self {
        let n = grid.n_nodes();
        let mut f = Self::zeros(n);
        for k in 0..n {
            let x = grid.node_x(k);
            let e2 = data.e20_at(x);
            let b = data.b0_at(x);
            f.gp[k] = e2 + b;
            f.gm[k] = e2 - b;
        }
        f
    }

    #[inline]
    pub fn e2(&self, k: usize) -> f64 {
        0.5 * (self.gp[k] + self.gm[k])
    }

    #[inline]
    pub fn b(&self, k: usize) -> f64 {
        0.5 * (self.gp[k] - self.gm[k])
    }

    pub fn e2_array(&self) -> Vec<f64> {
        (0..self.gp.len()).map(|k| self.e2(k)).collect()
    }

    pub fn b_array(&self) -> Vec<f64> {
        (0..self.gp.len()).map(|k| self.b(k)).collect()
    }
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cfl-violated: dt ({dt}) must equal the cell width ({dx})")]
    CflViolated { dt: f64, dx: f64 },
}

/// Trapezoidal total of a deposited density; the net charge seen by the
/// field solve.
pub fn trapezoid_total(rho: &[f64], dx: f64) -> f64 {
    let n = rho.len();
    let mut s = 0.5 * (rho[0] + rho[n - 1]);
    for &v in &rho[1..n - 1] {
        s += v;
    }
    s * dx
}

/// Longitudinal field from the cumulative charge integral:
/// E1(x_k) = Q(x_k) - M/2 with Q the trapezoidal cumulative integral of rho
/// from the left edge. Equivalent to the split form (Q_left - Q_right)/2
/// when `m_total` is the deposited total, and then E1 at the edges is
/// exactly ∓M/2.
pub fn solve_e1(rho: &[f64], m_total: f64, dx: f64) -> Vec<f64> {
    let half_m = 0.5 * m_total;
    let mut e1 = Vec::with_capacity(rho.len());
    e1.push(-half_m);
    let mut q = 0.0;
    for k in 1..rho.len() {
        q += 0.5 * dx * (rho[k - 1] + rho[k]);
        e1.push(q - half_m);
    }
    e1
}

/// One unit-CFL step of the light-cone scalars.
///
/// G+ advects one node to the right, G- one node to the left, each losing
/// the trapezoid of the transverse current along its characteristic:
/// G+(k) <- G+(k-1) - dt/2 [j2_start(k-1) + j2_end(k)], and mirrored for
/// G-. Inflow nodes receive zero. With j2 = 0 the update is a bit-exact
/// shift.
pub fn step_light_cone(
    gp: &mut Vec<f64>,
    gm: &mut Vec<f64>,
    j2_start: &[f64],
    j2_end: &[f64],
    dt: f64,
    dx: f64,
) -> Result<(), FieldError> {
    if (dt - dx).abs() > 1e-12 * dx {
        return Err(FieldError::CflViolated { dt, dx });
    }
    let n = gp.len();
    let mut new_gp = vec![0.0; n];
    let mut new_gm = vec![0.0; n];
    for k in 1..n {
        new_gp[k] = gp[k - 1] - dt * 0.5 * (j2_start[k - 1] + j2_end[k]);
    }
    for k in 0..n - 1 {
        new_gm[k] = gm[k + 1] - dt * 0.5 * (j2_start[k + 1] + j2_end[k]);
    }
    *gp = new_gp;
    *gm = new_gm;
    Ok(())
}

/// Vector potential A(x_k) = ∫_{x_min}^{x_k} B dy by cumulative trapezoid;
/// A(x_min) = 0. Valid because B has compact support inside the domain.
pub fn vector_potential(b: &[f64], dx: f64) -> Vec<f64> {
    let mut a = Vec::with_capacity(b.len());
    a.push(0.0);
    let mut acc = 0.0;
    for k in 1..b.len() {
        acc += 0.5 * dx * (b[k - 1] + b[k]);
        a.push(acc);
    }
    a
}

/// Consistency monitor: max-norm over interior nodes of
/// (E1_new - E1_old)/dt + j1, with j1 averaged over the two steps. Zero for
/// a charge-conserving continuum; here it tracks deposition error.
pub fn continuity_residual(e1_new: &[f64], e1_old: &[f64], j1_new: &[f64], j1_old: &[f64], dt: f64) -> f64 {
    let n = e1_new.len();
    let mut worst = 0.0f64;
    for k in 1..n - 1 {
        let r = (e1_new[k] - e1_old[k]) / dt + 0.5 * (j1_new[k] + j1_old[k]);
        worst = worst.max(r.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1d;
    use crate::particles::{deposit_moments, ParticleArray};
    use crate::species::SpeciesSpec;

    fn grid() -> Grid1d {
        Grid1d::new(-4.0, 4.0, 32)
    }

    #[test]
    fn monocharge_plateaus_are_half_total() {
        let g = grid();
        let parts = vec![ParticleArray {
            x: vec![0.0, 0.6],
            v1: vec![0.0, 0.0],
            v2: vec![0.0, 0.0],
            w: vec![1.0, 2.0],
        }];
        let sp = vec![SpeciesSpec::new("q", 1.0, 1.0)];
        let m = deposit_moments(&parts, &sp, &g);
        let m_total = trapezoid_total(&m.rho, g.dx());
        let e1 = solve_e1(&m.rho, m_total, g.dx());
        // right of all support the field is exactly +M/2, the full
        // cumulative sum; left of it exactly -M/2
        assert_eq!(e1[0], -0.5 * m_total);
        assert_eq!(*e1.last().unwrap(), 0.5 * m_total);
        assert!((m_total - 3.0).abs() < 1e-13);
    }

    #[test]
    fn neutral_data_has_zero_plateaus() {
        let g = grid();
        let n = g.n_nodes();
        let mut rho = vec![0.0; n];
        rho[10] = 1.0;
        rho[20] = -1.0;
        let e1 = solve_e1(&rho, trapezoid_total(&rho, g.dx()), g.dx());
        assert!(e1[0].abs() < 1e-15);
        assert!(e1.last().unwrap().abs() < 1e-15);
    }

    #[test]
    fn even_density_gives_odd_field() {
        let g = grid();
        let n = g.n_nodes();
        let rho: Vec<f64> = (0..n).map(|k| (-g.node_x(k).powi(2)).exp()).collect();
        let e1 = solve_e1(&rho, trapezoid_total(&rho, g.dx()), g.dx());
        let mid = n / 2;
        assert!(e1[mid].abs() < 1e-13);
        for k in 0..n {
            assert!((e1[k] + e1[n - 1 - k]).abs() < 1e-12, "node {k}");
        }
    }

    #[test]
    fn source_free_transport_is_a_bitwise_shift() {
        let g = grid();
        let n = g.n_nodes();
        let mut gp: Vec<f64> = (0..n).map(|k| (0.37 * k as f64).sin()).collect();
        let mut gm: Vec<f64> = (0..n).map(|k| (0.11 * k as f64).cos()).collect();
        let gp0 = gp.clone();
        let gm0 = gm.clone();
        let zero = vec![0.0; n];
        let steps = 5;
        for _ in 0..steps {
            step_light_cone(&mut gp, &mut gm, &zero, &zero, g.dx(), g.dx()).unwrap();
        }
        for k in 0..n {
            let expect_p = if k >= steps { gp0[k - steps] } else { 0.0 };
            let expect_m = if k + steps < n { gm0[k + steps] } else { 0.0 };
            assert_eq!(gp[k], expect_p, "gp node {k}");
            assert_eq!(gm[k], expect_m, "gm node {k}");
        }
    }

    #[test]
    fn constant_current_sources_uniform_decrement() {
        let g = grid();
        let n = g.n_nodes();
        let mut gp = vec![0.0; n];
        let mut gm = vec![0.0; n];
        let j2 = vec![3.0; n];
        step_light_cone(&mut gp, &mut gm, &j2, &j2, g.dx(), g.dx()).unwrap();
        let dt = g.dx();
        for k in 1..n - 1 {
            assert!((gp[k] + 3.0 * dt).abs() < 1e-15);
            assert!((gm[k] + 3.0 * dt).abs() < 1e-15);
        }
        // inflow nodes stay at zero
        assert_eq!(gp[0], 0.0);
        assert_eq!(gm[n - 1], 0.0);
    }

    #[test]
    fn pure_rightgoing_pulse_keeps_e2_equal_b() {
        let g = grid();
        let n = g.n_nodes();
        let mut f = FieldState::zeros(n);
        f.gp[12] = 2.0;
        assert_eq!(f.e2(12), 1.0);
        assert_eq!(f.b(12), 1.0);
        assert_eq!(f.gm[12], 0.0);
        // reconstruction identity E2² + B² = (G+² + G-²)/2
        for k in 0..n {
            let lhs = f.e2(k).powi(2) + f.b(k).powi(2);
            let rhs = 0.5 * (f.gp[k].powi(2) + f.gm[k].powi(2));
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn cfl_mismatch_is_rejected() {
        let g = grid();
        let n = g.n_nodes();
        let mut gp = vec![0.0; n];
        let mut gm = vec![0.0; n];
        let zero = vec![0.0; n];
        let err = step_light_cone(&mut gp, &mut gm, &zero, &zero, 0.5 * g.dx(), g.dx());
        assert!(matches!(err, Err(FieldError::CflViolated { .. })));
    }

    #[test]
    fn causality_mask_is_preserved() {
        // data supported on |x| <= c0 stays inside |x| <= c0 + t
        let g = Grid1d::new(-16.0, 16.0, 128);
        let n = g.n_nodes();
        let c0 = 2.0;
        let mut gp: Vec<f64> = (0..n)
            .map(|k| {
                let x = g.node_x(k);
                if x.abs() < c0 {
                    1.0 - (x / c0).powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let mut gm = gp.clone();
        let zero = vec![0.0; n];
        let steps = 10;
        for _ in 0..steps {
            step_light_cone(&mut gp, &mut gm, &zero, &zero, g.dx(), g.dx()).unwrap();
        }
        let reach = c0 + steps as f64 * g.dx();
        for k in 0..n {
            if g.node_x(k).abs() > reach + 1e-12 {
                assert_eq!(gp[k], 0.0);
                assert_eq!(gm[k], 0.0);
            }
        }
    }

    #[test]
    fn vector_potential_of_zero_field_vanishes() {
        let a = vector_potential(&[0.0; 9], 0.5);
        assert!(a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vector_potential_of_box_is_its_area() {
        let g = Grid1d::new(0.0, 10.0, 100);
        let n = g.n_nodes();
        // box of height 1 on nodes 20..=40: trapezoid area counts half a
        // cell on each flank, total (40-20+1) * dx
        let b: Vec<f64> = (0..n).map(|k| if (20..=40).contains(&k) { 1.0 } else { 0.0 }).collect();
        let a = vector_potential(&b, g.dx());
        let area = 21.0 * g.dx();
        assert!((a[60] - area).abs() < 1e-13);
        assert!((a[n - 1] - area).abs() < 1e-13);
        assert_eq!(a[0], 0.0);
    }

    #[test]
    fn odd_b_gives_even_vector_potential() {
        let g = Grid1d::new(-5.0, 5.0, 100);
        let n = g.n_nodes();
        let b: Vec<f64> = (0..n)
            .map(|k| {
                let x = g.node_x(k);
                x * (-x * x).exp()
            })
            .collect();
        let a = vector_potential(&b, g.dx());
        for k in 0..n {
            assert!((a[k] - a[n - 1 - k]).abs() < 1e-12, "node {k}");
        }
    }

    #[test]
    fn static_charge_has_zero_continuity_residual() {
        let g = grid();
        let n = g.n_nodes();
        let mut rho = vec![0.0; n];
        rho[16] = 2.0;
        let e1 = solve_e1(&rho, trapezoid_total(&rho, g.dx()), g.dx());
        let j1 = vec![0.0; n];
        let r = continuity_residual(&e1, &e1, &j1, &j1, g.dx());
        assert_eq!(r, 0.0);
    }

    #[test]
    fn free_stream_continuity_residual_shrinks_under_refinement() {
        // a resolved charge cloud streaming rigidly; the residual is pure
        // deposition error and must drop with grid resolution
        let sp = vec![SpeciesSpec::new("s", 1.0, 1.0)];
        let v1 = 1.0f64;
        let vhat = v1 / (1.0 + v1 * v1).sqrt();
        // dense fixed sampling of a quartic bump, well below either dx
        let np = 20_000;
        let h = 2.0 / np as f64;
        let cloud: Vec<(f64, f64)> = (0..np)
            .map(|i| {
                let x = -1.0 + (i as f64 + 0.5) * h;
                let s = 1.0 - x * x;
                (x, s * s * h)
            })
            .collect();
        let residual_at = |cells: usize| {
            let g = Grid1d::new(-4.0, 4.0, cells);
            let dt = g.dx();
            let mut worst = 0.0f64;
            let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
            for n in 0..4 {
                let t = dt * n as f64;
                let parts = vec![ParticleArray {
                    x: cloud.iter().map(|(x, _)| x + vhat * t).collect(),
                    v1: vec![v1; np],
                    v2: vec![0.0; np],
                    w: cloud.iter().map(|(_, w)| *w).collect(),
                }];
                let m = deposit_moments(&parts, &sp, &g);
                let e1 = solve_e1(&m.rho, trapezoid_total(&m.rho, g.dx()), g.dx());
                if let Some((e1_old, j1_old)) = prev.take() {
                    worst = worst.max(continuity_residual(&e1, &e1_old, &m.j1, &j1_old, dt));
                }
                prev = Some((e1, m.j1));
            }
            worst
        };
        let coarse = residual_at(64);
        let fine = residual_at(128);
        assert!(fine < 0.8 * coarse, "coarse {coarse}, fine {fine}");
    }
}
