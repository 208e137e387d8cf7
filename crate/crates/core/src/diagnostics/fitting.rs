//! Log-log least-squares power-law fits for growth-exponent monitors.

use thiserror::Error;

#[derive(Clone, Copy, Debug)]
pub struct PowerLawFit {
    /// Slope of log y against log t.
    pub exponent: f64,
    /// exp(intercept): the prefactor of the fitted power law.
    pub amplitude: f64,
    pub samples: usize,
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("nonpositive-values: power-law fit needs y > 0 throughout the window")]
    NonpositiveValues,
    #[error("window-too-small: {found} samples in the window, need at least 5")]
    WindowTooSmall { found: usize },
}

/// Least-squares slope of log y versus log t over the window [t_min, t_max].
pub fn fit_growth_exponent(
    series: &[(f64, f64)],
    t_min: f64,
    t_max: f64,
) -> Result<PowerLawFit, FitError> {
    let window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_min && t <= t_max && t > 0.0)
        .collect();
    if window.len() < 5 {
        return Err(FitError::WindowTooSmall { found: window.len() });
    }
    if window.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(FitError::NonpositiveValues);
    }
    let n = window.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &window {
        let lx = t.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    let exponent = (n * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / n;
    Ok(PowerLawFit {
        exponent,
        amplitude: intercept.exp(),
        samples: window.len(),
    })
}
