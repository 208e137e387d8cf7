//! Momentum-support radii and their normalized growth monitors.
//!
//! The raw maxima of |v1| and |v2| over the weighted particles track the
//! phase-space support. The normalized ratios divide out the expected
//! envelopes sqrt(t - |x| + C0) for |v2| and t^(1/2) (t - |x| + 2C0)^(1/4)
//! for |v1|; bounded ratios mean the support grows no faster than those
//! envelopes.

use crate::particles::ParticleArray;

/// One sample of the support diagnostics.
#[derive(Clone, Copy, Debug, Default)]
pub struct SupportRecord {
    pub max_v1: f64,
    pub max_v2: f64,
    /// max over particles of |v1| / (1 + sqrt(t) (t - |x| + 2 C0)^(1/4))
    pub v1_ratio: f64,
    /// max over particles of |v2| / (1 + sqrt(max(0, t - |x| + C0)))
    pub v2_ratio: f64,
}

pub fn support_radii(particles: &[ParticleArray], t: f64, c0: f64) -> SupportRecord {
    let mut rec = SupportRecord::default();
    let sqrt_t = t.max(0.0).sqrt();
    for arr in particles {
        for i in 0..arr.len() {
            let (x, v1, v2) = (arr.x[i], arr.v1[i], arr.v2[i]);
            rec.max_v1 = rec.max_v1.max(v1.abs());
            rec.max_v2 = rec.max_v2.max(v2.abs());
            let slack2 = (t - x.abs() + c0).max(0.0);
            rec.v2_ratio = rec.v2_ratio.max(v2.abs() / (1.0 + slack2.sqrt()));
            let slack1 = (t - x.abs() + 2.0 * c0).max(0.0);
            rec.v1_ratio = rec
                .v1_ratio
                .max(v1.abs() / (1.0 + sqrt_t * slack1.powf(0.25)));
        }
    }
    rec
}
