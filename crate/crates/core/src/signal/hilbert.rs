use super::SampledSignal;
use crate::error::Result;
use rustfft::{num_complex::Complex64, FftPlanner};

/// Magnitude of the discrete analytic signal (one-sided spectrum doubling).
pub fn analytic_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let h = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *c *= h;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.norm() * scale).collect()
}

/// Upper envelope of a band-limited signal.
pub fn upper_envelope(signal: &SampledSignal) -> Result<SampledSignal> {
    signal.require_non_empty()?;
    Ok(signal.with_samples(analytic_magnitude(&signal.samples)))
}
