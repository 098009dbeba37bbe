//! Continuous wavelet transform with the Gaus-2 (Mexican hat) wavelet,
//! normalised scalogram and the maximum relative wavelet energy series.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use rayon::prelude::*;
use rustfft::{num_complex::Complex64, FftPlanner};

/// Kernel support ends where `|t / l|` exceeds this many prototype units.
pub const TRUNCATION: f64 = 5.0;

/// Number of scales in the default grid.
pub const DEFAULT_SCALE_COUNT: usize = 150;

/// `C` with `C^2 * (3/4) * sqrt(pi) = 1`, giving the prototype unit L2 norm.
pub fn gaus2_norm() -> f64 {
    (4.0 / (3.0 * std::f64::consts::PI.sqrt())).sqrt()
}

/// The Gaus-2 prototype `C (1 - t^2) exp(-t^2 / 2)`.
pub fn gaus2(t: f64) -> f64 {
    let t2 = t * t;
    gaus2_norm() * (1.0 - t2) * (-0.5 * t2).exp()
}

/// Sampled, dilated wavelet `psi(k / (l fs)) / sqrt(l)` for offsets
/// `k = -half ..= half`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletKernel {
    /// Dilation `l` in seconds.
    pub scale: f64,
    pub fs: f64,
    pub half: usize,
    pub values: Vec<f64>,
}

impl WaveletKernel {
    /// Kernel value at signed offset `k` (samples).
    pub fn at(&self, k: isize) -> f64 {
        let idx = k + self.half as isize;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    pub fn support(&self) -> usize {
        self.values.len()
    }
}

pub fn gaus2_kernel(scale: f64, fs: f64) -> Result<WaveletKernel> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Parameter(format!("wavelet scale must be > 0, got {scale}")));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::Parameter(format!("sampling rate must be > 0, got {fs}")));
    }
    let width = scale * fs;
    let half = (TRUNCATION * width).floor() as usize;
    let norm = 1.0 / scale.sqrt();
    let values = (-(half as isize)..=half as isize)
        .map(|k| gaus2(k as f64 / width) * norm)
        .collect();
    Ok(WaveletKernel { scale, fs, half, values })
}

/// Scales `1/fs, 2/fs, ..., 150/fs` seconds: one to 150 samples.
pub fn default_scales(fs: f64) -> Vec<f64> {
    (1..=DEFAULT_SCALE_COUNT).map(|k| k as f64 / fs).collect()
}

/// Wavelet coefficients, one row per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtMatrix {
    pub coefficients: Vec<Vec<f64>>,
    pub scales: Vec<f64>,
    pub fs: f64,
}

/// Half-sample symmetric reflection of an index into `0..n`.
pub fn reflect_index(j: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut r = j.rem_euclid(period);
    if r >= n {
        r = period - 1 - r;
    }
    r as usize
}

/// `w[l][m] = dt * sum_k x[m + k] psi_l[k]` with symmetric reflection at the
/// record edges, evaluated by FFT convolution.
pub fn cwt(signal: &SampledSignal, scales: &[f64]) -> Result<CwtMatrix> {
    if scales.is_empty() {
        return Err(Error::Parameter("empty scale list".into()));
    }
    signal.require_non_empty()?;
    let kernels = scales
        .iter()
        .map(|&s| gaus2_kernel(s, signal.fs))
        .collect::<Result<Vec<_>>>()?;
    let n = signal.len();
    let max_half = kernels.iter().map(|k| k.half).max().unwrap_or(0);
    if 2 * max_half + 1 > n {
        return Err(Error::Input(format!(
            "signal of {n} samples is shorter than the longest wavelet support ({})",
            2 * max_half + 1
        )));
    }

    let padded_len = n + 2 * max_half;
    let fft_len = (padded_len + 2 * max_half).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);

    let mut spectrum = vec![Complex64::new(0.0, 0.0); fft_len];
    for (i, slot) in spectrum.iter_mut().take(padded_len).enumerate() {
        let j = i as isize - max_half as isize;
        *slot = Complex64::new(signal.samples[reflect_index(j, n)], 0.0);
    }
    fwd.process(&mut spectrum);

    let dt = 1.0 / signal.fs;
    let coefficients = kernels
        .par_iter()
        .map(|kernel| {
            let mut h = vec![Complex64::new(0.0, 0.0); fft_len];
            for k in -(kernel.half as isize)..=kernel.half as isize {
                h[k.rem_euclid(fft_len as isize) as usize] = Complex64::new(kernel.at(k), 0.0);
            }
            fwd.process(&mut h);
            for (a, b) in h.iter_mut().zip(&spectrum) {
                *a *= b;
            }
            inv.process(&mut h);
            // Kernels are even, so convolution equals correlation.
            let scale = dt / fft_len as f64;
            h[max_half..max_half + n].iter().map(|c| c.re * scale).collect()
        })
        .collect();
    Ok(CwtMatrix { coefficients, scales: scales.to_vec(), fs: signal.fs })
}

/// Normalised wavelet energies, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub energies: Vec<Vec<f64>>,
    pub scales: Vec<f64>,
    pub fs: f64,
}

impl Scalogram {
    pub fn total(&self) -> f64 {
        self.energies.iter().flatten().sum()
    }
}

pub fn scalogram(coeffs: &CwtMatrix) -> Result<Scalogram> {
    if coeffs.coefficients.is_empty() || coeffs.coefficients[0].is_empty() {
        return Err(Error::Input("empty coefficient matrix".into()));
    }
    let energies: Vec<Vec<f64>> = coeffs
        .coefficients
        .iter()
        .map(|row| row.iter().map(|w| w * w).collect())
        .collect();
    let total: f64 = energies.iter().map(|r| r.iter().sum::<f64>()).sum();
    if total == 0.0 {
        return Err(Error::Degenerate("all-zero wavelet coefficients".into()));
    }
    let energies = energies
        .into_iter()
        .map(|r| r.into_iter().map(|e| e / total).collect())
        .collect();
    Ok(Scalogram { energies, scales: coeffs.scales.clone(), fs: coeffs.fs })
}

/// Per-sample maximum relative wavelet energy across scales.
#[derive(Debug, Clone, PartialEq)]
pub struct MrweSeries {
    pub values: Vec<f64>,
    pub argmax_scales: Vec<usize>,
}

/// Column-wise maximum of the scalogram; ties go to the smaller scale index.
pub fn mrwe(scalo: &Scalogram) -> Result<MrweSeries> {
    let Some(first) = scalo.energies.first() else {
        return Err(Error::Input("empty scalogram".into()));
    };
    let mut values = first.clone();
    let mut argmax_scales = vec![0usize; values.len()];
    for (s, row) in scalo.energies.iter().enumerate().skip(1) {
        for (t, &e) in row.iter().enumerate() {
            if e > values[t] {
                values[t] = e;
                argmax_scales[t] = s;
            }
        }
    }
    Ok(MrweSeries { values, argmax_scales })
}

/// CWT, scalogram and MRWE in one pass.
pub fn mrwe_of(signal: &SampledSignal, scales: &[f64]) -> Result<MrweSeries> {
    mrwe(&scalogram(&cwt(signal, scales)?)?)
}
