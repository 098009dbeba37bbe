//! Butterworth IIR design (bilinear transform, second-order sections) and
//! zero-phase forward-backward filtering.

use super::SampledSignal;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

/// One biquad, `b0 b1 b2 / 1 a1 a2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Sos {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Transposed direct-form II state for a unit step in steady state.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Band {
    Low(f64),
    High(f64),
    Pass(f64, f64),
}

/// A cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Sos>,
    /// Largest pole radius, governs the start-up transient.
    pole_radius: f64,
}

impl SosFilter {
    pub fn butter_highpass(order: usize, cutoff_hz: f64, fs: f64) -> Result<Self> {
        check_edge(cutoff_hz, fs)?;
        design(order, Band::High(cutoff_hz), fs)
    }

    pub fn butter_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> Result<Self> {
        check_edge(cutoff_hz, fs)?;
        design(order, Band::Low(cutoff_hz), fs)
    }

    pub fn butter_bandpass(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Result<Self> {
        if order < 2 {
            return Err(Error::Parameter(format!("bandpass order must be >= 2, got {order}")));
        }
        check_edge(low_hz, fs)?;
        check_edge(high_hz, fs)?;
        if low_hz >= high_hz {
            return Err(Error::Parameter(format!(
                "band edges must satisfy low < high, got {low_hz} >= {high_hz}"
            )));
        }
        design(order, Band::Pass(low_hz, high_hz), fs)
    }

    /// Number of samples the slowest pole needs to decay by `1/e`.
    pub fn warmup_len(&self) -> usize {
        (1.0 / (1.0 - self.pole_radius)).ceil() as usize
    }

    /// Complex frequency response at `f_hz`.
    pub fn response(&self, f_hz: f64, fs: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * f_hz / fs);
        let z2 = z1 * z1;
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |h, s| {
            h * (s.b[0] + z1 * s.b[1] + z2 * s.b[2]) / (s.a[0] + z1 * s.a[1] + z2 * s.a[2])
        })
    }

    /// Causal filtering with explicit initial states.
    fn run(&self, x: &mut [f64], x0: f64) {
        let mut scale = x0;
        for s in &self.sections {
            let [mut z1, mut z2] = s.step_state();
            z1 *= scale;
            z2 *= scale;
            scale *= s.dc_gain();
            for v in x.iter_mut() {
                let xi = *v;
                let y = s.b[0] * xi + z1;
                z1 = s.b[1] * xi - s.a[1] * y + z2;
                z2 = s.b[2] * xi - s.a[2] * y;
                *v = y;
            }
        }
    }

    /// Zero-phase forward-backward filtering with odd-extension padding and
    /// steady-state initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let warm = self.warmup_len();
        if n <= warm.max(2) {
            return Err(Error::Input(format!(
                "signal of {n} samples is shorter than the filter warm-up of {warm} samples"
            )));
        }
        let pad = (3 * warm).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|k| 2.0 * first - x[k]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|k| 2.0 * last - x[n - 1 - k]));

        let x0 = ext[0];
        self.run(&mut ext, x0);
        ext.reverse();
        let y0 = ext[0];
        self.run(&mut ext, y0);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }
}

fn check_edge(f: f64, fs: f64) -> Result<()> {
    if !(f > 0.0 && f < fs / 2.0) {
        return Err(Error::Parameter(format!(
            "cutoff {f} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    Ok(())
}

fn design(order: usize, band: Band, fs: f64) -> Result<SosFilter> {
    if order == 0 {
        return Err(Error::Parameter("filter order must be >= 1".into()));
    }
    let fs2 = 2.0 * fs;
    let warp = |f: f64| fs2 * (PI * f / fs).tan();
    let proto: Vec<Complex64> = (1..=order)
        .map(|k| {
            let theta = PI * (2 * k + order - 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect();

    // Analog zeros (finite), poles and gain.
    let (zeros, poles, gain): (Vec<Complex64>, Vec<Complex64>, f64) = match band {
        Band::Low(fc) => {
            let wc = warp(fc);
            (vec![], proto.iter().map(|p| p * wc).collect(), wc.powi(order as i32))
        }
        Band::High(fc) => {
            let wc = warp(fc);
            let poles: Vec<_> = proto.iter().map(|p| wc / p).collect();
            let k = proto.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * (-p));
            (vec![Complex64::new(0.0, 0.0); order], poles, (1.0 / k).re)
        }
        Band::Pass(lo, hi) => {
            let (wl, wh) = (warp(lo), warp(hi));
            let bw = wh - wl;
            let w0sq = wl * wh;
            let mut poles = Vec::with_capacity(2 * order);
            for p in &proto {
                let half = p * (bw / 2.0);
                let disc = (half * half - w0sq).sqrt();
                poles.push(half + disc);
                poles.push(half - disc);
            }
            (vec![Complex64::new(0.0, 0.0); order], poles, bw.powi(order as i32))
        }
    };

    let to_z = |s: Complex64| (fs2 + s) / (fs2 - s);
    let num = zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, z| acc * (fs2 - z));
    let den = poles.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * (fs2 - p));
    let k_digital = gain * (num / den).re;

    let zpoles: Vec<Complex64> = poles.iter().map(|&p| to_z(p)).collect();
    let mut zzeros: Vec<f64> = zeros.iter().map(|&z| to_z(z).re).collect();
    // Zeros at analog infinity land on z = -1.
    zzeros.extend(std::iter::repeat_n(-1.0, poles.len() - zeros.len()));
    // Alternate +1 / -1 zeros so every bandpass section is [1, 0, -1].
    zzeros.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (pos, neg): (Vec<f64>, Vec<f64>) = zzeros.iter().partition(|&&z| z > 0.0);
    let mut zero_seq = Vec::with_capacity(zzeros.len());
    let (mut pi, mut ni) = (pos.iter(), neg.iter());
    loop {
        match (pi.next(), ni.next()) {
            (None, None) => break,
            (a, b) => {
                zero_seq.extend(a);
                zero_seq.extend(b);
            }
        }
    }

    let eps = 1e-12;
    let mut complex: Vec<Complex64> = zpoles.iter().copied().filter(|p| p.im > eps).collect();
    complex.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let mut real: Vec<f64> = zpoles.iter().filter(|p| p.im.abs() <= eps).map(|p| p.re).collect();
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut zeros_iter = zero_seq.into_iter();
    let mut sections = Vec::new();
    for p in &complex {
        let (z1, z2) = (zeros_iter.next().unwrap_or(0.0), zeros_iter.next().unwrap_or(0.0));
        sections.push(Sos {
            b: [1.0, -(z1 + z2), z1 * z2],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        });
    }
    for pair in real.chunks(2) {
        match pair {
            [p1, p2] => {
                let (z1, z2) = (zeros_iter.next().unwrap_or(0.0), zeros_iter.next().unwrap_or(0.0));
                sections.push(Sos { b: [1.0, -(z1 + z2), z1 * z2], a: [1.0, -(p1 + p2), p1 * p2] });
            }
            [p] => {
                let z = zeros_iter.next().unwrap_or(0.0);
                sections.push(Sos { b: [1.0, -z, 0.0], a: [1.0, -p, 0.0] });
            }
            _ => unreachable!(),
        }
    }
    if let Some(first) = sections.first_mut() {
        for b in first.b.iter_mut() {
            *b *= k_digital;
        }
    }
    let pole_radius = zpoles.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if pole_radius >= 1.0 {
        return Err(Error::Parameter("filter design produced an unstable pole".into()));
    }
    Ok(SosFilter { sections, pole_radius })
}

/// Removes baseline drift with a zero-phase 2nd-order Butterworth highpass.
pub fn highpass_detrend(signal: &SampledSignal, cutoff_hz: f64) -> Result<SampledSignal> {
    signal.require_non_empty()?;
    let f = SosFilter::butter_highpass(2, cutoff_hz, signal.fs)?;
    Ok(signal.with_samples(f.filtfilt(&signal.samples)?))
}

/// Zero-phase Butterworth bandpass; `order` is the prototype order, so the
/// cascade holds `order` biquads.
pub fn bandpass(
    signal: &SampledSignal,
    low_hz: f64,
    high_hz: f64,
    order: usize,
) -> Result<SampledSignal> {
    signal.require_non_empty()?;
    let f = SosFilter::butter_bandpass(order, low_hz, high_hz, signal.fs)?;
    Ok(signal.with_samples(f.filtfilt(&signal.samples)?))
}

/// Zero-phase Butterworth lowpass.
pub fn lowpass(signal: &SampledSignal, cutoff_hz: f64, order: usize) -> Result<SampledSignal> {
    signal.require_non_empty()?;
    let f = SosFilter::butter_lowpass(order, cutoff_hz, signal.fs)?;
    Ok(signal.with_samples(f.filtfilt(&signal.samples)?))
}
