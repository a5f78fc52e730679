//! Single-spin readout through tunneling-current modulation.
//!
//! The donor nuclear bit and the tip nuclear bit select one of four
//! modulation lines. Readout either reports the line exactly or, in trace
//! mode, synthesizes a noisy current and recovers the line from its
//! spectrum.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::config::MachineConfig;
use crate::error::{EndosError, Result};
use crate::layout::{RegisterLayout, TipPosition};
use crate::physics::{modulation_frequency, modulation_lines};
use crate::state::{measure_spin, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub observed_frequency: f64,
    pub inferred_p_bit: u8,
    pub inferred_a_bit: u8,
    /// Born probability of the observed donor bit.
    pub pre_measurement_probability: f64,
}

/// Projectively measures the donor nucleus of `qubit` (and the tip nucleus)
/// and reports the corresponding modulation line.
pub fn measure_via_current<R: Rng + ?Sized>(
    state: &mut PureState,
    qubit: usize,
    layout: &RegisterLayout,
    cfg: &MachineConfig,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    layout.check_qubit(qubit)?;
    match layout.tip() {
        TipPosition::Parked => return Err(EndosError::TipParked { channel: "readout" }),
        TipPosition::AtQubit(q) if q != qubit => {
            return Err(EndosError::TipElsewhere {
                expected: qubit,
                actual: q.to_string(),
            })
        }
        TipPosition::AtQubit(_) => {}
    }
    let p = measure_spin(state, layout.nucleus_site(qubit), rng)?;
    let a = measure_spin(state, layout.tip_site(), rng)?;
    Ok(MeasurementRecord {
        qubit,
        observed_frequency: modulation_frequency(p.bit, a.bit, cfg),
        inferred_p_bit: p.bit,
        inferred_a_bit: a.bit,
        pre_measurement_probability: p.probability,
    })
}

/// Smallest separation between two of the four modulation lines.
pub fn min_line_gap(cfg: &MachineConfig) -> f64 {
    let lines = modulation_lines(cfg);
    let mut gap = f64::INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            gap = gap.min((lines[i].1 - lines[j].1).abs());
        }
    }
    gap
}

/// Tolerance used to classify peaks recovered from noisy traces.
pub fn trace_tolerance(cfg: &MachineConfig) -> f64 {
    0.25 * min_line_gap(cfg)
}

/// Inverse of [`modulation_frequency`]: the unique `(p, a)` whose line lies
/// within `tolerance` of `frequency`.
pub fn classify_frequency(frequency: f64, cfg: &MachineConfig, tolerance: f64) -> Result<(u8, u8)> {
    let hits: Vec<(u8, u8)> = modulation_lines(cfg)
        .into_iter()
        .filter(|(_, f)| (f - frequency).abs() <= tolerance)
        .map(|(bits, _)| bits)
        .collect();
    match hits.as_slice() {
        [one] => Ok(*one),
        _ => Err(EndosError::UnclassifiableFrequency {
            frequency,
            tolerance,
            matches: hits.len(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSettings {
    /// Signal-to-noise power ratio of the unit-amplitude carrier.
    pub snr: f64,
    pub duration: f64,
    pub sample_rate: f64,
    /// Every line is divided by this before sampling.
    pub scale: f64,
}

impl TraceSettings {
    /// Sampling at four times the highest scaled line, long enough that the
    /// closest pair of lines is eight spectral bins apart and the lowest line
    /// completes 1000 cycles. The sample count is rounded up to a power of
    /// two.
    pub fn for_config(cfg: &MachineConfig, snr: f64) -> Self {
        let scale = cfg.trace_scale;
        let lines = modulation_lines(cfg);
        let f_max = lines.iter().map(|l| l.1).fold(0.0, f64::max) / scale;
        let f_min = lines.iter().map(|l| l.1).fold(f64::INFINITY, f64::min) / scale;
        let gap = min_line_gap(cfg) / scale;
        let sample_rate = 4.0 * f_max;
        let needed = ((8.0 / gap).max(1000.0 / f_min) * sample_rate).ceil() as usize;
        TraceSettings {
            snr,
            duration: needed.next_power_of_two() as f64 / sample_rate,
            sample_rate,
            scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    pub duration: f64,
    /// Frequency divisor the trace was synthesized with.
    pub scale: f64,
}

impl CurrentTrace {
    /// Two columns: `time_s amplitude`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{:e} {:e}", k as f64 / self.sample_rate, s);
        }
        out
    }

    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.samples.len() as f64
    }
}

/// Unit sinusoid at the scaled modulation line plus white Gaussian noise of
/// the requested SNR. The carrier phase is random.
pub fn synth_trace<R: Rng + ?Sized>(
    p_bit: u8,
    a_bit: u8,
    cfg: &MachineConfig,
    settings: &TraceSettings,
    rng: &mut R,
) -> Result<CurrentTrace> {
    if settings.snr.is_nan() || settings.snr <= 0.0 {
        return Err(EndosError::InvalidConfig(format!("snr must be > 0, got {}", settings.snr)));
    }
    if !(settings.scale > 0.0 && settings.duration > 0.0) {
        return Err(EndosError::InvalidConfig("trace scale and duration must be > 0".into()));
    }
    let max_line = modulation_lines(cfg).iter().map(|l| l.1).fold(0.0, f64::max) / settings.scale;
    if settings.sample_rate.is_nan() || settings.sample_rate <= 2.0 * max_line {
        return Err(EndosError::AliasingError {
            sample_rate: settings.sample_rate,
            max_frequency: max_line,
        });
    }
    let f = modulation_frequency(p_bit, a_bit, cfg) / settings.scale;
    let n = (settings.duration * settings.sample_rate).round() as usize;
    if n < 4 {
        return Err(EndosError::InvalidConfig(format!("trace of {n} samples is too short")));
    }
    let sigma = (0.5 / settings.snr).sqrt();
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let phase = rng.random::<f64>() * 2.0 * PI;
    let step = 2.0 * PI * f / settings.sample_rate;
    let samples = (0..n)
        .map(|k| (step * k as f64 + phase).sin() + noise.sample(rng))
        .collect();
    Ok(CurrentTrace {
        sample_rate: settings.sample_rate,
        samples,
        duration: n as f64 / settings.sample_rate,
        scale: settings.scale,
    })
}

/// Strongest non-DC spectral line of a Hann-windowed trace, refined by a
/// parabola through the peak bin and its neighbours. Returned in unscaled
/// Hz.
pub fn detect_peak(trace: &CurrentTrace) -> Result<f64> {
    let n = trace.samples.len();
    if n < 4 {
        return Err(EndosError::InvalidConfig("trace too short for a spectrum".into()));
    }
    let mut buf: Vec<Complex<f64>> = trace
        .samples
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos();
            Complex::new(x * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2 + 1].iter().map(|c| c.norm()).collect();
    let (k, _) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least two bins");
    let delta = if k + 1 < mag.len() {
        let (y1, y2, y3) = (mag[k - 1], mag[k], mag[k + 1]);
        let denom = y1 - 2.0 * y2 + y3;
        if denom.abs() > 0.0 {
            0.5 * (y1 - y3) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok((k as f64 + delta) * trace.bin_width() * trace.scale)
}
