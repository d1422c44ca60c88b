//! Power, efficiency, spectrum and error-rate measurements.
//!
//! Powers are in watts across a 1 Ω reference load, so the power of a
//! sample is its squared voltage.

use std::ops::Range;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::chaos;
use crate::dcsk::DcskKey;
use crate::error::{Error, Result};
use crate::packet::Symbol;
use crate::signal::BasebandSignal;
use crate::sum::sum;

const MODULE: &str = "analysis";

fn check_window(signal: &BasebandSignal, window: &Range<usize>, min_len: usize) -> Result<()> {
    if window.start >= window.end || window.end > signal.len() {
        return Err(Error::domain(
            MODULE,
            "window",
            format!("{window:?} is empty or outside a signal of {} samples", signal.len()),
        ));
    }
    if window.len() < min_len {
        return Err(Error::domain(
            MODULE,
            "window",
            format!("{} samples, need at least {min_len}", window.len()),
        ));
    }
    Ok(())
}

/// Mean of squared samples over `window`.
pub fn average_power(signal: &BasebandSignal, window: Range<usize>) -> Result<f64> {
    check_window(signal, &window, 1)?;
    let w = &signal.samples[window];
    Ok(sum(w.iter().map(|v| v * v)) / w.len() as f64)
}

/// Closed-form modulator output power `(1 + a²) E[x²] / 2`.
pub fn modulator_output_power(mean_square_chip: f64, amplitude: f64) -> f64 {
    (1.0 + amplitude * amplitude) * mean_square_chip / 2.0
}

/// Output over input power `(1 + a²) E[x²] / (2 a²)`.
pub fn modulator_efficiency(mean_square_chip: f64, amplitude: f64) -> Result<f64> {
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(Error::domain(MODULE, "amplitude", "must be non-zero"));
    }
    Ok(modulator_output_power(mean_square_chip, amplitude) / (amplitude * amplitude))
}

/// `E[x²]` over the reference halves of the bits covered by `window`.
/// The window must start and end on bit boundaries.
pub fn reference_mean_square(
    signal: &BasebandSignal,
    window: Range<usize>,
    key: DcskKey,
) -> Result<f64> {
    check_window(signal, &window, 1)?;
    let sf = key.spreading_factor();
    if !window.start.is_multiple_of(sf) || !window.len().is_multiple_of(sf) {
        return Err(Error::domain(MODULE, "window", "not aligned to bit periods"));
    }
    let chips: Vec<f64> = signal.samples[window]
        .chunks_exact(sf)
        .flat_map(|bit| bit[..key.beta()].iter().copied())
        .collect();
    chaos::mean_square_of(&chips)
}

/// Measured and closed-form modulator output power over a payload window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub amplitude: f64,
    pub spreading_factor: usize,
    pub payload_bits: usize,
    pub sample_period: f64,
    pub initial_value: f64,
    /// Mean of `s²` over the payload window.
    pub measured_watts: f64,
    /// `(1 + a²) E[x²] / 2` with the measured `E[x²]`.
    pub closed_form_watts: f64,
    pub efficiency: f64,
    pub mean_square_chip: f64,
}

impl PowerReport {
    /// Builds a report from a whole-encrypted payload window.
    pub fn measure(
        signal: &BasebandSignal,
        window: Range<usize>,
        key: DcskKey,
        amplitude: f64,
        initial_value: f64,
    ) -> Result<Self> {
        let mean_square_chip = reference_mean_square(signal, window.clone(), key)?;
        let closed = modulator_output_power(mean_square_chip, amplitude);
        Ok(Self {
            amplitude,
            spreading_factor: key.spreading_factor(),
            payload_bits: window.len() / key.spreading_factor(),
            sample_period: signal.sample_period,
            initial_value,
            measured_watts: average_power(signal, window)?,
            closed_form_watts: closed,
            efficiency: modulator_efficiency(mean_square_chip, amplitude)?,
            mean_square_chip,
        })
    }

    pub fn relative_gap(&self) -> f64 {
        (self.measured_watts - self.closed_form_watts).abs() / self.closed_form_watts.abs()
    }
}

/// One-sided periodogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub bin_frequencies: Vec<f64>,
    /// Power in each bin, watts.
    pub densities: Vec<f64>,
    pub total_power: f64,
}

impl SpectrumEstimate {
    /// CSV with header `freq_hz,power_w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,power_w\n");
        for (f, p) in self.bin_frequencies.iter().zip(&self.densities) {
            out.push_str(&format!("{f},{p}\n"));
        }
        out
    }
}

/// Rectangular-window single-segment periodogram over `window`.
///
/// Bins are spaced `1/(N T_x)` from DC to Nyquist. Interior bins hold the
/// power of both the positive and negative frequency, so the bins sum to
/// the time-domain mean square.
pub fn power_spectrum(signal: &BasebandSignal, window: Range<usize>) -> Result<SpectrumEstimate> {
    check_window(signal, &window, 2)?;
    let n = window.len();
    let mut buf: Vec<Complex<f64>> = signal.samples[window]
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * n as f64);
    let half = n / 2;
    let densities: Vec<f64> = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || (n.is_multiple_of(2) && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let df = 1.0 / (n as f64 * signal.sample_period);
    Ok(SpectrumEstimate {
        bin_frequencies: (0..=half).map(|k| k as f64 * df).collect(),
        total_power: sum(densities.iter().copied()),
        densities,
    })
}

/// Fraction of positions where the two symbol streams differ.
pub fn bit_error_rate(sent: &[Symbol], received: &[Symbol]) -> Result<f64> {
    if sent.len() != received.len() {
        return Err(Error::domain(
            MODULE,
            "received",
            format!("length {} differs from sent length {}", received.len(), sent.len()),
        ));
    }
    if sent.is_empty() {
        return Ok(0.0);
    }
    let errors = sent.iter().zip(received).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / sent.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{generate, ChaosParams};
    use crate::dcsk::modulate;
    use proptest::prelude::*;

    fn sig(samples: Vec<f64>) -> BasebandSignal {
        BasebandSignal::new(samples, 0.001).unwrap()
    }

    #[test]
    fn constant_level_power() {
        let s = sig(vec![2.0; 300]);
        assert_eq!(average_power(&s, 0..300).unwrap(), 4.0);
        assert_eq!(average_power(&s, 17..23).unwrap(), 4.0);
        assert!(average_power(&s, 5..5).is_err());
        assert!(average_power(&s, 200..301).is_err());
    }

    #[test]
    fn closed_form_table_values() {
        // calculation row of the a-sweep with E[x²] = 1.0067
        for (a, expected) in [(1.0, 1.0067), (2.0, 2.51675), (5.0, 13.0871), (10.0, 50.83835)] {
            let p = modulator_output_power(1.0067, a);
            assert!((p - expected).abs() <= 1e-12 * expected, "a={a}: {p}");
        }
        assert!((modulator_efficiency(1.0067, 1.0).unwrap() - 1.0067).abs() < 1e-15);
        assert!((modulator_efficiency(1.0067, 10.0).unwrap() - 0.5083835).abs() < 1e-15);
        assert!(modulator_efficiency(1.0, 0.0).is_err());
        for e in [0.3, 1.0, 1.7] {
            assert_eq!(modulator_output_power(e, 1.0), e);
        }
    }

    #[test]
    fn efficiency_tends_to_half_mean_square() {
        let e = 1.0067;
        let eta = modulator_efficiency(e, 10.0).unwrap();
        // relative excess over the limit is exactly 1/a²
        assert!((eta - e / 2.0).abs() / (e / 2.0) <= 0.01 + 1e-12);
        let eta = modulator_efficiency(e, 100.0).unwrap();
        assert!((eta - e / 2.0).abs() / (e / 2.0) <= 1e-4 + 1e-12);
    }

    #[test]
    fn dc_spectrum() {
        let s = sig(vec![2.0; 64]);
        let spec = power_spectrum(&s, 0..64).unwrap();
        assert!((spec.densities[0] - 4.0).abs() < 1e-12);
        assert!(spec.densities[1..].iter().all(|p| p.abs() < 1e-20));
        assert_eq!(spec.bin_frequencies[1], 1.0 / 0.064);
        assert!(power_spectrum(&s, 0..1).is_err());
    }

    #[test]
    fn spectrum_matches_naive_dft() {
        let x = generate(&ChaosParams::default(), 37).unwrap().samples;
        let s = sig(x.clone());
        let spec = power_spectrum(&s, 0..37).unwrap();
        let n = x.len();
        for (k, p) in spec.densities.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            let two_sided = (re * re + im * im) / (n * n) as f64;
            let expected = if k == 0 { two_sided } else { 2.0 * two_sided };
            assert!((p - expected).abs() < 1e-12, "bin {k}");
        }
    }

    #[test]
    fn chaos_spectrum_is_wideband() {
        let x = generate(&ChaosParams::default(), 1000).unwrap().samples;
        let spec = power_spectrum(&sig(x), 0..1000).unwrap();
        let peak = spec.densities[1..].iter().cloned().fold(0.0, f64::max);
        assert!(peak < 0.05 * spec.total_power, "peak share {}", peak / spec.total_power);
    }

    #[test]
    fn error_rate_edges() {
        let a = vec![Symbol::Plus, Symbol::Minus, Symbol::Plus];
        let flipped: Vec<Symbol> = a.iter().map(|s| s.flip()).collect();
        assert_eq!(bit_error_rate(&a, &a).unwrap(), 0.0);
        assert_eq!(bit_error_rate(&a, &flipped).unwrap(), 1.0);
        assert!(bit_error_rate(&a, &a[..2]).is_err());
    }

    #[test]
    fn report_identity_for_whole_encrypted_payload() {
        let key = DcskKey::from_spreading_factor(100).unwrap();
        let bits = vec![Symbol::Plus; 85];
        for a in [1.0, 2.0, 5.0, 10.0] {
            let s = modulate(&bits, key, &ChaosParams::default(), a).unwrap();
            let r = PowerReport::measure(&s, 0..s.len(), key, a, 0.75).unwrap();
            assert!(r.relative_gap() < 1e-9);
            assert_eq!(r.payload_bits, 85);
            assert!((r.efficiency - r.closed_form_watts / (a * a)).abs() < 1e-15);
        }
        let s = modulate(&bits, key, &ChaosParams::default(), 1.0).unwrap();
        assert!(reference_mean_square(&s, 50..150, key).is_err());
    }

    proptest! {
        #[test]
        fn parseval(samples in proptest::collection::vec(-10.0f64..10.0, 2..300)) {
            let s = sig(samples);
            let n = s.len();
            let spec = power_spectrum(&s, 0..n).unwrap();
            let p = average_power(&s, 0..n).unwrap();
            prop_assert!((spec.total_power - p).abs() <= 1e-6 * p.max(1e-12));
        }

        #[test]
        fn efficiency_is_output_over_input(e in 0.0f64..2.0, a in 0.01f64..50.0) {
            let eta = modulator_efficiency(e, a).unwrap();
            prop_assert!((eta - modulator_output_power(e, a) / (a * a)).abs() <= 1e-15 * eta.max(1.0));
        }
    }
}
