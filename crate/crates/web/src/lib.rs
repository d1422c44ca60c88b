//! Browser bindings for the power-packet DCSK simulator.
//!
//! Each exported function takes plain numbers, runs the simulation and
//! returns a JSON string; the page parses it and draws on a canvas. The
//! `*_report` functions hold the logic so it can be tested natively.

use ppdcsk::analysis::power_spectrum;
use ppdcsk::experiment::{self, AmplitudeRow, ExperimentConfig, SpreadingRow};
use ppdcsk::packet::Section;
use ppdcsk::pipeline::{self, EncryptionMode, SectionBer};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Spectra longer than this are thinned before being sent to the page.
pub const MAX_SPECTRUM_POINTS: usize = 2048;

fn config(mode: &str, spreading_factor: usize, amplitude: f64, x1: f64) -> ppdcsk::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        spreading_factor,
        amplitude,
        mode: mode.parse()?,
        ..ExperimentConfig::default()
    };
    cfg.chaos.initial_value = x1;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionSpan {
    pub name: &'static str,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveformReport {
    pub mode: EncryptionMode,
    pub sample_period: f64,
    pub samples: Vec<f64>,
    pub sections: Vec<SectionSpan>,
    pub payload_power_w: f64,
    pub spectrum_freq_hz: Vec<f64>,
    pub spectrum_w: Vec<f64>,
}

/// Encrypted waveform of the default packet, its section boundaries and the
/// payload spectrum.
pub fn waveform_report(mode: &str, spreading_factor: usize, amplitude: f64, x1: f64) -> ppdcsk::Result<WaveformReport> {
    let cfg = config(mode, spreading_factor, amplitude, x1)?;
    let (pkt, chaos) = experiment::trial_packet(&cfg, 0)?;
    let enc = pipeline::encrypt(&pkt, cfg.key()?, &chaos, cfg.mode)?;
    let sections = Section::ALL
        .iter()
        .zip(["preamble", "header", "payload", "footer"])
        .map(|(&s, name)| {
            let w = enc.section_window(s);
            SectionSpan { name, start: w.start, end: w.end }
        })
        .collect();
    let payload = enc.section_window(Section::Payload);
    let power = ppdcsk::analysis::average_power(&enc.waveform, payload.clone())?;
    let spectrum = power_spectrum(&enc.waveform, payload)?;
    let stride = spectrum.densities.len().div_ceil(MAX_SPECTRUM_POINTS);
    // Thinning sums neighbouring bins so the plotted total still equals the power.
    let spectrum_freq_hz = spectrum.bin_frequencies.iter().step_by(stride).copied().collect();
    let spectrum_w = spectrum.densities.chunks(stride).map(|c| c.iter().sum()).collect();
    Ok(WaveformReport {
        mode: cfg.mode,
        sample_period: cfg.chaos.sample_period,
        samples: enc.waveform.samples,
        sections,
        payload_power_w: power,
        spectrum_freq_hz,
        spectrum_w,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub amplitude_rows: Vec<AmplitudeRow>,
    pub spreading_rows: Vec<SpreadingRow>,
}

/// Payload power against amplitude (at `spreading_factor`) and against
/// spreading factor (at `amplitude`).
pub fn sweep_report(
    spreading_factor: usize,
    amplitude: f64,
    a_values: &[f64],
    spreading_values: &[usize],
) -> ppdcsk::Result<SweepReport> {
    let mut cfg = config("whole", spreading_factor, amplitude, 0.75)?;
    cfg.a_values = a_values.to_vec();
    cfg.spreading_values = spreading_values.to_vec();
    cfg.validate()?;
    Ok(SweepReport {
        amplitude_rows: experiment::table1(&cfg)?,
        spreading_rows: experiment::table23(&cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackView {
    pub ber: SectionBer,
    pub stolen_power_w: f64,
    pub input_power_w: f64,
    pub packets: usize,
}

/// Eavesdropper with a guessed spreading factor over `packets` noisy packets.
#[allow(clippy::too_many_arguments)]
pub fn attack_report(
    mode: &str,
    spreading_factor: usize,
    guessed_spreading_factor: usize,
    amplitude: f64,
    noise_spectral: f64,
    packets: usize,
    seed: u64,
) -> ppdcsk::Result<AttackView> {
    let mut cfg = config(mode, spreading_factor, amplitude, 0.75)?;
    cfg.guessed_spreading_factor = guessed_spreading_factor;
    cfg.channel.noise_spectral = noise_spectral;
    cfg.channel.seed = seed;
    cfg.packets = packets;
    let s = experiment::attack(&cfg)?;
    Ok(AttackView {
        ber: s.ber,
        stolen_power_w: s.stolen_power_watts,
        input_power_w: s.input_power_watts,
        packets: s.packets,
    })
}

fn to_js<T: Serialize>(r: ppdcsk::Result<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn waveform(mode: &str, spreading_factor: usize, amplitude: f64, x1: f64) -> Result<String, JsError> {
    to_js(waveform_report(mode, spreading_factor, amplitude, x1))
}

#[wasm_bindgen]
pub fn sweep(
    spreading_factor: usize,
    amplitude: f64,
    a_values: Vec<f64>,
    spreading_values: Vec<usize>,
) -> Result<String, JsError> {
    to_js(sweep_report(spreading_factor, amplitude, &a_values, &spreading_values))
}

#[wasm_bindgen]
pub fn attack(
    mode: &str,
    spreading_factor: usize,
    guessed_spreading_factor: usize,
    amplitude: f64,
    noise_spectral: f64,
    packets: usize,
    seed: u64,
) -> Result<String, JsError> {
    to_js(attack_report(
        mode,
        spreading_factor,
        guessed_spreading_factor,
        amplitude,
        noise_spectral,
        packets,
        seed,
    ))
}
