//! Experiment harness: configuration plus the table, figure, round-trip and
//! attack commands. Each command has a pure function returning typed rows
//! and a `write_*` wrapper that emits files into an output directory.
//!
//! Every output embeds the resolved configuration: JSON outputs in a
//! `config` field, CSV outputs in a leading `# config=<json>` comment line.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, PowerReport};
use crate::channel::{AwgnChannel, AwgnConfig, RNG_ALGORITHM};
use crate::chaos::{self, ChaosParams, BOUND};
use crate::dcsk::{self, DcskKey};
use crate::error::{Error, Result};
use crate::packet::{build_packet, PacketLayout, PowerPacket, Section, Symbol};
use crate::pipeline::{self, AttackReport, EncryptedPacket, EncryptionMode, SectionBer};
use crate::signal::BasebandSignal;

const MODULE: &str = "experiment";

/// Full experiment configuration. Defaults reproduce the reference setup:
/// `x1 = 0.75`, `T_x = 1 ms`, `2β = 100`, `N_b = 85`, `a = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub chaos: ChaosParams,
    pub spreading_factor: usize,
    pub layout: PacketLayout,
    pub source_id: u64,
    pub dest_addr: u64,
    pub amplitude: f64,
    pub channel: AwgnConfig,
    pub mode: EncryptionMode,
    /// Bit periods the chaos generator runs before the packet's first bit.
    /// The default of 7 puts the payload 19 bit periods after `x1` with the
    /// default 12-bit preamble and header.
    pub lead_bits: usize,
    /// Amplitude sweep of the a-table.
    pub a_values: Vec<f64>,
    /// Spreading-factor sweep of the 2β-table.
    pub spreading_values: Vec<usize>,
    /// Attacker's guess of `2β`.
    pub guessed_spreading_factor: usize,
    /// Packets per attack or round-trip run.
    pub packets: usize,
    /// Samples emitted by the `chaos` command and used for figure statistics.
    pub chaos_samples: usize,
    /// Second initial value of the divergence figure.
    pub divergence_initial_value: f64,
    /// Iterations shown in the divergence figure.
    pub divergence_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            chaos: ChaosParams::default(),
            spreading_factor: 100,
            layout: PacketLayout::default(),
            source_id: 3,
            dest_addr: 5,
            amplitude: 2.0,
            channel: AwgnConfig::default(),
            mode: EncryptionMode::Whole,
            lead_bits: 7,
            a_values: vec![1.0, 2.0, 5.0, 10.0],
            spreading_values: vec![50, 100, 500, 1000],
            guessed_spreading_factor: 102,
            packets: 1,
            chaos_samples: 1000,
            divergence_initial_value: 0.749,
            divergence_samples: 100,
        }
    }
}

fn invalid(param: &'static str, reason: impl Into<String>) -> Error {
    Error::domain(MODULE, param, reason)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.chaos.validate()?;
        self.layout.validate()?;
        self.key()?;
        self.guessed_key()?;
        AwgnChannel::new(self.channel)?;
        build_packet(self.layout, self.source_id, self.dest_addr, self.amplitude)?;
        if self.a_values.is_empty() {
            return Err(invalid("a_values", "sweep list is empty"));
        }
        if let Some(a) = self.a_values.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(invalid("a_values", format!("{a} must be positive")));
        }
        if self.spreading_values.is_empty() {
            return Err(invalid("spreading_values", "sweep list is empty"));
        }
        for sf in &self.spreading_values {
            DcskKey::from_spreading_factor(*sf)?;
        }
        if self.packets == 0 {
            return Err(invalid("packets", "must be at least 1"));
        }
        if self.chaos_samples < 2 {
            return Err(invalid("chaos_samples", "must be at least 2"));
        }
        ChaosParams::new(self.divergence_initial_value, self.chaos.sample_period)?;
        if self.divergence_samples == 0 {
            return Err(invalid("divergence_samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn key(&self) -> Result<DcskKey> {
        DcskKey::from_spreading_factor(self.spreading_factor)
    }

    pub fn guessed_key(&self) -> Result<DcskKey> {
        DcskKey::from_spreading_factor(self.guessed_spreading_factor)
    }

    /// Chaos state at the first bit of the packet for a given key.
    pub fn packet_chaos(&self, key: DcskKey) -> ChaosParams {
        self.chaos.advanced(self.lead_bits * key.spreading_factor())
    }

    pub fn packet(&self) -> Result<PowerPacket> {
        build_packet(self.layout, self.source_id, self.dest_addr, self.amplitude)
    }

    fn compact_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Seed of sweep point or trial `index`, derived from the master seed.
pub fn derived_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn csv_with_config(cfg: &ExperimentConfig, extra: &[(&str, String)], body: &str) -> String {
    let mut out = format!("# config={}\n", cfg.compact_json());
    for (k, v) in extra {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(body);
    out
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn json_with_config<T: Serialize>(cfg: &ExperimentConfig, body: &T) -> Result<String> {
    let mut value = serde_json::to_value(body)?;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("config".into(), serde_json::to_value(cfg)?);
        map.insert("rng_algorithm".into(), RNG_ALGORITHM.into());
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// Whole-encrypts the configured packet at amplitude `a` with key `2β` and
/// measures the payload window.
pub fn payload_power(cfg: &ExperimentConfig, amplitude: f64, spreading_factor: usize) -> Result<(PowerReport, EncryptedPacket)> {
    let key = DcskKey::from_spreading_factor(spreading_factor)?;
    let pkt = build_packet(cfg.layout, cfg.source_id, cfg.dest_addr, amplitude)?;
    let enc = pipeline::encrypt(&pkt, key, &cfg.packet_chaos(key), EncryptionMode::Whole)?;
    let report = PowerReport::measure(
        &enc.waveform,
        enc.section_window(Section::Payload),
        key,
        amplitude,
        cfg.chaos.initial_value,
    )?;
    Ok((report, enc))
}

/// One row of the amplitude sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub a: f64,
    pub p_modoutsim: f64,
    pub p_modout: f64,
    pub relative_gap: f64,
    pub eta_mod: f64,
    pub mean_square_chip: f64,
}

pub fn table1(cfg: &ExperimentConfig) -> Result<Vec<AmplitudeRow>> {
    cfg.validate()?;
    cfg.a_values
        .iter()
        .map(|&a| {
            let (r, _) = payload_power(cfg, a, cfg.spreading_factor)?;
            Ok(AmplitudeRow {
                a,
                p_modoutsim: r.measured_watts,
                p_modout: r.closed_form_watts,
                relative_gap: r.relative_gap(),
                eta_mod: r.efficiency,
                mean_square_chip: r.mean_square_chip,
            })
        })
        .collect()
}

pub fn write_table1(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = table1(cfg)?;
    let mut body = String::from("a,P_modoutsim,P_modout,relative_gap,eta_mod\n");
    for r in &rows {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            r.a, r.p_modoutsim, r.p_modout, r.relative_gap, r.eta_mod
        ));
    }
    Ok(vec![write(dir, "table1.csv", csv_with_config(cfg, &[], &body))?])
}

/// One row of the spreading-factor sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingRow {
    pub spreading_factor: usize,
    pub mean_square_chip: f64,
    pub p_modoutsim: f64,
    pub p_modout: f64,
}

pub fn table23(cfg: &ExperimentConfig) -> Result<Vec<SpreadingRow>> {
    cfg.validate()?;
    cfg.spreading_values
        .iter()
        .map(|&sf| {
            let (r, _) = payload_power(cfg, cfg.amplitude, sf)?;
            Ok(SpreadingRow {
                spreading_factor: sf,
                mean_square_chip: r.mean_square_chip,
                p_modoutsim: r.measured_watts,
                p_modout: r.closed_form_watts,
            })
        })
        .collect()
}

pub fn write_table23(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = table23(cfg)?;
    let mut body = String::from("two_beta,E_x2,P_modoutsim,P_modout\n");
    for r in &rows {
        body.push_str(&format!(
            "{},{},{},{}\n",
            r.spreading_factor, r.mean_square_chip, r.p_modoutsim, r.p_modout
        ));
    }
    Ok(vec![write(dir, "table23.csv", csv_with_config(cfg, &[], &body))?])
}

/// Scalars summarizing the figure data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSummary {
    /// First index where the two trajectories differ by more than 1.
    pub divergence_k: Option<usize>,
    pub max_abs_autocorrelation: f64,
    pub chaos_spectrum_power_w: f64,
    pub amplitude_spectra: Vec<SpectrumSummary>,
    pub spreading_spectra: Vec<SpectrumSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub a: f64,
    pub spreading_factor: usize,
    pub file: String,
    pub average_power_w: f64,
    pub spectrum_total_w: f64,
}

pub fn write_figures(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut paths = Vec::new();

    let alt = ChaosParams::new(cfg.divergence_initial_value, cfg.chaos.sample_period)?;
    let c1 = chaos::generate(&cfg.chaos, cfg.divergence_samples)?;
    let c2 = chaos::generate(&alt, cfg.divergence_samples)?;
    let mut body = String::from("k,c1,c2\n");
    for (k, (a, b)) in c1.samples.iter().zip(&c2.samples).enumerate() {
        body.push_str(&format!("{},{a},{b}\n", k + 1));
    }
    paths.push(write(dir, "fig8.csv", csv_with_config(cfg, &[], &body))?);
    let divergence_k = chaos::divergence_time(&cfg.chaos, &alt, 1.0, cfg.divergence_samples)?;

    let seq = chaos::generate(&cfg.chaos, cfg.chaos_samples)?;
    let max_lag = cfg.chaos_samples - 1;
    let r = chaos::normalized_autocorrelation(&seq, max_lag)?;
    let mut body = String::from("n,r\n");
    for n in -(max_lag as i64)..=(max_lag as i64) {
        body.push_str(&format!("{n},{}\n", r[n.unsigned_abs() as usize]));
    }
    paths.push(write(dir, "fig9.csv", csv_with_config(cfg, &[], &body))?);
    let max_abs_autocorrelation = r[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let chaos_signal = BasebandSignal::new(seq.samples, seq.sample_period)?;
    let spec = analysis::power_spectrum(&chaos_signal, 0..chaos_signal.len())?;
    paths.push(write(dir, "fig10.csv", csv_with_config(cfg, &[], &spec.to_csv()))?);

    let mut emit = |a: f64, sf: usize, name: String| -> Result<SpectrumSummary> {
        let (report, enc) = payload_power(cfg, a, sf)?;
        let spec = analysis::power_spectrum(&enc.waveform, enc.section_window(Section::Payload))?;
        let extra = [
            ("a", a.to_string()),
            ("two_beta", sf.to_string()),
            ("average_power_w", report.measured_watts.to_string()),
        ];
        paths.push(write(dir, &name, csv_with_config(cfg, &extra, &spec.to_csv()))?);
        Ok(SpectrumSummary {
            a,
            spreading_factor: sf,
            file: name,
            average_power_w: report.measured_watts,
            spectrum_total_w: spec.total_power,
        })
    };
    let amplitude_spectra = cfg
        .a_values
        .iter()
        .map(|&a| emit(a, cfg.spreading_factor, format!("fig11_a{a}.csv")))
        .collect::<Result<Vec<_>>>()?;
    let spreading_spectra = cfg
        .spreading_values
        .iter()
        .map(|&sf| emit(cfg.amplitude, sf, format!("fig12_sf{sf}.csv")))
        .collect::<Result<Vec<_>>>()?;

    let summary = FigureSummary {
        divergence_k,
        max_abs_autocorrelation,
        chaos_spectrum_power_w: spec.total_power,
        amplitude_spectra,
        spreading_spectra,
    };
    paths.push(write(dir, "figures.json", json_with_config(cfg, &summary)?)?);
    Ok(paths)
}

pub fn write_chaos(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let seq = chaos::generate(&cfg.chaos, cfg.chaos_samples)?;
    Ok(vec![write(dir, "chaos.csv", csv_with_config(cfg, &[], &seq.to_csv()))?])
}

/// Packet `index` of a multi-packet run. Packet 0 is the configured one;
/// later packets get random addresses and a random chaos start.
pub fn trial_packet(cfg: &ExperimentConfig, index: usize) -> Result<(PowerPacket, ChaosParams)> {
    let key = cfg.key()?;
    if index == 0 {
        return Ok((cfg.packet()?, cfg.packet_chaos(key)));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(derived_seed(cfg.channel.seed, index as u64));
    let src = rng.random::<u64>() & ((1u64 << cfg.layout.source_bits) - 1);
    let dst = rng.random::<u64>() & ((1u64 << cfg.layout.dest_bits) - 1);
    let x1 = rng.random_range(-BOUND..BOUND);
    let pkt = build_packet(cfg.layout, src, dst, cfg.amplitude)?;
    Ok((pkt, ChaosParams::new(x1, cfg.chaos.sample_period)?))
}

/// Aggregated round-trip result over `cfg.packets` packets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub mode: EncryptionMode,
    pub key: DcskKey,
    pub noise_spectral: f64,
    pub seed: u64,
    pub packets: usize,
    pub recovered_packets: usize,
    /// True when every packet decrypted to the original.
    pub recovered: bool,
    pub header_ber: f64,
    pub bit_errors: usize,
    pub tie_count: usize,
    pub errors: Vec<String>,
}

pub fn roundtrip(cfg: &ExperimentConfig) -> Result<RoundTripReport> {
    cfg.validate()?;
    let key = cfg.key()?;
    let mut recovered_packets = 0;
    let mut header_errors = 0usize;
    let mut bit_errors = 0usize;
    let mut tie_count = 0;
    let mut errors = Vec::new();
    for i in 0..cfg.packets {
        let (pkt, chaos) = trial_packet(cfg, i)?;
        let enc = pipeline::encrypt(&pkt, key, &chaos, cfg.mode)?;
        let mut channel = AwgnChannel::new(AwgnConfig {
            noise_spectral: cfg.channel.noise_spectral,
            seed: derived_seed(cfg.channel.seed, i as u64),
        })?;
        let received = EncryptedPacket {
            waveform: channel.transmit(&enc.waveform),
            ..enc
        };
        let det = pipeline::recover_bits(&received, key)?;
        tie_count += det.ties.len();
        let sent = pkt.to_bitstream().symbols;
        let header = cfg.layout.section_range(Section::Header);
        header_errors += count_errors(&sent[header.clone()], &det.symbols[header]);
        bit_errors += count_errors(&sent, &det.symbols);
        match pipeline::decrypt(&received, key) {
            Ok(p) if p == pkt => recovered_packets += 1,
            Ok(_) => errors.push(format!("packet {i}: recovered packet differs")),
            Err(e) => errors.push(format!("packet {i}: {e}")),
        }
    }
    Ok(RoundTripReport {
        mode: cfg.mode,
        key,
        noise_spectral: cfg.channel.noise_spectral,
        seed: cfg.channel.seed,
        packets: cfg.packets,
        recovered_packets,
        recovered: recovered_packets == cfg.packets,
        header_ber: header_errors as f64 / (cfg.packets * cfg.layout.header_bits()) as f64,
        bit_errors,
        tie_count,
        errors,
    })
}

fn count_errors(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn write_roundtrip(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let report = roundtrip(cfg)?;
    Ok(vec![write(dir, "roundtrip.json", json_with_config(cfg, &report)?)?])
}

/// Aggregated attack result over `cfg.packets` packets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub mode: EncryptionMode,
    /// Guessed key used by the attacker.
    pub key: DcskKey,
    pub true_spreading_factor: usize,
    pub packets: usize,
    /// Bits scored per section, in packet order.
    pub section_bits: [usize; 4],
    pub ber: SectionBer,
    /// Mean payload-window power over the packets.
    pub stolen_power_watts: f64,
    pub input_power_watts: f64,
    pub tie_count: usize,
    /// Report of the first (configured) packet.
    pub first_packet: AttackReport,
}

pub fn attack(cfg: &ExperimentConfig) -> Result<AttackSummary> {
    cfg.validate()?;
    let key = cfg.key()?;
    let guess = cfg.guessed_key()?;
    let mut errors = [0usize; 4];
    let mut stolen = Vec::with_capacity(cfg.packets);
    let mut tie_count = 0;
    let mut first = None;
    for i in 0..cfg.packets {
        let (pkt, chaos) = trial_packet(cfg, i)?;
        let enc = pipeline::encrypt(&pkt, key, &chaos, cfg.mode)?;
        let mut channel = AwgnChannel::new(AwgnConfig {
            noise_spectral: cfg.channel.noise_spectral,
            seed: derived_seed(cfg.channel.seed, i as u64),
        })?;
        let tapped = EncryptedPacket {
            waveform: channel.transmit(&enc.waveform),
            ..enc
        };
        let report = pipeline::eavesdrop(&tapped, guess, &pkt)?;
        for (acc, e) in errors.iter_mut().zip(report.errors) {
            *acc += e;
        }
        stolen.push(report.stolen_power_watts);
        tie_count += report.tie_count;
        first.get_or_insert(report);
    }
    let section_bits = Section::ALL.map(|s| cfg.layout.section_range(s).len() * cfg.packets);
    let rate = |i: usize| errors[i] as f64 / section_bits[i] as f64;
    Ok(AttackSummary {
        mode: cfg.mode,
        key: guess,
        true_spreading_factor: cfg.spreading_factor,
        packets: cfg.packets,
        section_bits,
        ber: SectionBer {
            preamble: rate(0),
            header: rate(1),
            payload: rate(2),
            footer: rate(3),
        },
        stolen_power_watts: crate::sum::sum(stolen.iter().copied()) / stolen.len() as f64,
        input_power_watts: cfg.amplitude * cfg.amplitude,
        tie_count,
        first_packet: first.expect("at least one packet"),
    })
}

pub fn write_attack(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = attack(cfg)?;
    Ok(vec![write(dir, "attack.json", json_with_config(cfg, &summary)?)?])
}

/// Encrypted packet file: the packet waveform plus its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncryptedFile {
    pub encrypted: EncryptedPacket,
}

/// Encrypts the configured packet and writes `encrypted.json` together with
/// the waveform as `encrypted.csv` and `encrypted.bin`.
pub fn write_encrypt(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let (pkt, chaos) = trial_packet(cfg, 0)?;
    let enc = pipeline::encrypt(&pkt, cfg.key()?, &chaos, cfg.mode)?;
    let waveform = enc.waveform.clone();
    Ok(vec![
        write(dir, "encrypted.json", json_with_config(cfg, &EncryptedFile { encrypted: enc })?)?,
        write(dir, "encrypted.csv", waveform.to_csv())?,
        write(dir, "encrypted.bin", waveform.to_bytes())?,
    ])
}

pub fn read_encrypted(path: impl AsRef<Path>) -> Result<EncryptedPacket> {
    #[derive(Deserialize)]
    struct Loose {
        encrypted: EncryptedPacket,
    }
    let loose: Loose = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(loose.encrypted)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DecryptOutput {
    packet: PowerPacket,
    source_id: u64,
    dest_addr: u64,
    tie_count: usize,
}

/// Decrypts an `encrypted.json` file with the configured key into
/// `decrypted.json`.
pub fn write_decrypt(cfg: &ExperimentConfig, input: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let enc = read_encrypted(input)?;
    let d = pipeline::decrypt_with_diagnostics(&enc, cfg.key()?)?;
    let out = DecryptOutput {
        source_id: d.packet.source_id(),
        dest_addr: d.packet.dest_addr(),
        tie_count: d.tie_count,
        packet: d.packet,
    };
    Ok(vec![write(dir, "decrypted.json", json_with_config(cfg, &out)?)?])
}

/// Parses a comma separated `+1/-1` list (also accepting `1`/`0`).
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "1" | "+1" => Ok(Symbol::Plus),
            "-1" | "0" => Ok(Symbol::Minus),
            other => Err(invalid("bits", format!("`{other}` is not a bipolar symbol"))),
        })
        .collect()
}

/// DCSK-modulates `bits` with gain `a` into `modulated.csv` / `.bin`.
pub fn write_modulate(cfg: &ExperimentConfig, bits: &[Symbol], dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let key = cfg.key()?;
    let s = dcsk::modulate(bits, key, &cfg.packet_chaos(key), cfg.amplitude)?;
    Ok(vec![
        write(dir, "modulated.csv", s.to_csv())?,
        write(dir, "modulated.bin", s.to_bytes())?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DemodulateOutput {
    symbols: Vec<Symbol>,
    correlator: Vec<f64>,
    ties: Vec<usize>,
}

/// Demodulates a CSV or binary signal file into `demodulated.json`.
pub fn write_demodulate(cfg: &ExperimentConfig, input: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let key = cfg.key()?;
    let s = BasebandSignal::read(input, cfg.chaos.sample_period)?;
    let y = dcsk::correlate(&s, key)?;
    let det = dcsk::detect(&y, dcsk::TiePolicy::default());
    let out = DemodulateOutput {
        symbols: det.symbols,
        correlator: y,
        ties: det.ties,
    };
    Ok(vec![write(dir, "demodulated.json", json_with_config(cfg, &out)?)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips_through_json() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let partial = ExperimentConfig::from_json(r#"{"amplitude": 5.0}"#).unwrap();
        assert_eq!(partial.amplitude, 5.0);
        assert_eq!(partial.spreading_factor, 100);
    }

    #[test]
    fn invalid_configs_name_the_parameter() {
        let err = ExperimentConfig::from_json(r#"{"a_values": []}"#).unwrap_err();
        assert!(err.to_string().contains("a_values"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"spreading_factor": 7}"#).unwrap_err();
        assert!(err.to_string().contains("spreading_factor"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"chaos": {"initial_value": 2.0, "sample_period": 0.001}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("initial_value"), "{err}");
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derived_seed(1, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn symbol_parsing() {
        assert_eq!(
            parse_symbols("1,-1, +1 0").unwrap(),
            vec![Symbol::Plus, Symbol::Minus, Symbol::Plus, Symbol::Minus]
        );
        assert!(parse_symbols("2").is_err());
    }

    #[test]
    fn noiseless_roundtrip_report() {
        let cfg = ExperimentConfig {
            packets: 5,
            ..Default::default()
        };
        let r = roundtrip(&cfg).unwrap();
        assert!(r.recovered);
        assert_eq!(r.header_ber, 0.0);
        assert_eq!(r.bit_errors, 0);
    }

    #[test]
    fn table1_closed_form_agrees_with_measurement() {
        for row in table1(&ExperimentConfig::default()).unwrap() {
            assert!(row.relative_gap < 1e-9);
        }
    }
}
