//! Partial and whole power packet encryption, decryption and the
//! line-tapping eavesdropper.
//!
//! Both modes produce a waveform of `total_bits · 2β` samples at the chip
//! period. Partial mode spreads only the preamble and header and sends the
//! payload and footer as constant `±a` levels; whole mode spreads every bit.
//! In both modes the spread bits carry `±a` on their data half.

use serde::{Deserialize, Serialize};

use crate::analysis::{average_power, bit_error_rate};
use crate::chaos::ChaosParams;
use crate::dcsk::{self, DcskKey, Detection};
use crate::error::{Error, Result};
use crate::packet::{parse_packet, BitStream, PacketLayout, PowerPacket, Section, Symbol};
use crate::signal::BasebandSignal;

const MODULE: &str = "pipeline";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncryptionMode {
    Partial,
    Whole,
}

impl std::str::FromStr for EncryptionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "partial" => Ok(EncryptionMode::Partial),
            "whole" => Ok(EncryptionMode::Whole),
            other => Err(Error::domain(MODULE, "mode", format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for EncryptionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncryptionMode::Partial => "partial",
            EncryptionMode::Whole => "whole",
        })
    }
}

/// Encrypted line waveform. The key is referenced by label only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncryptedPacket {
    pub waveform: BasebandSignal,
    pub mode: EncryptionMode,
    pub layout: PacketLayout,
    /// Nominal line amplitude `a` in volts.
    pub amplitude: f64,
    pub key_id: String,
}

impl EncryptedPacket {
    pub fn with_key_id(mut self, key_id: impl Into<String>) -> Self {
        self.key_id = key_id.into();
        self
    }

    /// Samples per bit implied by the waveform length and layout.
    pub fn samples_per_bit(&self) -> usize {
        self.waveform.len() / self.layout.total_bits()
    }

    /// Sample range of a packet section.
    pub fn section_window(&self, section: Section) -> std::ops::Range<usize> {
        let spb = self.samples_per_bit();
        let bits = self.layout.section_range(section);
        bits.start * spb..bits.end * spb
    }

    fn encrypted_bits(&self) -> usize {
        match self.mode {
            EncryptionMode::Whole => self.layout.total_bits(),
            EncryptionMode::Partial => self.layout.section_range(Section::Header).end,
        }
    }
}

/// Encrypts a packet. The chaos generator starts at `chaos.initial_value` on
/// the packet's first bit.
pub fn encrypt(
    pkt: &PowerPacket,
    key: DcskKey,
    chaos: &ChaosParams,
    mode: EncryptionMode,
) -> Result<EncryptedPacket> {
    pkt.validate()?;
    chaos.validate()?;
    let bits = pkt.to_bitstream().symbols;
    let a = pkt.amplitude;
    let waveform = match mode {
        EncryptionMode::Whole => dcsk::modulate(&bits, key, chaos, a)?,
        EncryptionMode::Partial => {
            let split = pkt.layout.section_range(Section::Header).end;
            let mut spread = dcsk::modulate(&bits[..split], key, chaos, a)?;
            let plain = dcsk::render_plain(&bits[split..], key, a, chaos.sample_period)?;
            spread.samples.extend(plain.samples);
            spread
        }
    };
    Ok(EncryptedPacket {
        waveform,
        mode,
        layout: pkt.layout,
        amplitude: a,
        key_id: "default".to_owned(),
    })
}

/// Recovered packet plus detector diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Decrypted {
    pub packet: PowerPacket,
    pub tie_count: usize,
}

/// Recovers the bit stream of `enc` with `key`, without footer validation.
pub fn recover_bits(enc: &EncryptedPacket, key: DcskKey) -> Result<Detection> {
    let expected = enc.layout.total_bits() * key.spreading_factor();
    if enc.waveform.len() != expected {
        return Err(Error::frame(
            MODULE,
            format!(
                "waveform has {} samples, key and layout imply {expected}",
                enc.waveform.len()
            ),
        ));
    }
    let split = enc.encrypted_bits() * key.spreading_factor();
    let (spread, plain) = enc.waveform.samples.split_at(split);
    let mut det = dcsk::detect(
        &dcsk::correlate_frames(spread, key),
        dcsk::TiePolicy::default(),
    );
    if !plain.is_empty() {
        let rest = dcsk::slice_plain(plain, key)?;
        let offset = det.symbols.len();
        det.symbols.extend(rest.symbols);
        det.ties.extend(rest.ties.into_iter().map(|i| i + offset));
    }
    Ok(det)
}

/// Decrypts and parses a packet, reporting how many decisions were ties.
pub fn decrypt_with_diagnostics(enc: &EncryptedPacket, key: DcskKey) -> Result<Decrypted> {
    let det = recover_bits(enc, key)?;
    let stream = BitStream {
        symbols: det.symbols,
        amplitude: enc.amplitude,
    };
    Ok(Decrypted {
        packet: parse_packet(&stream, enc.layout)?,
        tie_count: det.ties.len(),
    })
}

/// Decrypts with `key`. A wrong key gives a frame error: either the waveform
/// length does not match `2β` per bit or the footer check fails.
pub fn decrypt(enc: &EncryptedPacket, key: DcskKey) -> Result<PowerPacket> {
    decrypt_with_diagnostics(enc, key).map(|d| d.packet)
}

/// Bit error rate of each packet section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionBer {
    pub preamble: f64,
    pub header: f64,
    pub payload: f64,
    pub footer: f64,
}

impl SectionBer {
    pub fn get(&self, section: Section) -> f64 {
        match section {
            Section::Preamble => self.preamble,
            Section::Header => self.header,
            Section::Payload => self.payload,
            Section::Footer => self.footer,
        }
    }
}

/// What an attacker tapping the line obtains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub mode: EncryptionMode,
    pub key: DcskKey,
    pub ber: SectionBer,
    /// Per-section error counts, same order as `ber`.
    pub errors: [usize; 4],
    pub stolen_power_watts: f64,
    pub tie_count: usize,
}

/// Attacker model: the tapped waveform goes through the same receiver as
/// the router's, but with a guessed key `2β'`, and the result is scored per
/// section against `truth`. The stolen power is what a device on the line
/// draws during the payload window.
///
/// Bits are cut every `2β'` samples; positions the guess does not reach are
/// scored as the detector default `+1`.
pub fn eavesdrop(enc: &EncryptedPacket, guessed_key: DcskKey, truth: &PowerPacket) -> Result<AttackReport> {
    if truth.layout != enc.layout {
        return Err(Error::domain(MODULE, "truth", "layout differs from the encrypted packet"));
    }
    let sf = guessed_key.spreading_factor();
    let samples = &enc.waveform.samples;
    let split = (enc.encrypted_bits() * sf).min(samples.len());
    let (spread, plain) = samples.split_at(split);
    let mut det = dcsk::detect(
        &dcsk::correlate_frames(&spread[..spread.len() / sf * sf], guessed_key),
        dcsk::TiePolicy::default(),
    );
    if plain.len() >= sf {
        let rest = dcsk::slice_plain(&plain[..plain.len() / sf * sf], guessed_key)?;
        let offset = det.symbols.len();
        det.symbols.extend(rest.symbols);
        det.ties.extend(rest.ties.into_iter().map(|i| i + offset));
    }
    let total = enc.layout.total_bits();
    let mut guessed = det.symbols.clone();
    guessed.resize(total.max(guessed.len()), Symbol::Plus);
    let sent = truth.to_bitstream().symbols;

    let mut errors = [0usize; 4];
    let mut rates = [0.0f64; 4];
    for (i, section) in Section::ALL.into_iter().enumerate() {
        let range = enc.layout.section_range(section);
        let ber = bit_error_rate(&sent[range.clone()], &guessed[range.clone()])?;
        rates[i] = ber;
        errors[i] = (ber * range.len() as f64).round() as usize;
    }
    Ok(AttackReport {
        mode: enc.mode,
        key: guessed_key,
        ber: SectionBer {
            preamble: rates[0],
            header: rates[1],
            payload: rates[2],
            footer: rates[3],
        },
        errors,
        stolen_power_watts: average_power(&enc.waveform, enc.section_window(Section::Payload))?,
        tie_count: det.ties.iter().filter(|&&i| i < total).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::build_packet;

    fn packet(a: f64) -> PowerPacket {
        build_packet(PacketLayout::default(), 3, 5, a).unwrap()
    }

    fn key(sf: usize) -> DcskKey {
        DcskKey::from_spreading_factor(sf).unwrap()
    }

    #[test]
    fn both_modes_have_the_same_duration() {
        let pkt = packet(2.0);
        let c = ChaosParams::default();
        let p = encrypt(&pkt, key(100), &c, EncryptionMode::Partial).unwrap();
        let w = encrypt(&pkt, key(100), &c, EncryptionMode::Whole).unwrap();
        assert_eq!(p.waveform.len(), 105 * 100);
        assert_eq!(p.waveform.len(), w.waveform.len());
        assert_eq!(p.samples_per_bit(), 100);
    }

    #[test]
    fn partial_payload_is_plain_constant_level() {
        let pkt = packet(2.0);
        let enc = encrypt(&pkt, key(100), &ChaosParams::default(), EncryptionMode::Partial).unwrap();
        let w = enc.section_window(Section::Payload);
        assert!(enc.waveform.samples[w.clone()].iter().all(|&v| v == 2.0));
        assert_eq!(average_power(&enc.waveform, w).unwrap(), 4.0);
        // spread preamble and header are shared with whole mode
        let whole = encrypt(&pkt, key(100), &ChaosParams::default(), EncryptionMode::Whole).unwrap();
        let split = enc.section_window(Section::Header).end;
        assert_eq!(enc.waveform.samples[..split], whole.waveform.samples[..split]);
    }

    #[test]
    fn round_trip_in_both_modes() {
        for mode in [EncryptionMode::Partial, EncryptionMode::Whole] {
            for a in [0.5, 2.0, 10.0] {
                let pkt = packet(a);
                let enc = encrypt(&pkt, key(100), &ChaosParams::default(), mode).unwrap();
                let d = decrypt_with_diagnostics(&enc, key(100)).unwrap();
                assert_eq!(d.packet, pkt);
                assert_eq!(d.tie_count, 0);
            }
        }
    }

    #[test]
    fn wrong_key_decrypt_is_a_frame_error() {
        let pkt = packet(2.0);
        for mode in [EncryptionMode::Partial, EncryptionMode::Whole] {
            let enc = encrypt(&pkt, key(100), &ChaosParams::default(), mode).unwrap();
            for wrong in [98, 102, 50, 200] {
                assert!(matches!(decrypt(&enc, key(wrong)), Err(Error::Frame { .. })));
            }
        }
    }

    #[test]
    fn flipped_footer_sample_block_fails_footer_check() {
        let pkt = packet(2.0);
        let mut enc = encrypt(&pkt, key(10), &ChaosParams::default(), EncryptionMode::Partial).unwrap();
        let w = enc.section_window(Section::Footer);
        for v in &mut enc.waveform.samples[w.start..w.start + 10] {
            *v = -*v;
        }
        assert!(matches!(decrypt(&enc, key(10)), Err(Error::Frame { .. })));
    }

    #[test]
    fn correct_key_attack_reads_everything() {
        let pkt = packet(2.0);
        for mode in [EncryptionMode::Partial, EncryptionMode::Whole] {
            let enc = encrypt(&pkt, key(100), &ChaosParams::default(), mode).unwrap();
            let r = eavesdrop(&enc, key(100), &pkt).unwrap();
            assert_eq!(r.ber.header, 0.0);
            assert_eq!(r.ber.preamble, 0.0);
            assert_eq!(r.errors, [0; 4]);
        }
    }

    #[test]
    fn partial_mode_exposes_full_payload_power() {
        for a in [2.0, 5.0, 10.0] {
            let pkt = packet(a);
            let enc = encrypt(&pkt, key(100), &ChaosParams::default(), EncryptionMode::Partial).unwrap();
            for guess in [100, 102, 200, 50] {
                let r = eavesdrop(&enc, key(guess), &pkt).unwrap();
                assert_eq!(r.stolen_power_watts, a * a);
            }
        }
    }

    #[test]
    fn whole_mode_steals_less_than_partial() {
        let pkt = packet(2.0);
        let c = ChaosParams::default();
        let whole = encrypt(&pkt, key(100), &c, EncryptionMode::Whole).unwrap();
        let partial = encrypt(&pkt, key(100), &c, EncryptionMode::Partial).unwrap();
        let sw = eavesdrop(&whole, key(98), &pkt).unwrap().stolen_power_watts;
        let sp = eavesdrop(&partial, key(98), &pkt).unwrap().stolen_power_watts;
        assert!(sw < sp);
    }

    #[test]
    fn mode_parsing_and_json() {
        assert_eq!("Whole".parse::<EncryptionMode>().unwrap(), EncryptionMode::Whole);
        assert!("half".parse::<EncryptionMode>().is_err());
        let pkt = packet(2.0);
        let enc = encrypt(&pkt, key(4), &ChaosParams::default(), EncryptionMode::Partial).unwrap();
        let r = eavesdrop(&enc, key(6), &pkt).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["mode"], "partial");
        assert_eq!(v["key"]["spreading_factor"], 6);
        assert!(v["ber"]["header"].is_number());
        assert!(v["stolen_power_watts"].is_number());
        assert!(v["tie_count"].is_number());
    }
}
