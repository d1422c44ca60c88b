//! Power packet framing: preamble, header, payload and footer sections over
//! the bipolar alphabet `{+1, -1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODULE: &str = "packet";

/// One logical bit on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Symbol {
    Plus,
    Minus,
}

impl Symbol {
    /// `+1.0` or `-1.0`.
    pub fn value(self) -> f64 {
        match self {
            Symbol::Plus => 1.0,
            Symbol::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Symbol::Plus => Symbol::Minus,
            Symbol::Minus => Symbol::Plus,
        }
    }

    /// Maps a binary digit with `1 -> +1`, `0 -> -1`.
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Symbol::Plus
        } else {
            Symbol::Minus
        }
    }
}

impl From<Symbol> for i8 {
    fn from(s: Symbol) -> i8 {
        match s {
            Symbol::Plus => 1,
            Symbol::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Symbol {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Symbol::Plus),
            -1 => Ok(Symbol::Minus),
            other => Err(format!("symbol must be +1 or -1, got {other}")),
        }
    }
}

/// Footer terminator. Longer footers repeat it cyclically.
pub const FOOTER_PATTERN: [Symbol; 8] = [
    Symbol::Plus,
    Symbol::Minus,
    Symbol::Minus,
    Symbol::Plus,
    Symbol::Plus,
    Symbol::Minus,
    Symbol::Minus,
    Symbol::Plus,
];

/// Section sizes of a power packet, in bits.
///
/// The header is split into a source-id field followed by a
/// destination-address field, both most-significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketLayout {
    pub preamble_bits: usize,
    pub source_bits: usize,
    pub dest_bits: usize,
    pub payload_bits: usize,
    pub footer_bits: usize,
}

impl Default for PacketLayout {
    fn default() -> Self {
        Self {
            preamble_bits: 4,
            source_bits: 4,
            dest_bits: 4,
            payload_bits: 85,
            footer_bits: 8,
        }
    }
}

/// Packet sections in transmission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Preamble,
    Header,
    Payload,
    Footer,
}

impl Section {
    pub const ALL: [Section; 4] = [
        Section::Preamble,
        Section::Header,
        Section::Payload,
        Section::Footer,
    ];
}

impl PacketLayout {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("preamble_bits", self.preamble_bits),
            ("source_bits", self.source_bits),
            ("dest_bits", self.dest_bits),
            ("payload_bits", self.payload_bits),
            ("footer_bits", self.footer_bits),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::domain(MODULE, name, "must be at least 1"));
            }
        }
        if self.source_bits > 63 || self.dest_bits > 63 {
            return Err(Error::domain(MODULE, "header", "address fields are limited to 63 bits"));
        }
        Ok(())
    }

    pub fn header_bits(&self) -> usize {
        self.source_bits + self.dest_bits
    }

    pub fn total_bits(&self) -> usize {
        self.preamble_bits + self.header_bits() + self.payload_bits + self.footer_bits
    }

    /// Bit index range of a section within the serialized stream.
    pub fn section_range(&self, section: Section) -> std::ops::Range<usize> {
        let header_start = self.preamble_bits;
        let payload_start = header_start + self.header_bits();
        let footer_start = payload_start + self.payload_bits;
        match section {
            Section::Preamble => 0..header_start,
            Section::Header => header_start..payload_start,
            Section::Payload => payload_start..footer_start,
            Section::Footer => footer_start..self.total_bits(),
        }
    }

    pub fn footer(&self) -> Vec<Symbol> {
        FOOTER_PATTERN.iter().copied().cycle().take(self.footer_bits).collect()
    }

    pub fn preamble(&self) -> Vec<Symbol> {
        [Symbol::Plus, Symbol::Minus]
            .iter()
            .copied()
            .cycle()
            .take(self.preamble_bits)
            .collect()
    }
}

/// A framed power packet with its line voltage amplitude `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPacket {
    pub layout: PacketLayout,
    pub preamble: Vec<Symbol>,
    pub header: Vec<Symbol>,
    pub payload: Vec<Symbol>,
    pub footer: Vec<Symbol>,
    /// Voltage amplitude in volts.
    pub amplitude: f64,
}

/// Bipolar symbol stream at a given amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitStream {
    pub symbols: Vec<Symbol>,
    pub amplitude: f64,
}

fn encode_field(value: u64, width: usize, out: &mut Vec<Symbol>) {
    out.extend((0..width).rev().map(|i| Symbol::from_bit((value >> i) & 1 == 1)));
}

fn decode_field(bits: &[Symbol]) -> u64 {
    bits.iter()
        .fold(0, |acc, s| (acc << 1) | u64::from(*s == Symbol::Plus))
}

fn check_amplitude(amplitude: f64) -> Result<()> {
    if amplitude.is_finite() && amplitude > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(MODULE, "amplitude", format!("{amplitude} must be positive")))
    }
}

/// Frames a packet: alternating preamble, source and destination header
/// fields, an all-`+1` payload and the fixed footer.
pub fn build_packet(
    layout: PacketLayout,
    source_id: u64,
    dest_addr: u64,
    amplitude: f64,
) -> Result<PowerPacket> {
    layout.validate()?;
    check_amplitude(amplitude)?;
    if source_id >> layout.source_bits != 0 {
        return Err(Error::domain(
            MODULE,
            "source_id",
            format!("{source_id} does not fit in {} bits", layout.source_bits),
        ));
    }
    if dest_addr >> layout.dest_bits != 0 {
        return Err(Error::domain(
            MODULE,
            "dest_addr",
            format!("{dest_addr} does not fit in {} bits", layout.dest_bits),
        ));
    }
    let mut header = Vec::with_capacity(layout.header_bits());
    encode_field(source_id, layout.source_bits, &mut header);
    encode_field(dest_addr, layout.dest_bits, &mut header);
    Ok(PowerPacket {
        layout,
        preamble: layout.preamble(),
        header,
        payload: vec![Symbol::Plus; layout.payload_bits],
        footer: layout.footer(),
        amplitude,
    })
}

impl PowerPacket {
    pub fn source_id(&self) -> u64 {
        decode_field(&self.header[..self.layout.source_bits])
    }

    pub fn dest_addr(&self) -> u64 {
        decode_field(&self.header[self.layout.source_bits..])
    }

    pub fn section(&self, section: Section) -> &[Symbol] {
        match section {
            Section::Preamble => &self.preamble,
            Section::Header => &self.header,
            Section::Payload => &self.payload,
            Section::Footer => &self.footer,
        }
    }

    /// Checks section lengths, the all-`+1` payload and the amplitude.
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        check_amplitude(self.amplitude)?;
        for section in Section::ALL {
            let expected = self.layout.section_range(section).len();
            if self.section(section).len() != expected {
                return Err(Error::domain(
                    MODULE,
                    "section",
                    format!("{section:?} has {} bits, layout expects {expected}", self.section(section).len()),
                ));
            }
        }
        if self.payload.iter().any(|s| *s != Symbol::Plus) {
            return Err(Error::domain(MODULE, "payload", "payload must be all +1"));
        }
        Ok(())
    }

    pub fn to_bitstream(&self) -> BitStream {
        let mut symbols = Vec::with_capacity(self.layout.total_bits());
        for section in Section::ALL {
            symbols.extend_from_slice(self.section(section));
        }
        BitStream {
            symbols,
            amplitude: self.amplitude,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pkt: PowerPacket = serde_json::from_str(text)?;
        pkt.validate()?;
        Ok(pkt)
    }
}

/// Splits a stream into sections and validates the footer.
pub fn parse_packet(bits: &BitStream, layout: PacketLayout) -> Result<PowerPacket> {
    layout.validate()?;
    if bits.symbols.len() != layout.total_bits() {
        return Err(Error::frame(
            MODULE,
            format!(
                "stream has {} bits, layout expects {}",
                bits.symbols.len(),
                layout.total_bits()
            ),
        ));
    }
    let slice = |s: Section| bits.symbols[layout.section_range(s)].to_vec();
    let footer = slice(Section::Footer);
    if footer != layout.footer() {
        return Err(Error::frame(MODULE, "footer pattern mismatch"));
    }
    Ok(PowerPacket {
        layout,
        preamble: slice(Section::Preamble),
        header: slice(Section::Header),
        payload: slice(Section::Payload),
        footer,
        amplitude: bits.amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(bits: &[u8]) -> Vec<Symbol> {
        bits.iter().map(|b| Symbol::from_bit(*b == 1)).collect()
    }

    #[test]
    fn header_encodes_source_then_destination_msb_first() {
        let pkt = build_packet(PacketLayout::default(), 3, 5, 2.0).unwrap();
        assert_eq!(pkt.header, sym(&[0, 0, 1, 1, 0, 1, 0, 1]));
        assert_eq!((pkt.source_id(), pkt.dest_addr()), (3, 5));
    }

    #[test]
    fn header_matches_string_formatting_oracle() {
        for (src, dst) in [(0u64, 15u64), (9, 6), (15, 0), (7, 8)] {
            let pkt = build_packet(PacketLayout::default(), src, dst, 1.0).unwrap();
            let expected: Vec<Symbol> = format!("{src:04b}{dst:04b}")
                .chars()
                .map(|c| Symbol::from_bit(c == '1'))
                .collect();
            assert_eq!(pkt.header, expected);
        }
    }

    #[test]
    fn sections_have_layout_lengths() {
        let pkt = build_packet(PacketLayout::default(), 1, 2, 2.0).unwrap();
        assert_eq!(pkt.payload, vec![Symbol::Plus; 85]);
        assert_eq!(pkt.preamble, sym(&[1, 0, 1, 0]));
        assert_eq!(pkt.footer, FOOTER_PATTERN.to_vec());
        assert_eq!(pkt.to_bitstream().symbols.len(), 4 + 8 + 85 + 8);
        assert_eq!(pkt.to_bitstream().amplitude, 2.0);
    }

    #[test]
    fn field_overflow_and_bad_amplitude_are_rejected() {
        let layout = PacketLayout::default();
        assert!(build_packet(layout, 16, 0, 1.0).is_err());
        assert!(build_packet(layout, 0, 16, 1.0).is_err());
        assert!(build_packet(layout, 0, 0, 0.0).is_err());
        let empty = PacketLayout {
            payload_bits: 0,
            ..layout
        };
        assert!(build_packet(empty, 0, 0, 1.0).is_err());
    }

    #[test]
    fn parse_rejects_flipped_footer_and_short_stream() {
        let pkt = build_packet(PacketLayout::default(), 3, 5, 2.0).unwrap();
        let mut stream = pkt.to_bitstream();
        let last = stream.symbols.len() - 1;
        stream.symbols[last] = stream.symbols[last].flip();
        assert!(matches!(parse_packet(&stream, pkt.layout), Err(Error::Frame { .. })));
        let mut short = pkt.to_bitstream();
        short.symbols.pop();
        assert!(matches!(parse_packet(&short, pkt.layout), Err(Error::Frame { .. })));
    }

    #[test]
    fn json_uses_plus_minus_one() {
        let layout = PacketLayout {
            preamble_bits: 2,
            source_bits: 1,
            dest_bits: 1,
            payload_bits: 1,
            footer_bits: 2,
        };
        let pkt = build_packet(layout, 1, 0, 1.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&pkt.to_json().unwrap()).unwrap();
        assert_eq!(v["preamble"], serde_json::json!([1, -1]));
        assert_eq!(v["header"], serde_json::json!([1, -1]));
        assert_eq!(v["footer"], serde_json::json!([1, -1]));
        assert_eq!(v["amplitude"], serde_json::json!(1.5));
        assert_eq!(PowerPacket::from_json(&pkt.to_json().unwrap()).unwrap(), pkt);
        assert!(PowerPacket::from_json(&pkt.to_json().unwrap().replace("-1", "0")).is_err());
    }

    fn layout_strategy() -> impl Strategy<Value = PacketLayout> {
        (1usize..9, 1usize..9, 1usize..9, 1usize..120, 1usize..17).prop_map(|(p, s, d, n, f)| {
            PacketLayout {
                preamble_bits: p,
                source_bits: s,
                dest_bits: d,
                payload_bits: n,
                footer_bits: f,
            }
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(layout in layout_strategy(), src in any::<u64>(), dst in any::<u64>(), a in 0.1f64..20.0) {
            let src = src & ((1 << layout.source_bits) - 1);
            let dst = dst & ((1 << layout.dest_bits) - 1);
            let pkt = build_packet(layout, src, dst, a).unwrap();
            let stream = pkt.to_bitstream();
            prop_assert_eq!(stream.symbols.len(), layout.total_bits());
            prop_assert_eq!(parse_packet(&stream, layout).unwrap(), pkt);
        }
    }
}
