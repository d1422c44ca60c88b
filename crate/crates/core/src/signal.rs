//! Uniformly sampled real baseband waveforms and their file formats.
//!
//! Two encodings are supported:
//!
//! * CSV with header `k,value`, one row per sample, `k` starting at 1.
//! * Raw binary: an 8-byte magic `DCSKSIG1`, the sample count as a
//!   little-endian `u64`, then every sample as a little-endian `f64`.
//!   The sample period is not stored and must be supplied by the reader.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODULE: &str = "signal";

pub const BINARY_MAGIC: [u8; 8] = *b"DCSKSIG1";
pub const BINARY_HEADER_LEN: usize = 16;

/// Transmitted (`s_k`) or received (`r_k`) waveform in volts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasebandSignal {
    pub samples: Vec<f64>,
    /// Sample period `T_x` in seconds.
    pub sample_period: f64,
}

impl BasebandSignal {
    pub fn new(samples: Vec<f64>, sample_period: f64) -> Result<Self> {
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(Error::domain(MODULE, "sample_period", "must be positive"));
        }
        Ok(Self {
            samples,
            sample_period,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_period
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 24 + 8);
        out.push_str("k,value\n");
        for (i, v) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, v);
        }
        out
    }

    pub fn from_csv(text: &str, sample_period: f64) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "k,value" => {}
            _ => return Err(Error::frame(MODULE, "missing `k,value` header")),
        }
        let mut samples = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let value = line
                .split_once(',')
                .and_then(|(_, v)| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::frame(MODULE, format!("malformed row {}", row + 2)))?;
            samples.push(value);
        }
        Self::new(samples, sample_period)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 8 * self.samples.len());
        out.extend_from_slice(&BINARY_MAGIC);
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], sample_period: f64) -> Result<Self> {
        if bytes.len() < BINARY_HEADER_LEN || bytes[..8] != BINARY_MAGIC {
            return Err(Error::frame(MODULE, "bad binary signal header"));
        }
        let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice")) as usize;
        let body = &bytes[BINARY_HEADER_LEN..];
        if body.len() != count.saturating_mul(8) {
            return Err(Error::frame(
                MODULE,
                format!("header announces {count} samples, body holds {} bytes", body.len()),
            ));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Self::new(samples, sample_period)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }

    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    /// Reads either encoding, chosen by the file's leading bytes.
    pub fn read(path: impl AsRef<Path>, sample_period: f64) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(&BINARY_MAGIC) {
            Self::from_bytes(&bytes, sample_period)
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::frame(MODULE, "file is neither binary signal nor UTF-8 CSV"))?;
            Self::from_csv(&text, sample_period)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_layout_is_magic_count_then_le_f64() {
        let s = BasebandSignal::new(vec![1.0, -0.5], 0.001).unwrap();
        let b = s.to_bytes();
        assert_eq!(b.len(), 16 + 16);
        assert_eq!(&b[..8], b"DCSKSIG1");
        assert_eq!(&b[8..16], &2u64.to_le_bytes());
        assert_eq!(&b[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&b[24..32], &(-0.5f64).to_le_bytes());
    }

    #[test]
    fn truncated_binary_and_bad_csv_are_frame_errors() {
        let s = BasebandSignal::new(vec![1.0, 2.0, 3.0], 0.001).unwrap();
        let b = s.to_bytes();
        assert!(BasebandSignal::from_bytes(&b[..b.len() - 1], 0.001).is_err());
        assert!(BasebandSignal::from_bytes(&b[1..], 0.001).is_err());
        assert!(BasebandSignal::from_csv("x,y\n1,2\n", 0.001).is_err());
        assert!(BasebandSignal::from_csv("k,value\n1,abc\n", 0.001).is_err());
    }

    #[test]
    fn csv_text() {
        let s = BasebandSignal::new(vec![0.25, -2.0], 0.001).unwrap();
        assert_eq!(s.to_csv(), "k,value\n1,0.25\n2,-2\n");
    }

    proptest! {
        #[test]
        fn encodings_are_lossless(samples in proptest::collection::vec(-1e6f64..1e6, 0..200)) {
            let s = BasebandSignal::new(samples, 0.001).unwrap();
            prop_assert_eq!(&BasebandSignal::from_bytes(&s.to_bytes(), 0.001).unwrap(), &s);
            prop_assert_eq!(&BasebandSignal::from_csv(&s.to_csv(), 0.001).unwrap(), &s);
        }
    }
}
