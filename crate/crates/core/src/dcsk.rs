//! Differential chaos shift keying.
//!
//! Every bit occupies `2β` chip periods. The chaos generator runs at the
//! chip rate; the first `β` chips of each bit period are sent as the
//! reference half and the second half repeats them, delayed by `β`,
//! multiplied by `data_gain · b`. The chips the generator produces during
//! the data half are not transmitted.
//!
//! The receiver correlates each data half with the preceding reference
//! half and decides on the sign of the result.

use serde::{Deserialize, Serialize};

use crate::chaos::ChaosParams;
use crate::error::{Error, Result};
use crate::packet::Symbol;
use crate::signal::BasebandSignal;
use crate::sum::KahanSum;

const MODULE: &str = "dcsk";

/// Shared secret: the spreading factor `2β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "KeyRepr", into = "KeyRepr")]
pub struct DcskKey {
    half_spreading: usize,
}

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    spreading_factor: usize,
}

impl TryFrom<KeyRepr> for DcskKey {
    type Error = Error;

    fn try_from(r: KeyRepr) -> Result<Self> {
        DcskKey::from_spreading_factor(r.spreading_factor)
    }
}

impl From<DcskKey> for KeyRepr {
    fn from(k: DcskKey) -> Self {
        KeyRepr {
            spreading_factor: k.spreading_factor(),
        }
    }
}

impl DcskKey {
    /// Key with half spreading factor `β >= 1`.
    pub fn new(half_spreading: usize) -> Result<Self> {
        if half_spreading == 0 {
            return Err(Error::domain(MODULE, "beta", "must be at least 1"));
        }
        Ok(Self { half_spreading })
    }

    /// Key from the full spreading factor `2β`, which must be even.
    pub fn from_spreading_factor(spreading_factor: usize) -> Result<Self> {
        if spreading_factor == 0 || !spreading_factor.is_multiple_of(2) {
            return Err(Error::domain(
                MODULE,
                "spreading_factor",
                format!("{spreading_factor} must be a positive even number"),
            ));
        }
        Self::new(spreading_factor / 2)
    }

    pub fn beta(&self) -> usize {
        self.half_spreading
    }

    pub fn spreading_factor(&self) -> usize {
        2 * self.half_spreading
    }

    /// Bit period `T_b = 2β T_x`.
    pub fn bit_period(&self, chip_period: f64) -> f64 {
        self.spreading_factor() as f64 * chip_period
    }
}

fn check_gain(data_gain: f64) -> Result<()> {
    if data_gain.is_finite() && data_gain > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(MODULE, "data_gain", format!("{data_gain} must be positive")))
    }
}

/// Reference chips of `bit_count` consecutive bits, `β` per bit.
pub fn reference_chips(bit_count: usize, key: DcskKey, chaos: &ChaosParams) -> Vec<f64> {
    let beta = key.beta();
    let mut chips = chaos.chips();
    let mut out = Vec::with_capacity(bit_count * beta);
    for _ in 0..bit_count {
        out.extend(chips.by_ref().take(beta));
        // data-slot chips are generated but not sent
        chips.by_ref().take(beta).for_each(drop);
    }
    out
}

/// DCSK modulator. `data_gain = 1` is the classic scheme; the power-carrying
/// variant scales the data half by the line amplitude.
pub fn modulate(
    bits: &[Symbol],
    key: DcskKey,
    chaos: &ChaosParams,
    data_gain: f64,
) -> Result<BasebandSignal> {
    chaos.validate()?;
    check_gain(data_gain)?;
    if bits.is_empty() {
        return Err(Error::domain(MODULE, "bits", "empty bit stream"));
    }
    let beta = key.beta();
    let chips = reference_chips(bits.len(), key, chaos);
    let mut samples = Vec::with_capacity(bits.len() * 2 * beta);
    for (bit, reference) in bits.iter().zip(chips.chunks_exact(beta)) {
        let level = data_gain * bit.value();
        samples.extend_from_slice(reference);
        samples.extend(reference.iter().map(|x| level * x));
    }
    BasebandSignal::new(samples, chaos.sample_period)
}

fn check_framing(len: usize, key: DcskKey) -> Result<()> {
    if !len.is_multiple_of(key.spreading_factor()) {
        return Err(Error::frame(
            MODULE,
            format!(
                "{len} samples is not a multiple of the spreading factor {}",
                key.spreading_factor()
            ),
        ));
    }
    Ok(())
}

/// Correlator output `y_l = Σ r_k r_{k-β}` over the data half of each bit.
pub fn correlate(received: &BasebandSignal, key: DcskKey) -> Result<Vec<f64>> {
    check_framing(received.len(), key)?;
    Ok(correlate_frames(&received.samples, key))
}

pub(crate) fn correlate_frames(samples: &[f64], key: DcskKey) -> Vec<f64> {
    let beta = key.beta();
    samples
        .chunks_exact(2 * beta)
        .map(|frame| {
            let (reference, data) = frame.split_at(beta);
            let acc: KahanSum = data.iter().zip(reference).map(|(d, r)| d * r).collect();
            acc.total()
        })
        .collect()
}

/// Split of one correlator output into signal, signal-noise and
/// noise-noise parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorDecomposition {
    /// `g b Σ x²`.
    pub signal_term: f64,
    /// `Σ x (g b ξ_ref + ξ_data)`.
    pub cross_term: f64,
    /// `Σ ξ_ref ξ_data`.
    pub noise_term: f64,
}

impl CorrelatorDecomposition {
    pub fn total(&self) -> f64 {
        self.signal_term + self.cross_term + self.noise_term
    }
}

/// Decomposes the correlator output of one bit sent with reference chips
/// `chips` through additive noise `noise_ref` (reference half) and
/// `noise_data` (data half).
pub fn decompose(
    chips: &[f64],
    noise_ref: &[f64],
    noise_data: &[f64],
    bit: Symbol,
    data_gain: f64,
) -> Result<CorrelatorDecomposition> {
    check_gain(data_gain)?;
    if noise_ref.len() != chips.len() || noise_data.len() != chips.len() {
        return Err(Error::domain(
            MODULE,
            "noise",
            format!(
                "lengths {} / {} / {} differ",
                chips.len(),
                noise_ref.len(),
                noise_data.len()
            ),
        ));
    }
    let level = data_gain * bit.value();
    let mut signal = KahanSum::new();
    let mut cross = KahanSum::new();
    let mut noise = KahanSum::new();
    for ((x, nr), nd) in chips.iter().zip(noise_ref).zip(noise_data) {
        signal.add(x * x);
        cross.add(x * (level * nr + nd));
        noise.add(nr * nd);
    }
    Ok(CorrelatorDecomposition {
        signal_term: level * signal.total(),
        cross_term: cross.total(),
        noise_term: noise.total(),
    })
}

/// Decision for a correlator output of exactly zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    #[default]
    Plus,
    Minus,
}

/// Detected symbols plus the indices of bits decided by the tie policy.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Detection {
    pub symbols: Vec<Symbol>,
    pub ties: Vec<usize>,
}

/// Zero-threshold detector.
pub fn detect(y: &[f64], tie: TiePolicy) -> Detection {
    let mut ties = Vec::new();
    let symbols = y
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                Symbol::Plus
            } else if v < 0.0 {
                Symbol::Minus
            } else {
                ties.push(i);
                match tie {
                    TiePolicy::Plus => Symbol::Plus,
                    TiePolicy::Minus => Symbol::Minus,
                }
            }
        })
        .collect();
    Detection { symbols, ties }
}

/// Correlate then detect with the default tie policy.
pub fn demodulate(received: &BasebandSignal, key: DcskKey) -> Result<Detection> {
    Ok(detect(&correlate(received, key)?, TiePolicy::default()))
}

/// Unspread rendering: each bit held at `±amplitude` for `2β` samples.
pub fn render_plain(bits: &[Symbol], key: DcskKey, amplitude: f64, sample_period: f64) -> Result<BasebandSignal> {
    let sf = key.spreading_factor();
    let samples = bits
        .iter()
        .flat_map(|b| std::iter::repeat_n(amplitude * b.value(), sf))
        .collect();
    BasebandSignal::new(samples, sample_period)
}

/// Recovers unspread bits from the sign of each bit period's sample sum.
pub fn slice_plain(samples: &[f64], key: DcskKey) -> Result<Detection> {
    check_framing(samples.len(), key)?;
    let sums: Vec<f64> = samples
        .chunks_exact(key.spreading_factor())
        .map(|c| c.iter().copied().collect::<KahanSum>().total())
        .collect();
    Ok(detect(&sums, TiePolicy::default()))
}
