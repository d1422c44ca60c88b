//! Chaotic chip generation with the normalized improved logistic map
//! `x[k+1] = sqrt(2) * (1 - x[k]^2)` and the statistics used to characterize it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{sum, KahanSum};

const MODULE: &str = "chaos";

/// Upper bound of the map's invariant interval `[-sqrt(2), sqrt(2)]`.
pub const BOUND: f64 = std::f64::consts::SQRT_2;

/// One iteration of the map.
///
/// The result is clamped to `[-sqrt(2), sqrt(2)]`: at `x = sqrt(2)` the
/// rounded product `x * x` exceeds 2 by one ulp and would otherwise leave
/// the interval.
#[inline]
pub fn step(x: f64) -> f64 {
    (BOUND * (1.0 - x * x)).clamp(-BOUND, BOUND)
}

/// Initial condition and chip period of the chaos generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosParams {
    /// First sample `x1`.
    pub initial_value: f64,
    /// Chip period `T_x` in seconds.
    pub sample_period: f64,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self {
            initial_value: 0.75,
            sample_period: 0.001,
        }
    }
}

impl ChaosParams {
    pub fn new(initial_value: f64, sample_period: f64) -> Result<Self> {
        let params = Self {
            initial_value,
            sample_period,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_value.is_finite() && self.initial_value.abs() <= BOUND) {
            return Err(Error::domain(
                MODULE,
                "initial_value",
                format!("{} is outside [-sqrt(2), sqrt(2)]", self.initial_value),
            ));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(Error::domain(
                MODULE,
                "sample_period",
                format!("{} must be positive", self.sample_period),
            ));
        }
        Ok(())
    }

    /// Parameters whose first sample is the one reached after `chips`
    /// iterations from this initial value.
    pub fn advanced(&self, chips: usize) -> Self {
        let mut x = self.initial_value;
        for _ in 0..chips {
            x = step(x);
        }
        Self {
            initial_value: x,
            sample_period: self.sample_period,
        }
    }

    /// Infinite iterator over the chip values starting at `x1`.
    pub fn chips(&self) -> Chips {
        Chips {
            next: self.initial_value,
        }
    }
}

/// Iterator over successive map outputs.
#[derive(Debug, Clone)]
pub struct Chips {
    next: f64,
}

impl Iterator for Chips {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let x = self.next;
        self.next = step(x);
        Some(x)
    }
}

/// Sampled output of the map together with its chip period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaoticSequence {
    pub samples: Vec<f64>,
    pub sample_period: f64,
}

impl ChaoticSequence {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV dump with header `k,x`; `k` starts at 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,x\n");
        for (i, x) in self.samples.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, x));
        }
        out
    }
}

/// Generates `count` samples starting with `params.initial_value`.
pub fn generate(params: &ChaosParams, count: usize) -> Result<ChaoticSequence> {
    params.validate()?;
    if count == 0 {
        return Err(Error::domain(MODULE, "count", "must be at least 1"));
    }
    Ok(ChaoticSequence {
        samples: params.chips().take(count).collect(),
        sample_period: params.sample_period,
    })
}

/// Arithmetic mean of the squared samples, `E[x^2]`.
pub fn mean_square(seq: &ChaoticSequence) -> Result<f64> {
    mean_square_of(&seq.samples)
}

pub(crate) fn mean_square_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain(MODULE, "sequence", "empty sequence"));
    }
    Ok(sum(samples.iter().map(|x| x * x)) / samples.len() as f64)
}

/// Biased raw autocorrelation estimate `R[n] = (1/N) sum_k x[k] x[k-n]` for
/// `n = 0..=max_lag`. No mean is removed.
pub fn autocorrelation(seq: &ChaoticSequence, max_lag: usize) -> Result<Vec<f64>> {
    let x = &seq.samples;
    if max_lag >= x.len() {
        return Err(Error::domain(
            MODULE,
            "max_lag",
            format!("{} must be below the sequence length {}", max_lag, x.len()),
        ));
    }
    let n = x.len() as f64;
    Ok((0..=max_lag)
        .map(|lag| {
            let acc: KahanSum = x[lag..].iter().zip(x).map(|(a, b)| a * b).collect();
            acc.total() / n
        })
        .collect())
}

/// Autocorrelation divided by `R[0]`.
pub fn normalized_autocorrelation(seq: &ChaoticSequence, max_lag: usize) -> Result<Vec<f64>> {
    let r = autocorrelation(seq, max_lag)?;
    let r0 = r[0];
    if r0 == 0.0 {
        return Err(Error::domain(MODULE, "sequence", "zero energy, cannot normalize"));
    }
    Ok(r.into_iter().map(|v| v / r0).collect())
}

/// First 1-based index `k <= max_iter` where the two trajectories differ by
/// more than `threshold`, or `None` if they stay within it.
pub fn divergence_time(
    first: &ChaosParams,
    second: &ChaosParams,
    threshold: f64,
    max_iter: usize,
) -> Result<Option<usize>> {
    first.validate()?;
    second.validate()?;
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::domain(MODULE, "threshold", "must be positive"));
    }
    Ok(first
        .chips()
        .zip(second.chips())
        .take(max_iter)
        .position(|(a, b)| (a - b).abs() > threshold)
        .map(|i| i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(x1: f64) -> ChaosParams {
        ChaosParams::new(x1, 0.001).unwrap()
    }

    #[test]
    fn first_iterate_from_three_quarters() {
        let seq = generate(&params(0.75), 2).unwrap();
        assert_eq!(seq.samples[0], 0.75);
        assert_eq!(seq.samples[1], 0.618_718_433_538_229_1);
    }

    #[test]
    fn zero_maps_to_sqrt2_and_boundary_to_negative_boundary() {
        assert_eq!(generate(&params(0.0), 2).unwrap().samples, vec![0.0, BOUND]);
        let seq = generate(&params(BOUND), 2).unwrap();
        assert_eq!(seq.samples, vec![BOUND, -BOUND]);
        let seq = generate(&params(-BOUND), 1000).unwrap();
        assert!(seq.samples.iter().all(|&x| x == -BOUND));
    }

    #[test]
    fn rejects_out_of_range_seed_and_zero_count() {
        assert!(ChaosParams::new(1.5, 0.001).is_err());
        assert!(ChaosParams::new(0.5, 0.0).is_err());
        assert!(generate(&params(0.5), 0).is_err());
        let bad = ChaosParams {
            initial_value: f64::NAN,
            sample_period: 0.001,
        };
        assert!(generate(&bad, 3).is_err());
    }

    #[test]
    fn constant_sequence_statistics() {
        let seq = ChaoticSequence {
            samples: vec![0.3; 50],
            sample_period: 0.001,
        };
        assert!((mean_square(&seq).unwrap() - 0.09).abs() < 1e-15);
        let r = autocorrelation(&seq, 0).unwrap();
        assert!((r[0] - 0.09).abs() < 1e-15);
        // biased estimator: (N - n)/N * c^2
        let r = autocorrelation(&seq, 10).unwrap();
        assert!((r[10] - 0.09 * 40.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_overlong_lag_are_errors() {
        let empty = ChaoticSequence {
            samples: vec![],
            sample_period: 0.001,
        };
        assert!(mean_square(&empty).is_err());
        let seq = generate(&params(0.75), 10).unwrap();
        assert!(autocorrelation(&seq, 10).is_err());
        assert!(autocorrelation(&seq, 9).is_ok());
    }

    #[test]
    fn normalized_autocorrelation_is_delta_like() {
        let seq = generate(&params(0.75), 1000).unwrap();
        let r = normalized_autocorrelation(&seq, 100).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(r[1..].iter().all(|v| v.abs() < 0.15));
    }

    #[test]
    fn divergence_times_match_direct_iteration() {
        // frozen from an independent iteration of both trajectories
        let c1 = params(0.75);
        let c2 = params(0.749);
        assert_eq!(divergence_time(&c1, &c1, 1e-12, 100).unwrap(), None);
        assert_eq!(divergence_time(&c1, &c2, 0.5, 100).unwrap(), Some(12));
        assert_eq!(divergence_time(&c1, &c2, 1.0, 100).unwrap(), Some(13));
        assert!(divergence_time(&c1, &c2, 0.0, 100).is_err());
    }

    #[test]
    fn tiny_perturbations_diverge() {
        let c1 = params(0.75);
        for eps in [1e-3, 1e-6, 1e-9] {
            let k = divergence_time(&c1, &params(0.75 + eps), 1.0, 200).unwrap();
            assert!(k.is_some(), "eps {eps} did not diverge");
        }
    }

    #[test]
    fn csv_dump_has_header_and_one_based_rows() {
        let csv = generate(&params(0.0), 2).unwrap().to_csv();
        assert_eq!(csv, format!("k,x\n1,0\n2,{}\n", BOUND));
    }

    proptest! {
        #[test]
        fn range_closure(x1 in -BOUND..=BOUND, n in 1usize..2000) {
            let seq = generate(&params(x1), n).unwrap();
            prop_assert_eq!(seq.len(), n);
            prop_assert!(seq.samples.iter().all(|x| x.abs() <= BOUND));
        }

        #[test]
        fn regeneration_from_any_sample_reproduces_tail(x1 in -BOUND..=BOUND, split in 0usize..300) {
            let seq = generate(&params(x1), 300).unwrap();
            let tail = generate(&params(seq.samples[split]), 300 - split).unwrap();
            prop_assert_eq!(&seq.samples[split..], &tail.samples[..]);
            prop_assert_eq!(params(x1).advanced(split).initial_value, seq.samples[split]);
        }

        #[test]
        fn recurrence_holds(x1 in -BOUND..=BOUND) {
            let seq = generate(&params(x1), 64).unwrap();
            for w in seq.samples.windows(2) {
                prop_assert!((w[1] - BOUND * (1.0 - w[0] * w[0])).abs() <= 4.0 * f64::EPSILON);
            }
        }
    }
}
