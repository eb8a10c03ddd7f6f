//! Bit/basis-level quantum channel: preparation, noisy transmission with an
//! optional intercept-resend eavesdropper, and measurement.
//!
//! A qubit here is just a (basis, bit) pair. The three bases are pairwise
//! mutually unbiased, so a mismatched measurement is exactly uniform, and
//! channel noise is a basis-agnostic logical flip with probability equal to
//! the QBER — the classical shadow of a channel with the same error rate in
//! every basis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rates::Qber;
use crate::rng::{Draw, QubitDraws};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("channel qber {0} outside [0, 0.5]")]
    QberRange(f64),
    #[error("intercept fraction {0} outside [0, 1]")]
    FractionRange(f64),
}

/// Preparation/measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

/// Which bases a party draws from: {Z, X} or {Z, X, Y}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSet {
    TwoBases,
    ThreeBases,
}

impl BasisSet {
    pub fn count(self) -> u32 {
        match self {
            BasisSet::TwoBases => 2,
            BasisSet::ThreeBases => 3,
        }
    }

    pub fn nth(self, index: u32) -> Basis {
        match index {
            0 => Basis::Z,
            1 => Basis::X,
            _ => Basis::Y,
        }
    }

    pub(crate) fn sample(self, draws: &QubitDraws<'_>, purpose: Draw) -> Basis {
        self.nth(draws.pick(purpose, self.count()))
    }
}

/// A qubit at the bit/basis abstraction level: one basis tag, one logical
/// bit, no amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreparedQubit {
    pub basis: Basis,
    pub bit: u8,
}

/// Intercept-resend attack: Eve measures each selected qubit in a uniformly
/// random basis from her set and forwards her re-prepared outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptResend {
    /// Probability that any given qubit is intercepted.
    pub fraction: f64,
    pub basis_set: BasisSet,
}

/// Symmetric channel noise plus an optional eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub qber: f64,
    pub eavesdropper: Option<InterceptResend>,
}

impl ChannelModel {
    /// Validating constructor: qber must not exceed 1/2 and any intercept
    /// fraction must sit in [0, 1].
    pub fn new(qber: Qber, eavesdropper: Option<InterceptResend>) -> Result<Self, ChannelError> {
        if qber.value() > 0.5 {
            return Err(ChannelError::QberRange(qber.value()));
        }
        if let Some(eve) = &eavesdropper {
            if !(0.0..=1.0).contains(&eve.fraction) {
                return Err(ChannelError::FractionRange(eve.fraction));
            }
        }
        Ok(ChannelModel {
            qber: qber.value(),
            eavesdropper,
        })
    }

    /// Noise-free channel with nobody listening.
    pub fn ideal() -> Self {
        ChannelModel {
            qber: 0.0,
            eavesdropper: None,
        }
    }
}

/// Tag a logical bit with its preparation basis. Deterministic.
pub fn prepare(bit: u8, basis: Basis) -> PreparedQubit {
    PreparedQubit {
        basis,
        bit: bit & 1,
    }
}

/// Send one qubit through the channel. If the eavesdropper's Bernoulli draw
/// selects this qubit, Eve measures in a random basis from her set and the
/// qubit continues in her re-prepared state. Channel noise then flips the
/// logical bit with probability `qber`, in whatever basis the qubit is in
/// by that point.
pub fn transmit(qubit: PreparedQubit, channel: &ChannelModel, draws: &QubitDraws<'_>) -> PreparedQubit {
    let mut current = qubit;
    if let Some(eve) = &channel.eavesdropper {
        if draws.chance(Draw::EvePresence, eve.fraction) {
            let basis = eve.basis_set.sample(draws, Draw::EveBasis);
            let outcome = measure_in(current, basis, draws, Draw::EveOutcome);
            current = prepare(outcome, basis);
        }
    }
    if draws.chance(Draw::ChannelFlip, channel.qber) {
        current.bit ^= 1;
    }
    current
}

/// Measure a qubit: a matching basis returns the encoded bit, any other
/// basis an unbiased random one.
pub fn measure(qubit: PreparedQubit, basis: Basis, draws: &QubitDraws<'_>) -> u8 {
    measure_in(qubit, basis, draws, Draw::BobOutcome)
}

fn measure_in(qubit: PreparedQubit, basis: Basis, draws: &QubitDraws<'_>, purpose: Draw) -> u8 {
    if qubit.basis == basis {
        qubit.bit
    } else {
        draws.bit(purpose)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialRng;

    const ALL_BASES: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    #[test]
    fn prepare_tags_bit_and_basis() {
        assert_eq!(prepare(0, Basis::Z), PreparedQubit { basis: Basis::Z, bit: 0 });
        assert_eq!(prepare(1, Basis::X), PreparedQubit { basis: Basis::X, bit: 1 });
        assert_eq!(prepare(1, Basis::Y), PreparedQubit { basis: Basis::Y, bit: 1 });
    }

    #[test]
    fn matching_basis_measurement_is_deterministic() {
        let rng = TrialRng::new(0, 0);
        for basis in ALL_BASES {
            for bit in [0u8, 1] {
                assert_eq!(measure(prepare(bit, basis), basis, &rng.qubit(0)), bit);
            }
        }
    }

    #[test]
    fn identity_channel_roundtrips_every_state() {
        let channel = ChannelModel::ideal();
        let rng = TrialRng::new(11, 0);
        for (i, basis) in ALL_BASES.iter().enumerate() {
            for bit in [0u8, 1] {
                let draws = rng.qubit(i as u64);
                let sent = prepare(bit, *basis);
                let got = transmit(sent, &channel, &draws);
                assert_eq!(got, sent);
                assert_eq!(measure(got, *basis, &draws), bit);
            }
        }
    }

    #[test]
    fn unit_qber_always_flips() {
        // test-only extension of the domain: the validating constructor
        // stops at 0.5, a literal goes further
        let channel = ChannelModel {
            qber: 1.0,
            eavesdropper: None,
        };
        let rng = TrialRng::new(5, 0);
        for i in 0..64 {
            let out = transmit(prepare(0, Basis::Z), &channel, &rng.qubit(i));
            assert_eq!(out.bit, 1);
        }
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(ChannelModel::new(Qber::new(0.6).unwrap(), None).is_err());
        let eve = InterceptResend {
            fraction: 1.5,
            basis_set: BasisSet::TwoBases,
        };
        assert!(ChannelModel::new(Qber::ZERO, Some(eve)).is_err());
    }

    #[test]
    fn mismatched_basis_is_unbiased() {
        let rng = TrialRng::new(17, 0);
        let trials = 100_000u64;
        let ones: u64 = (0..trials)
            .map(|i| u64::from(measure(prepare(0, Basis::Z), Basis::X, &rng.qubit(i))))
            .sum();
        let mean = ones as f64 / trials as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn channel_noise_matches_configured_qber() {
        let q = 0.13;
        let channel = ChannelModel::new(Qber::new(q).unwrap(), None).unwrap();
        let rng = TrialRng::new(23, 0);
        let trials = 100_000u64;
        let flips: u64 = (0..trials)
            .map(|i| {
                let out = transmit(prepare(0, Basis::Z), &channel, &rng.qubit(i));
                u64::from(measure(out, Basis::Z, &rng.qubit(i)) != 0)
            })
            .sum();
        let observed = flips as f64 / trials as f64;
        let three_sigma = 3.0 * (q * (1.0 - q) / trials as f64).sqrt();
        assert!((observed - q).abs() < three_sigma, "observed {observed}");
    }

    #[test]
    fn full_intercept_two_bases_errs_one_quarter() {
        // enumeration: Eve matches with p = 1/2 (no disturbance); otherwise
        // Bob's matched-basis outcome is uniform, so error = 1/2 · 1/2
        let channel = ChannelModel::new(
            Qber::ZERO,
            Some(InterceptResend {
                fraction: 1.0,
                basis_set: BasisSet::TwoBases,
            }),
        )
        .unwrap();
        let rng = TrialRng::new(29, 0);
        let trials = 100_000u64;
        let errors: u64 = (0..trials)
            .map(|i| {
                let draws = rng.qubit(i);
                let out = transmit(prepare(0, Basis::Z), &channel, &draws);
                u64::from(measure(out, Basis::Z, &draws) != 0)
            })
            .sum();
        let observed = errors as f64 / trials as f64;
        assert!((observed - 0.25).abs() < 0.01, "observed {observed}");
    }

    #[test]
    fn full_intercept_three_bases_errs_one_third() {
        // Eve matches with p = 1/3; error = 2/3 · 1/2
        let channel = ChannelModel::new(
            Qber::ZERO,
            Some(InterceptResend {
                fraction: 1.0,
                basis_set: BasisSet::ThreeBases,
            }),
        )
        .unwrap();
        let rng = TrialRng::new(31, 0);
        let trials = 100_000u64;
        let errors: u64 = (0..trials)
            .map(|i| {
                let draws = rng.qubit(i);
                let out = transmit(prepare(1, Basis::Y), &channel, &draws);
                u64::from(measure(out, Basis::Y, &draws) != 1)
            })
            .sum();
        let observed = errors as f64 / trials as f64;
        let expected = 1.0 / 3.0;
        let three_sigma = 3.0 * (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!((observed - expected).abs() < three_sigma, "observed {observed}");
    }

    #[test]
    fn transcript_is_seed_deterministic_and_order_independent() {
        let channel = ChannelModel::new(
            Qber::new(0.2).unwrap(),
            Some(InterceptResend {
                fraction: 0.5,
                basis_set: BasisSet::ThreeBases,
            }),
        )
        .unwrap();
        let run = |indices: &[u64]| -> Vec<u8> {
            let rng = TrialRng::new(1234, 77);
            let mut out = vec![0u8; indices.len()];
            for &i in indices {
                let draws = rng.qubit(i);
                let qubit = transmit(prepare((i & 1) as u8, Basis::X), &channel, &draws);
                out[i as usize] = measure(qubit, Basis::X, &draws);
            }
            out
        };
        let forward: Vec<u64> = (0..512).collect();
        let backward: Vec<u64> = (0..512).rev().collect();
        assert_eq!(run(&forward), run(&backward));
    }
}
