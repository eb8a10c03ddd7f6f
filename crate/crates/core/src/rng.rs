//! Deterministic randomness for protocol trials.
//!
//! Each trial owns two ChaCha streams derived from (master seed, trial
//! index): a counter-addressed stream for per-qubit draws and a sequential
//! stream for key material and messages. A qubit draw is a pure function of
//! (master seed, trial index, qubit index, draw purpose), so transcripts are
//! bit-identical regardless of evaluation order or thread count, and
//! skipping a draw (say, when no eavesdropper is configured) never shifts
//! any other draw.

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a per-qubit draw is for. Each purpose owns a fixed 64-bit slot in
/// the qubit's counter block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    AliceBit = 0,
    AliceBasis = 1,
    BobBasis = 2,
    EvePresence = 3,
    EveBasis = 4,
    EveOutcome = 5,
    ChannelFlip = 6,
    BobOutcome = 7,
}

// ChaCha word positions are in 32-bit units: 2 words per u64 draw,
// 8 purposes per qubit.
const WORDS_PER_DRAW: u128 = 2;
const WORDS_PER_QUBIT: u128 = 16;

/// Root of one trial's randomness. Trial indices must stay below 2^63 so
/// the two per-trial streams do not collide.
#[derive(Debug, Clone)]
pub struct TrialRng {
    qubit_stream: ChaCha8Rng,
    material_stream: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        let base = ChaCha8Rng::seed_from_u64(master_seed);
        let mut qubit_stream = base.clone();
        qubit_stream.set_stream(trial_index << 1);
        let mut material_stream = base;
        material_stream.set_stream((trial_index << 1) | 1);
        TrialRng {
            qubit_stream,
            material_stream,
        }
    }

    /// Fresh sequential stream for key material, messages, and public seeds.
    pub fn material(&self) -> ChaCha8Rng {
        self.material_stream.clone()
    }

    /// Counter-addressed view of one qubit's randomness.
    pub fn qubit(&self, index: u64) -> QubitDraws<'_> {
        QubitDraws { trial: self, index }
    }
}

/// Per-qubit draws; see [`Draw`] for the slot layout.
#[derive(Debug, Clone, Copy)]
pub struct QubitDraws<'a> {
    trial: &'a TrialRng,
    index: u64,
}

impl QubitDraws<'_> {
    fn raw(&self, purpose: Draw) -> u64 {
        let mut rng = self.trial.qubit_stream.clone();
        rng.set_word_pos(self.index as u128 * WORDS_PER_QUBIT + purpose as u128 * WORDS_PER_DRAW);
        rng.next_u64()
    }

    /// Bernoulli draw: true with probability `p`.
    pub fn chance(&self, purpose: Draw, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        unit(self.raw(purpose)) < p
    }

    /// Unbiased bit.
    pub fn bit(&self, purpose: Draw) -> u8 {
        (self.raw(purpose) & 1) as u8
    }

    /// Uniform pick from `n` alternatives (bias is O(n/2^64)).
    pub fn pick(&self, purpose: Draw, n: u32) -> u32 {
        ((self.raw(purpose) as u128 * n as u128) >> 64) as u32
    }
}

/// Map a u64 to [0, 1) with 53-bit resolution.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw `len` bits as 0/1 bytes from a sequential stream.
pub fn random_bits(rng: &mut impl RngCore, len: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(len);
    while bits.len() < len {
        let mut word = rng.next_u64();
        let take = 64.min(len - bits.len());
        for _ in 0..take {
            bits.push((word & 1) as u8);
            word >>= 1;
        }
    }
    bits
}
