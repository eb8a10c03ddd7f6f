//! Binary linear block codes with syndrome-table decoding, plus a
//! capacity-style ideal coder for rate experiments at large block sizes.
//!
//! Codewords are laid out message-first: C = M‖s with s the parity part, so
//! the first `k_msg` bits of a corrected word are the message.

use thiserror::Error;

use crate::rates::{binary_entropy, Qber};

/// Syndrome tables are bounded at 2^20 entries; anything larger is a
/// configuration error, not a silent fallback.
const MAX_SYNDROME_BITS: usize = 20;
/// Sanity cap for ideal block lengths (predictions too close to 1/2 blow
/// the rate denominator up).
const MAX_IDEAL_BLOCK: f64 = (1u64 << 32) as f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodingError {
    #[error("message length {got}, expected {expected}")]
    MessageLength { got: usize, expected: usize },
    #[error("word length {got}, expected {expected}")]
    WordLength { got: usize, expected: usize },
    #[error("syndrome table needs 2^{checks} entries, limit is 2^{MAX_SYNDROME_BITS}")]
    TableTooLarge { checks: usize },
    #[error("invalid [{n}, {k}] dimensions or parity rows")]
    BadDimensions { k: usize, n: usize },
    #[error("claimed distance {claimed} but found a nonzero codeword of weight {found}")]
    DistanceMismatch { claimed: usize, found: usize },
    #[error("prediction {0} outside [0, 0.5)")]
    PredictionRange(f64),
    #[error("prediction {0} yields an impractically long ideal code")]
    BlockTooLong(f64),
    #[error("payload must be non-empty")]
    EmptyPayload,
}

/// Outcome of bounded-distance decoding. `message` is only meaningful when
/// `success` holds; `errors_corrected` never exceeds ⌊(d-1)/2⌋ for a
/// concrete code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub success: bool,
    pub message: Vec<u8>,
    pub errors_corrected: usize,
}

impl DecodeResult {
    fn failure() -> Self {
        DecodeResult {
            success: false,
            message: Vec::new(),
            errors_corrected: 0,
        }
    }
}

/// Systematic binary linear [n, k, d] code. The generator is [I | P], the
/// parity-check matrix [Pᵀ | I], and a minimum-weight syndrome table is
/// built once at construction (feasible for n - k ≤ 20).
#[derive(Debug, Clone)]
pub struct LinearCode {
    n_code: usize,
    k_msg: usize,
    distance: usize,
    generator: Vec<Vec<u8>>,
    parity_check: Vec<Vec<u8>>,
    syndrome_table: Vec<Vec<u8>>,
}

impl LinearCode {
    /// Build a systematic code from its P matrix (`k_msg` rows of
    /// `n_code - k_msg` bits each). For `k_msg ≤ 16` the claimed minimum
    /// distance is verified exhaustively.
    pub fn new(
        k_msg: usize,
        n_code: usize,
        distance: usize,
        parity_rows: &[Vec<u8>],
    ) -> Result<Self, CodingError> {
        let checks = n_code.saturating_sub(k_msg);
        if k_msg == 0
            || n_code <= k_msg
            || distance == 0
            || parity_rows.len() != k_msg
            || parity_rows.iter().any(|row| row.len() != checks)
        {
            return Err(CodingError::BadDimensions { k: k_msg, n: n_code });
        }
        if checks > MAX_SYNDROME_BITS {
            return Err(CodingError::TableTooLarge { checks });
        }

        let mut generator = Vec::with_capacity(k_msg);
        for (i, p_row) in parity_rows.iter().enumerate() {
            let mut row = vec![0u8; n_code];
            row[i] = 1;
            for (j, &bit) in p_row.iter().enumerate() {
                row[k_msg + j] = bit & 1;
            }
            generator.push(row);
        }
        let mut parity_check = Vec::with_capacity(checks);
        for j in 0..checks {
            let mut row = vec![0u8; n_code];
            for i in 0..k_msg {
                row[i] = parity_rows[i][j] & 1;
            }
            row[k_msg + j] = 1;
            parity_check.push(row);
        }

        let syndrome_table = build_syndrome_table(&parity_check, n_code, checks);
        let code = LinearCode {
            n_code,
            k_msg,
            distance,
            generator,
            parity_check,
            syndrome_table,
        };
        if k_msg <= 16 {
            code.verify_distance()?;
        }
        Ok(code)
    }

    /// The [7, 4, 3] Hamming code with the parity rows pinned for bit-exact
    /// interop: (110), (101), (011), (111).
    pub fn hamming74() -> LinearCode {
        LinearCode::new(
            4,
            7,
            3,
            &[vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]],
        )
        .expect("hamming(7,4) is valid")
    }

    /// The [n, 1, n] repetition code.
    pub fn repetition(n_code: usize) -> Result<LinearCode, CodingError> {
        LinearCode::new(1, n_code, n_code, &[vec![1; n_code - 1]])
    }

    pub fn n_code(&self) -> usize {
        self.n_code
    }

    pub fn k_msg(&self) -> usize {
        self.k_msg
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    /// ⌊(d-1)/2⌋, the bounded-distance correction radius.
    pub fn max_correctable(&self) -> usize {
        (self.distance - 1) / 2
    }

    pub fn generator(&self) -> &[Vec<u8>] {
        &self.generator
    }

    pub fn parity_check(&self) -> &[Vec<u8>] {
        &self.parity_check
    }

    /// message · G over GF(2); systematic, so the first `k_msg` bits of the
    /// codeword equal the message.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, CodingError> {
        if message.len() != self.k_msg {
            return Err(CodingError::MessageLength {
                got: message.len(),
                expected: self.k_msg,
            });
        }
        let mut word = vec![0u8; self.n_code];
        word[..self.k_msg].copy_from_slice(message);
        for (i, &bit) in message.iter().enumerate() {
            if bit & 1 == 1 {
                for j in self.k_msg..self.n_code {
                    word[j] ^= self.generator[i][j];
                }
            }
        }
        Ok(word)
    }

    /// H · word over GF(2). Depends only on the error pattern: adding any
    /// codeword leaves it unchanged.
    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>, CodingError> {
        if word.len() != self.n_code {
            return Err(CodingError::WordLength {
                got: word.len(),
                expected: self.n_code,
            });
        }
        Ok(self
            .parity_check
            .iter()
            .map(|row| dot_gf2(row, word))
            .collect())
    }

    fn syndrome_index(&self, word: &[u8]) -> usize {
        self.parity_check
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, row)| {
                acc | (usize::from(dot_gf2(row, word)) << j)
            })
    }

    /// Bounded-distance decoding via the syndrome table: look up the
    /// minimum-weight error pattern for the received word's syndrome and
    /// succeed iff its weight is within ⌊(d-1)/2⌋.
    pub fn decode(&self, received: &[u8]) -> Result<DecodeResult, CodingError> {
        if received.len() != self.n_code {
            return Err(CodingError::WordLength {
                got: received.len(),
                expected: self.n_code,
            });
        }
        let pattern = &self.syndrome_table[self.syndrome_index(received)];
        let weight = pattern.iter().map(|&b| usize::from(b)).sum::<usize>();
        if weight > self.max_correctable() {
            return Ok(DecodeResult::failure());
        }
        let message = received
            .iter()
            .zip(pattern.iter())
            .take(self.k_msg)
            .map(|(&r, &e)| r ^ e)
            .collect();
        Ok(DecodeResult {
            success: true,
            message,
            errors_corrected: weight,
        })
    }

    fn verify_distance(&self) -> Result<(), CodingError> {
        let mut min_weight = self.n_code;
        for m in 1u32..(1 << self.k_msg) {
            let message: Vec<u8> = (0..self.k_msg).map(|i| ((m >> i) & 1) as u8).collect();
            let word = self.encode(&message).expect("length matches");
            let weight = word.iter().map(|&b| usize::from(b)).sum();
            min_weight = min_weight.min(weight);
        }
        if min_weight != self.distance {
            return Err(CodingError::DistanceMismatch {
                claimed: self.distance,
                found: min_weight,
            });
        }
        Ok(())
    }
}

fn dot_gf2(row: &[u8], word: &[u8]) -> u8 {
    row.iter().zip(word).fold(0, |acc, (&a, &b)| acc ^ (a & b))
}

/// Fill the coset-leader table weight by weight, so every syndrome keeps
/// its lightest error pattern. Every syndrome is reachable through the
/// identity columns of H with weight ≤ n - k, so the loop always fills.
fn build_syndrome_table(parity_check: &[Vec<u8>], n_code: usize, checks: usize) -> Vec<Vec<u8>> {
    let size = 1usize << checks;
    let mut table: Vec<Option<Vec<u8>>> = vec![None; size];
    table[0] = Some(vec![0u8; n_code]);
    let mut filled = 1;
    'weights: for weight in 1..=n_code {
        let mut positions: Vec<usize> = (0..weight).collect();
        loop {
            let mut pattern = vec![0u8; n_code];
            for &p in &positions {
                pattern[p] = 1;
            }
            let index = parity_check
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, row)| {
                    acc | (usize::from(dot_gf2(row, &pattern)) << j)
                });
            if table[index].is_none() {
                table[index] = Some(pattern);
                filled += 1;
                if filled == size {
                    break 'weights;
                }
            }
            if !next_combination(&mut positions, n_code) {
                break;
            }
        }
    }
    table
        .into_iter()
        .map(|entry| entry.expect("identity columns of H cover every syndrome"))
        .collect()
}

fn next_combination(positions: &mut [usize], n: usize) -> bool {
    let k = positions.len();
    for i in (0..k).rev() {
        if positions[i] < n - k + i {
            positions[i] += 1;
            for j in i + 1..k {
                positions[j] = positions[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Capacity-style coder for rate experiments: block length
/// round(m / (1 - H(q))), and decoding succeeds exactly when the channel
/// error count stays within floor(q · n). There is no matrix behind it;
/// the decode is an oracle defined against the transmitted word, which the
/// simulation knows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealCode {
    msg_len: usize,
    n_code: usize,
    tolerance: f64,
    max_errors: usize,
}

impl IdealCode {
    pub fn new(msg_len: usize, q_predict: Qber) -> Result<Self, CodingError> {
        if msg_len == 0 {
            return Err(CodingError::EmptyPayload);
        }
        let q = q_predict.value();
        if q >= 0.5 {
            return Err(CodingError::PredictionRange(q));
        }
        let expansion = 1.0 / (1.0 - binary_entropy(q_predict));
        let exact = msg_len as f64 * expansion;
        if exact > MAX_IDEAL_BLOCK {
            return Err(CodingError::BlockTooLong(q));
        }
        // round-half-up, applied once at construction
        let n_code = (exact + 0.5).floor() as usize;
        let max_errors = (q * n_code as f64).floor() as usize;
        Ok(IdealCode {
            msg_len,
            n_code,
            tolerance: q,
            max_errors,
        })
    }

    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    pub fn n_code(&self) -> usize {
        self.n_code
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Largest channel error count that still decodes.
    pub fn max_errors(&self) -> usize {
        self.max_errors
    }

    /// Message followed by parity filler; the one-time pad upstream makes
    /// the filler's content irrelevant.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, CodingError> {
        if message.len() != self.msg_len {
            return Err(CodingError::MessageLength {
                got: message.len(),
                expected: self.msg_len,
            });
        }
        let mut word = vec![0u8; self.n_code];
        word[..self.msg_len].copy_from_slice(message);
        Ok(word)
    }

    /// Oracle decode: count the flips between `received` and the
    /// `transmitted` word; within tolerance the message comes back exactly
    /// and `errors_corrected` is the true error count.
    pub fn decode(&self, received: &[u8], transmitted: &[u8]) -> Result<DecodeResult, CodingError> {
        for word in [received, transmitted] {
            if word.len() != self.n_code {
                return Err(CodingError::WordLength {
                    got: word.len(),
                    expected: self.n_code,
                });
            }
        }
        let errors = received
            .iter()
            .zip(transmitted)
            .filter(|(a, b)| a != b)
            .count();
        if errors > self.max_errors {
            return Ok(DecodeResult::failure());
        }
        Ok(DecodeResult {
            success: true,
            message: transmitted[..self.msg_len].to_vec(),
            errors_corrected: errors,
        })
    }
}

/// Convenience alias for [`IdealCode::new`].
pub fn ideal_code(msg_len: usize, q_predict: Qber) -> Result<IdealCode, CodingError> {
    IdealCode::new(msg_len, q_predict)
}

/// round(m · H(q)/(1 - H(q))): the redundancy a self-correcting payload
/// needs at error rate q.
pub fn required_syndrome_length(m: u64, q_predict: Qber) -> Result<u64, CodingError> {
    let q = q_predict.value();
    if q >= 0.5 {
        return Err(CodingError::PredictionRange(q));
    }
    let h = binary_entropy(q_predict);
    Ok((m as f64 * h / (1.0 - h) + 0.5).floor() as u64)
}

/// A short code applied blockwise to an arbitrary-length payload. The last
/// block is zero-padded; decoding succeeds only if every block does, and
/// corrected-error counts are summed across blocks.
#[derive(Debug, Clone)]
pub struct BlockCode {
    code: LinearCode,
    payload_len: usize,
    blocks: usize,
}

impl BlockCode {
    pub fn new(code: LinearCode, payload_len: usize) -> Result<Self, CodingError> {
        if payload_len == 0 {
            return Err(CodingError::EmptyPayload);
        }
        let blocks = payload_len.div_ceil(code.k_msg());
        Ok(BlockCode {
            code,
            payload_len,
            blocks,
        })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn n_total(&self) -> usize {
        self.blocks * self.code.n_code()
    }

    pub fn encode_payload(&self, payload: &[u8]) -> Result<Vec<u8>, CodingError> {
        if payload.len() != self.payload_len {
            return Err(CodingError::MessageLength {
                got: payload.len(),
                expected: self.payload_len,
            });
        }
        let k = self.code.k_msg();
        let mut padded = payload.to_vec();
        padded.resize(self.blocks * k, 0);
        let mut word = Vec::with_capacity(self.n_total());
        for block in padded.chunks(k) {
            word.extend_from_slice(&self.code.encode(block)?);
        }
        Ok(word)
    }

    pub fn decode_payload(&self, received: &[u8]) -> Result<DecodeResult, CodingError> {
        if received.len() != self.n_total() {
            return Err(CodingError::WordLength {
                got: received.len(),
                expected: self.n_total(),
            });
        }
        let mut message = Vec::with_capacity(self.blocks * self.code.k_msg());
        let mut errors = 0;
        for block in received.chunks(self.code.n_code()) {
            let result = self.code.decode(block)?;
            if !result.success {
                return Ok(DecodeResult::failure());
            }
            errors += result.errors_corrected;
            message.extend_from_slice(&result.message);
        }
        message.truncate(self.payload_len);
        Ok(DecodeResult {
            success: true,
            message,
            errors_corrected: errors,
        })
    }
}
