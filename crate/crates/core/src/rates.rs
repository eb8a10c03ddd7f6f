//! Closed-form key-rate engine: entropies, QKD key rates, QKR recycling and
//! key sharing rates, zero-rate thresholds, and figure-ready rate curves.
//!
//! Every operation is a pure function of its arguments. Rates are returned
//! signed: a negative sharing rate means a round costs more pre-shared key
//! than it delivers, and clamping is left to presentation layers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bisection tolerance for [`threshold`].
const BISECTION_TOL: f64 = 1e-6;
/// Iteration cap for [`threshold`]; the bracket halves each step, so this is
/// never reached with the tolerance above.
const BISECTION_MAX_ITERS: usize = 200;
/// Prediction used for the fixed error-tolerance curves of figures 2 and 4.
pub const FIGURE_PREDICTED_QBER: f64 = 0.07;

/// Errors from rate-engine operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    /// An input fell outside the domain the operation is defined on.
    #[error("{name} = {value} outside [{min}, {max}]")]
    Domain {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{op} is not defined for {protocol}")]
    UnsupportedProtocol {
        op: &'static str,
        protocol: ProtocolId,
    },
    #[error("grid step must be > 0, got {0}")]
    GridStep(f64),
    #[error("grid start {0} exceeds end {1}")]
    GridBounds(f64, f64),
    #[error("unknown figure id {0}, expected 1..=5")]
    UnknownFigure(u8),
}

/// Quantum bit error rate: the probability that a transmitted raw bit
/// arrives flipped. Construction pins it to [0, 1]; individual operations
/// restrict the domain further (key rates stop at 1/2, six-state at 1/3).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Qber(f64);

impl Qber {
    pub const ZERO: Qber = Qber(0.0);

    pub fn new(q: f64) -> Result<Self, RateError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(RateError::Domain {
                name: "qber",
                value: q,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Qber(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Qber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The four protocols the engine knows how to rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolId {
    /// Two-basis prepare-and-measure QKD.
    Bb84,
    /// Three-basis prepare-and-measure QKD.
    SixStateQkd,
    /// Two-basis quantum key recycling.
    Qkr4,
    /// Three-basis quantum key recycling.
    Qkr6,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 4] = [
        ProtocolId::Bb84,
        ProtocolId::SixStateQkd,
        ProtocolId::Qkr4,
        ProtocolId::Qkr6,
    ];

    pub fn is_qkr(self) -> bool {
        matches!(self, ProtocolId::Qkr4 | ProtocolId::Qkr6)
    }

    pub fn is_qkd(self) -> bool {
        !self.is_qkr()
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ProtocolId::Bb84 => "bb84",
            ProtocolId::SixStateQkd => "six_state_qkd",
            ProtocolId::Qkr4 => "qkr4",
            ProtocolId::Qkr6 => "qkr6",
        };
        f.write_str(name)
    }
}

fn check_max(name: &'static str, q: Qber, max: f64) -> Result<f64, RateError> {
    let v = q.value();
    if v > max {
        return Err(RateError::Domain {
            name,
            value: v,
            min: 0.0,
            max,
        });
    }
    Ok(v)
}

/// Binary Shannon entropy in bits, with the 0·log2(0) = 0 convention.
pub fn binary_entropy(q: Qber) -> f64 {
    let q = q.value();
    if q == 0.0 || q == 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

/// Shannon entropy in bits of the symmetric three-basis error pattern
/// {1 - 3q/2, q/2, q/2, q/2}. Defined for q in [0, 2/3].
pub fn six_state_entropy(q: Qber) -> Result<f64, RateError> {
    let q = check_max("qber", q, 2.0 / 3.0)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let keep = 1.0 - 1.5 * q;
    let kept_term = if keep > 0.0 { -keep * keep.log2() } else { 0.0 };
    Ok(kept_term - 1.5 * q * (0.5 * q).log2())
}

/// Asymptotic BB84 secret key rate, 1 - 2·H(q). Goes negative past the
/// zero-rate threshold near q = 0.11.
pub fn bb84_key_rate(q: Qber) -> Result<f64, RateError> {
    check_max("qber", q, 0.5)?;
    Ok(1.0 - 2.0 * binary_entropy(q))
}

/// Asymptotic six-state secret key rate,
/// 1 + (1 - 3q/2)·log2(1 - 3q/2) + (3q/2)·log2(q/2). Defined up to q = 1/3,
/// with the zero crossing near q = 0.126.
pub fn six_state_key_rate(q: Qber) -> Result<f64, RateError> {
    check_max("qber", q, 1.0 / 3.0)?;
    Ok(1.0 - six_state_entropy(q)?)
}

/// Fraction of the one-time-pad key that survives one QKR round, as a
/// function of the error rate the round observed. The default entropy model
/// lives in [`EntropyRecycling`]; anything implementing this trait can be
/// plugged into the consumed-key and sharing-rate computations instead.
pub trait RecyclingModel: Sync {
    fn recycling_rate(&self, q: Qber, protocol: ProtocolId) -> Result<f64, RateError>;
}

/// Default recycling model: the pad leaks H(q) per bit under two-basis
/// encoding and S6(q) - H(q) under three-basis encoding, so
/// R4(q) = 1 - H(q) and R6(q) = 1 - (S6(q) - H(q)), clamped to [0, 1].
#[derive(Debug, Clone, Copy, Default)]
pub struct EntropyRecycling;

impl RecyclingModel for EntropyRecycling {
    fn recycling_rate(&self, q: Qber, protocol: ProtocolId) -> Result<f64, RateError> {
        check_max("qber", q, 0.5)?;
        let h = binary_entropy(q);
        let raw = match protocol {
            ProtocolId::Qkr4 => 1.0 - h,
            ProtocolId::Qkr6 => 1.0 - (six_state_entropy(q)? - h),
            other => {
                return Err(RateError::UnsupportedProtocol {
                    op: "recycling rate",
                    protocol: other,
                })
            }
        };
        Ok(raw.clamp(0.0, 1.0))
    }
}

/// Recycling rate under the default entropy model.
pub fn qkr_recycling_rate(q: Qber, protocol: ProtocolId) -> Result<f64, RateError> {
    EntropyRecycling.recycling_rate(q, protocol)
}

fn check_qkr_inputs(
    op: &'static str,
    q_predict: Qber,
    q_real: Qber,
    protocol: ProtocolId,
) -> Result<(), RateError> {
    if !protocol.is_qkr() {
        return Err(RateError::UnsupportedProtocol { op, protocol });
    }
    let qp = q_predict.value();
    if qp >= 0.5 {
        return Err(RateError::Domain {
            name: "q_predict",
            value: qp,
            min: 0.0,
            max: 0.5,
        });
    }
    check_max("q_real", q_real, 0.5)?;
    Ok(())
}

/// Pre-shared key bits one QKR round consumes when `m` raw bits are shared.
///
/// The pad must cover the self-correcting payload, so it is
/// m / (1 - H(q_predict)) bits long; the round gets back the recycled
/// fraction when the real error rate stays within the prediction and nothing
/// otherwise.
pub fn consumed_key_length(
    q_predict: Qber,
    q_real: Qber,
    m: u64,
    protocol: ProtocolId,
) -> Result<f64, RateError> {
    consumed_key_length_with(&EntropyRecycling, q_predict, q_real, m, protocol)
}

/// [`consumed_key_length`] under a caller-supplied recycling model.
pub fn consumed_key_length_with(
    model: &dyn RecyclingModel,
    q_predict: Qber,
    q_real: Qber,
    m: u64,
    protocol: ProtocolId,
) -> Result<f64, RateError> {
    check_qkr_inputs("consumed key length", q_predict, q_real, protocol)?;
    if m == 0 {
        return Err(RateError::Domain {
            name: "m",
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let unrecycled = if q_real <= q_predict {
        1.0 - model.recycling_rate(q_real, protocol)?
    } else {
        // decode failure: the whole pad is burned
        1.0
    };
    let h = binary_entropy(q_predict);
    Ok(m as f64 / (1.0 - h) * unrecycled)
}

/// Net new secret bits per raw bit for one QKR round, (n - k)/m.
///
/// On the success branch (q_real ≤ q_predict) the m raw bits all become
/// secret key, so this is 1 - k/m. Past the prediction the round delivers
/// nothing and the rate is -k/m, which is negative.
pub fn qkr_key_sharing_rate(
    q_predict: Qber,
    q_real: Qber,
    protocol: ProtocolId,
) -> Result<f64, RateError> {
    qkr_key_sharing_rate_with(&EntropyRecycling, q_predict, q_real, protocol)
}

/// [`qkr_key_sharing_rate`] under a caller-supplied recycling model.
pub fn qkr_key_sharing_rate_with(
    model: &dyn RecyclingModel,
    q_predict: Qber,
    q_real: Qber,
    protocol: ProtocolId,
) -> Result<f64, RateError> {
    let k = consumed_key_length_with(model, q_predict, q_real, 1, protocol)?;
    if q_real <= q_predict {
        Ok(1.0 - k)
    } else {
        Ok(-k)
    }
}

/// Key sharing rate of a QKD protocol, which is just its key rate: QKD
/// consumes no pre-shared key.
pub fn qkd_key_sharing_rate(q: Qber, protocol: ProtocolId) -> Result<f64, RateError> {
    match protocol {
        ProtocolId::Bb84 => bb84_key_rate(q),
        ProtocolId::SixStateQkd => six_state_key_rate(q),
        other => Err(RateError::UnsupportedProtocol {
            op: "QKD key sharing rate",
            protocol: other,
        }),
    }
}

/// Which encoding a QKR/QKD pair uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingVariant {
    FourState,
    SixState,
}

/// Sharing-rate advantage of QKR over the QKD protocol with the same
/// encoding, at perfect prediction. Defined up to the QKD protocol's
/// zero-rate threshold.
pub fn sharing_rate_delta(q: Qber, variant: EncodingVariant) -> Result<f64, RateError> {
    let (qkr, qkd) = match variant {
        EncodingVariant::FourState => (ProtocolId::Qkr4, ProtocolId::Bb84),
        EncodingVariant::SixState => (ProtocolId::Qkr6, ProtocolId::SixStateQkd),
    };
    let limit = threshold(qkd).value();
    if q.value() > limit + 1e-9 {
        return Err(RateError::Domain {
            name: "qber",
            value: q.value(),
            min: 0.0,
            max: limit,
        });
    }
    Ok(qkr_key_sharing_rate(q, q, qkr)? - qkd_key_sharing_rate(q, qkd)?)
}

/// Smallest positive error rate where the protocol's best key sharing rate
/// (perfect prediction for QKR) crosses zero, found by bisection on
/// [1e-9, 0.33] to an absolute tolerance of 1e-6. All four rate functions
/// are continuous and strictly decreasing through their root, so the
/// bracket is valid.
pub fn threshold(protocol: ProtocolId) -> Qber {
    let rate_at = |q: f64| -> f64 {
        let q = Qber(q);
        match protocol {
            ProtocolId::Bb84 => bb84_key_rate(q),
            ProtocolId::SixStateQkd => six_state_key_rate(q),
            ProtocolId::Qkr4 | ProtocolId::Qkr6 => qkr_key_sharing_rate(q, q, protocol),
        }
        .expect("bisection stays inside the rate domain")
    };
    let (mut lo, mut hi) = (1e-9, 0.33);
    for _ in 0..BISECTION_MAX_ITERS {
        if hi - lo < BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if rate_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Qber(0.5 * (lo + hi))
}

/// A named (QBER, rate) series ready for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub label: String,
    pub protocol: ProtocolId,
    pub q_predict: Option<Qber>,
    /// Strictly increasing in q.
    pub points: Vec<(Qber, f64)>,
}

/// Inclusive grid over [start, end]. The end point is appended when the
/// step does not land on it exactly; points are strictly increasing.
pub fn qber_grid(start: f64, end: f64, step: f64) -> Result<Vec<Qber>, RateError> {
    if !(step > 0.0) {
        return Err(RateError::GridStep(step));
    }
    if start > end {
        return Err(RateError::GridBounds(start, end));
    }
    Qber::new(start)?;
    Qber::new(end)?;
    let count = ((end - start) / step + 1e-9).floor() as usize;
    let mut grid = Vec::with_capacity(count + 2);
    for i in 0..=count {
        grid.push(Qber((start + i as f64 * step).min(end)));
    }
    if end - grid.last().expect("grid is non-empty").value() > 1e-9 {
        grid.push(Qber(end));
    }
    Ok(grid)
}

fn curve(
    label: &str,
    protocol: ProtocolId,
    q_predict: Option<Qber>,
    grid: &[Qber],
    rate_at: impl Fn(Qber) -> Result<f64, RateError>,
) -> Result<RateCurve, RateError> {
    let points = grid
        .iter()
        .map(|&q| rate_at(q).map(|r| (q, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RateCurve {
        label: label.to_owned(),
        protocol,
        q_predict,
        points,
    })
}

/// Curve data behind the five standard comparison figures:
///
/// 1. two-basis recycling rate on [0, 0.5]
/// 2. two-basis QKR (prediction fixed at 0.07, and optimal) vs BB84 on [0, 0.15]
/// 3. three-basis recycling rate on [0, 0.5]
/// 4. three-basis QKR (same two curves) vs six-state QKD on [0, 0.15]
/// 5. QKR-minus-QKD sharing-rate gain for both encodings on [0, 0.11]
///
/// Failure-branch values on the fixed-prediction curves are emitted signed.
pub fn figure_data(figure_id: u8, grid_step: f64) -> Result<Vec<RateCurve>, RateError> {
    let pred = Qber::new(FIGURE_PREDICTED_QBER).expect("fixed prediction is in range");
    match figure_id {
        1 => {
            let grid = qber_grid(0.0, 0.5, grid_step)?;
            Ok(vec![curve("qkr4_recycling", ProtocolId::Qkr4, None, &grid, |q| {
                qkr_recycling_rate(q, ProtocolId::Qkr4)
            })?])
        }
        2 => {
            let grid = qber_grid(0.0, 0.15, grid_step)?;
            Ok(vec![
                curve("qkr4_pred_0.07", ProtocolId::Qkr4, Some(pred), &grid, |q| {
                    qkr_key_sharing_rate(pred, q, ProtocolId::Qkr4)
                })?,
                curve("qkr4_optimal", ProtocolId::Qkr4, None, &grid, |q| {
                    qkr_key_sharing_rate(q, q, ProtocolId::Qkr4)
                })?,
                curve("bb84", ProtocolId::Bb84, None, &grid, bb84_key_rate)?,
            ])
        }
        3 => {
            let grid = qber_grid(0.0, 0.5, grid_step)?;
            Ok(vec![curve("qkr6_recycling", ProtocolId::Qkr6, None, &grid, |q| {
                qkr_recycling_rate(q, ProtocolId::Qkr6)
            })?])
        }
        4 => {
            let grid = qber_grid(0.0, 0.15, grid_step)?;
            Ok(vec![
                curve("qkr6_pred_0.07", ProtocolId::Qkr6, Some(pred), &grid, |q| {
                    qkr_key_sharing_rate(pred, q, ProtocolId::Qkr6)
                })?,
                curve("qkr6_optimal", ProtocolId::Qkr6, None, &grid, |q| {
                    qkr_key_sharing_rate(q, q, ProtocolId::Qkr6)
                })?,
                curve("six_state_qkd", ProtocolId::SixStateQkd, None, &grid, six_state_key_rate)?,
            ])
        }
        5 => {
            let grid = qber_grid(0.0, 0.11, grid_step)?;
            Ok(vec![
                curve("delta_four_state", ProtocolId::Qkr4, None, &grid, |q| {
                    sharing_rate_delta(q, EncodingVariant::FourState)
                })?,
                curve("delta_six_state", ProtocolId::Qkr6, None, &grid, |q| {
                    sharing_rate_delta(q, EncodingVariant::SixState)
                })?,
            ])
        }
        other => Err(RateError::UnknownFigure(other)),
    }
}
