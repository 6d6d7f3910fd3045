//! Keyed input hash `t = F(vᵀ M_tok(x))` and the sinusoid pair driven by it.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::key::{TokenId, WatermarkKey};

/// A hash value in `[0, 1)`; acts as the sample time of the embedded sinusoid.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HashValue(f64);

impl HashValue {
    pub fn new(t: f64) -> Result<Self> {
        if (0.0..1.0).contains(&t) {
            Ok(Self(t))
        } else {
            Err(Error::arg("t", format!("{t} is outside [0, 1)")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `Φ(u / √variance)`, computed through `erfc`.
///
/// `libm::erfc` is accurate to a few ulps, so the absolute error here stays
/// far below 1e-10 over the whole real line.
pub fn normal_cdf(u: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::arg("variance", format!("{variance} must be positive")));
    }
    Ok(0.5 * libm::erfc(-u / (variance.sqrt() * SQRT_2)))
}

/// Source token whose matrix row feeds the hash: `x[anchor]`, or the last token of a shorter input.
pub fn anchor_token(x: &[TokenId], anchor_index: usize) -> Result<TokenId> {
    x.get(anchor_index.min(x.len().saturating_sub(1)))
        .copied()
        .ok_or(Error::EmptyInput)
}

/// Raw projection `vᵀ M_tok(x)`, before the probability-integral transform.
pub fn projection(x: &[TokenId], key: &WatermarkKey) -> Result<f64> {
    let token = anchor_token(x, key.anchor_index())?;
    key.vocab().check(token)?;
    Ok(key.phase().iter().zip(key.matrix_row(token)).map(|(v, m)| v * m).sum())
}

pub fn hash_input(x: &[TokenId], key: &WatermarkKey) -> Result<HashValue> {
    let u = projection(x, key)?;
    let t = normal_cdf(u, key.hash_dim() as f64 / 3.0)?;
    // Far tails can round to exactly 1.
    Ok(HashValue(t.min(1.0 - f64::EPSILON / 2.0)))
}

/// `(cos(f_w t), cos(f_w t + π))`.
pub fn periodic_signals(t: HashValue, fw: f64) -> (f64, f64) {
    let phase = fw * t.get();
    (phase.cos(), (phase + PI).cos())
}
