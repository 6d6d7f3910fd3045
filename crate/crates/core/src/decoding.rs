//! Greedy, beam and top-k decoding over any [`StepModel`], with optional
//! watermark injection on every per-step distribution.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{hash_input, HashValue};
use crate::injection::inject_at;
use crate::key::{TokenId, WatermarkKey};
use crate::prob::ProbVector;

/// A next-token model: given a source sequence and the target prefix so far,
/// return the distribution over the next target token.
pub trait StepModel: Sync {
    fn vocab_size(&self) -> usize;

    fn eos(&self) -> TokenId;

    /// Hard cap on the target length for source `x`.
    fn max_target_len(&self, x: &[TokenId]) -> usize;

    fn step(&self, x: &[TokenId], prefix: &[TokenId]) -> Result<ProbVector>;

    /// True when `step` depends on the prefix only through its length.
    /// Decoders then compute each position once.
    fn ignores_prefix(&self) -> bool {
        false
    }
}

impl<M: StepModel + ?Sized> StepModel for &M {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn eos(&self) -> TokenId {
        (**self).eos()
    }

    fn max_target_len(&self, x: &[TokenId]) -> usize {
        (**self).max_target_len(x)
    }

    fn step(&self, x: &[TokenId], prefix: &[TokenId]) -> Result<ProbVector> {
        (**self).step(x, prefix)
    }

    fn ignores_prefix(&self) -> bool {
        (**self).ignores_prefix()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Greedy,
    Beam { width: usize },
    TopK { k: usize, seed: u64 },
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Greedy => write!(f, "greedy"),
            Strategy::Beam { width } => write!(f, "beam{width}"),
            Strategy::TopK { k, seed: 0 } => write!(f, "top{k}"),
            Strategy::TopK { k, seed } => write!(f, "top{k}@{seed}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts `greedy`, `beam<W>`, `top<K>` and `top<K>@<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::arg(
                "decode",
                format!("unknown strategy `{s}` (greedy, beam<W>, top<K>[@seed])"),
            )
        };
        let positive = |digits: &str| -> Result<usize> {
            match digits.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(bad()),
            }
        };
        if s == "greedy" {
            Ok(Strategy::Greedy)
        } else if let Some(w) = s.strip_prefix("beam") {
            Ok(Strategy::Beam { width: positive(w)? })
        } else if let Some(rest) = s.strip_prefix("top") {
            let (k, seed) = match rest.split_once('@') {
                Some((k, seed)) => (k, seed.parse::<u64>().map_err(|_| bad())?),
                None => (rest, 0),
            };
            Ok(Strategy::TopK { k: positive(k)?, seed })
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub strategy: Strategy,
    pub max_len: usize,
}

impl DecodeConfig {
    pub fn new(strategy: Strategy, max_len: usize) -> Result<Self> {
        match strategy {
            Strategy::Beam { width: 0 } => return Err(Error::arg("beam width", "must be at least 1")),
            Strategy::TopK { k: 0, .. } => return Err(Error::arg("k", "must be at least 1")),
            _ => {}
        }
        if max_len == 0 {
            return Err(Error::arg("max_len", "must be positive"));
        }
        Ok(Self { strategy, max_len })
    }

    pub fn greedy(max_len: usize) -> Self {
        Self {
            strategy: Strategy::Greedy,
            max_len,
        }
    }

    /// Config for the `index`-th input of a batch: top-k gets its own seed stream.
    pub fn for_item(&self, index: u64) -> Self {
        match self.strategy {
            Strategy::TopK { k, seed } => Self {
                strategy: Strategy::TopK {
                    k,
                    seed: mix_seed(seed, index),
                },
                ..*self
            },
            _ => *self,
        }
    }
}

/// Combines two seeds into one (splitmix64 finalizer).
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        ^ salt
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key and level for watermarking every step of a decode.
#[derive(Debug, Clone, Copy)]
pub struct Watermark<'a> {
    pub key: &'a WatermarkKey,
    pub epsilon: f64,
}

/// A model whose every step is watermarked; lets the protected model be probed like any suspect.
pub struct Watermarked<'a, M: ?Sized> {
    pub inner: &'a M,
    pub mark: Watermark<'a>,
}

impl<M: StepModel + ?Sized> StepModel for Watermarked<'_, M> {
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    fn eos(&self) -> TokenId {
        self.inner.eos()
    }

    fn max_target_len(&self, x: &[TokenId]) -> usize {
        self.inner.max_target_len(x)
    }

    fn step(&self, x: &[TokenId], prefix: &[TokenId]) -> Result<ProbVector> {
        let p = self.inner.step(x, prefix)?;
        crate::injection::inject(&p, x, self.mark.key, self.mark.epsilon)
    }

    fn ignores_prefix(&self) -> bool {
        self.inner.ignores_prefix()
    }
}

struct Stepper<'a, M: ?Sized> {
    model: &'a M,
    x: &'a [TokenId],
    mark: Option<(Watermark<'a>, HashValue)>,
    /// Per-position results, filled only for models that ignore the prefix.
    cache: RefCell<Vec<Option<ProbVector>>>,
}

impl<'a, M: StepModel + ?Sized> Stepper<'a, M> {
    fn new(model: &'a M, x: &'a [TokenId], mark: Option<(Watermark<'a>, HashValue)>) -> Self {
        Self {
            model,
            x,
            mark,
            cache: RefCell::new(Vec::new()),
        }
    }

    fn probs(&self, prefix: &[TokenId]) -> Result<ProbVector> {
        if !self.model.ignores_prefix() {
            return self.compute(prefix);
        }
        let i = prefix.len();
        if let Some(Some(p)) = self.cache.borrow().get(i) {
            return Ok(p.clone());
        }
        let p = self.compute(prefix)?;
        let mut cache = self.cache.borrow_mut();
        if cache.len() <= i {
            cache.resize(i + 1, None);
        }
        cache[i] = Some(p.clone());
        Ok(p)
    }

    fn compute(&self, prefix: &[TokenId]) -> Result<ProbVector> {
        let p = self.model.step(self.x, prefix).map_err(|e| match e {
            Error::ProbVector(msg) => Error::Contract(msg),
            other => other,
        })?;
        if p.len() != self.model.vocab_size() {
            return Err(Error::Contract(format!(
                "step returned {} probabilities for a vocabulary of {}",
                p.len(),
                self.model.vocab_size()
            )));
        }
        match self.mark {
            Some((wm, t)) => inject_at(&p, t, wm.key, wm.epsilon),
            None => Ok(p),
        }
    }
}

/// Decodes `x` and returns the target tokens, without the end-of-sequence token.
pub fn decode<M: StepModel + ?Sized>(
    model: &M,
    x: &[TokenId],
    cfg: &DecodeConfig,
    watermark: Option<Watermark<'_>>,
) -> Result<Vec<TokenId>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mark = match watermark {
        Some(wm) => Some((wm, hash_input(x, wm.key)?)),
        None => None,
    };
    let stepper = Stepper::new(model, x, mark);
    let limit = cfg.max_len.min(model.max_target_len(x));
    match cfg.strategy {
        Strategy::Greedy => greedy(&stepper, limit),
        Strategy::Beam { width } => beam(&stepper, limit, width.max(1)),
        Strategy::TopK { k, seed } => top_k(&stepper, limit, k.max(1), seed),
    }
}

/// Decodes every input; item `i` uses `cfg.for_item(i)`.
pub fn decode_all<M: StepModel + ?Sized>(
    model: &M,
    inputs: &[Vec<TokenId>],
    cfg: &DecodeConfig,
    watermark: Option<Watermark<'_>>,
) -> Result<Vec<Vec<TokenId>>> {
    let one = |(i, x): (usize, &Vec<TokenId>)| decode(model, x, &cfg.for_item(i as u64), watermark);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        inputs.par_iter().enumerate().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        inputs.iter().enumerate().map(one).collect()
    }
}

fn greedy<M: StepModel + ?Sized>(s: &Stepper<'_, M>, limit: usize) -> Result<Vec<TokenId>> {
    let eos = s.model.eos();
    let mut out = Vec::new();
    while out.len() < limit {
        let tok = s.probs(&out)?.argmax() as TokenId;
        if tok == eos {
            break;
        }
        out.push(tok);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct Hypothesis {
    tokens: Vec<TokenId>,
    score: f64,
}

/// Higher score first, then lower token ids, then shorter.
fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

/// The `width` most likely tokens with their log probabilities. Only these
/// can extend one parent into the next beam.
fn shortlist(p: &ProbVector, width: usize) -> Vec<(TokenId, f64)> {
    // Kept sorted by descending probability; earlier tokens win ties.
    let mut best: Vec<(usize, f64)> = Vec::with_capacity(width + 1);
    for (t, &q) in p.as_slice().iter().enumerate() {
        if q <= 0.0 || (best.len() == width && q <= best[width - 1].1) {
            continue;
        }
        let at = best.partition_point(|&(_, b)| b >= q);
        best.insert(at, (t, q));
        best.truncate(width);
    }
    best.into_iter().map(|(t, q)| (t as TokenId, q.ln())).collect()
}

fn beam<M: StepModel + ?Sized>(s: &Stepper<'_, M>, limit: usize, width: usize) -> Result<Vec<TokenId>> {
    let eos = s.model.eos();
    let mut active = vec![Hypothesis {
        tokens: Vec::new(),
        score: 0.0,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();
    for _ in 0..limit {
        // (score, parent, token); all candidates in a round have equal length,
        // so token order is parent order then the new token.
        let mut candidates: Vec<(f64, usize, TokenId)> = Vec::with_capacity(active.len() * width);
        let mut shared: Option<Vec<(TokenId, f64)>> = None;
        for (parent, hyp) in active.iter().enumerate() {
            let best = match &shared {
                Some(best) => best.clone(),
                None => {
                    let best = shortlist(&s.probs(&hyp.tokens)?, width);
                    if s.model.ignores_prefix() {
                        shared = Some(best.clone());
                    }
                    best
                }
            };
            candidates.extend(best.into_iter().map(|(tok, lp)| (hyp.score + lp, parent, tok)));
        }
        let order = |a: &(f64, usize, TokenId), b: &(f64, usize, TokenId)| {
            b.0.total_cmp(&a.0)
                .then_with(|| active[a.1].tokens.cmp(&active[b.1].tokens))
                .then(a.2.cmp(&b.2))
        };
        if candidates.len() > width {
            candidates.select_nth_unstable_by(width - 1, order);
            candidates.truncate(width);
        }
        candidates.sort_by(order);
        let mut next = Vec::with_capacity(candidates.len());
        for (score, parent, tok) in candidates {
            let mut tokens = active[parent].tokens.clone();
            if tok == eos {
                finished.push(Hypothesis { tokens, score });
            } else {
                tokens.push(tok);
                next.push(Hypothesis { tokens, score });
            }
        }
        active = next;
        if active.is_empty() {
            break;
        }
    }
    finished.extend(active);
    Ok(finished.into_iter().min_by(rank).map(|h| h.tokens).unwrap_or_default())
}

fn top_k<M: StepModel + ?Sized>(s: &Stepper<'_, M>, limit: usize, k: usize, seed: u64) -> Result<Vec<TokenId>> {
    let eos = s.model.eos();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < limit {
        let p = s.probs(&out)?;
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
        order.truncate(k);
        let dist = WeightedIndex::new(order.iter().map(|&i| p[i]))
            .map_err(|e| Error::Contract(format!("top-{k} mass: {e}")))?;
        let tok = order[dist.sample(&mut rng)] as TokenId;
        if tok == eos {
            break;
        }
        out.push(tok);
    }
    Ok(out)
}
