use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, Uniform};
use serde::{Deserialize, Serialize};

use crate::decoding::StepModel;
use crate::error::{Error, Result};
use crate::key::{TokenId, Vocabulary};
use crate::prob::ProbVector;

/// Token id reserved for end-of-sequence in the toy vocabularies.
pub const EOS: TokenId = 0;

pub const DEFAULT_CONCENTRATION: f64 = 0.5;
pub const DEFAULT_BACKGROUND: f64 = 0.2;
pub const DEFAULT_CONFIDENCE: [f64; 2] = [0.55, 1.0];
pub const DEFAULT_ALTERNATIVE_RATE: f64 = 0.35;

/// How a victim's rows are drawn.
///
/// Every source token has a preferred output token, and every
/// `(previous, current)` pair has an alternative one. A row puts weight
/// `w ~ U(confidence)` on the preferred token and `1 - w` on the alternative,
/// then mixes in a symmetric Dirichlet draw with weight `background`. With
/// probability `alternative_rate` the two weights trade places.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VictimShape {
    /// Concentration of the Dirichlet background.
    pub concentration: f64,
    pub background: f64,
    pub confidence: [f64; 2],
    pub alternative_rate: f64,
}

impl Default for VictimShape {
    fn default() -> Self {
        Self::new(DEFAULT_CONCENTRATION)
    }
}

impl VictimShape {
    pub fn new(concentration: f64) -> Self {
        Self {
            concentration,
            background: DEFAULT_BACKGROUND,
            confidence: DEFAULT_CONFIDENCE,
            alternative_rate: DEFAULT_ALTERNATIVE_RATE,
        }
    }

    /// Rows that are plain Dirichlet draws.
    pub fn dirichlet(concentration: f64) -> Self {
        Self {
            concentration,
            background: 1.0,
            ..Self::new(concentration)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::arg(
                "concentration",
                format!("{} must be positive", self.concentration),
            ));
        }
        if !(0.0..=1.0).contains(&self.background) {
            return Err(Error::arg(
                "background",
                format!("{} is outside [0, 1]", self.background),
            ));
        }
        let [lo, hi] = self.confidence;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::arg(
                "confidence",
                format!("[{lo}, {hi}] is not a range inside [0, 1]"),
            ));
        }
        if !(0.0..=1.0).contains(&self.alternative_rate) {
            return Err(Error::arg(
                "alternative_rate",
                format!("{} is outside [0, 1]", self.alternative_rate),
            ));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VictimFile {
    vocab_size: usize,
    seed: u64,
    #[serde(flatten)]
    shape: VictimShape,
}

/// Length-preserving lexical channel standing in for the protected model.
///
/// Step `i` of source `x` emits from the row keyed by `(x[i-1], x[i])`, with
/// a dedicated start row for `i = 0`; see [`VictimShape`] for how rows are
/// drawn. After `len(x)` steps only EOS has mass. Rows never put mass on EOS.
///
/// Files hold the generating parameters; rows are redrawn on load.
#[derive(Debug, Clone, PartialEq)]
pub struct LexVictim {
    vocab_size: usize,
    seed: u64,
    shape: VictimShape,
    /// `(vocab_size + 1) * vocab_size` rows of `vocab_size` probabilities;
    /// row index `prev * vocab_size + current`, with `prev = vocab_size` at the start.
    rows: Vec<f64>,
}

impl LexVictim {
    pub fn vocab(&self) -> Vocabulary {
        Vocabulary::new(self.vocab_size).expect("validated at construction")
    }

    pub fn shape(&self) -> VictimShape {
        self.shape
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn row_index(&self, prev: Option<TokenId>, current: TokenId) -> usize {
        let prev = prev.map_or(self.vocab_size, |p| p as usize);
        prev * self.vocab_size + current as usize
    }

    /// The emission distribution for `current` following `prev` (`None` at the start).
    pub fn row(&self, prev: Option<TokenId>, current: TokenId) -> &[f64] {
        let v = self.vocab_size;
        let start = self.row_index(prev, current) * v;
        &self.rows[start..start + v]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len() / self.vocab_size
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&VictimFile {
            vocab_size: self.vocab_size,
            seed: self.seed,
            shape: self.shape,
        })
        .expect("victim serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: VictimFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "victim model".into(),
            source,
        })?;
        make_victim_with(Vocabulary::new(f.vocab_size)?, f.seed, f.shape)
    }
}

fn dirichlet_row(gamma: &Gamma<f64>, rng: &mut ChaCha20Rng, out: &mut [f64]) {
    loop {
        out[EOS as usize] = 0.0;
        for x in out.iter_mut().skip(1) {
            *x = gamma.sample(rng);
        }
        let total: f64 = out.iter().sum();
        if total > 0.0 && total.is_finite() {
            out.iter_mut().for_each(|x| *x /= total);
            return;
        }
    }
}

/// A victim with the default row shape and the given background concentration.
pub fn make_victim(vocab: Vocabulary, seed: u64, concentration: f64) -> Result<LexVictim> {
    make_victim_with(vocab, seed, VictimShape::new(concentration))
}

pub fn make_victim_with(vocab: Vocabulary, seed: u64, shape: VictimShape) -> Result<LexVictim> {
    shape.validate()?;
    let v = vocab.size();
    let gamma = Gamma::new(shape.concentration, 1.0).map_err(|e| Error::arg("concentration", e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let content = Uniform::new(1, v).expect("vocabulary has content tokens");
    let [lo, hi] = shape.confidence;
    let preferred: Vec<usize> = (0..v).map(|_| content.sample(&mut rng)).collect();
    let beta = shape.background;
    let mut rows = vec![0.0; (v + 1) * v * v];
    for (r, row) in rows.chunks_mut(v).enumerate() {
        dirichlet_row(&gamma, &mut rng, row);
        row.iter_mut().for_each(|x| *x *= beta);
        let alternative = content.sample(&mut rng);
        let mut w = lo + (hi - lo) * rng.random::<f64>();
        if rng.random::<f64>() < shape.alternative_rate {
            w = 1.0 - w;
        }
        row[preferred[r % v]] += (1.0 - beta) * w;
        row[alternative] += (1.0 - beta) * (1.0 - w);
    }
    Ok(LexVictim {
        vocab_size: v,
        seed,
        shape,
        rows,
    })
}

impl StepModel for LexVictim {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn eos(&self) -> TokenId {
        EOS
    }

    fn max_target_len(&self, x: &[TokenId]) -> usize {
        x.len()
    }

    fn step(&self, x: &[TokenId], prefix: &[TokenId]) -> Result<ProbVector> {
        let i = prefix.len();
        let Some(&current) = x.get(i) else {
            return Ok(ProbVector::one_hot(self.vocab_size, EOS as usize));
        };
        let vocab = self.vocab();
        vocab.check(current)?;
        let prev = if i == 0 { None } else { Some(x[i - 1]) };
        if let Some(p) = prev {
            vocab.check(p)?;
        }
        Ok(ProbVector::from_raw_unchecked(self.row(prev, current).to_vec()))
    }

    fn ignores_prefix(&self) -> bool {
        true
    }
}
