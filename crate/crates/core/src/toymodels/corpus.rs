use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoding::{decode_all, DecodeConfig, Watermark};
use crate::error::{Error, Result};
use crate::key::{TokenId, Vocabulary, WatermarkKey};
use crate::toymodels::victim::LexVictim;

/// Provenance carried by a pseudo-labelled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub watermarked: bool,
    pub epsilon: f64,
    pub key_fingerprint: Option<String>,
    #[serde(default)]
    pub decode: Option<String>,
    /// Share of pairs taken from a watermarked corpus, when mixed.
    #[serde(default)]
    pub mix_ratio: Option<f64>,
    /// Set after a synonym-randomization pass.
    #[serde(default)]
    pub attacked: bool,
    /// Set after the lexical baseline watermark was applied.
    #[serde(default)]
    pub lexical_watermark: bool,
}

impl CorpusMeta {
    pub fn raw() -> Self {
        Self {
            watermarked: false,
            epsilon: 0.0,
            key_fingerprint: None,
            decode: None,
            mix_ratio: None,
            attacked: false,
            lexical_watermark: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub src: Vec<TokenId>,
    pub tgt: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCorpus {
    pub pairs: Vec<Pair>,
    pub meta: CorpusMeta,
}

#[derive(Serialize, Deserialize)]
struct Header {
    header: CorpusMeta,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<Pair>, meta: CorpusMeta) -> Result<Self> {
        if let Some((i, _)) = pairs.iter().enumerate().find(|(_, p)| p.src.len() != p.tgt.len()) {
            return Err(Error::Contract(format!("pair {i}: source and target lengths differ")));
        }
        Ok(Self { pairs, meta })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn targets(&self) -> impl Iterator<Item = &[TokenId]> {
        self.pairs.iter().map(|p| p.tgt.as_slice())
    }

    /// JSON lines: a header record, then one `{src, tgt}` record per pair.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = serde_json::to_string(&Header {
            header: self.meta.clone(),
        })
        .expect("header serializes");
        out.push('\n');
        for p in &self.pairs {
            out.push_str(&serde_json::to_string(p).expect("pair serializes"));
            out.push('\n');
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let parse_err = |line: usize, source| Error::Parse {
            what: format!("{} line {line}", path.display()),
            source,
        };
        let first = lines
            .next()
            .ok_or_else(|| Error::Contract(format!("{}: empty corpus file", path.display())))?
            .map_err(|e| Error::io(path, e))?;
        let header: Header = serde_json::from_str(&first).map_err(|e| parse_err(1, e))?;
        let mut pairs = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            pairs.push(serde_json::from_str(&line).map_err(|e| parse_err(i + 2, e))?);
        }
        Self::new(pairs, header.header)
    }
}

/// Uniform random source sequences with lengths in `len_range` (inclusive).
pub fn synth_inputs(
    vocab: Vocabulary,
    count: usize,
    len_range: (usize, usize),
    seed: u64,
) -> Result<Vec<Vec<TokenId>>> {
    let (lo, hi) = len_range;
    if count == 0 {
        return Err(Error::arg("count", "must be at least 1"));
    }
    if lo == 0 || hi < lo {
        return Err(Error::arg("len_range", format!("invalid range {lo}..={hi}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = vocab.size() as TokenId;
    Ok((0..count)
        .map(|_| {
            let len = rng.random_range(lo..=hi);
            (0..len).map(|_| rng.random_range(0..v)).collect()
        })
        .collect())
}

/// Queries the victim on every input, watermarking each step when `epsilon > 0`.
pub fn generate_pseudo_corpus(
    victim: &LexVictim,
    inputs: &[Vec<TokenId>],
    key: &WatermarkKey,
    epsilon: f64,
    cfg: &DecodeConfig,
) -> Result<ParallelCorpus> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::arg("epsilon", format!("{epsilon} must be nonnegative")));
    }
    let mark = (epsilon > 0.0).then_some(Watermark { key, epsilon });
    let targets = decode_all(victim, inputs, cfg, mark)?;
    let pairs = inputs
        .iter()
        .cloned()
        .zip(targets)
        .map(|(src, tgt)| Pair { src, tgt })
        .collect();
    ParallelCorpus::new(
        pairs,
        CorpusMeta {
            watermarked: epsilon > 0.0,
            epsilon,
            key_fingerprint: (epsilon > 0.0).then(|| key.fingerprint()),
            decode: Some(cfg.strategy.to_string()),
            ..CorpusMeta::raw()
        },
    )
}

/// `⌈ratio·N⌉` pairs from `watermarked` (N = its size), the rest from `raw`, shuffled.
///
/// When both corpora have the same size they are treated as decodes of the
/// same inputs, and the raw pairs are taken at the complementary positions.
pub fn mix_corpora(
    watermarked: &ParallelCorpus,
    raw: &ParallelCorpus,
    ratio: f64,
    seed: u64,
) -> Result<ParallelCorpus> {
    if watermarked.is_empty() || raw.is_empty() {
        return Err(Error::arg("corpora", "both corpora must be nonempty"));
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::arg("ratio", format!("{ratio} is outside [0, 1]")));
    }
    let n = watermarked.len();
    let k = ((ratio * n as f64).ceil() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<Pair> = order[..k].iter().map(|&i| watermarked.pairs[i].clone()).collect();
    if raw.len() == n {
        pairs.extend(order[k..].iter().map(|&i| raw.pairs[i].clone()));
    } else {
        let mut raw_order: Vec<usize> = (0..raw.len()).collect();
        raw_order.shuffle(&mut rng);
        pairs.extend((0..n - k).map(|j| raw.pairs[raw_order[j % raw.len()]].clone()));
    }
    pairs.shuffle(&mut rng);
    let meta = CorpusMeta {
        watermarked: k > 0 && watermarked.meta.watermarked,
        mix_ratio: Some(ratio),
        ..watermarked.meta.clone()
    };
    ParallelCorpus::new(pairs, meta)
}
