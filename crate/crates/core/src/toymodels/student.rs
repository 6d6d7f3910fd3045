//! Distilled student models. Both condition on (anchor token, current source
//! token); the anchor-blind variants drop the first half of that context.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoding::StepModel;
use crate::error::{Error, Result};
use crate::hashing::anchor_token;
use crate::key::{TokenId, DEFAULT_ANCHOR_INDEX};
use crate::prob::ProbVector;
use crate::toymodels::corpus::ParallelCorpus;
use crate::toymodels::victim::EOS;

/// What a student sees at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSpec {
    pub anchor_index: usize,
    /// When false the student ignores the anchor token.
    pub anchor_aware: bool,
}

impl Default for ContextSpec {
    fn default() -> Self {
        Self {
            anchor_index: DEFAULT_ANCHOR_INDEX,
            anchor_aware: true,
        }
    }
}

const BLIND: TokenId = TokenId::MAX;

impl ContextSpec {
    fn key(&self, x: &[TokenId], position: usize) -> Option<(TokenId, TokenId)> {
        let current = *x.get(position)?;
        let anchor = if self.anchor_aware {
            anchor_token(x, self.anchor_index).ok()?
        } else {
            BLIND
        };
        Some((anchor, current))
    }
}

fn infer_vocab(corpus: &ParallelCorpus) -> usize {
    corpus
        .pairs
        .iter()
        .flat_map(|p| p.src.iter().chain(&p.tgt))
        .max()
        .map_or(0, |m| *m as usize + 1)
}

fn check_vocab(corpus: &ParallelCorpus, vocab_size: usize) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::arg("corpus", "empty"));
    }
    let seen = infer_vocab(corpus);
    if seen > vocab_size {
        return Err(Error::TokenOutOfRange {
            token: seen as TokenId - 1,
            vocab_size,
        });
    }
    Ok(())
}

/// Add-α smoothed conditional counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountStudent {
    vocab_size: usize,
    alpha: f64,
    context: ContextSpec,
    /// `(anchor, source) -> sorted (target, count)`.
    #[serde(with = "table")]
    counts: BTreeMap<(TokenId, TokenId), Vec<(TokenId, u32)>>,
}

pub fn train_count_student(
    corpus: &ParallelCorpus,
    vocab_size: usize,
    alpha: f64,
    context: ContextSpec,
) -> Result<CountStudent> {
    check_vocab(corpus, vocab_size)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::arg("alpha", format!("{alpha} must be positive")));
    }
    let mut acc: HashMap<(TokenId, TokenId), BTreeMap<TokenId, u32>> = HashMap::new();
    for pair in &corpus.pairs {
        for (i, &target) in pair.tgt.iter().enumerate() {
            if let Some(ctx) = context.key(&pair.src, i) {
                *acc.entry(ctx).or_default().entry(target).or_default() += 1;
            }
        }
    }
    let counts = acc
        .into_iter()
        .map(|(ctx, row)| (ctx, row.into_iter().collect()))
        .collect();
    Ok(CountStudent {
        vocab_size,
        alpha,
        context,
        counts,
    })
}

impl CountStudent {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_contexts(&self) -> usize {
        self.counts.len()
    }
}

impl StepModel for CountStudent {
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
        let Some(ctx) = self.context.key(x, prefix.len()) else {
            return Ok(ProbVector::one_hot(self.vocab_size, EOS as usize));
        };
        let mut w = vec![self.alpha; self.vocab_size];
        if let Some(row) = self.counts.get(&ctx) {
            for &(tok, n) in row {
                w[tok as usize] += n as f64;
            }
        }
        ProbVector::from_weights(w)
    }

    fn ignores_prefix(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            epochs: 30,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Per-context logit rows trained by mini-batch gradient descent on cross-entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxStudent {
    vocab_size: usize,
    context: ContextSpec,
    config: SoftmaxConfig,
    /// Mean training cross-entropy after each epoch.
    losses: Vec<f64>,
    #[serde(with = "table")]
    logits: BTreeMap<(TokenId, TokenId), Vec<f64>>,
}

fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

pub fn train_softmax_student(
    corpus: &ParallelCorpus,
    vocab_size: usize,
    config: SoftmaxConfig,
    context: ContextSpec,
) -> Result<SoftmaxStudent> {
    train_softmax_checkpoints(corpus, vocab_size, config, context, &[]).map(|(model, _)| model)
}

/// Trains for `config.epochs`, also returning snapshots taken after each listed epoch.
pub fn train_softmax_checkpoints(
    corpus: &ParallelCorpus,
    vocab_size: usize,
    config: SoftmaxConfig,
    context: ContextSpec,
    checkpoints: &[usize],
) -> Result<(SoftmaxStudent, Vec<SoftmaxStudent>)> {
    check_vocab(corpus, vocab_size)?;
    if !(config.lr > 0.0 && config.lr.is_finite()) {
        return Err(Error::arg("lr", format!("{} must be positive", config.lr)));
    }
    if config.batch_size == 0 {
        return Err(Error::arg("batch_size", "must be at least 1"));
    }
    let mut index: BTreeMap<(TokenId, TokenId), usize> = BTreeMap::new();
    let mut examples: Vec<(usize, TokenId)> = Vec::new();
    for pair in &corpus.pairs {
        for (i, &target) in pair.tgt.iter().enumerate() {
            if let Some(ctx) = context.key(&pair.src, i) {
                let next = index.len();
                let row = *index.entry(ctx).or_insert(next);
                examples.push((row, target));
            }
        }
    }
    let v = vocab_size;
    let mut weights = vec![0.0; index.len() * v];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut probs = vec![0.0; v];
    // rows of the current batch and their gradients, laid out back to back
    let mut rows: Vec<usize> = Vec::with_capacity(config.batch_size);
    let mut grads = vec![0.0; config.batch_size * v];
    let mut losses = Vec::with_capacity(config.epochs);
    let mut snapshots = Vec::new();
    // target counts per row, for the end-of-epoch loss
    let mut tallies: Vec<Vec<(TokenId, u32)>> = vec![Vec::new(); index.len()];
    for &(row, target) in &examples {
        match tallies[row].iter_mut().find(|(t, _)| *t == target) {
            Some((_, n)) => *n += 1,
            None => tallies[row].push((target, 1)),
        }
    }

    let snapshot = |weights: &[f64], losses: &[f64], epochs: usize| SoftmaxStudent {
        vocab_size: v,
        context,
        config: SoftmaxConfig { epochs, ..config },
        losses: losses.to_vec(),
        logits: index
            .iter()
            .map(|(ctx, &row)| (*ctx, weights[row * v..(row + 1) * v].to_vec()))
            .collect(),
    };
    if checkpoints.contains(&0) {
        snapshots.push(snapshot(&weights, &losses, 0));
    }

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            // gradients use the logits from before the batch
            rows.clear();
            for (&e, grad) in batch.iter().zip(grads.chunks_mut(v)) {
                let (row, target) = examples[e];
                softmax_into(&weights[row * v..(row + 1) * v], grad);
                grad[target as usize] -= 1.0;
                rows.push(row);
            }
            for (&row, grad) in rows.iter().zip(grads.chunks(v)) {
                for (w, g) in weights[row * v..(row + 1) * v].iter_mut().zip(grad) {
                    *w -= config.lr * g;
                }
            }
        }
        let mut loss = 0.0;
        for (row, tally) in tallies.iter().enumerate() {
            softmax_into(&weights[row * v..(row + 1) * v], &mut probs);
            for &(target, n) in tally {
                loss -= n as f64 * probs[target as usize].max(f64::MIN_POSITIVE).ln();
            }
        }
        losses.push(loss / examples.len().max(1) as f64);
        if checkpoints.contains(&epoch) {
            snapshots.push(snapshot(&weights, &losses, epoch));
        }
    }
    Ok((snapshot(&weights, &losses, config.epochs), snapshots))
}

impl SoftmaxStudent {
    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn epochs(&self) -> usize {
        self.config.epochs
    }
}

impl StepModel for SoftmaxStudent {
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
        let Some(ctx) = self.context.key(x, prefix.len()) else {
            return Ok(ProbVector::one_hot(self.vocab_size, EOS as usize));
        };
        match self.logits.get(&ctx) {
            Some(row) => {
                let mut p = vec![0.0; self.vocab_size];
                softmax_into(row, &mut p);
                ProbVector::from_weights(p)
            }
            None => Ok(ProbVector::uniform(self.vocab_size)),
        }
    }

    fn ignores_prefix(&self) -> bool {
        true
    }
}

/// Any trained student, for code that handles both architectures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "lowercase")]
pub enum Student {
    Count(CountStudent),
    Softmax(SoftmaxStudent),
}

impl Student {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("student serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "student model".into(),
            source,
        })
    }
}

impl StepModel for Student {
    fn vocab_size(&self) -> usize {
        match self {
            Student::Count(m) => m.vocab_size(),
            Student::Softmax(m) => m.vocab_size(),
        }
    }

    fn eos(&self) -> TokenId {
        EOS
    }

    fn max_target_len(&self, x: &[TokenId]) -> usize {
        x.len()
    }

    fn step(&self, x: &[TokenId], prefix: &[TokenId]) -> Result<ProbVector> {
        match self {
            Student::Count(m) => m.step(x, prefix),
            Student::Softmax(m) => m.step(x, prefix),
        }
    }

    fn ignores_prefix(&self) -> bool {
        true
    }
}

/// Mean per-token cross-entropy of `model` on the targets of `corpus`.
pub fn cross_entropy<M: StepModel + ?Sized>(model: &M, corpus: &ParallelCorpus) -> Result<f64> {
    let (mut total, mut n) = (0.0, 0usize);
    for pair in &corpus.pairs {
        for i in 0..pair.tgt.len() {
            let p = model.step(&pair.src, &pair.tgt[..i])?;
            total -= p[pair.tgt[i] as usize].max(f64::MIN_POSITIVE).ln();
            n += 1;
        }
    }
    Ok(total / n.max(1) as f64)
}

/// Context-keyed maps serialize as a list of `{anchor, source, row}` records
/// since JSON object keys must be strings.
mod table {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::key::TokenId;

    #[derive(Serialize, Deserialize)]
    struct Entry<R> {
        anchor: Option<TokenId>,
        source: TokenId,
        row: R,
    }

    const BLIND: TokenId = super::BLIND;

    pub fn serialize<S: Serializer, R: Serialize>(
        map: &BTreeMap<(TokenId, TokenId), R>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(&(a, src), row)| Entry {
            anchor: (a != BLIND).then_some(a),
            source: src,
            row,
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, R: Deserialize<'de>>(
        d: D,
    ) -> Result<BTreeMap<(TokenId, TokenId), R>, D::Error> {
        let entries = Vec::<Entry<R>>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|e| ((e.anchor.unwrap_or(BLIND), e.source), e.row))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toymodels::corpus::{CorpusMeta, Pair};

    fn corpus(pairs: Vec<(Vec<TokenId>, Vec<TokenId>)>) -> ParallelCorpus {
        ParallelCorpus::new(
            pairs.into_iter().map(|(src, tgt)| Pair { src, tgt }).collect(),
            CorpusMeta::raw(),
        )
        .unwrap()
    }

    #[test]
    fn repeated_pair_dominates_count_student() {
        let c = corpus(vec![(vec![3, 4, 5], vec![7, 8, 9]); 50]);
        let s = train_count_student(&c, 20, 1e-3, ContextSpec::default()).unwrap();
        let p = s.step(&[3, 4, 5], &[]).unwrap();
        // (50 + α) / (50 + 20α)
        assert!(p[7] >= 0.99);
        assert!((p[7] - (50.0 + 1e-3) / (50.0 + 20e-3)).abs() < 1e-12);
        assert_eq!(s.step(&[3, 4, 5], &[7, 8]).unwrap().argmax(), 9);
        // unseen context: uniform
        assert!((s.step(&[1, 2], &[]).unwrap()[0] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn anchor_blind_student_pools_contexts() {
        let c = corpus(vec![(vec![3, 1, 5], vec![7, 8, 9]), (vec![3, 2, 5], vec![6, 8, 9])]);
        let aware = train_count_student(&c, 10, 1e-6, ContextSpec::default()).unwrap();
        let blind = train_count_student(
            &c,
            10,
            1e-6,
            ContextSpec {
                anchor_aware: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(aware.step(&[3, 1, 5], &[]).unwrap()[7] > 0.99);
        let p = blind.step(&[3, 1, 5], &[]).unwrap();
        assert!((p[7] - 0.5).abs() < 1e-5 && (p[6] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn zero_epochs_predict_uniform() {
        let c = corpus(vec![(vec![3, 4], vec![5, 6]); 4]);
        let cfg = SoftmaxConfig {
            epochs: 0,
            ..Default::default()
        };
        let s = train_softmax_student(&c, 10, cfg, ContextSpec::default()).unwrap();
        let p = s.step(&[3, 4], &[]).unwrap();
        assert!(p.as_slice().iter().all(|q| (q - 0.1).abs() < 1e-12));
        assert!(s.losses().is_empty());
    }

    #[test]
    fn softmax_loss_decreases() {
        let c = corpus(
            (0..200u32)
                .map(|i| {
                    (
                        vec![i % 7, i % 5, i % 3],
                        vec![(i % 7) + 1, (i % 5) + 2, (i * 7 % 9) + 1],
                    )
                })
                .collect(),
        );
        let cfg = SoftmaxConfig {
            epochs: 20,
            lr: 0.3,
            ..Default::default()
        };
        let s = train_softmax_student(&c, 12, cfg, ContextSpec::default()).unwrap();
        let l = s.losses();
        assert_eq!(l.len(), 20);
        for w in l.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{l:?}");
        }
        assert!(l[19] < l[0]);
    }

    #[test]
    fn checkpoints_match_shorter_runs() {
        let c = corpus(
            (0..50u32)
                .map(|i| (vec![i % 4, i % 3], vec![i % 5 + 1, i % 2 + 1]))
                .collect(),
        );
        let cfg = SoftmaxConfig {
            epochs: 6,
            ..Default::default()
        };
        let (full, snaps) = train_softmax_checkpoints(&c, 8, cfg, ContextSpec::default(), &[2, 6]).unwrap();
        let short = train_softmax_student(&c, 8, SoftmaxConfig { epochs: 2, ..cfg }, ContextSpec::default()).unwrap();
        assert_eq!(snaps[0], short);
        assert_eq!(snaps[1], full);
    }

    #[test]
    fn rejects_empty_corpus_and_bad_params() {
        let empty = corpus(vec![]);
        assert!(train_count_student(&empty, 10, 1.0, ContextSpec::default()).is_err());
        assert!(train_softmax_student(&empty, 10, SoftmaxConfig::default(), ContextSpec::default()).is_err());
        let c = corpus(vec![(vec![3], vec![12])]);
        assert!(train_count_student(&c, 10, 1.0, ContextSpec::default()).is_err());
        let c = corpus(vec![(vec![3], vec![4])]);
        assert!(train_count_student(&c, 10, 0.0, ContextSpec::default()).is_err());
    }

    #[test]
    fn students_round_trip_through_json() {
        let c = corpus(
            (0..30u32)
                .map(|i| (vec![i % 4, i % 3, 1], vec![i % 5 + 1, 2, 3]))
                .collect(),
        );
        let count = Student::Count(train_count_student(&c, 8, 0.1, ContextSpec::default()).unwrap());
        assert_eq!(Student::from_json(&count.to_json()).unwrap(), count);
        let blind = ContextSpec {
            anchor_aware: false,
            ..Default::default()
        };
        let soft = Student::Softmax(
            train_softmax_student(
                &c,
                8,
                SoftmaxConfig {
                    epochs: 3,
                    ..Default::default()
                },
                blind,
            )
            .unwrap(),
        );
        assert_eq!(Student::from_json(&soft.to_json()).unwrap(), soft);
    }
}
