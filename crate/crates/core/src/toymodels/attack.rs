//! Synonym randomization, and the lexical synonym-replacement baseline it defeats.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::{TokenId, Vocabulary};
use crate::toymodels::corpus::ParallelCorpus;
use crate::toymodels::victim::EOS;

/// Disjoint synonym classes over part of the target vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynonymMap {
    classes: Vec<Vec<TokenId>>,
    swap_rate: f64,
}

impl SynonymMap {
    pub fn new(classes: Vec<Vec<TokenId>>, swap_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&swap_rate) {
            return Err(Error::arg("swap_rate", format!("{swap_rate} is outside [0, 1]")));
        }
        let mut seen = BTreeSet::new();
        for (i, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::arg("classes", format!("class {i} is empty")));
            }
            for &t in class {
                if !seen.insert(t) {
                    return Err(Error::arg("classes", format!("token {t} is in more than one class")));
                }
            }
        }
        Ok(Self { classes, swap_rate })
    }

    /// `n_classes` random classes of `class_size` distinct tokens each.
    pub fn random(vocab: Vocabulary, n_classes: usize, class_size: usize, swap_rate: f64, seed: u64) -> Result<Self> {
        if class_size == 0 || n_classes * class_size > vocab.size() {
            return Err(Error::arg(
                "classes",
                format!(
                    "{n_classes} classes of {class_size} do not fit a vocabulary of {}",
                    vocab.size()
                ),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<TokenId> = vocab.tokens().collect();
        ids.shuffle(&mut rng);
        let classes = ids[..n_classes * class_size]
            .chunks(class_size)
            .map(|c| c.to_vec())
            .collect();
        Self::new(classes, swap_rate)
    }

    pub fn classes(&self) -> &[Vec<TokenId>] {
        &self.classes
    }

    pub fn swap_rate(&self) -> f64 {
        self.swap_rate
    }

    pub fn with_swap_rate(&self, swap_rate: f64) -> Result<Self> {
        Self::new(self.classes.clone(), swap_rate)
    }
}

/// Replaces each covered target token, with probability `swap_rate`, by a
/// uniformly chosen member of its class. Sources are untouched. EOS is never
/// substituted in, so a class holding it acts as if EOS were absent.
pub fn synonym_attack(corpus: &ParallelCorpus, map: &SynonymMap, seed: u64) -> ParallelCorpus {
    let class_of: HashMap<TokenId, usize> = map
        .classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&t| (t, i)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = corpus.clone();
    for pair in &mut out.pairs {
        for tok in &mut pair.tgt {
            if let Some(&ci) = class_of.get(tok) {
                if rng.random::<f64>() < map.swap_rate {
                    let pick = *map.classes[ci].choose(&mut rng).expect("nonempty class");
                    if pick != EOS {
                        *tok = pick;
                    }
                }
            }
        }
    }
    out.meta.attacked = true;
    out
}

/// Watch words `C`, their synonyms `R`, and the replacement map `W` onto watermark words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalWatermark {
    pub watch: BTreeSet<TokenId>,
    pub synonyms: BTreeSet<TokenId>,
    pub replacement: BTreeMap<TokenId, TokenId>,
}

impl LexicalWatermark {
    pub fn new(
        watch: BTreeSet<TokenId>,
        synonyms: BTreeSet<TokenId>,
        replacement: BTreeMap<TokenId, TokenId>,
    ) -> Result<Self> {
        for t in watch.iter().chain(&synonyms) {
            match replacement.get(t) {
                None => return Err(Error::arg("W", format!("token {t} has no watermark word"))),
                Some(w) if !watch.contains(w) && !synonyms.contains(w) => {
                    return Err(Error::arg("W", format!("watermark word {w} is not a candidate")))
                }
                _ => {}
            }
        }
        Ok(Self {
            watch,
            synonyms,
            replacement,
        })
    }

    /// From synonym classes: the first member of each class is the watch word,
    /// the rest are its synonyms, and every member maps to the second member.
    pub fn from_classes(classes: &[Vec<TokenId>]) -> Result<Self> {
        let (mut watch, mut synonyms, mut replacement) = (BTreeSet::new(), BTreeSet::new(), BTreeMap::new());
        for class in classes {
            if class.len() < 2 {
                return Err(Error::arg("classes", "baseline classes need at least two members"));
            }
            watch.insert(class[0]);
            synonyms.extend(class[1..].iter().copied());
            for &t in class {
                replacement.insert(t, class[1]);
            }
        }
        Self::new(watch, synonyms, replacement)
    }

    fn is_candidate(&self, t: TokenId) -> bool {
        self.watch.contains(&t) || self.synonyms.contains(&t)
    }

    fn marks(&self) -> BTreeSet<TokenId> {
        self.replacement.values().copied().collect()
    }
}

/// Rewrites every candidate occurrence in the targets to its watermark word.
pub fn lexical_baseline_watermark(corpus: &ParallelCorpus, wm: &LexicalWatermark) -> ParallelCorpus {
    let mut out = corpus.clone();
    for pair in &mut out.pairs {
        for tok in &mut pair.tgt {
            if let Some(&w) = wm.replacement.get(tok) {
                *tok = w;
            }
        }
    }
    out.meta.lexical_watermark = true;
    out
}

/// Watermark-word occurrences over candidate-set occurrences; 0 when nothing matches.
pub fn hit_ratio<'a>(outputs: impl IntoIterator<Item = &'a [TokenId]>, wm: &LexicalWatermark) -> f64 {
    let marks = wm.marks();
    let (mut hits, mut candidates) = (0usize, 0usize);
    for seq in outputs {
        for t in seq {
            if wm.is_candidate(*t) {
                candidates += 1;
                if marks.contains(t) {
                    hits += 1;
                }
            }
        }
    }
    if candidates == 0 {
        0.0
    } else {
        hits as f64 / candidates as f64
    }
}
