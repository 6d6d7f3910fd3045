//! Positive/negative suspect cohorts scored by spectral ratio or hit ratio.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoding::{decode, mix_seed, DecodeConfig, Strategy, Watermark};
use crate::detection::{analyze, collect_pairs, snr_json, ProbeSettings};
use crate::error::{Error, Result};
use crate::evaluation::ap::average_precision;
use crate::key::{generate_key, TokenId, Vocabulary, WatermarkKey};
use crate::periodogram::FrequencyGrid;
use crate::toymodels::{
    generate_pseudo_corpus, hit_ratio, lexical_baseline_watermark, make_victim_with, mix_corpora, synonym_attack,
    synth_inputs, train_count_student, train_softmax_student, ContextSpec, LexVictim, LexicalWatermark, ParallelCorpus,
    SoftmaxConfig, Student, SynonymMap, VictimShape,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    PSnr,
    HitRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Count,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudentSpec {
    pub arch: Arch,
    /// Count-student smoothing.
    pub alpha: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub anchor_aware: bool,
}

impl Default for StudentSpec {
    fn default() -> Self {
        let soft = SoftmaxConfig::default();
        Self {
            arch: Arch::Count,
            alpha: 0.01,
            lr: soft.lr,
            epochs: soft.epochs,
            batch_size: soft.batch_size,
            anchor_aware: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub n_inputs: usize,
    pub q_min: f64,
    pub delta: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub grid_points: usize,
    pub decode: Strategy,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        let d = ProbeSettings::default();
        Self {
            n_inputs: 500,
            q_min: d.q_min,
            delta: d.delta,
            f_min: d.grid.f_min,
            f_max: d.grid.f_max,
            grid_points: d.grid.points,
            decode: Strategy::Greedy,
        }
    }
}

impl ProbeSpec {
    pub fn settings(&self, max_len: usize) -> Result<ProbeSettings> {
        Ok(ProbeSettings {
            q_min: self.q_min,
            delta: self.delta,
            grid: FrequencyGrid::new(self.f_min, self.f_max, self.grid_points)?,
            decode: DecodeConfig::new(self.decode, max_len)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynonymSpec {
    pub n_classes: usize,
    pub class_size: usize,
}

impl Default for SynonymSpec {
    fn default() -> Self {
        Self {
            n_classes: 50,
            class_size: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub swap_rate: f64,
}

/// Everything needed to rebuild a cohort experiment from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortSpec {
    pub seed: u64,
    pub vocab_size: usize,
    pub hash_dim: usize,
    pub fw: f64,
    pub epsilon: f64,
    pub victim: VictimShape,
    pub n_pairs: usize,
    pub len_min: usize,
    pub len_max: usize,
    pub generate_decode: Strategy,
    pub n_positive: usize,
    pub n_negative: usize,
    pub student: StudentSpec,
    /// Share of watermarked pairs in the positives' training data.
    pub mix_ratio: f64,
    pub synonyms: SynonymSpec,
    /// Synonym randomization applied to the positives' training data.
    pub attack: Option<AttackSpec>,
    pub scorer: Scorer,
    pub probes: Vec<ProbeSpec>,
    pub quality_inputs: usize,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            vocab_size: 100,
            hash_dim: 64,
            fw: crate::key::DEFAULT_FW,
            epsilon: crate::injection::DEFAULT_EPSILON,
            victim: VictimShape::default(),
            n_pairs: 20_000,
            len_min: 8,
            len_max: 16,
            generate_decode: Strategy::Beam { width: 5 },
            n_positive: 5,
            n_negative: 8,
            student: StudentSpec::default(),
            mix_ratio: 1.0,
            synonyms: SynonymSpec::default(),
            attack: None,
            scorer: Scorer::PSnr,
            probes: vec![ProbeSpec::default()],
            quality_inputs: 500,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_positive == 0 || self.n_negative == 0 {
            return Err(Error::arg("cohort", "need at least one positive and one negative"));
        }
        if self.probes.is_empty() {
            return Err(Error::arg("probes", "at least one probe configuration"));
        }
        if self.n_pairs == 0 || self.len_min == 0 || self.len_max < self.len_min {
            return Err(Error::arg("corpus", "need n_pairs >= 1 and 1 <= len_min <= len_max"));
        }
        if !(0.0..=1.0).contains(&self.mix_ratio) {
            return Err(Error::arg("mix_ratio", format!("{} is outside [0, 1]", self.mix_ratio)));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::arg("epsilon", format!("{} must be nonnegative", self.epsilon)));
        }
        Vocabulary::new(self.vocab_size)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "cohort spec".into(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn generate_config(&self) -> Result<DecodeConfig> {
        let strategy = match self.generate_decode {
            Strategy::TopK { k, seed } => Strategy::TopK {
                k,
                seed: mix_seed(self.seed, seed ^ SALT_GENERATE),
            },
            s => s,
        };
        DecodeConfig::new(strategy, self.len_max)
    }
}

const SALT_KEY: u64 = 1;
const SALT_VICTIM: u64 = 2;
const SALT_TRAIN: u64 = 3;
const SALT_QUALITY: u64 = 4;
const SALT_MIX: u64 = 5;
const SALT_ATTACK: u64 = 6;
const SALT_SYNONYMS: u64 = 7;
const SALT_GENERATE: u64 = 8;
const SALT_PROBE: u64 = 100;
const SALT_POSITIVE: u64 = 1_000;
const SALT_NEGATIVE: u64 = 2_000;

/// The shared fixtures of one cohort: key, victim and input sets.
pub struct World {
    pub vocab: Vocabulary,
    pub key: WatermarkKey,
    pub victim: LexVictim,
    pub probe_inputs: Vec<Vec<Vec<TokenId>>>,
    pub quality_inputs: Vec<Vec<TokenId>>,
}

impl World {
    pub fn build(spec: &CohortSpec) -> Result<Self> {
        spec.validate()?;
        let vocab = Vocabulary::new(spec.vocab_size)?;
        let lens = (spec.len_min, spec.len_max);
        let key = generate_key(vocab, spec.hash_dim, spec.fw, mix_seed(spec.seed, SALT_KEY))?;
        let victim = make_victim_with(vocab, mix_seed(spec.seed, SALT_VICTIM), spec.victim)?;
        let probe_inputs = spec
            .probes
            .iter()
            .enumerate()
            .map(|(j, p)| synth_inputs(vocab, p.n_inputs, lens, mix_seed(spec.seed, SALT_PROBE + j as u64)))
            .collect::<Result<_>>()?;
        let quality_inputs = synth_inputs(
            vocab,
            spec.quality_inputs.max(1),
            lens,
            mix_seed(spec.seed, SALT_QUALITY),
        )?;
        Ok(Self {
            vocab,
            key,
            victim,
            probe_inputs,
            quality_inputs,
        })
    }

    /// The substitute inputs one suspect sends to the victim.
    pub fn training_inputs(&self, spec: &CohortSpec, member_seed: u64) -> Result<Vec<Vec<TokenId>>> {
        synth_inputs(
            self.vocab,
            spec.n_pairs,
            (spec.len_min, spec.len_max),
            mix_seed(member_seed, SALT_TRAIN),
        )
    }

    /// Decodes `inputs` through the victim at level `epsilon`.
    pub fn corpus(&self, spec: &CohortSpec, inputs: &[Vec<TokenId>], epsilon: f64) -> Result<ParallelCorpus> {
        generate_pseudo_corpus(&self.victim, inputs, &self.key, epsilon, &spec.generate_config()?)
    }

    /// Synonym classes for the attack and the lexical baseline, when the spec uses them.
    pub fn synonyms(&self, spec: &CohortSpec) -> Result<Option<SynonymMap>> {
        match (spec.attack, spec.scorer) {
            (None, Scorer::PSnr) => Ok(None),
            (attack, _) => Ok(Some(self.synonym_map(spec, attack.map_or(0.0, |a| a.swap_rate))?)),
        }
    }

    /// The lexical baseline's word sets, when the spec scores by hit ratio.
    pub fn lexical(&self, spec: &CohortSpec) -> Result<Option<LexicalWatermark>> {
        match (self.synonyms(spec)?, spec.scorer) {
            (Some(map), Scorer::HitRatio) => Ok(Some(LexicalWatermark::from_classes(map.classes())?)),
            _ => Ok(None),
        }
    }

    /// Training data of one suspect. Every suspect queries the victim with its
    /// own inputs. Negatives get plain outputs; positives get marked outputs,
    /// mixed with plain ones and attacked as the spec says.
    pub fn suspect_corpus(&self, spec: &CohortSpec, positive: bool, member_seed: u64) -> Result<ParallelCorpus> {
        let inputs = self.training_inputs(spec, member_seed)?;
        if !positive {
            return self.corpus(spec, &inputs, 0.0);
        }
        let lexical = self.lexical(spec)?;
        let needs_raw = lexical.is_some() || spec.mix_ratio < 1.0;
        let raw = if needs_raw {
            Some(self.corpus(spec, &inputs, 0.0)?)
        } else {
            None
        };
        let marked = match (&lexical, &raw) {
            (Some(wm), Some(raw)) => lexical_baseline_watermark(raw, wm),
            _ => self.corpus(spec, &inputs, spec.epsilon)?,
        };
        let mut data = match &raw {
            Some(raw) if spec.mix_ratio < 1.0 => {
                mix_corpora(&marked, raw, spec.mix_ratio, mix_seed(member_seed, SALT_MIX))?
            }
            _ => marked,
        };
        if spec.attack.is_some() {
            if let Some(map) = self.synonyms(spec)? {
                data = synonym_attack(&data, &map, mix_seed(member_seed, SALT_ATTACK));
            }
        }
        Ok(data)
    }

    pub fn synonym_map(&self, spec: &CohortSpec, swap_rate: f64) -> Result<SynonymMap> {
        SynonymMap::random(
            self.vocab,
            spec.synonyms.n_classes,
            spec.synonyms.class_size,
            swap_rate,
            mix_seed(spec.seed, SALT_SYNONYMS),
        )
    }

    /// Token-level agreement of the watermarked victim's greedy output with the
    /// unwatermarked one, on held-out inputs. A stand-in for generation quality.
    pub fn quality_proxy(&self, spec: &CohortSpec) -> Result<f64> {
        let cfg = DecodeConfig::greedy(spec.len_max);
        let mark = Watermark {
            key: &self.key,
            epsilon: spec.epsilon,
        };
        let (mut same, mut total) = (0usize, 0usize);
        for x in &self.quality_inputs {
            let plain = decode(&self.victim, x, &cfg, None)?;
            let marked = decode(&self.victim, x, &cfg, Some(mark))?;
            total += plain.len().max(marked.len());
            same += plain.iter().zip(&marked).filter(|(a, b)| a == b).count();
        }
        Ok(if total == 0 { 1.0 } else { same as f64 / total as f64 })
    }
}

pub fn train_student(spec: &StudentSpec, corpus: &ParallelCorpus, vocab_size: usize, seed: u64) -> Result<Student> {
    let context = ContextSpec {
        anchor_aware: spec.anchor_aware,
        ..ContextSpec::default()
    };
    Ok(match spec.arch {
        Arch::Count => Student::Count(train_count_student(corpus, vocab_size, spec.alpha, context)?),
        Arch::Softmax => Student::Softmax(train_softmax_student(
            corpus,
            vocab_size,
            SoftmaxConfig {
                lr: spec.lr,
                epochs: spec.epochs,
                batch_size: spec.batch_size,
                seed,
            },
            context,
        )?),
    })
}

/// One suspect's score under one probe configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub value: f64,
    pub n_pairs_total: usize,
    pub n_pairs_kept: usize,
}

/// Spectral ratio of `suspect` under `key`. A suspect with too few confident
/// pairs carries no detectable signal and scores 0.
pub fn p_snr_score(
    suspect: &Student,
    probe_inputs: &[Vec<TokenId>],
    key: &WatermarkKey,
    settings: &ProbeSettings,
) -> Result<Score> {
    let pairs = collect_pairs(suspect, probe_inputs, key, &settings.decode)?;
    match analyze(&pairs, key, settings) {
        Ok(report) => Ok(Score {
            value: report.p_snr,
            n_pairs_total: report.n_pairs_total,
            n_pairs_kept: report.n_pairs_kept,
        }),
        Err(Error::InsufficientProbeData { total, kept, .. }) => Ok(Score {
            value: 0.0,
            n_pairs_total: total,
            n_pairs_kept: kept,
        }),
        Err(e) => Err(e),
    }
}

pub fn hit_ratio_score(
    suspect: &Student,
    probe_inputs: &[Vec<TokenId>],
    wm: &LexicalWatermark,
    cfg: &DecodeConfig,
) -> Result<Score> {
    let outputs = crate::decoding::decode_all(suspect, probe_inputs, cfg, None)?;
    let n = outputs.iter().map(Vec::len).sum();
    Ok(Score {
        value: hit_ratio(outputs.iter().map(Vec::as_slice), wm),
        n_pairs_total: n,
        n_pairs_kept: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub model_id: String,
    pub is_positive: bool,
    pub probe: usize,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortResult {
    pub spec: CohortSpec,
    pub rows: Vec<ScoreRow>,
    pub ap_per_probe: Vec<f64>,
    pub map: f64,
    pub quality_proxy: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

impl CohortResult {
    fn scores(&self, positive: bool, probe: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.is_positive == positive && r.probe == probe)
            .map(|r| r.score.value)
            .collect()
    }

    pub fn positive_scores(&self, probe: usize) -> Vec<f64> {
        self.scores(true, probe)
    }

    pub fn negative_scores(&self, probe: usize) -> Vec<f64> {
        self.scores(false, probe)
    }

    pub fn median_positive(&self) -> f64 {
        median(self.positive_scores(0))
    }

    pub fn median_negative(&self) -> f64 {
        median(self.negative_scores(0))
    }

    pub fn max_negative(&self) -> f64 {
        self.negative_scores(0).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model_id,is_positive,probe,score,n_pairs_total,n_pairs_kept\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.model_id, r.is_positive, r.probe, r.score.value, r.score.n_pairs_total, r.score.n_pairs_kept
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_csv().as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ap": self.ap_per_probe.first().copied().unwrap_or(f64::NAN),
            "ap_per_probe": self.ap_per_probe,
            "map": self.map,
            "n_pos": self.spec.n_positive,
            "n_neg": self.spec.n_negative,
            "scorer": self.spec.scorer,
            "median_positive": snr_json(self.median_positive()),
            "median_negative": snr_json(self.median_negative()),
            "max_negative": snr_json(self.max_negative()),
            "quality_proxy": self.quality_proxy,
            "settings": self.spec,
        })
    }
}

/// Builds the victim, key and corpora, trains every suspect, and ranks them.
pub fn run_cohort(spec: &CohortSpec) -> Result<CohortResult> {
    let world = World::build(spec)?;
    let lexical = world.lexical(spec)?;
    let settings = spec
        .probes
        .iter()
        .map(|p| p.settings(spec.len_max))
        .collect::<Result<Vec<_>>>()?;

    let members: Vec<(String, bool, u64)> = (0..spec.n_positive)
        .map(|i| {
            (
                format!("pos{i:02}"),
                true,
                mix_seed(spec.seed, SALT_POSITIVE + i as u64),
            )
        })
        .chain((0..spec.n_negative).map(|j| {
            (
                format!("neg{j:02}"),
                false,
                mix_seed(spec.seed, SALT_NEGATIVE + j as u64),
            )
        }))
        .collect();

    let evaluate = |(id, positive, seed): &(String, bool, u64)| -> Result<Vec<ScoreRow>> {
        let data = world.suspect_corpus(spec, *positive, *seed)?;
        let student = train_student(&spec.student, &data, world.vocab.size(), *seed)?;
        settings
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let score = match &lexical {
                    None => p_snr_score(&student, &world.probe_inputs[j], &world.key, s)?,
                    Some(wm) => hit_ratio_score(&student, &world.probe_inputs[j], wm, &s.decode)?,
                };
                Ok(ScoreRow {
                    model_id: id.clone(),
                    is_positive: *positive,
                    probe: j,
                    score,
                })
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let per_member: Vec<Vec<ScoreRow>> = {
        use rayon::prelude::*;
        members.par_iter().map(evaluate).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_member: Vec<Vec<ScoreRow>> = members.iter().map(evaluate).collect::<Result<_>>()?;
    let rows: Vec<ScoreRow> = per_member.into_iter().flatten().collect();

    let ap_per_probe = (0..spec.probes.len())
        .map(|j| {
            let scored: Vec<(bool, f64)> = rows
                .iter()
                .filter(|r| r.probe == j)
                .map(|r| (r.is_positive, r.score.value))
                .collect();
            average_precision(&scored)
        })
        .collect::<Result<Vec<_>>>()?;
    let map = ap_per_probe.iter().sum::<f64>() / ap_per_probe.len() as f64;
    Ok(CohortResult {
        spec: spec.clone(),
        rows,
        ap_per_probe,
        map,
        quality_proxy: world.quality_proxy(spec)?,
    })
}
