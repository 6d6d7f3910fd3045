//! Desk-scale distillation testbed: a lexical victim, count and softmax
//! students, pseudo-labelled corpora, and the attacks and baselines used in
//! the detection experiments.
//!
//! Students see the anchor token (the one the input hash reads) together with
//! the current source token. A student that cannot see the anchor token has
//! no way to represent the hash-dependent signal; [`ContextSpec::anchor_aware`]
//! switches that off for architecture-mismatch runs.

pub mod attack;
pub mod corpus;
pub mod student;
pub mod victim;

pub use attack::{hit_ratio, lexical_baseline_watermark, synonym_attack, LexicalWatermark, SynonymMap};
pub use corpus::{generate_pseudo_corpus, mix_corpora, synth_inputs, CorpusMeta, Pair, ParallelCorpus};
pub use student::{
    cross_entropy, train_count_student, train_softmax_checkpoints, train_softmax_student, ContextSpec, CountStudent,
    SoftmaxConfig, SoftmaxStudent, Student,
};
pub use victim::{make_victim, make_victim_with, LexVictim, VictimShape, EOS};
