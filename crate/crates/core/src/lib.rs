//! Invisible watermarking of a text generator's per-step token distributions.
//!
//! The protected model's next-token distribution is split into two secret
//! halves of the vocabulary; the mass of each half is nudged along a
//! sinusoid whose phase is a keyed hash of the input. A model distilled from
//! the protected outputs inherits the sinusoid, which shows up as a peak at
//! the key frequency in a Lomb–Scargle periodogram of its group-1 mass.
//!
//! Besides the watermarking and detection primitives, [`toymodels`] and
//! [`evaluation`] provide a small lexical-channel distillation testbed used to
//! check detection end to end.

pub mod decoding;
pub mod detection;
pub mod error;
pub mod evaluation;
pub mod hashing;
pub mod injection;
pub mod key;
pub mod manifest;
pub mod periodogram;
pub mod prob;
pub mod toymodels;

pub use decoding::{decode, decode_all, DecodeConfig, StepModel, Strategy, Watermark, Watermarked};
pub use detection::{collect_pairs, detect, ProbeReport, ProbeSettings};
pub use error::{Error, Result};
pub use hashing::{hash_input, normal_cdf, periodic_signals, HashValue};
pub use injection::{group_sums, inject, GroupMasses};
pub use key::{generate_key, Group, GroupAssignment, TokenId, Vocabulary, WatermarkKey};
pub use periodogram::{lomb_scargle, snr, FrequencyGrid, SamplePoint, Spectrum};
pub use prob::ProbVector;
