//! Vocabulary, the secret two-way token partition, and the watermark key.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type TokenId = u32;

/// Key frequency used by default for new keys.
pub const DEFAULT_FW: f64 = 16.0;
/// Smallest accepted hash dimension.
pub const MIN_HASH_DIM: usize = 8;
/// Source position whose token drives the input hash.
pub const DEFAULT_ANCHOR_INDEX: usize = 1;
/// Version tag written into key files.
pub const KEY_FILE_VERSION: u32 = 1;

/// A token vocabulary with contiguous ids `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    size: usize,
}

impl Vocabulary {
    pub fn new(size: usize) -> Result<Self> {
        if size < 4 {
            return Err(Error::Vocabulary(format!("size {size} is below the minimum of 4")));
        }
        if !size.is_multiple_of(2) {
            return Err(Error::Vocabulary(format!(
                "size {size} is odd; two equal groups need an even vocabulary"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tokens(&self) -> impl Iterator<Item = TokenId> {
        0..self.size as TokenId
    }

    pub fn check(&self, token: TokenId) -> Result<()> {
        if (token as usize) < self.size {
            Ok(())
        } else {
            Err(Error::TokenOutOfRange {
                token,
                vocab_size: self.size,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    One,
    Two,
}

impl Group {
    pub fn label(self) -> u8 {
        match self {
            Group::One => 1,
            Group::Two => 2,
        }
    }
}

/// Equal-size split of the vocabulary into group 1 and group 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    group_of: Vec<Group>,
    members_one: Vec<TokenId>,
    members_two: Vec<TokenId>,
}

impl GroupAssignment {
    pub fn from_groups(group_of: Vec<Group>) -> Result<Self> {
        let members_one: Vec<TokenId> = (0..group_of.len() as TokenId)
            .filter(|&t| group_of[t as usize] == Group::One)
            .collect();
        let members_two: Vec<TokenId> = (0..group_of.len() as TokenId)
            .filter(|&t| group_of[t as usize] == Group::Two)
            .collect();
        if members_one.len() != members_two.len() {
            return Err(Error::Key(format!(
                "groups: sizes {} and {} are not equal",
                members_one.len(),
                members_two.len()
            )));
        }
        Ok(Self {
            group_of,
            members_one,
            members_two,
        })
    }

    /// Builds the split from 1/2 labels.
    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        let groups = labels
            .iter()
            .enumerate()
            .map(|(i, l)| match l {
                1 => Ok(Group::One),
                2 => Ok(Group::Two),
                other => Err(Error::Key(format!("groups[{i}]: label {other} is not 1 or 2"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_groups(groups)
    }

    /// Seeded uniform shuffle of token ids, first half to group 1.
    pub fn random<R: Rng + ?Sized>(vocab: Vocabulary, rng: &mut R) -> Self {
        let mut ids: Vec<TokenId> = vocab.tokens().collect();
        ids.shuffle(rng);
        let mut group_of = vec![Group::Two; vocab.size()];
        for &t in &ids[..vocab.size() / 2] {
            group_of[t as usize] = Group::One;
        }
        Self::from_groups(group_of).expect("even split")
    }

    pub fn group_of(&self, token: TokenId) -> Group {
        self.group_of[token as usize]
    }

    pub fn members(&self, group: Group) -> &[TokenId] {
        match group {
            Group::One => &self.members_one,
            Group::Two => &self.members_two,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.group_of.len()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.group_of.iter().map(|g| g.label()).collect()
    }
}

/// The secret watermark key `(f_w, v, M)` plus the group split and anchor position.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkKey {
    pub(crate) fw: f64,
    pub(crate) phase: Vec<f64>,
    /// Row-major `vocab_size x n`.
    pub(crate) matrix: Vec<f64>,
    pub(crate) groups: GroupAssignment,
    pub(crate) anchor_index: usize,
}

impl WatermarkKey {
    /// Assembles a key from explicit parts, checking every shape invariant.
    pub fn from_parts(
        fw: f64,
        phase: Vec<f64>,
        matrix_rows: Vec<Vec<f64>>,
        groups: GroupAssignment,
        anchor_index: usize,
    ) -> Result<Self> {
        if !(fw.is_finite() && fw > 0.0) {
            return Err(Error::Key(format!("f_w: {fw} must be positive")));
        }
        let n = phase.len();
        if n == 0 {
            return Err(Error::Key("v: empty phase vector".into()));
        }
        if let Some((i, x)) = phase.iter().enumerate().find(|(_, x)| !(0.0..1.0).contains(*x)) {
            return Err(Error::Key(format!("v[{i}] = {x} is outside [0, 1)")));
        }
        let vocab = Vocabulary::new(groups.vocab_size()).map_err(|e| Error::Key(format!("groups: {e}")))?;
        if matrix_rows.len() != vocab.size() {
            return Err(Error::Key(format!(
                "M: {} rows, expected {}",
                matrix_rows.len(),
                vocab.size()
            )));
        }
        let mut matrix = Vec::with_capacity(vocab.size() * n);
        for (i, row) in matrix_rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Key(format!("M[{i}]: {} columns, expected {n}", row.len())));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Key(format!("M[{i}]: non-finite entry")));
            }
            matrix.extend(row);
        }
        Ok(Self {
            fw,
            phase,
            matrix,
            groups,
            anchor_index,
        })
    }

    pub fn fw(&self) -> f64 {
        self.fw
    }

    pub fn hash_dim(&self) -> usize {
        self.phase.len()
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn matrix_row(&self, token: TokenId) -> &[f64] {
        let n = self.hash_dim();
        let start = token as usize * n;
        &self.matrix[start..start + n]
    }

    pub fn groups(&self) -> &GroupAssignment {
        &self.groups
    }

    pub fn anchor_index(&self) -> usize {
        self.anchor_index
    }

    pub fn vocab(&self) -> Vocabulary {
        Vocabulary {
            size: self.groups.vocab_size(),
        }
    }

    /// Short stable digest of the key contents, for corpus metadata.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.fw.to_le_bytes());
        h.update((self.anchor_index as u64).to_le_bytes());
        for g in self.groups.labels() {
            h.update([g]);
        }
        for x in self.phase.iter().chain(&self.matrix) {
            h.update(x.to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Returns a copy whose key frequency is replaced; used by tooling that explores `f_w`.
    pub fn with_fw(&self, fw: f64) -> Result<Self> {
        if !(fw.is_finite() && fw > 0.0) {
            return Err(Error::Key(format!("f_w: {fw} must be positive")));
        }
        Ok(Self { fw, ..self.clone() })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let n = self.hash_dim();
        let file = KeyFileOut {
            version: KEY_FILE_VERSION,
            vocab_size: self.groups.vocab_size(),
            n,
            f_w: Real(self.fw),
            anchor_index: self.anchor_index,
            groups: self.groups.labels(),
            v: self.phase.iter().copied().map(Real).collect(),
            m: self
                .matrix
                .chunks(n)
                .map(|row| row.iter().copied().map(Real).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("key serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: KeyFileIn = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "key file".into(),
            source,
        })?;
        if file.version != KEY_FILE_VERSION {
            return Err(Error::Key(format!("version: unsupported {}", file.version)));
        }
        if file.groups.len() != file.vocab_size {
            return Err(Error::Key(format!(
                "groups: {} labels, vocab_size is {}",
                file.groups.len(),
                file.vocab_size
            )));
        }
        if file.v.len() != file.n {
            return Err(Error::Key(format!("v: {} entries, n is {}", file.v.len(), file.n)));
        }
        let groups = GroupAssignment::from_labels(&file.groups)?;
        Self::from_parts(file.f_w, file.v, file.m, groups, file.anchor_index)
    }
}

/// Draws a fresh key. Same arguments always give the same key.
pub fn generate_key(vocab: Vocabulary, n: usize, fw: f64, seed: u64) -> Result<WatermarkKey> {
    if n < MIN_HASH_DIM {
        return Err(Error::arg(
            "n",
            format!("hash dimension {n} is below the minimum of {MIN_HASH_DIM}"),
        ));
    }
    if !(fw.is_finite() && fw > 0.0) {
        return Err(Error::arg("f_w", format!("{fw} must be positive")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let groups = GroupAssignment::random(vocab, &mut rng);
    let phase: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let matrix: Vec<f64> = (0..vocab.size() * n).map(|_| rng.sample(StandardNormal)).collect();
    Ok(WatermarkKey {
        fw,
        phase,
        matrix,
        groups,
        anchor_index: DEFAULT_ANCHOR_INDEX,
    })
}

/// Serializes with 17 significant digits.
struct Real(f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw =
            serde_json::value::RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize)]
struct KeyFileOut {
    version: u32,
    vocab_size: usize,
    n: usize,
    f_w: Real,
    anchor_index: usize,
    groups: Vec<u8>,
    v: Vec<Real>,
    #[serde(rename = "M")]
    m: Vec<Vec<Real>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFileIn {
    version: u32,
    vocab_size: usize,
    n: usize,
    f_w: f64,
    #[serde(default = "default_anchor")]
    anchor_index: usize,
    #[serde(deserialize_with = "labels")]
    groups: Vec<u8>,
    v: Vec<f64>,
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
}

fn default_anchor() -> usize {
    DEFAULT_ANCHOR_INDEX
}

fn labels<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u8>, D::Error> {
    let raw = Vec::<u8>::deserialize(d)?;
    if let Some(bad) = raw.iter().find(|l| **l != 1 && **l != 2) {
        return Err(D::Error::custom(format!("groups: label {bad} is not 1 or 2")));
    }
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_or_tiny_vocabulary_is_rejected() {
        assert!(Vocabulary::new(7).is_err());
        assert!(Vocabulary::new(2).is_err());
        assert!(Vocabulary::new(4).is_ok());
    }

    #[test]
    fn short_hash_dimension_is_rejected() {
        let vocab = Vocabulary::new(10).unwrap();
        assert!(generate_key(vocab, 7, 16.0, 0).is_err());
        assert!(generate_key(vocab, 8, 0.0, 0).is_err());
    }

    #[test]
    fn matrix_moments_match_standard_normal() {
        let key = generate_key(Vocabulary::new(1000).unwrap(), 64, DEFAULT_FW, 7).unwrap();
        let m = &key.matrix;
        assert_eq!(m.len(), 64_000);
        let mean = m.iter().sum::<f64>() / m.len() as f64;
        let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m.len() - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        assert!(key.phase.iter().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(key.fw(), 16.0);
    }

    #[test]
    fn tiny_vocab_groups_have_two_tokens_each() {
        for seed in 0..20 {
            let key = generate_key(Vocabulary::new(4).unwrap(), 8, 16.0, seed).unwrap();
            assert_eq!(key.groups.members(Group::One).len(), 2);
            assert_eq!(key.groups.members(Group::Two).len(), 2);
        }
    }

    #[test]
    fn different_seeds_give_different_groups() {
        let vocab = Vocabulary::new(1000).unwrap();
        for s in 0..100u64 {
            let a = generate_key(vocab, 8, 16.0, 2 * s).unwrap();
            let b = generate_key(vocab, 8, 16.0, 2 * s + 1).unwrap();
            assert_eq!(a.groups.members(Group::One).len(), 500);
            assert_ne!(a.groups.labels(), b.groups.labels());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let vocab = Vocabulary::new(20).unwrap();
        assert_eq!(
            generate_key(vocab, 16, 16.0, 3).unwrap(),
            generate_key(vocab, 16, 16.0, 3).unwrap()
        );
    }

    #[test]
    fn key_file_stores_every_real() {
        let key = generate_key(Vocabulary::new(1000).unwrap(), 64, 16.0, 1).unwrap();
        let value: serde_json::Value = serde_json::from_str(&key.to_json()).unwrap();
        let v = value["v"].as_array().unwrap().len();
        let m: usize = value["M"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r.as_array().unwrap().len())
            .sum();
        assert_eq!(v + m, 64 + 64_000);
        assert_eq!(value["vocab_size"], 1000);
        assert_eq!(value["anchor_index"], 1);
    }

    #[test]
    fn missing_matrix_is_named_in_error() {
        let key = generate_key(Vocabulary::new(4).unwrap(), 8, 16.0, 1).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&key.to_json()).unwrap();
        value.as_object_mut().unwrap().remove("M");
        let err = WatermarkKey::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("`M`"), "{err}");
    }

    #[test]
    fn malformed_fields_are_named() {
        let key = generate_key(Vocabulary::new(4).unwrap(), 8, 16.0, 1).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&key.to_json()).unwrap();
        value["v"][0] = serde_json::json!(1.5);
        let err = WatermarkKey::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("v[0]"), "{err}");

        let mut value: serde_json::Value = serde_json::from_str(&key.to_json()).unwrap();
        value["M"][2] = serde_json::json!([0.0]);
        let err = WatermarkKey::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("M[2]"), "{err}");

        let mut value: serde_json::Value = serde_json::from_str(&key.to_json()).unwrap();
        value["groups"] = serde_json::json!([1, 1, 1, 2]);
        let err = WatermarkKey::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("groups"), "{err}");
    }
}
