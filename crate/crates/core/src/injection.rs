//! Sinusoidal perturbation of the group masses of one probability vector.

use crate::error::{Error, Result};
use crate::hashing::{hash_input, periodic_signals, HashValue};
use crate::key::{Group, GroupAssignment, TokenId, WatermarkKey};
use crate::prob::ProbVector;

/// Default watermark level.
pub const DEFAULT_EPSILON: f64 = 0.2;

/// Below this, a group counts as empty and its target mass is spread uniformly.
const EMPTY_GROUP_MASS: f64 = 1e-12;

/// Total probability held by each half of the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupMasses {
    pub q1: f64,
    pub q2: f64,
}

impl GroupMasses {
    pub fn get(&self, group: Group) -> f64 {
        match group {
            Group::One => self.q1,
            Group::Two => self.q2,
        }
    }
}

pub fn group_sums(p: &ProbVector, groups: &GroupAssignment) -> GroupMasses {
    let sum = |g| -> f64 { groups.members(g).iter().map(|&t| p[t as usize]).sum() };
    GroupMasses {
        q1: sum(Group::One),
        q2: sum(Group::Two),
    }
}

/// Modified group masses `(Q + ε(1 + z)) / (1 + 2ε)` for both groups.
pub fn target_masses(masses: GroupMasses, t: HashValue, fw: f64, epsilon: f64) -> GroupMasses {
    let (z1, z2) = periodic_signals(t, fw);
    let denom = 1.0 + 2.0 * epsilon;
    GroupMasses {
        q1: (masses.q1 + epsilon * (1.0 + z1)) / denom,
        q2: (masses.q2 + epsilon * (1.0 + z2)) / denom,
    }
}

/// Watermarks `p` for source `x`; `epsilon = 0` returns `p` unchanged.
pub fn inject(p: &ProbVector, x: &[TokenId], key: &WatermarkKey, epsilon: f64) -> Result<ProbVector> {
    let t = hash_input(x, key)?;
    inject_at(p, t, key, epsilon)
}

/// As [`inject`], with the hash value already computed.
pub fn inject_at(p: &ProbVector, t: HashValue, key: &WatermarkKey, epsilon: f64) -> Result<ProbVector> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::arg("epsilon", format!("{epsilon} must be nonnegative")));
    }
    let groups = key.groups();
    if p.len() != groups.vocab_size() {
        return Err(Error::ProbVector(format!(
            "length {} does not match vocabulary size {}",
            p.len(),
            groups.vocab_size()
        )));
    }
    if epsilon == 0.0 {
        return Ok(p.clone());
    }
    let masses = group_sums(p, groups);
    let target = target_masses(masses, t, key.fw(), epsilon);

    let mut out = p.as_slice().to_vec();
    for group in [Group::One, Group::Two] {
        let members = groups.members(group);
        let (have, want) = (masses.get(group), target.get(group));
        if have < EMPTY_GROUP_MASS {
            let each = want / members.len() as f64;
            members.iter().for_each(|&tok| out[tok as usize] = each);
        } else {
            let scale = want / have;
            members.iter().for_each(|&tok| out[tok as usize] *= scale);
        }
    }
    ProbVector::from_weights(out)
}
