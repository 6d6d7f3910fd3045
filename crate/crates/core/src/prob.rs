use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a [`ProbVector`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A categorical distribution over the vocabulary at one decoding step.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates `p`: every entry finite and in `[0, 1]`, total within [`SUM_TOLERANCE`] of 1.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::ProbVector("empty".into()));
        }
        if let Some((i, x)) = p
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0 || **x > 1.0)
        {
            return Err(Error::ProbVector(format!("entry {i} = {x} is not in [0, 1]")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::ProbVector(format!("entries sum to {total}")));
        }
        Ok(Self(p))
    }

    /// Clamps negatives to zero and rescales to unit mass.
    pub fn from_weights(mut w: Vec<f64>) -> Result<Self> {
        for x in w.iter_mut() {
            if !x.is_finite() {
                return Err(Error::ProbVector("non-finite weight".into()));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::ProbVector("weights have zero total mass".into()));
        }
        w.iter_mut().for_each(|x| *x /= total);
        Ok(Self(w))
    }

    pub fn uniform(size: usize) -> Self {
        Self(vec![1.0 / size as f64; size])
    }

    pub fn one_hot(size: usize, token: usize) -> Self {
        let mut p = vec![0.0; size];
        p[token] = 1.0;
        Self(p)
    }

    pub(crate) fn from_raw_unchecked(p: Vec<f64>) -> Self {
        Self(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.0.iter().enumerate().skip(1) {
            if x > self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
