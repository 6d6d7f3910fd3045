//! Probing a suspect model for the key's sinusoid.
//!
//! Detection only needs the suspect's per-step distributions and the key; the
//! protected model never enters this module.

use serde::{Deserialize, Serialize};

use crate::decoding::{decode, DecodeConfig, StepModel};
use crate::error::{Error, Result};
use crate::hashing::hash_input;
use crate::injection::group_sums;
use crate::key::{TokenId, WatermarkKey};
use crate::periodogram::{lomb_scargle, snr, FrequencyGrid, SamplePoint, Spectrum, MIN_POINTS};

/// Default confidence threshold on the group-1 mass.
pub const DEFAULT_Q_MIN: f64 = 0.6;
/// Default width of the signal window around `f_w`.
pub const DEFAULT_DELTA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub q_min: f64,
    pub delta: f64,
    pub grid: FrequencyGrid,
    pub decode: DecodeConfig,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            q_min: DEFAULT_Q_MIN,
            delta: DEFAULT_DELTA,
            grid: FrequencyGrid::default(),
            decode: DecodeConfig::greedy(64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// May be `f64::INFINITY` when the off-window power vanishes.
    pub p_snr: f64,
    pub n_pairs_total: usize,
    pub n_pairs_kept: usize,
    pub q_min: f64,
    pub fw: f64,
    pub spectrum: Spectrum,
}

impl ProbeReport {
    /// JSON summary pointing at the spectrum CSV written next to it.
    pub fn to_json(&self, spectrum_csv_path: &str) -> serde_json::Value {
        serde_json::json!({
            "p_snr": snr_json(self.p_snr),
            "n_pairs_total": self.n_pairs_total,
            "n_pairs_kept": self.n_pairs_kept,
            "q_min": self.q_min,
            "f_w": self.fw,
            "spectrum_csv_path": spectrum_csv_path,
        })
    }
}

/// Finite values as numbers, the infinite sentinel as the string `"inf"`.
pub fn snr_json(p_snr: f64) -> serde_json::Value {
    if p_snr.is_finite() {
        serde_json::json!(p_snr)
    } else {
        serde_json::json!("inf")
    }
}

/// One `(t, Q̂₁)` pair per decoding step of the suspect on each probe input.
pub fn collect_pairs<M: StepModel + ?Sized>(
    suspect: &M,
    probe_inputs: &[Vec<TokenId>],
    key: &WatermarkKey,
    cfg: &DecodeConfig,
) -> Result<Vec<SamplePoint>> {
    if probe_inputs.is_empty() {
        return Err(Error::arg("probe_inputs", "empty"));
    }
    let one = |(i, x): (usize, &Vec<TokenId>)| -> Result<Vec<SamplePoint>> {
        let t = hash_input(x, key)?.get();
        let target = decode(suspect, x, &cfg.for_item(i as u64), None)?;
        (0..target.len())
            .map(|step| {
                let p = suspect.step(x, &target[..step]).map_err(|e| match e {
                    Error::ProbVector(msg) => Error::Contract(msg),
                    other => other,
                })?;
                Ok(SamplePoint {
                    t,
                    y: group_sums(&p, key.groups()).q1,
                })
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let per_input: Vec<Vec<SamplePoint>> = {
        use rayon::prelude::*;
        probe_inputs.par_iter().enumerate().map(one).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_input: Vec<Vec<SamplePoint>> = probe_inputs.iter().enumerate().map(one).collect::<Result<_>>()?;
    Ok(per_input.into_iter().flatten().collect())
}

/// Keeps pairs with `y` strictly above `q_min`.
pub fn filter_pairs(pairs: &[SamplePoint], q_min: f64) -> Vec<SamplePoint> {
    pairs.iter().copied().filter(|p| p.y > q_min).collect()
}

/// Spectrum and ratio for already-collected pairs.
pub fn analyze(pairs: &[SamplePoint], key: &WatermarkKey, settings: &ProbeSettings) -> Result<ProbeReport> {
    if !(0.0..1.0).contains(&settings.q_min) {
        return Err(Error::arg("q_min", format!("{} is outside [0, 1)", settings.q_min)));
    }
    let kept = filter_pairs(pairs, settings.q_min);
    if kept.len() < MIN_POINTS {
        return Err(Error::InsufficientProbeData {
            total: pairs.len(),
            kept: kept.len(),
            q_min: settings.q_min,
            needed: MIN_POINTS,
        });
    }
    let spectrum = lomb_scargle(&kept, &settings.grid.frequencies())?;
    let p_snr = snr(&spectrum, key.fw(), settings.delta)?;
    Ok(ProbeReport {
        p_snr,
        n_pairs_total: pairs.len(),
        n_pairs_kept: kept.len(),
        q_min: settings.q_min,
        fw: key.fw(),
        spectrum,
    })
}

pub fn detect<M: StepModel + ?Sized>(
    suspect: &M,
    probe_inputs: &[Vec<TokenId>],
    key: &WatermarkKey,
    settings: &ProbeSettings,
) -> Result<ProbeReport> {
    let pairs = collect_pairs(suspect, probe_inputs, key, &settings.decode)?;
    analyze(&pairs, key, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::{generate_key, Vocabulary};
    use crate::prob::ProbVector;

    struct Uniform {
        vocab: usize,
        len: usize,
    }

    impl StepModel for Uniform {
        fn vocab_size(&self) -> usize {
            self.vocab
        }
        fn eos(&self) -> TokenId {
            u32::MAX
        }
        fn max_target_len(&self, _: &[TokenId]) -> usize {
            self.len
        }
        fn step(&self, _: &[TokenId], _: &[TokenId]) -> Result<ProbVector> {
            Ok(ProbVector::uniform(self.vocab))
        }
    }

    #[test]
    fn uniform_suspect_gives_half_mass_everywhere() {
        let key = generate_key(Vocabulary::new(20).unwrap(), 8, 16.0, 1).unwrap();
        let inputs = vec![vec![1, 2, 3], vec![4, 5, 6, 7]];
        let pairs = collect_pairs(&Uniform { vocab: 20, len: 7 }, &inputs, &key, &DecodeConfig::greedy(64)).unwrap();
        assert_eq!(pairs.len(), 14);
        assert!(pairs.iter().all(|p| (p.y - 0.5).abs() < 1e-15));
        assert_eq!(pairs[0].t, hash_input(&inputs[0], &key).unwrap().get());
    }

    #[test]
    fn q_min_zero_keeps_everything_and_filter_is_strict() {
        let pts = vec![
            SamplePoint { t: 0.1, y: 0.6 },
            SamplePoint { t: 0.2, y: 0.61 },
            SamplePoint { t: 0.3, y: 0.0 },
        ];
        assert_eq!(filter_pairs(&pts, 0.6).len(), 1);
        assert_eq!(filter_pairs(&pts, 0.0).len(), 2);
    }

    #[test]
    fn too_few_pairs_is_reported_with_counts() {
        let key = generate_key(Vocabulary::new(20).unwrap(), 8, 16.0, 1).unwrap();
        let inputs = vec![vec![1, 2, 3]];
        let err = detect(&Uniform { vocab: 20, len: 3 }, &inputs, &key, &ProbeSettings::default()).unwrap_err();
        match err {
            Error::InsufficientProbeData { total, kept, .. } => assert_eq!((total, kept), (3, 0)),
            other => panic!("{other}"),
        }
        assert!(collect_pairs(&Uniform { vocab: 20, len: 3 }, &[], &key, &DecodeConfig::greedy(4)).is_err());
    }
}
