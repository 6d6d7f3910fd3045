//! One-parameter sweeps over cohort settings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decoding::Strategy;
use crate::error::{Error, Result};
use crate::evaluation::cohort::{run_cohort, CohortResult, CohortSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Epsilon,
    MixRatio,
    Epochs,
    QMin,
    DecodeStrategy,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::Epsilon,
        SweepParam::MixRatio,
        SweepParam::Epochs,
        SweepParam::QMin,
        SweepParam::DecodeStrategy,
    ];

    fn name(self) -> &'static str {
        match self {
            SweepParam::Epsilon => "epsilon",
            SweepParam::MixRatio => "mix_ratio",
            SweepParam::Epochs => "epochs",
            SweepParam::QMin => "q_min",
            SweepParam::DecodeStrategy => "decode_strategy",
        }
    }

    /// A copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &CohortSpec, value: &str) -> Result<CohortSpec> {
        let bad = |e: String| Error::arg(self.name(), format!("cannot use {value:?}: {e}"));
        let real = || value.parse::<f64>().map_err(|e| bad(e.to_string()));
        let mut spec = base.clone();
        match self {
            SweepParam::Epsilon => spec.epsilon = real()?,
            SweepParam::MixRatio => spec.mix_ratio = real()?,
            SweepParam::Epochs => {
                spec.student.epochs = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?
            }
            SweepParam::QMin => {
                let q = real()?;
                for p in &mut spec.probes {
                    p.q_min = q;
                }
            }
            SweepParam::DecodeStrategy => spec.generate_decode = value.parse::<Strategy>()?,
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::arg("param", format!("unknown sweep parameter {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: String,
    pub result: CohortResult,
}

pub fn run_sweep(base: &CohortSpec, param: SweepParam, values: &[String]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::arg("values", "nothing to sweep"));
    }
    values
        .iter()
        .map(|v| {
            let spec = param.apply(base, v)?;
            Ok(SweepPoint {
                value: v.clone(),
                result: run_cohort(&spec)?,
            })
        })
        .collect()
}

pub fn sweep_csv(param: SweepParam, points: &[SweepPoint]) -> String {
    let mut out = format!("{param},quality_proxy,median_p_snr,max_negative,ap\n");
    for p in points {
        let r = &p.result;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.value,
            r.quality_proxy,
            r.median_positive(),
            r.max_negative(),
            r.ap_per_probe[0]
        ));
    }
    out
}
