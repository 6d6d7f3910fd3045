//! Lomb–Scargle power spectrum for unevenly sampled `(t, y)` pairs and the
//! windowed signal-to-noise ratio around the key frequency.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

/// Below this mean off-window power the ratio is reported as infinite.
const NOISE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub t: f64,
    pub y: f64,
}

/// Uniform angular-frequency grid on `(f_min, f_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            f_min: 0.05,
            f_max: 50.0,
            points: 2000,
        }
    }
}

impl FrequencyGrid {
    pub fn new(f_min: f64, f_max: f64, points: usize) -> Result<Self> {
        if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) {
            return Err(Error::arg(
                "grid",
                format!("need 0 < f_min < f_max, got ({f_min}, {f_max})"),
            ));
        }
        if points < 2 {
            return Err(Error::arg("grid", "need at least 2 points"));
        }
        Ok(Self { f_min, f_max, points })
    }

    /// `points` frequencies from `f_min + step` up to `f_max`, where `step = (f_max - f_min) / points`.
    pub fn frequencies(&self) -> Vec<f64> {
        let step = (self.f_max - self.f_min) / self.points as f64;
        (1..=self.points)
            .map(|i| {
                if i == self.points {
                    self.f_max
                } else {
                    self.f_min + step * i as f64
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.f_max - self.f_min) / self.points as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn new(freqs: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        if freqs.len() != power.len() || freqs.len() < 2 {
            return Err(Error::Periodogram(format!(
                "{} frequencies vs {} power values",
                freqs.len(),
                power.len()
            )));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) || freqs[0] <= 0.0 {
            return Err(Error::Periodogram("frequencies must be positive and increasing".into()));
        }
        if power.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::Periodogram("power must be nonnegative".into()));
        }
        Ok(Self { freqs, power })
    }

    pub fn f_max(&self) -> f64 {
        *self.freqs.last().expect("nonempty")
    }

    /// Grid frequency with the largest power.
    pub fn peak(&self) -> f64 {
        let i = (0..self.power.len())
            .max_by(|&a, &b| self.power[a].total_cmp(&self.power[b]).then(b.cmp(&a)))
            .expect("nonempty");
        self.freqs[i]
    }

    /// Trapezoid integral of the piecewise-linear spectrum over `[lo, hi]`, clipped to the grid.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.freqs.len() - 1 {
            let (f0, f1) = (self.freqs[i], self.freqs[i + 1]);
            let (a, b) = (lo.max(f0), hi.min(f1));
            if b <= a {
                continue;
            }
            let at = |f: f64| {
                let w = (f - f0) / (f1 - f0);
                self.power[i] * (1.0 - w) + self.power[i + 1] * w
            };
            total += 0.5 * (at(a) + at(b)) * (b - a);
        }
        total
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("omega,power\n");
        for (f, p) in self.freqs.iter().zip(&self.power) {
            out.push_str(&format!("{f},{p}\n"));
        }
        std::fs::File::create(path)
            .and_then(|mut fh| fh.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Classical Scargle periodogram of the mean-centered `y` at each angular frequency.
pub fn lomb_scargle(points: &[SamplePoint], freqs: &[f64]) -> Result<Spectrum> {
    if points.len() < MIN_POINTS {
        return Err(Error::Periodogram(format!(
            "{} points, need at least {MIN_POINTS}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.t.is_finite() || !p.y.is_finite()) {
        return Err(Error::Periodogram("non-finite sample".into()));
    }
    let t0 = points[0].t;
    if points.iter().all(|p| p.t == t0) {
        return Err(Error::Periodogram("all sample times are equal".into()));
    }
    let mean = points.iter().map(|p| p.y).sum::<f64>() / points.len() as f64;
    let centered: Vec<(f64, f64)> = points.iter().map(|p| (p.t, p.y - mean)).collect();

    let power_at = |omega: f64| -> f64 {
        let (mut s2, mut c2) = (0.0, 0.0);
        for &(t, _) in &centered {
            let (s, c) = (2.0 * omega * t).sin_cos();
            s2 += s;
            c2 += c;
        }
        let tau = s2.atan2(c2) / (2.0 * omega);
        let (mut yc, mut ys, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
        for &(t, y) in &centered {
            let (s, c) = (omega * (t - tau)).sin_cos();
            yc += y * c;
            ys += y * s;
            cc += c * c;
            ss += s * s;
        }
        let term = |num: f64, den: f64| if den > 0.0 { num * num / den } else { 0.0 };
        (0.5 * (term(yc, cc) + term(ys, ss))).max(0.0)
    };

    #[cfg(feature = "parallel")]
    let power: Vec<f64> = {
        use rayon::prelude::*;
        freqs.par_iter().map(|&w| power_at(w)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let power: Vec<f64> = freqs.iter().map(|&w| power_at(w)).collect();

    Spectrum::new(freqs.to_vec(), power)
}

/// Window mean over noise mean, around `fw` with width `delta`.
///
/// Returns `f64::INFINITY` when the off-window power vanishes while the window
/// does not, and 0 when both vanish.
pub fn snr(spec: &Spectrum, fw: f64, delta: f64) -> Result<f64> {
    let (f_lo, f_hi) = (spec.freqs[0], spec.f_max());
    let (lo, hi) = (fw - delta / 2.0, fw + delta / 2.0);
    if delta.is_nan() || delta <= 0.0 || lo < f_lo || hi > f_hi {
        return Err(Error::Periodogram(format!(
            "window [{lo}, {hi}] is not inside the grid [{f_lo}, {f_hi}]"
        )));
    }
    let noise_span = (f_hi - f_lo) - delta;
    if noise_span <= 0.0 {
        return Err(Error::Periodogram("window covers the whole grid".into()));
    }
    let signal = spec.integrate(lo, hi) / delta;
    let noise = (spec.integrate(f_lo, lo) + spec.integrate(hi, f_hi)) / noise_span;
    if noise < NOISE_FLOOR {
        return Ok(if signal > NOISE_FLOOR { f64::INFINITY } else { 0.0 });
    }
    Ok(signal / noise)
}
