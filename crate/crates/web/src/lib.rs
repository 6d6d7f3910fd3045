//! Browser bindings: build a small marked/plain student pair and look at their spectra.
//!
//! Every exported call returns a JSON string; `www/main.js` draws it.

use ginsew::detection::{analyze, collect_pairs, filter_pairs, ProbeSettings};
use ginsew::evaluation::{train_student, CohortSpec, ProbeSpec, World};
use ginsew::injection::inject_at;
use ginsew::toymodels::Student;
use ginsew::{generate_key, group_sums, Group, HashValue, ProbVector, Result, Vocabulary, WatermarkKey};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Scatter points sent to the page; the spectrum is computed from all of them.
const MAX_POINTS: usize = 4000;

#[wasm_bindgen]
pub struct Demo {
    key: WatermarkKey,
    wrong_key: WatermarkKey,
    probe_inputs: Vec<Vec<ginsew::TokenId>>,
    settings: ProbeSettings,
    marked: Student,
    plain: Student,
}

impl Demo {
    /// A victim, its key, one student distilled from marked outputs and one from plain ones.
    pub fn build(seed: u32, epsilon: f64, n_pairs: usize, n_probe: usize) -> Result<Self> {
        let spec = CohortSpec {
            seed: seed.into(),
            epsilon,
            n_pairs,
            probes: vec![ProbeSpec {
                n_inputs: n_probe,
                ..ProbeSpec::default()
            }],
            quality_inputs: 1,
            ..CohortSpec::default()
        };
        let world = World::build(&spec)?;
        let student = |positive: bool, member: u64| -> Result<Student> {
            let data = world.suspect_corpus(&spec, positive, member)?;
            train_student(&spec.student, &data, world.vocab.size(), member)
        };
        let marked = student(true, 1)?;
        let plain = student(false, 2)?;
        let wrong_key = generate_key(world.vocab, spec.hash_dim, spec.fw, u64::from(seed) + 1_000_000)?;
        let settings = spec.probes[0].settings(spec.len_max)?;
        let World {
            key, mut probe_inputs, ..
        } = world;
        Ok(Self {
            key,
            wrong_key,
            probe_inputs: probe_inputs.swap_remove(0),
            settings,
            marked,
            plain,
        })
    }

    /// Kept `(t, Q1)` pairs, the spectrum and P_snr of one student under one key.
    pub fn report(&self, marked: bool, wrong_key: bool) -> Result<Value> {
        let student = if marked { &self.marked } else { &self.plain };
        let key = if wrong_key { &self.wrong_key } else { &self.key };
        let pairs = collect_pairs(student, &self.probe_inputs, key, &self.settings.decode)?;
        let report = analyze(&pairs, key, &self.settings)?;
        let kept = filter_pairs(&pairs, self.settings.q_min);
        let stride = kept.len().div_ceil(MAX_POINTS).max(1);
        let points: Vec<[f64; 2]> = kept.iter().step_by(stride).map(|p| [p.t, p.y]).collect();
        Ok(json!({
            "p_snr": report.p_snr,
            "fw": report.fw,
            "delta": self.settings.delta,
            "n_pairs_total": report.n_pairs_total,
            "n_pairs_kept": report.n_pairs_kept,
            "points": points,
            "freqs": report.spectrum.freqs,
            "power": report.spectrum.power,
        }))
    }
}

/// Marked group masses over `t` for a distribution whose group-1 mass is `q1`.
pub fn injection_curve_value(epsilon: f64, q1: f64, points: usize) -> Result<Value> {
    let key = generate_key(Vocabulary::new(10)?, 8, ginsew::key::DEFAULT_FW, 0)?;
    let groups = key.groups();
    let (ones, twos) = (groups.members(Group::One), groups.members(Group::Two));
    let mut p = vec![0.0; 10];
    for &i in ones {
        p[i as usize] = q1 / ones.len() as f64;
    }
    for &i in twos {
        p[i as usize] = (1.0 - q1) / twos.len() as f64;
    }
    let p = ProbVector::new(p)?;
    let mut ts = Vec::with_capacity(points);
    let mut marked = Vec::with_capacity(points);
    for i in 0..points {
        let t = i as f64 / points as f64;
        let out = inject_at(&p, HashValue::new(t)?, &key, epsilon)?;
        ts.push(t);
        marked.push(group_sums(&out, groups).q1);
    }
    Ok(json!({ "t": ts, "q1": marked, "base": q1, "fw": key.fw() }))
}

fn js(e: ginsew::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, epsilon: f64, n_pairs: usize, n_probe: usize) -> std::result::Result<Demo, JsError> {
        Demo::build(seed, epsilon, n_pairs, n_probe).map_err(js)
    }

    /// JSON for the marked (or plain) student under the right (or a wrong) key.
    pub fn probe(&self, marked: bool, wrong_key: bool) -> std::result::Result<String, JsError> {
        self.report(marked, wrong_key).map(|v| v.to_string()).map_err(js)
    }
}

#[wasm_bindgen]
pub fn injection_curve(epsilon: f64, q1: f64, points: usize) -> std::result::Result<String, JsError> {
    injection_curve_value(epsilon, q1, points)
        .map(|v| v.to_string())
        .map_err(js)
}
