//! `ginsew`: keys, toy victims, pseudo corpora, students, detection and cohorts from the shell.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ginsew::evaluation::{run_cohort, run_sweep, sweep_csv, CohortSpec, SweepParam};
use ginsew::manifest::{write_json, Manifest};
use ginsew::toymodels::{
    generate_pseudo_corpus, hit_ratio, lexical_baseline_watermark, make_victim_with, mix_corpora, synonym_attack,
    synth_inputs, train_count_student, train_softmax_checkpoints, ContextSpec, LexVictim, LexicalWatermark,
    ParallelCorpus, SoftmaxConfig, Student, SynonymMap, VictimShape,
};
use ginsew::{
    decode_all, detect, generate_key, DecodeConfig, Error, FrequencyGrid, ProbeSettings, Strategy, TokenId, Vocabulary,
    WatermarkKey,
};
use serde::Serialize;

#[derive(Parser, Serialize)]
#[command(
    name = "ginsew",
    version,
    about = "Sinusoidal watermarking and spectral detection on a toy distillation testbed"
)]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Directory for outputs given as relative paths.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for cohort and sweep (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Draw a watermark key.
    Keygen(KeygenArgs),
    /// Draw a toy victim model.
    MakeVictim(VictimArgs),
    /// Draw random source sequences.
    MakeInputs(InputsArgs),
    /// Decode inputs through the victim, optionally watermarked.
    Generate(GenerateArgs),
    /// Randomize target tokens within synonym classes.
    Attack(AttackArgs),
    /// Train a student on a pseudo corpus.
    TrainStudent(TrainArgs),
    /// Probe a suspect and score its spectrum at the key frequency.
    Detect(DetectArgs),
    /// Lexical synonym-replacement baseline.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Train and rank a cohort of positive and negative suspects.
    Cohort(CohortArgs),
    /// Run a cohort for each value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args, Serialize)]
struct KeygenArgs {
    #[arg(long, default_value_t = 100)]
    vocab_size: usize,
    /// Hash dimension.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Angular frequency of the embedded sinusoid.
    #[arg(long, default_value_t = ginsew::key::DEFAULT_FW)]
    fw: f64,
    #[arg(long, default_value = "key.json")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct VictimArgs {
    #[arg(long, default_value_t = 100)]
    vocab_size: usize,
    #[arg(long, default_value_t = ginsew::toymodels::victim::DEFAULT_CONCENTRATION)]
    concentration: f64,
    #[arg(long, default_value_t = ginsew::toymodels::victim::DEFAULT_BACKGROUND)]
    background: f64,
    #[arg(long, default_value_t = ginsew::toymodels::victim::DEFAULT_CONFIDENCE[0])]
    confidence_min: f64,
    #[arg(long, default_value_t = ginsew::toymodels::victim::DEFAULT_CONFIDENCE[1])]
    confidence_max: f64,
    #[arg(long, default_value_t = ginsew::toymodels::victim::DEFAULT_ALTERNATIVE_RATE)]
    alternative_rate: f64,
    #[arg(long, default_value = "victim.json")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct InputsArgs {
    #[arg(long, default_value_t = 100)]
    vocab_size: usize,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 8)]
    len_min: usize,
    #[arg(long, default_value_t = 16)]
    len_max: usize,
    #[arg(long, default_value = "inputs.jsonl")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    #[arg(long)]
    victim: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    inputs: PathBuf,
    /// Watermark level; 0 gives plain outputs.
    #[arg(long, default_value_t = ginsew::injection::DEFAULT_EPSILON)]
    epsilon: f64,
    /// greedy, beam<W>, top<K> or top<K>@<seed>; top-k without a seed uses --seed.
    #[arg(long, default_value = "beam5")]
    decode: String,
    #[arg(long, default_value = "corpus.jsonl")]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct SynonymArgs {
    /// Synonym map file; drawn from --seed when absent.
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    vocab_size: usize,
    #[arg(long, default_value_t = 50)]
    n_classes: usize,
    #[arg(long, default_value_t = 2)]
    class_size: usize,
}

#[derive(Args, Serialize)]
struct AttackArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    synonyms: SynonymArgs,
    #[arg(long, default_value_t = 1.0)]
    swap_rate: f64,
    #[arg(long, default_value = "attacked.jsonl")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ArchArg {
    Count,
    Softmax,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "count")]
    arch: ArchArg,
    #[arg(long, default_value_t = 100)]
    vocab_size: usize,
    /// Count-student smoothing.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = SoftmaxConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = SoftmaxConfig::default().lr)]
    lr: f64,
    #[arg(long, default_value_t = SoftmaxConfig::default().batch_size)]
    batch_size: usize,
    /// Also save softmax snapshots after these epochs, as `<out stem>.epoch<k>.json`.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    /// Share of watermarked pairs when mixing with --raw-corpus.
    #[arg(long, default_value_t = 1.0)]
    mix_ratio: f64,
    #[arg(long)]
    raw_corpus: Option<PathBuf>,
    /// Ignore the anchor token.
    #[arg(long)]
    anchor_blind: bool,
    #[arg(long, default_value = "student.json")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct DetectArgs {
    #[arg(long)]
    student: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long, default_value_t = ginsew::detection::DEFAULT_Q_MIN)]
    q_min: f64,
    #[arg(long, default_value_t = ginsew::detection::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = FrequencyGrid::default().f_min)]
    fmin: f64,
    #[arg(long, default_value_t = FrequencyGrid::default().f_max)]
    fmax: f64,
    #[arg(long, default_value_t = FrequencyGrid::default().points)]
    grid: usize,
    #[arg(long, default_value = "greedy")]
    decode: String,
    /// P_snr above which the suspect is reported as watermarked.
    #[arg(long, default_value_t = 4.0)]
    threshold: f64,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BaselineCommand {
    /// Rewrite every candidate word of a corpus to its watermark word.
    Mark {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        synonyms: SynonymArgs,
        #[arg(long, default_value = "lexical.jsonl")]
        out: PathBuf,
    },
    /// Hit ratio of a suspect's greedy outputs.
    Score {
        #[arg(long)]
        student: PathBuf,
        #[arg(long)]
        inputs: PathBuf,
        #[command(flatten)]
        synonyms: SynonymArgs,
        #[arg(long, default_value = "hit_ratio.json")]
        out: PathBuf,
    },
}

#[derive(Args, Serialize)]
struct CohortArgs {
    /// Cohort spec (JSON); built-in defaults when absent. --seed replaces its seed when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "cohort")]
    name: String,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    /// epsilon, mix_ratio, epochs, q_min or decode_strategy.
    #[arg(long)]
    param: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[arg(long)]
    spec: Option<PathBuf>,
}

/// Usage errors exit 1, everything the library rejects exits 2.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
}

impl Ctx<'_> {
    fn out(&self, p: &Path) -> Outcome<PathBuf> {
        let path = if p.is_absolute() || self.cli.out_dir == Path::new(".") {
            p.to_path_buf()
        } else {
            self.cli.out_dir.join(p)
        };
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
        }
        Ok(path)
    }

    /// Writes `<artifact>.manifest.json` holding the global flags and the command's.
    fn manifest(&self, artifact: &Path, name: &str, extra: serde_json::Value) -> Outcome {
        let mut params = serde_json::to_value(self.cli).expect("flags serialize");
        if let (Some(obj), serde_json::Value::Object(more)) = (params.as_object_mut(), extra) {
            obj.extend(more);
        }
        let mut file = artifact.as_os_str().to_owned();
        file.push(".manifest.json");
        Manifest::new(name, params).write(PathBuf::from(file))?;
        Ok(())
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage(format!("--jobs: {e}")))?;
    }
    let ctx = Ctx { cli };
    match &cli.command {
        Command::Keygen(a) => keygen(&ctx, a),
        Command::MakeVictim(a) => make_victim(&ctx, a),
        Command::MakeInputs(a) => make_inputs(&ctx, a),
        Command::Generate(a) => generate(&ctx, a),
        Command::Attack(a) => attack(&ctx, a),
        Command::TrainStudent(a) => train(&ctx, a),
        Command::Detect(a) => detect_cmd(&ctx, a),
        Command::Baseline(b) => baseline(&ctx, b),
        Command::Cohort(a) => cohort(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
    }
}

fn read_text(path: &Path) -> Outcome<String> {
    Ok(std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn load_key(path: &Path) -> Outcome<WatermarkKey> {
    Ok(WatermarkKey::load(path)?)
}

fn load_student(path: &Path) -> Outcome<Student> {
    Ok(Student::from_json(&read_text(path)?)?)
}

/// One JSON array of token ids per line.
fn read_inputs(path: &Path) -> Outcome<Vec<Vec<TokenId>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let seq: Vec<TokenId> = serde_json::from_str(&line).map_err(|source| Error::Parse {
            what: format!("{} line {}", path.display(), i + 1),
            source,
        })?;
        out.push(seq);
    }
    if out.is_empty() {
        return Err(Error::Contract(format!("{}: no input sequences", path.display())).into());
    }
    Ok(out)
}

fn write_inputs(path: &Path, inputs: &[Vec<TokenId>]) -> Outcome {
    let mut text = String::new();
    for seq in inputs {
        text.push_str(&serde_json::to_string(seq).expect("ids serialize"));
        text.push('\n');
    }
    write_text(path, &text)
}

fn strategy(text: &str, seed: u64) -> Outcome<Strategy> {
    let s: Strategy = text.parse().map_err(|e: Error| usage(e.to_string()))?;
    Ok(match s {
        Strategy::TopK { k, seed: 0 } if !text.contains('@') => Strategy::TopK { k, seed },
        other => other,
    })
}

fn vocab(size: usize) -> Outcome<Vocabulary> {
    Vocabulary::new(size).map_err(|e| usage(e.to_string()))
}

fn synonym_map(a: &SynonymArgs, swap_rate: f64, seed: u64) -> Outcome<SynonymMap> {
    match &a.synonyms {
        Some(path) => {
            let map: SynonymMap = serde_json::from_str(&read_text(path)?).map_err(|source| Error::Parse {
                what: format!("synonym map {}", path.display()),
                source,
            })?;
            Ok(map.with_swap_rate(swap_rate)?)
        }
        None => Ok(SynonymMap::random(
            vocab(a.vocab_size)?,
            a.n_classes,
            a.class_size,
            swap_rate,
            seed,
        )?),
    }
}

fn keygen(ctx: &Ctx, a: &KeygenArgs) -> Outcome {
    let key = generate_key(vocab(a.vocab_size)?, a.n, a.fw, ctx.cli.seed)?;
    let out = ctx.out(&a.out)?;
    key.save(&out)?;
    ctx.manifest(&out, "keygen", serde_json::json!({ "fingerprint": key.fingerprint() }))?;
    println!("{}", out.display());
    Ok(())
}

fn make_victim(ctx: &Ctx, a: &VictimArgs) -> Outcome {
    let shape = VictimShape {
        concentration: a.concentration,
        background: a.background,
        confidence: [a.confidence_min, a.confidence_max],
        alternative_rate: a.alternative_rate,
    };
    let victim = make_victim_with(vocab(a.vocab_size)?, ctx.cli.seed, shape)?;
    let out = ctx.out(&a.out)?;
    write_text(&out, &victim.to_json())?;
    ctx.manifest(&out, "make-victim", serde_json::json!({}))?;
    println!("{}", out.display());
    Ok(())
}

fn make_inputs(ctx: &Ctx, a: &InputsArgs) -> Outcome {
    let inputs = synth_inputs(vocab(a.vocab_size)?, a.count, (a.len_min, a.len_max), ctx.cli.seed)?;
    let out = ctx.out(&a.out)?;
    write_inputs(&out, &inputs)?;
    ctx.manifest(&out, "make-inputs", serde_json::json!({}))?;
    println!("{}", out.display());
    Ok(())
}

fn generate(ctx: &Ctx, a: &GenerateArgs) -> Outcome {
    let victim = LexVictim::from_json(&read_text(&a.victim)?)?;
    let key = load_key(&a.key)?;
    let inputs = read_inputs(&a.inputs)?;
    let max_len = inputs.iter().map(Vec::len).max().unwrap_or(1);
    let strategy = strategy(&a.decode, ctx.cli.seed)?;
    let cfg = DecodeConfig::new(strategy, max_len)?;
    let corpus = generate_pseudo_corpus(&victim, &inputs, &key, a.epsilon, &cfg)?;
    let out = ctx.out(&a.out)?;
    corpus.write_jsonl(&out)?;
    ctx.manifest(
        &out,
        "generate",
        serde_json::json!({ "strategy": strategy, "max_len": max_len }),
    )?;
    println!("{}", out.display());
    Ok(())
}

fn attack(ctx: &Ctx, a: &AttackArgs) -> Outcome {
    let corpus = ParallelCorpus::read_jsonl(&a.corpus)?;
    let map = synonym_map(&a.synonyms, a.swap_rate, ctx.cli.seed)?;
    let attacked = synonym_attack(&corpus, &map, ctx.cli.seed);
    let out = ctx.out(&a.out)?;
    attacked.write_jsonl(&out)?;
    ctx.manifest(&out, "attack", serde_json::json!({ "synonym_map": map }))?;
    println!("{}", out.display());
    Ok(())
}

fn train(ctx: &Ctx, a: &TrainArgs) -> Outcome {
    let marked = ParallelCorpus::read_jsonl(&a.corpus)?;
    let data = match (&a.raw_corpus, a.mix_ratio) {
        (Some(raw), r) => mix_corpora(&marked, &ParallelCorpus::read_jsonl(raw)?, r, ctx.cli.seed)?,
        (None, 1.0) => marked,
        (None, _) => return Err(usage("--mix-ratio below 1 needs --raw-corpus")),
    };
    let context = ContextSpec {
        anchor_aware: !a.anchor_blind,
        ..ContextSpec::default()
    };
    let out = ctx.out(&a.out)?;
    let mut extra = serde_json::json!({ "n_pairs": data.len() });
    let student = match a.arch {
        ArchArg::Count => {
            if !a.checkpoints.is_empty() {
                return Err(usage("--checkpoints needs --arch softmax"));
            }
            Student::Count(train_count_student(&data, a.vocab_size, a.alpha, context)?)
        }
        ArchArg::Softmax => {
            let cfg = SoftmaxConfig {
                lr: a.lr,
                epochs: a.epochs,
                batch_size: a.batch_size,
                seed: ctx.cli.seed,
            };
            if let Some(k) = a.checkpoints.iter().find(|&&k| k > a.epochs) {
                return Err(usage(format!("checkpoint {k} is past --epochs {}", a.epochs)));
            }
            let (model, snaps) = train_softmax_checkpoints(&data, a.vocab_size, cfg, context, &a.checkpoints)?;
            for snap in snaps {
                let path = out.with_extension(format!("epoch{}.json", snap.epochs()));
                write_text(&path, &Student::Softmax(snap).to_json())?;
            }
            extra["losses"] = serde_json::json!(model.losses());
            Student::Softmax(model)
        }
    };
    write_text(&out, &student.to_json())?;
    ctx.manifest(&out, "train-student", extra)?;
    println!("{}", out.display());
    Ok(())
}

fn detect_cmd(ctx: &Ctx, a: &DetectArgs) -> Outcome {
    let student = load_student(&a.student)?;
    let key = load_key(&a.key)?;
    let inputs = read_inputs(&a.inputs)?;
    let max_len = inputs.iter().map(Vec::len).max().unwrap_or(1);
    let settings = ProbeSettings {
        q_min: a.q_min,
        delta: a.delta,
        grid: FrequencyGrid::new(a.fmin, a.fmax, a.grid).map_err(|e| usage(e.to_string()))?,
        decode: DecodeConfig::new(strategy(&a.decode, ctx.cli.seed)?, max_len)?,
    };
    let report = detect(&student, &inputs, &key, &settings)?;
    let out = ctx.out(&a.out)?;
    let csv = out.with_extension("spectrum.csv");
    report.spectrum.write_csv(&csv)?;
    let csv_name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut json = report.to_json(&csv_name);
    json["threshold"] = serde_json::json!(a.threshold);
    json["watermarked"] = serde_json::json!(report.p_snr > a.threshold);
    json["key_fingerprint"] = serde_json::json!(key.fingerprint());
    write_json(&out, &json)?;
    ctx.manifest(&out, "detect", serde_json::json!({}))?;
    println!(
        "p_snr {} ({} of {} pairs kept)",
        report.p_snr, report.n_pairs_kept, report.n_pairs_total
    );
    Ok(())
}

fn baseline(ctx: &Ctx, b: &BaselineCommand) -> Outcome {
    match b {
        BaselineCommand::Mark { corpus, synonyms, out } => {
            let corpus = ParallelCorpus::read_jsonl(corpus)?;
            let map = synonym_map(synonyms, 1.0, ctx.cli.seed)?;
            let wm = LexicalWatermark::from_classes(map.classes())?;
            let marked = lexical_baseline_watermark(&corpus, &wm);
            let out = ctx.out(out)?;
            marked.write_jsonl(&out)?;
            ctx.manifest(&out, "baseline mark", serde_json::json!({ "lexical_watermark": wm }))?;
            println!("{}", out.display());
        }
        BaselineCommand::Score {
            student,
            inputs,
            synonyms,
            out,
        } => {
            let student = load_student(student)?;
            let inputs = read_inputs(inputs)?;
            let map = synonym_map(synonyms, 1.0, ctx.cli.seed)?;
            let wm = LexicalWatermark::from_classes(map.classes())?;
            let max_len = inputs.iter().map(Vec::len).max().unwrap_or(1);
            let outputs = decode_all(&student, &inputs, &DecodeConfig::greedy(max_len), None)?;
            let ratio = hit_ratio(outputs.iter().map(Vec::as_slice), &wm);
            let out = ctx.out(out)?;
            write_json(
                &out,
                &serde_json::json!({ "hit_ratio": ratio, "n_inputs": inputs.len() }),
            )?;
            ctx.manifest(&out, "baseline score", serde_json::json!({}))?;
            println!("hit ratio {ratio}");
        }
    }
    Ok(())
}

fn load_spec(ctx: &Ctx, path: &Option<PathBuf>) -> Outcome<CohortSpec> {
    let mut spec = match path {
        Some(p) => CohortSpec::from_json(&read_text(p)?)?,
        None => CohortSpec::default(),
    };
    if path.is_none() || seed_given() {
        spec.seed = ctx.cli.seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn seed_given() -> bool {
    std::env::args().any(|a| a == "--seed" || a.starts_with("--seed="))
}

fn cohort(ctx: &Ctx, a: &CohortArgs) -> Outcome {
    let spec = load_spec(ctx, &a.spec)?;
    let result = run_cohort(&spec)?;
    let csv = ctx.out(Path::new(&format!("{}.csv", a.name)))?;
    result.write_csv(&csv)?;
    let json = ctx.out(Path::new(&format!("{}.json", a.name)))?;
    write_json(&json, &result.summary_json())?;
    ctx.manifest(&json, "cohort", serde_json::json!({ "settings": spec }))?;
    println!("AP {} (mAP {})", result.ap_per_probe[0], result.map);
    Ok(())
}

fn sweep(ctx: &Ctx, a: &SweepArgs) -> Outcome {
    let param: SweepParam = a.param.parse().map_err(|e: Error| usage(e.to_string()))?;
    let spec = load_spec(ctx, &a.spec)?;
    let points = run_sweep(&spec, param, &a.values)?;
    let csv = ctx.out(Path::new(&format!("sweep_{param}.csv")))?;
    write_text(&csv, &sweep_csv(param, &points))?;
    let json = ctx.out(Path::new(&format!("sweep_{param}.json")))?;
    let summary: Vec<_> = points
        .iter()
        .map(|p| serde_json::json!({ "value": p.value, "result": p.result.summary_json() }))
        .collect();
    write_json(&json, &summary)?;
    ctx.manifest(&json, "sweep", serde_json::json!({ "settings": spec }))?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(sweep_csv(param, &points).as_bytes());
    Ok(())
}
