//! Command-line front end. `run` returns the process exit status:
//! 0 on success, 1 for invalid arguments or configuration, 2 for data errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assets;
use crate::diagnostics;
use crate::grapheme::{self, ScriptRules};
use crate::metrics::{MetricConfig, WerAggregation};
use crate::pipeline::{
    self, build_dataset, overlap_records, read_lines, score_files, stats_command, CorpusInput, IngestOptions,
    PipelineConfig, PipelineError, SplitSpec, VocabInput,
};
use crate::renderer::{render_patches, FontAsset, RenderConfig};
use crate::tokenizer::{self, encode, Vocabulary};
use crate::translit::{transliterate, RuleTable};

#[derive(Debug, Parser)]
#[command(
    name = "aksara",
    version,
    about = "Transliteration, tokenization, rendering and scoring for aksara scripts"
)]
pub struct Cli {
    /// Pipeline config file (TOML); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the train/eval split.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Skip lines that fail instead of aborting.
    #[arg(long, global = true)]
    pub lenient: bool,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build paired image and token manifests from a corpus.
    BuildDataset(BuildArgs),
    /// Transliterate lines between Latin and aksara.
    Translit(TranslitArgs),
    /// Encode lines to word IDs, build a vocabulary, or show grapheme clusters.
    Tokenize(TokenizeArgs),
    /// Render one text to a strip image.
    Render(RenderArgs),
    /// Fertility, sequence length and OOV statistics.
    Stats(StatsArgs),
    /// chrF++, BLEU and WER of hypotheses against references.
    Score(ScoreArgs),
    /// Split a corpus into train and eval files.
    Split(SplitArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub language: Option<String>,
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Use an existing vocabulary instead of building one.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Train fraction; the rest goes to eval.
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Direction {
    Aksara,
    Latin,
}

#[derive(Debug, Args)]
pub struct TranslitArgs {
    /// Bundled rules to use (jav, ban, sun, ljp).
    #[arg(long, required_unless_present = "table")]
    pub language: Option<String>,
    /// Rule table file, instead of the bundled rules.
    #[arg(long, conflicts_with = "language")]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "aksara")]
    pub to: Direction,
    /// Apply the inverse of the table.
    #[arg(long)]
    pub invert: bool,
    /// Input file; standard input when omitted.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// Canonicalize with this language's bundled rules first.
    #[arg(long)]
    pub language: Option<String>,
    #[arg(long, required_unless_present_any = ["build_vocab", "graphemes"])]
    pub vocab: Option<PathBuf>,
    /// Write a vocabulary built from the input here instead of encoding.
    #[arg(long, conflicts_with = "vocab")]
    pub build_vocab: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Wrap each line in begin/end markers.
    #[arg(long)]
    pub sentinels: bool,
    /// Print script-aware grapheme clusters separated by `|`.
    #[arg(long, conflicts_with_all = ["vocab", "build_vocab"])]
    pub graphemes: bool,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, required_unless_present = "input")]
    pub text: Option<String>,
    /// Render the first line of this file.
    #[arg(long, conflicts_with = "text")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the patch tensor here.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    #[arg(long)]
    pub language: Option<String>,
    /// Font file; the built-in test font when omitted.
    #[arg(long)]
    pub font: Option<PathBuf>,
    #[arg(long)]
    pub font_size: Option<u32>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Table,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// LANG=PATH, repeatable.
    #[arg(long = "corpus", required = true, value_parser = parse_pair)]
    pub corpora: Vec<(String, PathBuf)>,
    /// ID=PATH, repeatable.
    #[arg(long = "vocab", required = true, value_parser = parse_pair)]
    pub vocabs: Vec<(String, PathBuf)>,
    /// Canonicalize corpus lines with each language's bundled rules.
    #[arg(long)]
    pub canonicalize: bool,
    /// Also report pairwise vocabulary overlap.
    #[arg(long)]
    pub overlap: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long)]
    pub hyps: PathBuf,
    /// One language code per line, for per-language scores.
    #[arg(long)]
    pub langs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "micro")]
    pub wer: WerAggregation,
    #[arg(long, default_value_t = 6)]
    pub char_order: usize,
    #[arg(long, default_value_t = 2)]
    pub word_order: usize,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 4)]
    pub bleu_order: usize,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub eval_out: PathBuf,
}

impl ValueEnum for WerAggregation {
    fn value_variants<'a>() -> &'a [Self] {
        &[WerAggregation::Micro, WerAggregation::Macro]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            WerAggregation::Micro => "micro",
            WerAggregation::Macro => "macro",
        }))
    }
}

fn parse_pair(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), PathBuf::from(v))),
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

fn invalid(msg: impl Into<String>) -> PipelineError {
    PipelineError::Validation(msg.into())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), PipelineError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::BuildDataset(a) => cmd_build(cli, a, &mut out),
        Command::Translit(a) => cmd_translit(a, &mut out),
        Command::Tokenize(a) => cmd_tokenize(a, &mut out),
        Command::Render(a) => cmd_render(cli, a, &mut out),
        Command::Stats(a) => cmd_stats(a, &mut out),
        Command::Score(a) => cmd_score(a, &mut out),
        Command::Split(a) => cmd_split(cli, a, &mut out),
    }
}

fn load_config(cli: &Cli) -> Result<Option<PipelineConfig>, PipelineError> {
    cli.config.as_ref().map(PipelineConfig::from_file).transpose()
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), PipelineError> {
    out.write_all(text.as_bytes())
        .map_err(|e| PipelineError::io(Path::new("<stdout>"), e))
}

fn apply_fraction(split: &mut Option<SplitSpec>, fraction: Option<f64>, seed: Option<u64>) {
    if let Some(f) = fraction {
        let seed = seed.or(split.map(|s| s.seed)).unwrap_or(0);
        *split = Some(SplitSpec {
            train: f,
            eval: 1.0 - f,
            seed,
        });
    } else if let (Some(s), Some(seed)) = (split.as_mut(), seed) {
        s.seed = seed;
    }
}

fn cmd_build(cli: &Cli, a: &BuildArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let mut cfg = match load_config(cli)? {
        Some(c) => c,
        None => {
            let language = a
                .language
                .clone()
                .ok_or_else(|| invalid("build-dataset needs --config or --language"))?;
            let output = a
                .output
                .clone()
                .ok_or_else(|| invalid("build-dataset needs --config or --output"))?;
            PipelineConfig::new(language, Vec::new(), output)
        }
    };
    if let Some(l) = &a.language {
        cfg.language = l.clone();
    }
    if !a.inputs.is_empty() {
        cfg.input_paths = a.inputs.clone();
    }
    if let Some(o) = &a.output {
        cfg.output_dir = o.clone();
    }
    if let Some(v) = &a.vocab {
        cfg.vocab_path = Some(v.clone());
        cfg.build_vocab = false;
    }
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    apply_fraction(&mut cfg.split, a.train_fraction, cli.seed);
    cfg.lenient |= cli.lenient;
    if cfg.input_paths.is_empty() {
        return Err(invalid("no input files"));
    }
    let result = build_dataset(&cfg)?;
    for (path, s) in result.manifests.iter().zip(&result.summaries) {
        write_out(
            out,
            &format!(
                "{}\t{} examples\t{} truncated\t{} skipped\n",
                path.display(),
                s.example_count,
                s.truncated_count,
                s.skipped_count
            ),
        )?;
    }
    Ok(())
}

fn read_input(path: Option<&Path>) -> Result<Vec<String>, PipelineError> {
    match path {
        Some(p) => read_lines(p),
        None => io::stdin()
            .lock()
            .lines()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PipelineError::Data {
                location: "<stdin>".into(),
                stage: "read",
                message: e.to_string(),
            }),
    }
}

fn bundle(language: &str) -> Result<assets::Bundle, PipelineError> {
    assets::bundle(language).map_err(|e| invalid(e.to_string()))
}

fn cmd_translit(a: &TranslitArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let mut table = match (&a.table, &a.language) {
        (Some(p), _) => RuleTable::load(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        (None, Some(l)) => {
            let b = bundle(l)?;
            match a.to {
                Direction::Aksara => b.to_aksara,
                Direction::Latin => b.to_latin,
            }
        }
        (None, None) => return Err(invalid("give --language or --table")),
    };
    if a.invert {
        table = table.invert().map_err(|e| invalid(e.to_string()))?;
    }
    let mut text = String::new();
    for line in read_input(a.input.as_deref())? {
        let r = transliterate(&line, &table);
        for span in &r.unmapped_spans {
            log::info!("unmapped {:?}", &line[span.clone()]);
        }
        text.push_str(&r.output);
        text.push('\n');
    }
    write_out(out, &text)
}

fn cmd_tokenize(a: &TokenizeArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let bundle = a.language.as_deref().map(bundle).transpose()?;
    let lines = read_input(a.input.as_deref())?;
    if a.graphemes {
        let rules = bundle.map(|b| b.script).unwrap_or_else(ScriptRules::none);
        let mut text = String::new();
        for line in &lines {
            let clusters: Vec<&str> = grapheme::segment_script(line, &rules).iter().map(|c| c.text).collect();
            text.push_str(&clusters.join("|"));
            text.push('\n');
        }
        return write_out(out, &text);
    }
    let canonical: Vec<String> = lines
        .iter()
        .map(|l| match &bundle {
            Some(b) => tokenizer::canonicalize(l, &b.to_aksara, &b.script, &b.to_latin),
            None => tokenizer::collapse_whitespace(l),
        })
        .collect();
    if let Some(path) = &a.build_vocab {
        if a.min_count == 0 {
            return Err(invalid("--min-count must be at least 1"));
        }
        let mut vocab = Vocabulary::build(&canonical, a.min_count);
        if let Some(l) = &a.language {
            vocab = vocab.with_source_script(l.clone());
        }
        vocab.save(path).map_err(|e| PipelineError::io(path, e))?;
        return write_out(out, &format!("{}\t{} tokens\n", path.display(), vocab.size()));
    }
    let vocab_path = a.vocab.as_ref().ok_or_else(|| invalid("--vocab is required"))?;
    let vocab = Vocabulary::load(vocab_path).map_err(|e| invalid(e.to_string()))?;
    let mut text = String::new();
    for line in &canonical {
        let enc = encode(line, &vocab, a.sentinels);
        let ids: Vec<String> = enc.ids.iter().map(u32::to_string).collect();
        text.push_str(&ids.join(" "));
        text.push('\n');
    }
    write_out(out, &text)
}

fn cmd_render(cli: &Cli, a: &RenderArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let from_config = load_config(cli)?;
    let language = a
        .language
        .clone()
        .or_else(|| from_config.as_ref().map(|c| c.language.clone()));
    let mut cfg = match (&from_config, &language) {
        (Some(c), _) if a.language.is_none() => c.render_config(),
        (_, Some(l)) => RenderConfig::for_language(l),
        _ => RenderConfig::default(),
    };
    if let Some(f) = &a.font {
        cfg.font_asset = FontAsset::File(f.clone());
    }
    if let Some(s) = a.font_size {
        cfg.font_size = s;
    }
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    let raster = cfg.font_asset.load().map_err(|e| invalid(e.to_string()))?;
    let text = match (&a.text, &a.input) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => read_lines(p)?.into_iter().next().unwrap_or_default(),
        (None, None) => return Err(invalid("give --text or --input")),
    };
    let seq = render_patches(&text, &cfg, raster.as_ref()).map_err(|e| PipelineError::Data {
        location: "render".into(),
        stage: "render",
        message: e.to_string(),
    })?;
    seq.to_bitmap()
        .write_png(&a.output)
        .map_err(|e| PipelineError::io(&a.output, e))?;
    if let Some(t) = &a.tensor {
        fs::write(t, seq.to_tensor_bytes()).map_err(|e| PipelineError::io(t, e))?;
    }
    let summary = serde_json::json!({
        "patches": seq.len(),
        "num_text_patches": seq.num_text_patches,
        "truncated": seq.truncated,
    });
    write_out(out, &format!("{summary}\n"))
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let mut corpora = Vec::new();
    for (language, path) in &a.corpora {
        let lines = pipeline::ingest(&[path], IngestOptions::default())?;
        let lines = if a.canonicalize {
            let b = bundle(language)?;
            lines
                .iter()
                .map(|l| tokenizer::canonicalize(&l.text, &b.to_aksara, &b.script, &b.to_latin))
                .collect()
        } else {
            lines.into_iter().map(|l| l.text).collect()
        };
        corpora.push(CorpusInput {
            language: language.clone(),
            lines,
        });
    }
    let mut vocabs = Vec::new();
    for (id, path) in &a.vocabs {
        let vocab = Vocabulary::load(path).map_err(|e| invalid(e.to_string()))?;
        vocabs.push(VocabInput {
            tokenizer_id: id.clone(),
            vocab,
        });
    }
    let reports = stats_command(&corpora, &vocabs)?;
    let overlaps = if a.overlap {
        overlap_records(&vocabs)?
    } else {
        Vec::new()
    };
    let text = match a.format {
        Format::Jsonl => diagnostics::to_jsonl(&reports) + &diagnostics::to_jsonl(&overlaps),
        Format::Table => {
            let mut t = diagnostics::format_table(&reports);
            for o in &overlaps {
                t.push_str(&format!(
                    "overlap {} / {}: {} of {} ({:.2}%)\n",
                    o.a, o.b, o.shared, o.union_size, o.overlap_pct
                ));
            }
            t
        }
    };
    write_out(out, &text)
}

fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let cfg = MetricConfig {
        char_ngram_max: a.char_order,
        word_ngram_max: a.word_order,
        beta: a.beta,
        bleu_max_order: a.bleu_order,
        wer_aggregation: a.wer,
    };
    let result = score_files(&a.refs, &a.hyps, a.langs.as_deref(), &cfg)?;
    let rows: Vec<(&str, &crate::metrics::ScoreReport)> = result
        .per_language
        .iter()
        .map(|l| (l.language.as_str(), &l.report))
        .chain(std::iter::once(("all", &result.overall)))
        .collect();
    let mut text = String::new();
    match a.format {
        Format::Jsonl => {
            for (lang, r) in rows {
                let mut v = serde_json::to_value(r).expect("reports serialize");
                v["language"] = lang.into();
                text.push_str(&format!("{v}\n"));
            }
        }
        Format::Table => {
            let w = rows
                .iter()
                .map(|(l, _)| l.len())
                .max()
                .unwrap_or(0)
                .max("language".len());
            text.push_str(&format!(
                "{:<w$}  {:>8}  {:>8}  {:>9}  {:>8}\n",
                "language", "chrF++", "BLEU", "WER", "segments"
            ));
            for (lang, r) in rows {
                text.push_str(&format!(
                    "{lang:<w$}  {:>8.2}  {:>8.2}  {:>9.2}  {:>8}\n",
                    r.chrf_pp, r.bleu, r.wer_pct, r.segment_count
                ));
            }
        }
    }
    write_out(out, &text)
}

fn cmd_split(cli: &Cli, a: &SplitArgs, out: &mut dyn Write) -> Result<(), PipelineError> {
    let cfg = load_config(cli)?;
    let inputs = if a.inputs.is_empty() {
        cfg.as_ref().map(|c| c.input_paths.clone()).unwrap_or_default()
    } else {
        a.inputs.clone()
    };
    if inputs.is_empty() {
        return Err(invalid("no input files"));
    }
    let mut split = cfg.as_ref().and_then(|c| c.split);
    apply_fraction(&mut split, a.train_fraction, cli.seed);
    let split_spec = split.ok_or_else(|| invalid("give --train-fraction or a config with a [split] table"))?;
    split_spec.validate()?;
    let lowercase = cfg.as_ref().is_some_and(|c| c.lowercase);
    let lines = pipeline::ingest(
        &inputs,
        IngestOptions {
            lowercase,
            lenient: cli.lenient,
        },
    )?;
    let texts: Vec<String> = lines.into_iter().map(|l| l.text).collect();
    let (train, eval) = pipeline::split(&texts, split_spec.train, split_spec.seed)?;
    for (path, part) in [(&a.train_out, &train), (&a.eval_out, &eval)] {
        let body: String = part.iter().map(|l| format!("{l}\n")).collect();
        fs::write(path, body).map_err(|e| PipelineError::io(path, e))?;
    }
    write_out(out, &format!("{} train\t{} eval\n", train.len(), eval.len()))
}
