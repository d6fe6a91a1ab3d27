use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Resources;
use super::{ingest, split, IngestOptions, PipelineConfig, PipelineError, SourceLine};
use crate::renderer::{count_text_patches, patchify, render_strip};
use crate::tokenizer::{self, encode, Vocabulary};
use crate::translit::transliterate;

pub const IMAGE_DIR: &str = "images";
pub const VOCAB_FILE: &str = "vocab.txt";

/// One manifest record: a canonical line, its aksara form, word IDs and the
/// rendered strip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairedExample {
    pub id: String,
    pub latin_text: String,
    pub aksara_text: String,
    pub token_ids: Vec<u32>,
    /// Strip image path relative to the manifest's directory.
    pub image_ref: String,
    pub num_text_patches: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub example_count: usize,
    pub truncated_count: usize,
    /// Lines dropped under `lenient`.
    pub skipped_count: usize,
    /// Hex SHA-256 of every manifest byte before the summary line.
    pub body_sha256: String,
}

/// The final manifest line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetOutput {
    /// `manifest.jsonl`, or `train.jsonl` and `eval.jsonl` when splitting.
    pub manifests: Vec<PathBuf>,
    pub summaries: Vec<Summary>,
    pub vocab_path: PathBuf,
}

/// Removes everything a build wrote unless the build completes.
struct Cleanup {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    armed: bool,
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            // Only succeeds when the directory ended up empty.
            let _ = fs::remove_dir(d);
        }
    }
}

struct Item<'a> {
    index: usize,
    source: &'a SourceLine,
    latin: String,
}

/// Runs the dataset build described by `config`:
/// canonicalize, transliterate to aksara, render, encode, then write one
/// manifest per split with a closing summary record.
///
/// Without `lenient` the first failing line aborts the build and every
/// file written so far is removed.
pub fn build_dataset(config: &PipelineConfig) -> Result<DatasetOutput, PipelineError> {
    config.validate()?;
    let res = config.load_resources()?;
    let render = config.render_config();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Validation(format!("worker pool: {e}")))?;

    let lines = ingest(
        &config.input_paths,
        IngestOptions {
            lowercase: config.lowercase,
            lenient: config.lenient,
        },
    )?;
    let items: Vec<Item> = pool.install(|| {
        lines
            .par_iter()
            .enumerate()
            .map(|(index, source)| Item {
                index,
                source,
                latin: tokenizer::canonicalize(&source.text, &res.to_aksara, &res.script, &res.to_latin),
            })
            .collect()
    });
    log::info!("{} lines ingested for {}", items.len(), config.language);

    let parts: Vec<(&str, Vec<&Item>)> = match &config.split {
        Some(s) => {
            let refs: Vec<&Item> = items.iter().collect();
            let (train, eval) = split(&refs, s.train, s.seed)?;
            vec![("train", train), ("eval", eval)]
        }
        None => vec![("manifest", items.iter().collect())],
    };

    let out_dir = &config.output_dir;
    let mut cleanup = Cleanup {
        files: Vec::new(),
        dirs: Vec::new(),
        armed: true,
    };
    create_dir(out_dir, &mut cleanup)?;
    let image_dir = out_dir.join(IMAGE_DIR);
    create_dir(&image_dir, &mut cleanup)?;

    let (vocab, vocab_path) = match &config.vocab_path {
        Some(p) => (
            Vocabulary::load(p).map_err(|e| PipelineError::Validation(e.to_string()))?,
            p.clone(),
        ),
        None => {
            let vocab = Vocabulary::build(parts[0].1.iter().map(|it| it.latin.as_str()), config.min_count)
                .with_source_script(config.language.clone());
            let p = out_dir.join(VOCAB_FILE);
            cleanup.files.push(p.clone());
            vocab.save(&p).map_err(|e| PipelineError::io(&p, e))?;
            (vocab, p)
        }
    };

    let mut manifests = Vec::new();
    let mut summaries = Vec::new();
    for (name, part) in &parts {
        for it in part {
            cleanup
                .files
                .push(image_dir.join(image_name(&config.language, it.index)));
        }
        let results: Vec<Result<PairedExample, PipelineError>> = pool.install(|| {
            part.par_iter()
                .map(|it| process(it, config, &res, &render, &vocab, &image_dir))
                .collect()
        });
        let mut records = Vec::with_capacity(results.len());
        let mut skipped = 0;
        for r in results {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) if config.lenient => {
                    log::warn!("skipping {e}");
                    skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
        let path = out_dir.join(format!("{name}.jsonl"));
        cleanup.files.push(path.clone());
        let summary = write_manifest(&path, &records, skipped)?;
        log::info!(
            "{}: {} examples, {} truncated, {} skipped",
            path.display(),
            summary.example_count,
            summary.truncated_count,
            summary.skipped_count
        );
        manifests.push(path);
        summaries.push(summary);
    }
    cleanup.armed = false;
    Ok(DatasetOutput {
        manifests,
        summaries,
        vocab_path,
    })
}

fn create_dir(dir: &Path, cleanup: &mut Cleanup) -> Result<(), PipelineError> {
    if !dir.is_dir() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        cleanup.dirs.push(dir.to_path_buf());
    }
    Ok(())
}

fn image_name(language: &str, index: usize) -> String {
    format!("{language}-{index:06}.png")
}

fn process(
    it: &Item,
    config: &PipelineConfig,
    res: &Resources,
    render: &crate::renderer::RenderConfig,
    vocab: &Vocabulary,
    image_dir: &Path,
) -> Result<PairedExample, PipelineError> {
    let data_err = |stage, message: String| PipelineError::Data {
        location: it.source.location(),
        stage,
        message,
    };
    let translit = transliterate(&it.latin, &res.to_aksara);
    if !translit.unmapped_spans.is_empty() {
        log::debug!(
            "{}: {} unmapped span(s)",
            it.source.location(),
            translit.unmapped_spans.len()
        );
    }
    let aksara = translit.output;
    let strip = render_strip(&aksara, render, res.raster.as_ref()).map_err(|e| data_err("render", e.to_string()))?;
    let patches = patchify(&strip, render).map_err(|e| data_err("render", e.to_string()))?;
    let num_text_patches = count_text_patches(&strip.bitmap, render).map_err(|e| data_err("render", e.to_string()))?;
    debug_assert_eq!(num_text_patches, patches.num_text_patches);
    let name = image_name(&config.language, it.index);
    strip
        .bitmap
        .write_png(image_dir.join(&name))
        .map_err(|e| data_err("write image", e.to_string()))?;
    let enc = encode(&it.latin, vocab, false);
    Ok(PairedExample {
        id: format!("{}-{:06}", config.language, it.index),
        latin_text: it.latin.clone(),
        aksara_text: aksara,
        token_ids: enc.ids,
        image_ref: format!("{IMAGE_DIR}/{name}"),
        num_text_patches,
        truncated: patches.truncated,
    })
}

fn write_manifest(path: &Path, records: &[PairedExample], skipped: usize) -> Result<Summary, PipelineError> {
    let mut body = String::new();
    for r in records {
        body.push_str(&serde_json::to_string(r).expect("records serialize"));
        body.push('\n');
    }
    let summary = Summary {
        example_count: records.len(),
        truncated_count: records.iter().filter(|r| r.truncated).count(),
        skipped_count: skipped,
        body_sha256: hex(&Sha256::digest(body.as_bytes())),
    };
    let line = serde_json::to_string(&SummaryRecord {
        summary: summary.clone(),
    })
    .expect("summary serializes");

    let tmp = path.with_extension("jsonl.tmp");
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.write_all(line.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        PipelineError::io(path, e)
    })?;
    Ok(summary)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
