//! Shared pipeline stages behind the `score`, `stats`, and `crawl` commands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;

use hcu_core::colocation::{
    crawl, intersection_matrix, ColocationMatrix, OfflineTransport, ResponseCache, SystemClock,
};
use hcu_core::corpus::{load_corpus, Corpus, IngestConfig};
use hcu_core::embedding::{load_numberbatch, load_word2vec_text, EmbeddingTable};
use hcu_core::labels::{normalize_label, Repair};
use hcu_core::stats::filter_outlier_workers;
use hcu_core::stemmer::Stemmer;
use hcu_core::uncertainty::{score_stimulus, ScoreConfig, ScoredStimulus, UncertaintyScores};
use hcu_core::wordnet::LexicalDatabase;

use crate::config::RunConfig;
use crate::manifest::RunManifest;

pub struct LoadedInputs {
    pub corpus: Corpus,
    pub lexicon: LexicalDatabase,
    pub stemmer: Stemmer,
    /// (source tag from the config, parsed table) in config order.
    pub tables: Vec<(String, EmbeddingTable)>,
}

pub fn create_output_dir(config: &RunConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&config.paths.output_dir).with_context(|| {
        format!(
            "cannot create output dir {}",
            config.paths.output_dir.display()
        )
    })
}

fn open_output(config: &RunConfig, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = config.paths.output_dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| {
        format!("cannot write {}", path.display())
    })?))
}

/// Loads corpus, lexicon, and embedding tables; filters outlier workers; and
/// writes the rejection and outlier reports.
pub fn load_inputs(config: &RunConfig, manifest: &mut RunManifest) -> anyhow::Result<LoadedInputs> {
    let (corpus, rejections) = manifest.stage("load_corpus", |m| {
        m.digest_input(&config.paths.annotations)?;
        m.digest_input(&config.paths.sounds)?;
        let ingest = IngestConfig {
            scale: config.likert_scale()?,
        };
        let (corpus, rejections) =
            load_corpus(&config.paths.annotations, &config.paths.sounds, &ingest)?;
        m.tally("rejected_rows", rejections.len() as u64);
        for warning in &rejections.warnings {
            m.warn(warning.clone());
        }
        Ok((corpus, rejections))
    })?;
    {
        let mut w = open_output(config, "rejections.tsv")?;
        rejections.write_tsv(&mut w)?;
    }

    let (corpus, removed_workers) = manifest.stage("filter_outlier_workers", |m| {
        let (filtered, removed) = filter_outlier_workers(&corpus, config.metrics.z_threshold);
        m.tally("removed_workers", {
            let ids: BTreeSet<&str> = removed.iter().map(|o| o.worker_id.as_str()).collect();
            ids.len() as u64
        });
        Ok((filtered, removed))
    })?;
    {
        let mut w = open_output(config, "outlier_workers.tsv")?;
        for outlier in &removed_workers {
            writeln!(
                w,
                "{}\t{}\t{}",
                outlier.worker_id,
                outlier.feature.name(),
                outlier.z
            )?;
        }
    }

    let lexicon = manifest.stage("load_lexicon", |_| {
        Ok(LexicalDatabase::load(&config.paths.lexicon_dir)?)
    })?;

    let mut tables = Vec::new();
    for embedding in &config.paths.embeddings {
        let name = format!("load_embeddings[{}]", embedding.source);
        let table = manifest.stage(&name, |m| {
            m.digest_input(&embedding.path)?;
            let (table, report) = match embedding.source.as_str() {
                "numberbatch" | "conceptnet-numberbatch" => load_numberbatch(&embedding.path)?,
                _ => load_word2vec_text(&embedding.path)?,
            };
            m.tally(&format!("{}_duplicates", embedding.source), report.duplicates);
            m.tally(
                &format!("{}_skipped_rows", embedding.source),
                report.skipped_rows,
            );
            m.tally(
                &format!("{}_non_english", embedding.source),
                report.non_english,
            );
            Ok(table)
        })?;
        tables.push((embedding.source.clone(), table));
    }
    if tables.is_empty() {
        anyhow::bail!("config lists no embedding tables");
    }

    Ok(LoadedInputs {
        corpus,
        lexicon,
        stemmer: Stemmer::lancaster(),
        tables,
    })
}

/// Label texts per sound, sorted by sound id.
pub fn labels_by_sound(corpus: &Corpus) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for sound_id in corpus.sound_ids() {
        out.insert(sound_id.to_string(), Vec::new());
    }
    for record in &corpus.annotations {
        out.get_mut(&record.sound_id)
            .expect("annotations reference known sounds")
            .push(record.label_text.clone());
    }
    out
}

/// Unique noun lemmas across all labels, normalized against the primary
/// embedding table. These seed the crawl and become the matrix rows.
pub fn noun_seeds(
    corpus: &Corpus,
    table: &EmbeddingTable,
    lexicon: &LexicalDatabase,
) -> BTreeSet<String> {
    let mut seeds = BTreeSet::new();
    let mut seen_texts: BTreeSet<&str> = BTreeSet::new();
    for record in &corpus.annotations {
        if !seen_texts.insert(record.label_text.as_str()) {
            continue;
        }
        let label = normalize_label(&record.label_text, table, lexicon);
        for token in label.content_tokens() {
            if token.pos == hcu_core::wordnet::PosClass::Noun {
                seeds.insert(token.embed_key.clone());
            }
        }
    }
    seeds
}

/// Builds the co-location matrix from the on-disk cache alone. An empty or
/// missing cache yields `None` and the radius stays absent downstream.
pub fn colocation_from_cache(
    config: &RunConfig,
    inputs: &LoadedInputs,
    manifest: &mut RunManifest,
) -> anyhow::Result<Option<ColocationMatrix>> {
    manifest.stage("colocation_from_cache", |m| {
        let (_, primary_table) = &inputs.tables[0];
        let seeds = noun_seeds(&inputs.corpus, primary_table, &inputs.lexicon);
        if seeds.is_empty() || !config.paths.cache_dir.exists() {
            m.warn("colocation: no cache directory or no noun seeds; radius will be absent");
            return Ok(None);
        }
        let cache = ResponseCache::new(&config.paths.cache_dir);
        let outcome = crawl(
            &seeds,
            &config.crawl_config(),
            &cache,
            &mut OfflineTransport,
            &mut SystemClock::new(),
        )?;
        m.tally("colocation_cache_misses", outcome.failures.entries.len() as u64);
        if outcome.graph.is_empty() {
            m.warn("colocation: cache produced an empty graph; radius will be absent");
            return Ok(None);
        }
        let nouns: Vec<String> = seeds.into_iter().collect();
        let matrix = intersection_matrix(&nouns, &outcome.graph, config.crawl.depth);
        m.tally("colocation_zero_rows", matrix.zero_rows);
        Ok(Some(matrix))
    })
}

pub struct ScoreOutputs {
    /// One row per (sound, strategy, table), ordered by sound id first.
    pub rows: Vec<(String, UncertaintyScores)>,
    /// Full per-stimulus results for the primary (first strategy, first
    /// table) pair, keyed by sound id.
    pub primary: BTreeMap<String, ScoredStimulus>,
}

/// Scores every stimulus under every configured strategy/table pair and
/// writes `scores.csv` plus one repair log per embedding source.
pub fn run_scoring(
    config: &RunConfig,
    inputs: &LoadedInputs,
    colocation: Option<&ColocationMatrix>,
    manifest: &mut RunManifest,
) -> anyhow::Result<ScoreOutputs> {
    let strategies = config.parsed_strategies()?;
    let labels = labels_by_sound(&inputs.corpus);

    let mut rows: Vec<(String, UncertaintyScores)> = Vec::new();
    let mut primary: BTreeMap<String, ScoredStimulus> = BTreeMap::new();
    let mut repair_logs: BTreeMap<String, Vec<(String, usize, Repair)>> = BTreeMap::new();

    manifest.stage("score", |m| {
        for (sound_id, texts) in &labels {
            if texts.is_empty() {
                m.warn(format!("sound {sound_id}: no annotations; skipped"));
                continue;
            }
            for (strategy_idx, strategy) in strategies.iter().enumerate() {
                for (table_idx, (source, table)) in inputs.tables.iter().enumerate() {
                    let score_config = ScoreConfig {
                        strategy: *strategy,
                        knn_k: config.metrics.knn_k,
                        colocation,
                    };
                    let scored = score_stimulus(
                        texts,
                        table,
                        &inputs.lexicon,
                        &inputs.stemmer,
                        &score_config,
                    )?;
                    for warning in &scored.warnings {
                        m.tally("stimulus_warnings", 1);
                        m.warn(format!(
                            "sound {sound_id} [{} / {source}]: {warning}",
                            strategy.as_str()
                        ));
                    }
                    if strategy_idx == 0 && table_idx == 0 {
                        for (label_idx, label) in scored.labels.iter().enumerate() {
                            for repair in &label.repairs {
                                repair_logs.entry(source.clone()).or_default().push((
                                    sound_id.clone(),
                                    label_idx,
                                    repair.clone(),
                                ));
                            }
                        }
                        primary.insert(sound_id.clone(), scored.clone());
                    }
                    rows.push((sound_id.clone(), scored.scores));
                }
            }
        }
        Ok(())
    })?;

    {
        let mut w = open_output(config, "scores.csv")?;
        hcu_core::uncertainty::write_scores_csv(&mut w, &rows)?;
    }
    for (source, log) in &repair_logs {
        let mut w = open_output(config, &format!("repairs_{source}.tsv"))?;
        hcu_core::labels::write_repair_log(&mut w, log)?;
    }

    Ok(ScoreOutputs { rows, primary })
}

/// Writes any text artifact into the output directory.
pub fn write_output(
    config: &RunConfig,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    let mut w = open_output(config, name)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Sound ids with their modified flags, for the projection export.
pub fn modified_flags(corpus: &Corpus) -> BTreeMap<String, bool> {
    corpus
        .sounds
        .iter()
        .map(|s| (s.sound_id.clone(), s.is_modified))
        .collect()
}

/// Convenience used by `validate`: checks a file exists and is readable.
pub fn probe_file(path: &Path) -> Result<(), String> {
    match std::fs::metadata(path) {
        Ok(meta) if meta.is_file() => Ok(()),
        Ok(_) => Err(format!("{} is not a file", path.display())),
        Err(e) => Err(format!("{}: {e}", path.display())),
    }
}
