//! Batch front end for causal-uncertainty scoring of labeled sound corpora.
//!
//! Four subcommands cover a run: `validate` probes the configuration and
//! inputs, `crawl` populates the co-location cache over the network, `score`
//! produces the per-stimulus uncertainty CSV, and `stats` adds the analysis
//! artifacts (correlation matrix, reliability report, percentile splits, and
//! the 2-D projection export). Every run writes a JSON manifest, failed runs
//! included, and reruns with identical config and inputs produce
//! byte-identical primary outputs.

mod config;
mod manifest;
mod pipeline;
mod transport;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hcu_core::colocation::{crawl, ResponseCache, SystemClock};
use hcu_core::stats::{
    mean_features, pearson_matrix, percentile_split, project_2d, split_half_reliability,
    write_reliability_csv, LikertFeature,
};

use config::RunConfig;
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "hcu",
    version,
    about = "Causal-uncertainty scoring for labeled sound corpora"
)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the configuration and probe every referenced input.
    Validate,
    /// Populate the co-location cache from the knowledge-graph service.
    Crawl,
    /// Score every stimulus under every configured strategy/embedding pair.
    Score,
    /// Score plus the correlation, reliability, percentile, and projection
    /// analyses.
    Stats,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Crawl => "crawl",
            Command::Score => "score",
            Command::Stats => "stats",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config_path) = cli.config.as_deref() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let config = match RunConfig::load(config_path, cli.output_dir.as_deref()) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = pipeline::create_output_dir(&config) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    let config_snapshot = serde_json::to_value(&config).expect("config serializes");
    let mut manifest = RunManifest::new(cli.command.name(), config_snapshot);

    let result = match cli.command {
        Command::Validate => cmd_validate(&config, &mut manifest),
        Command::Crawl => cmd_crawl(&config, &mut manifest),
        Command::Score => cmd_score(&config, &mut manifest),
        Command::Stats => cmd_stats(&config, &mut manifest),
    };

    let manifest_path = config
        .paths
        .output_dir
        .join(format!("manifest_{}.json", cli.command.name()));
    if let Err(e) = manifest.write(&manifest_path) {
        eprintln!("error: cannot write manifest: {e:#}");
        return ExitCode::FAILURE;
    }

    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Probes the config and every referenced input, printing one status line
/// per check. Exit code 0 iff everything passes.
fn cmd_validate(config: &RunConfig, manifest: &mut RunManifest) -> anyhow::Result<ExitCode> {
    let mut ok = true;
    let mut check = |name: &str, result: Result<(), String>| match result {
        Ok(()) => println!("ok: {name}"),
        Err(e) => {
            ok = false;
            println!("FAIL: {name}: {e}");
        }
    };

    manifest.stage("validate", |_| {
        check(
            "scale",
            config.likert_scale().map(|_| ()).map_err(|e| e.to_string()),
        );
        check(
            "strategies",
            config
                .parsed_strategies()
                .map(|_| ())
                .map_err(|e| e.to_string()),
        );
        check(
            "crawl config",
            config.crawl_config().validate().map_err(|e| e.to_string()),
        );
        check(
            "annotations file",
            pipeline::probe_file(&config.paths.annotations),
        );
        check("sounds file", pipeline::probe_file(&config.paths.sounds));
        for stem in ["noun", "verb", "adj", "adv"] {
            for prefix in ["index", "data"] {
                let path = config.paths.lexicon_dir.join(format!("{prefix}.{stem}"));
                check(&format!("lexicon {prefix}.{stem}"), pipeline::probe_file(&path));
            }
        }
        for embedding in &config.paths.embeddings {
            let name = format!("embedding [{}] {}", embedding.source, embedding.path.display());
            check(&name, pipeline::probe_file(&embedding.path));
        }
        if config.paths.embeddings.is_empty() {
            check("embeddings", Err("config lists no embedding tables".to_string()));
        }
        if config.paths.cache_dir.exists() {
            println!("ok: cache dir {}", config.paths.cache_dir.display());
        } else {
            println!(
                "note: cache dir {} does not exist yet; `crawl` will create it",
                config.paths.cache_dir.display()
            );
        }
        Ok(())
    })?;

    if ok {
        println!("validate: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        manifest.warn("validation failed");
        Ok(ExitCode::FAILURE)
    }
}

/// Crawls the knowledge graph for every label noun, populating the response
/// cache, and exports the location graph plus a failure manifest. Partial
/// failures are surfaced per term and are not fatal; resolving nothing at
/// all while the network was needed is.
fn cmd_crawl(config: &RunConfig, manifest: &mut RunManifest) -> anyhow::Result<ExitCode> {
    let inputs = pipeline::load_inputs(config, manifest)?;
    let (_, primary_table) = &inputs.tables[0];
    let seeds = pipeline::noun_seeds(&inputs.corpus, primary_table, &inputs.lexicon);
    manifest.tally("crawl_seeds", seeds.len() as u64);

    let outcome = manifest.stage("crawl", |_| {
        let cache = ResponseCache::new(&config.paths.cache_dir);
        let mut transport = transport::HttpTransport::new()?;
        let mut clock = SystemClock::new();
        Ok(crawl(
            &seeds,
            &config.crawl_config(),
            &cache,
            &mut transport,
            &mut clock,
        )?)
    })?;
    manifest.tally("crawl_requests", outcome.requests_made);
    manifest.tally("crawl_failures", outcome.failures.entries.len() as u64);
    manifest.tally("crawl_edges", outcome.graph.edge_count() as u64);

    pipeline::write_output(config, "location_graph.tsv", |w| {
        Ok(outcome.graph.write_tsv(w)?)
    })?;
    pipeline::write_output(config, "crawl_failures.tsv", |w| {
        Ok(outcome.failures.write_tsv(w)?)
    })?;

    manifest.stage("crawl_outcome", |m| {
        let total_failure =
            outcome.graph.is_empty() && outcome.requests_made > 0 && !outcome.failures.is_empty();
        if total_failure {
            m.warn("crawl resolved nothing: service unreachable and cache cold");
            anyhow::bail!("crawl resolved no terms; see crawl_failures.tsv");
        }
        Ok(())
    })?;
    println!(
        "crawl: {} edges, {} requests, {} failures",
        outcome.graph.edge_count(),
        outcome.requests_made,
        outcome.failures.entries.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_score(config: &RunConfig, manifest: &mut RunManifest) -> anyhow::Result<ExitCode> {
    let inputs = pipeline::load_inputs(config, manifest)?;
    let colocation = pipeline::colocation_from_cache(config, &inputs, manifest)?;
    let outputs = pipeline::run_scoring(config, &inputs, colocation.as_ref(), manifest)?;
    println!(
        "score: {} rows over {} stimuli written to {}",
        outputs.rows.len(),
        outputs.primary.len(),
        config.paths.output_dir.join("scores.csv").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(config: &RunConfig, manifest: &mut RunManifest) -> anyhow::Result<ExitCode> {
    let inputs = pipeline::load_inputs(config, manifest)?;
    let colocation = pipeline::colocation_from_cache(config, &inputs, manifest)?;
    let outputs = pipeline::run_scoring(config, &inputs, colocation.as_ref(), manifest)?;

    // analysis artifacts use the primary (first strategy, first table) pair
    let primary_scores: BTreeMap<String, hcu_core::uncertainty::UncertaintyScores> = outputs
        .primary
        .iter()
        .map(|(id, s)| (id.clone(), s.scores.clone()))
        .collect();

    let matrix = manifest.stage("feature_matrix", |_| {
        Ok(mean_features(&inputs.corpus, &primary_scores))
    })?;
    pipeline::write_output(config, "feature_matrix.csv", |w| Ok(matrix.write_csv(w)?))?;

    let correlations = manifest.stage("pearson_matrix", |_| Ok(pearson_matrix(&matrix)))?;
    pipeline::write_output(config, "correlation_matrix.csv", |w| {
        Ok(correlations.write_csv(w)?)
    })?;

    let reliability = manifest.stage("split_half_reliability", |m| {
        let mut reports = Vec::new();
        for feature in LikertFeature::ALL {
            let report = split_half_reliability(
                &inputs.corpus,
                feature,
                config.metrics.n_splits,
                config.seed,
            )?;
            m.tally(
                &format!("reliability_excluded_{}", feature.name()),
                report.excluded_per_split.iter().sum::<usize>() as u64,
            );
            reports.push(report);
        }
        Ok(reports)
    })?;
    pipeline::write_output(config, "reliability.csv", |w| {
        Ok(write_reliability_csv(w, &reliability)?)
    })?;

    let split = manifest.stage("percentile_split", |m| {
        let split = percentile_split(
            &matrix,
            &config.metrics.split_metric,
            config.metrics.percentile_low,
            config.metrics.percentile_high,
        )?;
        if split.degenerate {
            m.warn("percentile split is degenerate: thresholds coincide");
        }
        Ok(split)
    })?;
    pipeline::write_output(config, "percentile_low_group.csv", |w| {
        Ok(matrix.restrict(&split.low_ids).write_csv(w)?)
    })?;
    pipeline::write_output(config, "percentile_high_group.csv", |w| {
        Ok(matrix.restrict(&split.high_ids).write_csv(w)?)
    })?;
    pipeline::write_output(config, "percentile_summary.csv", |w| {
        Ok(split.write_summary_csv(w)?)
    })?;

    manifest.stage("projection", |m| {
        let mut ids = Vec::new();
        let mut vectors = Vec::new();
        for (sound_id, scored) in &outputs.primary {
            match &scored.centroid {
                Some(centroid) => {
                    ids.push(sound_id.clone());
                    vectors.push(centroid.clone());
                }
                None => m.warn(format!("projection: sound {sound_id} has no centroid")),
            }
        }
        let projection = project_2d(&vectors)?;
        if projection.rank_deficient {
            m.warn("projection: rank-deficient input; second coordinate zero-filled");
        }
        let flags = pipeline::modified_flags(&inputs.corpus);
        pipeline::write_output(config, "projection.csv", |w| {
            writeln!(w, "sound_id,x,y,hcu_bits,is_modified")?;
            for (sound_id, (x, y)) in ids.iter().zip(&projection.points) {
                let hcu = outputs.primary[sound_id].scores.hcu_bits;
                let modified = if flags.get(sound_id).copied().unwrap_or(false) {
                    1
                } else {
                    0
                };
                writeln!(w, "{sound_id},{x},{y},{hcu},{modified}")?;
            }
            Ok(())
        })?;
        Ok(())
    })?;

    println!(
        "stats: artifacts written to {}",
        config.paths.output_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
