//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured runtime. Criterion 10 is gated on externally supplied data
//! and skips cleanly when the environment does not provide it.
//!
//! Run with `cargo test -p hcu-cli --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hcu_core::corpus::{load_corpus, IngestConfig, LikertScale};
use hcu_core::embedding::{
    load_word2vec_text, save_word2vec_text, EmbeddingTable, Vector,
};
use hcu_core::labels::{
    cluster_headwords, normalize_label, Cluster, HeadWordClustering, NormalizedLabel, Strategy,
};
use hcu_core::stats::{
    filter_outlier_workers, mean_features, pearson, pearson_matrix, percentile_split, spearman,
    split_half_reliability, LikertFeature,
};
use hcu_core::stemmer::Stemmer;
use hcu_core::uncertainty::{
    centroid_radius, compute_hcu, knn_radius, score_stimulus, weighted_subgroup_distance,
    GroupProportions, ScoreConfig,
};
use hcu_core::wordnet::LexicalDatabase;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn lexicon() -> LexicalDatabase {
    LexicalDatabase::load(&fixtures().join("wordnet")).unwrap()
}

fn mini_table() -> EmbeddingTable {
    load_word2vec_text(&fixtures().join("embeddings/mini.w2v.txt"))
        .unwrap()
        .0
}

fn pass(criterion: u32, what: &str, start: Instant) {
    println!(
        "[PASS] criterion {criterion}: {what} ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// 1. Entropy correctness
// ---------------------------------------------------------------------------
#[test]
fn criterion_01_entropy_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=12);
        let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..40)).collect();
        let groups = GroupProportions::from_counts(&counts).unwrap();
        let h = compute_hcu(&groups);
        assert!(h >= 0.0, "negative entropy {h}");
        assert!(
            h <= (n as f64).log2() + 1e-12,
            "entropy {h} above log2({n})"
        );
        // permutation invariance is exact
        let mut reversed = groups.as_slice().to_vec();
        reversed.reverse();
        let permuted = GroupProportions::new(reversed).unwrap();
        assert_eq!(h.to_bits(), compute_hcu(&permuted).to_bits());
    }
    let uniform = GroupProportions::new(vec![0.25; 4]).unwrap();
    assert_eq!(compute_hcu(&uniform), 2.0, "uniform four-group case");
    let skewed = GroupProportions::new(vec![0.5, 0.25, 0.25]).unwrap();
    assert!((compute_hcu(&skewed) - 1.5).abs() <= 1e-12);
    assert!(start.elapsed().as_secs_f64() < 1.0, "runtime bound");
    pass(1, "entropy bounds, frozen values, permutation exactness", start);
}

// ---------------------------------------------------------------------------
// 2. Radius-metric oracle equivalence
// ---------------------------------------------------------------------------

fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    1.0 - dot / (nu * nv)
}

fn oracle_mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[test]
fn criterion_02_radius_metrics_match_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for fixture in 0..50 {
        let n = rng.gen_range(3..=20);
        let dim = rng.gen_range(2..=10);
        let vectors: Vec<Vector> = (0..n)
            .map(|_| {
                Vector::new((0..dim).map(|_| rng.gen_range(0.05..1.0)).collect()).unwrap()
            })
            .collect();
        let raw: Vec<&[f64]> = vectors.iter().map(|v| v.components()).collect();

        // centroid radius against a direct recomputation
        let mut centroid = vec![0.0; dim];
        for row in &raw {
            for (c, x) in centroid.iter_mut().zip(*row) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);
        let distances: Vec<f64> = raw.iter().map(|r| oracle_cosine(r, &centroid)).collect();
        let (expect_mean, expect_std) = oracle_mean_std(&distances);
        let got = centroid_radius(&vectors).unwrap();
        assert!((got.mean - expect_mean).abs() < 1e-9, "fixture {fixture}");
        assert!((got.std - expect_std).abs() < 1e-9);

        // knn radius against exhaustive pairwise distances
        let k = 3.min(n - 1);
        let per_vector: Vec<f64> = (0..n)
            .map(|i| {
                let mut ds: Vec<f64> = (0..n)
                    .filter(|j| *j != i)
                    .map(|j| oracle_cosine(raw[i], raw[j]))
                    .collect();
                ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ds[..k].iter().sum::<f64>() / k as f64
            })
            .collect();
        let (expect_mean, expect_std) = oracle_mean_std(&per_vector);
        let got = knn_radius(&vectors, 3).unwrap();
        assert!((got.mean - expect_mean).abs() < 1e-9);
        assert!((got.std - expect_std).abs() < 1e-9);

        // weighted subgroup distance against a hand-rolled weighted sum
        let cluster_count = rng.gen_range(1..=4.min(n));
        let mut sizes = vec![1usize; cluster_count];
        for _ in cluster_count..n {
            let c = rng.gen_range(0..cluster_count);
            sizes[c] += 1;
        }
        let clustering = synthetic_clustering(&sizes);
        let heads: Vec<Vector> = (0..cluster_count)
            .map(|_| {
                Vector::new((0..dim).map(|_| rng.gen_range(0.05..1.0)).collect()).unwrap()
            })
            .collect();
        let dominant = (0..cluster_count)
            .max_by(|a, b| sizes[*a].cmp(&sizes[*b]).then(b.cmp(a)))
            .unwrap();
        let total: usize = sizes.iter().sum();
        let expect: f64 = (0..cluster_count)
            .filter(|c| *c != dominant)
            .map(|c| {
                sizes[c] as f64 / total as f64
                    * oracle_cosine(heads[c].components(), heads[dominant].components())
            })
            .sum();
        let got = weighted_subgroup_distance(&clustering, &heads).unwrap();
        assert!((got - expect).abs() < 1e-9);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0, "runtime bound");
    pass(2, "centroid, knn, and weighted-subgroup radii match brute force", start);
}

fn synthetic_clustering(sizes: &[usize]) -> HeadWordClustering {
    let mut clusters = Vec::new();
    let mut next = 0usize;
    for (i, size) in sizes.iter().enumerate() {
        clusters.push(Cluster {
            stem: format!("stem{i}"),
            head_word: format!("head{i}"),
            members: (next..next + size).collect(),
        });
        next += size;
    }
    HeadWordClustering {
        clusters,
        fallback_assignments: BTreeMap::new(),
        unassigned: BTreeSet::new(),
        total_labels: next,
    }
}

// ---------------------------------------------------------------------------
// 3. Dispersion monotonicity
// ---------------------------------------------------------------------------
#[test]
fn criterion_03_radius_metrics_track_dispersion() {
    let start = Instant::now();
    const SIGMAS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
    let dim = 8;
    let mut correct = [0u32; 3];
    let trials = 100;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + trial);
        let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..1.0)).collect();
        let mut centroid_means = Vec::new();
        let mut knn_means = Vec::new();
        let mut weighted = Vec::new();
        for sigma in SIGMAS {
            let vectors: Vec<Vector> = (0..15)
                .map(|_| {
                    Vector::new(
                        center
                            .iter()
                            .map(|c| c + sigma * gaussian(&mut rng))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            centroid_means.push(centroid_radius(&vectors).unwrap().mean);
            knn_means.push(knn_radius(&vectors, 3).unwrap().mean);

            let clustering = synthetic_clustering(&[6, 5, 4]);
            let heads: Vec<Vector> = (0..3)
                .map(|_| {
                    Vector::new(
                        center
                            .iter()
                            .map(|c| c + sigma * gaussian(&mut rng))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            weighted.push(weighted_subgroup_distance(&clustering, &heads).unwrap());
        }
        for (metric, series) in [&centroid_means, &knn_means, &weighted].iter().enumerate() {
            if series.windows(2).all(|w| w[0] < w[1]) {
                correct[metric] += 1;
            }
        }
    }
    for (name, count) in ["centroid", "knn", "weighted-subgroup"].iter().zip(correct) {
        assert!(
            count >= 95,
            "{name} ordered correctly in only {count}/{trials} trials"
        );
    }
    assert!(start.elapsed().as_secs_f64() < 30.0, "runtime bound");
    pass(3, "radius metrics non-decreasing in dispersion (≥95% of trials)", start);
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------------------
// 4. Clustering determinism and oracle
// ---------------------------------------------------------------------------
#[test]
fn criterion_04_clustering_matches_hand_derived_partitions() {
    let start = Instant::now();
    let lexicon = lexicon();
    let table = mini_table();
    let stemmer = Stemmer::lancaster();
    let normalize = |texts: &[&str]| -> Vec<NormalizedLabel> {
        texts
            .iter()
            .map(|t| normalize_label(t, &table, &lexicon))
            .collect()
    };

    // hand-derived partitions for the three label-pipeline fixtures
    let fixtures: Vec<(Vec<&str>, Vec<Vec<usize>>)> = vec![
        (
            vec!["dog barking", "a dog barks", "thunder"],
            vec![vec![0, 1], vec![2]],
        ),
        (
            vec!["dog barking"; 5],
            vec![vec![0, 1, 2, 3, 4]],
        ),
        (
            vec!["dog barking", "a dog barks", "dog growling", "puppy yelping"],
            vec![vec![0, 1, 2, 3]],
        ),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for (texts, expected) in &fixtures {
        let labels = normalize(texts);
        let clustering = cluster_headwords(&labels, &lexicon, &stemmer).unwrap();
        let expected_sets: BTreeSet<BTreeSet<usize>> = expected
            .iter()
            .map(|g| g.iter().copied().collect())
            .collect();
        let got_sets: BTreeSet<BTreeSet<usize>> =
            clustering.partition().into_iter().collect();
        assert_eq!(got_sets, expected_sets, "fixture {texts:?}");

        // permutation invariance over 20 shuffles
        let base_texts: BTreeSet<BTreeSet<String>> = clustering
            .partition()
            .into_iter()
            .map(|g| g.into_iter().map(|i| texts[i].to_string()).collect())
            .collect();
        let mut order: Vec<usize> = (0..texts.len()).collect();
        for _ in 0..20 {
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng);
            let shuffled: Vec<NormalizedLabel> =
                order.iter().map(|i| labels[*i].clone()).collect();
            let got = cluster_headwords(&shuffled, &lexicon, &stemmer).unwrap();
            let got_texts: BTreeSet<BTreeSet<String>> = got
                .partition()
                .into_iter()
                .map(|g| g.into_iter().map(|i| texts[order[i]].to_string()).collect())
                .collect();
            assert_eq!(got_texts, base_texts, "shuffle changed the partition");
        }
    }
    pass(4, "head-word partitions match hand derivations; shuffle-invariant", start);
}

// ---------------------------------------------------------------------------
// 5. Statistics oracles
// ---------------------------------------------------------------------------
#[test]
fn criterion_05_statistics_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);

    // tie-free pairs against the direct rank-difference formula
    for _ in 0..100 {
        let n = 50;
        let mut xr: Vec<usize> = (0..n).collect();
        let mut yr: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        xr.shuffle(&mut rng);
        yr.shuffle(&mut rng);
        let x: Vec<f64> = xr.iter().map(|r| *r as f64 * 1.5 - 3.0).collect();
        let y: Vec<f64> = yr.iter().map(|r| (*r as f64).powi(2)).collect();
        let d2: f64 = xr
            .iter()
            .zip(&yr)
            .map(|(a, b)| {
                let d = *a as f64 - *b as f64;
                d * d
            })
            .sum();
        let nf = n as f64;
        let expect = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        let got = spearman(&x, &y).unwrap();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    // tied data against an average-rank oracle (naive O(n²) ranking)
    for _ in 0..100 {
        let n = 50;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..12) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..12) as f64).collect();
        let naive_ranks = |values: &[f64]| -> Vec<f64> {
            values
                .iter()
                .map(|v| {
                    let below = values.iter().filter(|u| *u < v).count() as f64;
                    let equal = values.iter().filter(|u| *u == v).count() as f64;
                    below + (equal + 1.0) / 2.0
                })
                .collect()
        };
        let expect = pearson(&naive_ranks(&x), &naive_ranks(&y));
        let got = spearman(&x, &y);
        match (got, expect) {
            (Ok(g), Ok(e)) => assert!((g - e).abs() < 1e-9, "{g} vs {e}"),
            (got, expect) => panic!("disagreement: {got:?} vs {expect:?}"),
        }
    }

    // pearson_matrix structure on the bundled corpus
    let (corpus, _) = load_corpus(
        &fixtures().join("corpus/annotations.csv"),
        &fixtures().join("corpus/sounds.csv"),
        &IngestConfig::default(),
    )
    .unwrap();
    let matrix = mean_features(&corpus, &BTreeMap::new());
    let corr = pearson_matrix(&matrix);
    for a in &corr.names {
        assert_eq!(corr.get(a, a), Some(1.0), "unit diagonal");
        for b in &corr.names {
            assert_eq!(corr.get(a, b), corr.get(b, a), "symmetry");
            if let Some(r) = corr.get(a, b) {
                assert!((0.0..=1.0 + 1e-12).contains(&r), "|r| bound");
            }
        }
    }
    pass(5, "spearman matches rank-formula and tie oracles; matrix well-formed", start);
}

// ---------------------------------------------------------------------------
// 6. Reliability behavior
// ---------------------------------------------------------------------------

fn synthetic_annotator_corpus(noise_std: f64, seed: u64) -> hcu_core::corpus::Corpus {
    use hcu_core::corpus::{AnnotationRecord, Corpus, SoundEntry};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = LikertScale::default();
    let mut sounds = Vec::new();
    let mut annotations = Vec::new();
    for s in 0..60 {
        let sound_id = format!("s{s:02}");
        sounds.push(SoundEntry {
            sound_id: sound_id.clone(),
            display_name: sound_id.clone(),
            is_modified: false,
        });
        let latent = 1.0 + 8.0 * (s as f64 / 59.0);
        for w in 0..24 {
            let noise = if noise_std == 0.0 {
                0.0
            } else {
                noise_std * gaussian(&mut rng)
            };
            let value = (latent + noise)
                .round()
                .clamp(scale.low as f64, scale.high as f64) as i32;
            annotations.push(AnnotationRecord {
                sound_id: sound_id.clone(),
                worker_id: format!("w{w:02}"),
                label_text: "sound".to_string(),
                familiarity: value,
                imageability: value,
                arousal: value,
                valence: value,
                time_to_first_letter_ms: None,
                response_time_ms: None,
                num_plays: None,
                num_words: 1,
            });
        }
    }
    Corpus {
        sounds,
        annotations,
        scale,
    }
}

#[test]
fn criterion_06_split_half_reliability_behavior() {
    let start = Instant::now();
    let perfect = synthetic_annotator_corpus(0.0, 606);
    let report = split_half_reliability(&perfect, LikertFeature::Valence, 5, 42).unwrap();
    assert_eq!(report.mean, 1.0, "zero-noise annotators split perfectly");
    assert_eq!(report.coefficients, vec![1.0; 5]);

    // one likert scale unit is the noise yardstick
    let mut means = Vec::new();
    for (i, noise) in [0.5, 1.0, 2.0].iter().enumerate() {
        let corpus = synthetic_annotator_corpus(*noise, 700 + i as u64);
        let report = split_half_reliability(&corpus, LikertFeature::Valence, 5, 42).unwrap();
        means.push(report.mean);
    }
    assert!(
        means[0] > means[1] && means[1] > means[2],
        "means not strictly decreasing over noise sweep: {means:?}"
    );
    assert!(start.elapsed().as_secs_f64() < 10.0, "runtime bound");
    pass(6, "split-half mean 1.0 at zero noise, strictly decreasing with noise", start);
}

// ---------------------------------------------------------------------------
// 7. End-to-end qualitative separation + deterministic projection export
// ---------------------------------------------------------------------------

fn run_hcu(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_hcu"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_07_end_to_end_agreement_vs_scrambled() {
    let start = Instant::now();
    let config = fixtures().join("demo_config.json");
    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    for out in [&out_a, &out_b] {
        let output = run_hcu(&[
            "--config",
            config.to_str().unwrap(),
            "--output-dir",
            out.path().to_str().unwrap(),
            "stats",
        ]);
        assert!(output.status.success(), "{output:?}");
    }

    // the bundled corpus holds 10 agreement (a*) and 10 scrambled (m*) stimuli
    let text = fs::read_to_string(out_a.path().join("scores.csv")).unwrap();
    let mut agreement: Vec<(f64, f64)> = Vec::new();
    let mut scrambled: Vec<(f64, f64)> = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[1] != "average" || fields[2] != "word2vec" {
            continue;
        }
        let row = (
            fields[3].parse::<f64>().unwrap(),
            fields[4].parse::<f64>().unwrap(),
        );
        match fields[0].as_bytes()[0] {
            b'a' => agreement.push(row),
            b'm' => scrambled.push(row),
            _ => {}
        }
    }
    assert_eq!(agreement.len(), 10);
    assert_eq!(scrambled.len(), 10);
    for (ah, ac) in &agreement {
        for (mh, mc) in &scrambled {
            assert!(mh > ah, "scrambled hcu {mh} not above agreement {ah}");
            assert!(mc > ac, "scrambled centroid radius {mc} not above {ac}");
        }
    }

    let left = fs::read(out_a.path().join("projection.csv")).unwrap();
    let right = fs::read(out_b.path().join("projection.csv")).unwrap();
    assert_eq!(left, right, "projection export not byte-identical");
    pass(7, "scrambled stimuli dominate agreement stimuli; projection reproducible", start);
}

// ---------------------------------------------------------------------------
// 8. Percentile-split emotion polarization
// ---------------------------------------------------------------------------
#[test]
fn criterion_08_percentile_split_polarization() {
    let start = Instant::now();
    let (corpus, _) = load_corpus(
        &fixtures().join("corpus/annotations.csv"),
        &fixtures().join("corpus/sounds.csv"),
        &IngestConfig::default(),
    )
    .unwrap();
    let (corpus, _) = filter_outlier_workers(&corpus, 2.5);
    let lexicon = lexicon();
    let table = mini_table();
    let stemmer = Stemmer::lancaster();
    let mut scores = BTreeMap::new();
    for sound_id in corpus.sound_ids() {
        let labels: Vec<String> = corpus
            .annotations_for(sound_id)
            .map(|a| a.label_text.clone())
            .collect();
        let scored = score_stimulus(
            &labels,
            &table,
            &lexicon,
            &stemmer,
            &ScoreConfig {
                strategy: Strategy::Average,
                knn_k: 3,
                colocation: None,
            },
        )
        .unwrap();
        scores.insert(sound_id.to_string(), scored.scores);
    }
    let matrix = mean_features(&corpus, &scores);
    let split = percentile_split(&matrix, "hcu_bits", 15.0, 85.0).unwrap();
    assert_eq!(split.low_percentile, 15.0);
    assert_eq!(split.high_percentile, 85.0);
    for feature in ["valence", "arousal"] {
        let low = &split.low_summaries[feature];
        let high = &split.high_summaries[feature];
        assert!(
            high.std < low.std,
            "{feature}: high-uncertainty std {} not below low-uncertainty std {}",
            high.std,
            low.std
        );
    }
    pass(8, "high-uncertainty group shows less polarized emotion ratings", start);
}

// ---------------------------------------------------------------------------
// 9. Parser round-trips
// ---------------------------------------------------------------------------
#[test]
fn criterion_09_parser_round_trips() {
    let start = Instant::now();

    // word2vec text: load → save → load is the identity
    let (table, _) = load_word2vec_text(&fixtures().join("embeddings/mini.w2v.txt")).unwrap();
    let mut buf = Vec::new();
    save_word2vec_text(&table, &mut buf).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("roundtrip.txt");
    fs::write(&path, &buf).unwrap();
    let (reloaded, report) = load_word2vec_text(&path).unwrap();
    assert_eq!(report.skipped_rows, 0);
    assert_eq!(table.len(), reloaded.len());
    let mut tokens: Vec<&str> = table.tokens().collect();
    tokens.sort_unstable();
    for token in tokens {
        assert_eq!(
            table.lookup(token),
            reloaded.lookup(token),
            "vector for {token} changed"
        );
    }

    // corpus CSV: load → save → load is the identity, quoting included
    let (corpus, rejections) = load_corpus(
        &fixtures().join("corpus_small/annotations.csv"),
        &fixtures().join("corpus_small/sounds.csv"),
        &IngestConfig::default(),
    )
    .unwrap();
    assert!(rejections.is_empty());
    assert!(corpus
        .annotations
        .iter()
        .any(|a| a.label_text.contains(',') && a.label_text.contains('"')));
    assert!(corpus.annotations.iter().any(|a| a.label_text.contains('\n')));
    let out = dir.path().join("corpus");
    hcu_core::corpus::save_corpus(&corpus, &out).unwrap();
    let (reloaded, rejections) = load_corpus(
        &out.join("annotations.csv"),
        &out.join("sounds.csv"),
        &IngestConfig::default(),
    )
    .unwrap();
    assert!(rejections.is_empty());
    assert_eq!(corpus, reloaded);
    pass(9, "embedding and corpus parsers round-trip, escaping included", start);
}

// ---------------------------------------------------------------------------
// 10. Optional real-data trends (skips without the released dataset)
// ---------------------------------------------------------------------------
#[test]
fn criterion_10_real_data_trends_when_available() {
    let start = Instant::now();
    let vars = [
        "HCU_DATA_ANNOTATIONS",
        "HCU_DATA_SOUNDS",
        "HCU_DATA_NUMBERBATCH",
        "HCU_DATA_WORDNET_DIR",
    ];
    let values: Vec<Option<String>> = vars.iter().map(|v| std::env::var(v).ok()).collect();
    if values.iter().any(|v| v.is_none()) {
        println!(
            "[SKIP] criterion 10: set {} to run the real-data checks",
            vars.join(", ")
        );
        return;
    }
    let paths: Vec<PathBuf> = values.into_iter().map(|v| PathBuf::from(v.unwrap())).collect();

    let (corpus, _) = load_corpus(&paths[0], &paths[1], &IngestConfig::default()).unwrap();
    let (corpus, _) = filter_outlier_workers(&corpus, 2.5);
    let (table, _) = hcu_core::embedding::load_numberbatch(&paths[2]).unwrap();
    let lexicon = LexicalDatabase::load(&paths[3]).unwrap();
    let stemmer = Stemmer::lancaster();
    let mut scores = BTreeMap::new();
    for sound_id in corpus.sound_ids() {
        let labels: Vec<String> = corpus
            .annotations_for(sound_id)
            .map(|a| a.label_text.clone())
            .collect();
        if labels.is_empty() {
            continue;
        }
        let scored = score_stimulus(
            &labels,
            &table,
            &lexicon,
            &stemmer,
            &ScoreConfig {
                strategy: Strategy::Average,
                knn_k: 3,
                colocation: None,
            },
        )
        .unwrap();
        scores.insert(sound_id.to_string(), scored.scores);
    }
    let matrix = mean_features(&corpus, &scores);
    let corr = pearson_matrix(&matrix);

    // familiarity–imageability must be the largest annotated-feature pair
    let annotated = ["familiarity", "imageability", "arousal", "valence"];
    let fam_img = corr.get("familiarity", "imageability").unwrap();
    for a in annotated {
        for b in annotated {
            if a < b && !(a == "familiarity" && b == "imageability") {
                assert!(fam_img > corr.get(a, b).unwrap(), "{a}–{b} beats fam–img");
            }
        }
    }

    // mean familiarity trends down as uncertainty rises: negative sign only
    let fam = matrix.column_present("familiarity");
    let hcu = matrix.column_present("hcu_bits");
    let common: Vec<(f64, f64)> = fam
        .iter()
        .filter_map(|(r, f)| {
            hcu.iter()
                .find(|(hr, _)| hr == r)
                .map(|(_, h)| (*f, *h))
        })
        .collect();
    let xs: Vec<f64> = common.iter().map(|(f, _)| *f).collect();
    let ys: Vec<f64> = common.iter().map(|(_, h)| *h).collect();
    assert!(pearson(&xs, &ys).unwrap() < 0.0, "familiarity should fall with hcu");
    pass(10, "real-data correlation trends reproduced", start);
}

// ---------------------------------------------------------------------------
// 11. Desk-scale performance
// ---------------------------------------------------------------------------
#[test]
fn criterion_11_desk_scale_performance() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);

    // 100k-token embedding table: the fixture vocabulary plus filler tokens
    let fixture_rows = fs::read_to_string(fixtures().join("embeddings/mini.w2v.txt")).unwrap();
    let fixture_rows: Vec<&str> = fixture_rows.lines().skip(1).collect();
    let dim = 50;
    let total = 100_000;
    let mut embedding = String::with_capacity(total * dim * 8);
    embedding.push_str(&format!("{total} {dim}\n"));
    for row in &fixture_rows {
        let mut fields = row.split_whitespace();
        let token = fields.next().unwrap();
        let base: Vec<f64> = fields.map(|f| f.parse().unwrap()).collect();
        embedding.push_str(token);
        for i in 0..dim {
            let value = if i < base.len() { base[i] } else { 0.0 };
            embedding.push_str(&format!(" {value}"));
        }
        embedding.push('\n');
    }
    for i in fixture_rows.len()..total {
        embedding.push_str(&format!("tok{i:06}"));
        for _ in 0..dim {
            embedding.push_str(&format!(" {:.4}", rng.gen_range(-1.0..1.0)));
        }
        embedding.push('\n');
    }
    let embedding_path = dir.path().join("big.w2v.txt");
    fs::write(&embedding_path, embedding).unwrap();

    // 402 stimuli × 30 annotations drawn from the fixture topics
    let phrases = [
        "dog barking",
        "car engine",
        "thunder storm",
        "bird chirping",
        "water dripping",
        "door knocking",
        "bell ringing",
        "baby crying",
        "wind howling",
        "glass breaking",
    ];
    let mut sounds = String::from("sound_id,display_name,is_modified\n");
    let mut annotations = String::from(
        "sound_id,worker_id,label_text,familiarity,imageability,arousal,valence,\
         time_to_first_letter_ms,response_time_ms,num_plays\n",
    );
    for s in 0..402 {
        let sound_id = format!("s{s:03}");
        sounds.push_str(&format!("{sound_id},{sound_id},0\n"));
        let spread = s % 4; // how many distinct phrases this stimulus draws
        for w in 0..30 {
            let phrase = phrases[(s + w * (spread + 1)) % phrases.len()];
            let fam = 1 + (s + w) % 9;
            annotations.push_str(&format!(
                "{sound_id},w{w:02},{phrase},{fam},{fam},{},{},1000,9000,2\n",
                1 + (s * w) % 9,
                1 + (s + 2 * w) % 9,
            ));
        }
    }
    fs::write(dir.path().join("sounds.csv"), sounds).unwrap();
    fs::write(dir.path().join("annotations.csv"), annotations).unwrap();

    let config = serde_json::json!({
        "seed": 0,
        "paths": {
            "annotations": dir.path().join("annotations.csv"),
            "sounds": dir.path().join("sounds.csv"),
            "lexicon_dir": fixtures().join("wordnet"),
            "cache_dir": dir.path().join("no_cache"),
            "output_dir": dir.path().join("out"),
            "embeddings": [{"source": "word2vec", "path": embedding_path}]
        }
    });
    let config_path = dir.path().join("config.json");
    fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();

    let start = Instant::now();
    let output = run_hcu(&["--config", config_path.to_str().unwrap(), "stats"]);
    let elapsed = start.elapsed();
    assert!(output.status.success(), "{output:?}");
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "score+stats took {elapsed:?}"
    );
    assert!(dir.path().join("out/scores.csv").exists());
    assert!(dir.path().join("out/projection.csv").exists());
    pass(
        11,
        "402 stimuli × 30 labels with a 100k-token table inside the budget",
        start,
    );
}
