//! Per-stimulus causal-uncertainty scores: Shannon entropy over head-word
//! label groups plus the embedding cluster-radius metrics.
//!
//! The entropy is computed with the standard negative sign, so a stimulus
//! whose labels all land in one group scores 0 bits and disagreement raises
//! the score toward `log2(group count)`. The radius metrics measure the
//! geometric spread of a stimulus's label embeddings: mean/std distance to
//! the centroid, mean distance to the k nearest neighbors (dampening
//! outliers), and the size-weighted distance from each head-word subgroup to
//! the dominant one.

use std::io::{self, Write};

use thiserror::Error;

use crate::colocation::ColocationMatrix;
use crate::embedding::{centroid, cosine_distance, EmbeddingSource, EmbeddingTable, Vector};
use crate::labels::{
    cluster_headwords, embed_stimulus_clustered, head_word_vector, normalize_label,
    HeadWordClustering, NormalizedLabel, Strategy,
};
use crate::stemmer::Stemmer;
use crate::wordnet::LexicalDatabase;

#[derive(Debug, Error)]
pub enum UncertaintyError {
    #[error("group proportions must be in (0, 1] and sum to 1; got sum {sum}")]
    BadProportions { sum: f64 },
    #[error("empty group list")]
    EmptyGroups,
    #[error("empty vector list")]
    EmptyVectors,
    #[error("need at least two vectors, got {count}")]
    TooFewVectors { count: usize },
    #[error("centroid is the zero vector; distances are undefined")]
    DegenerateCentroid,
    #[error("zero vector among embeddings; cosine distance undefined")]
    ZeroVector,
    #[error("vector dimensions disagree")]
    DimensionMismatch,
    #[error("clustering has no head-word clusters")]
    NoClusters,
    #[error("head-word vector count {vectors} does not match cluster count {clusters}")]
    HeadVectorMismatch { vectors: usize, clusters: usize },
    #[error("stimulus has no labels")]
    NoLabels,
}

impl From<crate::embedding::VectorError> for UncertaintyError {
    fn from(e: crate::embedding::VectorError) -> Self {
        use crate::embedding::VectorError::*;
        match e {
            DimensionMismatch { .. } => UncertaintyError::DimensionMismatch,
            ZeroVector => UncertaintyError::ZeroVector,
            EmptyList => UncertaintyError::EmptyVectors,
            NonFinite => UncertaintyError::ZeroVector,
        }
    }
}

/// Proportions of a stimulus's labels falling into each label group.
/// Each is in (0, 1] and they sum to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupProportions {
    proportions: Vec<f64>,
}

impl GroupProportions {
    pub fn new(proportions: Vec<f64>) -> Result<Self, UncertaintyError> {
        if proportions.is_empty() {
            return Err(UncertaintyError::EmptyGroups);
        }
        let sum: f64 = proportions.iter().sum();
        let valid = proportions.iter().all(|p| *p > 0.0 && *p <= 1.0) && (sum - 1.0).abs() <= 1e-9;
        if !valid {
            return Err(UncertaintyError::BadProportions { sum });
        }
        Ok(GroupProportions { proportions })
    }

    /// Builds proportions from group member counts; zero counts are rejected.
    pub fn from_counts(counts: &[usize]) -> Result<Self, UncertaintyError> {
        if counts.is_empty() {
            return Err(UncertaintyError::EmptyGroups);
        }
        let total: usize = counts.iter().sum();
        if counts.contains(&0) || total == 0 {
            return Err(UncertaintyError::BadProportions { sum: 0.0 });
        }
        Ok(GroupProportions {
            proportions: counts.iter().map(|c| *c as f64 / total as f64).collect(),
        })
    }

    pub fn group_count(&self) -> usize {
        self.proportions.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.proportions
    }
}

/// Shannon entropy `-Σ p_j log2 p_j` in bits; 0 for a single group.
///
/// Proportions are accumulated in sorted order so the result is bit-exact
/// under group permutation.
pub fn compute_hcu(groups: &GroupProportions) -> f64 {
    let mut sorted = groups.proportions.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("proportions are finite"));
    let h: f64 = -sorted.iter().map(|p| p * p.log2()).sum::<f64>();
    // p = 1 contributes -0.0
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

/// Mean and population standard deviation of a dispersion measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusStats {
    pub mean: f64,
    pub std: f64,
}

fn mean_and_population_std(values: &[f64]) -> RadiusStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    RadiusStats {
        mean,
        std: var.sqrt(),
    }
}

/// Cosine distance of each embedding to their centroid; returns the mean and
/// population standard deviation of those distances.
pub fn centroid_radius(embeddings: &[Vector]) -> Result<RadiusStats, UncertaintyError> {
    if embeddings.is_empty() {
        return Err(UncertaintyError::EmptyVectors);
    }
    let center = centroid(embeddings)?;
    if center.is_zero() {
        return Err(UncertaintyError::DegenerateCentroid);
    }
    let distances: Vec<f64> = embeddings
        .iter()
        .map(|v| cosine_distance(v, &center))
        .collect::<Result<_, _>>()?;
    Ok(mean_and_population_std(&distances))
}

/// For each embedding, the mean cosine distance to its k nearest other
/// embeddings (k clamped to count − 1); returns the mean and population
/// standard deviation of those per-vector values.
pub fn knn_radius(embeddings: &[Vector], k: usize) -> Result<RadiusStats, UncertaintyError> {
    if embeddings.len() < 2 {
        return Err(UncertaintyError::TooFewVectors {
            count: embeddings.len(),
        });
    }
    let k = k.max(1).min(embeddings.len() - 1);
    let mut per_vector = Vec::with_capacity(embeddings.len());
    for (i, v) in embeddings.iter().enumerate() {
        let mut distances: Vec<f64> = Vec::with_capacity(embeddings.len() - 1);
        for (j, other) in embeddings.iter().enumerate() {
            if i != j {
                distances.push(cosine_distance(v, other)?);
            }
        }
        distances.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
        per_vector.push(distances[..k].iter().sum::<f64>() / k as f64);
    }
    Ok(mean_and_population_std(&per_vector))
}

/// Size-weighted sum of cosine distances from each head-word cluster to the
/// largest one: `Σ_{g ≠ g*} (|g|/N) · d(head_g, head_g*)` with `N` the total
/// label count and `g*` the largest cluster (ties: the one ordered first).
/// Cluster sizes include fallback-assigned labels.
pub fn weighted_subgroup_distance(
    clustering: &HeadWordClustering,
    head_vectors: &[Vector],
) -> Result<f64, UncertaintyError> {
    if clustering.clusters.is_empty() {
        return Err(UncertaintyError::NoClusters);
    }
    if head_vectors.len() != clustering.clusters.len() {
        return Err(UncertaintyError::HeadVectorMismatch {
            vectors: head_vectors.len(),
            clusters: clustering.clusters.len(),
        });
    }
    let sizes: Vec<usize> = (0..clustering.clusters.len())
        .map(|c| clustering.effective_size(c))
        .collect();
    let dominant = sizes
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .expect("clusters are non-empty");
    let total = clustering.total_labels as f64;
    let mut sum = 0.0;
    for (idx, size) in sizes.iter().enumerate() {
        if idx == dominant {
            continue;
        }
        let d = cosine_distance(&head_vectors[idx], &head_vectors[dominant])?;
        sum += (*size as f64 / total) * d;
    }
    Ok(sum)
}

/// Scores for one stimulus. Sub-scores that could not be computed are absent
/// rather than fatal; the accompanying [`ScoredStimulus::warnings`] say why.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyScores {
    pub hcu_bits: f64,
    pub centroid_mean: Option<f64>,
    pub centroid_std: Option<f64>,
    pub knn_mean: Option<f64>,
    pub knn_std: Option<f64>,
    pub weighted_subgroup: Option<f64>,
    pub colocation_radius: Option<f64>,
    pub strategy: Strategy,
    pub source: EmbeddingSource,
}

/// Scoring parameters plus the optional co-location matrix.
pub struct ScoreConfig<'a> {
    pub strategy: Strategy,
    pub knn_k: usize,
    pub colocation: Option<&'a ColocationMatrix>,
}

impl Default for ScoreConfig<'_> {
    fn default() -> Self {
        ScoreConfig {
            strategy: Strategy::Average,
            knn_k: 3,
            colocation: None,
        }
    }
}

/// Everything produced while scoring one stimulus.
#[derive(Debug, Clone)]
pub struct ScoredStimulus {
    pub scores: UncertaintyScores,
    pub clustering: HeadWordClustering,
    pub labels: Vec<NormalizedLabel>,
    /// Centroid of the per-label embeddings, when any label was embeddable.
    pub centroid: Option<Vector>,
    pub warnings: Vec<String>,
}

/// Runs normalization, clustering, the chosen embedding strategy, and every
/// metric for one stimulus's labels. Group proportions for the entropy come
/// from cluster sizes; fallback assignments count toward their cluster and
/// unassigned labels are singleton groups.
pub fn score_stimulus(
    label_texts: &[String],
    table: &EmbeddingTable,
    lex: &LexicalDatabase,
    stemmer: &Stemmer,
    config: &ScoreConfig,
) -> Result<ScoredStimulus, UncertaintyError> {
    if label_texts.is_empty() {
        return Err(UncertaintyError::NoLabels);
    }
    // identical label texts normalize identically
    let mut memo: std::collections::HashMap<&str, NormalizedLabel> =
        std::collections::HashMap::new();
    let labels: Vec<NormalizedLabel> = label_texts
        .iter()
        .map(|text| {
            memo.entry(text.as_str())
                .or_insert_with(|| normalize_label(text, table, lex))
                .clone()
        })
        .collect();

    let mut warnings = Vec::new();
    let clustering =
        cluster_headwords(&labels, lex, stemmer).map_err(|_| UncertaintyError::NoLabels)?;
    let proportions = GroupProportions::from_counts(&clustering.group_sizes())
        .expect("cluster sizes are positive and partition the labels");
    let hcu_bits = compute_hcu(&proportions);

    let embedded =
        embed_stimulus_clustered(&labels, table, lex, config.strategy, Some(&clustering));
    let (vectors, stimulus_centroid) = match embedded {
        Ok(e) => {
            let vectors = e.vectors();
            (vectors, Some(e.centroid))
        }
        Err(e) => {
            warnings.push(format!("embedding: {e}"));
            (Vec::new(), None)
        }
    };

    let mut centroid_stats = None;
    let mut knn_stats = None;
    if !vectors.is_empty() {
        match centroid_radius(&vectors) {
            Ok(stats) => centroid_stats = Some(stats),
            Err(e) => warnings.push(format!("centroid radius: {e}")),
        }
        match knn_radius(&vectors, config.knn_k) {
            Ok(stats) => knn_stats = Some(stats),
            Err(e) => warnings.push(format!("knn radius: {e}")),
        }
    }

    let weighted_subgroup = {
        let head_vectors: Option<Vec<Vector>> = clustering
            .clusters
            .iter()
            .map(|c| head_word_vector(&c.head_word, table, lex))
            .collect();
        match head_vectors {
            Some(heads) if !clustering.clusters.is_empty() => {
                match weighted_subgroup_distance(&clustering, &heads) {
                    Ok(value) => Some(value),
                    Err(e) => {
                        warnings.push(format!("weighted subgroup distance: {e}"));
                        None
                    }
                }
            }
            Some(_) => {
                warnings.push("weighted subgroup distance: no head-word clusters".to_string());
                None
            }
            None => {
                warnings.push(
                    "weighted subgroup distance: head-word vector missing from vocabulary"
                        .to_string(),
                );
                None
            }
        }
    };

    let colocation_radius = config
        .colocation
        .and_then(|matrix| crate::colocation::colocation_radius(&labels, matrix))
        .map(|stats| stats.mean);

    Ok(ScoredStimulus {
        scores: UncertaintyScores {
            hcu_bits,
            centroid_mean: centroid_stats.map(|s| s.mean),
            centroid_std: centroid_stats.map(|s| s.std),
            knn_mean: knn_stats.map(|s| s.mean),
            knn_std: knn_stats.map(|s| s.std),
            weighted_subgroup,
            colocation_radius,
            strategy: config.strategy,
            source: table.source(),
        },
        clustering,
        labels,
        centroid: stimulus_centroid,
        warnings,
    })
}

pub const SCORES_CSV_HEADER: &str = "sound_id,strategy,embedding_source,hcu_bits,centroid_mean,\
centroid_std,knn_mean,knn_std,weighted_subgroup,colocation_radius";

/// Writes score rows in the export CSV layout; absent values are empty.
pub fn write_scores_csv<W: Write>(
    writer: &mut W,
    rows: &[(String, UncertaintyScores)],
) -> io::Result<()> {
    writeln!(writer, "{SCORES_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (sound_id, s) in rows {
        writeln!(
            writer,
            "{sound_id},{},{},{},{},{},{},{},{},{}",
            s.strategy.as_str(),
            s.source.as_str(),
            s.hcu_bits,
            opt(s.centroid_mean),
            opt(s.centroid_std),
            opt(s.knn_mean),
            opt(s.knn_std),
            opt(s.weighted_subgroup),
            opt(s.colocation_radius),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingSource;
    use std::path::PathBuf;

    fn lex() -> &'static LexicalDatabase {
        use std::sync::OnceLock;
        static DB: OnceLock<LexicalDatabase> = OnceLock::new();
        DB.get_or_init(|| {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/wordnet");
            LexicalDatabase::load(&dir).unwrap()
        })
    }

    fn vec2(x: f64, y: f64) -> Vector {
        Vector::new(vec![x, y]).unwrap()
    }

    fn unit(angle_deg: f64) -> Vector {
        let r = angle_deg.to_radians();
        vec2(r.cos(), r.sin())
    }

    #[test]
    fn entropy_examples() {
        let single = GroupProportions::new(vec![1.0]).unwrap();
        assert_eq!(compute_hcu(&single), 0.0);

        let uniform = GroupProportions::new(vec![0.25; 4]).unwrap();
        assert_eq!(compute_hcu(&uniform), 2.0);

        let skewed = GroupProportions::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!((compute_hcu(&skewed) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_bad_proportions() {
        assert!(matches!(
            GroupProportions::new(vec![0.5, 0.4]),
            Err(UncertaintyError::BadProportions { .. })
        ));
        assert!(matches!(
            GroupProportions::new(vec![]),
            Err(UncertaintyError::EmptyGroups)
        ));
        assert!(GroupProportions::from_counts(&[3, 0]).is_err());
    }

    #[test]
    fn entropy_is_permutation_exact_and_bounded() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..30)).collect();
            let groups = GroupProportions::from_counts(&counts).unwrap();
            let h = compute_hcu(&groups);
            assert!(h >= 0.0);
            assert!(h <= (n as f64).log2() + 1e-12);
            let mut reversed = groups.as_slice().to_vec();
            reversed.reverse();
            let permuted = GroupProportions::new(reversed).unwrap();
            assert_eq!(h.to_bits(), compute_hcu(&permuted).to_bits());
        }
    }

    #[test]
    fn merging_groups_never_increases_entropy() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..20)).collect();
            let h = compute_hcu(&GroupProportions::from_counts(&counts).unwrap());
            let mut merged = counts.clone();
            let b = merged.pop().unwrap();
            let a = rng.gen_range(0..merged.len());
            merged[a] += b;
            let h_merged = compute_hcu(&GroupProportions::from_counts(&merged).unwrap());
            assert!(h_merged <= h + 1e-12, "{counts:?}: {h_merged} > {h}");
        }
    }

    #[test]
    fn centroid_radius_degenerate_and_symmetric_cases() {
        let identical = vec![vec2(0.6, 0.8); 4];
        let stats = centroid_radius(&identical).unwrap();
        assert_eq!(stats.mean, 0.0);
        assert_eq!(stats.std, 0.0);

        // two vectors sit symmetrically around their centroid
        let two = vec![unit(10.0), unit(50.0)];
        let stats = centroid_radius(&two).unwrap();
        assert!(stats.std < 1e-12, "std {}", stats.std);

        assert!(matches!(
            centroid_radius(&[]),
            Err(UncertaintyError::EmptyVectors)
        ));
        let opposed = vec![vec2(1.0, 0.0), vec2(-1.0, 0.0)];
        assert!(matches!(
            centroid_radius(&opposed),
            Err(UncertaintyError::DegenerateCentroid)
        ));
    }

    #[test]
    fn knn_radius_clamps_k_and_handles_identical_vectors() {
        let identical = vec![vec2(0.6, 0.8); 5];
        let stats = knn_radius(&identical, 3).unwrap();
        assert_eq!(stats.mean, 0.0);
        assert_eq!(stats.std, 0.0);

        // three vectors with k = 3 clamps to k = 2; brute force by hand
        let vs = vec![unit(0.0), unit(30.0), unit(90.0)];
        let stats = knn_radius(&vs, 3).unwrap();
        let d = |a: &Vector, b: &Vector| cosine_distance(a, b).unwrap();
        let per = [
            (d(&vs[0], &vs[1]) + d(&vs[0], &vs[2])) / 2.0,
            (d(&vs[1], &vs[0]) + d(&vs[1], &vs[2])) / 2.0,
            (d(&vs[2], &vs[0]) + d(&vs[2], &vs[1])) / 2.0,
        ];
        let mean = per.iter().sum::<f64>() / 3.0;
        assert!((stats.mean - mean).abs() < 1e-12);

        assert!(matches!(
            knn_radius(&vs[..1], 3),
            Err(UncertaintyError::TooFewVectors { count: 1 })
        ));
    }

    #[test]
    fn knn_dampens_an_outlier_relative_to_centroid_radius() {
        // nine vectors spread over [0°, 16°] plus one at 30°
        let mut vs: Vec<Vector> = (0..9).map(|i| unit(2.0 * i as f64)).collect();
        vs.push(unit(30.0));
        let knn = knn_radius(&vs, 3).unwrap();
        let cent = centroid_radius(&vs).unwrap();
        assert!(
            knn.mean < cent.mean,
            "knn {} should fall below centroid {}",
            knn.mean,
            cent.mean
        );
    }

    #[test]
    fn weighted_subgroup_examples() {
        let labels: Vec<String> = vec!["dog barking".into(), "a dog barks".into()];
        let table = fixture_table();
        let normalized: Vec<_> = labels
            .iter()
            .map(|t| normalize_label(t, &table, lex()))
            .collect();
        let clustering = cluster_headwords(&normalized, lex(), &Stemmer::lancaster()).unwrap();
        assert_eq!(clustering.clusters.len(), 1);
        let heads = vec![unit(0.0)];
        assert_eq!(
            weighted_subgroup_distance(&clustering, &heads).unwrap(),
            0.0,
            "single cluster has no other subgroups"
        );
    }

    #[test]
    fn weighted_subgroup_two_equal_clusters() {
        // synthetic clustering: two clusters of five labels each
        let clustering = HeadWordClustering {
            clusters: vec![
                crate::labels::Cluster {
                    stem: "bark".into(),
                    head_word: "barking".into(),
                    members: (0..5).collect(),
                },
                crate::labels::Cluster {
                    stem: "thund".into(),
                    head_word: "thunder".into(),
                    members: (5..10).collect(),
                },
            ],
            fallback_assignments: Default::default(),
            unassigned: Default::default(),
            total_labels: 10,
        };
        let heads = vec![unit(0.0), unit(60.0)];
        let d = cosine_distance(&heads[0], &heads[1]).unwrap();
        let got = weighted_subgroup_distance(&clustering, &heads).unwrap();
        assert!((got - 0.5 * d).abs() < 1e-12, "tie picks the first cluster");
    }

    #[test]
    fn weighted_subgroup_three_cluster_hand_sum() {
        let clustering = HeadWordClustering {
            clusters: vec![
                crate::labels::Cluster {
                    stem: "a".into(),
                    head_word: "a".into(),
                    members: (0..5).collect(),
                },
                crate::labels::Cluster {
                    stem: "b".into(),
                    head_word: "b".into(),
                    members: (5..8).collect(),
                },
                crate::labels::Cluster {
                    stem: "c".into(),
                    head_word: "c".into(),
                    members: (8..10).collect(),
                },
            ],
            fallback_assignments: Default::default(),
            unassigned: Default::default(),
            total_labels: 10,
        };
        let heads = vec![unit(0.0), unit(45.0), unit(120.0)];
        let d = |a: usize, b: usize| cosine_distance(&heads[a], &heads[b]).unwrap();
        let expect = (3.0 / 10.0) * d(1, 0) + (2.0 / 10.0) * d(2, 0);
        let got = weighted_subgroup_distance(&clustering, &heads).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    fn fixture_table() -> EmbeddingTable {
        let entries = vec![
            ("dog", vec![1.0, 0.0, 0.05]),
            ("bark", vec![0.9, 0.1, 0.0]),
            ("barking", vec![0.92, 0.1, 0.0]),
            ("thunder", vec![0.0, 1.0, 0.0]),
            ("storm", vec![0.1, 0.9, 0.0]),
            ("water", vec![0.0, 0.0, 1.0]),
            ("drip", vec![0.0, 0.1, 0.9]),
            ("a", vec![0.3, 0.3, 0.3]),
        ];
        EmbeddingTable::from_entries(
            3,
            EmbeddingSource::Other,
            entries.into_iter().map(|(t, v)| (t.to_string(), v)),
        )
        .unwrap()
    }

    #[test]
    fn unanimous_stimulus_scores_zero() {
        let labels = vec!["dog barking".to_string(); 30];
        let scored = score_stimulus(
            &labels,
            &fixture_table(),
            lex(),
            &Stemmer::lancaster(),
            &ScoreConfig::default(),
        )
        .unwrap();
        assert_eq!(scored.scores.hcu_bits, 0.0);
        // the mean of 30 identical vectors carries ~1e-16 of float residue
        assert!(scored.scores.centroid_mean.unwrap() < 1e-12);
        assert!(scored.scores.centroid_std.unwrap() < 1e-12);
        assert!(scored.scores.knn_mean.unwrap() < 1e-12);
        assert_eq!(scored.scores.weighted_subgroup, Some(0.0));
    }

    #[test]
    fn labels_sharing_one_stem_form_one_group_with_zero_entropy() {
        // different surface forms, shared "dog" stem
        let labels = vec![
            "dog barking".to_string(),
            "dogs growling".to_string(),
            "a dog barks".to_string(),
        ];
        let scored = score_stimulus(
            &labels,
            &fixture_table(),
            lex(),
            &Stemmer::lancaster(),
            &ScoreConfig::default(),
        )
        .unwrap();
        assert_eq!(scored.clustering.clusters.len(), 1);
        assert_eq!(scored.clustering.group_sizes(), vec![3]);
        assert_eq!(scored.scores.hcu_bits, 0.0);
    }

    #[test]
    fn two_equal_groups_score_one_bit() {
        let mut labels = vec!["dog barking".to_string(); 15];
        labels.extend(vec!["thunder storm".to_string(); 15]);
        let scored = score_stimulus(
            &labels,
            &fixture_table(),
            lex(),
            &Stemmer::lancaster(),
            &ScoreConfig::default(),
        )
        .unwrap();
        assert_eq!(scored.scores.hcu_bits, 1.0);
    }

    #[test]
    fn scrambled_labels_score_higher_than_agreement() {
        let agreement = vec!["dog barking".to_string(); 6];
        let scrambled = vec![
            "dog barking".to_string(),
            "thunder storm".to_string(),
            "water dripping".to_string(),
            "dog barking".to_string(),
            "thunder storm".to_string(),
            "water dripping".to_string(),
        ];
        let cfg = ScoreConfig::default();
        let table = fixture_table();
        let stemmer = Stemmer::lancaster();
        let a = score_stimulus(&agreement, &table, lex(), &stemmer, &cfg).unwrap();
        let b = score_stimulus(&scrambled, &table, lex(), &stemmer, &cfg).unwrap();
        assert!(b.scores.hcu_bits > a.scores.hcu_bits);
        assert!(b.scores.centroid_mean.unwrap() > a.scores.centroid_mean.unwrap());
    }

    #[test]
    fn scores_csv_roundtrip_shape() {
        let rows = vec![(
            "s1".to_string(),
            UncertaintyScores {
                hcu_bits: 1.5,
                centroid_mean: Some(0.25),
                centroid_std: Some(0.1),
                knn_mean: None,
                knn_std: None,
                weighted_subgroup: Some(0.0),
                colocation_radius: None,
                strategy: Strategy::Average,
                source: EmbeddingSource::Word2vec,
            },
        )];
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SCORES_CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "s1,average,word2vec,1.5,0.25,0.1,,,0,");
    }

    /// Radius metrics are invariant under label order and per-vector scaling.
    #[test]
    fn radius_metrics_are_order_and_scale_invariant() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let vectors: Vec<Vector> = (0..8)
            .map(|_| {
                Vector::new((0..4).map(|_| rng.gen_range(0.1..1.0)).collect()).unwrap()
            })
            .collect();
        let base_c = centroid_radius(&vectors).unwrap();
        let base_k = knn_radius(&vectors, 3).unwrap();

        let mut reversed = vectors.clone();
        reversed.reverse();
        let rev_c = centroid_radius(&reversed).unwrap();
        let rev_k = knn_radius(&reversed, 3).unwrap();
        assert!((base_c.mean - rev_c.mean).abs() < 1e-12);
        assert!((base_k.mean - rev_k.mean).abs() < 1e-12);

        // centroid_radius is NOT generally scale invariant (the centroid
        // moves), but knn per-vector distances are; check the knn metric
        let scaled: Vec<Vector> = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let s = 1.0 + i as f64;
                Vector::new(v.components().iter().map(|c| c * s).collect()).unwrap()
            })
            .collect();
        let scaled_k = knn_radius(&scaled, 3).unwrap();
        assert!((base_k.mean - scaled_k.mean).abs() < 1e-9);
    }
}
