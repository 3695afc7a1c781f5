//! Free-text label normalization, out-of-vocabulary repair, embedding
//! strategies, and greedy stemmed head-word clustering.
//!
//! A raw label is tokenized on non-alphanumeric boundaries, lowercased, and
//! classified against the lexicon (which also reduces inflected forms to
//! their lemma). Tokens whose lemma is missing from the embedding vocabulary
//! go through the repair chain: spelling correction within edit distance 2
//! against the vocabulary, then the first in-vocabulary lexicon synonym, then
//! a logged drop. Every divergence between raw text and embedded tokens is
//! recorded in the repair log.
//!
//! Three embedding strategies turn a normalized label into one vector:
//! averaging all content tokens, the first-or-last noun/verb pair, and the
//! head word of the label's stem cluster. Head-word clusters come from a
//! greedy search over heavily stemmed content tokens; labels left over are
//! attached to the cluster whose head word is nearest by lexicon path length,
//! and labels with no lexicon route stay unassigned as singleton groups.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::embedding::{centroid, EmbeddingTable, Vector};
use crate::stemmer::Stemmer;
use crate::wordnet::{LexicalDatabase, PosClass};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("empty label list")]
    EmptyLabelList,
    #[error("no label is embeddable under strategy {strategy}")]
    NoEmbeddableLabels { strategy: &'static str },
}

/// Label-to-vector strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    /// Mean of all content-token vectors.
    Average,
    /// Mean of the first noun's and first verb's vectors.
    FirstNounVerb,
    /// Mean of the last noun's and last verb's vectors.
    LastNounVerb,
    /// The label's cluster head-word vector.
    HeadWord,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Average,
        Strategy::FirstNounVerb,
        Strategy::LastNounVerb,
        Strategy::HeadWord,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Average => "average",
            Strategy::FirstNounVerb => "first-noun-verb",
            Strategy::LastNounVerb => "last-noun-verb",
            Strategy::HeadWord => "head-word",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" => Ok(Strategy::Average),
            "first-noun-verb" => Ok(Strategy::FirstNounVerb),
            "last-noun-verb" => Ok(Strategy::LastNounVerb),
            "head-word" => Ok(Strategy::HeadWord),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairKind {
    SpellCorrected,
    SynonymSubstituted,
    Dropped,
}

impl RepairKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RepairKind::SpellCorrected => "spell-corrected",
            RepairKind::SynonymSubstituted => "synonym-substituted",
            RepairKind::Dropped => "dropped",
        }
    }
}

/// One entry in the out-of-vocabulary repair log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub token: String,
    pub kind: RepairKind,
    pub replacement: Option<String>,
}

/// One token of a normalized label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelToken {
    /// The raw alphanumeric run as it appeared.
    pub surface: String,
    pub lowercase: String,
    /// The form used for embedding lookups: the lexicon lemma, possibly
    /// replaced by the repair chain.
    pub embed_key: String,
    pub pos: PosClass,
    /// True when the repair chain exhausted its options for this token.
    pub dropped: bool,
}

/// A tokenized, classified, and repaired label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedLabel {
    pub original_text: String,
    pub tokens: Vec<LabelToken>,
    pub repairs: Vec<Repair>,
}

impl NormalizedLabel {
    /// Tokens carrying label content (nouns, verbs, adjectives, adverbs), in
    /// token order.
    pub fn content_tokens(&self) -> impl Iterator<Item = &LabelToken> {
        self.tokens.iter().filter(|t| t.pos.is_content())
    }

    /// First content token with noun class, the label's representative for
    /// co-location lookups.
    pub fn first_noun(&self) -> Option<&LabelToken> {
        self.content_tokens().find(|t| t.pos == PosClass::Noun)
    }
}

/// Optimal-string-alignment edit distance: insertions, deletions,
/// substitutions, and adjacent transpositions each cost one.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    if n == 0 {
        return m;
    }
    if m == 0 {
        return n;
    }
    let mut rows: Vec<Vec<usize>> = vec![vec![0; m + 1]; n + 1];
    for (i, row) in rows.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in rows[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (rows[i - 1][j] + 1)
                .min(rows[i][j - 1] + 1)
                .min(rows[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(rows[i - 2][j - 2] + 1);
            }
            rows[i][j] = best;
        }
    }
    rows[n][m]
}

/// In-vocabulary token within edit distance ≤ 2 of `token`; smallest distance
/// first, ties broken lexicographically. `None` when nothing is close enough.
fn spell_correct(token: &str, table: &EmbeddingTable) -> Option<String> {
    let token_len = token.chars().count();
    let mut best: Option<(usize, &str)> = None;
    for candidate in table.tokens() {
        let cand_len = candidate.chars().count();
        if cand_len.abs_diff(token_len) > 2 {
            continue;
        }
        let d = edit_distance(token, candidate);
        if d > 2 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bt)) => d < bd || (d == bd && candidate < bt),
        };
        if better {
            best = Some((d, candidate));
        }
    }
    best.map(|(_, t)| t.to_string())
}

/// Tokenizes on non-alphanumeric boundaries, classifies each token against
/// the lexicon, and repairs tokens absent from the embedding vocabulary.
/// Labels whose every token drops out remain valid with no content tokens.
pub fn normalize_label(
    text: &str,
    table: &EmbeddingTable,
    lex: &LexicalDatabase,
) -> NormalizedLabel {
    let mut tokens = Vec::new();
    let mut repairs = Vec::new();
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        if run.is_empty() {
            continue;
        }
        let surface = run.to_string();
        let lowercase = run.to_lowercase();
        let (mut pos, lemma) = lex.classify(&lowercase);
        let mut dropped = false;
        let embed_key = if table.contains(&lemma) {
            lemma
        } else if table.contains(&lowercase) {
            lowercase.clone()
        } else if let Some(corrected) = spell_correct(&lowercase, table) {
            let (corrected_pos, corrected_lemma) = lex.classify(&corrected);
            pos = corrected_pos;
            repairs.push(Repair {
                token: lowercase.clone(),
                kind: RepairKind::SpellCorrected,
                replacement: Some(corrected.clone()),
            });
            // the correction is in-vocabulary; prefer its lemma when that is too
            if table.contains(&corrected_lemma) {
                corrected_lemma
            } else {
                corrected
            }
        } else if let Some(synonym) = lex
            .synonyms(&lowercase)
            .into_iter()
            .find(|s| table.contains(s))
        {
            let (syn_pos, _) = lex.classify(&synonym);
            pos = syn_pos;
            repairs.push(Repair {
                token: lowercase.clone(),
                kind: RepairKind::SynonymSubstituted,
                replacement: Some(synonym.clone()),
            });
            synonym
        } else {
            dropped = true;
            repairs.push(Repair {
                token: lowercase.clone(),
                kind: RepairKind::Dropped,
                replacement: None,
            });
            lemma
        };
        tokens.push(LabelToken {
            surface,
            lowercase,
            embed_key,
            pos,
            dropped,
        });
    }
    NormalizedLabel {
        original_text: text.to_string(),
        tokens,
        repairs,
    }
}

/// A label embedded under one strategy. `vector` is `None` when the strategy
/// found nothing embeddable in the label.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedLabel {
    pub vector: Option<Vector>,
    pub strategy: Strategy,
}

impl EmbeddedLabel {
    pub fn embeddable(&self) -> bool {
        self.vector.is_some()
    }
}

fn token_vector(token: &LabelToken, table: &EmbeddingTable) -> Option<Vector> {
    if token.dropped {
        return None;
    }
    table.lookup(&token.embed_key)
}

/// Mean of the vectors of all in-vocabulary content tokens.
pub fn embed_average(label: &NormalizedLabel, table: &EmbeddingTable) -> EmbeddedLabel {
    let vectors: Vec<Vector> = label
        .content_tokens()
        .filter_map(|t| token_vector(t, table))
        .collect();
    EmbeddedLabel {
        vector: centroid(&vectors).ok(),
        strategy: Strategy::Average,
    }
}

/// Which occurrence the noun/verb strategy selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    First,
    Last,
}

/// Mean of the selected noun's and verb's vectors; either alone when only one
/// exists, unembeddable when neither does.
pub fn embed_noun_verb(
    label: &NormalizedLabel,
    table: &EmbeddingTable,
    position: Position,
) -> EmbeddedLabel {
    let strategy = match position {
        Position::First => Strategy::FirstNounVerb,
        Position::Last => Strategy::LastNounVerb,
    };
    let pick = |pos: PosClass| -> Option<&LabelToken> {
        let mut found = None;
        for token in label.content_tokens().filter(|t| t.pos == pos) {
            found = Some(token);
            if position == Position::First {
                break;
            }
        }
        found
    };
    let vectors: Vec<Vector> = [pick(PosClass::Noun), pick(PosClass::Verb)]
        .into_iter()
        .flatten()
        .filter_map(|t| token_vector(t, table))
        .collect();
    EmbeddedLabel {
        vector: centroid(&vectors).ok(),
        strategy,
    }
}

/// A stem-anchored label group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub stem: String,
    /// Most frequent surface form among the tokens producing the stem.
    pub head_word: String,
    /// Labels containing a content token with this stem.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FallbackAssignment {
    pub cluster: usize,
    pub path_length: u32,
}

/// Partition of a stimulus's labels into stem clusters, path-length fallback
/// assignments, and unassigned singletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadWordClustering {
    /// Ordered by descending member count, ties lexicographically by stem.
    pub clusters: Vec<Cluster>,
    pub fallback_assignments: BTreeMap<usize, FallbackAssignment>,
    pub unassigned: BTreeSet<usize>,
    pub total_labels: usize,
}

impl HeadWordClustering {
    /// Cluster index a label belongs to, via membership or fallback.
    pub fn cluster_of(&self, label: usize) -> Option<usize> {
        if let Some(f) = self.fallback_assignments.get(&label) {
            return Some(f.cluster);
        }
        self.clusters
            .iter()
            .position(|c| c.members.binary_search(&label).is_ok())
    }

    /// Cluster size including fallback members.
    pub fn effective_size(&self, cluster: usize) -> usize {
        self.clusters[cluster].members.len()
            + self
                .fallback_assignments
                .values()
                .filter(|f| f.cluster == cluster)
                .count()
    }

    /// Group sizes feeding the entropy computation: each cluster (with its
    /// fallback members) is a group and each unassigned label is a singleton.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = (0..self.clusters.len())
            .map(|c| self.effective_size(c))
            .collect();
        sizes.extend(std::iter::repeat_n(1, self.unassigned.len()));
        sizes
    }

    /// The partition as label-index sets, for order-invariance checks.
    pub fn partition(&self) -> Vec<BTreeSet<usize>> {
        let mut groups: Vec<BTreeSet<usize>> = self
            .clusters
            .iter()
            .map(|c| c.members.iter().copied().collect())
            .collect();
        for (label, f) in &self.fallback_assignments {
            groups[f.cluster].insert(*label);
        }
        groups.extend(self.unassigned.iter().map(|l| BTreeSet::from([*l])));
        groups
    }
}

/// Greedy stemmed head-word clustering.
///
/// Repeatedly picks the stem shared by the most unassigned labels (ties:
/// lexicographically smallest stem), forms a cluster of every unassigned
/// label containing it, and stops when no stem is shared by at least two
/// labels. Remaining labels fall back to the cluster whose head word is
/// nearest by lexicon path length from the label's first content token; with
/// no finite path anywhere they stay unassigned.
pub fn cluster_headwords(
    labels: &[NormalizedLabel],
    lex: &LexicalDatabase,
    stemmer: &Stemmer,
) -> Result<HeadWordClustering, PipelineError> {
    if labels.is_empty() {
        return Err(PipelineError::EmptyLabelList);
    }
    // per label: stem → surfaces that produced it (repaired tokens count
    // under their replacement)
    let label_stems: Vec<BTreeMap<String, Vec<String>>> = labels
        .iter()
        .map(|label| {
            let mut stems: BTreeMap<String, Vec<String>> = BTreeMap::new();
            for token in label.content_tokens() {
                let stem = stemmer.stem(&token.embed_key);
                let surface = match label
                    .repairs
                    .iter()
                    .find(|r| r.token == token.lowercase && r.replacement.is_some())
                {
                    Some(repair) => repair.replacement.clone().expect("checked is_some"),
                    None => token.lowercase.clone(),
                };
                stems.entry(stem).or_default().push(surface);
            }
            stems
        })
        .collect();

    let mut unassigned: BTreeSet<usize> = (0..labels.len()).collect();
    let mut clusters: Vec<Cluster> = Vec::new();
    loop {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for label in &unassigned {
            for stem in label_stems[*label].keys() {
                *counts.entry(stem.as_str()).or_default() += 1;
            }
        }
        // maximum count; BTreeMap order makes the lexicographically smallest
        // stem win ties
        let best = counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (stem, count)| match best {
                Some((_, best_count)) if *count <= best_count => best,
                _ => Some((stem, *count)),
            });
        let Some((stem, count)) = best else { break };
        if count < 2 {
            break;
        }
        let stem = stem.to_string();
        let members: Vec<usize> = unassigned
            .iter()
            .copied()
            .filter(|l| label_stems[*l].contains_key(&stem))
            .collect();
        let mut surface_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for member in &members {
            for surface in &label_stems[*member][&stem] {
                *surface_counts.entry(surface.as_str()).or_default() += 1;
            }
        }
        let head_word = surface_counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (surface, count)| match best {
                Some((_, best_count)) if *count <= best_count => best,
                _ => Some((surface, *count)),
            })
            .map(|(surface, _)| surface.to_string())
            .expect("cluster has at least two member tokens");
        for member in &members {
            unassigned.remove(member);
        }
        clusters.push(Cluster {
            stem,
            head_word,
            members,
        });
    }
    // construction order is already (descending count, lexicographic stem);
    // re-sorting keeps the invariant explicit
    clusters.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.stem.cmp(&b.stem))
    });

    let mut fallback_assignments = BTreeMap::new();
    let mut still_unassigned = BTreeSet::new();
    for label in unassigned {
        let representative = labels[label]
            .content_tokens()
            .next()
            .map(|t| t.embed_key.clone());
        let mut best: Option<(u32, usize)> = None;
        if let Some(rep) = representative {
            for (idx, cluster) in clusters.iter().enumerate() {
                if let Some(d) = lex.path_length(&rep, &cluster.head_word) {
                    let better = match best {
                        None => true,
                        Some((bd, bi)) => d < bd || (d == bd && idx < bi),
                    };
                    if better {
                        best = Some((d, idx));
                    }
                }
            }
        }
        match best {
            Some((path_length, cluster)) => {
                fallback_assignments.insert(
                    label,
                    FallbackAssignment {
                        cluster,
                        path_length,
                    },
                );
            }
            None => {
                still_unassigned.insert(label);
            }
        }
    }

    Ok(HeadWordClustering {
        clusters,
        fallback_assignments,
        unassigned: still_unassigned,
        total_labels: labels.len(),
    })
}

/// Looks up a head word's vector, falling back to its lexicon lemma when the
/// surface form is out of vocabulary.
pub fn head_word_vector(
    head_word: &str,
    table: &EmbeddingTable,
    lex: &LexicalDatabase,
) -> Option<Vector> {
    if let Some(v) = table.lookup(head_word) {
        return Some(v);
    }
    let (_, lemma) = lex.classify(head_word);
    table.lookup(&lemma)
}

/// Per-label embeddings plus the centroid over the embeddable ones.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusEmbedding {
    pub per_label: Vec<EmbeddedLabel>,
    pub centroid: Vector,
}

impl StimulusEmbedding {
    /// Vectors of the embeddable labels, in label order.
    pub fn vectors(&self) -> Vec<Vector> {
        self.per_label
            .iter()
            .filter_map(|l| l.vector.clone())
            .collect()
    }
}

/// Embeds every label of a stimulus under one strategy. The head-word
/// strategy derives its clustering internally; use
/// [`embed_stimulus_clustered`] to reuse one already computed.
pub fn embed_stimulus(
    labels: &[NormalizedLabel],
    table: &EmbeddingTable,
    lex: &LexicalDatabase,
    stemmer: &Stemmer,
    strategy: Strategy,
) -> Result<StimulusEmbedding, PipelineError> {
    let clustering = if strategy == Strategy::HeadWord {
        Some(cluster_headwords(labels, lex, stemmer)?)
    } else {
        if labels.is_empty() {
            return Err(PipelineError::EmptyLabelList);
        }
        None
    };
    embed_stimulus_clustered(labels, table, lex, strategy, clustering.as_ref())
}

/// As [`embed_stimulus`], with the head-word clustering supplied by the
/// caller (ignored by the other strategies).
pub fn embed_stimulus_clustered(
    labels: &[NormalizedLabel],
    table: &EmbeddingTable,
    lex: &LexicalDatabase,
    strategy: Strategy,
    clustering: Option<&HeadWordClustering>,
) -> Result<StimulusEmbedding, PipelineError> {
    if labels.is_empty() {
        return Err(PipelineError::EmptyLabelList);
    }
    let per_label: Vec<EmbeddedLabel> = match strategy {
        Strategy::Average => labels.iter().map(|l| embed_average(l, table)).collect(),
        Strategy::FirstNounVerb => labels
            .iter()
            .map(|l| embed_noun_verb(l, table, Position::First))
            .collect(),
        Strategy::LastNounVerb => labels
            .iter()
            .map(|l| embed_noun_verb(l, table, Position::Last))
            .collect(),
        Strategy::HeadWord => {
            let clustering =
                clustering.expect("head-word strategy requires a clustering");
            labels
                .iter()
                .enumerate()
                .map(|(idx, label)| {
                    let vector = match clustering.cluster_of(idx) {
                        Some(c) => {
                            head_word_vector(&clustering.clusters[c].head_word, table, lex)
                        }
                        // unassigned singleton: the label stands for itself
                        None => label
                            .content_tokens()
                            .find_map(|t| token_vector(t, table)),
                    };
                    EmbeddedLabel {
                        vector,
                        strategy: Strategy::HeadWord,
                    }
                })
                .collect()
        }
    };
    let vectors: Vec<Vector> = per_label.iter().filter_map(|l| l.vector.clone()).collect();
    let centroid = centroid(&vectors).map_err(|_| PipelineError::NoEmbeddableLabels {
        strategy: strategy.as_str(),
    })?;
    Ok(StimulusEmbedding {
        per_label,
        centroid,
    })
}

/// Writes repair-log rows as TSV:
/// `sound_id\tlabel_index\ttoken\trepair_kind\treplacement`.
pub fn write_repair_log<W: Write>(
    writer: &mut W,
    rows: &[(String, usize, Repair)],
) -> io::Result<()> {
    for (sound_id, label_index, repair) in rows {
        writeln!(
            writer,
            "{sound_id}\t{label_index}\t{}\t{}\t{}",
            repair.token,
            repair.kind.as_str(),
            repair.replacement.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}
