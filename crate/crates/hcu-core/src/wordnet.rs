//! Offline lexical database in WordNet 3.0 distribution format.
//!
//! Loads `index.<pos>` / `data.<pos>` pairs plus the `<pos>.exc` exception
//! lists for the four open word classes, and answers part-of-speech
//! membership, synonym, and hypernym-path-length queries. Inflected forms are
//! resolved through the exception lists and the standard detachment suffix
//! rules, so `barks` and `barking` both reach the `bark` entry.
//!
//! The database is immutable after load; all queries are pure.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("hypernym links for {pos:?} contain a cycle through synset {offset:08}")]
    CyclicHypernyms { pos: PosClass, offset: u64 },
    #[error("index lemma {lemma:?} ({pos:?}) references synset {offset:08} that does not list it")]
    InconsistentIndex {
        lemma: String,
        pos: PosClass,
        offset: u64,
    },
}

/// Open word classes plus a catch-all for everything the lexicon does not
/// know. Variant order is the tie-break priority for ambiguous words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl PosClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PosClass::Noun => "noun",
            PosClass::Verb => "verb",
            PosClass::Adjective => "adjective",
            PosClass::Adverb => "adverb",
            PosClass::Other => "other",
        }
    }

    /// Nouns, verbs, adjectives, and adverbs carry label content.
    pub fn is_content(&self) -> bool {
        !matches!(self, PosClass::Other)
    }

    fn file_stem(&self) -> &'static str {
        match self {
            PosClass::Noun => "noun",
            PosClass::Verb => "verb",
            PosClass::Adjective => "adj",
            PosClass::Adverb => "adv",
            PosClass::Other => unreachable!("no files for PosClass::Other"),
        }
    }
}

const INDEXED: [PosClass; 4] = [
    PosClass::Noun,
    PosClass::Verb,
    PosClass::Adjective,
    PosClass::Adverb,
];

/// Detachment suffix rules per part of speech: (suffix, replacement).
fn detachments(pos: PosClass) -> &'static [(&'static str, &'static str)] {
    match pos {
        PosClass::Noun => &[
            ("s", ""),
            ("ses", "s"),
            ("xes", "x"),
            ("zes", "z"),
            ("ches", "ch"),
            ("shes", "sh"),
            ("men", "man"),
            ("ies", "y"),
        ],
        PosClass::Verb => &[
            ("s", ""),
            ("ies", "y"),
            ("es", "e"),
            ("es", ""),
            ("ed", "e"),
            ("ed", ""),
            ("ing", "e"),
            ("ing", ""),
        ],
        PosClass::Adjective => &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
        _ => &[],
    }
}

#[derive(Debug, Clone)]
struct Synset {
    lemmas: Vec<String>,
    hypernyms: Vec<u64>,
}

#[derive(Debug, Default)]
struct PosData {
    synsets: HashMap<u64, Synset>,
    /// lemma → synset offsets in sense order
    index: HashMap<String, Vec<u64>>,
    /// inflected form → root lemmas
    exceptions: HashMap<String, Vec<String>>,
    /// undirected hypernym adjacency
    adjacency: HashMap<u64, Vec<u64>>,
}

/// Synset store plus lemma index loaded from WordNet 3.0 database files.
pub struct LexicalDatabase {
    by_pos: HashMap<PosClass, PosData>,
}

impl LexicalDatabase {
    /// Loads `index.*`, `data.*`, and `*.exc` from a database directory.
    /// Exception files may be absent; index/data pairs are required.
    pub fn load(dir: &Path) -> Result<Self, LexiconError> {
        let mut by_pos = HashMap::new();
        for pos in INDEXED {
            let stem = pos.file_stem();
            let mut data = PosData::default();
            parse_data_file(&dir.join(format!("data.{stem}")), &mut data)?;
            parse_index_file(&dir.join(format!("index.{stem}")), &mut data)?;
            let exc_path = dir.join(format!("{stem}.exc"));
            if exc_path.exists() {
                parse_exception_file(&exc_path, &mut data)?;
            }
            build_adjacency(&mut data);
            validate(pos, &data)?;
            by_pos.insert(pos, data);
        }
        Ok(LexicalDatabase { by_pos })
    }

    fn data(&self, pos: PosClass) -> &PosData {
        &self.by_pos[&pos]
    }

    /// Lemma candidates for a word under one part of speech, in resolution
    /// order: the exact indexed form, exception-list roots, then detachment
    /// results. Empty when nothing resolves.
    fn lemma_candidates(&self, word: &str, pos: PosClass) -> Vec<String> {
        let data = self.data(pos);
        let word = word.to_lowercase();
        let mut out: Vec<String> = Vec::new();
        let push = |lemma: &str, out: &mut Vec<String>| {
            if data.index.contains_key(lemma) && !out.iter().any(|l| l == lemma) {
                out.push(lemma.to_string());
            }
        };
        push(&word, &mut out);
        if let Some(roots) = data.exceptions.get(&word) {
            for root in roots {
                push(root, &mut out);
            }
        }
        for (suffix, replacement) in detachments(pos) {
            if let Some(base) = word.strip_suffix(suffix) {
                if !base.is_empty() {
                    let candidate = format!("{base}{replacement}");
                    push(&candidate, &mut out);
                }
            }
        }
        out
    }

    /// First lemma a word resolves to under one part of speech.
    pub fn lemma(&self, word: &str, pos: PosClass) -> Option<String> {
        if pos == PosClass::Other {
            return None;
        }
        self.lemma_candidates(word, pos).into_iter().next()
    }

    /// Every class the word (or a morphological reduction of it) is indexed
    /// under; `{Other}` when the lexicon does not know the word.
    pub fn pos_classes(&self, word: &str) -> BTreeSet<PosClass> {
        let mut classes: BTreeSet<PosClass> = INDEXED
            .into_iter()
            .filter(|pos| !self.lemma_candidates(word, *pos).is_empty())
            .collect();
        if classes.is_empty() {
            classes.insert(PosClass::Other);
        }
        classes
    }

    /// Single class for a word, ties broken by noun > verb > adjective >
    /// adverb priority, plus the lemma it resolves to under that class.
    pub fn classify(&self, word: &str) -> (PosClass, String) {
        for pos in INDEXED {
            if let Some(lemma) = self.lemma(word, pos) {
                return (pos, lemma);
            }
        }
        (PosClass::Other, word.to_lowercase())
    }

    /// Co-members of the word's synsets ordered by (part-of-speech priority,
    /// synset sense rank, lemma order), excluding the word's own lemma.
    /// Empty when the word is unknown.
    pub fn synonyms(&self, word: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for pos in INDEXED {
            let data = self.data(pos);
            for lemma in self.lemma_candidates(word, pos) {
                for offset in &data.index[&lemma] {
                    if let Some(synset) = data.synsets.get(offset) {
                        for member in &synset.lemmas {
                            if member != &lemma && !out.iter().any(|m| m == member) {
                                out.push(member.clone());
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn synset_ids(&self, word: &str, pos: PosClass) -> BTreeSet<u64> {
        let data = self.data(pos);
        self.lemma_candidates(word, pos)
            .iter()
            .flat_map(|lemma| data.index[lemma].iter().copied())
            .collect()
    }

    /// Minimum undirected hypernym-path edge count between any synset of `a`
    /// and any synset of `b`, searched over the noun and verb graphs (the
    /// only classes with hypernym structure). `None` when no path connects
    /// them; callers minimizing over candidates treat that as +infinity.
    pub fn path_length(&self, a: &str, b: &str) -> Option<u32> {
        let mut best: Option<u32> = None;
        for pos in [PosClass::Noun, PosClass::Verb] {
            let sources = self.synset_ids(a, pos);
            let targets = self.synset_ids(b, pos);
            if sources.is_empty() || targets.is_empty() {
                continue;
            }
            if let Some(d) = bfs(&self.data(pos).adjacency, &sources, &targets) {
                best = Some(best.map_or(d, |cur| cur.min(d)));
            }
        }
        best
    }

    /// `1 / (1 + path_length)`, a similarity in (0, 1].
    pub fn path_similarity(&self, a: &str, b: &str) -> Option<f64> {
        self.path_length(a, b).map(|d| 1.0 / (1.0 + d as f64))
    }

    /// Sorted lemmas indexed under a class; useful for sampling.
    pub fn lemmas(&self, pos: PosClass) -> Vec<&str> {
        if pos == PosClass::Other {
            return Vec::new();
        }
        let mut out: Vec<&str> = self.data(pos).index.keys().map(|s| s.as_str()).collect();
        out.sort_unstable();
        out
    }
}

fn bfs(
    adjacency: &HashMap<u64, Vec<u64>>,
    sources: &BTreeSet<u64>,
    targets: &BTreeSet<u64>,
) -> Option<u32> {
    if sources.intersection(targets).next().is_some() {
        return Some(0);
    }
    let mut seen: HashSet<u64> = sources.iter().copied().collect();
    let mut queue: VecDeque<(u64, u32)> = sources.iter().map(|s| (*s, 0)).collect();
    while let Some((node, depth)) = queue.pop_front() {
        if let Some(neighbors) = adjacency.get(&node) {
            for next in neighbors {
                if !seen.insert(*next) {
                    continue;
                }
                if targets.contains(next) {
                    return Some(depth + 1);
                }
                queue.push_back((*next, depth + 1));
            }
        }
    }
    None
}

fn read_lines(path: &Path) -> Result<Vec<String>, LexiconError> {
    let file = File::open(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn parse_data_file(path: &Path, data: &mut PosData) -> Result<(), LexiconError> {
    for (num, line) in read_lines(path)?.iter().enumerate() {
        // header/license lines start with whitespace
        if line.is_empty() || line.starts_with(' ') {
            continue;
        }
        let body = line.split('|').next().unwrap_or(line);
        let mut fields = body.split_whitespace();
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| parse_err(path, num + 1, format!("missing {what}")))
        };
        let offset: u64 = next("synset offset")?
            .parse()
            .map_err(|_| parse_err(path, num + 1, "bad synset offset"))?;
        next("lex_filenum")?;
        let ss_type = next("ss_type")?.to_string();
        if !matches!(ss_type.as_str(), "n" | "v" | "a" | "s" | "r") {
            return Err(parse_err(path, num + 1, format!("bad ss_type {ss_type:?}")));
        }
        let w_cnt = usize::from_str_radix(next("word count")?, 16)
            .map_err(|_| parse_err(path, num + 1, "bad word count"))?;
        let mut lemmas = Vec::with_capacity(w_cnt);
        for _ in 0..w_cnt {
            lemmas.push(next("word")?.to_lowercase());
            next("lex_id")?;
        }
        let p_cnt: usize = next("pointer count")?
            .parse()
            .map_err(|_| parse_err(path, num + 1, "bad pointer count"))?;
        let own_pos = match ss_type.as_str() {
            "a" | "s" => "a",
            other => other,
        };
        let mut hypernyms = Vec::new();
        for _ in 0..p_cnt {
            let symbol = next("pointer symbol")?.to_string();
            let target: u64 = next("pointer offset")?
                .parse()
                .map_err(|_| parse_err(path, num + 1, "bad pointer offset"))?;
            let pos_tag = next("pointer pos")?.to_string();
            next("pointer source/target")?;
            if (symbol == "@" || symbol == "@i") && pos_tag == own_pos {
                hypernyms.push(target);
            }
        }
        // verb frames and anything else before the gloss are ignored
        data.synsets.insert(offset, Synset { lemmas, hypernyms });
    }
    Ok(())
}

fn parse_index_file(path: &Path, data: &mut PosData) -> Result<(), LexiconError> {
    for (num, line) in read_lines(path)?.iter().enumerate() {
        if line.is_empty() || line.starts_with(' ') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| parse_err(path, num + 1, format!("missing {what}")))
        };
        let lemma = next("lemma")?.to_lowercase();
        next("pos")?;
        let synset_cnt: usize = next("synset count")?
            .parse()
            .map_err(|_| parse_err(path, num + 1, "bad synset count"))?;
        let p_cnt: usize = next("pointer count")?
            .parse()
            .map_err(|_| parse_err(path, num + 1, "bad pointer count"))?;
        for _ in 0..p_cnt {
            next("pointer symbol")?;
        }
        next("sense count")?;
        next("tagsense count")?;
        let mut offsets = Vec::with_capacity(synset_cnt);
        for _ in 0..synset_cnt {
            offsets.push(
                next("synset offset")?
                    .parse::<u64>()
                    .map_err(|_| parse_err(path, num + 1, "bad synset offset"))?,
            );
        }
        data.index.insert(lemma, offsets);
    }
    Ok(())
}

fn parse_exception_file(path: &Path, data: &mut PosData) -> Result<(), LexiconError> {
    for (num, line) in read_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace().map(str::to_lowercase);
        let inflected = fields
            .next()
            .ok_or_else(|| parse_err(path, num + 1, "missing inflected form"))?;
        let roots: Vec<String> = fields.collect();
        if roots.is_empty() {
            return Err(parse_err(path, num + 1, "exception line has no root lemma"));
        }
        data.exceptions.insert(inflected, roots);
    }
    Ok(())
}

fn build_adjacency(data: &mut PosData) {
    let mut adjacency: HashMap<u64, Vec<u64>> = HashMap::new();
    for (offset, synset) in &data.synsets {
        for hypernym in &synset.hypernyms {
            adjacency.entry(*offset).or_default().push(*hypernym);
            adjacency.entry(*hypernym).or_default().push(*offset);
        }
    }
    for neighbors in adjacency.values_mut() {
        neighbors.sort_unstable();
        neighbors.dedup();
    }
    data.adjacency = adjacency;
}

fn validate(pos: PosClass, data: &PosData) -> Result<(), LexiconError> {
    // the directed hypernym relation must be acyclic
    let mut state: HashMap<u64, u8> = HashMap::new(); // 1 = visiting, 2 = done
    let mut offsets: Vec<u64> = data.synsets.keys().copied().collect();
    offsets.sort_unstable();
    for start in offsets {
        if state.get(&start).copied().unwrap_or(0) == 2 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state.insert(start, 1);
        while let Some(&mut (node, ref mut child)) = stack.last_mut() {
            let hypernyms = data
                .synsets
                .get(&node)
                .map(|s| s.hypernyms.as_slice())
                .unwrap_or(&[]);
            if *child < hypernyms.len() {
                let next = hypernyms[*child];
                *child += 1;
                match state.get(&next).copied().unwrap_or(0) {
                    1 => return Err(LexiconError::CyclicHypernyms { pos, offset: next }),
                    2 => {}
                    _ => {
                        state.insert(next, 1);
                        stack.push((next, 0));
                    }
                }
            } else {
                state.insert(node, 2);
                stack.pop();
            }
        }
    }
    // every indexed lemma must appear in each synset it references
    for (lemma, offsets) in &data.index {
        for offset in offsets {
            let listed = data
                .synsets
                .get(offset)
                .is_some_and(|s| s.lemmas.iter().any(|l| l == lemma));
            if !listed {
                return Err(LexiconError::InconsistentIndex {
                    lemma: lemma.clone(),
                    pos,
                    offset: *offset,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn fixture_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/wordnet")
    }

    fn db() -> LexicalDatabase {
        LexicalDatabase::load(&fixture_dir()).unwrap()
    }

    #[test]
    fn pos_classes_examples() {
        let db = db();
        assert_eq!(db.pos_classes("dog"), BTreeSet::from([PosClass::Noun]));
        assert_eq!(
            db.pos_classes("water"),
            BTreeSet::from([PosClass::Noun, PosClass::Verb])
        );
        assert_eq!(db.pos_classes("zzzqqq"), BTreeSet::from([PosClass::Other]));
        assert_eq!(db.pos_classes("loudly"), BTreeSet::from([PosClass::Adverb]));
    }

    #[test]
    fn morphology_resolves_inflected_forms() {
        let db = db();
        assert_eq!(db.classify("barks"), (PosClass::Verb, "bark".to_string()));
        assert_eq!(db.classify("barking"), (PosClass::Verb, "bark".to_string()));
        assert_eq!(db.classify("dogs"), (PosClass::Noun, "dog".to_string()));
        assert_eq!(db.classify("puppies"), (PosClass::Noun, "puppy".to_string()));
        // exception lists
        assert_eq!(db.classify("mice"), (PosClass::Noun, "mouse".to_string()));
        assert_eq!(db.classify("ran"), (PosClass::Verb, "run".to_string()));
        assert_eq!(db.classify("dripping"), (PosClass::Verb, "drip".to_string()));
        // ambiguous word resolves by priority: noun wins
        assert_eq!(db.classify("water"), (PosClass::Noun, "water".to_string()));
        assert_eq!(db.classify("zzzqqq"), (PosClass::Other, "zzzqqq".to_string()));
    }

    #[test]
    fn synonyms_follow_sense_and_lemma_order() {
        let db = db();
        assert_eq!(
            db.synonyms("car"),
            vec!["auto", "automobile", "machine", "motorcar"]
        );
        assert!(db.synonyms("zzzqqq").is_empty());
        // sole member of its synset
        assert!(db.synonyms("door").is_empty());
    }

    #[test]
    fn path_length_basics() {
        let db = db();
        assert_eq!(db.path_length("dog", "dog"), Some(0));
        assert_eq!(db.path_length("car", "auto"), Some(0), "shared synset");
        assert_eq!(db.path_length("puppy", "dog"), Some(1));
        assert_eq!(db.path_length("dog", "cat"), Some(4));
        assert_eq!(db.path_length("dog", "thunder"), None, "disconnected island");
        assert_eq!(db.path_length("drip", "run"), Some(3), "verb graph");
        assert_eq!(db.path_length("zzzqqq", "dog"), None);
        assert_eq!(db.path_similarity("puppy", "dog"), Some(0.5));
    }

    #[test]
    fn inflected_forms_reach_the_graph() {
        let db = db();
        // "barking" resolves through the verb graph only
        assert_eq!(db.path_length("barking", "growl"), Some(2));
        assert_eq!(db.path_length("thunder", "barking"), None);
    }

    /// Floyd–Warshall over every synset pair as an independent oracle for the
    /// BFS-based implementation.
    #[test]
    fn path_length_matches_all_pairs_oracle() {
        let db = db();
        for pos in [PosClass::Noun, PosClass::Verb] {
            let data = db.data(pos);
            let nodes: Vec<u64> = {
                let mut n: Vec<u64> = data.synsets.keys().copied().collect();
                n.sort_unstable();
                n
            };
            let idx: HashMap<u64, usize> =
                nodes.iter().enumerate().map(|(i, o)| (*o, i)).collect();
            let n = nodes.len();
            let inf = u32::MAX / 4;
            let mut dist = vec![vec![inf; n]; n];
            for (i, row) in dist.iter_mut().enumerate() {
                row[i] = 0;
            }
            for (offset, synset) in &data.synsets {
                for hyper in &synset.hypernyms {
                    let (a, b) = (idx[offset], idx[hyper]);
                    dist[a][b] = 1;
                    dist[b][a] = 1;
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let via = dist[i][k].saturating_add(dist[k][j]);
                        if via < dist[i][j] {
                            dist[i][j] = via;
                        }
                    }
                }
            }
            let lemmas = db.lemmas(pos);
            for a in &lemmas {
                for b in &lemmas {
                    let sa = db.synset_ids(a, pos);
                    let sb = db.synset_ids(b, pos);
                    let mut expected: Option<u32> = None;
                    for x in &sa {
                        for y in &sb {
                            let d = dist[idx[x]][idx[y]];
                            if d < inf {
                                expected = Some(expected.map_or(d, |cur: u32| cur.min(d)));
                            }
                        }
                    }
                    let got = if sa.is_empty() || sb.is_empty() {
                        None
                    } else {
                        bfs(&data.adjacency, &sa, &sb)
                    };
                    assert_eq!(got, expected, "{pos:?} {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn path_length_is_symmetric_and_triangular() {
        let db = db();
        let sample = [
            "dog", "cat", "puppy", "car", "water", "bird", "baby", "thunder", "storm",
        ];
        for a in &sample {
            for b in &sample {
                assert_eq!(db.path_length(a, b), db.path_length(b, a));
            }
        }
        for a in &sample {
            for b in &sample {
                for c in &sample {
                    if let (Some(ab), Some(bc), Some(ac)) = (
                        db.path_length(a, b),
                        db.path_length(b, c),
                        db.path_length(a, c),
                    ) {
                        assert!(ac <= ab + bc, "triangle violated for {a} {b} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn noun_index_lemmas_classify_as_nouns() {
        let db = db();
        for lemma in db.lemmas(PosClass::Noun) {
            assert!(
                db.pos_classes(lemma).contains(&PosClass::Noun),
                "{lemma} missing noun class"
            );
        }
    }

    #[test]
    fn missing_directory_fails() {
        assert!(matches!(
            LexicalDatabase::load(Path::new("/nonexistent/wn")),
            Err(LexiconError::Io { .. })
        ));
    }

    #[test]
    fn cyclic_hypernyms_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, contents: &str| {
            std::fs::write(dir.path().join(name), contents).unwrap();
        };
        write(
            "data.noun",
            "00000001 03 n 01 a 0 001 @ 00000002 n 0000 | x\n00000002 03 n 01 b 0 001 @ 00000001 n 0000 | y\n",
        );
        write("index.noun", "a n 1 1 @ 1 0 00000001\nb n 1 1 @ 1 0 00000002\n");
        for stem in ["verb", "adj", "adv"] {
            write(&format!("data.{stem}"), "");
            write(&format!("index.{stem}"), "");
        }
        assert!(matches!(
            LexicalDatabase::load(dir.path()),
            Err(LexiconError::CyclicHypernyms { .. })
        ));
    }
}
