//! Pre-trained word-embedding tables and dense-vector primitives.
//!
//! Two on-disk formats are supported: the word2vec text format (a
//! `<vocab_count> <dimension>` header line followed by one `token c1 .. cn`
//! row per word) and the ConceptNet Numberbatch distribution, which is the
//! same layout gzip-compressed with tokens optionally carrying `/c/<lang>/`
//! URI prefixes. Malformed rows are skipped and tallied rather than aborting
//! the load; public embedding dumps routinely contain stray rows.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use flate2::bufread::GzDecoder;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed header {header:?} in {path}: expected `<vocab_count> <dimension>`")]
    MalformedHeader { path: String, header: String },
    #[error("{path} is not gzip data (bad magic bytes)")]
    NotGzip { path: String },
    #[error("empty vocabulary in {path}")]
    EmptyVocabulary { path: String },
}

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("empty vector list")]
    EmptyList,
    #[error("non-finite component")]
    NonFinite,
}

/// A dense real vector with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, VectorError> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        Ok(Vector(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_dims(u: &Vector, v: &Vector) -> Result<(), VectorError> {
    if u.dim() != v.dim() {
        return Err(VectorError::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    Ok(())
}

/// Cosine distance `1 - u·v / (‖u‖‖v‖)`, in `[0, 2]`.
///
/// This is the pipeline-wide metric: both supported embedding sources use
/// angular similarity conventions, so vectors are taken unnormalized and
/// scale drops out here.
pub fn cosine_distance(u: &Vector, v: &Vector) -> Result<f64, VectorError> {
    check_dims(u, v)?;
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.0.iter().zip(&v.0) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(VectorError::ZeroVector);
    }
    let d = 1.0 - dot / (nu.sqrt() * nv.sqrt());
    // rounding can push the similarity a hair past ±1
    Ok(d.clamp(0.0, 2.0))
}

/// Euclidean distance. Exposed for experimentation; the default pipelines use
/// [`cosine_distance`] throughout.
pub fn euclidean_distance(u: &Vector, v: &Vector) -> Result<f64, VectorError> {
    check_dims(u, v)?;
    let sum: f64 = u.0.iter().zip(&v.0).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum.sqrt())
}

/// Component-wise arithmetic mean of a non-empty list of equal-dimension vectors.
pub fn centroid(vectors: &[Vector]) -> Result<Vector, VectorError> {
    let first = vectors.first().ok_or(VectorError::EmptyList)?;
    let dim = first.dim();
    let mut acc = vec![0.0; dim];
    for v in vectors {
        check_dims(first, v)?;
        for (a, c) in acc.iter_mut().zip(&v.0) {
            *a += c;
        }
    }
    let n = vectors.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(Vector(acc))
}

/// Provenance tag for a loaded table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingSource {
    Word2vec,
    ConceptnetNumberbatch,
    Other,
}

impl EmbeddingSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmbeddingSource::Word2vec => "word2vec",
            EmbeddingSource::ConceptnetNumberbatch => "conceptnet-numberbatch",
            EmbeddingSource::Other => "other",
        }
    }
}

/// Tallies accumulated while parsing an embedding file.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct LoadReport {
    /// Vocabulary size declared by the header line.
    pub declared_count: usize,
    /// Entries actually stored.
    pub loaded: usize,
    /// Tokens that appeared more than once (last occurrence wins).
    pub duplicates: u64,
    /// Rows skipped for wrong arity or non-finite components.
    pub skipped_rows: u64,
    /// Namespaced tokens dropped for being non-English.
    pub non_english: u64,
}

/// Token → dense vector map loaded from a pre-trained embedding file.
///
/// Tokens are normalized to lowercase with embedding-namespace prefixes
/// stripped; vectors all share one dimension and contain only finite values.
/// Tables are immutable after load and safe to share across threads.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
    source: EmbeddingSource,
}

impl EmbeddingTable {
    /// Builds a table directly from entries; used by tests and synthetic runs.
    pub fn from_entries<I, S>(
        dimension: usize,
        source: EmbeddingSource,
        entries: I,
    ) -> Result<Self, VectorError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut vectors = HashMap::new();
        for (token, v) in entries {
            if v.len() != dimension {
                return Err(VectorError::DimensionMismatch {
                    left: dimension,
                    right: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(VectorError::NonFinite);
            }
            vectors.insert(token.into().to_lowercase(), v);
        }
        Ok(EmbeddingTable {
            dimension,
            vectors,
            source,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn source(&self) -> EmbeddingSource {
        self.source
    }

    /// Exact-match lookup after lowercase normalization.
    pub fn lookup(&self, token: &str) -> Option<Vector> {
        self.vectors
            .get(&token.to_lowercase())
            .map(|v| Vector(v.clone()))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(&token.to_lowercase())
    }

    /// Iterates over stored tokens in no particular order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(|s| s.as_str())
    }
}

fn open(path: &Path) -> Result<File, EmbeddingError> {
    File::open(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a word2vec text-format file: a `<vocab_count> <dimension>` header
/// line followed by one space-separated `token c1 .. cn` row per word.
///
/// Duplicate tokens keep the last vector seen; malformed rows are skipped.
/// All tallies land in the returned [`LoadReport`].
pub fn load_word2vec_text(path: &Path) -> Result<(EmbeddingTable, LoadReport), EmbeddingError> {
    let reader = BufReader::new(open(path)?);
    read_table(reader, path, EmbeddingSource::Word2vec, false)
}

/// Loads a gzip-compressed Numberbatch file. Tokens with a `/c/en/` prefix
/// are stored with the prefix stripped; other-language URI tokens are
/// dropped and tallied; bare tokens pass through unchanged.
pub fn load_numberbatch(path: &Path) -> Result<(EmbeddingTable, LoadReport), EmbeddingError> {
    let mut file = BufReader::new(open(path)?);
    let magic = file.fill_buf().map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if magic.len() < 2 || magic[0] != 0x1f || magic[1] != 0x8b {
        return Err(EmbeddingError::NotGzip {
            path: path.display().to_string(),
        });
    }
    let reader = BufReader::new(GzDecoder::new(file));
    read_table(reader, path, EmbeddingSource::ConceptnetNumberbatch, true)
}

fn read_table<R: BufRead>(
    mut reader: R,
    path: &Path,
    source: EmbeddingSource,
    strip_namespace: bool,
) -> Result<(EmbeddingTable, LoadReport), EmbeddingError> {
    let io_err = |source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut header = String::new();
    reader.read_line(&mut header).map_err(io_err)?;
    let mut parts = header.split_whitespace();
    let (count, dimension) = match (
        parts.next().and_then(|t| t.parse::<usize>().ok()),
        parts.next().and_then(|t| t.parse::<usize>().ok()),
        parts.next(),
    ) {
        (Some(c), Some(d), None) if d > 0 => (c, d),
        _ => {
            return Err(EmbeddingError::MalformedHeader {
                path: path.display().to_string(),
                header: header.trim_end().to_string(),
            })
        }
    };

    let mut report = LoadReport {
        declared_count: count,
        ..LoadReport::default()
    };
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::with_capacity(count);
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(io_err)? == 0 {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let raw_token = fields.next().expect("non-empty line has a first field");
        let token = if strip_namespace {
            match english_term(raw_token) {
                Some(t) => t,
                None => {
                    report.non_english += 1;
                    continue;
                }
            }
        } else {
            raw_token
        };
        let mut components = Vec::with_capacity(dimension);
        let mut bad = false;
        for field in fields {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => components.push(v),
                _ => {
                    bad = true;
                    break;
                }
            }
        }
        if bad || components.len() != dimension {
            report.skipped_rows += 1;
            continue;
        }
        if vectors.insert(token.to_lowercase(), components).is_some() {
            report.duplicates += 1;
        }
    }
    if vectors.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary {
            path: path.display().to_string(),
        });
    }
    report.loaded = vectors.len();
    Ok((
        EmbeddingTable {
            dimension,
            vectors,
            source,
        },
        report,
    ))
}

/// Extracts the English term from a ConceptNet URI token, or passes bare
/// tokens through. Returns `None` for non-English URI tokens.
fn english_term(token: &str) -> Option<&str> {
    match token.strip_prefix("/c/") {
        None => Some(token),
        Some(rest) => {
            let term = rest.strip_prefix("en/")?;
            // a trailing /pos or /sense segment is not part of the term
            Some(term.split('/').next().unwrap_or(term))
        }
    }
}

/// Writes a table in word2vec text format, tokens sorted for determinism.
/// Components use the shortest representation that round-trips, so
/// load → save → load is the identity on the (token, vector) map.
pub fn save_word2vec_text<W: Write>(table: &EmbeddingTable, writer: &mut W) -> io::Result<()> {
    let mut tokens: Vec<&str> = table.tokens().collect();
    tokens.sort_unstable();
    writeln!(writer, "{} {}", tokens.len(), table.dimension)?;
    let mut line = String::new();
    for token in tokens {
        line.clear();
        line.push_str(token);
        for c in &table.vectors[token] {
            let _ = write!(line, " {c}");
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}
