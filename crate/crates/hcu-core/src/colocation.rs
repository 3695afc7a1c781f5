//! Knowledge-graph co-location pseudo-embeddings.
//!
//! A shallow breadth-first crawler expands label nouns along a configurable
//! set of ConceptNet location relations (`/query?node=/c/en/<term>&rel=/r/
//! <Relation>&limit=<cap>`), building an undirected weighted graph of
//! co-located concepts. Every response is cached on disk keyed by
//! (term, relation), so repeat crawls with a warm cache make zero network
//! requests and tests run entirely from canned fixtures.
//!
//! From the graph, a weighted intersection matrix gives each noun a row
//! vector over the location concepts it can reach within the crawl depth:
//! a path contributes the product of its edge weights and parallel paths
//! sum. Labels represented by their first noun's row then get the same
//! centroid/cosine dispersion treatment as the word-embedding metrics.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use thiserror::Error;

use crate::embedding::{centroid, cosine_distance, Vector};
use crate::labels::NormalizedLabel;
use crate::uncertainty::RadiusStats;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("network unavailable: {0}")]
    Unavailable(String),
    #[error("http status {0}")]
    Status(u16),
}

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("invalid crawl config: {0}")]
    Config(String),
    #[error("cache io error at {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// Crawl parameters. Depth is capped at 3 and the request interval has a
/// politeness floor of 100 ms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlConfig {
    pub relations: Vec<String>,
    pub depth: u8,
    pub max_edges_per_node: usize,
    pub request_interval_ms: u64,
    pub endpoint: String,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            relations: vec![
                "AtLocation".to_string(),
                "LocatedNear".to_string(),
                "PartOf".to_string(),
            ],
            depth: 2,
            max_edges_per_node: 50,
            request_interval_ms: 1000,
            endpoint: "https://api.conceptnet.io".to_string(),
        }
    }
}

impl CrawlConfig {
    pub fn validate(&self) -> Result<(), CrawlError> {
        if self.depth == 0 || self.depth > 3 {
            return Err(CrawlError::Config(format!(
                "depth {} outside 1..=3",
                self.depth
            )));
        }
        if self.request_interval_ms < 100 {
            return Err(CrawlError::Config(format!(
                "request_interval_ms {} below the 100 ms politeness floor",
                self.request_interval_ms
            )));
        }
        if self.relations.is_empty() {
            return Err(CrawlError::Config("no relations configured".to_string()));
        }
        Ok(())
    }
}

/// Fetches raw bytes for a URL. The live implementation is an HTTP client;
/// tests use canned responses.
pub trait Transport {
    fn fetch(&mut self, url: &str) -> Result<Vec<u8>, TransportError>;
}

/// A transport that always fails, for cache-only operation.
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn fetch(&mut self, _url: &str) -> Result<Vec<u8>, TransportError> {
        Err(TransportError::Unavailable("offline mode".to_string()))
    }
}

/// Time source for the rate limiter; injected so tests can assert pacing
/// without real sleeps.
pub trait Clock {
    fn now_ms(&mut self) -> u64;
    fn sleep_ms(&mut self, ms: u64);
}

/// Wall-clock implementation.
pub struct SystemClock {
    start: std::time::Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock {
            start: std::time::Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ms(&mut self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn sleep_ms(&mut self, ms: u64) {
        std::thread::sleep(std::time::Duration::from_millis(ms));
    }
}

/// Percent-encodes everything outside `[A-Za-z0-9_-]`, uppercase hex.
fn percent_encode(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for byte in raw.bytes() {
        match byte {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_' | b'-' => out.push(byte as char),
            other => {
                out.push('%');
                out.push_str(&format!("{other:02X}"));
            }
        }
    }
    out
}

/// One file per (term, relation) holding the raw response bytes.
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache { dir: dir.into() }
    }

    fn key_path(&self, term: &str, relation: &str) -> PathBuf {
        self.dir
            .join(format!("{}__{}.json", percent_encode(term), percent_encode(relation)))
    }

    pub fn get(&self, term: &str, relation: &str) -> Result<Option<Vec<u8>>, CrawlError> {
        let path = self.key_path(term, relation);
        match fs::read(&path) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(CrawlError::Cache {
                path: path.display().to_string(),
                source,
            }),
        }
    }

    pub fn put(&self, term: &str, relation: &str, bytes: &[u8]) -> Result<(), CrawlError> {
        let path = self.key_path(term, relation);
        let write = || -> io::Result<()> {
            fs::create_dir_all(&self.dir)?;
            fs::write(&path, bytes)
        };
        write().map_err(|source| CrawlError::Cache {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Undirected weighted co-location graph. Parallel relations between the
/// same pair accumulate; per relation the strongest observation wins, so
/// seeing one edge from both endpoints' queries does not double-count it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocationGraph {
    relation_weights: BTreeMap<(String, String), BTreeMap<String, f64>>,
    /// term → shallowest crawl depth at which it appeared
    pub provenance: BTreeMap<String, u8>,
}

impl LocationGraph {
    fn record(&mut self, a: &str, b: &str, relation: &str, weight: f64) {
        if a == b || !weight.is_finite() || weight <= 0.0 {
            return;
        }
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        let per_relation = self.relation_weights.entry(key).or_default();
        let slot = per_relation.entry(relation.to_string()).or_insert(0.0);
        if weight > *slot {
            *slot = weight;
        }
    }

    /// Edges with relation weights summed per pair.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.relation_weights.iter().map(|((a, b), relations)| {
            (a.as_str(), b.as_str(), relations.values().sum::<f64>())
        })
    }

    pub fn edge_count(&self) -> usize {
        self.relation_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relation_weights.is_empty()
    }

    /// Adjacency with accumulated weights, deterministically ordered.
    pub fn adjacency(&self) -> BTreeMap<&str, Vec<(&str, f64)>> {
        let mut out: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
        for (a, b, w) in self.edges() {
            out.entry(a).or_default().push((b, w));
            out.entry(b).or_default().push((a, w));
        }
        out
    }

    /// TSV export: `term_a\tterm_b\tweight`.
    pub fn write_tsv<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        for (a, b, w) in self.edges() {
            writeln!(writer, "{a}\t{b}\t{w}")?;
        }
        Ok(())
    }
}

/// Terms the crawler could not resolve, with the error per relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailureManifest {
    pub entries: Vec<(String, String, String)>,
}

impl FailureManifest {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// TSV export: `term\trelation\terror`.
    pub fn write_tsv<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        for (term, relation, error) in &self.entries {
            writeln!(writer, "{term}\t{relation}\t{error}")?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct CrawlOutcome {
    pub graph: LocationGraph,
    pub failures: FailureManifest,
    /// Network requests actually made (cache hits excluded).
    pub requests_made: u64,
}

fn english_concept(term: &str) -> Option<String> {
    let rest = term.strip_prefix("/c/")?;
    let term = rest.strip_prefix("en/")?;
    let concept = term.split('/').next().unwrap_or(term);
    if concept.is_empty() {
        None
    } else {
        Some(concept.to_lowercase())
    }
}

/// Pulls (start, end, weight) triples out of a ConceptNet query response,
/// keeping only English concepts.
fn parse_edges(bytes: &[u8]) -> Result<Vec<(String, String, f64)>, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let mut out = Vec::new();
    if let Some(edges) = value.get("edges").and_then(|e| e.as_array()) {
        for edge in edges {
            let start = edge.pointer("/start/term").and_then(|t| t.as_str());
            let end = edge.pointer("/end/term").and_then(|t| t.as_str());
            let weight = edge.get("weight").and_then(|w| w.as_f64()).unwrap_or(1.0);
            if let (Some(start), Some(end)) = (start, end) {
                if let (Some(a), Some(b)) = (english_concept(start), english_concept(end)) {
                    out.push((a, b, weight));
                }
            }
        }
    }
    Ok(out)
}

/// Breadth-first expansion from the seed terms along the configured
/// relations to the configured depth. Responses come from the cache when
/// present; otherwise the transport is asked at most once per
/// `request_interval_ms`, with three attempts and exponential backoff before
/// a term/relation lands in the failure manifest. The returned graph is
/// whatever could be resolved; total failure is not fatal here.
pub fn crawl(
    seeds: &BTreeSet<String>,
    config: &CrawlConfig,
    cache: &ResponseCache,
    transport: &mut dyn Transport,
    clock: &mut dyn Clock,
) -> Result<CrawlOutcome, CrawlError> {
    config.validate()?;
    let mut graph = LocationGraph::default();
    let mut failures = FailureManifest::default();
    let mut requests_made = 0u64;
    let mut last_request: Option<u64> = None;
    let mut fetched: BTreeSet<String> = BTreeSet::new();

    let mut frontier: BTreeSet<String> = seeds.iter().map(|s| s.to_lowercase()).collect();
    for seed in &frontier {
        graph.provenance.insert(seed.clone(), 0);
    }

    for depth in 0..config.depth {
        let mut next_frontier: BTreeSet<String> = BTreeSet::new();
        for term in &frontier {
            if !fetched.insert(term.clone()) {
                continue;
            }
            for relation in &config.relations {
                let bytes = match cache.get(term, relation)? {
                    Some(bytes) => Some(bytes),
                    None => {
                        let url = format!(
                            "{}/query?node=/c/en/{}&rel=/r/{}&limit={}",
                            config.endpoint,
                            percent_encode(term),
                            percent_encode(relation),
                            config.max_edges_per_node
                        );
                        let mut fetched_bytes = None;
                        for attempt in 0..3 {
                            let now = clock.now_ms();
                            if let Some(prev) = last_request {
                                let since = now.saturating_sub(prev);
                                if since < config.request_interval_ms {
                                    clock.sleep_ms(config.request_interval_ms - since);
                                }
                            }
                            requests_made += 1;
                            let result = transport.fetch(&url);
                            last_request = Some(clock.now_ms());
                            match result {
                                Ok(bytes) => {
                                    cache.put(term, relation, &bytes)?;
                                    fetched_bytes = Some(bytes);
                                    break;
                                }
                                Err(e) => {
                                    if attempt == 2 {
                                        failures.entries.push((
                                            term.clone(),
                                            relation.clone(),
                                            e.to_string(),
                                        ));
                                    } else {
                                        clock.sleep_ms(config.request_interval_ms << attempt);
                                    }
                                }
                            }
                        }
                        fetched_bytes
                    }
                };
                let Some(bytes) = bytes else { continue };
                let edges = match parse_edges(&bytes) {
                    Ok(edges) => edges,
                    Err(e) => {
                        failures.entries.push((
                            term.clone(),
                            relation.clone(),
                            format!("malformed response: {e}"),
                        ));
                        continue;
                    }
                };
                for (a, b, weight) in edges.into_iter().take(config.max_edges_per_node) {
                    graph.record(&a, &b, relation, weight);
                    for node in [&a, &b] {
                        if node != term && !graph.provenance.contains_key(node.as_str()) {
                            graph.provenance.insert(node.clone(), depth + 1);
                        }
                    }
                    let neighbor = if &a == term { &b } else { &a };
                    if !fetched.contains(neighbor.as_str()) {
                        next_frontier.insert(neighbor.clone());
                    }
                }
            }
        }
        frontier = next_frontier;
    }

    Ok(CrawlOutcome {
        graph,
        failures,
        requests_made,
    })
}

/// Weighted intersection matrix: rows are the supplied nouns, columns the
/// location concepts reachable within `depth` edges. An entry accumulates,
/// over all simple paths of at most `depth` edges from the noun to the
/// concept, the product of edge weights along each path.
#[derive(Debug, Clone, PartialEq)]
pub struct ColocationMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    values: Vec<f64>,
    /// Nouns that reached nothing.
    pub zero_rows: u64,
}

impl ColocationMatrix {
    pub fn row(&self, noun: &str) -> Option<&[f64]> {
        let idx = self.rows.iter().position(|r| r == noun)?;
        let width = self.columns.len();
        Some(&self.values[idx * width..(idx + 1) * width])
    }
}

pub fn intersection_matrix(nouns: &[String], graph: &LocationGraph, depth: u8) -> ColocationMatrix {
    let adjacency = graph.adjacency();
    let mut reach: Vec<BTreeMap<String, f64>> = Vec::with_capacity(nouns.len());
    for noun in nouns {
        let noun = noun.to_lowercase();
        let mut acc: BTreeMap<String, f64> = BTreeMap::new();
        let mut path: Vec<&str> = vec![];
        walk(&noun, &noun, 1.0, depth, &adjacency, &mut path, &mut acc);
        reach.push(acc);
    }
    let columns: BTreeSet<String> = reach.iter().flat_map(|m| m.keys().cloned()).collect();
    let columns: Vec<String> = columns.into_iter().collect();
    let mut values = Vec::with_capacity(nouns.len() * columns.len());
    let mut zero_rows = 0;
    for acc in &reach {
        if acc.is_empty() {
            zero_rows += 1;
        }
        for column in &columns {
            values.push(acc.get(column).copied().unwrap_or(0.0));
        }
    }
    ColocationMatrix {
        rows: nouns.iter().map(|n| n.to_lowercase()).collect(),
        columns,
        values,
        zero_rows,
    }
}

fn walk<'a>(
    origin: &str,
    node: &'a str,
    weight_product: f64,
    budget: u8,
    adjacency: &BTreeMap<&'a str, Vec<(&'a str, f64)>>,
    path: &mut Vec<&'a str>,
    acc: &mut BTreeMap<String, f64>,
) {
    if budget == 0 {
        return;
    }
    let Some(neighbors) = adjacency.get(node) else {
        return;
    };
    for (next, weight) in neighbors {
        if *next == origin || path.contains(next) {
            continue;
        }
        let product = weight_product * weight;
        *acc.entry(next.to_string()).or_insert(0.0) += product;
        path.push(next);
        walk(origin, next, product, budget - 1, adjacency, path, acc);
        path.pop();
    }
}

/// Dispersion of a stimulus's labels in co-location space. Each label is
/// represented by its first noun's matrix row; labels whose first noun has a
/// zero (or missing) row do not qualify, and fewer than two qualifying
/// labels yield `None`.
pub fn colocation_radius(
    labels: &[NormalizedLabel],
    matrix: &ColocationMatrix,
) -> Option<RadiusStats> {
    let mut rows: Vec<Vector> = Vec::new();
    for label in labels {
        let Some(noun) = label.first_noun() else {
            continue;
        };
        let Some(row) = matrix.row(&noun.embed_key) else {
            continue;
        };
        if row.iter().all(|v| *v == 0.0) {
            continue;
        }
        rows.push(Vector::new(row.to_vec()).expect("matrix entries are finite"));
    }
    if rows.len() < 2 {
        return None;
    }
    let center = centroid(&rows).expect("rows are non-empty and equal length");
    let distances: Vec<f64> = rows
        .iter()
        .map(|r| cosine_distance(r, &center).expect("qualifying rows are nonzero"))
        .collect();
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    Some(RadiusStats {
        mean,
        std: var.sqrt(),
    })
}
