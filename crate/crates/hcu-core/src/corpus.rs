//! Annotation-corpus ingestion, validation, and persistence.
//!
//! The on-disk form is a pair of UTF-8 CSV files with RFC 4180 escaping:
//!
//! - annotations: header `sound_id,worker_id,label_text,familiarity,
//!   imageability,arousal,valence,time_to_first_letter_ms,response_time_ms,
//!   num_plays`; empty string means absent for the optional trailing fields
//! - sounds: header `sound_id,display_name,is_modified` with
//!   `is_modified ∈ {0,1,""}` (empty derives the flag from the `_mod`
//!   display-name suffix; an explicit value wins on conflict)
//!
//! Rows that fail validation are never silently dropped or repaired: each one
//! lands in a [`RejectionReport`] with its 1-based data-row number and the
//! first reason found, keeping downstream statistics auditable.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

pub const ANNOTATIONS_HEADER: [&str; 10] = [
    "sound_id",
    "worker_id",
    "label_text",
    "familiarity",
    "imageability",
    "arousal",
    "valence",
    "time_to_first_letter_ms",
    "response_time_ms",
    "num_plays",
];

pub const SOUNDS_HEADER: [&str; 3] = ["sound_id", "display_name", "is_modified"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("malformed header in {path}: expected {expected:?}, found {found:?}")]
    MalformedHeader {
        path: String,
        expected: String,
        found: String,
    },
    #[error("duplicate sound_id {sound_id:?} in {path}")]
    DuplicateSound { path: String, sound_id: String },
    #[error("bad is_modified value {value:?} for sound {sound_id:?} (want 0, 1, or empty)")]
    BadModifiedFlag { sound_id: String, value: String },
    #[error("invalid likert scale: low {low} must be less than high {high}")]
    InvalidScale { low: i32, high: i32 },
}

/// Inclusive bounds for the four likert ratings.
///
/// The default is 1–9; the width is configurable because rating scales vary
/// between collection setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LikertScale {
    pub low: i32,
    pub high: i32,
}

impl LikertScale {
    pub fn new(low: i32, high: i32) -> Result<Self, CorpusError> {
        if low >= high {
            return Err(CorpusError::InvalidScale { low, high });
        }
        Ok(LikertScale { low, high })
    }

    pub fn contains(&self, value: i32) -> bool {
        value >= self.low && value <= self.high
    }

    /// Scale midpoint, useful for synthesizing ratings.
    pub fn midpoint(&self) -> f64 {
        (self.low as f64 + self.high as f64) / 2.0
    }
}

impl Default for LikertScale {
    fn default() -> Self {
        LikertScale { low: 1, high: 9 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestConfig {
    pub scale: LikertScale,
}

/// One worker's response to one sound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub sound_id: String,
    pub worker_id: String,
    pub label_text: String,
    pub familiarity: i32,
    pub imageability: i32,
    pub arousal: i32,
    pub valence: i32,
    pub time_to_first_letter_ms: Option<u64>,
    pub response_time_ms: Option<u64>,
    pub num_plays: Option<u32>,
    /// Whitespace-token count of `label_text`; derived at load.
    pub num_words: u32,
}

/// One stimulus entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundEntry {
    pub sound_id: String,
    pub display_name: String,
    pub is_modified: bool,
}

/// A validated, immutable annotation corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sounds: Vec<SoundEntry>,
    pub annotations: Vec<AnnotationRecord>,
    pub scale: LikertScale,
}

impl Corpus {
    pub fn sound(&self, sound_id: &str) -> Option<&SoundEntry> {
        self.sounds.iter().find(|s| s.sound_id == sound_id)
    }

    /// Sorted sound ids.
    pub fn sound_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.sounds.iter().map(|s| s.sound_id.as_str()).collect();
        ids.sort_unstable();
        ids
    }

    pub fn annotations_for<'a>(
        &'a self,
        sound_id: &'a str,
    ) -> impl Iterator<Item = &'a AnnotationRecord> {
        self.annotations.iter().filter(move |a| a.sound_id == sound_id)
    }

    /// Sorted distinct worker ids.
    pub fn worker_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .annotations
            .iter()
            .map(|a| a.worker_id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based data-row number (header excluded).
    pub row: u64,
    pub reason: String,
}

/// Per-row rejections collected during a load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RejectionReport {
    pub rejections: Vec<Rejection>,
    /// Non-fatal oddities, e.g. an explicit is_modified flag contradicting
    /// the display-name suffix.
    pub warnings: Vec<String>,
}

impl RejectionReport {
    pub fn len(&self) -> usize {
        self.rejections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejections.is_empty()
    }

    /// One line per rejection: `<row number>\t<reason>`.
    pub fn write_tsv<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        for r in &self.rejections {
            writeln!(writer, "{}\t{}", r.row, r.reason)?;
        }
        Ok(())
    }
}

/// Count of maximal non-whitespace runs.
pub fn word_count(label_text: &str) -> u32 {
    label_text.split_whitespace().count() as u32
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CorpusError + '_ {
    move |source| CorpusError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<(), CorpusError> {
    let matches = found.len() == expected.len()
        && found.iter().zip(expected).all(|(f, e)| f.trim() == *e);
    if !matches {
        return Err(CorpusError::MalformedHeader {
            path: path.display().to_string(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

/// Loads and validates a corpus from its two CSV files.
///
/// Structural problems (missing file, malformed header, malformed sounds
/// rows) fail the load; per-row annotation problems are reported.
pub fn load_corpus(
    annotations_path: &Path,
    sounds_path: &Path,
    config: &IngestConfig,
) -> Result<(Corpus, RejectionReport), CorpusError> {
    let mut report = RejectionReport::default();
    let sounds = load_sounds(sounds_path, &mut report)?;

    let file = File::open(annotations_path).map_err(|source| CorpusError::Io {
        path: annotations_path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    check_header(
        annotations_path,
        reader.headers().map_err(csv_err(annotations_path))?,
        &ANNOTATIONS_HEADER,
    )?;

    let scale = config.scale;
    let mut annotations = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx as u64 + 1;
        let record = record.map_err(csv_err(annotations_path))?;
        match parse_annotation(&record, &sounds, scale) {
            Ok(a) => annotations.push(a),
            Err(reason) => report.rejections.push(Rejection { row, reason }),
        }
    }

    Ok((
        Corpus {
            sounds,
            annotations,
            scale,
        },
        report,
    ))
}

fn load_sounds(path: &Path, report: &mut RejectionReport) -> Result<Vec<SoundEntry>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    check_header(path, reader.headers().map_err(csv_err(path))?, &SOUNDS_HEADER)?;

    let mut sounds: Vec<SoundEntry> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let sound_id = record.get(0).unwrap_or("").to_string();
        let display_name = record.get(1).unwrap_or("").to_string();
        let flag = record.get(2).unwrap_or("");
        let suffix_modified = display_name.ends_with("_mod");
        let is_modified = match flag {
            "" => suffix_modified,
            "0" => false,
            "1" => true,
            other => {
                return Err(CorpusError::BadModifiedFlag {
                    sound_id,
                    value: other.to_string(),
                })
            }
        };
        if !flag.is_empty() && is_modified != suffix_modified {
            report.warnings.push(format!(
                "sound {sound_id}: explicit is_modified={flag} contradicts display name {display_name:?}"
            ));
        }
        if sounds.iter().any(|s| s.sound_id == sound_id) {
            return Err(CorpusError::DuplicateSound {
                path: path.display().to_string(),
                sound_id,
            });
        }
        sounds.push(SoundEntry {
            sound_id,
            display_name,
            is_modified,
        });
    }
    Ok(sounds)
}

fn parse_annotation(
    record: &csv::StringRecord,
    sounds: &[SoundEntry],
    scale: LikertScale,
) -> Result<AnnotationRecord, String> {
    if record.len() != ANNOTATIONS_HEADER.len() {
        return Err(format!(
            "wrong field count: expected {}, found {}",
            ANNOTATIONS_HEADER.len(),
            record.len()
        ));
    }
    let field = |i: usize| record.get(i).unwrap_or("");

    let sound_id = field(0).to_string();
    if sound_id.is_empty() {
        return Err("empty sound_id".to_string());
    }
    let worker_id = field(1).to_string();
    if worker_id.is_empty() {
        return Err("empty worker_id".to_string());
    }
    let label_text = field(2).to_string();
    if label_text.trim().is_empty() {
        return Err("empty label".to_string());
    }

    let likert = |i: usize, name: &str| -> Result<i32, String> {
        let v: i32 = field(i)
            .parse()
            .map_err(|_| format!("malformed {name}: {:?}", field(i)))?;
        if !scale.contains(v) {
            return Err(format!(
                "{name} out of bounds: {v} not in [{}, {}]",
                scale.low, scale.high
            ));
        }
        Ok(v)
    };
    let familiarity = likert(3, "familiarity")?;
    let imageability = likert(4, "imageability")?;
    let arousal = likert(5, "arousal")?;
    let valence = likert(6, "valence")?;

    fn optional<T: std::str::FromStr>(raw: &str, name: &str) -> Result<Option<T>, String> {
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse::<T>()
            .map(Some)
            .map_err(|_| format!("malformed {name}: {raw:?}"))
    }
    let time_to_first_letter_ms = optional::<u64>(field(7), "time_to_first_letter_ms")?;
    let response_time_ms = optional::<u64>(field(8), "response_time_ms")?;
    let num_plays = optional::<u32>(field(9), "num_plays")?;

    if !sounds.iter().any(|s| s.sound_id == sound_id) {
        return Err("unknown sound".to_string());
    }

    let num_words = word_count(&label_text);
    Ok(AnnotationRecord {
        sound_id,
        worker_id,
        label_text,
        familiarity,
        imageability,
        arousal,
        valence,
        time_to_first_letter_ms,
        response_time_ms,
        num_plays,
        num_words,
    })
}

/// Persists a corpus as `annotations.csv` and `sounds.csv` inside `dir`
/// (created if missing). `load_corpus` on the written pair reproduces the
/// corpus field for field.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| CorpusError::Io {
            path,
            source,
        }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let sounds_path = dir.join("sounds.csv");
    let mut w = csv::Writer::from_path(&sounds_path).map_err(csv_err(&sounds_path))?;
    w.write_record(SOUNDS_HEADER).map_err(csv_err(&sounds_path))?;
    for s in &corpus.sounds {
        w.write_record([
            s.sound_id.as_str(),
            s.display_name.as_str(),
            if s.is_modified { "1" } else { "0" },
        ])
        .map_err(csv_err(&sounds_path))?;
    }
    w.flush().map_err(io_err(&sounds_path))?;

    let ann_path = dir.join("annotations.csv");
    let mut w = csv::Writer::from_path(&ann_path).map_err(csv_err(&ann_path))?;
    w.write_record(ANNOTATIONS_HEADER).map_err(csv_err(&ann_path))?;
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for a in &corpus.annotations {
        w.write_record([
            a.sound_id.as_str(),
            a.worker_id.as_str(),
            a.label_text.as_str(),
            &a.familiarity.to_string(),
            &a.imageability.to_string(),
            &a.arousal.to_string(),
            &a.valence.to_string(),
            &opt(a.time_to_first_letter_ms),
            &opt(a.response_time_ms),
            &opt(a.num_plays.map(u64::from)),
        ])
        .map_err(csv_err(&ann_path))?;
    }
    w.flush().map_err(io_err(&ann_path))?;
    Ok(())
}
