//! Metadata CSV (`image_id,title,grid_reference,tags`) and label files
//! (`image_id,label_bits`).

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::data::LabelVector;
use crate::vocab::TagVocabulary;

pub const METADATA_HEADER: [&str; 4] = ["image_id", "title", "grid_reference", "tags"];
pub const LABEL_HEADER: [&str; 2] = ["image_id", "label_bits"];
pub const MAX_TITLE_CHARS: usize = 256;

#[derive(Debug, Error)]
pub enum MetadataError {
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    BadHeader {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: String,
        line: u64,
        reason: String,
    },
    #[error("{path}:{line}: unknown tag {name:?}")]
    UnknownTag {
        path: String,
        line: u64,
        name: String,
    },
    #[error("{path}:{line}: duplicate image id {id}")]
    DuplicateId { path: String, line: u64, id: u64 },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One metadata row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataRecord {
    pub image_id: u64,
    pub title: String,
    pub gridref: String,
    /// Numeric `easting,northing` columns, when the file carries them.
    pub easting_northing: Option<(f64, f64)>,
    /// Tag indices in file order; empty for unlabeled (test) rows.
    pub tags: Vec<usize>,
    /// 1-based line number in the source file.
    pub line: u64,
}

impl MetadataRecord {
    pub fn labels(&self) -> Option<LabelVector> {
        if self.tags.is_empty() {
            None
        } else {
            Some(LabelVector::from_indices(self.tags.iter().copied()).expect("validated indices"))
        }
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> MetadataError + '_ {
    move |source| MetadataError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

/// Parses a semicolon-separated tag list into vocabulary indices.
pub fn parse_tag_list(field: &str, vocab: &TagVocabulary) -> Result<Vec<usize>, String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| vocab.index_of(name).ok_or_else(|| name.to_string()))
        .collect()
}

pub fn parse_metadata_csv(path: &Path) -> Result<Vec<MetadataRecord>, MetadataError> {
    let ps = || path.display().to_string();
    let vocab = TagVocabulary::builtin();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err(path))?;

    let header = reader.headers().map_err(csv_err(path))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let numeric = names.len() == 6 && names[4] == "easting" && names[5] == "northing";
    if names.len() < 4 || names[..4] != METADATA_HEADER || !(names.len() == 4 || numeric) {
        return Err(MetadataError::BadHeader {
            path: ps(),
            expected: METADATA_HEADER.join(","),
            found: names.join(","),
        });
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = match e.position() {
                Some(p) => p.line(),
                None => 0,
            };
            MetadataError::MalformedRow {
                path: ps(),
                line,
                reason: e.to_string(),
            }
        })?;
        let line = record_line(&row);
        let malformed = |reason: String| MetadataError::MalformedRow {
            path: ps(),
            line,
            reason,
        };
        let image_id: u64 = row[0]
            .trim()
            .parse()
            .map_err(|_| malformed(format!("bad image_id {:?}", &row[0])))?;
        if !seen.insert(image_id) {
            return Err(MetadataError::DuplicateId {
                path: ps(),
                line,
                id: image_id,
            });
        }
        let title = row[1].to_string();
        if title.chars().count() > MAX_TITLE_CHARS {
            return Err(malformed(format!(
                "title longer than {MAX_TITLE_CHARS} characters"
            )));
        }
        let tags = parse_tag_list(&row[3], &vocab).map_err(|name| MetadataError::UnknownTag {
            path: ps(),
            line,
            name,
        })?;
        let easting_northing = if numeric && !(row[4].trim().is_empty() && row[5].trim().is_empty())
        {
            let e: f64 = row[4]
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad easting {:?}", &row[4])))?;
            let n: f64 = row[5]
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad northing {:?}", &row[5])))?;
            Some((e, n))
        } else {
            None
        };
        let gridref = row[2].trim().to_string();
        if gridref.is_empty() && easting_northing.is_none() {
            return Err(malformed("missing grid reference".into()));
        }
        out.push(MetadataRecord {
            image_id,
            title,
            gridref,
            easting_northing,
            tags,
            line,
        });
    }
    Ok(out)
}

/// Reads a label file into an id -> labels map.
pub fn parse_label_file(path: &Path) -> Result<HashMap<u64, LabelVector>, MetadataError> {
    let ps = || path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != LABEL_HEADER {
        return Err(MetadataError::BadHeader {
            path: ps(),
            expected: LABEL_HEADER.join(","),
            found: names.join(","),
        });
    }
    let mut out = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let line = record_line(&row);
        let malformed = |reason: String| MetadataError::MalformedRow {
            path: ps(),
            line,
            reason,
        };
        let id: u64 = row[0]
            .trim()
            .parse()
            .map_err(|_| malformed(format!("bad image_id {:?}", &row[0])))?;
        let bits = LabelVector::parse_bit_string(row[1].trim())
            .map_err(|e| malformed(e.to_string()))?;
        if out.insert(id, bits).is_some() {
            return Err(MetadataError::DuplicateId { path: ps(), line, id });
        }
    }
    Ok(out)
}

pub fn write_label_file<'a, I>(path: &Path, rows: I) -> Result<(), MetadataError>
where
    I: IntoIterator<Item = (u64, &'a LabelVector)>,
{
    let io = |source| MetadataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::io::BufWriter::new(File::create(path).map_err(io)?);
    writeln!(f, "{}", LABEL_HEADER.join(",")).map_err(io)?;
    for (id, labels) in rows {
        writeln!(f, "{},{}", id, labels.to_bit_string()).map_err(io)?;
    }
    f.flush().map_err(io)
}
