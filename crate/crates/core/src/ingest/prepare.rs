//! Joins metadata, labels and embedding files into one dataset.

use std::collections::{HashMap, HashSet};

use log::warn;

use super::geoemb::EmbeddingTable;
use super::gridref::parse_gridref;
use super::location::normalize_location;
use super::metadata::MetadataRecord;
use super::osgb::{gridref_to_latlon, osgb36_to_wgs84};
use super::IngestError;
use crate::data::{Dataset, Embedding, LabelVector, LocationFeature, Sample, EMBED_DIM};

/// Counts reported after a join.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JoinSummary {
    pub metadata_rows: usize,
    pub joined: usize,
    /// Metadata ids dropped because the image embedding was absent.
    pub missing_image: Vec<u64>,
    /// Metadata ids dropped because the title embedding was absent.
    pub missing_title: Vec<u64>,
    /// Embedding-file ids with no metadata row.
    pub unmatched_embedding_ids: usize,
    /// Label-file ids with no metadata row.
    pub unmatched_label_ids: usize,
    /// Rows whose metadata tags disagreed with the label file.
    pub label_conflicts: usize,
    pub unlabeled: usize,
}

impl JoinSummary {
    pub fn dropped(&self) -> usize {
        self.metadata_rows - self.joined
    }
}

/// Normalised location of a metadata row: grid-cell centroid when a grid
/// reference is given, otherwise the numeric easting/northing point.
pub fn record_location(rec: &MetadataRecord) -> Result<LocationFeature, IngestError> {
    let wrap = |reason: String| IngestError::Location {
        line: rec.line,
        id: rec.image_id,
        reason,
    };
    let (lat, lon) = if !rec.gridref.is_empty() {
        let g = parse_gridref(&rec.gridref).map_err(|e| wrap(e.to_string()))?;
        gridref_to_latlon(&g).map_err(|e| wrap(e.to_string()))?
    } else {
        let (e, n) = rec
            .easting_northing
            .ok_or_else(|| wrap("no grid reference".into()))?;
        osgb36_to_wgs84(e, n).map_err(|e| wrap(e.to_string()))?
    };
    normalize_location(lat, lon).map_err(|e| wrap(e.to_string()))
}

pub fn join_sources(
    records: &[MetadataRecord],
    labels: Option<&HashMap<u64, LabelVector>>,
    image: &EmbeddingTable,
    title: &EmbeddingTable,
) -> Result<(Dataset, JoinSummary), IngestError> {
    for t in [image, title] {
        if t.dim() != EMBED_DIM {
            return Err(IngestError::EmbeddingDim(t.dim()));
        }
    }
    let mut summary = JoinSummary {
        metadata_rows: records.len(),
        ..Default::default()
    };
    let meta_ids: HashSet<u64> = records.iter().map(|r| r.image_id).collect();
    let mut samples = Vec::with_capacity(records.len());

    for rec in records {
        let loc = record_location(rec)?;
        let (img, txt) = (image.get(rec.image_id), title.get(rec.image_id));
        if img.is_none() {
            summary.missing_image.push(rec.image_id);
        }
        if txt.is_none() {
            summary.missing_title.push(rec.image_id);
        }
        let (Some(img), Some(txt)) = (img, txt) else {
            continue;
        };

        let from_meta = rec.labels();
        let from_file = labels.and_then(|m| m.get(&rec.image_id)).copied();
        let labels = match (from_meta, from_file) {
            (Some(a), Some(b)) if a != b => {
                warn!(
                    "image {}: metadata tags {:?} disagree with label file {:?}; using label file",
                    rec.image_id, a, b
                );
                summary.label_conflicts += 1;
                Some(b)
            }
            (_, Some(b)) => Some(b),
            (a, None) => a,
        };
        if labels.is_none() {
            summary.unlabeled += 1;
        }

        samples.push(Sample {
            id: rec.image_id,
            title: Some(rec.title.clone()),
            image_emb: Some(Embedding::new(img.to_vec())?),
            text_emb: Some(Embedding::new(txt.to_vec())?),
            loc: Some(loc),
            labels,
        });
    }

    summary.joined = samples.len();
    summary.unmatched_embedding_ids = image
        .ids()
        .iter()
        .chain(title.ids())
        .filter(|id| !meta_ids.contains(id))
        .collect::<HashSet<_>>()
        .len();
    summary.unmatched_label_ids = labels
        .map(|m| m.keys().filter(|id| !meta_ids.contains(id)).count())
        .unwrap_or(0);

    if samples.is_empty() {
        return Err(IngestError::JoinMismatch(format!(
            "no metadata row matched both embedding files ({} rows, {} missing image, {} missing title)",
            summary.metadata_rows,
            summary.missing_image.len(),
            summary.missing_title.len()
        )));
    }
    Ok((Dataset::new(samples)?, summary))
}
