//! Getting data in: metadata and label files, grid references, location
//! features, GEOEMB embedding files, splitting and synthetic data.

pub mod geoemb;
pub mod gridref;
pub mod location;
pub mod metadata;
pub mod osgb;
pub mod package;
pub mod prepare;
pub mod split;
pub mod synth;

use thiserror::Error;

pub use geoemb::{load_embeddings, write_embeddings, EmbeddingTable, GeoembError};
pub use gridref::{parse_gridref, GridRef, GridRefError};
pub use location::{normalize_location, LocationError};
pub use metadata::{parse_label_file, parse_metadata_csv, MetadataError, MetadataRecord};
pub use osgb::{gridref_to_latlon, osgb36_to_wgs84, ProjectionError};
pub use package::{read_package, write_package, Manifest, PackageError};
pub use prepare::{join_sources, JoinSummary};
pub use split::{split_train_val, SplitError};
pub use synth::{synth_dataset, synth_dataset_with, SynthDataset, SynthError, SynthOptions};

use crate::data::DataError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line} (image {id}): {reason}")]
    Location { line: u64, id: u64, reason: String },
    #[error("embedding file has dimension {0}, expected 512")]
    EmbeddingDim(usize),
    #[error("join mismatch: {0}")]
    JoinMismatch(String),
    #[error(transparent)]
    Data(#[from] DataError),
}
