//! Multi-label tagging of geolocated photographs from frozen image and
//! text embeddings plus a normalized location.

pub mod data;
pub mod eval;
pub mod fusion;
pub mod heads;
pub mod ingest;
pub mod rng;
pub mod sweep;
pub mod train;
pub mod vocab;

pub use data::{Dataset, LabelVector, Modality, ModalityCombo, Sample};
pub use vocab::{TagVocabulary, NUM_TAGS};
