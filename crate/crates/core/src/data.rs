//! Shared domain types: label vectors, embeddings, samples and datasets.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::vocab::{TagVocabulary, NUM_TAGS};

/// Width of the frozen image and text embeddings.
pub const EMBED_DIM: usize = 512;
/// Width of the normalised location feature.
pub const LOCATION_DIM: usize = 2;

/// Sanity range for normalised location values. Values are not clamped.
pub const LOCATION_GUARD: (f64, f64) = (-0.1, 1.1);

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("embedding has {got} values, expected {expected}")]
    EmbeddingDim { expected: usize, got: usize },
    #[error("embedding value at position {0} is not finite")]
    NonFiniteEmbedding(usize),
    #[error("location feature {0:?} is not finite")]
    NonFiniteLocation([f64; 2]),
    #[error("location feature {0:?} lies outside the sanity range [-0.1, 1.1]")]
    LocationOutOfRange([f64; 2]),
    #[error("tag index {0} out of range (vocabulary has {NUM_TAGS} tags)")]
    TagIndex(usize),
    #[error("label string must be {NUM_TAGS} characters of '0'/'1': {0:?}")]
    BadLabelString(String),
    #[error("duplicate sample id {0}")]
    DuplicateId(u64),
    #[error("unknown modality combination {0:?}")]
    UnknownCombo(String),
}

/// Multi-hot indicator over the 49 tags. Bit `i` corresponds to tag index `i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelVector(u64);

impl LabelVector {
    const MASK: u64 = (1u64 << NUM_TAGS) - 1;

    pub fn empty() -> Self {
        LabelVector(0)
    }

    pub fn from_bits(bits: u64) -> Result<Self, DataError> {
        if bits & !Self::MASK != 0 {
            return Err(DataError::TagIndex(63 - bits.leading_zeros() as usize));
        }
        Ok(LabelVector(bits))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self, DataError> {
        let mut v = LabelVector(0);
        for i in indices {
            v.set(i, true)?;
        }
        Ok(v)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn get(self, index: usize) -> bool {
        index < NUM_TAGS && (self.0 >> index) & 1 == 1
    }

    pub fn set(&mut self, index: usize, on: bool) -> Result<(), DataError> {
        if index >= NUM_TAGS {
            return Err(DataError::TagIndex(index));
        }
        if on {
            self.0 |= 1 << index;
        } else {
            self.0 &= !(1 << index);
        }
        Ok(())
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Indices of set bits in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..NUM_TAGS).filter(move |&i| self.get(i))
    }

    /// 49-character `'0'`/`'1'` string, index 0 leftmost.
    pub fn to_bit_string(self) -> String {
        (0..NUM_TAGS)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn parse_bit_string(s: &str) -> Result<Self, DataError> {
        let bytes = s.as_bytes();
        if bytes.len() != NUM_TAGS {
            return Err(DataError::BadLabelString(s.to_string()));
        }
        let mut bits = 0u64;
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'0' => {}
                b'1' => bits |= 1 << i,
                _ => return Err(DataError::BadLabelString(s.to_string())),
            }
        }
        Ok(LabelVector(bits))
    }
}

impl fmt::Debug for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

/// A frozen-encoder embedding: exactly 512 finite `f32` values.
#[derive(Clone, PartialEq)]
pub struct Embedding(Box<[f32]>);

/// Image-encoder output.
pub type ImageEmbedding = Embedding;
/// Text-encoder output for the image title.
pub type TextEmbedding = Embedding;

impl Embedding {
    pub fn new(values: Vec<f32>) -> Result<Self, DataError> {
        if values.len() != EMBED_DIM {
            return Err(DataError::EmbeddingDim {
                expected: EMBED_DIM,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteEmbedding(pos));
        }
        Ok(Embedding(values.into_boxed_slice()))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Embedding([{}, {}, ..; {}])", self.0[0], self.0[1], self.0.len())
    }
}

/// Normalised `[lat, lon]` location feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationFeature([f64; 2]);

impl LocationFeature {
    pub fn new(values: [f64; 2]) -> Result<Self, DataError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteLocation(values));
        }
        let (lo, hi) = LOCATION_GUARD;
        if values.iter().any(|&v| v < lo || v > hi) {
            return Err(DataError::LocationOutOfRange(values));
        }
        Ok(LocationFeature(values))
    }

    pub fn values(&self) -> [f64; 2] {
        self.0
    }
}

/// One input modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Image,
    Title,
    Location,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Image => "image",
            Modality::Title => "title",
            Modality::Location => "location",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Modality::Image | Modality::Title => EMBED_DIM,
            Modality::Location => LOCATION_DIM,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which modalities are concatenated into the classifier input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalityCombo {
    Image,
    Title,
    Location,
    ImageTitle,
    ImageLocation,
    TitleLocation,
    All,
}

impl ModalityCombo {
    pub const ALL: [ModalityCombo; 7] = [
        ModalityCombo::Image,
        ModalityCombo::Title,
        ModalityCombo::Location,
        ModalityCombo::ImageTitle,
        ModalityCombo::ImageLocation,
        ModalityCombo::TitleLocation,
        ModalityCombo::All,
    ];

    /// Member modalities in concatenation order (image, title, location).
    pub fn modalities(self) -> &'static [Modality] {
        use Modality::*;
        match self {
            ModalityCombo::Image => &[Image],
            ModalityCombo::Title => &[Title],
            ModalityCombo::Location => &[Location],
            ModalityCombo::ImageTitle => &[Image, Title],
            ModalityCombo::ImageLocation => &[Image, Location],
            ModalityCombo::TitleLocation => &[Title, Location],
            ModalityCombo::All => &[Image, Title, Location],
        }
    }

    pub fn contains(self, m: Modality) -> bool {
        self.modalities().contains(&m)
    }

    /// Fused feature dimension.
    pub fn dim(self) -> usize {
        self.modalities().iter().map(|m| m.dim()).sum()
    }

    /// Stable numeric tag used in checkpoint files.
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModalityCombo::Image => "image",
            ModalityCombo::Title => "title",
            ModalityCombo::Location => "location",
            ModalityCombo::ImageTitle => "image+title",
            ModalityCombo::ImageLocation => "image+location",
            ModalityCombo::TitleLocation => "title+location",
            ModalityCombo::All => "all",
        }
    }
}

/// Fused dimension of a combination.
pub fn combo_dim(combo: ModalityCombo) -> usize {
    combo.dim()
}

impl fmt::Display for ModalityCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModalityCombo {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(' ', "");
        let found = match norm.as_str() {
            "image" => ModalityCombo::Image,
            "title" => ModalityCombo::Title,
            "location" => ModalityCombo::Location,
            "image+title" => ModalityCombo::ImageTitle,
            "image+location" => ModalityCombo::ImageLocation,
            "title+location" => ModalityCombo::TitleLocation,
            "all" | "image+title+location" => ModalityCombo::All,
            _ => return Err(DataError::UnknownCombo(s.to_string())),
        };
        Ok(found)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub title: Option<String>,
    pub image_emb: Option<ImageEmbedding>,
    pub text_emb: Option<TextEmbedding>,
    pub loc: Option<LocationFeature>,
    pub labels: Option<LabelVector>,
}

impl Sample {
    pub fn new(id: u64) -> Self {
        Sample {
            id,
            title: None,
            image_emb: None,
            text_emb: None,
            loc: None,
            labels: None,
        }
    }

    pub fn has(&self, m: Modality) -> bool {
        match m {
            Modality::Image => self.image_emb.is_some(),
            Modality::Title => self.text_emb.is_some(),
            Modality::Location => self.loc.is_some(),
        }
    }
}

/// Ordered samples with unique ids over the built-in vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    vocabulary: TagVocabulary,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self, DataError> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if !seen.insert(s.id) {
                return Err(DataError::DuplicateId(s.id));
            }
        }
        Ok(Dataset {
            samples,
            vocabulary: TagVocabulary::builtin(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn vocabulary(&self) -> &TagVocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.labels.is_some())
    }

    /// `(id, labels)` pairs for labeled samples, in dataset order.
    pub fn truth(&self) -> Vec<(u64, LabelVector)> {
        self.samples
            .iter()
            .filter_map(|s| s.labels.map(|l| (s.id, l)))
            .collect()
    }
}
