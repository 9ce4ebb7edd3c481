//! Concatenates per-sample modalities into the classifier input, always in
//! the order image, title, location.

use ndarray::Array2;
use thiserror::Error;

use crate::data::{Modality, ModalityCombo, Sample};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FusionError {
    #[error("sample {id} is missing the {modality} modality")]
    MissingModality { id: u64, modality: Modality },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub combo: ModalityCombo,
    pub values: Vec<f32>,
}

fn append(sample: &Sample, m: Modality, out: &mut [f32]) -> Result<(), FusionError> {
    let missing = || FusionError::MissingModality {
        id: sample.id,
        modality: m,
    };
    match m {
        Modality::Image => {
            out.copy_from_slice(sample.image_emb.as_ref().ok_or_else(missing)?.as_slice())
        }
        Modality::Title => {
            out.copy_from_slice(sample.text_emb.as_ref().ok_or_else(missing)?.as_slice())
        }
        Modality::Location => {
            let [a, b] = sample.loc.ok_or_else(missing)?.values();
            out[0] = a as f32;
            out[1] = b as f32;
        }
    }
    Ok(())
}

fn fuse_into(sample: &Sample, combo: ModalityCombo, out: &mut [f32]) -> Result<(), FusionError> {
    let mut offset = 0;
    for &m in combo.modalities() {
        append(sample, m, &mut out[offset..offset + m.dim()])?;
        offset += m.dim();
    }
    Ok(())
}

/// Fused feature vector of one sample; no rescaling is applied.
pub fn fuse(sample: &Sample, combo: ModalityCombo) -> Result<FeatureVector, FusionError> {
    let mut values = vec![0.0; combo.dim()];
    fuse_into(sample, combo, &mut values)?;
    Ok(FeatureVector { combo, values })
}

/// Fused `N x combo.dim()` matrix, one row per sample.
pub fn fuse_batch<'a, I>(samples: I, combo: ModalityCombo) -> Result<Array2<f32>, FusionError>
where
    I: IntoIterator<Item = &'a Sample>,
    I::IntoIter: ExactSizeIterator,
{
    let samples = samples.into_iter();
    let mut out = Array2::zeros((samples.len(), combo.dim()));
    for (mut row, s) in out.rows_mut().into_iter().zip(samples) {
        fuse_into(s, combo, row.as_slice_mut().expect("standard layout"))?;
    }
    Ok(out)
}
