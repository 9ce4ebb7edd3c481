//! Binary head checkpoints.
//!
//! ```text
//! magic      8 bytes "GEOCKPT1"
//! combo      u8   (ModalityCombo tag: image=0 .. all=6)
//! kind       u8   (0 linear, 1 mlp)
//! input_dim  u32 LE
//! hidden     u32 LE  (0 for linear)
//! n_out      u32 LE
//! dropout_p  f32 LE  (0 for linear)
//! seed       u64 LE
//! epoch      u32 LE  (epoch the parameters were taken from)
//! params     f32 LE, row-major:
//!            linear: W (n_out x input_dim), b (n_out)
//!            mlp:    W1 (hidden x input_dim), b1 (hidden), W2 (n_out x hidden), b2 (n_out)
//! ```

use std::fs;
use std::io;
use std::path::Path;

use ndarray::{Array1, Array2};
use thiserror::Error;

use super::{Head, HeadKind, LinearHead, MlpHead};
use crate::data::ModalityCombo;

pub const CKPT_MAGIC: &[u8; 8] = b"GEOCKPT1";
const HEADER_LEN: usize = 8 + 1 + 1 + 4 + 4 + 4 + 4 + 8 + 4;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: bad checkpoint magic")]
    BadMagic { path: String },
    #[error("{path}: checkpoint truncated (expected {expected} bytes, found {found})")]
    Truncated {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {extra} unexpected trailing bytes")]
    TrailingBytes { path: String, extra: usize },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// A trained head together with the combination it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub combo: ModalityCombo,
    pub head: Head<f32>,
    pub seed: u64,
    pub epoch: u32,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let (hidden, dropout) = match &self.head {
            Head::Linear(_) => (0u32, 0.0f32),
            Head::Mlp(m) => (m.hidden_dim() as u32, m.dropout_p as f32),
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.head.num_params());
        out.extend_from_slice(CKPT_MAGIC);
        out.push(self.combo.tag());
        out.push(self.head.kind().tag());
        out.extend((self.head.input_dim() as u32).to_le_bytes());
        out.extend(hidden.to_le_bytes());
        out.extend((self.head.output_dim() as u32).to_le_bytes());
        out.extend(dropout.to_le_bytes());
        out.extend(self.seed.to_le_bytes());
        out.extend(self.epoch.to_le_bytes());
        for p in self.head.params() {
            for v in p {
                out.extend(v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(path: &str, bytes: &[u8]) -> Result<Self, CheckpointError> {
        let invalid = |reason: String| CheckpointError::Invalid {
            path: path.to_string(),
            reason,
        };
        if bytes.len() < 8 || &bytes[..8] != CKPT_MAGIC {
            return Err(CheckpointError::BadMagic {
                path: path.to_string(),
            });
        }
        if bytes.len() < HEADER_LEN {
            return Err(CheckpointError::Truncated {
                path: path.to_string(),
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let combo = ModalityCombo::from_tag(bytes[8])
            .ok_or_else(|| invalid(format!("unknown combo tag {}", bytes[8])))?;
        let kind = HeadKind::from_tag(bytes[9])
            .ok_or_else(|| invalid(format!("unknown head kind {}", bytes[9])))?;
        let (d, hidden, n_out) = (u32_at(10), u32_at(14), u32_at(18));
        let dropout = f32::from_le_bytes(bytes[22..26].try_into().unwrap());
        let seed = u64::from_le_bytes(bytes[26..34].try_into().unwrap());
        let epoch = u32_at(34) as u32;
        if d != combo.dim() {
            return Err(invalid(format!(
                "input dim {d} does not match combination {combo} ({})",
                combo.dim()
            )));
        }
        if n_out == 0 {
            return Err(invalid("zero outputs".into()));
        }
        let n_params = match kind {
            HeadKind::Linear => n_out * d + n_out,
            HeadKind::Mlp => {
                if hidden == 0 || !(0.0..1.0).contains(&dropout) {
                    return Err(invalid("bad MLP hidden width or dropout".into()));
                }
                hidden * d + hidden + n_out * hidden + n_out
            }
        };
        let expected = HEADER_LEN + 4 * n_params;
        if bytes.len() < expected {
            return Err(CheckpointError::Truncated {
                path: path.to_string(),
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(CheckpointError::TrailingBytes {
                path: path.to_string(),
                extra: bytes.len() - expected,
            });
        }
        let mut floats = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| -> Vec<f32> { floats.by_ref().take(n).collect() };
        let mat = |v: Vec<f32>, r: usize, c: usize| Array2::from_shape_vec((r, c), v).unwrap();
        let head = match kind {
            HeadKind::Linear => Head::Linear(LinearHead {
                weight: mat(take(n_out * d), n_out, d),
                bias: Array1::from(take(n_out)),
            }),
            HeadKind::Mlp => Head::Mlp(MlpHead {
                w1: mat(take(hidden * d), hidden, d),
                b1: Array1::from(take(hidden)),
                w2: mat(take(n_out * hidden), n_out, hidden),
                b2: Array1::from(take(n_out)),
                dropout_p: dropout as f64,
            }),
        };
        Ok(Checkpoint {
            combo,
            head,
            seed,
            epoch,
        })
    }
}

pub fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    if ckpt.head.input_dim() != ckpt.combo.dim() {
        return Err(CheckpointError::Invalid {
            path: path.display().to_string(),
            reason: format!(
                "head input dim {} does not match combination {}",
                ckpt.head.input_dim(),
                ckpt.combo
            ),
        });
    }
    fs::write(path, ckpt.to_bytes()).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let p = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io {
        path: p.clone(),
        source,
    })?;
    Checkpoint::from_bytes(&p, &bytes)
}
