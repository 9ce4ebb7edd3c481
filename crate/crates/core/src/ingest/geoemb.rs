//! GEOEMB: a flat little-endian file of `(image_id, [f32; dim])` records.
//!
//! ```text
//! magic   8 bytes  "GEOEMB1\n"
//! dim     u32 LE
//! count   u64 LE
//! count × { id: u64 LE, values: dim × f32 LE }
//! ```
//!
//! There is no padding and no footer.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"GEOEMB1\n";
const HEADER_LEN: u64 = 8 + 4 + 8;

#[derive(Debug, Error)]
pub enum GeoembError {
    #[error("{path}: bad magic bytes")]
    BadMagic { path: String },
    #[error("{path}: file truncated (expected {expected} bytes, found {found})")]
    TruncatedFile {
        path: String,
        expected: u64,
        found: u64,
    },
    #[error("{path}: {extra} unexpected trailing bytes")]
    TrailingBytes { path: String, extra: u64 },
    #[error("{path}: dimension {found}, expected {expected}")]
    DimMismatch {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: duplicate image id {id}")]
    DuplicateId { path: String, id: u64 },
    #[error("record {index} has {found} values, expected {expected}")]
    RecordLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// Contents of a GEOEMB file: records in file order plus an id index.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    ids: Vec<u64>,
    values: Vec<f32>,
    index: HashMap<u64, usize>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn get(&self, id: u64) -> Option<&[f32]> {
        self.index
            .get(&id)
            .map(|&i| &self.values[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, id: u64) -> bool {
        self.index.contains_key(&id)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (u64, &[f32])> {
        self.ids
            .iter()
            .enumerate()
            .map(move |(i, &id)| (id, &self.values[i * self.dim..(i + 1) * self.dim]))
    }

    pub fn into_map(self) -> HashMap<u64, Vec<f32>> {
        let dim = self.dim;
        self.ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, self.values[i * dim..(i + 1) * dim].to_vec()))
            .collect()
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> GeoembError + '_ {
    move |source| GeoembError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes records in the given order.
pub fn write_embeddings<'a, I>(path: &Path, dim: usize, records: I) -> Result<(), GeoembError>
where
    I: IntoIterator<Item = (u64, &'a [f32])>,
    I::IntoIter: ExactSizeIterator,
{
    let records = records.into_iter();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(io_err(path));
    write(MAGIC)?;
    write(&(dim as u32).to_le_bytes())?;
    write(&(records.len() as u64).to_le_bytes())?;
    for (index, (id, values)) in records.enumerate() {
        if values.len() != dim {
            return Err(GeoembError::RecordLength {
                index,
                expected: dim,
                found: values.len(),
            });
        }
        write(&id.to_le_bytes())?;
        for v in values {
            write(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Reads a GEOEMB file. With `expected_dim`, a header of any other
/// dimension is rejected before the payload is read.
pub fn load_embeddings(
    path: &Path,
    expected_dim: Option<usize>,
) -> Result<EmbeddingTable, GeoembError> {
    let p = || path.display().to_string();
    let file = File::open(path).map_err(io_err(path))?;
    let file_len = file.metadata().map_err(io_err(path))?.len();
    let mut r = BufReader::new(file);

    if file_len < HEADER_LEN {
        let mut magic = vec![0u8; file_len.min(8) as usize];
        r.read_exact(&mut magic).map_err(io_err(path))?;
        if !MAGIC.starts_with(&magic) {
            return Err(GeoembError::BadMagic { path: p() });
        }
        return Err(GeoembError::TruncatedFile {
            path: p(),
            expected: HEADER_LEN,
            found: file_len,
        });
    }
    let mut header = [0u8; HEADER_LEN as usize];
    r.read_exact(&mut header).map_err(io_err(path))?;
    if &header[..8] != MAGIC {
        return Err(GeoembError::BadMagic { path: p() });
    }
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(header[12..20].try_into().unwrap());
    if let Some(expected) = expected_dim {
        if dim != expected {
            return Err(GeoembError::DimMismatch {
                path: p(),
                expected,
                found: dim,
            });
        }
    }

    let record_len = 8 + 4 * dim as u64;
    let expected = count
        .checked_mul(record_len)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .unwrap_or(u64::MAX);
    if file_len < expected {
        return Err(GeoembError::TruncatedFile {
            path: p(),
            expected,
            found: file_len,
        });
    }
    if file_len > expected {
        return Err(GeoembError::TrailingBytes {
            path: p(),
            extra: file_len - expected,
        });
    }

    let count = count as usize;
    let mut ids = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * dim);
    let mut index = HashMap::with_capacity(count);
    let mut buf = vec![0u8; record_len as usize];
    for i in 0..count {
        r.read_exact(&mut buf).map_err(io_err(path))?;
        let id = u64::from_le_bytes(buf[..8].try_into().unwrap());
        if index.insert(id, i).is_some() {
            return Err(GeoembError::DuplicateId { path: p(), id });
        }
        ids.push(id);
        values.extend(
            buf[8..]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap())),
        );
    }
    Ok(EmbeddingTable {
        dim,
        ids,
        values,
        index,
    })
}
