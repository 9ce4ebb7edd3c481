//! Packaged dataset directories: aligned GEOEMB files plus labels and titles,
//! described by a small `manifest.txt`.
//!
//! ```text
//! manifest.txt    format, sample count, present modalities, labeled count
//! image.geoemb    dim 512   (if every sample has an image embedding)
//! title.geoemb    dim 512   (if every sample has a title embedding)
//! location.geoemb dim 2     (if every sample has a location feature)
//! labels.csv      image_id,label_bits   (labeled samples only)
//! titles.csv      image_id,title        (samples with a title)
//! ```
//!
//! Records in every GEOEMB file follow the same sample order.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::geoemb::{load_embeddings, write_embeddings, GeoembError};
use super::metadata::{parse_label_file, write_label_file, MetadataError};
use crate::data::{
    DataError, Dataset, Embedding, LocationFeature, Modality, Sample, EMBED_DIM, LOCATION_DIM,
};

pub const FORMAT: &str = "geotag-package-1";
pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("{path}: {reason}")]
    Manifest { path: String, reason: String },
    #[error("{file}: record {index} has id {found}, expected {expected}")]
    Misaligned {
        file: String,
        index: usize,
        expected: u64,
        found: u64,
    },
    #[error(transparent)]
    Geoemb(#[from] GeoembError),
    #[error(transparent)]
    Metadata(#[from] MetadataError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Parsed `manifest.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub count: usize,
    pub modalities: Vec<Modality>,
    pub labeled: usize,
}

impl Manifest {
    pub fn has(&self, m: Modality) -> bool {
        self.modalities.contains(&m)
    }

    fn render(&self) -> String {
        let mods: Vec<&str> = self.modalities.iter().map(|m| m.name()).collect();
        format!(
            "format = {FORMAT}\ncount = {}\nmodalities = {}\nlabeled = {}\n",
            self.count,
            mods.join(","),
            self.labeled
        )
    }

    fn parse(path: &Path, text: &str) -> Result<Self, PackageError> {
        let bad = |reason: String| PackageError::Manifest {
            path: path.display().to_string(),
            reason,
        };
        let mut kv = BTreeMap::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        if kv.get("format").map(String::as_str) != Some(FORMAT) {
            return Err(bad(format!("format must be {FORMAT}")));
        }
        let num = |key: &str| -> Result<usize, PackageError> {
            kv.get(key)
                .ok_or_else(|| bad(format!("missing {key}")))?
                .parse()
                .map_err(|_| bad(format!("bad {key}")))
        };
        let modalities = kv
            .get("modalities")
            .map(String::as_str)
            .unwrap_or("")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "image" => Ok(Modality::Image),
                "title" => Ok(Modality::Title),
                "location" => Ok(Modality::Location),
                other => Err(bad(format!("unknown modality {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Manifest {
            count: num("count")?,
            modalities,
            labeled: num("labeled")?,
        })
    }
}

fn file_name(m: Modality) -> &'static str {
    match m {
        Modality::Image => "image.geoemb",
        Modality::Title => "title.geoemb",
        Modality::Location => "location.geoemb",
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PackageError + '_ {
    move |source| PackageError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_package(dir: &Path, dataset: &Dataset) -> Result<Manifest, PackageError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let samples = dataset.samples();
    let modalities: Vec<Modality> = [Modality::Image, Modality::Title, Modality::Location]
        .into_iter()
        .filter(|&m| !samples.is_empty() && samples.iter().all(|s| s.has(m)))
        .collect();

    for &m in &modalities {
        let path = dir.join(file_name(m));
        match m {
            Modality::Image | Modality::Title => {
                let recs = samples.iter().map(|s| {
                    let e = if m == Modality::Image {
                        &s.image_emb
                    } else {
                        &s.text_emb
                    };
                    (s.id, e.as_ref().expect("checked").as_slice())
                });
                write_embeddings(&path, EMBED_DIM, recs)?;
            }
            Modality::Location => {
                let locs: Vec<[f32; 2]> = samples
                    .iter()
                    .map(|s| {
                        let [a, b] = s.loc.expect("checked").values();
                        [a as f32, b as f32]
                    })
                    .collect();
                let recs = samples.iter().zip(&locs).map(|(s, l)| (s.id, &l[..]));
                write_embeddings(&path, LOCATION_DIM, recs)?;
            }
        }
    }

    let labeled: Vec<(u64, _)> = samples
        .iter()
        .filter_map(|s| s.labels.as_ref().map(|l| (s.id, l)))
        .collect();
    let labels_path = dir.join("labels.csv");
    if labeled.is_empty() {
        if labels_path.exists() {
            fs::remove_file(&labels_path).map_err(io_err(&labels_path))?;
        }
    } else {
        write_label_file(&labels_path, labeled.iter().copied())?;
    }

    let titles_path = dir.join("titles.csv");
    let csv_err = |source| PackageError::Csv {
        path: titles_path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(&titles_path).map_err(csv_err)?;
    w.write_record(["image_id", "title"]).map_err(csv_err)?;
    for s in samples {
        if let Some(t) = &s.title {
            w.write_record([s.id.to_string().as_str(), t.as_str()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(&titles_path))?;

    let manifest = Manifest {
        count: samples.len(),
        modalities,
        labeled: labeled.len(),
    };
    let mpath = dir.join(MANIFEST);
    fs::write(&mpath, manifest.render()).map_err(io_err(&mpath))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, PackageError> {
    let mpath = dir.join(MANIFEST);
    let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    Manifest::parse(&mpath, &text)
}

pub fn read_package(dir: &Path) -> Result<(Dataset, Manifest), PackageError> {
    let manifest = read_manifest(dir)?;
    let mut ids: Option<Vec<u64>> = None;
    let mut tables = HashMap::new();
    for &m in &manifest.modalities {
        let path = dir.join(file_name(m));
        let table = load_embeddings(&path, Some(m.dim()))?;
        match &ids {
            None => ids = Some(table.ids().to_vec()),
            Some(expected) => {
                if let Some((index, (&e, &f))) = expected
                    .iter()
                    .zip(table.ids())
                    .enumerate()
                    .find(|(_, (e, f))| e != f)
                {
                    return Err(PackageError::Misaligned {
                        file: path.display().to_string(),
                        index,
                        expected: e,
                        found: f,
                    });
                }
                if expected.len() != table.len() {
                    return Err(PackageError::Manifest {
                        path: path.display().to_string(),
                        reason: "record count differs between modality files".into(),
                    });
                }
            }
        }
        tables.insert(m, table);
    }
    let ids = ids.unwrap_or_default();
    if ids.len() != manifest.count {
        return Err(PackageError::Manifest {
            path: dir.join(MANIFEST).display().to_string(),
            reason: format!("count {} but files hold {}", manifest.count, ids.len()),
        });
    }

    let labels_path = dir.join("labels.csv");
    let labels = if labels_path.exists() {
        parse_label_file(&labels_path)?
    } else {
        HashMap::new()
    };
    let titles_path = dir.join("titles.csv");
    let mut titles = HashMap::new();
    if titles_path.exists() {
        let csv_err = |source| PackageError::Csv {
            path: titles_path.display().to_string(),
            source,
        };
        let mut r = csv::Reader::from_path(&titles_path).map_err(csv_err)?;
        for row in r.records() {
            let row = row.map_err(csv_err)?;
            let id: u64 = row[0].parse().map_err(|_| PackageError::Manifest {
                path: titles_path.display().to_string(),
                reason: format!("bad image_id {:?}", &row[0]),
            })?;
            titles.insert(id, row[1].to_string());
        }
    }

    let mut samples = Vec::with_capacity(ids.len());
    for &id in &ids {
        let mut s = Sample::new(id);
        if let Some(t) = tables.get(&Modality::Image) {
            s.image_emb = Some(Embedding::new(t.get(id).expect("aligned").to_vec())?);
        }
        if let Some(t) = tables.get(&Modality::Title) {
            s.text_emb = Some(Embedding::new(t.get(id).expect("aligned").to_vec())?);
        }
        if let Some(t) = tables.get(&Modality::Location) {
            let v = t.get(id).expect("aligned");
            s.loc = Some(LocationFeature::new([v[0] as f64, v[1] as f64])?);
        }
        s.labels = labels.get(&id).copied();
        s.title = titles.remove(&id);
        samples.push(s);
    }
    Ok((Dataset::new(samples)?, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::synth::synth_dataset;

    #[test]
    fn package_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = synth_dataset(20, 49, 0.0, 1).unwrap();
        let m = write_package(dir.path(), &s.dataset).unwrap();
        assert_eq!(m.count, 20);
        assert_eq!(m.labeled, 20);
        assert_eq!(m.modalities.len(), 3);
        let (back, m2) = read_package(dir.path()).unwrap();
        assert_eq!(m, m2);
        for (a, b) in s.dataset.samples().iter().zip(back.samples()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.image_emb, b.image_emb);
            assert_eq!(a.text_emb, b.text_emb);
            assert_eq!(a.labels, b.labels);
            assert_eq!(a.title, b.title);
            let (la, lb) = (a.loc.unwrap().values(), b.loc.unwrap().values());
            assert!((la[0] - lb[0]).abs() < 1e-6 && (la[1] - lb[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn manifest_rejects_unknown_format() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST), "format = other\ncount = 0\nlabeled = 0\n").unwrap();
        assert!(matches!(
            read_manifest(dir.path()),
            Err(PackageError::Manifest { .. })
        ));
    }
}
