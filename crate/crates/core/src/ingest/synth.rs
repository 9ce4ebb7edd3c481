//! Synthetic datasets with a known labelling rule.
//!
//! "Image" embeddings are unit vectors scattered around a set of random
//! prototype directions. Each prototype owns one to three labels, and the
//! hidden weight row of a label is the sum of the prototypes that own it.
//! A label is on when `hidden_weights[c] . z > threshold`. Title embeddings
//! and locations are drawn independently of the labels, so only the image
//! segment carries signal.

use rand::Rng as _;
use rand::seq::index::sample as sample_indices;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::data::{DataError, Dataset, Embedding, LabelVector, LocationFeature, Sample, EMBED_DIM};
use crate::rng::{derive_seed, rng_from_seed, stream, Rng};
use crate::vocab::NUM_TAGS;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("n_samples must be at least 1")]
    NoSamples,
    #[error("n_labels must be between 1 and {NUM_TAGS}, got {0}")]
    LabelCount(usize),
    #[error("noise level {0} must lie in [0, 1]")]
    NoiseLevel(f64),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub n_samples: usize,
    pub n_labels: usize,
    /// Probability of flipping each label bit after the rule is applied.
    pub noise_level: f64,
    pub seed: u64,
    pub prototypes: usize,
    /// Standard deviation of the isotropic scatter around a prototype,
    /// relative to the prototype's unit norm.
    pub spread: f64,
    pub threshold: f64,
}

impl SynthOptions {
    pub fn new(n_samples: usize, n_labels: usize, noise_level: f64, seed: u64) -> Self {
        SynthOptions {
            n_samples,
            n_labels,
            noise_level,
            seed,
            prototypes: 64,
            spread: 0.5,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub dataset: Dataset,
    /// `n_labels x 512` row-major generating weights.
    pub hidden_weights: Vec<f64>,
    pub threshold: f64,
    pub n_labels: usize,
    /// Labels before noise, aligned with `dataset.samples()`.
    pub clean_labels: Vec<LabelVector>,
}

impl SynthDataset {
    /// Applies the hidden rule to an embedding.
    pub fn rule(&self, z: &[f32]) -> LabelVector {
        rule(&self.hidden_weights, self.n_labels, self.threshold, z)
    }

    /// Per-tag positive counts of the (possibly noisy) stored labels.
    pub fn tag_counts(&self) -> [usize; NUM_TAGS] {
        let mut counts = [0; NUM_TAGS];
        for s in self.dataset.samples() {
            for i in s.labels.unwrap_or_default().indices() {
                counts[i] += 1;
            }
        }
        counts
    }
}

fn rule(weights: &[f64], n_labels: usize, threshold: f64, z: &[f32]) -> LabelVector {
    let mut v = LabelVector::empty();
    for c in 0..n_labels {
        let row = &weights[c * EMBED_DIM..(c + 1) * EMBED_DIM];
        let score: f64 = row.iter().zip(z).map(|(w, &x)| w * x as f64).sum();
        if score > threshold {
            v.set(c, true).expect("c < NUM_TAGS");
        }
    }
    v
}

fn unit_gaussian(rng: &mut Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn to_f32_unit(v: &[f64]) -> Vec<f32> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / norm) as f32).collect()
}

const WORDS: [&str; 24] = [
    "church", "lane", "bridge", "view", "towards", "from", "hill", "river", "farm", "station",
    "old", "the", "at", "near", "road", "wood", "harbour", "cottage", "path", "chapel", "north",
    "mill", "green", "house",
];

fn random_title(rng: &mut Rng) -> String {
    let n = rng.random_range(1..=7);
    (0..n)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn synth_dataset(
    n_samples: usize,
    n_labels: usize,
    noise_level: f64,
    seed: u64,
) -> Result<SynthDataset, SynthError> {
    synth_dataset_with(&SynthOptions::new(n_samples, n_labels, noise_level, seed))
}

pub fn synth_dataset_with(opts: &SynthOptions) -> Result<SynthDataset, SynthError> {
    if opts.n_samples == 0 {
        return Err(SynthError::NoSamples);
    }
    if opts.n_labels == 0 || opts.n_labels > NUM_TAGS {
        return Err(SynthError::LabelCount(opts.n_labels));
    }
    if !(0.0..=1.0).contains(&opts.noise_level) {
        return Err(SynthError::NoiseLevel(opts.noise_level));
    }
    let mut rng = rng_from_seed(derive_seed(opts.seed, &[stream::SYNTH]));
    let k = opts.prototypes.max(1);

    let prototypes: Vec<Vec<f64>> = (0..k).map(|_| unit_gaussian(&mut rng, EMBED_DIM)).collect();
    let mut hidden = vec![0.0f64; opts.n_labels * EMBED_DIM];
    for p in &prototypes {
        let owned = rng.random_range(1..=3usize.min(opts.n_labels));
        for c in sample_indices(&mut rng, opts.n_labels, owned) {
            for (w, x) in hidden[c * EMBED_DIM..(c + 1) * EMBED_DIM].iter_mut().zip(p) {
                *w += x;
            }
        }
    }

    let scatter = opts.spread / (EMBED_DIM as f64).sqrt();
    let mut samples = Vec::with_capacity(opts.n_samples);
    let mut clean_labels = Vec::with_capacity(opts.n_samples);
    let mut id = 1u64;
    while samples.len() < opts.n_samples {
        let proto = &prototypes[rng.random_range(0..k)];
        let raw: Vec<f64> = proto
            .iter()
            .map(|&p| p + scatter * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let z = to_f32_unit(&raw);
        let clean = rule(&hidden, opts.n_labels, opts.threshold, &z);
        if clean.is_empty() {
            continue;
        }
        let mut noisy = clean;
        if opts.noise_level > 0.0 {
            for c in 0..opts.n_labels {
                if rng.random::<f64>() < opts.noise_level {
                    noisy.set(c, !noisy.get(c)).expect("c < NUM_TAGS");
                }
            }
            if noisy.is_empty() {
                noisy = clean;
            }
        }
        let text = to_f32_unit(&unit_gaussian(&mut rng, EMBED_DIM));
        let loc = LocationFeature::new([rng.random::<f64>(), rng.random::<f64>()])?;
        samples.push(Sample {
            id,
            title: Some(random_title(&mut rng)),
            image_emb: Some(Embedding::new(z)?),
            text_emb: Some(Embedding::new(text)?),
            loc: Some(loc),
            labels: Some(noisy),
        });
        clean_labels.push(clean);
        id += 1;
    }

    Ok(SynthDataset {
        dataset: Dataset::new(samples)?,
        hidden_weights: hidden,
        threshold: opts.threshold,
        n_labels: opts.n_labels,
        clean_labels,
    })
}
