use std::fmt::Write as _;

use super::EvalError;
use crate::data::Dataset;
use crate::vocab::NUM_TAGS;

#[derive(Debug, Clone, PartialEq)]
pub struct TitleStats {
    pub count: usize,
    pub missing: usize,
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
}

/// Numeric summary of a dataset: tags per image, tag frequencies and title
/// lengths (in characters).
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub samples: usize,
    pub labeled: usize,
    /// `tags_per_sample[k]` = labeled samples carrying exactly `k` tags.
    pub tags_per_sample: Vec<usize>,
    pub tag_frequency: [usize; NUM_TAGS],
    pub titles: Option<TitleStats>,
}

pub fn dataset_stats(dataset: &Dataset) -> Result<DatasetStats, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let mut tags_per_sample = vec![0usize; NUM_TAGS + 1];
    let mut tag_frequency = [0usize; NUM_TAGS];
    let mut labeled = 0;
    let mut lengths = Vec::new();
    let mut missing = 0;
    for s in dataset.samples() {
        if let Some(l) = s.labels {
            labeled += 1;
            tags_per_sample[l.count()] += 1;
            for i in l.indices() {
                tag_frequency[i] += 1;
            }
        }
        match &s.title {
            Some(t) => lengths.push(t.chars().count()),
            None => missing += 1,
        }
    }
    while tags_per_sample.len() > 1 && *tags_per_sample.last().unwrap() == 0 {
        tags_per_sample.pop();
    }
    let titles = if lengths.is_empty() {
        None
    } else {
        lengths.sort_unstable();
        let n = lengths.len();
        let median = if n % 2 == 1 {
            lengths[n / 2] as f64
        } else {
            (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
        };
        Some(TitleStats {
            count: n,
            missing,
            mean: lengths.iter().sum::<usize>() as f64 / n as f64,
            median,
            min: lengths[0],
            max: lengths[n - 1],
        })
    };
    Ok(DatasetStats {
        samples: dataset.len(),
        labeled,
        tags_per_sample,
        tag_frequency,
        titles,
    })
}

impl DatasetStats {
    /// Plain-text report with CSV blocks for the histogram and tag table.
    pub fn render(&self, vocab: &crate::vocab::TagVocabulary) -> String {
        let mut out = String::new();
        writeln!(out, "# samples={} labeled={}", self.samples, self.labeled).unwrap();
        writeln!(out, "\n# tags per image").unwrap();
        writeln!(out, "tags,images").unwrap();
        for (k, n) in self.tags_per_sample.iter().enumerate() {
            writeln!(out, "{k},{n}").unwrap();
        }
        writeln!(out, "\n# tag frequency").unwrap();
        writeln!(out, "index,name,count").unwrap();
        for (i, n) in self.tag_frequency.iter().enumerate() {
            let name = vocab.name(i).unwrap_or("?");
            writeln!(out, "{i},\"{name}\",{n}").unwrap();
        }
        writeln!(out, "\n# title length (characters)").unwrap();
        match &self.titles {
            Some(t) => writeln!(
                out,
                "count={} missing={} mean={:.2} median={:.1} min={} max={}",
                t.count, t.missing, t.mean, t.median, t.min, t.max
            )
            .unwrap(),
            None => writeln!(out, "no titles").unwrap(),
        }
        out
    }
}
