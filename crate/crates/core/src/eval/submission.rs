//! Submission CSV: `image_id,tags` with ascending, space-separated tag
//! indices, rows sorted by id.

use std::fs;
use std::path::Path;

use super::{EvalError, PredictionSet};
use crate::data::LabelVector;

pub fn render_submission(pred: &PredictionSet) -> Result<String, EvalError> {
    let mut rows: Vec<(u64, LabelVector)> =
        pred.ids.iter().copied().zip(pred.decisions.iter().copied()).collect();
    rows.sort_by_key(|(id, _)| *id);
    let mut out = String::from("image_id,tags\n");
    for (id, d) in rows {
        if d.is_empty() {
            return Err(EvalError::EmptyPredictionRow(id));
        }
        let tags: Vec<String> = d.indices().map(|i| i.to_string()).collect();
        out.push_str(&format!("{},{}\n", id, tags.join(" ")));
    }
    Ok(out)
}

/// Writes the submission; refuses rows without a tag.
pub fn write_submission(pred: &PredictionSet, path: &Path) -> Result<(), EvalError> {
    let text = render_submission(pred)?;
    fs::write(path, text).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_submission(path: &Path) -> Result<Vec<(u64, LabelVector)>, EvalError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: p.clone(),
        source,
    })?;
    let bad = |line: usize, reason: String| EvalError::Malformed {
        path: p.clone(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "image_id,tags")) => {}
        _ => return Err(bad(1, "expected header image_id,tags".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let (id, tags) = line
            .split_once(',')
            .ok_or_else(|| bad(n, "missing comma".into()))?;
        let id: u64 = id.parse().map_err(|_| bad(n, format!("bad id {id:?}")))?;
        let indices = tags
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| bad(n, format!("bad tag {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if indices.is_empty() {
            return Err(EvalError::EmptyPredictionRow(id));
        }
        let v = LabelVector::from_indices(indices).map_err(|e| bad(n, e.to_string()))?;
        out.push((id, v));
    }
    Ok(out)
}
