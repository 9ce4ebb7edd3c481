//! The modality x head x MixUp experiment grid.

use std::fmt::Write as _;
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;

use crate::data::{Dataset, Modality, ModalityCombo};
use crate::heads::HeadKind;
use crate::rng::{derive_seed, stream};
use crate::train::{fit, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub combo: ModalityCombo,
    pub head: HeadKind,
    pub mixup: bool,
}

/// All 28 cells, MixUp-off block first, then by combo, then linear before MLP.
pub fn full_grid() -> Vec<GridCell> {
    let mut cells = Vec::with_capacity(28);
    for mixup in [false, true] {
        for combo in ModalityCombo::ALL {
            for head in HeadKind::ALL {
                cells.push(GridCell { combo, head, mixup });
            }
        }
    }
    cells
}

/// Restricts the grid along each axis; `None` keeps the whole axis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSelector {
    pub combos: Option<Vec<ModalityCombo>>,
    pub heads: Option<Vec<HeadKind>>,
    pub mixup: Option<Vec<bool>>,
}

impl GridSelector {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn single(cell: GridCell) -> Self {
        GridSelector {
            combos: Some(vec![cell.combo]),
            heads: Some(vec![cell.head]),
            mixup: Some(vec![cell.mixup]),
        }
    }

    pub fn contains(&self, c: &GridCell) -> bool {
        self.combos.as_ref().is_none_or(|v| v.contains(&c.combo))
            && self.heads.as_ref().is_none_or(|v| v.contains(&c.head))
            && self.mixup.as_ref().is_none_or(|v| v.contains(&c.mixup))
    }

    pub fn cells(&self) -> Vec<GridCell> {
        full_grid().into_iter().filter(|c| self.contains(c)).collect()
    }

    /// Parses comma-separated lists such as `image,location`, `linear` and
    /// `off,on`.
    pub fn parse(
        combos: Option<&str>,
        heads: Option<&str>,
        mixup: Option<&str>,
    ) -> Result<Self, String> {
        fn list<T>(s: Option<&str>, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<Vec<T>>, String> {
            s.map(|s| s.split(',').map(|p| f(p.trim())).collect()).transpose()
        }
        Ok(GridSelector {
            combos: list(combos, |p| ModalityCombo::from_str(p).map_err(|e| e.to_string()))?,
            heads: list(heads, HeadKind::from_str)?,
            mixup: list(mixup, |p| match p {
                "on" | "yes" | "true" => Ok(true),
                "off" | "no" | "false" => Ok(false),
                _ => Err(format!("bad mixup value {p:?} (expected on or off)")),
            })?,
        })
    }
}

/// Seed for one cell, a pure function of the base seed and the cell.
pub fn cell_seed(base_seed: u64, cell: &GridCell) -> u64 {
    derive_seed(
        base_seed,
        &[
            stream::SWEEP,
            cell.combo.tag() as u64,
            cell.head.tag() as u64,
            cell.mixup as u64,
        ],
    )
}

/// `base` with the cell's combo, head, MixUp flag and sub-seed.
pub fn cell_config(base: &TrainConfig, cell: &GridCell) -> TrainConfig {
    TrainConfig {
        combo: cell.combo,
        head_kind: cell.head,
        mixup_enabled: cell.mixup,
        seed: cell_seed(base.seed, cell),
        ..base.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub best_val_subset_acc: f64,
    pub best_val_macro_f1: f64,
    pub best_epoch: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: GridCell,
    pub outcome: Result<CellMetrics, String>,
}

pub fn run_cell(train: &Dataset, val: &Dataset, base: &TrainConfig, cell: GridCell) -> CellResult {
    let cfg = cell_config(base, &cell);
    let outcome = fit(train, val, &cfg)
        .map(|o| CellMetrics {
            best_val_subset_acc: o.report.best_val_subset_acc,
            best_val_macro_f1: o.report.best_val_macro_f1,
            best_epoch: o.report.best_epoch,
            seconds: o.report.seconds,
        })
        .map_err(|e| e.to_string());
    match &outcome {
        Ok(m) => info!(
            "{} mixup={} {}: acc {:.4} f1 {:.4}",
            cell.combo, cell.mixup, cell.head, m.best_val_subset_acc, m.best_val_macro_f1
        ),
        Err(e) => warn!("{} mixup={} {} failed: {e}", cell.combo, cell.mixup, cell.head),
    }
    CellResult { cell, outcome }
}

/// Fits every selected cell. `workers <= 1` runs the cells one after
/// another; otherwise up to `workers` cells run at once. Results come back in
/// grid order either way, and a failing cell does not stop the others.
pub fn run_sweep(
    train: &Dataset,
    val: &Dataset,
    base: &TrainConfig,
    selector: &GridSelector,
    workers: usize,
) -> SweepTable {
    let cells = selector.cells();
    let results = if workers <= 1 {
        cells.into_iter().map(|c| run_cell(train, val, base, c)).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| {
                cells
                    .into_par_iter()
                    .map(|c| run_cell(train, val, base, c))
                    .collect()
            }),
            Err(e) => {
                warn!("could not start {workers} workers ({e}); running sequentially");
                cells.into_iter().map(|c| run_cell(train, val, base, c)).collect()
            }
        }
    };
    SweepTable { results }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub results: Vec<CellResult>,
}

fn combo_label(c: ModalityCombo) -> String {
    c.modalities()
        .iter()
        .map(|m| match m {
            Modality::Image => "Image",
            Modality::Title => "Title",
            Modality::Location => "Location",
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

impl SweepTable {
    pub fn get(&self, cell: &GridCell) -> Option<&CellResult> {
        self.results.iter().find(|r| r.cell == *cell)
    }

    /// Cell with the highest value of `metric` (first in grid order on ties).
    pub fn best_by(&self, metric: impl Fn(&CellMetrics) -> f64) -> Option<GridCell> {
        let mut best: Option<(GridCell, f64)> = None;
        for r in &self.results {
            if let Ok(m) = &r.outcome {
                let v = metric(m);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((r.cell, v));
                }
            }
        }
        best.map(|(c, _)| c)
    }

    /// `combo,mixup,head,best_val_subset_acc,best_val_macro_f1,best_epoch,seconds`;
    /// failed cells have empty metric fields.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("combo,mixup,head,best_val_subset_acc,best_val_macro_f1,best_epoch,seconds\n");
        for r in &self.results {
            let c = &r.cell;
            match &r.outcome {
                Ok(m) => writeln!(
                    s,
                    "{},{},{},{},{},{},{:.3}",
                    c.combo, c.mixup, c.head, m.best_val_subset_acc, m.best_val_macro_f1,
                    m.best_epoch, m.seconds
                ),
                Err(_) => writeln!(s, "{},{},{},,,,", c.combo, c.mixup, c.head),
            }
            .unwrap();
        }
        s
    }

    /// Aligned text table: one row per (combo, MixUp) present, F1 and
    /// accuracy columns per head. The best value of each metric carries a
    /// trailing `*`; missing cells show `-`, failed cells `failed`.
    pub fn render_text(&self) -> String {
        let best_f1 = self.best_by(|m| m.best_val_macro_f1);
        let best_acc = self.best_by(|m| m.best_val_subset_acc);
        let cell_text = |cell: GridCell, acc: bool| -> String {
            match self.get(&cell).map(|r| &r.outcome) {
                None => "-".into(),
                Some(Err(_)) => "failed".into(),
                Some(Ok(m)) => {
                    let (v, best) = if acc {
                        (m.best_val_subset_acc, best_acc)
                    } else {
                        (m.best_val_macro_f1, best_f1)
                    };
                    let mark = if best == Some(cell) { "*" } else { "" };
                    format!("{v:.3}{mark}")
                }
            }
        };
        let header = [
            "Input Modality",
            "MixUp",
            "Val F1 Linear",
            "Val F1 MLP",
            "Val Acc Linear",
            "Val Acc MLP",
        ];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
        for mixup in [false, true] {
            for combo in ModalityCombo::ALL {
                if !self.results.iter().any(|r| r.cell.combo == combo && r.cell.mixup == mixup) {
                    continue;
                }
                let at = |head| GridCell { combo, head, mixup };
                rows.push(vec![
                    combo_label(combo),
                    if mixup { "Yes" } else { "No" }.into(),
                    cell_text(at(HeadKind::Linear), false),
                    cell_text(at(HeadKind::Mlp), false),
                    cell_text(at(HeadKind::Linear), true),
                    cell_text(at(HeadKind::Mlp), true),
                ]);
            }
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap())
            .collect();
        let mut s = String::new();
        for (i, r) in rows.iter().enumerate() {
            let cols: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (v, w))| if j < 2 { format!("{v:<w$}") } else { format!("{v:>w$}") })
                .collect();
            writeln!(s, "{}", cols.join(" | ").trim_end()).unwrap();
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                writeln!(s, "{}", rule.join("-+-")).unwrap();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_28_distinct_cells() {
        let g = full_grid();
        assert_eq!(g.len(), 28);
        let set: std::collections::HashSet<_> = g.iter().collect();
        assert_eq!(set.len(), 28);
    }

    #[test]
    fn selector_narrows() {
        let s = GridSelector::parse(Some("image, location"), Some("linear"), Some("off")).unwrap();
        assert_eq!(s.cells().len(), 2);
        let one = GridCell {
            combo: ModalityCombo::Title,
            head: HeadKind::Mlp,
            mixup: true,
        };
        assert_eq!(GridSelector::single(one).cells(), vec![one]);
        assert!(GridSelector::parse(None, Some("cnn"), None).is_err());
    }

    #[test]
    fn sub_seeds_are_pure_and_distinct() {
        let g = full_grid();
        let seeds: std::collections::HashSet<u64> = g.iter().map(|c| cell_seed(5, c)).collect();
        assert_eq!(seeds.len(), 28);
        assert_eq!(cell_seed(5, &g[3]), cell_seed(5, &g[3]));
        assert_ne!(cell_seed(5, &g[3]), cell_seed(6, &g[3]));
    }

    fn fake(results: Vec<(GridCell, f64)>) -> SweepTable {
        SweepTable {
            results: results
                .into_iter()
                .map(|(cell, v)| CellResult {
                    cell,
                    outcome: Ok(CellMetrics {
                        best_val_subset_acc: v,
                        best_val_macro_f1: v / 2.0,
                        best_epoch: 1,
                        seconds: 0.5,
                    }),
                })
                .collect(),
        }
    }

    #[test]
    fn full_table_shape() {
        let t = fake(full_grid().into_iter().enumerate().map(|(i, c)| (c, i as f64 / 100.0)).collect());
        let text = t.render_text();
        assert_eq!(text.lines().count(), 2 + 14);
        assert_eq!(text.matches('*').count(), 2);
        assert!(text.lines().last().unwrap().starts_with("Image + Title + Location | Yes"));
        assert_eq!(t.to_csv().lines().count(), 29);
    }

    #[test]
    fn failed_and_missing_cells() {
        let a = GridCell {
            combo: ModalityCombo::Image,
            head: HeadKind::Linear,
            mixup: false,
        };
        let mut t = fake(vec![(a, 0.5)]);
        t.results.push(CellResult {
            cell: GridCell { head: HeadKind::Mlp, ..a },
            outcome: Err("boom".into()),
        });
        let text = t.render_text();
        assert!(text.contains("failed"));
        assert!(text.contains("0.500*"));
        assert!(t.to_csv().contains("image,false,mlp,,,,"));
    }
}
