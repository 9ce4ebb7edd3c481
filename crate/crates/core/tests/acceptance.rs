//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;

use geotag::data::{Embedding, LabelVector, LocationFeature, ModalityCombo, Sample};
use geotag::eval::{
    enforce_min_one_tag, f1_from_bits, f1_scores, predict,
    read_submission, subset_accuracy, write_submission, PredictionSet,
};
use geotag::fusion::{fuse, fuse_batch};
use geotag::heads::{
    init_head_with, read_checkpoint, write_checkpoint, Checkpoint, Head, HeadKind, Mode,
};
use geotag::ingest::{
    load_embeddings, normalize_location, split_train_val, synth_dataset, write_embeddings,
};
use geotag::rng::rng_from_seed;
use geotag::sweep::{run_sweep, GridSelector};
use geotag::train::{
    bce_with_logits, cosine_lr, fit, fit_arrays, mixup, mixup_with, sample_lambda, TrainConfig,
};
use geotag::NUM_TAGS;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- location

fn location_normalization() -> Check {
    let cases = [
        ((49.9, -8.6), [0.0, 0.0]),
        ((61.9, 2.1), [1.0, 1.0]),
        ((55.9, -3.25), [0.5, 0.5]),
    ];
    let mut worst = 0.0f64;
    for ((lat, lon), expect) in cases {
        let got = normalize_location(lat, lon).map_err(|e| e.to_string())?.values();
        let oracle = [(lat - 49.9) / (61.9 - 49.9), (lon - -8.6) / (2.1 - -8.6)];
        for k in 0..2 {
            ensure(got[k] == oracle[k], || {
                format!("({lat}, {lon})[{k}]: {} vs direct evaluation {}", got[k], oracle[k])
            })?;
            worst = worst.max((got[k] - expect[k]).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("corners and centre within {worst:.1e}"))
}

// ---------------------------------------------------------------- fusion

fn fusion_dimensions() -> Check {
    let expected = [512, 512, 2, 1024, 514, 514, 1026];
    let mut s = Sample::new(9);
    let img: Vec<f32> = (0..512).map(|i| 1.0 + i as f32).collect();
    let txt: Vec<f32> = (0..512).map(|i| -1.0 - i as f32).collect();
    let loc = [0.25, 0.75];
    s.image_emb = Some(Embedding::new(img.clone()).unwrap());
    s.text_emb = Some(Embedding::new(txt.clone()).unwrap());
    s.loc = Some(LocationFeature::new(loc).unwrap());
    for (combo, &dim) in ModalityCombo::ALL.iter().zip(&expected) {
        let v = fuse(&s, *combo).map_err(|e| e.to_string())?.values;
        ensure(v.len() == dim, || format!("{combo}: dim {} != {dim}", v.len()))?;
        let mut expect = Vec::new();
        for m in combo.modalities() {
            match m {
                geotag::Modality::Image => expect.extend_from_slice(&img),
                geotag::Modality::Title => expect.extend_from_slice(&txt),
                geotag::Modality::Location => expect.extend(loc.iter().map(|&x| x as f32)),
            }
        }
        ensure(v == expect, || format!("{combo}: segments do not match their sources"))?;
        let batch = fuse_batch([&s, &s], *combo).map_err(|e| e.to_string())?;
        ensure(batch.row(1).to_vec() == expect, || format!("{combo}: batch row differs"))?;
    }
    Ok("512/512/2/1024/514/514/1026, segments recovered".into())
}

// ---------------------------------------------------------------- gradients

/// Loss of `head` on `(x, y)` with the dropout mask held at `mask`.
fn loss_at(head: &Head<f64>, x: &Array2<f64>, y: &Array2<f64>, mask: &Option<Array2<f64>>) -> f64 {
    let logits = match head {
        Head::Linear(_) => head.forward(x.view(), Mode::Eval, None).unwrap().0,
        Head::Mlp(m) => m.forward_with_mask(x.view(), mask.clone()).unwrap().0,
    };
    bce_with_logits(logits.view(), y.view()).unwrap().0
}

/// Which hidden units are active, per sample (empty for a linear head).
fn relu_pattern(head: &Head<f64>, x: &Array2<f64>) -> Vec<bool> {
    match head {
        Head::Linear(_) => Vec::new(),
        Head::Mlp(m) => (x.dot(&m.w1.t()) + &m.b1).iter().map(|&v| v > 0.0).collect(),
    }
}

fn gradient_check(kind: HeadKind, d: usize, rng: &mut geotag::rng::Rng) -> Result<(f64, usize), String> {
    let b = 5;
    let mut head: Head<f64> = init_head_with(kind, d, NUM_TAGS, 256, 0.5, rng.random());
    for p in head.params_mut() {
        for v in p.iter_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    let x = Array2::from_shape_simple_fn((b, d), || rng.random_range(-1.0..1.0));
    let y = Array2::from_shape_simple_fn((b, NUM_TAGS), || rng.random_range(0.0..=1.0));
    let mask = match &head {
        Head::Mlp(m) => Some(m.sample_mask(b, rng)),
        Head::Linear(_) => None,
    };
    let (logits, cache) = match &head {
        Head::Linear(_) => head.forward(x.view(), Mode::Eval, None),
        Head::Mlp(m) => m.forward_with_mask(x.view(), mask.clone()),
    }
    .map_err(|e| e.to_string())?;
    let (_, g) = bce_with_logits(logits.view(), y.view()).map_err(|e| e.to_string())?;
    let grads = head.backward(&cache, g.view()).map_err(|e| e.to_string())?;
    let analytic: Vec<Vec<f64>> = grads.params().iter().map(|p| p.to_vec()).collect();

    let mut targets: Vec<(usize, usize)> = analytic
        .iter()
        .enumerate()
        .flat_map(|(t, p)| (0..p.len()).map(move |i| (t, i)))
        .collect();
    if targets.len() > 2000 {
        targets.shuffle(rng);
        targets.truncate(2000);
    }
    // Fourth-order central differences; parameters whose perturbation moves
    // a hidden pre-activation across zero are skipped (the loss has a kink
    // there and finite differences are meaningless).
    let h = 1e-3;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &(t, i) in &targets {
        let orig = head.params()[t][i];
        let mut at = |delta: f64| {
            head.params_mut()[t][i] = orig + delta;
            let l = loss_at(&head, &x, &y, &mask);
            let signs = relu_pattern(&head, &x);
            head.params_mut()[t][i] = orig;
            (l, signs)
        };
        let (m2, s0) = at(-2.0 * h);
        let (m1, _) = at(-h);
        let (p1, _) = at(h);
        let (p2, s1) = at(2.0 * h);
        if s0 != s1 {
            continue;
        }
        checked += 1;
        let numeric = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        let a = analytic[t][i];
        let scale = a.abs().max(numeric.abs());
        if scale > 0.0 {
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    Ok((worst, checked))
}

fn gradient_correctness() -> Check {
    let mut rng = rng_from_seed(404);
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for kind in HeadKind::ALL {
        for d in [8, 514] {
            let (err, n) = gradient_check(kind, d, &mut rng)?;
            worst = worst.max(err);
            parts.push(format!("{kind} d={d}: {err:.1e} over {n}"));
        }
    }
    ensure(worst < 1e-6, || format!("max relative error {worst:e} ({})", parts.join("; ")))?;
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------- loss

fn naive_bce(x: f64, y: f64) -> f64 {
    let s = 1.0 / (1.0 + (-x).exp());
    -(y * s.ln() + (1.0 - y) * (1.0 - s).ln())
}

fn loss_stability() -> Check {
    let big: Array2<f64> = Array2::from_shape_vec((2, 4), vec![1e4, -1e4, 1e4, -1e4, 1e4, 1e4, -1e4, -1e4]).unwrap();
    let ys: Array2<f64> = Array2::from_shape_vec((2, 4), vec![0.0, 1.0, 1.0, 0.0, 0.5, 0.3, 0.7, 1.0]).unwrap();
    let (l, g) = bce_with_logits(big.view(), ys.view()).map_err(|e| e.to_string())?;
    ensure(l.is_finite() && g.iter().all(|v| v.is_finite()), || "non-finite at 1e4".into())?;
    let (l32, g32) = bce_with_logits(big.mapv(|v| v as f32).view(), ys.mapv(|v| v as f32).view())
        .map_err(|e| e.to_string())?;
    ensure(l32.is_finite() && g32.iter().all(|v| v.is_finite()), || "non-finite in f32".into())?;

    let mut rng = rng_from_seed(77);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let x: f64 = rng.random_range(-10.0..=10.0);
        let y: f64 = rng.random_range(0.0..=1.0);
        let (l, _) = bce_with_logits(
            Array2::from_elem((1, 1), x).view(),
            Array2::from_elem((1, 1), y).view(),
        )
        .unwrap();
        worst = worst.max((l - naive_bce(x, y)).abs());
    }
    let x = Array2::from_shape_simple_fn((7, NUM_TAGS), || rng.random_range(-10.0..=10.0));
    let y = Array2::from_shape_simple_fn((7, NUM_TAGS), || rng.random_range(0.0..=1.0));
    let (l, _) = bce_with_logits(x.view(), y.view()).unwrap();
    let naive: f64 =
        x.iter().zip(y.iter()).map(|(&a, &b)| naive_bce(a, b)).sum::<f64>() / x.len() as f64;
    worst = worst.max((l - naive).abs());
    ensure(worst < 1e-9, || format!("max deviation from naive form {worst:e}"))?;
    Ok(format!("finite at +/-1e4; max deviation {worst:.1e} on [-10, 10]"))
}

// ---------------------------------------------------------------- metrics

fn oracle_subset(p: &[Vec<bool>], t: &[Vec<bool>]) -> f64 {
    let hits = p.iter().zip(t).filter(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x == y)).count();
    hits as f64 / p.len() as f64
}

fn oracle_f1(p: &[Vec<bool>], t: &[Vec<bool>], classes: usize) -> Vec<f64> {
    (0..classes)
        .map(|c| {
            let pred: Vec<usize> = (0..p.len()).filter(|&i| p[i][c]).collect();
            let truth: Vec<usize> = (0..t.len()).filter(|&i| t[i][c]).collect();
            let tp = pred.iter().filter(|i| truth.contains(i)).count();
            let fp = pred.len() - tp;
            let fn_ = truth.len() - tp;
            if tp + fp + fn_ == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
            }
        })
        .collect()
}

fn to_lv(rows: &[Vec<bool>]) -> Vec<LabelVector> {
    rows.iter()
        .map(|r| LabelVector::from_indices(r.iter().enumerate().filter(|x| *x.1).map(|x| x.0)).unwrap())
        .collect()
}

fn metric_oracles() -> Check {
    let mut rng = rng_from_seed(1000);
    for inst in 0..1000 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=6);
        let density: f64 = rng.random_range(0.1..0.9);
        let mut draw = || -> Vec<Vec<bool>> {
            (0..n).map(|_| (0..k).map(|_| rng.random_bool(density)).collect()).collect()
        };
        let p = draw();
        let mut t = draw();
        if inst % 5 == 0 {
            t = p.clone();
        }
        let (pl, tl) = (to_lv(&p), to_lv(&t));

        let r = f1_from_bits(&pl, &tl, k);
        let of1 = oracle_f1(&p, &t, k);
        let oacc = oracle_subset(&p, &t);
        ensure(r.subset_accuracy == oacc, || format!("instance {inst}: subset accuracy"))?;
        ensure(r.per_class_f1 == of1, || format!("instance {inst}: per-class F1"))?;
        ensure(r.macro_f1 == of1.iter().sum::<f64>() / k as f64, || {
            format!("instance {inst}: macro F1")
        })?;

        let ids: Vec<u64> = (0..n as u64).map(|i| 100 + 7 * i).collect();
        let pred = PredictionSet {
            ids: ids.clone(),
            probabilities: Array2::zeros((n, NUM_TAGS)),
            decisions: pl.clone(),
        };
        let mut truth: Vec<(u64, LabelVector)> = ids.iter().copied().zip(tl.iter().copied()).collect();
        truth.shuffle(&mut rng);
        let acc = subset_accuracy(&pred, &truth).map_err(|e| e.to_string())?;
        let full = f1_scores(&pred, &truth).map_err(|e| e.to_string())?;
        let mut of49 = of1.clone();
        of49.resize(NUM_TAGS, 0.0);
        ensure(acc == oacc, || format!("instance {inst}: subset_accuracy"))?;
        ensure(full.per_class_f1 == of49, || format!("instance {inst}: f1_scores per class"))?;
        ensure(full.macro_f1 == of49.iter().sum::<f64>() / NUM_TAGS as f64, || {
            format!("instance {inst}: f1_scores macro")
        })?;
    }
    Ok("1000 random instances agree exactly".into())
}

// ---------------------------------------------------------------- mixup

fn mixup_properties() -> Check {
    let mut rng = rng_from_seed(55);
    let b = 6;
    let x = Array2::from_shape_simple_fn((b, 10), || rng.random_range(-3.0f32..3.0));
    let y = Array2::from_shape_simple_fn((b, NUM_TAGS), || rng.random_bool(0.3) as u8 as f32);
    let mut perm: Vec<usize> = (0..b).collect();
    perm.shuffle(&mut rng);
    let (mx, my) = mixup_with(x.view(), y.view(), &[1.0], &perm);
    ensure(mx == x && my == y, || "lambda = 1 is not the identity".into())?;
    let (mx, my) = mixup_with(x.view(), y.view(), &[0.0], &perm);
    ensure(mx == x.select(Axis(0), &perm) && my == y.select(Axis(0), &perm), || {
        "lambda = 0 is not the permuted batch".into()
    })?;

    for per_sample in [false, true] {
        for _ in 0..500 {
            let (_, my) = mixup(x.view(), y.view(), 0.4, per_sample, &mut rng).map_err(|e| e.to_string())?;
            ensure(my.iter().all(|&v| (0.0..=1.0).contains(&v)), || "label left [0, 1]".into())?;
        }
    }

    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_lambda(0.4, &mut rng).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let target_var = 1.0 / (4.0 * (2.0 * 0.4 + 1.0));
    ensure((mean - 0.5).abs() / 0.5 <= 0.02, || format!("mean {mean}"))?;
    ensure((var - target_var).abs() / target_var <= 0.02, || format!("variance {var} vs {target_var}"))?;
    Ok(format!("endpoints exact; lambda mean {mean:.4}, variance {var:.4} (target {target_var:.4})"))
}

// ---------------------------------------------------------------- schedule

fn scheduler() -> Check {
    for (hi, lo, t_max) in [(1e-3, 0.0, 50), (1e-2, 1e-4, 50), (0.3, 0.1, 7), (5e-4, 5e-4, 10)] {
        ensure(cosine_lr(0, hi, lo, t_max) == hi, || format!("t=0 for ({hi}, {lo})"))?;
        ensure(cosine_lr(t_max, hi, lo, t_max) == lo, || format!("t=t_max for ({hi}, {lo})"))?;
        for t in t_max..t_max + 200 {
            ensure(cosine_lr(t, hi, lo, t_max) == lo, || format!("t={t} after t_max"))?;
        }
    }
    for (hi, lo) in [(1e-3, 0.0), (1e-2, 1e-4), (0.3, 0.1)] {
        let mid = cosine_lr(25, hi, lo, 50);
        ensure((mid - (hi + lo) / 2.0).abs() <= 1e-12, || format!("midpoint {mid}"))?;
    }
    Ok("endpoints exact, midpoint within 1e-12, flat after t_max".into())
}

// ---------------------------------------------------------------- convergence

fn synthetic_convergence() -> Check {
    let s = synth_dataset(10_000, NUM_TAGS, 0.0, 2024).map_err(|e| e.to_string())?;
    let (train, val) = split_train_val(&s.dataset, 0.2, 1).map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        combo: ModalityCombo::Image,
        head_kind: HeadKind::Linear,
        max_epochs: 50,
        ..TrainConfig::default()
    };
    let a = fit(&train, &val, &cfg).map_err(|e| e.to_string())?;
    let b = fit(&train, &val, &cfg).map_err(|e| e.to_string())?;
    let acc = a.report.best_val_subset_acc;
    ensure(acc >= 0.9, || format!("best val subset accuracy {acc}"))?;
    ensure(a.report.history == b.report.history, || "reruns differ in history".into())?;
    ensure(a.checkpoint.to_bytes() == b.checkpoint.to_bytes(), || "reruns differ in checkpoint".into())?;
    Ok(format!(
        "best val subset accuracy {acc:.4} at epoch {}; rerun bit-identical",
        a.report.best_epoch
    ))
}

fn modality_ordering() -> Check {
    let s = synth_dataset(10_000, NUM_TAGS, 0.0, 31).map_err(|e| e.to_string())?;
    let (train, val) = split_train_val(&s.dataset, 0.2, 2).map_err(|e| e.to_string())?;
    let selector = GridSelector {
        combos: Some(vec![ModalityCombo::Image, ModalityCombo::Location, ModalityCombo::ImageLocation]),
        heads: Some(vec![HeadKind::Linear]),
        mixup: Some(vec![false]),
    };
    let table = run_sweep(&train, &val, &TrainConfig::default(), &selector, 1);
    let mut parts = Vec::new();
    for r in &table.results {
        let m = r.outcome.as_ref().map_err(|e| format!("{}: {e}", r.cell.combo))?;
        let acc = m.best_val_subset_acc;
        parts.push(format!("{} {acc:.3}", r.cell.combo));
        match r.cell.combo {
            ModalityCombo::Location => ensure(acc <= 0.02, || format!("location {acc}"))?,
            c => ensure(acc >= 0.9, || format!("{c} {acc}"))?,
        }
    }
    ensure(table.results.len() == 3, || "expected three cells".into())?;
    Ok(parts.join(", "))
}

// ---------------------------------------------------------------- early stopping

fn early_stopping() -> Check {
    let mut rng = rng_from_seed(8);
    let n = 64;
    let mut x = Array2::<f32>::zeros((n, 2));
    let mut y = Vec::new();
    for i in 0..n {
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        x[[i, 0]] = side * rng.random_range(0.5f32..1.0);
        x[[i, 1]] = rng.random_range(0.0f32..1.0);
        y.push(LabelVector::from_indices([if side > 0.0 { 0 } else { 1 }]).unwrap());
    }
    let patience = 4;
    let cfg = TrainConfig {
        combo: ModalityCombo::Location,
        head_kind: HeadKind::Linear,
        lr_max: 0.1,
        patience,
        max_epochs: 200,
        ..TrainConfig::default()
    };
    let out = fit_arrays(x.view(), &y, x.view(), &y, &cfg).map_err(|e| e.to_string())?;
    let h = &out.report.history;
    let first = h
        .iter()
        .position(|r| r.val_subset_acc == 1.0)
        .ok_or_else(|| format!("never reached 1.0 in {} epochs", h.len()))?;
    ensure(out.report.best_epoch == first, || {
        format!("best epoch {} but first 1.0 at {first}", out.report.best_epoch)
    })?;
    ensure(h.len() == first + patience + 1, || {
        format!("ran {} epochs; plateau began at {first}, patience {patience}", h.len())
    })?;
    ensure(out.report.stopped_early && out.checkpoint.epoch as usize == first, || {
        "checkpoint is not from the first best epoch".into()
    })?;
    Ok(format!("plateau at epoch {first}, stopped after epoch {}", h.len() - 1))
}

// ---------------------------------------------------------------- submission

fn submission_guarantee() -> Check {
    let s = synth_dataset(500, NUM_TAGS, 0.0, 3).map_err(|e| e.to_string())?;
    let mut rng = rng_from_seed(12);
    let mut head: Head<f32> = init_head_with(HeadKind::Linear, 512, NUM_TAGS, 256, 0.5, 4);
    if let Head::Linear(h) = &mut head {
        h.weight.mapv_inplace(|_| rng.random_range(-0.01f32..0.01));
        h.bias = Array1::from_shape_simple_fn(NUM_TAGS, || rng.random_range(-9.0f32..-2.0));
    }
    let mut samples = s.dataset.into_samples();
    samples.shuffle(&mut rng);
    let raw = predict(&head, &samples, ModalityCombo::Image).map_err(|e| e.to_string())?;
    ensure(raw.decisions.iter().all(|d| d.is_empty()), || "logits were not all negative".into())?;
    let fixed = enforce_min_one_tag(&raw);
    for (i, d) in fixed.decisions.iter().enumerate() {
        let row = fixed.probabilities.row(i);
        let mut best = 0;
        for c in 1..NUM_TAGS {
            if row[c] > row[best] {
                best = c;
            }
        }
        ensure(d.count() == 1 && d.get(best), || format!("row {i}: {d:?}, argmax {best}"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("submission.csv");
    write_submission(&fixed, &path).map_err(|e| e.to_string())?;
    let back = read_submission(&path).map_err(|e| e.to_string())?;
    let mut expect: Vec<(u64, LabelVector)> =
        fixed.ids.iter().copied().zip(fixed.decisions.iter().copied()).collect();
    expect.sort_by_key(|r| r.0);
    ensure(back == expect, || "submission did not round-trip".into())?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let empty = text.lines().skip(1).filter(|l| l.ends_with(',')).count();
    ensure(empty == 0, || format!("{empty} empty rows"))?;
    Ok(format!("{} rows, one tag each, lossless round-trip", back.len()))
}

// ---------------------------------------------------------------- formats

fn special_floats() -> Vec<f32> {
    vec![
        -0.0,
        0.0,
        f32::from_bits(1),
        -f32::from_bits(1),
        f32::from_bits(0x007f_ffff),
        f32::MIN_POSITIVE,
        f32::MAX,
        f32::MIN,
        f32::INFINITY,
        f32::NEG_INFINITY,
        f32::from_bits(0x7fc0_1234),
        1.0 / 3.0,
    ]
}

fn format_round_trips() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let specials = special_floats();
    let mut rng = rng_from_seed(21);
    let rows: Vec<(u64, Vec<f32>)> = (0..40u64)
        .map(|i| {
            let mut v: Vec<f32> = (0..512).map(|_| f32::from_bits(rng.random())).collect();
            v[..specials.len()].copy_from_slice(&specials);
            v.rotate_right(i as usize);
            (i * 1_000_003 + 7, v)
        })
        .collect();
    let path = dir.path().join("e.geoemb");
    write_embeddings(&path, 512, rows.iter().map(|(i, v)| (*i, v.as_slice()))).map_err(|e| e.to_string())?;
    let table = load_embeddings(&path, Some(512)).map_err(|e| e.to_string())?;
    ensure(table.len() == rows.len(), || "record count".into())?;
    for (id, v) in &rows {
        let got = table.get(*id).ok_or_else(|| format!("id {id} missing"))?;
        let same = got.iter().zip(v).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(same, || format!("GEOEMB record {id} differs"))?;
    }
    let rewritten = dir.path().join("f.geoemb");
    write_embeddings(&rewritten, 512, table.iter()).map_err(|e| e.to_string())?;
    ensure(std::fs::read(&path).unwrap() == std::fs::read(&rewritten).unwrap(), || {
        "GEOEMB rewrite not byte-identical".into()
    })?;

    for (kind, combo) in [(HeadKind::Linear, ModalityCombo::Title), (HeadKind::Mlp, ModalityCombo::All)] {
        let mut head: Head<f32> = init_head_with(kind, combo.dim(), NUM_TAGS, 256, 0.5, 9);
        for p in head.params_mut() {
            for (j, v) in p.iter_mut().enumerate() {
                *v = if j < specials.len() { specials[j] } else { f32::from_bits(rng.random()) };
            }
        }
        let ckpt = Checkpoint {
            combo,
            head,
            seed: u64::MAX - 3,
            epoch: 123,
        };
        let path = dir.path().join(format!("{kind}.ckpt"));
        write_checkpoint(&path, &ckpt).map_err(|e| e.to_string())?;
        let back = read_checkpoint(&path).map_err(|e| e.to_string())?;
        ensure(back.combo == ckpt.combo && back.seed == ckpt.seed && back.epoch == ckpt.epoch, || {
            format!("{kind} checkpoint header differs")
        })?;
        let same = back
            .head
            .params()
            .iter()
            .zip(ckpt.head.params())
            .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        ensure(same, || format!("{kind} checkpoint parameters differ"))?;
        ensure(back.to_bytes() == ckpt.to_bytes(), || format!("{kind} checkpoint bytes differ"))?;
    }
    Ok("GEOEMB and both checkpoint kinds bit-exact incl. -0.0, subnormals, inf, NaN payload".into())
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 12] = [
        ("location normalization exactness", 1, location_normalization),
        ("fusion dimension table", 1, fusion_dimensions),
        ("gradient correctness", 10, gradient_correctness),
        ("loss stability", 1, loss_stability),
        ("metric oracles", 5, metric_oracles),
        ("mixup properties", 5, mixup_properties),
        ("scheduler", 1, scheduler),
        ("end-to-end synthetic convergence", 120, synthetic_convergence),
        ("modality ordering", 600, modality_ordering),
        ("early-stopping contract", 30, early_stopping),
        ("submission guarantee", 5, submission_guarantee),
        ("format round-trips", 5, format_round_trips),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let over = took > Duration::from_secs(budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded {budget}s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {name} [{:.2}s / {budget}s]: {detail}", took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
