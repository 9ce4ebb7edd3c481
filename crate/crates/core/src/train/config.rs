//! Run configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use super::OptimizerKind;
use crate::data::ModalityCombo;
use crate::heads::{HeadKind, MLP_DROPOUT};
use crate::rng::DEFAULT_SEED;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: bad value {value:?} for {key}: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub combo: ModalityCombo,
    pub head_kind: HeadKind,
    pub mixup_enabled: bool,
    pub mixup_alpha: f64,
    pub mixup_per_sample: bool,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub t_max: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    pub optimizer: OptimizerKind,
    pub dropout_p: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            combo: ModalityCombo::All,
            head_kind: HeadKind::Linear,
            mixup_enabled: false,
            mixup_alpha: 0.4,
            mixup_per_sample: false,
            batch_size: 4096,
            max_epochs: 200,
            patience: 10,
            t_max: 50,
            lr_max: 1e-2,
            lr_min: 0.0,
            optimizer: OptimizerKind::Adam,
            dropout_p: MLP_DROPOUT,
            val_fraction: 0.2,
            seed: DEFAULT_SEED,
        }
    }
}

pub const CONFIG_KEYS: [&str; 15] = [
    "combo",
    "head_kind",
    "mixup_enabled",
    "mixup_alpha",
    "mixup_per_sample",
    "batch_size",
    "max_epochs",
    "patience",
    "t_max",
    "lr_max",
    "lr_min",
    "optimizer",
    "dropout_p",
    "val_fraction",
    "seed",
];

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if self.patience < 1 {
            return bad("patience must be at least 1");
        }
        if self.max_epochs < 1 {
            return bad("max_epochs must be at least 1");
        }
        if self.t_max < 1 {
            return bad("t_max must be at least 1");
        }
        if !(self.lr_min.is_finite() && self.lr_max.is_finite())
            || self.lr_min < 0.0
            || self.lr_min > self.lr_max
        {
            return bad("need 0 <= lr_min <= lr_max");
        }
        if !(self.mixup_alpha > 0.0 && self.mixup_alpha.is_finite()) {
            return bad("mixup_alpha must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return bad("dropout_p must lie in [0, 1)");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("val_fraction must lie strictly between 0 and 1");
        }
        Ok(())
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "combo" => self.combo = v.parse().map_err(|e| format!("{e}"))?,
            "head_kind" => self.head_kind = v.parse().map_err(|e| format!("{e}"))?,
            "mixup_enabled" => self.mixup_enabled = parse_bool(v)?,
            "mixup_alpha" => self.mixup_alpha = parse_num(v)?,
            "mixup_per_sample" => self.mixup_per_sample = parse_bool(v)?,
            "batch_size" => self.batch_size = parse_num(v)?,
            "max_epochs" => self.max_epochs = parse_num(v)?,
            "patience" => self.patience = parse_num(v)?,
            "t_max" => self.t_max = parse_num(v)?,
            "lr_max" => self.lr_max = parse_num(v)?,
            "lr_min" => self.lr_min = parse_num(v)?,
            "optimizer" => self.optimizer = v.parse()?,
            "dropout_p" => self.dropout_p = parse_num(v)?,
            "val_fraction" => self.val_fraction = parse_num(v)?,
            "seed" => self.seed = parse_num(v)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parses a config file body. Missing keys keep their defaults; blank
    /// lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = TrainConfig::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                });
            }
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
            seen.push(key);
            cfg.set(key, value).map_err(|reason| ConfigError::BadValue {
                line,
                key: key.into(),
                value: value.trim().into(),
                reason,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Every field, one per line, in a form `parse` reads back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("combo", self.combo.name().into());
        kv("head_kind", self.head_kind.name().into());
        kv("mixup_enabled", self.mixup_enabled.to_string());
        kv("mixup_alpha", self.mixup_alpha.to_string());
        kv("mixup_per_sample", self.mixup_per_sample.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("max_epochs", self.max_epochs.to_string());
        kv("patience", self.patience.to_string());
        kv("t_max", self.t_max.to_string());
        kv("lr_max", self.lr_max.to_string());
        kv("lr_min", self.lr_min.to_string());
        kv("optimizer", self.optimizer.name().into());
        kv("dropout_p", self.dropout_p.to_string());
        kv("val_fraction", self.val_fraction.to_string());
        kv("seed", self.seed.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = TrainConfig::default();
        c.combo = ModalityCombo::ImageLocation;
        c.head_kind = HeadKind::Mlp;
        c.mixup_enabled = true;
        c.lr_max = 3e-3;
        c.seed = 77;
        assert_eq!(TrainConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = TrainConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c, TrainConfig::default());
        assert_eq!((c.batch_size, c.max_epochs, c.patience, c.t_max), (4096, 200, 10, 50));
        assert_eq!(c.mixup_alpha, 0.4);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = TrainConfig::parse("seed = 1\nlearning_rate = 0.1\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::UnknownKey {
                line: 2,
                key: "learning_rate".into()
            }
        );
        assert!(e.to_string().contains("learning_rate"));
    }

    #[test]
    fn bad_values_and_invariants() {
        assert!(matches!(
            TrainConfig::parse("batch_size = many"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            TrainConfig::parse("batch_size = 0"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            TrainConfig::parse("lr_max = 1e-3\nlr_min = 1e-2"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            TrainConfig::parse("seed = 1\nseed = 2"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(TrainConfig::parse("seed"), Err(ConfigError::Syntax { line: 1 })));
    }
}
