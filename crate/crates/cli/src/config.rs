//! Experiment specification: defaults, key=value config files, and CLI
//! flag overrides (flag > file > default).

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use venuesim_core::engine::{AnchorMode, JumpScope};
use venuesim_core::ingest::{default_exclusions, Format};
use venuesim_core::mobility::ExplorationMode;
use venuesim_core::recsys::RecommenderKind;

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSpec {
    pub data: Option<PathBuf>,
    pub format: String,
    pub hierarchy: Option<PathBuf>,
    pub exclusions: BTreeSet<String>,
    pub t_train_days: f64,
    pub t_max_days: f64,
    pub subsample: Option<usize>,
    /// Keep the full venue catalog when subsampling users, so candidate
    /// pools stay city-sized.
    pub keep_full_catalog: bool,
    pub seed: u64,
    pub workers: usize,
    pub etas: Vec<f64>,
    pub algos: Vec<String>,
    pub runs: u32,
    pub delta_days: f64,
    pub top_k: usize,
    pub anchor: String,
    pub explore_mode: String,
    pub rho: f64,
    pub gamma: f64,
    pub jump_scope: String,
    pub rich_h: usize,
    pub out: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> ExperimentSpec {
        ExperimentSpec {
            data: None,
            format: "auto".to_string(),
            hierarchy: None,
            exclusions: default_exclusions(),
            t_train_days: 210.0,
            t_max_days: 304.0,
            subsample: None,
            keep_full_catalog: true,
            seed: 42,
            workers: 0,
            etas: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            algos: vec![
                "popularity".into(),
                "userknn".into(),
                "itemknn".into(),
                "mf".into(),
                "bprmf".into(),
                "pgn".into(),
            ],
            runs: 5,
            delta_days: 7.0,
            top_k: 20,
            anchor: "trace".to_string(),
            explore_mode: "fixed".to_string(),
            rho: 0.6,
            gamma: 0.21,
            jump_scope: "full".to_string(),
            rich_h: 15,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentSpec {
    pub fn parsed_format(&self) -> Result<Format> {
        match self.format.as_str() {
            "raw" => Ok(Format::Raw),
            "canonical" => Ok(Format::Canonical),
            "auto" => Ok(Format::Auto),
            other => bail!("unknown format {other:?} (raw|canonical|auto)"),
        }
    }

    pub fn parsed_algos(&self) -> Result<Vec<RecommenderKind>> {
        self.algos
            .iter()
            .map(|a| a.parse::<RecommenderKind>().map_err(Into::into))
            .collect()
    }

    pub fn parsed_anchor(&self) -> Result<AnchorMode> {
        self.anchor.parse::<AnchorMode>().map_err(Into::into)
    }

    pub fn parsed_explore_mode(&self) -> Result<ExplorationMode> {
        match self.explore_mode.as_str() {
            "fixed" | "fixed_global" => Ok(ExplorationMode::FixedGlobal),
            "peruser" | "per_user" => Ok(ExplorationMode::PerUser),
            other => bail!("unknown explore mode {other:?} (fixed|peruser)"),
        }
    }

    pub fn parsed_jump_scope(&self) -> Result<JumpScope> {
        match self.jump_scope.as_str() {
            "full" => Ok(JumpScope::Full),
            "train" | "train_only" => Ok(JumpScope::TrainOnly),
            other => bail!("unknown jump scope {other:?} (full|train)"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
            bail!("eta values must lie in [0, 1]");
        }
        if self.runs < 1 {
            bail!("runs must be at least 1");
        }
        if !(self.t_train_days > 0.0 && self.t_train_days < self.t_max_days) {
            bail!("split requires 0 < t_train < t_max");
        }
        self.parsed_format()?;
        self.parsed_algos()?;
        self.parsed_anchor()?;
        self.parsed_explore_mode()?;
        self.parsed_jump_scope()?;
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "format" => self.format = value.to_string(),
            "hierarchy" => self.hierarchy = Some(PathBuf::from(value)),
            "exclusions" => self.exclusions = parse_exclusions(value),
            "t_train_days" => self.t_train_days = value.parse()?,
            "t_max_days" => self.t_max_days = value.parse()?,
            "subsample" => self.subsample = Some(value.parse()?),
            "keep_full_catalog" => self.keep_full_catalog = value.parse()?,
            "seed" => self.seed = value.parse()?,
            "workers" => self.workers = value.parse()?,
            "eta" => self.etas = parse_f64_list(value)?,
            "algos" => self.algos = parse_list(value),
            "runs" => self.runs = value.parse()?,
            "delta_days" => self.delta_days = value.parse()?,
            "top_k" => self.top_k = value.parse()?,
            "anchor" => self.anchor = value.to_string(),
            "explore_mode" => self.explore_mode = value.to_string(),
            "rho" => self.rho = value.parse()?,
            "gamma" => self.gamma = value.parse()?,
            "jump_scope" => self.jump_scope = value.to_string(),
            "rich_h" => self.rich_h = value.parse()?,
            "out" => self.out = PathBuf::from(value),
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Apply a flat `key = value` config file.
    pub fn apply_config_file(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            self.apply_kv(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }
}

pub fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn parse_f64_list(value: &str) -> Result<Vec<f64>> {
    parse_list(value)
        .iter()
        .map(|s| s.parse::<f64>().context("parsing eta list"))
        .collect()
}

/// `none` clears the list; otherwise a comma-separated set of labels.
pub fn parse_exclusions(value: &str) -> BTreeSet<String> {
    if value.trim().eq_ignore_ascii_case("none") {
        BTreeSet::new()
    } else {
        parse_list(value).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn config_file_and_overrides() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "# comment\n\neta = 0.0, 0.5\nalgos = popularity\nseed = 9\nrich_h = 10\nexclusions = none"
        )
        .unwrap();
        let mut spec = ExperimentSpec::default();
        spec.apply_config_file(f.path()).unwrap();
        assert_eq!(spec.etas, vec![0.0, 0.5]);
        assert_eq!(spec.algos, vec!["popularity"]);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.rich_h, 10);
        assert!(spec.exclusions.is_empty());
        spec.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "not_a_key = 1").unwrap();
        let mut spec = ExperimentSpec::default();
        assert!(spec.apply_config_file(f.path()).is_err());
    }

    #[test]
    fn default_spec_is_valid() {
        ExperimentSpec::default().validate().unwrap();
        assert_eq!(ExperimentSpec::default().exclusions.len(), 16);
    }
}
