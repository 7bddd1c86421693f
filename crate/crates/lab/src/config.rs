//! Sectioned key-value experiment configuration.
//!
//! The file format is plain text: `[section]` headers followed by
//! `key = value` lines; `#` starts a comment; lists are comma-separated.
//! Command-line overrides use the same vocabulary as `section.key=value`.
//!
//! Defaults reproduce the standard setup: k=1, convention=m1_consistent,
//! n_train=1000, regular widths 250,250, localized m=5 widths 100,100,
//! lr=0.1, momentum=0.9, weight_decay=0.001, batch=100, iters=10000,
//! lr decayed by 0.1 every 2000 steps, n_test=10^6, replicates=10,
//! k_list=1,5,10,100, n_list=200,800,3200,12800, rate_k=10, xi=1e-4.

use std::path::{Path, PathBuf};

use boundary_lab_core::localized::ModelForm;
use boundary_lab_core::mlp::{LossKind, TrainConfig};
use boundary_lab_core::synth::Convention;

use crate::error::{AppError, AppResult};
use crate::textio;

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSection {
    pub k: f64,
    pub convention: Convention,
    pub seed: u64,
    pub n_train: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSection {
    pub form: ModelForm,
    pub m: usize,
    pub xi: f64,
    /// Rescale each cell's reduced coordinates onto [0, 1] for its local
    /// net (better-conditioned first-layer training on narrow cells).
    pub rescale_cells: bool,
    pub regular_widths: Vec<usize>,
    pub local_widths: Vec<usize>,
    /// Widths of the random boundary-form locals built by `stitch-verify`.
    pub stitch_widths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerSection {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch: usize,
    pub iters: u64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: u64,
    pub loss: LossKind,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethodCfg {
    MonteCarlo,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSection {
    pub n_test: u64,
    pub method: EvalMethodCfg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub k_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    /// Profile sharpness used by `rate-curve`.
    pub rate_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: TaskSection,
    pub classifier: ClassifierSection,
    pub trainer: TrainerSection,
    pub eval: EvalSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: TaskSection {
                k: 1.0,
                convention: Convention::M1Consistent,
                seed: 3,
                n_train: 1000,
            },
            classifier: ClassifierSection {
                form: ModelForm::Logit,
                m: 5,
                xi: 1e-4,
                rescale_cells: false,
                regular_widths: vec![250, 250],
                local_widths: vec![100, 100],
                stitch_widths: vec![64, 64],
            },
            trainer: TrainerSection {
                lr: 0.1,
                momentum: 0.9,
                weight_decay: 0.001,
                batch: 100,
                iters: 10_000,
                lr_decay_factor: 0.1,
                lr_decay_every: 2000,
                loss: LossKind::CrossEntropy,
                seed: 1,
            },
            eval: EvalSection {
                n_test: 1_000_000,
                method: EvalMethodCfg::MonteCarlo,
            },
            sweep: SweepSection {
                k_list: vec![1.0, 5.0, 10.0, 100.0],
                n_list: vec![200, 800, 3200, 12800],
                replicates: 10,
                rate_k: 10.0,
            },
            output: OutputSection {
                dir: PathBuf::from("out"),
            },
        }
    }
}

impl ExperimentConfig {
    /// Loads a config file (missing file is a config error) and applies
    /// `section.key=value` overrides on top.
    pub fn load(path: Option<&Path>, sets: &[String]) -> AppResult<Self> {
        let mut cfg = ExperimentConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| AppError::Config(anyhow::anyhow!("reading {}: {e}", p.display())))?;
            cfg.apply_text(&text)?;
        }
        for s in sets {
            cfg.apply_set(s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> AppResult<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AppError::config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            self.set_key(&section, key.trim(), value.trim())
                .map_err(|e| AppError::config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_set(&mut self, spec: &str) -> AppResult<()> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| AppError::config(format!("--set expects section.key=value, got {spec:?}")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| AppError::config(format!("--set expects section.key=value, got {spec:?}")))?;
        self.set_key(section, key, value.trim())
            .map_err(AppError::config)
    }

    fn set_key(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let bad = |m: String| Err(m);
        match (section, key) {
            ("task", "k") => self.task.k = parse_num(value)?,
            ("task", "convention") => {
                self.task.convention = match value {
                    "m1_consistent" => Convention::M1Consistent,
                    "literal" => Convention::Literal,
                    other => return bad(format!("unknown convention {other:?}")),
                }
            }
            ("task", "seed") => self.task.seed = parse_num(value)?,
            ("task", "n_train") => self.task.n_train = parse_num(value)?,
            ("classifier", "form") => {
                self.classifier.form = match value {
                    "logit" => ModelForm::Logit,
                    "boundary" => ModelForm::Boundary,
                    other => return bad(format!("unknown form {other:?}")),
                }
            }
            ("classifier", "m") => self.classifier.m = parse_num(value)?,
            ("classifier", "xi") => self.classifier.xi = parse_num(value)?,
            ("classifier", "rescale_cells") => {
                self.classifier.rescale_cells = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    other => return bad(format!("bad bool {other:?}")),
                }
            }
            ("classifier", "regular_widths") => self.classifier.regular_widths = parse_list(value)?,
            ("classifier", "local_widths") => self.classifier.local_widths = parse_list(value)?,
            ("classifier", "stitch_widths") => self.classifier.stitch_widths = parse_list(value)?,
            ("trainer", "lr") => self.trainer.lr = parse_num(value)?,
            ("trainer", "momentum") => self.trainer.momentum = parse_num(value)?,
            ("trainer", "weight_decay") => self.trainer.weight_decay = parse_num(value)?,
            ("trainer", "batch") => self.trainer.batch = parse_num(value)?,
            ("trainer", "iters") => self.trainer.iters = parse_num(value)?,
            ("trainer", "lr_decay_factor") => self.trainer.lr_decay_factor = parse_num(value)?,
            ("trainer", "lr_decay_every") => self.trainer.lr_decay_every = parse_num(value)?,
            ("trainer", "loss") => {
                self.trainer.loss = match value {
                    "cross_entropy" => LossKind::CrossEntropy,
                    "hinge" => LossKind::Hinge,
                    other => return bad(format!("unknown loss {other:?}")),
                }
            }
            ("trainer", "seed") => self.trainer.seed = parse_num(value)?,
            ("eval", "n_test") => self.eval.n_test = parse_num(value)?,
            ("eval", "method") => {
                self.eval.method = match value {
                    "mc" => EvalMethodCfg::MonteCarlo,
                    "quadrature" => EvalMethodCfg::Quadrature,
                    other => return bad(format!("unknown eval method {other:?}")),
                }
            }
            ("sweep", "k_list") => self.sweep.k_list = parse_list(value)?,
            ("sweep", "n_list") => self.sweep.n_list = parse_list(value)?,
            ("sweep", "replicates") => self.sweep.replicates = parse_num(value)?,
            ("sweep", "rate_k") => self.sweep.rate_k = parse_num(value)?,
            ("output", "dir") => self.output.dir = PathBuf::from(value),
            (s, k) => return bad(format!("unknown key {s}.{k}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> AppResult<()> {
        let cfg_err = |m: String| Err(AppError::config(m));
        if !(self.task.k >= 1.0 && self.task.k.is_finite()) {
            return cfg_err(format!("task.k must be >= 1, got {}", self.task.k));
        }
        for k in &self.sweep.k_list {
            if !(*k >= 1.0 && k.is_finite()) {
                return cfg_err(format!("sweep.k_list entries must be >= 1, got {k}"));
            }
        }
        if !(self.sweep.rate_k >= 1.0 && self.sweep.rate_k.is_finite()) {
            return cfg_err(format!("sweep.rate_k must be >= 1, got {}", self.sweep.rate_k));
        }
        if self.classifier.m == 0 {
            return cfg_err("classifier.m must be >= 1".into());
        }
        let xi_limit = 1.0 / (2.0 * self.classifier.m as f64);
        if !(self.classifier.xi > 0.0 && self.classifier.xi < xi_limit) {
            return cfg_err(format!(
                "classifier.xi must lie in (0, {xi_limit}), got {}",
                self.classifier.xi
            ));
        }
        for (name, widths) in [
            ("regular_widths", &self.classifier.regular_widths),
            ("local_widths", &self.classifier.local_widths),
            ("stitch_widths", &self.classifier.stitch_widths),
        ] {
            if widths.is_empty() || widths.iter().any(|&w| w == 0) {
                return cfg_err(format!("classifier.{name} must be nonempty positive widths"));
            }
        }
        if self.sweep.replicates == 0 {
            return cfg_err("sweep.replicates must be >= 1".into());
        }
        if self.eval.n_test == 0 {
            return cfg_err("eval.n_test must be >= 1".into());
        }
        if self.eval.method == EvalMethodCfg::Quadrature && self.classifier.form != ModelForm::Boundary
        {
            return cfg_err("eval.method = quadrature requires classifier.form = boundary".into());
        }
        self.train_config(0)
            .validate()
            .map_err(|e| AppError::Config(anyhow::anyhow!("trainer section: {e}")))?;
        Ok(())
    }

    /// The core training config with the given seed substituted.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            initial_lr: self.trainer.lr,
            momentum: self.trainer.momentum,
            weight_decay: self.trainer.weight_decay,
            batch_size: self.trainer.batch,
            total_iters: self.trainer.iters,
            lr_decay_factor: self.trainer.lr_decay_factor,
            lr_decay_every: self.trainer.lr_decay_every,
            loss: self.trainer.loss,
            seed,
        }
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.output.dir.join(name)
    }

    /// Renders the config in its own file format.
    pub fn to_text(&self) -> String {
        let conv = match self.task.convention {
            Convention::M1Consistent => "m1_consistent",
            Convention::Literal => "literal",
        };
        let form = match self.classifier.form {
            ModelForm::Logit => "logit",
            ModelForm::Boundary => "boundary",
        };
        let loss = match self.trainer.loss {
            LossKind::CrossEntropy => "cross_entropy",
            LossKind::Hinge => "hinge",
        };
        let method = match self.eval.method {
            EvalMethodCfg::MonteCarlo => "mc",
            EvalMethodCfg::Quadrature => "quadrature",
        };
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let flist = |v: &[f64]| {
            v.iter()
                .map(|x| textio::fmt_short(*x))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "[task]\nk = {}\nconvention = {conv}\nseed = {}\nn_train = {}\n\n\
             [classifier]\nform = {form}\nm = {}\nxi = {}\nrescale_cells = {}\nregular_widths = {}\nlocal_widths = {}\nstitch_widths = {}\n\n\
             [trainer]\nlr = {}\nmomentum = {}\nweight_decay = {}\nbatch = {}\niters = {}\nlr_decay_factor = {}\nlr_decay_every = {}\nloss = {loss}\nseed = {}\n\n\
             [eval]\nn_test = {}\nmethod = {method}\n\n\
             [sweep]\nk_list = {}\nn_list = {}\nreplicates = {}\nrate_k = {}\n\n\
             [output]\ndir = {}\n",
            textio::fmt_short(self.task.k),
            self.task.seed,
            self.task.n_train,
            self.classifier.m,
            textio::fmt_short(self.classifier.xi),
            self.classifier.rescale_cells,
            list(&self.classifier.regular_widths),
            list(&self.classifier.local_widths),
            list(&self.classifier.stitch_widths),
            textio::fmt_short(self.trainer.lr),
            textio::fmt_short(self.trainer.momentum),
            textio::fmt_short(self.trainer.weight_decay),
            self.trainer.batch,
            self.trainer.iters,
            textio::fmt_short(self.trainer.lr_decay_factor),
            self.trainer.lr_decay_every,
            self.trainer.seed,
            self.eval.n_test,
            flist(&self.sweep.k_list),
            list(&self.sweep.n_list),
            self.sweep.replicates,
            textio::fmt_short(self.sweep.rate_k),
            self.output.dir.display(),
        )
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("bad value {s:?}: {e}"))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| parse_num::<T>(p.trim()))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty list".into())
            } else {
                Ok(v)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = ExperimentConfig::default();
        let mut parsed = ExperimentConfig::default();
        parsed.task.k = 99.0; // scribble, then restore from text
        parsed.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn sets_override_file_values() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_set("task.k=100").unwrap();
        cfg.apply_set("trainer.iters=50").unwrap();
        cfg.apply_set("classifier.local_widths=8,8").unwrap();
        assert_eq!(cfg.task.k, 100.0);
        assert_eq!(cfg.trainer.iters, 50);
        assert_eq!(cfg.classifier.local_widths, vec![8, 8]);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply_set("task.k").is_err());
        assert!(cfg.apply_set("task.unknown=1").is_err());
        assert!(cfg.apply_set("task.convention=weird").is_err());
        cfg.apply_set("classifier.xi=0.5").unwrap();
        assert!(cfg.validate().is_err()); // xi >= 1/(2m)
    }

    #[test]
    fn quadrature_requires_boundary_form() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_set("eval.method=quadrature").unwrap();
        assert!(cfg.validate().is_err());
        cfg.apply_set("classifier.form=boundary").unwrap();
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("# top comment\n\n[task]\nk = 5 # inline\n").unwrap();
        assert_eq!(cfg.task.k, 5.0);
    }

    #[test]
    fn default_architectures_have_documented_sizes() {
        // Regular: 2 -> 250 -> 250 -> 1 is 63,751 parameters. Each local
        // net 2 -> 100 -> 100 -> 1 is 10,501, so five cells hold 52,505,
        // fewer weights in total than the regular classifier.
        use boundary_lab_core::mlp::MlpSpec;
        let cfg = ExperimentConfig::default();
        let regular = MlpSpec::new(2, &cfg.classifier.regular_widths).unwrap();
        assert_eq!(regular.param_count(), 63_751);
        let local = MlpSpec::new(2, &cfg.classifier.local_widths).unwrap();
        assert_eq!(local.param_count(), 10_501);
        assert!(cfg.classifier.m * local.param_count() < regular.param_count());
        assert_eq!(cfg.classifier.m * local.param_count(), 52_505);
    }
}
