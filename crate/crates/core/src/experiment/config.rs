//! Flat `key=value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::Error;
use crate::learner::TrainConfig;
use crate::oracle::{StateSpace, DEFAULT_MAX_STATES};
use crate::refinery::{CompletionStrategy, RefineConfig};
use crate::sampler::{Algorithm, LimitKind, SamplerConfig};
use crate::sas::Task;
use crate::search::SearchLimits;

/// Samples per task under the per-variable rule is this divided by `|V|`.
pub const PER_VARIABLE_TOTAL: u64 = 16_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    /// `round(p·|FSS|)`.
    FssFraction(f64),
    Fixed(usize),
    /// `round(16,000,000 / |V|)`.
    PerVariable,
}

impl Budget {
    pub fn resolve(&self, task: &Task, oracle: Option<&StateSpace>) -> Result<usize, Error> {
        let n = match *self {
            Budget::Fixed(n) => n,
            Budget::PerVariable => (PER_VARIABLE_TOTAL as f64 / task.num_vars() as f64).round() as usize,
            Budget::FssFraction(p) => {
                let space = oracle.ok_or_else(|| {
                    Error::Config("a fraction-of-FSS budget needs an enumerated state space".into())
                })?;
                (p * space.len() as f64).round() as usize
            }
        };
        if n == 0 {
            return Err(Error::Config(format!("budget {self} gives zero samples")));
        }
        Ok(n)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::FssFraction(p) => write!(f, "fss:{p}"),
            Budget::Fixed(n) => write!(f, "fixed:{n}"),
            Budget::PerVariable => f.write_str("per-variable"),
        }
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("bad budget `{s}` (fss:<p>, fixed:<n> or per-variable)"));
        if s == "per-variable" {
            return Ok(Budget::PerVariable);
        }
        if let Some(p) = s.strip_prefix("fss:") {
            let p: f64 = p.parse().map_err(|_| bad())?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(bad());
            }
            return Ok(Budget::FssFraction(p));
        }
        if let Some(n) = s.strip_prefix("fixed:") {
            return n.parse().map(Budget::Fixed).map_err(|_| bad());
        }
        Err(bad())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicKind {
    Learned,
    GoalCount,
    Perfect,
    Blind,
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeuristicKind::Learned => "learned",
            HeuristicKind::GoalCount => "goalcount",
            HeuristicKind::Perfect => "perfect",
            HeuristicKind::Blind => "blind",
        })
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "learned" => Ok(HeuristicKind::Learned),
            "goalcount" => Ok(HeuristicKind::GoalCount),
            "perfect" => Ok(HeuristicKind::Perfect),
            "blind" => Ok(HeuristicKind::Blind),
            other => Err(Error::Config(format!("unknown heuristic `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Enumerate when the space fits under `max-states`.
    Auto,
    Required,
    Off,
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::Auto => "auto",
            OracleMode::Required => "required",
            OracleMode::Off => "off",
        })
    }
}

impl FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "auto" => Ok(OracleMode::Auto),
            "required" => Ok(OracleMode::Required),
            "off" => Ok(OracleMode::Off),
            other => Err(Error::Config(format!("unknown oracle mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialStates {
    /// Random-walk endpoints from the task's initial state.
    Walks { count: usize, walk_length: usize, seed: u64 },
    /// One state per line, shared by every task.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub tasks: Vec<PathBuf>,
    pub heuristic: HeuristicKind,
    pub budget: Budget,
    pub sampler: SamplerConfig,
    pub refine: RefineConfig,
    pub relabel_hstar: bool,
    pub train: TrainConfig,
    pub sample_seeds: Vec<u64>,
    pub net_seeds: Vec<u64>,
    pub initial: InitialStates,
    pub limits: SearchLimits,
    pub eval_fss: bool,
    pub common_solved: bool,
    pub oracle: OracleMode,
    pub max_states: usize,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            tasks: Vec::new(),
            heuristic: HeuristicKind::Learned,
            budget: Budget::Fixed(1000),
            sampler: SamplerConfig::default(),
            refine: RefineConfig {
                random_fraction: 0.2,
                ..RefineConfig::default()
            },
            relabel_hstar: false,
            train: TrainConfig::default(),
            sample_seeds: vec![1],
            net_seeds: vec![1],
            initial: InitialStates::Walks {
                count: 50,
                walk_length: 200,
                seed: 1,
            },
            limits: SearchLimits::default(),
            eval_fss: true,
            common_solved: false,
            oracle: OracleMode::Auto,
            max_states: DEFAULT_MAX_STATES,
            jobs: 1,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, Error> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` expects true/false, got `{v}`"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, Error> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
}

fn parse_opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, Error> {
    if v == "none" || v.is_empty() {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

fn parse_seeds(key: &str, v: &str) -> Result<Vec<u64>, Error> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse_num(key, a)?, parse_num(key, b)?);
                out.extend(a..=b);
            }
            None => out.push(parse_num(key, part)?),
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("`{key}` must list at least one seed")));
    }
    Ok(out)
}

fn opt_text<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let v = value.trim();
        match key.trim() {
            "tasks" => {
                self.tasks = v
                    .split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(PathBuf::from)
                    .collect()
            }
            "heuristic" => self.heuristic = v.parse()?,
            "budget" => self.budget = v.parse()?,
            "algorithm" => self.sampler.algorithm = v.parse::<Algorithm>()?,
            "limit" => self.sampler.limit = v.parse::<LimitKind>()?,
            "p-fsm" => self.sampler.p_fsm = parse_num(key, v)?,
            "mutex" => self.sampler.use_mutex = parse_bool(key, v)?,
            "goal-reset" => self.sampler.goal_reset = parse_bool(key, v)?,
            "sai" => self.refine.sai = parse_bool(key, v)?,
            "sui" => self.refine.sui = parse_bool(key, v)?,
            "completion" => self.refine.completion = v.parse::<CompletionStrategy>()?,
            "random-fraction" => self.refine.random_fraction = parse_num(key, v)?,
            "relabel-hstar" => self.relabel_hstar = parse_bool(key, v)?,
            "batch" => self.train.batch_size = parse_num(key, v)?,
            "lr" => self.train.learning_rate = parse_num(key, v)?,
            "patience" => self.train.patience = parse_num(key, v)?,
            "max-epochs" => self.train.max_epochs = parse_opt(key, v)?,
            "train-max-seconds" => self.train.max_seconds = parse_opt(key, v)?,
            "hidden" => self.train.hidden = parse_num(key, v)?,
            "sample-seeds" => self.sample_seeds = parse_seeds(key, v)?,
            "net-seeds" => self.net_seeds = parse_seeds(key, v)?,
            "initial-file" => self.initial = InitialStates::File(PathBuf::from(v)),
            "initial-states" | "walk-length" | "initial-seed" => {
                let (mut count, mut walk_length, mut seed) = match self.initial {
                    InitialStates::Walks {
                        count,
                        walk_length,
                        seed,
                    } => (count, walk_length, seed),
                    InitialStates::File(_) => (50, 200, 1),
                };
                match key.trim() {
                    "initial-states" => count = parse_num(key, v)?,
                    "walk-length" => walk_length = parse_num(key, v)?,
                    _ => seed = parse_num(key, v)?,
                }
                self.initial = InitialStates::Walks {
                    count,
                    walk_length,
                    seed,
                };
            }
            "max-seconds" => self.limits.max_seconds = parse_opt(key, v)?,
            "max-memory-mb" => self.limits.max_memory_mb = parse_opt(key, v)?,
            "max-expansions" => self.limits.max_expansions = parse_opt(key, v)?,
            "eval-fss" => self.eval_fss = parse_bool(key, v)?,
            "common-solved" => self.common_solved = parse_bool(key, v)?,
            "oracle" => self.oracle = v.parse()?,
            "max-states" => self.max_states = parse_num(key, v)?,
            "jobs" => self.jobs = parse_num::<usize>(key, v)?.max(1),
            other => return Err(Error::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut cfg = ExperimentConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
            cfg.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a file; relative task and initial-state paths are taken
    /// relative to its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for t in &mut cfg.tasks {
            if t.is_relative() {
                *t = base.join(&*t);
            }
        }
        if let InitialStates::File(f) = &mut cfg.initial {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.sample_seeds.is_empty() || self.net_seeds.is_empty() {
            return Err(Error::Config("seed lists must be nonempty".into()));
        }
        if !(0.0..=1.0).contains(&self.refine.random_fraction) {
            return Err(Error::Config("random-fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Canonical text with every key, in a fixed order. `jobs` is left out
    /// so that output bytes do not depend on it.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("tasks={}", self.tasks.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",")),
            format!("heuristic={}", self.heuristic),
            format!("budget={}", self.budget),
            format!("algorithm={}", self.sampler.algorithm),
            format!("limit={}", self.sampler.limit),
            format!("p-fsm={}", self.sampler.p_fsm),
            format!("mutex={}", self.sampler.use_mutex),
            format!("goal-reset={}", self.sampler.goal_reset),
            format!("sai={}", self.refine.sai),
            format!("sui={}", self.refine.sui),
            format!("completion={}", self.refine.completion),
            format!("random-fraction={}", self.refine.random_fraction),
            format!("relabel-hstar={}", self.relabel_hstar),
            format!("batch={}", self.train.batch_size),
            format!("lr={}", self.train.learning_rate),
            format!("patience={}", self.train.patience),
            format!("max-epochs={}", opt_text(self.train.max_epochs)),
            format!("train-max-seconds={}", opt_text(self.train.max_seconds)),
            format!("hidden={}", self.train.hidden),
            format!("sample-seeds={}", join(&self.sample_seeds)),
            format!("net-seeds={}", join(&self.net_seeds)),
        ];
        match &self.initial {
            InitialStates::Walks {
                count,
                walk_length,
                seed,
            } => {
                lines.push(format!("initial-states={count}"));
                lines.push(format!("walk-length={walk_length}"));
                lines.push(format!("initial-seed={seed}"));
            }
            InitialStates::File(p) => lines.push(format!("initial-file={}", p.display())),
        }
        lines.extend([
            format!("max-seconds={}", opt_text(self.limits.max_seconds)),
            format!("max-memory-mb={}", opt_text(self.limits.max_memory_mb)),
            format!("max-expansions={}", opt_text(self.limits.max_expansions)),
            format!("eval-fss={}", self.eval_fss),
            format!("common-solved={}", self.common_solved),
            format!("oracle={}", self.oracle),
            format!("max-states={}", self.max_states),
        ]);
        lines.into_iter().map(|l| l + "\n").collect()
    }

    pub fn hash(&self) -> String {
        format!("{:016x}", crate::seeds::derive(0, &self.to_text()))
    }

    /// Whether any stage needs an enumerated state space.
    pub fn needs_oracle(&self) -> bool {
        matches!(self.budget, Budget::FssFraction(_))
            || self.heuristic == HeuristicKind::Perfect
            || self.relabel_hstar
            || self.refine.completion == CompletionStrategy::Fss
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::parse(
            "tasks = a.sas, b.sas\n# comment\nheuristic=blind\nbudget=fss:0.01\nsample-seeds=1..3\nnet-seeds=4,9\nmax-epochs=20\n",
        )
        .unwrap();
        assert_eq!(cfg.tasks.len(), 2);
        assert_eq!(cfg.sample_seeds, vec![1, 2, 3]);
        assert_eq!(cfg.budget, Budget::FssFraction(0.01));
        assert_eq!(cfg.train.max_epochs, Some(20));
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert!(ExperimentConfig::parse("bogus=1").is_err());
        assert!(ExperimentConfig::parse("net-seeds=").is_err());
        assert!(ExperimentConfig::parse("mutex=maybe").is_err());
    }

    #[test]
    fn budgets() {
        let task = crate::sas::parse_sas(crate::testing::TOY3).unwrap();
        assert_eq!(Budget::PerVariable.resolve(&task, None).unwrap(), 8_000_000);
        assert_eq!(Budget::Fixed(7).resolve(&task, None).unwrap(), 7);
        assert!(Budget::FssFraction(0.5).resolve(&task, None).is_err());
        let space = crate::oracle::enumerate_forward(&task, 10).unwrap();
        assert_eq!(Budget::FssFraction(0.5).resolve(&task, Some(&space)).unwrap(), 2);
        assert!("fss:0".parse::<Budget>().is_err());
        assert_eq!("per-variable".parse::<Budget>().unwrap(), Budget::PerVariable);
    }
}
