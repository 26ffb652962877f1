//! End-to-end experiments: sample, refine and train per (sample seed ×
//! network seed) cell, then search from a fixed set of initial states.
//!
//! Output layout under the experiment directory:
//!
//! ```text
//! config.txt                    canonical configuration
//! tasks/<task>/initial_states.txt
//! cells/<task>__s<S>__n<N>/     runs.csv, cell.csv, timings.csv, model.txt, done
//! runs.csv cells.csv timings.csv report.csv report.txt
//! ```
//!
//! A cell with a `done` marker is not recomputed, so an interrupted
//! experiment resumes where it stopped.

mod config;
mod eval;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Budget, ExperimentConfig, HeuristicKind, InitialStates, OracleMode, PER_VARIABLE_TOTAL};
pub use eval::{
    arithmetic_mean, eval_estimates, eval_heuristic_over_fss, exact_hstar, gen_initial_states, geometric_mean,
    states_from_text, states_to_text, EstimateQuality,
};
pub use report::{read_cells, read_runs, write_rows, CellRow, Report, RunRow, Summary, CELL_HEADER, RUN_HEADER};

use crate::error::Error;
use crate::learner::{fit, Dataset, Model, TrainConfig};
use crate::oracle::{enumerate_forward, StateSpace};
use crate::par;
use crate::refinery::{build_training_set, RefineConfig, TrainingData, TrainingSetConfig};
use crate::sampler::{Sample, SamplerConfig};
use crate::sas::{PartialState, Task};
use crate::search::{gbfs, Heuristic};
use crate::seeds;

pub const JOBS_ENV: &str = "SAMPLAN_JOBS";
const TIMING_HEADER: [&str; 6] = ["task", "sample_seed", "net_seed", "stage", "initial", "seconds"];

/// `SAMPLAN_JOBS` when set to a positive integer, otherwise `flag`.
pub fn resolve_jobs(flag: usize) -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&j| j > 0)
        .unwrap_or(flag.max(1))
}

/// A loaded task with its optional oracle, test starts and sample budget.
pub struct TaskContext {
    pub name: String,
    pub task: Task,
    pub oracle: Option<StateSpace>,
    pub initial: Vec<PartialState>,
    pub budget: usize,
}

impl TaskContext {
    pub fn prepare(path: &Path, cfg: &ExperimentConfig) -> Result<Self, Error> {
        let task = Task::from_file(path)?;
        let oracle = match cfg.oracle {
            OracleMode::Off => None,
            OracleMode::Required => Some(enumerate_forward(&task, cfg.max_states)?),
            OracleMode::Auto => match enumerate_forward(&task, cfg.max_states) {
                Ok(space) => Some(space),
                Err(Error::TooLarge { .. }) => None,
                Err(e) => return Err(e),
            },
        };
        if oracle.is_none() && cfg.needs_oracle() {
            return Err(Error::Config(format!(
                "{}: configuration needs the state space but it was not enumerated",
                task.name
            )));
        }
        let initial = match &cfg.initial {
            InitialStates::Walks {
                count,
                walk_length,
                seed,
            } => gen_initial_states(&task, *count, *walk_length, *seed).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", task.name)),
                e => e,
            })?,
            InitialStates::File(f) => states_from_text(&fs::read_to_string(f)?)?,
        };
        if let Some(bad) = initial
            .iter()
            .find(|s| !s.is_complete() || s.len() != task.num_vars())
        {
            return Err(Error::Config(format!("{}: initial state {bad} is not a complete state", task.name)));
        }
        let budget = if cfg.heuristic == HeuristicKind::Learned {
            cfg.budget.resolve(&task, oracle.as_ref())?
        } else {
            0
        };
        Ok(TaskContext {
            name: task.name.clone(),
            task,
            oracle,
            initial,
            budget,
        })
    }

    /// Sample → refine → optional `h*` relabeling. Returns the training
    /// samples and the mean estimate error before relabeling.
    pub fn training_samples(&self, cfg: &ExperimentConfig, sample_seed: u64) -> Result<(Vec<Sample>, Option<f64>), Error> {
        let set_config = TrainingSetConfig {
            sampler: SamplerConfig {
                num_samples: self.budget,
                seed: seeds::derive(sample_seed, "sample"),
                ..cfg.sampler.clone()
            },
            refine: RefineConfig {
                seed: sample_seed,
                ..cfg.refine.clone()
            },
        };
        let (set, _) = build_training_set(&self.task, &set_config, self.oracle.as_ref())?;
        let error = match &self.oracle {
            Some(o) => Some(eval_estimates(&self.task, &set.samples, Some(o))?.mean_abs_error),
            None => None,
        };
        let samples = if cfg.relabel_hstar {
            let labels = par::map(&set.samples, |s| -> Result<Option<u32>, Error> {
                if s.state.is_complete() {
                    exact_hstar(&self.task, self.oracle.as_ref(), &s.state)
                } else {
                    Ok(None)
                }
            });
            let mut out = Vec::with_capacity(set.samples.len());
            for (s, h) in set.samples.into_iter().zip(labels) {
                if let Some(h) = h? {
                    out.push(Sample { h, ..s });
                }
            }
            out
        } else {
            set.samples
        };
        Ok((samples, error))
    }
}

/// Rows produced by one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellOutput {
    pub cell: CellRow,
    pub runs: Vec<RunRow>,
    pub timings: Vec<Vec<String>>,
    pub model: Option<Model>,
}

/// Runs one (sample seed × network seed) cell. Stage failures are recorded
/// in the cell row.
pub fn run_cell(ctx: &TaskContext, cfg: &ExperimentConfig, sample_seed: u64, net_seed: u64) -> CellOutput {
    let mut out = CellOutput {
        cell: CellRow {
            task: ctx.name.clone(),
            sample_seed,
            net_seed,
            heuristic: cfg.heuristic.to_string(),
            ..CellRow::default()
        },
        runs: Vec::new(),
        timings: Vec::new(),
        model: None,
    };
    if let Err(e) = fill_cell(ctx, cfg, &mut out) {
        log::warn!("{} s{} n{}: {e}", ctx.name, sample_seed, net_seed);
        out.cell.error = e.to_string();
    }
    out
}

fn fill_cell(ctx: &TaskContext, cfg: &ExperimentConfig, out: &mut CellOutput) -> Result<(), Error> {
    let (ss, ns) = (out.cell.sample_seed, out.cell.net_seed);
    let timing = |stage: &str, initial: String, secs: f64| {
        vec![
            ctx.name.clone(),
            ss.to_string(),
            ns.to_string(),
            stage.to_string(),
            initial,
            format!("{secs:.3}"),
        ]
    };
    if cfg.heuristic == HeuristicKind::Learned {
        let started = Instant::now();
        let (samples, error) = ctx.training_samples(cfg, ss)?;
        out.timings.push(timing("sample", String::new(), started.elapsed().as_secs_f64()));
        out.cell.samples = samples.len();
        out.cell.sample_error = error;

        let started = Instant::now();
        let data = Dataset::from_training(&TrainingData::from_samples(&samples, &ctx.task));
        let train_cfg = TrainConfig {
            seed: ns,
            ..cfg.train.clone()
        };
        let (model, report) = fit(&data, &train_cfg)?;
        out.timings.push(timing("train", String::new(), started.elapsed().as_secs_f64()));
        out.cell.epochs = Some(report.epochs);
        out.cell.best_epoch = Some(report.best_epoch);
        out.cell.best_val_loss = Some(report.best_validation_loss);
        out.cell.born_dead_retries = report.born_dead_retries;
        out.model = Some(model);
    }

    let heuristic = match cfg.heuristic {
        HeuristicKind::Learned => Heuristic::Learned(out.model.as_ref().expect("trained above")),
        HeuristicKind::GoalCount => Heuristic::GoalCount,
        HeuristicKind::Blind => Heuristic::Blind,
        HeuristicKind::Perfect => Heuristic::Perfect(ctx.oracle.as_ref().expect("checked in prepare")),
    };
    if cfg.eval_fss {
        if let Some(oracle) = &ctx.oracle {
            out.cell.fss_error = Some(eval_heuristic_over_fss(&ctx.task, heuristic, oracle)?);
        }
    }

    let results = par::map(&ctx.initial, |s| gbfs(&ctx.task, s, heuristic, cfg.limits));
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        out.timings.push(timing("search", i.to_string(), r.seconds));
        out.runs.push(RunRow {
            task: ctx.name.clone(),
            sample_seed: ss,
            net_seed: ns,
            heuristic: heuristic.name().to_string(),
            initial: i,
            status: r.status,
            plan_cost: r.plan_cost,
            expanded: r.expanded,
            generated: r.generated,
        });
    }
    Ok(())
}

fn cell_dir(out: &Path, task: &str, ss: u64, ns: u64) -> PathBuf {
    out.join("cells").join(format!("{task}__s{ss}__n{ns}"))
}

fn write_cell(dir: &Path, output: &CellOutput) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let _ = fs::remove_file(dir.join("done"));
    write_rows(fs::File::create(dir.join("runs.csv"))?, &RUN_HEADER, output.runs.iter().map(RunRow::record))?;
    write_rows(fs::File::create(dir.join("cell.csv"))?, &CELL_HEADER, [output.cell.record()])?;
    write_rows(fs::File::create(dir.join("timings.csv"))?, &TIMING_HEADER, output.timings.iter().cloned())?;
    if let Some(m) = &output.model {
        m.write(std::io::BufWriter::new(fs::File::create(dir.join("model.txt"))?))?;
    }
    fs::write(dir.join("done"), "")?;
    Ok(())
}

/// Skips the header line of a CSV file.
fn body(path: &Path) -> Result<String, Error> {
    let text = fs::read_to_string(path)?;
    Ok(text.split_once('\n').map_or(String::new(), |(_, rest)| rest.to_string()))
}

fn merge(out: &Path, dirs: &[PathBuf], source: &str, target: &str, header: &[&str]) -> Result<(), Error> {
    let mut text = header.join(",") + "\n";
    for d in dirs {
        text.push_str(&body(&d.join(source))?);
    }
    fs::write(out.join(target), text)?;
    Ok(())
}

/// Runs (or resumes) the experiment under `out` and writes the merged CSVs
/// and the report.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Report, Error> {
    cfg.validate()?;
    if cfg.tasks.is_empty() {
        return Err(Error::Config("no tasks configured".into()));
    }
    fs::create_dir_all(out)?;
    let canonical = cfg.to_text();
    let config_path = out.join("config.txt");
    if config_path.exists() && fs::read_to_string(&config_path)? != canonical {
        return Err(Error::Config(format!(
            "{} holds a different experiment; use a fresh directory",
            out.display()
        )));
    }
    fs::write(&config_path, &canonical)?;

    let contexts = cfg
        .tasks
        .iter()
        .map(|p| TaskContext::prepare(p, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut names: Vec<&str> = contexts.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("task names must be distinct".into()));
    }
    for ctx in &contexts {
        let dir = out.join("tasks").join(&ctx.name);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("initial_states.txt"), states_to_text(&ctx.initial))?;
    }

    let cells: Vec<(usize, u64, u64)> = (0..contexts.len())
        .flat_map(|t| {
            cfg.sample_seeds
                .iter()
                .flat_map(move |&ss| cfg.net_seeds.iter().map(move |&ns| (t, ss, ns)))
        })
        .collect();
    let dirs: Vec<PathBuf> = cells
        .iter()
        .map(|&(t, ss, ns)| cell_dir(out, &contexts[t].name, ss, ns))
        .collect();
    let jobs = cfg.jobs.max(1);
    let written = par::with_jobs(jobs, || {
        par::map_range(cells.len(), |i| -> Result<(), Error> {
            let (t, ss, ns) = cells[i];
            if dirs[i].join("done").exists() {
                log::info!("{}: already complete", dirs[i].display());
                return Ok(());
            }
            let output = run_cell(&contexts[t], cfg, ss, ns);
            write_cell(&dirs[i], &output)
        })
    });
    for w in written {
        w?;
    }

    merge(out, &dirs, "runs.csv", "runs.csv", &RUN_HEADER)?;
    merge(out, &dirs, "cell.csv", "cells.csv", &CELL_HEADER)?;
    merge(out, &dirs, "timings.csv", "timings.csv", &TIMING_HEADER)?;

    let mut provenance = vec![
        format!("config {}", cfg.hash()),
        format!("heuristic {}", cfg.heuristic),
        format!(
            "sample seeds {}; network seeds {}",
            cfg.sample_seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            cfg.net_seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        ),
    ];
    for ctx in &contexts {
        provenance.push(format!(
            "{}: {} initial states, {} samples, |FSS| {}",
            ctx.name,
            ctx.initial.len(),
            ctx.budget,
            ctx.oracle.as_ref().map_or_else(|| "unknown".to_string(), |o| o.len().to_string())
        ));
    }
    fs::write(out.join("provenance.txt"), provenance.join("\n") + "\n")?;
    write_report(out, cfg.common_solved)
}

/// Recomputes the report from `runs.csv` and `cells.csv` under `out`.
pub fn write_report(out: &Path, common_solved: bool) -> Result<Report, Error> {
    let runs = read_runs(fs::File::open(out.join("runs.csv"))?)?;
    let cells = read_cells(fs::File::open(out.join("cells.csv"))?)?;
    let report = Report::from_rows(&runs, &cells, common_solved);
    report.write_csv(fs::File::create(out.join("report.csv"))?)?;
    let provenance: Vec<String> = fs::read_to_string(out.join("provenance.txt"))
        .map(|t| t.lines().map(str::to_string).collect())
        .unwrap_or_default();
    fs::write(out.join("report.txt"), report.to_table(&provenance))?;
    Ok(report)
}
