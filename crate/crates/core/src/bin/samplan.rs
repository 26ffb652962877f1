use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use samplan::experiment::{self, ExperimentConfig};
use samplan::learner::{fit, Dataset, Model, TrainConfig};
use samplan::oracle::{enumerate_forward, StateSpace, DEFAULT_MAX_STATES};
use samplan::refinery::{refine, write_training, CompletionStrategy, RefineConfig, TrainingData};
use samplan::sampler::{self, resolve_limit, Algorithm, LimitKind, Origin, Sample, SampleSet, SamplerConfig};
use samplan::sas::{PartialState, Task};
use samplan::search::{gbfs, Heuristic, SearchLimits};

#[derive(Parser)]
#[command(name = "samplan", version, about = "Learn planning heuristics from regression samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print variables, operators, fact counts and regression limits.
    TaskInfo { task: PathBuf },
    /// Enumerate the forward state space and print h* statistics.
    Statespace {
        task: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        /// Also print the h* histogram.
        #[arg(long)]
        histogram: bool,
    },
    /// Generate partial-state samples by regression.
    Sample(SampleArgs),
    /// Improve, complete and augment partial samples into a training file.
    Refine(RefineArgs),
    /// Train a network on a training file.
    Train(TrainArgs),
    /// Run GBFS from one or more initial states.
    Search(SearchArgs),
    /// Mean |h - h*| of a training file or of a heuristic over the state space.
    Eval(EvalArgs),
    /// Run or resume an experiment described by a config file.
    Experiment(ExperimentArgs),
    /// Recompute the report of an experiment directory.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        common_solved: bool,
    },
}

#[derive(Args)]
struct SampleArgs {
    task: PathBuf,
    #[arg(long, default_value = "fsm")]
    algorithm: Algorithm,
    #[arg(long, short = 'n', default_value_t = 1000)]
    num_samples: usize,
    /// `fixed:<L>`, `facts` or `facts-per-effect`.
    #[arg(long, default_value = "facts-per-effect")]
    limit: LimitKind,
    #[arg(long, default_value_t = 0.1)]
    p_fsm: f64,
    #[arg(long)]
    no_mutex: bool,
    #[arg(long)]
    no_goal_reset: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RefineArgs {
    task: PathBuf,
    /// Partial-sample file written by `sample`.
    #[arg(long, short = 'i')]
    input: PathBuf,
    #[arg(long)]
    sai: bool,
    #[arg(long)]
    sui: bool,
    #[arg(long, default_value = "mutex")]
    completion: CompletionStrategy,
    #[arg(long, default_value_t = 0.0)]
    random_fraction: f64,
    /// Final set size; defaults to the input size divided by (1 - random fraction).
    #[arg(long)]
    num_samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Training file written by `refine`.
    data: PathBuf,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 100)]
    patience: usize,
    #[arg(long)]
    max_seconds: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long, default_value_t = samplan::learner::HIDDEN_WIDTH)]
    hidden: usize,
    #[arg(long, default_value_t = 1)]
    net_seed: u64,
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    task: PathBuf,
    /// `learned:<model>`, `goalcount`, `perfect` or `blind`.
    #[arg(long, default_value = "goalcount")]
    heuristic: String,
    /// A file of states (one `v1,v2,...` per line), optionally `<file>:<index>`;
    /// the task's initial state when omitted.
    #[arg(long)]
    initial_state: Option<String>,
    #[arg(long, default_value_t = 300.0)]
    max_seconds: f64,
    #[arg(long, default_value_t = 2048)]
    max_memory_mb: usize,
    #[arg(long)]
    max_expansions: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    /// Print the plan of solved runs to stderr.
    #[arg(long)]
    print_plan: bool,
}

#[derive(Args)]
struct EvalArgs {
    task: PathBuf,
    /// Training file whose estimates are compared with h*.
    #[arg(long, conflicts_with = "heuristic")]
    samples: Option<PathBuf>,
    /// Heuristic evaluated over the forward state space.
    #[arg(long)]
    heuristic: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, short = 'c')]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override a config key, `key=value`; repeatable.
    #[arg(long = "set")]
    overrides: Vec<String>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_task(path: &Path) -> Result<Task> {
    Task::from_file(path).with_context(|| format!("reading {}", path.display()))
}

fn task_info(path: &Path) -> Result<()> {
    let task = load_task(path)?;
    println!("name        {}", task.name);
    println!("variables   {}", task.num_vars());
    println!("operators   {}", task.operators.len());
    println!("mutexes     {}", task.mutexes.len());
    println!("facts (F)   {}", task.num_facts());
    if let Ok(mean) = task.mean_effect_size() {
        println!("mean |eff|  {mean:.4}");
        println!("F / mean    {}", resolve_limit(&task, LimitKind::FactsPerMeanEffect)?.resolved);
    }
    println!("goal        {}", task.goal);
    println!("initial     {}", task.initial);
    Ok(())
}

fn statespace(path: &Path, max_states: usize, histogram: bool) -> Result<()> {
    let task = load_task(path)?;
    let space = enumerate_forward(&task, max_states)?;
    let dead = space.hstar_values().iter().filter(|h| h.is_none()).count();
    println!("states      {}", space.len());
    println!("goal states {}", space.goal_count());
    println!("dead ends   {dead}");
    println!("dmax        {}", space.dmax()?);
    println!("mean h*     {:.4}", space.mean_hstar());
    if histogram {
        for (h, count) in space.hstar_histogram().iter().enumerate() {
            println!("h*={h:<4} {count}");
        }
    }
    Ok(())
}

fn sample(a: &SampleArgs) -> Result<()> {
    let task = load_task(&a.task)?;
    let set = sampler::generate(
        &task,
        &SamplerConfig {
            algorithm: a.algorithm,
            num_samples: a.num_samples,
            limit: a.limit,
            p_fsm: a.p_fsm,
            use_mutex: !a.no_mutex,
            goal_reset: !a.no_goal_reset,
            seed: a.seed,
        },
    )?;
    set.write_partial(output(&a.output)?)?;
    eprintln!(
        "{} samples (limit {}){}",
        set.samples.len(),
        set.meta.limit.resolved,
        if set.meta.exhausted { ", regression space exhausted" } else { "" }
    );
    Ok(())
}

fn run_refine(a: &RefineArgs) -> Result<()> {
    let task = load_task(&a.task)?;
    let partial = SampleSet::read_partial(BufReader::new(File::open(&a.input)?))?;
    let oracle = if a.completion == CompletionStrategy::Fss {
        Some(enumerate_forward(&task, a.max_states)?)
    } else {
        None
    };
    let total = match a.num_samples {
        Some(n) => n,
        None if a.random_fraction < 1.0 => (partial.samples.len() as f64 / (1.0 - a.random_fraction)).round() as usize,
        None => bail!("--num-samples is required when --random-fraction is 1"),
    };
    let config = RefineConfig {
        sai: a.sai,
        sui: a.sui,
        completion: a.completion,
        random_fraction: a.random_fraction,
        seed: a.seed,
    };
    let (set, stats) = refine(&task, &partial, total, &config, oracle.as_ref())?;
    write_training(&set.samples, &task, output(&a.output)?)?;
    eprintln!(
        "{} samples ({} random, {} mutex fallbacks, {} invalid predecessors dropped)",
        set.samples.len(),
        stats.random_samples,
        stats.mutex_fallbacks,
        stats.invalid_predecessors
    );
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let data = TrainingData::read(BufReader::new(File::open(&a.data)?))?;
    let dataset = Dataset::from_training(&data);
    let config = TrainConfig {
        batch_size: a.batch,
        learning_rate: a.lr,
        patience: a.patience,
        max_seconds: a.max_seconds,
        max_epochs: a.max_epochs,
        hidden: a.hidden,
        seed: a.net_seed,
        ..TrainConfig::default()
    };
    let (model, report) = fit(&dataset, &config)?;
    model.write(BufWriter::new(File::create(&a.output)?))?;
    eprintln!(
        "epochs {} (best {}), validation MSE {:.5}, training MSE {:.5}, born-dead retries {}, {:.1}s, stopped by {:?}",
        report.epochs,
        report.best_epoch,
        report.best_validation_loss,
        report.final_training_loss,
        report.born_dead_retries,
        report.seconds,
        report.stop
    );
    Ok(())
}

enum HeuristicSpec {
    Learned(Model),
    GoalCount,
    Perfect,
    Blind,
}

impl HeuristicSpec {
    fn parse(spec: &str) -> Result<Self> {
        Ok(match spec {
            "goalcount" => HeuristicSpec::GoalCount,
            "perfect" => HeuristicSpec::Perfect,
            "blind" => HeuristicSpec::Blind,
            other => match other.strip_prefix("learned:") {
                Some(path) => HeuristicSpec::Learned(
                    Model::read(File::open(path).with_context(|| format!("opening model {path}"))?)?,
                ),
                None => bail!("unknown heuristic `{other}`"),
            },
        })
    }

    fn needs_oracle(&self) -> bool {
        matches!(self, HeuristicSpec::Perfect)
    }

    fn heuristic<'a>(&'a self, oracle: Option<&'a StateSpace>) -> Heuristic<'a> {
        match self {
            HeuristicSpec::Learned(m) => Heuristic::Learned(m),
            HeuristicSpec::GoalCount => Heuristic::GoalCount,
            HeuristicSpec::Perfect => Heuristic::Perfect(oracle.expect("oracle enumerated")),
            HeuristicSpec::Blind => Heuristic::Blind,
        }
    }
}

fn initial_states(task: &Task, spec: &Option<String>) -> Result<Vec<PartialState>> {
    let Some(spec) = spec else {
        return Ok(vec![task.initial.clone()]);
    };
    let (path, index) = match spec.rsplit_once(':') {
        Some((p, i)) if i.chars().all(|c| c.is_ascii_digit()) && !i.is_empty() => (p, Some(i.parse::<usize>()?)),
        _ => (spec.as_str(), None),
    };
    let states = experiment::states_from_text(&std::fs::read_to_string(path)?)?;
    match index {
        Some(i) => Ok(vec![states
            .get(i)
            .cloned()
            .with_context(|| format!("{path} has {} states", states.len()))?]),
        None => Ok(states),
    }
}

fn search(a: &SearchArgs) -> Result<()> {
    let task = load_task(&a.task)?;
    let spec = HeuristicSpec::parse(&a.heuristic)?;
    let oracle = if spec.needs_oracle() {
        Some(enumerate_forward(&task, a.max_states)?)
    } else {
        None
    };
    let heuristic = spec.heuristic(oracle.as_ref());
    let limits = SearchLimits {
        max_seconds: Some(a.max_seconds),
        max_memory_mb: Some(a.max_memory_mb),
        max_expansions: a.max_expansions,
    };
    let mut w = csv::Writer::from_writer(io::stdout());
    w.write_record(["initial", "status", "plan_cost", "expanded", "generated", "seconds"])?;
    for (i, start) in initial_states(&task, &a.initial_state)?.iter().enumerate() {
        let r = gbfs(&task, start, heuristic, limits)?;
        w.write_record([
            i.to_string(),
            r.status.to_string(),
            r.plan_cost.map_or_else(String::new, |c| c.to_string()),
            r.expanded.to_string(),
            r.generated.to_string(),
            format!("{:.3}", r.seconds),
        ])?;
        if a.print_plan && r.solved() {
            for &o in &r.plan {
                eprintln!("{}", task.operators[o].name);
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let task = load_task(&a.task)?;
    let oracle = enumerate_forward(&task, a.max_states)?;
    if let Some(path) = &a.samples {
        let data = TrainingData::read(BufReader::new(File::open(path)?))?;
        if data.num_facts != task.num_facts() {
            bail!("training file has {} facts, task has {}", data.num_facts, task.num_facts());
        }
        let samples = data
            .rows
            .iter()
            .map(|(h, bits)| {
                Ok(Sample {
                    state: bits.decode(&task)?,
                    h: *h,
                    origin: Origin::Random,
                })
            })
            .collect::<Result<Vec<_>, samplan::Error>>()?;
        let q = experiment::eval_estimates(&task, &samples, Some(&oracle))?;
        println!("mean |h - h*| {:.4} over {} samples ({} skipped)", q.mean_abs_error, q.evaluated, q.skipped);
    } else {
        let spec = HeuristicSpec::parse(a.heuristic.as_deref().unwrap_or("goalcount"))?;
        let err = experiment::eval_heuristic_over_fss(&task, spec.heuristic(Some(&oracle)), &oracle)?;
        println!("mean |h - h*| over the state space {err:.4}");
    }
    Ok(())
}

fn run_experiment(a: &ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&a.config)?;
    for o in &a.overrides {
        let (k, v) = o.split_once('=').with_context(|| format!("--set expects key=value, got `{o}`"))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    cfg.jobs = experiment::resolve_jobs(a.jobs);
    let report = experiment::run_experiment(&cfg, &a.out)?;
    print!("{}", report.to_table(&[format!("results in {}", a.out.display())]));
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::TaskInfo { task } => task_info(&task),
        Command::Statespace {
            task,
            max_states,
            histogram,
        } => statespace(&task, max_states, histogram),
        Command::Sample(a) => sample(&a),
        Command::Refine(a) => run_refine(&a),
        Command::Train(a) => train(&a),
        Command::Search(a) => search(&a),
        Command::Eval(a) => eval(&a),
        Command::Experiment(a) => run_experiment(&a),
        Command::Report { out, common_solved } => {
            experiment::write_report(&out, common_solved)?;
            print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
            Ok(())
        }
    }
}
