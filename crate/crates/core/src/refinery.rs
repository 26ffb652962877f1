//! Training-set workflow: estimate improvement on partial states (SAI, SUI),
//! completion, random-sample augmentation and SAI on complete states.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::oracle::StateSpace;
use crate::par;
use crate::sampler::{self, resolve_limit, Origin, Sample, SampleSet, SamplerConfig};
use crate::sas::{FactVector, PartialState, Task};
use crate::seeds;
use crate::transition::{applicable, apply_unchecked};
use crate::trie::FactTrie;

/// Attempts per partial state before mutex completion gives up.
pub const MUTEX_COMPLETION_RETRIES: usize = 10_000;

/// Sample improvement: every sample takes the minimum estimate among the
/// samples with an identical state.
pub fn sai(samples: &[Sample]) -> Vec<Sample> {
    sai_where(samples, |_| true)
}

/// SAI restricted to samples accepted by `include`; others pass through.
pub fn sai_where(samples: &[Sample], include: impl Fn(&Sample) -> bool) -> Vec<Sample> {
    let mut best: HashMap<&PartialState, u32> = HashMap::new();
    for s in samples.iter().filter(|s| include(s)) {
        best.entry(&s.state)
            .and_modify(|h| *h = (*h).min(s.h))
            .or_insert(s.h);
    }
    samples
        .iter()
        .map(|s| {
            let mut out = s.clone();
            if include(s) {
                out.h = best[&s.state];
            }
            out
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Arc {
    pub source: usize,
    pub target: usize,
    pub weight: u32,
}

/// Weighted arcs between sampled partial states: `(s, t, w)` whenever some
/// operator applicable in `s` leads to a state whose completions all lie in
/// `S(t)`, with `w` its cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessorGraph {
    pub num_vertices: usize,
    pub arcs: Vec<Arc>,
}

impl SuccessorGraph {
    /// Builds the graph by querying a trie with every successor.
    pub fn build(states: &[PartialState], task: &Task) -> Self {
        let trie = FactTrie::from_states(task.num_vars(), states);
        let per_source: Vec<Vec<Arc>> = par::map_range(states.len(), |i| {
            let mut out = Vec::new();
            for op in &task.operators {
                if !applicable(&states[i], op) {
                    continue;
                }
                let succ = apply_unchecked(&states[i], op);
                for j in trie.covering(&succ) {
                    if j != i {
                        out.push(Arc {
                            source: i,
                            target: j,
                            weight: op.cost,
                        });
                    }
                }
            }
            out
        });
        Self::from_arcs(states.len(), per_source.into_iter().flatten().collect())
    }

    /// Collapses parallel arcs to their minimum weight, drops self-arcs and
    /// sorts by (source, target).
    pub fn from_arcs(num_vertices: usize, mut arcs: Vec<Arc>) -> Self {
        arcs.retain(|a| a.source != a.target);
        arcs.sort_unstable();
        arcs.dedup_by(|later, first| later.source == first.source && later.target == first.target);
        SuccessorGraph { num_vertices, arcs }
    }

    /// Relaxes `h(s) = min(h(s), h(t) + w)` over all arcs until a pass makes
    /// no change. Returns the number of passes.
    pub fn relax(&self, h: &mut [u32]) -> usize {
        let mut passes = 0;
        loop {
            passes += 1;
            let mut changed = false;
            for a in &self.arcs {
                let candidate = h[a.target].saturating_add(a.weight);
                if candidate < h[a.source] {
                    h[a.source] = candidate;
                    changed = true;
                }
            }
            if !changed {
                return passes;
            }
        }
    }

    /// `true` when no arc can lower its source estimate.
    pub fn is_fixpoint(&self, h: &[u32]) -> bool {
        self.arcs
            .iter()
            .all(|a| h[a.source] <= h[a.target].saturating_add(a.weight))
    }
}

/// Successor improvement over sampled partial states.
pub fn sui(samples: &[Sample], task: &Task) -> Vec<Sample> {
    let states: Vec<PartialState> = samples.iter().map(|s| s.state.clone()).collect();
    let graph = SuccessorGraph::build(&states, task);
    let mut h: Vec<u32> = samples.iter().map(|s| s.h).collect();
    graph.relax(&mut h);
    samples
        .iter()
        .zip(h)
        .map(|(s, h)| Sample { h, ..s.clone() })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletionStrategy {
    Random,
    Mutex,
    Fss,
}

impl fmt::Display for CompletionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompletionStrategy::Random => "random",
            CompletionStrategy::Mutex => "mutex",
            CompletionStrategy::Fss => "fss",
        })
    }
}

impl FromStr for CompletionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "random" => Ok(CompletionStrategy::Random),
            "mutex" => Ok(CompletionStrategy::Mutex),
            "fss" => Ok(CompletionStrategy::Fss),
            other => Err(Error::Config(format!("unknown completion strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completed {
    pub sample: Sample,
    /// Mutex completion failed every retry; the state was left partial.
    pub fallback: bool,
}

/// Completes partial states; holds the fact → mutex-group index.
pub struct Completer<'a> {
    task: &'a Task,
    oracle: Option<&'a StateSpace>,
    groups_of_fact: Vec<Vec<usize>>,
}

impl<'a> Completer<'a> {
    pub fn new(task: &'a Task, oracle: Option<&'a StateSpace>) -> Self {
        let mut groups_of_fact = vec![Vec::new(); task.num_facts()];
        for (g, group) in task.mutexes.iter().enumerate() {
            for &(var, val) in &group.facts {
                groups_of_fact[task.fact_index(var, val)].push(g);
            }
        }
        Completer {
            task,
            oracle,
            groups_of_fact,
        }
    }

    fn conflicts(&self, s: &PartialState, var: usize, val: u32) -> bool {
        self.groups_of_fact[self.task.fact_index(var, val)]
            .iter()
            .any(|&g| {
                self.task.mutexes[g]
                    .facts
                    .iter()
                    .any(|&(v, d)| v != var && s.raw(v) == d)
            })
    }

    fn try_mutex<R: Rng + ?Sized>(&self, partial: &PartialState, rng: &mut R) -> Option<PartialState> {
        let mut s = partial.clone();
        let mut order: Vec<usize> = (0..s.len()).filter(|&v| !s.is_defined(v)).collect();
        order.shuffle(rng);
        let mut candidates = Vec::new();
        for var in order {
            candidates.clear();
            candidates.extend(
                (0..self.task.domain_size(var) as u32).filter(|&val| !self.conflicts(&s, var, val)),
            );
            let &val = candidates.choose(rng)?;
            s.set(var, val);
        }
        Some(s)
    }

    pub fn complete<R: Rng + ?Sized>(
        &self,
        sample: &Sample,
        strategy: CompletionStrategy,
        rng: &mut R,
    ) -> Result<Completed, Error> {
        let done = |state: PartialState, fallback: bool| Completed {
            sample: Sample {
                state,
                h: sample.h,
                origin: sample.origin,
            },
            fallback,
        };
        if sample.state.is_complete() {
            return Ok(done(sample.state.clone(), false));
        }
        match strategy {
            CompletionStrategy::Random => {
                let mut s = sample.state.clone();
                for var in 0..s.len() {
                    if !s.is_defined(var) {
                        s.set(var, rng.gen_range(0..self.task.domain_size(var) as u32));
                    }
                }
                Ok(done(s, false))
            }
            CompletionStrategy::Mutex => {
                for _ in 0..MUTEX_COMPLETION_RETRIES {
                    if let Some(s) = self.try_mutex(&sample.state, rng) {
                        return Ok(done(s, false));
                    }
                }
                Ok(done(sample.state.clone(), true))
            }
            CompletionStrategy::Fss => {
                let oracle = self
                    .oracle
                    .ok_or_else(|| Error::Config("FSS completion needs an enumerated state space".into()))?;
                let s = oracle.random_fs_state(Some(&sample.state), rng)?;
                Ok(done(s, false))
            }
        }
    }
}

pub fn complete_state<R: Rng + ?Sized>(
    sample: &Sample,
    strategy: CompletionStrategy,
    task: &Task,
    oracle: Option<&StateSpace>,
    rng: &mut R,
) -> Result<Completed, Error> {
    Completer::new(task, oracle).complete(sample, strategy, rng)
}

/// `round(ρ·N)` with halves rounded up.
pub fn random_sample_count(total: usize, fraction: f64) -> usize {
    (fraction * total as f64 + 0.5).floor() as usize
}

/// Appends `round(ρ·N)` random samples to a set of complete samples whose
/// final size is `total`. Each random state comes from mutex completion of
/// the fully undefined state; it reuses the estimate of an identical existing
/// sample, otherwise gets `1 + max h` (or `limit + 1` for an empty input).
pub fn add_random_samples<R: Rng + ?Sized>(
    samples: &[Sample],
    total: usize,
    fraction: f64,
    limit: u32,
    task: &Task,
    rng: &mut R,
) -> Result<Vec<Sample>, Error> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config(format!("random fraction must lie in [0, 1], got {fraction}")));
    }
    let count = random_sample_count(total, fraction);
    let mut out = samples.to_vec();
    if count == 0 {
        return Ok(out);
    }
    let fresh = samples
        .iter()
        .map(|s| s.h)
        .max()
        .map_or(limit.saturating_add(1), |m| m.saturating_add(1));
    let mut known: HashMap<&PartialState, u32> = HashMap::new();
    for s in samples {
        known.entry(&s.state).and_modify(|h| *h = (*h).min(s.h)).or_insert(s.h);
    }
    let completer = Completer::new(task, None);
    let blank = Sample {
        state: PartialState::undefined(task.num_vars()),
        h: fresh,
        origin: Origin::Random,
    };
    let mut added = Vec::with_capacity(count);
    for _ in 0..count {
        let mut c = completer.complete(&blank, CompletionStrategy::Mutex, rng)?.sample;
        if let Some(&h) = known.get(&c.state) {
            c.h = h;
        }
        added.push(c);
    }
    out.extend(added);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineConfig {
    pub sai: bool,
    pub sui: bool,
    pub completion: CompletionStrategy,
    pub random_fraction: f64,
    pub seed: u64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            sai: true,
            sui: true,
            completion: CompletionStrategy::Mutex,
            random_fraction: 0.0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSetConfig {
    pub sampler: SamplerConfig,
    pub refine: RefineConfig,
}

impl TrainingSetConfig {
    /// RW with limit 200, mutexes on, no goal reset, no improvements, no
    /// random samples.
    pub fn baseline(num_samples: usize, seed: u64) -> Self {
        TrainingSetConfig {
            sampler: SamplerConfig {
                algorithm: sampler::Algorithm::Rw,
                num_samples,
                limit: sampler::LimitKind::Fixed(200),
                p_fsm: 0.10,
                use_mutex: true,
                goal_reset: false,
                seed,
            },
            refine: RefineConfig {
                sai: false,
                sui: false,
                completion: CompletionStrategy::Mutex,
                random_fraction: 0.0,
                seed,
            },
        }
    }

    /// FSM with the facts-per-effect limit, SAI and SUI, 20% random samples.
    pub fn best(num_samples: usize, seed: u64) -> Self {
        TrainingSetConfig {
            sampler: SamplerConfig {
                num_samples,
                seed,
                ..SamplerConfig::default()
            },
            refine: RefineConfig {
                random_fraction: 0.2,
                seed,
                ..RefineConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineStats {
    pub mutex_fallbacks: usize,
    pub invalid_predecessors: usize,
    pub random_samples: usize,
}

/// Runs the post-sampling stages on partial samples. `total` is the intended
/// final size including random samples.
pub fn refine(
    task: &Task,
    partial: &SampleSet,
    total: usize,
    config: &RefineConfig,
    oracle: Option<&StateSpace>,
) -> Result<(SampleSet, RefineStats), Error> {
    let mut samples = partial.samples.clone();
    if config.sai {
        samples = sai(&samples);
    }
    if config.sui {
        samples = sui(&samples, task);
    }

    let completer = Completer::new(task, oracle);
    let mut rng = seeds::stream(config.seed, "complete");
    let mut stats = RefineStats::default();
    let mut complete = Vec::with_capacity(samples.len());
    for s in &samples {
        match completer.complete(s, config.completion, &mut rng) {
            Ok(c) => {
                stats.mutex_fallbacks += c.fallback as usize;
                complete.push(c.sample);
            }
            Err(Error::InvalidPredecessor) => stats.invalid_predecessors += 1,
            Err(e) => return Err(e),
        }
    }

    let mut rng = seeds::stream(config.seed, "random");
    let with_random = add_random_samples(
        &complete,
        total,
        config.random_fraction,
        partial.meta.limit.resolved,
        task,
        &mut rng,
    )?;
    stats.random_samples = with_random.len() - complete.len();

    let finished = if config.sai {
        sai_where(&with_random, |s| s.origin != Origin::Random)
    } else {
        with_random
    };
    Ok((
        SampleSet {
            samples: finished,
            meta: partial.meta.clone(),
        },
        stats,
    ))
}

/// Sample → SAI → SUI → complete → add random → SAI on complete states.
pub fn build_training_set(
    task: &Task,
    config: &TrainingSetConfig,
    oracle: Option<&StateSpace>,
) -> Result<(SampleSet, RefineStats), Error> {
    let total = config.sampler.num_samples;
    let random = random_sample_count(total, config.refine.random_fraction);
    let regression = total.saturating_sub(random);
    let partial = if regression > 0 {
        sampler::generate(
            task,
            &SamplerConfig {
                num_samples: regression,
                ..config.sampler.clone()
            },
        )?
    } else {
        SampleSet {
            samples: Vec::new(),
            meta: sampler::SampleMeta {
                task: task.name.clone(),
                algorithm: config.sampler.algorithm,
                num_samples: 0,
                limit: resolve_limit(task, config.sampler.limit)?,
                p_fsm: config.sampler.p_fsm,
                seed: config.sampler.seed,
                use_mutex: config.sampler.use_mutex,
                goal_reset: config.sampler.goal_reset,
                exhausted: false,
            },
        }
    };
    let (mut set, stats) = refine(task, &partial, total, &config.refine, oracle)?;
    set.meta.num_samples = total;
    Ok((set, stats))
}

/// Writes `#facts=<F>` and one `<h>;<bits>` line per sample.
pub fn write_training<W: Write>(set: &[Sample], task: &Task, mut out: W) -> Result<(), Error> {
    writeln!(out, "#facts={}", task.num_facts())?;
    for s in set {
        writeln!(out, "{};{}", s.h, task.encode_state(&s.state).to_bitstring())?;
    }
    Ok(())
}

/// A decoded training file: fact count and `(h, facts)` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingData {
    pub num_facts: usize,
    pub rows: Vec<(u32, FactVector)>,
}

impl TrainingData {
    pub fn from_samples(samples: &[Sample], task: &Task) -> Self {
        TrainingData {
            num_facts: task.num_facts(),
            rows: samples
                .iter()
                .map(|s| (s.h, task.encode_state(&s.state)))
                .collect(),
        }
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, Error> {
        let mut num_facts = None;
        let mut rows = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(f) = line.strip_prefix("#facts=") {
                num_facts = Some(
                    f.parse()
                        .map_err(|_| Error::Format(format!("bad fact count `{f}`")))?,
                );
                continue;
            }
            let (h, bits) = line
                .split_once(';')
                .ok_or_else(|| Error::Format(format!("bad training line `{line}`")))?;
            let h = h
                .parse()
                .map_err(|_| Error::Format(format!("bad estimate `{h}`")))?;
            let bits = FactVector::from_bitstring(bits)?;
            if let Some(f) = num_facts {
                if bits.len() != f {
                    return Err(Error::Format(format!("row has {} facts, header says {f}", bits.len())));
                }
            }
            rows.push((h, bits));
        }
        let num_facts = num_facts.ok_or_else(|| Error::Format("missing #facts header".into()))?;
        Ok(TrainingData { num_facts, rows })
    }
}
