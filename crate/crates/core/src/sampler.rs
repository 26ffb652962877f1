//! Sample generation by regression from the goal.
//!
//! Four traversals are supported: random-walk rollouts (RW), a single
//! breadth-first or depth-first traversal (BFS, DFS), and FSM, which spends
//! a fraction of the budget on a layered BFS near the goal and fills the rest
//! with random walks seeded from the unexpanded BFS frontier.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::sas::{PartialState, Task};
use crate::seeds;
use crate::transition::{backward_applicable, regress_unchecked, satisfies_goal, violates_mutex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Rw,
    Bfs,
    Dfs,
    Fsm,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Rw => "rw",
            Algorithm::Bfs => "bfs",
            Algorithm::Dfs => "dfs",
            Algorithm::Fsm => "fsm",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "rw" => Ok(Algorithm::Rw),
            "bfs" => Ok(Algorithm::Bfs),
            "dfs" => Ok(Algorithm::Dfs),
            "fsm" => Ok(Algorithm::Fsm),
            other => Err(Error::Config(format!("unknown sampling algorithm `{other}`"))),
        }
    }
}

/// How a sample entered the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    BfsPhase,
    Rw,
    Dfs,
    Bfs,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Fixed(u32),
    Facts,
    FactsPerMeanEffect,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitKind::Fixed(l) => write!(f, "fixed:{l}"),
            LimitKind::Facts => f.write_str("facts"),
            LimitKind::FactsPerMeanEffect => f.write_str("facts-per-effect"),
        }
    }
}

impl FromStr for LimitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "facts" => Ok(LimitKind::Facts),
            "facts-per-effect" => Ok(LimitKind::FactsPerMeanEffect),
            other => other
                .strip_prefix("fixed:")
                .and_then(|l| l.parse().ok())
                .map(LimitKind::Fixed)
                .ok_or_else(|| Error::Config(format!("bad regression limit `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegressionLimit {
    pub kind: LimitKind,
    pub resolved: u32,
}

pub fn resolve_limit(task: &Task, kind: LimitKind) -> Result<RegressionLimit, Error> {
    let resolved = match kind {
        LimitKind::Fixed(l) => l,
        LimitKind::Facts => task.num_facts() as u32,
        LimitKind::FactsPerMeanEffect => {
            let mean = task.mean_effect_size()?;
            // ceil(F / ē) computed exactly as ceil(F·|O| / Σ|eff|)
            let total_eff: usize = task.operators.iter().map(|o| o.eff_facts().len()).sum();
            let num = task.num_facts() * task.operators.len();
            debug_assert!((num as f64 / total_eff as f64 - task.num_facts() as f64 / mean).abs() < 1e-9);
            num.div_ceil(total_eff) as u32
        }
    };
    if resolved == 0 {
        return Err(Error::Config("regression limit must be at least 1".into()));
    }
    Ok(RegressionLimit { kind, resolved })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sample {
    pub state: PartialState,
    pub h: u32,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleMeta {
    pub task: String,
    pub algorithm: Algorithm,
    pub num_samples: usize,
    pub limit: RegressionLimit,
    pub p_fsm: f64,
    pub seed: u64,
    pub use_mutex: bool,
    pub goal_reset: bool,
    /// Set when the regression space ran out before `num_samples`.
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub meta: SampleMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    pub num_samples: usize,
    pub limit: LimitKind,
    pub p_fsm: f64,
    pub use_mutex: bool,
    pub goal_reset: bool,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            algorithm: Algorithm::Fsm,
            num_samples: 1000,
            limit: LimitKind::FactsPerMeanEffect,
            p_fsm: 0.10,
            use_mutex: true,
            goal_reset: true,
            seed: 1,
        }
    }
}

/// Runs the configured sampler.
pub fn generate(task: &Task, config: &SamplerConfig) -> Result<SampleSet, Error> {
    if config.num_samples == 0 {
        return Err(Error::Config("number of samples must be at least 1".into()));
    }
    let limit = resolve_limit(task, config.limit)?;
    let regressor = Regressor {
        task,
        use_mutex: config.use_mutex,
        goal_reset: config.goal_reset,
    };
    if !task.operators.iter().any(|o| backward_applicable(&task.goal, o)) {
        return Err(Error::GoalHasNoPredecessors);
    }
    let mut rng = seeds::rng(config.seed);
    let n = config.num_samples;
    let lim = limit.resolved;
    let (samples, exhausted) = match config.algorithm {
        Algorithm::Rw => regressor.random_walks(n, lim, &mut rng),
        Algorithm::Bfs => regressor.breadth_first(n, lim, &mut rng),
        Algorithm::Dfs => regressor.depth_first(n, lim, &mut rng),
        Algorithm::Fsm => {
            if !(config.p_fsm > 0.0 && config.p_fsm < 1.0) {
                return Err(Error::Config(format!("p_fsm must lie in (0, 1), got {}", config.p_fsm)));
            }
            let budget = (config.p_fsm * n as f64).floor() as usize;
            if budget == 0 {
                return Err(Error::Config("p_fsm · N must be at least 1".into()));
            }
            regressor.fsm(n, budget, lim, &mut rng)?
        }
    };
    if exhausted {
        log::warn!(
            "{} sampling exhausted the regression space after {} of {} samples",
            config.algorithm,
            samples.len(),
            n
        );
    }
    Ok(SampleSet {
        samples,
        meta: SampleMeta {
            task: task.name.clone(),
            algorithm: config.algorithm,
            num_samples: n,
            limit,
            p_fsm: config.p_fsm,
            seed: config.seed,
            use_mutex: config.use_mutex,
            goal_reset: config.goal_reset,
            exhausted,
        },
    })
}

fn config(algorithm: Algorithm, n: usize, limit: RegressionLimit, use_mutex: bool, seed: u64) -> SamplerConfig {
    SamplerConfig {
        algorithm,
        num_samples: n,
        limit: LimitKind::Fixed(limit.resolved),
        use_mutex,
        seed,
        ..SamplerConfig::default()
    }
}

pub fn sample_rw(task: &Task, n: usize, limit: RegressionLimit, use_mutex: bool, seed: u64) -> Result<SampleSet, Error> {
    let mut set = generate(task, &config(Algorithm::Rw, n, limit, use_mutex, seed))?;
    set.meta.limit = limit;
    Ok(set)
}

pub fn sample_bfs_dfs(
    task: &Task,
    n: usize,
    limit: RegressionLimit,
    mode: Algorithm,
    use_mutex: bool,
    seed: u64,
) -> Result<SampleSet, Error> {
    if !matches!(mode, Algorithm::Bfs | Algorithm::Dfs) {
        return Err(Error::Config(format!("{mode} is not a BFS/DFS mode")));
    }
    let mut set = generate(task, &config(mode, n, limit, use_mutex, seed))?;
    set.meta.limit = limit;
    Ok(set)
}

pub fn sample_fsm(
    task: &Task,
    n: usize,
    limit: RegressionLimit,
    p_fsm: f64,
    use_mutex: bool,
    seed: u64,
) -> Result<SampleSet, Error> {
    if n < 2 {
        return Err(Error::Config("FSM needs at least 2 samples".into()));
    }
    let mut cfg = config(Algorithm::Fsm, n, limit, use_mutex, seed);
    cfg.p_fsm = p_fsm;
    let mut set = generate(task, &cfg)?;
    set.meta.limit = limit;
    Ok(set)
}

#[derive(Clone)]
struct Node {
    state: PartialState,
    h: u32,
    depth: u32,
}

struct Regressor<'a> {
    task: &'a Task,
    use_mutex: bool,
    goal_reset: bool,
}

impl Regressor<'_> {
    /// Valid predecessors of `s` in operator order, with their estimates.
    fn predecessors(&self, s: &PartialState, h: u32) -> Vec<(PartialState, u32)> {
        self.task
            .operators
            .iter()
            .filter(|o| backward_applicable(s, o))
            .filter_map(|o| {
                let prev = regress_unchecked(s, o);
                if self.use_mutex && violates_mutex(&prev, &self.task.mutexes) {
                    return None;
                }
                let ph = if self.goal_reset && satisfies_goal(&prev, &self.task.goal) {
                    0
                } else {
                    h + o.cost
                };
                Some((prev, ph))
            })
            .collect()
    }

    fn goal_node(&self) -> Node {
        Node {
            state: self.task.goal.clone(),
            h: 0,
            depth: 0,
        }
    }

    /// One rollout from `start`; `blocked` states are never entered.
    fn rollout<R: Rng>(
        &self,
        start: &Node,
        limit: u32,
        n: usize,
        blocked: Option<&HashSet<PartialState>>,
        samples: &mut Vec<Sample>,
        rng: &mut R,
    ) {
        let mut path = HashSet::from([start.state.clone()]);
        let mut current = start.clone();
        while current.depth < limit && samples.len() < n {
            let candidates: Vec<_> = self
                .predecessors(&current.state, current.h)
                .into_iter()
                .filter(|(p, _)| !path.contains(p) && blocked.is_none_or(|b| !b.contains(p)))
                .collect();
            let Some((state, h)) = candidates.choose(rng).cloned() else {
                break;
            };
            path.insert(state.clone());
            samples.push(Sample {
                state: state.clone(),
                h,
                origin: Origin::Rw,
            });
            current = Node {
                state,
                h,
                depth: current.depth + 1,
            };
        }
    }

    fn random_walks<R: Rng>(&self, n: usize, limit: u32, rng: &mut R) -> (Vec<Sample>, bool) {
        let goal = self.goal_node();
        let mut samples = vec![Sample {
            state: goal.state.clone(),
            h: 0,
            origin: Origin::Rw,
        }];
        if self.predecessors(&goal.state, 0).is_empty() {
            return (samples, n > 1);
        }
        while samples.len() < n {
            self.rollout(&goal, limit, n, None, &mut samples, rng);
        }
        (samples, false)
    }

    fn breadth_first<R: Rng>(&self, n: usize, limit: u32, rng: &mut R) -> (Vec<Sample>, bool) {
        let goal = self.goal_node();
        let mut seen = HashSet::from([goal.state.clone()]);
        let mut queue = VecDeque::from([goal]);
        let mut samples = Vec::new();
        while let Some(node) = queue.pop_front() {
            samples.push(Sample {
                state: node.state.clone(),
                h: node.h,
                origin: Origin::Bfs,
            });
            if samples.len() == n {
                return (samples, false);
            }
            if node.depth >= limit {
                continue;
            }
            let mut preds = self.predecessors(&node.state, node.h);
            preds.shuffle(rng);
            for (state, h) in preds {
                if seen.insert(state.clone()) {
                    queue.push_back(Node {
                        state,
                        h,
                        depth: node.depth + 1,
                    });
                }
            }
        }
        (samples, true)
    }

    fn depth_first<R: Rng>(&self, n: usize, limit: u32, rng: &mut R) -> (Vec<Sample>, bool) {
        let mut closed = HashSet::new();
        let mut stack = vec![self.goal_node()];
        let mut samples = Vec::new();
        while let Some(node) = stack.pop() {
            if !closed.insert(node.state.clone()) {
                continue;
            }
            samples.push(Sample {
                state: node.state.clone(),
                h: node.h,
                origin: Origin::Dfs,
            });
            if samples.len() == n {
                return (samples, false);
            }
            if node.depth >= limit {
                continue;
            }
            let mut preds = self.predecessors(&node.state, node.h);
            preds.shuffle(rng);
            // reversed so the first shuffled predecessor is expanded first
            for (state, h) in preds.into_iter().rev() {
                if !closed.contains(&state) {
                    stack.push(Node {
                        state,
                        h,
                        depth: node.depth + 1,
                    });
                }
            }
        }
        (samples, true)
    }

    fn fsm<R: Rng>(&self, n: usize, budget: usize, limit: u32, rng: &mut R) -> Result<(Vec<Sample>, bool), Error> {
        // Phase 1: layered BFS; an expansion's children are sampled all together
        // or not at all, so the phase never exceeds `budget`.
        let goal = self.goal_node();
        let mut sampled = HashSet::from([goal.state.clone()]);
        let mut samples = vec![Sample {
            state: goal.state.clone(),
            h: 0,
            origin: Origin::BfsPhase,
        }];
        let mut queue = VecDeque::from([goal]);
        while samples.len() < budget {
            let Some(node) = queue.pop_front() else { break };
            if node.depth >= limit {
                continue;
            }
            let mut children: Vec<(PartialState, u32)> = Vec::new();
            let mut preds = self.predecessors(&node.state, node.h);
            preds.shuffle(rng);
            for (state, h) in preds {
                if !sampled.contains(&state) && !children.iter().any(|(c, _)| *c == state) {
                    children.push((state, h));
                }
            }
            if samples.len() + children.len() > budget {
                continue;
            }
            for (state, h) in children {
                sampled.insert(state.clone());
                samples.push(Sample {
                    state: state.clone(),
                    h,
                    origin: Origin::BfsPhase,
                });
                queue.push_back(Node {
                    state,
                    h,
                    depth: node.depth + 1,
                });
            }
        }
        // Sampled but never expanded; the depth limit excludes dead seeds.
        let frontier: Vec<Node> = queue.into_iter().filter(|q| q.depth < limit).collect();
        if frontier.is_empty() {
            if samples.len() <= 1 {
                return Err(Error::GoalHasNoPredecessors);
            }
            return Ok((samples, true));
        }

        // Phase 2: random walks from frontier seeds, drawn without replacement
        // per epoch; BFS-phase states are never re-entered.
        let mut order: Vec<usize> = Vec::with_capacity(frontier.len());
        while samples.len() < n {
            order.clear();
            order.extend(0..frontier.len());
            order.shuffle(rng);
            let before = samples.len();
            for &i in &order {
                if samples.len() >= n {
                    break;
                }
                self.rollout(&frontier[i], limit, n, Some(&sampled), &mut samples, rng);
            }
            if samples.len() == before {
                return Ok((samples, true));
            }
        }
        Ok((samples, false))
    }
}

impl SampleSet {
    /// Writes the partial-sample file: `#meta` header lines, then
    /// `<h>;<v1>,…,<vn>` per sample with `*` for undefined variables.
    pub fn write_partial<W: Write>(&self, mut out: W) -> Result<(), Error> {
        let m = &self.meta;
        writeln!(out, "#meta task={}", m.task)?;
        writeln!(out, "#meta algorithm={}", m.algorithm)?;
        writeln!(out, "#meta num_samples={}", m.num_samples)?;
        writeln!(out, "#meta limit={}", m.limit.kind)?;
        writeln!(out, "#meta limit_resolved={}", m.limit.resolved)?;
        writeln!(out, "#meta p_fsm={}", m.p_fsm)?;
        writeln!(out, "#meta seed={}", m.seed)?;
        writeln!(out, "#meta mutex={}", m.use_mutex)?;
        writeln!(out, "#meta goal_reset={}", m.goal_reset)?;
        writeln!(out, "#meta exhausted={}", m.exhausted)?;
        for s in &self.samples {
            writeln!(out, "{};{}", s.h, s.state)?;
        }
        Ok(())
    }

    pub fn read_partial<R: BufRead>(input: R) -> Result<SampleSet, Error> {
        let mut meta = SampleMeta {
            task: String::new(),
            algorithm: Algorithm::Rw,
            num_samples: 0,
            limit: RegressionLimit {
                kind: LimitKind::Fixed(1),
                resolved: 1,
            },
            p_fsm: 0.1,
            seed: 0,
            use_mutex: true,
            goal_reset: true,
            exhausted: false,
        };
        let mut samples = Vec::new();
        let bad = |what: &str| Error::Format(format!("bad sample file: {what}"));
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(kv) = line.strip_prefix("#meta ") {
                let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
                match k {
                    "task" => meta.task = v.to_string(),
                    "algorithm" => meta.algorithm = v.parse()?,
                    "num_samples" => meta.num_samples = v.parse().map_err(|_| bad(kv))?,
                    "limit" => meta.limit.kind = v.parse()?,
                    "limit_resolved" => meta.limit.resolved = v.parse().map_err(|_| bad(kv))?,
                    "p_fsm" => meta.p_fsm = v.parse().map_err(|_| bad(kv))?,
                    "seed" => meta.seed = v.parse().map_err(|_| bad(kv))?,
                    "mutex" => meta.use_mutex = v.parse().map_err(|_| bad(kv))?,
                    "goal_reset" => meta.goal_reset = v.parse().map_err(|_| bad(kv))?,
                    "exhausted" => meta.exhausted = v.parse().map_err(|_| bad(kv))?,
                    _ => {}
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (h, state) = line.split_once(';').ok_or_else(|| bad(line))?;
            samples.push(Sample {
                h: h.trim().parse().map_err(|_| bad(line))?,
                state: PartialState::parse(state)?,
                origin: match meta.algorithm {
                    Algorithm::Bfs => Origin::Bfs,
                    Algorithm::Dfs => Origin::Dfs,
                    Algorithm::Rw | Algorithm::Fsm => Origin::Rw,
                },
            });
        }
        Ok(SampleSet { samples, meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::goal_distance;
    use crate::sas::{parse_sas, MutexGroup, Operator, VariableDef, UNDEFINED};
    use crate::testing::{all_partial_states, TOY3};

    const U: u32 = UNDEFINED;

    fn st(v: &[u32]) -> PartialState {
        PartialState::from_values(v.to_vec())
    }

    fn toy() -> Task {
        parse_sas(TOY3).unwrap()
    }

    fn fixed(l: u32) -> RegressionLimit {
        RegressionLimit {
            kind: LimitKind::Fixed(l),
            resolved: l,
        }
    }

    /// x0 -> x1 -> x2 -> x3 (goal x3); a chain of length 3.
    fn chain() -> Task {
        let vars = vec![VariableDef {
            index: 0,
            name: "x".into(),
            fact_names: (0..4).map(|i| format!("x{i}")).collect(),
        }];
        let ops = (0..3)
            .map(|i| Operator::new(format!("step{i}"), st(&[i]), st(&[i + 1]), 1))
            .collect();
        Task::new("chain", vars, ops, vec![], st(&[0]), st(&[3]), 1).unwrap()
    }

    #[test]
    fn limits_resolve() {
        let t = toy();
        assert_eq!(resolve_limit(&t, LimitKind::FactsPerMeanEffect).unwrap().resolved, 4);
        assert_eq!(resolve_limit(&t, LimitKind::Facts).unwrap().resolved, 4);
        assert_eq!(resolve_limit(&t, LimitKind::Fixed(9)).unwrap().resolved, 9);
        assert_eq!("fixed:200".parse::<LimitKind>().unwrap(), LimitKind::Fixed(200));
        assert!("fixed:x".parse::<LimitKind>().is_err());
    }

    #[test]
    fn rw_on_toy3() {
        let set = sample_rw(&toy(), 4, fixed(4), true, 3).unwrap();
        assert_eq!(set.samples.len(), 4);
        for s in &set.samples {
            if satisfies_goal(&s.state, &toy().goal) {
                assert_eq!(s.h, 0);
            }
            if s.state.raw(0) == 0 {
                assert!(s.h >= 1);
            }
        }
    }

    #[test]
    fn rw_estimates_bound_every_completion() {
        let task = toy();
        let set = sample_rw(&task, 1000, fixed(4), true, 11).unwrap();
        for s in &set.samples {
            for c in all_partial_states(&[2, 2]).filter(|c| c.is_complete() && s.state.is_subset_of(c)) {
                let d = goal_distance(&task, &c, 100).unwrap().unwrap();
                assert!(d <= s.h, "{} h={} completion {c} d={d}", s.state, s.h);
            }
        }
    }

    #[test]
    fn depth_limit_bounds_estimates() {
        let task = chain();
        for alg in [Algorithm::Rw, Algorithm::Bfs, Algorithm::Dfs] {
            let cfg = SamplerConfig {
                algorithm: alg,
                num_samples: 50,
                limit: LimitKind::Fixed(2),
                ..SamplerConfig::default()
            };
            let set = generate(&task, &cfg).unwrap();
            assert!(set.samples.iter().all(|s| s.h <= 2), "{alg}");
        }
    }

    #[test]
    fn bfs_starts_at_goal_and_is_exact_on_partial_states() {
        let task = toy();
        let set = sample_bfs_dfs(&task, 3, fixed(4), Algorithm::Bfs, true, 1).unwrap();
        assert_eq!(set.samples[0].state, st(&[1, U]));
        assert_eq!(set.samples[0].h, 0);
        // toy3's backward space: {A=a1} -> {A=a0}; exhausted before 3.
        assert_eq!(set.samples.len(), 2);
        assert!(set.meta.exhausted);
        assert_eq!(set.samples[1], Sample { state: st(&[0, U]), h: 1, origin: Origin::Bfs });
    }

    #[test]
    fn dfs_respects_limit() {
        let set = sample_bfs_dfs(&chain(), 3, fixed(1), Algorithm::Dfs, true, 1).unwrap();
        assert!(set.samples.iter().all(|s| s.h <= 1));
    }

    #[test]
    fn fsm_phase_one_on_toy3() {
        // Two-layer backward graph; budget floor(0.5·4) = 2 holds both layers.
        let set = sample_fsm(&toy(), 4, fixed(4), 0.5, true, 5).unwrap();
        let phase1: Vec<_> = set.samples.iter().filter(|s| s.origin == Origin::BfsPhase).collect();
        assert_eq!(phase1.len(), 2);
        assert_eq!((phase1[0].state.clone(), phase1[0].h), (st(&[1, U]), 0));
        assert_eq!((phase1[1].state.clone(), phase1[1].h), (st(&[0, U]), 1));
        // {A=a0} has no predecessors: nothing left for phase 2.
        assert!(set.meta.exhausted);
    }

    #[test]
    fn fsm_budget_split() {
        let task = Task::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/../../tasks/blocks-5.sas")).unwrap();
        let set = sample_fsm(&task, 1000, resolve_limit(&task, LimitKind::FactsPerMeanEffect).unwrap(), 0.10, true, 2)
            .unwrap();
        let bfs = set.samples.iter().filter(|s| s.origin == Origin::BfsPhase).count();
        assert!(bfs <= 100, "{bfs}");
        assert_eq!(set.samples.len(), 1000);
        let bfs_states: HashSet<_> = set
            .samples
            .iter()
            .filter(|s| s.origin == Origin::BfsPhase)
            .map(|s| &s.state)
            .collect();
        assert!(set
            .samples
            .iter()
            .filter(|s| s.origin == Origin::Rw)
            .all(|s| !bfs_states.contains(&s.state)));
    }

    #[test]
    fn mutex_pruning_and_determinism() {
        let task = Task::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/../../tasks/blocks-4.sas")).unwrap();
        for alg in [Algorithm::Rw, Algorithm::Bfs, Algorithm::Dfs, Algorithm::Fsm] {
            let cfg = SamplerConfig {
                algorithm: alg,
                num_samples: 300,
                seed: 9,
                ..SamplerConfig::default()
            };
            let a = generate(&task, &cfg).unwrap();
            let b = generate(&task, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.samples.iter().all(|s| !violates_mutex(&s.state, &task.mutexes)));
        }
    }

    #[test]
    fn goal_without_predecessors_is_an_error() {
        let vars = vec![VariableDef {
            index: 0,
            name: "x".into(),
            fact_names: vec!["x0".into(), "x1".into(), "x2".into()],
        }];
        let ops = vec![Operator::new("a", st(&[0]), st(&[1]), 1)];
        let task = Task::new("nopred", vars, ops, vec![], st(&[0]), st(&[2]), 1).unwrap();
        let err = sample_rw(&task, 10, fixed(3), true, 1).unwrap_err();
        assert!(matches!(err, Error::GoalHasNoPredecessors));
    }

    #[test]
    fn mutex_excluded_predecessors() {
        // Regressing {A=a1} via op2' would need B=b1 together with A=a1.
        let mut task = toy();
        task.mutexes.push(MutexGroup {
            facts: vec![(0, 1), (1, 1)],
        });
        let set = sample_rw(&task, 50, fixed(4), true, 1).unwrap();
        assert!(set.samples.iter().all(|s| !violates_mutex(&s.state, &task.mutexes)));
    }

    #[test]
    fn partial_file_round_trip() {
        let set = sample_rw(&toy(), 6, fixed(4), true, 1).unwrap();
        let mut buf = Vec::new();
        set.write_partial(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("#meta algorithm=rw"));
        assert!(text.lines().any(|l| l == "0;1,*"));
        let back = SampleSet::read_partial(&buf[..]).unwrap();
        assert_eq!(back.meta, set.meta);
        assert_eq!(back.samples, set.samples);
    }
}
