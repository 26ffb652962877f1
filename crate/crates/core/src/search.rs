//! Greedy best-first search with FIFO tie-breaking.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::Error;
use crate::learner::Model;
use crate::oracle::StateSpace;
use crate::sas::{PartialState, Task};
use crate::transition::{applicable, apply_unchecked, satisfies_goal};

/// Number of goal variables whose value differs in `s`.
pub fn goal_count(task: &Task, s: &PartialState) -> u32 {
    task.goal.facts().filter(|&(v, d)| s.raw(v) != d).count() as u32
}

#[derive(Clone, Copy)]
pub enum Heuristic<'a> {
    Learned(&'a Model),
    GoalCount,
    Perfect(&'a StateSpace),
    Blind,
}

impl Heuristic<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Heuristic::Learned(_) => "learned",
            Heuristic::GoalCount => "goalcount",
            Heuristic::Perfect(_) => "perfect",
            Heuristic::Blind => "blind",
        }
    }

    /// Values for a batch of complete states; dead ends are `f64::INFINITY`.
    pub fn evaluate(&self, task: &Task, states: &[PartialState]) -> Result<Vec<f64>, Error> {
        match self {
            Heuristic::Learned(model) => Ok(model.predict_states(task, states)?.to_vec()),
            Heuristic::GoalCount => Ok(states.iter().map(|s| goal_count(task, s) as f64).collect()),
            Heuristic::Perfect(space) => states
                .iter()
                .map(|s| Ok(space.perfect_h(s)?.map_or(f64::INFINITY, |h| h as f64)))
                .collect(),
            Heuristic::Blind => Ok(vec![0.0; states.len()]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchLimits {
    pub max_seconds: Option<f64>,
    pub max_memory_mb: Option<usize>,
    pub max_expansions: Option<u64>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_seconds: Some(300.0),
            max_memory_mb: Some(2048),
            max_expansions: None,
        }
    }
}

impl SearchLimits {
    pub fn unlimited() -> Self {
        SearchLimits {
            max_seconds: None,
            max_memory_mb: None,
            max_expansions: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchStatus {
    Solved,
    Exhausted,
    /// Time or expansion budget reached.
    Timeout,
    Memory,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Solved => "SOLVED",
            SearchStatus::Exhausted => "EXHAUSTED",
            SearchStatus::Timeout => "TIMEOUT",
            SearchStatus::Memory => "MEMORY",
        })
    }
}

impl FromStr for SearchStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "SOLVED" => Ok(SearchStatus::Solved),
            "EXHAUSTED" => Ok(SearchStatus::Exhausted),
            "TIMEOUT" => Ok(SearchStatus::Timeout),
            "MEMORY" => Ok(SearchStatus::Memory),
            other => Err(Error::Format(format!("unknown search status `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub status: SearchStatus,
    /// Operator indices.
    pub plan: Vec<usize>,
    pub plan_cost: Option<u64>,
    pub expanded: u64,
    pub generated: u64,
    pub seconds: f64,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }

    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &SearchResult) -> bool {
        self.status == other.status
            && self.plan == other.plan
            && self.plan_cost == other.plan_cost
            && self.expanded == other.expanded
            && self.generated == other.generated
    }
}

struct OpenEntry {
    h: f64,
    order: u64,
    node: u32,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .h
            .total_cmp(&self.h)
            .then_with(|| other.order.cmp(&self.order))
    }
}

const NO_PARENT: u32 = u32::MAX;

/// GBFS ordered by `(h, generation order)`. Duplicates are detected at
/// generation and never reopened; the goal test happens at expansion.
pub fn gbfs(task: &Task, start: &PartialState, heuristic: Heuristic<'_>, limits: SearchLimits) -> Result<SearchResult, Error> {
    if !start.is_complete() || start.len() != task.num_vars() {
        return Err(Error::Contract("search start must be a complete state of the task".into()));
    }
    let started = Instant::now();
    let node_bytes = 4 * task.num_vars() + 64;
    // node -> (parent, operator); states are kept in `states`
    let mut parents: Vec<(u32, u32)> = vec![(NO_PARENT, NO_PARENT)];
    let mut states: Vec<PartialState> = vec![start.clone()];
    let mut seen: HashMap<PartialState, u32> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut open = BinaryHeap::new();
    let mut expanded = 0u64;
    let mut generated = 1u64;
    let mut order = 0u64;

    let h0 = heuristic.evaluate(task, std::slice::from_ref(start))?[0];
    if h0.is_finite() {
        open.push(OpenEntry { h: h0, order, node: 0 });
    }

    let finish = |status, plan: Vec<usize>, expanded, generated| {
        let plan_cost = (status == SearchStatus::Solved)
            .then(|| plan.iter().map(|&o| task.operators[o].cost as u64).sum());
        SearchResult {
            status,
            plan,
            plan_cost,
            expanded,
            generated,
            seconds: started.elapsed().as_secs_f64(),
        }
    };

    let mut batch: Vec<PartialState> = Vec::new();
    let mut batch_meta: Vec<u32> = Vec::new();
    while let Some(entry) = open.pop() {
        if limits.max_expansions.is_some_and(|m| expanded >= m) {
            return Ok(finish(SearchStatus::Timeout, vec![], expanded, generated));
        }
        if expanded.is_multiple_of(64) {
            if limits
                .max_seconds
                .is_some_and(|s| started.elapsed().as_secs_f64() >= s)
            {
                return Ok(finish(SearchStatus::Timeout, vec![], expanded, generated));
            }
            if limits
                .max_memory_mb
                .is_some_and(|mb| states.len() * node_bytes * 2 > mb * 1024 * 1024)
            {
                return Ok(finish(SearchStatus::Memory, vec![], expanded, generated));
            }
        }
        expanded += 1;
        let node = entry.node as usize;
        if satisfies_goal(&states[node], &task.goal) {
            let mut plan = Vec::new();
            let mut cur = node;
            while parents[cur].0 != NO_PARENT {
                plan.push(parents[cur].1 as usize);
                cur = parents[cur].0 as usize;
            }
            plan.reverse();
            return Ok(finish(SearchStatus::Solved, plan, expanded, generated));
        }

        batch.clear();
        batch_meta.clear();
        for (oi, op) in task.operators.iter().enumerate() {
            if !applicable(&states[node], op) {
                continue;
            }
            let succ = apply_unchecked(&states[node], op);
            if let Entry::Vacant(slot) = seen.entry(succ) {
                let id = states.len() as u32;
                states.push(slot.key().clone());
                slot.insert(id);
                parents.push((node as u32, oi as u32));
                generated += 1;
                batch_meta.push(id);
            }
        }
        if batch_meta.is_empty() {
            continue;
        }
        batch.extend(batch_meta.iter().map(|&id| states[id as usize].clone()));
        let values = heuristic.evaluate(task, &batch)?;
        for (&id, h) in batch_meta.iter().zip(values) {
            if h.is_finite() {
                order += 1;
                open.push(OpenEntry { h, order, node: id });
            }
        }
    }
    Ok(finish(SearchStatus::Exhausted, vec![], expanded, generated))
}

/// `true` iff every operator applies in sequence and the final state
/// satisfies the goal.
pub fn validate_plan(task: &Task, start: &PartialState, plan: &[usize]) -> bool {
    let mut s = start.clone();
    for &oi in plan {
        match task.operators.get(oi) {
            Some(op) if applicable(&s, op) => s = apply_unchecked(&s, op),
            _ => return false,
        }
    }
    satisfies_goal(&s, &task.goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_forward;
    use crate::sas::parse_sas;
    use crate::testing::TOY3;

    fn st(v: &[u32]) -> PartialState {
        PartialState::from_values(v.to_vec())
    }

    fn bundled(name: &str) -> Task {
        Task::from_file(format!("{}/../../tasks/{name}.sas", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    #[test]
    fn goal_count_examples() {
        let mut task = parse_sas(TOY3).unwrap();
        assert_eq!(goal_count(&task, &st(&[0, 0])), 1);
        assert_eq!(goal_count(&task, &st(&[1, 0])), 0);
        task.goal = st(&[1, 1]);
        assert_eq!(goal_count(&task, &st(&[0, 0])), 2);
    }

    #[test]
    fn blind_toy3() {
        let task = parse_sas(TOY3).unwrap();
        let r = gbfs(&task, &st(&[0, 0]), Heuristic::Blind, SearchLimits::unlimited()).unwrap();
        assert_eq!(r.status, SearchStatus::Solved);
        assert_eq!(r.plan, vec![0]);
        assert_eq!(r.plan_cost, Some(1));
        let r = gbfs(&task, &st(&[1, 1]), Heuristic::GoalCount, SearchLimits::unlimited()).unwrap();
        assert_eq!((r.plan.len(), r.expanded, r.generated), (0, 1, 1));
        assert!(gbfs(&task, &st(&[1, u32::MAX]), Heuristic::Blind, SearchLimits::unlimited()).is_err());
    }

    #[test]
    fn validate_plan_examples() {
        let task = parse_sas(TOY3).unwrap();
        assert!(validate_plan(&task, &st(&[0, 0]), &[0]));
        assert!(!validate_plan(&task, &st(&[0, 0]), &[]));
        assert!(!validate_plan(&task, &st(&[1, 0]), &[0]));
        assert!(!validate_plan(&task, &st(&[0, 0]), &[99]));
    }

    #[test]
    fn blind_and_perfect_are_optimal_on_micro_tasks() {
        for name in ["blocks-4", "puzzle-2x3", "visitall-3x3"] {
            let task = bundled(name);
            let space = enumerate_forward(&task, 100_000).unwrap();
            for id in 0..space.len() {
                let start = space.state(id);
                let hstar = space.hstar_by_id(id);
                for h in [Heuristic::Blind, Heuristic::Perfect(&space)] {
                    let r = gbfs(&task, start, h, SearchLimits::unlimited()).unwrap();
                    match hstar {
                        Some(d) => {
                            assert!(r.solved());
                            assert!(validate_plan(&task, start, &r.plan));
                            assert_eq!(r.plan_cost, Some(d as u64), "{name} {} {start}", h.name());
                        }
                        None => assert_eq!(r.status, SearchStatus::Exhausted),
                    }
                    assert!(r.expanded <= r.generated && r.generated as usize <= space.len());
                }
            }
        }
    }

    #[test]
    fn limits_and_exhaustion() {
        let task = bundled("blocks-5");
        let start = task.initial.clone();
        let limited = SearchLimits {
            max_expansions: Some(3),
            ..SearchLimits::unlimited()
        };
        let r = gbfs(&task, &start, Heuristic::Blind, limited).unwrap();
        assert_eq!((r.status, r.expanded), (SearchStatus::Timeout, 3));

        let mut unreachable = task.clone();
        unreachable.operators.clear();
        let r = gbfs(&unreachable, &start, Heuristic::Blind, SearchLimits::unlimited()).unwrap();
        assert_eq!((r.status, r.expanded, r.generated), (SearchStatus::Exhausted, 1, 1));
    }

    #[test]
    fn deterministic() {
        let task = bundled("puzzle-2x3");
        let a = gbfs(&task, &task.initial, Heuristic::GoalCount, SearchLimits::default()).unwrap();
        let b = gbfs(&task, &task.initial, Heuristic::GoalCount, SearchLimits::default()).unwrap();
        assert!(a.same_outcome(&b));
        assert!(validate_plan(&task, &task.initial, &a.plan));
    }
}
