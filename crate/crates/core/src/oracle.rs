//! Exhaustive forward state spaces with exact goal distances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use rand::Rng;

use crate::error::Error;
use crate::sas::{PartialState, Task};
use crate::transition::{applicable, apply_unchecked, satisfies_goal};

/// Ceiling on enumerated states unless the caller asks otherwise.
pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub target: usize,
    pub operator: usize,
    pub cost: u32,
}

/// All states reachable from the initial state, with `h*` for each.
#[derive(Clone, Debug)]
pub struct StateSpace {
    states: Vec<PartialState>,
    index: HashMap<PartialState, usize>,
    edges: Vec<Vec<Edge>>,
    hstar: Vec<Option<u32>>,
    is_goal: Vec<bool>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[PartialState] {
        &self.states
    }

    pub fn state(&self, id: usize) -> &PartialState {
        &self.states[id]
    }

    pub fn id_of(&self, s: &PartialState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &PartialState) -> bool {
        self.index.contains_key(s)
    }

    pub fn edges(&self, id: usize) -> &[Edge] {
        &self.edges[id]
    }

    /// `h*` by state id; `None` is a dead end.
    pub fn hstar_by_id(&self, id: usize) -> Option<u32> {
        self.hstar[id]
    }

    pub fn hstar_values(&self) -> &[Option<u32>] {
        &self.hstar
    }

    pub fn is_goal(&self, id: usize) -> bool {
        self.is_goal[id]
    }

    pub fn goal_count(&self) -> usize {
        self.is_goal.iter().filter(|&&g| g).count()
    }

    /// Exact optimal cost-to-goal of a state of this space; `Ok(None)` is ∞.
    pub fn perfect_h(&self, s: &PartialState) -> Result<Option<u32>, Error> {
        self.id_of(s).map(|id| self.hstar[id]).ok_or(Error::UnknownState)
    }

    /// Largest finite `h*`.
    pub fn dmax(&self) -> Result<u32, Error> {
        self.hstar
            .iter()
            .flatten()
            .copied()
            .max()
            .ok_or(Error::NoGoalReachable)
    }

    /// Arithmetic mean of the finite `h*` values.
    pub fn mean_hstar(&self) -> f64 {
        let finite: Vec<u32> = self.hstar.iter().flatten().copied().collect();
        if finite.is_empty() {
            return 0.0;
        }
        finite.iter().map(|&h| h as f64).sum::<f64>() / finite.len() as f64
    }

    /// Number of states per finite `h*` value, index = `h*`.
    pub fn hstar_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.dmax().map(|d| d as usize + 1).unwrap_or(0)];
        for h in self.hstar.iter().flatten() {
            hist[*h as usize] += 1;
        }
        hist
    }

    /// Ids of the states whose completions are covered by `filter`.
    pub fn matching(&self, filter: &PartialState) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| filter.is_subset_of(s))
            .map(|(i, _)| i)
            .collect()
    }

    /// Uniform draw from the reachable states that agree with `filter`.
    pub fn random_fs_state<R: Rng + ?Sized>(
        &self,
        filter: Option<&PartialState>,
        rng: &mut R,
    ) -> Result<PartialState, Error> {
        match filter {
            None => Ok(self.states[rng.gen_range(0..self.states.len())].clone()),
            Some(f) => {
                let ids = self.matching(f);
                if ids.is_empty() {
                    return Err(Error::InvalidPredecessor);
                }
                Ok(self.states[ids[rng.gen_range(0..ids.len())]].clone())
            }
        }
    }
}

/// Breadth-first closure of the initial state followed by one backward
/// Dijkstra sweep from every goal state.
pub fn enumerate_forward(task: &Task, max_states: usize) -> Result<StateSpace, Error> {
    let mut states = vec![task.initial.clone()];
    let mut index = HashMap::new();
    index.insert(task.initial.clone(), 0usize);
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);

    while let Some(id) = queue.pop_front() {
        let mut out = Vec::new();
        for (op_id, op) in task.operators.iter().enumerate() {
            if !applicable(&states[id], op) {
                continue;
            }
            let next = apply_unchecked(&states[id], op);
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    if states.len() >= max_states {
                        return Err(Error::TooLarge {
                            limit: max_states,
                            reached: states.len(),
                        });
                    }
                    let t = states.len();
                    index.insert(next.clone(), t);
                    states.push(next);
                    edges.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            out.push(Edge {
                target,
                operator: op_id,
                cost: op.cost,
            });
        }
        edges[id] = out;
    }

    let is_goal: Vec<bool> = states.iter().map(|s| satisfies_goal(s, &task.goal)).collect();
    let hstar = backward_dijkstra(&edges, &is_goal);
    Ok(StateSpace {
        states,
        index,
        edges,
        hstar,
        is_goal,
    })
}

fn backward_dijkstra(edges: &[Vec<Edge>], is_goal: &[bool]) -> Vec<Option<u32>> {
    let n = edges.len();
    let mut reverse: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
    for (src, out) in edges.iter().enumerate() {
        for e in out {
            reverse[e.target].push((src, e.cost));
        }
    }
    let mut dist: Vec<Option<u32>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for (id, &g) in is_goal.iter().enumerate() {
        if g {
            dist[id] = Some(0);
            heap.push(Reverse((0u32, id)));
        }
    }
    while let Some(Reverse((d, id))) = heap.pop() {
        if dist[id] != Some(d) {
            continue;
        }
        for &(pred, cost) in &reverse[id] {
            let nd = d + cost;
            if dist[pred].is_none_or(|old| nd < old) {
                dist[pred] = Some(nd);
                heap.push(Reverse((nd, pred)));
            }
        }
    }
    dist
}

/// Optimal cost from `start` to any goal state by forward uniform-cost
/// search; `Ok(None)` when no goal is reachable.
pub fn goal_distance(task: &Task, start: &PartialState, max_states: usize) -> Result<Option<u32>, Error> {
    let mut best: HashMap<PartialState, u32> = HashMap::new();
    let mut nodes = vec![start.clone()];
    best.insert(start.clone(), 0);
    let mut heap = BinaryHeap::from([Reverse((0u32, 0usize))]);
    while let Some(Reverse((g, node))) = heap.pop() {
        let s = nodes[node].clone();
        if best.get(&s) != Some(&g) {
            continue;
        }
        if satisfies_goal(&s, &task.goal) {
            return Ok(Some(g));
        }
        for op in &task.operators {
            if !applicable(&s, op) {
                continue;
            }
            let next = apply_unchecked(&s, op);
            let ng = g + op.cost;
            if best.get(&next).is_none_or(|&old| ng < old) {
                if best.len() >= max_states {
                    return Err(Error::TooLarge {
                        limit: max_states,
                        reached: best.len(),
                    });
                }
                best.insert(next.clone(), ng);
                nodes.push(next);
                heap.push(Reverse((ng, nodes.len() - 1)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sas::{parse_sas, Operator, VariableDef};
    use crate::testing::TOY3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(v: &[u32]) -> PartialState {
        PartialState::from_values(v.to_vec())
    }

    #[test]
    fn toy3_space() {
        let task = parse_sas(TOY3).unwrap();
        let space = enumerate_forward(&task, DEFAULT_MAX_STATES).unwrap();
        assert_eq!(space.len(), 4);
        let expected = [([0, 0], 1), ([1, 0], 0), ([0, 1], 1), ([1, 1], 0)];
        for (s, h) in expected {
            assert_eq!(space.perfect_h(&st(&s)).unwrap(), Some(h));
        }
        assert_eq!(space.dmax().unwrap(), 1);
        assert_eq!(space.goal_count(), 2);
        assert_eq!(space.hstar_histogram(), vec![2, 2]);
    }

    #[test]
    fn overflow_is_reported() {
        let task = parse_sas(TOY3).unwrap();
        match enumerate_forward(&task, 3) {
            Err(Error::TooLarge { limit, reached }) => {
                assert_eq!(limit, 3);
                assert_eq!(reached, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn dead_end_task() -> Task {
        // x: 0 -> 1 (goal) or 0 -> 2 (trap, no way back).
        let vars = vec![VariableDef {
            index: 0,
            name: "x".into(),
            fact_names: vec!["x0".into(), "x1".into(), "x2".into()],
        }];
        let ops = vec![
            Operator::new("win", st(&[0]), st(&[1]), 1),
            Operator::new("trap", st(&[0]), st(&[2]), 1),
        ];
        Task::new("dead", vars, ops, vec![], st(&[0]), st(&[1]), 1).unwrap()
    }

    #[test]
    fn dead_ends_are_infinite() {
        let task = dead_end_task();
        let space = enumerate_forward(&task, 10).unwrap();
        assert_eq!(space.perfect_h(&st(&[2])).unwrap(), None);
        assert_eq!(space.perfect_h(&st(&[0])).unwrap(), Some(1));
        assert!(matches!(space.perfect_h(&st(&[5])), Err(Error::UnknownState)));
        assert_eq!(goal_distance(&task, &st(&[2]), 10).unwrap(), None);
    }

    #[test]
    fn goal_initial_state_has_dmax_zero() {
        let vars = vec![VariableDef {
            index: 0,
            name: "x".into(),
            fact_names: vec!["x0".into(), "x1".into()],
        }];
        let ops = vec![Operator::new("stay", st(&[1]), st(&[0]), 1)];
        let task = Task::new("single", vars, ops, vec![], st(&[0]), st(&[0]), 1).unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.dmax().unwrap(), 0);
    }

    #[test]
    fn no_goal_reachable_errors() {
        let vars = vec![VariableDef {
            index: 0,
            name: "x".into(),
            fact_names: vec!["x0".into(), "x1".into()],
        }];
        let task = Task::new(
            "stuck",
            vars,
            vec![Operator::new("noop", st(&[0]), st(&[0]), 1)],
            vec![],
            st(&[0]),
            st(&[1]),
            1,
        )
        .unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        assert!(matches!(space.dmax(), Err(Error::NoGoalReachable)));
    }

    #[test]
    fn random_state_respects_filter_and_is_uniform() {
        let task = parse_sas(TOY3).unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let filter = st(&[0, crate::sas::UNDEFINED]);
        let draws = 20_000;
        let mut b1 = 0;
        for _ in 0..draws {
            let s = space.random_fs_state(Some(&filter), &mut rng).unwrap();
            assert_eq!(s.raw(0), 0);
            b1 += s.raw(1) as usize;
        }
        // Chi-square with one degree of freedom, 99.9% critical value 10.83.
        let expected = draws as f64 / 2.0;
        let chi = (b1 as f64 - expected).powi(2) / expected * 2.0;
        assert!(chi < 10.83, "chi-square {chi}");

        assert_eq!(space.random_fs_state(Some(&st(&[1, 1])), &mut rng).unwrap(), st(&[1, 1]));
        let dead = dead_end_task();
        let dspace = enumerate_forward(&dead, 10).unwrap();
        assert!(matches!(
            dspace.random_fs_state(Some(&st(&[1])), &mut rng).map(|_| ()),
            Ok(())
        ));
        let unreachable_filter = PartialState::from_values(vec![7]);
        assert!(matches!(
            dspace.random_fs_state(Some(&unreachable_filter), &mut rng),
            Err(Error::InvalidPredecessor)
        ));
    }
}
