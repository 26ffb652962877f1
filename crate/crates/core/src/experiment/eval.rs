//! Oracle-based quality measures and initial-state generation.

use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::Error;
use crate::oracle::{goal_distance, StateSpace, DEFAULT_MAX_STATES};
use crate::par;
use crate::sampler::Sample;
use crate::sas::{PartialState, Task};
use crate::search::Heuristic;
use crate::seeds;
use crate::transition::{applicable, apply_unchecked, satisfies_goal};

/// Endpoints of independent forward random walks from the initial state.
/// Duplicate and goal endpoints are redrawn, up to `100·count + 100` walks.
pub fn gen_initial_states(task: &Task, count: usize, walk_length: usize, seed: u64) -> Result<Vec<PartialState>, Error> {
    let mut rng = seeds::stream(seed, "initial-states");
    let mut out = Vec::with_capacity(count);
    let mut seen = HashSet::new();
    let budget = 100 * count + 100;
    let mut ops = Vec::new();
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let mut s = task.initial.clone();
        for _ in 0..walk_length {
            ops.clear();
            ops.extend(task.operators.iter().filter(|o| applicable(&s, o)));
            match ops.choose(&mut rng) {
                Some(o) => s = apply_unchecked(&s, o),
                None => break,
            }
        }
        if !satisfies_goal(&s, &task.goal) && seen.insert(s.clone()) {
            out.push(s);
        }
    }
    if out.len() < count {
        return Err(Error::Config(format!(
            "found only {} distinct non-goal walk endpoints of length {walk_length}, {count} requested",
            out.len()
        )));
    }
    Ok(out)
}

/// Writes one state per line in `v1,v2,…` form.
pub fn states_to_text(states: &[PartialState]) -> String {
    states.iter().map(|s| format!("{s}\n")).collect()
}

pub fn states_from_text(text: &str) -> Result<Vec<PartialState>, Error> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(PartialState::parse)
        .collect()
}

/// `h*` of a complete state: from the oracle when it knows the state,
/// otherwise by forward uniform-cost search.
pub fn exact_hstar(task: &Task, oracle: Option<&StateSpace>, s: &PartialState) -> Result<Option<u32>, Error> {
    if let Some(id) = oracle.and_then(|o| o.id_of(s)) {
        return Ok(oracle.expect("checked").hstar_by_id(id));
    }
    goal_distance(task, s, DEFAULT_MAX_STATES)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateQuality {
    pub mean_abs_error: f64,
    pub evaluated: usize,
    /// Partial (fallback) states and dead ends.
    pub skipped: usize,
}

/// Mean `|h − h*|` over samples with a complete state and finite `h*`.
pub fn eval_estimates(task: &Task, samples: &[Sample], oracle: Option<&StateSpace>) -> Result<EstimateQuality, Error> {
    let distances = par::map(samples, |s| {
        if s.state.is_complete() {
            exact_hstar(task, oracle, &s.state)
        } else {
            Ok(None)
        }
    });
    let mut total = 0.0;
    let mut evaluated = 0;
    for (s, d) in samples.iter().zip(distances) {
        if let Some(d) = d? {
            total += (s.h as f64 - d as f64).abs();
            evaluated += 1;
        }
    }
    Ok(EstimateQuality {
        mean_abs_error: if evaluated == 0 { 0.0 } else { total / evaluated as f64 },
        evaluated,
        skipped: samples.len() - evaluated,
    })
}

/// Mean `|ĥ(s) − h*(s)|` over every forward-reachable state with finite `h*`.
pub fn eval_heuristic_over_fss(task: &Task, heuristic: Heuristic<'_>, oracle: &StateSpace) -> Result<f64, Error> {
    let ids: Vec<usize> = (0..oracle.len())
        .filter(|&i| oracle.hstar_by_id(i).is_some())
        .collect();
    if ids.is_empty() {
        return Ok(0.0);
    }
    let chunks: Vec<&[usize]> = ids.chunks(2048).collect();
    let sums = par::map(&chunks, |chunk| -> Result<f64, Error> {
        let states: Vec<PartialState> = chunk.iter().map(|&i| oracle.state(i).clone()).collect();
        let values = heuristic.evaluate(task, &states)?;
        Ok(chunk
            .iter()
            .zip(values)
            .map(|(&i, h)| (h - oracle.hstar_by_id(i).expect("finite") as f64).abs())
            .sum())
    });
    let mut total = 0.0;
    for s in sums {
        total += s?;
    }
    Ok(total / ids.len() as f64)
}

/// Geometric mean of strictly positive values; `None` when empty or when
/// some value is not positive.
pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    Some((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

pub fn arithmetic_mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_forward;
    use crate::sampler::Origin;
    use crate::sas::parse_sas;
    use crate::testing::TOY3;
    use proptest::prelude::*;

    fn st(v: &[u32]) -> PartialState {
        PartialState::from_values(v.to_vec())
    }

    #[test]
    fn initial_state_generation() {
        let task = parse_sas(TOY3).unwrap();
        // the only non-goal one-step endpoint is (a0,b1)
        assert_eq!(gen_initial_states(&task, 1, 1, 1).unwrap(), vec![st(&[0, 1])]);
        assert!(gen_initial_states(&task, 2, 1, 1).is_err());
        assert!(gen_initial_states(&task, 2, 0, 1).is_err());
        let blocks = Task::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/../../tasks/blocks-5.sas")).unwrap();
        let states = gen_initial_states(&blocks, 20, 200, 7).unwrap();
        assert_eq!(states, gen_initial_states(&blocks, 20, 200, 7).unwrap());
        let distinct: HashSet<_> = states.iter().collect();
        assert_eq!(distinct.len(), 20);
        assert_eq!(states_from_text(&states_to_text(&states)).unwrap(), states);
    }

    #[test]
    fn estimate_error_examples() {
        let task = parse_sas(TOY3).unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        let sample = |v: &[u32], h| Sample {
            state: st(v),
            h,
            origin: Origin::Rw,
        };
        let q = eval_estimates(&task, &[sample(&[0, 0], 3)], Some(&space)).unwrap();
        assert_eq!(q.mean_abs_error, 2.0);
        let exact: Vec<Sample> = (0..space.len())
            .map(|i| Sample {
                state: space.state(i).clone(),
                h: space.hstar_by_id(i).unwrap(),
                origin: Origin::Rw,
            })
            .collect();
        assert_eq!(eval_estimates(&task, &exact, None).unwrap().mean_abs_error, 0.0);
        let partial = eval_estimates(&task, &[sample(&[0, u32::MAX], 3)], Some(&space)).unwrap();
        assert_eq!((partial.evaluated, partial.skipped), (0, 1));
    }

    #[test]
    fn fss_error_examples() {
        let task = parse_sas(TOY3).unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        assert_eq!(eval_heuristic_over_fss(&task, Heuristic::Perfect(&space), &space).unwrap(), 0.0);
        assert_eq!(eval_heuristic_over_fss(&task, Heuristic::GoalCount, &space).unwrap(), 0.0);
        assert_eq!(eval_heuristic_over_fss(&task, Heuristic::Blind, &space).unwrap(), 0.5);
    }

    #[test]
    fn means() {
        assert!((geometric_mean(&[1.0, 100.0]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(geometric_mean(&[]), None);
        assert_eq!(geometric_mean(&[0.0, 3.0]), None);
        assert_eq!(arithmetic_mean(&[1.0, 2.0]), Some(1.5));
    }

    proptest! {
        #[test]
        fn geometric_mean_properties(x in 0.01f64..1e6, k in 1usize..20, mut v in proptest::collection::vec(0.01f64..1e4, 1..20)) {
            let g = geometric_mean(&vec![x; k]).unwrap();
            prop_assert!((g - x).abs() <= 1e-9 * x);
            let a = geometric_mean(&v).unwrap();
            v.reverse();
            let b = geometric_mean(&v).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
