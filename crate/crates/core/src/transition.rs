//! Progression and regression over partial states.

use crate::error::Error;
use crate::sas::{MutexGroup, Operator, PartialState, UNDEFINED};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One progression or regression step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionEvent {
    pub operator: usize,
    pub source: PartialState,
    pub result: PartialState,
    pub direction: Direction,
    pub cost: u32,
}

/// `pre(o) ⊆ s`; a precondition on a variable undefined in `s` fails.
#[inline]
pub fn applicable(s: &PartialState, o: &Operator) -> bool {
    o.pre_facts().iter().all(|&(v, d)| s.raw(v) == d)
}

/// `eff(o) ∘ s`.
pub fn successor(s: &PartialState, o: &Operator) -> Result<PartialState, Error> {
    if !applicable(s, o) {
        return Err(Error::Contract(format!(
            "operator `{}` is not applicable in {s}",
            o.name
        )));
    }
    Ok(apply_unchecked(s, o))
}

/// `eff(o) ∘ s` without the applicability check.
#[inline]
pub fn apply_unchecked(s: &PartialState, o: &Operator) -> PartialState {
    let mut next = s.clone();
    for &(v, d) in o.eff_facts() {
        next.set(v, d);
    }
    next
}

/// Relevance and consistency of `o` for regressing `s`.
pub fn backward_applicable(s: &PartialState, o: &Operator) -> bool {
    let mut relevant = false;
    for &(v, d) in o.eff_facts() {
        let sv = s.raw(v);
        if sv == UNDEFINED {
            continue;
        }
        if sv != d {
            return false;
        }
        relevant = true;
    }
    if !relevant {
        return false;
    }
    // Preconditions on variables the operator leaves untouched must hold in s.
    o.pre_facts().iter().all(|&(v, d)| {
        let sv = s.raw(v);
        sv == UNDEFINED || sv == d || o.eff.is_defined(v)
    })
}

/// `pre(o) ∘ s|_{dom(s) \ eff_r}`.
pub fn predecessor(s: &PartialState, o: &Operator) -> Result<PartialState, Error> {
    if !backward_applicable(s, o) {
        return Err(Error::Contract(format!(
            "operator `{}` is not backward applicable in {s}",
            o.name
        )));
    }
    Ok(regress_unchecked(s, o))
}

#[inline]
pub fn regress_unchecked(s: &PartialState, o: &Operator) -> PartialState {
    let mut prev = s.clone();
    for &(v, _) in o.eff_facts() {
        prev.unset(v);
    }
    for &(v, d) in o.pre_facts() {
        prev.set(v, d);
    }
    prev
}

/// Every goal-defined variable holds its goal value in `s`.
pub fn satisfies_goal(s: &PartialState, goal: &PartialState) -> bool {
    goal.is_subset_of(s)
}

/// Some mutex group has two or more of its facts true in `s`.
pub fn violates_mutex(s: &PartialState, mutexes: &[MutexGroup]) -> bool {
    mutexes.iter().any(|g| {
        g.facts
            .iter()
            .filter(|&&(v, d)| s.raw(v) == d)
            .nth(1)
            .is_some()
    })
}

pub fn forward_event(s: &PartialState, index: usize, o: &Operator) -> Result<TransitionEvent, Error> {
    Ok(TransitionEvent {
        operator: index,
        source: s.clone(),
        result: successor(s, o)?,
        direction: Direction::Forward,
        cost: o.cost,
    })
}

pub fn backward_event(s: &PartialState, index: usize, o: &Operator) -> Result<TransitionEvent, Error> {
    Ok(TransitionEvent {
        operator: index,
        source: s.clone(),
        result: predecessor(s, o)?,
        direction: Direction::Backward,
        cost: o.cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sas::parse_sas;
    use crate::testing::{all_partial_states, TOY3};
    use proptest::prelude::*;

    fn st(v: &[u32]) -> PartialState {
        PartialState::from_values(v.to_vec())
    }

    const U: u32 = UNDEFINED;

    #[test]
    fn forward_examples() {
        let t = parse_sas(TOY3).unwrap();
        let (op1, op2) = (&t.operators[0], &t.operators[1]);
        assert!(applicable(&st(&[0, 0]), op1));
        assert!(!applicable(&st(&[1, 0]), op1));
        assert!(!applicable(&st(&[U, 0]), op1));
        assert_eq!(successor(&st(&[0, 0]), op1).unwrap(), st(&[1, 0]));
        assert_eq!(successor(&st(&[0, 1]), op1).unwrap(), st(&[1, 1]));
        assert_eq!(successor(&st(&[0, 0]), op2).unwrap(), st(&[0, 1]));
        assert!(matches!(successor(&st(&[1, 0]), op1), Err(Error::Contract(_))));
    }

    #[test]
    fn backward_examples() {
        let t = parse_sas(TOY3).unwrap();
        let (op1, op2) = (&t.operators[0], &t.operators[1]);
        assert!(backward_applicable(&st(&[1, U]), op1));
        assert!(!backward_applicable(&st(&[1, U]), op2));
        assert!(!backward_applicable(&st(&[0, U]), op1));
        assert_eq!(predecessor(&st(&[1, U]), op1).unwrap(), st(&[0, U]));
        assert_eq!(predecessor(&st(&[1, 1]), op2).unwrap(), st(&[1, 0]));
        assert_eq!(predecessor(&st(&[1, 1]), op1).unwrap(), st(&[0, 1]));
        assert!(predecessor(&st(&[0, U]), op1).is_err());
    }

    #[test]
    fn goal_and_mutex_examples() {
        let goal = st(&[1, U]);
        assert!(satisfies_goal(&st(&[1, U]), &goal));
        assert!(!satisfies_goal(&st(&[U, 1]), &goal));
        assert!(satisfies_goal(&st(&[1, 0]), &goal));
        let groups = vec![MutexGroup {
            facts: vec![(0, 1), (1, 1)],
        }];
        assert!(violates_mutex(&st(&[1, 1]), &groups));
        assert!(!violates_mutex(&st(&[1, 0]), &groups));
        assert!(!violates_mutex(&st(&[1, 1]), &[]));
    }

    #[test]
    fn prevail_on_touched_variable_does_not_constrain_regression() {
        // pre x=0, eff x=1: regressing {x=1} must not require s(x)=0.
        let op = Operator::new("flip", st(&[0]), st(&[1]), 1);
        assert!(backward_applicable(&st(&[1]), &op));
        assert_eq!(predecessor(&st(&[1]), &op).unwrap(), st(&[0]));
        // pre y=0 (untouched), eff x=1: s with y=1 is inconsistent.
        let op = Operator::new("move", st(&[U, 0]), st(&[1, U]), 1);
        assert!(!backward_applicable(&st(&[1, 1]), &op));
        assert!(backward_applicable(&st(&[1, 0]), &op));
    }

    fn micro_ops() -> Vec<Operator> {
        // Three ternary variables with a handful of operators mixing prevails,
        // touched preconditions and multi-variable effects.
        vec![
            Operator::new("a", st(&[0, U, U]), st(&[1, U, U]), 1),
            Operator::new("b", st(&[1, 2, U]), st(&[2, U, 0]), 1),
            Operator::new("c", st(&[U, U, 0]), st(&[U, 1, 2]), 2),
            Operator::new("d", st(&[U, 1, U]), st(&[0, 2, U]), 1),
            Operator::new("e", st(&[U, U, U]), st(&[U, U, 1]), 3),
        ]
    }

    #[test]
    fn regression_soundness_exhaustive() {
        let domains = [3, 3, 3];
        for s in all_partial_states(&domains) {
            for o in micro_ops() {
                if !backward_applicable(&s, &o) {
                    continue;
                }
                let r = predecessor(&s, &o).unwrap();
                assert!(applicable(&r, &o), "pred not applicable: {s} {}", o.name);
                let back = successor(&r, &o).unwrap();
                assert!(s.is_subset_of(&back), "succ(pred(s)) ⊉ s for {s}");
                // Every completion of the predecessor progresses into S(s).
                for full in all_partial_states(&domains).filter(|c| c.is_complete()) {
                    if r.is_subset_of(&full) {
                        let next = successor(&full, &o).unwrap();
                        assert!(s.is_subset_of(&next));
                    }
                }
            }
        }
    }

    #[test]
    fn applicable_matches_brute_force_on_complete_states() {
        let domains = [3, 3, 3];
        for s in all_partial_states(&domains).filter(|c| c.is_complete()) {
            for o in micro_ops() {
                let brute = (0..3).all(|v| o.pre.raw(v) == UNDEFINED || o.pre.raw(v) == s.raw(v));
                assert_eq!(applicable(&s, &o), brute);
            }
        }
    }

    proptest! {
        #[test]
        fn mutex_violation_is_monotone(values in proptest::collection::vec(0u32..4, 4), extra in 0usize..4, val in 0u32..3) {
            let groups = vec![
                MutexGroup { facts: vec![(0, 1), (1, 1), (2, 0)] },
                MutexGroup { facts: vec![(1, 2), (3, 0)] },
            ];
            let s = PartialState::from_values(values.iter().map(|&v| if v == 3 { UNDEFINED } else { v }).collect());
            if violates_mutex(&s, &groups) && !s.is_defined(extra) {
                let mut more = s.clone();
                more.set(extra, val);
                prop_assert!(violates_mutex(&more, &groups));
            }
        }
    }
}
