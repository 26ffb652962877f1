//! SAS+ (Fast Downward FDR, version 3) task model and parser.
//!
//! Parsing folds prevail conditions into operator preconditions and splits
//! every `pre post` effect pair into a precondition (when the pre-value is
//! not `-1`) and an effect. Variables and values keep their file order; the
//! Boolean fact encoding depends on that order.

use std::fmt;
use std::path::Path;

use crate::error::{Error, ParseError};

/// Marker for an undefined variable in a [`PartialState`].
pub const UNDEFINED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDef {
    pub index: usize,
    pub name: String,
    pub fact_names: Vec<String>,
}

impl VariableDef {
    pub fn domain_size(&self) -> usize {
        self.fact_names.len()
    }
}

/// Assignment of value indices to a subset of the variables.
///
/// A complete state is a partial state with every variable defined.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PartialState(Vec<u32>);

impl PartialState {
    /// The fully undefined state over `num_vars` variables.
    pub fn undefined(num_vars: usize) -> Self {
        PartialState(vec![UNDEFINED; num_vars])
    }

    /// Builds a state from raw values; [`UNDEFINED`] marks missing variables.
    pub fn from_values(values: Vec<u32>) -> Self {
        PartialState(values)
    }

    /// Builds a partial state from `(variable, value)` facts.
    pub fn from_facts(num_vars: usize, facts: &[(usize, u32)]) -> Self {
        let mut s = Self::undefined(num_vars);
        for &(var, val) in facts {
            s.0[var] = val;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, var: usize) -> Option<u32> {
        match self.0[var] {
            UNDEFINED => None,
            v => Some(v),
        }
    }

    #[inline]
    pub fn raw(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn set(&mut self, var: usize, value: u32) {
        self.0[var] = value;
    }

    pub fn unset(&mut self, var: usize) {
        self.0[var] = UNDEFINED;
    }

    pub fn is_defined(&self, var: usize) -> bool {
        self.0[var] != UNDEFINED
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().all(|&v| v != UNDEFINED)
    }

    /// Number of defined variables, `|dom(s)|`.
    pub fn num_defined(&self) -> usize {
        self.0.iter().filter(|&&v| v != UNDEFINED).count()
    }

    /// Defined `(variable, value)` pairs in variable order.
    pub fn facts(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != UNDEFINED)
            .map(|(i, &v)| (i, v))
    }

    /// `true` iff every fact of `self` also holds in `other` (`self ⊆ other`).
    pub fn is_subset_of(&self, other: &PartialState) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(&a, &b)| a == UNDEFINED || a == b)
    }

    /// `true` iff the completions of `self` are a subset of the completions of
    /// `other`, i.e. `other ⊆ self` as fact sets.
    pub fn completions_within(&self, other: &PartialState) -> bool {
        other.is_subset_of(self)
    }

    /// Parses the comma-separated form written by [`fmt::Display`].
    pub fn parse(text: &str) -> Result<Self, Error> {
        let values = text
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                if tok == "*" {
                    Ok(UNDEFINED)
                } else {
                    tok.parse::<u32>()
                        .map_err(|_| Error::Format(format!("bad state value `{tok}`")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PartialState(values))
    }
}

impl fmt::Display for PartialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if v == UNDEFINED {
                f.write_str("*")?;
            } else {
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operator {
    pub name: String,
    pub pre: PartialState,
    pub eff: PartialState,
    pub cost: u32,
    pre_facts: Vec<(usize, u32)>,
    eff_facts: Vec<(usize, u32)>,
}

impl Operator {
    pub fn new(name: impl Into<String>, pre: PartialState, eff: PartialState, cost: u32) -> Self {
        let pre_facts = pre.facts().collect();
        let eff_facts = eff.facts().collect();
        Operator {
            name: name.into(),
            pre,
            eff,
            cost,
            pre_facts,
            eff_facts,
        }
    }

    /// Defined precondition facts in variable order.
    pub fn pre_facts(&self) -> &[(usize, u32)] {
        &self.pre_facts
    }

    /// Defined effect facts in variable order.
    pub fn eff_facts(&self) -> &[(usize, u32)] {
        &self.eff_facts
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutexGroup {
    pub facts: Vec<(usize, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    pub variables: Vec<VariableDef>,
    pub operators: Vec<Operator>,
    pub mutexes: Vec<MutexGroup>,
    pub initial: PartialState,
    pub goal: PartialState,
    pub metric: i32,
    offsets: Vec<usize>,
}

impl Task {
    /// Assembles a task, checking that every reference is in bounds.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<VariableDef>,
        operators: Vec<Operator>,
        mutexes: Vec<MutexGroup>,
        initial: PartialState,
        goal: PartialState,
        metric: i32,
    ) -> Result<Self, Error> {
        let n = variables.len();
        let check = |s: &PartialState, what: &str| -> Result<(), Error> {
            if s.len() != n {
                return Err(Error::InvalidTask(format!(
                    "{what} has {} variables, task has {n}",
                    s.len()
                )));
            }
            for (var, val) in s.facts() {
                if val as usize >= variables[var].domain_size() {
                    return Err(Error::InvalidTask(format!(
                        "{what}: value {val} out of range for variable {var}"
                    )));
                }
            }
            Ok(())
        };
        check(&initial, "initial state")?;
        if !initial.is_complete() {
            return Err(Error::InvalidTask("initial state is not complete".into()));
        }
        check(&goal, "goal")?;
        if goal.num_defined() == 0 {
            return Err(Error::InvalidTask("goal is empty".into()));
        }
        for op in &operators {
            check(&op.pre, &format!("operator `{}` precondition", op.name))?;
            check(&op.eff, &format!("operator `{}` effect", op.name))?;
            if op.eff.num_defined() == 0 {
                return Err(Error::InvalidTask(format!("operator `{}` has no effect", op.name)));
            }
        }
        for group in &mutexes {
            for &(var, val) in &group.facts {
                if var >= n || val as usize >= variables[var].domain_size() {
                    return Err(Error::InvalidTask(format!("mutex fact ({var}, {val}) out of range")));
                }
            }
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for v in &variables {
            offsets.push(acc);
            acc += v.domain_size();
        }
        Ok(Task {
            name: name.into(),
            variables,
            operators,
            mutexes,
            initial,
            goal,
            metric,
            offsets,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.variables[var].domain_size()
    }

    /// Total number of facts, `F = Σ z_i`.
    pub fn num_facts(&self) -> usize {
        self.variables.iter().map(VariableDef::domain_size).sum()
    }

    /// Mean number of effects per operator.
    pub fn mean_effect_size(&self) -> Result<f64, Error> {
        if self.operators.is_empty() {
            return Err(Error::InvalidTask("task has no operators".into()));
        }
        let total: usize = self.operators.iter().map(|o| o.eff_facts().len()).sum();
        Ok(total as f64 / self.operators.len() as f64)
    }

    /// Position of fact `(var, value)` in the fact vector.
    #[inline]
    pub fn fact_index(&self, var: usize, value: u32) -> usize {
        self.offsets[var] + value as usize
    }

    /// One-hot fact encoding; undefined variables give an all-zero block.
    pub fn encode_state(&self, s: &PartialState) -> FactVector {
        let mut bits = vec![false; self.num_facts()];
        for (var, val) in s.facts() {
            bits[self.fact_index(var, val)] = true;
        }
        FactVector { bits }
    }

    /// Writes the encoding of `s` as 0.0/1.0 into `out` (length `F`).
    pub fn encode_into(&self, s: &PartialState, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (var, val) in s.facts() {
            out[self.fact_index(var, val)] = 1.0;
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Task, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_sas_named(&text, name)
    }
}

/// Boolean fact encoding ordered by (variable, value).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactVector {
    pub bits: Vec<bool>,
}

impl FactVector {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(text: &str) -> Result<Self, Error> {
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("bad fact bit `{other}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FactVector { bits })
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// Inverse of [`Task::encode_state`]; errors if a block has two set bits.
    pub fn decode(&self, task: &Task) -> Result<PartialState, Error> {
        if self.bits.len() != task.num_facts() {
            return Err(Error::Format(format!(
                "fact vector has length {}, task has {} facts",
                self.bits.len(),
                task.num_facts()
            )));
        }
        let mut s = PartialState::undefined(task.num_vars());
        for var in 0..task.num_vars() {
            for val in 0..task.domain_size(var) as u32 {
                if self.bits[task.fact_index(var, val)] {
                    if s.is_defined(var) {
                        return Err(Error::Format(format!("variable {var} has two true facts")));
                    }
                    s.set(var, val);
                }
            }
        }
        Ok(s)
    }
}

/// Serializes a task in FDR version 3 text form.
///
/// Preconditions on variables the operator also changes become the pre-value
/// of the effect pair; the rest are written as prevail conditions.
pub fn write_sas(task: &Task) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "begin_version\n3\nend_version");
    let _ = writeln!(out, "begin_metric\n{}\nend_metric", task.metric);
    let _ = writeln!(out, "{}", task.variables.len());
    for v in &task.variables {
        let _ = writeln!(out, "begin_variable\n{}\n-1\n{}", v.name, v.domain_size());
        for f in &v.fact_names {
            let _ = writeln!(out, "{f}");
        }
        let _ = writeln!(out, "end_variable");
    }
    let _ = writeln!(out, "{}", task.mutexes.len());
    for g in &task.mutexes {
        let _ = writeln!(out, "begin_mutex_group\n{}", g.facts.len());
        for (var, val) in &g.facts {
            let _ = writeln!(out, "{var} {val}");
        }
        let _ = writeln!(out, "end_mutex_group");
    }
    let _ = writeln!(out, "begin_state");
    for v in task.initial.values() {
        let _ = writeln!(out, "{v}");
    }
    let _ = writeln!(out, "end_state\nbegin_goal\n{}", task.goal.num_defined());
    for (var, val) in task.goal.facts() {
        let _ = writeln!(out, "{var} {val}");
    }
    let _ = writeln!(out, "end_goal\n{}", task.operators.len());
    for op in &task.operators {
        let _ = writeln!(out, "begin_operator\n{}", op.name);
        let prevail: Vec<_> = op
            .pre_facts()
            .iter()
            .filter(|(v, _)| !op.eff.is_defined(*v))
            .collect();
        let _ = writeln!(out, "{}", prevail.len());
        for (var, val) in prevail {
            let _ = writeln!(out, "{var} {val}");
        }
        let _ = writeln!(out, "{}", op.eff_facts().len());
        for &(var, val) in op.eff_facts() {
            let pre = op.pre.get(var).map_or(-1, |p| p as i64);
            let _ = writeln!(out, "0 {var} {pre} {val}");
        }
        let _ = writeln!(out, "{}\nend_operator", op.cost);
    }
    let _ = writeln!(out, "0");
    out
}

pub fn parse_sas(text: &str) -> Result<Task, Error> {
    parse_sas_named(text, "task")
}

pub fn parse_sas_named(text: &str, name: impl Into<String>) -> Result<Task, Error> {
    let mut p = Lines::new(text);
    let name = name.into();

    p.section = "version";
    p.expect("begin_version")?;
    let version: i64 = p.number()?;
    if version != 3 {
        return p.fail(format!("unsupported version {version}, expected 3"));
    }
    p.expect("end_version")?;

    p.section = "metric";
    p.expect("begin_metric")?;
    let metric: i32 = p.number()?;
    p.expect("end_metric")?;

    p.section = "variables";
    let num_vars: usize = p.number()?;
    let mut variables = Vec::with_capacity(num_vars);
    for index in 0..num_vars {
        p.expect("begin_variable")?;
        let var_name = p.line()?.to_string();
        let layer: i64 = p.number()?;
        if layer != -1 {
            return p.fail(format!("variable `{var_name}` is derived (axiom layer {layer})"));
        }
        let range: usize = p.number()?;
        if range == 0 {
            return p.fail(format!("variable `{var_name}` has an empty domain"));
        }
        let mut fact_names = Vec::with_capacity(range);
        for _ in 0..range {
            fact_names.push(p.line()?.to_string());
        }
        p.expect("end_variable")?;
        variables.push(VariableDef {
            index,
            name: var_name,
            fact_names,
        });
    }
    let domain = |p: &Lines, var: usize, val: i64| -> Result<u32, Error> {
        if var >= variables.len() {
            return p.fail(format!("variable index {var} out of range"));
        }
        if val < 0 || val as usize >= variables[var].domain_size() {
            return p.fail(format!("value {val} out of range for variable {var}"));
        }
        Ok(val as u32)
    };

    p.section = "mutex_group";
    let num_groups: usize = p.number()?;
    let mut mutexes = Vec::with_capacity(num_groups);
    for _ in 0..num_groups {
        p.expect("begin_mutex_group")?;
        let size: usize = p.number()?;
        let mut facts = Vec::with_capacity(size);
        for _ in 0..size {
            let (var, val) = p.pair()?;
            let val = domain(&p, var, val)?;
            facts.push((var, val));
        }
        p.expect("end_mutex_group")?;
        mutexes.push(MutexGroup { facts });
    }

    p.section = "state";
    p.expect("begin_state")?;
    let mut initial = Vec::with_capacity(num_vars);
    for var in 0..num_vars {
        let val: i64 = p.number()?;
        initial.push(domain(&p, var, val)?);
    }
    p.expect("end_state")?;

    p.section = "goal";
    p.expect("begin_goal")?;
    let num_goals: usize = p.number()?;
    let mut goal = PartialState::undefined(num_vars);
    for _ in 0..num_goals {
        let (var, val) = p.pair()?;
        let val = domain(&p, var, val)?;
        goal.set(var, val);
    }
    p.expect("end_goal")?;

    p.section = "operator";
    let num_ops: usize = p.number()?;
    let mut operators = Vec::with_capacity(num_ops);
    for _ in 0..num_ops {
        p.expect("begin_operator")?;
        let op_name = p.line()?.to_string();
        let mut pre = PartialState::undefined(num_vars);
        let mut eff = PartialState::undefined(num_vars);
        let num_prevail: usize = p.number()?;
        for _ in 0..num_prevail {
            let (var, val) = p.pair()?;
            let val = domain(&p, var, val)?;
            pre.set(var, val);
        }
        let num_effects: usize = p.number()?;
        for _ in 0..num_effects {
            let nums = p.numbers()?;
            if nums.is_empty() || nums[0] != 0 {
                return p.fail(format!("operator `{op_name}` has a conditional effect"));
            }
            if nums.len() != 4 {
                return p.fail("effect line must be `0 var pre post`".into());
            }
            let var = nums[1];
            if var < 0 {
                return p.fail(format!("variable index {var} out of range"));
            }
            let var = var as usize;
            if nums[2] != -1 {
                let v = domain(&p, var, nums[2])?;
                pre.set(var, v);
            }
            let post = domain(&p, var, nums[3])?;
            eff.set(var, post);
        }
        let raw_cost: i64 = p.number()?;
        if raw_cost < 0 {
            return p.fail(format!("operator `{op_name}` has negative cost"));
        }
        p.expect("end_operator")?;
        let cost = if metric == 0 { 1 } else { raw_cost as u32 };
        if eff.num_defined() == 0 {
            return p.fail(format!("operator `{op_name}` has no effect"));
        }
        operators.push(Operator::new(op_name, pre, eff, cost));
    }

    p.section = "axiom";
    let num_axioms: usize = p.number()?;
    if num_axioms != 0 {
        return p.fail(format!("{num_axioms} axioms present; axioms are not supported"));
    }

    Task::new(
        name,
        variables,
        operators,
        mutexes,
        PartialState::from_values(initial),
        goal,
        metric,
    )
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    section: &'static str,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines {
            lines,
            pos: 0,
            section: "",
        }
    }

    fn current_line(&self) -> usize {
        self.lines
            .get(self.pos.saturating_sub(1))
            .map(|(n, _)| *n)
            .unwrap_or(0)
    }

    fn error(&self, message: String) -> ParseError {
        ParseError {
            line: self.current_line(),
            section: self.section.to_string(),
            message,
        }
    }

    fn fail<T>(&self, message: String) -> Result<T, Error> {
        Err(self.error(message).into())
    }

    fn line(&mut self) -> Result<&'a str, ParseError> {
        match self.lines.get(self.pos) {
            Some(&(_, l)) => {
                self.pos += 1;
                Ok(l)
            }
            None => Err(ParseError {
                line: self.current_line(),
                section: self.section.to_string(),
                message: "unexpected end of file".into(),
            }),
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<(), ParseError> {
        let l = self.line()?;
        if l == keyword {
            Ok(())
        } else {
            Err(self.error(format!("expected `{keyword}`, found `{l}`")))
        }
    }

    fn number<T: std::str::FromStr>(&mut self) -> Result<T, ParseError> {
        let l = self.line()?;
        l.parse()
            .map_err(|_| self.error(format!("expected a number, found `{l}`")))
    }

    fn numbers(&mut self) -> Result<Vec<i64>, ParseError> {
        let l = self.line()?;
        l.split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| self.error(format!("expected numbers, found `{l}`")))
    }

    fn pair(&mut self) -> Result<(usize, i64), ParseError> {
        let nums = self.numbers()?;
        if nums.len() != 2 || nums[0] < 0 {
            return Err(self.error("expected `var value`".into()));
        }
        Ok((nums[0] as usize, nums[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::TOY3;

    #[test]
    fn parses_toy3() {
        let task = parse_sas(TOY3).unwrap();
        assert_eq!(task.num_vars(), 2);
        assert_eq!(task.operators.len(), 2);
        assert_eq!(task.num_facts(), 4);
        assert_eq!(task.mean_effect_size().unwrap(), 1.0);
        assert_eq!(task.initial.values(), &[0, 0]);
        assert_eq!(task.goal, PartialState::from_facts(2, &[(0, 1)]));
        let op1 = &task.operators[0];
        assert_eq!(op1.pre, PartialState::from_facts(2, &[(0, 0)]));
        assert_eq!(op1.eff, PartialState::from_facts(2, &[(0, 1)]));
        assert_eq!(op1.cost, 1);
    }

    #[test]
    fn encodes_states() {
        let task = parse_sas(TOY3).unwrap();
        let enc = |v: Vec<u32>| task.encode_state(&PartialState::from_values(v)).to_bitstring();
        assert_eq!(enc(vec![1, 0]), "0110");
        assert_eq!(enc(vec![UNDEFINED, 1]), "0001");
        assert_eq!(enc(vec![0, 0]), "1010");
    }

    #[test]
    fn missing_end_goal_names_goal_section() {
        let broken = TOY3.replace("end_goal", "");
        let err = parse_sas(&broken).unwrap_err();
        match err {
            Error::Parse(e) => assert_eq!(e.section, "goal"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_other_versions_and_axioms() {
        let v2 = TOY3.replacen("\n3\n", "\n2\n", 1);
        assert!(matches!(parse_sas(&v2), Err(Error::Parse(_))));
        let axioms = format!("{}1\n", TOY3.trim_end().trim_end_matches('0'));
        let err = parse_sas(&axioms).unwrap_err();
        assert!(err.to_string().contains("axiom"), "{err}");
    }

    #[test]
    fn truncated_file_is_an_error() {
        let cut = &TOY3[..TOY3.len() / 2];
        assert!(matches!(parse_sas(cut), Err(Error::Parse(_))));
    }

    #[test]
    fn value_out_of_range_is_reported_with_line() {
        let bad = TOY3.replace("begin_state\n0\n0", "begin_state\n0\n7");
        match parse_sas(&bad).unwrap_err() {
            Error::Parse(e) => {
                assert_eq!(e.section, "state");
                assert!(e.line > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn prevail_and_pre_post_pairs_are_split() {
        let text = "begin_version\n3\nend_version\nbegin_metric\n1\nend_metric\n3\n\
            begin_variable\nx\n-1\n2\nAtom x0\nAtom x1\nend_variable\n\
            begin_variable\ny\n-1\n2\nAtom y0\nAtom y1\nend_variable\n\
            begin_variable\nz\n-1\n3\nAtom z0\nAtom z1\nAtom z2\nend_variable\n\
            0\nbegin_state\n0\n0\n0\nend_state\nbegin_goal\n1\n2 2\nend_goal\n1\n\
            begin_operator\nmove\n1\n0 0\n2\n0 1 -1 1\n0 2 0 2\n5\nend_operator\n0\n";
        let task = parse_sas(text).unwrap();
        let op = &task.operators[0];
        assert_eq!(op.pre_facts(), &[(0, 0), (2, 0)]);
        assert_eq!(op.eff_facts(), &[(1, 1), (2, 2)]);
        assert_eq!(op.cost, 5);
        assert_eq!(task.num_facts(), 7);
        let zero_metric = text.replace("begin_metric\n1", "begin_metric\n0");
        assert_eq!(parse_sas(&zero_metric).unwrap().operators[0].cost, 1);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let task = parse_sas(TOY3).unwrap();
        let again = parse_sas(&write_sas(&task)).unwrap();
        assert_eq!(task, again);
        assert_eq!(parse_sas(TOY3).unwrap(), task);
    }

    #[test]
    fn conditional_effects_are_rejected() {
        let text = TOY3.replace("0 0 0 1", "1 1 0 0 0 1");
        let err = parse_sas(&text).unwrap_err();
        assert!(err.to_string().contains("conditional"), "{err}");
    }
}
