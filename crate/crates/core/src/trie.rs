//! Trie over partial states keyed by variable values, with a wildcard edge
//! for undefined variables.

use crate::sas::{PartialState, UNDEFINED};

#[derive(Clone, Debug, Default)]
struct Node {
    // (value or UNDEFINED for the wildcard, child node)
    children: Vec<(u32, u32)>,
    items: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FactTrie {
    nodes: Vec<Node>,
    num_vars: usize,
}

impl FactTrie {
    pub fn new(num_vars: usize) -> Self {
        FactTrie {
            nodes: vec![Node::default()],
            num_vars,
        }
    }

    pub fn from_states<'a>(num_vars: usize, states: impl IntoIterator<Item = &'a PartialState>) -> Self {
        let mut trie = FactTrie::new(num_vars);
        for (i, s) in states.into_iter().enumerate() {
            trie.insert(s, i);
        }
        trie
    }

    pub fn insert(&mut self, state: &PartialState, item: usize) {
        debug_assert_eq!(state.len(), self.num_vars);
        let mut node = 0usize;
        for &value in state.values() {
            let found = self.nodes[node]
                .children
                .iter()
                .find(|(v, _)| *v == value)
                .map(|&(_, c)| c as usize);
            node = match found {
                Some(c) => c,
                None => {
                    let c = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.push((value, c as u32));
                    c
                }
            };
        }
        self.nodes[node].items.push(item);
    }

    /// Items whose stored state `t` satisfies `S(query) ⊆ S(t)`: at every
    /// variable `t` is undefined or equals the (defined) query value.
    pub fn covering(&self, query: &PartialState) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            if depth == self.num_vars {
                out.extend_from_slice(&self.nodes[node].items);
                continue;
            }
            let q = query.raw(depth);
            for &(value, child) in &self.nodes[node].children {
                if value == UNDEFINED || (q != UNDEFINED && value == q) {
                    stack.push((child as usize, depth + 1));
                }
            }
        }
        out.sort_unstable();
        out
    }
}
