//! Fixtures shared by unit and integration tests.

use crate::sas::{PartialState, UNDEFINED};

/// Two binary variables, goal `A=a1`, one operator per variable.
pub const TOY3: &str = include_str!("../../../tasks/toy3.sas");

/// Every partial state over the given domain sizes (including the fully
/// undefined and all complete states).
pub fn all_partial_states(domains: &[usize]) -> impl Iterator<Item = PartialState> + '_ {
    let total: usize = domains.iter().map(|&z| z + 1).product();
    (0..total).map(move |mut code| {
        let values = domains
            .iter()
            .map(|&z| {
                let digit = code % (z + 1);
                code /= z + 1;
                if digit == z {
                    UNDEFINED
                } else {
                    digit as u32
                }
            })
            .collect();
        PartialState::from_values(values)
    })
}
