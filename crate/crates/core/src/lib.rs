pub mod error;
pub mod experiment;
pub mod learner;
pub mod oracle;
pub mod par;
pub mod refinery;
pub mod sampler;
pub mod sas;
pub mod search;
pub mod seeds;
#[doc(hidden)]
pub mod testing;
pub mod transition;
pub mod trie;

pub use error::{Error, Result};
