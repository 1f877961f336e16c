//! Online packing of two item sizes into bins of adversarial capacity.
//!
//! Items come in two sizes, `S` and `L = 2S - 1`, with counts known up
//! front. Bins arrive one at a time, each with a size in `[1, 4S - 3]`, and
//! must be filled irrevocably before the next arrives. The goal is to
//! minimise the total space used by all bins until every item is placed.

pub mod adversary;
pub mod algorithms;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod ratio;

pub use algorithms::{Packer, Policy, TwoPhaseState};
pub use error::{Error, Result};
pub use model::{Fill, Inventory, Params, Range, Trace};
pub use ratio::Ratio;
