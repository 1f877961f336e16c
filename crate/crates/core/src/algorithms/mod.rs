//! Online packing policies.

mod baseline;
mod two_phase;

use std::fmt;
use std::str::FromStr;

pub use baseline::BaselineState;
pub use two_phase::{Counters, Invariant, StepKind, TwoPhaseState, Variant};

use crate::error::{Error, Result};
use crate::model::{Fill, Inventory, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    TwoPhase,
    AlwaysS,
    AlwaysL,
    /// Uses the large-item option iff `denom * L-bins <= numer * S-bins`.
    RatioLtoS {
        numer: u64,
        denom: u64,
    },
}

impl Policy {
    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn start(&self, params: Params, s: u64, l: u64) -> Packer {
        match self {
            Policy::TwoPhase => Packer::TwoPhase(TwoPhaseState::new(params, s, l)),
            other => Packer::Baseline(BaselineState::new(*other, params, s, l)),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::TwoPhase => f.write_str("two-phase"),
            Policy::AlwaysS => f.write_str("always-s"),
            Policy::AlwaysL => f.write_str("always-l"),
            Policy::RatioLtoS { numer, denom } => write!(f, "ratio:{numer}/{denom}"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownPolicy(id.to_string());
        match id {
            "two-phase" => Ok(Policy::TwoPhase),
            "always-s" => Ok(Policy::AlwaysS),
            "always-l" => Ok(Policy::AlwaysL),
            _ => {
                let rest = id.strip_prefix("ratio:").ok_or_else(unknown)?;
                let (n, d) = rest.split_once('/').ok_or_else(unknown)?;
                let numer: u64 = n.parse().map_err(|_| unknown())?;
                let denom: u64 = d.parse().map_err(|_| unknown())?;
                if numer == 0 || denom == 0 {
                    return Err(unknown());
                }
                Ok(Policy::RatioLtoS { numer, denom })
            }
        }
    }
}

/// A running policy instance. Cloning snapshots the full internal state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packer {
    TwoPhase(TwoPhaseState),
    Baseline(BaselineState),
}

impl Packer {
    pub fn policy(&self) -> Policy {
        match self {
            Packer::TwoPhase(_) => Policy::TwoPhase,
            Packer::Baseline(b) => b.policy(),
        }
    }

    pub fn inventory(&self) -> Inventory {
        match self {
            Packer::TwoPhase(t) => t.inventory(),
            Packer::Baseline(b) => b.inventory(),
        }
    }

    pub fn next_fill(&mut self, bin: u64) -> Result<Fill> {
        match self {
            Packer::TwoPhase(t) => t.next_fill(bin),
            Packer::Baseline(b) => b.next_fill(bin),
        }
    }

    pub fn as_two_phase(&self) -> Option<&TwoPhaseState> {
        match self {
            Packer::TwoPhase(t) => Some(t),
            Packer::Baseline(_) => None,
        }
    }
}

impl From<TwoPhaseState> for Packer {
    fn from(st: TwoPhaseState) -> Self {
        Packer::TwoPhase(st)
    }
}
