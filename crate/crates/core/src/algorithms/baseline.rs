//! Simple reasonable policies that fix their choice-bin preference up front.

use crate::error::{Error, Result};
use crate::model::{thrifty_fills, Fill, Inventory, Params};

use super::two_phase::as_many_as_fit;
use super::Policy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineState {
    policy: Policy,
    params: Params,
    inv: Inventory,
    count_s: u64,
    count_l: u64,
    s_bins: u64,
    l_bins: u64,
}

impl BaselineState {
    pub fn new(policy: Policy, params: Params, s: u64, l: u64) -> Self {
        BaselineState {
            policy,
            params,
            inv: Inventory::new(s, l),
            count_s: 0,
            count_l: 0,
            s_bins: 0,
            l_bins: 0,
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn inventory(&self) -> Inventory {
        self.inv
    }

    /// Choice bins resolved with small items / with a large item.
    pub fn choice_counts(&self) -> (u64, u64) {
        (self.s_bins, self.l_bins)
    }

    pub fn item_counts(&self) -> (u64, u64) {
        (self.count_s, self.count_l)
    }

    fn prefers_large(&self) -> bool {
        match self.policy {
            Policy::AlwaysS => false,
            Policy::AlwaysL => true,
            Policy::RatioLtoS { numer, denom } => denom * self.l_bins <= numer * self.s_bins,
            Policy::TwoPhase => unreachable!("2-Phase-Packer has its own state"),
        }
    }

    pub fn next_fill(&mut self, bin: u64) -> Result<Fill> {
        if self.inv.is_empty() {
            return Err(Error::EmptyInventory);
        }
        self.params.check_bin(bin)?;
        if !self.inv.fits_any(bin, &self.params) {
            return Ok(Fill::EMPTY);
        }
        let (sz, lz) = (self.params.small(), self.params.large());
        let inv = self.inv;

        let fill = if inv.single_type() {
            as_many_as_fit(bin, inv, &self.params)
        } else if bin <= 2 * sz - 2 {
            Fill::new(1, 0)
        } else if bin == lz {
            Fill::new(0, 1)
        } else if bin == 3 * sz - 1 {
            Fill::new(1, 1)
        } else {
            // choice bin: pick between the all-small and the with-large
            // thrifty fill; when only one exists it is forced
            let options = thrifty_fills(bin, inv, &self.params);
            let with_large = options.iter().copied().find(|f| f.large > 0);
            let only_small = options.iter().copied().find(|f| f.large == 0);
            match (with_large, only_small) {
                (Some(lf), Some(sf)) => {
                    if self.prefers_large() {
                        self.l_bins += 1;
                        lf
                    } else {
                        self.s_bins += 1;
                        sf
                    }
                }
                (Some(f), None) | (None, Some(f)) => f,
                (None, None) => unreachable!("a bin that fits an item has a thrifty fill"),
            }
        };

        self.inv = self.inv.take(fill)?;
        self.count_s += fill.small;
        self.count_l += fill.large;
        Ok(fill)
    }
}
