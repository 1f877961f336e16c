//! 2-Phase-Packer.
//!
//! Phase 1 balances choice bins between one large item and two (or three)
//! small items at a ratio fixed by the initial `s : l` range; Phase 2 then
//! prefers a single item size. Branch order follows the original pseudocode
//! exactly, including the two "few small items left" guards that come before
//! the phase logic.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{classify_range, Fill, Inventory, Params, Range};

/// Deliberately broken variants used to check that the invariant suites
/// actually detect faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Standard,
    /// `UseLs` negated.
    FlippedUseLs,
}

/// Counter snapshot; also the witness attached to invariant violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counters {
    pub count_s: u64,
    pub count_l: u64,
    pub s_bins: u64,
    pub l_bins: u64,
    pub late_s_bins: u64,
    pub late_l_bins: u64,
}

/// What a single step did to the choice counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// No choice was made (forced branch, Phase 2, or skipped bin).
    Forced,
    SBin,
    LBin,
    LateSBin,
    LateLBin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPhaseState {
    params: Params,
    initial: Inventory,
    inv: Inventory,
    range: Range,
    counters: Counters,
    last_step: StepKind,
    variant: Variant,
}

impl TwoPhaseState {
    pub fn new(params: Params, s: u64, l: u64) -> Self {
        Self::with_variant(params, s, l, Variant::Standard)
    }

    pub fn with_variant(params: Params, s: u64, l: u64, variant: Variant) -> Self {
        TwoPhaseState {
            params,
            initial: Inventory::new(s, l),
            inv: Inventory::new(s, l),
            range: classify_range(s, l),
            counters: Counters::default(),
            last_step: StepKind::Forced,
            variant,
        }
    }

    /// Builds a state with arbitrary counters, for probing the macros.
    pub fn from_parts(
        params: Params,
        initial: Inventory,
        inv: Inventory,
        counters: Counters,
    ) -> Self {
        TwoPhaseState {
            params,
            initial,
            inv,
            range: classify_range(initial.small, initial.large),
            counters,
            last_step: StepKind::Forced,
            variant: Variant::Standard,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn initial(&self) -> Inventory {
        self.initial
    }

    pub fn inventory(&self) -> Inventory {
        self.inv
    }

    pub fn range(&self) -> Range {
        self.range
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn last_step(&self) -> StepKind {
        self.last_step
    }

    /// `floor((s + 2l) / 16)`: number of S-bins after which the middle range
    /// switches to alternating late bins.
    pub fn late_threshold(&self) -> u64 {
        (self.initial.small + 2 * self.initial.large) / 16
    }

    pub fn phase1_done(&self) -> bool {
        let (s, l) = (self.initial.small, self.initial.large);
        let c = &self.counters;
        match self.range {
            Range::LowL => c.count_l >= l / 2,
            // floor(3s/4 - l/2) evaluated as floor((3s - 2l) / 4); 3s > 2l here
            Range::MidL => c.count_s >= (3 * s - 2 * l) / 4,
            Range::HighL => c.count_s >= s / 3,
        }
    }

    pub fn use_ls(&self) -> bool {
        let standard = self.use_ls_standard();
        match self.variant {
            Variant::Standard => standard,
            Variant::FlippedUseLs => !standard,
        }
    }

    fn use_ls_standard(&self) -> bool {
        let (s, l) = (self.initial.small as u128, self.initial.large as u128);
        let c = &self.counters;
        match self.range {
            Range::LowL => c.l_bins <= c.s_bins,
            Range::MidL => {
                if c.s_bins < self.late_threshold() {
                    // L-bins <= (10l - 3s) S-bins / (s + 2l), cross-multiplied
                    (s + 2 * l) * c.l_bins as u128 <= (10 * l - 3 * s) * c.s_bins as u128
                } else {
                    c.late_l_bins <= c.late_s_bins
                }
            }
            Range::HighL => c.l_bins <= 2 * c.s_bins,
        }
    }

    /// Packs one arriving bin and returns the chosen fill.
    ///
    /// Bins too small for every remaining item come back empty without
    /// touching any counter.
    pub fn next_fill(&mut self, bin: u64) -> Result<Fill> {
        if self.inv.is_empty() {
            return Err(Error::EmptyInventory);
        }
        self.params.check_bin(bin)?;
        self.last_step = StepKind::Forced;
        if !self.inv.fits_any(bin, &self.params) {
            return Ok(Fill::EMPTY);
        }
        let (sz, lz) = (self.params.small(), self.params.large());
        let inv = self.inv;
        let with_top_up = |bin: u64| {
            let small = u64::from(bin - lz >= sz && inv.small > 0);
            Fill::new(small, 1)
        };

        let fill = if inv.single_type() {
            as_many_as_fit(bin, inv, &self.params)
        } else if bin <= 2 * sz - 2 {
            Fill::new(1, 0)
        } else if bin == lz {
            Fill::new(0, 1)
        } else if bin == 3 * sz - 1 {
            Fill::new(1, 1)
        } else if inv.small == 1 {
            with_top_up(bin)
        } else if inv.small == 2 && bin >= 3 * sz {
            Fill::new(1, 1)
        } else if !self.phase1_done() {
            let use_l = self.use_ls();
            let fill = match (bin <= 3 * sz - 2, use_l) {
                (true, true) => Fill::new(0, 1),
                (true, false) => Fill::new(2, 0),
                (false, true) => Fill::new(1, 1),
                (false, false) => Fill::new(3, 0),
            };
            let late = self.range == Range::MidL && self.counters.s_bins >= self.late_threshold();
            let c = &mut self.counters;
            self.last_step = match (late, use_l) {
                (true, true) => {
                    c.late_l_bins += 1;
                    StepKind::LateLBin
                }
                (true, false) => {
                    c.late_s_bins += 1;
                    StepKind::LateSBin
                }
                (false, true) => {
                    c.l_bins += 1;
                    StepKind::LBin
                }
                (false, false) => {
                    c.s_bins += 1;
                    StepKind::SBin
                }
            };
            fill
        } else if self.range == Range::LowL {
            Fill::new(inv.small.min(bin / sz), 0)
        } else {
            with_top_up(bin)
        };

        self.inv = self.inv.take(fill)?;
        self.counters.count_s += fill.small;
        self.counters.count_l += fill.large;
        Ok(fill)
    }

    /// All counter invariants that fail in the current state.
    pub fn violated_invariants(&self) -> Vec<Invariant> {
        Invariant::ALL
            .iter()
            .copied()
            .filter(|inv| inv.applies_to(self.range) && !inv.holds(self))
            .collect()
    }
}

pub(crate) fn as_many_as_fit(bin: u64, inv: Inventory, p: &Params) -> Fill {
    if inv.small > 0 {
        Fill::new(inv.small.min(bin / p.small()), 0)
    } else {
        Fill::new(0, inv.large.min(bin / p.large()))
    }
}

/// The counter relationships the analysis of 2-Phase-Packer relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Invariant {
    /// `L-bins + late-L-bins <= countL`
    BinsVsCountL,
    /// `2 (S-bins + late-S-bins) <= countS`
    BinsVsCountS,
    /// Late counters stay zero outside the middle range.
    LateZero,
    /// Low range: `S-bins <= L-bins <= S-bins + 1`
    LowBalance,
    /// Middle range: `late-S-bins <= late-L-bins <= late-S-bins + 1`
    MidLateBalance,
    /// Middle range: `floor(c (S-bins - 1)) + 1 <= L-bins <= floor(c S-bins) + 1`
    MidFloorBand,
    /// High range: `2 S-bins <= L-bins`
    HighLower,
    /// High range: `L-bins <= 2 S-bins + 1`
    HighUpper,
    /// High range: `floor(2 (S-bins - 1)) + 1 <= L-bins`, the floor band
    /// with `c = 2`. Not part of the published invariant list.
    HighFloorBand,
    /// Middle range: `S-bins + late-S-bins <= 3s/8 - l/4 + 1`
    MidSBinCap,
    /// High range: `S-bins <= s/6 + 1`
    HighSBinCap,
}

impl Invariant {
    pub const ALL: [Invariant; 11] = [
        Invariant::BinsVsCountL,
        Invariant::BinsVsCountS,
        Invariant::LateZero,
        Invariant::LowBalance,
        Invariant::MidLateBalance,
        Invariant::MidFloorBand,
        Invariant::HighLower,
        Invariant::HighUpper,
        Invariant::HighFloorBand,
        Invariant::MidSBinCap,
        Invariant::HighSBinCap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Invariant::BinsVsCountL => "lbins-within-countl",
            Invariant::BinsVsCountS => "sbins-within-counts",
            Invariant::LateZero => "no-late-bins-outside-mid",
            Invariant::LowBalance => "low-bin-balance",
            Invariant::MidLateBalance => "mid-late-balance",
            Invariant::MidFloorBand => "mid-floor-band",
            Invariant::HighLower => "high-double-lower",
            Invariant::HighUpper => "high-double-upper",
            Invariant::HighFloorBand => "high-floor-band",
            Invariant::MidSBinCap => "mid-sbin-cap",
            Invariant::HighSBinCap => "high-sbin-cap",
        }
    }

    /// Members of the published list (everything except the supplemental
    /// floor band for the high range).
    pub fn is_published(&self) -> bool {
        !matches!(self, Invariant::HighFloorBand)
    }

    pub fn applies_to(&self, range: Range) -> bool {
        match self {
            Invariant::BinsVsCountL | Invariant::BinsVsCountS => true,
            Invariant::LateZero => range != Range::MidL,
            Invariant::LowBalance => range == Range::LowL,
            Invariant::MidLateBalance | Invariant::MidFloorBand | Invariant::MidSBinCap => {
                range == Range::MidL
            }
            Invariant::HighLower
            | Invariant::HighUpper
            | Invariant::HighFloorBand
            | Invariant::HighSBinCap => range == Range::HighL,
        }
    }

    pub fn holds(&self, st: &TwoPhaseState) -> bool {
        let c = st.counters;
        let (s, l) = (st.initial.small as i128, st.initial.large as i128);
        let (sb, lb) = (c.s_bins as i128, c.l_bins as i128);
        match self {
            Invariant::BinsVsCountL => c.l_bins + c.late_l_bins <= c.count_l,
            Invariant::BinsVsCountS => 2 * (c.s_bins + c.late_s_bins) <= c.count_s,
            Invariant::LateZero => c.late_s_bins == 0 && c.late_l_bins == 0,
            Invariant::LowBalance => c.s_bins <= c.l_bins && c.l_bins <= c.s_bins + 1,
            Invariant::MidLateBalance => {
                c.late_s_bins <= c.late_l_bins && c.late_l_bins <= c.late_s_bins + 1
            }
            Invariant::MidFloorBand => {
                let (num, den) = (10 * l - 3 * s, s + 2 * l);
                let lo = (num * (sb - 1)).div_euclid(den) + 1;
                let hi = (num * sb).div_euclid(den) + 1;
                lo <= lb && lb <= hi
            }
            Invariant::HighLower => 2 * sb <= lb,
            Invariant::HighUpper => lb <= 2 * sb + 1,
            Invariant::HighFloorBand => 2 * (sb - 1) < lb,
            // 8 (S-bins + late-S-bins) <= 3s - 2l + 8
            Invariant::MidSBinCap => 8 * (sb + c.late_s_bins as i128) <= 3 * s - 2 * l + 8,
            // 6 S-bins <= s + 6
            Invariant::HighSBinCap => 6 * sb <= s + 6,
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
