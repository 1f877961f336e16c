//! Size system, inventories, fills and packing traces.
//!
//! Items come in two sizes, `S` and `L = 2S - 1`, and bins have integer sizes
//! in `[1, M]` with `M = 4S - 3`. A [`Trace`] records, bin by bin, how many
//! items of each size a packing placed; skipped bins are recorded with the
//! empty fill so that validity of empty bins can be checked afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted small-item size. Keeps every cost product inside `u64`.
pub const MAX_ITEM_SIZE: u64 = 1 << 20;
/// Longest accepted bin sequence.
pub const MAX_SEQUENCE_LEN: usize = 1 << 20;

/// The size system: small items of size `S`, large items of size `L = 2S - 1`
/// and bins of size at most `M = 4S - 3 = 2L - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    small: u64,
}

impl Params {
    pub fn new(small: u64) -> Result<Self> {
        if !(2..=MAX_ITEM_SIZE).contains(&small) {
            return Err(Error::InvalidItemSize {
                got: small,
                max: MAX_ITEM_SIZE,
            });
        }
        Ok(Params { small })
    }

    /// `S`
    #[inline]
    pub fn small(&self) -> u64 {
        self.small
    }

    /// `L = 2S - 1`
    #[inline]
    pub fn large(&self) -> u64 {
        2 * self.small - 1
    }

    /// `M = 4S - 3`
    #[inline]
    pub fn max_bin(&self) -> u64 {
        4 * self.small - 3
    }

    pub fn check_bin(&self, bin: u64) -> Result<()> {
        if bin == 0 || bin > self.max_bin() {
            return Err(Error::BinOutOfRange {
                bin,
                min: 1,
                max: self.max_bin(),
            });
        }
        Ok(())
    }

    pub fn check_sequence(&self, sigma: &[u64]) -> Result<()> {
        if sigma.len() > MAX_SEQUENCE_LEN {
            return Err(Error::SequenceTooLong {
                len: sigma.len(),
                max: MAX_SEQUENCE_LEN,
            });
        }
        sigma.iter().try_for_each(|&b| self.check_bin(b))
    }
}

/// Counts of items not yet packed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inventory {
    pub small: u64,
    pub large: u64,
}

impl Inventory {
    pub const EMPTY: Inventory = Inventory { small: 0, large: 0 };

    pub fn new(small: u64, large: u64) -> Self {
        Inventory { small, large }
    }

    pub fn is_empty(&self) -> bool {
        self.small == 0 && self.large == 0
    }

    /// Only one item size (or none) is left.
    pub fn single_type(&self) -> bool {
        self.small == 0 || self.large == 0
    }

    /// Size of the smallest remaining item, if any.
    pub fn min_item(&self, p: &Params) -> Option<u64> {
        if self.small > 0 {
            Some(p.small())
        } else if self.large > 0 {
            Some(p.large())
        } else {
            None
        }
    }

    /// Whether some remaining item fits in a bin of the given size.
    pub fn fits_any(&self, bin: u64, p: &Params) -> bool {
        self.min_item(p).is_some_and(|m| m <= bin)
    }

    /// `s + 2l`, the quantity two reasonable packings agree on while both
    /// still hold items of both sizes.
    pub fn weight(&self) -> u64 {
        self.small + 2 * self.large
    }

    pub fn take(&self, fill: Fill) -> Result<Inventory> {
        match (
            self.small.checked_sub(fill.small),
            self.large.checked_sub(fill.large),
        ) {
            (Some(small), Some(large)) => Ok(Inventory { small, large }),
            _ => Err(Error::Overdraw {
                small: fill.small,
                large: fill.large,
                have_small: self.small,
                have_large: self.large,
            }),
        }
    }

    /// The key-bin condition: no large items, or at most two small items.
    pub fn past_key(&self) -> bool {
        self.large == 0 || self.small <= 2
    }
}

/// Numbers of small and large items placed in one bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fill {
    pub small: u64,
    pub large: u64,
}

impl Fill {
    pub const EMPTY: Fill = Fill { small: 0, large: 0 };

    pub const fn new(small: u64, large: u64) -> Self {
        Fill { small, large }
    }

    pub fn is_empty(&self) -> bool {
        self.small == 0 && self.large == 0
    }

    /// Total item size in the bin.
    pub fn size(&self, p: &Params) -> u64 {
        self.small * p.small() + self.large * p.large()
    }

    /// Ordering key used wherever a deterministic preference between fills
    /// is needed: more large items first, then more small items.
    pub fn preference(&self) -> (u64, u64) {
        (self.large, self.small)
    }
}

impl fmt::Display for Fill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.small, self.large)
    }
}

/// Which piece of the competitive-ratio curve an instance falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Range {
    /// `2l <= s`
    LowL,
    /// `s < 2l` and `6l <= 5s`
    MidL,
    /// `6l > 5s`
    HighL,
}

impl Range {
    pub fn tag(&self) -> &'static str {
        match self {
            Range::LowL => "LowL",
            Range::MidL => "MidL",
            Range::HighL => "HighL",
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn classify_range(s: u64, l: u64) -> Range {
    if 2 * l <= s {
        Range::LowL
    } else if 6 * l <= 5 * s {
        Range::MidL
    } else {
        Range::HighL
    }
}

/// Every fill of a bin that leaves no room for an item still unpacked.
///
/// For a fixed number of large items the small count is forced to the
/// maximum that fits, so at most `1 + floor(bin / L)` fills are returned.
/// They are ordered by [`Fill::preference`], descending.
pub fn thrifty_fills(bin: u64, inv: Inventory, p: &Params) -> Vec<Fill> {
    let (sz, lz) = (p.small(), p.large());
    let max_large = inv.large.min(bin / lz);
    let mut out = Vec::with_capacity(2);
    for large in (0..=max_large).rev() {
        let room = bin - large * lz;
        let small = inv.small.min(room / sz);
        let leftover = room - small * sz;
        if inv.large > large && leftover >= lz {
            continue;
        }
        out.push(Fill { small, large });
    }
    out
}

/// The canonical fills a reasonable packing may use while both item sizes
/// are plentiful.
pub fn reasonable_fills(bin: u64, p: &Params) -> Result<Vec<Fill>> {
    let (sz, lz) = (p.small(), p.large());
    if bin < sz || bin > p.max_bin() {
        return Err(Error::BinOutOfRange {
            bin,
            min: sz,
            max: p.max_bin(),
        });
    }
    let fills = if bin < lz {
        vec![Fill::new(1, 0)]
    } else if bin == lz {
        vec![Fill::new(0, 1)]
    } else if bin < lz + sz {
        vec![Fill::new(0, 1), Fill::new(2, 0)]
    } else if bin == lz + sz {
        vec![Fill::new(1, 1)]
    } else {
        vec![Fill::new(1, 1), Fill::new(3, 0)]
    };
    Ok(fills)
}

/// A bin is wasteful when, after packing, its empty space could still hold
/// some unpacked item.
pub fn is_wasteful(bin: u64, fill: Fill, after: Inventory, p: &Params) -> bool {
    let leftover = bin.saturating_sub(fill.size(p));
    (after.small > 0 && leftover >= p.small()) || (after.large > 0 && leftover >= p.large())
}

/// A used bin holding a small item with at least `L - S` empty space while
/// large items remain.
pub fn is_bad_bin(bin: u64, fill: Fill, after: Inventory, p: &Params) -> bool {
    let leftover = bin.saturating_sub(fill.size(p));
    fill.small > 0 && leftover >= p.large() - p.small() && after.large > 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub bin: u64,
    pub fill: Fill,
}

/// Where the front of a packing ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyBin {
    /// The key condition already held before the first bin.
    BeforeFirst,
    /// Index into the trace entries.
    At(usize),
    /// The condition never held (only possible for partial traces).
    NotReached,
}

/// A (partial) packing: the bins in arrival order and what each received.
///
/// Entries can only be appended through [`Trace::push`], which checks that
/// each fill fits its bin and the remaining inventory, so every trace is
/// well formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    params: Params,
    initial: Inventory,
    remaining: Inventory,
    entries: Vec<Entry>,
}

impl Trace {
    pub fn new(params: Params, initial: Inventory) -> Self {
        Trace {
            params,
            initial,
            remaining: initial,
            entries: Vec::new(),
        }
    }

    pub fn from_entries(
        params: Params,
        initial: Inventory,
        entries: impl IntoIterator<Item = (u64, Fill)>,
    ) -> Result<Self> {
        let mut t = Trace::new(params, initial);
        for (bin, fill) in entries {
            t.push(bin, fill)?;
        }
        Ok(t)
    }

    pub fn push(&mut self, bin: u64, fill: Fill) -> Result<()> {
        self.params.check_bin(bin)?;
        if self.entries.len() >= MAX_SEQUENCE_LEN {
            return Err(Error::SequenceTooLong {
                len: self.entries.len() + 1,
                max: MAX_SEQUENCE_LEN,
            });
        }
        if fill.size(&self.params) > bin {
            return Err(Error::Overfull {
                bin,
                small: fill.small,
                large: fill.large,
            });
        }
        self.remaining = self.remaining.take(fill)?;
        self.entries.push(Entry { bin, fill });
        Ok(())
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn initial(&self) -> Inventory {
        self.initial
    }

    pub fn remaining(&self) -> Inventory {
        self.remaining
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bins(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.bin).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.remaining.is_empty()
    }

    /// Each entry paired with the inventory just before and just after it.
    pub fn steps(&self) -> impl Iterator<Item = (Inventory, &Entry, Inventory)> + '_ {
        let mut inv = self.initial;
        self.entries.iter().map(move |e| {
            let before = inv;
            // push() guarantees the subtraction succeeds
            inv = Inventory::new(before.small - e.fill.small, before.large - e.fill.large);
            (before, e, inv)
        })
    }

    /// Sum of the sizes of the bins that received at least one item.
    pub fn cost(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| !e.fill.is_empty())
            .map(|e| e.bin)
            .sum()
    }

    /// Every empty bin is smaller than every item unpacked when it arrived.
    pub fn is_valid(&self) -> bool {
        let p = self.params;
        self.steps().all(|(before, e, _)| {
            !e.fill.is_empty() || before.min_item(&p).is_none_or(|m| e.bin < m)
        })
    }

    /// No bin is wasteful with respect to the running inventory.
    pub fn is_thrifty(&self) -> bool {
        let p = self.params;
        self.steps()
            .all(|(_, e, after)| !is_wasteful(e.bin, e.fill, after, &p))
    }

    pub fn key_bin(&self) -> KeyBin {
        if self.initial.past_key() {
            return KeyBin::BeforeFirst;
        }
        self.steps()
            .position(|(_, _, after)| after.past_key())
            .map_or(KeyBin::NotReached, KeyBin::At)
    }

    /// Length of the front: the entries up to and including the key bin.
    pub fn front_len(&self) -> usize {
        match self.key_bin() {
            KeyBin::BeforeFirst => 0,
            KeyBin::At(i) => i + 1,
            KeyBin::NotReached => self.entries.len(),
        }
    }

    /// Thrifty, and every bin of the front holds one of the canonical fills.
    pub fn is_reasonable(&self) -> bool {
        if !self.is_thrifty() {
            return false;
        }
        let p = self.params;
        self.entries[..self.front_len()]
            .iter()
            .all(|e| entry_is_reasonable(e, &p))
    }

    pub fn to_file(&self) -> TraceFile {
        TraceFile {
            small_size: self.params.small(),
            initial_s: self.initial.small,
            initial_l: self.initial.large,
            entries: self
                .entries
                .iter()
                .map(|e| [e.bin, e.fill.small, e.fill.large])
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("trace serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<TraceFile>(text)?.into_trace()
    }
}

/// Bins below `S` must stay empty; larger bins must hold a canonical fill.
pub(crate) fn entry_is_reasonable(e: &Entry, p: &Params) -> bool {
    if e.bin < p.small() {
        return e.fill.is_empty();
    }
    reasonable_fills(e.bin, p).is_ok_and(|fs| fs.contains(&e.fill))
}

/// On-disk form of a trace:
/// `{"S": int, "initial_s": int, "initial_l": int, "entries": [[bin, num_s, num_l], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    #[serde(rename = "S")]
    pub small_size: u64,
    pub initial_s: u64,
    pub initial_l: u64,
    pub entries: Vec<[u64; 3]>,
}

impl TraceFile {
    pub fn params(&self) -> Result<Params> {
        Params::new(self.small_size)
    }

    pub fn bins(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e[0]).collect()
    }

    pub fn into_trace(self) -> Result<Trace> {
        let p = self.params()?;
        Trace::from_entries(
            p,
            Inventory::new(self.initial_s, self.initial_l),
            self.entries.iter().map(|e| (e[0], Fill::new(e[1], e[2]))),
        )
    }
}
