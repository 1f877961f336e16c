//! Inequalities relating reasonable and optimal packings, evaluated on
//! concrete instances.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{BinSource, RandomSource};
use crate::error::Result;
use crate::model::{entry_is_reasonable, Inventory, Params, Trace};
use crate::oracle::{max_reasonable_cost, opt_cost};

/// `lhs <= rhs`, with both sides kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub lhs: i128,
    pub rhs: i128,
}

impl Comparison {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

fn compare(lhs: Option<u64>, base: Option<u64>, extra: i128) -> Option<Comparison> {
    Some(Comparison {
        lhs: lhs? as i128,
        rhs: base? as i128 + extra,
    })
}

/// `R(sigma, s, l) <= OPT(sigma, s + 2l, 0) + l (2S - 3)`.
/// `None` when either side is infeasible.
pub fn reasonable_vs_small_only(
    sigma: &[u64],
    s: u64,
    l: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    let lhs = max_reasonable_cost(sigma, s, l, p)?;
    let base = opt_cost(sigma, s + 2 * l, 0, p)?;
    Ok(compare(lhs, base, l as i128 * (2 * p.small() as i128 - 3)))
}

/// The same bound plus `L - 1` whenever `l > 0`, which covers a thrifty
/// packing that runs out of small items inside a bin it fills with small
/// items only.
pub fn reasonable_vs_small_only_with_slack(
    sigma: &[u64],
    s: u64,
    l: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    let slack = if l > 0 { p.large() as i128 - 1 } else { 0 };
    Ok(
        reasonable_vs_small_only(sigma, s, l, p)?.map(|c| Comparison {
            lhs: c.lhs,
            rhs: c.rhs + slack,
        }),
    )
}

/// With `k = s/2 + l` (`s` even):
/// `R(sigma, s, l) <= OPT(sigma, 0, k) + (s + l - k - 1) L + M`.
pub fn reasonable_vs_large_only(
    sigma: &[u64],
    s: u64,
    l: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    assert!(s.is_multiple_of(2), "needs 2k = s + 2l");
    let k = s / 2 + l;
    let lhs = max_reasonable_cost(sigma, s, l, p)?;
    let base = opt_cost(sigma, 0, k, p)?;
    let extra = (s as i128 + l as i128 - k as i128 - 1) * p.large() as i128 + p.max_bin() as i128;
    Ok(compare(lhs, base, extra))
}

/// With `k >= s + 2l`:
/// `R(sigma, k, 0) <= OPT(sigma, s, l) + (k - s - l - 1) L + M`.
pub fn small_only_vs_opt(
    sigma: &[u64],
    s: u64,
    l: u64,
    k: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    assert!(k >= s + 2 * l);
    small_only_bound_with_lhs_count(sigma, s, l, k, k, p)
}

/// The same bound with `s + 2l` small items on the left instead of `k`.
pub fn small_only_vs_opt_tight(
    sigma: &[u64],
    s: u64,
    l: u64,
    k: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    assert!(k >= s + 2 * l);
    small_only_bound_with_lhs_count(sigma, s, l, k, s + 2 * l, p)
}

fn small_only_bound_with_lhs_count(
    sigma: &[u64],
    s: u64,
    l: u64,
    k: u64,
    lhs_small: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    let lhs = max_reasonable_cost(sigma, lhs_small, 0, p)?;
    let base = opt_cost(sigma, s, l, p)?;
    let extra = (k as i128 - s as i128 - l as i128 - 1) * p.large() as i128 + p.max_bin() as i128;
    Ok(compare(lhs, base, extra))
}

/// With `2k >= s + 2l`:
/// `R(sigma, 0, k) <= OPT(sigma, s, l) + min{0, l - s} S + (k - l) M`.
pub fn large_only_vs_opt(
    sigma: &[u64],
    s: u64,
    l: u64,
    k: u64,
    p: &Params,
) -> Result<Option<Comparison>> {
    assert!(2 * k >= s + 2 * l);
    let lhs = max_reasonable_cost(sigma, 0, k, p)?;
    let base = opt_cost(sigma, s, l, p)?;
    let extra = (l as i128 - s as i128).min(0) * p.small() as i128
        + (k as i128 - l as i128) * p.max_bin() as i128;
    Ok(compare(lhs, base, extra))
}

/// Index of the first bin where two reasonable packings of the same
/// sequence break the `small + 2 large` bookkeeping: while both hold both
/// item sizes, a bin inside either front must carry a canonical fill and
/// the remaining weights must agree after it. Comparison ends once either
/// packing runs out of an item size, or leaves its front with a
/// non-canonical fill.
pub fn weight_mismatch(a: &Trace, b: &Trace) -> Option<usize> {
    let p = *a.params();
    let both_types = |inv: Inventory| inv.small > 0 && inv.large > 0;
    for (i, ((before_a, ea, after_a), (before_b, eb, after_b))) in
        a.steps().zip(b.steps()).enumerate()
    {
        debug_assert_eq!(ea.bin, eb.bin);
        if !both_types(before_a) || !both_types(before_b) {
            return None;
        }
        let canon_a = entry_is_reasonable(ea, &p);
        let canon_b = entry_is_reasonable(eb, &p);
        if (!canon_a && !before_a.past_key()) || (!canon_b && !before_b.past_key()) {
            return Some(i);
        }
        if !canon_a || !canon_b {
            return None;
        }
        if after_a.weight() != after_b.weight() {
            return Some(i);
        }
    }
    None
}

/// Random sequence of `1..=max_len` bins from the mixed distribution used
/// for random games.
pub fn random_sequence(rng: &mut ChaCha8Rng, p: &Params, max_len: usize) -> Vec<u64> {
    let len = rng.gen_range(1..=max_len);
    let mut src = RandomSource::new(rng.gen(), *p);
    (0..len).map(|_| src.next_bin(None)).collect()
}
