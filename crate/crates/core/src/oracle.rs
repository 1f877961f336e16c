//! Exact offline solvers.
//!
//! All solvers return `Ok(None)` when the bins cannot hold every item;
//! infeasibility is an answer, not an error. Errors are reserved for
//! malformed input and for instances beyond the size guards.
//!
//! [`opt_cost`] and [`max_reasonable_cost`] run a backward dynamic program
//! over `(bin index, small left, large left)`. Only thrifty fills are
//! considered as moves, which loses nothing for the minimum: any valid
//! packing can be turned into a thrifty one of no greater cost. The maximum
//! over reasonable packings additionally restricts front bins to the
//! canonical fills.

use crate::error::{Error, Result};
use crate::model::{is_wasteful, Fill, Inventory, Params, Trace};

/// Upper limit on `(s + 1) (l + 1)` for a cost-only table.
pub const MAX_LAYER_STATES: u128 = 1 << 25;
/// Upper limit on `n (s + 1) (l + 1)` when a witness packing is requested.
pub const MAX_WITNESS_STATES: u128 = 1 << 28;
/// Upper limit on the brute-force search space.
pub const MAX_SEARCH_SPACE: u128 = 10_000_000;

const NONE: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Moves {
    Thrifty,
    /// Canonical fills before the key bin, thrifty fills after.
    Reasonable,
}

/// Minimum cost of a valid packing of `s` small and `l` large items into
/// `sigma`, or `None` if no packing exists.
pub fn opt_cost(sigma: &[u64], s: u64, l: u64, p: &Params) -> Result<Option<u64>> {
    solve(sigma, s, l, p, Goal::Min, Moves::Thrifty, false).map(|r| r.map(|(c, _)| c))
}

/// An optimal packing. Among equal-cost choices, earlier bins prefer the
/// fill with more large items, then more small items.
pub fn opt_packing(sigma: &[u64], s: u64, l: u64, p: &Params) -> Result<Option<Trace>> {
    solve(sigma, s, l, p, Goal::Min, Moves::Thrifty, true).map(|r| r.and_then(|(_, t)| t))
}

/// Maximum cost of any reasonable packing.
pub fn max_reasonable_cost(sigma: &[u64], s: u64, l: u64, p: &Params) -> Result<Option<u64>> {
    solve(sigma, s, l, p, Goal::Max, Moves::Reasonable, false).map(|r| r.map(|(c, _)| c))
}

/// A reasonable packing of maximum cost, with the same tie-breaking as
/// [`opt_packing`].
pub fn max_reasonable_packing(sigma: &[u64], s: u64, l: u64, p: &Params) -> Result<Option<Trace>> {
    solve(sigma, s, l, p, Goal::Max, Moves::Reasonable, true).map(|r| r.and_then(|(_, t)| t))
}

const CANON_ONE_S: [Fill; 1] = [Fill::new(1, 0)];
const CANON_ONE_L: [Fill; 1] = [Fill::new(0, 1)];
const CANON_L_OR_2S: [Fill; 2] = [Fill::new(0, 1), Fill::new(2, 0)];
const CANON_LS: [Fill; 1] = [Fill::new(1, 1)];
const CANON_LS_OR_3S: [Fill; 2] = [Fill::new(1, 1), Fill::new(3, 0)];

fn canonical(bin: u64, p: &Params) -> &'static [Fill] {
    let (sz, lz) = (p.small(), p.large());
    if bin < sz {
        &[Fill::EMPTY]
    } else if bin < lz {
        &CANON_ONE_S
    } else if bin == lz {
        &CANON_ONE_L
    } else if bin < lz + sz {
        &CANON_L_OR_2S
    } else if bin == lz + sz {
        &CANON_LS
    } else {
        &CANON_LS_OR_3S
    }
}

/// At most two candidate fills, in descending preference order.
#[derive(Clone, Copy)]
struct Candidates {
    fills: [Fill; 2],
    len: usize,
}

impl Candidates {
    const NONE: Candidates = Candidates {
        fills: [Fill::EMPTY; 2],
        len: 0,
    };

    fn push(&mut self, f: Fill) {
        self.fills[self.len] = f;
        self.len += 1;
    }

    fn as_slice(&self) -> &[Fill] {
        &self.fills[..self.len]
    }
}

/// Closed form of the thrifty fills for a bin no larger than `M`, which
/// never holds two large items.
fn thrifty_candidates(bin: u64, inv: Inventory, p: &Params) -> Candidates {
    let (sz, lz) = (p.small(), p.large());
    let mut out = Candidates::NONE;
    if inv.large > 0 && bin >= lz {
        out.push(Fill::new(inv.small.min((bin - lz) / sz), 1));
    }
    let small = inv.small.min(bin / sz);
    if inv.large == 0 || bin - small * sz < lz {
        out.push(Fill::new(small, 0));
    }
    out
}

fn candidates(moves: Moves, bin: u64, inv: Inventory, p: &Params) -> Candidates {
    if moves == Moves::Reasonable && !inv.past_key() {
        let mut out = Candidates::NONE;
        for f in canonical(bin, p) {
            if inv
                .take(*f)
                .is_ok_and(|after| !is_wasteful(bin, *f, after, p))
            {
                out.push(*f);
            }
        }
        out
    } else {
        thrifty_candidates(bin, inv, p)
    }
}

fn solve(
    sigma: &[u64],
    s: u64,
    l: u64,
    p: &Params,
    goal: Goal,
    moves: Moves,
    witness: bool,
) -> Result<Option<(u64, Option<Trace>)>> {
    p.check_sequence(sigma)?;
    let width = l as usize + 1;
    let layer = (s as u128 + 1) * (l as u128 + 1);
    if layer > MAX_LAYER_STATES {
        return Err(Error::TableTooLarge {
            states: layer,
            max: MAX_LAYER_STATES,
        });
    }
    let n = sigma.len();
    let states = layer as usize;
    let mut choices: Vec<u8> = Vec::new();
    if witness {
        let total = layer * n as u128;
        if total > MAX_WITNESS_STATES {
            return Err(Error::TableTooLarge {
                states: total,
                max: MAX_WITNESS_STATES,
            });
        }
        choices = vec![0; total as usize];
    }

    // next[idx]: best cost for bins i+1.. with the state at idx; NONE if infeasible
    let mut next = vec![NONE; states];
    next[0] = 0;
    let mut cur = vec![NONE; states];
    for (i, &bin) in sigma.iter().enumerate().rev() {
        cur[0] = 0;
        for ss in 0..=s {
            for ll in 0..=l {
                let idx = ss as usize * width + ll as usize;
                if idx == 0 {
                    continue;
                }
                let cands = candidates(moves, bin, Inventory::new(ss, ll), p);
                let mut best = NONE;
                let mut best_k = 0u8;
                for (k, f) in cands.as_slice().iter().enumerate() {
                    let rest = next[idx - f.small as usize * width - f.large as usize];
                    if rest == NONE {
                        continue;
                    }
                    let val = rest + if f.is_empty() { 0 } else { bin };
                    let better = best == NONE
                        || match goal {
                            Goal::Min => val < best,
                            Goal::Max => val > best,
                        };
                    if better {
                        best = val;
                        best_k = k as u8;
                    }
                }
                cur[idx] = best;
                if witness {
                    choices[i * states + idx] = best_k;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }

    let root = s as usize * width + l as usize;
    let cost = next[root];
    if cost == NONE {
        return Ok(None);
    }
    if !witness {
        return Ok(Some((cost, None)));
    }
    let mut trace = Trace::new(*p, Inventory::new(s, l));
    for (i, &bin) in sigma.iter().enumerate() {
        let inv = trace.remaining();
        if inv.is_empty() {
            break;
        }
        let idx = inv.small as usize * width + inv.large as usize;
        let fill = candidates(moves, bin, inv, p).fills[choices[i * states + idx] as usize];
        trace.push(bin, fill)?;
    }
    debug_assert_eq!(trace.cost(), cost);
    Ok(Some((cost, Some(trace))))
}

/// Fills allowed by validity alone: any non-empty fill that fits, or the
/// empty fill when nothing fits.
fn valid_fills(bin: u64, inv: Inventory, p: &Params) -> Vec<Fill> {
    if !inv.fits_any(bin, p) {
        return vec![Fill::EMPTY];
    }
    let mut out = Vec::new();
    for large in (0..=inv.large.min(bin / p.large())).rev() {
        let room = bin - large * p.large();
        for small in (0..=inv.small.min(room / p.small())).rev() {
            if small + large > 0 {
                out.push(Fill::new(small, large));
            }
        }
    }
    out
}

/// Minimum cost by exhaustive search over every valid packing, thrifty or
/// not. Intended for cross-checking [`opt_cost`] on small instances.
pub fn opt_bruteforce(sigma: &[u64], s: u64, l: u64, p: &Params) -> Result<Option<u64>> {
    p.check_sequence(sigma)?;
    let initial = Inventory::new(s, l);
    let mut space: u128 = 1;
    for &bin in sigma {
        space = space.saturating_mul(valid_fills(bin, initial, p).len() as u128);
        if space > MAX_SEARCH_SPACE {
            return Err(Error::SearchSpaceTooLarge {
                size: space,
                max: MAX_SEARCH_SPACE,
            });
        }
    }

    fn dfs(sigma: &[u64], inv: Inventory, cost: u64, p: &Params, best: &mut Option<u64>) {
        if inv.is_empty() {
            *best = Some(best.map_or(cost, |b| b.min(cost)));
            return;
        }
        let Some((&bin, rest)) = sigma.split_first() else {
            return;
        };
        for f in valid_fills(bin, inv, p) {
            let add = if f.is_empty() { 0 } else { bin };
            let after = inv.take(f).expect("valid_fills respects the inventory");
            dfs(rest, after, cost + add, p, best);
        }
    }

    let mut best = None;
    dfs(sigma, initial, 0, p, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p10() -> Params {
        Params::new(10).unwrap()
    }

    #[test]
    fn opt_examples() {
        let p = p10();
        assert_eq!(opt_cost(&[10, 20], 2, 0, &p).unwrap(), Some(30));
        assert_eq!(opt_cost(&[20], 0, 1, &p).unwrap(), Some(20));
        assert_eq!(
            opt_cost(&[20, 20, 19, 19, 19, 19], 4, 2, &p).unwrap(),
            Some(78)
        );
        assert_eq!(opt_cost(&[20], 1, 1, &p).unwrap(), None);
        assert_eq!(opt_cost(&[], 0, 0, &p).unwrap(), Some(0));
        assert!(opt_cost(&[38], 1, 0, &p).is_err());
    }

    #[test]
    fn opt_witness_matches_cost() {
        let p = p10();
        let t = opt_packing(&[20, 20, 19, 19, 19, 19], 4, 2, &p)
            .unwrap()
            .unwrap();
        assert_eq!(t.cost(), 78);
        assert!(t.is_complete() && t.is_valid() && t.is_thrifty());
        assert_eq!(
            t.entries().iter().map(|e| e.fill).collect::<Vec<_>>(),
            vec![
                Fill::new(2, 0),
                Fill::new(2, 0),
                Fill::new(0, 1),
                Fill::new(0, 1)
            ]
        );
    }

    #[test]
    fn bruteforce_examples() {
        let p = p10();
        assert_eq!(opt_bruteforce(&[10, 20], 2, 0, &p).unwrap(), Some(30));
        assert_eq!(opt_bruteforce(&[19, 19], 2, 0, &p).unwrap(), Some(38));
        assert_eq!(opt_bruteforce(&[15, 19], 0, 1, &p).unwrap(), Some(19));
        assert_eq!(opt_bruteforce(&[9], 1, 0, &p).unwrap(), None);
    }

    #[test]
    fn bruteforce_refuses_huge_spaces() {
        let p = p10();
        let sigma = vec![37; 20];
        assert!(matches!(
            opt_bruteforce(&sigma, 20, 20, &p),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn reasonable_examples() {
        let p = p10();
        assert_eq!(
            max_reasonable_cost(&[20, 19, 19], 2, 1, &p).unwrap(),
            Some(58)
        );
        assert_eq!(max_reasonable_cost(&[19], 0, 1, &p).unwrap(), Some(19));
        let t = max_reasonable_packing(&[20, 19, 19], 2, 1, &p)
            .unwrap()
            .unwrap();
        assert_eq!(t.entries()[0].fill, Fill::new(0, 1));
        assert_eq!(t.cost(), 58);
    }

    #[test]
    fn reasonable_front_uses_canonical_fills() {
        // s=3, l=1: a 20-bin must take one L or two S, never one S
        let p = p10();
        let t = max_reasonable_packing(&[20, 37, 37], 3, 1, &p)
            .unwrap()
            .unwrap();
        assert!(t.is_reasonable());
        assert_eq!(t.entries()[0].fill, Fill::new(0, 1));
        assert_eq!(t.cost(), 20 + 37);
    }

    #[test]
    fn table_guard() {
        let p = p10();
        assert!(matches!(
            opt_cost(&[37], 1 << 13, 1 << 13, &p),
            Err(Error::TableTooLarge { .. })
        ));
    }

    fn instance() -> impl Strategy<Value = (Params, Vec<u64>, u64, u64)> {
        (2u64..5, 0u64..4, 0u64..4).prop_flat_map(|(small, s, l)| {
            let p = Params::new(small).unwrap();
            (
                Just(p),
                prop::collection::vec(1..=p.max_bin(), 0..7),
                Just(s),
                Just(l),
            )
        })
    }

    proptest! {
        #[test]
        fn closed_form_candidates_match_thrifty_fills(small in 2u64..20, bin_raw in 0u64..1000, s in 0u64..6, l in 0u64..6) {
            let p = Params::new(small).unwrap();
            let bin = 1 + bin_raw % p.max_bin();
            let inv = Inventory::new(s, l);
            prop_assume!(!inv.is_empty());
            let fast = thrifty_candidates(bin, inv, &p);
            let slow = crate::model::thrifty_fills(bin, inv, &p);
            prop_assert_eq!(fast.as_slice(), slow.as_slice());
        }

        #[test]
        fn dp_matches_bruteforce((p, sigma, s, l) in instance()) {
            prop_assert_eq!(opt_cost(&sigma, s, l, &p).unwrap(), opt_bruteforce(&sigma, s, l, &p).unwrap());
        }

        #[test]
        fn opt_at_least_total_size((p, sigma, s, l) in instance()) {
            if let Some(c) = opt_cost(&sigma, s, l, &p).unwrap() {
                prop_assert!(c >= s * p.small() + l * p.large());
            }
        }

        #[test]
        fn opt_monotone_in_items((p, sigma, s, l) in instance(), ds in 0u64..4, dl in 0u64..4) {
            let (s2, l2) = (s.saturating_sub(ds), l.saturating_sub(dl));
            if let Some(big) = opt_cost(&sigma, s, l, &p).unwrap() {
                let small = opt_cost(&sigma, s2, l2, &p).unwrap();
                prop_assert!(small.is_some_and(|c| c <= big));
            }
        }

        #[test]
        fn reasonable_max_on_one_size_equals_opt((p, sigma, s, _l) in instance()) {
            prop_assert_eq!(
                max_reasonable_cost(&sigma, s, 0, &p).unwrap(),
                opt_cost(&sigma, s, 0, &p).unwrap()
            );
        }

        #[test]
        fn witnesses_agree_with_values((p, sigma, s, l) in instance()) {
            let opt = opt_packing(&sigma, s, l, &p).unwrap();
            prop_assert_eq!(opt.as_ref().map(Trace::cost), opt_cost(&sigma, s, l, &p).unwrap());
            if let Some(t) = opt {
                prop_assert!(t.is_complete() && t.is_valid() && t.is_thrifty());
            }
            let r = max_reasonable_packing(&sigma, s, l, &p).unwrap();
            prop_assert_eq!(r.as_ref().map(Trace::cost), max_reasonable_cost(&sigma, s, l, &p).unwrap());
            if let Some(t) = r {
                prop_assert!(t.is_complete() && t.is_reasonable());
            }
        }
    }
}
