//! Seeded property checks over every module, reported per property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::adversary::{lower_bound_ratio, play, play_observed, Adversary};
use crate::algorithms::{Invariant, Packer, Policy, TwoPhaseState, Variant};
use crate::error::Result;
use crate::model::{is_wasteful, reasonable_fills, thrifty_fills, Fill, Inventory, Params, Trace};
use crate::oracle::{max_reasonable_cost, max_reasonable_packing, opt_bruteforce, opt_cost};
use crate::ratio::{format_ratio, Ratio};

use super::properties::{
    large_only_vs_opt, random_sequence, reasonable_vs_large_only, reasonable_vs_small_only,
    reasonable_vs_small_only_with_slack, small_only_vs_opt, small_only_vs_opt_tight,
    weight_mismatch, Comparison,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: u64,
    /// Run the 2-Phase-Packer suites with `UseLs` negated.
    pub flip_use_ls: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            trials: 1000,
            flip_use_ls: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub checked: u64,
    pub skipped: u64,
    pub passed: bool,
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub properties: Vec<PropertyReport>,
}

impl Report {
    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyReport> {
        self.properties.iter().filter(|p| !p.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

struct Tally {
    name: String,
    checked: u64,
    skipped: u64,
    counterexample: Option<Value>,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            checked: 0,
            skipped: 0,
            counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.checked += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }

    fn finish(self) -> PropertyReport {
        PropertyReport {
            passed: self.counterexample.is_none(),
            name: self.name,
            checked: self.checked,
            skipped: self.skipped,
            counterexample: self.counterexample,
        }
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn pick_params(rng: &mut ChaCha8Rng, sizes: &[u64]) -> Params {
    Params::new(sizes[rng.gen_range(0..sizes.len())]).expect("fixed sizes are valid")
}

pub fn verify(opts: &VerifyOptions) -> Result<Report> {
    let mut properties = Vec::new();
    if opts.trials > 0 {
        properties.extend(model_suite(opts));
        properties.extend(oracle_suite(opts)?);
        properties.extend(bound_suite(opts)?);
        properties.extend(two_phase_suite(opts)?);
        properties.extend(game_suite(opts)?);
    }
    Ok(Report {
        seed: opts.seed,
        trials: opts.trials,
        passed: properties.iter().all(|p| p.passed),
        properties,
    })
}

fn model_suite(opts: &VerifyOptions) -> Vec<PropertyReport> {
    let mut rng = rng_for(opts.seed, 1);
    let mut thrifty = Tally::new("thrifty-fills-match-definition");
    let mut subset = Tally::new("reasonable-fills-are-thrifty");
    let mut chain = Tally::new("reasonable-implies-thrifty-implies-valid");
    let mut cost = Tally::new("complete-valid-cost-at-least-item-total");
    for _ in 0..opts.trials {
        let p = pick_params(&mut rng, &[2, 3, 4, 10]);
        let bin = rng.gen_range(1..=p.max_bin());
        let inv = Inventory::new(rng.gen_range(0..6), rng.gen_range(0..6));

        let mut by_definition = Vec::new();
        for large in (0..=inv.large).rev() {
            for small in (0..=inv.small).rev() {
                let f = Fill::new(small, large);
                if f.size(&p) > bin {
                    continue;
                }
                let after = inv.take(f).expect("bounded by inventory");
                if !is_wasteful(bin, f, after, &p) {
                    by_definition.push(f);
                }
            }
        }
        let fast = thrifty_fills(bin, inv, &p);
        thrifty.record(fast == by_definition, || {
            json!({"S": p.small(), "bin": bin, "inventory": [inv.small, inv.large],
                   "closed_form": fmt_fills(&fast), "definition": fmt_fills(&by_definition)})
        });

        if bin >= p.small() {
            let plenty = Inventory::new(3 + inv.small, 1 + inv.large);
            let reasonable = reasonable_fills(bin, &p).expect("bin in range");
            let all = thrifty_fills(bin, plenty, &p);
            subset.record(reasonable.iter().all(|f| all.contains(f)), || {
                json!({"S": p.small(), "bin": bin, "reasonable": fmt_fills(&reasonable), "thrifty": fmt_fills(&all)})
            });
        }

        let trace = random_trace(&mut rng, &p);
        let (r, t, v) = (trace.is_reasonable(), trace.is_thrifty(), trace.is_valid());
        chain.record((!r || t) && (!t || v), || json!({"trace": trace.to_file()}));
        if trace.is_complete() && v {
            let total = trace.initial().small * p.small() + trace.initial().large * p.large();
            cost.record(trace.cost() >= total, || json!({"trace": trace.to_file()}));
        } else {
            cost.skipped += 1;
        }
    }
    vec![
        thrifty.finish(),
        subset.finish(),
        chain.finish(),
        cost.finish(),
    ]
}

fn fmt_fills(fills: &[Fill]) -> Vec<String> {
    fills.iter().map(Fill::to_string).collect()
}

/// A trace whose fills are drawn uniformly from everything that fits.
fn random_trace(rng: &mut ChaCha8Rng, p: &Params) -> Trace {
    let mut trace = Trace::new(*p, Inventory::new(rng.gen_range(0..5), rng.gen_range(0..4)));
    for _ in 0..rng.gen_range(0..10) {
        let inv = trace.remaining();
        if inv.is_empty() {
            break;
        }
        let bin = rng.gen_range(1..=p.max_bin());
        let mut options = Vec::new();
        for large in 0..=inv.large {
            for small in 0..=inv.small {
                let f = Fill::new(small, large);
                if f.size(p) <= bin {
                    options.push(f);
                }
            }
        }
        let f = options[rng.gen_range(0..options.len())];
        trace.push(bin, f).expect("fill chosen to fit");
    }
    trace
}

fn oracle_suite(opts: &VerifyOptions) -> Result<Vec<PropertyReport>> {
    let mut rng = rng_for(opts.seed, 2);
    let mut equal = Tally::new("opt-dp-equals-bruteforce");
    let mut lower = Tally::new("opt-at-least-item-total");
    let mut mono = Tally::new("opt-monotone-in-items");
    let mut one_size = Tally::new("reasonable-max-equals-opt-for-one-size");
    for _ in 0..opts.trials {
        let p = pick_params(&mut rng, &[2, 3, 4, 10]);
        let (s, l) = (rng.gen_range(0..=4), rng.gen_range(0..=4));
        let len = rng.gen_range(0..=8);
        let sigma: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=p.max_bin())).collect();
        let witness = || json!({"S": p.small(), "s": s, "l": l, "sigma": sigma});

        let dp = opt_cost(&sigma, s, l, &p)?;
        match opt_bruteforce(&sigma, s, l, &p) {
            Ok(bf) => equal.record(
                dp == bf,
                || json!({"instance": witness(), "dp": dp, "bruteforce": bf}),
            ),
            Err(_) => equal.skipped += 1,
        }
        match dp {
            Some(c) => lower.record(c >= s * p.small() + l * p.large(), witness),
            None => lower.skipped += 1,
        }
        let (s2, l2) = (rng.gen_range(0..=s), rng.gen_range(0..=l));
        match dp {
            Some(c) => {
                let smaller = opt_cost(&sigma, s2, l2, &p)?;
                mono.record(smaller.is_some_and(|c2| c2 <= c), || {
                    json!({"instance": witness(), "fewer": [s2, l2], "opt": c, "opt_fewer": smaller})
                });
            }
            None => mono.skipped += 1,
        }
        let r = max_reasonable_cost(&sigma, s, 0, &p)?;
        let o = opt_cost(&sigma, s, 0, &p)?;
        one_size.record(r == o, || json!({"instance": witness(), "r": r, "opt": o}));
    }
    Ok(vec![
        equal.finish(),
        lower.finish(),
        mono.finish(),
        one_size.finish(),
    ])
}

/// Draws instances until `trials` of them are feasible on both sides.
fn bound_tally(
    name: &str,
    opts: &VerifyOptions,
    salt: u64,
    mut draw: impl FnMut(&mut ChaCha8Rng, &[u64], &Params) -> Result<(Option<Comparison>, Value)>,
) -> Result<PropertyReport> {
    let mut rng = rng_for(opts.seed, salt);
    let mut tally = Tally::new(name);
    let max_attempts = opts.trials.saturating_mul(200);
    let mut attempts = 0;
    while tally.checked < opts.trials && attempts < max_attempts {
        attempts += 1;
        let p = pick_params(&mut rng, &[3, 10]);
        let sigma = random_sequence(&mut rng, &p, 10);
        let (cmp, instance) = draw(&mut rng, &sigma, &p)?;
        match cmp {
            Some(c) => tally.record(c.holds(), || {
                json!({"S": p.small(), "sigma": sigma, "instance": instance, "lhs": c.lhs, "rhs": c.rhs})
            }),
            None => tally.skipped += 1,
        }
    }
    if tally.checked < opts.trials && tally.counterexample.is_none() {
        tally.counterexample =
            Some(json!({"reason": "too few feasible instances", "checked": tally.checked}));
    }
    Ok(tally.finish())
}

fn bound_suite(opts: &VerifyOptions) -> Result<Vec<PropertyReport>> {
    let small_only_report =
        bound_tally("reasonable-vs-small-only-opt", opts, 10, |rng, sigma, p| {
            let (s, l) = (rng.gen_range(0..=6), rng.gen_range(0..=3));
            Ok((
                reasonable_vs_small_only(sigma, s, l, p)?,
                json!({"s": s, "l": l}),
            ))
        })?;
    let small_only_slack_report = bound_tally(
        "reasonable-vs-small-only-opt-with-slack",
        opts,
        15,
        |rng, sigma, p| {
            let (s, l) = (rng.gen_range(0..=6), rng.gen_range(0..=3));
            Ok((
                reasonable_vs_small_only_with_slack(sigma, s, l, p)?,
                json!({"s": s, "l": l}),
            ))
        },
    )?;
    let large_only_report =
        bound_tally("reasonable-vs-large-only-opt", opts, 11, |rng, sigma, p| {
            let s = 2 * rng.gen_range(0..=3);
            let l = rng.gen_range(0..=(6 - s / 2));
            Ok((
                reasonable_vs_large_only(sigma, s, l, p)?,
                json!({"s": s, "l": l, "k": s / 2 + l}),
            ))
        })?;
    let small_vs_opt_report =
        bound_tally("small-only-reasonable-vs-opt", opts, 12, |rng, sigma, p| {
            let l = rng.gen_range(0..=3);
            let s = rng.gen_range(0..=(6 - 2 * l));
            let k = rng.gen_range(s + 2 * l..=6);
            Ok((
                small_only_vs_opt(sigma, s, l, k, p)?,
                json!({"s": s, "l": l, "k": k}),
            ))
        })?;
    let small_vs_opt_tight_report = bound_tally(
        "small-only-reasonable-vs-opt-tight",
        opts,
        13,
        |rng, sigma, p| {
            let l = rng.gen_range(0..=3);
            let s = rng.gen_range(0..=(6 - 2 * l));
            let k = rng.gen_range(s + 2 * l..=6);
            Ok((
                small_only_vs_opt_tight(sigma, s, l, k, p)?,
                json!({"s": s, "l": l, "k": k}),
            ))
        },
    )?;
    let large_vs_opt_report =
        bound_tally("large-only-reasonable-vs-opt", opts, 14, |rng, sigma, p| {
            let (s, l): (u64, u64) = (rng.gen_range(0..=4), rng.gen_range(0..=3));
            let min_k = (s + 2 * l).div_ceil(2);
            let k = rng.gen_range(min_k..=min_k + 2);
            Ok((
                large_only_vs_opt(sigma, s, l, k, p)?,
                json!({"s": s, "l": l, "k": k}),
            ))
        })?;
    Ok(vec![
        small_only_report,
        small_only_slack_report,
        large_only_report,
        small_vs_opt_report,
        small_vs_opt_tight_report,
        large_vs_opt_report,
    ])
}

fn two_phase_packer(p: Params, s: u64, l: u64, opts: &VerifyOptions) -> Packer {
    let variant = if opts.flip_use_ls {
        Variant::FlippedUseLs
    } else {
        Variant::Standard
    };
    TwoPhaseState::with_variant(p, s, l, variant).into()
}

fn two_phase_suite(opts: &VerifyOptions) -> Result<Vec<PropertyReport>> {
    let mut rng = rng_for(opts.seed, 3);
    let mut tallies: Vec<(Invariant, Tally)> = Invariant::ALL
        .iter()
        .map(|inv| (*inv, Tally::new(inv.name())))
        .collect();
    let mut reasonable = Tally::new("two-phase-traces-reasonable");
    let mut deterministic = Tally::new("two-phase-deterministic");
    let mut bookkeeping = Tally::new("two-phase-item-counts-match-inventory");
    let mut weights = Tally::new("reasonable-weight-equality");
    let mut bound = Tally::new("two-phase-adjusted-ratio-within-lower-bound");

    for trial in 0..opts.trials {
        let p = pick_params(&mut rng, &[2, 3, 4, 10]);
        let n = rng.gen_range(1..=40);
        let s = rng.gen_range(0..=n);
        let l = n - s;
        let adversary = if trial % 4 == 3 {
            Adversary::Adaptive {
                best_response: trial % 8 == 7,
            }
        } else {
            Adversary::Random { seed: rng.gen() }
        };
        let instance = || json!({"S": p.small(), "s": s, "l": l, "adversary": adversary.name()});

        let mut observe = |packer: &Packer, trace: &Trace| {
            let Some(st) = packer.as_two_phase() else {
                return;
            };
            for (inv, tally) in tallies.iter_mut() {
                if inv.applies_to(st.range()) {
                    tally.record(inv.holds(st), || {
                        json!({"instance": instance(), "range": st.range().tag(),
                               "sigma_prefix": trace.bins(), "counters": st.counters()})
                    });
                }
            }
            let c = st.counters();
            let used = (c.count_s, c.count_l);
            let removed = (
                trace.initial().small - trace.remaining().small,
                trace.initial().large - trace.remaining().large,
            );
            bookkeeping.record(
                used == removed,
                || json!({"instance": instance(), "counters": c}),
            );
        };
        let game = play_observed(
            two_phase_packer(p, s, l, opts),
            &adversary,
            &p,
            &mut observe,
        )?;
        let again = play_observed(
            two_phase_packer(p, s, l, opts),
            &adversary,
            &p,
            &mut |_, _| {},
        )?;
        deterministic.record(game == again, instance);
        reasonable.record(
            game.alg_trace.is_reasonable(),
            || json!({"trace": game.alg_trace.to_file()}),
        );
        let lb = lower_bound_ratio(s, l);
        bound.record(game.adjusted_ratio <= lb, || {
            json!({"instance": instance(), "sigma": game.sigma, "adjusted_ratio": format_ratio(&game.adjusted_ratio),
                   "lower_bound": format_ratio(&lb)})
        });

        match max_reasonable_packing(&game.sigma, s, l, &p)? {
            Some(witness) => {
                let mismatch = weight_mismatch(&game.alg_trace, &witness);
                weights.record(mismatch.is_none(), || {
                    json!({"instance": instance(), "bin_index": mismatch, "two_phase": game.alg_trace.to_file(),
                           "witness": witness.to_file()})
                });
            }
            None => weights.skipped += 1,
        }
    }
    let mut out: Vec<PropertyReport> = tallies.into_iter().map(|(_, t)| t.finish()).collect();
    out.extend([
        reasonable.finish(),
        deterministic.finish(),
        bookkeeping.finish(),
        weights.finish(),
        bound.finish(),
    ]);
    Ok(out)
}

fn game_suite(opts: &VerifyOptions) -> Result<Vec<PropertyReport>> {
    let mut rng = rng_for(opts.seed, 4);
    let policies = [
        Policy::AlwaysS,
        Policy::AlwaysL,
        Policy::RatioLtoS { numer: 1, denom: 1 },
        Policy::RatioLtoS { numer: 2, denom: 1 },
        Policy::TwoPhase,
    ];
    let mut sane = Tally::new("game-ratio-at-least-one-and-adjusted-below-ratio");
    let mut baseline_reasonable = Tally::new("baseline-traces-reasonable");
    for trial in 0..opts.trials {
        let p = pick_params(&mut rng, &[2, 3, 4, 10]);
        let policy = policies[trial as usize % policies.len()];
        let (s, l) = (rng.gen_range(0..=20), rng.gen_range(0..=20));
        if s + l == 0 {
            sane.skipped += 1;
            continue;
        }
        let adversary = if rng.gen_bool(0.5) {
            Adversary::Adaptive {
                best_response: rng.gen(),
            }
        } else {
            Adversary::Random { seed: rng.gen() }
        };
        let g = play(policy, &adversary, s, l, &p)?;
        let one = Ratio::from_integer(1);
        sane.record(g.ratio >= one && g.adjusted_ratio <= g.ratio && g.alg_cost >= g.opt_cost, || {
            json!({"S": p.small(), "s": s, "l": l, "policy": policy.id(), "adversary": adversary.name(), "sigma": g.sigma})
        });
        baseline_reasonable.record(
            g.alg_trace.is_reasonable(),
            || json!({"policy": policy.id(), "trace": g.alg_trace.to_file()}),
        );
    }
    Ok(vec![sane.finish(), baseline_reasonable.finish()])
}
