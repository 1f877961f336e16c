//! Bin sources and the online game loop.
//!
//! A game feeds bins to a [`Packer`] one at a time until it has placed every
//! item. Bins come from a [`BinSource`]: the adaptive lower-bound adversary,
//! a fixed script, or a seeded random stream. Once a scripted source runs
//! out, bins of the maximum size `M` follow until the packer is done.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::{Packer, Policy};
use crate::error::{Error, Result};
use crate::model::{classify_range, Fill, Inventory, Params, Range, Trace, TraceFile};
use crate::oracle::opt_cost;
use crate::ratio::{format_ratio, ratio, Ratio};

/// The four continuations of the adaptive adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Case {
    /// `2l <= s`, few double-S bins: S bins, then L bins.
    I1,
    /// `2l <= s`, many double-S bins: S bins, then M bins.
    I2,
    /// `2l > s`, few double-S bins: L bins and a single M bin.
    II1,
    /// `2l > s`, many double-S bins: S, L+S, L and M bins.
    II2,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::I1 => "I.1",
            Case::I2 => "I.2",
            Case::II1 => "II.1",
            Case::II2 => "II.2",
        }
    }

    /// The other continuation available after the same first batch.
    pub fn sibling(&self) -> Case {
        match self {
            Case::I1 => Case::I2,
            Case::I2 => Case::I1,
            Case::II1 => Case::II2,
            Case::II2 => Case::II1,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `l` bins of size `2S` when `2l <= s`, otherwise `floor(s/2)` of them.
/// Empty when either count is zero.
pub fn first_batch(s: u64, l: u64, p: &Params) -> Vec<u64> {
    if s == 0 || l == 0 {
        return Vec::new();
    }
    let len = if 2 * l <= s { l } else { s / 2 };
    vec![2 * p.small(); len as usize]
}

/// The continuation chosen from the observed number `k` of first-batch bins
/// that received two small items. In the second family the two published
/// conditions are exact complements, so trying the first one first decides
/// every `k`.
pub fn literal_case(s: u64, l: u64, k: u64) -> Option<Case> {
    if s == 0 || l == 0 {
        return None;
    }
    if 2 * l <= s {
        return Some(if 2 * k <= l { Case::I1 } else { Case::I2 });
    }
    let (s, l, k, half) = (s as i128, l as i128, k as i128, (s / 2) as i128);
    // k <= floor(s/2) - s/8 - l/4 + 1  or  k <= floor(s/2) - s/3 + 1
    let first = 8 * k <= 8 * half - s - 2 * l + 8;
    let second = 3 * k <= 3 * half - s + 3;
    Some(if first || second {
        Case::II1
    } else {
        Case::II2
    })
}

/// Bins following the first batch for the given case.
pub fn continuation(case: Case, s: u64, l: u64, k: u64, p: &Params) -> Vec<u64> {
    let (sz, lz, mz) = (p.small(), p.large(), p.max_bin());
    let (si, li, ki, half) = (s as i64, l as i64, k as i64, (s / 2) as i64);
    let count = |n: i64| n.max(0) as usize;
    let mut out = Vec::new();
    let mut put = |n: i64, size: u64| out.extend(std::iter::repeat_n(size, count(n)));
    match case {
        Case::I1 => {
            put(si - 2 * li, sz);
            put(2 * li, lz);
        }
        Case::I2 => {
            put(si, sz);
            put(li, mz);
        }
        Case::II1 => {
            put(si - 2 * half, sz);
            put(half - ki + li - 1, lz);
            put(1, mz);
        }
        Case::II2 => {
            put((si - 2 * ki).max(si - li + half), sz);
            put((2 * ki).min(li - half), lz + sz);
            put((li - half - 2 * ki).max(0), lz);
            put(ki, mz);
        }
    }
    out
}

pub trait BinSource {
    /// The next bin. `last` is what the packer put in the previous bin.
    fn next_bin(&mut self, last: Option<Fill>) -> u64;

    /// Number of bins the source is committed to before falling back on
    /// maximum-size bins; part of the non-termination guard.
    fn script_len(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    FirstBatch,
    Continuation,
    Drain,
}

/// The adaptive lower-bound adversary.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    params: Params,
    s: u64,
    l: u64,
    phase: Phase,
    batch: Vec<u64>,
    emitted: usize,
    double_s: u64,
    k_observed: Option<u64>,
    forced: Option<Case>,
    case: Option<Case>,
    remainder: VecDeque<u64>,
}

impl AdversaryState {
    pub fn new(params: Params, s: u64, l: u64) -> Self {
        let batch = first_batch(s, l, &params);
        let phase = if batch.is_empty() {
            Phase::Drain
        } else {
            Phase::FirstBatch
        };
        AdversaryState {
            params,
            s,
            l,
            phase,
            batch,
            emitted: 0,
            double_s: 0,
            k_observed: None,
            forced: None,
            case: None,
            remainder: VecDeque::new(),
        }
    }

    /// Plays `case` after the first batch regardless of the observed `k`.
    pub fn forcing(params: Params, s: u64, l: u64, case: Case) -> Self {
        AdversaryState {
            forced: Some(case),
            ..Self::new(params, s, l)
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn k_observed(&self) -> Option<u64> {
        self.k_observed
    }

    pub fn case(&self) -> Option<Case> {
        self.case
    }
}

impl BinSource for AdversaryState {
    fn next_bin(&mut self, last: Option<Fill>) -> u64 {
        if self.phase == Phase::FirstBatch {
            if self.emitted > 0 && last == Some(Fill::new(2, 0)) {
                self.double_s += 1;
            }
            if self.emitted < self.batch.len() {
                self.emitted += 1;
                return self.batch[self.emitted - 1];
            }
            let k = self.double_s;
            self.k_observed = Some(k);
            let case = self
                .forced
                .or_else(|| literal_case(self.s, self.l, k))
                .expect("a first batch exists only when both counts are positive");
            self.case = Some(case);
            self.remainder = continuation(case, self.s, self.l, k, &self.params).into();
            self.phase = Phase::Continuation;
        }
        if self.phase == Phase::Continuation {
            if let Some(bin) = self.remainder.pop_front() {
                return bin;
            }
            self.phase = Phase::Drain;
        }
        self.params.max_bin()
    }

    fn script_len(&self) -> usize {
        // generous cap on first batch plus any continuation
        self.batch.len() + 4 * (self.s + self.l) as usize
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedSource {
    bins: Vec<u64>,
    pos: usize,
    max_bin: u64,
}

impl ScriptedSource {
    pub fn new(bins: Vec<u64>, p: &Params) -> Self {
        ScriptedSource {
            bins,
            pos: 0,
            max_bin: p.max_bin(),
        }
    }
}

impl BinSource for ScriptedSource {
    fn next_bin(&mut self, _last: Option<Fill>) -> u64 {
        let bin = self.bins.get(self.pos).copied().unwrap_or(self.max_bin);
        self.pos += 1;
        bin
    }

    fn script_len(&self) -> usize {
        self.bins.len()
    }
}

/// Half uniform sizes in `[1, M]`, half drawn from the sizes where policies
/// differ: `S, L, 2S, 3S - 1, 3S, M`, each capped at `M`.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    params: Params,
}

impl RandomSource {
    pub fn new(seed: u64, params: Params) -> Self {
        RandomSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
            params,
        }
    }
}

impl BinSource for RandomSource {
    fn next_bin(&mut self, _last: Option<Fill>) -> u64 {
        let p = &self.params;
        if self.rng.gen_bool(0.5) {
            self.rng.gen_range(1..=p.max_bin())
        } else {
            let sz = p.small();
            let bin = *[sz, p.large(), 2 * sz, 3 * sz - 1, 3 * sz, p.max_bin()]
                .choose(&mut self.rng)
                .expect("non-empty");
            bin.min(p.max_bin())
        }
    }
}

/// Which bins a game is played against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Adversary {
    /// The adaptive lower-bound adversary. With `best_response`, both
    /// continuations are played out and the worse one for the packer kept.
    Adaptive {
        best_response: bool,
    },
    /// The fixed sequence of one of the four worked examples.
    Example(u8),
    Random {
        seed: u64,
    },
    Scripted(Vec<u64>),
}

impl Adversary {
    pub fn parse(name: &str, best_response: bool) -> Result<Self> {
        match name {
            "adaptive" | "theorem2" => Ok(Adversary::Adaptive { best_response }),
            _ => {
                let id = name
                    .strip_prefix("example")
                    .and_then(|d| d.parse::<u8>().ok())
                    .filter(|id| (1..=4).contains(id))
                    .ok_or_else(|| Error::UnknownAdversary(name.to_string()))?;
                Ok(Adversary::Example(id))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Adversary::Adaptive {
                best_response: false,
            } => "adaptive".into(),
            Adversary::Adaptive {
                best_response: true,
            } => "adaptive-best-response".into(),
            Adversary::Example(id) => format!("example{id}"),
            Adversary::Random { seed } => format!("random:{seed}"),
            Adversary::Scripted(_) => "scripted".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameResult {
    pub policy: Policy,
    pub alg_trace: Trace,
    pub sigma: Vec<u64>,
    pub alg_cost: u64,
    pub opt_cost: u64,
    pub ratio: Ratio,
    /// `max(0, alg_cost - M) / opt_cost`.
    pub adjusted_ratio: Ratio,
    pub case: Option<Case>,
    pub k_observed: Option<u64>,
}

#[derive(Serialize)]
struct GameReport<'a> {
    policy: String,
    adversary: &'a str,
    case: Option<&'static str>,
    k: Option<u64>,
    sigma: &'a [u64],
    alg_trace: TraceFile,
    alg_cost: u64,
    opt_cost: u64,
    ratio: String,
    adjusted_ratio: String,
    lower_bound: String,
}

impl GameResult {
    pub fn initial(&self) -> Inventory {
        self.alg_trace.initial()
    }

    pub fn to_json(&self, adversary: &str) -> String {
        let init = self.initial();
        let report = GameReport {
            policy: self.policy.id(),
            adversary,
            case: self.case.map(|c| c.name()),
            k: self.k_observed,
            sigma: &self.sigma,
            alg_trace: self.alg_trace.to_file(),
            alg_cost: self.alg_cost,
            opt_cost: self.opt_cost,
            ratio: format_ratio(&self.ratio),
            adjusted_ratio: format_ratio(&self.adjusted_ratio),
            lower_bound: format_ratio(&lower_bound_ratio(init.small, init.large)),
        };
        serde_json::to_string_pretty(&report).expect("report serialization cannot fail")
    }
}

/// Called after every bin with the packer state and the trace so far.
pub type Observer<'a> = dyn FnMut(&Packer, &Trace) + 'a;

/// Plays one game from a fresh packer.
pub fn run_game(
    policy: Policy,
    source: &mut dyn BinSource,
    s: u64,
    l: u64,
    p: &Params,
) -> Result<GameResult> {
    run_game_observed(policy.start(*p, s, l), source, p, &mut |_, _| {})
}

/// Plays one game with an already constructed packer, reporting every step.
pub fn run_game_observed(
    mut packer: Packer,
    source: &mut dyn BinSource,
    p: &Params,
    observer: &mut Observer<'_>,
) -> Result<GameResult> {
    let initial = packer.inventory();
    if initial.is_empty() {
        return Err(Error::EmptyInventory);
    }
    let guard = 16 * (initial.small + initial.large) as usize + source.script_len();
    let mut trace = Trace::new(*p, initial);
    let mut last = None;
    while !packer.inventory().is_empty() {
        if trace.len() >= guard {
            return Err(Error::NonTermination { bins: trace.len() });
        }
        let bin = source.next_bin(last);
        p.check_bin(bin)?;
        let fill = if packer.inventory().fits_any(bin, p) {
            packer.next_fill(bin)?
        } else {
            Fill::EMPTY
        };
        trace.push(bin, fill)?;
        last = Some(fill);
        observer(&packer, &trace);
    }
    finish(packer.policy(), trace, p, None, None)
}

fn finish(
    policy: Policy,
    trace: Trace,
    p: &Params,
    case: Option<Case>,
    k: Option<u64>,
) -> Result<GameResult> {
    let initial = trace.initial();
    let sigma = trace.bins();
    let opt = opt_cost(&sigma, initial.small, initial.large, p)?
        .expect("the packer's own packing witnesses feasibility");
    let alg = trace.cost();
    Ok(GameResult {
        policy,
        sigma,
        alg_cost: alg,
        opt_cost: opt,
        ratio: ratio(alg, opt),
        adjusted_ratio: ratio(alg.saturating_sub(p.max_bin()), opt),
        alg_trace: trace,
        case,
        k_observed: k,
    })
}

/// Plays `packer` against `adversary`.
pub fn play_observed(
    packer: Packer,
    adversary: &Adversary,
    p: &Params,
    observer: &mut Observer<'_>,
) -> Result<GameResult> {
    let init = packer.inventory();
    let (s, l) = (init.small, init.large);
    match adversary {
        Adversary::Adaptive { best_response } => {
            let mut literal = AdversaryState::new(*p, s, l);
            let result = run_game_observed(packer.clone(), &mut literal, p, observer)?;
            let result = GameResult {
                case: literal.case(),
                k_observed: literal.k_observed(),
                ..result
            };
            let Some(case) = literal.case().filter(|_| *best_response) else {
                return Ok(result);
            };
            let mut other = AdversaryState::forcing(*p, s, l, case.sibling());
            let alt = run_game_observed(packer, &mut other, p, observer)?;
            let alt = GameResult {
                case: other.case(),
                k_observed: other.k_observed(),
                ..alt
            };
            Ok(if alt.ratio > result.ratio {
                alt
            } else {
                result
            })
        }
        Adversary::Example(id) => {
            let bins = example_sequence(*id, s, l, p)?;
            run_game_observed(packer, &mut ScriptedSource::new(bins, p), p, observer)
        }
        Adversary::Random { seed } => {
            run_game_observed(packer, &mut RandomSource::new(*seed, *p), p, observer)
        }
        Adversary::Scripted(bins) => {
            p.check_sequence(bins)?;
            run_game_observed(
                packer,
                &mut ScriptedSource::new(bins.clone(), p),
                p,
                observer,
            )
        }
    }
}

pub fn play(
    policy: Policy,
    adversary: &Adversary,
    s: u64,
    l: u64,
    p: &Params,
) -> Result<GameResult> {
    play_observed(policy.start(*p, s, l), adversary, p, &mut |_, _| {})
}

/// The bin sequences of the four worked examples of non-optimal policies.
pub fn example_sequence(id: u8, s: u64, l: u64, p: &Params) -> Result<Vec<u64>> {
    let fail = |reason| Err(Error::ExamplePrecondition { id, s, l, reason });
    let (sz, lz, mz) = (p.small(), p.large(), p.max_bin());
    let rep = |n: u64, size: u64| std::iter::repeat_n(size, n as usize);
    let seq: Vec<u64> = match id {
        1 | 2 if s != 2 * l || l == 0 => return fail("requires s = 2l > 0"),
        1 => rep(l, 2 * sz).chain(rep(s, sz)).chain(rep(l, mz)).collect(),
        2 => rep(l, 2 * sz)
            .chain(rep(s - 1, lz))
            .chain(rep(1, mz))
            .collect(),
        3 if 2 * s != 3 * l || l == 0 || !l.is_multiple_of(2) => {
            return fail("requires 2s = 3l with l even and positive")
        }
        3 => rep(l, 2 * sz)
            .chain(rep(s, sz))
            .chain(rep(l / 2, mz))
            .collect(),
        4 if 3 * s != 2 * l || l == 0 || !l.is_multiple_of(3) => {
            return fail("requires 3s = 2l with l a positive multiple of 3")
        }
        4 => rep(l, 2 * sz)
            .chain(rep(s, sz))
            .chain(rep(l / 3, mz))
            .collect(),
        _ => return fail("example ids run from 1 to 4"),
    };
    Ok(seq)
}

/// The best competitive ratio achievable for initial counts `(s, l)`, as
/// `S` grows.
pub fn lower_bound_ratio(s: u64, l: u64) -> Ratio {
    if s == 0 || l == 0 {
        return Ratio::from_integer(1);
    }
    match classify_range(s, l) {
        Range::LowL => Ratio::from_integer(1) + ratio(l, 2 * l + s),
        Range::MidL => ratio(5, 4),
        Range::HighL => Ratio::from_integer(1) + ratio(2 * s, 3 * s + 6 * l),
    }
}
