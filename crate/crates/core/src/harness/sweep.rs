//! Parameter sweeps and the competitive-ratio curve.

use std::fmt::Write as _;
use std::path::Path;

use crate::adversary::{lower_bound_ratio, play, Adversary, GameResult};
use crate::algorithms::Policy;
use crate::error::{Error, Result};
use crate::model::{classify_range, Params, Range};
use crate::ratio::{format_ratio, to_f64, Ratio};

use super::config::{cell_for, AdversaryMode, SweepConfig};

pub const CSV_HEADER: &str =
    "S,s,l,policy,alg_cost,opt_cost,ratio,adjusted_ratio,lower_bound,range";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub small: u64,
    pub s: u64,
    pub l: u64,
    pub policy: Policy,
    /// `None` when the cell cannot be played (no items, or an example whose
    /// shape does not fit the counts).
    pub game: Option<GameResult>,
    pub lower_bound: Ratio,
    pub range: Range,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        let (alg, opt, ratio, adjusted) = match &self.game {
            Some(g) => (
                g.alg_cost.to_string(),
                g.opt_cost.to_string(),
                format_ratio(&g.ratio),
                format_ratio(&g.adjusted_ratio),
            ),
            None => {
                let flag = || "infeasible".to_string();
                (flag(), flag(), flag(), flag())
            }
        };
        format!(
            "{},{},{},{},{alg},{opt},{ratio},{adjusted},{},{}",
            self.small,
            self.s,
            self.l,
            self.policy,
            format_ratio(&self.lower_bound),
            self.range.tag()
        )
    }
}

/// Mixes the sweep seed with the cell coordinates so every cell draws an
/// independent, reproducible stream.
fn cell_seed(seed: u64, small: u64, s: u64, l: u64, trial: u64) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in [small, s, l, trial] {
        h = (h ^ v).wrapping_mul(0x0100_0000_01b3).rotate_left(29);
    }
    h
}

fn play_cell(
    cfg: &SweepConfig,
    policy: Policy,
    s: u64,
    l: u64,
    p: &Params,
) -> Result<Option<GameResult>> {
    if s + l == 0 {
        return Ok(None);
    }
    match &cfg.adversary {
        AdversaryMode::Fixed(adv) => match play(policy, adv, s, l, p) {
            Ok(g) => Ok(Some(g)),
            Err(Error::ExamplePrecondition { .. }) => Ok(None),
            Err(e) => Err(e),
        },
        AdversaryMode::Random => {
            let mut worst: Option<GameResult> = None;
            for trial in 0..cfg.trials {
                let seed = cell_seed(cfg.seed, p.small(), s, l, trial);
                let g = play(policy, &Adversary::Random { seed }, s, l, p)?;
                if worst
                    .as_ref()
                    .is_none_or(|w| g.adjusted_ratio > w.adjusted_ratio)
                {
                    worst = Some(g);
                }
            }
            Ok(worst)
        }
    }
}

/// One row per `(S, s, l, policy)`, ordered by those keys.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for p in &cfg.params {
        for &(s, l) in &cfg.cells {
            for &policy in &cfg.policies {
                rows.push(SweepRow {
                    small: p.small(),
                    s,
                    l,
                    policy,
                    game: play_cell(cfg, policy, s, l, p)?,
                    lower_bound: lower_bound_ratio(s, l),
                    range: classify_range(s, l),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.small, a.s, a.l, a.policy.id()).cmp(&(b.small, b.s, b.l, b.policy.id()))
    });
    Ok(rows)
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRow {
    pub l_over_s: Ratio,
    pub s: u64,
    pub l: u64,
    pub adjusted_ratio: Ratio,
    pub lower_bound: Ratio,
}

/// Number of small items used to realise every `l/s` grid point.
pub const CURVE_DENOMINATOR: u64 = 240;

/// 2-Phase-Packer against the best-response adaptive adversary for
/// `l/s = step, 2 step, ...` up to 2.
pub fn ratio_curve(p: &Params, step: Ratio) -> Result<Vec<CurveRow>> {
    if step <= Ratio::from_integer(0) {
        return Err(Error::Config("curve step must be positive".into()));
    }
    let adversary = Adversary::Adaptive {
        best_response: true,
    };
    let mut rows = Vec::new();
    let mut x = step;
    while x <= Ratio::from_integer(2) {
        let (s, l) = cell_for(x, CURVE_DENOMINATOR)?;
        let game = play(Policy::TwoPhase, &adversary, s, l, p)?;
        rows.push(CurveRow {
            l_over_s: x,
            s,
            l,
            adjusted_ratio: game.adjusted_ratio,
            lower_bound: lower_bound_ratio(s, l),
        });
        x += step;
    }
    Ok(rows)
}

pub fn curve_to_text(p: &Params, rows: &[CurveRow]) -> String {
    let mut out = format!(
        "# S={} s={} policy=two-phase adversary=adaptive-best-response\nl_over_s,adjusted_ratio,lower_bound\n",
        p.small(),
        CURVE_DENOMINATOR
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:.4},{:.9},{:.9}",
            to_f64(&r.l_over_s),
            to_f64(&r.adjusted_ratio),
            to_f64(&r.lower_bound)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::from_toml(text).unwrap()
    }

    #[test]
    fn zero_large_items_gives_ratio_one() {
        let rows = sweep(&cfg(
            "S_values = [10]\npairs = [[5, 0], [0, 0]]\npolicies = [\"two-phase\", \"always-s\", \"always-l\", \"ratio:1/1\"]",
        ))
        .unwrap();
        assert_eq!(rows.len(), 8);
        for row in rows.iter().filter(|r| r.s == 5) {
            assert_eq!(row.game.as_ref().unwrap().ratio, ratio(1, 1));
        }
        for row in rows.iter().filter(|r| r.s == 0) {
            assert!(row.to_csv_line().contains("infeasible"));
        }
    }

    #[test]
    fn example_rows_and_flags() {
        let rows = sweep(&cfg(
            "S_values = [1000]\npairs = [[3, 2], [4, 2]]\npolicies = [\"ratio:1/1\"]\nadversary = \"example3\"",
        ))
        .unwrap();
        let g = rows[0].game.as_ref().unwrap();
        // 1 + 2/7 - 3/(7S)
        assert_eq!(
            g.ratio,
            Ratio::from_integer(1) + ratio(2, 7) - ratio(3, 7000)
        );
        assert!(rows[1].game.is_none());
    }

    #[test]
    fn csv_is_reproducible() {
        let c = cfg("S_values = [10]\npairs = [[6, 5], [2, 3]]\nadversary = \"random\"\ntrials = 3\nseed = 11");
        let a = rows_to_csv(&sweep(&c).unwrap());
        let b = rows_to_csv(&sweep(&c).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
        assert_eq!(a.lines().count(), 3);
    }

    #[test]
    fn middle_range_row_at_large_size() {
        let rows = sweep(&cfg(
            "S_values = [1000]\npairs = [[8, 4]]\nbest_response = true",
        ))
        .unwrap();
        assert_eq!(rows[0].lower_bound, ratio(5, 4));
        assert!(rows[0].game.as_ref().unwrap().adjusted_ratio <= ratio(5, 4));
        assert!(rows[0].to_csv_line().starts_with("1000,8,4,two-phase,"));
    }

    #[test]
    fn curve_boundaries() {
        let p = Params::new(100).unwrap();
        let rows = ratio_curve(&p, ratio(1, 6)).unwrap();
        let at = |x: Ratio| rows.iter().find(|r| r.l_over_s == x).unwrap().lower_bound;
        assert_eq!(at(ratio(1, 2)), ratio(5, 4));
        assert_eq!(at(ratio(5, 6)), ratio(5, 4));
        assert_eq!(at(ratio(2, 1)), ratio(17, 15));
        let text = curve_to_text(&p, &rows);
        assert!(text.contains("l_over_s,adjusted_ratio,lower_bound"));
        assert!(ratio_curve(&p, ratio(1, 7)).is_err());
    }
}
