//! Sweeps, the ratio curve and the seeded verification suite.

mod config;
mod properties;
mod sweep;
mod verify;

pub use config::{cell_for, parse_ratio, AdversaryMode, SweepConfig};
pub use properties::{
    large_only_vs_opt, random_sequence, reasonable_vs_large_only, reasonable_vs_small_only,
    reasonable_vs_small_only_with_slack, small_only_vs_opt, small_only_vs_opt_tight,
    weight_mismatch, Comparison,
};
pub use sweep::{
    curve_to_text, ratio_curve, rows_to_csv, sweep, write_text, CurveRow, SweepRow, CSV_HEADER,
    CURVE_DENOMINATOR,
};
pub use verify::{verify, PropertyReport, Report, VerifyOptions};
