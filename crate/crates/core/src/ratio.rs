//! Exact rational arithmetic for cost ratios.

pub type Ratio = num_rational::Ratio<i128>;

pub fn ratio(numer: u64, denom: u64) -> Ratio {
    Ratio::new(numer as i128, denom as i128)
}

pub fn to_f64(r: &Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `"p/q (d.ddddddddd)"`.
pub fn format_ratio(r: &Ratio) -> String {
    format!("{}/{} ({:.9})", r.numer(), r.denom(), to_f64(r))
}
