//! Polygon versus quantum gaps across biased priors, written as CSV.

use nwe_core::quantum::{curve, curve_to_csv, polygon_crossover};

fn main() -> nwe_core::Result<()> {
    let points = curve(0.05, 0.45, 9)?;
    print!("{}", curve_to_csv(&points));
    if let Some(p) = polygon_crossover(0.05, 0.45, 1e-12)? {
        eprintln!("polygon protocols cross at p = {p:.10}");
    }
    Ok(())
}
