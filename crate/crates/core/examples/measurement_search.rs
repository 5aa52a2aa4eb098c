//! Brute-force search for a perfect product measurement, compared with the
//! catalog.

use nwe_core::catalog::{load, load_measurement, search_perfect_separable, DEFAULT_SEARCH_BOUND};
use nwe_core::{EnsembleId, PriorFamily};

fn main() -> nwe_core::Result<()> {
    for id in [
        EnsembleId::S4,
        EnsembleId::S5,
        EnsembleId::S6,
        EnsembleId::Q3,
    ] {
        let ens = load(id, PriorFamily::Uniform)?;
        match search_perfect_separable(&ens, DEFAULT_SEARCH_BOUND)? {
            Some(m) => {
                let labels: Vec<String> = m.effects.iter().map(|e| e.label()).collect();
                let same = load_measurement(id)
                    .map(|c| c.sorted_labels() == m.sorted_labels())
                    .unwrap_or(false);
                println!("{id}: {} (catalog match: {same})", labels.join(", "));
            }
            None => println!("{id}: none"),
        }
    }
    Ok(())
}
