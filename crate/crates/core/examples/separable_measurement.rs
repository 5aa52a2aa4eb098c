//! Checks the cataloged product measurements: each effect fires on exactly
//! one state of its set, and the effects sum to the composite unit.

use nwe_core::discrimination::confusion_matrix;
use nwe_core::{load, load_measurement, EnsembleId, PriorFamily};

fn main() -> nwe_core::Result<()> {
    for id in [EnsembleId::S5, EnsembleId::S6, EnsembleId::S7] {
        let ens = load(id, PriorFamily::Uniform)?;
        let m = load_measurement(id)?;
        let cm = confusion_matrix(&m, &ens)?;
        let residual = ens.composite.completeness_residual(&m)?;
        println!(
            "{id}: identity error {:.1e}, completeness residual {residual:.1e}",
            cm.identity_error().unwrap_or(f64::NAN)
        );
        for (effect, state) in m.effects.iter().zip(&ens.states) {
            println!("  {:<16} detects {}", effect.label(), state.label());
        }
    }
    Ok(())
}
