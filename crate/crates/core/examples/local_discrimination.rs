//! Optimal one-measurement-per-party protocols: the squit leader asymmetry,
//! the polygon gap of 1/8 and the two inference models side by side.

use nwe_core::discrimination::{optimal_local, InferenceModel, SearchConfig};
use nwe_core::{load, EnsembleId, PriorFamily};

fn main() -> nwe_core::Result<()> {
    let s4 = load(EnsembleId::S4, PriorFamily::Uniform)?;
    let cfg = SearchConfig::extremal(&s4)?;
    for (leader, name) in [(0, "Alice"), (1, "Bob")] {
        let r = optimal_local(&s4, &cfg.clone().with_leader(leader))?;
        println!("s4, {name} first: success {:.4}  {}", r.success, r.tree);
    }

    for id in [EnsembleId::S5, EnsembleId::S6, EnsembleId::S7] {
        let ens = load(id, PriorFamily::Uniform)?;
        let cfg = SearchConfig::extremal(&ens)?;
        for model in [InferenceModel::Eliminative, InferenceModel::Bayesian] {
            let r = optimal_local(&ens, &cfg.clone().with_model(model))?;
            println!("{id} {model:<11} delta {:.6}", r.delta);
        }
    }

    let ens = load(EnsembleId::S5, PriorFamily::Biased(0.2))?;
    let cfg = SearchConfig::extremal(&ens)?;
    let a = optimal_local(&ens, &cfg.clone().with_leader(0).with_opening(0))?;
    let b = optimal_local(&ens, &cfg.clone().with_leader(1).with_opening(0))?;
    println!(
        "s5 biased p=0.2: protocol a {:.6}, protocol b {:.6}",
        a.delta, b.delta
    );
    print!("{}", b.to_text());
    Ok(())
}
