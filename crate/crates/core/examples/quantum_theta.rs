//! The three-qubit analogue: the leader measures at angle θ on the Bloch
//! circle and the optimum beats the polygon gap.

use nwe_core::quantum::{qt_delta_closed, qt_optimize, Protocol, ThetaProtocol};
use nwe_core::{load, EnsembleId, PriorFamily};

fn main() -> nwe_core::Result<()> {
    let q3 = load(EnsembleId::Q3, PriorFamily::Uniform)?;
    let proto = ThetaProtocol::derive(&q3, 0)?;
    println!("Alice groups: {:?} | {:?}", proto.first, proto.second);
    for deg in [0.0f64, 10.0, 18.43, 30.0, 45.0] {
        println!(
            "  θ = {deg:>5}°: error {:.7}",
            proto.error(deg.to_radians())
        );
    }
    let (theta, delta) = qt_optimize(&q3, 0)?;
    println!(
        "optimum θ* = {:.6} rad (atan(1/3) = {:.6}), delta {delta:.7}",
        theta,
        (1.0f64 / 3.0).atan()
    );

    for p in [0.05, 0.125, 0.3] {
        let ens = load(EnsembleId::Q3, PriorFamily::Biased(p))?;
        for prot in [Protocol::A, Protocol::B] {
            let (_, d) = qt_optimize(&ens, prot.leader())?;
            println!(
                "p={p} protocol {prot}: numeric {d:.9}, closed {:.9}",
                qt_delta_closed(p, prot)?
            );
        }
    }
    Ok(())
}
