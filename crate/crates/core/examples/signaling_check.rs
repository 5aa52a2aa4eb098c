//! Bounded classical-simulability checks for polygon channels.

use nwe_core::signaling::{
    certify_polygon, gpt_channel, in_classical_polytope, Channel, Membership,
};
use nwe_core::GptSystem;

fn main() -> nwe_core::Result<()> {
    let pentagon = GptSystem::polygon(5)?;
    let enc = [
        pentagon.pure_states()[0].clone(),
        pentagon.pure_states()[1].clone(),
    ];
    let ch = gpt_channel(&pentagon, &enc, &pentagon.extremal_measurements()[0])?;
    print!("pentagon channel (ω0, ω1) with M0:\n{ch}");
    if let Membership::Inside(cert) = in_classical_polytope(&ch, 2)? {
        print!("{}", cert.to_csv());
    }

    for n in 4..=7 {
        let r = certify_polygon(n, 3, 2, 2)?;
        println!(
            "polygon {n}: {} distinct channels, all inside: {}",
            r.distinct_channels,
            r.all_inside()
        );
    }

    if let Membership::Outside(w) = in_classical_polytope(&Channel::identity(3)?, 2)? {
        print!("identity(3) is not 2-simulable, witness:\n{}", w.to_csv());
    }
    Ok(())
}
