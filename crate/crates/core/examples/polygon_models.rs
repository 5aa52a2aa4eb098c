//! Pure states, effects and zero/one profiles of the polygon models, plus
//! which pairs of pure states a single binary measurement can tell apart.

use nwe_core::GptSystem;

fn main() -> nwe_core::Result<()> {
    for n in [4, 5, 6, 7] {
        let sys = GptSystem::polygon(n)?;
        sys.check_invariants()?;
        println!(
            "{} with {} extremal measurements",
            sys.kind(),
            sys.extremal_measurements().len()
        );
        for i in 0..n {
            let p = sys.zero_one_profile(i)?;
            println!("  e{i}: one on {:?}, zero on {:?}", p.ones, p.zeros);
        }
        let states = sys.pure_states();
        let mut pairs = 0;
        for i in 0..n {
            for j in i + 1..n {
                if let Some(m) = sys.find_pair_discriminator(&states[i].vector, &states[j].vector) {
                    pairs += 1;
                    if pairs <= 3 {
                        println!("  ω{i} vs ω{j}: {}", m.label);
                    }
                }
            }
        }
        println!(
            "  {pairs} of {} pairs have a perfect discriminator",
            n * (n - 1) / 2
        );
    }

    let circle = GptSystem::bloch_circle();
    let plus = circle.state_at(std::f64::consts::FRAC_PI_2)?;
    let z = circle.basis_measurement(0.0)?;
    let p = circle.prob(&z.effects[0].vector, &plus.vector)?;
    println!("bloch circle: p(P|0⟩ | |+⟩) = {p:.3}");
    Ok(())
}
