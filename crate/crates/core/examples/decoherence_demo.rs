//! Destroy the coherence of ψ_⌈R/2⌉ between ψ_0 and |x1⟩ and finish the
//! search on the resulting mixture.

use macroent::grover::{decohere_midpoint_demo, GroverInstance};

fn main() -> macroent::Result<()> {
    println!("{:>3} {:>4} {:>10} {:>10}", "L", "k", "coherent", "decohered");
    for l in 6..=14 {
        let inst = GroverInstance::reference(l).or_else(|_| GroverInstance::random(l, 1, l as u64))?;
        let out = decohere_midpoint_demo(&inst)?;
        println!("{l:>3} {:>4} {:>10.6} {:>10.6}", out.split_iteration, out.coherent, out.decohered);
    }
    Ok(())
}
