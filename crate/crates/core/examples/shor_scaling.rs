//! Instances of a fixed order at several register sizes; e_max after ME,
//! mid-DFT and at the end of the DFT.
//!
//!     cargo run --release --example shor_scaling -- 6
//!     cargo run --release --example shor_scaling -- 4

use macroent::analysis::{fit_by_selector, sweep_shor, FitThresholds, ShorSelector};

fn main() -> macroent::Result<()> {
    let r: u64 = std::env::args().nth(1).map_or(6, |a| a.parse().expect("order"));
    let sweep = sweep_shor(r, &[12, 15, 18, 21], &ShorSelector::ALL)?;
    for inst in &sweep.instances {
        println!("L_tot={}: N={} x={}", inst.total_qubits(), inst.modulus(), inst.base());
    }
    for size in &sweep.missing {
        println!("L_tot={size}: no instance");
    }
    for p in &sweep.points {
        println!("{:<7} {:>3} {:.6}", p.selector, p.size, p.e_max);
    }
    for (sel, fit) in fit_by_selector(&sweep.points, &FitThresholds::default())? {
        println!("{sel}: slope={:.4} R2={:.4} {}", fit.slope, fit.r_squared, fit.classification);
    }
    Ok(())
}
