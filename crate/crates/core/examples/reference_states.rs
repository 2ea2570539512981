//! e_max of the calibration states for a range of sizes.

use macroent::analysis::fit_scaling;
use macroent::refstates::{build_reference, ReferenceState};
use macroent::vcm::e_max;

fn main() -> macroent::Result<()> {
    let kinds = [
        ReferenceState::Cat,
        ReferenceState::W,
        ReferenceState::DomainWall,
        ReferenceState::Product(Vec::new()),
    ];
    print!("{:>3}", "L");
    for k in &kinds {
        print!(" {:>9}", k.name());
    }
    println!();
    let mut cols = vec![Vec::new(); kinds.len()];
    for l in 2..=12 {
        print!("{l:>3}");
        for (k, col) in kinds.iter().zip(cols.iter_mut()) {
            let e = e_max(&build_reference(k, l)?)?;
            col.push((l as f64, e));
            print!(" {e:>9.5}");
        }
        println!();
    }
    for (k, col) in kinds.iter().zip(&cols) {
        let f = fit_scaling(col)?;
        println!("{:>8}: slope={:.4} R2={:.4} {}", k.name(), f.slope, f.r_squared, f.classification);
    }
    Ok(())
}
