//! Measure R2 after modular exponentiation and follow every outcome.
//!
//! Branches whose e_max profiles coincide are grouped.

use macroent::shor::{self, ShorInstance, ShorTrace};
use macroent::TraceOptions;

fn main() -> macroent::Result<()> {
    let inst = ShorInstance::new(21, 2)?;
    let opts = TraceOptions::default();
    let ShorTrace::Coherent(base) = shor::run_shor_trace(&inst, false, &opts)? else { unreachable!() };
    let ShorTrace::Measured(branches) = shor::run_shor_trace(&inst, true, &opts)? else { unreachable!() };
    let base: Vec<f64> = base.e_max_series().into_iter().map(|p| p.1).collect();

    let mut groups: Vec<(Vec<f64>, Vec<u64>)> = Vec::new();
    for b in &branches {
        let prof: Vec<f64> = b.trace.e_max_series().into_iter().map(|p| p.1).collect();
        println!(
            "a={} residue={:>2} p={:.6} final e_max={:.6}",
            b.branch.label,
            b.branch.residue,
            b.branch.probability,
            prof.last().unwrap()
        );
        match groups.iter_mut().find(|g| g.0.iter().zip(&prof).all(|(u, v)| (u - v).abs() < 1e-8)) {
            Some(g) => g.1.push(b.branch.label),
            None => groups.push((prof, vec![b.branch.label])),
        }
    }
    let me = 2 * inst.first_register();
    for (prof, labels) in &groups {
        let dev = prof
            .iter()
            .zip(&base)
            .skip(me + 1)
            .map(|(e, e0)| (e - e0).abs() / e0)
            .fold(0.0, f64::max);
        println!("profile shared by a={labels:?}: max relative deviation from unmeasured {dev:.4}");
    }
    Ok(())
}
