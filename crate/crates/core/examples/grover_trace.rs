//! Step-resolved e_max of one Grover search, summarised per iteration.
//!
//!     cargo run --release --example grover_trace -- 9

use macroent::grover::{self, GroverInstance};
use macroent::{Stage, TraceOptions};

fn main() -> macroent::Result<()> {
    let l: usize = std::env::args().nth(1).map_or(9, |a| a.parse().expect("register size"));
    let inst = GroverInstance::reference(l).or_else(|_| GroverInstance::random(l, 1, 7))?;
    let p = inst.params();
    let trace = grover::run_grover(&inst, &TraceOptions::default())?;
    println!(
        "L={l} solution={:?} theta={:.6} R={} steps={}",
        inst.solutions(),
        p.theta,
        p.iterations,
        trace.total_steps()
    );
    println!("oracle steps {}, phase steps {}", trace.count_stage(Stage::Oracle), trace.count_stage(Stage::Phase));

    let per_iter = 2 * l + 2;
    let series = trace.e_max_series();
    println!("{:>5} {:>10} {:>10}", "k", "e_max(ψ_k)", "max in G");
    for k in 0..=p.iterations {
        let end = l + k * per_iter;
        let at = series.iter().find(|s| s.0 == end).map_or(f64::NAN, |s| s.1);
        let inside = series
            .iter()
            .filter(|s| s.0 > end.saturating_sub(per_iter) && s.0 <= end && k > 0)
            .map(|s| s.1)
            .fold(f64::NAN, f64::max);
        println!("{k:>5} {at:>10.4} {inside:>10.4}");
    }
    let psi_r = grover::simulate_psi_k(&inst, p.iterations)?;
    println!("success probability {:.6}", psi_r.probability(inst.solutions()[0]));
    Ok(())
}
