//! Coherent Shor run: e_max through the Hadamard, ME and DFT stages.
//!
//!     cargo run --release --example shor_trace -- 21 2 [trace.csv]

use macroent::shor::{self, ShorInstance, ShorTrace};
use macroent::{Stage, TraceOptions};

fn main() -> macroent::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).take(2).map(|a| a.parse().expect("integer")).collect();
    let (n, x) = match args[..] {
        [n, x] => (n, x),
        _ => (21, 2),
    };
    let inst = ShorInstance::new(n, x)?;
    println!(
        "N={n} x={x} r={} L={} L'={} Q={}",
        inst.order(),
        inst.first_register(),
        inst.second_register(),
        inst.total_steps()
    );
    let ShorTrace::Coherent(trace) = shor::run_shor_trace(&inst, false, &TraceOptions::default())? else {
        unreachable!("unmeasured run")
    };
    for stage in [Stage::Hadamard, Stage::ModExp, Stage::Dft] {
        let vals: Vec<f64> = trace
            .records
            .iter()
            .filter(|r| r.stage == stage)
            .filter_map(|r| r.e_max())
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:>3}: {:>3} steps, e_max {lo:.4} .. {hi:.4}, last {:.4}",
            stage.label(),
            vals.len(),
            vals.last().copied().unwrap_or(f64::NAN)
        );
    }
    for r in trace.records.iter().filter(|r| r.stage == Stage::ModExp) {
        println!("  step {:>3} {:<12} {:.6}", r.step, r.gate, r.e_max().unwrap_or(f64::NAN));
    }
    if let Some(path) = std::env::args().nth(3) {
        trace.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
