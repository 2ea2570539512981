//! Top VCM eigenspace of the state after modular exponentiation.
//!
//!     cargo run --release --example max_fluctuating_operator -- 21 2

use macroent::shor::{self, ShorInstance};
use macroent::Axis;

fn main() -> macroent::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer")).collect();
    let (n, x) = match args[..] {
        [n, x] => (n, x),
        _ => (21, 2),
    };
    let inst = ShorInstance::new(n, x)?;
    let spec = shor::extract_amax_me(&inst)?;
    println!(
        "N={n} x={x} r={} L={} L'={}: e_max={:.6} degeneracy={}",
        inst.order(),
        inst.first_register(),
        inst.second_register(),
        spec.e_max,
        spec.degeneracy
    );
    if let Some(gap) = spec.gap() {
        println!("gap to next eigenvalue {gap:.6}");
    }
    for (k, op) in spec.top_operators.iter().enumerate() {
        println!("operator {k} (R2 mass {:.2e})", shor::second_register_mass(op, &inst));
        for (site, c) in op.sites().iter().zip(op.coefficients()) {
            let row: Vec<String> = Axis::ALL
                .iter()
                .map(|a| {
                    let v = c[a.index()];
                    format!("{}={:+.4}{:+.4}i", a.label(), v.re, v.im)
                })
                .collect();
            println!("  site {site:>2}  {}", row.join("  "));
        }
    }
    Ok(())
}
