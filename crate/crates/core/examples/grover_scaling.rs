//! e_max of ψ_⌈R/s⌉ against L, and the linear-fit classification.

use macroent::analysis::{fit_by_selector, sweep_grover, FitThresholds, GroverFamily, GroverSelector};

fn main() -> macroent::Result<()> {
    let sizes = [8, 9, 10, 11, 12, 13, 14];
    let selectors = [
        GroverSelector::Initial,
        GroverSelector::Fraction(2),
        GroverSelector::Fraction(3),
        GroverSelector::Fraction(4),
        GroverSelector::Final,
    ];
    for (name, family) in [
        ("M=1", GroverFamily::Solutions { m: 1, seed: None }),
        ("multiples of 8", GroverFamily::MultiplesOfEight),
    ] {
        println!("{name}");
        let points = sweep_grover(&sizes, family, &selectors, false)?;
        for (sel, fit) in fit_by_selector(&points, &FitThresholds::default())? {
            let vals: Vec<String> = fit.points.iter().map(|p| format!("{:.3}", p.1)).collect();
            println!(
                "  {sel:<8} slope={:+.4} R2={:.4} {:<13} [{}]",
                fit.slope,
                fit.r_squared,
                fit.classification.to_string(),
                vals.join(" ")
            );
        }
    }
    Ok(())
}
