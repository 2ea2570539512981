//! Write the VCM of a reference state as CSV and check it against the
//! fluctuation of a uniform magnetization.
//!
//!     cargo run --example vcm_dump -- cat 4 > vcm.csv

use macroent::refstates::build_reference;
use macroent::vcm::{build_vcm, operator_fluctuation, AdditiveOperator};
use macroent::Axis;

fn main() -> macroent::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = args.next().unwrap_or_else(|| "cat".into()).parse()?;
    let l: usize = args.next().map_or(4, |a| a.parse().expect("L"));
    let state = build_reference(&kind, l)?;
    let v = build_vcm(&state);
    v.write_csv(std::io::stdout().lock())?;
    for axis in Axis::ALL {
        let m = AdditiveOperator::magnetization(l, axis, false)?;
        eprintln!(
            "M_{}: c†Vc={:.6} direct={:.6}",
            axis.label(),
            v.quadratic_form(&m)?,
            operator_fluctuation(&state, &m)?
        );
    }
    Ok(())
}
