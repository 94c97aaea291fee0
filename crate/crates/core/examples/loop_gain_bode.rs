//! Bode data of the loop gain `K21(iω) G22(iω)` as CSV on stdout.
//!
//! ```sh
//! cargo run --example loop_gain_bode > bode.csv
//! ```

use qfa::analysis::{loop_gain_bode, FrequencyGrid};
use qfa::models::{build_beam_splitter, build_detuned_ndpa};

fn main() -> qfa::Result<()> {
    let plant = build_detuned_ndpa(1.0, 5.0)?;
    let grid = FrequencyGrid::new(-3.0, 3.0, 121)?;
    let curve = loop_gain_bode(&plant, &build_beam_splitter(0.1)?, &grid)?;
    print!("{}", curve.to_bode_csv());
    Ok(())
}
