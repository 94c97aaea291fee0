//! Phase-conjugating output of the feedback loop.
//!
//! ```sh
//! cargo run --example phase_conjugation
//! ```

use qfa::interconnect::{close_ideal_feedback, phase_conjugating_gain, phase_conjugating_limit};
use qfa::models::{build_beam_splitter, build_detuned_ndpa};

fn main() -> qfa::Result<()> {
    let beta = 0.1;
    println!("limit √(1/β² − 1) = {:.5}", phase_conjugating_limit(beta));
    for lambda in [5.0, 10.0, 20.0, 50.0] {
        let cl = close_ideal_feedback(
            &build_detuned_ndpa(1.0, lambda)?,
            &build_beam_splitter(beta)?,
        )?;
        println!(
            "λ = {lambda:<4}  |G21fb(0)| = {:.5}",
            phase_conjugating_gain(&cl, 0.0)?
        );
    }
    Ok(())
}
