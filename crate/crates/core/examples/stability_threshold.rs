//! Stability of the detuned feedback loop: the closed-form bound on `λ`
//! against the numerically computed poles.
//!
//! ```sh
//! cargo run --example stability_threshold
//! ```

use qfa::analysis::{detuned_stability_threshold, stability, DEFAULT_STABILITY_MARGIN};
use qfa::interconnect::close_ideal_feedback;
use qfa::models::{build_beam_splitter, build_detuned_ndpa};

fn main() -> qfa::Result<()> {
    for beta in [0.05, 0.1, 0.2, 0.5] {
        let max = detuned_stability_threshold(1.0, beta)?;
        println!("β = {beta}: stable for |λ| < {max:.5}");
        for frac in [0.9, 0.99, 1.01, 1.1] {
            let lambda = frac * max;
            let cl = close_ideal_feedback(
                &build_detuned_ndpa(1.0, lambda)?,
                &build_beam_splitter(beta)?,
            )?;
            let v = stability(&cl, DEFAULT_STABILITY_MARGIN)?;
            println!(
                "  λ = {lambda:8.4}  max Re(pole) = {:+.3e}  stable: {}",
                v.max_real_part, v.stable
            );
        }
    }
    Ok(())
}
