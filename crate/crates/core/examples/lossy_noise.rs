//! Added noise of the lossy NDPA with and without the feedback loop.
//!
//! The closed loop keeps the plant's gain-independent noise floor
//! `1/2 + |G13|²/|G11|²` while adding less on top of it.
//!
//! ```sh
//! cargo run --example lossy_noise
//! ```

use qfa::analysis::{added_noise, plant_noise_floor, NoiseFlavor};
use qfa::interconnect::{close_lossy_feedback, FeedbackLoopConfig};
use qfa::models::{build_beam_splitter, build_ndpa};

fn main() -> qfa::Result<()> {
    let lines = FeedbackLoopConfig::symmetric(0.5)?;
    println!("gamma,a_open,a_fb,floor,half,gain_term,excess_term");
    for k in 0..=10 {
        let gamma = 0.02 * k as f64;
        let plant = build_ndpa(1.0, 5.0, 5.0, 5.0, gamma)?;
        let cl = close_lossy_feedback(&plant, &build_beam_splitter(0.1)?, lines)?;
        let open = added_noise(&plant, 0.0, NoiseFlavor::Plant)?;
        let fb = added_noise(&cl, 0.0, NoiseFlavor::ClosedLoop)?;
        println!(
            "{gamma:.2},{:.6},{:.6},{:.6},{:.3},{:.6},{:.6}",
            open.a_value,
            fb.a_value,
            plant_noise_floor(&plant, 0.0)?,
            fb.half_term,
            fb.gain_term,
            fb.excess_term
        );
    }
    Ok(())
}
