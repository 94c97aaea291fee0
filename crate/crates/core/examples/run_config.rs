//! Loads a JSON run config and prints its closed-loop gain and stability.
//!
//! ```sh
//! cargo run --example run_config -- crates/core/examples/configs/detuned_feedback.json
//! ```

use qfa::analysis::{stability, DEFAULT_STABILITY_MARGIN};
use qfa::config::RunConfig;
use qfa::interconnect::close_lossy_feedback;

fn main() -> qfa::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/detuned_feedback.json"
        )
        .to_owned()
    });
    let cfg = RunConfig::load(path.as_ref())?;
    let plant = cfg.plant.build()?;
    println!("plant {:?}", cfg.plant);
    let Some(controller) = &cfg.controller else {
        println!(
            "no controller; open-loop |G11(0)| = {:.4}",
            plant.g11().eval_iw(0.0)?.norm()
        );
        return Ok(());
    };
    let cl = close_lossy_feedback(&plant, &controller.build()?, cfg.feedback)?;
    let v = stability(&cl, DEFAULT_STABILITY_MARGIN)?;
    println!(
        "stable: {}, max Re(pole) = {:.4e}",
        v.stable, v.max_real_part
    );
    for w in cfg
        .grid
        .points()
        .iter()
        .step_by((cfg.grid.n_points / 10).max(1))
    {
        println!(
            "ω = {w:+.3}  |G11fb| = {:.4}",
            cl.signal_gain_at(*w)?.norm()
        );
    }
    Ok(())
}
