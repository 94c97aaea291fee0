//! Closing the idler loop through a beam splitter, ideally and with lossy
//! transmission lines.
//!
//! ```sh
//! cargo run --example feedback_closure
//! ```

use qfa::interconnect::{
    close_ideal_feedback, close_lossy_feedback, FeedbackLoopConfig, InputPort,
};
use qfa::models::{
    build_beam_splitter, build_detuned_ndpa, build_ndpa, check_scattering_constraints,
};

fn main() -> qfa::Result<()> {
    let plant = build_detuned_ndpa(1.0, 5.0)?;
    println!(
        "open loop |G11(0)| = {:.4}",
        plant.g11().eval_iw(0.0)?.norm()
    );
    for beta in [0.02, 0.05, 0.1, 0.2] {
        let cl = close_ideal_feedback(&plant, &build_beam_splitter(beta)?)?;
        println!(
            "β = {beta:<4}  |G11fb(0)| = {:8.4}   1/β = {:6.2}",
            cl.signal_gain_at(0.0)?.norm(),
            1.0 / beta
        );
    }

    let lossy_plant = build_ndpa(1.0, 5.0, 5.0, 5.0, 0.05)?;
    let lines = FeedbackLoopConfig::new(0.9, 0.8)?;
    let cl = close_lossy_feedback(&lossy_plant, &build_beam_splitter(0.1)?, lines)?;
    println!("\nlossy loop, γ = 0.05, α1 = 0.9, α2 = 0.8, at ω = 0:");
    for port in InputPort::ALL {
        let v = cl
            .entry(port)
            .expect("every input has an entry")
            .eval_iw(0.0)?;
        println!("  b1 output from {:<7} |·| = {:.5}", port.mode(), v.norm());
    }
    let omegas: Vec<f64> = (0..101).map(|k| -2.0 + 0.04 * k as f64).collect();
    let report = check_scattering_constraints(&cl.to_matrix(), &omegas, 1e-9)?;
    println!(
        "scattering constraints hold: {} (max residual {:.2e})",
        report.pass, report.max_residual
    );
    Ok(())
}
