//! How much a plant fluctuation moves the closed-loop gain.
//!
//! ```sh
//! cargo run --example sensitivity
//! ```

use qfa::analysis::{classical_sensitivity, first_order_gain_fluctuation, sensitivity_bound};
use qfa::interconnect::close_ideal_feedback;
use qfa::models::{build_beam_splitter, build_detuned_ndpa};

fn main() -> qfa::Result<()> {
    let k = build_beam_splitter(0.1)?;
    for lambda in [2.0, 5.0, 10.0, 50.0] {
        let plant = build_detuned_ndpa(1.0, lambda)?;
        println!(
            "λ = {lambda:<4}  bound 1/|1 − K21 G22| at ω = 0: {:.4}",
            sensitivity_bound(&plant, &k, 0.0)?
        );
    }

    // A 1% change of λ, predicted against the exact change.
    let (l0, l1) = (5.0, 5.05);
    let p0 = build_detuned_ndpa(1.0, l0)?;
    let p1 = build_detuned_ndpa(1.0, l1)?;
    let g0 = close_ideal_feedback(&p0, &k)?.signal_gain_at(0.0)?.norm();
    let g1 = close_ideal_feedback(&p1, &k)?.signal_gain_at(0.0)?.norm();
    let g22 = p0.g22().eval_iw(0.0)?;
    let dg22 = p1.g22().eval_iw(0.0)? - g22;
    let predicted = first_order_gain_fluctuation(g22, k.k21().eval_iw(0.0)?, dg22)?;
    println!(
        "λ 5 → 5.05: relative gain change {:.5}, first-order prediction {predicted:.5}",
        (g1 - g0) / g0
    );
    println!(
        "open-loop relative change of |G22|: {:.5}",
        dg22.norm() / g22.norm()
    );

    println!(
        "classical loop G/(1 + GK), K = 0.1: dGfb/dG = {:.5} at G = 100",
        classical_sensitivity(100.0, 0.1)?
    );
    Ok(())
}
