//! Gain spread under random plant perturbations, open loop against closed
//! loop.
//!
//! ```sh
//! cargo run --release --example robustness_monte_carlo -- 42
//! ```

use qfa::experiments::{run_robustness_experiment, MonteCarloConfig};

fn main() -> qfa::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let res = run_robustness_experiment(&MonteCarloConfig::robustness(seed))?;
    let p = &res.points[0];
    let s = &p.summary;
    println!(
        "seed {seed}, {} stable of {} samples",
        s.included,
        p.per_sample.len()
    );
    println!(
        "open   |G11|   mean {:8.4}  std {:.4}  cv {:.4}",
        s.open_loop_gain.mean,
        s.open_loop_gain.std,
        s.open_loop_gain.coefficient_of_variation()
    );
    println!(
        "closed |G11fb| mean {:8.4}  std {:.4}  cv {:.4}",
        s.closed_loop_gain.mean,
        s.closed_loop_gain.std,
        s.closed_loop_gain.coefficient_of_variation()
    );
    if let (Some(r), Some(a)) = (p.suppression_ratio, p.absolute_suppression_ratio) {
        println!(
            "suppression ratio {r:.4} (absolute {a:.4}), first-order bound {:.4}",
            p.sensitivity_bound
        );
    }
    let violated = p
        .per_sample
        .iter()
        .filter(|r| !r.sensitivity.satisfied)
        .count();
    println!("samples exceeding the first-order bound: {violated}");
    Ok(())
}
