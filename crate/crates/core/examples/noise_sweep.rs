//! Mean added noise across the loss sweep and the line-efficiency sweep.
//!
//! ```sh
//! cargo run --release --example noise_sweep
//! ```

use qfa::experiments::{run_noise_experiment, MonteCarloConfig, DEFAULT_FIXED_GAMMAS};

fn main() -> qfa::Result<()> {
    let res = run_noise_experiment(&MonteCarloConfig::noise_vs_gamma(42))?;
    println!("α1 = α2 = 0.5");
    println!("{:>6} {:>10} {:>10}", "gamma", "a_open", "a_fb");
    for p in &res.points {
        println!(
            "{:6.3} {:10.5} {:10.5}",
            p.gamma, p.summary.a_open.mean, p.summary.a_fb.mean
        );
    }
    for gamma in DEFAULT_FIXED_GAMMAS {
        let res = run_noise_experiment(&MonteCarloConfig::noise_vs_alpha(42, gamma))?;
        let row: Vec<String> = res
            .points
            .iter()
            .map(|p| format!("{:.4}", p.summary.a_fb.mean))
            .collect();
        println!("γ = {gamma}: a_fb over α ∈ [0.5, 1]: {}", row.join(" "));
    }
    Ok(())
}
