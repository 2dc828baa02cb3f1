//! Small complementarity sweep comparing the three model families.
//!
//! Usage: `cargo run --release --example synthetic_sweep [out_dir]`

use crosscat::harness::{run_synthetic_sweep, write_sweep_outputs, ExperimentConfig};
use crosscat::synth::{PriceDist, PriceRegime, PriceScenario};

fn main() -> crosscat::Result<()> {
    let config = ExperimentConfig {
        thetas: vec![0.0, 2.5, 5.0],
        replications: 3,
        price_scenarios: vec![PriceScenario::new(PriceRegime::Low, PriceDist::Normal)],
        price_draws: 10,
        master_seed: 7,
        ..ExperimentConfig::default()
    };
    let result = run_synthetic_sweep(&config)?;
    println!("{:>6} {:>7} {:>22} {:>12} {:>10}", "theta", "model", "metric", "mean", "vs ind");
    for row in result.summary.iter().filter(|r| {
        ["test_ll", "top3_hit", "rank_acc", "cm", "revenue:low-normal"].contains(&r.metric.as_str())
    }) {
        let delta = row.delta_vs_ind.map_or(String::new(), |d| format!("{d:+.4}"));
        println!("{:>6.1} {:>7} {:>22} {:>12.4} {:>10}", row.theta, row.model, row.metric, row.mean, delta);
    }
    for f in &result.failures {
        println!("failure: theta {} rep {} {}: {}", f.theta, f.replication, f.model, f.error);
    }
    if let Some(dir) = std::env::args().nth(1) {
        write_sweep_outputs(&result, &config, dir.as_ref())?;
        println!("wrote {dir}");
    }
    Ok(())
}
