//! Raw basket CSV to fitted models: preprocessing plus a full case study.
//!
//! Writes a synthetic transaction file, then runs the same steps used on
//! real store data.

use crosscat::harness::{run_case_study, CaseStudyConfig};
use crosscat::pipeline::{observations_to_raw, write_raw_csv};
use crosscat::sampling::child_rng;
use crosscat::synth::{gen_ground_truth, simulate_dataset, GroundTruthSpec};

fn main() -> crosscat::Result<()> {
    let dir = std::env::temp_dir().join("crosscat-grocery");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("transactions.csv");

    let spec = GroundTruthSpec { theta: 4.0, ..GroundTruthSpec::default() };
    let gt = gen_ground_truth(&spec, &mut child_rng(2, "gt", &[]))?;
    let data = simulate_dataset(&gt, 20_000, &mut child_rng(2, "data", &[]));
    // 8 shoppers per week, so weekly assortments vary.
    write_raw_csv(&csv, &observations_to_raw(&data, "cake-mix", "frosting", |t| (t / 8) as u32))?;

    let mut config = CaseStudyConfig::new(&csv, "cake-mix", "frosting");
    config.out_dir = Some(dir.join("out"));
    let (dataset, result) = run_case_study(&config)?;
    println!(
        "{} A products, {} B products, {} observations ({} train / {} test)",
        dataset.n_a(),
        dataset.n_b(),
        dataset.observations.len(),
        result.train_size,
        result.test_size
    );
    println!("CM = {:.4}", result.cm.unwrap_or(f64::NAN));
    for row in &result.table {
        let value = row.value.map_or("undefined".to_string(), |v| format!("{v:.4}"));
        let delta = row.delta_vs_ind.map_or(String::new(), |d| format!("{d:+.4}"));
        println!("{:<7} {:<12} {value:>12} {delta:>9}", row.model, row.metric);
    }
    println!("outputs in {}", dir.join("out").display());
    Ok(())
}
