//! Aggregate and product-level complementarity on synthetic data.

use crosscat::estimate::{fit_em, EmOptions};
use crosscat::metrics::{cm_score, scs, CoCount};
use crosscat::sampling::child_rng;
use crosscat::synth::{gen_ground_truth, simulate_dataset, GroundTruthSpec};

fn main() -> crosscat::Result<()> {
    for theta in [0.0, 1.0, 2.0, 4.0, 8.0] {
        let spec = GroundTruthSpec { theta, ..GroundTruthSpec::default() };
        let gt = gen_ground_truth(&spec, &mut child_rng(5, "gt", &[]))?;
        let data = simulate_dataset(&gt, 12_000, &mut child_rng(5, "data", &[]));
        let cm = cm_score(&CoCount::from_observations(&data, spec.n_a, spec.n_b)?)?;
        println!("theta {theta:>4.1}: CM = {cm:.4}");
        if theta == 4.0 {
            let fit = fit_em(&data, spec.n_a, spec.n_b, None, &EmOptions::default())?;
            let m = scs(&fit.params);
            let (i, j, v) = m
                .iter()
                .enumerate()
                .skip(1)
                .flat_map(|(i, row)| row.iter().enumerate().skip(1).map(move |(j, &v)| (i, j, v)))
                .fold((0, 0, f64::MIN), |best, cur| if cur.2 > best.2 { cur } else { best });
            println!("  strongest pair: A{i} -> B{j} with score {v:.4}");
        }
    }
    Ok(())
}
