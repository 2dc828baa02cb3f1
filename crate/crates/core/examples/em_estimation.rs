//! Fits the two-category model by EM on simulated data and compares benchmarks.

use crosscat::estimate::{fit_em, fit_ind, fit_multimnl, EmOptions, FittedModel, Observation, TwoCatParams};
use crosscat::metrics::evaluate_model;
use crosscat::sampling::child_rng;
use crosscat::synth::random_assortment;
use crosscat::{Assortment, MnlModel};

fn main() -> crosscat::Result<()> {
    let truth = TwoCatParams::new(
        MnlModel::new(vec![1.0, 0.6, 1.4])?,
        MnlModel::new(vec![0.8, 1.3, 0.5])?,
        vec![
            vec![0.5, 0.2, 0.2, 0.1],
            vec![0.1, 0.7, 0.1, 0.1],
            vec![0.2, 0.1, 0.6, 0.1],
            vec![0.1, 0.1, 0.1, 0.7],
        ],
        crosscat::estimate::DEFAULT_CAP,
    )?;
    let model = truth.to_model()?;
    let mut rng = child_rng(11, "example", &[]);
    let draw = |n: usize, rng: &mut _| -> Assortment { random_assortment(n, rng) };
    let data: Vec<Observation> = (0..20_000)
        .map(|_| {
            let sets = [draw(3, &mut rng), draw(3, &mut rng)];
            let path = model.sample_path(&sets, &mut rng).expect("valid sets");
            let [s_a, s_b] = sets;
            Observation { s_a, s_b, a: path[0], b: path[1] }
        })
        .collect();
    let (train, test) = data.split_at(14_000);

    let report = fit_em(train, 3, 3, None, &EmOptions { tol_ll: 1e-6, tol_param: 1e-4, ..EmOptions::default() })?;
    println!("EM: {} iterations, converged = {}", report.iterations, report.converged);
    for (i, (est, tru)) in report.params.lambda.iter().zip(&truth.lambda).enumerate() {
        println!("  lambda[{i}] fitted {est:.3?} true {tru:.3?}");
    }
    let fits = [
        FittedModel::Markov(report.params),
        fit_ind(train, 3, 3, crosscat::estimate::DEFAULT_CAP)?,
        fit_multimnl(train, 3, 3, crosscat::estimate::DEFAULT_CAP)?,
    ];
    for f in &fits {
        let m = evaluate_model(f, test, &[1, 2])?;
        println!("{:<7} test LL {:>10.2}  top-1 {:.3}  rank {:.3}", m.model, m.ll_b, m.top_k_hit[0].1, m.rank_acc);
    }
    Ok(())
}
