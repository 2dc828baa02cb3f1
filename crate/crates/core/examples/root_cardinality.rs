//! Shelf-space limit on the root category of a two-category model.

use crosscat::optimize::{brute_force_optimal, optimize_dag, optimize_root_constrained};
use crosscat::{CrossCatModel, MnlModel};

fn main() -> crosscat::Result<()> {
    let a = MnlModel::new(vec![1.0, 0.9, 1.4, 0.6])?;
    let b = MnlModel::new(vec![1.0, 2.0, 0.5])?.to_markov_chain();
    let lambda = vec![
        vec![0.6, 0.1, 0.2, 0.1],
        vec![0.1, 0.8, 0.05, 0.05],
        vec![0.2, 0.1, 0.6, 0.1],
        vec![0.3, 0.3, 0.3, 0.1],
        vec![0.1, 0.1, 0.1, 0.7],
    ];
    let model = CrossCatModel::two_category(a, b, lambda)?;
    let prices = vec![vec![0.0, 5.0, 6.0, 4.0, 9.0], vec![0.0, 7.0, 3.0, 10.0]];

    let free = optimize_dag(&model, &prices)?;
    println!("unconstrained: A = {} B = {} revenue {:.6}", free.sets[0], free.sets[1], free.revenue);
    for k in 1..=3 {
        let sol = optimize_root_constrained(&model, &prices, &[("A", k)])?;
        let caps = [Some(k), None];
        let brute = brute_force_optimal(&model, &prices, Some(&caps))?;
        println!(
            "K = {k}: A = {} B = {} revenue {:.6} (enumeration {:.6})",
            sol.sets[0], sol.sets[1], sol.revenue, brute.revenue
        );
    }
    Ok(())
}
