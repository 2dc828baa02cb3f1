//! Unconstrained two-category assortment optimization, checked against enumeration.

use crosscat::optimize::{brute_force_optimal, optimize_two_category};
use crosscat::{CrossCatModel, McModel, MnlModel};

fn main() -> crosscat::Result<()> {
    let a = MnlModel::new(vec![2.0, 1.0, 0.8])?;
    let b = McModel::new(
        vec![0.3, 0.3, 0.2, 0.2],
        vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.4, 0.0, 0.3, 0.3],
            vec![0.5, 0.2, 0.0, 0.3],
            vec![0.3, 0.3, 0.4, 0.0],
        ],
    )?;
    let lambda = vec![
        vec![0.4, 0.2, 0.2, 0.2],
        vec![0.1, 0.0, 0.1, 0.8],
        vec![0.2, 0.6, 0.1, 0.1],
        vec![0.3, 0.2, 0.3, 0.2],
    ];
    let model = CrossCatModel::two_category(a, b, lambda)?;
    let prices_a = [0.0, 4.0, 6.0, 9.0];
    let prices_b = [0.0, 3.0, 5.0, 12.0];

    let sol = optimize_two_category(&model, &prices_a, &prices_b)?;
    println!("S_A = {}, S_B = {}, revenue = {:.6}", sol.sets[0], sol.sets[1], sol.revenue);
    println!("adjusted A prices: {:.4?}", sol.adjusted_prices[0]);

    let brute = brute_force_optimal(&model, &[prices_a.to_vec(), prices_b.to_vec()], None)?;
    println!("enumeration: {:.6} ({} / {})", brute.revenue, brute.sets[0], brute.sets[1]);
    Ok(())
}
