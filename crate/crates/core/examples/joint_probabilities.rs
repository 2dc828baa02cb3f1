//! Joint choice probabilities in a two-category model.

use crosscat::{Assortment, CrossCatModel, MnlModel};

fn main() -> crosscat::Result<()> {
    // Buying A product 1 draws attention to B product 2; buying nothing in A
    // leaves B attention spread evenly.
    let model = CrossCatModel::two_category(
        MnlModel::new(vec![1.0, 1.5])?,
        MnlModel::new(vec![1.0, 2.0, 1.0])?,
        vec![
            vec![0.4, 0.2, 0.2, 0.2],
            vec![0.1, 0.1, 0.7, 0.1],
            vec![0.2, 0.3, 0.2, 0.3],
        ],
    )?;
    let s_a = Assortment::from([1, 2]);
    let s_b = Assortment::from([1, 3]);
    let table = model.joint_choice_prob(&s_a, &s_b)?;
    println!("P(a, b) for S_A = {s_a}, S_B = {s_b}");
    for (a, row) in table.probs.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.4}")).collect();
        println!("  a = {a}: [{}]", cells.join(", "));
    }
    println!("total = {:.12}", table.total());
    println!("B marginal = {:?}", table.column_marginals());

    let edge = model.two_category_edge()?;
    for a in 0..=2 {
        let p = model.conditional_b_prob(edge, a, &s_b)?;
        println!("P(b | a = {a}) = {p:.4?}");
    }
    println!("aggregate B arrival given S_A: {:.4?}", model.aggregate_arrival(&s_a)?);
    Ok(())
}
