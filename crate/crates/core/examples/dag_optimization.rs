//! Backward induction over a tree of categories: meats feed buns and condiments.

use crosscat::optimize::{brute_force_optimal, optimize_dag};
use crosscat::{CategoryNode, CrossCatModel, Edge, MnlModel};

fn main() -> crosscat::Result<()> {
    let nodes = vec![
        CategoryNode::new("meat", MnlModel::new(vec![1.0, 1.5, 0.7])?),
        CategoryNode::new("buns", MnlModel::new(vec![1.2, 0.8])?.to_markov_chain()),
        CategoryNode::new("condiments", MnlModel::new(vec![0.9, 1.1, 0.4])?),
    ];
    let edges = vec![
        Edge::new(
            "meat",
            "buns",
            vec![
                vec![0.8, 0.1, 0.1],
                vec![0.2, 0.7, 0.1],
                vec![0.2, 0.1, 0.7],
                vec![0.5, 0.25, 0.25],
            ],
        ),
        Edge::new(
            "meat",
            "condiments",
            vec![
                vec![0.7, 0.1, 0.1, 0.1],
                vec![0.3, 0.5, 0.1, 0.1],
                vec![0.3, 0.1, 0.5, 0.1],
                vec![0.2, 0.1, 0.1, 0.6],
            ],
        ),
    ];
    let model = CrossCatModel::new(nodes, edges)?;
    let prices = vec![
        vec![0.0, 8.0, 10.0, 14.0],
        vec![0.0, 2.0, 3.0],
        vec![0.0, 1.5, 2.5, 4.0],
    ];
    let sol = optimize_dag(&model, &prices)?;
    for (id, set) in sol.categories.iter().zip(&sol.sets) {
        println!("{id:<11} {set}");
    }
    println!("revenue {:.6}", sol.revenue);
    println!("enumeration {:.6}", brute_force_optimal(&model, &prices, None)?.revenue);
    Ok(())
}
