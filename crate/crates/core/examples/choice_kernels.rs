//! Within-category choice kernels: MNL, Markov chain and ranking-based.

use crosscat::{Assortment, ChoiceKernel, McModel, MnlModel, RankingModel};

fn show(label: &str, p: &[f64]) {
    let cells: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
    println!("{label:<28} [{}]", cells.join(", "));
}

fn main() -> crosscat::Result<()> {
    let s = Assortment::from([1, 3]);

    let mnl = MnlModel::new(vec![1.0, 2.0, 0.5])?;
    show("MNL P(. | {1,3})", &mnl.choice_prob(&s)?);

    // The same MNL as a Markov chain and as a distribution over rankings.
    let mc = mnl.to_markov_chain();
    show("MNL as Markov chain", &mc.choice_prob(&s)?);
    let rcm = RankingModel::from_mnl(&mnl)?;
    println!("{:<28} {} rankings", "MNL as ranking model", rcm.rankings().len());
    show("  choice probabilities", &rcm.choice_prob(&s)?);

    // A customer first attracted to product 2 (not offered) substitutes.
    for kernel in [ChoiceKernel::from(mnl.clone()), mc.clone().into(), rcm.into()] {
        show(&format!("{} after attraction to 2", kernel.kind()), &kernel.conditional_prob(&s, 2)?);
    }

    // A general Markov chain: arrivals and row-substochastic transitions.
    let chain = McModel::new(
        vec![0.2, 0.5, 0.2, 0.1],
        vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.3, 0.0, 0.5, 0.2],
            vec![0.2, 0.4, 0.0, 0.4],
            vec![0.6, 0.2, 0.2, 0.0],
        ],
    )?;
    for set in [Assortment::from([1]), Assortment::from([2, 3]), Assortment::full(3)] {
        show(&format!("Markov chain P(. | {set})"), &chain.choice_prob(&set)?);
    }
    Ok(())
}
