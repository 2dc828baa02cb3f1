mod common;

use common::{absorb_ref, all_subsets, mnl_ref, random_kernel, random_mc, random_weights, rng, tv, RefKernel, RefNet};
use crosscat::optimize::{brute_force_optimal, optimize_dag};
use crosscat::{Assortment, McModel, MnlModel};
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mnl_matches_closed_form(seed in any::<u64>(), n in 1usize..7, mask in any::<u64>()) {
        let mut r = rng(seed);
        let w = random_weights(n, &mut r);
        let s = Assortment::from_mask(mask & ((1 << n) - 1), n);
        let p = MnlModel::new(w.clone()).unwrap().choice_prob(&s).unwrap();
        prop_assert!(close(&p, &mnl_ref(&w, &s), 1e-12));
    }

    #[test]
    fn markov_chain_matches_mass_propagation(seed in any::<u64>(), n in 1usize..7, mask in any::<u64>()) {
        let mut r = rng(seed);
        let RefKernel::Mc { arrival, transition } = random_mc(n, &mut r) else { unreachable!() };
        let s = Assortment::from_mask(mask & ((1 << n) - 1), n);
        let p = McModel::new(arrival.clone(), transition.clone()).unwrap().choice_prob(&s).unwrap();
        prop_assert!(close(&p, &absorb_ref(&arrival, &transition, &s), 1e-10));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().enumerate().all(|(j, &x)| x >= -1e-15 && (j == 0 || s.contains(j) || x == 0.0)));
    }

    #[test]
    fn mnl_embeds_as_markov_chain(seed in any::<u64>(), n in 1usize..7) {
        let mnl = MnlModel::new(random_weights(n, &mut rng(seed))).unwrap();
        let mc = mnl.to_markov_chain();
        for s in all_subsets(n) {
            prop_assert!(close(&mc.choice_prob(&s).unwrap(), &mnl.choice_prob(&s).unwrap(), 1e-10));
        }
    }

    #[test]
    fn tree_marginals_match_reference(seed in any::<u64>(), masks in proptest::collection::vec(any::<u64>(), 3)) {
        let mut r = rng(seed);
        let sizes = [3, 4, 2];
        let net = RefNet::random(vec![None, Some(0), Some(0)], &sizes, |_, n, r| random_kernel(n, r), &mut r);
        let sets: Vec<Assortment> = masks.iter().zip(sizes).map(|(m, n)| Assortment::from_mask(m & ((1 << n) - 1), n)).collect();
        let got = net.to_model().marginals(&sets).unwrap();
        for (g, w) in got.iter().zip(net.marginals(&sets)) {
            prop_assert!(close(g, &w, 1e-10));
        }
    }

    #[test]
    fn joint_table_is_a_distribution(seed in any::<u64>(), ma in any::<u64>(), mb in any::<u64>()) {
        let mut r = rng(seed);
        let net = RefNet::random(vec![None, Some(0)], &[4, 3], |_, n, r| random_kernel(n, r), &mut r);
        let model = net.to_model();
        let (s_a, s_b) = (Assortment::from_mask(ma & 15, 4), Assortment::from_mask(mb & 7, 3));
        let table = model.joint_choice_prob(&s_a, &s_b).unwrap();
        prop_assert!((table.total() - 1.0).abs() < 1e-10);
        let m = net.marginals(&[s_a, s_b]);
        prop_assert!(close(&table.row_marginals(), &m[0], 1e-10));
        prop_assert!(close(&table.column_marginals(), &m[1], 1e-10));
    }
}

#[test]
fn sampled_paths_follow_marginals() {
    let mut r = rng(77);
    let net = RefNet::random(vec![None, Some(0), Some(1)], &[3, 3, 2], |_, n, r| random_kernel(n, r), &mut r);
    let model = net.to_model();
    let sets = vec![Assortment::from([1, 3]), Assortment::from([2, 3]), Assortment::from([1])];
    let exact = net.marginals(&sets);
    let t = 200_000;
    let mut freq: Vec<Vec<f64>> = exact.iter().map(|d| vec![0.0; d.len()]).collect();
    for _ in 0..t {
        for (u, &c) in model.sample_path(&sets, &mut r).unwrap().iter().enumerate() {
            freq[u][c] += 1.0 / t as f64;
        }
    }
    for (f, e) in freq.iter().zip(&exact) {
        assert!(tv(f, e) < 0.01, "{f:?} vs {e:?}");
    }
}

#[test]
fn dag_optimizer_handles_negative_prices_and_single_products() {
    for seed in 0..30 {
        let mut r = rng(900 + seed);
        let net = RefNet::random(vec![None, Some(0)], &[1, 1], |_, n, r| random_kernel(n, r), &mut r);
        let prices = vec![vec![0.0, -1.0], vec![0.0, 2.0]];
        let model = net.to_model();
        let sol = optimize_dag(&model, &prices).unwrap();
        let brute = brute_force_optimal(&model, &prices, None).unwrap();
        assert!((sol.revenue - brute.revenue).abs() < 1e-10);
        assert!((sol.revenue - net.brute_force(&prices, &[None, None])).abs() < 1e-10);
    }
}
