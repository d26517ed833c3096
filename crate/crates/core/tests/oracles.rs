mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use edge_slicer::baselines::{greedy_heuristic, proportional_allocation, HeuristicParams};
use edge_slicer::config::simple_instance;
use edge_slicer::erlang::{erlang_b, OfferedLoad};
use edge_slicer::exact::{solve_exact_erlang, solve_mdkp, TIE_TOLERANCE, DEFAULT_CELL_LIMIT};
use edge_slicer::objective::eval_f;
use edge_slicer::simulate::{simulate, HoldingTime, SimConfig};
use edge_slicer::stream::{solve_stream, solve_stream_detailed, ItemOrder};

use common::{brute_force_linear, feasible, naive_f, naive_optimum, random_instance, Shape};

const SMALL: Shape = Shape {
    max_sps: 3,
    max_dims: 2,
    max_capacity: 12,
    max_demand: 4,
    load: (0.1, 20.0),
};

fn order_strategy() -> impl Strategy<Value = ItemOrder> {
    prop_oneof![
        Just(ItemOrder::RoundRobin),
        Just(ItemOrder::Sequential),
        any::<u64>().prop_map(ItemOrder::Seeded),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_dominates_every_feasible_vector(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), SMALL);
        let sol = solve_exact_erlang(&inst, u64::MAX);
        prop_assert!(sol.proven_optimal);
        prop_assert!(feasible(&inst, &sol.n));
        for n in common::lattice(&inst).into_iter().filter(|n| feasible(&inst, n)) {
            prop_assert!(sol.objective >= naive_f(&inst, &n) - 1e-12);
        }
        let (naive_n, _) = naive_optimum(&inst, TIE_TOLERANCE);
        prop_assert_eq!(sol.n.0, naive_n);
    }

    #[test]
    fn dp_matches_brute_force(seed in any::<u64>(), xi in prop::collection::vec(0.0f64..3.0, 3)) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), SMALL);
        let rewards = &xi[..inst.num_sps()];
        let dp = solve_mdkp(&inst, rewards, DEFAULT_CELL_LIMIT).unwrap();
        prop_assert!(feasible(&inst, &dp.n));
        prop_assert!((dp.objective - brute_force_linear(&inst, rewards)).abs() <= 1e-12);
        let params = HeuristicParams::new(0.5).unwrap().with_xi(rewards.to_vec()).unwrap();
        let greedy = greedy_heuristic(&inst, &params).unwrap();
        prop_assert!(greedy.objective <= dp.objective + 1e-12);
    }

    #[test]
    fn greedy_is_feasible_for_any_alpha(seed in any::<u64>(), alpha in 0.001f64..=1.0) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), SMALL);
        let sol = greedy_heuristic(&inst, &HeuristicParams::new(alpha).unwrap()).unwrap();
        prop_assert!(feasible(&inst, &sol.n));
        prop_assert!(sol.nodes_explored <= common::saturation(&inst).iter().sum::<u64>());
    }

    #[test]
    fn proportional_shares_fill_the_pool(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), Shape {
            max_capacity: 500, ..SMALL
        });
        let alloc = proportional_allocation(&inst);
        prop_assert!(alloc.slack(&inst).iter().all(|&s| s == 0));
        prop_assert!(feasible(&inst, &alloc.n));
        for (p, sp) in inst.sps().iter().enumerate() {
            for r in 0..inst.dims() {
                prop_assert!(alloc.n[p] * sp.demand[r] <= alloc.theta[p][r]);
            }
        }
    }

    #[test]
    fn stream_meets_bound(seed in any::<u64>(), order in order_strategy()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), SMALL);
        let (_, opt) = naive_optimum(&inst, 0.0);
        let sol = solve_stream(&inst, order);
        let ratio = 1.0 / (1.0 + 2.0 * inst.dims() as f64) - inst.epsilon();
        prop_assert!(feasible(&inst, &sol.n));
        prop_assert!(sol.f.f + 1e-12 >= ratio * opt);
        prop_assert_eq!(sol.f.f, eval_f(&inst, &sol.n).unwrap().f);
    }

    #[test]
    fn stream_returns_best_level(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), SMALL);
        let (sol, levels) = solve_stream_detailed(&inst, ItemOrder::RoundRobin);
        for level in &levels {
            prop_assert!(feasible(&inst, &level.n));
            prop_assert!(level.f <= sol.f.f);
        }
    }
}

#[test]
fn simulated_blocking_within_three_halfwidths() {
    let cases = [(2.0, 1.0, 2u64), (5.0, 1.0, 6), (0.5, 2.0, 1), (12.0, 3.0, 5)];
    let mut total = 0;
    let mut inside = 0;
    for (i, &(lambda, mu, n)) in cases.iter().enumerate() {
        let inst = simple_instance(&[n], &[(lambda, mu, vec![1])]);
        let mut cfg = SimConfig::new(20_000.0, 100 + i as u64);
        cfg.replications = 50;
        let rep = simulate(&inst, &[n], &cfg).unwrap();
        let exact = erlang_b(OfferedLoad::new(lambda / mu).unwrap(), n);
        for r in &rep.per_sp[0].replications {
            total += 1;
            inside += usize::from((r.blocking - exact).abs() <= 3.0 * r.halfwidth);
        }
    }
    assert!(inside * 100 >= total * 99, "{inside}/{total}");
}

#[test]
fn deterministic_holding_times_give_same_blocking() {
    let inst = simple_instance(&[2], &[(2.0, 1.0, vec![1])]);
    let mut cfg = SimConfig::new(1e6, 8);
    cfg.holding = HoldingTime::Deterministic;
    let rep = simulate(&inst, &[2], &cfg).unwrap();
    assert!((rep.per_sp[0].empirical_blocking - 0.4).abs() <= 0.01);
}
