mod common;

use common::{all_inputs, random_instance, random_matrix, random_row_sums, InstanceBounds};
use minrank_core::{
    assemble_objective, brute_force_optimal_length, extract_code, extract_code_with_rows,
    free_bit_count, scalar_objective, simulate_roundtrip, solve_exhaustive, solve_greedy,
    verify_algebraic, FreeBitLayout, Gf2Matrix, GreedySearch, ProblemInstance, RowBasis,
    SolverConfig, UserSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TINY: InstanceBounds = InstanceBounds {
    max_total_bits: 4,
    max_users: 3,
    max_cache_rows: 2,
    max_free_bits: 10,
};

fn assert_solution_valid(inst: &ProblemInstance, assignment: &minrank_core::ObjectiveAssignment) {
    let sol = extract_code(inst, assignment).unwrap();
    assert_eq!(sol.c_ic().rank(), sol.beta());
    assert_eq!(sol.beta(), assignment.achieved_rank());
    assert!(verify_algebraic(inst, &sol).is_valid());
    for x in all_inputs(inst.total_bits()) {
        let got = simulate_roundtrip(inst, &sol, &x).unwrap();
        for (k, bits) in got.iter().enumerate() {
            assert_eq!(*bits, inst.request_matrix(k).mul_vec(&x).unwrap());
        }
    }
}

#[test]
fn exhaustive_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..250 {
        let inst = random_instance(&mut rng, TINY);
        let out = solve_exhaustive(&inst, &SolverConfig::exhaustive()).unwrap();
        let oracle = brute_force_optimal_length(&inst, inst.total_bits()).unwrap();
        assert_eq!(out.beta, oracle, "{inst:?}");
        assert_solution_valid(&inst, &out.best);
    }
}

#[test]
fn objective_rank_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let inst = random_instance(&mut rng, InstanceBounds { max_total_bits: 8, max_cache_rows: 4, max_free_bits: 40, ..TINY });
        let layout = FreeBitLayout::new(&inst);
        let a = layout.decoders_from(|_| rng.random_bool(0.5));
        let obj = assemble_objective(&inst, a).unwrap();
        assert_eq!(obj.achieved_rank(), obj.assembled().rank());
        let per_user = (0..inst.num_users())
            .map(|k| {
                let block = obj.assembled().row_block(layout.row_offset(k), inst.request_rows(k));
                let expected = inst
                    .request_matrix(k)
                    .add(&obj.a_mats()[k].mul(inst.user(k).side_info()).unwrap())
                    .unwrap();
                assert_eq!(block, expected);
                block.rank()
            })
            .max()
            .unwrap();
        assert!(obj.achieved_rank() >= per_user);
        assert!(obj.achieved_rank() <= inst.total_request_rows());
    }
}

#[test]
fn greedy_never_beats_exhaustive_and_trace_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..150 {
        let inst = random_instance(&mut rng, InstanceBounds { max_total_bits: 6, max_free_bits: 12, ..TINY });
        let exact = solve_exhaustive(&inst, &SolverConfig::exhaustive()).unwrap().beta;
        let mut search = GreedySearch::new(&inst, 0.5, seed).unwrap();
        let mut last = search.best_rank();
        for _ in 0..50 {
            search.step();
            assert!(search.best_rank() <= last);
            last = search.best_rank();
        }
        assert!(last >= exact);
        let out = search.into_outcome();
        assert_eq!(out.beta, last);
        assert_eq!(out.best.achieved_rank(), last);
        assert_solution_valid(&inst, &out.best);
    }
}

#[test]
fn greedy_usually_finds_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let runs = 400;
    let mut hits = 0;
    for seed in 0..runs {
        let inst = random_instance(&mut rng, InstanceBounds { max_total_bits: 6, max_cache_rows: 3, max_free_bits: 12, ..TINY });
        let exact = solve_exhaustive(&inst, &SolverConfig::exhaustive()).unwrap().beta;
        let greedy = solve_greedy(&inst, &SolverConfig::greedy(200, 0.5, seed)).unwrap().beta;
        assert!(greedy >= exact);
        hits += usize::from(greedy == exact);
    }
    assert!(hits * 100 >= runs as usize * 95, "greedy optimal in {hits}/{runs}");
}

#[test]
fn exhaustive_is_invariant_under_user_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, InstanceBounds { max_total_bits: 6, max_free_bits: 12, ..TINY });
        let mut users = inst.users().to_vec();
        users.reverse();
        users.rotate_left(1);
        let permuted = ProblemInstance::new(inst.num_packets(), inst.packet_bits(), users).unwrap();
        let cfg = SolverConfig::exhaustive();
        assert_eq!(
            solve_exhaustive(&inst, &cfg).unwrap().beta,
            solve_exhaustive(&permuted, &cfg).unwrap().beta
        );
    }
}

#[test]
fn coarser_side_information_never_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..150 {
        let split = random_instance(&mut rng, InstanceBounds { max_total_bits: 5, max_cache_rows: 3, max_free_bits: 12, ..TINY });
        let users = split
            .users()
            .iter()
            .map(|u| {
                let rows = rng.random_range(0..=u.cache_bits());
                UserSpec::new(u.requests().to_vec(), random_row_sums(&mut rng, u.side_info(), rows))
            })
            .collect();
        let coded = ProblemInstance::new(split.num_packets(), split.packet_bits(), users).unwrap();
        let cfg = SolverConfig::exhaustive();
        assert!(
            solve_exhaustive(&split, &cfg).unwrap().beta
                <= solve_exhaustive(&coded, &cfg).unwrap().beta
        );
    }
}

#[test]
fn zero_length_exactly_when_cache_suffices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut zeros = 0;
    for _ in 0..300 {
        let inst = random_instance(&mut rng, InstanceBounds { max_total_bits: 3, max_cache_rows: 3, max_free_bits: 12, ..TINY });
        let sufficient = (0..inst.num_users()).all(|k| {
            let s = inst.user(k).side_info();
            let mut span = RowBasis::new(inst.total_bits());
            for r in 0..s.rows() {
                span.insert_row(s, r);
            }
            span.spans(&inst.request_matrix(k))
        });
        let beta = solve_exhaustive(&inst, &SolverConfig::exhaustive()).unwrap().beta;
        assert_eq!(beta == 0, sufficient);
        zeros += usize::from(sufficient);
    }
    assert!(zeros > 0, "generator never produced a cache-sufficient instance");
}

#[test]
fn any_maximal_row_subset_decodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, TINY);
        let out = solve_exhaustive(&inst, &SolverConfig::exhaustive()).unwrap();
        let obj = &out.best;
        // Scan rows in a shuffled order to pick a different maximal subset.
        let mut order: Vec<usize> = (0..obj.assembled().rows()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut basis = RowBasis::new(inst.total_bits());
        let mut rows: Vec<usize> = order
            .into_iter()
            .filter(|&r| basis.insert_row(obj.assembled(), r))
            .collect();
        rows.sort_unstable();
        let sol = extract_code_with_rows(&inst, obj, &rows).unwrap();
        assert_eq!(sol.beta(), out.beta);
        assert!(verify_algebraic(&inst, &sol).is_valid());
    }
}

#[test]
fn scalar_objective_matches_general_assembly() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let k = rng.random_range(1..=8);
        let sbar = random_matrix(&mut rng, k, k, 0.5);
        let abar: Vec<bool> = (0..k).map(|_| rng.random_bool(0.5)).collect();
        let users = (0..k)
            .map(|u| {
                let s = sbar.transpose().row_block(u, 1);
                UserSpec::new(vec![u], s)
            })
            .collect();
        let inst = ProblemInstance::new(k, 1, users).unwrap();
        let a = abar
            .iter()
            .map(|&b| Gf2Matrix::from_rows(1, &[[b as u8]]).unwrap())
            .collect();
        let obj = assemble_objective(&inst, a).unwrap();
        let scalar = scalar_objective(&sbar, &abar).unwrap();
        assert_eq!(*obj.assembled(), scalar);
        // Same rank as the untransposed I + S̄·diag(ā).
        let diag = {
            let mut d = Gf2Matrix::zeros(k, k);
            for (i, &b) in abar.iter().enumerate() {
                d.set(i, i, b);
            }
            d
        };
        let direct = Gf2Matrix::identity(k).add(&sbar.mul(&diag).unwrap()).unwrap();
        assert_eq!(direct.rank(), scalar.rank());
    }
}

#[test]
fn free_bits_match_layout() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, InstanceBounds { max_total_bits: 8, max_cache_rows: 4, max_free_bits: 64, ..TINY });
        let expected: usize = (0..inst.num_users())
            .map(|k| inst.request_rows(k) * inst.user(k).cache_bits())
            .sum();
        assert_eq!(free_bit_count(&inst), expected);
    }
}
