use proptest::prelude::*;

use qledger::channels::{apply_channel, apply_random_unitary_map, apply_unitary, KrausChannel, Povm, RandomUnitaryMap};
use qledger::entropy::{
    classical_mutual_information, joint_entropy_margin, mutual_information, relative_entropy, von_neumann_entropy,
    JointDistribution,
};
use qledger::ledger::{entropy_ledger, verify_erasure_bound, Evolution};
use qledger::linalg;
use qledger::states::{
    partial_trace, purify, random_density, random_density_with, random_pure_state, random_unitary, seeded_rng,
    tensor, Partition,
};

fn dim_rank() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5).prop_flat_map(|d| (Just(d), 1..=d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_lies_between_zero_and_log_dim((d, r) in dim_rank(), seed in any::<u64>()) {
        let rho = random_density(d, r, seed).unwrap();
        let s = von_neumann_entropy(&rho);
        prop_assert!(s >= -1e-9);
        prop_assert!(s <= (d as f64).log2() + 1e-9);
        prop_assert!(s <= (r as f64).log2() + 1e-9);
    }

    #[test]
    fn unitary_conjugation_preserves_entropy((d, r) in dim_rank(), seed in any::<u64>()) {
        let rho = random_density(d, r, seed).unwrap();
        let u = random_unitary(d, seed.wrapping_add(1));
        let out = apply_unitary(&u, &rho).unwrap();
        prop_assert!((von_neumann_entropy(&out) - von_neumann_entropy(&rho)).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_is_nonnegative((d, r) in dim_rank(), seed in any::<u64>()) {
        let rho = random_density(d, r, seed).unwrap();
        let sigma = random_density(d, d, seed ^ 0xabcd).unwrap();
        let dist = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(dist.is_finite());
        prop_assert!(dist >= -1e-9);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-8);
    }

    #[test]
    fn purification_reduces_back((d, r) in dim_rank(), seed in any::<u64>()) {
        let rho = random_density(d, r, seed).unwrap();
        let psi = purify(&rho).unwrap();
        let back = psi.reduced(&[0]).unwrap();
        prop_assert!(back.max_abs_diff(&rho).unwrap() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product_returns_factors(d1 in 1usize..=3, d2 in 1usize..=3, seed in any::<u64>()) {
        let a = random_density(d1, d1, seed).unwrap();
        let b = random_density(d2, 1, seed ^ 1).unwrap();
        let ab = tensor(&a, &b).unwrap();
        prop_assert!(partial_trace(&ab, &[0]).unwrap().max_abs_diff(&a).unwrap() < 1e-12);
        prop_assert!(partial_trace(&ab, &[1]).unwrap().max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn channels_output_states(d_in in 1usize..=3, d_out in 1usize..=3, extra in 0usize..=2, seed in any::<u64>()) {
        let n_kraus = d_in.div_ceil(d_out) + extra;
        let mut rng = seeded_rng(seed);
        let channel = KrausChannel::random(d_in, d_out, n_kraus, &mut rng).unwrap();
        let rho = random_density_with(vec![d_in], d_in, &mut rng).unwrap();
        let out = apply_channel(&channel, &rho).unwrap();
        prop_assert_eq!(out.dim(), d_out);
        prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-10);
        prop_assert!(out.spectrum().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn mixing_unitaries_never_lowers_entropy(d in 2usize..=4, k in 1usize..=4, seed in any::<u64>()) {
        let rho = random_density(d, 1 + (seed as usize) % d, seed).unwrap();
        let p = 1.0 / k as f64;
        let branches = (0..k).map(|n| (p, random_unitary(d, seed.wrapping_add(n as u64 + 7)))).collect();
        let map = RandomUnitaryMap::new(branches).unwrap();
        let out = apply_random_unitary_map(&map, &rho).unwrap();
        prop_assert!(von_neumann_entropy(&out) >= von_neumann_entropy(&rho) - 1e-9);
    }

    #[test]
    fn ledger_balances(da in 1usize..=3, dc in 1usize..=3, dr in 1usize..=3, seed in any::<u64>()) {
        let dims = vec![da, dc, dr];
        let mut rng = seeded_rng(seed);
        let psi = random_pure_state(dims, &mut rng).unwrap();
        let u = random_unitary(psi.dim(), seed ^ 3);
        let partition = Partition::contiguous(1, 1, 3).unwrap();
        let record = entropy_ledger(&psi, &Evolution::Unitary(u), &partition).unwrap();
        prop_assert!(record.residual.abs() < 1e-8);
        prop_assert!((record.recomputed_residual() - record.residual).abs() < 1e-12);
    }

    #[test]
    fn quantum_mutual_information_bounds_measured(dc in 2usize..=3, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let rho = random_density_with(vec![2, dc], 1 + (seed as usize) % (2 * dc), &mut rng).unwrap();
        let partition = Partition::contiguous(1, 1, 2).unwrap();
        let pa = Povm::random(2, 3, &mut rng).unwrap();
        let pc = Povm::random(dc, 2, &mut rng).unwrap();
        let record = verify_erasure_bound(&rho, &partition, &pa, &pc).unwrap();
        prop_assert!(record.holds());
        prop_assert!((record.quantum_mi - mutual_information(&rho, &partition).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn classical_tables_dominate_marginals(
        rows in 1usize..=4,
        cells in prop::collection::vec(0.0f64..1.0, 16),
        cols in 1usize..=4,
    ) {
        let mut p: Vec<f64> = cells[..rows * cols].to_vec();
        let total: f64 = p.iter().sum();
        prop_assume!(total > 1e-6);
        p.iter_mut().for_each(|x| *x /= total);
        let joint = JointDistribution::new(rows, cols, p).unwrap();
        prop_assert!(joint_entropy_margin(&joint) >= -1e-9);
        prop_assert!(classical_mutual_information(&joint) >= -1e-12);
    }
}
