use proptest::prelude::*;

use weakinv_core::channel::{compose, random_channel};
use weakinv_core::lindblad::{integrate, lindblad_rhs, weak_invariant_rhs, IntegrationSettings, LindbladGenerator};
use weakinv_core::operator::{eigh, expectation, min_eigenvalue_of_difference};
use weakinv_core::random::{random_density, random_hermitian, random_matrix, Rng};
use weakinv_core::{HermitianOperator, Matrix, C64};

fn generator(rng: &mut Rng, dim: usize, n_ops: usize) -> LindbladGenerator {
    let h0 = random_hermitian(rng, dim).into_matrix();
    let h1 = random_hermitian(rng, dim).into_matrix();
    let mut gen = LindbladGenerator::new(dim, move |t| {
        let mut h = h0.clone();
        h.axpy(C64::new(0.5 * t, 0.0), &h1);
        h
    });
    for _ in 0..n_ops {
        let l = random_matrix(rng, dim).scale(0.5);
        let c = rng.uniform();
        gen = gen.with_dissipator(l, move |t| c * (1.0 + t));
    }
    gen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_decomposition_reconstructs(seed in any::<u64>(), dim in 1usize..12) {
        let mut rng = Rng::seed(seed);
        let a = random_hermitian(&mut rng, dim);
        let spec = eigh(&a).unwrap();
        prop_assert!(spec.reconstruction_error(&a) < 1e-10 * a.max_abs().max(1.0));
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn channels_are_unital_dual_and_kadison(seed in any::<u64>(), dim in 2usize..=6, n_kraus in 1usize..=4) {
        let ch = random_channel(dim, n_kraus, seed).unwrap();
        let mut rng = Rng::stream(seed, 1);
        let one = ch.adjoint_apply(&HermitianOperator::identity(dim)).unwrap();
        prop_assert!((one.matrix() - &Matrix::identity(dim)).max_abs() < 1e-10);

        let x = random_hermitian(&mut rng, dim);
        let rho = random_density(&mut rng, dim);
        let lhs = x.trace_product(&ch.apply(&rho).unwrap());
        let rhs = ch.adjoint_apply(&x).unwrap().trace_product(&rho);
        prop_assert!((lhs - rhs).norm() < 1e-10);

        let gap = ch.kadison_gap(&x).unwrap();
        let zero = HermitianOperator::new(Matrix::zeros(dim)).unwrap();
        prop_assert!(min_eigenvalue_of_difference(&gap, &zero).unwrap() >= -1e-9);

        // variance of the pulled-back observable grows under the channel
        let sq = HermitianOperator::new(x.matrix() * x.matrix()).unwrap();
        let pulled = ch.adjoint_apply(&x).unwrap();
        let m1 = expectation(&pulled, &rho).unwrap();
        let second = expectation(&ch.adjoint_apply(&sq).unwrap(), &rho).unwrap();
        let pulled_sq = HermitianOperator::new(pulled.matrix() * pulled.matrix()).unwrap();
        let var_pulled = expectation(&pulled_sq, &rho).unwrap() - m1 * m1;
        prop_assert!(second - m1 * m1 >= var_pulled - 1e-9);
    }

    #[test]
    fn composition_is_sequential_application(seed in any::<u64>(), dim in 2usize..=4) {
        let a = random_channel(dim, 2, seed).unwrap().over(0.0, 0.5);
        let b = random_channel(dim, 2, seed ^ 0xabcdef).unwrap().over(0.5, 1.0);
        let mut rng = Rng::stream(seed, 2);
        let rho = random_density(&mut rng, dim);
        let both = compose(&b, &a).unwrap().apply(&rho).unwrap();
        let seq = b.apply(&a.apply(&rho).unwrap()).unwrap();
        prop_assert!((&*both - &*seq).max_abs() < 1e-10);
    }

    #[test]
    fn generators_preserve_trace_and_identity(seed in any::<u64>(), dim in 2usize..=5, n_ops in 0usize..=3) {
        let mut rng = Rng::seed(seed);
        let gen = generator(&mut rng, dim, n_ops);
        let rho = random_density(&mut rng, dim);
        let out = lindblad_rhs(&gen, &rho, 0.3).unwrap();
        prop_assert!(out.trace().norm() < 1e-11 * out.max_abs().max(1.0));
        let id = weak_invariant_rhs(&gen, &HermitianOperator::identity(dim), 0.3).unwrap();
        prop_assert!(id.max_abs() < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weak_invariant_statistics_along_random_dynamics(seed in any::<u64>(), dim in 2usize..=4, n_ops in 1usize..=2) {
        let mut rng = Rng::seed(seed);
        let gen = generator(&mut rng, dim, n_ops);
        let rho0 = random_density(&mut rng, dim);
        let i0 = random_hermitian(&mut rng, dim);
        let settings = IntegrationSettings::new(0.0, 0.2, 1e-3);
        let traj = integrate(&gen, &rho0, &i0, &settings).unwrap();
        prop_assert!(traj.conservation_drift() < 1e-9 * traj.records[0].exp_i.abs().max(1.0));
        prop_assert!(traj.variance_max_decrease() <= 1e-9);
        prop_assert!(traj.growth_agreement(1e-6, 1e-3).passed());
        prop_assert!(traj.records.iter().all(|r| r.growth_formula >= -1e-12));

        let shifted = integrate(&gen, &rho0, &i0.shifted(2.5), &settings).unwrap();
        for (a, b) in traj.records.iter().zip(&shifted.records) {
            prop_assert!((a.var_i - b.var_i).abs() < 1e-9);
        }
    }
}
