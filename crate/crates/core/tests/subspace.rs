mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use sisfit::subspace::best_subspace_of;
use sisfit::{best_subspace, residual, CMatrix, Tolerances, C64};

fn columns(a: &CMatrix) -> Vec<Vec<C64>> {
    a.columns().map(|c| c.to_vec()).collect()
}

fn sigma_sq_tail(a: &CMatrix, n: usize) -> f64 {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.iter().skip(n).map(|x| x * x).sum()
}

fn random_unit(rng: &mut impl rand::Rng, dim: usize) -> Vec<C64> {
    let v = random_vec(rng, dim);
    let n = norm_sqr(&v).sqrt();
    v.into_iter().map(|z| z / n).collect()
}

#[test]
fn three_vectors_in_c4_rank_one() {
    let mut rng = rng(31);
    let a = random_matrix(&mut rng, 4, 3);
    let fit = best_subspace(&a, 1, &Tolerances::default()).unwrap();
    let tail = sigma_sq_tail(&a, 1);
    assert!((fit.error - tail).abs() < 1e-10 * (1.0 + tail));

    let data = columns(&a);
    let achieved = residual(&data, &fit.frame_vectors);
    let mut best = achieved;
    for _ in 0..10_000 {
        let r = residual(&data, &[random_unit(&mut rng, 4)]);
        assert!(r >= fit.error - 1e-10 * (1.0 + fit.error));
        best = best.min(r);
    }
    assert!((best - fit.error).abs() < 1e-8);
}

#[test]
fn orthonormal_pair_example() {
    let e0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let e1 = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let fit = best_subspace_of(&[e0.clone(), e1.clone()], 1, &Tolerances::default()).unwrap();
    assert_eq!(fit.error, 1.0);
    assert!((norm_sqr(&fit.frame_vectors[0]) - 1.0).abs() < 1e-15);
    assert!((residual(&[e0, e1], &fit.frame_vectors) - 1.0).abs() < 1e-15);
}

#[test]
fn residual_matches_normal_equations() {
    let mut rng = rng(32);
    for _ in 0..20 {
        let a = random_matrix(&mut rng, 7, 4);
        let b = random_matrix(&mut rng, 7, 3);
        let lib = residual(&columns(&a), &columns(&b));
        // min_c ‖a − B c‖² via (B*B) c = B* a
        let bn = to_na(&b);
        let bb = bn.adjoint() * &bn;
        let chol = bb.cholesky().unwrap();
        let mut oracle = 0.0;
        for col in a.columns() {
            let av = DVector::from_column_slice(col);
            let c = chol.solve(&(bn.adjoint() * &av));
            oracle += (av - &bn * c).norm_squared();
        }
        assert!((lib - oracle).abs() < 1e-10 * (1.0 + oracle));
    }
}

#[test]
fn contained_data_has_zero_residual() {
    let mut rng = rng(33);
    let b = random_matrix(&mut rng, 6, 2);
    let coeffs = random_matrix(&mut rng, 2, 3);
    let a = b.matmul(&coeffs).unwrap();
    let data = columns(&a);
    let total: f64 = data.iter().map(|v| norm_sqr(v)).sum();
    assert!(residual(&data, &columns(&b)) <= 1e-12 * total);
}

#[test]
fn uniqueness_under_permutation() {
    let mut rng = rng(34);
    let a = random_matrix(&mut rng, 6, 4);
    let tol = Tolerances::default();
    let fit = best_subspace(&a, 2, &tol).unwrap();
    assert!(fit.gap_ok);
    let perm = [2, 0, 3, 1];
    let pa = CMatrix::from_fn(6, 4, |r, c| a[(r, perm[c])]);
    let pfit = best_subspace(&pa, 2, &tol).unwrap();
    let p1 = projector_of_columns(&fit.frame_vectors, 6);
    let p2 = projector_of_columns(&pfit.frame_vectors, 6);
    assert!((p1 - p2).norm() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimality_against_random_subspaces(seed in any::<u64>(), n in 0usize..4) {
        let mut rng = rng(seed);
        let a = random_matrix(&mut rng, 5, 4);
        let fit = best_subspace(&a, n, &Tolerances::default()).unwrap();
        let data = columns(&a);
        for _ in 0..50 {
            let basis: Vec<Vec<C64>> = (0..n).map(|_| random_vec(&mut rng, 5)).collect();
            prop_assert!(residual(&data, &basis) >= fit.error - 1e-10 * (1.0 + fit.error));
        }
        // Eckart–Young residual identity
        let tail = sigma_sq_tail(&a, n);
        prop_assert!((residual(&data, &fit.frame_vectors) - tail).abs() <= 1e-10 * (1.0 + tail));
        prop_assert!((fit.error - fit.eigenvalues[n..].iter().sum::<f64>()).abs() <= 1e-10 * (1.0 + fit.error));
    }

    #[test]
    fn frame_vectors_are_parseval_and_in_span(seed in any::<u64>(), n in 1usize..5, rank in 1usize..4) {
        let mut rng = rng(seed);
        let b = random_matrix(&mut rng, 6, rank);
        let a = b.matmul(&random_matrix(&mut rng, rank, 4)).unwrap();
        let fit = best_subspace(&a, n, &Tolerances::default()).unwrap();
        prop_assert_eq!(fit.effective_rank, rank);
        let nonzero: Vec<&Vec<C64>> = fit.frame_vectors.iter().filter(|q| norm_sqr(q) > 0.0).collect();
        prop_assert_eq!(nonzero.len(), n.min(rank));
        for (i, q) in nonzero.iter().enumerate() {
            prop_assert!((norm_sqr(q) - 1.0).abs() < 1e-10);
            for p in &nonzero[..i] {
                prop_assert!(dot(q, p).norm() < 1e-10);
            }
        }
        // frame property on random elements of W
        let data = columns(&a);
        for _ in 0..5 {
            let mut f = vec![C64::new(0.0, 0.0); 6];
            for q in &fit.frame_vectors {
                let c = cnormal(&mut rng);
                f.iter_mut().zip(q.iter()).for_each(|(x, y)| *x += c * y);
            }
            let fsum: f64 = fit.frame_vectors.iter().map(|q| dot(&f, q).norm_sqr()).sum();
            prop_assert!((fsum - norm_sqr(&f)).abs() <= 1e-10 * (1.0 + norm_sqr(&f)));
        }
        // reduction: every q_i lies in span{a_j}
        for q in &fit.frame_vectors {
            prop_assert!(residual(std::slice::from_ref(q), &data) <= 1e-10);
        }
    }
}
