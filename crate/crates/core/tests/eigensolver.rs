mod common;

use common::{c, instance, min_distance, schur_eigenvalues, solver_constants, Kind};
use nalgebra::DMatrix;
use pseudoeig::eigensolver::{
    eigenvector_for, estimate_eigenvalue, estimate_real_eigenvalue, grid_spacing, has_eigenvalue_in_region,
    level_count, Outcome, Region, RegionResult, SolverParams,
};
use pseudoeig::matgen::{jordan_matrix, JordanSpec};
use pseudoeig::oracle::SigmaOracleConfig;
use pseudoeig::{Complex64, ComplexMatrix, Error, ErrorCategory};
use proptest::prelude::*;

#[test]
fn spacing_and_levels() {
    assert_eq!(grid_spacing(1, 1.0, 1).unwrap(), 1.0 / 6.0);
    assert_eq!(grid_spacing(1, 2.0, 2).unwrap(), 1.0 / 72.0);
    assert_eq!(grid_spacing(3, 1.0, 1).unwrap(), 1.0 / 24.0);
    assert_eq!(level_count(1e-3), 10);
    assert_eq!(level_count(0.5), 1);
    assert_eq!(level_count(2f64.powi(-8)), 8);
    for k in 1..30 {
        let eps = 2f64.powi(-k) * 1.5;
        let l = level_count(eps);
        assert!(2f64.powi(-(l as i32)) <= eps && 2f64.powi(1 - l as i32) > eps);
    }
}

#[test]
fn diagonal_two_by_two() {
    let eigs = [c(0.5, 0.0), c(-0.25, 0.3)];
    let a = ComplexMatrix::diagonal(&eigs);
    let (mu, trace) = estimate_eigenvalue(&a, &SolverParams::new(1e-3, 1.0, 1)).unwrap();
    assert!(min_distance(mu, &eigs) <= 1e-3);
    assert_eq!(trace.planned_levels, 10);
    assert!(matches!(trace.outcome, Outcome::Found { .. }));
}

#[test]
fn zero_matrix() {
    let (mu, _) = estimate_eigenvalue(&ComplexMatrix::zeros(4), &SolverParams::new(0.1, 1.0, 1)).unwrap();
    assert!(mu.norm() <= 0.1);
}

#[test]
fn jordan_block_with_generous_kappa() {
    let g = jordan_matrix(&JordanSpec::new(vec![c(0.5, 0.0)], vec![2], 1.0, 0)).unwrap();
    assert!(g.kappa_jordan.unwrap() <= 1.5);
    let (mu, _) = estimate_eigenvalue(&g.matrix, &SolverParams::new(1e-2, 1.5, 2)).unwrap();
    assert!((mu - g.true_eigenvalues[0]).norm() <= 1e-2);
    assert!((g.true_eigenvalues[0].re - 0.4142).abs() < 1e-4);
}

#[test]
fn norm_above_one_is_an_input_error() {
    let a = ComplexMatrix::real_diagonal(&[1.5, 0.0]);
    let err = estimate_eigenvalue(&a, &SolverParams::new(1e-2, 1.0, 1)).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Input);
}

#[test]
fn understated_kappa_is_reported_as_bound_violation() {
    // strongly non-normal 2x2: with kappa = 1 the disk update is too tight
    let a = ComplexMatrix::from_real_rows(&[&[0.0, 0.9], &[0.0, 0.01]]).unwrap();
    let err = estimate_eigenvalue(&a, &SolverParams::new(1e-6, 1.0, 1)).unwrap_err();
    assert!(matches!(err, Error::BoundViolation { .. }), "{err:?}");
    assert!(err.trace().is_some());
}

#[test]
fn real_variant_examples() {
    let a = ComplexMatrix::real_diagonal(&[0.9, -0.9, 0.1]);
    let (x, trace) = estimate_real_eigenvalue(&a, &SolverParams::new(1e-3, 1.0, 1)).unwrap();
    assert!([0.9, -0.9, 0.1].iter().any(|l| (x - l).abs() <= 1e-3));
    assert!(trace.levels.iter().all(|r| r.grid_points == 2 * r.half_width + 1));

    let half = ComplexMatrix::real_diagonal(&[0.5; 4]);
    let (x, _) = estimate_real_eigenvalue(&half, &SolverParams::new(1e-4, 1.0, 1)).unwrap();
    assert!((x - 0.5).abs() <= 1e-4);
}

#[test]
fn real_variant_on_nonsymmetric_tridiagonal() {
    // tridiag(b, 0, c) is similar to a symmetric matrix through diag((b/c)^(k/2))
    let (n, b, cc) = (8usize, 0.3, 0.1);
    let a = ComplexMatrix::from_fn(n, |i, j| {
        if i == j + 1 {
            c(b, 0.0)
        } else if j == i + 1 {
            c(cc, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
    .unwrap();
    let kappa = (b / cc).powf((n - 1) as f64 / 2.0);
    let truth: Vec<Complex64> = (1..=n)
        .map(|k| c(2.0 * (b * cc).sqrt() * (std::f64::consts::PI * k as f64 / (n + 1) as f64).cos(), 0.0))
        .collect();
    let schur = schur_eigenvalues(&a);
    assert!(common::matching_error(&schur, &truth) < 1e-10);
    let eps = 1e-3;
    let (x, _) = estimate_real_eigenvalue(&a, &SolverParams::new(eps, kappa * 1.01, 1)).unwrap();
    assert!(min_distance(c(x, 0.0), &truth) <= eps);
}

#[test]
fn region_examples() {
    let params = SolverParams::new(1e-3, 1.0, 1);
    let (r, _) = has_eigenvalue_in_region(&ComplexMatrix::real_diagonal(&[0.5, -0.5]), &params).unwrap();
    match r {
        RegionResult::Found { eigenvalue } => assert!((eigenvalue - c(0.5, 0.0)).norm() <= 1e-3),
        other => panic!("{other:?}"),
    }
    let (r, trace) = has_eigenvalue_in_region(&ComplexMatrix::real_diagonal(&[-0.5, -0.2]), &params).unwrap();
    assert_eq!(r, RegionResult::None { margin: 1.0 / 6.0 });
    assert_eq!(trace.levels.len(), 1);
    // boundary convention: the region is closed, so 0 on the dividing line is found
    let (r, _) = has_eigenvalue_in_region(&ComplexMatrix::zeros(2), &params).unwrap();
    assert!(matches!(r, RegionResult::Found { eigenvalue } if eigenvalue.norm() <= 1e-3));
}

#[test]
fn region_checks_refuse_noise() {
    let params = SolverParams::new(1e-2, 1.0, 1).with_oracle(SigmaOracleConfig::noisy(1e-3, 0.01, 1));
    let err = has_eigenvalue_in_region(&ComplexMatrix::zeros(2), &params).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
}

#[test]
fn rectangle_region_and_real_segment() {
    let a = ComplexMatrix::diagonal(&[c(0.5, 0.5), c(-0.5, 0.0)]);
    let rect = Region::Rectangle { re_min: 0.2, re_max: 0.8, im_min: 0.2, im_max: 0.8 };
    let (r, _) = has_eigenvalue_in_region(&a, &SolverParams::new(1e-3, 1.0, 1).with_region(rect)).unwrap();
    assert!(matches!(r, RegionResult::Found { eigenvalue } if (eigenvalue - c(0.5, 0.5)).norm() <= 1e-3));
    let (r, _) =
        has_eigenvalue_in_region(&a, &SolverParams::new(1e-3, 1.0, 1).with_region(Region::RealSegment)).unwrap();
    assert!(matches!(r, RegionResult::Found { eigenvalue } if (eigenvalue - c(-0.5, 0.0)).norm() <= 1e-3));
}

#[test]
fn eigenvector_examples() {
    let a = ComplexMatrix::real_diagonal(&[0.5, -0.25]);
    let v = eigenvector_for(&a, c(0.49, 0.0), 0.75, Some(c(0.5, 0.0))).unwrap();
    assert!((v.vector.entries()[0] - c(1.0, 0.0)).norm() < 1e-12);
    assert!((v.residual - 0.01).abs() < 1e-12);
    assert!(v.warnings.is_empty());

    let err = eigenvector_for(&a, c(0.1, 0.0), 0.75, Some(c(0.5, 0.0))).unwrap_err();
    assert!(matches!(err, Error::Contract(_)));

    // equidistant from 0.5 and -0.5
    let tie = ComplexMatrix::real_diagonal(&[0.5, -0.5]);
    let v = eigenvector_for(&tie, c(0.0, 0.0), 1.0, None).unwrap();
    assert!(v.degenerate && !v.warnings.is_empty());
}

/// Null vector of `A - lambda I` by inverse iteration through nalgebra's LU.
fn inverse_iteration(a: &ComplexMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = a.n();
    let mut m = a.to_dmatrix();
    for i in 0..n {
        m[(i, i)] -= lambda + c(1e-13, 0.0);
    }
    let lu = m.lu();
    let mut x = DMatrix::from_element(n, 1, c(1.0, 0.3));
    for _ in 0..3 {
        x = lu.solve(&x).unwrap();
        let norm = x.norm();
        x /= c(norm, 0.0);
    }
    x.iter().copied().collect()
}

#[test]
fn eigenvector_matches_inverse_iteration() {
    let g = instance(Kind::Diagonalizable(10.0), 8, 3);
    for &lambda in &g.true_eigenvalues {
        let v = eigenvector_for(&g.matrix, lambda, 0.05, Some(lambda)).unwrap();
        assert!(v.residual <= 1e-10, "{}", v.residual);
        let w = inverse_iteration(&g.matrix, lambda);
        let overlap: Complex64 = v.vector.entries().iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
        assert!(overlap.norm_sqr() >= 1.0 - 1e-8, "{}", overlap.norm_sqr());
    }
}

fn check_levels(g: &pseudoeig::matgen::GeneratedMatrix, eps: f64) -> Result<(), TestCaseError> {
    let (kappa, m) = solver_constants(g);
    let (mu, trace) = estimate_eigenvalue(&g.matrix, &SolverParams::new(eps, kappa, m)).unwrap();
    prop_assert!(min_distance(mu, &g.true_eigenvalues) <= eps);
    prop_assert_eq!(trace.levels.len(), level_count(eps));
    for rec in &trace.levels {
        let accepted = rec.accepted.unwrap();
        let bound = 2f64.powi(-(rec.level as i32));
        prop_assert!(rec.next_radius.unwrap() <= bound * (1.0 + 1e-12));
        prop_assert!(min_distance(accepted, &g.true_eigenvalues) <= bound * (1.0 + 1e-9));
        prop_assert!(rec.oracle_calls <= rec.grid_points);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_level_halves_the_error(seed in any::<u64>(), n in 2usize..6, which in 0usize..3, k in 3i32..10) {
        let kappa = [1.0, 5.0, 20.0][which];
        let g = instance(Kind::Diagonalizable(kappa), n, seed);
        check_levels(&g, 2f64.powi(-k))?;
    }

    #[test]
    fn defective_levels_halve_the_error(seed in any::<u64>(), k in 3i32..7) {
        // n = 2 keeps the m = 2 grids cheap
        let g = instance(Kind::Defective(2), 2, seed);
        check_levels(&g, 2f64.powi(-k))?;
    }

    #[test]
    fn right_half_detection(eigs in prop::collection::vec((-0.9f64..0.9, -0.4f64..0.4), 2..5)) {
        let eigs: Vec<Complex64> = eigs.into_iter().map(|(a, b)| c(a, b)).collect();
        let a = ComplexMatrix::diagonal(&eigs);
        let params = SolverParams::new(1e-3, 1.0, 1);
        let (r, _) = has_eigenvalue_in_region(&a, &params).unwrap();
        let delta1 = 1.0 / 6.0;
        if eigs.iter().any(|z| z.re >= 0.0) {
            let found = matches!(r, RegionResult::Found { .. });
            prop_assert!(found);
        }
        if eigs.iter().all(|z| z.re < -2.0 * delta1) {
            prop_assert_eq!(r.clone(), RegionResult::None { margin: delta1 });
        }
        if let RegionResult::Found { eigenvalue } = r {
            prop_assert!(min_distance(eigenvalue, &eigs) <= 1e-3);
        }
    }

    #[test]
    fn noisy_runs_are_reproducible(seed in any::<u64>()) {
        let a = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(-0.25, 0.3)]);
        let params = SolverParams::new(1e-2, 1.0, 1)
            .with_p_fail(0.1)
            .with_oracle(SigmaOracleConfig::noisy(1.0, 0.0, seed));
        let x = estimate_eigenvalue(&a, &params).map(|(mu, t)| (mu, t.total_oracle_calls)).map_err(|e| e.to_string());
        let y = estimate_eigenvalue(&a, &params).map(|(mu, t)| (mu, t.total_oracle_calls)).map_err(|e| e.to_string());
        prop_assert_eq!(x, y);
    }
}
