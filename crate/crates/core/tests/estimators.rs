mod common;

use common::{gauss_jordan_inverse, gaussian_dataset, spectral_norm_oracle, truncated_cov_oracle};
use dpbandcov::datagen::{
    class_membership_diagnostics, make_exponential, make_power_deterministic, sample_mvn, CovarianceModel, Family,
};
use dpbandcov::estimators::{
    adaptive_estimator, blockwise_tridiagonal, dp_cov_block, naive_full_estimator, precision_estimator,
    AdaptiveConfig, NormKind, TridiagonalConfig,
};
use dpbandcov::geometry::{band_partition, hierarchical_partition, tridiagonal_mask, IndexBlock, Interval, RegionMask};
use dpbandcov::matrix::{sym_eigen, SymMatrix};
use dpbandcov::privacy::block_cov_sensitivity;
use dpbandcov::RandomStream;

#[test]
fn sensitivity_sweep_over_parameters() {
    let mut rng = RandomStream::from_seed(3);
    let mut worst = 0.0f64;
    for &(n, l) in &[(4usize, 0.3), (10, 1.0), (40, 2.0), (100, 10.0)] {
        for (a, b, c, e) in [(1, 3, 1, 3), (2, 5, 6, 8), (1, 8, 1, 8), (4, 4, 7, 8)] {
            let block = IndexBlock::new(Interval::new(a, b).unwrap(), Interval::new(c, e).unwrap());
            let bound = block_cov_sensitivity(l, block.size(), n).unwrap();
            for _ in 0..100 {
                let mut v = vec![0.0; n * 8];
                rng.fill_standard_normal(&mut v);
                let data = dpbandcov::estimators::Dataset::new(n, 8, v).unwrap();
                let mut adj = data.clone();
                for x in adj.row_mut(0) {
                    *x = 3.0 * rng.standard_normal();
                }
                let d = truncated_cov_oracle(&data, &block, l)
                    .sub(&truncated_cov_oracle(&adj, &block, l))
                    .unwrap();
                let f = common::frobenius(&d);
                worst = worst.max(f / bound);
            }
        }
    }
    assert!(worst <= 1.0, "ratio {worst}");
}

#[test]
fn tridiagonal_support_is_the_band() {
    let data = gaussian_dataset(120, 23, 1);
    for k in [1usize, 2, 4, 7, 23, 30] {
        let r = blockwise_tridiagonal(&data, &TridiagonalConfig::new(k, 2.0, 10.0).unwrap(), &RandomStream::from_seed(k as u64))
            .unwrap();
        let band = tridiagonal_mask(&band_partition(23, k).unwrap());
        assert_eq!(RegionMask::support_of(r.estimate.as_matrix()), band, "k = {k}");
        assert!(r.estimate.is_exactly_symmetric());
        assert!(r.budget.spent() <= 2.0 * (1.0 + 1e-12));
        let nk = 23usize.div_ceil(k);
        assert_eq!(r.budget.entries().len(), 2 * nk - 1);
    }
}

#[test]
fn private_blocks_match_nonprivate_plus_noise_scale() {
    // with ρ = ∞ every block equals the direct truncated covariance
    let data = gaussian_dataset(80, 12, 6);
    let r = blockwise_tridiagonal(&data, &TridiagonalConfig::new(4, f64::INFINITY, 2.0).unwrap(), &RandomStream::from_seed(0))
        .unwrap();
    let p = band_partition(12, 4).unwrap();
    for b in p.upper_tridiagonal_blocks() {
        let o = truncated_cov_oracle(&data, &b, 2.0);
        for (a, i) in b.rows.range().enumerate() {
            for (c, j) in b.cols.range().enumerate() {
                assert!((r.estimate.get(i, j) - o.get(a, c)).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn noise_seed_changes_only_private_output() {
    let data = gaussian_dataset(60, 10, 2);
    let cfg = TridiagonalConfig::new(3, 1.0, 10.0).unwrap();
    let a = blockwise_tridiagonal(&data, &cfg, &RandomStream::from_seed(1)).unwrap();
    let b = blockwise_tridiagonal(&data, &cfg, &RandomStream::from_seed(2)).unwrap();
    let a2 = blockwise_tridiagonal(&data, &cfg, &RandomStream::from_seed(1)).unwrap();
    assert_ne!(a.estimate, b.estimate);
    assert_eq!(a.estimate, a2.estimate);
}

#[test]
fn adaptive_support_within_top_band_and_decisions_consistent() {
    let (n, d) = (2000, 64);
    let sigma = make_power_deterministic(d, 0.2, 0.3).unwrap();
    let data = sample_mvn(&sigma, n, &mut RandomStream::from_seed(8)).unwrap();
    for norm in [NormKind::Operator, NormKind::Frobenius] {
        let cfg = AdaptiveConfig::with_defaults(n, d, f64::INFINITY, norm);
        let r = adaptive_estimator(&data, &cfg, &RandomStream::from_seed(0)).unwrap();
        let h = hierarchical_partition(d, cfg.k0, n, cfg.level_cap).unwrap();
        let support = RegionMask::support_of(r.estimate.as_matrix());
        assert!(support.is_subset_of(&h.union_mask_up_to(h.max_level() - 1)));
        assert!(h.base_band_mask().is_subset_of(&support));
        let mut kept = 0;
        for (g, dec) in h.all_gammas().zip(&r.regions) {
            assert_eq!((g.level, g.l), (dec.level, dec.l));
            let region = RegionMask::from_region(d, g);
            let nonzero = region.intersects(&support);
            assert_eq!(nonzero, dec.kept);
            kept += usize::from(nonzero);
        }
        assert_eq!(kept, r.kept_regions());
        if norm == NormKind::Operator {
            assert!(r.kept_regions() > 0, "slow decay should keep some regions");
        }
    }
}

#[test]
fn naive_equals_single_full_block() {
    let data = gaussian_dataset(50, 6, 4);
    let r = naive_full_estimator(&data, 3.0, 10.0, &RandomStream::from_seed(9)).unwrap();
    let block = dp_cov_block(&data, &IndexBlock::full(6).unwrap(), 3.0, 10.0, &mut RandomStream::from_seed(9).split(0)).unwrap();
    assert_eq!(r.estimate.as_matrix(), &block.values);
    assert_eq!(r.budget.spent(), 3.0);
}

#[test]
fn precision_matches_inverse_oracle() {
    let sigma = make_power_deterministic(20, 1.0, 0.4).unwrap();
    let omega = precision_estimator(&sigma, 10.0).unwrap();
    let oracle = gauss_jordan_inverse(sigma.as_matrix());
    assert!(omega.as_matrix().max_abs_diff(&oracle) < 1e-10);

    // noisy input: eigenvalues stay in (0, L2]
    let data = gaussian_dataset(40, 20, 5);
    let r = blockwise_tridiagonal(&data, &TridiagonalConfig::new(3, 0.05, 10.0).unwrap(), &RandomStream::from_seed(1)).unwrap();
    let ev = sym_eigen(&r.estimate, 1e-13).unwrap();
    assert!(ev.min_value() < 0.0, "expect an indefinite noisy estimate");
    let p = precision_estimator(&r.estimate, 4.0).unwrap();
    let pe = sym_eigen(&p, 1e-13).unwrap();
    assert!(pe.values.iter().all(|&v| v > 0.0 && v <= 4.0 + 1e-9));
}

#[test]
fn mvn_sample_covariance_concentrates() {
    for (name, sigma) in [
        ("power", make_power_deterministic(8, 1.0, 0.5).unwrap()),
        ("exponential", make_exponential(8, 0.7, 0.5).unwrap()),
        ("identity", SymMatrix::identity(8).unwrap()),
    ] {
        let n = 20_000;
        let data = sample_mvn(&sigma, n, &mut RandomStream::from_seed(21)).unwrap();
        let emp = truncated_cov_oracle(&data, &IndexBlock::full(8).unwrap(), f64::INFINITY);
        let diff = emp.max_abs_diff(sigma.as_matrix());
        assert!(diff < 5.0 / (n as f64).sqrt(), "{name}: {diff}");
    }
}

#[test]
fn model_build_is_seed_stable() {
    let m = CovarianceModel {
        family: Family::PowerRandom,
        decay: 1.0,
        amplitude: 0.5,
        seed: Some(17),
    };
    let a = m.build(30, 0).unwrap();
    let b = m.build(30, 99).unwrap();
    assert_eq!(a, b);
    let unseeded = CovarianceModel { seed: None, ..m };
    assert_ne!(unseeded.build(30, 1).unwrap(), unseeded.build(30, 2).unwrap());
    let rep = class_membership_diagnostics(&a, 1.0).unwrap();
    assert!(rep.entry_constant <= 0.5 + 1e-12);
}

#[test]
fn estimation_error_shrinks_with_n() {
    let sigma = make_power_deterministic(30, 1.0, 0.5).unwrap();
    let err = |n: usize| {
        let mut total = 0.0;
        for rep in 0..10u64 {
            let data = sample_mvn(&sigma, n, &mut RandomStream::from_seed(rep)).unwrap();
            let r = blockwise_tridiagonal(&data, &TridiagonalConfig::new(5, f64::INFINITY, 10.0).unwrap(), &RandomStream::from_seed(0))
                .unwrap();
            total += spectral_norm_oracle(&r.estimate.as_matrix().sub(sigma.as_matrix()).unwrap()).powi(2);
        }
        total / 10.0
    };
    assert!(err(2000) < err(200));
}
