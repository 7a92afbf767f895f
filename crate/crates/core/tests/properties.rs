mod common;

use common::{frobenius, spectral_norm_oracle};
use dpbandcov::geometry::{
    band_partition, hierarchical_partition, restrict, tridiagonal_mask, Region, RegionMask,
};
use dpbandcov::matrix::{frobenius_norm, operator_norm, sym_eigen, Matrix, SymMatrix};
use proptest::prelude::*;

fn matrix_strategy(max: usize) -> impl Strategy<Value = Matrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |v| Matrix::from_vec(r, c, v).unwrap())
    })
}

fn sym_strategy(max: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max).prop_flat_map(|d| {
        prop::collection::vec(-5.0f64..5.0, d * d).prop_map(move |v| SymMatrix::from_upper_fn(d, |i, j| v[i * d + j]).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partition_covers_each_index_once(d in 1usize..=64, k in 1usize..=70) {
        let p = band_partition(d, k).unwrap();
        let mut seen = vec![0usize; d];
        for iv in p.intervals() {
            for i in iv.start()..=iv.end() {
                seen[i - 1] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(p.num_blocks(), d.div_ceil(k));
        for (l, iv) in p.intervals().iter().enumerate() {
            if l + 1 < p.num_blocks() {
                prop_assert_eq!(iv.len(), k);
            }
            for i in iv.start()..=iv.end() {
                prop_assert_eq!(p.block_of(i), l + 1);
            }
        }
    }

    #[test]
    fn tridiagonal_mask_is_symmetric_band(d in 1usize..=40, k in 1usize..=12) {
        let p = band_partition(d, k).unwrap();
        let m = tridiagonal_mask(&p);
        for i in 1..=d {
            for j in 1..=d {
                prop_assert_eq!(m.contains(i, j), m.contains(j, i));
                let (bi, bj) = (p.block_of(i), p.block_of(j));
                prop_assert_eq!(m.contains(i, j), bi.abs_diff(bj) <= 1);
            }
        }
    }

    #[test]
    fn gamma_regions_disjoint_and_rebuild_band(d in 2usize..=64, k0 in 1usize..=6, n in 10usize..=2000) {
        prop_assume!(k0 <= d);
        let h = hierarchical_partition(d, k0, n, 0.25).unwrap();
        let base = h.base_band_mask();
        let mut acc = base.clone();
        let mut upper = RegionMask::empty(d);
        for i in 1..=d {
            for j in i..=d {
                if base.contains(i, j) {
                    upper.insert(i, j);
                }
            }
        }
        for m in 1..h.max_level() {
            for g in h.gammas(m) {
                let gm = RegionMask::from_region(d, g);
                prop_assert_eq!(gm.count(), g.cell_count());
                prop_assert!(!gm.intersects(&upper), "overlap at level {} l {}", m, g.l);
                upper = upper.union(&gm);
                acc.insert_region(g);
            }
            // base band plus Γ regions up to m equals the level-m tridiagonal band
            let mut sym = acc.clone();
            sym.symmetrize();
            prop_assert_eq!(&sym, &h.union_mask_up_to(m));
            prop_assert_eq!(&sym, &tridiagonal_mask(h.level(m)));
        }
    }

    #[test]
    fn norm_inequalities(m in matrix_strategy(9)) {
        let op = operator_norm(&m, 1e-12).unwrap();
        let fro = frobenius_norm(&m).unwrap();
        let max = m.data().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let rank = m.rows().min(m.cols()) as f64;
        prop_assert!(max <= op * (1.0 + 1e-8) + 1e-12);
        prop_assert!(op <= fro * (1.0 + 1e-10) + 1e-12);
        prop_assert!(fro <= rank.sqrt() * op * (1.0 + 1e-8) + 1e-12);
        prop_assert!((operator_norm(&m.transpose(), 1e-12).unwrap() - op).abs() <= 1e-8 * (1.0 + op));
    }

    #[test]
    fn operator_norm_matches_jacobi(m in matrix_strategy(12)) {
        let op = operator_norm(&m, 1e-12).unwrap();
        let oracle = spectral_norm_oracle(&m);
        prop_assert!((op - oracle).abs() <= 1e-8 * (1.0 + oracle), "{} vs {}", op, oracle);
        prop_assert!((frobenius_norm(&m).unwrap() - frobenius(&m)).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn restrict_is_linear_and_idempotent(
        a in prop::collection::vec(-3.0f64..3.0, 100),
        b in prop::collection::vec(-3.0f64..3.0, 100),
        c in -2.0f64..2.0,
        k in 1usize..6,
    ) {
        let a = Matrix::from_vec(10, 10, a).unwrap();
        let b = Matrix::from_vec(10, 10, b).unwrap();
        let mask = tridiagonal_mask(&band_partition(10, k).unwrap());
        let lhs = restrict(&a.scale(c).add(&b).unwrap(), &mask);
        let rhs = restrict(&a, &mask).scale(c).add(&restrict(&b, &mask)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        let once = restrict(&a, &mask);
        prop_assert_eq!(restrict(&once, &mask), once.clone());
        prop_assert!(RegionMask::support_of(&once).is_subset_of(&mask));
    }

    #[test]
    fn sym_eigen_reconstructs(s in sym_strategy(10)) {
        let e = sym_eigen(&s, 1e-13).unwrap();
        let d = s.dim();
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let scale = 1.0 + frobenius(s.as_matrix());
        prop_assert!(e.reconstruct().as_matrix().max_abs_diff(s.as_matrix()) <= 1e-10 * scale);
        let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
        prop_assert!(vtv.max_abs_diff(&Matrix::identity(d)) <= 1e-10);
        let trace: f64 = s.diagonal().iter().sum();
        prop_assert!((e.values.iter().sum::<f64>() - trace).abs() <= 1e-10 * scale);
    }
}
