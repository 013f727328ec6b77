mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tslmi::jacobi::{min_eigenvalue, sym_eigen};
use tslmi::linalg::max_abs;
use tslmi::lmi::{Layout, ZetaSpec};
use tslmi::model::bundled_system;
use tslmi::sdp::ConicProgram;
use tslmi::{assemble_program, Mat, SynthesisOptions};

use common::{random_assignment, random_matrix, random_symmetric};

/// Number of eigenvalues below `sigma`, from the pivots of an LDLᵀ sweep of `m - σI`.
fn count_below(m: &Mat, sigma: f64) -> usize {
    let n = m.nrows();
    let mut a = m - Mat::identity(n, n) * sigma;
    let mut negative = 0;
    for k in 0..n {
        let mut pivot = a[(k, k)];
        if pivot == 0.0 {
            pivot = -f64::EPSILON * max_abs(m).max(1.0);
        }
        if pivot < 0.0 {
            negative += 1;
        }
        for r in k + 1..n {
            let factor = a[(r, k)] / pivot;
            for c in k + 1..n {
                a[(r, c)] -= factor * a[(k, c)];
            }
        }
    }
    negative
}

/// The `idx`-th smallest eigenvalue by bisection on the inertia count.
fn bisect_eigenvalue(m: &Mat, idx: usize) -> f64 {
    let bound = m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(m, mid) > idx {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn jacobi_agrees_with_inertia_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let m = random_symmetric(&mut rng, 8);
        let eig = sym_eigen(&m);
        for (idx, v) in eig.values.iter().enumerate() {
            let oracle = bisect_eigenvalue(&m, idx);
            assert!((v - oracle).abs() <= 1e-9, "eigenvalue {idx}: {v} vs {oracle}");
        }
    }
}

#[test]
fn jacobi_reconstructs_and_is_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in [1usize, 2, 3, 7, 16, 31, 50] {
        let m = random_symmetric(&mut rng, d);
        let eig = sym_eigen(&m);
        let v = &eig.vectors;
        let lambda = Mat::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone()));
        assert!(max_abs(&(v * lambda * v.transpose() - &m)) <= 1e-10 * d as f64);
        assert!(max_abs(&(v.transpose() * v - Mat::identity(d, d))) <= 1e-10 * d as f64);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn interconnection_bound_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let r = rng.gen_range(1..=6);
        let c = rng.gen_range(1..=6);
        let a = random_matrix(&mut rng, r, c) * rng.gen_range(0.1..10.0);
        let b = random_matrix(&mut rng, r, c) * rng.gen_range(0.1..10.0);
        let tau = 10f64.powf(rng.gen_range(-3.0..3.0));
        let at = a.transpose();
        let bt = b.transpose();
        let m = &at * &a * tau + &bt * &b / tau - &at * &b - &bt * &a;
        let m = (&m + m.transpose()) * 0.5;
        assert!(min_eigenvalue(&m) >= -1e-9, "tau {tau}: {}", min_eigenvalue(&m));
        // completed square: (√τ A - B/√τ)ᵀ(√τ A - B/√τ)
        let d = &a * tau.sqrt() - &b / tau.sqrt();
        assert!(max_abs(&(d.transpose() * &d - &m)) <= 1e-9 * max_abs(&m).max(1.0));
    }
}

#[test]
fn conic_encoding_matches_direct_evaluation() {
    let sys = bundled_system();
    for layout in [Layout::Coherent, Layout::Literal] {
        for zeta in [ZetaSpec::Fixed(vec![1.7, 1.5]), ZetaSpec::Minimize] {
            let prog = assemble_program(&sys, &SynthesisOptions { layout, zeta, ..Default::default() }).unwrap();
            let conic = ConicProgram::encode(&prog);
            assert_eq!(conic.num_scalars, prog.catalogue.scalar_count());
            assert_eq!(conic.blocks.len(), prog.blocks.len());
            let mut rng = ChaCha8Rng::seed_from_u64(layout as u64);
            for _ in 0..100 {
                let x = random_assignment(&mut rng, &prog.catalogue);
                let theta = conic.pack(&prog.catalogue, &x);
                assert_eq!(conic.decode(&prog.catalogue, &theta).unwrap(), x);
                for (blk, enc) in prog.blocks.iter().zip(&conic.blocks) {
                    let direct = blk.sense.adjust(&blk.eval(&x));
                    let sparse = enc.eval(&theta);
                    assert!(max_abs(&(direct - sparse)) <= 1e-12, "{}", blk.label);
                }
            }
        }
    }
}

#[test]
fn decode_rejects_wrong_length() {
    let sys = bundled_system();
    let prog = assemble_program(&sys, &SynthesisOptions::default()).unwrap();
    let conic = ConicProgram::encode(&prog);
    assert!(conic.decode(&prog.catalogue, &vec![0.0; conic.num_scalars - 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn encode_roundtrip_on_random_plants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = common::random_system(&mut rng);
        let prog = assemble_program(&sys, &SynthesisOptions::default()).unwrap();
        let conic = ConicProgram::encode(&prog);
        let x = random_assignment(&mut rng, &prog.catalogue);
        let theta = conic.pack(&prog.catalogue, &x);
        prop_assert_eq!(&conic.decode(&prog.catalogue, &theta).unwrap(), &x);
        for (blk, enc) in prog.blocks.iter().zip(&conic.blocks) {
            let direct = blk.sense.adjust(&blk.eval(&x));
            prop_assert!(max_abs(&(direct - enc.eval(&theta))) <= 1e-12);
        }
    }

    #[test]
    fn min_eigenvalue_of_gram_is_nonnegative(seed in any::<u64>(), d in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_matrix(&mut rng, d, d);
        prop_assert!(min_eigenvalue(&(&g * g.transpose())) >= -1e-12);
    }
}
