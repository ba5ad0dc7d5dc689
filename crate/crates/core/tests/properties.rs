mod common;

use bincorr::entropy::{
    asymptotic_rate, binary_entropy, entropy_bounds_mixed, entropy_bounds_parallel,
    joint_entropy_closed, joint_entropy_exact,
};
use bincorr::gf2::{build_circulant, check_circulant, circulant_invertible_predicted};
use bincorr::moments::{covariance_empirical, covariance_exact};
use bincorr::region::{
    characteristic_points, region_constraints, subset_conditional_entropy, SourceSet,
};
use bincorr::{cascade_flip_prob, BitMatrix, BitVector, ModelSpec, SourceRealization};
use common::*;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn rho_strategy(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..=1.0, len)
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), n), n)
        .prop_map(|rows| BitMatrix::from_rows(&rows).unwrap())
}

fn realization(t: usize, w: u64) -> SourceRealization {
    SourceRealization(BitVector::from_word(t, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_times_matrix_is_identity(n in 1usize..=12, seed in any::<u64>()) {
        let a = random_matrix(&mut rng(seed), n);
        match a.invert().unwrap() {
            Some(inv) => {
                prop_assert!(a.mul(&inv).unwrap().is_identity());
                prop_assert!(inv.mul(&a).unwrap().is_identity());
                prop_assert!(a.determinant().unwrap());
            }
            None => prop_assert!(!a.determinant().unwrap()),
        }
    }

    #[test]
    fn determinant_matches_cofactor_expansion(a in (1usize..=6).prop_flat_map(matrix_strategy)) {
        prop_assert_eq!(a.determinant().unwrap(), determinant_by_expansion(&a));
    }

    #[test]
    fn matvec_is_linear(n in 1usize..=40, seed in any::<u64>(), x in any::<u64>(), y in any::<u64>()) {
        let a = random_matrix(&mut rng(seed), n);
        let mask = (1u64 << n) - 1;
        let x = BitVector::from_word(n, x & mask).unwrap();
        let y = BitVector::from_word(n, y & mask).unwrap();
        let lhs = a.matvec(&x.xor(&y).unwrap()).unwrap();
        let rhs = a.matvec(&x).unwrap().xor(&a.matvec(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn recursive_matrices_are_unimodular(n in 1usize..=16, depth in 1usize..=4, seed in any::<u64>()) {
        let a = random_recursive(&mut rng(seed), n, depth);
        prop_assert!(a.is_unit_lower_triangular());
        prop_assert!(a.determinant().unwrap());
    }

    #[test]
    fn pmf_sums_to_one_with_uniform_marginals(rho in rho_strategy(1..=9)) {
        let n = rho.len();
        for spec in [ModelSpec::parallel(rho.clone()).unwrap(), ModelSpec::serial(rho.clone()).unwrap()] {
            let pmf = pmf_by_outcome(&spec);
            prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < TOL);
            for i in 0..n {
                let p1: f64 = pmf.iter().enumerate().filter(|(x, _)| (x >> i) & 1 == 1).map(|(_, p)| p).sum();
                prop_assert!((p1 - 0.5).abs() < TOL);
            }
        }
    }

    #[test]
    fn parallel_pmf_averages_the_conditionals(rho in rho_strategy(1..=8), w in any::<u64>()) {
        let spec = ModelSpec::parallel(rho.clone()).unwrap();
        let x = realization(rho.len(), w & ((1 << rho.len()) - 1));
        let avg = 0.5 * (spec.conditional_pmf(&x, false).unwrap() + spec.conditional_pmf(&x, true).unwrap());
        prop_assert!((spec.pmf(&x).unwrap() - avg).abs() < TOL);
    }

    #[test]
    fn single_chain_mixed_is_serial(rho in rho_strategy(1..=8)) {
        let n = rho.len();
        let mixed = ModelSpec::mixed(n, 1, rho.clone()).unwrap();
        let serial = ModelSpec::serial(rho).unwrap();
        for w in 0..1u64 << n {
            let x = realization(n, w);
            prop_assert!((mixed.pmf(&x).unwrap() - serial.pmf(&x).unwrap()).abs() < TOL);
        }
    }

    #[test]
    fn two_source_serial_is_parallel(r in 0.5f64..=1.0) {
        let serial = ModelSpec::serial(vec![1.0, r]).unwrap();
        let parallel = ModelSpec::parallel(vec![1.0, r]).unwrap();
        prop_assert_eq!(pmf_by_outcome(&serial), pmf_by_outcome(&parallel));
    }

    #[test]
    fn covariance_matches_enumeration(rho in rho_strategy(2..=8), seed in any::<u64>()) {
        let n = rho.len();
        let a = random_recursive(&mut rng(seed), n, 3);
        let specs = [
            ModelSpec::parallel(rho.clone()).unwrap(),
            ModelSpec::serial(rho.clone()).unwrap(),
            ModelSpec::linear(a, rho.clone()).unwrap(),
        ];
        for spec in specs {
            let c = covariance_exact(&spec).unwrap();
            let oracle = covariance_by_enumeration(&spec);
            for (got, want) in c.entries().iter().zip(&oracle) {
                prop_assert!((got - want).abs() < TOL, "{:?}: {} vs {}", spec.kind(), got, want);
            }
        }
    }

    #[test]
    fn parallel_entropy_is_sandwiched(rho in rho_strategy(1..=10)) {
        let spec = ModelSpec::parallel(rho).unwrap();
        let b = entropy_bounds_parallel(&spec).unwrap();
        let h = joint_entropy_exact(&spec).unwrap();
        prop_assert!(b.lower - TOL <= h && h <= b.upper + TOL);
        prop_assert!((b.upper - b.lower - binary_entropy(spec.rho()[0]).unwrap()).abs() < TOL);
    }

    #[test]
    fn serial_entropy_is_exact(rho in rho_strategy(1..=10)) {
        let spec = ModelSpec::serial(rho.clone()).unwrap();
        let want = 1.0 + rho[1..].iter().map(|&r| hb(r)).sum::<f64>();
        prop_assert!((joint_entropy_exact(&spec).unwrap() - want).abs() < TOL);
        prop_assert!((joint_entropy_closed(&spec).unwrap() - want).abs() < TOL);
    }

    #[test]
    fn linear_entropy_is_exact(n in 1usize..=10, seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_recursive(&mut g, n, 3);
        let rho = random_rho(&mut g, n, 0.0);
        let spec = ModelSpec::linear(a, rho.clone()).unwrap();
        let want: f64 = rho.iter().map(|&r| hb(r)).sum();
        prop_assert!((joint_entropy_exact(&spec).unwrap() - want).abs() < TOL);
    }

    #[test]
    fn mixed_entropy_is_sandwiched(n in 1usize..=4, m in 1usize..=3, seed in any::<u64>()) {
        let rho = random_rho(&mut rng(seed), n * m, 0.5);
        let spec = ModelSpec::mixed(n, m, rho).unwrap();
        let b = entropy_bounds_mixed(&spec).unwrap();
        let h = joint_entropy_exact(&spec).unwrap();
        prop_assert!(b.lower - TOL <= h && h <= b.upper + TOL);
    }

    #[test]
    fn parallel_gap_is_nonnegative(r in 0.5f64..=1.0, n in 1usize..=10) {
        let spec = ModelSpec::parallel(vec![r; n]).unwrap();
        let h = joint_entropy_exact(&spec).unwrap();
        prop_assert!(h / n as f64 - asymptotic_rate(&spec).value >= -TOL);
    }

    #[test]
    fn cascade_flip_prob_does_not_increase(rho in rho_strategy(1..=12)) {
        let mut prev = 1.0;
        for l in 1..=rho.len() {
            let p = cascade_flip_prob(&rho[..l]).unwrap();
            prop_assert!(p <= prev + TOL && p >= 0.5 - TOL);
            prev = p;
        }
    }

    #[test]
    fn chain_rule_holds_on_every_subset(rho in rho_strategy(2..=7), serial in any::<bool>()) {
        let spec = if serial { ModelSpec::serial(rho).unwrap() } else { ModelSpec::parallel(rho).unwrap() };
        let t = spec.total();
        let pmf = pmf_by_outcome(&spec);
        for c in region_constraints(&spec, 1.0).unwrap() {
            let want = conditional_entropy_direct(&pmf, c.subset.mask() as usize, t);
            prop_assert!((c.bound - want).abs() < TOL);
        }
    }

    #[test]
    fn conditional_entropy_grows_with_the_subset(rho in rho_strategy(2..=8), s in any::<u64>(), extra in any::<u64>()) {
        let spec = ModelSpec::parallel(rho).unwrap();
        let full = (1u64 << spec.total()) - 1;
        let small = SourceSet::from_mask((s & full).max(1));
        let big = SourceSet::from_mask(small.mask() | (extra & full));
        let hs = subset_conditional_entropy(&spec, small).unwrap();
        let hb_ = subset_conditional_entropy(&spec, big).unwrap();
        prop_assert!(hs <= hb_ + TOL);
    }

    #[test]
    fn balanced_point_dominates_unbalanced(r in 0.5f64..=1.0, n in 2usize..=10, serial in any::<bool>()) {
        let spec = if serial { ModelSpec::serial_constant(n, r).unwrap() } else { ModelSpec::parallel(vec![r; n]).unwrap() };
        let p = characteristic_points(&spec, 1.0).unwrap();
        prop_assert!(p.lambda_bal >= p.lambda_unb - TOL);
    }
}

#[test]
fn determinant_agrees_with_invertibility_on_ten_thousand_matrices() {
    let mut g = rng(7);
    for i in 0..10_000 {
        let a = random_matrix(&mut g, 1 + i % 10);
        assert_eq!(a.determinant().unwrap(), a.invert().unwrap().is_some());
    }
}

#[test]
fn circulant_rule_matches_elimination() {
    for n in 1..=24 {
        for d in [2, 3, 5, 7, 11, 13, 17, 19, 23] {
            if d > n {
                continue;
            }
            let check = check_circulant(n, d).unwrap();
            assert!(check.consistent(), "n={n} d={d}");
            let det = build_circulant(n, d).unwrap().determinant().unwrap();
            assert_eq!(
                circulant_invertible_predicted(n, d),
                Some(det),
                "n={n} d={d}"
            );
        }
    }
}

#[test]
fn equal_source_covariance_is_square_of_bias() {
    for r in [0.5, 0.7, 0.95, 1.0] {
        let c = covariance_exact(&ModelSpec::parallel(vec![r; 6]).unwrap()).unwrap();
        for i in 0..6 {
            for k in 0..6 {
                let want = if i == k { 0.25 } else { (r - 0.5) * (r - 0.5) };
                assert!((c.get(i, k) - want).abs() < TOL);
            }
        }
    }
}

#[test]
fn serial_covariance_decays_geometrically() {
    for r in [0.6, 0.7, 0.95] {
        let c = covariance_exact(&ModelSpec::serial_constant(10, r).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let want = 0.25 * (2.0 * r - 1.0).powi(k as i32);
            assert!((c.get(0, k) - want).abs() < TOL);
            assert!(c.get(0, k) < prev);
            prev = c.get(0, k);
        }
    }
}

#[test]
fn covariance_is_monotone_in_rho() {
    let mut prev = -1.0;
    for step in 0..=10 {
        let r = 0.5 + 0.05 * step as f64;
        let c = covariance_exact(&ModelSpec::serial_constant(5, r).unwrap()).unwrap();
        assert!(c.get(0, 4) >= prev);
        prev = c.get(0, 4);
    }
}

#[test]
fn empirical_covariance_converges() {
    let spec = ModelSpec::mixed(3, 2, vec![0.9, 0.8, 0.7, 0.95, 0.6, 0.85]).unwrap();
    let exact = covariance_exact(&spec).unwrap();
    let coarse = covariance_empirical(&spec, 10_000, 3)
        .unwrap()
        .max_abs_diff(&exact);
    let fine = covariance_empirical(&spec, 1_000_000, 3)
        .unwrap()
        .max_abs_diff(&exact);
    assert!(fine < 3e-3, "fine error {fine}");
    assert!(fine < coarse, "{fine} !< {coarse}");
}

#[test]
fn sampler_agrees_with_pmf() {
    let spec = ModelSpec::serial(vec![1.0, 0.8, 0.6, 0.9, 0.7]).unwrap();
    let count = 200_000;
    let counts = spec.outcome_counts(11, count, 20).unwrap();
    for (w, &c) in counts.iter().enumerate() {
        let p = spec.pmf(&realization(5, w as u64)).unwrap();
        let mean = p * count as f64;
        let sd = (count as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c as f64 - mean).abs() <= 4.0 * sd + 1e-9,
            "outcome {w}: {c} vs {mean}"
        );
    }
}

#[test]
fn asymptotic_rate_is_model_independent() {
    for r in [0.6, 0.7, 0.95] {
        let h = binary_entropy(r).unwrap();
        let specs = [
            ModelSpec::parallel(vec![r; 7]).unwrap(),
            ModelSpec::serial_constant(7, r).unwrap(),
            ModelSpec::mixed(4, 3, vec![r; 12]).unwrap(),
            ModelSpec::linear_serial_equivalent(7, r).unwrap(),
        ];
        for spec in specs {
            assert_eq!(asymptotic_rate(&spec).value, h, "{:?}", spec.kind());
        }
    }
}
