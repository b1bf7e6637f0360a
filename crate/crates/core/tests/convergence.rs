use multisum::builder::{build_nd, PermTargets, Permutation, TargetSequence, TruncationBudget};
use multisum::partition::{split_conditionally_convergable, Sign};
use multisum::riemann::{greedy_to_infinity, greedy_to_value, NaturalSigns};
use multisum::series::{alternating_harmonic, alternating_sqrt, p_series, witness_convergability};
use multisum::verify::verify_theorem;
use proptest::prelude::*;

fn bounds_for(slab_budget: usize) -> Vec<f64> {
    let targets = PermTargets::new(
        2,
        [
            (Permutation::identity(2), TargetSequence::Constant(1.0)),
            ("2 1".parse().unwrap(), TargetSequence::Constant(-1.0)),
        ],
        None,
    )
    .unwrap();
    let a = build_nd(
        &mut split_conditionally_convergable(&alternating_sqrt()),
        &targets,
        &TruncationBudget::new(2, slab_budget),
    )
    .unwrap();
    let report = verify_theorem(&a, &targets, 1.0);
    assert!(report.passed());
    report.checks.iter().map(|c| c.bound).collect()
}

#[test]
fn bounds_shrink_with_the_budget() {
    let small = bounds_for(1_000);
    let medium = bounds_for(10_000);
    let large = bounds_for(100_000);
    for i in 0..small.len() {
        assert!(large[i] <= medium[i] && medium[i] <= small[i], "{small:?} {medium:?} {large:?}");
    }
    assert!(large.iter().all(|&b| b < 0.01), "{large:?}");
}

#[test]
fn witness_separates_conditional_from_absolute() {
    assert!(witness_convergability(&alternating_sqrt(), 1_000_000, 10.0).is_ok());
    assert!(witness_convergability(&p_series(2.0), 1_000_000, 1.0).is_err());
}

#[test]
fn divergent_rearrangement_clears_every_level() {
    let s = alternating_harmonic();
    let r = greedy_to_infinity(&mut NaturalSigns::new(&s, u64::MAX), &s, Sign::Negative, 20_000);
    assert!(r.starvation.is_none());
    assert!(r.report.error_bound <= -3.0, "{:?}", r.report);
    assert!(r.report.achieved < r.report.error_bound + 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_error_is_below_the_last_crossing_term(target in -3.0f64..3.0, budget in 200usize..5_000) {
        let s = alternating_sqrt();
        let r = greedy_to_value(&mut NaturalSigns::new(&s, u64::MAX), &s, target, budget);
        prop_assert!(r.starvation.is_none());
        prop_assert!(r.report.crossings > 0);
        // after the first crossing the sum stays within the last crossing term
        prop_assert!((r.report.achieved - target).abs() <= r.report.error_bound + 1e-12);
        let mut seen = r.ordering.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), r.ordering.len());
    }

    #[test]
    fn greedy_is_a_prefix_of_longer_runs(target in -2.0f64..2.0, short in 10usize..500) {
        let s = alternating_harmonic();
        let a = greedy_to_value(&mut NaturalSigns::new(&s, u64::MAX), &s, target, short);
        let b = greedy_to_value(&mut NaturalSigns::new(&s, u64::MAX), &s, target, 2 * short);
        prop_assert_eq!(&a.ordering[..], &b.ordering[..short]);
    }
}
