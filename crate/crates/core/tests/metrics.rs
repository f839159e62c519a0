use idsfeat_core::dataset::AttackClass;
use idsfeat_core::evaluation::{compute_metrics, confusion, fold_assignment, BinaryCounts, CVConfig};
use idsfeat_oracle as oracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
const MATRICES: usize = 1000;

fn labels_from_counts(counts: &[[u64; 5]; 5]) -> (Vec<AttackClass>, Vec<AttackClass>) {
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    for (a, row) in counts.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for _ in 0..n {
                actual.push(AttackClass::ALL[a]);
                predicted.push(AttackClass::ALL[p]);
            }
        }
    }
    (actual, predicted)
}

fn close(got: f64, want: f64, what: &str) {
    assert!((got - want).abs() <= TOL, "{what}: {got} vs {want}");
}

#[test]
fn metrics_match_brute_force_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for m in 0..MATRICES {
        let mut counts = [[0u64; 5]; 5];
        for row in counts.iter_mut() {
            for c in row.iter_mut() {
                // sparse matrices exercise the zero-denominator paths
                *c = if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..40) };
            }
        }
        let (actual, predicted) = labels_from_counts(&counts);
        let cm = confusion(&actual, &predicted).unwrap();
        let codes = |v: &[AttackClass]| v.iter().map(|c| c.index() as u32).collect::<Vec<_>>();
        let naive = oracle::naive_confusion(&codes(&actual), &codes(&predicted), 5);
        for a in 0..5 {
            for p in 0..5 {
                assert_eq!(cm.counts[a][p], naive[a][p]);
            }
        }
        let report = compute_metrics(&cm);
        let total: u64 = naive.iter().flatten().sum();
        let diag: u64 = (0..5).map(|i| naive[i][i]).sum();
        if total > 0 {
            close(report.accuracy, diag as f64 / total as f64, "accuracy");
        }
        let mut micro = (0, 0, 0, 0);
        for c in AttackClass::ALL {
            let i = c.index();
            let tp = naive[i][i];
            let fn_: u64 = naive[i].iter().sum::<u64>() - tp;
            let fp: u64 = (0..5).map(|a| naive[a][i]).sum::<u64>() - tp;
            let tn = total - tp - fn_ - fp;
            micro = (micro.0 + tp, micro.1 + tn, micro.2 + fp, micro.3 + fn_);
            let want = oracle::binary_metrics(tp, tn, fp, fn_);
            let got = &report.class(c).unwrap().metrics;
            let tag = |n: &str| format!("matrix {m} {c} {n}");
            close(got.tpr, want.tpr, &tag("tpr"));
            close(got.specificity, want.specificity, &tag("specificity"));
            if tn + fp > 0 {
                close(got.fpr, want.fpr, &tag("fpr"));
            }
            close(got.npv, want.npv, &tag("npv"));
            close(got.ppv, want.ppv, &tag("ppv"));
            close(got.f_measure, want.f_measure, &tag("f"));
            close(got.mcc, want.mcc, &tag("mcc"));
            close(got.accuracy, want.accuracy, &tag("accuracy"));
        }
        let want = oracle::binary_metrics(micro.0, micro.1, micro.2, micro.3);
        close(report.overall.tpr, want.tpr, "overall tpr");
        close(report.overall.ppv, want.ppv, "overall ppv");
    }
}

#[test]
fn zero_denominators_are_flagged_not_errors() {
    let m = BinaryCounts { tp: 0, fp: 0, fn_: 0, tn: 5 }.metrics();
    assert_eq!(m.tpr, 0.0);
    assert!(m.undefined.iter().any(|n| n == "tpr"));
    assert!(m.undefined.iter().any(|n| n == "ppv"));
    assert!(m.undefined.iter().any(|n| n == "mcc"));
    assert!(!m.undefined.iter().any(|n| n == "specificity"));
}

fn counts() -> impl Strategy<Value = BinaryCounts> {
    (0u64..500, 0u64..500, 0u64..500, 0u64..500).prop_map(|(tp, fp, fn_, tn)| BinaryCounts { tp, fp, fn_, tn })
}

proptest! {
    #[test]
    fn specificity_plus_fpr_is_one(c in counts()) {
        let m = c.metrics();
        if c.tn + c.fp > 0 {
            prop_assert_eq!(m.specificity + m.fpr, 1.0);
        }
    }

    #[test]
    fn f_measure_is_harmonic_mean(c in counts()) {
        let m = c.metrics();
        if c.tp > 0 {
            let h = 2.0 * m.ppv * m.tpr / (m.ppv + m.tpr);
            prop_assert!((m.f_measure - h).abs() <= TOL);
        }
    }

    #[test]
    fn mcc_is_bounded_and_one_only_when_perfect(c in counts()) {
        let m = c.metrics();
        prop_assert!((-1.0..=1.0).contains(&m.mcc));
        let perfect = c.fp == 0 && c.fn_ == 0 && c.tp > 0 && c.tn > 0;
        prop_assert_eq!(m.mcc == 1.0, perfect);
    }

    #[test]
    fn folds_partition_and_balance_each_class(
        sizes in proptest::collection::vec(0usize..40, 5),
        k in 2usize..11,
        seed in any::<u64>(),
    ) {
        let classes: Vec<AttackClass> = AttackClass::ALL
            .iter()
            .zip(&sizes)
            .flat_map(|(&c, &n)| std::iter::repeat(c).take(n))
            .collect();
        prop_assume!(classes.len() >= k);
        let fold = fold_assignment(&classes, &CVConfig { k, seed, stratified: true }).unwrap();
        prop_assert_eq!(fold.len(), classes.len());
        prop_assert!(fold.iter().all(|&f| f < k));
        for c in AttackClass::ALL {
            let mut per = vec![0usize; k];
            for (i, &f) in fold.iter().enumerate() {
                if classes[i] == c {
                    per[f] += 1;
                }
            }
            let (lo, hi) = (per.iter().min().unwrap(), per.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "{c}: {per:?}");
        }
        let again = fold_assignment(&classes, &CVConfig { k, seed, stratified: true }).unwrap();
        prop_assert_eq!(fold, again);
    }
}
