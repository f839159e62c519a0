use idsfeat_core::classifiers::{ModelSpec, TreeConfig};
use idsfeat_core::dataset::{
    build_class_dataset, build_pair_dataset, deduplicate, parse_kdd, write_kdd, AttackClass,
    FeatureId, Schema,
};
use idsfeat_core::evaluation::CVConfig;
use idsfeat_core::featsel::{
    aggregate_consensus, rank_features, FeatureSet, GridDataset, RankedList, SingleEvaluator,
};
use idsfeat_core::pipeline::{
    build_start_set, gradual_add, gradual_delete, reduce_features, select_best, Action,
    CvEvaluator, GuardPolicy, PhaseResult, StartSetConfig,
};
use idsfeat_core::reference::table_iv_grid;
use idsfeat_core::synth;
use proptest::prelude::*;

use AttackClass::{Dos, Normal, U2r};

fn set(s: &str) -> FeatureSet {
    s.parse().unwrap()
}

fn fid(i: usize) -> FeatureId {
    FeatureId::new(i).unwrap()
}

fn check_trace(p: &PhaseResult, guard: &GuardPolicy) {
    assert_eq!(p.trace.replay(), p.set);
    assert_eq!(p.trace.final_set, p.set);
    assert!(p.trace.guard_holds(guard));
}

fn u2r_fixture() -> idsfeat_core::dataset::Dataset {
    synth::planted_u2r(9, 300, 300, 30)
}

fn u2r_cv() -> CVConfig {
    CVConfig { k: 5, seed: 1, stratified: true }
}

#[test]
fn delete_drops_one_copy_of_a_duplicated_column() {
    let d = synth::duplicate_column(3, 600);
    let spec = ModelSpec::Tree(TreeConfig::default());
    let eval = CvEvaluator::new(&d, spec, CVConfig { k: 5, seed: 2, stratified: true });
    let ranking = rank_features(&d, SingleEvaluator::SymmetricUncertainty);
    let guard = GuardPolicy::default();
    // column 3 alone separates the classes for a deep tree, so leave it out
    let start = set("1,2,4");
    let out = gradual_delete(&start, &[(Dos, ranking)], &eval, guard).unwrap();
    check_trace(&out, &guard);
    assert!(out.set.is_subset(&start));
    let copies = [1, 4].iter().filter(|&&i| out.set.contains(fid(i))).count();
    assert_eq!(copies, 1, "{}", out.set);
    assert!(out.trace.steps.iter().all(|s| s.action == Action::Delete));
}

#[test]
fn add_takes_the_planted_feature_and_rejects_the_decoy() {
    let d = u2r_fixture();
    let eval = CvEvaluator::new(&d, ModelSpec::NaiveBayes, u2r_cv());
    let guard = GuardPolicy::default();
    let out = gradual_add(&set("1"), &[(U2r, set("2,3"))], &eval, guard).unwrap();
    check_trace(&out, &guard);
    assert_eq!(out.set, set("1,2"));

    let planted = out.trace.steps.iter().find(|s| s.feature == fid(2)).unwrap();
    assert!(planted.accepted);
    assert_eq!(planted.metrics_before.tpr(U2r), 0.0);
    assert_eq!(planted.metrics_after.tpr(U2r), 1.0);

    // judged against the start set, the decoy costs DOS recall
    let decoy = out
        .trace
        .steps
        .iter()
        .find(|s| s.feature == fid(3) && s.metrics_before.tpr(U2r) == 0.0)
        .unwrap();
    assert!(!decoy.accepted);
    assert!(decoy.metrics_after.tpr(Dos) < decoy.metrics_before.tpr(Dos) - 0.1);
    assert!(decoy.reason.contains("DOS"), "{}", decoy.reason);
}

#[test]
fn disabled_guard_accepts_everything() {
    let d = u2r_fixture();
    let eval = CvEvaluator::new(&d, ModelSpec::NaiveBayes, u2r_cv());
    let guard = GuardPolicy::disabled();
    let out = gradual_add(&set("1"), &[(U2r, set("2,3,4"))], &eval, guard).unwrap();
    assert_eq!(out.set, set("1,2,3,4"));
    check_trace(&out, &guard);
}

#[test]
fn add_supersets_and_delete_subsets_the_start() {
    let d = u2r_fixture();
    let eval = CvEvaluator::new(&d, ModelSpec::NaiveBayes, u2r_cv());
    let ranking = rank_features(&d, SingleEvaluator::InfoGain);
    for (start, pool) in [("1", "2,3,4"), ("1,4", "2,3"), ("2,4", "1,3")] {
        let start = set(start);
        for eps in [0.0, 0.001, 0.05] {
            let guard = GuardPolicy { epsilon: eps };
            let add = gradual_add(&start, &[(U2r, set(pool)), (Dos, set("1,2,3,4"))], &eval, guard)
                .unwrap();
            check_trace(&add, &guard);
            assert!(start.is_subset(&add.set));
            let full = set("1,2,3,4");
            let del = gradual_delete(&full, &[(U2r, ranking.clone()), (Dos, ranking.clone())], &eval, guard)
                .unwrap();
            check_trace(&del, &guard);
            assert!(del.set.is_subset(&full) && !del.set.is_empty());
        }
    }
}

#[test]
fn select_best_prefers_accuracy_then_fewer_features() {
    let d = u2r_fixture();
    let eval = CvEvaluator::new(&d, ModelSpec::NaiveBayes, u2r_cv());
    let guard = GuardPolicy::default();
    let add = gradual_add(&set("1"), &[(U2r, set("2,3"))], &eval, guard).unwrap();
    let ranking = rank_features(&d, SingleEvaluator::SymmetricUncertainty);
    let del = gradual_delete(&set("1,2,3,4"), &[(U2r, ranking)], &eval, guard).unwrap();
    let best = select_best(Some(&add), Some(&del), &eval).unwrap();
    let winner = best.candidates.iter().find(|c| c.features == best.winner).unwrap();
    for c in &best.candidates {
        assert!(
            (winner.accuracy, winner.min_tpr) >= (c.accuracy, c.min_tpr),
            "{} beats {}",
            c.features,
            winner.features
        );
    }
    assert!(select_best(None, None, &eval).is_err());
}

#[test]
fn unguarded_reduction_removes_the_whole_tail() {
    let d = synth::planted_relevance(4, 400, 8, &[0, 1], 0.1);
    let eval = CvEvaluator::new(&d, ModelSpec::NaiveBayes, CVConfig { k: 3, seed: 0, stratified: true });
    let a = rank_features(&d, SingleEvaluator::InfoGain);
    let c = rank_features(&d, SingleEvaluator::GainRatio);
    let all = FeatureSet::all(8);
    let q = 3;
    let tail = a.tail(q).intersection(&c.tail(q));
    let out = reduce_features(&a, &c, &all, &eval, GuardPolicy::disabled(), q).unwrap();
    let kept: FeatureSet = all.iter().filter(|&f| !tail.contains(f)).collect();
    assert!(!tail.is_empty());
    assert_eq!(out.set, kept);
    assert_eq!(out.trace.replay(), out.set);
    let guarded = reduce_features(&a, &c, &all, &eval, GuardPolicy::default(), q).unwrap();
    check_trace(&guarded, &GuardPolicy::default());
    assert!(out.set.is_subset(&guarded.set));
}

#[test]
fn delete_needs_two_features() {
    let d = u2r_fixture();
    let eval = CvEvaluator::new(&d, ModelSpec::NaiveBayes, u2r_cv());
    let r = gradual_delete(&set("1"), &[(U2r, RankedList::new(vec![(fid(1), 1.0)]))], &eval, GuardPolicy::default());
    assert!(r.is_err());
    assert!(gradual_add(&FeatureSet::default(), &[], &eval, GuardPolicy::default()).is_err());
}

#[test]
fn start_set_from_published_grid() {
    let agg = aggregate_consensus(&table_iv_grid(), 4);
    let start = build_start_set(&agg, &StartSetConfig::default());
    assert_eq!(start.features, set("5,29,39"));
    assert!(start.relaxations.is_empty());

    let u2r = agg.class(GridDataset::U2r).unwrap();
    assert_eq!(u2r.votes_for(fid(39)), 6);
    assert_eq!(u2r.votes_for(fid(13)), 3);
}

#[test]
fn start_set_thresholds_relax_until_nonempty() {
    let agg = aggregate_consensus(&table_iv_grid(), 4);
    let strict = StartSetConfig { min_class_rows: 9, min_algo_votes: 9 };
    let start = build_start_set(&agg, &strict);
    assert!(!start.features.is_empty());
    assert!(!start.relaxations.is_empty());
    for f in start.features.iter() {
        assert!(agg.class_rows(f) >= start.min_class_rows);
        assert!(agg.algorithm_votes(f) >= start.min_algo_votes);
    }
}

#[test]
fn class_datasets_keep_normal_and_one_category() {
    let d = parse_kdd(synth::kdd_like_csv(11, 2000).as_bytes(), &Schema::kdd()).unwrap();
    let counts = d.class_counts();
    for c in [Dos, AttackClass::Probe, AttackClass::R2l, U2r] {
        let sub = build_class_dataset(&d, c).unwrap();
        assert_eq!(sub.len(), counts[Normal.index()] + counts[c.index()]);
        assert!(sub.classes().iter().all(|&x| x == c || x == Normal));
    }
    assert!(build_class_dataset(&d, Normal).is_err());
    let pair = build_pair_dataset(&d);
    assert_eq!(pair.len(), counts[Dos.index()] + counts[AttackClass::Probe.index()]);
}

#[test]
fn written_data_parses_back_identically() {
    let d = parse_kdd(synth::kdd_like_csv(12, 500).as_bytes(), &Schema::kdd()).unwrap();
    let mut buf = Vec::new();
    write_kdd(&d, &mut buf).unwrap();
    let back = parse_kdd(buf.as_slice(), &Schema::kdd()).unwrap();
    assert_eq!(back, d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dedup_is_idempotent_and_keeps_every_distinct_row(seed in 0u64..10_000, n in 1usize..400) {
        let d = parse_kdd(synth::kdd_like_csv(seed, n).as_bytes(), &Schema::kdd()).unwrap();
        let (once, stats) = deduplicate(&d);
        let (twice, again) = deduplicate(&once);
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(again.total.after_count, once.len());
        prop_assert_eq!(stats.total.before_count, d.len());
        prop_assert!(once.len() <= d.len());
        let per_class: usize = stats.classes.iter().map(|c| c.counts.after_count).sum();
        prop_assert_eq!(per_class, once.len());
        let mut seen = std::collections::HashSet::new();
        for r in 0..d.len() {
            seen.insert(format!("{:?}|{}", d.record(r).values, d.raw_label(r)));
        }
        prop_assert_eq!(seen.len(), once.len());
    }
}
