use idsfeat_core::classifiers::{
    train, train_adaboost_m1_traced, AdaBoostModel, ForestConfig, Model, ModelSpec, Node,
    TrainedModel, TreeConfig, WeightedDataset,
};
use idsfeat_core::dataset::{parse_kdd, AttackClass, Dataset, Schema};
use idsfeat_core::evaluation::{stratified_kfold, CVConfig};
use idsfeat_core::featsel::FeatureSet;
use idsfeat_core::synth;
use idsfeat_core::Error;
use idsfeat_oracle as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use AttackClass::{Dos, Normal};

const TOL: f64 = 1e-9;

fn numeric(rows: &[(Vec<f64>, AttackClass)]) -> Dataset {
    let mut b = Dataset::builder(Schema::numeric(rows[0].0.len()).unwrap());
    for (v, c) in rows {
        b.push_numeric(v, *c).unwrap();
    }
    b.build()
}

fn training_accuracy(m: &TrainedModel, d: &Dataset) -> f64 {
    let p = m.predict_dataset(d).unwrap();
    p.iter().zip(d.classes()).filter(|(a, b)| a == b).count() as f64 / d.len() as f64
}

fn stump() -> ModelSpec {
    ModelSpec::Tree(TreeConfig {
        min_leaf: 1,
        max_depth: Some(1),
    })
}

fn kdd_sample(seed: u64, rows: usize) -> Dataset {
    parse_kdd(synth::kdd_like_csv(seed, rows).as_bytes(), &Schema::kdd()).unwrap()
}

/// Root split chosen by brute force: best-gain threshold per feature, then
/// the highest gain ratio among features with at least average gain.
fn oracle_root(d: &Dataset) -> (usize, f64) {
    let labels: Vec<u32> = d.classes().iter().map(|c| c.index() as u32).collect();
    let mut per_feature = Vec::new();
    for f in 0..d.n_features() {
        let values: Vec<f64> = (0..d.len())
            .map(|r| match d.record(r).values[f] {
                idsfeat_core::dataset::Value::Number(x) => x,
                _ => unreachable!("numeric fixture"),
            })
            .collect();
        let mut best: Option<(f64, f64)> = None;
        for (t, g) in oracle::all_threshold_gains(&values, &labels) {
            if best.map_or(true, |b| g > b.1 + TOL) {
                best = Some((t, g));
            }
        }
        if let Some((t, g)) = best {
            let left = values.iter().filter(|&&v| v <= t).count();
            let split = oracle::entropy_of_counts(&[left, values.len() - left]);
            per_feature.push((f, t, g, g / split));
        }
    }
    let avg = per_feature.iter().map(|p| p.2).sum::<f64>() / per_feature.len() as f64;
    let mut pick: Option<(usize, f64, f64)> = None;
    for &(f, t, g, gr) in &per_feature {
        if g >= avg - TOL && pick.map_or(true, |p| gr > p.2 + TOL) {
            pick = Some((f, t, gr));
        }
    }
    let (f, t, _) = pick.expect("some split");
    (f, t)
}

#[test]
fn tree_root_split_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..40 {
        let n_features = rng.gen_range(1..5);
        let n = rng.gen_range(8..60);
        let rows: Vec<(Vec<f64>, AttackClass)> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..n_features).map(|_| rng.gen_range(0..12) as f64).collect();
                let signal = v[0] + if n_features > 1 { v[1] / 2.0 } else { 0.0 };
                let c = if (signal > 6.0) != rng.gen_bool(0.15) { Dos } else { Normal };
                (v, c)
            })
            .collect();
        let d = numeric(&rows);
        let labels: Vec<u32> = d.classes().iter().map(|c| c.index() as u32).collect();
        if oracle::entropy(&labels) == 0.0 {
            continue;
        }
        let spec = ModelSpec::Tree(TreeConfig { min_leaf: 1, max_depth: Some(1) });
        let w = WeightedDataset::uniform(&d, FeatureSet::all(n_features)).unwrap();
        let m = train(&spec, &w, 0).unwrap();
        let Model::Tree(tree) = &m.model else { panic!("tree") };
        let (f, t) = oracle_root(&d);
        match &tree.nodes[0] {
            Node::Threshold { feature, threshold, .. } => {
                assert_eq!(feature.column(), f, "case {case}");
                assert!((threshold - t).abs() <= TOL, "case {case}: {threshold} vs {t}");
            }
            other => panic!("case {case}: expected a threshold root, got {other:?}"),
        }
    }
}

#[test]
fn one_tree_forest_without_bootstrap_is_the_tree() {
    let d = kdd_sample(1, 600);
    let w = WeightedDataset::uniform(&d, FeatureSet::all(41)).unwrap();
    let tree = train(&ModelSpec::Tree(TreeConfig::default()), &w, 0).unwrap();
    let forest = train(
        &ModelSpec::Forest(ForestConfig {
            n_trees: 1,
            m_try: Some(41),
            bootstrap: false,
            tree: TreeConfig::default(),
        }),
        &w,
        5,
    )
    .unwrap();
    let Model::Tree(t) = &tree.model else { panic!() };
    let Model::Forest(f) = &forest.model else { panic!() };
    assert_eq!(&f.trees[0], t);
    assert_eq!(tree.predict_dataset(&d).unwrap(), forest.predict_dataset(&d).unwrap());
}

#[test]
fn every_learner_separates_separable_data() {
    let d = synth::separable(4, 400, 5);
    let specs = [
        ModelSpec::NaiveBayes,
        ModelSpec::Tree(TreeConfig::default()),
        ModelSpec::Forest(ForestConfig { n_trees: 15, ..ForestConfig::default() }),
        ModelSpec::budgeted(),
    ];
    let cv = CVConfig { k: 5, seed: 3, stratified: true };
    for spec in &specs {
        let r = stratified_kfold(&d, &cv, spec, &FeatureSet::all(5)).unwrap();
        assert!(r.report.accuracy >= 0.99, "{spec:?}: {}", r.report.accuracy);
    }
}

#[test]
fn adaboost_rounds_match_hand_computation() {
    // x = 1..6, classes N N N D D N. Round 1: the stump at 3.5 misses only
    // x = 6, so e1 = 1/6 and beta1 = 1/5. The five correct records shrink to
    // 0.1 each and x = 6 rises to 0.5. Round 2: no stump isolates the middle
    // D pair, every split predicts NORMAL on both sides, e2 = 0.2 and
    // beta2 = 1/4.
    let classes = [Normal, Normal, Normal, Dos, Dos, Normal];
    let rows: Vec<(Vec<f64>, AttackClass)> =
        classes.iter().enumerate().map(|(i, &c)| (vec![i as f64 + 1.0], c)).collect();
    let d = numeric(&rows);
    let w = WeightedDataset::uniform(&d, FeatureSet::all(1)).unwrap();
    let (model, weights) = train_adaboost_m1_traced(&stump(), &w, 2, 0).unwrap();
    assert_eq!(model.rounds.len(), 2);
    assert!((model.rounds[0].error - 1.0 / 6.0).abs() < TOL);
    assert!((model.rounds[0].vote - 5f64.ln()).abs() < TOL);
    assert!((model.rounds[1].error - 0.2).abs() < TOL);
    assert!((model.rounds[1].vote - 4f64.ln()).abs() < TOL);
    let after1 = [0.1, 0.1, 0.1, 0.1, 0.1, 0.5];
    for (g, e) in weights[0].iter().zip(after1) {
        assert!((g - e).abs() < TOL, "{:?}", weights[0]);
    }
    let after2 = [0.0625, 0.0625, 0.0625, 0.25, 0.25, 0.3125];
    for (g, e) in weights[1].iter().zip(after2) {
        assert!((g - e).abs() < TOL, "{:?}", weights[1]);
    }
    for ws in &weights {
        assert!((ws.iter().sum::<f64>() - 1.0).abs() < TOL);
    }
}

#[test]
fn boosting_weights_stay_normalized() {
    let d = synth::xor_noise(2, 300, 0.1);
    let w = WeightedDataset::uniform(&d, FeatureSet::all(3)).unwrap();
    let (_, weights) = train_adaboost_m1_traced(&stump(), &w, 10, 1).unwrap();
    for ws in &weights {
        assert!((ws.iter().sum::<f64>() - 1.0).abs() < TOL);
    }
}

fn prefix(model: &TrainedModel, rounds: usize) -> TrainedModel {
    let Model::AdaBoost(m) = &model.model else { panic!("boosted") };
    TrainedModel {
        model: Model::AdaBoost(AdaBoostModel { rounds: m.rounds[..rounds].to_vec() }),
        ..model.clone()
    }
}

#[test]
fn boosted_training_error_does_not_increase_on_xor() {
    let d = synth::xor_noise(8, 400, 0.05);
    let w = WeightedDataset::uniform(&d, FeatureSet::all(3)).unwrap();
    let base = ModelSpec::Tree(TreeConfig { min_leaf: 2, max_depth: Some(2) });
    let m = train(&ModelSpec::AdaBoost { base: Box::new(base), rounds: 8 }, &w, 4).unwrap();
    let Model::AdaBoost(inner) = &m.model else { panic!() };
    let errors: Vec<f64> = (1..=inner.rounds.len())
        .map(|t| 1.0 - training_accuracy(&prefix(&m, t), &d))
        .collect();
    assert!(errors.windows(2).all(|e| e[1] <= e[0] + TOL), "{errors:?}");
}

#[test]
fn uninformative_first_round_gives_empty_ensemble() {
    // a constant feature and balanced classes: the stump can only guess
    let rows: Vec<(Vec<f64>, AttackClass)> =
        (0..10).map(|i| (vec![1.0], if i % 2 == 0 { Normal } else { Dos })).collect();
    let d = numeric(&rows);
    let w = WeightedDataset::uniform(&d, FeatureSet::all(1)).unwrap();
    let r = train(&ModelSpec::AdaBoost { base: Box::new(stump()), rounds: 3 }, &w, 0);
    assert!(matches!(r, Err(Error::EmptyEnsemble(e)) if (e - 0.5).abs() < TOL));
}

#[test]
fn models_round_trip_through_json() {
    let d = kdd_sample(3, 500);
    let fs: FeatureSet = "1,2,3,4,5,23,24".parse().unwrap();
    let w = WeightedDataset::uniform(&d, fs).unwrap();
    let test = kdd_sample(4, 200);
    for spec in [
        ModelSpec::NaiveBayes,
        ModelSpec::Tree(TreeConfig::default()),
        ModelSpec::Forest(ForestConfig { n_trees: 7, ..ForestConfig::default() }),
        ModelSpec::budgeted(),
    ] {
        let m = train(&spec, &w, 9).unwrap();
        let text = m.to_json().unwrap();
        let back = TrainedModel::from_json(&text).unwrap();
        // build time is not serialized
        assert_eq!(back.model, m.model);
        assert_eq!(back.to_json().unwrap(), text);
        assert_eq!(back.predict_dataset(&test).unwrap(), m.predict_dataset(&test).unwrap());
    }
}

#[test]
fn learners_are_deterministic_and_order_free() {
    let d = kdd_sample(5, 500);
    let mut perm: Vec<usize> = (0..d.len()).collect();
    perm.reverse();
    let shuffled = d.select_rows(&perm);
    let fs = FeatureSet::all(41);
    for spec in [ModelSpec::NaiveBayes, ModelSpec::Tree(TreeConfig::default())] {
        let a = train(&spec, &WeightedDataset::uniform(&d, fs.clone()).unwrap(), 1).unwrap();
        let b = train(&spec, &WeightedDataset::uniform(&shuffled, fs.clone()).unwrap(), 1).unwrap();
        assert_eq!(a.predict_dataset(&d).unwrap(), b.predict_dataset(&d).unwrap(), "{spec:?}");
    }
    let spec = ModelSpec::budgeted();
    let w = WeightedDataset::uniform(&d, fs).unwrap();
    assert_eq!(train(&spec, &w, 2).unwrap().to_json().unwrap(), train(&spec, &w, 2).unwrap().to_json().unwrap());
}

#[test]
fn unseen_tokens_are_scored_without_failure() {
    let train_d = kdd_sample(6, 400);
    let mut text = synth::kdd_like_csv(7, 50);
    text = text.replace(",http,", ",gopher,").replace(",tcp,", ",sctp,");
    let test = parse_kdd(text.as_bytes(), &Schema::kdd()).unwrap();
    let w = WeightedDataset::uniform(&train_d, FeatureSet::all(41)).unwrap();
    for spec in [ModelSpec::NaiveBayes, ModelSpec::Tree(TreeConfig::default())] {
        let m = train(&spec, &w, 0).unwrap();
        assert_eq!(m.predict_dataset(&test).unwrap().len(), test.len());
    }
}
