use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Action, GuardPolicy, SelectionTrace, SetEvaluator, Step};
use crate::dataset::{AttackClass, FeatureId};
use crate::error::{Error, Result};
use crate::evaluation::MetricsReport;
use crate::featsel::{FeatureSet, RankedList};

/// Outcome of one procedure. A training failure stops the procedure and
/// keeps the set and trace reached so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub set: FeatureSet,
    pub trace: SelectionTrace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

impl PhaseResult {
    fn finish(mut trace: SelectionTrace, set: FeatureSet, aborted: Option<Error>) -> Self {
        trace.final_set = FeatureSet::new(set.iter());
        Self {
            set,
            trace,
            aborted: aborted.map(|e| e.to_string()),
        }
    }
}

struct Run<'a, E: SetEvaluator> {
    eval: &'a E,
    guard: GuardPolicy,
    set: FeatureSet,
    metrics: MetricsReport,
    trace: SelectionTrace,
}

impl<'a, E: SetEvaluator> Run<'a, E> {
    fn start(procedure: &str, start: &FeatureSet, eval: &'a E, guard: GuardPolicy) -> Result<Self> {
        Ok(Self {
            eval,
            guard,
            set: FeatureSet::new(start.iter()),
            metrics: eval.evaluate(start)?,
            trace: SelectionTrace::new(procedure, start),
        })
    }

    /// Evaluates one deletion and applies it when the guard passes.
    fn try_delete(&mut self, f: FeatureId, class: Option<AttackClass>) -> Result<bool> {
        let candidate = self.set.removed(f);
        let after = self.eval.evaluate(&candidate)?;
        let verdict = self.guard.check(&self.metrics, &after);
        let accepted = verdict.is_ok();
        self.trace.steps.push(Step {
            action: Action::Delete,
            feature: f,
            class,
            metrics_before: self.metrics.clone(),
            metrics_after: after.clone(),
            accepted,
            reason: verdict.err().unwrap_or_else(|| "guard passed".into()),
        });
        if accepted {
            self.set = candidate;
            self.metrics = after;
        }
        Ok(accepted)
    }

    fn finish(self, err: Option<Error>) -> PhaseResult {
        PhaseResult::finish(self.trace, self.set, err)
    }
}

/// Removes, one at a time, the features found in the bottom `q` of both
/// rankings, worst combined position first, keeping each removal only when
/// the guard passes.
pub fn reduce_features<E: SetEvaluator>(
    algo_rank: &RankedList,
    class_rank: &RankedList,
    start: &FeatureSet,
    eval: &E,
    guard: GuardPolicy,
    q: usize,
) -> Result<PhaseResult> {
    let mut run = Run::start("reduce_features", start, eval, guard)?;
    let tail = algo_rank
        .tail(q)
        .intersection(&class_rank.tail(q))
        .intersection(start);
    let position = |r: &RankedList, f| r.position(f).unwrap_or(r.len());
    let mut order: Vec<FeatureId> = tail.iter().collect();
    order.sort_by_key(|&f| {
        (
            std::cmp::Reverse(position(algo_rank, f) + position(class_rank, f)),
            f,
        )
    });
    for f in order {
        if run.set.len() <= 1 {
            break;
        }
        if let Err(e) = run.try_delete(f, None) {
            return Ok(run.finish(Some(e)));
        }
    }
    Ok(run.finish(None))
}

/// Ordering of guard-passing candidates: accuracy, then mean TPR, then the
/// lower feature index.
fn better(a: &(FeatureId, MetricsReport), b: &(FeatureId, MetricsReport)) -> bool {
    let ka = (a.1.accuracy, a.1.mean_tpr());
    let kb = (b.1.accuracy, b.1.mean_tpr());
    ka.0 > kb.0 || (ka.0 == kb.0 && (ka.1 > kb.1 || (ka.1 == kb.1 && a.0 < b.0)))
}

/// For each class in the given order, repeatedly adds the important feature
/// of that class giving the best performance among those the guard accepts,
/// until none is acceptable.
pub fn gradual_add<E: SetEvaluator>(
    start: &FeatureSet,
    class_sets: &[(AttackClass, FeatureSet)],
    eval: &E,
    guard: GuardPolicy,
) -> Result<PhaseResult> {
    if start.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let mut run = Run::start("gradual_add", start, eval, guard)?;
    for (class, important) in class_sets {
        loop {
            let candidates: Vec<FeatureId> =
                important.iter().filter(|&f| !run.set.contains(f)).collect();
            if candidates.is_empty() {
                break;
            }
            let evaluated: Result<Vec<(FeatureId, MetricsReport)>> = candidates
                .par_iter()
                .map(|&f| Ok((f, eval.evaluate(&run.set.inserted(f))?)))
                .collect();
            let evaluated = match evaluated {
                Ok(v) => v,
                Err(e) => return Ok(run.finish(Some(e))),
            };
            let verdicts: Vec<Result<(), String>> = evaluated
                .iter()
                .map(|(_, m)| guard.check(&run.metrics, m))
                .collect();
            let mut best: Option<usize> = None;
            for (i, v) in verdicts.iter().enumerate() {
                if v.is_ok() && best.map_or(true, |b| better(&evaluated[i], &evaluated[b])) {
                    best = Some(i);
                }
            }
            for (i, (f, m)) in evaluated.iter().enumerate() {
                let accepted = Some(i) == best;
                let reason = match (&verdicts[i], accepted) {
                    (Err(why), _) => why.clone(),
                    (Ok(()), true) => "best guard-passing candidate".into(),
                    (Ok(()), false) => "guard passed, not the best candidate".into(),
                };
                run.trace.steps.push(Step {
                    action: Action::Add,
                    feature: *f,
                    class: Some(*class),
                    metrics_before: run.metrics.clone(),
                    metrics_after: m.clone(),
                    accepted,
                    reason,
                });
            }
            let Some(b) = best else {
                break;
            };
            let (f, m) = evaluated.into_iter().nth(b).expect("best index");
            run.set = run.set.inserted(f);
            run.metrics = m;
        }
    }
    Ok(run.finish(None))
}

/// For each class in the given order, tries deleting the members of the
/// current set that class ranks as important, lowest-ranked first, keeping a
/// deletion when the guard passes. Passes repeat until one deletes nothing.
pub fn gradual_delete<E: SetEvaluator>(
    start: &FeatureSet,
    class_rankings: &[(AttackClass, RankedList)],
    eval: &E,
    guard: GuardPolicy,
) -> Result<PhaseResult> {
    if start.len() < 2 {
        return Err(Error::Config(format!(
            "gradual delete needs at least 2 features, got {}",
            start.len()
        )));
    }
    let mut run = Run::start("gradual_delete", start, eval, guard)?;
    let mut tried = std::collections::HashSet::new();
    loop {
        let mut deleted = false;
        for (class, ranking) in class_rankings {
            let order: Vec<FeatureId> = ranking
                .features()
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .filter(|&f| run.set.contains(f))
                .collect();
            for f in order {
                if run.set.len() <= 1 {
                    break;
                }
                // a rejection against the same set would repeat verbatim
                if !tried.insert((run.set.clone(), f)) {
                    continue;
                }
                match run.try_delete(f, Some(*class)) {
                    Ok(true) => deleted = true,
                    Ok(false) => {}
                    Err(e) => return Ok(run.finish(Some(e))),
                }
            }
        }
        if !deleted {
            break;
        }
    }
    Ok(run.finish(None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub phase: String,
    pub features: FeatureSet,
    pub accuracy: f64,
    pub min_tpr: f64,
    pub cardinality: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSelection {
    pub winner: FeatureSet,
    pub winner_phase: String,
    pub candidates: Vec<CandidateScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Picks the better phase result by (accuracy, minimum class TPR, fewer
/// features). An aborted phase is skipped with a warning.
pub fn select_best<E: SetEvaluator>(
    add: Option<&PhaseResult>,
    delete: Option<&PhaseResult>,
    eval: &E,
) -> Result<BestSelection> {
    let mut warnings = Vec::new();
    let mut phases = Vec::new();
    for (name, phase) in [("add", add), ("delete", delete)] {
        match phase {
            Some(p) if p.aborted.is_some() => warnings.push(format!(
                "{name} phase aborted: {}",
                p.aborted.as_deref().unwrap_or_default()
            )),
            Some(p) => phases.push((name, &p.set)),
            None => {}
        }
    }
    if phases.is_empty() {
        return Err(Error::Config(
            "no completed selection phase to choose from".into(),
        ));
    }
    let mut candidates = Vec::new();
    for (name, set) in phases {
        let report = eval.evaluate(set)?;
        candidates.push(CandidateScore {
            phase: name.into(),
            features: set.clone(),
            accuracy: report.accuracy,
            min_tpr: report.min_tpr(),
            cardinality: set.len(),
            report,
        });
    }
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        let key = |x: &CandidateScore| (x.accuracy, x.min_tpr, -(x.cardinality as i64));
        let (ka, kb) = (key(c), key(b));
        let wins = ka.0 > kb.0
            || (ka.0 == kb.0 && (ka.1 > kb.1 || (ka.1 == kb.1 && ka.2 > kb.2)));
        if wins {
            best = i;
        }
    }
    let same = candidates.len() == 2 && candidates[0].features == candidates[1].features;
    Ok(BestSelection {
        winner: candidates[best].features.clone(),
        winner_phase: if same {
            "both".into()
        } else {
            candidates[best].phase.clone()
        },
        candidates,
        warning: if warnings.is_empty() {
            None
        } else {
            Some(warnings.join("; "))
        },
    })
}
