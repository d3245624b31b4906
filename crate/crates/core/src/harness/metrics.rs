use serde::{Deserialize, Serialize};

use super::runner::{RunResult, TaskOutcome, TaskStatus};
use super::stats::{stat_test, StatTestResult, TestKind};
use crate::sim::{classify_proxemics, ProxemicZone};
use crate::{Error, Result};

/// Percentage of `part` in `total`, 0 when the total is 0.
pub fn pct(part: f64, total: f64) -> f64 {
    if total > 0.0 {
        100.0 * part / total
    } else {
        0.0
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub tasks: usize,
    pub success: usize,
    pub failure_d: usize,
    pub failure_l: usize,
    pub refused: usize,
}

impl OutcomeCounts {
    pub fn success_pct(&self) -> f64 {
        pct(self.success as f64, self.tasks as f64)
    }

    /// Successes and everything else, for the chi-square test.
    pub fn success_failure(&self) -> [f64; 2] {
        [self.success as f64, (self.tasks - self.success) as f64]
    }
}

/// Time split: moving and stalled time of completed tasks, and the
/// whole time of failed ones.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSplit {
    pub active_s: f64,
    pub stalled_s: f64,
    pub wasted_s: f64,
}

impl TimeSplit {
    pub fn total_s(&self) -> f64 {
        self.active_s + self.stalled_s + self.wasted_s
    }

    pub fn percentages(&self) -> [f64; 3] {
        let t = self.total_s();
        [pct(self.active_s, t), pct(self.stalled_s, t), pct(self.wasted_s, t)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceSplit {
    pub planned_m: f64,
    pub extra_m: f64,
    pub wasted_m: f64,
}

impl DistanceSplit {
    pub fn total_m(&self) -> f64 {
        self.planned_m + self.extra_m + self.wasted_m
    }

    pub fn percentages(&self) -> [f64; 3] {
        let t = self.total_m();
        [pct(self.planned_m, t), pct(self.extra_m, t), pct(self.wasted_m, t)]
    }
}

/// Battery in cycles (one cycle is 100 %).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BatterySplit {
    pub effective_cycles: f64,
    pub wasted_cycles: f64,
}

impl BatterySplit {
    pub fn total_cycles(&self) -> f64 {
        self.effective_cycles + self.wasted_cycles
    }

    pub fn percentages(&self) -> [f64; 2] {
        let t = self.total_cycles();
        [pct(self.effective_cycles, t), pct(self.wasted_cycles, t)]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProxemicsSummary {
    pub samples: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    /// Share of samples per band in [`ProxemicZone::ALL`] order, %.
    pub zones: Vec<f64>,
}

impl ProxemicsSummary {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut counts = [0usize; 5];
        for &d in &sorted {
            let z = classify_proxemics(d)?;
            counts[ProxemicZone::ALL.iter().position(|&x| x == z).expect("listed zone")] += 1;
        }
        Ok(ProxemicsSummary {
            samples: sorted.len(),
            median: quantile(&sorted, 0.5),
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            min: sorted.first().copied().unwrap_or(f64::NAN),
            zones: counts.iter().map(|&c| pct(c as f64, sorted.len() as f64)).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RuntimeStats {
    /// Mean planning time per task (queries plus search), s.
    pub mean_query_s: f64,
    pub mean_expansions: f64,
}

/// Aggregates of one approach over all its runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachMetrics {
    pub approach: String,
    pub runs: usize,
    pub counts: OutcomeCounts,
    pub time: TimeSplit,
    pub distance: DistanceSplit,
    pub battery: BatterySplit,
    pub collisions: u64,
    /// Collision count of each run, in run order.
    pub collisions_per_run: Vec<u64>,
    pub proxemics: ProxemicsSummary,
    pub runtime: RuntimeStats,
}

/// A test of one approach against the reference approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub approach: String,
    pub reference: String,
    /// What was compared: success, proxemics, task_time or collisions.
    pub metric: String,
    /// `None` when the test is undefined for these data.
    pub result: Option<StatTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub approaches: Vec<ApproachMetrics>,
    pub comparisons: Vec<Comparison>,
}

impl MetricsReport {
    pub fn get(&self, approach: &str) -> Option<&ApproachMetrics> {
        self.approaches.iter().find(|a| a.approach == approach)
    }
}

/// Aggregates the outcomes of one approach.
pub fn approach_metrics(approach: &str, runs: &[&[TaskOutcome]]) -> Result<ApproachMetrics> {
    let mut counts = OutcomeCounts::default();
    let mut time = TimeSplit::default();
    let mut distance = DistanceSplit::default();
    let mut battery = BatterySplit::default();
    let mut samples = Vec::new();
    let mut collisions_per_run = Vec::with_capacity(runs.len());
    let (mut query, mut expansions) = (0.0, 0.0);
    for run in runs {
        let mut collisions = 0;
        for o in *run {
            counts.tasks += 1;
            match o.status {
                TaskStatus::Success => {
                    counts.success += 1;
                    time.active_s += o.active_s;
                    time.stalled_s += o.stalled_s;
                    distance.planned_m += o.planned_m;
                    distance.extra_m += o.extra_m;
                    battery.effective_cycles += o.battery_pct / 100.0;
                }
                TaskStatus::FailureD | TaskStatus::FailureL => {
                    if o.status == TaskStatus::FailureD {
                        counts.failure_d += 1;
                    } else {
                        counts.failure_l += 1;
                    }
                    time.wasted_s += o.elapsed_s();
                    distance.wasted_m += o.travelled_m();
                    battery.wasted_cycles += o.battery_pct / 100.0;
                }
                TaskStatus::Refused => counts.refused += 1,
            }
            collisions += o.collisions as u64;
            samples.extend_from_slice(&o.proxemics);
            query += o.query_s;
            expansions += o.expansions as f64;
        }
        collisions_per_run.push(collisions);
    }
    if counts.tasks == 0 {
        return Err(Error::invalid("outcomes", format!("no outcomes for '{approach}'")));
    }
    let n = counts.tasks as f64;
    Ok(ApproachMetrics {
        approach: approach.to_string(),
        runs: runs.len(),
        counts,
        time,
        distance,
        battery,
        collisions: collisions_per_run.iter().sum(),
        collisions_per_run,
        proxemics: ProxemicsSummary::from_samples(&samples)?,
        runtime: RuntimeStats {
            mean_query_s: query / n,
            mean_expansions: expansions / n,
        },
    })
}

#[allow(clippy::unnecessary_to_owned)]
fn pooled<'a>(runs: &[&'a [TaskOutcome]]) -> impl Iterator<Item = &'a TaskOutcome> + 'a {
    runs.to_vec().into_iter().flatten()
}

fn comparisons(name: &str, runs: &[&[TaskOutcome]], reference: &str, reference_runs: &[&[TaskOutcome]], a: &ApproachMetrics, r: &ApproachMetrics) -> Vec<Comparison> {
    let prox = |rs: &[&[TaskOutcome]]| pooled(rs).flat_map(|o| o.proxemics.iter().copied()).collect::<Vec<_>>();
    let times = |rs: &[&[TaskOutcome]]| {
        pooled(rs)
            .filter(|o| o.status != TaskStatus::Refused)
            .map(|o| o.elapsed_s())
            .collect::<Vec<_>>()
    };
    let hits = |rs: &[&[TaskOutcome]]| pooled(rs).map(|o| o.collisions as f64).collect::<Vec<_>>();
    let tests: Vec<(&str, TestKind, Vec<f64>, Vec<f64>)> = vec![
        ("success", TestKind::ChiSquare, a.counts.success_failure().to_vec(), r.counts.success_failure().to_vec()),
        ("proxemics", TestKind::MannWhitneyU, prox(runs), prox(reference_runs)),
        ("task_time", TestKind::MannWhitneyU, times(runs), times(reference_runs)),
        ("collisions", TestKind::NegativeBinomial, hits(runs), hits(reference_runs)),
    ];
    tests
        .into_iter()
        .map(|(metric, kind, x, y)| Comparison {
            approach: name.to_string(),
            reference: reference.to_string(),
            metric: metric.to_string(),
            result: stat_test(kind, &x, &y).ok(),
        })
        .collect()
}

/// Per-approach aggregates of a set of runs, plus tests of every approach against the first one.
pub fn compute_metrics(results: &[RunResult]) -> Result<MetricsReport> {
    let mut names: Vec<&str> = Vec::new();
    for r in results {
        if !names.contains(&r.approach.as_str()) {
            names.push(&r.approach);
        }
    }
    if names.is_empty() {
        return Err(Error::invalid("outcomes", "no runs"));
    }
    let runs_of = |name: &str| -> Vec<&[TaskOutcome]> {
        results.iter().filter(|r| r.approach == name).map(|r| r.outcomes.as_slice()).collect()
    };
    let approaches = names
        .iter()
        .map(|n| approach_metrics(n, &runs_of(n)))
        .collect::<Result<Vec<_>>>()?;
    let reference = names[0];
    let mut all = Vec::new();
    for (i, n) in names.iter().enumerate().skip(1) {
        all.extend(comparisons(n, &runs_of(n), reference, &runs_of(reference), &approaches[i], &approaches[0]));
    }
    Ok(MetricsReport {
        approaches,
        comparisons: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn outcome(status: TaskStatus, planned: f64, extra: f64, battery: f64) -> TaskOutcome {
        TaskOutcome {
            task: 0,
            slot: "S1".into(),
            start: "a".into(),
            goal: "b".into(),
            status,
            active_s: planned / 0.5,
            stalled_s: 1.0,
            planned_m: planned,
            extra_m: extra,
            battery_pct: battery,
            battery_start: 100.0,
            collisions: 0,
            min_person_dist: 2.0,
            proxemics: vec![0.4, 1.0, 2.0, 5.0, 9.0],
            path: vec!["a".into(), "b".into()],
            plan_length: planned,
            c_l: battery,
            expansions: 2,
            query_s: 0.0,
        }
    }

    #[test]
    fn single_success_has_no_extra_or_waste() {
        let o = [outcome(TaskStatus::Success, 10.0, 0.0, 0.1)];
        let m = approach_metrics("x", &[&o]).unwrap();
        assert_eq!(m.distance.extra_m, 0.0);
        assert_eq!(m.distance.wasted_m, 0.0);
        assert_eq!(m.distance.planned_m, 10.0);
        assert_eq!(m.counts.success_pct(), 100.0);
    }

    #[test]
    fn battery_split_is_half_and_half() {
        let o = [
            outcome(TaskStatus::Success, 4.0, 0.0, 5.0),
            outcome(TaskStatus::FailureD, 4.0, 0.0, 5.0),
        ];
        let m = approach_metrics("x", &[&o]).unwrap();
        assert_eq!(m.battery.percentages(), [50.0, 50.0]);
        assert!((m.battery.total_cycles() - 0.1).abs() < 1e-12);
        for p in [m.time.percentages().iter().sum::<f64>(), m.distance.percentages().iter().sum()] {
            assert!((p - 100.0).abs() < 0.1);
        }
    }

    #[test]
    fn refused_tasks_waste_nothing() {
        let mut r = outcome(TaskStatus::Refused, 0.0, 0.0, 0.0);
        r.active_s = 0.0;
        r.stalled_s = 0.0;
        let o = [outcome(TaskStatus::Success, 4.0, 1.0, 1.0), r];
        let m = approach_metrics("x", &[&o]).unwrap();
        assert_eq!(m.counts.refused, 1);
        assert_eq!(m.time.wasted_s, 0.0);
        assert_eq!(m.battery.wasted_cycles, 0.0);
    }

    #[test]
    fn proxemic_bands_follow_classifier() {
        let samples = [0.4, 1.0, 2.0, 5.0, 9.0, 0.49, 0.5];
        let s = ProxemicsSummary::from_samples(&samples).unwrap();
        let mut expect = [0.0; 5];
        for d in samples {
            let z = classify_proxemics(d).unwrap();
            expect[ProxemicZone::ALL.iter().position(|&x| x == z).unwrap()] += 100.0 / 7.0;
        }
        for (a, b) in s.zones.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(s.min, 0.4);
        assert_eq!(s.median, 1.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&x, 0.5), 2.5);
        assert_eq!(quantile(&x, 0.25), 1.75);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn comparisons_against_first_approach() {
        let a = vec![outcome(TaskStatus::Success, 4.0, 0.0, 1.0); 20];
        let mut b = a.clone();
        for o in b.iter_mut().take(10) {
            o.status = TaskStatus::FailureD;
        }
        let runs = vec![
            RunResult { approach: "base".into(), seed: 1, outcomes: b, consumption_pct: 0.0 },
            RunResult { approach: "new".into(), seed: 1, outcomes: a, consumption_pct: 0.0 },
        ];
        let r = compute_metrics(&runs).unwrap();
        assert_eq!(r.approaches.len(), 2);
        let chi = r.comparisons.iter().find(|c| c.metric == "success").unwrap();
        assert!(chi.result.unwrap().p_value < 0.01);
    }
}
