use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use super::metrics::{MetricsReport, RuntimeStats};
use super::runner::{RunResult, TaskOutcome, TaskStatus};
use super::scalability::ScalabilityReport;
use super::sensitivity::SensitivityReport;
use crate::fmt::sig9;
use crate::sim::ProxemicZone;
use crate::{Error, Result};

const OUTCOME_HEADER: [&str; 19] = [
    "approach",
    "seed",
    "slot",
    "task",
    "start",
    "goal",
    "status",
    "active_s",
    "stalled_s",
    "planned_m",
    "extra_m",
    "battery_pct",
    "battery_start",
    "collisions",
    "min_person_dist",
    "plan_length",
    "c_l",
    "expansions",
    "path",
];

/// Shortest text that parses back to the same value, so re-read outcomes aggregate exactly.
fn exact(x: f64) -> String {
    format!("{x}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per task. Wall-clock planning time is left out so the file is reproducible.
pub fn outcomes_csv(results: &[RunResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(OUTCOME_HEADER)?;
    for r in results {
        for o in &r.outcomes {
            w.write_record([
                r.approach.clone(),
                r.seed.to_string(),
                o.slot.clone(),
                o.task.to_string(),
                o.start.clone(),
                o.goal.clone(),
                o.status.name().to_string(),
                exact(o.active_s),
                exact(o.stalled_s),
                exact(o.planned_m),
                exact(o.extra_m),
                exact(o.battery_pct),
                exact(o.battery_start),
                o.collisions.to_string(),
                exact(o.min_person_dist),
                exact(o.plan_length),
                exact(o.c_l),
                o.expansions.to_string(),
                o.path.join(">"),
            ])?;
        }
    }
    finish(w)
}

/// One row per proxemics sample: approach, seed, slot, task, sample index, distance.
pub fn proxemics_csv(results: &[RunResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["approach", "seed", "slot", "task", "sample", "distance_m"])?;
    for r in results {
        for o in &r.outcomes {
            for (i, d) in o.proxemics.iter().enumerate() {
                w.write_record([
                    r.approach.as_str(),
                    &r.seed.to_string(),
                    &o.slot,
                    &o.task.to_string(),
                    &i.to_string(),
                    &exact(*d),
                ])?;
            }
        }
    }
    finish(w)
}

fn num(rec: &csv::StringRecord, i: usize, row: usize) -> Result<f64> {
    let s = rec.get(i).unwrap_or("");
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("row {row}: column '{}' is not a number: '{s}'", OUTCOME_HEADER[i])))
}

fn int<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, row: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.parse::<T>()
        .map_err(|_| Error::Parse(format!("row {row}: column '{}' is not an integer: '{s}'", OUTCOME_HEADER[i])))
}

/// Rebuilds run results from the two CSVs written by [`outcomes_csv`] and [`proxemics_csv`].
/// Planning times come back as zero.
pub fn read_outcomes(outcomes: impl Read, proxemics: impl Read) -> Result<Vec<RunResult>> {
    let mut rd = csv::Reader::from_reader(outcomes);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != OUTCOME_HEADER {
        return Err(Error::Parse(format!("unexpected outcomes header: {}", header.join(","))));
    }
    let mut runs: Vec<RunResult> = Vec::new();
    let mut index: BTreeMap<(String, u64), usize> = BTreeMap::new();
    let mut task_at: BTreeMap<(String, u64, String, usize), (usize, usize)> = BTreeMap::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = row + 2;
        let approach = rec.get(0).unwrap_or("").to_string();
        let seed: u64 = int(&rec, 1, row)?;
        let status = TaskStatus::parse(rec.get(6).unwrap_or(""))
            .ok_or_else(|| Error::Parse(format!("row {row}: unknown status '{}'", rec.get(6).unwrap_or(""))))?;
        let path = rec.get(18).unwrap_or("");
        let o = TaskOutcome {
            task: int(&rec, 3, row)?,
            slot: rec.get(2).unwrap_or("").to_string(),
            start: rec.get(4).unwrap_or("").to_string(),
            goal: rec.get(5).unwrap_or("").to_string(),
            status,
            active_s: num(&rec, 7, row)?,
            stalled_s: num(&rec, 8, row)?,
            planned_m: num(&rec, 9, row)?,
            extra_m: num(&rec, 10, row)?,
            battery_pct: num(&rec, 11, row)?,
            battery_start: num(&rec, 12, row)?,
            collisions: int(&rec, 13, row)?,
            min_person_dist: num(&rec, 14, row)?,
            proxemics: Vec::new(),
            path: if path.is_empty() { Vec::new() } else { path.split('>').map(str::to_string).collect() },
            plan_length: num(&rec, 15, row)?,
            c_l: num(&rec, 16, row)?,
            expansions: int(&rec, 17, row)?,
            query_s: 0.0,
        };
        let ri = *index.entry((approach.clone(), seed)).or_insert_with(|| {
            runs.push(RunResult {
                approach: approach.clone(),
                seed,
                outcomes: Vec::new(),
                consumption_pct: 0.0,
            });
            runs.len() - 1
        });
        task_at.insert((approach, seed, o.slot.clone(), o.task), (ri, runs[ri].outcomes.len()));
        runs[ri].consumption_pct += o.battery_pct;
        runs[ri].outcomes.push(o);
    }
    let mut rd = csv::Reader::from_reader(proxemics);
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = row + 2;
        let seed: u64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Parse(format!("proxemics row {row}: bad seed")))?;
        let task: usize = rec
            .get(3)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Parse(format!("proxemics row {row}: bad task")))?;
        let d: f64 = rec
            .get(5)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Parse(format!("proxemics row {row}: bad distance")))?;
        let key = (rec.get(0).unwrap_or("").to_string(), seed, rec.get(2).unwrap_or("").to_string(), task);
        let &(ri, ti) = task_at
            .get(&key)
            .ok_or_else(|| Error::Parse(format!("proxemics row {row}: no matching task")))?;
        runs[ri].outcomes[ti].proxemics.push(d);
    }
    Ok(runs)
}

/// Per-approach aggregates, one row each.
pub fn metrics_csv(report: &MetricsReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "approach",
        "runs",
        "tasks",
        "success",
        "failure_D",
        "failure_L",
        "refused",
        "success_pct",
        "active_s",
        "stalled_s",
        "wasted_s",
        "planned_m",
        "extra_m",
        "wasted_m",
        "effective_cycles",
        "wasted_cycles",
        "collisions",
        "collisions_per_run",
        "proxemics_samples",
        "proxemics_median_m",
        "proxemics_q1_m",
        "proxemics_q3_m",
        "proxemics_min_m",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(ProxemicZone::ALL.iter().map(|z| format!("{}_pct", z.name())));
    header.push("mean_expansions".into());
    w.write_record(&header)?;
    for m in &report.approaches {
        let mut row = vec![
            m.approach.clone(),
            m.runs.to_string(),
            m.counts.tasks.to_string(),
            m.counts.success.to_string(),
            m.counts.failure_d.to_string(),
            m.counts.failure_l.to_string(),
            m.counts.refused.to_string(),
            sig9(m.counts.success_pct()),
            sig9(m.time.active_s),
            sig9(m.time.stalled_s),
            sig9(m.time.wasted_s),
            sig9(m.distance.planned_m),
            sig9(m.distance.extra_m),
            sig9(m.distance.wasted_m),
            sig9(m.battery.effective_cycles),
            sig9(m.battery.wasted_cycles),
            m.collisions.to_string(),
            m.collisions_per_run.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            m.proxemics.samples.to_string(),
            sig9(m.proxemics.median),
            sig9(m.proxemics.q1),
            sig9(m.proxemics.q3),
            sig9(m.proxemics.min),
        ];
        row.extend(m.proxemics.zones.iter().map(|z| sig9(*z)));
        row.push(sig9(m.runtime.mean_expansions));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Every pairwise comparison against the reference approach.
pub fn tests_csv(report: &MetricsReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["approach", "reference", "metric", "test", "statistic", "p_value", "n_a", "n_b"])?;
    for c in &report.comparisons {
        let (test, stat, p, na, nb) = match &c.result {
            Some(r) => (r.kind.name().to_string(), sig9(r.statistic), sig9(r.p_value), r.n_a.to_string(), r.n_b.to_string()),
            None => ("undefined".into(), String::new(), String::new(), String::new(), String::new()),
        };
        w.write_record([c.approach.clone(), c.reference.clone(), c.metric.clone(), test, stat, p, na, nb])?;
    }
    finish(w)
}

pub fn sensitivity_csv(report: &SensitivityReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "rank",
        "lambda_delta",
        "lambda_d",
        "lambda_l",
        "default",
        "survives",
        "success",
        "tasks",
        "collisions",
        "time_s",
        "distance_m",
        "battery_cycles",
    ])?;
    for r in &report.rows {
        let m = &r.metrics;
        w.write_record([
            r.rank.map(|x| x.to_string()).unwrap_or_default(),
            sig9(r.weights.lambda_delta),
            sig9(r.weights.lambda_d),
            sig9(r.weights.lambda_l),
            r.is_default.to_string(),
            r.survives.to_string(),
            m.counts.success.to_string(),
            m.counts.tasks.to_string(),
            m.collisions.to_string(),
            sig9(m.time.total_s()),
            sig9(m.distance.total_m()),
            sig9(m.battery.total_cycles()),
        ])?;
    }
    finish(w)
}

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

fn triple(p: [f64; 3]) -> String {
    format!("{} / {} / {}", f2(p[0]), f2(p[1]), f2(p[2]))
}

/// Markdown with the outcome, time, distance and battery breakdowns, collisions, proxemics and
/// the significance tests. `runtime` adds the per-approach planning-time table.
pub fn markdown_report(report: &MetricsReport, runtime: Option<&BTreeMap<String, RuntimeStats>>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Experiment report\n");
    let _ = writeln!(s, "## Task outcomes\n");
    let _ = writeln!(s, "| Approach | Tasks | Success % | Success | Deadline failures | Battery failures | Refused |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    for m in &report.approaches {
        let c = &m.counts;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            m.approach,
            c.tasks,
            f2(c.success_pct()),
            c.success,
            c.failure_d,
            c.failure_l,
            c.refused
        );
    }
    let _ = writeln!(s, "\n## Time, distance and battery\n");
    let _ = writeln!(
        s,
        "| Approach | Time total (h) | Active / stalled / wasted % | Distance total (km) | Planned / extra / wasted % | Battery cycles | Effective / wasted % |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    for m in &report.approaches {
        let b = m.battery.percentages();
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} / {} |",
            m.approach,
            f2(m.time.total_s() / 3600.0),
            triple(m.time.percentages()),
            f2(m.distance.total_m() / 1000.0),
            triple(m.distance.percentages()),
            f2(m.battery.total_cycles()),
            f2(b[0]),
            f2(b[1])
        );
    }
    let _ = writeln!(s, "\n## Collisions\n");
    let _ = writeln!(s, "| Approach | Total | Per run |");
    let _ = writeln!(s, "|---|---|---|");
    for m in &report.approaches {
        let per = m.collisions_per_run.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "| {} | {} | {} |", m.approach, m.collisions, per);
    }
    let _ = writeln!(s, "\n## Proxemics\n");
    let zones: Vec<&str> = ProxemicZone::ALL.iter().map(|z| z.name()).collect();
    let _ = writeln!(s, "| Approach | Samples | Median (m) | Q1 | Q3 | Min | {} |", zones.join(" % | ") + " %");
    let _ = writeln!(s, "|---|---|---|---|---|---|{}", "---|".repeat(zones.len()));
    for m in &report.approaches {
        let p = &m.proxemics;
        let z: Vec<String> = p.zones.iter().map(|x| f2(*x)).collect();
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            m.approach,
            p.samples,
            f2(p.median),
            f2(p.q1),
            f2(p.q3),
            f2(p.min),
            z.join(" | ")
        );
    }
    if let Some(rt) = runtime {
        let _ = writeln!(s, "\n## Planning runtime\n");
        let _ = writeln!(s, "| Approach | Mean planning time (ms) | Mean node expansions |");
        let _ = writeln!(s, "|---|---|---|");
        for m in &report.approaches {
            if let Some(r) = rt.get(&m.approach) {
                let _ = writeln!(s, "| {} | {:.3} | {} |", m.approach, r.mean_query_s * 1e3, f2(r.mean_expansions));
            }
        }
    }
    let _ = writeln!(s, "\n## Significance tests\n");
    let _ = writeln!(s, "| Approach | Reference | Metric | Test | Statistic | p |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for c in &report.comparisons {
        match &c.result {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {:.3} | {:.3e} |",
                    c.approach,
                    c.reference,
                    c.metric,
                    r.kind.name(),
                    r.statistic,
                    r.p_value
                );
            }
            None => {
                let _ = writeln!(s, "| {} | {} | {} | undefined | | |", c.approach, c.reference, c.metric);
            }
        }
    }
    s
}

/// Ranked weight configurations followed by the excluded ones.
pub fn sensitivity_markdown(report: &SensitivityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Heuristic weight sweep (seed {})\n", report.seed);
    let _ = writeln!(
        s,
        "| Rank | (lambda_delta, lambda_D, lambda_L) | Time (min) | Distance (m) | Battery cycles | Success | Collisions |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    for r in &report.rows {
        let w = &r.weights;
        let mark = if r.is_default { " *" } else { "" };
        let m = &r.metrics;
        let _ = writeln!(
            s,
            "| {} | ({}, {}, {}){} | {} | {} | {:.4} | {}/{} | {} |",
            r.rank.map(|x| x.to_string()).unwrap_or_else(|| "excluded".into()),
            w.lambda_delta,
            w.lambda_d,
            w.lambda_l,
            mark,
            f2(m.time.total_s() / 60.0),
            f2(m.distance.total_m()),
            m.battery.total_cycles(),
            m.counts.success,
            m.counts.tasks,
            m.collisions
        );
    }
    let _ = writeln!(s, "\n`*` marks the default configuration.");
    s
}

pub fn scalability_markdown(report: &ScalabilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Query scalability\n");
    let _ = writeln!(s, "| Waypoints | Repeats | Mean (ms) | Std (ms) |");
    let _ = writeln!(s, "|---|---|---|---|");
    for r in &report.rows {
        let std = r.std_s.map(|x| format!("{:.3}", x * 1e3)).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "| {} | {} | {:.3} | {} |", r.size, r.repeats, r.mean_s * 1e3, std);
    }
    let f = &report.fit;
    let _ = writeln!(
        s,
        "\nLeast-squares fit: time = {:.4} ms x waypoints + {:.4} ms, R^2 = {:.4}",
        f.slope * 1e3,
        f.intercept * 1e3,
        f.r_squared
    );
    s
}

/// Mean planning time and expansions per approach, from the live (not re-read) results.
pub fn runtime_by_approach(results: &[RunResult]) -> BTreeMap<String, RuntimeStats> {
    let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for r in results {
        let e = acc.entry(r.approach.clone()).or_default();
        for o in &r.outcomes {
            e.0 += o.query_s;
            e.1 += o.expansions as f64;
            e.2 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (q, x, n))| {
            let n = n.max(1) as f64;
            (
                k,
                RuntimeStats {
                    mean_query_s: q / n,
                    mean_expansions: x / n,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(task: usize, status: TaskStatus, prox: Vec<f64>) -> TaskOutcome {
        TaskOutcome {
            task,
            slot: "S2".into(),
            start: "A".into(),
            goal: "B".into(),
            status,
            active_s: 12.5,
            stalled_s: 1.0,
            planned_m: 6.25,
            extra_m: 0.0,
            battery_pct: 0.1234567891,
            battery_start: 99.5,
            collisions: 1,
            min_person_dist: f64::INFINITY,
            proxemics: prox,
            path: vec!["A".into(), "M".into(), "B".into()],
            plan_length: 6.25,
            c_l: 0.1,
            expansions: 4,
            query_s: 0.01,
        }
    }

    #[test]
    fn outcomes_round_trip() {
        let runs = vec![RunResult {
            approach: "baseline".into(),
            seed: 3,
            outcomes: vec![
                outcome(0, TaskStatus::Success, vec![1.5, 2.25]),
                outcome(1, TaskStatus::FailureL, vec![]),
            ],
            consumption_pct: 0.2469135782,
        }];
        let o = outcomes_csv(&runs).unwrap();
        let p = proxemics_csv(&runs).unwrap();
        assert!(!o.contains("0.01,"), "planning time must stay out of the csv");
        let back = read_outcomes(o.as_bytes(), p.as_bytes()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].outcomes[0].proxemics, vec![1.5, 2.25]);
        assert_eq!(back[0].outcomes[1].status, TaskStatus::FailureL);
        assert_eq!(back[0].outcomes[0].path, runs[0].outcomes[0].path);
        assert!(back[0].outcomes[0].min_person_dist.is_infinite());
        assert_eq!(outcomes_csv(&back).unwrap(), o);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_outcomes("a,b\n1,2\n".as_bytes(), "".as_bytes()).is_err());
    }
}
