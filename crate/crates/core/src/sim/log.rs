use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::world::StepRecord;
use crate::fmt::sig9;
use crate::{Error, Result};

/// One logged simulation sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub v: f64,
    pub b: f64,
    pub l: f64,
    pub c: bool,
    pub o: bool,
    /// Index into [`TimeSeriesLog::slot_ids`].
    pub s: usize,
    /// Index into [`TimeSeriesLog::waypoint_ids`].
    pub robot_w: usize,
    pub counts: Vec<u16>,
    pub min_person_dist: f64,
}

impl LogRow {
    pub fn from_step(r: &StepRecord, counts: Vec<u16>) -> Self {
        LogRow {
            t: r.t,
            v: r.v,
            b: r.b,
            l: r.l,
            c: r.c,
            o: r.o,
            s: r.slot,
            robot_w: r.robot_w,
            counts,
            min_person_dist: r.min_person_dist,
        }
    }
}

/// Raw simulation output, sampled every `period` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesLog {
    pub scenario: String,
    pub seed: u64,
    pub period: f64,
    pub waypoint_ids: Vec<String>,
    pub slot_ids: Vec<String>,
    pub rows: Vec<LogRow>,
}

impl TimeSeriesLog {
    pub fn new(scenario: &str, seed: u64, period: f64, waypoint_ids: Vec<String>, slot_ids: Vec<String>) -> Self {
        TimeSeriesLog {
            scenario: scenario.to_string(),
            seed,
            period,
            waypoint_ids,
            slot_ids,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Conventional file name for this run.
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.scenario, self.seed)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["t", "V", "B", "L", "C", "O", "S", "robot_W"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(self.waypoint_ids.iter().map(|w| format!("cnt_{w}")));
        h.push("min_person_dist".into());
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        let mut rec: Vec<String> = Vec::with_capacity(9 + self.waypoint_ids.len());
        for r in &self.rows {
            rec.clear();
            rec.extend([
                sig9(r.t),
                sig9(r.v),
                sig9(r.b),
                sig9(r.l),
                u8::from(r.c).to_string(),
                u8::from(r.o).to_string(),
                self.slot_ids[r.s].clone(),
                self.waypoint_ids[r.robot_w].clone(),
            ]);
            rec.extend(r.counts.iter().map(|c| c.to_string()));
            rec.push(sig9(r.min_person_dist));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<dir>/<scenario>_<seed>.csv` and returns the path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        self.write_csv(file)?;
        Ok(path)
    }

    /// Reads a log written by [`write_csv`](Self::write_csv). Slot ids are recovered in
    /// order of first appearance.
    pub fn read_csv<R: Read>(input: R, scenario: &str, seed: u64) -> Result<TimeSeriesLog> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let n = header.len();
        if n < 9 || header[..8] != ["t", "V", "B", "L", "C", "O", "S", "robot_W"] || header[n - 1] != "min_person_dist" {
            return Err(Error::Parse("unexpected log header".into()));
        }
        let waypoint_ids: Vec<String> = header[8..n - 1]
            .iter()
            .map(|h| {
                h.strip_prefix("cnt_")
                    .map(str::to_string)
                    .ok_or_else(|| Error::Parse(format!("bad count column {h}")))
            })
            .collect::<Result<_>>()?;
        let mut log = TimeSeriesLog::new(scenario, seed, 0.0, waypoint_ids, Vec::new());
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let s_id = &rec[6];
            let s = match log.slot_ids.iter().position(|x| x == s_id) {
                Some(k) => k,
                None => {
                    log.slot_ids.push(s_id.to_string());
                    log.slot_ids.len() - 1
                }
            };
            let robot_w = log
                .waypoint_ids
                .iter()
                .position(|x| x == &rec[7])
                .ok_or_else(|| Error::UnknownWaypoint(rec[7].to_string()))?;
            let counts = (8..n - 1)
                .map(|k| {
                    rec[k]
                        .parse::<u16>()
                        .map_err(|_| Error::Parse(format!("line {line}: bad count")))
                })
                .collect::<Result<_>>()?;
            log.rows.push(LogRow {
                t: num(&rec[0], line)?,
                v: num(&rec[1], line)?,
                b: num(&rec[2], line)?,
                l: num(&rec[3], line)?,
                c: &rec[4] == "1",
                o: &rec[5] == "1",
                s,
                robot_w,
                counts,
                min_person_dist: num(&rec[n - 1], line)?,
            });
        }
        if log.rows.len() >= 2 {
            log.period = log.rows[1].t - log.rows[0].t;
        }
        Ok(log)
    }
}
