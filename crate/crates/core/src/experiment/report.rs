//! Per-run CSV rows and the aggregates recomputed from them.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::Error;
use crate::search::SearchStatus;

use super::eval::{arithmetic_mean, geometric_mean};

pub const RUN_HEADER: [&str; 9] = [
    "task",
    "sample_seed",
    "net_seed",
    "heuristic",
    "initial",
    "status",
    "plan_cost",
    "expanded",
    "generated",
];

pub const CELL_HEADER: [&str; 12] = [
    "task",
    "sample_seed",
    "net_seed",
    "heuristic",
    "samples",
    "sample_error",
    "fss_error",
    "epochs",
    "best_epoch",
    "best_val_loss",
    "born_dead_retries",
    "error",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub task: String,
    pub sample_seed: u64,
    pub net_seed: u64,
    pub heuristic: String,
    pub initial: usize,
    pub status: SearchStatus,
    pub plan_cost: Option<u64>,
    pub expanded: u64,
    pub generated: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellRow {
    pub task: String,
    pub sample_seed: u64,
    pub net_seed: u64,
    pub heuristic: String,
    pub samples: usize,
    pub sample_error: Option<f64>,
    pub fss_error: Option<f64>,
    pub epochs: Option<usize>,
    pub best_epoch: Option<usize>,
    pub best_val_loss: Option<f64>,
    pub born_dead_retries: usize,
    pub error: String,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn float(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T, Error> {
    let raw = rec.get(i).ok_or_else(|| Error::Format(format!("missing column `{what}`")))?;
    raw.parse()
        .map_err(|_| Error::Format(format!("bad `{what}` value `{raw}`")))
}

fn opt_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<Option<T>, Error> {
    match rec.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(rec, i, what).map(Some),
    }
}

impl RunRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.task.clone(),
            self.sample_seed.to_string(),
            self.net_seed.to_string(),
            self.heuristic.clone(),
            self.initial.to_string(),
            self.status.to_string(),
            opt(self.plan_cost),
            self.expanded.to_string(),
            self.generated.to_string(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self, Error> {
        Ok(RunRow {
            task: field(rec, 0, "task")?,
            sample_seed: field(rec, 1, "sample_seed")?,
            net_seed: field(rec, 2, "net_seed")?,
            heuristic: field(rec, 3, "heuristic")?,
            initial: field(rec, 4, "initial")?,
            status: field(rec, 5, "status")?,
            plan_cost: opt_field(rec, 6, "plan_cost")?,
            expanded: field(rec, 7, "expanded")?,
            generated: field(rec, 8, "generated")?,
        })
    }
}

impl CellRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.task.clone(),
            self.sample_seed.to_string(),
            self.net_seed.to_string(),
            self.heuristic.clone(),
            self.samples.to_string(),
            float(self.sample_error),
            float(self.fss_error),
            opt(self.epochs),
            opt(self.best_epoch),
            float(self.best_val_loss),
            self.born_dead_retries.to_string(),
            self.error.clone(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self, Error> {
        Ok(CellRow {
            task: field(rec, 0, "task")?,
            sample_seed: field(rec, 1, "sample_seed")?,
            net_seed: field(rec, 2, "net_seed")?,
            heuristic: field(rec, 3, "heuristic")?,
            samples: field(rec, 4, "samples")?,
            sample_error: opt_field(rec, 5, "sample_error")?,
            fss_error: opt_field(rec, 6, "fss_error")?,
            epochs: opt_field(rec, 7, "epochs")?,
            best_epoch: opt_field(rec, 8, "best_epoch")?,
            best_val_loss: opt_field(rec, 9, "best_val_loss")?,
            born_dead_retries: field(rec, 10, "born_dead_retries")?,
            error: rec.get(11).unwrap_or("").to_string(),
        })
    }
}

pub fn write_rows<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs<R: Read>(input: R) -> Result<Vec<RunRow>, Error> {
    let mut r = csv::Reader::from_reader(input);
    r.records().map(|rec| RunRow::from_record(&rec?)).collect()
}

pub fn read_cells<R: Read>(input: R) -> Result<Vec<CellRow>, Error> {
    let mut r = csv::Reader::from_reader(input);
    r.records().map(|rec| CellRow::from_record(&rec?)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub task: String,
    pub heuristic: String,
    pub runs: usize,
    pub solved: usize,
    pub coverage: f64,
    /// Over solved runs (restricted to commonly solved starts when requested).
    pub expansions_geomean: Option<f64>,
    pub plan_cost_mean: Option<f64>,
    pub sample_error: Option<f64>,
    pub fss_error: Option<f64>,
    pub failed_cells: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<Summary>,
    /// Per heuristic: unweighted mean coverage, geometric means of the
    /// per-task expansion and error figures.
    pub means: Vec<Summary>,
    pub common_solved: bool,
}

pub const REPORT_HEADER: [&str; 10] = [
    "task",
    "heuristic",
    "runs",
    "solved",
    "coverage",
    "expansions_geomean",
    "plan_cost_mean",
    "sample_error",
    "fss_error",
    "failed_cells",
];

fn ordered_keys<'a, T>(items: &'a [T], key: impl Fn(&'a T) -> (&'a str, &'a str)) -> Vec<(&'a str, &'a str)> {
    let mut seen = HashSet::new();
    items
        .iter()
        .map(key)
        .filter(|k| seen.insert(*k))
        .collect()
}

impl Report {
    pub fn from_rows(runs: &[RunRow], cells: &[CellRow], common_solved: bool) -> Report {
        // starts solved by every run that attempted them
        let mut all_solved: HashMap<(&str, usize), bool> = HashMap::new();
        for r in runs {
            *all_solved.entry((&r.task, r.initial)).or_insert(true) &= r.status == SearchStatus::Solved;
        }
        let mut keys = ordered_keys(cells, |c| (c.task.as_str(), c.heuristic.as_str()));
        for k in ordered_keys(runs, |r| (r.task.as_str(), r.heuristic.as_str())) {
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let rows: Vec<Summary> = keys
            .iter()
            .map(|&(task, heuristic)| {
                let mine: Vec<&RunRow> = runs.iter().filter(|r| r.task == task && r.heuristic == heuristic).collect();
                let solved: Vec<&&RunRow> = mine.iter().filter(|r| r.status == SearchStatus::Solved).collect();
                let counted: Vec<&&&RunRow> = solved
                    .iter()
                    .filter(|r| !common_solved || all_solved[&(r.task.as_str(), r.initial)])
                    .collect();
                let my_cells: Vec<&CellRow> = cells.iter().filter(|c| c.task == task && c.heuristic == heuristic).collect();
                let errors = |f: fn(&CellRow) -> Option<f64>| {
                    arithmetic_mean(&my_cells.iter().filter_map(|c| f(c)).collect::<Vec<_>>())
                };
                Summary {
                    task: task.to_string(),
                    heuristic: heuristic.to_string(),
                    runs: mine.len(),
                    solved: solved.len(),
                    coverage: if mine.is_empty() { 0.0 } else { solved.len() as f64 / mine.len() as f64 },
                    expansions_geomean: geometric_mean(&counted.iter().map(|r| r.expanded as f64).collect::<Vec<_>>()),
                    plan_cost_mean: arithmetic_mean(&counted.iter().filter_map(|r| r.plan_cost).map(|c| c as f64).collect::<Vec<_>>()),
                    sample_error: errors(|c| c.sample_error),
                    fss_error: errors(|c| c.fss_error),
                    failed_cells: my_cells.iter().filter(|c| !c.error.is_empty()).count(),
                }
            })
            .collect();

        let mut heuristics: Vec<&str> = Vec::new();
        for r in &rows {
            if !heuristics.contains(&r.heuristic.as_str()) {
                heuristics.push(&r.heuristic);
            }
        }
        let means = heuristics
            .iter()
            .map(|&h| {
                let mine: Vec<&Summary> = rows.iter().filter(|r| r.heuristic == h).collect();
                let collect = |f: fn(&Summary) -> Option<f64>| mine.iter().filter_map(|r| f(r)).collect::<Vec<_>>();
                Summary {
                    task: "mean".into(),
                    heuristic: h.to_string(),
                    runs: mine.iter().map(|r| r.runs).sum(),
                    solved: mine.iter().map(|r| r.solved).sum(),
                    coverage: arithmetic_mean(&mine.iter().map(|r| r.coverage).collect::<Vec<_>>()).unwrap_or(0.0),
                    expansions_geomean: geometric_mean(&collect(|r| r.expansions_geomean)),
                    plan_cost_mean: arithmetic_mean(&collect(|r| r.plan_cost_mean)),
                    sample_error: geometric_mean(&collect(|r| r.sample_error)),
                    fss_error: geometric_mean(&collect(|r| r.fss_error)),
                    failed_cells: mine.iter().map(|r| r.failed_cells).sum(),
                }
            })
            .collect();
        Report {
            rows,
            means,
            common_solved,
        }
    }

    fn records(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.rows.iter().chain(&self.means).map(|s| {
            vec![
                s.task.clone(),
                s.heuristic.clone(),
                s.runs.to_string(),
                s.solved.to_string(),
                format!("{:.4}", s.coverage),
                float(s.expansions_geomean),
                float(s.plan_cost_mean),
                float(s.sample_error),
                float(s.fss_error),
                s.failed_cells.to_string(),
            ]
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), Error> {
        write_rows(out, &REPORT_HEADER, self.records())
    }

    /// Aligned text table preceded by `provenance` lines.
    pub fn to_table(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for p in provenance {
            writeln!(out, "# {p}").expect("string write");
        }
        writeln!(out, "# expanded counts include the goal state; mean rows weight tasks equally").expect("string write");
        if self.common_solved {
            writeln!(out, "# expansions restricted to starts solved by every run").expect("string write");
        }
        let table: Vec<Vec<String>> = std::iter::once(REPORT_HEADER.iter().map(|s| s.to_string()).collect())
            .chain(self.records().map(|r| r.into_iter().map(|c| if c.is_empty() { "-".into() } else { c }).collect()))
            .collect();
        let widths: Vec<usize> = (0..REPORT_HEADER.len())
            .map(|i| table.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        for row in &table {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).expect("string write");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(task: &str, initial: usize, status: SearchStatus, expanded: u64) -> RunRow {
        RunRow {
            task: task.into(),
            sample_seed: 1,
            net_seed: 1,
            heuristic: "blind".into(),
            initial,
            status,
            plan_cost: (status == SearchStatus::Solved).then_some(3),
            expanded,
            generated: expanded + 1,
        }
    }

    #[test]
    fn aggregates() {
        let runs = vec![
            run("a", 0, SearchStatus::Solved, 1),
            run("a", 1, SearchStatus::Solved, 100),
            run("a", 2, SearchStatus::Timeout, 5000),
            run("b", 0, SearchStatus::Solved, 4),
        ];
        let report = Report::from_rows(&runs, &[], false);
        assert!((report.rows[0].expansions_geomean.unwrap() - 10.0).abs() < 1e-12);
        assert!((report.rows[0].coverage - 2.0 / 3.0).abs() < 1e-12);
        let mean = &report.means[0];
        assert!((mean.coverage - (2.0 / 3.0 + 1.0) / 2.0).abs() < 1e-12);
        assert!((mean.expansions_geomean.unwrap() - 40f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn common_solved_filter() {
        let mut other = run("a", 1, SearchStatus::Timeout, 7);
        other.net_seed = 2;
        let runs = vec![run("a", 0, SearchStatus::Solved, 2), run("a", 1, SearchStatus::Solved, 50), other];
        let report = Report::from_rows(&runs, &[], true);
        assert_eq!(report.rows[0].expansions_geomean, Some(2.0));
    }

    #[test]
    fn csv_round_trip() {
        let runs = vec![run("a", 0, SearchStatus::Solved, 2), run("a,b", 1, SearchStatus::Memory, 9)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &RUN_HEADER, runs.iter().map(RunRow::record)).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains("\"a,b\""));
        assert_eq!(read_runs(&buf[..]).unwrap(), runs);
        let cell = CellRow {
            task: "a".into(),
            heuristic: "learned".into(),
            sample_error: Some(1.5),
            error: "boom".into(),
            ..CellRow::default()
        };
        let mut buf = Vec::new();
        write_rows(&mut buf, &CELL_HEADER, [cell.record()]).unwrap();
        assert_eq!(read_cells(&buf[..]).unwrap(), vec![cell]);
    }
}
