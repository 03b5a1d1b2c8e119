//! Delimited-text and structured-text formats.
//!
//! Tables are comma-separated UTF-8 with a header row. Readers are strict:
//! missing required columns are fatal, unknown columns are logged and
//! ignored, and a malformed row reports its line number. Designs are stored
//! as JSON and simulation scenarios as TOML.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    ClassYear, ComplianceRecord, Design, ExamKind, ExamMeta, Roster, ScoreTable, Student,
};
use crate::simulator::SimScenario;

pub const ROSTER_COLUMNS: [&str; 8] = [
    "student_id",
    "gender",
    "urm",
    "ap_stats",
    "math_adv",
    "class_year",
    "baseline",
    "term",
];
pub const SCORE_COLUMNS: [&str; 3] = ["student_id", "exam_id", "score"];
pub const EXAM_COLUMNS: [&str; 5] = ["exam_id", "unit", "term", "kind", "points"];
pub const COMPLIANCE_COLUMNS: [&str; 3] = ["student_id", "completed", "assigned"];

/// A parsed table: rows keyed by required column name, with line numbers.
struct Table {
    source: String,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn parse<T: std::str::FromStr>(&self, line: u64, col: &str, raw: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        raw.trim().parse::<T>().map_err(|e| Error::Parse {
            path: self.source.clone(),
            line,
            message: format!("column {col}: cannot parse {raw:?}: {e}"),
        })
    }

    fn flag(&self, line: u64, col: &str, raw: &str) -> Result<u8> {
        let v: u8 = self.parse(line, col, raw)?;
        if v > 1 {
            return Err(Error::Parse {
                path: self.source.clone(),
                line,
                message: format!("column {col}: expected 0 or 1, got {v}"),
            });
        }
        Ok(v)
    }
}

fn read_table<R: Read>(reader: R, source: &str, required: &[&str]) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let csv_err = |e: csv::Error| Error::Parse {
        path: source.to_string(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let header = rdr.headers().map_err(csv_err)?.clone();
    let mut index = Vec::with_capacity(required.len());
    let mut missing = Vec::new();
    for col in required {
        match header.iter().position(|h| h == *col) {
            Some(i) => index.push(i),
            None => missing.push(*col),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "{source}: missing required column(s) {}",
            missing.join(", ")
        )));
    }
    for h in header.iter().filter(|h| !required.contains(h)) {
        log::warn!("{source}: ignoring unknown column {h:?}");
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, index.iter().map(|&i| rec[i].to_string()).collect()));
    }
    Ok(Table {
        source: source.to_string(),
        rows,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn csv_write_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(format!("csv write failed: {other:?}")),
    }
}

pub fn parse_roster<R: Read>(reader: R, source: &str) -> Result<Roster> {
    let t = read_table(reader, source, &ROSTER_COLUMNS)?;
    let mut students = Vec::with_capacity(t.rows.len());
    for (line, r) in &t.rows {
        let line = *line;
        students.push(Student {
            id: r[0].clone(),
            gender: t.flag(line, "gender", &r[1])?,
            urm: t.flag(line, "urm", &r[2])?,
            ap_stats: t.flag(line, "ap_stats", &r[3])?,
            math_adv: t.flag(line, "math_adv", &r[4])?,
            class_year: t.parse::<ClassYear>(line, "class_year", &r[5])?,
            baseline: t.parse(line, "baseline", &r[6])?,
            term: r[7].clone(),
        });
    }
    let roster = Roster::new(students);
    if let Some(v) = roster.validate().first() {
        return Err(Error::Schema(format!("{source}: {v}")));
    }
    Ok(roster)
}

pub fn read_roster(path: &Path) -> Result<Roster> {
    parse_roster(open(path)?, &path.display().to_string())
}

pub fn write_roster_to<W: Write>(roster: &Roster, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(ROSTER_COLUMNS).map_err(csv_write_err)?;
    for s in &roster.students {
        wr.write_record([
            s.id.clone(),
            s.gender.to_string(),
            s.urm.to_string(),
            s.ap_stats.to_string(),
            s.math_adv.to_string(),
            s.class_year.to_string(),
            s.baseline.to_string(),
            s.term.clone(),
        ])
        .map_err(csv_write_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_roster(roster: &Roster, path: &Path) -> Result<()> {
    write_roster_to(roster, create(path)?)
}

pub fn parse_exams<R: Read>(reader: R, source: &str) -> Result<Vec<ExamMeta>> {
    let t = read_table(reader, source, &EXAM_COLUMNS)?;
    t.rows
        .iter()
        .map(|(line, r)| {
            Ok(ExamMeta {
                exam_id: r[0].clone(),
                unit: t.parse(*line, "unit", &r[1])?,
                term: r[2].clone(),
                kind: t.parse::<ExamKind>(*line, "kind", &r[3])?,
                points: t.parse(*line, "points", &r[4])?,
            })
        })
        .collect()
}

pub fn read_exams(path: &Path) -> Result<Vec<ExamMeta>> {
    parse_exams(open(path)?, &path.display().to_string())
}

/// Scores as (student_id, exam_id, score) triples against exam metadata.
/// Range errors name the offending line.
pub fn parse_scores<R: Read>(reader: R, source: &str, exams: Vec<ExamMeta>) -> Result<ScoreTable> {
    let t = read_table(reader, source, &SCORE_COLUMNS)?;
    let points: BTreeMap<String, f64> = exams
        .iter()
        .map(|e| (e.exam_id.clone(), e.points))
        .collect();
    let mut scores = BTreeMap::new();
    for (line, r) in &t.rows {
        let fail = |message: String| Error::Parse {
            path: source.to_string(),
            line: *line,
            message,
        };
        let y: f64 = t.parse(*line, "score", &r[2])?;
        let max = points
            .get(&r[1])
            .ok_or_else(|| fail(format!("unknown exam {:?}", r[1])))?;
        if !(0.0..=*max).contains(&y) {
            return Err(fail(format!(
                "score {y} outside [0, {max}] for exam {}",
                r[1]
            )));
        }
        if scores.insert((r[0].clone(), r[1].clone()), y).is_some() {
            return Err(fail(format!("duplicate score for ({}, {})", r[0], r[1])));
        }
    }
    ScoreTable::new(exams, scores)
}

pub fn read_scores(path: &Path, meta_path: &Path) -> Result<ScoreTable> {
    let exams = read_exams(meta_path)?;
    parse_scores(open(path)?, &path.display().to_string(), exams)
}

pub fn write_exams_to<W: Write>(exams: &[ExamMeta], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(EXAM_COLUMNS).map_err(csv_write_err)?;
    for e in exams {
        wr.write_record([
            e.exam_id.clone(),
            e.unit.to_string(),
            e.term.clone(),
            e.kind.as_str().to_string(),
            e.points.to_string(),
        ])
        .map_err(csv_write_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_scores_to<W: Write>(table: &ScoreTable, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SCORE_COLUMNS).map_err(csv_write_err)?;
    for ((s, e), y) in table.scores() {
        wr.write_record([s.as_str(), e.as_str(), &y.to_string()])
            .map_err(csv_write_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_scores(table: &ScoreTable, path: &Path, meta_path: &Path) -> Result<()> {
    write_scores_to(table, create(path)?)?;
    write_exams_to(table.exams(), create(meta_path)?)
}

pub fn parse_compliance<R: Read>(reader: R, source: &str) -> Result<Vec<ComplianceRecord>> {
    let t = read_table(reader, source, &COMPLIANCE_COLUMNS)?;
    t.rows
        .iter()
        .map(|(line, r)| {
            let rec = ComplianceRecord {
                student_id: r[0].clone(),
                completed: t.parse(*line, "completed", &r[1])?,
                assigned: t.parse(*line, "assigned", &r[2])?,
            };
            rec.validate().map_err(|e| Error::Parse {
                path: source.to_string(),
                line: *line,
                message: e.to_string(),
            })?;
            Ok(rec)
        })
        .collect()
}

pub fn read_compliance(path: &Path) -> Result<Vec<ComplianceRecord>> {
    parse_compliance(open(path)?, &path.display().to_string())
}

pub fn write_compliance(records: &[ComplianceRecord], path: &Path) -> Result<()> {
    write_rows(records, path)
}

pub fn design_to_string(design: &Design) -> Result<String> {
    let mut s = serde_json::to_string_pretty(design).map_err(|e| Error::Schema(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn design_from_str(s: &str, source: &str) -> Result<Design> {
    serde_json::from_str(s).map_err(|e| Error::Parse {
        path: source.to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

pub fn write_design(design: &Design, path: &Path) -> Result<()> {
    create(path)?.write_all(design_to_string(design)?.as_bytes())?;
    Ok(())
}

pub fn read_design(path: &Path) -> Result<Design> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s)?;
    design_from_str(&s, &path.display().to_string())
}

pub fn scenario_from_str(s: &str, source: &str) -> Result<SimScenario> {
    let sc: SimScenario = toml::from_str(s).map_err(|e| Error::Parse {
        path: source.to_string(),
        line: e
            .span()
            .map_or(0, |sp| s[..sp.start].matches('\n').count() as u64 + 1),
        message: e.message().to_string(),
    })?;
    sc.validate()?;
    Ok(sc)
}

pub fn read_scenario(path: &Path) -> Result<SimScenario> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s)?;
    scenario_from_str(&s, &path.display().to_string())
}

pub fn write_scenario(sc: &SimScenario, path: &Path) -> Result<()> {
    let s = toml::to_string(sc).map_err(|e| Error::Schema(e.to_string()))?;
    create(path)?.write_all(s.as_bytes())?;
    Ok(())
}

/// Writes any flat serializable rows as CSV with a header.
pub fn write_rows_to<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_write_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    write_rows_to(rows, create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROSTER: &str = "student_id,gender,urm,ap_stats,math_adv,class_year,baseline,term\n\
        a,1,0,0,1,junior,71.5,autumn\n\
        b,0,1,0,0,2,64,autumn\n\
        c,0,0,1,0,senior,80,winter\n";

    #[test]
    fn three_row_roster() {
        let r = parse_roster(ROSTER.as_bytes(), "r.csv").unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.students[1].class_year, ClassYear::Junior);
    }

    #[test]
    fn missing_column_is_fatal() {
        let s = ROSTER.replacen("gender,", "", 1);
        assert!(matches!(
            parse_roster(s.as_bytes(), "r.csv"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn bad_row_reports_line() {
        let s = ROSTER.replace("b,0,1", "b,7,1");
        match parse_roster(s.as_bytes(), "r.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn roster_round_trip() {
        let r = parse_roster(ROSTER.as_bytes(), "r.csv").unwrap();
        let mut buf = Vec::new();
        write_roster_to(&r, &mut buf).unwrap();
        assert_eq!(parse_roster(buf.as_slice(), "mem").unwrap(), r);
    }

    fn exams() -> Vec<ExamMeta> {
        parse_exams(
            "exam_id,unit,term,kind,points\nq2,2,autumn,quiz,100\n".as_bytes(),
            "e.csv",
        )
        .unwrap()
    }

    #[test]
    fn empty_scores_give_empty_table() {
        let t = parse_scores("student_id,exam_id,score\n".as_bytes(), "s.csv", exams()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn out_of_range_score_rejected() {
        let s = "student_id,exam_id,score\na,q2,90\nb,q2,110\n";
        match parse_scores(s.as_bytes(), "s.csv", exams()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
