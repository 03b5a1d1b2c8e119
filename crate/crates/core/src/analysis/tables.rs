//! Summary tables and per-observation plotting data.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{effect_estimate, StandardizedScores, StudentDiff};
use crate::model::{Covariate, Design, Roster, ScoreTable, Student};
use crate::stats::standardized_difference;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectTableRow {
    pub label: String,
    /// "overall" or a term label.
    pub column: String,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub n: usize,
}

/// Baseline gaps reported next to the treatment effect: group with the
/// indicator set minus group without.
const CORRELATES: [(&str, Covariate); 5] = [
    ("gender_gap", Covariate::Gender),
    ("race_gap", Covariate::Urm),
    ("ap_stats_gap", Covariate::ApStats),
    ("math_gap", Covariate::MathAdv),
    ("upperclass_gap", Covariate::Upperclass),
];

/// Treatment effects and standardized baseline gaps, overall and per term.
/// Rows that cannot be computed carry `None`.
pub fn effect_table(
    short: &[StudentDiff],
    long: Option<&[StudentDiff]>,
    roster: &Roster,
) -> Vec<EffectTableRow> {
    let mut terms: Vec<String> = roster.students.iter().map(|s| s.term.clone()).collect();
    terms.sort();
    terms.dedup();
    let mut columns = vec![None];
    if terms.len() > 1 {
        columns.extend(terms.iter().map(Some));
    }
    let term_of: BTreeMap<&str, &str> = roster
        .students
        .iter()
        .map(|s| (s.id.as_str(), s.term.as_str()))
        .collect();
    let mut rows = Vec::new();
    for col in &columns {
        let name = col.map_or("overall".to_string(), |t| t.clone());
        let keep = |d: &&StudentDiff| {
            col.is_none_or(|t| term_of.get(d.student_id.as_str()) == Some(&t.as_str()))
        };
        let mut effect_row = |label: &str, diffs: &[StudentDiff]| {
            let sel: Vec<StudentDiff> = diffs.iter().filter(keep).cloned().collect();
            let est = effect_estimate(&sel).ok();
            rows.push(EffectTableRow {
                label: label.into(),
                column: name.clone(),
                estimate: est.as_ref().map(|e| e.d_bar),
                se: est.as_ref().map(|e| e.se),
                n: sel.len(),
            });
        };
        effect_row("peer_assessment_short_term", short);
        if let Some(l) = long {
            effect_row("peer_assessment_long_term", l);
        }
        let members: Vec<&Student> = roster
            .students
            .iter()
            .filter(|s| col.is_none_or(|t| s.term == *t))
            .collect();
        for (label, cov) in CORRELATES {
            let (ones, zeros): (Vec<&Student>, Vec<&Student>) =
                members.iter().partition(|s| s.covariate(cov) == 1.0);
            let g1: Vec<f64> = ones.iter().map(|s| s.baseline).collect();
            let g0: Vec<f64> = zeros.iter().map(|s| s.baseline).collect();
            let sd = standardized_difference(&g1, &g0).ok();
            rows.push(EffectTableRow {
                label: label.into(),
                column: name.clone(),
                estimate: sd.map(|x| x.d),
                se: sd.map(|x| x.se),
                n: members.len(),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub exam_id: String,
    pub student_id: String,
    /// "T" or "C".
    pub arm: String,
    pub score: f64,
    pub z: f64,
}

/// One row per standardized score, for score-distribution plots.
pub fn score_distribution(
    scores: &ScoreTable,
    design: &Design,
    z: &StandardizedScores,
) -> Vec<ScoreRow> {
    let mut out = Vec::new();
    for ((sid, eid), &zv) in &z.z {
        let (Some(y), Some(meta)) = (scores.score(sid, eid), z.exams.get(eid)) else {
            continue;
        };
        let Some(arm) = design.arm(sid, meta.unit) else {
            continue;
        };
        out.push(ScoreRow {
            exam_id: eid.clone(),
            student_id: sid.clone(),
            arm: arm.to_string(),
            score: y,
            z: zv,
        });
    }
    out.sort_by(|a, b| {
        a.exam_id
            .cmp(&b.exam_id)
            .then(a.student_id.cmp(&b.student_id))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassYear;

    #[test]
    fn identical_subgroups_have_zero_gap() {
        let students: Vec<Student> = (0..8)
            .map(|i| Student {
                id: format!("s{i}"),
                gender: (i % 2) as u8,
                urm: 0,
                ap_stats: 0,
                math_adv: 0,
                class_year: ClassYear::Junior,
                baseline: (60 + 10 * (i / 2)) as f64,
                term: "autumn".into(),
            })
            .collect();
        let rows = effect_table(&[], None, &Roster::new(students));
        let g = rows.iter().find(|r| r.label == "gender_gap").unwrap();
        assert_eq!(g.estimate, Some(0.0));
        let r = rows.iter().find(|r| r.label == "race_gap").unwrap();
        assert_eq!(r.estimate, None);
        let p = rows
            .iter()
            .find(|r| r.label == "peer_assessment_short_term")
            .unwrap();
        assert_eq!(p.estimate, None);
    }
}
