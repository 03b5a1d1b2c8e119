//! The within-student estimator and everything built on it.
//!
//! Scores on each exam are standardized against that exam's control group,
//! each student contributes the difference between their mean treated and
//! mean control z-score, and inference runs on those differences.

pub mod diagnostics;
pub mod permutation;
pub mod tables;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Arm, ComplianceRecord, Design, EffectReport, ExamKind, ExamMeta, ScoreTable};
use crate::stats::{mean_sd, t_tail_two_sided};

pub use diagnostics::{
    carryover_test, heterogeneity, quarter_effect_test, CarryoverReport, HeterogeneityReport,
    PatternGroup,
};
pub use permutation::{permutation_test, PermutationResult};
pub use tables::{effect_table, score_distribution, EffectTableRow, ScoreRow};

/// Control-standardized scores.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedScores {
    pub z: BTreeMap<(String, String), f64>,
    pub control_mu: BTreeMap<String, f64>,
    pub control_sigma: BTreeMap<String, f64>,
    /// Metadata of every standardized exam.
    pub exams: BTreeMap<String, ExamMeta>,
}

impl StandardizedScores {
    /// Z-scores of one student as (exam id, z).
    pub fn student<'a>(&'a self, student_id: &'a str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.z
            .range((student_id.to_string(), String::new())..)
            .take_while(move |((s, _), _)| s == student_id)
            .map(|((_, e), &z)| (e.as_str(), z))
    }
}

/// Standardizes every exam that falls in a study unit, using the mean and
/// sample SD of the control-group scores only. Exams outside the study units
/// (such as the baseline quiz) and students absent from the design are
/// skipped.
pub fn standardize(scores: &ScoreTable, design: &Design) -> Result<StandardizedScores> {
    let units = design.study_units();
    let mut out = StandardizedScores {
        z: BTreeMap::new(),
        control_mu: BTreeMap::new(),
        control_sigma: BTreeMap::new(),
        exams: BTreeMap::new(),
    };
    let mut problems = Vec::new();
    for exam in scores.exams() {
        if !units.contains(&exam.unit) {
            continue;
        }
        let id = exam.exam_id.as_str();
        let mut cells = Vec::new();
        let mut control = Vec::new();
        for (sid, y) in scores.exam_scores(id) {
            if let Some(arm) = design.arm(sid, exam.unit) {
                cells.push((sid, y));
                if arm == Arm::Control {
                    control.push(y);
                }
            }
        }
        if cells.is_empty() {
            continue;
        }
        if control.len() < 2 {
            problems.push(format!("{id}: {} control scores, need 2", control.len()));
            continue;
        }
        let (mu, sd) = mean_sd(&control)?;
        if !(sd > 0.0) {
            problems.push(format!("{id}: control scores have zero variance"));
            continue;
        }
        for (sid, y) in cells {
            out.z
                .insert((sid.to_string(), id.to_string()), (y - mu) / sd);
        }
        out.control_mu.insert(id.to_string(), mu);
        out.control_sigma.insert(id.to_string(), sd);
        out.exams.insert(id.to_string(), exam.clone());
    }
    if !problems.is_empty() {
        return Err(Error::Standardization(problems));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentDiff {
    pub student_id: String,
    pub d: f64,
    pub n_treat: usize,
    pub n_control: usize,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub student_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiffSet {
    pub diffs: Vec<StudentDiff>,
    pub excluded: Vec<Exclusion>,
}

impl DiffSet {
    pub fn values(&self) -> Vec<f64> {
        self.diffs.iter().map(|d| d.d).collect()
    }

    /// Splits by term label, in label order.
    pub fn by_term(&self) -> BTreeMap<String, Vec<StudentDiff>> {
        let mut m: BTreeMap<String, Vec<StudentDiff>> = BTreeMap::new();
        for d in &self.diffs {
            m.entry(d.term.clone()).or_default().push(d.clone());
        }
        m
    }
}

/// Selects which exams enter the differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExamFilter {
    #[default]
    All,
    Kind(ExamKind),
}

impl ExamFilter {
    pub fn accepts(self, e: &ExamMeta) -> bool {
        match self {
            ExamFilter::All => true,
            ExamFilter::Kind(k) => e.kind == k,
        }
    }
}

/// Per-student treated-minus-control difference of mean z-scores.
///
/// Students with no treated or no control exam passing the filter are
/// listed in `excluded` rather than zero-filled.
pub fn student_diffs(z: &StandardizedScores, design: &Design, filter: ExamFilter) -> DiffSet {
    let mut out = DiffSet::default();
    for id in design.assignment.keys() {
        let (mut st, mut nt, mut sc, mut nc) = (0.0, 0usize, 0.0, 0usize);
        let mut term = None;
        for (eid, zv) in z.student(id) {
            let meta = &z.exams[eid];
            if !filter.accepts(meta) {
                continue;
            }
            term.get_or_insert_with(|| meta.term.clone());
            match design.arm(id, meta.unit) {
                Some(Arm::Treatment) => {
                    st += zv;
                    nt += 1;
                }
                Some(Arm::Control) => {
                    sc += zv;
                    nc += 1;
                }
                None => {}
            }
        }
        if nt == 0 || nc == 0 {
            let side = match (nt, nc) {
                (0, 0) => "no scored exams",
                (0, _) => "no treated exams",
                _ => "no control exams",
            };
            out.excluded.push(Exclusion {
                student_id: id.clone(),
                reason: side.into(),
            });
            continue;
        }
        out.diffs.push(StudentDiff {
            student_id: id.clone(),
            d: st / nt as f64 - sc / nc as f64,
            n_treat: nt,
            n_control: nc,
            term: term.unwrap_or_default(),
        });
    }
    out
}

/// Mean difference, its standard error and the t test against zero.
pub fn effect_estimate(diffs: &[StudentDiff]) -> Result<EffectReport> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            found: n,
        });
    }
    let xs: Vec<f64> = diffs.iter().map(|d| d.d).collect();
    let (m, sd) = mean_sd(&xs)?;
    if !(sd > 0.0) {
        return Err(Error::DegenerateVariance(
            "all student differences are equal".into(),
        ));
    }
    let se = sd / (n as f64).sqrt();
    let t = m / se;
    Ok(EffectReport {
        d_bar: m,
        se,
        n_used: n,
        t_stat: t,
        df: n - 1,
        p_asymptotic: t_tail_two_sided(t, (n - 1) as f64)?,
        p_permutation: None,
        n_permutations: 0,
    })
}

/// Complete pipeline: standardize, difference, estimate and optionally run
/// the permutation test (skipped when `n_perm` is 0).
pub fn estimate_effect(
    scores: &ScoreTable,
    design: &Design,
    filter: ExamFilter,
    n_perm: usize,
    seed: u64,
) -> Result<(EffectReport, DiffSet, Option<PermutationResult>)> {
    let z = standardize(scores, design)?;
    let diffs = student_diffs(&z, design, filter);
    let mut report = effect_estimate(&diffs.diffs)?;
    let perm = if n_perm > 0 {
        let p = permutation_test(&diffs.diffs, design, n_perm, seed)?;
        report.p_permutation = Some(p.p_value);
        report.n_permutations = n_perm;
        Some(p)
    } else {
        None
    };
    Ok((report, diffs, perm))
}

/// Concatenates per-term differences without reweighting.
pub fn pool_terms(diffs_by_term: &BTreeMap<String, Vec<StudentDiff>>) -> Result<Vec<StudentDiff>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for diffs in diffs_by_term.values() {
        for d in diffs {
            if !seen.insert(d.student_id.as_str()) {
                return Err(Error::DuplicateStudent(d.student_id.clone()));
            }
            out.push(d.clone());
        }
    }
    Ok(out)
}

/// Splits differences into (compliers, noncompliers) by `completed >= threshold`.
pub fn compliance_filter(
    diffs: &[StudentDiff],
    records: &[ComplianceRecord],
    threshold: u32,
) -> Result<(Vec<StudentDiff>, Vec<StudentDiff>)> {
    let by_id: BTreeMap<&str, &ComplianceRecord> =
        records.iter().map(|r| (r.student_id.as_str(), r)).collect();
    let mut yes = Vec::new();
    let mut no = Vec::new();
    for d in diffs {
        let r = by_id
            .get(d.student_id.as_str())
            .ok_or_else(|| Error::MissingRecord(d.student_id.clone()))?;
        if r.completed >= threshold {
            yes.push(d.clone());
        } else {
            no.push(d.clone());
        }
    }
    Ok((yes, no))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceRow {
    pub threshold: u32,
    pub compliance_rate: f64,
    pub n_compliers: usize,
    pub n_noncompliers: usize,
    /// None when fewer than two compliers or no spread.
    pub short_term: Option<EffectReport>,
    pub long_term: Option<EffectReport>,
    pub noncomplier_short_term: Option<EffectReport>,
}

/// Re-estimates the effect on compliers for each threshold, alongside the
/// noncomplier estimate.
pub fn compliance_sensitivity(
    short: &[StudentDiff],
    long: Option<&[StudentDiff]>,
    records: &[ComplianceRecord],
    thresholds: &[u32],
) -> Result<Vec<ComplianceRow>> {
    let mut rows = Vec::new();
    for &t in thresholds {
        let (yes, no) = compliance_filter(short, records, t)?;
        let long_est = match long {
            Some(l) => effect_estimate(&compliance_filter(l, records, t)?.0).ok(),
            None => None,
        };
        rows.push(ComplianceRow {
            threshold: t,
            compliance_rate: if short.is_empty() {
                0.0
            } else {
                yes.len() as f64 / short.len() as f64
            },
            n_compliers: yes.len(),
            n_noncompliers: no.len(),
            short_term: effect_estimate(&yes).ok(),
            long_term: long_est,
            noncomplier_short_term: effect_estimate(&no).ok(),
        });
    }
    Ok(rows)
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn two_point_standardization() {
        let d = design_for(4);
        let t = table(&d, |i, _, w| {
            if w {
                500.0
            } else {
                60.0 + 20.0 * (i / 2) as f64
            }
        });
        let z = standardize(&t, &d).unwrap();
        let h = 1.0 / 2f64.sqrt();
        for ((sid, eid), v) in &z.z {
            let unit = z.exams[eid].unit;
            if d.arm(sid, unit) == Some(Arm::Control) {
                assert!((v.abs() - h).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_z_per_student_cancels() {
        let d = design_for(20);
        let mut z = standardize(
            &table(&d, |i, u, _| 300.0 + (i * u as usize % 7) as f64),
            &d,
        )
        .unwrap();
        for (i, id) in d.assignment.keys().enumerate() {
            for e in quiz_meta() {
                z.z.insert((id.clone(), e.exam_id), 0.1 * i as f64 - 1.0);
            }
        }
        let diffs = student_diffs(&z, &d, ExamFilter::All);
        assert_eq!(diffs.diffs.len(), 20);
        assert!(diffs.diffs.iter().all(|x| x.d == 0.0));
    }

    #[test]
    fn noiseless_effect_is_recovered() {
        let d = design_for(20);
        let mut z = standardize(
            &table(&d, |i, u, _| 300.0 + (i * u as usize % 7) as f64),
            &d,
        )
        .unwrap();
        for (i, id) in d.assignment.keys().enumerate() {
            for e in quiz_meta() {
                let w = d.arm(id, e.unit).unwrap().is_treated();
                z.z.insert(
                    (id.clone(), e.exam_id),
                    0.1 * i as f64 + if w { 0.25 } else { 0.0 },
                );
            }
        }
        let diffs = student_diffs(&z, &d, ExamFilter::All);
        assert!(diffs.diffs.iter().all(|x| (x.d - 0.25).abs() < 1e-12));
    }

    #[test]
    fn balanced_algebra() {
        let d = design_for(24);
        let t = table(&d, |i, u, w| {
            400.0 + ((i * 37 + u as usize * 11) % 17) as f64 * 7.0 + if w { 3.0 } else { 0.0 }
        });
        let z = standardize(&t, &d).unwrap();
        for sd in student_diffs(&z, &d, ExamFilter::All).diffs {
            let p = d.pattern(&sd.student_id).unwrap();
            let alt: f64 = z
                .student(&sd.student_id)
                .map(|(e, v)| {
                    let j = (z.exams[e].unit - d.first_unit) as usize;
                    (2.0 * p.is_treated(j) as u8 as f64 - 1.0) * v
                })
                .sum::<f64>()
                / 2.0;
            assert!((sd.d - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_side_is_excluded() {
        let d = design_for(6);
        let full = table(&d, |i, u, _| 100.0 + (i * u as usize) as f64);
        let mut scores = full.scores().clone();
        let p = d.pattern("s000").unwrap().clone();
        for j in 0..4 {
            if p.is_treated(j) {
                scores.remove(&("s000".to_string(), format!("quiz{}", j + 2)));
            }
        }
        let t = ScoreTable::new(quiz_meta(), scores).unwrap();
        let z = standardize(&t, &d).unwrap();
        let ds = student_diffs(&z, &d, ExamFilter::All);
        assert_eq!(ds.diffs.len(), 5);
        assert_eq!(ds.excluded[0].student_id, "s000");
    }

    #[test]
    fn constant_diffs_are_degenerate() {
        let diffs: Vec<StudentDiff> = (0..5)
            .map(|i| StudentDiff {
                student_id: format!("s{i}"),
                d: 0.3,
                n_treat: 2,
                n_control: 2,
                term: "a".into(),
            })
            .collect();
        assert!(matches!(
            effect_estimate(&diffs),
            Err(Error::DegenerateVariance(_))
        ));
        assert!(effect_estimate(&diffs[..1]).is_err());
    }

    #[test]
    fn pooling_rejects_duplicates() {
        let mk = |id: &str, d: f64| StudentDiff {
            student_id: id.into(),
            d,
            n_treat: 2,
            n_control: 2,
            term: "t".into(),
        };
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), vec![mk("x", 1.0)]);
        m.insert("b".to_string(), vec![mk("x", 2.0)]);
        assert!(pool_terms(&m).is_err());
        m.insert("b".to_string(), vec![mk("y", 2.0)]);
        assert_eq!(pool_terms(&m).unwrap().len(), 2);
    }

    #[test]
    fn compliance_thresholds() {
        let diffs: Vec<StudentDiff> = (0..4)
            .map(|i| StudentDiff {
                student_id: format!("s{i}"),
                d: i as f64,
                n_treat: 2,
                n_control: 2,
                term: "t".into(),
            })
            .collect();
        let recs: Vec<ComplianceRecord> = (0..4)
            .map(|i| ComplianceRecord {
                student_id: format!("s{i}"),
                completed: 9 + i,
                assigned: 12,
            })
            .collect();
        assert_eq!(compliance_filter(&diffs, &recs, 0).unwrap().0.len(), 4);
        assert_eq!(compliance_filter(&diffs, &recs, 11).unwrap().0.len(), 2);
        assert!(compliance_filter(&diffs, &recs[..3], 0).is_err());
        let rows = compliance_sensitivity(&diffs, None, &recs, &[10, 12]).unwrap();
        assert_eq!(rows[1].n_compliers, 1);
        assert!(rows[1].short_term.is_none());
    }
}
