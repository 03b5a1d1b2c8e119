//! Domain types shared by every stage of the pipeline.
//!
//! Scores are kept in raw exam points everywhere in this module; all
//! standardization happens in [`crate::analysis`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassYear {
    Freshman,
    Sophomore,
    Junior,
    Senior,
    Graduate,
}

impl ClassYear {
    pub const ALL: [ClassYear; 5] = [
        ClassYear::Freshman,
        ClassYear::Sophomore,
        ClassYear::Junior,
        ClassYear::Senior,
        ClassYear::Graduate,
    ];

    /// 0 for freshman through 4 for graduate.
    pub fn ordinal(self) -> u8 {
        self as u8
    }

    /// Juniors, seniors and graduate students.
    pub fn is_upperclass(self) -> bool {
        self >= ClassYear::Junior
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassYear::Freshman => "freshman",
            ClassYear::Sophomore => "sophomore",
            ClassYear::Junior => "junior",
            ClassYear::Senior => "senior",
            ClassYear::Graduate => "graduate",
        }
    }
}

impl fmt::Display for ClassYear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassYear {
    type Err = Error;

    /// Accepts the level name (any case) or its ordinal 0..4.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if let Ok(k) = t.parse::<usize>() {
            return ClassYear::ALL.get(k).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("class year ordinal {k} out of range"))
            });
        }
        ClassYear::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == t)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown class year {s:?}")))
    }
}

/// Covariates available for blocking, distances, balance checks and
/// heterogeneity models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    Gender,
    Urm,
    ApStats,
    MathAdv,
    /// Ordinal 0..4.
    ClassYear,
    /// Binary junior-or-above indicator.
    Upperclass,
    Baseline,
}

impl Covariate {
    pub fn name(self) -> &'static str {
        match self {
            Covariate::Gender => "gender",
            Covariate::Urm => "urm",
            Covariate::ApStats => "ap_stats",
            Covariate::MathAdv => "math_adv",
            Covariate::ClassYear => "class_year",
            Covariate::Upperclass => "upperclass",
            Covariate::Baseline => "baseline",
        }
    }

    pub fn is_binary(self) -> bool {
        !matches!(self, Covariate::ClassYear | Covariate::Baseline)
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Covariate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Covariate::*;
        [
            Gender, Urm, ApStats, MathAdv, ClassYear, Upperclass, Baseline,
        ]
        .into_iter()
        .find(|c| c.name() == s.trim())
        .ok_or_else(|| Error::InvalidParameter(format!("unknown covariate {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Student {
    pub id: String,
    /// 1 = male.
    pub gender: u8,
    /// 1 = underrepresented minority.
    pub urm: u8,
    /// 1 = passed a prior statistics course.
    pub ap_stats: u8,
    /// 1 = took a math course beyond calculus.
    pub math_adv: u8,
    pub class_year: ClassYear,
    /// Baseline exam score in points.
    pub baseline: f64,
    pub term: String,
}

impl Student {
    pub fn covariate(&self, c: Covariate) -> f64 {
        match c {
            Covariate::Gender => self.gender as f64,
            Covariate::Urm => self.urm as f64,
            Covariate::ApStats => self.ap_stats as f64,
            Covariate::MathAdv => self.math_adv as f64,
            Covariate::ClassYear => self.class_year.ordinal() as f64,
            Covariate::Upperclass => self.class_year.is_upperclass() as u8 as f64,
            Covariate::Baseline => self.baseline,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub students: Vec<Student>,
}

/// A single broken roster invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub student_id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.student_id, self.message)
    }
}

impl Roster {
    pub fn new(students: Vec<Student>) -> Self {
        Roster { students }
    }

    pub fn len(&self) -> usize {
        self.students.len()
    }

    pub fn is_empty(&self) -> bool {
        self.students.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Student> {
        self.students.iter().find(|s| s.id == id)
    }

    pub fn by_id(&self) -> BTreeMap<&str, &Student> {
        self.students.iter().map(|s| (s.id.as_str(), s)).collect()
    }

    /// Checks every student invariant. Violations are returned as data.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for s in &self.students {
            let mut bad = |message: String| {
                out.push(Violation {
                    student_id: s.id.clone(),
                    message,
                })
            };
            if s.id.is_empty() {
                bad("empty id".into());
            } else if !seen.insert(s.id.as_str()) && reported.insert(s.id.as_str()) {
                bad(format!("duplicate id {}", s.id));
            }
            for (name, v) in [
                ("gender", s.gender),
                ("urm", s.urm),
                ("ap_stats", s.ap_stats),
                ("math_adv", s.math_adv),
            ] {
                if v > 1 {
                    bad(format!("{name} must be 0 or 1, got {v}"));
                }
            }
            if !s.baseline.is_finite() {
                bad("baseline is not finite".into());
            }
        }
        out
    }
}

/// Free function form of [`Roster::validate`].
pub fn validate_roster(roster: &Roster) -> Vec<Violation> {
    roster.validate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    #[serde(rename = "T")]
    Treatment,
    #[serde(rename = "C")]
    Control,
}

impl Arm {
    pub fn flip(self) -> Arm {
        match self {
            Arm::Treatment => Arm::Control,
            Arm::Control => Arm::Treatment,
        }
    }

    pub fn is_treated(self) -> bool {
        self == Arm::Treatment
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::Treatment => "T",
            Arm::Control => "C",
        })
    }
}

/// Treatment or control for each study unit, in unit order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArmPattern(Vec<bool>);

impl ArmPattern {
    pub fn from_arms(arms: &[Arm]) -> Self {
        ArmPattern(arms.iter().map(|a| a.is_treated()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn arm(&self, j: usize) -> Arm {
        if self.0[j] {
            Arm::Treatment
        } else {
            Arm::Control
        }
    }

    pub fn is_treated(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn treated_count(&self) -> usize {
        self.0.iter().filter(|&&t| t).count()
    }

    pub fn is_balanced(&self) -> bool {
        !self.0.is_empty()
            && self.0.len().is_multiple_of(2)
            && 2 * self.treated_count() == self.0.len()
    }

    pub fn complement(&self) -> ArmPattern {
        ArmPattern(self.0.iter().map(|t| !t).collect())
    }

    /// The complementary pair {p, !p}, identified by whichever member sorts
    /// first in its string form.
    pub fn family(&self) -> ArmPattern {
        let c = self.complement();
        if c.to_string() < self.to_string() {
            c
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for ArmPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &t in &self.0 {
            f.write_str(if t { "T" } else { "C" })?;
        }
        Ok(())
    }
}

impl FromStr for ArmPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                'T' | 't' => Ok(true),
                'C' | 'c' => Ok(false),
                _ => Err(Error::InvalidParameter(format!("bad arm pattern {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ArmPattern)
    }
}

impl Serialize for ArmPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ArmPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which arm patterns a design may hand out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PatternMode {
    /// Four units; patterns TCTC, CTCT, TCCT, CTTC.
    #[default]
    #[serde(rename = "paper")]
    FourUnit,
    /// Any balanced sequence over an even number of units.
    General { units: usize },
}

impl PatternMode {
    pub fn units(self) -> usize {
        match self {
            PatternMode::FourUnit => 4,
            PatternMode::General { units } => units,
        }
    }

    pub fn validate(self) -> Result<()> {
        let m = self.units();
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "number of units must be even and positive, got {m}"
            )));
        }
        if m > 20 {
            return Err(Error::InvalidParameter(format!(
                "at most 20 units supported, got {m}"
            )));
        }
        Ok(())
    }

    /// Every pattern this mode can assign, sorted. Complementary patterns
    /// are adjacent in [`PatternMode::families`] order, not here.
    pub fn admissible(self) -> Vec<ArmPattern> {
        match self {
            PatternMode::FourUnit => ["CTCT", "CTTC", "TCCT", "TCTC"]
                .iter()
                .map(|s| s.parse().expect("static pattern"))
                .collect(),
            PatternMode::General { units } => {
                let mut out: Vec<ArmPattern> = (0u32..1 << units)
                    .filter(|bits| bits.count_ones() as usize * 2 == units)
                    .map(|bits| {
                        ArmPattern(
                            (0..units)
                                .map(|j| bits >> (units - 1 - j) & 1 == 1)
                                .collect(),
                        )
                    })
                    .collect();
                out.sort();
                out
            }
        }
    }

    /// Admissible patterns grouped into complementary families, each family
    /// listed as (representative, complement). With four units the families
    /// are {TCTC, CTCT} and {TCCT, CTTC}.
    pub fn families(self) -> Vec<(ArmPattern, ArmPattern)> {
        let mut reps: Vec<ArmPattern> = self.admissible().iter().map(ArmPattern::family).collect();
        reps.sort();
        reps.dedup();
        reps.into_iter()
            .map(|r| {
                let c = r.complement();
                (r, c)
            })
            .collect()
    }
}

/// The randomization artifact: strata, matched pairs and arm patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub seed: u64,
    pub mode: PatternMode,
    /// Course unit index of the first study unit; pattern position `j` maps
    /// to unit `first_unit + j`.
    pub first_unit: u32,
    pub blocks: Vec<Vec<String>>,
    pub pairs: Vec<(String, String)>,
    pub leftovers: Vec<String>,
    pub assignment: BTreeMap<String, ArmPattern>,
}

impl Design {
    pub fn pattern(&self, id: &str) -> Option<&ArmPattern> {
        self.assignment.get(id)
    }

    /// Arm of student `id` during course unit `unit`, if the unit is a study
    /// unit and the student is assigned.
    pub fn arm(&self, id: &str, unit: u32) -> Option<Arm> {
        let p = self.assignment.get(id)?;
        let j = unit.checked_sub(self.first_unit)? as usize;
        (j < p.len()).then(|| p.arm(j))
    }

    /// Map from student id to pair partner.
    pub fn partners(&self) -> BTreeMap<&str, &str> {
        let mut m = BTreeMap::new();
        for (a, b) in &self.pairs {
            m.insert(a.as_str(), b.as_str());
            m.insert(b.as_str(), a.as_str());
        }
        m
    }

    pub fn study_units(&self) -> std::ops::Range<u32> {
        self.first_unit..self.first_unit + self.mode.units() as u32
    }

    /// Structural checks against a roster. Empty means valid.
    pub fn validate(&self, roster: &Roster) -> Vec<String> {
        let mut errs = Vec::new();
        let mut in_block: BTreeMap<&str, usize> = BTreeMap::new();
        for b in &self.blocks {
            for id in b {
                *in_block.entry(id.as_str()).or_default() += 1;
            }
        }
        for s in &roster.students {
            match in_block.get(s.id.as_str()) {
                Some(1) => {}
                Some(k) => errs.push(format!("{} appears in {k} blocks", s.id)),
                None => errs.push(format!("{} is in no block", s.id)),
            }
            if !self.assignment.contains_key(&s.id) {
                errs.push(format!("{} has no arm pattern", s.id));
            }
        }
        let admissible: BTreeSet<ArmPattern> = self.mode.admissible().into_iter().collect();
        for (id, p) in &self.assignment {
            if !admissible.contains(p) {
                errs.push(format!("{id} holds inadmissible pattern {p}"));
            }
        }
        let mut paired = BTreeSet::new();
        for (a, b) in &self.pairs {
            for id in [a, b] {
                if !paired.insert(id.as_str()) {
                    errs.push(format!("{id} is in more than one pair"));
                }
            }
            match (self.assignment.get(a), self.assignment.get(b)) {
                (Some(pa), Some(pb)) if *pb == pa.complement() => {}
                _ => errs.push(format!(
                    "pair ({a}, {b}) does not hold complementary patterns"
                )),
            }
        }
        errs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExamKind {
    Quiz,
    FinalSection,
}

impl ExamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExamKind::Quiz => "quiz",
            ExamKind::FinalSection => "final_section",
        }
    }
}

impl FromStr for ExamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quiz" => Ok(ExamKind::Quiz),
            "final_section" | "final" => Ok(ExamKind::FinalSection),
            other => Err(Error::InvalidParameter(format!(
                "unknown exam kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamMeta {
    pub exam_id: String,
    /// Course unit the exam concludes (or, for final sections, covers).
    pub unit: u32,
    pub term: String,
    pub kind: ExamKind,
    pub points: f64,
}

/// Raw exam scores keyed by (student, exam).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    exams: Vec<ExamMeta>,
    scores: BTreeMap<(String, String), f64>,
}

impl ScoreTable {
    /// Validates exam metadata and score ranges.
    pub fn new(exams: Vec<ExamMeta>, scores: BTreeMap<(String, String), f64>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for e in &exams {
            if !ids.insert(e.exam_id.as_str()) {
                return Err(Error::Schema(format!("duplicate exam id {}", e.exam_id)));
            }
            if e.unit < 1 {
                return Err(Error::Schema(format!("exam {} has unit < 1", e.exam_id)));
            }
            if !(e.points > 0.0 && e.points.is_finite()) {
                return Err(Error::Schema(format!(
                    "exam {} has non-positive points",
                    e.exam_id
                )));
            }
        }
        let points: BTreeMap<&str, f64> = exams
            .iter()
            .map(|e| (e.exam_id.as_str(), e.points))
            .collect();
        for ((sid, eid), &y) in &scores {
            let max = points.get(eid.as_str()).ok_or_else(|| {
                Error::Schema(format!("score for unknown exam {eid} (student {sid})"))
            })?;
            if !(0.0..=*max).contains(&y) {
                return Err(Error::Schema(format!(
                    "score {y} for student {sid} on exam {eid} outside [0, {max}]"
                )));
            }
        }
        Ok(ScoreTable { exams, scores })
    }

    pub fn exams(&self) -> &[ExamMeta] {
        &self.exams
    }

    pub fn exam(&self, exam_id: &str) -> Option<&ExamMeta> {
        self.exams.iter().find(|e| e.exam_id == exam_id)
    }

    pub fn scores(&self) -> &BTreeMap<(String, String), f64> {
        &self.scores
    }

    pub fn score(&self, student_id: &str, exam_id: &str) -> Option<f64> {
        self.scores
            .get(&(student_id.to_string(), exam_id.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores on one exam as (student, score), in student-id order.
    pub fn exam_scores<'a>(
        &'a self,
        exam_id: &'a str,
    ) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.scores
            .iter()
            .filter(move |((_, e), _)| e == exam_id)
            .map(|((s, _), &y)| (s.as_str(), y))
    }

    /// Treatment indicator W for a scored (student, exam) cell.
    pub fn treatment(&self, design: &Design, student_id: &str, exam_id: &str) -> Option<bool> {
        let exam = self.exam(exam_id)?;
        design.arm(student_id, exam.unit).map(Arm::is_treated)
    }

    /// Replaces each score on `exam_id` by `a * y + b` and the exam maximum
    /// by `a * points + b`. Requires `a > 0` and no score mapped below zero.
    pub fn affine_transform(&self, exam_id: &str, a: f64, b: f64) -> Result<ScoreTable> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(
                "affine scale must be positive".into(),
            ));
        }
        let mut out = self.clone();
        let meta = out
            .exams
            .iter_mut()
            .find(|m| m.exam_id == exam_id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown exam {exam_id}")))?;
        meta.points = a * meta.points + b;
        for ((_, e), y) in out.scores.iter_mut() {
            if e == exam_id {
                *y = a * *y + b;
                if *y < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "affine map sends a score on {exam_id} below zero"
                    )));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceRecord {
    pub student_id: String,
    pub completed: u32,
    pub assigned: u32,
}

impl ComplianceRecord {
    pub fn validate(&self) -> Result<()> {
        if self.assigned == 0 || self.completed > self.assigned {
            return Err(Error::InvalidParameter(format!(
                "compliance record for {}: completed {} of {} assigned",
                self.student_id, self.completed, self.assigned
            )));
        }
        Ok(())
    }
}

/// Estimate of the standardized treatment effect with its inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectReport {
    /// Mean treated-minus-control difference, in control-group SD units.
    pub d_bar: f64,
    pub se: f64,
    pub n_used: usize,
    pub t_stat: f64,
    pub df: usize,
    /// Two-sided.
    pub p_asymptotic: f64,
    /// Two-sided; absent when no permutations were run.
    pub p_permutation: Option<f64>,
    pub n_permutations: usize,
}

impl EffectReport {
    /// One-sided p-value for the alternative of a positive effect.
    pub fn p_one_sided(&self) -> f64 {
        let half = self.p_asymptotic / 2.0;
        if self.t_stat >= 0.0 {
            half
        } else {
            1.0 - half
        }
    }

    /// Two-sided `level` confidence interval from the t distribution.
    pub fn confidence_interval(&self, level: f64) -> Result<(f64, f64)> {
        let q = crate::stats::t_quantile(0.5 + level / 2.0, self.df as f64)?;
        Ok((self.d_bar - q * self.se, self.d_bar + q * self.se))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn student(id: &str) -> Student {
        Student {
            id: id.into(),
            gender: 0,
            urm: 0,
            ap_stats: 0,
            math_adv: 0,
            class_year: ClassYear::Junior,
            baseline: 50.0,
            term: "autumn".into(),
        }
    }

    #[test]
    fn duplicate_id_is_one_violation() {
        let r = Roster::new(vec![student("s1"), student("s2"), student("s1")]);
        let v = r.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].student_id, "s1");
    }

    #[test]
    fn empty_roster_is_valid() {
        assert!(validate_roster(&Roster::default()).is_empty());
    }

    #[test]
    fn non_binary_and_non_finite_fields_flagged() {
        let mut s = student("a");
        s.gender = 2;
        s.baseline = f64::NAN;
        let v = Roster::new(vec![s]).validate();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn four_unit_patterns_are_complete_and_balanced() {
        let p = PatternMode::FourUnit.admissible();
        let names: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["CTCT", "CTTC", "TCCT", "TCTC"]);
        assert!(p.iter().all(|x| x.is_balanced() && x.treated_count() == 2));
        let fams = PatternMode::FourUnit.families();
        assert_eq!(fams.len(), 2);
        assert_eq!(fams[0].0.to_string(), "CTCT");
        assert_eq!(fams[0].1.to_string(), "TCTC");
        assert_eq!(fams[1].0.to_string(), "CTTC");
        assert_eq!(fams[1].1.to_string(), "TCCT");
    }

    #[test]
    fn general_mode_enumerates_all_balanced_sequences() {
        assert_eq!(PatternMode::General { units: 4 }.admissible().len(), 6);
        assert_eq!(PatternMode::General { units: 6 }.admissible().len(), 20);
        assert!(PatternMode::General { units: 3 }.validate().is_err());
    }

    #[test]
    fn complement_flips_every_unit() {
        let p: ArmPattern = "TCCT".parse().unwrap();
        assert_eq!(p.complement().to_string(), "CTTC");
        for j in 0..4 {
            assert_ne!(p.arm(j), p.complement().arm(j));
        }
    }

    #[test]
    fn class_year_parsing() {
        assert_eq!("Senior".parse::<ClassYear>().unwrap(), ClassYear::Senior);
        assert_eq!("4".parse::<ClassYear>().unwrap(), ClassYear::Graduate);
        assert!("alumnus".parse::<ClassYear>().is_err());
        assert!(ClassYear::Junior.is_upperclass());
        assert!(!ClassYear::Sophomore.is_upperclass());
    }

    #[test]
    fn score_out_of_range_rejected() {
        let exams = vec![ExamMeta {
            exam_id: "q2".into(),
            unit: 2,
            term: "autumn".into(),
            kind: ExamKind::Quiz,
            points: 100.0,
        }];
        let mut scores = BTreeMap::new();
        scores.insert(("a".to_string(), "q2".to_string()), 110.0);
        assert!(ScoreTable::new(exams.clone(), scores).is_err());
        assert!(ScoreTable::new(exams, BTreeMap::new()).unwrap().is_empty());
    }

    #[test]
    fn design_arm_lookup_maps_units() {
        let mut assignment = BTreeMap::new();
        assignment.insert("a".to_string(), "TCTC".parse().unwrap());
        let d = Design {
            seed: 1,
            mode: PatternMode::FourUnit,
            first_unit: 2,
            blocks: vec![vec!["a".into()]],
            pairs: vec![],
            leftovers: vec!["a".into()],
            assignment,
        };
        assert_eq!(d.arm("a", 1), None);
        assert_eq!(d.arm("a", 2), Some(Arm::Treatment));
        assert_eq!(d.arm("a", 3), Some(Arm::Control));
        assert_eq!(d.arm("a", 6), None);
    }
}
