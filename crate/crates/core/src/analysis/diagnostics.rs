//! Term comparison, carryover and effect-heterogeneity checks.

use std::collections::BTreeMap;

use serde::Serialize;

use super::StudentDiff;
use crate::error::{Error, Result};
use crate::model::{ClassYear, Covariate, Design, Roster};
use crate::stats::{
    f_test_nested, loess, ols_named, one_way_anova, welch_t_test, AnovaResult, FTest, TwoSampleT,
};

/// Welch t test of the mean difference between exactly two terms
/// (first label minus second).
pub fn quarter_effect_test(
    diffs_by_term: &BTreeMap<String, Vec<StudentDiff>>,
) -> Result<TwoSampleT> {
    if diffs_by_term.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "term comparison needs exactly 2 terms, got {}",
            diffs_by_term.len()
        )));
    }
    let groups: Vec<Vec<f64>> = diffs_by_term
        .values()
        .map(|v| v.iter().map(|d| d.d).collect())
        .collect();
    welch_t_test(&groups[0], &groups[1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternGroup {
    pub pattern: String,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarryoverReport {
    pub groups: Vec<PatternGroup>,
    /// One-way ANOVA over the retained pattern groups. Patterns within a
    /// family differ in expectation by the ability gap between the control
    /// groups of their exams, so this test rejects too often even without
    /// carryover. The family contrast does not have that problem.
    pub anova: AnovaResult,
    /// Two-group comparison between complementary families, absent when
    /// only one family survives.
    pub family_contrast: Option<AnovaResult>,
    /// (student, pattern, D) for plotting.
    pub points: Vec<(String, String, f64)>,
    pub warnings: Vec<String>,
}

/// Compares mean differences across arm patterns. Without carryover every
/// pattern has the same expected difference.
pub fn carryover_test(diffs: &[StudentDiff], design: &Design) -> Result<CarryoverReport> {
    let mut by_pattern: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut points = Vec::new();
    for d in diffs {
        let p = design
            .pattern(&d.student_id)
            .ok_or_else(|| Error::MissingRecord(d.student_id.clone()))?
            .to_string();
        by_pattern.entry(p.clone()).or_default().push(d.d);
        points.push((d.student_id.clone(), p, d.d));
    }
    let mut warnings = Vec::new();
    by_pattern.retain(|p, v| {
        if v.len() < 2 {
            let msg = format!("pattern {p} has {} students and is dropped", v.len());
            log::warn!("{msg}");
            warnings.push(msg);
            false
        } else {
            true
        }
    });
    if by_pattern.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            found: by_pattern.len(),
        });
    }
    let groups: Vec<PatternGroup> = by_pattern
        .iter()
        .map(|(p, v)| PatternGroup {
            pattern: p.clone(),
            n: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
        .collect();
    let anova = one_way_anova(&by_pattern.values().cloned().collect::<Vec<_>>())?;

    let mut families: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (p, v) in &by_pattern {
        let fam: crate::model::ArmPattern = p.parse()?;
        families
            .entry(fam.family().to_string())
            .or_default()
            .extend(v);
    }
    let family_contrast = if families.len() == 2 {
        Some(one_way_anova(&families.into_values().collect::<Vec<_>>())?)
    } else {
        None
    };
    Ok(CarryoverReport {
        groups,
        anova,
        family_contrast,
        points,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityReport {
    pub n: usize,
    /// Regressors of the full model, intercept excluded.
    pub columns: Vec<String>,
    /// Full covariate model against intercept only.
    pub full: FTest,
    /// None when the covariate is constant.
    pub gender: Option<FTest>,
    pub race: Option<FTest>,
    pub baseline: Option<FTest>,
    pub baseline_slope: Option<f64>,
    /// (baseline, D, loess fit) sorted by baseline.
    pub loess_curve: Vec<(f64, f64, f64)>,
    pub warnings: Vec<String>,
}

fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Regresses D on the roster covariates.
pub fn heterogeneity(diffs: &[StudentDiff], roster: &Roster) -> Result<HeterogeneityReport> {
    let by_id = roster.by_id();
    let students = diffs
        .iter()
        .map(|d| {
            by_id
                .get(d.student_id.as_str())
                .copied()
                .ok_or_else(|| Error::MissingRecord(d.student_id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let y: Vec<f64> = diffs.iter().map(|d| d.d).collect();
    let n = y.len();
    let intercept = ("intercept".to_string(), vec![1.0; n]);
    let mut warnings = Vec::new();

    let mut cols = vec![intercept.clone()];
    for c in [
        Covariate::Gender,
        Covariate::Urm,
        Covariate::ApStats,
        Covariate::MathAdv,
        Covariate::Baseline,
    ] {
        let xs: Vec<f64> = students.iter().map(|s| s.covariate(c)).collect();
        if is_constant(&xs) {
            warnings.push(format!("{c} is constant and left out"));
        } else {
            cols.push((c.name().to_string(), xs));
        }
    }
    let present: Vec<ClassYear> = ClassYear::ALL
        .iter()
        .copied()
        .filter(|y| students.iter().any(|s| s.class_year == *y))
        .collect();
    for y in present.iter().skip(1) {
        cols.push((
            format!("class_year_{}", y.as_str()),
            students
                .iter()
                .map(|s| (s.class_year == *y) as u8 as f64)
                .collect(),
        ));
    }
    let mut terms: Vec<&str> = students.iter().map(|s| s.term.as_str()).collect();
    terms.sort();
    terms.dedup();
    for t in terms.iter().skip(1) {
        cols.push((
            format!("term_{t}"),
            students
                .iter()
                .map(|s| (s.term == *t) as u8 as f64)
                .collect(),
        ));
    }

    let reduced = ols_named(std::slice::from_ref(&intercept), &y)?;
    let full_fit = ols_named(&cols, &y)?;
    let full = f_test_nested(&full_fit, &reduced)?;

    let marginal = |c: Covariate| -> Result<Option<(FTest, f64)>> {
        let xs: Vec<f64> = students.iter().map(|s| s.covariate(c)).collect();
        if is_constant(&xs) {
            return Ok(None);
        }
        let fit = ols_named(&[intercept.clone(), (c.name().to_string(), xs)], &y)?;
        Ok(Some((f_test_nested(&fit, &reduced)?, fit.coefficients[1])))
    };
    let gender = marginal(Covariate::Gender)?.map(|x| x.0);
    let race = marginal(Covariate::Urm)?.map(|x| x.0);
    let base = marginal(Covariate::Baseline)?;

    let mut loess_curve = Vec::new();
    if n >= 5 {
        let xs: Vec<f64> = students.iter().map(|s| s.baseline).collect();
        match loess(
            &xs,
            &y,
            crate::stats::loess::DEFAULT_SPAN,
            crate::stats::loess::DEFAULT_DEGREE,
        ) {
            Ok(fit) => {
                loess_curve = xs
                    .into_iter()
                    .zip(y.iter().copied())
                    .zip(fit)
                    .map(|((x, d), f)| (x, d, f))
                    .collect();
                loess_curve.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            }
            Err(e) => warnings.push(format!("loess skipped: {e}")),
        }
    }
    Ok(HeterogeneityReport {
        n,
        columns: cols.iter().skip(1).map(|c| c.0.clone()).collect(),
        full,
        gender,
        race,
        baseline: base.map(|x| x.0),
        baseline_slope: base.map(|x| x.1),
        loess_curve,
        warnings,
    })
}
