//! Covariate balance across the arm-pattern groups.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ClassYear, Covariate, Design, Roster};
use crate::stats::{chi_square_independence, one_way_anova};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceRow {
    pub covariate: String,
    /// "anova" or "chi_square".
    pub test: String,
    pub statistic: f64,
    pub df1: usize,
    /// Denominator df for ANOVA rows.
    pub df2: Option<usize>,
    pub p: f64,
}

/// ANOVA on the baseline score and chi-square tests on class year and the
/// binary covariates, across the admissible pattern groups.
pub fn balance_report(design: &Design, roster: &Roster) -> Result<Vec<BalanceRow>> {
    let patterns = design.mode.admissible();
    let mut groups: Vec<Vec<&crate::model::Student>> = vec![Vec::new(); patterns.len()];
    for s in &roster.students {
        let p = design
            .pattern(&s.id)
            .ok_or_else(|| Error::MissingRecord(s.id.clone()))?;
        let g = patterns.iter().position(|q| q == p).ok_or_else(|| {
            Error::InvalidParameter(format!("{} holds inadmissible pattern {p}", s.id))
        })?;
        groups[g].push(s);
    }
    if let Some(g) = groups.iter().position(Vec::is_empty) {
        return Err(Error::EmptyGroup(format!("pattern {}", patterns[g])));
    }

    let mut rows = Vec::new();
    let base: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| g.iter().map(|s| s.baseline).collect())
        .collect();
    let a = one_way_anova(&base)?;
    rows.push(BalanceRow {
        covariate: Covariate::Baseline.name().into(),
        test: "anova".into(),
        statistic: a.f,
        df1: a.df_between,
        df2: Some(a.df_within),
        p: a.p,
    });

    let years: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            ClassYear::ALL
                .iter()
                .map(|y| g.iter().filter(|s| s.class_year == *y).count() as f64)
                .collect()
        })
        .collect();
    let c = chi_square_independence(&years)?;
    rows.push(chi_row(Covariate::ClassYear, c));

    for cov in [
        Covariate::Gender,
        Covariate::Urm,
        Covariate::ApStats,
        Covariate::MathAdv,
    ] {
        let table: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| {
                let ones = g.iter().filter(|s| s.covariate(cov) == 1.0).count() as f64;
                vec![g.len() as f64 - ones, ones]
            })
            .collect();
        rows.push(chi_row(cov, chi_square_independence(&table)?));
    }
    Ok(rows)
}

fn chi_row(cov: Covariate, c: crate::stats::ChiSquareResult) -> BalanceRow {
    BalanceRow {
        covariate: cov.name().into(),
        test: "chi_square".into(),
        statistic: c.statistic,
        df1: c.df,
        df2: None,
        p: c.p,
    }
}
