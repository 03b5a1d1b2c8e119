//! Numerical statistics used by the design, analysis and simulation code.
//!
//! Everything here is self-contained: special functions, least squares, the
//! symmetric eigensolver and the smoother are implemented in this module.

pub mod dist;
pub mod linalg;
pub mod loess;
pub mod ols;
pub mod pca;
pub mod special;

pub use dist::{chisq_tail, f_tail, normal_tail_two_sided, t_cdf, t_quantile, t_tail_two_sided};
pub use linalg::Matrix;
pub use loess::{loess, loess_at};
pub use ols::{f_test_nested, ols, ols_named, FTest, OlsFit};
pub use pca::{pca_project, PcaProjection};

use serde::Serialize;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample mean and standard deviation (divisor n - 1).
pub fn mean_sd(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            found: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Ok((m, (ss / (n - 1.0)).sqrt()))
}

/// Pearson correlation and its two-sided p-value.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter("vectors differ in length".into()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            found: n,
        });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance(
            "correlation with a constant vector".into(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * ((n as f64 - 2.0) / (1.0 - r * r)).sqrt();
        t_tail_two_sided(t, n as f64 - 2.0)?
    };
    Ok((r, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSampleT {
    pub mean_diff: f64,
    pub se: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch's unequal-variance two-sample t test of mean(a) - mean(b).
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TwoSampleT> {
    let (ma, sa) = mean_sd(a)?;
    let (mb, sb) = mean_sd(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let va = sa * sa / na;
    let vb = sb * sb / nb;
    let se = (va + vb).sqrt();
    let mean_diff = ma - mb;
    if se == 0.0 {
        if mean_diff == 0.0 {
            return Ok(TwoSampleT {
                mean_diff,
                se,
                t: 0.0,
                df: na + nb - 2.0,
                p: 1.0,
            });
        }
        return Err(Error::DegenerateVariance(
            "both samples are constant".into(),
        ));
    }
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let t = mean_diff / se;
    let p = t_tail_two_sided(t, df.max(1.0))?;
    Ok(TwoSampleT {
        mean_diff,
        se,
        t,
        df,
        p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// One-way ANOVA. F is 0 when the group means coincide.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            found: k,
        });
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(Error::EmptyGroup(format!("group {i}")));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    if n <= k {
        return Err(Error::InsufficientData {
            required: k + 1,
            found: n,
        });
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let scale = (ss_between + ss_within).max(f64::MIN_POSITIVE);
    let f = if ss_between <= 1e-14 * scale {
        0.0
    } else if ss_within == 0.0 {
        f64::INFINITY
    } else {
        (ss_between / df_between as f64) / (ss_within / df_within as f64)
    };
    let p = f_tail(f, df_between as f64, df_within as f64)?;
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p,
        ss_between,
        ss_within,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p: f64,
}

/// Pearson chi-square test of independence on a contingency table
/// (rows = groups, columns = levels). All-zero rows and columns are dropped
/// before computing degrees of freedom.
pub fn chi_square_independence(table: &[Vec<f64>]) -> Result<ChiSquareResult> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidParameter("ragged contingency table".into()));
    }
    let keep_rows: Vec<usize> = (0..table.len())
        .filter(|&i| table[i].iter().sum::<f64>() > 0.0)
        .collect();
    let keep_cols: Vec<usize> = (0..cols)
        .filter(|&j| table.iter().map(|r| r[j]).sum::<f64>() > 0.0)
        .collect();
    let (r, c) = (keep_rows.len(), keep_cols.len());
    if r < 2 || c < 2 {
        return Ok(ChiSquareResult {
            statistic: 0.0,
            df: 0,
            p: 1.0,
        });
    }
    let row_tot: Vec<f64> = keep_rows
        .iter()
        .map(|&i| keep_cols.iter().map(|&j| table[i][j]).sum())
        .collect();
    let col_tot: Vec<f64> = keep_cols
        .iter()
        .map(|&j| keep_rows.iter().map(|&i| table[i][j]).sum())
        .collect();
    let total: f64 = row_tot.iter().sum();
    let mut stat = 0.0;
    for (a, &i) in keep_rows.iter().enumerate() {
        for (b, &j) in keep_cols.iter().enumerate() {
            let e = row_tot[a] * col_tot[b] / total;
            stat += (table[i][j] - e) * (table[i][j] - e) / e;
        }
    }
    let df = (r - 1) * (c - 1);
    Ok(ChiSquareResult {
        statistic: stat,
        df,
        p: chisq_tail(stat, df as f64)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizedDifference {
    /// (mean of group 1 - mean of group 0) / pooled SD.
    pub d: f64,
    /// Large-sample standard error sqrt((n1+n0)/(n1 n0) + d^2 / (2 (n1+n0))).
    pub se: f64,
    pub n1: usize,
    pub n0: usize,
}

/// Cohen's d between two groups with the pooled standard deviation.
pub fn standardized_difference(group1: &[f64], group0: &[f64]) -> Result<StandardizedDifference> {
    let (m1, s1) = mean_sd(group1)?;
    let (m0, s0) = mean_sd(group0)?;
    let (n1, n0) = (group1.len() as f64, group0.len() as f64);
    let pooled = (((n1 - 1.0) * s1 * s1 + (n0 - 1.0) * s0 * s0) / (n1 + n0 - 2.0)).sqrt();
    if pooled == 0.0 {
        if m1 == m0 {
            return Ok(StandardizedDifference {
                d: 0.0,
                se: ((n1 + n0) / (n1 * n0)).sqrt(),
                n1: group1.len(),
                n0: group0.len(),
            });
        }
        return Err(Error::DegenerateVariance("both groups are constant".into()));
    }
    let d = (m1 - m0) / pooled;
    let se = ((n1 + n0) / (n1 * n0) + d * d / (2.0 * (n1 + n0))).sqrt();
    Ok(StandardizedDifference {
        d,
        se,
        n1: group1.len(),
        n0: group0.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_small_cases() {
        assert_eq!(mean_sd(&[1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, s) = mean_sd(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert!(mean_sd(&[1.0]).is_err());
    }

    #[test]
    fn pearson_identity_and_antisymmetry() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_r(&xs, &xs).unwrap().0 - 1.0).abs() < 1e-15);
        assert!((pearson_r(&xs, &neg).unwrap().0 + 1.0).abs() < 1e-15);
        assert!(pearson_r(&xs, &[1.0; 5]).is_err());
    }

    #[test]
    fn welch_on_identical_samples() {
        let a = [1.0, 2.0, 3.5, 0.2];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn anova_identical_groups_is_zero() {
        let g = vec![1.0, 2.0, 4.0];
        let r = one_way_anova(&[g.clone(), g.clone(), g.clone(), g]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!(r.p, 1.0);
        assert_eq!((r.df_between, r.df_within), (3, 8));
        assert!(one_way_anova(&[vec![1.0], vec![]]).is_err());
    }

    #[test]
    fn anova_two_groups_matches_pooled_t() {
        let a = vec![1.0, 2.0, 3.0, 4.5];
        let b = vec![2.0, 3.5, 5.0, 4.0, 6.0];
        let r = one_way_anova(&[a.clone(), b.clone()]).unwrap();
        let (ma, sa) = mean_sd(&a).unwrap();
        let (mb, sb) = mean_sd(&b).unwrap();
        let sp2 = (3.0 * sa * sa + 4.0 * sb * sb) / 7.0;
        let t = (ma - mb) / (sp2 * (1.0 / 4.0 + 1.0 / 5.0)).sqrt();
        assert!((r.f - t * t).abs() < 1e-12);
    }

    #[test]
    fn chi_square_df_counts_nonempty_levels() {
        let table = vec![
            vec![3.0, 4.0, 5.0, 2.0, 1.0],
            vec![2.0, 5.0, 4.0, 3.0, 1.0],
            vec![4.0, 3.0, 3.0, 4.0, 1.0],
            vec![3.0, 3.0, 4.0, 4.0, 1.0],
        ];
        assert_eq!(chi_square_independence(&table).unwrap().df, 12);
        let mut t2 = table.clone();
        for r in &mut t2 {
            r[4] = 0.0;
        }
        assert_eq!(chi_square_independence(&t2).unwrap().df, 9);
        let same = vec![vec![2.0, 3.0]; 4];
        let r = chi_square_independence(&same).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn standardized_difference_of_identical_groups() {
        let g = [1.0, 3.0, 2.0];
        assert_eq!(standardized_difference(&g, &g).unwrap().d, 0.0);
    }
}
