//! Ordinary least squares and nested-model F tests.

use super::dist::f_tail;
use super::linalg::{householder_lstsq, Matrix};
use crate::error::{Error, Result};

/// Relative rank tolerance against the largest column norm.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_ss: f64,
    /// Sum of squares of fitted values about the response mean.
    pub model_ss: f64,
    /// Uncentered sum of squares of the response.
    pub response_ss: f64,
    pub df_residual: usize,
    pub n_rows: usize,
    pub n_columns: usize,
}

/// Least-squares fit of `response` on the columns of `design`.
pub fn ols(design: &Matrix, response: &[f64]) -> Result<OlsFit> {
    let (n, p) = (design.rows(), design.cols());
    if response.len() != n {
        return Err(Error::InvalidParameter(format!(
            "response has {} rows, design matrix has {n}",
            response.len()
        )));
    }
    if p == 0 || n <= p {
        return Err(Error::InsufficientData {
            required: p + 1,
            found: n,
        });
    }
    let coefficients =
        householder_lstsq(design, response, RANK_TOL).map_err(|column| Error::Singular {
            column,
            name: format!("x{column}"),
        })?;
    let fitted = design.mul_vec(&coefficients);
    let residuals: Vec<f64> = response.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let residual_ss = residuals.iter().map(|r| r * r).sum();
    let ybar = response.iter().sum::<f64>() / n as f64;
    let model_ss = fitted.iter().map(|f| (f - ybar) * (f - ybar)).sum();
    Ok(OlsFit {
        coefficients,
        fitted,
        residuals,
        residual_ss,
        model_ss,
        response_ss: response.iter().map(|y| y * y).sum(),
        df_residual: n - p,
        n_rows: n,
        n_columns: p,
    })
}

/// Same as [`ols`] but reports rank deficiency by column name.
pub fn ols_named(columns: &[(String, Vec<f64>)], response: &[f64]) -> Result<OlsFit> {
    let design = Matrix::from_columns(&columns.iter().map(|(_, c)| c.clone()).collect::<Vec<_>>());
    ols(&design, response).map_err(|e| match e {
        Error::Singular { column, .. } => Error::Singular {
            column,
            name: columns[column].0.clone(),
        },
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FTest {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
}

/// F test of a reduced model against the full model it is nested in.
///
/// When neither model leaves any residual and the reduced model already fits
/// perfectly, F is reported as 0.
pub fn f_test_nested(full: &OlsFit, reduced: &OlsFit) -> Result<FTest> {
    if reduced.n_rows != full.n_rows {
        return Err(Error::InvalidParameter(
            "models were fit to different data".into(),
        ));
    }
    if full.n_columns <= reduced.n_columns {
        return Err(Error::InvalidParameter(format!(
            "numerator df must be positive (full has {} columns, reduced {})",
            full.n_columns, reduced.n_columns
        )));
    }
    let df1 = full.n_columns - reduced.n_columns;
    let df2 = full.df_residual;
    // Residuals at rounding level of the response count as zero.
    let scale = reduced
        .residual_ss
        .max(full.residual_ss)
        .max(1e-12 * full.response_ss)
        .max(f64::MIN_POSITIVE);
    let gain = (reduced.residual_ss - full.residual_ss).max(0.0);
    let f = if gain <= 1e-12 * scale {
        0.0
    } else if full.residual_ss <= 1e-14 * scale {
        f64::INFINITY
    } else {
        (gain / df1 as f64) / (full.residual_ss / df2 as f64)
    };
    let p = f_tail(f, df1 as f64, df2 as f64)?;
    Ok(FTest { f, df1, df2, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intercept(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn exact_line() {
        let x = Matrix::from_columns(&[intercept(3), vec![0.0, 1.0, 2.0]]);
        let fit = ols(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.residual_ss < 1e-24);
        assert_eq!(fit.df_residual, 1);
    }

    #[test]
    fn orthogonal_response_gives_zero_coefficients() {
        let x = Matrix::from_columns(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]);
        let fit = ols(&x, &[1.0, -1.0, 2.0, -2.0]).unwrap();
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn named_singularity() {
        let cols = vec![
            ("intercept".to_string(), intercept(4)),
            ("a".to_string(), vec![1.0, 0.0, 1.0, 0.0]),
            ("not_a".to_string(), vec![0.0, 1.0, 0.0, 1.0]),
        ];
        match ols_named(&cols, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::Singular { column, name }) => {
                assert_eq!(column, 2);
                assert_eq!(name, "not_a");
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn identical_models_rejected() {
        let x = Matrix::from_columns(&[intercept(5), vec![1.0, 2.0, 3.0, 4.0, 6.0]]);
        let fit = ols(&x, &[1.0, 3.0, 2.0, 5.0, 4.0]).unwrap();
        assert!(f_test_nested(&fit, &fit).is_err());
    }

    #[test]
    fn six_row_hand_example() {
        // y on {1, x} vs {1}; x = 1..6, y = [2, 1, 4, 3, 6, 5]
        // ybar = 3.5, TSS = 17.5, Sxy = 14.5, Sxx = 17.5 -> SSreg = 14.5^2/17.5
        let xs = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let full = ols(&Matrix::from_columns(&[intercept(6), xs]), &ys).unwrap();
        let reduced = ols(&Matrix::from_columns(&[intercept(6)]), &ys).unwrap();
        let ss_reg = 14.5f64 * 14.5 / 17.5;
        let rss = 17.5 - ss_reg;
        let f_expected = ss_reg / (rss / 4.0);
        let t = f_test_nested(&full, &reduced).unwrap();
        assert!(
            (t.f - f_expected).abs() < 1e-10,
            "{} vs {}",
            t.f,
            f_expected
        );
        assert!((full.residual_ss - rss).abs() < 1e-10);
        assert!((full.model_ss - ss_reg).abs() < 1e-10);
        assert_eq!((t.df1, t.df2), (1, 4));
    }
}
