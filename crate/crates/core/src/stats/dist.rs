//! Tail probabilities of the t, F and chi-square distributions.

use super::special::{gamma_q, inc_beta, inc_beta_upper, normal_cdf};
use crate::error::{Error, Result};

fn check_df(name: &str, df: f64) -> Result<()> {
    if !(df >= 1.0) || !df.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be >= 1, got {df}"
        )));
    }
    Ok(())
}

/// P(|T_df| >= |t|). Non-integer df (Welch) is accepted.
pub fn t_tail_two_sided(t: f64, df: f64) -> Result<f64> {
    check_df("df", df)?;
    if t.is_nan() {
        return Err(Error::InvalidParameter("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let x = df / (df + t * t);
    Ok(inc_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0))
}

/// Student t CDF.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    let tail = t_tail_two_sided(t, df)? / 2.0;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Inverse of [`t_cdf`], by bisection.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    check_df("df", df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level {p} outside (0, 1)"
        )));
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while t_cdf(lo, df)? > p {
        lo *= 2.0;
    }
    while t_cdf(hi, df)? < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper tail P(F_{df1,df2} >= f).
pub fn f_tail(f: f64, df1: f64, df2: f64) -> Result<f64> {
    check_df("df1", df1)?;
    check_df("df2", df2)?;
    if f.is_nan() || f < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "F statistic must be >= 0, got {f}"
        )));
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let x = df1 * f / (df1 * f + df2);
    Ok(inc_beta_upper(x, df1 / 2.0, df2 / 2.0).clamp(0.0, 1.0))
}

/// Upper tail P(chi^2_df >= x).
pub fn chisq_tail(x: f64, df: f64) -> Result<f64> {
    check_df("df", df)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "chi-square statistic must be >= 0, got {x}"
        )));
    }
    Ok(gamma_q(df / 2.0, x / 2.0).clamp(0.0, 1.0))
}

/// Two-sided standard normal tail 2(1 - Φ(|z|)).
pub fn normal_tail_two_sided(z: f64) -> f64 {
    2.0 * normal_cdf(-z.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_tail_boundaries() {
        assert_eq!(t_tail_two_sided(0.0, 5.0).unwrap(), 1.0);
        assert!(t_tail_two_sided(1.0, 0.5).is_err());
        // Cauchy: P(|T_1| >= 1) = 1/2
        assert!((t_tail_two_sided(1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        // df = 2 closed form: 1 - t / sqrt(2 + t^2)
        for &t in &[0.3, 1.0, 4.0] {
            let exact = 1.0 - t / (2.0f64 + t * t).sqrt();
            assert!((t_tail_two_sided(t, 2.0).unwrap() - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn t_tail_reported_results() {
        let p = t_tail_two_sided(2.92, 298.0).unwrap();
        assert!((0.0036..0.0040).contains(&p), "p = {p}");
        let z = t_tail_two_sided(1.96, 1e6).unwrap();
        assert!((z - 0.05).abs() < 1e-3);
        assert!((z - normal_tail_two_sided(1.96)).abs() < 1e-5);
    }

    #[test]
    fn f_and_chisq_reported_results() {
        let p = f_tail(0.17, 3.0, 120.0).unwrap();
        assert!((p - 0.92).abs() < 0.01, "{p}");
        let p = f_tail(0.61, 1.0, 294.0).unwrap();
        assert!((p - 0.43).abs() < 0.01, "{p}");
        let p = chisq_tail(6.4, 9.0).unwrap();
        assert!((p - 0.70).abs() < 0.01, "{p}");
        let p = chisq_tail(0.96, 3.0).unwrap();
        assert!((p - 0.81).abs() < 0.01, "{p}");
        assert_eq!(f_tail(0.0, 2.0, 3.0).unwrap(), 1.0);
        assert_eq!(chisq_tail(0.0, 3.0).unwrap(), 1.0);
        assert!(chisq_tail(1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_tails() {
        // chi^2_2 tail = exp(-x/2)
        for &x in &[0.5, 3.0, 40.0] {
            let e = (-x / 2.0f64).exp();
            assert!(((chisq_tail(x, 2.0).unwrap() - e) / e).abs() < 1e-12);
        }
        // F(1, df) with f = t^2 equals two-sided t tail
        for &t in &[0.5, 2.0, 3.3] {
            let a = f_tail(t * t, 1.0, 17.0).unwrap();
            let b = t_tail_two_sided(t, 17.0).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn t_quantile_inverts_cdf() {
        let q = t_quantile(0.975, 1e6).unwrap();
        assert!((q - 1.959_963_984_540_054).abs() < 1e-4);
        for &df in &[3.0, 30.0, 299.0] {
            for &p in &[0.025, 0.3, 0.9] {
                let q = t_quantile(p, df).unwrap();
                assert!((t_cdf(q, df).unwrap() - p).abs() < 1e-10);
            }
        }
    }
}
