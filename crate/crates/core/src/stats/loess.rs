//! Local polynomial (loess) smoothing with tricube weights.

use crate::error::{Error, Result};

pub const DEFAULT_SPAN: f64 = 0.75;
pub const DEFAULT_DEGREE: usize = 1;

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let v = 1.0 - u * u * u;
        v * v * v
    }
}

/// Loess fit evaluated at the data points.
pub fn loess(xs: &[f64], ys: &[f64], span: f64, degree: usize) -> Result<Vec<f64>> {
    loess_at(xs, ys, span, degree, xs)
}

/// Loess fit of (xs, ys) evaluated at arbitrary points `at`.
pub fn loess_at(xs: &[f64], ys: &[f64], span: f64, degree: usize, at: &[f64]) -> Result<Vec<f64>> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::InvalidParameter("xs and ys differ in length".into()));
    }
    if n < 5 {
        return Err(Error::InsufficientData {
            required: 5,
            found: n,
        });
    }
    if degree > 1 {
        return Err(Error::InvalidParameter(format!(
            "degree must be 0 or 1, got {degree}"
        )));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "span must lie in (0, 1], got {span}"
        )));
    }
    if xs.iter().chain(ys).chain(at).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite input to loess".into()));
    }
    let q = (span * n as f64).floor() as usize;
    if q < degree + 2 {
        return Err(Error::InvalidParameter(format!(
            "span {span} keeps {q} neighbours, need at least {} for degree {degree}",
            degree + 2
        )));
    }
    let mut dist = vec![0.0; n];
    let mut out = Vec::with_capacity(at.len());
    for &x0 in at {
        for (d, &x) in dist.iter_mut().zip(xs) {
            *d = (x - x0).abs();
        }
        let mut sorted = dist.clone();
        sorted.sort_by(f64::total_cmp);
        let h = sorted[q - 1];
        let weights: Vec<f64> = if h > 0.0 {
            // slight widening so the q-th neighbour keeps a positive weight
            let h = h * (1.0 + 1e-8);
            dist.iter().map(|&d| tricube(d / h)).collect()
        } else {
            dist.iter()
                .map(|&d| if d == 0.0 { 1.0 } else { 0.0 })
                .collect()
        };
        out.push(local_fit(xs, ys, &weights, x0, degree));
    }
    Ok(out)
}

fn local_fit(xs: &[f64], ys: &[f64], w: &[f64], x0: f64, degree: usize) -> f64 {
    let sw: f64 = w.iter().sum();
    let mean_y = w.iter().zip(ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    if degree == 0 {
        return mean_y;
    }
    let mean_x = w.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let sxx: f64 = w
        .iter()
        .zip(xs)
        .map(|(w, x)| w * (x - mean_x) * (x - mean_x))
        .sum();
    let sxy: f64 = w
        .iter()
        .zip(xs.iter().zip(ys))
        .map(|(w, (x, y))| w * (x - mean_x) * (y - mean_y))
        .sum();
    let spread = xs.iter().map(|x| (x - mean_x).abs()).fold(0.0, f64::max);
    if sxx <= 1e-14 * sw * spread * spread || sxx == 0.0 {
        return mean_y;
    }
    mean_y + sxy / sxx * (x0 - mean_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_reproduced() {
        let xs: Vec<f64> = (0..20).map(|i| (i * 7 % 20) as f64).collect();
        let ys = vec![3.0; 20];
        for deg in [0, 1] {
            let f = loess(&xs, &ys, 0.5, deg).unwrap();
            assert!(f.iter().all(|v| (v - 3.0).abs() < 1e-12));
        }
    }

    #[test]
    fn line_reproduced_by_local_linear() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.37).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 1.5 * x).collect();
        let f = loess(&xs, &ys, 0.3, 1).unwrap();
        for (a, b) in f.iter().zip(&ys) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn span_too_small_is_an_error() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(loess(&xs, &xs, 0.2, 1).is_err());
        assert!(loess(&xs, &xs, 0.3, 1).is_ok());
        assert!(loess(&xs[..4], &xs[..4], 1.0, 0).is_err());
    }
}
