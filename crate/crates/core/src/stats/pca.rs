//! Principal-component projection via the sample covariance matrix.

use super::linalg::{symmetric_eigen, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// n x k component scores.
    pub scores: Vec<Vec<f64>>,
    /// Variances of the retained components, decreasing.
    pub eigenvalues: Vec<f64>,
    /// Unit loading vector of each retained component.
    pub loadings: Vec<Vec<f64>>,
}

/// Projects the (centered) rows onto the top `k` principal axes.
///
/// Each loading vector is signed so that its largest-magnitude entry is
/// positive.
pub fn pca_project(rows: &[Vec<f64>], k: usize) -> Result<PcaProjection> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            found: n,
        });
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidParameter("ragged PCA input".into()));
    }
    if k == 0 || k > p {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= {p}, got k = {k}"
        )));
    }
    let means: Vec<f64> = (0..p)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&means).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = Matrix::zeros(p, p);
    for r in &centered {
        for a in 0..p {
            for b in a..p {
                cov[(a, b)] += r[a] * r[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let (vals, vecs) = symmetric_eigen(&cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut loadings = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for &c in order.iter().take(k) {
        let mut v = vecs.column(c);
        let lead = v.iter().enumerate().fold(
            0,
            |best, (i, x)| if x.abs() > v[best].abs() { i } else { best },
        );
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        loadings.push(v);
        eigenvalues.push(vals[c].max(0.0));
    }
    let scores = centered
        .iter()
        .map(|r| {
            loadings
                .iter()
                .map(|v| r.iter().zip(v).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(PcaProjection {
        scores,
        eigenvalues,
        loadings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_axis_data() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![0.0, i as f64 - 4.5, 0.0]).collect();
        let pr = pca_project(&rows, 3).unwrap();
        assert!((pr.loadings[0][1] - 1.0).abs() < 1e-12);
        for (r, s) in rows.iter().zip(&pr.scores) {
            assert!((s[0] - r[1]).abs() < 1e-12);
            assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
        }
    }

    #[test]
    fn k_larger_than_p_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        assert!(pca_project(&rows, 3).is_err());
        assert!(pca_project(&rows[..1], 1).is_err());
    }
}
