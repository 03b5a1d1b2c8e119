//! Covariate encoding and pairwise distances between students.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Covariate, Roster, Student};

/// Which covariates enter the matching distance and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    /// Z-scored with roster mean and standard deviation.
    pub numeric_fields: Vec<Covariate>,
    /// Used as raw 0/1 indicators.
    pub categorical_fields: Vec<Covariate>,
    /// Per-field weights, numeric fields first then categorical. Missing
    /// entries default to 1.
    #[serde(default)]
    pub weights: Vec<f64>,
}

impl Default for DistanceConfig {
    /// Baseline score and ordinal class year z-scored, math background as an
    /// indicator. Gender, URM and statistics background are handled by
    /// blocking.
    fn default() -> Self {
        DistanceConfig {
            numeric_fields: vec![Covariate::Baseline, Covariate::ClassYear],
            categorical_fields: vec![Covariate::MathAdv],
            weights: Vec::new(),
        }
    }
}

impl DistanceConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.numeric_fields.len() + self.categorical_fields.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "distance needs at least one field".into(),
            ));
        }
        if self.weights.len() > n {
            return Err(Error::InvalidParameter(format!(
                "{} weights given for {n} fields",
                self.weights.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weight {w} must be finite and nonnegative"
            )));
        }
        if let Some(c) = self.categorical_fields.iter().find(|c| !c.is_binary()) {
            return Err(Error::InvalidParameter(format!(
                "{c} is not a 0/1 covariate"
            )));
        }
        Ok(())
    }

    fn fields(&self) -> impl Iterator<Item = (Covariate, bool)> + '_ {
        self.numeric_fields
            .iter()
            .map(|&c| (c, true))
            .chain(self.categorical_fields.iter().map(|&c| (c, false)))
    }

    fn weight(&self, k: usize) -> f64 {
        self.weights.get(k).copied().unwrap_or(1.0)
    }
}

/// Roster-wide location and scale for each numeric field.
#[derive(Debug, Clone, PartialEq)]
pub struct RosterStats {
    means: Vec<f64>,
    /// Zero marks a constant field, which then contributes nothing.
    sds: Vec<f64>,
    pub warnings: Vec<String>,
}

impl RosterStats {
    pub fn compute(roster: &Roster, cfg: &DistanceConfig) -> Self {
        let mut means = Vec::new();
        let mut sds = Vec::new();
        let mut warnings = Vec::new();
        for &c in &cfg.numeric_fields {
            let xs: Vec<f64> = roster.students.iter().map(|s| s.covariate(c)).collect();
            let n = xs.len() as f64;
            let m = if xs.is_empty() {
                0.0
            } else {
                xs.iter().sum::<f64>() / n
            };
            let sd = if xs.len() < 2 {
                0.0
            } else {
                (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            if sd == 0.0 {
                warnings.push(format!("{c} has zero variance and is ignored in distances"));
            }
            means.push(m);
            sds.push(sd);
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        RosterStats {
            means,
            sds,
            warnings,
        }
    }
}

/// Weighted, standardized covariate vector: sqrt(weight) * encoded value,
/// so Euclidean distance between encodings is the weighted distance.
pub fn encode(s: &Student, cfg: &DistanceConfig, stats: &RosterStats) -> Vec<f64> {
    cfg.fields()
        .enumerate()
        .map(|(k, (c, numeric))| {
            let w = cfg.weight(k).sqrt();
            if numeric {
                let sd = stats.sds[k];
                if sd == 0.0 {
                    0.0
                } else {
                    w * (s.covariate(c) - stats.means[k]) / sd
                }
            } else {
                w * s.covariate(c)
            }
        })
        .collect()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Weighted Euclidean distance between two students' encoded covariates.
pub fn covariate_distance(
    a: &Student,
    b: &Student,
    cfg: &DistanceConfig,
    stats: &RosterStats,
) -> f64 {
    euclidean(&encode(a, cfg, stats), &encode(b, cfg, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassYear;

    fn st(id: &str, baseline: f64, year: ClassYear, math: u8) -> Student {
        Student {
            id: id.into(),
            gender: 0,
            urm: 0,
            ap_stats: 0,
            math_adv: math,
            class_year: year,
            baseline,
            term: "t".into(),
        }
    }

    #[test]
    fn hand_encoded_pair() {
        // baseline values 60, 80 -> mean 70, sd sqrt(200)
        let a = st("a", 60.0, ClassYear::Junior, 1);
        let b = st("b", 80.0, ClassYear::Junior, 0);
        let roster = Roster::new(vec![a.clone(), b.clone()]);
        let cfg = DistanceConfig {
            numeric_fields: vec![Covariate::Baseline],
            categorical_fields: vec![Covariate::MathAdv],
            weights: vec![1.0, 4.0],
        };
        let stats = RosterStats::compute(&roster, &cfg);
        // z difference = 20 / sqrt(200) = sqrt(2); indicator diff 1 weighted by 4
        let expected = (2.0f64 + 4.0).sqrt();
        assert!((covariate_distance(&a, &b, &cfg, &stats) - expected).abs() < 1e-12);
        assert_eq!(covariate_distance(&a, &a, &cfg, &stats), 0.0);
    }

    #[test]
    fn constant_field_contributes_nothing() {
        let a = st("a", 50.0, ClassYear::Junior, 0);
        let b = st("b", 50.0, ClassYear::Senior, 0);
        let roster = Roster::new(vec![a.clone(), b.clone()]);
        let cfg = DistanceConfig::default();
        let stats = RosterStats::compute(&roster, &cfg);
        assert_eq!(stats.warnings.len(), 1);
        let d = covariate_distance(&a, &b, &cfg, &stats);
        // only class year varies: ordinals 2, 3 -> z diff sqrt(2)
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(DistanceConfig::default().validate().is_ok());
        let bad = DistanceConfig {
            numeric_fields: vec![],
            categorical_fields: vec![Covariate::Baseline],
            weights: vec![],
        };
        assert!(bad.validate().is_err());
        let neg = DistanceConfig {
            weights: vec![-1.0],
            ..DistanceConfig::default()
        };
        assert!(neg.validate().is_err());
    }
}
