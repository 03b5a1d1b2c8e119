//! Data behind the matched-vs-random pairing picture: students projected onto
//! the top principal components of their covariates, with pair edges drawn
//! for the matched design and for a covariate-blind random pairing.

use serde::Serialize;

use super::distance::{euclidean, DistanceConfig};
use super::{random_pairing_design, DesignOptions};
use crate::error::Result;
use crate::model::{Covariate, Design, Roster};
use crate::rng;
use crate::stats::pca_project;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotEdge {
    pub a: String,
    pub b: String,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingPlot {
    /// One row per rostered student, in roster order.
    pub points: Vec<(String, Vec<f64>)>,
    pub matched_edges: Vec<PlotEdge>,
    pub random_edges: Vec<PlotEdge>,
    pub matched_mean: f64,
    pub random_mean: f64,
}

/// Blocking covariates plus every covariate named in `cfg`, each z-scored.
fn feature_rows(roster: &Roster, cfg: &DistanceConfig) -> Vec<Vec<f64>> {
    let mut fields = vec![Covariate::Gender, Covariate::Urm, Covariate::ApStats];
    for &c in cfg.numeric_fields.iter().chain(&cfg.categorical_fields) {
        if !fields.contains(&c) {
            fields.push(c);
        }
    }
    let n = roster.len() as f64;
    let cols: Vec<Vec<f64>> = fields
        .iter()
        .map(|&c| {
            let xs: Vec<f64> = roster.students.iter().map(|s| s.covariate(c)).collect();
            let m = xs.iter().sum::<f64>() / n;
            let sd =
                (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
            xs.iter()
                .map(|x| if sd > 0.0 { (x - m) / sd } else { 0.0 })
                .collect()
        })
        .collect();
    (0..roster.len())
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

pub fn pairing_plot_data(
    design: &Design,
    roster: &Roster,
    cfg: &DistanceConfig,
) -> Result<PairingPlot> {
    let rows = feature_rows(roster, cfg);
    let k = rows.first().map_or(1, |r| r.len().min(3));
    let proj = pca_project(&rows, k)?;
    let points: Vec<(String, Vec<f64>)> = roster
        .students
        .iter()
        .map(|s| s.id.clone())
        .zip(proj.scores)
        .collect();
    let index: std::collections::BTreeMap<&str, &Vec<f64>> =
        points.iter().map(|(id, p)| (id.as_str(), p)).collect();
    let edges = |pairs: &[(String, String)]| -> Vec<PlotEdge> {
        pairs
            .iter()
            .filter_map(|(a, b)| {
                let (pa, pb) = (index.get(a.as_str())?, index.get(b.as_str())?);
                Some(PlotEdge {
                    a: a.clone(),
                    b: b.clone(),
                    length: euclidean(pa, pb),
                })
            })
            .collect()
    };
    let opts = DesignOptions {
        mode: design.mode,
        first_unit: design.first_unit,
        distance: cfg.clone(),
    };
    let strawman = random_pairing_design(roster, &opts, rng::derive_seed(design.seed, 1))?;
    let matched_edges = edges(&design.pairs);
    let random_edges = edges(&strawman.pairs);
    let mean = |e: &[PlotEdge]| {
        if e.is_empty() {
            0.0
        } else {
            e.iter().map(|x| x.length).sum::<f64>() / e.len() as f64
        }
    };
    Ok(PairingPlot {
        matched_mean: mean(&matched_edges),
        random_mean: mean(&random_edges),
        points,
        matched_edges,
        random_edges,
    })
}
