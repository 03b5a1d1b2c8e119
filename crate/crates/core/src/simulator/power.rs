//! Monte Carlo power over a grid of effect sizes and sample sizes.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate, SimScenario};
use crate::analysis::{estimate_effect, ExamFilter};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{mean_sd, welch_t_test};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerDesign {
    /// Matched-pairs crossover analysed with the within-student estimator.
    #[default]
    Crossover,
    /// Half the students treated in every unit, half never; per-student mean
    /// z-scores compared with a Welch t test.
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub design: PowerDesign,
    pub tau: f64,
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    pub power: f64,
}

pub const MIN_REPS: usize = 100;

/// Two-sided p-value of one simulated parallel-groups trial.
pub fn parallel_trial_p(sc: &SimScenario) -> Result<f64> {
    sc.validate()?;
    let n = sc.n_students;
    let mut r = rng::stream(sc.seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut treated = vec![false; n];
    for &i in &order[..n / 2] {
        treated[i] = true;
    }
    let theta: Vec<f64> = (0..n)
        .map(|_| sc.noise.draw(&mut r, sc.theta_var))
        .collect();
    let effect: Vec<f64> = (0..n)
        .map(|_| {
            if r.random::<f64>() >= sc.noncompliance_rate {
                sc.tau
            } else {
                0.0
            }
        })
        .collect();
    let mut zsum = vec![0.0; n];
    for k in 0..sc.m_units {
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let z = theta[i]
                    + if treated[i] { effect[i] } else { 0.0 }
                    + sc.noise.draw(&mut r, sc.eps_var());
                sc.exam_mu[k] + sc.exam_sigma[k] * z
            })
            .collect();
        let control: Vec<f64> = (0..n).filter(|&i| !treated[i]).map(|i| y[i]).collect();
        let (mu, sd) = mean_sd(&control)?;
        if !(sd > 0.0) {
            return Err(Error::DegenerateVariance(
                "control scores are constant".into(),
            ));
        }
        for i in 0..n {
            zsum[i] += (y[i] - mu) / sd;
        }
    }
    let (a, b): (Vec<(usize, f64)>, Vec<(usize, f64)>) =
        zsum.into_iter().enumerate().partition(|(i, _)| treated[*i]);
    let a: Vec<f64> = a.into_iter().map(|x| x.1 / sc.m_units as f64).collect();
    let b: Vec<f64> = b.into_iter().map(|x| x.1 / sc.m_units as f64).collect();
    Ok(welch_t_test(&a, &b)?.p)
}

/// Rejection rate at `alpha` for every (tau, n) grid point. Replicate `r` of
/// grid point `g` uses seed `derive_seed(derive_seed(base.seed, g), r)`.
pub fn power_curve(
    base: &SimScenario,
    grid: &[(f64, usize)],
    alpha: f64,
    n_reps: usize,
    design: PowerDesign,
) -> Result<Vec<PowerRow>> {
    if n_reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_REPS} replicates, got {n_reps}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    base.validate()?;
    let mut rows = Vec::with_capacity(grid.len());
    for (g, &(tau, n)) in grid.iter().enumerate() {
        let gseed = rng::derive_seed(base.seed, g as u64);
        let pvals: Vec<f64> = (0..n_reps)
            .into_par_iter()
            .map(|r| {
                let sc = SimScenario {
                    tau,
                    n_students: n,
                    seed: rng::derive_seed(gseed, r as u64),
                    ..base.clone()
                };
                match design {
                    PowerDesign::Crossover => {
                        let out = simulate(&sc)?;
                        let (rep, _, _) =
                            estimate_effect(&out.scores, &out.design, ExamFilter::All, 0, 0)?;
                        Ok(rep.p_asymptotic)
                    }
                    PowerDesign::Parallel => parallel_trial_p(&sc),
                }
            })
            .collect::<Result<_>>()?;
        let hits = pvals.iter().filter(|&&p| p <= alpha).count();
        rows.push(PowerRow {
            design,
            tau,
            n,
            alpha,
            reps: n_reps,
            power: hits as f64 / n_reps as f64,
        });
    }
    Ok(rows)
}
