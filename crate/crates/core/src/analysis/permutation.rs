//! Randomization test that re-flips the design's coins.
//!
//! Handing a student the complementary pattern swaps their treated and
//! control exams, which turns D into -D. Within a matched pair both members
//! swap at once, so each pair contributes one coin; a student whose partner is
//! not among the differences gets a coin of their own. Standardization is held
//! at its observed value.

use std::collections::BTreeMap;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use super::StudentDiff;
use crate::error::{Error, Result};
use crate::model::Design;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationResult {
    pub observed: f64,
    /// Two-sided, add-one estimate.
    pub p_value: f64,
    /// Mean difference under each replicate.
    pub distribution: Vec<f64>,
    pub warnings: Vec<String>,
}

pub const MIN_PERMUTATIONS: usize = 100;

/// Sums of D over each independently flipped unit (a pair or a lone student).
fn flip_units(diffs: &[StudentDiff], design: &Design, warnings: &mut Vec<String>) -> Vec<f64> {
    if design.pairs.is_empty() {
        let msg = "design has no pairs; flipping students independently".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
        return diffs.iter().map(|d| d.d).collect();
    }
    let partners = design.partners();
    let index: BTreeMap<&str, usize> = diffs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.student_id.as_str(), i))
        .collect();
    let mut done = vec![false; diffs.len()];
    let mut units = Vec::new();
    for (i, d) in diffs.iter().enumerate() {
        if done[i] {
            continue;
        }
        done[i] = true;
        let mut s = d.d;
        if let Some(&j) = partners
            .get(d.student_id.as_str())
            .and_then(|p| index.get(p))
        {
            if !done[j] {
                done[j] = true;
                s += diffs[j].d;
            }
        }
        units.push(s);
    }
    units
}

pub fn permutation_test(
    diffs: &[StudentDiff],
    design: &Design,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationResult> {
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_PERMUTATIONS} permutations, got {n_perm}"
        )));
    }
    if diffs.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            found: 0,
        });
    }
    let mut warnings = Vec::new();
    let units = flip_units(diffs, design, &mut warnings);
    let n = diffs.len() as f64;
    let observed = diffs.iter().map(|d| d.d).sum::<f64>() / n;
    let distribution: Vec<f64> = (0..n_perm)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r as u64);
            let mut total = 0.0;
            for chunk in units.chunks(64) {
                let bits = g.next_u64();
                for (k, &u) in chunk.iter().enumerate() {
                    if bits >> k & 1 == 1 {
                        total -= u;
                    } else {
                        total += u;
                    }
                }
            }
            total / n
        })
        .collect();
    let cut = observed.abs() * (1.0 - 1e-12);
    let hits = distribution.iter().filter(|x| x.abs() >= cut).count();
    Ok(PermutationResult {
        observed,
        p_value: (1 + hits) as f64 / (1 + n_perm) as f64,
        distribution,
        warnings,
    })
}
