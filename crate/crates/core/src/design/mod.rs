//! Matched-pairs randomization for crossover studies.
//!
//! Students are blocked on (term, gender, URM, statistics background), paired
//! within each block by an exact minimum-distance perfect matching, and each
//! pair receives complementary arm patterns by coin flips. Blocks of odd size
//! leave out the one student whose removal gives the cheapest matching of the
//! rest; that student draws a pattern on their own.

pub mod balance;
pub mod distance;
pub mod matching;
pub mod plot;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use balance::{balance_report, BalanceRow};
pub use distance::{covariate_distance, DistanceConfig, RosterStats};
pub use plot::{pairing_plot_data, PairingPlot, PlotEdge};

use crate::error::{Error, Result};
use crate::model::{ArmPattern, Design, PatternMode, Roster, Student};
use crate::rng;

/// Stratum key: (term, gender, urm, ap_stats).
pub type BlockKey = (String, u8, u8, u8);

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub key: BlockKey,
    /// Sorted student ids.
    pub ids: Vec<String>,
}

/// Partitions the roster by exact (term, gender, urm, ap_stats), ordered by key.
pub fn block(roster: &Roster) -> Vec<Block> {
    let mut map: BTreeMap<BlockKey, Vec<String>> = BTreeMap::new();
    for s in &roster.students {
        map.entry((s.term.clone(), s.gender, s.urm, s.ap_stats))
            .or_default()
            .push(s.id.clone());
    }
    map.into_iter()
        .map(|(key, mut ids)| {
            ids.sort();
            Block { key, ids }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<(String, String)>,
    pub leftover: Option<String>,
    pub cost: f64,
}

/// Globally optimal pairing of one block.
///
/// Members are processed in id order, so the result does not depend on the
/// order they are passed in. For odd blocks the leftover is the member whose
/// removal leaves the cheapest matching of the rest, ties going to the
/// smallest id. This is solved in one pass by adding a phantom vertex whose
/// edge to member `r` (in id order) costs `r`, with real costs scaled by
/// `n + 1` so the phantom edge only ever breaks ties.
pub fn optimal_pairing<F>(members: &[&Student], distance: F) -> Pairing
where
    F: Fn(&Student, &Student) -> f64,
{
    let mut sorted: Vec<&Student> = members.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let n = sorted.len();
    let mut dist = vec![vec![0.0; n]; n];
    let mut max_d: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(sorted[i], sorted[j]);
            assert!(
                d.is_finite() && d >= 0.0,
                "distances must be finite and nonnegative"
            );
            dist[i][j] = d;
            dist[j][i] = d;
            max_d = max_d.max(d);
        }
    }
    let odd = n % 2 == 1;
    let mult = if odd { n as u64 + 1 } else { 1 };
    let scale = matching::quantization_scale(max_d, mult);
    let mut edges = Vec::with_capacity((n + 1) * n / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, (dist[i][j] * scale).round() as i64 * mult as i64));
        }
        if odd {
            edges.push((i, n, i as i64));
        }
    }
    let size = if odd { n + 1 } else { n };
    let mut leftover = None;
    let mut pairs = Vec::with_capacity(n / 2);
    let mut cost = 0.0;
    for (i, j) in matching::min_cost_perfect_matching_int(size, &edges) {
        if j == n {
            leftover = Some(sorted[i].id.clone());
            continue;
        }
        cost += dist[i][j];
        pairs.push((sorted[i].id.clone(), sorted[j].id.clone()));
    }
    pairs.sort();
    Pairing {
        pairs,
        leftover,
        cost,
    }
}

/// Coin-flip arm assignment for pairs and leftovers.
///
/// For each pair (in sorted order) one fair draw picks a complementary
/// family and a second fair coin decides which member takes which pattern of
/// it. Leftovers draw uniformly from all admissible patterns.
pub fn assign_arms(
    pairs: &[(String, String)],
    leftovers: &[String],
    seed: u64,
    mode: PatternMode,
) -> Result<BTreeMap<String, ArmPattern>> {
    mode.validate()?;
    let families = mode.families();
    let admissible = mode.admissible();
    let mut sorted_pairs: Vec<(String, String)> = pairs
        .iter()
        .map(|(a, b)| {
            if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        })
        .collect();
    sorted_pairs.sort();
    let mut sorted_left = leftovers.to_vec();
    sorted_left.sort();

    let mut rng = rng::seeded(seed);
    let mut out = BTreeMap::new();
    for (a, b) in &sorted_pairs {
        let (p, q) = &families[rng.random_range(0..families.len())];
        let (pa, pb) = if rng.random_bool(0.5) { (p, q) } else { (q, p) };
        for (id, pat) in [(a, pa), (b, pb)] {
            if out.insert(id.clone(), pat.clone()).is_some() {
                return Err(Error::DuplicateStudent(id.clone()));
            }
        }
    }
    for id in &sorted_left {
        let pat = &admissible[rng.random_range(0..admissible.len())];
        if out.insert(id.clone(), pat.clone()).is_some() {
            return Err(Error::DuplicateStudent(id.clone()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    pub mode: PatternMode,
    /// Course unit of the first study unit (unit 1 serves as baseline).
    pub first_unit: u32,
    pub distance: DistanceConfig,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            mode: PatternMode::FourUnit,
            first_unit: 2,
            distance: DistanceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSummary {
    pub total_distance: f64,
    pub warnings: Vec<String>,
}

fn check_roster(roster: &Roster) -> Result<()> {
    if let Some(v) = roster.validate().first() {
        return Err(Error::InvalidParameter(format!("invalid roster: {v}")));
    }
    Ok(())
}

/// Blocks, matches and randomizes a roster.
pub fn build_design(
    roster: &Roster,
    opts: &DesignOptions,
    seed: u64,
) -> Result<(Design, DesignSummary)> {
    check_roster(roster)?;
    opts.distance.validate()?;
    opts.mode.validate()?;
    let stats = RosterStats::compute(roster, &opts.distance);
    let by_id = roster.by_id();
    let blocks = block(roster);
    let pairings: Vec<Pairing> = blocks
        .par_iter()
        .map(|b| {
            let members: Vec<&Student> = b.ids.iter().map(|id| by_id[id.as_str()]).collect();
            optimal_pairing(&members, |x, y| {
                covariate_distance(x, y, &opts.distance, &stats)
            })
        })
        .collect();
    let mut pairs = Vec::new();
    let mut leftovers = Vec::new();
    let mut total = 0.0;
    for p in pairings {
        total += p.cost;
        pairs.extend(p.pairs);
        leftovers.extend(p.leftover);
    }
    let assignment = assign_arms(&pairs, &leftovers, seed, opts.mode)?;
    let design = Design {
        seed,
        mode: opts.mode,
        first_unit: opts.first_unit,
        blocks: blocks.into_iter().map(|b| b.ids).collect(),
        pairs,
        leftovers,
        assignment,
    };
    Ok((
        design,
        DesignSummary {
            total_distance: total,
            warnings: stats.warnings,
        },
    ))
}

/// Strawman: the whole term is shuffled and consecutive students are paired
/// with complementary patterns, ignoring covariates.
pub fn random_pairing_design(roster: &Roster, opts: &DesignOptions, seed: u64) -> Result<Design> {
    check_roster(roster)?;
    opts.mode.validate()?;
    let mut by_term: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for s in &roster.students {
        by_term
            .entry(s.term.as_str())
            .or_default()
            .push(s.id.clone());
    }
    let mut rng = rng::seeded(rng::derive_seed(seed, 0x5eed));
    let mut pairs = Vec::new();
    let mut leftovers = Vec::new();
    let mut blocks = Vec::new();
    for (_, mut ids) in by_term {
        ids.sort();
        blocks.push(ids.clone());
        ids.shuffle(&mut rng);
        let mut chunks = ids.chunks_exact(2);
        for c in &mut chunks {
            pairs.push((c[0].clone(), c[1].clone()));
        }
        leftovers.extend(chunks.remainder().iter().cloned());
    }
    let assignment = assign_arms(&pairs, &leftovers, seed, opts.mode)?;
    Ok(Design {
        seed,
        mode: opts.mode,
        first_unit: opts.first_unit,
        blocks,
        pairs,
        leftovers,
        assignment,
    })
}

/// Ids that appear in a design's pairs, for quick membership checks.
pub fn paired_ids(design: &Design) -> BTreeSet<&str> {
    design
        .pairs
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassYear;

    fn st(id: &str, g: u8, u: u8, a: u8, baseline: f64) -> Student {
        Student {
            id: id.into(),
            gender: g,
            urm: u,
            ap_stats: a,
            math_adv: 0,
            class_year: ClassYear::Sophomore,
            baseline,
            term: "autumn".into(),
        }
    }

    #[test]
    fn identical_covariates_form_one_block() {
        let r = Roster::new(
            (0..6)
                .map(|i| st(&format!("s{i}"), 1, 0, 1, 50.0))
                .collect(),
        );
        assert_eq!(block(&r).len(), 1);
    }

    #[test]
    fn all_tuples_give_singletons() {
        let mut v = Vec::new();
        for g in 0..2 {
            for u in 0..2 {
                for a in 0..2 {
                    v.push(st(&format!("s{g}{u}{a}"), g, u, a, 50.0));
                }
            }
        }
        let b = block(&Roster::new(v));
        assert_eq!(b.len(), 8);
        assert!(b.iter().all(|x| x.ids.len() == 1));
    }

    #[test]
    fn two_students_are_paired() {
        let a = st("a", 0, 0, 0, 1.0);
        let b = st("b", 0, 0, 0, 2.0);
        let p = optimal_pairing(&[&b, &a], |x, y| (x.baseline - y.baseline).abs());
        assert_eq!(p.pairs, vec![("a".to_string(), "b".to_string())]);
        assert_eq!(p.leftover, None);
    }

    #[test]
    fn odd_block_drops_the_outlier() {
        let xs = [0.0, 1.0, 10.0, 11.0, 50.0];
        let ss: Vec<Student> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| st(&format!("s{i}"), 0, 0, 0, x))
            .collect();
        let refs: Vec<&Student> = ss.iter().collect();
        let p = optimal_pairing(&refs, |x, y| (x.baseline - y.baseline).abs());
        assert_eq!(p.leftover.as_deref(), Some("s4"));
        assert!((p.cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_tie_goes_to_smallest_id() {
        let ss: Vec<Student> = (0..3).map(|i| st(&format!("s{i}"), 0, 0, 0, 5.0)).collect();
        let refs: Vec<&Student> = ss.iter().rev().collect();
        let p = optimal_pairing(&refs, |_, _| 1.0);
        assert_eq!(p.leftover.as_deref(), Some("s0"));
    }

    #[test]
    fn single_pair_is_complementary_for_any_seed() {
        let pairs = vec![("a".to_string(), "b".to_string())];
        for seed in 0..50 {
            let asg = assign_arms(&pairs, &[], seed, PatternMode::FourUnit).unwrap();
            assert_eq!(asg["a"].complement(), asg["b"]);
        }
    }

    #[test]
    fn same_seed_same_design() {
        let r = Roster::new(
            (0..20)
                .map(|i| st(&format!("s{i:02}"), i % 2, 0, 0, (i * 7 % 13) as f64))
                .collect(),
        );
        let o = DesignOptions::default();
        let (a, _) = build_design(&r, &o, 99).unwrap();
        let (b, _) = build_design(&r, &o, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.validate(&r).is_empty());
    }

    #[test]
    fn roster_order_does_not_matter() {
        let students: Vec<Student> = (0..15)
            .map(|i| st(&format!("s{i:02}"), i % 2, 0, 0, (i * 7 % 13) as f64))
            .collect();
        let mut rev = students.clone();
        rev.reverse();
        let o = DesignOptions::default();
        let (a, _) = build_design(&Roster::new(students), &o, 3).unwrap();
        let (b, _) = build_design(&Roster::new(rev), &o, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_pairing_is_valid() {
        let r = Roster::new(
            (0..11)
                .map(|i| st(&format!("s{i:02}"), i % 2, 0, 0, i as f64))
                .collect(),
        );
        let d = random_pairing_design(&r, &DesignOptions::default(), 5).unwrap();
        assert!(d.validate(&r).is_empty());
        assert_eq!(d.pairs.len(), 5);
        assert_eq!(d.leftovers.len(), 1);
    }
}
