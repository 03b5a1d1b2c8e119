//! Synthetic crossover studies drawn from the additive score model
//! `Y_ij = sigma_j (theta_i + tau_i W_ij + eps_ij) + mu_j`.
//!
//! A simulated dataset has the same shape as ingested data (roster, design,
//! score table, compliance records), plus a [`Truth`] record holding every
//! latent draw.

pub mod power;

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use power::{power_curve, PowerDesign, PowerRow};

use crate::design::{build_design, DesignOptions};
use crate::error::{Error, Result};
use crate::model::{
    ClassYear, ComplianceRecord, Covariate, Design, ExamKind, ExamMeta, PatternMode, Roster,
    ScoreTable, Student,
};
use crate::rng::{self, Rng};

pub const TERM_NAMES: [&str; 2] = ["autumn", "winter"];

/// Roster marginals used when drawing covariates.
pub const P_MALE: f64 = 0.38;
pub const P_URM: f64 = 0.27;
pub const P_AP_STATS: f64 = 0.19;
pub const P_MATH_ADV: f64 = 0.36;
pub const CLASS_YEAR_WEIGHTS: [f64; 5] = [0.17, 0.23, 0.27, 0.30, 0.025];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    #[default]
    Normal,
    /// Centered uniform with the requested variance.
    Uniform,
}

impl Noise {
    /// Mean-zero draw with variance `var`.
    pub fn draw(self, rng: &mut Rng, var: f64) -> f64 {
        if var <= 0.0 {
            return 0.0;
        }
        match self {
            Noise::Normal => {
                let x: f64 = StandardNormal.sample(rng);
                var.sqrt() * x
            }
            Noise::Uniform => {
                let a = (3.0 * var).sqrt();
                rng.random_range(-a..=a)
            }
        }
    }
}

fn default_units() -> usize {
    4
}
fn default_theta_var() -> f64 {
    0.7
}
fn default_mu() -> Vec<f64> {
    vec![70.0; 4]
}
fn default_sigma() -> Vec<f64> {
    vec![15.0, 18.0, 22.0, 25.0]
}
fn default_terms() -> usize {
    1
}
fn default_baseline_mu() -> f64 {
    70.0
}
fn default_baseline_sigma() -> f64 {
    15.0
}
fn default_assigned() -> u32 {
    12
}
fn default_threshold() -> u32 {
    10
}
fn default_full_rate() -> f64 {
    0.9
}

/// Generative settings for one simulated study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    /// Total across terms.
    pub n_students: usize,
    #[serde(default = "default_units")]
    pub m_units: usize,
    #[serde(default)]
    pub tau: f64,
    /// Share of score variance due to the student; noise gets the rest.
    #[serde(default = "default_theta_var")]
    pub theta_var: f64,
    #[serde(default)]
    pub noise: Noise,
    /// Quiz means, then final-section means when those are enabled.
    #[serde(default = "default_mu")]
    pub exam_mu: Vec<f64>,
    #[serde(default = "default_sigma")]
    pub exam_sigma: Vec<f64>,
    /// Adds one final-exam section per study unit.
    #[serde(default)]
    pub final_sections: bool,
    #[serde(default)]
    pub noncompliance_rate: f64,
    /// Added (in z units) to every exam of the unit after a treated unit.
    #[serde(default)]
    pub carryover_delta: f64,
    /// Extra effect for students with the given 0/1 covariate set.
    #[serde(default)]
    pub tau_by_covariate: BTreeMap<Covariate, f64>,
    /// Ability shift for students with the given 0/1 covariate set. The
    /// residual ability variance shrinks so that Var(theta) stays `theta_var`.
    #[serde(default)]
    pub covariate_gaps: BTreeMap<Covariate, f64>,
    #[serde(default = "default_terms")]
    pub terms: usize,
    /// Extra effect per term, indexed like the term names.
    #[serde(default)]
    pub tau_term_offsets: Vec<f64>,
    #[serde(default = "default_baseline_mu")]
    pub baseline_mu: f64,
    #[serde(default = "default_baseline_sigma")]
    pub baseline_sigma: f64,
    #[serde(default = "default_assigned")]
    pub assigned_questions: u32,
    #[serde(default = "default_threshold")]
    pub compliance_threshold: u32,
    /// Share of compliers who complete every assigned question.
    #[serde(default = "default_full_rate")]
    pub full_completion_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SimScenario {
    fn default() -> Self {
        SimScenario {
            n_students: 300,
            m_units: default_units(),
            tau: 0.0,
            theta_var: default_theta_var(),
            noise: Noise::Normal,
            exam_mu: default_mu(),
            exam_sigma: default_sigma(),
            final_sections: false,
            noncompliance_rate: 0.0,
            carryover_delta: 0.0,
            tau_by_covariate: BTreeMap::new(),
            covariate_gaps: BTreeMap::new(),
            terms: default_terms(),
            tau_term_offsets: Vec::new(),
            baseline_mu: default_baseline_mu(),
            baseline_sigma: default_baseline_sigma(),
            assigned_questions: default_assigned(),
            compliance_threshold: default_threshold(),
            full_completion_rate: default_full_rate(),
            seed: 0,
        }
    }
}

fn marginal(c: Covariate) -> Option<f64> {
    match c {
        Covariate::Gender => Some(P_MALE),
        Covariate::Urm => Some(P_URM),
        Covariate::ApStats => Some(P_AP_STATS),
        Covariate::MathAdv => Some(P_MATH_ADV),
        Covariate::Upperclass => Some(
            CLASS_YEAR_WEIGHTS[2..].iter().sum::<f64>() / CLASS_YEAR_WEIGHTS.iter().sum::<f64>(),
        ),
        _ => None,
    }
}

impl SimScenario {
    pub fn eps_var(&self) -> f64 {
        1.0 - self.theta_var
    }

    pub fn pattern_mode(&self) -> PatternMode {
        if self.m_units == 4 {
            PatternMode::FourUnit
        } else {
            PatternMode::General {
                units: self.m_units,
            }
        }
    }

    /// Number of exams per term.
    pub fn exams_per_term(&self) -> usize {
        if self.final_sections {
            2 * self.m_units
        } else {
            self.m_units
        }
    }

    /// Ability variance left after the planted covariate gaps.
    fn residual_theta_var(&self) -> f64 {
        self.theta_var
            - self
                .covariate_gaps
                .iter()
                .map(|(c, g)| {
                    let p = marginal(*c).unwrap_or(0.0);
                    g * g * p * (1.0 - p)
                })
                .sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        self.pattern_mode().validate()?;
        if self.n_students < 2 {
            return bad(format!(
                "n_students must be at least 2, got {}",
                self.n_students
            ));
        }
        if !(0.0..=1.0).contains(&self.theta_var) {
            return bad(format!(
                "theta_var must lie in [0, 1], got {}",
                self.theta_var
            ));
        }
        let k = self.exams_per_term();
        if self.exam_mu.len() != k || self.exam_sigma.len() != k {
            return bad(format!(
                "exam_mu and exam_sigma need {k} entries, got {} and {}",
                self.exam_mu.len(),
                self.exam_sigma.len()
            ));
        }
        if self.exam_sigma.iter().any(|s| !(*s > 0.0 && s.is_finite()))
            || self.exam_mu.iter().any(|m| !m.is_finite())
        {
            return bad("exam means must be finite and exam sigmas positive".into());
        }
        if !(1..=2).contains(&self.terms) {
            return bad(format!("terms must be 1 or 2, got {}", self.terms));
        }
        if self.tau_term_offsets.len() > self.terms {
            return bad("more term offsets than terms".into());
        }
        if !(0.0..=1.0).contains(&self.noncompliance_rate)
            || !(0.0..=1.0).contains(&self.full_completion_rate)
        {
            return bad("rates must lie in [0, 1]".into());
        }
        if self.compliance_threshold == 0 || self.compliance_threshold > self.assigned_questions {
            return bad("compliance threshold must lie in 1..=assigned_questions".into());
        }
        if !(self.baseline_sigma > 0.0) {
            return bad("baseline_sigma must be positive".into());
        }
        for c in self
            .tau_by_covariate
            .keys()
            .chain(self.covariate_gaps.keys())
        {
            if marginal(*c).is_none() {
                return bad(format!("{c} is not a 0/1 covariate"));
            }
        }
        if self.residual_theta_var() < 0.0 {
            return bad("covariate gaps explain more than theta_var".into());
        }
        Ok(())
    }
}

/// Every latent draw behind a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truth {
    pub theta: BTreeMap<String, f64>,
    /// Individual effect, zero for noncompliers.
    pub tau_i: BTreeMap<String, f64>,
    pub complier: BTreeMap<String, bool>,
    /// Noise for every (student, exam) including the baseline quiz.
    pub eps: BTreeMap<(String, String), f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub roster: Roster,
    pub design: Design,
    pub scores: ScoreTable,
    pub compliance: Vec<ComplianceRecord>,
    pub truth: Truth,
}

fn bernoulli(rng: &mut Rng, p: f64) -> u8 {
    (rng.random::<f64>() < p) as u8
}

fn class_year(rng: &mut Rng) -> ClassYear {
    let total: f64 = CLASS_YEAR_WEIGHTS.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in CLASS_YEAR_WEIGHTS.iter().enumerate() {
        if u < *w {
            return ClassYear::ALL[k];
        }
        u -= w;
    }
    ClassYear::ALL[4]
}

/// Exam maximum: eight SDs above the mean, so the upper cap is never hit.
pub fn exam_points(mu: f64, sigma: f64) -> f64 {
    (mu + 8.0 * sigma).ceil()
}

pub fn exam_id(kind: ExamKind, unit: u32, term: &str) -> String {
    match kind {
        ExamKind::Quiz => format!("quiz{unit}_{term}"),
        ExamKind::FinalSection => format!("final{unit}_{term}"),
    }
}

/// Exam metadata for one term: the baseline quiz (unit 1), then the study
/// quizzes and, when enabled, final sections.
pub fn exam_metas(sc: &SimScenario, term: &str, first_unit: u32) -> Vec<ExamMeta> {
    let mut out = vec![ExamMeta {
        exam_id: exam_id(ExamKind::Quiz, first_unit - 1, term),
        unit: first_unit - 1,
        term: term.into(),
        kind: ExamKind::Quiz,
        points: exam_points(sc.baseline_mu, sc.baseline_sigma),
    }];
    for k in 0..sc.exams_per_term() {
        let kind = if k < sc.m_units {
            ExamKind::Quiz
        } else {
            ExamKind::FinalSection
        };
        let unit = first_unit + (k % sc.m_units) as u32;
        out.push(ExamMeta {
            exam_id: exam_id(kind, unit, term),
            unit,
            term: term.into(),
            kind,
            points: exam_points(sc.exam_mu[k], sc.exam_sigma[k]),
        });
    }
    out
}

struct Latent {
    theta: f64,
    eps0: f64,
}

/// Draws a full dataset. Deterministic in the scenario (including its seed).
pub fn simulate(sc: &SimScenario) -> Result<SimOutput> {
    sc.validate()?;
    let opts = DesignOptions {
        mode: sc.pattern_mode(),
        ..DesignOptions::default()
    };
    let first_unit = opts.first_unit;
    let mut rr = rng::stream(sc.seed, 0);
    let resid_var = sc.residual_theta_var();

    let per_term = sc.n_students / sc.terms;
    let mut students = Vec::with_capacity(sc.n_students);
    let mut latent = Vec::with_capacity(sc.n_students);
    for i in 0..sc.n_students {
        let t = (i / per_term.max(1)).min(sc.terms - 1);
        let mut s = Student {
            id: format!("s{:04}", i + 1),
            gender: bernoulli(&mut rr, P_MALE),
            urm: bernoulli(&mut rr, P_URM),
            ap_stats: bernoulli(&mut rr, P_AP_STATS),
            math_adv: bernoulli(&mut rr, P_MATH_ADV),
            class_year: class_year(&mut rr),
            baseline: 0.0,
            term: TERM_NAMES[t].into(),
        };
        let shift: f64 = sc
            .covariate_gaps
            .iter()
            .map(|(c, g)| g * (s.covariate(*c) - marginal(*c).unwrap_or(0.0)))
            .sum();
        let theta = shift + sc.noise.draw(&mut rr, resid_var);
        let eps0 = sc.noise.draw(&mut rr, sc.eps_var());
        s.baseline = (sc.baseline_mu + sc.baseline_sigma * (theta + eps0)).max(0.0);
        students.push(s);
        latent.push(Latent { theta, eps0 });
    }
    let roster = Roster::new(students);
    let (design, _) = build_design(&roster, &opts, rng::derive_seed(sc.seed, 1))?;

    let mut rs = rng::stream(sc.seed, 2);
    let mut truth = Truth {
        theta: BTreeMap::new(),
        tau_i: BTreeMap::new(),
        complier: BTreeMap::new(),
        eps: BTreeMap::new(),
    };
    let mut compliance = Vec::with_capacity(roster.len());
    let mut scores = BTreeMap::new();
    let mut metas_by_term: BTreeMap<String, Vec<ExamMeta>> = BTreeMap::new();
    for t in TERM_NAMES.iter().take(sc.terms) {
        metas_by_term.insert(t.to_string(), exam_metas(sc, t, first_unit));
    }
    for (s, lat) in roster.students.iter().zip(&latent) {
        let complier = rs.random::<f64>() >= sc.noncompliance_rate;
        let completed = if complier {
            let t = sc.compliance_threshold;
            if t == sc.assigned_questions || rs.random::<f64>() < sc.full_completion_rate {
                sc.assigned_questions
            } else {
                rs.random_range(t..sc.assigned_questions)
            }
        } else {
            rs.random_range(0..sc.compliance_threshold)
        };
        compliance.push(ComplianceRecord {
            student_id: s.id.clone(),
            completed,
            assigned: sc.assigned_questions,
        });
        let t_index = TERM_NAMES.iter().position(|t| *t == s.term).unwrap_or(0);
        let tau_i = if complier {
            sc.tau
                + sc.tau_term_offsets.get(t_index).copied().unwrap_or(0.0)
                + sc.tau_by_covariate
                    .iter()
                    .map(|(c, v)| v * s.covariate(*c))
                    .sum::<f64>()
        } else {
            0.0
        };
        let metas = &metas_by_term[&s.term];
        scores.insert((s.id.clone(), metas[0].exam_id.clone()), s.baseline);
        truth
            .eps
            .insert((s.id.clone(), metas[0].exam_id.clone()), lat.eps0);
        for (k, m) in metas.iter().enumerate().skip(1) {
            let w = design.arm(&s.id, m.unit).expect("assigned").is_treated();
            let prev_treated = m.unit > first_unit
                && design
                    .arm(&s.id, m.unit - 1)
                    .expect("assigned")
                    .is_treated();
            let eps = sc.noise.draw(&mut rs, sc.eps_var());
            let z = lat.theta
                + if w { tau_i } else { 0.0 }
                + if prev_treated {
                    sc.carryover_delta
                } else {
                    0.0
                }
                + eps;
            let y = (sc.exam_mu[k - 1] + sc.exam_sigma[k - 1] * z).clamp(0.0, m.points);
            scores.insert((s.id.clone(), m.exam_id.clone()), y);
            truth.eps.insert((s.id.clone(), m.exam_id.clone()), eps);
        }
        truth.theta.insert(s.id.clone(), lat.theta);
        truth.tau_i.insert(s.id.clone(), tau_i);
        truth.complier.insert(s.id.clone(), complier);
    }
    let exams: Vec<ExamMeta> = metas_by_term.into_values().flatten().collect();
    let scores = ScoreTable::new(exams, scores)?;
    Ok(SimOutput {
        roster,
        design,
        scores,
        compliance,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{standardize, student_diffs, ExamFilter};

    #[test]
    fn noiseless_null_scores_are_deterministic() {
        let sc = SimScenario {
            n_students: 60,
            theta_var: 1.0,
            seed: 4,
            ..SimScenario::default()
        };
        let out = simulate(&sc).unwrap();
        for ((sid, eid), y) in out.scores.scores() {
            let m = out.scores.exam(eid).unwrap();
            if m.unit < 2 {
                continue;
            }
            let k = (m.unit - 2) as usize;
            let expected = sc.exam_mu[k] + sc.exam_sigma[k] * out.truth.theta[sid];
            assert!((y - expected).abs() < 1e-9);
        }
        // Without noise Z_ij = (theta_i - m_j) / s_j with m_j, s_j the
        // control-group moments of theta on exam j, so D_i is fixed by theta.
        let z = standardize(&out.scores, &out.design).unwrap();
        let d = student_diffs(&z, &out.design, ExamFilter::All);
        assert_eq!(d.diffs.len(), 60);
        let mut moments = BTreeMap::new();
        for (eid, meta) in &z.exams {
            let th: Vec<f64> = out
                .truth
                .theta
                .iter()
                .filter(|(sid, _)| !out.design.arm(sid, meta.unit).unwrap().is_treated())
                .map(|(_, t)| *t)
                .collect();
            moments.insert(eid.clone(), crate::stats::mean_sd(&th).unwrap());
        }
        for sd in &d.diffs {
            let (mut t, mut c) = (Vec::new(), Vec::new());
            for (eid, meta) in &z.exams {
                let (m, s) = moments[eid];
                let zz = (out.truth.theta[&sd.student_id] - m) / s;
                if out
                    .design
                    .arm(&sd.student_id, meta.unit)
                    .unwrap()
                    .is_treated()
                {
                    t.push(zz);
                } else {
                    c.push(zz);
                }
            }
            let expected =
                t.iter().sum::<f64>() / t.len() as f64 - c.iter().sum::<f64>() / c.len() as f64;
            assert!((sd.d - expected).abs() < 1e-9);
        }
        let mean = d.diffs.iter().map(|x| x.d).sum::<f64>() / 60.0;
        assert!(mean.abs() < 0.05);
    }

    #[test]
    fn same_seed_same_dataset() {
        let sc = SimScenario {
            n_students: 40,
            tau: 0.2,
            terms: 2,
            final_sections: true,
            exam_mu: vec![70.0; 8],
            exam_sigma: vec![15.0; 8],
            noncompliance_rate: 0.2,
            seed: 11,
            ..SimScenario::default()
        };
        let a = simulate(&sc).unwrap();
        let b = simulate(&sc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.scores.exams().len(), 18);
        assert!(a.design.validate(&a.roster).is_empty());
    }

    #[test]
    fn vector_lengths_checked() {
        let sc = SimScenario {
            exam_mu: vec![70.0; 3],
            ..SimScenario::default()
        };
        assert!(simulate(&sc).is_err());
        let sc = SimScenario {
            covariate_gaps: BTreeMap::from([(Covariate::Baseline, 0.5)]),
            ..SimScenario::default()
        };
        assert!(sc.validate().is_err());
    }

    #[test]
    fn noncompliers_fall_below_threshold() {
        let sc = SimScenario {
            n_students: 200,
            tau: 0.3,
            noncompliance_rate: 0.3,
            seed: 2,
            ..SimScenario::default()
        };
        let out = simulate(&sc).unwrap();
        for r in &out.compliance {
            let c = out.truth.complier[&r.student_id];
            assert_eq!(c, r.completed >= sc.compliance_threshold);
            if !c {
                assert_eq!(out.truth.tau_i[&r.student_id], 0.0);
            }
        }
    }

    #[test]
    fn scenario_toml_defaults() {
        let sc: SimScenario = toml::from_str("n_students = 50\ntau = 0.1\n").unwrap();
        assert_eq!(sc.m_units, 4);
        assert_eq!(sc.theta_var, 0.7);
        assert!(sc.validate().is_ok());
    }
}
