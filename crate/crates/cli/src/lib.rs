//! Subcommands of the `crossover` binary. Every command reads its inputs,
//! writes comma-separated outputs plus a `manifest.json` into `--out-dir`,
//! and is a pure function of its inputs, flags and seed.

mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crossover_core::analysis::diagnostics::{carryover_test, heterogeneity, quarter_effect_test};
use crossover_core::analysis::permutation::permutation_test;
use crossover_core::analysis::tables::{effect_table, score_distribution};
use crossover_core::analysis::{
    compliance_filter, compliance_sensitivity, effect_estimate, standardize, student_diffs,
    ExamFilter, StudentDiff,
};
use crossover_core::design::balance::balance_report;
use crossover_core::design::plot::pairing_plot_data;
use crossover_core::design::{build_design, DesignOptions, DistanceConfig};
use crossover_core::io;
use crossover_core::rng::derive_seed;
use crossover_core::simulator::power::{power_curve, PowerDesign};
use crossover_core::simulator::{simulate, SimScenario};
use crossover_core::{
    ComplianceRecord, Covariate, Design, EffectReport, ExamKind, PatternMode, ScoreTable,
};

pub use manifest::{sha256_file, RunManifest};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const DEFAULT_THRESHOLD: u32 = 10;

#[derive(Debug, Parser)]
#[command(
    name = "crossover",
    version,
    about = "Matched-pairs crossover trials: design, analysis, simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Block, match and randomize a roster.
    Design(DesignArgs),
    /// Estimate the standardized treatment effect.
    Analyze(AnalyzeArgs),
    /// Term, carryover, heterogeneity and compliance diagnostics.
    Diagnose(DiagnoseArgs),
    /// Generate a synthetic dataset from a scenario file.
    Simulate(SimulateArgs),
    /// Monte Carlo power over a grid of effect sizes and sample sizes.
    Power(PowerArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    #[arg(long)]
    pub roster: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, env = "CROSSOVER_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of study units; 4 uses the four classic patterns, any other
    /// even count uses every balanced pattern.
    #[arg(long, default_value_t = 4)]
    pub units: usize,
    /// Course unit of the first study unit.
    #[arg(long, default_value_t = 2)]
    pub first_unit: u32,
    /// Z-scored matching covariates.
    #[arg(long, value_delimiter = ',', default_values = ["baseline", "class_year"])]
    pub numeric: Vec<Covariate>,
    /// 0/1 matching covariates.
    #[arg(long, value_delimiter = ',', default_values = ["math_adv"])]
    pub categorical: Vec<Covariate>,
    /// Field weights, numeric fields first.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub exams: PathBuf,
    /// Restricts the estimate to students completing at least `threshold`
    /// assigned questions.
    #[arg(long)]
    pub compliance: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u32,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Adds baseline achievement-gap rows to the effect table.
    #[arg(long)]
    pub roster: Option<PathBuf>,
    /// 0 skips the permutation test.
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, env = "CROSSOVER_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub roster: PathBuf,
    /// Compliance thresholds for the sensitivity table.
    #[arg(long, value_delimiter = ',', default_values = ["8", "9", "10", "11", "12"])]
    pub thresholds: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, env = "CROSSOVER_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerDesignArg {
    Crossover,
    Parallel,
}

#[derive(Debug, Args, Serialize)]
pub struct PowerArgs {
    /// Base scenario; built-in defaults when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',', default_values = ["crossover"])]
    pub designs: Vec<PowerDesignArg>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, env = "CROSSOVER_SEED")]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(a) => cmd_design(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Power(a) => cmd_power(&a),
    }
}

/// Tracks which files a command has written.
struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.path(name);
        io::write_rows(rows, &p).with_context(|| format!("writing {}", p.display()))
    }

    fn finish(self, manifest: RunManifest) -> Result<()> {
        manifest.finish(&self.dir, &self.written)
    }
}

#[derive(Serialize)]
struct PointRow {
    student_id: String,
    pc1: f64,
    pc2: Option<f64>,
    pc3: Option<f64>,
}

#[derive(Serialize)]
struct EdgeRow<'a> {
    pairing: &'static str,
    a: &'a str,
    b: &'a str,
    length: f64,
}

#[derive(Serialize)]
struct DesignRow<'a> {
    student_id: &'a str,
    pattern: String,
    partner: Option<&'a str>,
}

pub fn cmd_design(a: &DesignArgs) -> Result<()> {
    let roster = io::read_roster(&a.roster)?;
    let mode = if a.units == 4 {
        PatternMode::FourUnit
    } else {
        PatternMode::General { units: a.units }
    };
    let opts = DesignOptions {
        mode,
        first_unit: a.first_unit,
        distance: DistanceConfig {
            numeric_fields: a.numeric.clone(),
            categorical_fields: a.categorical.clone(),
            weights: a.weights.clone(),
        },
    };
    let (design, summary) = build_design(&roster, &opts, a.seed)?;
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    log::info!(
        "{} pairs, {} leftovers, total distance {:.4}",
        design.pairs.len(),
        design.leftovers.len(),
        summary.total_distance
    );

    let mut out = OutDir::create(&a.out_dir)?;
    io::write_design(&design, &out.path("design.json"))?;

    let partner: BTreeMap<&str, &str> = design
        .pairs
        .iter()
        .flat_map(|(x, y)| [(x.as_str(), y.as_str()), (y.as_str(), x.as_str())])
        .collect();
    let assignment: Vec<DesignRow> = design
        .assignment
        .iter()
        .map(|(id, p)| DesignRow {
            student_id: id,
            pattern: p.to_string(),
            partner: partner.get(id.as_str()).copied(),
        })
        .collect();
    out.rows("assignment.csv", &assignment)?;

    match balance_report(&design, &roster) {
        Ok(rows) => out.rows("balance.csv", &rows)?,
        Err(e) => log::warn!("balance report skipped: {e}"),
    }

    let fig = pairing_plot_data(&design, &roster, &opts.distance)?;
    let points: Vec<PointRow> = fig
        .points
        .iter()
        .map(|(id, v)| PointRow {
            student_id: id.clone(),
            pc1: v[0],
            pc2: v.get(1).copied(),
            pc3: v.get(2).copied(),
        })
        .collect();
    out.rows("pairing_points.csv", &points)?;
    let edges: Vec<EdgeRow> = fig
        .matched_edges
        .iter()
        .map(|e| ("matched", e))
        .chain(fig.random_edges.iter().map(|e| ("random", e)))
        .map(|(pairing, e)| EdgeRow {
            pairing,
            a: &e.a,
            b: &e.b,
            length: e.length,
        })
        .collect();
    out.rows("pairing_edges.csv", &edges)?;

    let mut m = RunManifest::new("design", Some(a.seed), a)?;
    m.input(&a.roster)?;
    out.finish(m)
}

struct Loaded {
    design: Design,
    scores: ScoreTable,
    compliance: Option<Vec<ComplianceRecord>>,
}

fn load(d: &DataArgs, m: &mut RunManifest) -> Result<Loaded> {
    let design = io::read_design(&d.design)?;
    let scores = io::read_scores(&d.scores, &d.exams)?;
    let compliance = d
        .compliance
        .as_deref()
        .map(io::read_compliance)
        .transpose()?;
    m.input(&d.design)?;
    m.input(&d.scores)?;
    m.input(&d.exams)?;
    if let Some(p) = &d.compliance {
        m.input(p)?;
    }
    Ok(Loaded {
        design,
        scores,
        compliance,
    })
}

const OUTCOMES: [(&str, ExamKind); 2] = [
    ("short_term", ExamKind::Quiz),
    ("long_term", ExamKind::FinalSection),
];

#[derive(Serialize)]
struct EffectRow<'a> {
    outcome: &'a str,
    column: &'a str,
    d_bar: f64,
    se: f64,
    n_used: usize,
    t_stat: f64,
    df: usize,
    p_asymptotic: f64,
    p_one_sided: f64,
    p_permutation: Option<f64>,
    n_permutations: usize,
    ci_low: f64,
    ci_high: f64,
}

fn effect_row<'a>(
    outcome: &'a str,
    column: &'a str,
    r: &EffectReport,
    level: f64,
) -> Result<EffectRow<'a>> {
    let (lo, hi) = r.confidence_interval(level)?;
    Ok(EffectRow {
        outcome,
        column,
        d_bar: r.d_bar,
        se: r.se,
        n_used: r.n_used,
        t_stat: r.t_stat,
        df: r.df,
        p_asymptotic: r.p_asymptotic,
        p_one_sided: r.p_one_sided(),
        p_permutation: r.p_permutation,
        n_permutations: r.n_permutations,
        ci_low: lo,
        ci_high: hi,
    })
}

#[derive(Serialize)]
struct PermutationRow<'a> {
    outcome: &'a str,
    replicate: usize,
    d_bar: f64,
}

#[derive(Serialize)]
struct ExclusionRow<'a> {
    outcome: &'a str,
    student_id: &'a str,
    reason: &'a str,
}

/// Differences per outcome, restricted to compliers when records are given.
/// Outcomes with no exams of their kind are omitted.
fn outcome_diffs(
    l: &Loaded,
    threshold: u32,
) -> Result<Vec<(&'static str, Vec<StudentDiff>, Vec<(String, String)>)>> {
    let z = standardize(&l.scores, &l.design)?;
    let mut out = Vec::new();
    for (name, kind) in OUTCOMES {
        if !z.exams.values().any(|e| e.kind == kind) {
            continue;
        }
        let set = student_diffs(&z, &l.design, ExamFilter::Kind(kind));
        let mut excluded: Vec<(String, String)> = set
            .excluded
            .iter()
            .map(|e| (e.student_id.clone(), e.reason.clone()))
            .collect();
        let diffs = match &l.compliance {
            Some(rec) => {
                let (yes, no) = compliance_filter(&set.diffs, rec, threshold)?;
                excluded.extend(no.into_iter().map(|d| {
                    (
                        d.student_id,
                        format!("completed fewer than {threshold} assigned questions"),
                    )
                }));
                yes
            }
            None => set.diffs,
        };
        out.push((name, diffs, excluded));
    }
    Ok(out)
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        bail!("--level must lie in (0, 1), got {}", a.level);
    }
    let mut m = RunManifest::new("analyze", Some(a.seed), a)?;
    let l = load(&a.data, &mut m)?;
    let roster = match &a.roster {
        Some(p) => {
            m.input(p)?;
            Some(io::read_roster(p)?)
        }
        None => None,
    };
    let outcomes = outcome_diffs(&l, a.data.threshold)?;

    let mut effects = Vec::new();
    let mut perm_rows = Vec::new();
    let mut excl_rows = Vec::new();
    for (k, (name, diffs, excluded)) in outcomes.iter().enumerate() {
        let mut rep = effect_estimate(diffs).with_context(|| format!("{name} estimate"))?;
        if a.permutations > 0 {
            let p = permutation_test(
                diffs,
                &l.design,
                a.permutations,
                derive_seed(a.seed, k as u64),
            )?;
            for w in &p.warnings {
                log::warn!("{name}: {w}");
            }
            rep.p_permutation = Some(p.p_value);
            rep.n_permutations = a.permutations;
            perm_rows.extend(
                p.distribution
                    .iter()
                    .enumerate()
                    .map(|(r, &d)| PermutationRow {
                        outcome: name,
                        replicate: r + 1,
                        d_bar: d,
                    }),
            );
        }
        effects.push(effect_row(name, "overall", &rep, a.level)?);
        let mut terms: BTreeMap<&str, Vec<StudentDiff>> = BTreeMap::new();
        for d in diffs {
            terms.entry(d.term.as_str()).or_default().push(d.clone());
        }
        if terms.len() > 1 {
            for (t, ds) in &terms {
                match effect_estimate(ds) {
                    Ok(r) => effects.push(effect_row(name, t, &r, a.level)?),
                    Err(e) => log::warn!("{name} {t}: {e}"),
                }
            }
        }
        excl_rows.extend(excluded.iter().map(|(s, r)| ExclusionRow {
            outcome: name,
            student_id: s,
            reason: r,
        }));
    }

    let mut out = OutDir::create(&a.data.out_dir)?;
    out.rows("effect.csv", &effects)?;
    if a.permutations > 0 {
        out.rows("permutation_distribution.csv", &perm_rows)?;
    }
    out.rows("exclusions.csv", &excl_rows)?;
    if let Some(r) = &roster {
        let short = outcomes
            .iter()
            .find(|o| o.0 == "short_term")
            .map(|o| o.1.as_slice())
            .unwrap_or(&[]);
        let long = outcomes
            .iter()
            .find(|o| o.0 == "long_term")
            .map(|o| o.1.as_slice());
        out.rows("effect_table.csv", &effect_table(short, long, r))?;
    }
    let z = standardize(&l.scores, &l.design)?;
    out.rows(
        "score_distribution.csv",
        &score_distribution(&l.scores, &l.design, &z),
    )?;
    out.finish(m)
}

#[derive(Serialize)]
struct QuarterRow<'a> {
    outcome: &'a str,
    first_term: String,
    second_term: String,
    mean_diff: f64,
    se: f64,
    t: f64,
    df: f64,
    p: f64,
}

#[derive(Serialize)]
struct TestRow {
    test: String,
    statistic: f64,
    df1: usize,
    df2: usize,
    p: f64,
}

#[derive(Serialize)]
struct CarryoverPoint<'a> {
    student_id: &'a str,
    pattern: &'a str,
    d: f64,
}

#[derive(Serialize)]
struct LoessRow {
    baseline: f64,
    d: f64,
    fit: f64,
}

#[derive(Serialize)]
struct ComplianceOut {
    threshold: u32,
    compliance_rate: f64,
    n_compliers: usize,
    n_noncompliers: usize,
    short_term_d: Option<f64>,
    short_term_se: Option<f64>,
    short_term_p: Option<f64>,
    long_term_d: Option<f64>,
    long_term_se: Option<f64>,
    long_term_p: Option<f64>,
    noncomplier_d: Option<f64>,
    noncomplier_se: Option<f64>,
    noncomplier_t: Option<f64>,
    noncomplier_p: Option<f64>,
}

pub fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let mut m = RunManifest::new("diagnose", None, a)?;
    // Diagnostics run on everyone; compliance enters only the sensitivity table.
    let records = a
        .data
        .compliance
        .as_deref()
        .map(io::read_compliance)
        .transpose()?;
    let mut l = load(&a.data, &mut m)?;
    l.compliance = None;
    m.input(&a.roster)?;
    let roster = io::read_roster(&a.roster)?;
    let outcomes = outcome_diffs(&l, a.data.threshold)?;
    let Some((_, short, _)) = outcomes.iter().find(|o| o.0 == "short_term") else {
        bail!("no quiz scores in study units");
    };
    let long = outcomes
        .iter()
        .find(|o| o.0 == "long_term")
        .map(|o| o.1.as_slice());

    let mut out = OutDir::create(&a.data.out_dir)?;

    let mut quarter = Vec::new();
    for (name, diffs, _) in &outcomes {
        let mut by_term: BTreeMap<String, Vec<StudentDiff>> = BTreeMap::new();
        for d in diffs {
            by_term.entry(d.term.clone()).or_default().push(d.clone());
        }
        if by_term.len() != 2 {
            log::warn!(
                "{name}: term comparison needs 2 terms, found {}",
                by_term.len()
            );
            continue;
        }
        let t = quarter_effect_test(&by_term)?;
        let labels: Vec<String> = by_term.keys().cloned().collect();
        quarter.push(QuarterRow {
            outcome: name,
            first_term: labels[0].clone(),
            second_term: labels[1].clone(),
            mean_diff: t.mean_diff,
            se: t.se,
            t: t.t,
            df: t.df,
            p: t.p,
        });
    }
    out.rows("quarter.csv", &quarter)?;

    let c = carryover_test(short, &l.design)?;
    for w in &c.warnings {
        log::warn!("carryover: {w}");
    }
    let mut tests = vec![TestRow {
        test: "pattern_anova".into(),
        statistic: c.anova.f,
        df1: c.anova.df_between,
        df2: c.anova.df_within,
        p: c.anova.p,
    }];
    if let Some(f) = &c.family_contrast {
        tests.push(TestRow {
            test: "family_contrast".into(),
            statistic: f.f,
            df1: f.df_between,
            df2: f.df_within,
            p: f.p,
        });
    }
    out.rows("carryover.csv", &tests)?;
    out.rows("carryover_groups.csv", &c.groups)?;
    let points: Vec<CarryoverPoint> = c
        .points
        .iter()
        .map(|(s, p, d)| CarryoverPoint {
            student_id: s,
            pattern: p,
            d: *d,
        })
        .collect();
    out.rows("carryover_points.csv", &points)?;

    let h = heterogeneity(short, &roster)?;
    for w in &h.warnings {
        log::warn!("heterogeneity: {w}");
    }
    let named = [
        ("full_model", Some(h.full)),
        ("gender", h.gender),
        ("race", h.race),
        ("baseline", h.baseline),
    ];
    let rows: Vec<TestRow> = named
        .into_iter()
        .filter_map(|(name, t)| {
            t.map(|t| TestRow {
                test: name.into(),
                statistic: t.f,
                df1: t.df1,
                df2: t.df2,
                p: t.p,
            })
        })
        .collect();
    out.rows("heterogeneity.csv", &rows)?;
    let curve: Vec<LoessRow> = h
        .loess_curve
        .iter()
        .map(|&(baseline, d, fit)| LoessRow { baseline, d, fit })
        .collect();
    out.rows("heterogeneity_loess.csv", &curve)?;

    if let Some(rec) = &records {
        let rows = compliance_sensitivity(short, long, rec, &a.thresholds)?;
        let flat: Vec<ComplianceOut> = rows
            .iter()
            .map(|r| ComplianceOut {
                threshold: r.threshold,
                compliance_rate: r.compliance_rate,
                n_compliers: r.n_compliers,
                n_noncompliers: r.n_noncompliers,
                short_term_d: r.short_term.as_ref().map(|e| e.d_bar),
                short_term_se: r.short_term.as_ref().map(|e| e.se),
                short_term_p: r.short_term.as_ref().map(|e| e.p_asymptotic),
                long_term_d: r.long_term.as_ref().map(|e| e.d_bar),
                long_term_se: r.long_term.as_ref().map(|e| e.se),
                long_term_p: r.long_term.as_ref().map(|e| e.p_asymptotic),
                noncomplier_d: r.noncomplier_short_term.as_ref().map(|e| e.d_bar),
                noncomplier_se: r.noncomplier_short_term.as_ref().map(|e| e.se),
                noncomplier_t: r.noncomplier_short_term.as_ref().map(|e| e.t_stat),
                noncomplier_p: r.noncomplier_short_term.as_ref().map(|e| e.p_asymptotic),
            })
            .collect();
        out.rows("compliance_sensitivity.csv", &flat)?;
    }
    out.finish(m)
}

#[derive(Serialize)]
struct TruthRow<'a> {
    student_id: &'a str,
    theta: f64,
    tau_i: f64,
    complier: bool,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut sc = io::read_scenario(&a.scenario)?;
    if let Some(s) = a.seed {
        sc.seed = s;
    }
    let sim = simulate(&sc)?;
    let mut out = OutDir::create(&a.out_dir)?;
    io::write_scenario(&sc, &out.path("scenario.toml"))?;
    io::write_roster(&sim.roster, &out.path("roster.csv"))?;
    let (scores, exams) = (out.path("scores.csv"), out.path("exams.csv"));
    io::write_scores(&sim.scores, &scores, &exams)?;
    io::write_compliance(&sim.compliance, &out.path("compliance.csv"))?;
    io::write_design(&sim.design, &out.path("design.json"))?;
    let truth: Vec<TruthRow> = sim
        .truth
        .theta
        .iter()
        .map(|(id, &theta)| TruthRow {
            student_id: id,
            theta,
            tau_i: sim.truth.tau_i[id],
            complier: sim.truth.complier[id],
        })
        .collect();
    out.rows("truth.csv", &truth)?;
    let mut m = RunManifest::new("simulate", Some(sc.seed), a)?;
    m.input(&a.scenario)?;
    out.finish(m)
}

pub fn cmd_power(a: &PowerArgs) -> Result<()> {
    let mut base = match &a.scenario {
        Some(p) => io::read_scenario(p)?,
        None => SimScenario::default(),
    };
    if let Some(s) = a.seed {
        base.seed = s;
    }
    let grid: Vec<(f64, usize)> = a
        .tau
        .iter()
        .flat_map(|&t| a.n.iter().map(move |&n| (t, n)))
        .collect();
    let mut rows = Vec::new();
    for d in &a.designs {
        let design = match d {
            PowerDesignArg::Crossover => PowerDesign::Crossover,
            PowerDesignArg::Parallel => PowerDesign::Parallel,
        };
        rows.extend(power_curve(&base, &grid, a.alpha, a.reps, design)?);
    }
    let mut out = OutDir::create(&a.out_dir)?;
    out.rows("power.csv", &rows)?;
    let mut m = RunManifest::new("power", Some(base.seed), a)?;
    if let Some(p) = &a.scenario {
        m.input(p)?;
    }
    out.finish(m)
}
