//! Data-generating models and the Monte Carlo experiment driver.
//!
//! Every replicate draws from its own generator seeded by
//! `mix_seed(plan.seed, model_index, replicate_index)` (see [`mix_seed`]),
//! so results are bit-for-bit reproducible and independent of the number of
//! worker threads.

use std::f64::consts::{E, TAU};
use std::fmt;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular::{reduce_mod1, resolve_ties, CircularSample, TiesPolicy, Turn};
use crate::coefficient::{xi_circular_directed, Direction};
use crate::competitors::{fl_correlation, js_correlation};
use crate::error::{Error, Result};
use crate::linear::{angle_grid, CutEvaluator, CutPair};
use crate::null::{test_normal, test_permutation, DEFAULT_PERMUTATIONS};
use crate::stats::mean_sd;
pub use crate::stats::mix_seed;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 1;

/// Jitter applied to tied responses, in turns.
pub const GENERATOR_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Independence,
    /// `Y = X + pi/4 + e`
    Rotation,
    /// `Y = 2X + e`
    Doubling,
    /// `Y = 4X + e`
    Quadrupling,
    /// `Y = X + Z + e`, `Z` uniform on `{0, pi}`
    AntipodalMixture,
    /// `Y = X + 1.25 exp(2 cos(X - pi)) / e^2 + e`
    LocalizedBump,
    /// `Y = pi/4` for `X < pi`, `5 pi/4` otherwise, plus `e`
    StepArc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Independence,
        ModelKind::Rotation,
        ModelKind::Doubling,
        ModelKind::Quadrupling,
        ModelKind::AntipodalMixture,
        ModelKind::LocalizedBump,
        ModelKind::StepArc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Independence => "independence",
            ModelKind::Rotation => "rotation",
            ModelKind::Doubling => "doubling",
            ModelKind::Quadrupling => "quadrupling",
            ModelKind::AntipodalMixture => "antipodal_mixture",
            ModelKind::LocalizedBump => "localized_bump",
            ModelKind::StepArc => "step_arc",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model with wrapped-normal noise of standard deviation `sigma_rad`
/// (radians, before wrapping).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub sigma_rad: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, sigma_rad: f64) -> Self {
        ModelSpec { kind, sigma_rad }
    }

    fn validate(&self) -> Result<()> {
        if self.sigma_rad.is_finite() && self.sigma_rad >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "sigma_rad",
                value: self.sigma_rad,
            })
        }
    }
}

/// Draws `n` pairs from `model`; `X` is uniform and all angles are in turns.
///
/// Tied responses (only the noiseless step model produces them with
/// positive probability) are broken by a seeded jitter of
/// [`GENERATOR_JITTER`] turns; untied samples are returned unchanged.
pub fn generate(model: &ModelSpec, n: usize, seed: u64) -> Result<CircularSample> {
    model.validate()?;
    if n < 2 {
        return Err(Error::SampleTooSmall { n, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = (model.sigma_rad > 0.0)
        .then(|| Normal::new(0.0, model.sigma_rad / TAU).expect("validated sigma"));
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random();
        let signal = match model.kind {
            ModelKind::Independence => rng.random(),
            ModelKind::Rotation => xi + 0.125,
            ModelKind::Doubling => 2.0 * xi,
            ModelKind::Quadrupling => 4.0 * xi,
            ModelKind::AntipodalMixture => xi + if rng.random::<bool>() { 0.5 } else { 0.0 },
            ModelKind::LocalizedBump => {
                xi + 1.25 * (2.0 * (TAU * xi - std::f64::consts::PI).cos()).exp() / (E * E) / TAU
            }
            ModelKind::StepArc => {
                if xi < 0.5 {
                    0.125
                } else {
                    0.625
                }
            }
        };
        let eps = match (&noise, model.kind) {
            (_, ModelKind::Independence) | (None, _) => 0.0,
            (Some(d), _) => d.sample(&mut rng),
        };
        x.push(Turn::new(xi)?);
        y.push(Turn::new(reduce_mod1(signal + eps))?);
    }
    let sample = CircularSample::new(x, y)?;
    if !sample.has_ties() {
        return Ok(sample);
    }
    let policy = TiesPolicy::jitter(mix_seed(seed, 0x7E5, 0)).with_scale(GENERATOR_JITTER);
    resolve_ties(&sample, &policy)
}

/// Per-replicate quantities an experiment can record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// The raw circular coefficient.
    XiCirc,
    /// Ordinary statistic with both circles cut at zero.
    BorelZero,
    /// Mean, sd, min and max of the ordinary statistic over a `k x k` angle grid.
    BorelGrid,
    /// Absolute centred-sine correlation.
    Js,
    /// Absolute pairwise-difference correlation.
    Fl,
}

impl Measure {
    fn columns(self) -> &'static [&'static str] {
        match self {
            Measure::XiCirc => &["xi"],
            Measure::BorelZero => &["borel_zero"],
            Measure::BorelGrid => &["borel_avg", "grid_sd", "grid_min", "grid_max"],
            Measure::Js => &["js"],
            Measure::Fl => &["fl"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Normal,
    Permutation,
}

impl TestKind {
    fn column(self) -> &'static str {
        match self {
            TestKind::Normal => "normal",
            TestKind::Permutation => "permutation",
        }
    }
}

fn default_level() -> f64 {
    0.05
}

fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

fn default_grid() -> usize {
    8
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub models: Vec<ModelSpec>,
    pub n: usize,
    pub replicates: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub measures: Vec<Measure>,
    #[serde(default)]
    pub tests: Vec<TestKind>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    /// Cut points per axis for [`Measure::BorelGrid`].
    #[serde(default = "default_grid")]
    pub grid: usize,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        let min_n = if self.tests.contains(&TestKind::Normal) {
            4
        } else {
            2
        };
        if self.n < min_n {
            return Err(Error::SampleTooSmall {
                n: self.n,
                min: min_n,
            });
        }
        if self.tests.contains(&TestKind::Permutation) && self.permutations == 0 {
            return bad("permutations must be at least 1".into());
        }
        if self.measures.contains(&Measure::BorelGrid) && self.grid == 0 {
            return bad("grid must be at least 1".into());
        }
        self.models.iter().try_for_each(ModelSpec::validate)
    }

    fn columns(&self) -> Vec<&'static str> {
        self.measures
            .iter()
            .flat_map(|m| m.columns().iter().copied())
            .collect()
    }
}

/// Mean and sample standard deviation of one output column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// Replicates that produced a value.
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub test: TestKind,
    pub rejection_rate: f64,
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowResult {
    pub model: ModelSpec,
    pub n: usize,
    pub replicates: usize,
    pub columns: Vec<ColumnSummary>,
    pub tests: Vec<TestSummary>,
    /// Replicate evaluations dropped as degenerate (for example an undefined
    /// circular mean), summed over columns.
    pub excluded: usize,
}

impl RowResult {
    pub fn column(&self, name: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn rate(&self, test: TestKind) -> Option<f64> {
        self.tests
            .iter()
            .find(|t| t.test == test)
            .map(|t| t.rejection_rate)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub plans: Vec<ExperimentPlan>,
    pub rows: Vec<RowResult>,
    /// Wall-clock time; not serialized so that outputs stay reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl PartialEq for ExperimentResult {
    // runtime is not part of the result
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.plans == other.plans && self.rows == other.rows
    }
}

struct Replicate {
    values: Vec<Option<f64>>,
    rejections: Vec<bool>,
}

fn run_replicate(plan: &ExperimentPlan, model: &ModelSpec, seed: u64) -> Result<Replicate> {
    let sample = generate(model, plan.n, seed)?;
    let report = xi_circular_directed(&sample, Direction::XToY)?;
    let mut values = Vec::new();
    let mut evaluator = None;
    for measure in &plan.measures {
        match measure {
            Measure::XiCirc => values.push(Some(report.raw)),
            Measure::BorelZero | Measure::BorelGrid => {
                if evaluator.is_none() {
                    evaluator = Some(CutEvaluator::new(&sample)?);
                }
                let ev = evaluator.as_ref().expect("just built");
                if *measure == Measure::BorelZero {
                    values.push(Some(ev.evaluate(&CutPair::angles(0.0, 0.0)?)?));
                } else {
                    let grid: Vec<f64> = angle_grid(plan.grid)
                        .iter()
                        .map(|c| ev.evaluate(c))
                        .collect::<Result<_>>()?;
                    let k = grid.len() as f64;
                    let mean = grid.iter().sum::<f64>() / k;
                    let sd = (grid.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
                    let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    values.extend([Some(mean), Some(sd), Some(min), Some(max)]);
                }
            }
            Measure::Js => values.push(degenerate_as_none(js_correlation(&sample))?),
            Measure::Fl => values.push(degenerate_as_none(fl_correlation(&sample))?),
        }
    }
    let mut rejections = Vec::new();
    for test in &plan.tests {
        let outcome = match test {
            TestKind::Normal => test_normal(&report)?,
            TestKind::Permutation => {
                test_permutation(&sample, plan.permutations, mix_seed(seed, 0x9E2, 0))?
            }
        };
        rejections.push(outcome.rejects(plan.level));
    }
    Ok(Replicate { values, rejections })
}

fn degenerate_as_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v.abs())),
        Err(Error::DegenerateSample(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn summarize_row(plan: &ExperimentPlan, model: &ModelSpec, reps: Vec<Replicate>) -> RowResult {
    let names = plan.columns();
    let mut excluded = 0;
    let mut columns = Vec::with_capacity(names.len());
    for (c, name) in names.iter().enumerate() {
        let vals: Vec<f64> = reps.iter().filter_map(|r| r.values[c]).collect();
        excluded += reps.len() - vals.len();
        let (mean, sd) = mean_sd(&vals);
        columns.push(ColumnSummary {
            name: (*name).to_string(),
            mean,
            sd,
            used: vals.len(),
        });
    }
    let tests = plan
        .tests
        .iter()
        .enumerate()
        .map(|(t, &test)| {
            let hits = reps.iter().filter(|r| r.rejections[t]).count();
            TestSummary {
                test,
                rejection_rate: hits as f64 / reps.len() as f64,
                used: reps.len(),
            }
        })
        .collect();
    RowResult {
        model: *model,
        n: plan.n,
        replicates: plan.replicates,
        columns,
        tests,
        excluded,
    }
}

/// Runs one plan; rows follow `plan.models`.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    run_plans(std::slice::from_ref(plan), plan.seed)
}

/// Runs several plans with a common column layout and concatenates their rows.
pub fn run_plans(plans: &[ExperimentPlan], seed: u64) -> Result<ExperimentResult> {
    let start = Instant::now();
    if let Some(first) = plans.first() {
        for plan in plans {
            plan.validate()?;
            if plan.measures != first.measures || plan.tests != first.tests {
                return Err(Error::InvalidParameter(
                    "plans in one result must share measures and tests".into(),
                ));
            }
        }
    }
    let mut rows = Vec::new();
    for plan in plans {
        for (m, model) in plan.models.iter().enumerate() {
            let reps = (0..plan.replicates)
                .into_par_iter()
                .map(|r| run_replicate(plan, model, mix_seed(plan.seed, m as u64, r as u64)))
                .collect::<Result<Vec<_>>>()?;
            rows.push(summarize_row(plan, model, reps));
        }
    }
    Ok(ExperimentResult {
        seed,
        plans: plans.to_vec(),
        rows,
        runtime: start.elapsed(),
    })
}

/// Number of Monte Carlo replicates used by the published tables.
pub const TABLE_REPLICATES: usize = 1000;

/// Sample size used by the published tables, except the size table.
pub const TABLE_N: usize = 200;

/// Plans reproducing one of the four published tables.
///
/// The size table runs one plan per sample size, each seeded with
/// `mix_seed(seed, 3, n)`; the other tables are a single plan seeded with
/// `seed`.
pub fn table_plans(table: u8, replicates: usize, seed: u64) -> Result<Vec<ExperimentPlan>> {
    use ModelKind::*;
    let spec = |kind, sigma| ModelSpec::new(kind, sigma);
    let base =
        |models: Vec<ModelSpec>, measures: Vec<Measure>, tests: Vec<TestKind>| ExperimentPlan {
            models,
            n: TABLE_N,
            replicates,
            seed,
            measures,
            tests,
            level: default_level(),
            permutations: DEFAULT_PERMUTATIONS,
            grid: default_grid(),
        };
    let plans = match table {
        1 => {
            let mut models = vec![spec(Independence, 0.0)];
            for kind in [
                Rotation,
                Doubling,
                Quadrupling,
                AntipodalMixture,
                LocalizedBump,
            ] {
                models.extend([spec(kind, 0.0), spec(kind, 0.5)]);
            }
            use Measure::*;
            vec![base(
                models,
                vec![XiCirc, BorelZero, BorelGrid, Js, Fl],
                vec![],
            )]
        }
        2 => {
            let models = vec![
                spec(Independence, 0.0),
                spec(Doubling, 0.5),
                spec(Quadrupling, 0.5),
                spec(AntipodalMixture, 0.0),
                spec(LocalizedBump, 0.2),
                spec(StepArc, 0.2),
            ];
            vec![base(models, vec![Measure::BorelGrid], vec![])]
        }
        3 => [30usize, 50, 100, 200]
            .iter()
            .map(|&n| ExperimentPlan {
                n,
                seed: mix_seed(seed, 3, n as u64),
                ..base(
                    vec![spec(Independence, 0.0)],
                    vec![Measure::XiCirc],
                    vec![TestKind::Normal, TestKind::Permutation],
                )
            })
            .collect(),
        4 => {
            let models = [Rotation, Doubling, Quadrupling, AntipodalMixture]
                .iter()
                .flat_map(|&k| [0.0, 0.2, 0.5, 1.0].map(|s| spec(k, s)))
                .collect();
            vec![base(
                models,
                vec![Measure::XiCirc],
                vec![TestKind::Normal, TestKind::Permutation],
            )]
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown table {other}; expected 1, 2, 3 or 4"
            )))
        }
    };
    Ok(plans)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Tsv,
    Json,
}

fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn header(result: &ExperimentResult) -> Vec<&'static str> {
    let mut cols = vec!["model", "sigma", "n"];
    if let Some(plan) = result.plans.first() {
        for name in plan.columns() {
            cols.push(name);
            if name == "xi" {
                cols.push("xi_sd");
            }
        }
        cols.extend(plan.tests.iter().map(|t| t.column()));
    }
    cols
}

/// Writes one row per model: TSV rounded to 3 decimals, or JSON with full
/// precision, the plans and the master seed.
pub fn emit_tables<W: Write>(
    result: &ExperimentResult,
    format: OutputFormat,
    out: &mut W,
) -> io::Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, result)?;
            writeln!(out)
        }
        OutputFormat::Tsv => {
            writeln!(out, "{}", header(result).join("\t"))?;
            for row in &result.rows {
                let mut fields = vec![
                    row.model.kind.name().to_string(),
                    fixed3(row.model.sigma_rad),
                    row.n.to_string(),
                ];
                for c in &row.columns {
                    fields.push(fixed3(c.mean));
                    // the spread of the coefficient itself is a published column
                    if c.name == "xi" {
                        fields.push(fixed3(c.sd));
                    }
                }
                fields.extend(row.tests.iter().map(|t| fixed3(t.rejection_rate)));
                writeln!(out, "{}", fields.join("\t"))?;
            }
            Ok(())
        }
    }
}

/// Long-format `(model, sigma, n, measure, value)` records for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub model: ModelKind,
    pub sigma: f64,
    pub n: usize,
    pub measure: String,
    pub value: f64,
}

pub fn curve_records(result: &ExperimentResult) -> Vec<CurveRecord> {
    let mut out = Vec::new();
    for row in &result.rows {
        let record = |measure: &str, value| CurveRecord {
            model: row.model.kind,
            sigma: row.model.sigma_rad,
            n: row.n,
            measure: measure.to_string(),
            value,
        };
        out.extend(row.columns.iter().map(|c| record(&c.name, c.mean)));
        out.extend(
            row.tests
                .iter()
                .map(|t| record(t.test.column(), t.rejection_rate)),
        );
    }
    out
}

pub fn emit_curves<W: Write>(
    result: &ExperimentResult,
    format: OutputFormat,
    out: &mut W,
) -> io::Result<()> {
    let records = curve_records(result);
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &records)?;
            writeln!(out)
        }
        OutputFormat::Tsv => {
            writeln!(out, "model\tsigma\tn\tmeasure\tvalue")?;
            for r in &records {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    r.model,
                    fixed3(r.sigma),
                    r.n,
                    r.measure,
                    r.value
                )?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ModelKind, sigma: f64) -> ModelSpec {
        ModelSpec::new(kind, sigma)
    }

    #[test]
    fn rotation_shift_is_exact() {
        let s = generate(&spec(ModelKind::Rotation, 0.0), 300, 4).unwrap();
        for (x, y) in s.x().iter().zip(s.y()) {
            assert!((x.arc_to(*y) - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_is_exact() {
        let s = generate(&spec(ModelKind::Doubling, 0.0), 300, 5).unwrap();
        for (x, y) in s.x().iter().zip(s.y()) {
            assert_eq!(y.value(), reduce_mod1(2.0 * x.value()));
        }
    }

    #[test]
    fn antipodal_offsets() {
        let n = 4000;
        let s = generate(&spec(ModelKind::AntipodalMixture, 0.0), n, 6).unwrap();
        let mut half = 0;
        for (x, y) in s.x().iter().zip(s.y()) {
            let d = x.arc_to(*y);
            let is_half = (d - 0.5).abs() < 1e-12;
            assert!(is_half || !(1e-12..=1.0 - 1e-12).contains(&d), "{d}");
            half += is_half as usize;
        }
        // binomial sd is sqrt(n) / 2
        assert!((half as f64 - n as f64 / 2.0).abs() < 4.0 * (n as f64).sqrt() / 2.0);
    }

    #[test]
    fn step_ties_are_jittered() {
        let s = generate(&spec(ModelKind::StepArc, 0.0), 100, 7).unwrap();
        assert!(!s.has_ties());
        for (x, y) in s.x().iter().zip(s.y()) {
            let level = if x.value() < 0.5 { 0.125 } else { 0.625 };
            assert!((y.value() - level).abs() < 1e-8);
        }
    }

    #[test]
    fn generator_is_seeded() {
        let m = spec(ModelKind::LocalizedBump, 0.3);
        assert_eq!(generate(&m, 50, 9).unwrap(), generate(&m, 50, 9).unwrap());
        assert_ne!(generate(&m, 50, 9).unwrap(), generate(&m, 50, 10).unwrap());
        assert!(generate(&m, 1, 9).is_err());
        assert!(generate(&spec(ModelKind::Rotation, -1.0), 10, 1).is_err());
    }

    #[test]
    fn noiseless_functional_models_score_high() {
        use ModelKind::*;
        for kind in [Rotation, Doubling, Quadrupling, LocalizedBump] {
            let s = generate(&spec(kind, 0.0), 200, 11).unwrap();
            let r = xi_circular_directed(&s, Direction::XToY).unwrap();
            assert!(r.corrected.unwrap() > 0.9, "{kind}: {r:?}");
        }
    }

    #[test]
    fn table_shapes() {
        let rows = |t| -> usize {
            table_plans(t, 10, 1)
                .unwrap()
                .iter()
                .map(|p| p.models.len())
                .sum()
        };
        assert_eq!(rows(1), 11);
        assert_eq!(rows(2), 6);
        assert_eq!(rows(3), 4);
        assert_eq!(rows(4), 16);
        assert!(table_plans(5, 10, 1).is_err());
    }

    #[test]
    fn plan_validation() {
        let mut plan = table_plans(3, 10, 1).unwrap().remove(0);
        plan.level = 1.0;
        assert!(plan.validate().is_err());
        plan.level = 0.05;
        plan.replicates = 0;
        assert!(plan.validate().is_err());
        plan.replicates = 1;
        plan.n = 3;
        assert!(matches!(plan.validate(), Err(Error::SampleTooSmall { .. })));
    }

    #[test]
    fn empty_result_is_header_only() {
        let plan = ExperimentPlan {
            models: vec![],
            ..table_plans(4, 10, 1).unwrap().remove(0)
        };
        let result = run_experiment(&plan).unwrap();
        let mut out = Vec::new();
        emit_tables(&result, OutputFormat::Tsv, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "model\tsigma\tn\txi\txi_sd\tnormal\tpermutation\n"
        );
    }

    #[test]
    fn experiment_is_reproducible_and_sane() {
        let mut plan = table_plans(1, 40, 3).unwrap().remove(0);
        plan.models.truncate(4);
        let a = run_experiment(&plan).unwrap();
        let b = run_experiment(&plan).unwrap();
        assert_eq!(a, b);
        let mut ta = Vec::new();
        let mut tb = Vec::new();
        emit_tables(&a, OutputFormat::Tsv, &mut ta).unwrap();
        emit_tables(&b, OutputFormat::Tsv, &mut tb).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 5);
        let rotation = &a.rows[1];
        assert!(
            (rotation.column("xi").unwrap().mean - crate::correction_factor(200)).abs() < 1e-12
        );
        assert!(rotation.column("js").unwrap().mean > 0.999);
        assert!(rotation.column("borel_avg").unwrap().mean > 0.9);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let plan = ExperimentPlan {
            replicates: 30,
            permutations: 49,
            ..table_plans(4, 30, 2).unwrap().remove(0)
        };
        let plan = ExperimentPlan {
            models: plan.models[12..].to_vec(),
            ..plan
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| run_experiment(&plan)).unwrap();
        let b = three.install(|| run_experiment(&plan)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn curves_repeat_table_rows() {
        let plan = ExperimentPlan {
            models: vec![spec(ModelKind::Doubling, 0.2)],
            ..table_plans(4, 20, 1).unwrap().remove(0)
        };
        let result = run_experiment(&plan).unwrap();
        let records = curve_records(&result);
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].value, result.rows[0].columns[0].mean);
        let mut out = Vec::new();
        emit_curves(&result, OutputFormat::Tsv, &mut out).unwrap();
        assert!(String::from_utf8(out)
            .unwrap()
            .starts_with("model\tsigma\tn\tmeasure\tvalue\ndoubling\t0.200\t200\txi\t"));
    }

    #[test]
    fn plan_json_round_trip_with_defaults() {
        let text = r#"{"models":[{"kind":"rotation","sigma_rad":0.5}],"n":50,"replicates":5,"measures":["xi_circ"]}"#;
        let plan: ExperimentPlan = serde_json::from_str(text).unwrap();
        assert_eq!(plan.seed, DEFAULT_SEED);
        assert_eq!(plan.permutations, 499);
        assert_eq!(plan.grid, 8);
        assert_eq!(plan.level, 0.05);
        let back: ExperimentPlan =
            serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(back, plan);
    }
}
