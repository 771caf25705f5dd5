//! End-to-end runs: ingest, score, select, verify, regress, compare against
//! random sampling, then render a text report and plot-data files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drls::{columns_vs_error, drls_select_with_scores, fit_power_law, theorem5_bound, PowerLawFit, SelectionResult};
use crate::error::{invalid, DrlsError, Result};
use crate::guarantees::{
    check_css, check_kernel, check_spectral, check_two_sided, pcp_ratios, pcp_report, randomized_rls_sample,
    Coverage, GuaranteeReport, PcpSweep, ALPHA,
};
use crate::io::{ingest_table, Table, TableFormat};
use crate::leverage::{
    classical_leverage_scores_from, ridge_leverage_scores_from, subspace_leverage_scores_from, LeverageScores,
};
use crate::matrix::{svd, DenseMatrix};
use crate::regression::{check_risk_bound, risk_monte_carlo, BETA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Scores,
    Select,
    Verify,
    Regress,
    CompareRandom,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Scores,
        Command::Select,
        Command::Verify,
        Command::Regress,
        Command::CompareRandom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Scores => "scores",
            Command::Select => "select",
            Command::Verify => "verify",
            Command::Regress => "regress",
            Command::CompareRandom => "compare-random",
        }
    }
}

impl FromStr for Command {
    type Err = DrlsError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown command '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input_path: Option<PathBuf>,
    pub format: TableFormat,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub commands: Vec<Command>,
    pub output_dir: Option<PathBuf>,
    pub num_projections: usize,
    pub monte_carlo_trials: usize,
    pub sigma_sq_list: Vec<f64>,
    pub center: bool,
    /// Count checks outside their proved ε range as acceptable.
    pub allow_out_of_range: bool,
    /// Multiplier in the random sampler's probabilities.
    pub oversample: f64,
    pub random_trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input_path: None,
            format: TableFormat::Csv,
            k: 3,
            epsilon: 0.1,
            seed: 0,
            commands: Command::ALL.to_vec(),
            output_dir: None,
            num_projections: 1000,
            monte_carlo_trials: 10000,
            sigma_sq_list: vec![1e-3, 1.0, 1e3],
            center: true,
            allow_out_of_range: false,
            oversample: 4.0,
            random_trials: 100,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.num_projections == 0 || self.random_trials == 0 {
            return Err(invalid("projection and random-trial counts must be positive"));
        }
        if self.monte_carlo_trials < 100 {
            return Err(invalid("at least 100 Monte Carlo trials are required"));
        }
        if self.sigma_sq_list.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(invalid("noise levels must be nonnegative"));
        }
        if !(self.oversample > 0.0 && self.oversample.is_finite()) {
            return Err(invalid("oversample must be positive"));
        }
        Ok(())
    }

    fn wants(&self, c: Command) -> bool {
        self.commands.contains(&c)
    }

    fn needs_selection(&self) -> bool {
        self.commands.iter().any(|&c| c != Command::Scores)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSummary {
    pub ridge: LeverageScores,
    pub subspace: LeverageScores,
    pub classical: LeverageScores,
    pub fit: Option<PowerLawFit>,
    pub column_count_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskRow {
    pub sigma_sq: f64,
    pub check: GuaranteeReport,
    pub monte_carlo_risk_a: f64,
    pub monte_carlo_std_error: f64,
}

/// Per-instance ratios between A and C in the layout of the paper's ratio table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioTable {
    /// Mean of σ_l(C)²/σ_l(A)² over the rank of A.
    pub mean_singular_ratio: f64,
    /// ‖C_{\k}‖²_F / ‖A_{\k}‖²_F.
    pub tail_ratio: f64,
    /// Mean of (σ_l(A)² + λ_A)/(σ_l(C)² + λ_C) over the rank of A.
    pub mean_regularized_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomComparison {
    pub trials: usize,
    pub oversample: f64,
    /// Σ p_i, the expected sample size.
    pub expected_columns: f64,
    pub mean_columns: f64,
    pub min_columns: usize,
    pub max_columns: usize,
    pub empty_samples: usize,
    /// Trials whose sample passed the two-sided spectral check.
    pub passes: usize,
    pub drls_columns: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub config: RunConfig,
    pub input_label: String,
    pub shape: (usize, usize),
    pub feature_names: Option<Vec<String>>,
    pub scores: Option<ScoreSummary>,
    pub selection: Option<SelectionResult>,
    pub error_curve: Option<Vec<f64>>,
    pub guarantees: Vec<GuaranteeReport>,
    pub pcp: Option<PcpSweep>,
    pub risk: Vec<RiskRow>,
    pub ratios: Option<RatioTable>,
    pub random: Option<RandomComparison>,
}

impl PipelineReport {
    fn all_checks(&self) -> impl Iterator<Item = &GuaranteeReport> {
        self.guarantees.iter().chain(self.risk.iter().map(|r| &r.check))
    }

    /// True when every check passed, or was out of range with the allow flag set.
    pub fn success(&self) -> bool {
        self.all_checks().all(|g| g.acceptable(self.config.allow_out_of_range))
    }
}

pub fn run_pipeline(config: &RunConfig) -> Result<PipelineReport> {
    let path = config
        .input_path
        .as_deref()
        .ok_or_else(|| invalid("no input path given"))?;
    let table = ingest_table(path, config.format).map_err(|e| e.in_stage("ingest"))?;
    run_pipeline_on(table, &path.display().to_string(), config)
}

fn standard_normal_vec(len: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn run_pipeline_on(table: Table, input_label: &str, config: &RunConfig) -> Result<PipelineReport> {
    config.validate()?;
    let a = if config.center {
        table.matrix.centered_columns()
    } else {
        table.matrix
    };
    let k = config.k;
    let mut report = PipelineReport {
        config: config.clone(),
        input_label: input_label.to_string(),
        shape: a.shape(),
        feature_names: table.feature_names,
        scores: None,
        selection: None,
        error_curve: None,
        guarantees: Vec::new(),
        pcp: None,
        risk: Vec::new(),
        ratios: None,
        random: None,
    };

    let stage = |name: &'static str| move |e: DrlsError| e.in_stage(name);
    let fa = svd(&a).map_err(stage("scores"))?;
    let ridge = ridge_leverage_scores_from(&fa, k).map_err(stage("scores"))?;

    if config.wants(Command::Scores) {
        let subspace = subspace_leverage_scores_from(&fa, k).map_err(stage("scores"))?;
        let classical = classical_leverage_scores_from(&fa).map_err(stage("scores"))?;
        let positive = ridge.scores.iter().filter(|&&s| s > 1e-14).count();
        let fit = if positive >= 2 {
            Some(fit_power_law(&ridge, 1..=positive).map_err(stage("scores"))?)
        } else {
            None
        };
        let column_count_bound = fit
            .as_ref()
            .filter(|f| f.bound_applicable())
            .map(|f| theorem5_bound(k, config.epsilon, f.decay_power))
            .transpose()
            .map_err(stage("scores"))?;
        report.scores = Some(ScoreSummary {
            ridge: ridge.clone(),
            subspace,
            classical,
            fit,
            column_count_bound,
        });
    }
    if !config.needs_selection() {
        return Ok(report);
    }

    let sel = drls_select_with_scores(&a, ridge, config.epsilon).map_err(stage("select"))?;
    report.error_curve = Some(columns_vs_error(&sel.scores.scores));

    if config.wants(Command::Verify) {
        let v = stage("verify");
        report.guarantees.push(check_spectral(&a, &sel).map_err(v)?);
        report.guarantees.push(check_css(&a, &sel).map_err(v)?);
        let sweep = pcp_ratios(&a, &sel.c, k, config.num_projections, config.seed).map_err(v)?;
        report.guarantees.push(pcp_report(&sweep, config.epsilon));
        report.pcp = Some(sweep);
        report.guarantees.push(check_kernel(&a, &sel).map_err(v)?);
        report.guarantees.push(check_two_sided(&a, &sel.c, k, config.epsilon).map_err(v)?);
    }

    if config.wants(Command::Regress) {
        let r = stage("regress");
        let x_star = standard_normal_vec(a.cols(), config.seed, 1);
        for (i, &sigma_sq) in config.sigma_sq_list.iter().enumerate() {
            let check = check_risk_bound(&a, &sel, &x_star, sigma_sq).map_err(r)?;
            let mc = risk_monte_carlo(
                &a,
                &x_star,
                sigma_sq,
                k,
                config.monte_carlo_trials,
                config.seed.wrapping_add(i as u64),
            )
            .map_err(r)?;
            report.risk.push(RiskRow {
                sigma_sq,
                check,
                monte_carlo_risk_a: mc.risk,
                monte_carlo_std_error: mc.std_error.unwrap_or(0.0),
            });
        }
        report.ratios = Some(ratio_table(&a, &sel.c, k).map_err(r)?);
    }

    if config.wants(Command::CompareRandom) {
        report.random = Some(compare_random(&a, config, sel.len()).map_err(stage("compare-random"))?);
    }

    report.selection = Some(sel);
    Ok(report)
}

pub fn ratio_table(a: &DenseMatrix, c: &DenseMatrix, k: usize) -> Result<RatioTable> {
    let fa = svd(a)?;
    let fc = svd(c)?;
    let rank = fa.numerical_rank;
    let (lam_a, lam_c) = (fa.ridge_regularizer(k), fc.ridge_regularizer(k));
    let sc = |l: usize| fc.singular_values.get(l).copied().unwrap_or(0.0).powi(2);
    let sa = |l: usize| fa.singular_values[l].powi(2);
    let mean = |f: &dyn Fn(usize) -> f64| (0..rank).map(f).sum::<f64>() / rank as f64;
    let tail_a = fa.tail_sq_saturating(k);
    Ok(RatioTable {
        mean_singular_ratio: mean(&|l| sc(l) / sa(l)),
        tail_ratio: if tail_a > 0.0 {
            fc.tail_sq_saturating(k) / tail_a
        } else {
            f64::NAN
        },
        mean_regularized_ratio: mean(&|l| (sa(l) + lam_a) / (sc(l) + lam_c)),
    })
}

fn compare_random(a: &DenseMatrix, config: &RunConfig, drls_columns: usize) -> Result<RandomComparison> {
    let (k, eps) = (config.k, config.epsilon);
    let ridge = ridge_leverage_scores_from(&svd(a)?, k)?;
    let expected_columns =
        crate::guarantees::rls_probabilities(&ridge.scores, k, eps, config.oversample).iter().sum();
    let mut counts = Vec::with_capacity(config.random_trials);
    let mut passes = 0;
    for t in 0..config.random_trials {
        let sample = randomized_rls_sample(a, k, eps, config.oversample, config.seed.wrapping_add(t as u64))?;
        if check_two_sided(a, &sample.c_weighted, k, eps)?.passed {
            passes += 1;
        }
        counts.push(sample.len());
    }
    Ok(RandomComparison {
        trials: config.random_trials,
        oversample: config.oversample,
        expected_columns,
        mean_columns: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
        min_columns: counts.iter().copied().min().unwrap_or(0),
        max_columns: counts.iter().copied().max().unwrap_or(0),
        empty_samples: counts.iter().filter(|&&c| c == 0).count(),
        passes,
        drls_columns,
    })
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else {
        format!("{x}")
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn coverage_label(c: Coverage) -> &'static str {
    match c {
        Coverage::InRange => "in-range",
        Coverage::OutOfTheoremRange => "out-of-range",
    }
}

fn render_check(out: &mut String, g: &GuaranteeReport) {
    let _ = writeln!(
        out,
        "{:<16} {:<12} {:<6} lhs={} bound={} margin={} tol={}",
        g.guarantee.as_str(),
        coverage_label(g.coverage),
        if g.passed { "pass" } else { "FAIL" },
        num(g.lhs_value),
        num(g.bound_value),
        num(g.margin),
        num(g.tolerance)
    );
    for (key, value) in &g.details {
        let _ = writeln!(out, "    {key} = {}", num(*value));
    }
}

/// Deterministic text rendering; identical inputs give identical bytes.
pub fn render_report(report: &PipelineReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "[config]");
    let _ = writeln!(out, "input = {}", report.input_label);
    let _ = writeln!(out, "shape = {}x{}", report.shape.0, report.shape.1);
    let _ = writeln!(out, "k = {}", c.k);
    let _ = writeln!(out, "epsilon = {}", num(c.epsilon));
    let _ = writeln!(out, "seed = {}", c.seed);
    let _ = writeln!(out, "centered = {}", c.center);
    let _ = writeln!(out, "commands = {}", join(&c.commands, |c| c.as_str().to_string()));
    let _ = writeln!(out, "projections = {}", c.num_projections);
    let _ = writeln!(out, "monte_carlo_trials = {}", c.monte_carlo_trials);
    let _ = writeln!(out, "sigma_sq = {}", join(&c.sigma_sq_list, |s| num(*s)));
    let _ = writeln!(out, "allow_out_of_range = {}", c.allow_out_of_range);
    if let Some(names) = &report.feature_names {
        let _ = writeln!(out, "features = {}", names.join(","));
    }

    if let Some(s) = &report.scores {
        let _ = writeln!(out, "\n[scores]");
        let _ = writeln!(out, "lambda2 = {}", num(s.ridge.lambda2.unwrap_or(f64::NAN)));
        if s.ridge.lambda2 == Some(0.0) {
            let _ = writeln!(out, "note = regularizer is zero; ridge scores equal classical scores");
        }
        let _ = writeln!(out, "ridge_total = {}", num(s.ridge.total));
        let _ = writeln!(out, "subspace_total = {}", num(s.subspace.total));
        let _ = writeln!(out, "classical_total = {}", num(s.classical.total));
        let top: Vec<usize> = crate::leverage::sorted_order(&s.ridge.scores).into_iter().take(10).collect();
        let _ = writeln!(out, "top_ridge = {}", join(&top, |&i| format!("{i}:{}", num(s.ridge.scores[i]))));
        match &s.fit {
            Some(f) => {
                let _ = writeln!(out, "power_law_a = {}", num(f.decay_power));
                let _ = writeln!(out, "power_law_b = {}", num(f.scale));
                let _ = writeln!(out, "power_law_range = {}..={}", f.fit_range.start(), f.fit_range.end());
                let _ = writeln!(out, "power_law_residual = {}", num(f.residual_norm));
            }
            None => {
                let _ = writeln!(out, "power_law = none (fewer than two positive scores)");
            }
        }
        if let Some(b) = s.column_count_bound {
            let _ = writeln!(out, "column_count_bound = {b}");
        }
    }

    if let Some(sel) = &report.selection {
        let _ = writeln!(out, "\n[selection]");
        let _ = writeln!(out, "columns = {}", sel.len());
        let _ = writeln!(out, "theta = {}", join(&sel.theta, |i| i.to_string()));
        let _ = writeln!(out, "threshold = {}", num(sel.threshold));
        let _ = writeln!(out, "residual = {}", num(sel.residual));
        let _ = writeln!(out, "padded = {}", sel.padded());
        let _ = writeln!(out, "tie_at_threshold = {}", sel.tie_at_threshold);
    }

    if !report.guarantees.is_empty() {
        let _ = writeln!(out, "\n[guarantees]");
        let _ = writeln!(out, "alpha = {}", num(ALPHA));
        for g in &report.guarantees {
            render_check(&mut out, g);
        }
    }

    if !report.risk.is_empty() {
        let _ = writeln!(out, "\n[risk]");
        let _ = writeln!(out, "beta = {}", num(BETA));
        let _ = writeln!(out, "noise = y* + sigma_sq * xi");
        let _ = writeln!(out, "sigma_sq risk_a risk_c ratio bound mc_risk_a mc_std_error");
        for r in &report.risk {
            let g = &r.check;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                num(r.sigma_sq),
                num(g.get("risk_a").unwrap_or(f64::NAN)),
                num(g.get("risk_c").unwrap_or(f64::NAN)),
                num(g.lhs_value),
                num(g.bound_value),
                num(r.monte_carlo_risk_a),
                num(r.monte_carlo_std_error)
            );
        }
        for r in &report.risk {
            render_check(&mut out, &r.check);
        }
    }

    if let Some(t) = &report.ratios {
        let _ = writeln!(out, "\n[ratios]");
        let _ = writeln!(out, "mean_singular_ratio = {}", num(t.mean_singular_ratio));
        let _ = writeln!(out, "tail_ratio = {}", num(t.tail_ratio));
        let _ = writeln!(out, "mean_regularized_ratio = {}", num(t.mean_regularized_ratio));
    }

    if let Some(r) = &report.random {
        let _ = writeln!(out, "\n[compare-random]");
        let _ = writeln!(out, "trials = {}", r.trials);
        let _ = writeln!(out, "oversample = {}", num(r.oversample));
        let _ = writeln!(out, "expected_columns = {}", num(r.expected_columns));
        let _ = writeln!(out, "mean_columns = {}", num(r.mean_columns));
        let _ = writeln!(out, "min_columns = {}", r.min_columns);
        let _ = writeln!(out, "max_columns = {}", r.max_columns);
        let _ = writeln!(out, "empty_samples = {}", r.empty_samples);
        let _ = writeln!(out, "two_sided_pass_frequency = {}", num(r.passes as f64 / r.trials as f64));
        let _ = writeln!(out, "drls_columns = {}", r.drls_columns);
    }

    let _ = writeln!(out, "\n[status]");
    let _ = writeln!(out, "success = {}", report.success());
    out
}

/// Files written and sections skipped by [`emit_plot_data`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotOutput {
    pub written: Vec<PathBuf>,
    pub skipped: Vec<String>,
}

pub const HISTOGRAM_BINS: usize = 20;

/// Histogram bins over [1 − αε, 1]; values outside are clamped to the end bins.
pub fn pcp_histogram(ratios: &[f64], epsilon: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = 1.0 - ALPHA * epsilon;
    let width = (1.0 - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &r in ratios {
        let idx = ((r - lo) / width).floor();
        let idx = if idx.is_nan() { 0 } else { idx.clamp(0.0, (bins - 1) as f64) as usize };
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

fn write_file(dir: &Path, name: &str, body: String, out: &mut PlotOutput) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| DrlsError::Io(format!("{}: {e}", path.display())))?;
    out.written.push(path);
    Ok(())
}

pub fn emit_plot_data(report: &PipelineReport, output_dir: &Path) -> Result<PlotOutput> {
    fs::create_dir_all(output_dir)?;
    let mut out = PlotOutput::default();

    match &report.error_curve {
        Some(curve) => {
            let mut body = String::from("columns epsilon_tilde\n");
            for (m, e) in curve.iter().enumerate() {
                let _ = writeln!(body, "{m} {}", num(*e));
            }
            write_file(output_dir, "columns_vs_error.dat", body, &mut out)?;
        }
        None => out.skipped.push("columns_vs_error.dat: no selection in report".into()),
    }

    match &report.scores {
        Some(s) => {
            let mut body = String::from("index score fit\n");
            for (i, v) in s.ridge.sorted_desc().iter().enumerate() {
                let fit = s.fit.as_ref().map_or(f64::NAN, |f| f.predict(i + 1));
                let _ = writeln!(body, "{} {} {}", i + 1, num(*v), num(fit));
            }
            write_file(output_dir, "power_law.dat", body, &mut out)?;

            let mut body = String::from("column classical ridge\n");
            for (i, (c, r)) in s.classical.scores.iter().zip(&s.ridge.scores).enumerate() {
                let _ = writeln!(body, "{i} {} {}", num(*c), num(*r));
            }
            write_file(output_dir, "classical_vs_ridge.dat", body, &mut out)?;
        }
        None => {
            out.skipped.push("power_law.dat: no score summary in report".into());
            out.skipped.push("classical_vs_ridge.dat: no score summary in report".into());
        }
    }

    match &report.pcp {
        Some(sweep) => {
            let mut body = String::from("bin_left bin_right count\n");
            for (l, r, c) in pcp_histogram(&sweep.haar_ratios, report.config.epsilon, HISTOGRAM_BINS) {
                let _ = writeln!(body, "{} {} {c}", num(l), num(r));
            }
            write_file(output_dir, "pcp_histogram.dat", body, &mut out)?;
        }
        None => out.skipped.push("pcp_histogram.dat: no projection sweep in report".into()),
    }
    Ok(out)
}

/// Writes `report.txt` and the plot-data files into `output_dir`.
pub fn write_outputs(report: &PipelineReport, output_dir: &Path) -> Result<PlotOutput> {
    let mut plots = emit_plot_data(report, output_dir)?;
    let path = output_dir.join("report.txt");
    fs::write(&path, render_report(report)).map_err(|e| DrlsError::Io(format!("{}: {e}", path.display())))?;
    plots.written.insert(0, path);
    Ok(plots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{random_with_spectrum, SpectrumProfile};

    fn table(seed: u64) -> Table {
        Table {
            matrix: random_with_spectrum(20, 60, SpectrumProfile::PowerLaw(1.0), seed).unwrap(),
            feature_names: None,
        }
    }

    fn quick() -> RunConfig {
        RunConfig {
            num_projections: 50,
            monte_carlo_trials: 200,
            random_trials: 10,
            epsilon: 0.05,
            ..RunConfig::default()
        }
    }

    #[test]
    fn scores_only_has_no_selection() {
        let config = RunConfig {
            commands: vec![Command::Scores],
            ..quick()
        };
        let r = run_pipeline_on(table(1), "t", &config).unwrap();
        assert!(r.scores.is_some());
        assert!(r.selection.is_none());
        assert!(r.guarantees.is_empty());
        let text = render_report(&r);
        assert!(text.contains("[scores]") && !text.contains("[selection]"));
    }

    #[test]
    fn full_run_is_deterministic_and_passes() {
        let r1 = run_pipeline_on(table(2), "t", &quick()).unwrap();
        let r2 = run_pipeline_on(table(2), "t", &quick()).unwrap();
        assert_eq!(render_report(&r1), render_report(&r2));
        assert_eq!(r1.guarantees.len(), 5);
        assert_eq!(r1.risk.len(), 3);
        assert!(r1.all_checks().all(|g| g.passed), "{}", render_report(&r1));
        assert!(r1.success());
    }

    #[test]
    fn out_of_range_needs_allow_flag() {
        let config = RunConfig {
            epsilon: 0.3,
            commands: vec![Command::Verify],
            ..quick()
        };
        let r = run_pipeline_on(table(3), "t", &config).unwrap();
        assert!(r.guarantees.iter().any(|g| g.coverage == Coverage::OutOfTheoremRange));
        if r.guarantees.iter().all(|g| g.passed || !g.in_range()) {
            assert!(!r.success());
            let allowed = RunConfig {
                allow_out_of_range: true,
                ..config
            };
            assert!(run_pipeline_on(table(3), "t", &allowed).unwrap().success());
        }
    }

    #[test]
    fn histogram_spans_pcp_range() {
        let bins = pcp_histogram(&[1.0, 0.9999, 0.5, -3.0], 0.1, 20);
        assert_eq!(bins.len(), 20);
        assert!((bins[0].0 - (1.0 - ALPHA * 0.1)).abs() < 1e-15);
        assert!((bins[19].1 - 1.0).abs() < 1e-12);
        assert_eq!(bins.iter().map(|b| b.2).sum::<usize>(), 4);
        assert_eq!(bins[19].2, 2);
    }

    #[test]
    fn plot_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_pipeline_on(table(4), "t", &quick()).unwrap();
        let out = write_outputs(&r, dir.path()).unwrap();
        assert_eq!(out.written.len(), 5);
        assert!(out.skipped.is_empty());
        let curve = fs::read_to_string(dir.path().join("columns_vs_error.dat")).unwrap();
        let values: Vec<f64> = curve
            .lines()
            .skip(1)
            .map(|l| l.split(' ').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(values.len(), 61);
        assert!(values.windows(2).all(|w| w[1] <= w[0]));

        let only = RunConfig {
            commands: vec![Command::Select],
            ..quick()
        };
        let r = run_pipeline_on(table(4), "t", &only).unwrap();
        let out = emit_plot_data(&r, dir.path()).unwrap();
        assert_eq!(out.written.len(), 1);
        assert_eq!(out.skipped.len(), 3);
    }

    #[test]
    fn command_parsing() {
        assert_eq!("compare-random".parse::<Command>().unwrap(), Command::CompareRandom);
        assert!("all".parse::<Command>().is_err());
    }
}
