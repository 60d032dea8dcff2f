//! Dispatch of a validated config to the library.

use std::path::{Path, PathBuf};

use cbi_core::classify::{classify_zero_state, ZeroClass, ZeroSetReport};
use cbi_core::cutout::{cbi_sampler, dyadic_grid, last_zero_within, replicates, simulate, statistics, CuttingTail};
use cbi_core::ou::{ou_classify, pushforward_ks, OuCuttingTail, OuZeroSet};
use cbi_core::{parse_branching, parse_immigration, BranchingMechanism, FlowSolver, ImmigrationMechanism, ZeroSetLaw};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, Format};
use crate::format::{sig, to_csv, to_json};
use crate::CliError;

/// Pushforward sample size and truncation reported by `ou`.
const PUSHFORWARD_N: usize = 10_000;
const PUSHFORWARD_Z0: f64 = 0.01;

/// A replicate whose window ends uncovered is continued up to this multiple
/// of `T` to find its last zero; past that `g_last` is left empty.
const G_LAST_EXTENSION: f64 = 16.0;

/// One report file; `path = None` means standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub path: Option<PathBuf>,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// 0, or 2 when the classification is inconclusive.
    pub exit_code: i32,
    pub reports: Vec<Report>,
}

fn psi(c: &ExperimentConfig) -> Result<BranchingMechanism, CliError> {
    Ok(parse_branching(c.psi_spec()?)?)
}

fn phi(c: &ExperimentConfig) -> Result<ImmigrationMechanism, CliError> {
    Ok(parse_immigration(c.phi_spec()?)?)
}

fn primary_path(c: &ExperimentConfig, report_dir: Option<&Path>) -> Option<PathBuf> {
    c.out.clone().or_else(|| report_dir.map(|d| d.join(format!("{}.{}", c.command.name(), c.format().extension()))))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn opt(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

pub fn run(config: &ExperimentConfig, report_dir: Option<&Path>) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let path = primary_path(config, report_dir);
    let format = config.format();
    let (code, mut reports) = match config.command {
        Command::Classify => classify(config, format)?,
        Command::Vflow => (0, vec![vflow(config, format)?]),
        Command::Laplace => (0, vec![laplace(config, format)?]),
        Command::Gzero => (0, vec![gzero(config, format)?]),
        Command::Simulate => {
            let path = path.clone().ok_or_else(|| CliError::Usage("simulate needs --out or CBI_REPORT_DIR".into()))?;
            (0, simulate_cmd(config, format, &path)?)
        }
        Command::Ou => (0, vec![ou(config, format)?]),
    };
    if let Some(first) = reports.first_mut() {
        first.path = path;
    }
    Ok(RunOutcome { exit_code: code, reports })
}

fn text(contents: String) -> Report {
    Report { path: None, contents }
}

fn verdict_cell(v: &cbi_core::Verdict) -> String {
    format!("{:?}", v.value)
}

fn classify(c: &ExperimentConfig, format: Format) -> Result<(i32, Vec<Report>), CliError> {
    let report: ZeroSetReport = classify_zero_state(&psi(c)?, &phi(c)?)?;
    let undecided = report.zero_class == ZeroClass::Inconclusive || report.heavy.is_inconclusive();
    let contents = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut evidence = serde_json::to_value(&report.evidence)?;
            crate::format::round_json(&mut evidence);
            let rows = vec![
                vec!["grey".into(), verdict_cell(&report.grey)],
                vec!["conservative".into(), verdict_cell(&report.conservative)],
                vec!["zero_class".into(), format!("{:?}", report.zero_class)],
                vec!["heavy".into(), verdict_cell(&report.heavy)],
                vec!["intervals".into(), verdict_cell(&report.intervals)],
                vec!["stationary".into(), verdict_cell(&report.stationary)],
                vec!["dim_upper".into(), opt(report.dim_upper)],
                vec!["dim_lower".into(), opt(report.dim_lower)],
                vec!["method".into(), serde_json::to_value(report.method)?.as_str().unwrap_or_default().into()],
                vec!["evidence".into(), evidence.to_string()],
            ];
            to_csv(&["field", "value"], &rows)?
        }
    };
    Ok((if undecided { 2 } else { 0 }, vec![text(contents)]))
}

#[derive(Serialize)]
struct FlowRow {
    t: f64,
    v_t: f64,
    v_t_lambda: Option<f64>,
}

fn vflow(c: &ExperimentConfig, format: Format) -> Result<Report, CliError> {
    let flow = FlowSolver::new(psi(c)?)?;
    let mut rows = Vec::new();
    for &t in &c.t {
        let v_t_lambda = match c.lambda {
            Some(l) => Some(flow.v_from_lambda(t, l)?),
            None => None,
        };
        rows.push(FlowRow { t, v_t: flow.v_from_infinity(t)?, v_t_lambda });
    }
    Ok(text(match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(
            &["t", "v_t", "v_t_lambda"],
            &rows.iter().map(|r| vec![sig(r.t), sig(r.v_t), opt(r.v_t_lambda)]).collect::<Vec<_>>(),
        )?,
    }))
}

fn laplace(c: &ExperimentConfig, format: Format) -> Result<Report, CliError> {
    let law = ZeroSetLaw::new(psi(c)?, phi(c)?)?;
    let summary = law.summary(&c.q)?;
    Ok(text(match format {
        Format::Json => to_json(&summary)?,
        Format::Csv => to_csv(
            &["q", "L"],
            &summary.l_samples.iter().map(|&(q, l)| vec![sig(q), sig(l)]).collect::<Vec<_>>(),
        )?,
    }))
}

#[derive(Serialize)]
struct GzeroRow {
    t: f64,
    density: f64,
    tail: f64,
}

fn gzero(c: &ExperimentConfig, format: Format) -> Result<Report, CliError> {
    let law = ZeroSetLaw::new(psi(c)?, phi(c)?)?;
    let mut rows = Vec::new();
    for &t in &c.t {
        rows.push(GzeroRow { t, density: law.gzero_density(t)?, tail: law.gzero_tail(t)? });
    }
    Ok(text(match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(
            &["t", "density", "tail"],
            &rows.iter().map(|r| vec![sig(r.t), sig(r.density), sig(r.tail)]).collect::<Vec<_>>(),
        )?,
    }))
}

/// Cell exponents: `2^-k` for `k` in `from..=to`.
///
/// By default the smallest cell is the largest power of two below `4 eps`
/// and the grid spans ten octaves, without cells wider than `T/4`.
pub fn grid_range(c: &ExperimentConfig) -> Result<(i32, i32), CliError> {
    let (t, eps) = (c.horizon()?, c.eps()?);
    let to = c.grid_to.unwrap_or_else(|| (1.0 / (4.0 * eps)).log2().floor() as i32);
    let from = c.grid_from.unwrap_or_else(|| (to - 10).max((-(t / 4.0).log2()).ceil() as i32));
    if to < from + 1 {
        return Err(CliError::Usage(format!("box-counting grid 2^-{from}..2^-{to} needs at least two sizes")));
    }
    if 2f64.powi(-to) < eps {
        return Err(CliError::Usage(format!("smallest cell 2^-{to} is below eps = {eps}")));
    }
    Ok((from, to))
}

#[derive(Serialize)]
struct ReplicateRow {
    seed: u64,
    replicate: u64,
    lebesgue: f64,
    g_last: Option<f64>,
    dim_fit: f64,
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    psi: &'a str,
    phi: &'a str,
    #[serde(rename = "T")]
    horizon: f64,
    eps: f64,
    reps: usize,
    seed: u64,
    /// Cell sizes `2^-k` for `k` in this range.
    grid_k: (i32, i32),
    mean_lebesgue: f64,
    mean_g_last: Option<f64>,
    g_last_missing: usize,
    dim_fit_mean: f64,
    dim_fit_sd: f64,
}

fn replicate_rows<C: CuttingTail>(tail: &C, c: &ExperimentConfig) -> Result<Vec<ReplicateRow>, CliError> {
    let (t, seed) = (c.horizon()?, c.seed()?);
    let (from, to) = grid_range(c)?;
    let grid = dyadic_grid(from, to);
    Ok(replicates(c.reps()?, |k| {
        let z = simulate(tail, t, seed, k)?;
        let s = statistics(&z, &grid)?;
        let g_last = if s.g_last_exact { Some(s.g_last) } else { last_zero_within(tail, t, G_LAST_EXTENSION, seed, k)? };
        Ok(ReplicateRow { seed, replicate: k, lebesgue: s.lebesgue, g_last, dim_fit: s.dim() })
    })?)
}

fn mean_sd(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (m, sd)
}

fn simulate_cmd(c: &ExperimentConfig, format: Format, path: &Path) -> Result<Vec<Report>, CliError> {
    let (t, eps) = (c.horizon()?, c.eps()?);
    let sampler = cbi_sampler(&psi(c)?, &phi(c)?, t, eps)?;
    let rows = replicate_rows(&sampler, c)?;
    let (dim_fit_mean, dim_fit_sd) = mean_sd(rows.iter().map(|r| r.dim_fit));
    let g_last: Vec<f64> = rows.iter().filter_map(|r| r.g_last).collect();
    let summary = SimulationSummary {
        psi: c.psi_spec()?,
        phi: c.phi_spec()?,
        horizon: t,
        eps,
        reps: rows.len(),
        seed: c.seed()?,
        grid_k: grid_range(c)?,
        mean_lebesgue: mean_sd(rows.iter().map(|r| r.lebesgue)).0,
        mean_g_last: (!g_last.is_empty()).then(|| mean_sd(g_last.iter().copied()).0),
        g_last_missing: rows.len() - g_last.len(),
        dim_fit_mean,
        dim_fit_sd,
    };
    let table = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(
            &["seed", "replicate", "lebesgue", "g_last", "dim_fit"],
            &rows
                .iter()
                .map(|r| vec![r.seed.to_string(), r.replicate.to_string(), sig(r.lebesgue), opt(r.g_last), sig(r.dim_fit)])
                .collect::<Vec<_>>(),
        )?,
    };
    let mut reports = vec![
        text(table),
        Report { path: Some(sibling(path, "summary.json")), contents: to_json(&summary)? },
    ];
    if c.dump_intervals {
        let z = simulate(&sampler, t, c.seed()?, 0)?;
        let rows: Vec<Vec<String>> = z.intervals.iter().map(|&(a, b)| vec![sig(a), sig(b)]).collect();
        reports.push(Report { path: Some(sibling(path, "intervals.csv")), contents: to_csv(&["start", "end"], &rows)? });
    }
    Ok(reports)
}

#[derive(Serialize)]
struct OuReport {
    class: &'static str,
    alpha: f64,
    dim_theory: f64,
    dim_fit: Option<f64>,
    dim_fit_sd: Option<f64>,
    ks_pushforward: Option<f64>,
    #[serde(rename = "T")]
    horizon: f64,
    eps: f64,
    reps: usize,
    seed: u64,
}

fn ou(c: &ExperimentConfig, format: Format) -> Result<Report, CliError> {
    let alpha = c.alpha()?;
    let mut report = OuReport {
        class: "TrivialPoint",
        alpha,
        dim_theory: 0.0,
        dim_fit: None,
        dim_fit_sd: None,
        ks_pushforward: None,
        horizon: c.horizon()?,
        eps: c.eps()?,
        reps: c.reps()?,
        seed: c.seed()?,
    };
    if let OuZeroSet::CutoutSet { dim, .. } = ou_classify(alpha)? {
        let tail = OuCuttingTail::new(alpha, report.eps)?;
        let rows = replicate_rows(&tail, c)?;
        let (m, sd) = mean_sd(rows.iter().map(|r| r.dim_fit));
        report.class = "CutoutSet";
        report.dim_theory = dim;
        report.dim_fit = Some(m);
        report.dim_fit_sd = Some(sd);
        report.ks_pushforward = Some(pushforward_ks(alpha, PUSHFORWARD_N, PUSHFORWARD_Z0, report.seed)?);
    }
    Ok(text(match format {
        Format::Json => to_json(&report)?,
        Format::Csv => to_csv(
            &["class", "alpha", "dim_theory", "dim_fit", "ks_pushforward"],
            &[vec![
                report.class.into(),
                sig(alpha),
                sig(report.dim_theory),
                opt(report.dim_fit),
                opt(report.ks_pushforward),
            ]],
        )?,
    }))
}
