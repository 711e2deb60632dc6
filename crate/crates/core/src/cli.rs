//! Command-line interface.
//!
//! Exit codes: 0 success, 1 a reproduction missed a published figure,
//! 2 invalid input, 3 no impact IRR in the search domain, 4 I/O failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::evaluation::{evaluate, EvaluateError, Overrides};
use crate::ingest::{load_scenario, parse_scenario, Metric, PublishedFigure, ScenarioError, ScenarioFile};
use crate::model::Rate;
use crate::report::{build_report, render, DueDiligenceRecord, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable naming the default output format.
pub const FORMAT_ENV: &str = "IMPACT_IRR_FORMAT";

#[derive(Debug, Parser)]
#[command(name = "impact-irr", version, about = "Impact NPV and impact IRR for impact investments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Value one scenario file.
    Evaluate {
        path: PathBuf,
        #[arg(long, value_enum, env = FORMAT_ENV, default_value = "text")]
        format: Format,
        /// Discount at this rate instead of the scenario's hurdle policy.
        #[arg(long, value_parser = parse_rate)]
        hurdle: Option<Rate>,
    },
    /// Run a bundled case and compare it with its published figures.
    Reproduce {
        #[arg(value_enum)]
        case: Case,
        #[arg(long, value_enum, env = FORMAT_ENV, default_value = "text")]
        format: Format,
    },
    /// Re-value a scenario over a grid of one parameter; writes CSV.
    Sweep {
        path: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Ff,
    Lisc,
    FfcpDt1,
    FfcpDt2,
    Learn,
}

impl Case {
    pub const ALL: [Case; 5] = [Case::Ff, Case::Lisc, Case::FfcpDt1, Case::FfcpDt2, Case::Learn];

    pub fn file_name(self) -> &'static str {
        match self {
            Case::Ff => "ff.scenario",
            Case::Lisc => "lisc.scenario",
            Case::FfcpDt1 => "ffcp-dt1.scenario",
            Case::FfcpDt2 => "ffcp-dt2.scenario",
            Case::Learn => "learn.scenario",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Hurdle,
    Vacancy,
    Growth,
    Attribution,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Hurdle => "hurdle",
            SweepParam::Vacancy => "vacancy",
            SweepParam::Growth => "growth",
            SweepParam::Attribution => "attribution",
        }
    }
}

const BUNDLED: [(&str, &str); 7] = [
    ("ff.scenario", include_str!("../../../scenarios/ff.scenario")),
    ("ff_rent_roll.csv", include_str!("../../../scenarios/ff_rent_roll.csv")),
    ("lisc.scenario", include_str!("../../../scenarios/lisc.scenario")),
    ("lisc_subsidies.csv", include_str!("../../../scenarios/lisc_subsidies.csv")),
    ("ffcp-dt1.scenario", include_str!("../../../scenarios/ffcp-dt1.scenario")),
    ("ffcp-dt2.scenario", include_str!("../../../scenarios/ffcp-dt2.scenario")),
    ("learn.scenario", include_str!("../../../scenarios/learn.scenario")),
];

fn bundled_file(name: &str) -> Result<String, ScenarioError> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| ScenarioError::Io {
            path: PathBuf::from(name),
            message: "not a bundled file".into(),
        })
}

/// Raw text of a bundled scenario, before table references are resolved.
pub fn bundled_scenario_text(case: Case) -> &'static str {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == case.file_name())
        .map(|(_, text)| *text)
        .expect("every case is bundled")
}

/// A bundled scenario with its tables inlined.
pub fn bundled_scenario(case: Case) -> Result<ScenarioFile, ScenarioError> {
    parse_scenario(bundled_scenario_text(case))?.resolve_with(bundled_file)
}

fn parse_rate(s: &str) -> Result<Rate, String> {
    if s.contains('%') {
        return Err(format!("percent signs are not accepted (`{s}`); write a decimal fraction such as 0.06"));
    }
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    Rate::new(v)
        .and_then(Rate::check_discount)
        .map_err(|e| e.message)
}

fn exit_code(e: &EvaluateError) -> i32 {
    match e {
        EvaluateError::Scenario(s) if s.is_io() => EXIT_IO,
        e if e.is_solve_failure() => EXIT_SOLVE,
        _ => EXIT_INVALID,
    }
}

/// Outcome of comparing one published figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub figure: PublishedFigure,
    pub computed: Option<f64>,
    pub passed: bool,
}

pub fn metric_value(record: &DueDiligenceRecord, metric: Metric, year: Option<u32>) -> Option<f64> {
    match metric {
        Metric::ImpactIrr => Some(record.impact_irr.value()),
        Metric::FinancialIrr => record.projected_irr.map(Rate::value),
        Metric::InpvAtHurdle => Some(record.inpv_at_hurdle.to_dollars()),
        Metric::YearOneImpact => Some(record.outcomes.gross_year_one.to_dollars()),
        Metric::BaseAnnualOutcome => record.outcomes.base_annual.map(|m| m.to_dollars()),
        Metric::NominalOutcome => Some(record.nominal_outcome.to_dollars()),
        Metric::PerBeneficiaryAnnual => record.outcomes.per_beneficiary_annual.map(|m| m.to_dollars()),
        Metric::FinancialFlow => {
            let t = year? as usize;
            record.timeline.get(t.checked_sub(1)?).map(|r| r.financial.to_dollars())
        }
    }
}

pub fn compare(record: &DueDiligenceRecord, figures: &[PublishedFigure]) -> Vec<Comparison> {
    figures
        .iter()
        .map(|f| {
            let computed = metric_value(record, f.metric, f.year);
            let passed = computed.is_some_and(|v| v >= f.min && v <= f.max);
            Comparison { figure: f.clone(), computed, passed }
        })
        .collect()
}

fn fmt_metric(metric: Metric, v: f64) -> String {
    if metric.is_rate() {
        format!("{:.2}%", v * 100.0)
    } else {
        let m = crate::money::MoneyAmount::from_dollars_f64(v).unwrap_or_default();
        format!("${}", m.display_dollars())
    }
}

pub fn render_comparisons(rows: &[Comparison]) -> String {
    let mut table: Vec<[String; 5]> = vec![[
        "Metric".into(),
        "Published".into(),
        "Computed".into(),
        "Accepted range".into(),
        "Status".into(),
    ]];
    for c in rows {
        let f = &c.figure;
        let label = match f.year {
            Some(y) => format!("{} (year {y})", f.metric.label()),
            None => f.metric.label().to_string(),
        };
        let status = match (f.gate, c.passed) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        table.push([
            label,
            fmt_metric(f.metric, f.published),
            c.computed.map_or("n/a".into(), |v| fmt_metric(f.metric, v)),
            format!("{} .. {}", fmt_metric(f.metric, f.min), fmt_metric(f.metric, f.max)),
            status.into(),
        ]);
    }
    let widths: Vec<usize> = (0..5)
        .map(|i| table.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    for c in rows.iter().filter(|c| !c.figure.note.is_empty()) {
        out.push_str(&format!("  {}: {}\n", c.figure.metric.label(), c.figure.note));
    }
    out
}

/// Grid `from, from+step, …` up to `to` inclusive (within rounding).
pub fn sweep_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err("range bounds and step must be finite numbers".into());
    }
    if step <= 0.0 {
        return Err(format!("step must be positive, got {step}"));
    }
    if to < from {
        return Err(format!("empty range: --from {from} is above --to {to}"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(format!("range has {} points; the limit is 1000000", n + 1));
    }
    // rounding to 1e-12 keeps printed grid values free of accumulated drift
    Ok((0..=n).map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12).collect())
}

fn sweep_overrides(param: SweepParam, value: f64) -> Result<Overrides, String> {
    let rate = || Rate::new(value).map_err(|e| e.message);
    let mut o = Overrides::default();
    match param {
        SweepParam::Hurdle => o.hurdle = Some(rate()?),
        SweepParam::Vacancy => o.vacancy = Some(rate()?),
        SweepParam::Growth => o.growth = Some(rate()?),
        SweepParam::Attribution => {
            if !(0.0..=1.0).contains(&value) {
                return Err(format!("attribution {value} is outside [0, 1]"));
            }
            o.attribution = Some(value)
        }
    }
    Ok(o)
}

/// One CSV row per grid point: `<param>,inpv_at_hurdle,impact_irr,status`.
pub fn sweep_csv(scenario: &ScenarioFile, param: SweepParam, grid: &[f64]) -> String {
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&value| {
            let result = sweep_overrides(param, value)
                .map_err(|m| format!("invalid: {m}"))
                .and_then(|o| {
                    evaluate(scenario, &o).map_err(|e| {
                        let kind = if e.is_solve_failure() { "no_root" } else { "invalid" };
                        format!("{kind}: {e}")
                    })
                });
            match result {
                Ok(e) => format!(
                    "{value},{},{:.10},ok",
                    e.valuation.inpv_at_hurdle,
                    e.valuation.impact_irr.value()
                ),
                Err(status) => format!("{value},,,{}", csv_field(&status)),
            }
        })
        .collect();
    let mut out = format!("{},inpv_at_hurdle,impact_irr,status\n", param.name());
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn load(path: &Path, err: &mut dyn Write) -> Result<ScenarioFile, i32> {
    load_scenario(path).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        if e.is_io() {
            EXIT_IO
        } else {
            EXIT_INVALID
        }
    })
}

fn cmd_evaluate(path: &Path, format: Format, hurdle: Option<Rate>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let scenario = match load(path, err) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let overrides = Overrides { hurdle, ..Overrides::default() };
    match evaluate(&scenario, &overrides) {
        Ok(e) => {
            let _ = out.write_all(render(&build_report(&e), format).as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            exit_code(&e)
        }
    }
}

fn cmd_reproduce(case: Case, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let scenario = match bundled_scenario(case) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: bundled {}: {e}", case.file_name());
            return EXIT_INVALID;
        }
    };
    let evaluation = match evaluate(&scenario, &Overrides::default()) {
        Ok(e) => e,
        Err(e) => {
            let _ = writeln!(err, "error: bundled {}: {e}", case.file_name());
            return exit_code(&e);
        }
    };
    let record = build_report(&evaluation);
    let comparisons = compare(&record, &scenario.reference);
    let _ = out.write_all(render(&record, format).as_bytes());
    let table = render_comparisons(&comparisons);
    // keep machine-readable formats clean on stdout
    let _ = match format {
        Format::Text => writeln!(out, "\nPublished figures\n{table}"),
        Format::Json | Format::Csv => write!(err, "{table}"),
    };
    if comparisons.iter().all(|c| c.passed || !c.figure.gate) {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

fn cmd_sweep(path: &Path, param: SweepParam, from: f64, to: f64, step: f64, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let grid = match sweep_grid(from, to, step) {
        Ok(g) => g,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_INVALID;
        }
    };
    let scenario = match load(path, err) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let _ = out.write_all(sweep_csv(&scenario, param, &grid).as_bytes());
    EXIT_OK
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match cli.command {
        Command::Evaluate { path, format, hurdle } => cmd_evaluate(&path, format, hurdle, out, err),
        Command::Reproduce { case, format } => cmd_reproduce(case, format, out, err),
        Command::Sweep { path, param, from, to, step } => cmd_sweep(&path, param, from, to, step, out, err),
    }
}
