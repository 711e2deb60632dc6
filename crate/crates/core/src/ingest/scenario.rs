//! The scenario document: a TOML file with an explicit `schema_version`.
//!
//! Parsing runs in two passes. The text is first read as a plain TOML table
//! so that syntax errors carry a line and column, then the table is mapped
//! onto [`ScenarioFile`] with field paths attached to every type error.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tables::{parse_rent_roll, parse_subsidy_table, TableError};
use crate::classification::Thresholds;
use crate::impact::{HousingParams, IncomeUpliftParams, JobsParams, RentRollEntry, SubsidyEntry};
use crate::model::{EvidenceLevel, InvariantViolation, InvestmentSpec, TermSpec};
use crate::money::MoneyAmount;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown field at `{path}`: {message}")]
    UnknownField { path: String, message: String },
    #[error("invalid value at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("unsupported schema_version {found}; expected {SCHEMA_VERSION}")]
    UnsupportedVersion { found: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("table `{path}` {source}")]
    Table { path: String, source: TableError },
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid { path: path.into(), message: message.into() }
    }

    fn from_violation(prefix: &str, v: InvariantViolation) -> Self {
        let path = if v.path.is_empty() {
            prefix.to_string()
        } else if v.path.starts_with('[') {
            format!("{prefix}{}", v.path)
        } else {
            format!("{prefix}.{}", v.path)
        };
        ScenarioError::Invalid { path, message: v.message }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, ScenarioError::Io { .. })
    }
}

/// An impact series given directly rather than generated by a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSchedule {
    /// One amount per year `1..=T`.
    pub values: Vec<MoneyAmount>,
    /// `false` when the amounts already include the investor's attributed share.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub pre_attribution: bool,
    /// Beneficiary units counted per year, when the schedule has a unit basis.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub units: Vec<f64>,
}

fn yes() -> bool {
    true
}

fn is_true(v: &bool) -> bool {
    *v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImpactModel {
    /// Market rent minus affordable rent over a unit roll.
    RentGap {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        roll: Vec<RentRollEntry>,
        /// CSV file relative to the scenario, used instead of inline rows.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        roll_csv: Option<String>,
        housing: HousingParams,
    },
    /// Per-unit monthly subsidies.
    Subsidy {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        subsidies: Vec<SubsidyEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subsidies_csv: Option<String>,
        housing: HousingParams,
    },
    Jobs(JobsParams),
    IncomeUplift(IncomeUpliftParams),
    Explicit(ExplicitSchedule),
}

impl ImpactModel {
    pub fn name(&self) -> &'static str {
        match self {
            ImpactModel::RentGap { .. } => "rent_gap",
            ImpactModel::Subsidy { .. } => "subsidy",
            ImpactModel::Jobs(_) => "jobs",
            ImpactModel::IncomeUplift(_) => "income_uplift",
            ImpactModel::Explicit(_) => "explicit",
        }
    }

    /// True when every referenced table has been read into the document.
    pub fn is_resolved(&self) -> bool {
        match self {
            ImpactModel::RentGap { roll_csv, .. } => roll_csv.is_none(),
            ImpactModel::Subsidy { subsidies_csv, .. } => subsidies_csv.is_none(),
            _ => true,
        }
    }

    fn validate(&self, term: TermSpec) -> Result<(), ScenarioError> {
        let at = |e: InvariantViolation| ScenarioError::from_violation("impact_model", e);
        match self {
            ImpactModel::RentGap { roll, roll_csv, housing } => {
                housing.validate().map_err(|e| e.within("housing")).map_err(at)?;
                one_source("roll", roll.is_empty(), roll_csv.is_some())
            }
            ImpactModel::Subsidy { subsidies, subsidies_csv, housing } => {
                housing.validate().map_err(|e| e.within("housing")).map_err(at)?;
                one_source("subsidies", subsidies.is_empty(), subsidies_csv.is_some())
            }
            ImpactModel::Jobs(p) => p.validate().map_err(at),
            ImpactModel::IncomeUplift(p) => p.validate(term).map_err(at),
            ImpactModel::Explicit(s) => {
                if s.values.len() != term.len() {
                    return Err(ScenarioError::invalid(
                        "impact_model.values",
                        format!("expected {} yearly values, found {}", term.len(), s.values.len()),
                    ));
                }
                if !s.units.is_empty() && s.units.len() != term.len() {
                    return Err(ScenarioError::invalid(
                        "impact_model.units",
                        format!("expected {} yearly unit counts, found {}", term.len(), s.units.len()),
                    ));
                }
                if let Some(i) = s.units.iter().position(|u| !(u.is_finite() && *u >= 0.0)) {
                    return Err(ScenarioError::invalid(
                        format!("impact_model.units[{i}]"),
                        "unit counts must be non-negative numbers",
                    ));
                }
                Ok(())
            }
        }
    }
}

fn one_source(field: &str, inline_empty: bool, has_csv: bool) -> Result<(), ScenarioError> {
    match (inline_empty, has_csv) {
        (true, false) => Err(ScenarioError::invalid(
            format!("impact_model.{field}"),
            format!("provide inline `{field}` rows or `{field}_csv`"),
        )),
        (false, true) => Err(ScenarioError::invalid(
            format!("impact_model.{field}_csv"),
            format!("`{field}` and `{field}_csv` are mutually exclusive"),
        )),
        _ => Ok(()),
    }
}

/// Presentation inputs for the due-diligence record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOptions {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub asset_class: String,
    /// Singular noun for one beneficiary unit, e.g. "household".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beneficiary_label: Option<String>,
    /// Beneficiary count used for per-unit outcome figures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beneficiaries: Option<u32>,
    /// Market-rate capital that takes first-mover risk counts as catalytic.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mic_first_mover: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Per-year multiplier applied to impact, by level of evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceHaircuts {
    pub scientific_consensus: f64,
    pub empirical_evidence: f64,
    pub model_based: f64,
    pub narrative: f64,
}

impl Default for EvidenceHaircuts {
    fn default() -> Self {
        EvidenceHaircuts {
            scientific_consensus: 1.0,
            empirical_evidence: 1.0,
            model_based: 1.0,
            narrative: 1.0,
        }
    }
}

impl EvidenceHaircuts {
    pub fn for_level(&self, level: EvidenceLevel) -> f64 {
        match level {
            EvidenceLevel::ScientificConsensus => self.scientific_consensus,
            EvidenceLevel::EmpiricalEvidence => self.empirical_evidence,
            EvidenceLevel::ModelBased => self.model_based,
            EvidenceLevel::Narrative => self.narrative,
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let entries = [
            ("scientific_consensus", self.scientific_consensus),
            ("empirical_evidence", self.empirical_evidence),
            ("model_based", self.model_based),
            ("narrative", self.narrative),
        ];
        for (name, h) in entries {
            if !(0.0..=1.0).contains(&h) {
                return Err(ScenarioError::invalid(
                    format!("valuation.evidence_haircuts.{name}"),
                    format!("haircut {h} must lie in [0, 1]"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationOptions {
    /// Used when the investment has no explicit `variability_haircut`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_haircuts: Option<EvidenceHaircuts>,
}

impl ValuationOptions {
    fn is_default(&self) -> bool {
        *self == ValuationOptions::default()
    }
}

/// A headline quantity that a published figure can be compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ImpactIrr,
    FinancialIrr,
    InpvAtHurdle,
    YearOneImpact,
    /// Housing models: net annual outcome before growth.
    BaseAnnualOutcome,
    /// Sum of the attributed impact series, undiscounted.
    NominalOutcome,
    PerBeneficiaryAnnual,
    /// Financial flow in `year`.
    FinancialFlow,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::ImpactIrr => "impact IRR",
            Metric::FinancialIrr => "financial IRR",
            Metric::InpvAtHurdle => "INPV at hurdle",
            Metric::YearOneImpact => "year-1 impact",
            Metric::BaseAnnualOutcome => "net annual outcome before growth",
            Metric::NominalOutcome => "nominal outcome",
            Metric::PerBeneficiaryAnnual => "per-beneficiary annual",
            Metric::FinancialFlow => "financial flow",
        }
    }

    pub fn is_rate(self) -> bool {
        matches!(self, Metric::ImpactIrr | Metric::FinancialIrr)
    }
}

/// A published figure and the band a reproduction must land in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedFigure {
    pub metric: Metric,
    pub published: f64,
    pub min: f64,
    pub max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<u32>,
    /// `false` marks a figure that is shown for comparison but not checked.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub gate: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: i64,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub title: String,
    pub investment: InvestmentSpec,
    pub impact_model: ImpactModel,
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "is_default_report")]
    pub report: ReportOptions,
    #[serde(default, skip_serializing_if = "ValuationOptions::is_default")]
    pub valuation: ValuationOptions,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference: Vec<PublishedFigure>,
}

fn is_default_report(r: &ReportOptions) -> bool {
    *r == ReportOptions::default()
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::UnsupportedVersion { found: self.schema_version.to_string() });
        }
        if self.name.trim().is_empty() {
            return Err(ScenarioError::invalid("name", "scenario name must not be empty"));
        }
        self.investment
            .validate()
            .map_err(|e| ScenarioError::from_violation("investment", e))?;
        self.impact_model.validate(self.investment.term)?;
        self.thresholds
            .validate()
            .map_err(|e| ScenarioError::from_violation("thresholds", e))?;
        if let Some(h) = &self.valuation.evidence_haircuts {
            h.validate()?;
        }
        if self.report.beneficiaries == Some(0) {
            return Err(ScenarioError::invalid("report.beneficiaries", "must be positive when given"));
        }
        for (i, r) in self.reference.iter().enumerate() {
            let path = format!("reference[{i}]");
            if !(r.min.is_finite() && r.max.is_finite() && r.published.is_finite()) || r.min > r.max {
                return Err(ScenarioError::invalid(path, "need finite values with min <= max"));
            }
            if r.metric == Metric::FinancialFlow
                && !r.year.is_some_and(|y| y >= 1 && y <= self.investment.term.years())
            {
                return Err(ScenarioError::invalid(format!("{path}.year"), "financial_flow needs a year within the term"));
            }
        }
        Ok(())
    }

    /// Reads every referenced table through `read` and inlines its rows.
    pub fn resolve_with<F>(mut self, mut read: F) -> Result<ScenarioFile, ScenarioError>
    where
        F: FnMut(&str) -> Result<String, ScenarioError>,
    {
        match &mut self.impact_model {
            ImpactModel::RentGap { roll, roll_csv, .. } => {
                if let Some(file) = roll_csv.take() {
                    let text = read(&file)?;
                    *roll = parse_rent_roll(&text).map_err(|source| ScenarioError::Table { path: file, source })?;
                }
            }
            ImpactModel::Subsidy { subsidies, subsidies_csv, .. } => {
                if let Some(file) = subsidies_csv.take() {
                    let text = read(&file)?;
                    *subsidies =
                        parse_subsidy_table(&text).map_err(|source| ScenarioError::Table { path: file, source })?;
                }
            }
            _ => {}
        }
        Ok(self)
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a scenario document. Table references are left unresolved.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ScenarioError::Syntax { line, column, message: e.message().to_string() }
    })?;

    match table.get("schema_version") {
        None => return Err(ScenarioError::invalid("schema_version", "missing; this build reads version 1")),
        Some(toml::Value::Integer(SCHEMA_VERSION)) => {}
        Some(other) => return Err(ScenarioError::UnsupportedVersion { found: other.to_string() }),
    }

    let scenario: ScenarioFile =
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let message = e.into_inner().message().to_string();
            if message.starts_with("unknown field") {
                ScenarioError::UnknownField { path, message }
            } else {
                ScenarioError::Invalid { path, message }
            }
        })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn serialize_scenario(scenario: &ScenarioFile) -> String {
    toml::to_string_pretty(scenario).expect("scenario documents always serialize")
}

/// Reads, parses and resolves a scenario file; tables are looked up next to it.
pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text)?.resolve_with(|file| {
        let full = base.join(file);
        std::fs::read_to_string(&full).map_err(|e| ScenarioError::Io { path: full, message: e.to_string() })
    })
}
