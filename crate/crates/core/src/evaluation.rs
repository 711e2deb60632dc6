//! Scenario → valuation: builds both series, applies variability and
//! attribution, values and classifies the investment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cashflow::build_financial_series;
use crate::classification::classify;
use crate::impact::{
    apply_variability, income_uplift_series, jobs_series, rent_gap_series, subsidy_series, IncomeBand,
};
use crate::ingest::{ImpactModel, ScenarioError, ScenarioFile};
use crate::model::{AnnualSeries, Classification, InvariantViolation, Rate};
use crate::money::MoneyAmount;
use crate::solver::RootSearch;
use crate::valuation::{attribution_factor, attribution_schedule, resolve_hurdle_rate, value_investment};
use crate::valuation::{Attribution, ValuationError, ValuationResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluateError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("impact model: {0}")]
    Model(InvariantViolation),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("override `{param}` does not apply: {reason}")]
    Override { param: &'static str, reason: String },
}

impl EvaluateError {
    /// True when the inputs were valid but no impact IRR exists in the search domain.
    pub fn is_solve_failure(&self) -> bool {
        matches!(self, EvaluateError::Valuation(ValuationError::Solve(_)))
    }
}

/// Values substituted into a scenario before evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub hurdle: Option<Rate>,
    pub vacancy: Option<Rate>,
    pub growth: Option<Rate>,
    /// Uniform attribution fraction in place of `C₀/D`.
    pub attribution: Option<f64>,
}

/// Outcome figures that do not depend on the discount rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStats {
    /// Year-1 impact before attribution.
    pub gross_year_one: MoneyAmount,
    /// Sum of the impact series before attribution.
    pub gross_total: MoneyAmount,
    /// Housing models: net annual amount before any growth is applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_annual: Option<MoneyAmount>,
    /// Year-1 impact after attribution.
    pub attributed_year_one: MoneyAmount,
    /// Undiscounted sum of the attributed impact series.
    pub nominal_outcome: MoneyAmount,
    pub beneficiaries: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beneficiary_label: Option<String>,
    /// Base annual (or year-1) gross impact per beneficiary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_beneficiary_annual: Option<MoneyAmount>,
    /// Gross impact per beneficiary summed over the term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_beneficiary_term: Option<MoneyAmount>,
    /// Jobs supported per year, when the model has a compensation basis.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jobs_by_year: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub scenario: ScenarioFile,
    pub financial: AnnualSeries,
    /// Impact after the variability haircut, before attribution
    /// (already attributed when the schedule says so).
    pub impact: AnnualSeries,
    pub haircut: f64,
    pub attribution: Attribution,
    pub valuation: ValuationResult,
    pub classification: Classification,
    pub outcomes: OutcomeStats,
    pub warnings: Vec<String>,
}

fn model_err(e: InvariantViolation) -> EvaluateError {
    EvaluateError::Model(e)
}

fn apply_overrides(scenario: &mut ScenarioFile, o: &Overrides) -> Result<(), EvaluateError> {
    let model = scenario.impact_model.name();
    let housing = match &mut scenario.impact_model {
        ImpactModel::RentGap { housing, .. } | ImpactModel::Subsidy { housing, .. } => Some(housing),
        _ => None,
    };
    let not_housing = |param| EvaluateError::Override {
        param,
        reason: format!("the `{model}` impact model has no housing parameters"),
    };
    match (housing, o.vacancy, o.growth) {
        (_, None, None) => {}
        (Some(h), vacancy, growth) => {
            if let Some(v) = vacancy {
                h.vacancy_rate = v;
            }
            if let Some(g) = growth {
                h.annual_growth = g;
            }
        }
        (None, Some(_), _) => return Err(not_housing("vacancy")),
        (None, None, Some(_)) => return Err(not_housing("growth")),
    }
    Ok(())
}

fn impact_series(scenario: &ScenarioFile) -> Result<(AnnualSeries, bool), EvaluateError> {
    let term = scenario.investment.term;
    Ok(match &scenario.impact_model {
        ImpactModel::RentGap { roll, .. } => (rent_gap_series(roll, &housing_of(scenario), term).map_err(model_err)?, true),
        ImpactModel::Subsidy { subsidies, .. } => {
            (subsidy_series(subsidies, &housing_of(scenario), term).map_err(model_err)?, true)
        }
        ImpactModel::Jobs(p) => (jobs_series(p, term).map_err(model_err)?, true),
        ImpactModel::IncomeUplift(p) => (income_uplift_series(p, term).map_err(model_err)?, true),
        ImpactModel::Explicit(s) => (AnnualSeries::new(s.values.clone(), term).map_err(model_err)?, s.pre_attribution),
    })
}

fn housing_of(scenario: &ScenarioFile) -> crate::impact::HousingParams {
    match &scenario.impact_model {
        ImpactModel::RentGap { housing, .. } | ImpactModel::Subsidy { housing, .. } => *housing,
        _ => unreachable!("only called for housing models"),
    }
}

fn base_annual(scenario: &ScenarioFile) -> Result<Option<MoneyAmount>, EvaluateError> {
    let term = scenario.investment.term;
    let flat = |h: &crate::impact::HousingParams| crate::impact::HousingParams {
        annual_growth: Rate::ZERO,
        growth_from_first_year: false,
        ..*h
    };
    Ok(match &scenario.impact_model {
        ImpactModel::RentGap { roll, housing, .. } => {
            Some(rent_gap_series(roll, &flat(housing), term).map_err(model_err)?.year(1))
        }
        ImpactModel::Subsidy { subsidies, housing, .. } => {
            Some(subsidy_series(subsidies, &flat(housing), term).map_err(model_err)?.year(1))
        }
        _ => None,
    })
}

fn model_beneficiaries(model: &ImpactModel) -> Option<u32> {
    match model {
        ImpactModel::RentGap { roll, .. } => Some(
            roll.iter()
                .filter(|e| e.income_band != IncomeBand::MarketRate)
                .map(|e| e.units)
                .sum(),
        ),
        ImpactModel::Subsidy { subsidies, .. } => Some(subsidies.iter().map(|e| e.units).sum()),
        _ => None,
    }
}

fn per_unit(amount: MoneyAmount, units: Option<u32>) -> Option<MoneyAmount> {
    match units {
        Some(n) if n > 0 => Some(MoneyAmount::from_cents(
            (amount.cents() as f64 / n as f64).round() as i64,
        )),
        _ => None,
    }
}

/// Evaluates a resolved scenario with the default root search.
pub fn evaluate(scenario: &ScenarioFile, overrides: &Overrides) -> Result<Evaluation, EvaluateError> {
    evaluate_with(scenario, overrides, &RootSearch::default())
}

pub fn evaluate_with(
    scenario: &ScenarioFile,
    overrides: &Overrides,
    search: &RootSearch,
) -> Result<Evaluation, EvaluateError> {
    if !scenario.impact_model.is_resolved() {
        return Err(ScenarioError::Invalid {
            path: "impact_model".into(),
            message: "table reference has not been loaded".into(),
        }
        .into());
    }
    let mut scenario = scenario.clone();
    apply_overrides(&mut scenario, overrides)?;
    scenario.validate()?;
    let spec = &scenario.investment;

    let financial = build_financial_series(spec).map_err(|e| EvaluateError::Model(e.within("investment")))?;
    let (raw_impact, pre_attribution) = impact_series(&scenario)?;

    let haircut = match spec.variability_haircut {
        Some(h) => h,
        None => scenario
            .valuation
            .evidence_haircuts
            .unwrap_or_default()
            .for_level(spec.evidence),
    };
    let impact = apply_variability(&raw_impact, haircut).map_err(model_err)?;

    let declared = attribution_factor(spec.c0, spec.tier_total)?;
    let attribution = match (overrides.attribution, pre_attribution) {
        (Some(a), true) => Attribution::Uniform(a),
        (Some(_), false) => {
            return Err(EvaluateError::Override {
                param: "attribution",
                reason: "the impact schedule is already attributed".into(),
            })
        }
        (None, true) => attribution_schedule(spec)?,
        (None, false) => Attribution::Uniform(1.0),
    };
    let reported_attribution = overrides.attribution.unwrap_or(declared);

    let hurdle = match overrides.hurdle {
        Some(r) => r,
        None => resolve_hurdle_rate(spec)?,
    };
    let valuation = value_investment(spec.c0, &financial, &impact, &attribution, reported_attribution, hurdle, search)?;

    let attributed_year_one = valuation.timeline.first().map_or(MoneyAmount::ZERO, |r| r.impact);
    let nominal_outcome: MoneyAmount = valuation.timeline.iter().map(|r| r.impact).sum();
    let projected = valuation.financial_irr.unwrap_or(Rate::new(-1.0).expect("finite"));
    let floor_met =
        scenario
            .thresholds
            .meets_impact_floor(attributed_year_one, nominal_outcome, Some(valuation.impact_irr));
    let classification = classify(projected, &scenario.thresholds, floor_met, scenario.report.mic_first_mover);

    let beneficiaries = scenario.report.beneficiaries.or_else(|| model_beneficiaries(&scenario.impact_model));
    let gross_year_one = impact.year(1);
    let gross_total = impact.total();
    let base_annual = base_annual(&scenario)?;
    let jobs_by_year = match &scenario.impact_model {
        ImpactModel::Jobs(p) if p.avg_compensation.is_some() => impact
            .iter()
            .zip(1u32..)
            .filter_map(|(v, t)| p.jobs_for(v, t))
            .collect(),
        _ => Vec::new(),
    };
    let outcomes = OutcomeStats {
        gross_year_one,
        gross_total,
        base_annual,
        attributed_year_one,
        nominal_outcome,
        beneficiaries,
        beneficiary_label: scenario.report.beneficiary_label.clone(),
        per_beneficiary_annual: per_unit(base_annual.unwrap_or(gross_year_one), beneficiaries),
        per_beneficiary_term: per_unit(gross_total, beneficiaries),
        jobs_by_year,
    };

    let mut warnings = spec.tier_warnings();
    if valuation.multiple_roots {
        warnings.push(format!(
            "the impact NPV has {} roots; the smallest is reported",
            valuation.all_irr_roots.len()
        ));
    }

    Ok(Evaluation {
        financial,
        impact,
        haircut,
        attribution,
        valuation,
        classification,
        outcomes,
        warnings,
        scenario,
    })
}
