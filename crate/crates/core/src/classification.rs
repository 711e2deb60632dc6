//! Capital classification against impact and financial thresholds,
//! catalytic flags, deadweight policy and blended cost of capital.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CapitalClass, Classification, Rate};
use crate::money::MoneyAmount;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassificationError {
    #[error("required tier capital must not be negative")]
    NegativeRequiredCapital,
    #[error("investment amounts must be positive (investor `{0}`)")]
    NonPositiveAmount(String),
    #[error("no tranches or investors supplied")]
    Empty,
    #[error("tranche amounts sum to zero")]
    ZeroTotal,
}

/// What an investment must achieve on the impact axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImpactFloor {
    /// The scenario author asserts whether the floor is met.
    Asserted { met: bool },
    /// Minimum attributed impact return in year 1.
    MinAnnualImpact { amount: MoneyAmount },
    /// Minimum impact IRR.
    MinImpactIrr { rate: Rate },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Minimum return required of market-rate capital (inclusive).
    pub market_rate_floor: Rate,
    pub impact_floor: ImpactFloor,
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), crate::model::InvariantViolation> {
        self.market_rate_floor
            .check_non_negative()
            .map_err(|e| crate::model::InvariantViolation::new("market_rate_floor", e.message))?;
        Ok(())
    }

    /// Evaluates the impact floor. An investment with no positive impact
    /// never meets it.
    pub fn meets_impact_floor(&self, year_one_impact: MoneyAmount, total_impact: MoneyAmount, impact_irr: Option<Rate>) -> bool {
        if total_impact.cents() <= 0 {
            return false;
        }
        match self.impact_floor {
            ImpactFloor::Asserted { met } => met,
            ImpactFloor::MinAnnualImpact { amount } => year_one_impact >= amount,
            ImpactFloor::MinImpactIrr { rate } => impact_irr.is_some_and(|irr| irr.value() >= rate.value()),
        }
    }
}

/// Returns within this distance below the market floor count as meeting it.
pub const RETURN_TOLERANCE: f64 = 1e-6;

pub fn classify_capital(projected_return: Rate, thresholds: &Thresholds, meets_impact_floor: bool) -> CapitalClass {
    let r = projected_return.value();
    // IRRs of cent-rounded flows can land a hair under their coupon
    let floor = thresholds.market_rate_floor.value() - RETURN_TOLERANCE;
    match (meets_impact_floor, r >= floor) {
        (false, true) => CapitalClass::Traditional,
        (false, false) => CapitalClass::NonInvestable,
        (true, true) => CapitalClass::MarketRateImpact,
        (true, false) if r >= 0.0 => CapitalClass::BelowMarketImpact,
        (true, false) => CapitalClass::Grant,
    }
}

/// Below-market capital is catalytic by definition; market-rate capital only
/// when a first-mover premium is asserted.
pub fn catalytic_flag(class: CapitalClass, mic_first_mover: bool) -> bool {
    match class {
        CapitalClass::BelowMarketImpact => true,
        CapitalClass::MarketRateImpact => mic_first_mover,
        _ => false,
    }
}

pub fn classify(projected_return: Rate, thresholds: &Thresholds, meets_impact_floor: bool, mic_first_mover: bool) -> Classification {
    let class = classify_capital(projected_return, thresholds, meets_impact_floor);
    Classification {
        class,
        catalytic: catalytic_flag(class, mic_first_mover),
    }
}

/// Aggregate class of several tranches in one structure.
pub fn aggregate_class(classes: &[CapitalClass]) -> Option<CapitalClass> {
    let first = *classes.first()?;
    if classes.iter().all(|&c| c == first) {
        return Some(first);
    }
    let has = |c: CapitalClass| classes.contains(&c);
    if has(CapitalClass::BelowMarketImpact) && has(CapitalClass::MarketRateImpact) {
        Some(CapitalClass::Blended)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadweightPolicy {
    /// Every investor gets `amount / Σ amounts`.
    ProRata,
    /// Only `required_tier_capital` earns attribution; the surplus earns none.
    ReduceSurplus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvestorShare {
    pub investor: String,
    pub fraction: f64,
}

pub fn deadweight_adjust(
    tier_investments: &[(String, MoneyAmount)],
    required_tier_capital: MoneyAmount,
    policy: DeadweightPolicy,
) -> Result<Vec<InvestorShare>, ClassificationError> {
    if required_tier_capital.is_negative() {
        return Err(ClassificationError::NegativeRequiredCapital);
    }
    if tier_investments.is_empty() {
        return Err(ClassificationError::Empty);
    }
    if let Some((name, _)) = tier_investments.iter().find(|(_, a)| a.cents() <= 0) {
        return Err(ClassificationError::NonPositiveAmount(name.clone()));
    }
    let total: MoneyAmount = tier_investments.iter().map(|(_, a)| *a).sum();
    let total = total.cents() as f64;
    let scale = match policy {
        DeadweightPolicy::ProRata => 1.0,
        DeadweightPolicy::ReduceSurplus => (required_tier_capital.cents() as f64 / total).min(1.0),
    };
    Ok(tier_investments
        .iter()
        .map(|(investor, amount)| InvestorShare {
            investor: investor.clone(),
            fraction: amount.cents() as f64 / total * scale,
        })
        .collect())
}

/// `Σ amount · rate / Σ amount`.
pub fn blended_wacc(tranches: &[(MoneyAmount, Rate)]) -> Result<Rate, ClassificationError> {
    if tranches.is_empty() {
        return Err(ClassificationError::Empty);
    }
    let total: MoneyAmount = tranches.iter().map(|(a, _)| *a).sum();
    if total.cents() <= 0 {
        return Err(ClassificationError::ZeroTotal);
    }
    let weighted: f64 = tranches
        .iter()
        .map(|(a, r)| a.cents() as f64 * r.value())
        .sum();
    Ok(Rate::new(weighted / total.cents() as f64).expect("finite weighted mean"))
}
