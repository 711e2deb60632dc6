//! Impact NPV and impact IRR.
//!
//! ```text
//! INPV(r) = Σ_{t=1..T} (C_t + I_t · a_t) / (1+r)^t − C₀
//! ```
//!
//! `a_t` is the attribution fraction `C₀/D` for year `t`. It is usually
//! constant, but a tier total that changes partway through the term gives a
//! per-year schedule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cashflow::build_financial_series;
use crate::model::{AnnualSeries, HurdlePolicy, InvariantViolation, InvestmentSpec, Rate};
use crate::money::MoneyAmount;
use crate::solver::{present_value, RootSearch, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error("financial series has {financial} years but impact series has {impact}")]
    LengthMismatch { financial: usize, impact: usize },
    #[error("discount rate {0} must be greater than -1")]
    RateOutOfDomain(f64),
    #[error("tier total must be positive")]
    ZeroTierTotal,
    #[error("initial investment {c0} exceeds the tier total {tier_total}; check the tier assignment")]
    C0ExceedsTierTotal { c0: MoneyAmount, tier_total: MoneyAmount },
    #[error("invalid attribution: {0}")]
    Attribution(String),
    #[error("below-market hurdle policy needs a comparable market rate")]
    MissingMarketRate,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

/// Attribution fraction(s) `a_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Attribution {
    Uniform(f64),
    PerYear(Vec<f64>),
}

impl Attribution {
    pub fn at(&self, year: usize) -> f64 {
        match self {
            Attribution::Uniform(a) => *a,
            Attribution::PerYear(v) => v[year - 1],
        }
    }

    fn check(&self, years: usize) -> Result<(), ValuationError> {
        let in_range = |a: f64| (0.0..=1.0).contains(&a);
        match self {
            Attribution::Uniform(a) if in_range(*a) => Ok(()),
            Attribution::Uniform(a) => Err(ValuationError::Attribution(format!("{a} is outside [0, 1]"))),
            Attribution::PerYear(v) if v.len() != years => Err(ValuationError::Attribution(format!(
                "{} per-year fractions for a {years}-year term",
                v.len()
            ))),
            Attribution::PerYear(v) => match v.iter().find(|a| !in_range(**a)) {
                Some(a) => Err(ValuationError::Attribution(format!("{a} is outside [0, 1]"))),
                None => Ok(()),
            },
        }
    }

    /// The same fraction every year, if there is one.
    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            Attribution::Uniform(a) => Some(*a),
            Attribution::PerYear(v) => {
                let first = *v.first()?;
                v.iter().all(|&a| a == first).then_some(first)
            }
        }
    }
}

/// `C₀ / D`.
pub fn attribution_factor(c0: MoneyAmount, tier_total: MoneyAmount) -> Result<f64, ValuationError> {
    if tier_total.cents() <= 0 {
        return Err(ValuationError::ZeroTierTotal);
    }
    if c0.cents() <= 0 {
        return Err(ValuationError::Attribution("initial investment must be positive".into()));
    }
    if c0 > tier_total {
        return Err(ValuationError::C0ExceedsTierTotal { c0, tier_total });
    }
    Ok(c0.cents() as f64 / tier_total.cents() as f64)
}

/// Per-year attribution from the investment's tier total and any tier windows.
pub fn attribution_schedule(spec: &InvestmentSpec) -> Result<Attribution, ValuationError> {
    let fractions = spec
        .tier_totals()
        .into_iter()
        .map(|d| attribution_factor(spec.c0, d))
        .collect::<Result<Vec<_>, _>>()?;
    let attribution = Attribution::PerYear(fractions);
    Ok(match attribution.uniform_value() {
        Some(a) => Attribution::Uniform(a),
        None => attribution,
    })
}

/// `[−C₀, C_1 + I_1·a_1, …, C_T + I_T·a_T]` in dollars.
pub fn combined_flows(
    financial: &AnnualSeries,
    impact: &AnnualSeries,
    attribution: &Attribution,
    c0: MoneyAmount,
) -> Result<Vec<f64>, ValuationError> {
    if financial.len() != impact.len() {
        return Err(ValuationError::LengthMismatch {
            financial: financial.len(),
            impact: impact.len(),
        });
    }
    attribution.check(financial.len())?;
    let mut flows = Vec::with_capacity(financial.len() + 1);
    flows.push(-c0.to_dollars());
    for (t, (c, i)) in financial.iter().zip(impact.iter()).enumerate() {
        flows.push(c.to_dollars() + i.to_dollars() * attribution.at(t + 1));
    }
    Ok(flows)
}

fn check_rate(rate: Rate) -> Result<f64, ValuationError> {
    let r = rate.value();
    if r > -1.0 {
        Ok(r)
    } else {
        Err(ValuationError::RateOutOfDomain(r))
    }
}

/// Impact NPV in dollars, unrounded.
pub fn inpv_dollars(
    financial: &AnnualSeries,
    impact: &AnnualSeries,
    attribution: &Attribution,
    rate: Rate,
    c0: MoneyAmount,
) -> Result<f64, ValuationError> {
    let r = check_rate(rate)?;
    let flows = combined_flows(financial, impact, attribution, c0)?;
    Ok(present_value(&flows, r))
}

pub fn inpv(
    financial: &AnnualSeries,
    impact: &AnnualSeries,
    attribution: &Attribution,
    rate: Rate,
    c0: MoneyAmount,
) -> Result<MoneyAmount, ValuationError> {
    let value = inpv_dollars(financial, impact, attribution, rate, c0)?;
    MoneyAmount::from_dollars_f64(value)
        .map_err(|e| ValuationError::Invariant(InvariantViolation::new("inpv", e.to_string())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrSolution {
    /// The unique root, or the smallest one when there are several.
    pub headline: Rate,
    pub all_roots: Vec<Rate>,
    /// Some root touches zero without crossing it.
    pub touching_root: bool,
}

impl IrrSolution {
    pub fn is_ambiguous(&self) -> bool {
        self.all_roots.len() > 1 || self.touching_root
    }
}

pub fn solve_flows(flows: &[f64], search: &RootSearch) -> Result<IrrSolution, ValuationError> {
    let roots = search.find_roots(flows)?;
    Ok(IrrSolution {
        headline: Rate::new(roots[0].rate)?,
        all_roots: roots.iter().map(|r| Rate::new(r.rate)).collect::<Result<_, _>>()?,
        touching_root: roots.iter().any(|r| r.touching),
    })
}

pub fn impact_irr(
    financial: &AnnualSeries,
    impact: &AnnualSeries,
    attribution: &Attribution,
    c0: MoneyAmount,
) -> Result<IrrSolution, ValuationError> {
    impact_irr_with(financial, impact, attribution, c0, &RootSearch::default())
}

pub fn impact_irr_with(
    financial: &AnnualSeries,
    impact: &AnnualSeries,
    attribution: &Attribution,
    c0: MoneyAmount,
    search: &RootSearch,
) -> Result<IrrSolution, ValuationError> {
    let flows = combined_flows(financial, impact, attribution, c0)?;
    solve_flows(&flows, search)
}

/// IRR of the financial flows alone.
pub fn financial_irr(financial: &AnnualSeries, c0: MoneyAmount) -> Result<IrrSolution, ValuationError> {
    financial_irr_with(financial, c0, &RootSearch::default())
}

pub fn financial_irr_with(
    financial: &AnnualSeries,
    c0: MoneyAmount,
    search: &RootSearch,
) -> Result<IrrSolution, ValuationError> {
    impact_irr_with(financial, &AnnualSeries::zeros(financial.term()), &Attribution::Uniform(0.0), c0, search)
}

/// Hurdle rate `r` implied by the investment's hurdle policy.
///
/// Debt instruments use their coupon as their own projected return; equity
/// uses the IRR of its projected financial flows.
pub fn resolve_hurdle_rate(spec: &InvestmentSpec) -> Result<Rate, ValuationError> {
    let rate = match spec.hurdle {
        HurdlePolicy::Explicit { rate } => rate,
        HurdlePolicy::BicOpportunityCost { market_rate } => market_rate.ok_or(ValuationError::MissingMarketRate)?,
        HurdlePolicy::MicOwnRate => match spec.instrument.coupon_rate() {
            Some(rate) => rate,
            None => {
                let financial = build_financial_series(spec)?;
                financial_irr(&financial, spec.c0)?.headline
            }
        },
    };
    check_rate(rate)?;
    Ok(rate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub year: u32,
    pub financial: MoneyAmount,
    /// Attribution fraction applied this year (1 when the schedule was already attributed).
    pub attribution: f64,
    /// Attributed impact return.
    pub impact: MoneyAmount,
    pub total: MoneyAmount,
    /// Total discounted at the hurdle rate.
    pub discounted: MoneyAmount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationResult {
    pub hurdle_rate: Rate,
    pub inpv_at_hurdle: MoneyAmount,
    pub impact_irr: Rate,
    pub all_irr_roots: Vec<Rate>,
    pub multiple_roots: bool,
    /// `None` when the financial flows alone have no IRR (e.g. a pure grant).
    pub financial_irr: Option<Rate>,
    /// Declared `C₀/D` for year 1.
    pub attribution_factor: f64,
    pub timeline: Vec<TimelineRow>,
}

fn cents(value: f64) -> Result<MoneyAmount, ValuationError> {
    MoneyAmount::from_dollars_f64(value)
        .map_err(|e| ValuationError::Invariant(InvariantViolation::new("timeline", e.to_string())))
}

/// Full valuation of one investment at `hurdle`.
pub fn value_investment(
    c0: MoneyAmount,
    financial: &AnnualSeries,
    impact: &AnnualSeries,
    attribution: &Attribution,
    declared_attribution: f64,
    hurdle: Rate,
    search: &RootSearch,
) -> Result<ValuationResult, ValuationError> {
    let r = check_rate(hurdle)?;
    let flows = combined_flows(financial, impact, attribution, c0)?;
    let inpv_value = present_value(&flows, r);
    let irr = solve_flows(&flows, search)?;
    let fin_irr = match financial_irr_with(financial, c0, search) {
        Ok(sol) => Some(sol.headline),
        Err(ValuationError::Solve(_)) => None,
        Err(e) => return Err(e),
    };

    let mut timeline = Vec::with_capacity(financial.len());
    #[allow(clippy::needless_range_loop)] // years are 1-based across several series
    for t in 1..=financial.len() {
        let a = attribution.at(t);
        let impact_t = impact.year(t).to_dollars() * a;
        let total = flows[t];
        timeline.push(TimelineRow {
            year: t as u32,
            financial: financial.year(t),
            attribution: a,
            impact: cents(impact_t)?,
            total: cents(total)?,
            discounted: cents(total / (1.0 + r).powi(t as i32))?,
        });
    }

    Ok(ValuationResult {
        hurdle_rate: hurdle,
        inpv_at_hurdle: cents(inpv_value)?,
        impact_irr: irr.headline,
        multiple_roots: irr.is_ambiguous(),
        all_irr_roots: irr.all_roots,
        financial_irr: fin_irr,
        attribution_factor: declared_attribution,
        timeline,
    })
}
