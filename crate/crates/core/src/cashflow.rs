//! Projected financial returns `C_t` for each instrument type.
//!
//! All payments fall at the end of the year; the initial outflow `C₀`
//! happens at `t = 0` and is not part of the series.

use crate::model::{AnnualSeries, InstrumentTerms, InvariantViolation, InvestmentSpec, Rate};
use crate::money::MoneyAmount;

/// Exact (unrounded) end-of-year annuity payment, in dollars.
pub fn level_payment_exact(
    principal: f64,
    rate: Rate,
    n_years: u32,
) -> Result<f64, InvariantViolation> {
    if n_years == 0 {
        return Err(InvariantViolation::new("n_years", "amortization needs at least one year"));
    }
    let r = rate
        .check_discount()
        .map_err(|e| InvariantViolation::new("rate", e.message))?
        .value();
    if r == 0.0 {
        return Ok(principal / n_years as f64);
    }
    Ok(principal * r / (1.0 - (1.0 + r).powi(-(n_years as i32))))
}

/// Constant payment `P·r / (1 − (1+r)^−n)`, rounded to the cent.
pub fn level_payment(
    principal: MoneyAmount,
    rate: Rate,
    n_years: u32,
) -> Result<MoneyAmount, InvariantViolation> {
    if principal.cents() <= 0 {
        return Err(InvariantViolation::new("principal", "principal must be positive"));
    }
    let exact = level_payment_exact(principal.to_dollars(), rate, n_years)?;
    MoneyAmount::from_dollars_f64(exact).map_err(|e| InvariantViolation::new("principal", e.to_string()))
}

fn interest(principal: MoneyAmount, rate: Rate) -> Result<MoneyAmount, InvariantViolation> {
    MoneyAmount::from_dollars_f64(principal.to_dollars() * rate.value())
        .map_err(|e| InvariantViolation::new("rate", e.to_string()))
}

/// Builds `C_t` for `t = 1..=T` from the instrument terms, then applies the
/// expected-recovery multiplier.
pub fn build_financial_series(spec: &InvestmentSpec) -> Result<AnnualSeries, InvariantViolation> {
    spec.instrument
        .validate(spec.term)
        .map_err(|e| e.within("instrument"))?;
    let years = spec.term.years();
    let c0 = spec.c0;
    let mut flows = vec![MoneyAmount::ZERO; spec.term.len()];

    match spec.instrument {
        InstrumentTerms::InterestOnlyBalloon { rate } => {
            let coupon = interest(c0, rate)?;
            flows.iter_mut().for_each(|f| *f = coupon);
            flows[years as usize - 1] += c0;
        }
        InstrumentTerms::LevelAmortizing { rate } => {
            let payment = level_payment(c0, rate, years)?;
            flows.iter_mut().for_each(|f| *f = payment);
        }
        InstrumentTerms::InterestOnlyThenAmortizing { rate, io_years } => {
            let coupon = interest(c0, rate)?;
            let payment = level_payment(c0, rate, years - io_years)?;
            for (i, f) in flows.iter_mut().enumerate() {
                *f = if (i as u32) < io_years { coupon } else { payment };
            }
        }
        InstrumentTerms::EquityExit {
            exit_proceeds,
            exit_year,
        } => {
            flows[exit_year as usize - 1] = exit_proceeds;
        }
    }

    if spec.expected_recovery != 1.0 {
        for f in flows.iter_mut() {
            *f = MoneyAmount::from_dollars_f64(f.to_dollars() * spec.expected_recovery)
                .map_err(|e| InvariantViolation::new("expected_recovery", e.to_string()))?;
        }
    }
    AnnualSeries::new(flows, spec.term)
}
