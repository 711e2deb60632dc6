//! Monetization models producing the projected impact series `I_t`.
//!
//! Every generator returns the pre-attribution series; the attribution
//! fraction `C₀/D` is applied during valuation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{AnnualSeries, InvariantViolation, Rate, TermSpec};
use crate::money::MoneyAmount;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncomeBand {
    Ami30,
    Ami50,
    Ami60,
    Ami80,
    MarketRate,
}

impl IncomeBand {
    pub fn as_str(self) -> &'static str {
        match self {
            IncomeBand::Ami30 => "ami30",
            IncomeBand::Ami50 => "ami50",
            IncomeBand::Ami60 => "ami60",
            IncomeBand::Ami80 => "ami80",
            IncomeBand::MarketRate => "market_rate",
        }
    }
}

impl fmt::Display for IncomeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IncomeBand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ami30" => Ok(IncomeBand::Ami30),
            "ami50" => Ok(IncomeBand::Ami50),
            "ami60" => Ok(IncomeBand::Ami60),
            "ami80" => Ok(IncomeBand::Ami80),
            "market_rate" => Ok(IncomeBand::MarketRate),
            other => Err(format!(
                "unknown income band `{other}` (expected ami30, ami50, ami60, ami80 or market_rate)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RentRollEntry {
    pub income_band: IncomeBand,
    pub bedrooms: u32,
    /// Monthly rent paid by the household.
    pub affordable_rent: MoneyAmount,
    /// Monthly rent of a comparable market-rate unit.
    pub market_rent: MoneyAmount,
    pub units: u32,
}

impl RentRollEntry {
    pub fn monthly_gap(&self) -> MoneyAmount {
        self.market_rent - self.affordable_rent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsidyEntry {
    pub income_band: IncomeBand,
    pub bedrooms: u32,
    /// Per-unit monthly subsidy.
    pub monthly_subsidy: MoneyAmount,
    pub units: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HousingParams {
    pub vacancy_rate: Rate,
    #[serde(default)]
    pub annual_growth: Rate,
    /// When set, year 1 already carries one year of growth (`(1+g)^t`);
    /// otherwise year 1 is the base (`(1+g)^(t-1)`).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub growth_from_first_year: bool,
}

impl HousingParams {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let v = self.vacancy_rate.value();
        if !(0.0..1.0).contains(&v) {
            return Err(InvariantViolation::new(
                "vacancy_rate",
                format!("vacancy rate {v} must lie in [0, 1)"),
            ));
        }
        self.annual_growth
            .check_discount()
            .map_err(|e| InvariantViolation::new("annual_growth", e.message))?;
        Ok(())
    }

    fn growth_factor(&self, year: u32) -> f64 {
        let exponent = if self.growth_from_first_year { year } else { year - 1 };
        (1.0 + self.annual_growth.value()).powi(exponent as i32)
    }
}

fn money(value: f64, path: impl Into<String>) -> Result<MoneyAmount, InvariantViolation> {
    MoneyAmount::from_dollars_f64(value).map_err(|e| InvariantViolation::new(path, e.to_string()))
}

/// Net monthly amount → annual series: vacancy on the monthly figure, then ×12, then growth.
fn housing_series(
    gross_monthly: MoneyAmount,
    params: &HousingParams,
    term: TermSpec,
) -> Result<AnnualSeries, InvariantViolation> {
    params.validate()?;
    let net_annual = gross_monthly.to_dollars() * (1.0 - params.vacancy_rate.value()) * 12.0;
    let values = (1..=term.years())
        .map(|t| money(net_annual * params.growth_factor(t), format!("[{t}]")))
        .collect::<Result<Vec<_>, _>>()?;
    AnnualSeries::new(values, term)
}

/// Gross monthly benefit `Σ units · (market − affordable)` over below-market bands.
///
/// Market-rate units pay market rent and contribute nothing.
pub fn gross_monthly_rent_gap(roll: &[RentRollEntry]) -> Result<MoneyAmount, InvariantViolation> {
    let mut total = MoneyAmount::ZERO;
    for (i, entry) in roll.iter().enumerate() {
        if entry.income_band == IncomeBand::MarketRate {
            continue;
        }
        let gap = entry.monthly_gap();
        if gap.is_negative() {
            return Err(InvariantViolation::new(
                format!("roll[{i}]"),
                format!(
                    "market rent {} is below affordable rent {} for a {} unit",
                    entry.market_rent, entry.affordable_rent, entry.income_band
                ),
            ));
        }
        total += gap
            .checked_mul(entry.units as i64)
            .ok_or_else(|| InvariantViolation::new(format!("roll[{i}]"), "rent gap overflows"))?;
    }
    Ok(total)
}

pub fn rent_gap_series(
    roll: &[RentRollEntry],
    params: &HousingParams,
    term: TermSpec,
) -> Result<AnnualSeries, InvariantViolation> {
    if roll.is_empty() {
        return Err(InvariantViolation::new("roll", "rent roll is empty"));
    }
    housing_series(gross_monthly_rent_gap(roll)?, params, term)
}

/// Total gross monthly subsidy: `Σ units · subsidy`.
pub fn total_gross_monthly_subsidy(
    subsidies: &[SubsidyEntry],
) -> Result<MoneyAmount, InvariantViolation> {
    let mut total = MoneyAmount::ZERO;
    for (i, entry) in subsidies.iter().enumerate() {
        if entry.monthly_subsidy.is_negative() {
            return Err(InvariantViolation::new(
                format!("subsidies[{i}].monthly_subsidy"),
                "monthly subsidy must not be negative",
            ));
        }
        total += entry
            .monthly_subsidy
            .checked_mul(entry.units as i64)
            .ok_or_else(|| InvariantViolation::new(format!("subsidies[{i}]"), "subsidy overflows"))?;
    }
    Ok(total)
}

pub fn subsidy_series(
    subsidies: &[SubsidyEntry],
    params: &HousingParams,
    term: TermSpec,
) -> Result<AnnualSeries, InvariantViolation> {
    if subsidies.is_empty() {
        return Err(InvariantViolation::new("subsidies", "subsidy table is empty"));
    }
    housing_series(total_gross_monthly_subsidy(subsidies)?, params, term)
}

/// Switches to a new loan count from `from_year` onward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoanRamp {
    pub from_year: u32,
    pub loans_per_year: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobsArchetype {
    pub name: String,
    pub loans_per_year: u32,
    pub avg_loan: MoneyAmount,
    /// Monetized job value created per $100k deployed.
    pub value_per_100k: MoneyAmount,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ramp: Vec<LoanRamp>,
}

impl JobsArchetype {
    fn loans_in_year(&self, year: u32) -> u32 {
        self.ramp
            .iter()
            .filter(|r| r.from_year <= year)
            .max_by_key(|r| r.from_year)
            .map_or(self.loans_per_year, |r| r.loans_per_year)
    }
}

fn default_growth_start() -> u32 {
    2
}

fn is_default_growth_start(v: &u32) -> bool {
    *v == 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobsParams {
    pub archetypes: Vec<JobsArchetype>,
    /// Escalation of the value of a job (compensation growth).
    pub comp_growth: Rate,
    #[serde(default)]
    pub loan_growth: Rate,
    /// First year in which the average loan has grown by one step.
    #[serde(default = "default_growth_start", skip_serializing_if = "is_default_growth_start")]
    pub loan_growth_from_year: u32,
    /// Average total compensation of one job in year 1, used to express
    /// the series as a job count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_compensation: Option<MoneyAmount>,
}

impl JobsParams {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        if self.archetypes.is_empty() {
            return Err(InvariantViolation::new("archetypes", "at least one archetype is required"));
        }
        for (i, a) in self.archetypes.iter().enumerate() {
            if a.avg_loan.is_negative() || a.value_per_100k.is_negative() {
                return Err(InvariantViolation::new(
                    format!("archetypes[{i}]"),
                    "loan amounts and values must not be negative",
                ));
            }
        }
        self.comp_growth
            .check_non_negative()
            .map_err(|e| InvariantViolation::new("comp_growth", e.message))?;
        self.loan_growth
            .check_non_negative()
            .map_err(|e| InvariantViolation::new("loan_growth", e.message))?;
        if self.loan_growth_from_year == 0 {
            return Err(InvariantViolation::new("loan_growth_from_year", "years are 1-based"));
        }
        if let Some(c) = self.avg_compensation {
            if c.cents() <= 0 {
                return Err(InvariantViolation::new("avg_compensation", "must be positive"));
            }
        }
        Ok(())
    }

    fn comp_factor(&self, year: u32) -> f64 {
        (1.0 + self.comp_growth.value()).powi(year as i32 - 1)
    }

    /// Jobs implied by a monetized value in `year`, when compensation is known.
    pub fn jobs_for(&self, value: MoneyAmount, year: u32) -> Option<f64> {
        self.avg_compensation
            .map(|c| value.to_dollars() / (c.to_dollars() * self.comp_factor(year)))
    }
}

/// `Σ_archetype deployed_t / 100k · value_per_100k · (1+comp_growth)^(t−1)`.
pub fn jobs_series(params: &JobsParams, term: TermSpec) -> Result<AnnualSeries, InvariantViolation> {
    params.validate()?;
    let values = (1..=term.years())
        .map(|t| {
            let steps = (t + 1).saturating_sub(params.loan_growth_from_year);
            let loan_factor = (1.0 + params.loan_growth.value()).powi(steps as i32);
            let year_value: f64 = params
                .archetypes
                .iter()
                .map(|a| {
                    let deployed = a.loans_in_year(t) as f64 * a.avg_loan.to_dollars() * loan_factor;
                    deployed / 100_000.0 * a.value_per_100k.to_dollars()
                })
                .sum();
            money(year_value * params.comp_factor(t), format!("[{t}]"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    AnnualSeries::new(values, term)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SalaryPeriod {
    #[default]
    Monthly,
    Annual,
}

fn is_zero_rate(r: &Rate) -> bool {
    r.value() == 0.0
}

fn is_zero_u32(v: &u32) -> bool {
    *v == 0
}

fn is_zero_f64(v: &f64) -> bool {
    *v == 0.0
}

fn is_zero_money(m: &MoneyAmount) -> bool {
    m.is_zero()
}

/// Graduate income uplift model.
///
/// Cohort `y` (1-based index into `graduates`) completes the program in
/// year `y + completion_lag_years` and earns its first uplifted salary in
/// year `completion + uplift_delay_years`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncomeUpliftParams {
    /// Enrolments per cohort; resignations are a share of these.
    pub students: Vec<u64>,
    /// Graduates per cohort.
    pub graduates: Vec<u64>,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub completion_lag_years: u32,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub uplift_delay_years: u32,
    /// Common starting salary of graduates and non-graduates.
    pub base_salary: MoneyAmount,
    #[serde(default)]
    pub salary_period: SalaryPeriod,
    /// Graduate salary above base for post-completion years 1, 2, ...
    /// (each entry measured against the base year).
    pub graduate_uplift: Vec<Rate>,
    /// Annual graduate salary growth once the uplift schedule is exhausted.
    #[serde(default, skip_serializing_if = "is_zero_rate")]
    pub graduate_growth_after: Rate,
    #[serde(default, skip_serializing_if = "is_zero_rate")]
    pub nongraduate_growth: Rate,
    #[serde(default, skip_serializing_if = "is_zero_money")]
    pub program_cost: MoneyAmount,
    /// Share of the program cost paid by the graduate in the completion year.
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub self_financed_share: f64,
    /// Per-graduate annual debt service on the financed share.
    #[serde(default, skip_serializing_if = "is_zero_money")]
    pub financed_annual_debt_service: MoneyAmount,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub financing_years: u32,
    /// Share of a cohort's students who resign.
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub resignation_rate: f64,
    #[serde(default, skip_serializing_if = "is_zero_money")]
    pub resignation_repayment: MoneyAmount,
    /// Share of graduate costs covered by scholarships or employers.
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub scholarship_share: f64,
    /// Annual escalation of all program costs, by cohort.
    #[serde(default, skip_serializing_if = "is_zero_rate")]
    pub cost_growth: Rate,
}

impl IncomeUpliftParams {
    pub fn validate(&self, term: TermSpec) -> Result<(), InvariantViolation> {
        if self.students.len() != self.graduates.len() {
            return Err(InvariantViolation::new(
                "graduates",
                format!(
                    "{} graduate cohorts but {} student cohorts",
                    self.graduates.len(),
                    self.students.len()
                ),
            ));
        }
        if self.graduates.len() < term.len() {
            return Err(InvariantViolation::new(
                "graduates",
                format!(
                    "{} cohorts supplied but the term is {} years",
                    self.graduates.len(),
                    term.years()
                ),
            ));
        }
        for (name, share) in [
            ("self_financed_share", self.self_financed_share),
            ("resignation_rate", self.resignation_rate),
            ("scholarship_share", self.scholarship_share),
        ] {
            if !(0.0..=1.0).contains(&share) {
                return Err(InvariantViolation::new(name, format!("share {share} must lie in [0, 1]")));
            }
        }
        if self.graduate_uplift.is_empty() {
            return Err(InvariantViolation::new("graduate_uplift", "uplift schedule is empty"));
        }
        for (name, m) in [
            ("base_salary", self.base_salary),
            ("program_cost", self.program_cost),
            ("financed_annual_debt_service", self.financed_annual_debt_service),
            ("resignation_repayment", self.resignation_repayment),
        ] {
            if m.is_negative() {
                return Err(InvariantViolation::new(name, "must not be negative"));
            }
        }
        for (name, r) in [
            ("graduate_growth_after", self.graduate_growth_after),
            ("nongraduate_growth", self.nongraduate_growth),
            ("cost_growth", self.cost_growth),
        ] {
            r.check_discount().map_err(|e| InvariantViolation::new(name, e.message))?;
        }
        Ok(())
    }

    fn annual_base(&self) -> f64 {
        let base = self.base_salary.to_dollars();
        match self.salary_period {
            SalaryPeriod::Monthly => base * 12.0,
            SalaryPeriod::Annual => base,
        }
    }

    /// Graduate salary relative to base in post-completion year `k ≥ 1`.
    fn graduate_factor(&self, k: u32) -> f64 {
        let n = self.graduate_uplift.len() as u32;
        if k <= n {
            1.0 + self.graduate_uplift[k as usize - 1].value()
        } else {
            (1.0 + self.graduate_uplift[n as usize - 1].value())
                * (1.0 + self.graduate_growth_after.value()).powi((k - n) as i32)
        }
    }

    fn nongraduate_factor(&self, k: u32) -> f64 {
        (1.0 + self.nongraduate_growth.value()).powi(k as i32 - 1)
    }
}

/// Pre-attribution change in beneficiaries' net income per year.
pub fn income_uplift_series(
    params: &IncomeUpliftParams,
    term: TermSpec,
) -> Result<AnnualSeries, InvariantViolation> {
    params.validate(term)?;
    let years = term.years();
    let mut totals = vec![0.0f64; term.len()];
    let base = params.annual_base();
    let net_cost_share = 1.0 - params.scholarship_share;

    for (idx, (&graduates, &students)) in params.graduates.iter().zip(&params.students).enumerate() {
        let cohort = idx as u32 + 1;
        let completion = cohort + params.completion_lag_years;
        if completion > years {
            break;
        }
        let grads = graduates as f64;
        let escalation = (1.0 + params.cost_growth.value()).powi(cohort as i32 - 1);
        let at = |t: u32| t as usize - 1;

        let self_financed =
            params.program_cost.to_dollars() * params.self_financed_share * net_cost_share * escalation;
        totals[at(completion)] -= grads * self_financed;
        totals[at(completion)] -= params.resignation_rate
            * students as f64
            * params.resignation_repayment.to_dollars()
            * escalation;

        let debt_service = params.financed_annual_debt_service.to_dollars() * net_cost_share * escalation;
        for t in (completion + 1)..=(completion + params.financing_years).min(years) {
            totals[at(t)] -= grads * debt_service;
        }

        let first_uplift = completion + params.uplift_delay_years;
        for t in first_uplift..=years {
            let k = t - first_uplift + 1;
            let uplift = base * (params.graduate_factor(k) - params.nongraduate_factor(k));
            totals[at(t)] += grads * uplift;
        }
    }

    let values = totals
        .iter()
        .enumerate()
        .map(|(i, &v)| money(v, format!("[{}]", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    AnnualSeries::new(values, term)
}

/// `value_t · haircut^t`.
pub fn apply_variability(series: &AnnualSeries, haircut: f64) -> Result<AnnualSeries, InvariantViolation> {
    if !(0.0..=1.0).contains(&haircut) {
        return Err(InvariantViolation::new(
            "variability_haircut",
            format!("haircut {haircut} must lie in [0, 1]"),
        ));
    }
    if haircut == 1.0 {
        return Ok(series.clone());
    }
    let values = series
        .iter()
        .enumerate()
        .map(|(i, v)| money(v.to_dollars() * haircut.powi(i as i32 + 1), format!("[{}]", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    AnnualSeries::new(values, series.term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rate(r: f64) -> Rate {
        Rate::new(r).unwrap()
    }

    fn term(y: u32) -> TermSpec {
        TermSpec::new(y).unwrap()
    }

    fn d(v: i64) -> MoneyAmount {
        MoneyAmount::from_dollars(v)
    }

    fn housing(vacancy: f64, growth: f64) -> HousingParams {
        HousingParams {
            vacancy_rate: rate(vacancy),
            annual_growth: rate(growth),
            growth_from_first_year: false,
        }
    }

    pub(crate) fn ff_roll() -> Vec<RentRollEntry> {
        let market = [1159, 1285, 1801];
        let bands = [
            (IncomeBand::Ami30, [532, 639, 738], [4, 4, 1]),
            (IncomeBand::Ami50, [888, 1066, 1231], [10, 12, 3]),
            (IncomeBand::Ami60, [1065, 1279, 1477], [3, 5, 0]),
            (IncomeBand::MarketRate, market, [0, 0, 0]),
        ];
        let mut roll = Vec::new();
        for (band, rents, units) in bands {
            for b in 0..3 {
                roll.push(RentRollEntry {
                    income_band: band,
                    bedrooms: b as u32 + 1,
                    affordable_rent: d(rents[b]),
                    market_rent: d(market[b]),
                    units: units[b],
                });
            }
        }
        roll
    }

    #[test]
    fn ff_rent_roll_reproduces_net_annual_impact() {
        let roll = ff_roll();
        assert_eq!(roll.iter().map(|e| e.units).sum::<u32>(), 42);
        assert_eq!(gross_monthly_rent_gap(&roll).unwrap(), d(13_515));
        let s = rent_gap_series(&roll, &housing(0.03, 0.0), term(10)).unwrap();
        // 13,515 × 0.97 = 13,109.55 per month, × 12
        assert_eq!(s.year(1).cents(), 15_731_460);
        assert_eq!(s.year(1).round_to_dollars(), 157_315);
        assert!(s.iter().all(|v| v == s.year(1)));
    }

    #[test]
    fn zero_gap_roll_gives_zero_series() {
        let roll: Vec<_> = ff_roll()
            .into_iter()
            .map(|e| RentRollEntry { affordable_rent: e.market_rent, ..e })
            .collect();
        let s = rent_gap_series(&roll, &housing(0.03, 0.0), term(4)).unwrap();
        assert_eq!(s, AnnualSeries::zeros(term(4)));
    }

    #[test]
    fn single_entry_rent_gap() {
        let roll = [RentRollEntry {
            income_band: IncomeBand::Ami50,
            bedrooms: 1,
            affordable_rent: d(400),
            market_rent: d(500),
            units: 10,
        }];
        let s = rent_gap_series(&roll, &housing(0.0, 0.0), term(2)).unwrap();
        assert_eq!(s.values(), &[d(12_000), d(12_000)]);
    }

    #[test]
    fn negative_gap_rejected_for_affordable_band() {
        let mut roll = ff_roll();
        roll[1].market_rent = d(100);
        let err = rent_gap_series(&roll, &housing(0.03, 0.0), term(1)).unwrap_err();
        assert_eq!(err.path, "roll[1]");
        assert!(rent_gap_series(&[], &housing(0.0, 0.0), term(1)).is_err());
    }

    #[test]
    fn vacancy_bounds() {
        assert!(housing(1.0, 0.0).validate().is_err());
        assert!(housing(-0.1, 0.0).validate().is_err());
        assert!(housing(0.0, 0.0).validate().is_ok());
    }

    pub(crate) fn lisc_subsidies() -> Vec<SubsidyEntry> {
        let rows = [
            (IncomeBand::Ami30, 0, "686", 2),
            (IncomeBand::Ami30, 1, "824.84", 47),
            (IncomeBand::Ami30, 2, "1200", 1),
            (IncomeBand::Ami50, 0, "579", 1),
            (IncomeBand::Ami50, 1, "688.99", 40),
            (IncomeBand::Ami50, 2, "813.75", 4),
            (IncomeBand::Ami80, 0, "427", 1),
            (IncomeBand::Ami80, 1, "395.98", 4),
        ];
        rows.iter()
            .map(|&(band, bedrooms, subsidy, units)| SubsidyEntry {
                income_band: band,
                bedrooms,
                monthly_subsidy: subsidy.parse().unwrap(),
                units,
            })
            .collect()
    }

    #[test]
    fn lisc_subsidy_reproduces_projected_net_annual_outcome() {
        let subs = lisc_subsidies();
        assert_eq!(subs.iter().map(|e| e.units).sum::<u32>(), 100);
        assert_eq!(total_gross_monthly_subsidy(&subs).unwrap(), d(74_744));
        let s = subsidy_series(&subs, &housing(0.07, 0.03), term(14)).unwrap();
        // 896,928 × 0.93
        assert_eq!(s.year(1).cents(), 83_414_304);
        assert_eq!(s.year(2).round_to_dollars(), 859_167);
        let expected_y2 = 834_143.04 * 1.03;
        assert!((s.year(2).to_dollars() - expected_y2).abs() < 0.006);
    }

    #[test]
    fn growth_from_first_year_shifts_by_one_period() {
        let subs = lisc_subsidies();
        let mut params = housing(0.07, 0.03);
        params.growth_from_first_year = true;
        let s = subsidy_series(&subs, &params, term(14)).unwrap();
        let millions: Vec<f64> = s.iter().map(|m| (m.to_dollars() / 1e4).round() / 100.0).collect();
        assert_eq!(
            millions,
            [0.86, 0.88, 0.91, 0.94, 0.97, 1.00, 1.03, 1.06, 1.09, 1.12, 1.15, 1.19, 1.22, 1.26]
        );
    }

    #[test]
    fn zero_subsidy_table_gives_zero_series() {
        let subs: Vec<_> = lisc_subsidies()
            .into_iter()
            .map(|e| SubsidyEntry { monthly_subsidy: MoneyAmount::ZERO, ..e })
            .collect();
        assert_eq!(
            subsidy_series(&subs, &housing(0.07, 0.03), term(3)).unwrap(),
            AnnualSeries::zeros(term(3))
        );
    }

    fn one_archetype(loans: u32, growth: f64) -> JobsParams {
        JobsParams {
            archetypes: vec![JobsArchetype {
                name: "unit".into(),
                loans_per_year: loans,
                avg_loan: d(100_000),
                value_per_100k: d(150_000),
                ramp: vec![],
            }],
            comp_growth: rate(growth),
            loan_growth: Rate::ZERO,
            loan_growth_from_year: 2,
            avg_compensation: None,
        }
    }

    #[test]
    fn jobs_unit_rate_case() {
        let s = jobs_series(&one_archetype(1, 0.0), term(3)).unwrap();
        assert_eq!(s.values(), &[d(150_000); 3]);
    }

    #[test]
    fn jobs_compensation_escalation() {
        let s = jobs_series(&one_archetype(1, 0.03), term(3)).unwrap();
        // independent escalation: 150k, 150k·1.03, 150k·1.03·1.03
        let mut expected = Vec::new();
        let mut v = 150_000.0f64;
        for _ in 0..3 {
            expected.push(MoneyAmount::from_dollars_f64(v).unwrap());
            v *= 1.03;
        }
        assert_eq!(s.values(), expected.as_slice());
        assert_eq!(s.year(3).cents(), 15_913_500);
    }

    #[test]
    fn jobs_zero_loans_and_ramps() {
        assert_eq!(jobs_series(&one_archetype(0, 0.03), term(3)).unwrap(), AnnualSeries::zeros(term(3)));

        let mut p = one_archetype(1, 0.0);
        p.archetypes[0].ramp.push(LoanRamp { from_year: 3, loans_per_year: 2 });
        p.loan_growth = rate(0.10);
        p.loan_growth_from_year = 3;
        let s = jobs_series(&p, term(4)).unwrap();
        assert_eq!(s.values(), &[d(150_000), d(150_000), d(330_000), d(363_000)]);
    }

    #[test]
    fn jobs_reject_negative_inputs() {
        let mut p = one_archetype(1, 0.0);
        p.archetypes[0].avg_loan = d(-1);
        assert!(jobs_series(&p, term(1)).is_err());
        let mut p = one_archetype(1, 0.0);
        p.archetypes.clear();
        assert!(jobs_series(&p, term(1)).is_err());
    }

    #[test]
    fn jobs_count_from_compensation() {
        let mut p = one_archetype(1, 0.03);
        p.avg_compensation = Some(d(75_000));
        let s = jobs_series(&p, term(2)).unwrap();
        assert!((p.jobs_for(s.year(2), 2).unwrap() - 2.0).abs() < 1e-6);
    }

    fn uplift_params(graduates: Vec<u64>) -> IncomeUpliftParams {
        IncomeUpliftParams {
            students: graduates.clone(),
            graduates,
            completion_lag_years: 0,
            uplift_delay_years: 0,
            base_salary: d(1_900),
            salary_period: SalaryPeriod::Monthly,
            graduate_uplift: vec![rate(0.30), rate(0.55)],
            graduate_growth_after: rate(0.05),
            nongraduate_growth: Rate::ZERO,
            program_cost: MoneyAmount::ZERO,
            self_financed_share: 0.0,
            financed_annual_debt_service: MoneyAmount::ZERO,
            financing_years: 0,
            resignation_rate: 0.0,
            resignation_repayment: MoneyAmount::ZERO,
            scholarship_share: 0.0,
            cost_growth: Rate::ZERO,
        }
    }

    #[test]
    fn single_graduate_first_year_uplift() {
        let s = income_uplift_series(&uplift_params(vec![1]), term(1)).unwrap();
        assert_eq!(s.year(1), d(6_840));
    }

    #[test]
    fn zero_graduates_zero_series() {
        let s = income_uplift_series(&uplift_params(vec![0; 5]), term(5)).unwrap();
        assert_eq!(s, AnnualSeries::zeros(term(5)));
    }

    #[test]
    fn uplift_schedule_and_costs() {
        let mut p = uplift_params(vec![10, 0, 0]);
        p.students = vec![20, 0, 0];
        p.salary_period = SalaryPeriod::Annual;
        p.base_salary = d(1_000);
        p.completion_lag_years = 1;
        p.program_cost = d(1_000);
        p.self_financed_share = 0.1;
        p.financed_annual_debt_service = d(50);
        p.financing_years = 5;
        p.resignation_rate = 0.1;
        p.resignation_repayment = d(100);
        p.scholarship_share = 0.5;
        let s = income_uplift_series(&p, term(3)).unwrap();
        // year 1: nothing; year 2: completion, 10·(300 − 50) − 2·100; year 3: 10·(550 − 25)
        assert_eq!(s.values(), &[d(0), d(2_300), d(5_250)]);
    }

    #[test]
    fn uplift_growth_after_schedule() {
        let mut p = uplift_params(vec![1, 0, 0, 0]);
        p.salary_period = SalaryPeriod::Annual;
        p.base_salary = d(1_000);
        p.nongraduate_growth = rate(0.05);
        let s = income_uplift_series(&p, term(4)).unwrap();
        // graduate 1.30, 1.55, 1.6275, 1.708875; non-graduate 1, 1.05, 1.1025, 1.157625
        assert_eq!(s.values(), &[d(300), d(500), "525".parse().unwrap(), "551.25".parse().unwrap()]);
    }

    #[test]
    fn inconsistent_cohorts_rejected() {
        let mut p = uplift_params(vec![1, 2]);
        p.students = vec![1];
        assert_eq!(income_uplift_series(&p, term(2)).unwrap_err().path, "graduates");
        let p = uplift_params(vec![1]);
        assert!(income_uplift_series(&p, term(2)).is_err());
    }

    #[test]
    fn variability_haircuts() {
        let s = AnnualSeries::new(vec![d(100), d(100)], term(2)).unwrap();
        assert_eq!(apply_variability(&s, 1.0).unwrap(), s);
        assert_eq!(apply_variability(&s, 0.9).unwrap().values(), &[d(90), d(81)]);
        assert_eq!(apply_variability(&s, 0.0).unwrap(), AnnualSeries::zeros(term(2)));
        assert!(apply_variability(&s, 1.1).is_err());
        assert!(apply_variability(&s, -0.1).is_err());
    }

    fn band_strategy() -> impl Strategy<Value = IncomeBand> {
        prop_oneof![
            Just(IncomeBand::Ami30),
            Just(IncomeBand::Ami50),
            Just(IncomeBand::Ami60),
            Just(IncomeBand::Ami80)
        ]
    }

    proptest! {
        #[test]
        fn rent_gap_matches_equivalent_subsidy(
            rows in prop::collection::vec((band_strategy(), 0u32..4, 0i64..500_000, 0i64..300_000, 0u32..50), 1..12),
            vacancy in 0.0f64..0.5, growth in 0.0f64..0.1, years in 1u32..15
        ) {
            let roll: Vec<_> = rows.iter().map(|&(band, bedrooms, afford, gap, units)| RentRollEntry {
                income_band: band, bedrooms,
                affordable_rent: MoneyAmount::from_cents(afford),
                market_rent: MoneyAmount::from_cents(afford + gap),
                units,
            }).collect();
            let subs: Vec<_> = roll.iter().map(|e| SubsidyEntry {
                income_band: e.income_band, bedrooms: e.bedrooms,
                monthly_subsidy: e.monthly_gap(), units: e.units,
            }).collect();
            let params = housing(vacancy, growth);
            prop_assert_eq!(
                rent_gap_series(&roll, &params, term(years)).unwrap(),
                subsidy_series(&subs, &params, term(years)).unwrap()
            );
        }

        #[test]
        fn housing_is_homogeneous_in_rents(
            rows in prop::collection::vec((0i64..100_000, 0u32..20), 1..8),
            k in 1i64..50, vacancy in 0.0f64..0.5, growth in 0.0f64..0.1
        ) {
            let subs = |scale: i64| -> Vec<SubsidyEntry> {
                rows.iter().map(|&(c, units)| SubsidyEntry {
                    income_band: IncomeBand::Ami50, bedrooms: 1,
                    monthly_subsidy: MoneyAmount::from_cents(c * scale), units,
                }).collect()
            };
            let params = housing(vacancy, growth);
            let base = subsidy_series(&subs(1), &params, term(5)).unwrap();
            let scaled = subsidy_series(&subs(k), &params, term(5)).unwrap();
            for (b, s) in base.iter().zip(scaled.iter()) {
                // exact up to the final cent rounding of each side
                prop_assert!((s.cents() - b.cents() * k).abs() <= k, "{} vs {}·{}", s, b, k);
            }
        }

        #[test]
        fn no_vacancy_no_growth_is_constant(
            rows in prop::collection::vec((0i64..100_000, 0u32..20), 1..8), years in 1u32..30
        ) {
            let subs: Vec<_> = rows.iter().map(|&(c, units)| SubsidyEntry {
                income_band: IncomeBand::Ami30, bedrooms: 2,
                monthly_subsidy: MoneyAmount::from_cents(c), units,
            }).collect();
            let s = subsidy_series(&subs, &housing(0.0, 0.0), term(years)).unwrap();
            prop_assert!(s.iter().all(|v| v == s.year(1) && !v.is_negative()));
        }

        #[test]
        fn jobs_are_homogeneous_in_values(
            value in 0i64..1_000_000, k in 1i64..20, growth in 0.0f64..0.1
        ) {
            let mut p = one_archetype(3, growth);
            p.archetypes[0].value_per_100k = d(value);
            let base = jobs_series(&p, term(4)).unwrap();
            p.archetypes[0].value_per_100k = d(value * k);
            let scaled = jobs_series(&p, term(4)).unwrap();
            for (b, s) in base.iter().zip(scaled.iter()) {
                prop_assert!((s.cents() - b.cents() * k).abs() <= k);
                prop_assert!(!s.is_negative());
            }
        }
    }
}
