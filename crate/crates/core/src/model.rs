//! Domain types shared across the engine.
//!
//! Every symbol of the impact NPV formula lives here or in [`AnnualSeries`]:
//! the term `T`, the initial investment `C₀`, the tier total `D`, the
//! financial returns `C_t`, the impact returns `I_t` and the hurdle rate `r`.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::money::MoneyAmount;

pub const MAX_TERM_YEARS: u32 = 100;

/// A broken invariant, with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct InvariantViolation {
    pub path: String,
    pub message: String,
}

impl InvariantViolation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        InvariantViolation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Prefixes the path, e.g. `c0` becomes `investment.c0`.
    pub fn within(mut self, parent: &str) -> Self {
        self.path = if self.path.is_empty() {
            parent.to_string()
        } else {
            format!("{parent}.{}", self.path)
        };
        self
    }
}

/// Per-year fraction, e.g. `0.06` for six percent a year.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn new(value: f64) -> Result<Self, InvariantViolation> {
        if value.is_finite() {
            Ok(Rate(value))
        } else {
            Err(InvariantViolation::new("", "rate must be a finite number"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 + r)^t` must stay positive, so a discount rate has to exceed -1.
    pub fn check_discount(self) -> Result<Self, InvariantViolation> {
        if self.0 > -1.0 {
            Ok(self)
        } else {
            Err(InvariantViolation::new(
                "",
                format!("discount rate {} must be greater than -1", self.0),
            ))
        }
    }

    pub fn check_non_negative(self) -> Result<Self, InvariantViolation> {
        if self.0 >= 0.0 {
            Ok(self)
        } else {
            Err(InvariantViolation::new(
                "",
                format!("rate {} must not be negative", self.0),
            ))
        }
    }

    /// One-decimal percent, e.g. `11.8%`.
    pub fn display_percent(self) -> String {
        format!("{:.1}%", self.0 * 100.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RateVisitor;

        impl<'de> Visitor<'de> for RateVisitor {
            type Value = Rate;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal fraction such as 0.0425")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rate, E> {
                Rate::new(v).map_err(|e| E::custom(e.message))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rate, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rate, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rate, E> {
                if v.contains('%') {
                    Err(E::custom(format!(
                        "percent strings are not accepted (`{v}`); write the rate as a decimal fraction, e.g. 0.0425"
                    )))
                } else {
                    Err(E::custom(format!(
                        "rates must be bare numbers, not strings (`{v}`)"
                    )))
                }
            }
        }

        deserializer.deserialize_any(RateVisitor)
    }
}

/// Investment term in whole years; all periods are annual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct TermSpec(u32);

impl TermSpec {
    pub fn new(years: u32) -> Result<Self, InvariantViolation> {
        if (1..=MAX_TERM_YEARS).contains(&years) {
            Ok(TermSpec(years))
        } else {
            Err(InvariantViolation::new(
                "",
                format!("term must be between 1 and {MAX_TERM_YEARS} years, got {years}"),
            ))
        }
    }

    pub fn years(self) -> u32 {
        self.0
    }

    #[allow(clippy::len_without_is_empty)] // a term is at least one year
    pub fn len(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u32> for TermSpec {
    type Error = String;
    fn try_from(years: u32) -> Result<Self, String> {
        TermSpec::new(years).map_err(|e| e.message)
    }
}

impl From<TermSpec> for u32 {
    fn from(term: TermSpec) -> u32 {
        term.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceLevel {
    ScientificConsensus,
    EmpiricalEvidence,
    ModelBased,
    Narrative,
}

impl EvidenceLevel {
    pub const ALL: [EvidenceLevel; 4] = [
        EvidenceLevel::ScientificConsensus,
        EvidenceLevel::EmpiricalEvidence,
        EvidenceLevel::ModelBased,
        EvidenceLevel::Narrative,
    ];

    /// 1 (strongest) through 4.
    pub fn rank(self) -> u8 {
        match self {
            EvidenceLevel::ScientificConsensus => 1,
            EvidenceLevel::EmpiricalEvidence => 2,
            EvidenceLevel::ModelBased => 3,
            EvidenceLevel::Narrative => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EvidenceLevel::ScientificConsensus => "Scientific consensus",
            EvidenceLevel::EmpiricalEvidence => "Empirical evidence",
            EvidenceLevel::ModelBased => "Model-based predictions",
            EvidenceLevel::Narrative => "Narrative",
        }
    }
}

/// Seniority grouping used for attribution.
///
/// Tier 1 holds below-market (BIC) debt and equity, tier 2 equity and
/// equity-like instruments, tier 3 debt and debt-like instruments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Tier1,
    Tier2,
    Tier3,
}

impl Tier {
    pub fn label(self) -> &'static str {
        match self {
            Tier::Tier1 => "Tier 1",
            Tier::Tier2 => "Tier 2",
            Tier::Tier3 => "Tier 3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapitalType {
    /// Below-market-rate impact capital.
    Bic,
    /// Market-rate impact capital.
    Mic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapitalClass {
    MarketRateImpact,
    BelowMarketImpact,
    /// Only produced when aggregating tranches.
    Blended,
    Traditional,
    Grant,
    NonInvestable,
}

impl CapitalClass {
    pub fn is_impact(self) -> bool {
        matches!(
            self,
            CapitalClass::MarketRateImpact | CapitalClass::BelowMarketImpact | CapitalClass::Blended
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            CapitalClass::MarketRateImpact => "Market-rate impact investment",
            CapitalClass::BelowMarketImpact => "Below-market-rate impact investment",
            CapitalClass::Blended => "Blended capital",
            CapitalClass::Traditional => "Traditional investment",
            CapitalClass::Grant => "Grant",
            CapitalClass::NonInvestable => "Non-investable",
        }
    }
}

/// Capital class together with the catalytic-opportunity flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: CapitalClass,
    pub catalytic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstrumentTerms {
    /// Annual interest on `C₀`, principal returned in the final year.
    InterestOnlyBalloon { rate: Rate },
    /// Constant annual payment that fully amortizes `C₀` over the term.
    LevelAmortizing { rate: Rate },
    InterestOnlyThenAmortizing { rate: Rate, io_years: u32 },
    /// No interim flows; a single sale or exit.
    EquityExit {
        exit_proceeds: MoneyAmount,
        exit_year: u32,
    },
}

impl InstrumentTerms {
    pub fn coupon_rate(&self) -> Option<Rate> {
        match *self {
            InstrumentTerms::InterestOnlyBalloon { rate }
            | InstrumentTerms::LevelAmortizing { rate }
            | InstrumentTerms::InterestOnlyThenAmortizing { rate, .. } => Some(rate),
            InstrumentTerms::EquityExit { .. } => None,
        }
    }

    pub fn is_equity(&self) -> bool {
        matches!(self, InstrumentTerms::EquityExit { .. })
    }

    pub fn validate(&self, term: TermSpec) -> Result<(), InvariantViolation> {
        if let Some(rate) = self.coupon_rate() {
            rate.check_non_negative()
                .map_err(|e| InvariantViolation::new("rate", e.message))?;
        }
        match *self {
            InstrumentTerms::InterestOnlyThenAmortizing { io_years, .. } => {
                if io_years >= term.years() {
                    return Err(InvariantViolation::new(
                        "io_years",
                        format!(
                            "interest-only period ({io_years} years) must be shorter than the term ({} years)",
                            term.years()
                        ),
                    ));
                }
            }
            InstrumentTerms::EquityExit {
                exit_proceeds,
                exit_year,
            } => {
                if exit_year == 0 || exit_year > term.years() {
                    return Err(InvariantViolation::new(
                        "exit_year",
                        format!("exit year {exit_year} must lie within 1..={}", term.years()),
                    ));
                }
                if exit_proceeds.is_negative() {
                    return Err(InvariantViolation::new(
                        "exit_proceeds",
                        "exit proceeds must not be negative",
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match *self {
            InstrumentTerms::InterestOnlyBalloon { rate } => {
                format!("interest-only at {}, principal returned as a balloon", rate.display_percent())
            }
            InstrumentTerms::LevelAmortizing { rate } => {
                format!("amortizing at {}", rate.display_percent())
            }
            InstrumentTerms::InterestOnlyThenAmortizing { rate, io_years } => format!(
                "{} interest-only for {io_years} years, then amortizing",
                rate.display_percent()
            ),
            InstrumentTerms::EquityExit {
                exit_proceeds,
                exit_year,
            } => format!(
                "equity, projected exit proceeds ${} in year {exit_year}",
                exit_proceeds.display_dollars()
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum HurdlePolicy {
    Explicit {
        rate: Rate,
    },
    /// Hurdle is the return the capital would earn in a comparable market investment.
    BicOpportunityCost {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        market_rate: Option<Rate>,
    },
    /// Hurdle is the instrument's own projected return.
    MicOwnRate,
}

/// Overrides the tier total `D` for a contiguous run of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierWindow {
    pub from_year: u32,
    pub to_year: u32,
    pub tier_total: MoneyAmount,
}

fn default_recovery() -> f64 {
    1.0
}

fn is_default_recovery(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvestmentSpec {
    /// Total initial investment `C₀`.
    pub c0: MoneyAmount,
    pub term: TermSpec,
    pub instrument: InstrumentTerms,
    pub tier: Tier,
    /// `D`: total invested in the same tier.
    pub tier_total: MoneyAmount,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tier_total_windows: Vec<TierWindow>,
    pub hurdle: HurdlePolicy,
    pub evidence: EvidenceLevel,
    /// Per-year impact multiplier; `None` defers to the evidence-level table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variability_haircut: Option<f64>,
    pub capital_type: CapitalType,
    /// Multiplier on every financial flow, for instruments with expected losses.
    #[serde(default = "default_recovery", skip_serializing_if = "is_default_recovery")]
    pub expected_recovery: f64,
}

impl InvestmentSpec {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        if self.c0.cents() <= 0 {
            return Err(InvariantViolation::new("c0", "initial investment must be positive"));
        }
        if self.tier_total.cents() <= 0 {
            return Err(InvariantViolation::new("tier_total", "tier total must be positive"));
        }
        if self.c0 > self.tier_total {
            return Err(InvariantViolation::new(
                "c0",
                format!(
                    "c0 ({}) exceeds tier_total ({}); C0/D must lie in (0, 1]",
                    self.c0, self.tier_total
                ),
            ));
        }
        self.instrument
            .validate(self.term)
            .map_err(|e| e.within("instrument"))?;

        let mut covered = vec![false; self.term.len()];
        for (i, w) in self.tier_total_windows.iter().enumerate() {
            let path = format!("tier_total_windows[{i}]");
            if w.from_year == 0 || w.from_year > w.to_year || w.to_year > self.term.years() {
                return Err(InvariantViolation::new(
                    path,
                    format!(
                        "window {}..={} must lie within 1..={}",
                        w.from_year,
                        w.to_year,
                        self.term.years()
                    ),
                ));
            }
            if w.tier_total.cents() <= 0 || self.c0 > w.tier_total {
                return Err(InvariantViolation::new(
                    format!("{path}.tier_total"),
                    format!("tier total {} must be positive and at least c0 ({})", w.tier_total, self.c0),
                ));
            }
            for year in w.from_year..=w.to_year {
                let slot = &mut covered[year as usize - 1];
                if *slot {
                    return Err(InvariantViolation::new(path, format!("year {year} is covered twice")));
                }
                *slot = true;
            }
        }

        if let Some(h) = self.variability_haircut {
            if !(0.0..=1.0).contains(&h) {
                return Err(InvariantViolation::new(
                    "variability_haircut",
                    format!("haircut {h} must lie in [0, 1]"),
                ));
            }
        }
        if !(self.expected_recovery.is_finite() && self.expected_recovery >= 0.0) {
            return Err(InvariantViolation::new(
                "expected_recovery",
                "expected recovery must be a non-negative number",
            ));
        }
        match self.hurdle {
            HurdlePolicy::Explicit { rate } => {
                rate.check_discount().map_err(|e| e.within("hurdle.rate"))?;
            }
            HurdlePolicy::BicOpportunityCost { market_rate: Some(rate) } => {
                rate.check_discount().map_err(|e| e.within("hurdle.market_rate"))?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Tier total `D` in force for each year `1..=T`.
    pub fn tier_totals(&self) -> Vec<MoneyAmount> {
        let mut totals = vec![self.tier_total; self.term.len()];
        for w in &self.tier_total_windows {
            for year in w.from_year..=w.to_year {
                if let Some(slot) = totals.get_mut(year as usize - 1) {
                    *slot = w.tier_total;
                }
            }
        }
        totals
    }

    /// Mismatches between the declared tier and the instrument/capital type.
    /// Advisory only; the declared tier is always used.
    pub fn tier_warnings(&self) -> Vec<String> {
        let expected = match (self.capital_type, self.instrument.is_equity()) {
            (CapitalType::Bic, _) => Tier::Tier1,
            (CapitalType::Mic, true) => Tier::Tier2,
            (CapitalType::Mic, false) => Tier::Tier3,
        };
        if expected == self.tier {
            Vec::new()
        } else {
            vec![format!(
                "declared {} but a {} {} instrument usually sits in {}",
                self.tier.label(),
                match self.capital_type {
                    CapitalType::Bic => "below-market",
                    CapitalType::Mic => "market-rate",
                },
                if self.instrument.is_equity() { "equity" } else { "debt" },
                expected.label()
            )]
        }
    }
}

/// Year-indexed amounts for `t = 1..=T`; the `t = 0` outflow is `-C₀` and is kept separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnnualSeries {
    values: Vec<MoneyAmount>,
}

impl AnnualSeries {
    pub fn new(values: Vec<MoneyAmount>, term: TermSpec) -> Result<Self, InvariantViolation> {
        if values.len() != term.len() {
            return Err(InvariantViolation::new(
                "",
                format!(
                    "series has {} values but the term is {} years",
                    values.len(),
                    term.years()
                ),
            ));
        }
        Ok(AnnualSeries { values })
    }

    pub fn zeros(term: TermSpec) -> Self {
        AnnualSeries {
            values: vec![MoneyAmount::ZERO; term.len()],
        }
    }

    /// Rounds each floating point dollar value to the nearest cent.
    pub fn from_dollars(values: &[f64], term: TermSpec) -> Result<Self, InvariantViolation> {
        let cents = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                MoneyAmount::from_dollars_f64(v)
                    .map_err(|e| InvariantViolation::new(format!("[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        AnnualSeries::new(cents, term)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn term(&self) -> TermSpec {
        TermSpec(self.values.len() as u32)
    }

    /// Value in year `t`, 1-based.
    pub fn year(&self, t: usize) -> MoneyAmount {
        self.values[t - 1]
    }

    pub fn values(&self) -> &[MoneyAmount] {
        &self.values
    }

    pub fn to_dollars(&self) -> Vec<f64> {
        self.values.iter().map(|m| m.to_dollars()).collect()
    }

    pub fn total(&self) -> MoneyAmount {
        self.values.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = MoneyAmount> + '_ {
        self.values.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ff_spec() -> InvestmentSpec {
        InvestmentSpec {
            c0: MoneyAmount::from_dollars(1_600_000),
            term: TermSpec::new(10).unwrap(),
            instrument: InstrumentTerms::InterestOnlyBalloon { rate: Rate::new(0.02).unwrap() },
            tier: Tier::Tier1,
            tier_total: MoneyAmount::from_dollars(1_600_000),
            tier_total_windows: vec![],
            hurdle: HurdlePolicy::BicOpportunityCost { market_rate: Some(Rate::new(0.06).unwrap()) },
            evidence: EvidenceLevel::ScientificConsensus,
            variability_haircut: None,
            capital_type: CapitalType::Bic,
            expected_recovery: 1.0,
        }
    }

    #[test]
    fn term_bounds() {
        assert!(TermSpec::new(0).is_err());
        assert!(TermSpec::new(1).is_ok());
        assert!(TermSpec::new(100).is_ok());
        assert!(TermSpec::new(101).is_err());
    }

    #[test]
    fn c0_above_tier_total_is_rejected() {
        let mut spec = ff_spec();
        spec.c0 = MoneyAmount::from_dollars(2_000_000);
        let err = spec.validate().unwrap_err();
        assert_eq!(err.path, "c0");
        assert!(err.message.contains("tier_total"));
    }

    #[test]
    fn io_years_must_be_shorter_than_term() {
        let mut spec = ff_spec();
        spec.instrument = InstrumentTerms::InterestOnlyThenAmortizing {
            rate: Rate::new(0.07).unwrap(),
            io_years: 10,
        };
        assert_eq!(spec.validate().unwrap_err().path, "instrument.io_years");
    }

    #[test]
    fn exit_year_within_term() {
        let mut spec = ff_spec();
        spec.instrument = InstrumentTerms::EquityExit {
            exit_proceeds: MoneyAmount::from_dollars(1),
            exit_year: 11,
        };
        assert_eq!(spec.validate().unwrap_err().path, "instrument.exit_year");
    }

    #[test]
    fn negative_coupon_rejected() {
        let mut spec = ff_spec();
        spec.instrument = InstrumentTerms::LevelAmortizing { rate: Rate::new(-0.01).unwrap() };
        assert_eq!(spec.validate().unwrap_err().path, "instrument.rate");
    }

    #[test]
    fn tier_windows_override_tier_total() {
        let mut spec = ff_spec();
        spec.term = TermSpec::new(7).unwrap();
        spec.c0 = MoneyAmount::from_dollars(12_000_000);
        spec.tier_total = MoneyAmount::from_dollars(12_000_000);
        spec.tier_total_windows = vec![TierWindow {
            from_year: 4,
            to_year: 7,
            tier_total: MoneyAmount::from_dollars(20_000_000),
        }];
        spec.validate().unwrap();
        let totals: Vec<i64> = spec.tier_totals().iter().map(|m| m.round_to_dollars()).collect();
        assert_eq!(totals, [12, 12, 12, 20, 20, 20, 20].map(|m| m * 1_000_000));
    }

    #[test]
    fn overlapping_windows_rejected() {
        let mut spec = ff_spec();
        let w = TierWindow { from_year: 2, to_year: 3, tier_total: spec.tier_total };
        spec.tier_total_windows = vec![w, TierWindow { from_year: 3, ..w }];
        assert!(spec.validate().unwrap_err().message.contains("twice"));
    }

    #[test]
    fn series_length_must_match_term() {
        let term = TermSpec::new(3).unwrap();
        assert!(AnnualSeries::new(vec![MoneyAmount::ZERO; 2], term).is_err());
        assert_eq!(AnnualSeries::zeros(term).len(), 3);
    }

    #[test]
    fn tier_warning_for_market_rate_debt_in_tier1() {
        let mut spec = ff_spec();
        assert!(spec.tier_warnings().is_empty());
        spec.capital_type = CapitalType::Mic;
        assert_eq!(spec.tier_warnings().len(), 1);
    }
}
