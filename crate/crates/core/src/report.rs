//! Due-diligence record and its renderings.
//!
//! Display rounding is applied once, here: whole dollars and one-decimal
//! percentages in text, exact cents in CSV and JSON.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::evaluation::{Evaluation, OutcomeStats};
use crate::model::{CapitalClass, Classification, EvidenceLevel, Rate, Tier};
use crate::money::MoneyAmount;
use crate::valuation::TimelineRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    ConsiderForInvestment,
    /// Never produced automatically; available to reviewers.
    Decline,
    InsufficientData,
}

impl Recommendation {
    pub fn label(self) -> &'static str {
        match self {
            Recommendation::ConsiderForInvestment => "Consider for possible investment",
            Recommendation::Decline => "Decline",
            Recommendation::InsufficientData => "Insufficient data for a recommendation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DueDiligenceRecord {
    pub scenario: String,
    pub title: String,
    pub investment: String,
    pub asset_class: String,
    pub evidence: EvidenceLevel,
    pub tier: Tier,
    pub classification: Classification,
    pub attribution_factor: f64,
    pub attribution_statement: String,
    pub outcomes: OutcomeStats,
    pub notable_outcomes: Vec<String>,
    pub hurdle_rate: Rate,
    pub projected_irr: Option<Rate>,
    pub impact_irr: Rate,
    pub all_irr_roots: Vec<Rate>,
    pub multiple_roots: bool,
    pub inpv_at_hurdle: MoneyAmount,
    pub nominal_outcome: MoneyAmount,
    pub recommendation: Recommendation,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub timeline: Vec<TimelineRow>,
}

fn dollars(m: MoneyAmount) -> String {
    let s = m.display_dollars();
    match s.strip_prefix('-') {
        Some(rest) => format!("-${rest}"),
        None => format!("${s}"),
    }
}

fn attribution_statement(e: &Evaluation) -> String {
    let spec = &e.scenario.investment;
    let mut s = format!(
        "{}; {}; attribution {:.4} (C0/D)",
        e.scenario.investment.evidence.label(),
        spec.tier.label(),
        e.valuation.attribution_factor
    );
    if !spec.tier_total_windows.is_empty() {
        let fractions: Vec<String> = (1..=spec.term.len())
            .map(|t| format!("{:.2}", e.attribution.at(t)))
            .collect();
        let _ = write!(s, ", by year [{}]", fractions.join(", "));
    }
    s.push_str(if e.classification.catalytic {
        "; catalytic opportunity"
    } else {
        "; not catalytic"
    });
    s
}

fn notable_outcomes(e: &Evaluation) -> Vec<String> {
    let o = &e.outcomes;
    let term = e.scenario.investment.term.years();
    let mut lines = vec![format!(
        "aggregate year-1 net benefit {} ({} attributed)",
        dollars(o.gross_year_one),
        dollars(o.attributed_year_one)
    )];
    if let (Some(annual), Some(over_term)) = (o.per_beneficiary_annual, o.per_beneficiary_term) {
        let label = o.beneficiary_label.as_deref().unwrap_or("beneficiary");
        lines.push(format!(
            "{} per {label} per year, {} per {label} over the {term}-year term ({} {label}s)",
            dollars(annual),
            dollars(over_term),
            o.beneficiaries.unwrap_or_default()
        ));
    }
    if let (Some(first), Some(last)) = (o.jobs_by_year.first(), o.jobs_by_year.last()) {
        lines.push(format!("{first:.0} jobs supported in year 1, {last:.0} in year {term}"));
    }
    lines
}

fn recommend(e: &Evaluation) -> Recommendation {
    let clears_hurdle = e.valuation.impact_irr.value() >= e.valuation.hurdle_rate.value();
    if clears_hurdle && e.classification.class.is_impact() {
        Recommendation::ConsiderForInvestment
    } else {
        Recommendation::InsufficientData
    }
}

pub fn build_report(e: &Evaluation) -> DueDiligenceRecord {
    let spec = &e.scenario.investment;
    let investment = if e.scenario.report.description.is_empty() {
        format!(
            "${} over {} years, {}",
            spec.c0.display_dollars(),
            spec.term.years(),
            spec.instrument.describe()
        )
    } else {
        e.scenario.report.description.clone()
    };
    DueDiligenceRecord {
        scenario: e.scenario.name.clone(),
        title: e.scenario.title.clone(),
        investment,
        asset_class: e.scenario.report.asset_class.clone(),
        evidence: spec.evidence,
        tier: spec.tier,
        classification: e.classification,
        attribution_factor: e.valuation.attribution_factor,
        attribution_statement: attribution_statement(e),
        outcomes: e.outcomes.clone(),
        notable_outcomes: notable_outcomes(e),
        hurdle_rate: e.valuation.hurdle_rate,
        projected_irr: e.valuation.financial_irr,
        impact_irr: e.valuation.impact_irr,
        all_irr_roots: e.valuation.all_irr_roots.clone(),
        multiple_roots: e.valuation.multiple_roots,
        inpv_at_hurdle: e.valuation.inpv_at_hurdle,
        nominal_outcome: e.outcomes.nominal_outcome,
        recommendation: recommend(e),
        notes: e.scenario.report.notes.clone(),
        warnings: e.warnings.clone(),
        timeline: e.valuation.timeline.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn render(record: &DueDiligenceRecord, format: Format) -> String {
    match format {
        Format::Text => render_text(record),
        Format::Json => render_json(record),
        Format::Csv => render_csv_timeline(&record.timeline),
    }
}

pub fn render_json(record: &DueDiligenceRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("records always serialize");
    s.push('\n');
    s
}

/// `year,financial,impact,total,discounted` for years `1..=T`, in cents.
pub fn render_csv_timeline(rows: &[TimelineRow]) -> String {
    let mut out = String::from("year,financial,impact,total,discounted\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.year, r.financial, r.impact, r.total, r.discounted);
    }
    out
}

fn class_label(c: &Classification) -> String {
    let base = c.class.label();
    match c.class {
        CapitalClass::BelowMarketImpact | CapitalClass::MarketRateImpact if c.catalytic => {
            format!("{base}, catalytic")
        }
        _ => base.to_string(),
    }
}

pub fn render_text(r: &DueDiligenceRecord) -> String {
    let projected = r.projected_irr.map_or("n/a".to_string(), |x| x.display_percent());
    let impact_irr = if r.multiple_roots {
        let all: Vec<String> = r.all_irr_roots.iter().map(|x| x.display_percent()).collect();
        format!("{} (roots: {})", r.impact_irr.display_percent(), all.join(", "))
    } else {
        r.impact_irr.display_percent()
    };
    let mut rows: Vec<(&str, String)> = vec![
        ("Investment", r.investment.clone()),
        ("Asset class", r.asset_class.clone()),
        ("Level of evidence", r.evidence.label().to_string()),
        ("Capital class", class_label(&r.classification)),
        ("Attribution & catalytic", r.attribution_statement.clone()),
    ];
    for (i, line) in r.notable_outcomes.iter().enumerate() {
        rows.push((if i == 0 { "Notable outcomes" } else { "" }, line.clone()));
    }
    rows.extend([
        ("Hurdle rate", r.hurdle_rate.display_percent()),
        ("Projected IRR", projected),
        ("Impact IRR", impact_irr),
        ("INPV at hurdle", dollars(r.inpv_at_hurdle)),
        ("Total outcome", dollars(r.nominal_outcome)),
        ("Recommendation", r.recommendation.label().to_string()),
    ]);

    let mut out = String::new();
    let heading = if r.title.is_empty() { &r.scenario } else { &r.title };
    let _ = writeln!(out, "{heading}\n{}", "=".repeat(heading.chars().count()));
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in &rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }

    let _ = writeln!(out, "\n{:>4}  {:>14}  {:>14}  {:>14}  {:>14}", "Year", "Financial", "Impact", "Total", "Discounted");
    for t in &r.timeline {
        let _ = writeln!(
            out,
            "{:>4}  {:>14}  {:>14}  {:>14}  {:>14}",
            t.year,
            dollars(t.financial),
            dollars(t.impact),
            dollars(t.total),
            dollars(t.discounted)
        );
    }
    for (i, note) in r.notes.iter().enumerate() {
        if i == 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Note: {note}");
    }
    for w in &r.warnings {
        let _ = writeln!(out, "Warning: {w}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{evaluate, Overrides};
    use crate::ingest::parse_scenario;

    const SCENARIO: &str = r#"
schema_version = 1
name = "small"

[investment]
c0 = 1000
term = 2
tier = "tier1"
tier_total = 1000
evidence = "narrative"
capital_type = "bic"
instrument = { kind = "interest_only_balloon", rate = 0.02 }
hurdle = { policy = "explicit", rate = 0.06 }

[impact_model]
model = "explicit"
values = [100, "100.25"]

[thresholds]
market_rate_floor = 0.06
impact_floor = { basis = "asserted", met = true }
"#;

    fn record() -> DueDiligenceRecord {
        build_report(&evaluate(&parse_scenario(SCENARIO).unwrap(), &Overrides::default()).unwrap())
    }

    #[test]
    fn json_round_trip() {
        let r = record();
        let back: DueDiligenceRecord = serde_json::from_str(&render_json(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_layout() {
        let csv = render_csv_timeline(&record().timeline);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "year,financial,impact,total,discounted");
        assert_eq!(lines[1], "1,20.00,100.00,120.00,113.21");
        assert_eq!(lines[2], "2,1020.00,100.25,1120.25,997.02");
    }

    #[test]
    fn recommendation_is_advisory() {
        let r = record();
        assert_eq!(r.recommendation, Recommendation::ConsiderForInvestment);
        let text = SCENARIO.replace("met = true", "met = false");
        let e = evaluate(&parse_scenario(&text).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(build_report(&e).recommendation, Recommendation::InsufficientData);
    }

    #[test]
    fn text_mentions_headline_figures() {
        let text = render_text(&record());
        assert!(text.contains("Impact IRR"));
        assert!(text.contains("Consider for possible investment"));
        assert!(text.contains("$1,120"));
    }
}
